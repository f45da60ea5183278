//! Multiplicative (strong extremality) criteria: the flow inequality over
//! multi-parameter times, its hyperplane form with `Π_+`, and the
//! coordinate-count threshold.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::kernel::CKernel;
use super::reps::{rep_sources, EnumerationPlan};
use super::{coeff_map, SubspaceSpec, MAX_REPORTED};
use crate::diophantine::{
    exponent_estimate, flow_forward, verify_witness, ExponentEstimate, ExponentOptions, IntKernel, Mode,
};
use crate::error::{Error, Result};
use crate::exterior::{represent_subgroup, IndexSet};
use crate::lattice::FlowSpec;
use crate::logspace::LogLinear;
use crate::report::{vector_coeffs, CriterionReport, Violation};
use crate::scalar::{self, int, ExactScalar};

fn plus(x: &BigInt) -> BigInt {
    x.abs().max(BigInt::one())
}

/// Searches `p ∈ Z^n`, `1 <= q <= Q` for `‖p + aq‖ <= Π_+(p', q)^{-v/n}` with
/// `max(‖p'‖, |q|) > K`, where `p' = (p_1, …, p_{n-1})`.
///
/// Only `p_i ∈ {⌊-a_iq⌋, ⌈-a_iq⌉}` can matter: any other choice makes
/// `‖p + aq‖ > 1 >= Π_+^{-v/n}`. `q = 0` gives `‖p‖ >= 1`, which is a
/// violation only when `max(‖p'‖, |q|) <= 1 <= K`.
pub fn check_multiplicative_hyperplane(
    a: &[ExactScalar],
    q_max: u64,
    v: &ExactScalar,
    k_cut: u64,
) -> Result<CriterionReport> {
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if *v <= int(n as i64) {
        return Err(Error::InvalidParameter(format!("v must exceed n = {n}")));
    }
    if k_cut == 0 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    let col: Vec<Vec<ExactScalar>> = a.iter().map(|x| vec![x.clone()]).collect();
    let kernel = IntKernel::new(&col)?;
    let den = kernel.den().clone();
    let e = v / int(n as i64);
    let e_f = scalar::to_f64(&e);
    let qb = BigInt::from(q_max);
    let mut report = CriterionReport::new("multiplicative-hyperplane")
        .param("n", n)
        .param("v", scalar::fmt_exact(v))
        .cutoff("Q", q_max)
        .cutoff("K", k_cut);
    report.search_space = format!("1 <= q <= {q_max}, p_0 nearest, p_i in floor/ceil of -a_i q, ‖p'‖ <= {q_max}");
    let mut total = 0u64;
    for q in 1..=q_max {
        let qq = vec![BigInt::from(q)];
        let (p_near, _, _) = kernel.evaluate(&qq);
        // candidates per coordinate i >= 1
        let mut choices: Vec<Vec<BigInt>> = Vec::with_capacity(n - 1);
        for pn in p_near.iter().skip(1) {
            let mut c = vec![pn.clone()];
            c.push(pn + 1);
            c.push(pn - 1);
            choices.push(c);
        }
        let combos: usize = 3usize.pow((n - 1) as u32);
        for mut idx in 0..combos {
            let mut p = vec![p_near[0].clone()];
            for c in &choices {
                p.push(c[idx % 3].clone());
                idx /= 3;
            }
            let resid = kernel.residuals(&qq, &p);
            // only |p_i + a_i q| <= 1 can contribute
            if resid.iter().any(|r| r > &den) {
                continue;
            }
            let pmax = p[1..].iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero);
            if pmax > qb {
                continue;
            }
            let hsize = pmax.max(BigInt::from(q));
            if hsize <= BigInt::from(k_cut) {
                continue;
            }
            report.checked += 1;
            let quality = ExactScalar::new(resid.into_iter().max().expect("n >= 1"), den.clone());
            let pi = p[1..].iter().fold(BigInt::from(q), |acc, x| acc * plus(x));
            let pi_q = ExactScalar::from_integer(pi.clone());
            let hit = if quality.is_zero() {
                true
            } else {
                let margin = -scalar::ln_abs(&quality) - e_f * scalar::ln_bigint(&pi);
                if margin.abs() > 1e-9 {
                    margin > 0.0
                } else {
                    scalar::le_neg_power(&quality, &pi_q, &e)
                }
            };
            if hit {
                total += 1;
                if report.violations.len() < MAX_REPORTED {
                    let mut coeffs = vector_coeffs("p", &p);
                    coeffs.extend(vector_coeffs("q", &qq));
                    report.push(Violation::new(coeffs, None, &quality, &pi_q, &e));
                }
            }
        }
    }
    Ok(report.param("violations_total", total))
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongVerdict {
    /// `#{1 <= i <= n-1 : a_i != 0}`.
    pub k: usize,
    /// Strong extremality fails iff `ω(a) > k + 1`.
    pub threshold: usize,
    /// Extremality fails iff `ω(a) > n`.
    pub extremal_threshold: usize,
    pub estimate: ExponentEstimate,
    /// Some witness of size at least the estimate's `min_size` has
    /// `‖p + aq‖ <= |q|^{-(k+1+margin)}`, exactly.
    pub not_strongly_extremal_evidence: bool,
    pub evidence_q: Option<String>,
    pub margin: String,
}

/// Compares the exponent of `a` (as an `n×1` matrix) with `k + 1`.
pub fn strong_hyperplane_verdict(
    a: &[ExactScalar],
    schedule: &[u64],
    options: &ExponentOptions,
    margin: &ExactScalar,
) -> Result<StrongVerdict> {
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    let k = a[1..].iter().filter(|x| !x.is_zero()).count();
    let col: Vec<Vec<ExactScalar>> = a.iter().map(|x| vec![x.clone()]).collect();
    let estimate = exponent_estimate(&col, schedule, Mode::Standard, options)?;
    let v = int(k as i64 + 1) + margin;
    let evidence = estimate
        .witness_trail
        .iter()
        .find(|e| e.witness.satisfies(&v))
        .map(|e| e.witness.q[0].to_string());
    Ok(StrongVerdict {
        k,
        threshold: k + 1,
        extremal_threshold: n,
        not_strongly_extremal_evidence: evidence.is_some(),
        evidence_q: evidence,
        estimate,
        margin: scalar::fmt_exact(margin),
    })
}

/// Decides whether the flow inequality
/// `max(max_{0∈I} e^{t-t_I}‖c⁺+Ac⁻‖, max_{0∉I} e^{-t_I}|w_I|) >= e^{-βt}`
/// fails at `times`; returns the logs of the largest term when it does.
fn flow_inequality_fails(
    kernel: &CKernel,
    w: &[BigInt],
    times: &FlowSpec,
    beta: &ExactScalar,
) -> Result<Option<LogLinear>> {
    let t = times.total();
    let floor = -t.scale(beta);
    let floor_f = floor.to_f64();
    let mut terms: Vec<LogLinear> = Vec::new();
    for (set, lhs) in kernel.lhs_per_set(w) {
        if lhs.is_zero() {
            continue;
        }
        terms.push(&(&t - &times.partial(&set)) + &LogLinear::ln_of(&lhs)?);
    }
    for (set, c) in kernel.sets().iter().zip(w) {
        if set.contains(0) || c.is_zero() {
            continue;
        }
        let lc = LogLinear::ln_of(&ExactScalar::from_integer(c.abs()))?;
        terms.push(&lc - &times.partial(set));
    }
    let mut best: Option<LogLinear> = None;
    for term in terms {
        let gap = term.to_f64() - floor_f;
        let holds = if gap.abs() > 1e-9 * (1.0 + floor_f.abs()) {
            gap > 0.0
        } else {
            (&term - &floor).try_sign()? != Ordering::Less
        };
        if holds {
            return Ok(None);
        }
        if best.as_ref().map_or(true, |b| term.to_f64() > b.to_f64()) {
            best = Some(term);
        }
    }
    Ok(Some(best.unwrap_or_else(|| floor.clone() - LogLinear::constant(int(1)))))
}

fn flow_violation(sets: &[IndexSet], w: &[BigInt], times: &FlowSpec, beta: &ExactScalar, top: &LogLinear) -> Violation {
    let mut v = Violation::new(coeff_map(sets, w.iter()), None, &ExactScalar::zero(), &int(1), &int(0));
    let (num, den) = match top.exp_exact() {
        Some(r) => (r.numer().to_string(), r.denom().to_string()),
        None => ("exp(".to_string() + &top.to_string() + ")", "1".to_string()),
    };
    v.lhs_num = num;
    v.lhs_den = den;
    v.rhs_num = None;
    v.rhs_den = None;
    let t: Vec<String> = times.times().iter().map(|x| x.to_string()).collect();
    v.rhs_expr = format!("exp(-{}*({})), t = ({})", scalar::fmt_exact(beta), times.total(), t.join(", "));
    v
}

/// Checks the flow inequality on a grid of multi-parameter times with
/// `t >= T`, over representatives of every rank with entries in
/// `[-bound, bound]`.
pub fn check_multiplicative_flow(
    spec: &SubspaceSpec,
    grid: &[FlowSpec],
    beta: &ExactScalar,
    t_min: &ExactScalar,
    coeff_bound: i64,
    plan: &EnumerationPlan,
) -> Result<CriterionReport> {
    let n = spec.n();
    if !beta.is_positive() {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let mut report = CriterionReport::new("multiplicative-flow")
        .param("n", n)
        .param("s", spec.s())
        .param("beta", scalar::fmt_exact(beta))
        .cutoff("T", scalar::fmt_exact(t_min))
        .cutoff("coeff_bound", coeff_bound)
        .cutoff("grid_points", grid.len());
    let t_floor = LogLinear::constant(t_min.clone());
    let active: Vec<&FlowSpec> = grid
        .iter()
        .filter(|g| g.n() == n && (&g.total() - &t_floor).sign() != Ordering::Less)
        .collect();
    let mut spaces = Vec::new();
    let mut total = 0u64;
    for j in 1..=n {
        let kernel = CKernel::new(spec, j)?;
        for src in rep_sources(n + 1, j, coeff_bound, plan)? {
            spaces.push(src.description.clone());
            for w in src.iter() {
                let wb: Vec<BigInt> = w.iter().map(|&x| BigInt::from(x)).collect();
                for times in &active {
                    report.checked += 1;
                    if let Some(top) = flow_inequality_fails(&kernel, &wb, times, beta)? {
                        total += 1;
                        if report.violations.len() < MAX_REPORTED {
                            report.push(flow_violation(kernel.sets(), &wb, times, beta, &top));
                        }
                    }
                }
            }
        }
    }
    report.search_space = format!("{} grid points with t >= T; {}", active.len(), spaces.join("; "));
    Ok(report.param("violations_total", total))
}

/// The one-parameter time built from a subgroup-criterion witness.
#[derive(Clone, Debug)]
pub struct FlowTimeCertificate {
    pub gamma: ExactScalar,
    pub beta: ExactScalar,
    pub t: LogLinear,
    /// The flow inequality fails at `t` with `β = γ/2`, exactly.
    pub violated: bool,
}

/// From `max_{0∈I}‖c⁺+Ac⁻‖ <= h^{-v}` (rank `j`) constructs
/// `t = ln h / (b - γ)` with `a = (n+1-j)/n`, `b = j/n`, `γ = (bv-a)/(v+1)`,
/// and checks that the flow inequality fails there for `β = γ/2`.
pub fn flow_time_from_witness(
    spec: &SubspaceSpec,
    basis: &[Vec<BigInt>],
    v: &ExactScalar,
) -> Result<FlowTimeCertificate> {
    let n = spec.n();
    let rep = represent_subgroup(basis)?;
    let j = rep.rank();
    let kernel = CKernel::new(spec, j)?;
    let w: Vec<BigInt> = kernel
        .sets()
        .iter()
        .map(|s| rep.multivector().coefficient(s).to_integer())
        .collect();
    let h = kernel.outer_max_big(&w);
    if h.is_zero() {
        return Err(Error::InvalidParameter("w has no coefficient off 0".into()));
    }
    let (lhs, _) = kernel.lhs_big(&w);
    let nq = int(n as i64);
    let a = int((n + 1 - j) as i64) / &nq;
    let b = int(j as i64) / &nq;
    let cert = flow_forward(&a, &b, v, &lhs, &ExactScalar::from_integer(h))?;
    if !cert.gamma.is_positive() {
        return Err(Error::InvalidParameter("need gamma > 0, i.e. v > (n+1-j)/j".into()));
    }
    let beta = &cert.gamma / int(2);
    let times = FlowSpec::one_parameter(n, cert.t.clone())?;
    let violated = flow_inequality_fails(&kernel, &w, &times, &beta)?.is_some();
    Ok(FlowTimeCertificate {
        gamma: cert.gamma,
        beta,
        t: cert.t,
        violated,
    })
}

/// Whether `(p, q)` satisfies `‖p + aq‖ <= Π_+(p', q)^{-v/n}`, exactly.
pub fn violates_multiplicative(a: &[ExactScalar], p: &[BigInt], q: &BigInt, v: &ExactScalar) -> Result<bool> {
    let col: Vec<Vec<ExactScalar>> = a.iter().map(|x| vec![x.clone()]).collect();
    let w = verify_witness(&col, &[q.clone()], p, Mode::Standard)?;
    let pi = p[1..].iter().fold(plus(q), |acc, x| acc * plus(x));
    let e = v / int(a.len() as i64);
    Ok(w.quality.is_zero() || scalar::le_neg_power(&w.quality, &ExactScalar::from_integer(pi), &e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{best_approx, liouville_witnesses, make_test_number, TestNumberKind};
    use crate::scalar::ratio;

    fn liouville() -> ExactScalar {
        make_test_number(&TestNumberKind::Liouville { base: 10, depth: 5 })
            .unwrap()
            .value
    }

    fn golden() -> ExactScalar {
        make_test_number(&TestNumberKind::Golden { digits: 40 }).unwrap().value
    }

    #[test]
    fn rational_hyperplane_violates_multiplicative_form() {
        let r = check_multiplicative_hyperplane(&[ratio(2, 5), int(0)], 20, &int(3), 1).unwrap();
        assert!(r.is_violated());
        assert!(r.violations.iter().any(|v| v.lhs().is_zero()));
    }

    #[test]
    fn badly_approximable_axis_has_no_violation() {
        // |q·φ - p| ~ 0.447/q beats q^{-3/2} only for q <= 5.
        let small = check_multiplicative_hyperplane(&[golden(), int(0)], 1000, &int(3), 1).unwrap();
        assert!(small.is_violated());
        let r = check_multiplicative_hyperplane(&[golden(), int(0)], 1000, &int(3), 5).unwrap();
        assert!(!r.is_violated(), "{:?}", r.violations.first());
    }

    #[test]
    fn multiplicative_and_standard_witnesses_transfer() {
        // A standard violation ‖p + aq‖ <= h^{-v}, h = max(‖p'‖,|q|), is a
        // Π_+ violation at v; a Π_+ violation at v is standard at v/n.
        let a = [ratio(13, 31), ratio(-9, 23)];
        let v = int(3);
        let r = check_multiplicative_hyperplane(&a, 200, &v, 1).unwrap();
        for viol in &r.violations {
            let p: Vec<BigInt> = (0..2).map(|i| viol.w_coeffs[&format!("p{i}")].parse().unwrap()).collect();
            let q: BigInt = viol.w_coeffs["q0"].parse().unwrap();
            let h = p[1].abs().max(q.abs());
            let lhs = viol.lhs();
            assert!(lhs.is_zero() || scalar::le_neg_power(&lhs, &ExactScalar::from_integer(h), &(&v / int(2))));
        }
        let w = [BigInt::from(-13), BigInt::from(9)];
        let q = BigInt::from(31 * 23);
        let p = [&w[0] * 23, &w[1] * 31];
        assert!(violates_multiplicative(&a, &p, &q, &v).unwrap());
    }

    #[test]
    fn strong_thresholds() {
        let opts = ExponentOptions::default();
        let v = strong_hyperplane_verdict(&[golden(), int(0), int(0)], &[2000], &opts, &ratio(1, 2)).unwrap();
        assert_eq!((v.k, v.threshold, v.extremal_threshold), (0, 1, 3));
        assert!(!v.not_strongly_extremal_evidence);
        let v = strong_hyperplane_verdict(&[golden(), ratio(1, 3), int(2)], &[50], &opts, &ratio(1, 2)).unwrap();
        assert_eq!(v.k, 2);
        let w = &liouville_witnesses(10, 5)[3];
        let opts = ExponentOptions {
            min_size: None,
            injected: vec![(w.q.clone(), vec![w.p[0].clone(), BigInt::zero()])],
        };
        let v = strong_hyperplane_verdict(&[liouville(), int(0)], &[1000], &opts, &ratio(1, 2)).unwrap();
        assert!(v.not_strongly_extremal_evidence);
        assert!(v.estimate.omega_hat >= 4.0);
    }

    #[test]
    fn trivial_term_keeps_inequality() {
        // t = 0 for the coordinate of a nonzero w_I with 0 ∉ I.
        let spec = SubspaceSpec::hyperplane(&[ratio(1, 3), ratio(1, 7)]).unwrap();
        let kernel = CKernel::new(&spec, 1).unwrap();
        let w = vec![BigInt::from(0), BigInt::from(1), BigInt::from(0)];
        let times = FlowSpec::multi_parameter(vec![LogLinear::zero(), LogLinear::constant(int(40))]).unwrap();
        assert!(flow_inequality_fails(&kernel, &w, &times, &ratio(1, 100)).unwrap().is_none());
    }

    #[test]
    fn rational_spec_violation_family() {
        let spec = SubspaceSpec::hyperplane(&[ratio(1, 2), int(0)]).unwrap();
        let grid: Vec<FlowSpec> = [10, 20, 40]
            .iter()
            .map(|&t| FlowSpec::one_parameter(2, LogLinear::constant(int(t))).unwrap())
            .collect();
        let plan = EnumerationPlan::default();
        let r = check_multiplicative_flow(&spec, &grid, &ratio(1, 4), &int(5), 2, &plan).unwrap();
        assert!(r.is_violated());
        // the exact-zero witness (1, 0, -2) fails at the largest time
        let best = best_approx(&[vec![ratio(1, 2)], vec![int(0)]], 5).unwrap();
        assert!(best.last().unwrap().quality.is_zero());
    }

    #[test]
    fn one_parameter_reproduces_rank_one_violation() {
        let l = liouville();
        let spec = SubspaceSpec::new(2, 1, vec![vec![int(0)], vec![l]]).unwrap();
        let w = &liouville_witnesses(10, 5)[3];
        let basis = vec![vec![BigInt::zero(), w.p[0].clone(), w.q[0].clone()]];
        let c = flow_time_from_witness(&spec, &basis, &int(3)).unwrap();
        assert!(c.violated);
        assert_eq!(c.gamma, ratio(1, 8));
    }
}
