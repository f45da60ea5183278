//! Exhaustive searches for `‖p + Aq‖ <= ‖q‖^{-v}` and the rank-one reduction
//! of the subgroup criterion.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::kernel::CKernel;
use super::{le_power, SubspaceSpec, MAX_REPORTED};
use crate::diophantine::{shell, verify_witness, ApproxWitness, IntKernel, Mode};
use crate::error::{Error, Result};
use crate::report::{vector_coeffs, CriterionReport, Violation};
use crate::scalar::{self, int, ExactScalar};

/// Result of an exhaustive witness search.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessSearch {
    /// The first witnesses in enumeration order (injected ones last).
    pub witnesses: Vec<ApproxWitness>,
    pub total: u64,
    pub checked: u64,
}

fn witness_violation(w: &ApproxWitness, v: &ExactScalar) -> Violation {
    let mut coeffs = vector_coeffs("p", &w.p);
    coeffs.extend(vector_coeffs("q", &w.q));
    Violation::new(coeffs, None, &w.quality, &w.size, v)
}

/// Searches start at this shell: every `q` with `‖q‖ = 1` meets the trivial
/// bound `‖p + Aq‖ <= 1`, which says nothing about approximation.
pub const MIN_SHELL: u64 = 2;

/// `quality <= size^{-v}`, deciding clear cases in floating point.
fn satisfies_fast(w_quality: &ExactScalar, size: u64, v: &ExactScalar, v_f: f64) -> bool {
    if w_quality.is_zero() {
        return true;
    }
    if size <= 1 {
        return *w_quality <= ExactScalar::one();
    }
    let margin = -scalar::ln_abs(w_quality) - v_f * (size as f64).ln();
    if margin > 1e-9 {
        return true;
    }
    if margin < -1e-9 {
        return false;
    }
    scalar::le_neg_power(w_quality, &int(size as i64), v)
}

/// All `q` with `2 <= ‖q‖ <= Q` (up to sign) and the optimal `p` satisfying
/// `‖p + Aq‖ <= ‖q‖^{-v}`, plus injected `(q, p)` pairs checked exactly.
pub fn search_witnesses(
    a: &[Vec<ExactScalar>],
    q_max: u64,
    v: &ExactScalar,
    injected: &[(Vec<BigInt>, Vec<BigInt>)],
) -> Result<WitnessSearch> {
    let kernel = IntKernel::new(a)?;
    let cols = kernel.cols();
    let shell_count = (2.0 * q_max as f64 + 1.0).powi(cols as i32);
    if shell_count > 5e8 {
        return Err(Error::EnumerationTooLarge(format!(
            "about {shell_count:.0} vectors q with ‖q‖ <= {q_max} in Z^{cols}"
        )));
    }
    let v_f = scalar::to_f64(v);
    let mut out = WitnessSearch {
        witnesses: Vec::new(),
        total: 0,
        checked: 0,
    };
    for s in MIN_SHELL..=q_max {
        for qi in shell(cols, s as i64) {
            out.checked += 1;
            let q: Vec<BigInt> = qi.iter().map(|&x| BigInt::from(x)).collect();
            let (p, quality, tie) = kernel.evaluate(&q);
            if satisfies_fast(&quality, s, v, v_f) {
                out.total += 1;
                if out.witnesses.len() < MAX_REPORTED {
                    out.witnesses.push(ApproxWitness {
                        q,
                        p,
                        quality,
                        size: int(s as i64),
                        mode: Mode::Standard,
                        q_shell: BigInt::from(s),
                        tie,
                    });
                }
            }
        }
    }
    for (q, p) in injected {
        let w = verify_witness(a, q, p, Mode::Standard)?;
        out.checked += 1;
        if w.satisfies(v) {
            out.total += 1;
            out.witnesses.push(w);
        }
    }
    Ok(out)
}

fn search_report(
    name: &str,
    a: &[Vec<ExactScalar>],
    q_max: u64,
    v: &ExactScalar,
    injected: &[(Vec<BigInt>, Vec<BigInt>)],
) -> Result<CriterionReport> {
    let found = search_witnesses(a, q_max, v, injected)?;
    let mut report = CriterionReport::new(name)
        .param("v", scalar::fmt_exact(v))
        .param("rows", a.len())
        .param("cols", a[0].len())
        .cutoff("Q", q_max)
        .cutoff("q_min", MIN_SHELL);
    report.search_space = format!(
        "all q with {MIN_SHELL} <= ‖q‖ <= {q_max} and nearest p{}",
        if injected.is_empty() {
            String::new()
        } else {
            format!("; {} injected pairs", injected.len())
        }
    );
    report.checked = found.checked;
    for w in &found.witnesses {
        report.push(witness_violation(w, v));
    }
    Ok(report.param("violations_total", found.total))
}

/// Evidence about extremality of the hyperplane `(x, a_0 + a_1x_1 + …)`:
/// searches `|q| <= Q`, `p ∈ Z^n` with `‖p + aq‖ <= |q|^{-v}`.
pub fn hyperplane_extremal_evidence(
    a: &[ExactScalar],
    q_max: u64,
    v: &ExactScalar,
    injected: &[(Vec<BigInt>, Vec<BigInt>)],
) -> Result<CriterionReport> {
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter("hyperplane needs n >= 2".into()));
    }
    if *v <= int(n as i64) {
        return Err(Error::InvalidParameter(format!("v must exceed n = {n}")));
    }
    let col: Vec<Vec<ExactScalar>> = a.iter().map(|x| vec![x.clone()]).collect();
    Ok(search_report("hyperplane", &col, q_max, v, injected)?.param("n", n))
}

/// Evidence about extremality of the line `x ↦ (x, b_1x, …, b_{n-1}x)`:
/// searches `‖q‖ <= Q`, `p ∈ Z` with `|p + bq| <= ‖q‖^{-v}`.
pub fn line_origin_extremal_evidence(
    b: &[ExactScalar],
    q_max: u64,
    v: &ExactScalar,
    injected: &[(Vec<BigInt>, Vec<BigInt>)],
) -> Result<CriterionReport> {
    let n = b.len() + 1;
    if b.is_empty() {
        return Err(Error::InvalidParameter("line needs n >= 2".into()));
    }
    if *v <= int(n as i64) {
        return Err(Error::InvalidParameter(format!("v must exceed n = {n}")));
    }
    Ok(search_report("line-origin", &[b.to_vec()], q_max, v, injected)?.param("n", n))
}

/// One rank-one witness carried through the reduction.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionEntry {
    pub witness: ApproxWitness,
    /// `‖(p', q)‖`, the size in the subgroup criterion.
    pub h: String,
    /// `‖(p', q)‖ <= C_A ‖q‖`, exactly.
    pub norm_bound_ok: bool,
    /// `v ln C_A / ln(C_A ‖q‖)`.
    pub slack: f64,
    /// Rational exponent `v - δ` at which the subgroup inequality was checked.
    pub reduced_v: String,
    pub transferred: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct J1Reduction {
    pub report: CriterionReport,
    pub entries: Vec<ReductionEntry>,
    /// `C_A = 1 + max(s+1, n-s)·max|A|`.
    pub c_a: String,
    /// `v ln C_A / ln Q`.
    pub slack_at_q: f64,
    /// Rank-one subgroup violations that are also `‖q‖^{-v}` witnesses.
    pub forward_checked: u64,
    pub forward_ok: bool,
}

/// Rounds `x >= 0` up to a multiple of `1/1000`.
fn ceil_thousandths(x: f64) -> ExactScalar {
    ExactScalar::new(BigInt::from((x * 1000.0).ceil() as i64), BigInt::from(1000))
}

/// Exhaustive search for `‖p + Aq‖ <= ‖q‖^{-v}` with `‖q‖ <= Q`, carried over
/// to the rank-one subgroup inequality with `w = (p, q)`.
pub fn check_j1_reduction(
    spec: &SubspaceSpec,
    v: &ExactScalar,
    q_max: u64,
    forward_bound: i64,
) -> Result<J1Reduction> {
    let n = spec.n();
    let s = spec.s();
    if *v <= int(n as i64) {
        return Err(Error::InvalidParameter(format!("v must exceed n = {n}")));
    }
    let found = search_witnesses(spec.matrix(), q_max, v, &[])?;
    let kernel = CKernel::new(spec, 1)?;
    let width = (s + 1).max(n - s) as i64;
    let c_a = ExactScalar::one() + int(width) * spec.max_abs();
    let ln_c = scalar::ln_abs(&c_a);
    let v_f = scalar::to_f64(v);
    let slack_at_q = if q_max > 1 {
        v_f * ln_c / (q_max as f64).ln()
    } else {
        f64::INFINITY
    };

    let mut report = CriterionReport::new("rank-one-reduction")
        .param("n", n)
        .param("s", s)
        .param("v", scalar::fmt_exact(v))
        .cutoff("Q", q_max)
        .cutoff("q_min", MIN_SHELL);
    report.search_space = format!("all q with {MIN_SHELL} <= ‖q‖ <= {q_max} and nearest p");
    report.checked = found.checked;

    let mut entries = Vec::new();
    for w in &found.witnesses {
        report.push(witness_violation(w, v));
        let full: Vec<BigInt> = w.p.iter().chain(&w.q).cloned().collect();
        let (lhs, _) = kernel.lhs_big(&full);
        debug_assert_eq!(lhs, w.quality);
        let h = kernel.outer_max_big(&full);
        let qn = w.q.iter().map(|x| x.abs()).max().expect("nonempty");
        let norm_bound_ok = ExactScalar::from_integer(h.clone())
            <= &c_a * ExactScalar::from_integer(qn.clone());
        let denom = ln_c + scalar::ln_bigint(&qn);
        let slack = if denom > 0.0 { v_f * ln_c / denom } else { 0.0 };
        let reduced = (v - ceil_thousandths(slack)).max(ExactScalar::zero());
        let transferred = lhs == w.quality && le_power(&lhs, &h, &reduced);
        entries.push(ReductionEntry {
            witness: w.clone(),
            h: h.to_string(),
            norm_bound_ok,
            slack,
            reduced_v: scalar::fmt_exact(&reduced),
            transferred,
        });
    }

    // Rank-one subgroup violations at exponent v are witnesses at v.
    let mut forward_checked = 0;
    let mut forward_ok = true;
    for w in super::reps::box_vectors(n + 1, forward_bound) {
        let h = kernel.outer_max_small(&w);
        if h < 2 {
            continue;
        }
        if kernel.violation_small(&w, v, &int(1)).is_some() {
            forward_checked += 1;
            let (p, q) = w.split_at(s + 1);
            let qb: Vec<BigInt> = q.iter().map(|&x| BigInt::from(x)).collect();
            let pb: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
            if qb.iter().all(|x| x.is_zero()) {
                forward_ok = false;
                continue;
            }
            let aw = verify_witness(spec.matrix(), &qb, &pb, Mode::Standard)?;
            forward_ok &= aw.satisfies(v);
        }
    }

    Ok(J1Reduction {
        report: report.param("violations_total", found.total),
        entries,
        c_a: scalar::fmt_exact(&c_a),
        slack_at_q,
        forward_checked,
        forward_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{liouville_witnesses, make_test_number, TestNumberKind};
    use crate::scalar::ratio;

    fn golden() -> ExactScalar {
        make_test_number(&TestNumberKind::Golden { digits: 40 }).unwrap().value
    }

    fn liouville() -> ExactScalar {
        make_test_number(&TestNumberKind::Liouville { base: 10, depth: 5 })
            .unwrap()
            .value
    }

    #[test]
    fn zero_matrix_gives_exact_zero_witnesses() {
        let spec = SubspaceSpec::new(2, 1, vec![vec![int(0)], vec![int(0)]]).unwrap();
        let r = check_j1_reduction(&spec, &int(3), 10, 2).unwrap();
        assert!(r.report.is_violated());
        let first = &r.entries[0].witness;
        assert!(first.quality.is_zero());
        assert_eq!(first.q, vec![BigInt::from(MIN_SHELL)]);
        assert!(r.entries.iter().all(|e| e.transferred && e.norm_bound_ok));
    }

    #[test]
    fn badly_approximable_pair_has_no_witness() {
        let spec = SubspaceSpec::new(2, 1, vec![vec![golden()], vec![int(0)]]).unwrap();
        let r = check_j1_reduction(&spec, &ratio(5, 2), 10_000, 3).unwrap();
        assert!(!r.report.is_violated());
        assert!(r.forward_ok);
    }

    #[test]
    fn reduction_transfers_liouville_witnesses() {
        let l = liouville();
        let spec = SubspaceSpec::new(2, 1, vec![vec![l.clone()], vec![l / int(7)]]).unwrap();
        let r = check_j1_reduction(&spec, &ratio(5, 2), 3000, 2).unwrap();
        for e in &r.entries {
            assert!(e.norm_bound_ok && e.transferred, "{e:?}");
        }
    }

    #[test]
    fn forward_implication_on_rational_spec() {
        let spec = SubspaceSpec::hyperplane(&[ratio(1, 2), ratio(1, 3)]).unwrap();
        let r = check_j1_reduction(&spec, &int(3), 20, 6).unwrap();
        assert!(r.forward_checked > 0);
        assert!(r.forward_ok);
    }

    #[test]
    fn hyperplane_cases() {
        let zero = hyperplane_extremal_evidence(&[int(0), int(0)], 5, &int(3), &[]).unwrap();
        assert!(zero.is_violated());
        let g = hyperplane_extremal_evidence(&[golden(), int(0)], 10_000, &ratio(5, 2), &[]).unwrap();
        assert!(!g.is_violated());
        let l = liouville();
        let w = &liouville_witnesses(10, 5)[3];
        let inj = vec![(w.q.clone(), vec![w.p[0].clone(), BigInt::zero()])];
        let lr = hyperplane_extremal_evidence(&[l, int(0)], 100, &int(3), &inj).unwrap();
        assert!(lr.is_violated());
        assert!(hyperplane_extremal_evidence(&[int(0), int(0)], 5, &int(2), &[]).is_err());
    }

    #[test]
    fn line_cases() {
        let zero = line_origin_extremal_evidence(&[int(0)], 5, &int(3), &[]).unwrap();
        assert!(zero.is_violated());
        let g = line_origin_extremal_evidence(&[golden()], 10_000, &ratio(5, 2), &[]).unwrap();
        assert!(!g.is_violated());
        let w = &liouville_witnesses(10, 5)[3];
        let inj = vec![(w.q.clone(), w.p.clone())];
        let lr = line_origin_extremal_evidence(&[liouville()], 100, &int(3), &inj).unwrap();
        assert!(lr.is_violated());
    }
}
