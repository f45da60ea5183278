//! Finite-scale checkers for the extremality criteria of affine subspaces
//! `x ↦ (x, x̃A)`.
//!
//! Every check reports either `holds-at-scale` (relative to explicit
//! cutoffs) or `violated` with exact, re-checkable witnesses.

mod kernel;
mod measure;
mod multiplicative;
pub mod reps;
mod search;

pub use kernel::{column_vector_suite, corank_one_suite, CKernel, SuiteConfig, SuiteOutcome};
pub use measure::{fit_loglog_slope, is_member_exact, measure_a_set, MeasureEstimate};
pub use multiplicative::{
    check_multiplicative_flow, check_multiplicative_hyperplane, flow_time_from_witness, strong_hyperplane_verdict, violates_multiplicative,
    FlowTimeCertificate, StrongVerdict,
};
pub use reps::{enumerate_reps, EnumerationPlan, RepEnumeration};
pub use search::{
    check_j1_reduction, hyperplane_extremal_evidence, line_origin_extremal_evidence,
    search_witnesses, J1Reduction, ReductionEntry, WitnessSearch,
};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exterior::{represent_subgroup, IndexSet};
use crate::report::{CriterionReport, Violation};
use crate::scalar::{self, ExactScalar};

/// Stored violations per report; the total is always recorded.
pub const MAX_REPORTED: usize = 256;

/// An `s`-dimensional affine subspace of `R^n` parametrized by
/// `x ↦ (x, x̃A)` with `x̃ = (1, x)` and `A` of shape `(s+1)×(n-s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceSpec {
    n: usize,
    s: usize,
    a: Vec<Vec<ExactScalar>>,
}

impl SubspaceSpec {
    pub fn new(n: usize, s: usize, a: Vec<Vec<ExactScalar>>) -> Result<Self> {
        if s == 0 || s >= n {
            return Err(Error::InvalidParameter(format!("need 0 < s < n, got s={s}, n={n}")));
        }
        if a.len() != s + 1 || a.iter().any(|r| r.len() != n - s) {
            return Err(Error::InvalidParameter(format!(
                "A must be {}x{}",
                s + 1,
                n - s
            )));
        }
        Ok(Self { n, s, a })
    }

    /// The hyperplane `(x, a_0 + a_1x_1 + … + a_{n-1}x_{n-1})`.
    pub fn hyperplane(a: &[ExactScalar]) -> Result<Self> {
        let n = a.len();
        Self::new(n, n.saturating_sub(1), a.iter().map(|x| vec![x.clone()]).collect())
    }

    /// The line through the origin `x ↦ (x, b_1x, …, b_{n-1}x)`.
    pub fn line_through_origin(b: &[ExactScalar]) -> Result<Self> {
        let n = b.len() + 1;
        Self::new(n, 1, vec![vec![ExactScalar::zero(); b.len()], b.to_vec()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn matrix(&self) -> &[Vec<ExactScalar>] {
        &self.a
    }

    /// `max |A_kl|`.
    pub fn max_abs(&self) -> ExactScalar {
        scalar::sup_abs(self.a.iter().flatten())
    }
}

/// Search parameters for the rank-`j` criterion.
#[derive(Clone, Debug)]
pub struct CriterionParams {
    pub v: ExactScalar,
    pub j: usize,
    /// Only representatives with `max_{0∉I}|w_I| > N` are tested.
    pub n_cut: ExactScalar,
    pub coeff_bound: i64,
    pub plan: EnumerationPlan,
    /// Extra bases (one per subgroup), verified like enumerated ones.
    pub injected: Vec<Vec<Vec<BigInt>>>,
}

impl CriterionParams {
    pub fn new(v: ExactScalar, j: usize, coeff_bound: i64) -> Self {
        Self {
            v,
            j,
            n_cut: ExactScalar::one(),
            coeff_bound,
            plan: EnumerationPlan::default(),
            injected: Vec::new(),
        }
    }
}

fn coeff_map<'a>(sets: &[IndexSet], w: impl Iterator<Item = &'a BigInt>) -> BTreeMap<String, String> {
    sets.iter()
        .zip(w)
        .filter(|(_, c)| !c.is_zero())
        .map(|(s, c)| (s.to_string(), c.to_string()))
        .collect()
}

/// Checks `max_{0∈I}‖c⁺ + Ac⁻‖ > (max_{0∉I}|w_I|)^{-v}` over representatives
/// of rank `j` with `max_{0∉I}|w_I| > N`.
pub fn check_subgroup_criterion(spec: &SubspaceSpec, params: &CriterionParams) -> Result<CriterionReport> {
    let n = spec.n;
    let j = params.j;
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!("rank j={j} outside 1..={n}")));
    }
    let threshold = ExactScalar::new(BigInt::from(n + 1 - j), BigInt::from(j));
    if params.v <= threshold {
        return Err(Error::InvalidParameter(format!(
            "v must exceed (n+1-j)/j = {}",
            scalar::fmt_exact(&threshold)
        )));
    }
    let kernel = CKernel::new(spec, j)?;
    let sources = reps::rep_sources(n + 1, j, params.coeff_bound, &params.plan)?;
    let mut report = CriterionReport::new("subgroup")
        .param("n", n)
        .param("s", spec.s)
        .param("j", j)
        .param("v", scalar::fmt_exact(&params.v))
        .cutoff("N", scalar::fmt_exact(&params.n_cut))
        .cutoff("coeff_bound", params.coeff_bound);
    let mut total = 0u64;
    let mut descriptions: Vec<String> = Vec::new();
    for src in &sources {
        descriptions.push(src.description.clone());
        for w in src.iter() {
            report.checked += 1;
            if let Some(v) = kernel.violation_small(w, &params.v, &params.n_cut) {
                total += 1;
                if report.violations.len() < MAX_REPORTED {
                    report.push(v);
                }
            }
        }
    }
    for basis in &params.injected {
        let rep = represent_subgroup(basis)?;
        if rep.rank() != j || rep.ambient_n() != n {
            return Err(Error::InvalidParameter("injected basis has the wrong shape".into()));
        }
        let w: Vec<BigInt> = kernel
            .sets()
            .iter()
            .map(|s| rep.multivector().coefficient(s).to_integer())
            .collect();
        report.checked += 1;
        if let Some(v) = kernel.violation_big(&w, &params.v, &params.n_cut) {
            total += 1;
            report.push(v);
        }
    }
    if !params.injected.is_empty() {
        descriptions.push(format!("{} injected bases", params.injected.len()));
    }
    report.search_space = descriptions.join("; ");
    Ok(report.param("violations_total", total))
}

/// Builds a violation record from big coefficients.
fn violation_record(
    sets: &[IndexSet],
    w: &[BigInt],
    argmax: &IndexSet,
    lhs: &ExactScalar,
    h: &BigInt,
    v: &ExactScalar,
) -> Violation {
    Violation::new(
        coeff_map(sets, w.iter()),
        Some(argmax.to_string()),
        lhs,
        &ExactScalar::from_integer(h.clone()),
        v,
    )
}

/// `‖·‖`-size threshold test shared by the checkers: `h > N` for integer `h`.
fn exceeds_cut(h: &BigInt, n_cut: &ExactScalar) -> bool {
    ExactScalar::from_integer(h.clone()) > *n_cut
}

/// `lhs <= h^{-v}` exactly, with `lhs = 0` always a violation.
fn le_power(lhs: &ExactScalar, h: &BigInt, v: &ExactScalar) -> bool {
    if lhs.is_zero() {
        return true;
    }
    if !h.is_positive() {
        return false;
    }
    scalar::le_neg_power(lhs, &ExactScalar::from_integer(h.clone()), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{liouville_witnesses, make_test_number, TestNumberKind};
    use crate::scalar::{int, ratio};

    fn liouville() -> ExactScalar {
        make_test_number(&TestNumberKind::Liouville { base: 10, depth: 5 })
            .unwrap()
            .value
    }

    #[test]
    fn spec_shapes() {
        assert!(SubspaceSpec::new(3, 0, vec![vec![int(1); 3]]).is_err());
        assert!(SubspaceSpec::new(3, 1, vec![vec![int(1); 2]; 2]).is_ok());
        let h = SubspaceSpec::hyperplane(&[int(1), int(2), int(3)]).unwrap();
        assert_eq!((h.n(), h.s()), (3, 2));
        let l = SubspaceSpec::line_through_origin(&[ratio(1, 2), int(3)]).unwrap();
        assert_eq!((l.n(), l.s()), (3, 1));
        assert_eq!(l.max_abs(), int(3));
    }

    #[test]
    fn corank_one_never_violates() {
        let spec = SubspaceSpec::new(3, 1, vec![vec![ratio(7, 3), ratio(-2, 5)], vec![ratio(1, 9), int(4)]])
            .unwrap();
        let mut params = CriterionParams::new(int(2), 3, 2);
        params.plan.random_bases = 2000;
        let r = check_subgroup_criterion(&spec, &params).unwrap();
        assert!(!r.is_violated());
        assert!(r.checked > 0);
    }

    #[test]
    fn column_vector_higher_rank_never_violates() {
        let spec = SubspaceSpec::hyperplane(&[ratio(3, 7), ratio(-5, 2), ratio(1, 3)]).unwrap();
        for j in 2..=3 {
            let r = check_subgroup_criterion(&spec, &CriterionParams::new(int(3), j, 2)).unwrap();
            assert!(!r.is_violated(), "j={j}");
        }
    }

    #[test]
    fn liouville_convergent_violates_rank_one() {
        let l = liouville();
        let spec = SubspaceSpec::new(2, 1, vec![vec![int(0)], vec![l]]).unwrap();
        let w = &liouville_witnesses(10, 5)[3];
        let mut params = CriterionParams::new(int(3), 1, 3);
        params.injected = vec![vec![vec![BigInt::zero(), w.p[0].clone(), w.q[0].clone()]]];
        let r = check_subgroup_criterion(&spec, &params).unwrap();
        assert!(r.is_violated());
        let v = r.violations.last().unwrap();
        assert_eq!(v.lhs(), scalar::pow10(-96));
        assert_eq!(v.rhs_den.as_deref(), Some(&*format!("1{}", "0".repeat(72))));
        let json = r.to_json();
        assert!(json.contains("\"I\": \"{0}\""));
    }

    #[test]
    fn threshold_on_v_enforced() {
        let spec = SubspaceSpec::hyperplane(&[int(1), int(0)]).unwrap();
        assert!(check_subgroup_criterion(&spec, &CriterionParams::new(int(2), 1, 1)).is_err());
        assert!(check_subgroup_criterion(&spec, &CriterionParams::new(ratio(1, 2), 2, 1)).is_err());
    }

    #[test]
    fn rational_rank_one_violates() {
        // a = (1/2, 0): w = (1, 0, -2) gives c⁺ + Ac⁻ = 0.
        let spec = SubspaceSpec::hyperplane(&[ratio(1, 2), int(0)]).unwrap();
        let r = check_subgroup_criterion(&spec, &CriterionParams::new(int(3), 1, 2)).unwrap();
        assert!(r.is_violated());
        assert!(r.violations.iter().all(|v| v.lhs().is_zero()));
    }
}
