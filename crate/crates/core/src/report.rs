//! Structured verdicts shared by the criterion checkers, plus serde helpers
//! that render exact numbers as `num/den` strings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::exterior::MultiVector;
use crate::scalar::{self, ExactScalar};

pub fn ser_exact<S: Serializer>(x: &ExactScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&scalar::fmt_exact(x))
}

pub fn ser_int<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_ints<S: Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No violation within the stated cutoffs; never a claim beyond them.
    HoldsAtScale,
    /// At least one exact, independently re-checkable violation.
    Violated,
}

/// One exact violation of a criterion inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// `index set -> coefficient` of the subgroup representative (or of
    /// `(p, q)` for the vector criteria, keyed by coordinate).
    pub w_coeffs: BTreeMap<String, String>,
    #[serde(rename = "I")]
    pub index_set: Option<String>,
    pub lhs_num: String,
    pub lhs_den: String,
    /// Present when the right-hand side is rational.
    pub rhs_num: Option<String>,
    pub rhs_den: Option<String>,
    /// The right-hand side as an exact expression, e.g. `100^(-3)`.
    pub rhs_expr: String,
}

impl Violation {
    pub fn new(
        w_coeffs: BTreeMap<String, String>,
        index_set: Option<String>,
        lhs: &ExactScalar,
        base: &ExactScalar,
        neg_exponent: &ExactScalar,
    ) -> Self {
        let (rhs_num, rhs_den) = if neg_exponent.is_integer() {
            let e: i64 = neg_exponent.to_integer().try_into().unwrap_or(i64::MAX);
            if e.unsigned_abs() < 1 << 16 {
                let r = scalar::powi(base, -e);
                (Some(r.numer().to_string()), Some(r.denom().to_string()))
            } else {
                (None, None)
            }
        } else {
            (None, None)
        };
        Self {
            w_coeffs,
            index_set,
            lhs_num: lhs.numer().to_string(),
            lhs_den: lhs.denom().to_string(),
            rhs_num,
            rhs_den,
            rhs_expr: format!(
                "{}^(-{})",
                scalar::fmt_exact(base),
                scalar::fmt_exact(neg_exponent)
            ),
        }
    }

    pub fn lhs(&self) -> ExactScalar {
        ExactScalar::new(
            self.lhs_num.parse().expect("stored integer"),
            self.lhs_den.parse().expect("stored integer"),
        )
    }
}

pub fn multivector_coeffs(w: &MultiVector) -> BTreeMap<String, String> {
    w.terms()
        .map(|(s, c)| (s.to_string(), scalar::fmt_exact(c)))
        .collect()
}

pub fn vector_coeffs(names: &str, v: &[BigInt]) -> BTreeMap<String, String> {
    v.iter()
        .enumerate()
        .map(|(i, x)| (format!("{names}{i}"), x.to_string()))
        .collect()
}

/// Verdict of a criterion check relative to explicit cutoffs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub params: BTreeMap<String, String>,
    pub cutoffs: BTreeMap<String, String>,
    pub search_space: String,
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    /// Number of objects examined.
    pub checked: u64,
    pub seed: Option<u64>,
}

impl CriterionReport {
    pub fn new(criterion: &str) -> Self {
        Self {
            criterion: criterion.to_string(),
            params: BTreeMap::new(),
            cutoffs: BTreeMap::new(),
            search_space: String::new(),
            verdict: Verdict::HoldsAtScale,
            violations: Vec::new(),
            checked: 0,
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn cutoff(mut self, key: &str, value: impl ToString) -> Self {
        self.cutoffs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
        self.verdict = Verdict::Violated;
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// Combines two partial reports over disjoint parts of the same search;
    /// associative, and order-independent up to violation order.
    pub fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        for v in other.violations {
            self.push(v);
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn violation_renders_exact_sides() {
        let v = Violation::new(BTreeMap::new(), None, &ratio(1, 1000), &int(10), &int(3));
        assert_eq!(v.rhs_num.as_deref(), Some("1"));
        assert_eq!(v.rhs_den.as_deref(), Some("1000"));
        assert_eq!(v.rhs_expr, "10^(-3)");
        assert_eq!(v.lhs(), ratio(1, 1000));
        let v = Violation::new(BTreeMap::new(), None, &int(0), &int(10), &ratio(5, 2));
        assert!(v.rhs_num.is_none());
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = CriterionReport::new("x");
        a.checked = 3;
        let mut b = CriterionReport::new("x");
        b.checked = 4;
        b.push(Violation::new(BTreeMap::new(), None, &int(0), &int(2), &int(1)));
        let ab = a.clone().merge(b.clone());
        let ba = b.merge(a);
        assert_eq!(ab.checked, ba.checked);
        assert_eq!(ab.verdict, ba.verdict);
        assert!(ab.is_violated());
        let json = ab.to_json();
        assert!(json.contains("\"verdict\": \"violated\""));
    }
}
