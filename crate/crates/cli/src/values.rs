//! Parsing of numbers, matrices and functions given on the command line.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::Zero;

use extremal_core::diophantine::{liouville_witnesses, make_test_number, TestNumber, TestNumberKind};
use extremal_core::goodness::{build_cantor_bad, Ball, FunctionSpec, Poly};
use extremal_core::scalar::{self, ExactScalar};
use extremal_core::{Error, Result};

/// Decimal digits carried by `bits` of precision.
pub fn digits_for(bits: u32) -> u32 {
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as u32
}

/// A parsed number with its provenance; Liouville numbers keep their
/// closed-form convergents.
#[derive(Clone, Debug)]
pub struct Value {
    pub number: TestNumber,
    pub liouville: Option<(u32, u32)>,
}

impl Value {
    pub fn exact(&self) -> &ExactScalar {
        &self.number.value
    }
}

fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| Error::Parse(format!("{what}: expected a nonnegative integer, got {s:?}")))
}

pub fn parse_value(text: &str, precision_bits: u32) -> Result<Value> {
    let digits = digits_for(precision_bits);
    let mut parts = text.trim().split(':');
    let head = parts.next().unwrap_or_default().to_ascii_lowercase();
    let rest: Vec<&str> = parts.collect();
    let (kind, liouville) = match head.as_str() {
        "golden" => (TestNumberKind::Golden { digits }, None),
        "sqrt2" => (TestNumberKind::Sqrt2 { digits }, None),
        "liouville" => {
            let (base, depth) = match rest.as_slice() {
                [] => (10, 5),
                [b, d] => (parse_u32(b, "liouville base")?, parse_u32(d, "liouville depth")?),
                _ => return Err(Error::Parse("use liouville or liouville:base:depth".into())),
            };
            (TestNumberKind::Liouville { base, depth }, Some((base, depth)))
        }
        "random" => {
            let [seed] = rest.as_slice() else {
                return Err(Error::Parse("use random:seed".into()));
            };
            let seed = seed
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed {seed:?}")))?;
            (TestNumberKind::Random { seed, digits }, None)
        }
        _ => (TestNumberKind::Rational(scalar::parse_rational(text)?), None),
    };
    Ok(Value {
        number: make_test_number(&kind)?,
        liouville,
    })
}

pub fn parse_values(texts: &[String], precision_bits: u32) -> Result<Vec<Value>> {
    if texts.is_empty() {
        return Err(Error::InvalidParameter("no values given".into()));
    }
    texts.iter().map(|t| parse_value(t, precision_bits)).collect()
}

pub fn exact_all(values: &[Value]) -> Vec<ExactScalar> {
    values.iter().map(|v| v.exact().clone()).collect()
}

/// Refuses runs whose truncation error could flip a decision at `(Q, v_max)`.
pub fn check_precision(values: &[Value], q_max: u64, v_max: &ExactScalar) -> Result<()> {
    values.iter().try_for_each(|v| v.number.check_sufficiency(q_max, v_max))
}

/// Closed-form witnesses `(q, p)` for a column `a` whose entry `idx` is a
/// Liouville number and whose other entries are rounded at the same `q`.
pub fn liouville_injections(values: &[Value]) -> Vec<(Vec<BigInt>, Vec<BigInt>)> {
    let mut out = Vec::new();
    for (idx, v) in values.iter().enumerate() {
        let Some((base, depth)) = v.liouville else { continue };
        for w in liouville_witnesses(base, depth) {
            let q = &w.q[0];
            let qr = ExactScalar::from_integer(q.clone());
            let p: Vec<BigInt> = values
                .iter()
                .enumerate()
                .map(|(i, other)| {
                    if i == idx {
                        w.p[0].clone()
                    } else {
                        -scalar::round_half_even(&(other.exact() * &qr))
                    }
                })
                .collect();
            out.push((vec![q.clone()], p));
        }
    }
    out
}

/// Liouville convergents for a one-dimensional row `y`.
pub fn row_injections(values: &[Value]) -> Vec<(Vec<BigInt>, Vec<BigInt>)> {
    match values {
        [v] => liouville_injections(std::slice::from_ref(v)),
        _ => Vec::new(),
    }
}

/// `"a,b;c,d"` into rows.
pub fn parse_matrix_inline(text: &str, precision_bits: u32) -> Result<Vec<Vec<ExactScalar>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| parse_value(x, precision_bits).map(|v| v.exact().clone()))
                .collect()
        })
        .collect()
}

/// A JSON array of rows whose entries are numbers or strings.
pub fn parse_matrix_file(path: &Path, precision_bits: u32) -> Result<Vec<Vec<ExactScalar>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<serde_json::Value>> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let s = match x {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Number(n) => n.to_string(),
                        other => return Err(Error::Parse(format!("matrix entry {other} is not a number"))),
                    };
                    parse_value(&s, precision_bits).map(|v| v.exact().clone())
                })
                .collect()
        })
        .collect()
}

fn parse_rationals(text: &str) -> Result<Vec<ExactScalar>> {
    text.split(',').map(scalar::parse_rational).collect()
}

pub fn parse_function(text: &str) -> Result<FunctionSpec> {
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    let bad = |why: &str| Error::Parse(format!("function {text:?}: {why}"));
    match head {
        "poly" => Ok(FunctionSpec::polynomial(parse_rationals(rest)?)),
        "monomial" => {
            let l = rest.parse().map_err(|_| bad("expected monomial:l"))?;
            Ok(FunctionSpec::Polynomial(Poly::monomial(l)))
        }
        "shifted" => {
            let (a, l) = rest.split_once(':').ok_or_else(|| bad("expected shifted:a:l"))?;
            let l = l.parse().map_err(|_| bad("bad exponent"))?;
            Ok(FunctionSpec::Polynomial(Poly::shifted_power(&scalar::parse_rational(a)?, l)))
        }
        "cantor" => {
            let levels = rest.parse().map_err(|_| bad("expected cantor:levels"))?;
            Ok(FunctionSpec::CantorBad(build_cantor_bad(levels)?))
        }
        _ => Err(bad("unknown kind; use poly, monomial, shifted or cantor")),
    }
}

pub fn parse_ball(text: &str) -> Result<Ball> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("ball {text:?}: expected lo:hi")))?;
    Ball::interval(scalar::parse_rational(lo)?, scalar::parse_rational(hi)?)
}

pub fn parse_exact(text: &str) -> Result<ExactScalar> {
    scalar::parse_rational(text)
}

pub fn nonzero_count(xs: &[ExactScalar]) -> usize {
    xs.iter().filter(|x| !x.is_zero()).count()
}
