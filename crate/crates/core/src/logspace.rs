//! Exact arithmetic on logarithms.
//!
//! Flow times are stored as `c + Σ r_k·ln(a_k)` with rational `c`, `r_k` and
//! pairwise coprime integers `a_k > 1`. Pairwise coprime integers are
//! multiplicatively independent, and `1, ln a_1, ln a_2, …` are linearly
//! independent over the rationals, so such a combination is zero iff every
//! coefficient is zero. Sign decisions are therefore exact: integer-power
//! comparison when `c = 0`, otherwise fixed-point evaluation at increasing
//! precision until the value clears its error bound.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, ExactScalar};

const SMALL_PRIMES_LIMIT: u32 = 1000;
const EXACT_POWER_BIT_BUDGET: u64 = 8_000_000;
const MAX_PRECISION_BITS: u64 = 1 << 20;

/// `constant + Σ coeff·ln(atom)` over pairwise coprime atoms.
#[derive(Clone, Debug, Default)]
pub struct LogLinear {
    constant: BigRational,
    atoms: BTreeMap<BigUint, BigRational>,
}

fn small_primes() -> &'static [u32] {
    static PRIMES: std::sync::OnceLock<Vec<u32>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        'n: for n in 2..SMALL_PRIMES_LIMIT {
            for &p in &out {
                if p * p > n {
                    break;
                }
                if n % p == 0 {
                    continue 'n;
                }
            }
            out.push(n);
        }
        out
    })
}

fn refine(mut terms: Vec<(BigUint, BigRational)>) -> BTreeMap<BigUint, BigRational> {
    // Peel off small primes first so that common inputs end up fully factored.
    let mut split = Vec::with_capacity(terms.len());
    for (mut atom, coeff) in terms.drain(..) {
        if coeff.is_zero() {
            continue;
        }
        for &p in small_primes() {
            let pb = BigUint::from(p);
            if atom < pb {
                break;
            }
            let mut e = 0i64;
            while (&atom % &pb).is_zero() {
                atom /= &pb;
                e += 1;
            }
            if e > 0 {
                split.push((pb, &coeff * BigRational::from_integer(e.into())));
            }
        }
        if atom > BigUint::one() {
            split.push((atom, coeff));
        }
    }
    let mut terms = split;
    loop {
        let mut changed = false;
        'scan: for i in 0..terms.len() {
            for j in (i + 1)..terms.len() {
                let g = terms[i].0.gcd(&terms[j].0);
                if g.is_one() {
                    continue;
                }
                if terms[i].0 == terms[j].0 {
                    let (_, cj) = terms.swap_remove(j);
                    terms[i].1 += cj;
                } else {
                    let ci = terms[i].1.clone();
                    let cj = terms[j].1.clone();
                    terms[i].0 /= &g;
                    terms[j].0 /= &g;
                    terms.push((g, ci + cj));
                    terms.retain(|(a, _)| !a.is_one());
                }
                changed = true;
                break 'scan;
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: BTreeMap<BigUint, BigRational> = BTreeMap::new();
    for (atom, coeff) in terms {
        *out.entry(atom).or_insert_with(BigRational::zero) += coeff;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

impl LogLinear {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A plain rational number of natural-log units.
    pub fn constant(c: BigRational) -> Self {
        Self {
            constant: c,
            atoms: BTreeMap::new(),
        }
    }

    /// `ln(x)` for a positive rational.
    pub fn ln_of(x: &ExactScalar) -> Result<Self> {
        if !x.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "logarithm of non-positive value {}",
                scalar::fmt_exact(x)
            )));
        }
        let terms = vec![
            (x.numer().magnitude().clone(), BigRational::one()),
            (x.denom().magnitude().clone(), -BigRational::one()),
        ];
        Ok(Self {
            constant: BigRational::zero(),
            atoms: refine(terms),
        })
    }

    /// `r·ln(base)`: a time measured in units of `ln(base)`.
    pub fn in_base(base: &ExactScalar, r: &ExactScalar) -> Result<Self> {
        Ok(Self::ln_of(base)? * r)
    }

    pub fn constant_part(&self) -> &BigRational {
        &self.constant
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.atoms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.atoms.is_empty()
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        let s = BigRational::from_integer(sign.into());
        let terms: Vec<_> = self
            .atoms
            .iter()
            .map(|(a, c)| (a.clone(), c.clone()))
            .chain(other.atoms.iter().map(|(a, c)| (a.clone(), c * &s)))
            .collect();
        Self {
            constant: &self.constant + &other.constant * &s,
            atoms: refine(terms),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            constant: &self.constant * r,
            atoms: self.atoms.iter().map(|(a, c)| (a.clone(), c * r)).collect(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = scalar::to_f64(&self.constant);
        for (a, c) in &self.atoms {
            v += scalar::to_f64(c) * scalar::ln_biguint(a);
        }
        v
    }

    /// `e^{self}` when it is rational, i.e. no constant part and integral
    /// exponents on every atom.
    pub fn exp_exact(&self) -> Option<BigRational> {
        if !self.constant.is_zero() {
            return None;
        }
        let mut out = BigRational::one();
        for (a, c) in &self.atoms {
            if !c.is_integer() {
                return None;
            }
            let e = c.to_integer().to_i64()?;
            let base = BigRational::from_integer(BigInt::from(a.clone()));
            out *= scalar::powi(&base, e);
        }
        Some(out)
    }

    /// Exact sign of the represented real number.
    pub fn try_sign(&self) -> Result<Ordering> {
        if self.atoms.is_empty() {
            return Ok(self.constant.cmp(&BigRational::zero()));
        }
        if self.constant.is_zero() {
            if let Some(ord) = self.exact_power_sign() {
                return Ok(ord);
            }
        }
        self.numeric_sign()
    }

    /// Sign; panics only if the value is closer to zero than `2^-(2^20)`,
    /// which no input of representable size produces.
    pub fn sign(&self) -> Ordering {
        self.try_sign().expect("log-linear sign undecided")
    }

    fn exact_power_sign(&self) -> Option<Ordering> {
        let mut lcm = BigInt::one();
        for c in self.atoms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut budget = 0u64;
        let mut exps = Vec::new();
        for (a, c) in &self.atoms {
            let e = (c * BigRational::from_integer(lcm.clone())).to_integer();
            let e = e.to_i64()?;
            budget = budget.saturating_add(e.unsigned_abs().saturating_mul(a.bits()));
            exps.push((a, e));
        }
        if budget > EXACT_POWER_BIT_BUDGET {
            return None;
        }
        let mut pos = BigUint::one();
        let mut neg = BigUint::one();
        for (a, e) in exps {
            let p = a.pow(e.unsigned_abs() as u32);
            if e > 0 {
                pos *= p;
            } else {
                neg *= p;
            }
        }
        Some(pos.cmp(&neg))
    }

    fn numeric_sign(&self) -> Result<Ordering> {
        let mut w = 96u64;
        while w <= MAX_PRECISION_BITS {
            let (value, err) = self.fixed_point(w);
            if value.magnitude() > &err {
                return Ok(if value.sign() == Sign::Minus {
                    Ordering::Less
                } else {
                    Ordering::Greater
                });
            }
            w *= 2;
        }
        Err(Error::Undecided(MAX_PRECISION_BITS))
    }

    /// Value times `2^w` together with an absolute error bound in the same units.
    fn fixed_point(&self, w: u64) -> (BigInt, BigUint) {
        let ln2 = ln2_fixed(w);
        let ln2_err = BigUint::from(4 * (w + 8));
        let mut total = (self.constant.numer() << w as usize) / self.constant.denom();
        let mut err = BigUint::from(2u32);
        for (a, c) in &self.atoms {
            let (la, ea) = ln_fixed(a, w, &ln2, &ln2_err);
            total += (la * c.numer()) / c.denom();
            let mag = c.abs().ceil().to_integer();
            err += ea * mag.magnitude() + BigUint::from(2u32);
        }
        (total, err)
    }
}

/// `atanh(z)·2^w` for a fixed-point `0 <= z < 2^w / 3`; error at most `w + 4` ulps.
fn atanh_fixed(z: &BigInt, w: u64) -> BigInt {
    let z2 = (z * z) >> w as usize;
    let mut term = z.clone();
    let mut sum = z.clone();
    let mut k = 1u64;
    loop {
        term = (term * &z2) >> w as usize;
        if term.is_zero() {
            break;
        }
        k += 2;
        sum += &term / BigInt::from(k);
    }
    sum
}

fn ln2_fixed(w: u64) -> BigInt {
    let third = (BigInt::one() << w as usize) / BigInt::from(3);
    atanh_fixed(&third, w) * 2
}

/// `ln(a)·2^w` and its error bound in ulps.
fn ln_fixed(a: &BigUint, w: u64, ln2: &BigInt, ln2_err: &BigUint) -> (BigInt, BigUint) {
    let k = a.bits() - 1;
    let pow = BigUint::one() << k as usize;
    let num = BigInt::from(a - &pow) << w as usize;
    let den = BigInt::from(a + &pow);
    let z = num / den;
    let lm = atanh_fixed(&z, w) * 2;
    let val = ln2 * BigInt::from(k) + lm;
    let err = ln2_err * BigUint::from(k) + BigUint::from(2 * (w + 8));
    (val, err)
}

impl PartialEq for LogLinear {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}
impl Eq for LogLinear {}

impl PartialOrd for LogLinear {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for LogLinear {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign()
    }
}

impl<'a> Add<&'a LogLinear> for &'a LogLinear {
    type Output = LogLinear;
    fn add(self, rhs: &'a LogLinear) -> LogLinear {
        self.combine(rhs, 1)
    }
}
impl<'a> Sub<&'a LogLinear> for &'a LogLinear {
    type Output = LogLinear;
    fn sub(self, rhs: &'a LogLinear) -> LogLinear {
        self.combine(rhs, -1)
    }
}
impl Add for LogLinear {
    type Output = LogLinear;
    fn add(self, rhs: LogLinear) -> LogLinear {
        self.combine(&rhs, 1)
    }
}
impl Sub for LogLinear {
    type Output = LogLinear;
    fn sub(self, rhs: LogLinear) -> LogLinear {
        self.combine(&rhs, -1)
    }
}
impl Neg for LogLinear {
    type Output = LogLinear;
    fn neg(self) -> LogLinear {
        self.scale(&-BigRational::one())
    }
}
impl Neg for &LogLinear {
    type Output = LogLinear;
    fn neg(self) -> LogLinear {
        self.scale(&-BigRational::one())
    }
}
impl Mul<&BigRational> for LogLinear {
    type Output = LogLinear;
    fn mul(self, rhs: &BigRational) -> LogLinear {
        self.scale(rhs)
    }
}
impl Mul<&BigRational> for &LogLinear {
    type Output = LogLinear;
    fn mul(self, rhs: &BigRational) -> LogLinear {
        self.scale(rhs)
    }
}

impl fmt::Display for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.constant.is_zero() || self.atoms.is_empty() {
            parts.push(scalar::fmt_exact(&self.constant));
        }
        for (a, c) in &self.atoms {
            if c.is_one() {
                parts.push(format!("ln({a})"));
            } else {
                parts.push(format!("{}*ln({a})", scalar::fmt_exact(c)));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl serde::Serialize for LogLinear {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A real number `coeff·e^{log_scale}` with rational `coeff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledValue {
    pub coeff: BigRational,
    pub log_scale: LogLinear,
}

impl ScaledValue {
    pub fn new(coeff: BigRational, log_scale: LogLinear) -> Self {
        Self { coeff, log_scale }
    }

    pub fn exact(coeff: BigRational) -> Self {
        Self::new(coeff, LogLinear::zero())
    }

    /// `e^{log}`.
    pub fn exp(log: LogLinear) -> Self {
        Self::new(BigRational::one(), log)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// `ln|self|`, or `None` for zero.
    pub fn ln_abs(&self) -> Option<LogLinear> {
        if self.coeff.is_zero() {
            return None;
        }
        let l = LogLinear::ln_of(&self.coeff.abs()).expect("positive");
        Some(&l + &self.log_scale)
    }

    /// Compares absolute values exactly.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.ln_abs(), other.ln_abs()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => (&a - &b).sign(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.coeff.is_zero() {
            return 0.0;
        }
        let s = if self.coeff.is_negative() { -1.0 } else { 1.0 };
        s * (scalar::ln_abs(&self.coeff) + self.log_scale.to_f64()).exp()
    }

    /// `log(|self|)` as a float; `-inf` for zero.
    pub fn ln_abs_f64(&self) -> f64 {
        if self.coeff.is_zero() {
            f64::NEG_INFINITY
        } else {
            scalar::ln_abs(&self.coeff) + self.log_scale.to_f64()
        }
    }

    pub fn scale_by(&self, log: &LogLinear) -> Self {
        Self::new(self.coeff.clone(), &self.log_scale + log)
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log_scale.is_zero() {
            write!(f, "{}", scalar::fmt_exact(&self.coeff))
        } else {
            write!(f, "{}*exp({})", scalar::fmt_exact(&self.coeff), self.log_scale)
        }
    }
}

/// Max of a nonempty list of nonnegative scaled values, compared exactly.
pub fn max_abs(values: &[ScaledValue]) -> Option<&ScaledValue> {
    values.iter().max_by(|a, b| a.cmp_abs(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn coprime_refinement_makes_zero_detectable() {
        let ln6 = LogLinear::ln_of(&int(6)).unwrap();
        let ln2 = LogLinear::ln_of(&int(2)).unwrap();
        let ln3 = LogLinear::ln_of(&int(3)).unwrap();
        assert!((&ln6 - &(&ln2 + &ln3)).is_zero());
        // Large composite atoms beyond the small-prime sieve.
        let a = int(1_000_003) * int(1_000_033);
        let b = int(1_000_003) * int(1_000_037);
        let la = LogLinear::ln_of(&a).unwrap();
        let lb = LogLinear::ln_of(&b).unwrap();
        let lab = LogLinear::ln_of(&(a.clone() * b.clone())).unwrap();
        assert_eq!(&la + &lb, lab);
        assert_ne!(la, lb);
    }

    #[test]
    fn exact_sign_of_pure_logs() {
        // 3 ln 2 vs 2 ln 3: 8 < 9
        let l = &LogLinear::in_base(&int(2), &int(3)).unwrap()
            - &LogLinear::in_base(&int(3), &int(2)).unwrap();
        assert_eq!(l.sign(), Ordering::Less);
        // (1/2) ln 4 - ln 2 = 0
        let z = &LogLinear::in_base(&int(4), &ratio(1, 2)).unwrap() - &LogLinear::ln_of(&int(2)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.sign(), Ordering::Equal);
    }

    #[test]
    fn numeric_sign_with_constant_term() {
        // 1 - ln(3) < 0, 1 - ln(2) > 0
        let l3 = &LogLinear::constant(int(1)) - &LogLinear::ln_of(&int(3)).unwrap();
        let l2 = &LogLinear::constant(int(1)) - &LogLinear::ln_of(&int(2)).unwrap();
        assert_eq!(l3.sign(), Ordering::Less);
        assert_eq!(l2.sign(), Ordering::Greater);
        // A very close call: ln(2^1000 + 1) - 1000 ln 2 is about 2^-1000 > 0.
        let big = (BigUint::one() << 1000usize) + BigUint::one();
        let x = BigRational::from_integer(BigInt::from(big));
        let close = &(&LogLinear::ln_of(&x).unwrap() - &LogLinear::in_base(&int(2), &int(1000)).unwrap())
            + &LogLinear::constant(BigRational::zero());
        assert_eq!(close.sign(), Ordering::Greater);
        // e^1 vs 2.718281828 (rational): e is larger.
        let e_minus = &LogLinear::constant(int(1))
            - &LogLinear::ln_of(&scalar::parse_rational("2.718281828").unwrap()).unwrap();
        assert_eq!(e_minus.sign(), Ordering::Greater);
        let e_plus = &LogLinear::constant(int(1))
            - &LogLinear::ln_of(&scalar::parse_rational("2.718281829").unwrap()).unwrap();
        assert_eq!(e_plus.sign(), Ordering::Less);
    }

    #[test]
    fn fixed_point_ln_matches_f64() {
        let w = 80;
        let ln2 = ln2_fixed(w);
        let (v, _) = ln_fixed(&BigUint::from(10u32), w, &ln2, &BigUint::from(1u32));
        let approx = v.to_f64().unwrap() / 2f64.powi(w as i32);
        assert!((approx - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn scaled_comparisons() {
        // 3·e^{ln 2} = 6 > 5
        let a = ScaledValue::new(int(3), LogLinear::ln_of(&int(2)).unwrap());
        let b = ScaledValue::exact(int(-5));
        assert_eq!(a.cmp_abs(&b), Ordering::Greater);
        assert!((a.to_f64() - 6.0).abs() < 1e-12);
        let zero = ScaledValue::exact(int(0));
        assert_eq!(zero.cmp_abs(&b), Ordering::Less);
    }
}
