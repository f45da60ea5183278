//! Brute-force Diophantine approximation with exact arithmetic: best
//! approximations, exponent estimates, the finite-scale forms of the
//! flow/approximation correspondence, and standard test numbers.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, FlowSpec};
use crate::logspace::LogLinear;
use crate::report::{ser_exact, ser_int, ser_ints};
use crate::scalar::{self, int, ratio, ExactScalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Size `‖q‖`.
    Standard,
    /// Size `Π_+(q) = Π max(|q_i|, 1)`.
    Multiplicative,
}

/// A pair `(p, q)` with the achieved `‖Aq + p‖`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxWitness {
    #[serde(serialize_with = "ser_ints")]
    pub q: Vec<BigInt>,
    #[serde(serialize_with = "ser_ints")]
    pub p: Vec<BigInt>,
    #[serde(serialize_with = "ser_exact")]
    pub quality: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub size: ExactScalar,
    pub mode: Mode,
    /// `‖q‖`, the enumeration shell.
    #[serde(serialize_with = "ser_int")]
    pub q_shell: BigInt,
    /// Some coordinate of `p` was a half-integer tie, broken toward even.
    pub tie: bool,
}

impl ApproxWitness {
    /// `log(1/quality)/log(size)`, scaled by `n` in multiplicative mode so
    /// that it is comparable with `v` in `|yq+p| <= Π_+(q)^{-v/n}`.
    pub fn slope(&self) -> f64 {
        if self.quality.is_zero() {
            return f64::INFINITY;
        }
        let ls = scalar::ln_abs(&self.size);
        if ls <= 0.0 {
            return f64::NAN;
        }
        let s = -scalar::ln_abs(&self.quality) / ls;
        match self.mode {
            Mode::Standard => s,
            Mode::Multiplicative => s * self.q.len() as f64,
        }
    }

    /// The slope as an exact rational when it is one (e.g. powers of a
    /// common base), decided in exact log arithmetic.
    pub fn slope_exact(&self) -> Option<ExactScalar> {
        if self.quality.is_zero() || self.size <= ExactScalar::one() {
            return None;
        }
        let s = self.slope();
        if !s.is_finite() {
            return None;
        }
        let factor = match self.mode {
            Mode::Standard => ExactScalar::one(),
            Mode::Multiplicative => int(self.q.len() as i64),
        };
        let candidate = rationalize(s, 10_000)?;
        let lq = LogLinear::ln_of(&self.quality.recip()).ok()?;
        let ls = LogLinear::ln_of(&self.size).ok()?;
        let diff = &lq.scale(&factor) - &ls.scale(&candidate);
        diff.is_zero().then_some(candidate)
    }

    /// Whether `quality <= size^{-v}` (standard) or
    /// `quality <= size^{-v/n}` (multiplicative), exactly.
    pub fn satisfies(&self, v: &ExactScalar) -> bool {
        let e = match self.mode {
            Mode::Standard => v.clone(),
            Mode::Multiplicative => v / int(self.q.len() as i64),
        };
        if self.quality.is_zero() {
            return true;
        }
        scalar::le_neg_power(&self.quality, &self.size, &e)
    }
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions.
fn rationalize(x: f64, max_den: i64) -> Option<ExactScalar> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    (k1 != 0).then(|| ratio(h1, k1))
}

/// `A = num/den` with a common integer denominator.
#[derive(Clone, Debug)]
pub struct IntKernel {
    num: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl IntKernel {
    pub fn new(a: &[Vec<ExactScalar>]) -> Result<Self> {
        let cols = a.first().map(|r| r.len()).unwrap_or(0);
        if a.is_empty() || cols == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if a.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged matrix".into()));
        }
        let den = a
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let num = a
            .iter()
            .map(|r| r.iter().map(|x| x.numer() * (&den / x.denom())).collect())
            .collect();
        Ok(Self { num, den })
    }

    pub fn rows(&self) -> usize {
        self.num.len()
    }

    pub fn cols(&self) -> usize {
        self.num[0].len()
    }

    /// Nearest-integer `p` for `q` (ties to even) and `‖Aq + p‖`.
    pub fn evaluate(&self, q: &[BigInt]) -> (Vec<BigInt>, ExactScalar, bool) {
        let mut p = Vec::with_capacity(self.rows());
        let mut worst = BigInt::zero();
        let mut tie = false;
        for row in &self.num {
            let s: BigInt = row.iter().zip(q).map(|(a, b)| a * b).sum();
            let (pi, resid, t) = nearest(&s, &self.den);
            tie |= t;
            worst = worst.max(resid.abs());
            p.push(pi);
        }
        (p, BigRational::new(worst, self.den.clone()), tie)
    }

    /// `|(Aq)_r + p_r|·den` for a given `p`.
    pub fn residuals(&self, q: &[BigInt], p: &[BigInt]) -> Vec<BigInt> {
        self.num
            .iter()
            .zip(p)
            .map(|(row, pi)| {
                let s: BigInt = row.iter().zip(q).map(|(a, b)| a * b).sum();
                (s + pi * &self.den).abs()
            })
            .collect()
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }
}

/// Integer `p` nearest to `-s/den` (ties to even), residual `s + den·p`.
fn nearest(s: &BigInt, den: &BigInt) -> (BigInt, BigInt, bool) {
    let a = -s;
    let (fl, rem) = a.div_mod_floor(den);
    let twice: BigInt = &rem * 2;
    let (p, tie) = match twice.cmp(den) {
        Ordering::Less => (fl, false),
        Ordering::Greater => (fl + 1, false),
        Ordering::Equal => {
            if fl.is_even() {
                (fl, true)
            } else {
                (fl + 1, true)
            }
        }
    };
    let resid = s + den * &p;
    (p, resid, tie)
}

/// Vectors with `‖q‖_∞ = s` whose first nonzero coordinate is positive, in
/// lexicographic order.
pub fn shell(n: usize, s: i64) -> Vec<Vec<i64>> {
    fn rec(cur: &mut Vec<i64>, pos: usize, s: i64, on_shell: bool, nonzero: bool, out: &mut Vec<Vec<i64>>) {
        let n = cur.len();
        if pos == n {
            if on_shell && nonzero {
                out.push(cur.clone());
            }
            return;
        }
        let lo = if nonzero { -s } else { 0 };
        if pos + 1 == n && !on_shell {
            // the last coordinate has to reach the shell
            for x in [-s, s] {
                if x >= lo {
                    cur[pos] = x;
                    rec(cur, pos + 1, s, true, true, out);
                }
            }
            return;
        }
        for x in lo..=s {
            cur[pos] = x;
            rec(cur, pos + 1, s, on_shell || x.abs() == s, nonzero || x != 0, out);
        }
    }
    let mut out = Vec::new();
    if s <= 0 || n == 0 {
        return out;
    }
    rec(&mut vec![0; n], 0, s, false, false, &mut out);
    out
}

/// Per-shell minimal `den·‖Aq + p‖` over the box `‖q‖ <= Q`, scanned once in
/// lexicographic order with residues mod `den` kept in machine integers.
/// Ties keep the lexicographically first `q`, as the shell-by-shell scan does.
struct BoxScan {
    num: Vec<Vec<i64>>,
    den: i64,
    q_max: i64,
    min_shell: i64,
    best_d: Vec<i64>,
    best_q: Vec<Option<Vec<i64>>>,
}

impl BoxScan {
    /// `None` when the entries do not fit the fast representation.
    fn new(kernel: &IntKernel, q_max: u64, min_shell: u64) -> Option<Self> {
        use num_traits::ToPrimitive;
        let den = kernel.den.to_i64().filter(|&d| d < 1 << 62)?;
        if q_max > 1 << 30 {
            return None;
        }
        let d = BigInt::from(den);
        let num = kernel
            .num
            .iter()
            .map(|row| row.iter().map(|x| x.mod_floor(&d).to_i64()).collect::<Option<Vec<i64>>>())
            .collect::<Option<Vec<_>>>()?;
        let len = q_max as usize + 1;
        Some(Self {
            num,
            den,
            q_max: q_max as i64,
            min_shell: min_shell as i64,
            best_d: vec![i64::MAX; len],
            best_q: vec![None; len],
        })
    }

    fn step(&self, r: i64, a: i64, x: i64) -> i64 {
        ((r as i128 + a as i128 * x as i128).rem_euclid(self.den as i128)) as i64
    }

    fn run(&mut self) {
        let n = self.num[0].len();
        let mut q = vec![0i64; n];
        // vectors with k leading zeros come first in lexicographic order
        for k in (0..n).rev() {
            q.iter_mut().for_each(|x| *x = 0);
            let resid = vec![0i64; self.num.len()];
            self.visit(&mut q, k, k, &resid, 0);
        }
    }

    fn visit(&mut self, q: &mut Vec<i64>, head: usize, pos: usize, resid: &[i64], cur_max: i64) {
        let n = q.len();
        let (lo, hi) = if pos == head { (1, self.q_max) } else { (-self.q_max, self.q_max) };
        let mut r: Vec<i64> = resid
            .iter()
            .zip(&self.num)
            .map(|(&r0, row)| self.step(r0, row[pos], lo))
            .collect();
        for x in lo..=hi {
            let s = cur_max.max(x.abs());
            if pos + 1 == n {
                if s >= self.min_shell {
                    let d = r.iter().map(|&ri| ri.min(self.den - ri)).max().unwrap_or(0);
                    if d < self.best_d[s as usize] {
                        self.best_d[s as usize] = d;
                        q[pos] = x;
                        self.best_q[s as usize] = Some(q.clone());
                    }
                }
            } else {
                q[pos] = x;
                self.visit(q, head, pos + 1, &r, s);
            }
            for (ri, row) in r.iter_mut().zip(&self.num) {
                *ri += row[pos];
                if *ri >= self.den {
                    *ri -= self.den;
                }
            }
        }
        q[pos] = 0;
    }
}

fn to_big(q: &[i64]) -> Vec<BigInt> {
    q.iter().map(|&x| BigInt::from(x)).collect()
}

fn plus_size(q: &[BigInt]) -> BigInt {
    q.iter()
        .map(|x| x.abs().max(BigInt::one()))
        .fold(BigInt::one(), |a, b| a * b)
}

/// Best approximations `‖Aq + p‖` for `1 <= ‖q‖ <= Q`, exhaustive over
/// shells; returns the Pareto frontier of (size, quality). Enumeration stops
/// at the first exact zero (rational dependence).
pub fn best_approx(a: &[Vec<ExactScalar>], q_max: u64) -> Result<Vec<ApproxWitness>> {
    best_approx_from(a, q_max, 1)
}

/// As [`best_approx`], restricted to shells `>= min_shell`.
pub fn best_approx_from(
    a: &[Vec<ExactScalar>],
    q_max: u64,
    min_shell: u64,
) -> Result<Vec<ApproxWitness>> {
    if q_max == 0 {
        return Err(Error::InvalidParameter("Q must be >= 1".into()));
    }
    let kernel = IntKernel::new(a)?;
    let min_shell = min_shell.max(1);
    Ok(match BoxScan::new(&kernel, q_max, min_shell) {
        Some(scan) => frontier_by_box(&kernel, scan, q_max, min_shell),
        None => frontier_by_shells(&kernel, q_max, min_shell),
    })
}

/// Appends `w` when it improves the frontier; `true` once quality hits 0.
fn push_frontier(out: &mut Vec<ApproxWitness>, w: ApproxWitness) -> bool {
    if out.last().map_or(true, |l| w.quality < l.quality) {
        let zero = w.quality.is_zero();
        out.push(w);
        return zero;
    }
    false
}

fn standard_witness(kernel: &IntKernel, q: Vec<BigInt>, s: u64) -> ApproxWitness {
    let (p, quality, tie) = kernel.evaluate(&q);
    ApproxWitness {
        q,
        p,
        quality,
        size: int(s as i64),
        mode: Mode::Standard,
        q_shell: BigInt::from(s),
        tie,
    }
}

fn frontier_by_box(kernel: &IntKernel, mut scan: BoxScan, q_max: u64, min_shell: u64) -> Vec<ApproxWitness> {
    scan.run();
    let mut out = Vec::new();
    for s in min_shell..=q_max {
        if let Some(qi) = scan.best_q[s as usize].take() {
            if push_frontier(&mut out, standard_witness(kernel, to_big(&qi), s)) {
                break;
            }
        }
    }
    out
}

fn frontier_by_shells(kernel: &IntKernel, q_max: u64, min_shell: u64) -> Vec<ApproxWitness> {
    let n = kernel.cols();
    let mut out = Vec::new();
    for s in min_shell..=q_max {
        let mut best: Option<ApproxWitness> = None;
        for qi in shell(n, s as i64) {
            let w = standard_witness(kernel, to_big(&qi), s);
            if best.as_ref().map_or(true, |b| w.quality < b.quality) {
                best = Some(w);
            }
        }
        if let Some(b) = best {
            if push_frontier(&mut out, b) {
                break;
            }
        }
    }
    out
}

/// Multiplicative best approximations of a row vector `y`: exhaustive over
/// `‖q‖ <= Q`, frontier in `(Π_+(q), |yq + p|)` among `Π_+(q) >= min_size`.
pub fn multiplicative_best_from(
    y: &[ExactScalar],
    q_max: u64,
    min_size: &BigInt,
) -> Result<Vec<ApproxWitness>> {
    if q_max == 0 {
        return Err(Error::InvalidParameter("Q must be >= 1".into()));
    }
    let kernel = IntKernel::new(&[y.to_vec()])?;
    let n = y.len();
    let mut all: Vec<ApproxWitness> = Vec::new();
    for s in 1..=q_max {
        for qi in shell(n, s as i64) {
            let q = to_big(&qi);
            let size = plus_size(&q);
            if &size < min_size {
                continue;
            }
            let (p, quality, tie) = kernel.evaluate(&q);
            all.push(ApproxWitness {
                q,
                p,
                quality,
                size: BigRational::from_integer(size),
                mode: Mode::Multiplicative,
                q_shell: BigInt::from(s),
                tie,
            });
        }
    }
    // Stable sort keeps enumeration order among equal sizes.
    all.sort_by(|a, b| a.size.cmp(&b.size).then(a.quality.cmp(&b.quality)));
    let mut out: Vec<ApproxWitness> = Vec::new();
    for w in all {
        if out.last().map_or(true, |l| w.quality < l.quality) {
            let zero = w.quality.is_zero();
            out.push(w);
            if zero {
                break;
            }
        }
    }
    Ok(out)
}

pub fn multiplicative_best(y: &[ExactScalar], q_max: u64) -> Result<Vec<ApproxWitness>> {
    multiplicative_best_from(y, q_max, &BigInt::one())
}

/// Checks an externally supplied witness against `A` and returns it with the
/// recomputed exact quality and size.
pub fn verify_witness(
    a: &[Vec<ExactScalar>],
    q: &[BigInt],
    p: &[BigInt],
    mode: Mode,
) -> Result<ApproxWitness> {
    let kernel = IntKernel::new(a)?;
    if q.len() != kernel.cols() {
        return Err(Error::DimensionMismatch {
            left: kernel.cols(),
            right: q.len(),
        });
    }
    if p.len() != kernel.rows() {
        return Err(Error::DimensionMismatch {
            left: kernel.rows(),
            right: p.len(),
        });
    }
    if q.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidParameter("witness q must be nonzero".into()));
    }
    let worst = kernel
        .residuals(q, p)
        .into_iter()
        .max()
        .unwrap_or_else(BigInt::zero);
    let shell = q.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero);
    let size = match mode {
        Mode::Standard => shell.clone(),
        Mode::Multiplicative => plus_size(q),
    };
    Ok(ApproxWitness {
        q: q.to_vec(),
        p: p.to_vec(),
        quality: BigRational::new(worst, kernel.den().clone()),
        size: BigRational::from_integer(size),
        mode,
        q_shell: shell,
        tie: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrailEntry {
    pub witness: ApproxWitness,
    pub slope: f64,
    pub injected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub omega_hat: f64,
    /// `omega_hat` as an exact rational when the maximizing slope is one.
    pub omega_exact: Option<String>,
    pub witness_trail: Vec<TrailEntry>,
    pub cutoff_q: u64,
    /// `omega_hat` restricted to each cutoff of the schedule.
    pub per_cutoff: Vec<(u64, f64)>,
    pub min_size: String,
}

#[derive(Clone, Debug, Default)]
pub struct ExponentOptions {
    /// Smallest size entering the statistic. Defaults to
    /// `max(2, ⌈Q_1/2⌉)` for the first cutoff `Q_1`.
    pub min_size: Option<BigInt>,
    /// Witnesses beyond the enumeration box, verified exactly before use.
    pub injected: Vec<(Vec<BigInt>, Vec<BigInt>)>,
}

/// `ω̂`: the largest `log(1/quality)/log(size)` over the frontier of
/// approximations with size at least `min_size`.
///
/// Constant factors distort the slope by `log C / log(size)`, so small sizes
/// are excluded; with a fixed `min_size` the estimate is nondecreasing along
/// the schedule.
pub fn exponent_estimate(
    a: &[Vec<ExactScalar>],
    schedule: &[u64],
    mode: Mode,
    options: &ExponentOptions,
) -> Result<ExponentEstimate> {
    let first = *schedule
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty Q schedule".into()))?;
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("Q schedule must increase".into()));
    }
    let cutoff = *schedule.last().expect("nonempty");
    let min_size = options
        .min_size
        .clone()
        .unwrap_or_else(|| BigInt::from(first.div_ceil(2)).max(BigInt::from(2)));
    let mut injected = Vec::new();
    for (q, p) in &options.injected {
        let w = verify_witness(a, q, p, mode)?;
        if w.size >= BigRational::from_integer(min_size.clone()) {
            injected.push(w);
        }
    }

    let mut per_cutoff = Vec::new();
    let mut trail: Vec<TrailEntry> = Vec::new();
    let min_shell = match mode {
        Mode::Standard => min_size.to_u64().unwrap_or(u64::MAX),
        Mode::Multiplicative => 1,
    };
    let standard_run = match mode {
        Mode::Standard if min_shell <= cutoff => best_approx_from(a, cutoff, min_shell)?,
        _ => Vec::new(),
    };
    for &qc in schedule {
        let frontier = match mode {
            Mode::Standard => standard_run
                .iter()
                .filter(|w| w.q_shell <= BigInt::from(qc))
                .cloned()
                .collect(),
            Mode::Multiplicative => {
                if a.len() != 1 {
                    return Err(Error::InvalidParameter(
                        "multiplicative mode needs a row vector".into(),
                    ));
                }
                multiplicative_best_from(&a[0], qc, &min_size)?
            }
        };
        let entries: Vec<TrailEntry> = frontier
            .into_iter()
            .map(|w| TrailEntry {
                slope: w.slope(),
                witness: w,
                injected: false,
            })
            .chain(injected.iter().map(|w| TrailEntry {
                slope: w.slope(),
                witness: w.clone(),
                injected: true,
            }))
            .collect();
        let best = entries
            .iter()
            .map(|e| e.slope)
            .filter(|s| !s.is_nan())
            .fold(f64::NEG_INFINITY, f64::max);
        per_cutoff.push((qc, best));
        trail = entries;
    }
    let omega_hat = per_cutoff.last().map(|x| x.1).unwrap_or(f64::NEG_INFINITY);
    let omega_exact = trail
        .iter()
        .filter(|e| e.slope == omega_hat)
        .find_map(|e| e.witness.slope_exact())
        .map(|r| scalar::fmt_exact(&r));
    Ok(ExponentEstimate {
        omega_hat,
        omega_exact,
        witness_trail: trail,
        cutoff_q: cutoff,
        per_cutoff,
        min_size: min_size.to_string(),
    })
}

/// `γ = (bv - a)/(v + 1)`.
pub fn flow_gamma(a: &ExactScalar, b: &ExactScalar, v: &ExactScalar) -> ExactScalar {
    (b * v - a) / (v + ExactScalar::one())
}

/// Output of the forward direction of the flow/approximation correspondence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowForwardCertificate {
    pub gamma: ExactScalar,
    /// `t = log|z| / (b - γ)`.
    pub t: LogLinear,
    /// `e^{at}|x| <= e^{-γt}`.
    pub expanding_ok: bool,
    /// `e^{-bt}|z| <= e^{-γt}` (an equality by construction).
    pub contracting_ok: bool,
}

impl FlowForwardCertificate {
    pub fn holds(&self) -> bool {
        self.expanding_ok && self.contracting_ok
    }
}

/// Forward direction with logarithms supplied: `ln_x = None` means `x = 0`.
pub fn flow_forward_logs(
    a: &ExactScalar,
    b: &ExactScalar,
    v: &ExactScalar,
    ln_x: Option<&LogLinear>,
    ln_z: &LogLinear,
) -> Result<FlowForwardCertificate> {
    let gamma = flow_gamma(a, b, v);
    if gamma >= *b {
        return Err(Error::InvalidParameter(format!(
            "gamma {} must be below b {}",
            scalar::fmt_exact(&gamma),
            scalar::fmt_exact(b)
        )));
    }
    let t = ln_z.scale(&(b - &gamma).recip());
    let neg_gamma_t = -t.scale(&gamma);
    let expanding_ok = match ln_x {
        None => true,
        Some(lx) => (&(&t.scale(a) + lx) - &neg_gamma_t).sign() != Ordering::Greater,
    };
    let contracting_ok = (&(ln_z - &t.scale(b)) - &neg_gamma_t).sign() != Ordering::Greater;
    Ok(FlowForwardCertificate {
        gamma,
        t,
        expanding_ok,
        contracting_ok,
    })
}

/// Forward direction for a rational witness `|x| <= |z|^{-v}`.
pub fn flow_forward(
    a: &ExactScalar,
    b: &ExactScalar,
    v: &ExactScalar,
    x: &ExactScalar,
    z: &ExactScalar,
) -> Result<FlowForwardCertificate> {
    if z.is_zero() {
        return Err(Error::InvalidParameter("witness z must be nonzero".into()));
    }
    if !x.is_zero() && !scalar::le_neg_power(&x.abs(), &z.abs(), v) {
        return Err(Error::InvalidParameter(
            "witness does not satisfy |x| <= |z|^-v".into(),
        ));
    }
    let ln_x = if x.is_zero() {
        None
    } else {
        Some(LogLinear::ln_of(&x.abs())?)
    };
    let ln_z = LogLinear::ln_of(&z.abs())?;
    flow_forward_logs(a, b, v, ln_x.as_ref(), &ln_z)
}

/// Certificate that `δ(g_t u_y Z^{n+1}) <= e^{-γt}` built from a witness
/// `|yq + p| <= ‖q‖^{-v}`: the flowed lattice vector `g_t(yq + p, q)` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowCertificate {
    pub forward: FlowForwardCertificate,
    /// Every coordinate of `g_t(yq+p, q)` is at most `e^{-γt}`, exactly.
    pub vector_ok: bool,
}

pub fn flow_certificate(
    y: &[ExactScalar],
    q: &[BigInt],
    p: &BigInt,
    v: &ExactScalar,
) -> Result<FlowCertificate> {
    let n = y.len();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: q.len(),
        });
    }
    let x = y
        .iter()
        .zip(q)
        .fold(BigRational::from_integer(p.clone()), |acc, (yi, qi)| {
            acc + yi * BigRational::from_integer(qi.clone())
        });
    let z = q.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero);
    let b = ratio(1, n as i64);
    let forward = flow_forward(&ExactScalar::one(), &b, v, &x, &BigRational::from_integer(z))?;
    let spec = FlowSpec::one_parameter(n, forward.t.clone())?;
    let exps = spec.coordinate_exponents();
    let bound = -forward.t.scale(&forward.gamma);
    let coords: Vec<ExactScalar> = std::iter::once(x)
        .chain(q.iter().map(|c| BigRational::from_integer(c.clone())))
        .collect();
    let vector_ok = coords.iter().zip(&exps).all(|(c, e)| {
        if c.is_zero() {
            return true;
        }
        let lc = LogLinear::ln_of(&c.abs()).expect("nonzero");
        (&(&lc + e) - &bound).sign() != Ordering::Greater
    });
    Ok(FlowCertificate { forward, vector_ok })
}

/// A grid-found certificate `δ(g_t u_y Z^{n+1}) <= e^{-γt}` mapped back to an
/// approximation `|yq + p| <= ‖q‖^{-v'}` with `v' = n(1+γ)/(1-nγ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConverseWitness {
    pub step: u64,
    pub delta: ExactScalar,
    pub q: Vec<BigInt>,
    pub p: BigInt,
    pub v_prime: ExactScalar,
    pub holds: bool,
}

/// Converse direction on the time `t = step·n·ln(base)`; `None` when `δ`
/// exceeds `e^{-γt}` there.
pub fn flow_converse(
    y: &[ExactScalar],
    base: u32,
    step: u64,
    gamma: &ExactScalar,
    search_bound: u64,
) -> Result<Option<ConverseWitness>> {
    let n = y.len();
    let n_q = int(n as i64);
    if gamma.is_negative() || gamma * &n_q >= ExactScalar::one() {
        return Err(Error::InvalidParameter("need 0 <= gamma < 1/n".into()));
    }
    let spec = FlowSpec::on_grid(n, base, step)?;
    let lat = lattice::flowed_unipotent_lattice(&spec, y)?;
    let sv = lattice::shortest_vector(lat.rows(), search_bound)?;
    // e^{-γt} = base^{-γ·n·step}
    let exponent = -(gamma * &n_q * int(step as i64));
    if scalar::cmp_with_power(&sv.norm, &int(base as i64), &exponent) == Ordering::Greater {
        return Ok(None);
    }
    let m = &sv.coefficients;
    let p = m[0].clone();
    let q: Vec<BigInt> = m[1..].to_vec();
    if q.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidParameter(
            "certificate vector has q = 0, impossible for t > 0".into(),
        ));
    }
    let x = y
        .iter()
        .zip(&q)
        .fold(BigRational::from_integer(p.clone()), |acc, (yi, qi)| {
            acc + yi * BigRational::from_integer(qi.clone())
        });
    let size = BigRational::from_integer(q.iter().map(|c| c.abs()).max().expect("nonempty"));
    let v_prime = &n_q * (ExactScalar::one() + gamma) / (ExactScalar::one() - &n_q * gamma);
    let holds = x.is_zero() || scalar::le_neg_power(&x.abs(), &size, &v_prime);
    Ok(Some(ConverseWitness {
        step,
        delta: sv.norm,
        q,
        p,
        v_prime,
        holds,
    }))
}

/// Multi-parameter times from a multiplicative witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeFlowCertificate {
    pub gamma: ExactScalar,
    pub t: LogLinear,
    pub t_vector: Vec<LogLinear>,
    /// `Σ t_i = t` exactly.
    pub sum_ok: bool,
    /// `e^t|x| <= e^{-γt}` and `e^{-t_i}|z_i| <= e^{-γt}` for all `i`.
    pub inequalities_ok: bool,
    /// `Π_+(z) = 1` forces `t = 0`.
    pub degenerate: bool,
}

/// Times defined by `e^{(1-nγ)t} = Π_+(z)` and `e^{t_i} = e^{γt}|z_i|_+`,
/// given `ln|z_i|_+`.
pub fn multiplicative_times(gamma: &ExactScalar, ln_zplus: &[LogLinear]) -> Result<(LogLinear, Vec<LogLinear>)> {
    let n = int(ln_zplus.len() as i64);
    let denom = ExactScalar::one() - &n * gamma;
    if !denom.is_positive() {
        return Err(Error::InvalidParameter("need gamma < 1/n".into()));
    }
    let ln_pi = ln_zplus.iter().fold(LogLinear::zero(), |acc, l| &acc + l);
    let t = ln_pi.scale(&denom.recip());
    let gt = t.scale(gamma);
    let ts = ln_zplus.iter().map(|l| &gt + l).collect();
    Ok((t, ts))
}

/// Forward direction of the multiplicative correspondence for a witness
/// `|x| <= Π_+(z)^{-v/n}`, with `γ = (v-n)/(n(v+1))`.
pub fn multiplicative_forward(v: &ExactScalar, x: &ExactScalar, z: &[BigInt]) -> Result<MultiplicativeFlowCertificate> {
    let n = z.len();
    let nq = int(n as i64);
    if n == 0 || v <= &nq {
        return Err(Error::InvalidParameter("need n >= 1 and v > n".into()));
    }
    let pi = plus_size(z);
    let piq = BigRational::from_integer(pi.clone());
    if !x.is_zero() && !scalar::le_neg_power(&x.abs(), &piq, &(v / &nq)) {
        return Err(Error::InvalidParameter(
            "witness does not satisfy |x| <= Pi_+(z)^(-v/n)".into(),
        ));
    }
    let gamma = (v - &nq) / (&nq * (v + ExactScalar::one()));
    let ln_zplus: Vec<LogLinear> = z
        .iter()
        .map(|c| LogLinear::ln_of(&BigRational::from_integer(c.abs().max(BigInt::one()))))
        .collect::<Result<_>>()?;
    let (t, ts) = multiplicative_times(&gamma, &ln_zplus)?;
    let sum = ts.iter().fold(LogLinear::zero(), |acc, l| &acc + l);
    let sum_ok = (&sum - &t).is_zero();
    let bound = -t.scale(&gamma);
    let mut ok = true;
    if !x.is_zero() {
        let lx = LogLinear::ln_of(&x.abs())?;
        ok &= (&(&t + &lx) - &bound).sign() != Ordering::Greater;
    }
    for (c, ti) in z.iter().zip(&ts) {
        if c.is_zero() {
            continue;
        }
        let lz = LogLinear::ln_of(&BigRational::from_integer(c.abs()))?;
        ok &= (&(&lz - ti) - &bound).sign() != Ordering::Greater;
    }
    Ok(MultiplicativeFlowCertificate {
        gamma,
        t,
        t_vector: ts,
        sum_ok,
        inequalities_ok: ok,
        degenerate: pi.is_one(),
    })
}

/// The set `{(yq + p, q)}` of pairs `(x, z)` from `u_y Z^{n+1}`, truncated to
/// `‖q‖ <= Q`.
#[derive(Clone, Debug)]
pub struct HomogeneousSet {
    y: Vec<ExactScalar>,
    q_max: u64,
}

impl HomogeneousSet {
    pub fn from_unipotent(y: &[ExactScalar], q_max: u64) -> Self {
        Self {
            y: y.to_vec(),
            q_max,
        }
    }

    pub fn contains(&self, x: &ExactScalar, z: &[BigInt]) -> bool {
        if z.len() != self.y.len() || z.iter().any(|c| c.abs() > BigInt::from(self.q_max)) {
            return false;
        }
        let yz = self
            .y
            .iter()
            .zip(z)
            .fold(ExactScalar::zero(), |acc, (a, b)| acc + a * BigRational::from_integer(b.clone()));
        (x - yz).is_integer()
    }

    /// Elements with `|x| <= radius`, for each `q` in the box.
    pub fn elements_within(&self, radius: &ExactScalar) -> Vec<(ExactScalar, Vec<BigInt>)> {
        let n = self.y.len();
        let kernel = IntKernel::new(&[self.y.clone()]).expect("nonempty y");
        let mut out = Vec::new();
        let mut qs: Vec<Vec<i64>> = vec![vec![0; n]];
        for s in 1..=self.q_max as i64 {
            for q in shell(n, s) {
                qs.push(q.iter().map(|x| -x).collect());
                qs.push(q);
            }
        }
        for qi in qs {
            let q = to_big(&qi);
            let (p0, _, _) = kernel.evaluate(&q);
            let r: BigInt = radius.ceil().to_integer() + 1;
            let mut p: BigInt = &p0[0] - &r;
            while p <= &p0[0] + &r {
                let x = self
                    .y
                    .iter()
                    .zip(&q)
                    .fold(BigRational::from_integer(p.clone()), |acc, (a, b)| {
                        acc + a * BigRational::from_integer(b.clone())
                    });
                if x.abs() <= *radius && !(x.is_zero() && qi.iter().all(|&c| c == 0)) {
                    out.push((x, q.clone()));
                }
                p += 1;
            }
        }
        out
    }
}

/// Standard inputs for the experiments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestNumberKind {
    Golden { digits: u32 },
    Sqrt2 { digits: u32 },
    Liouville { base: u32, depth: u32 },
    Rational(ExactScalar),
    Random { seed: u64, digits: u32 },
}

/// A rational stand-in `ŷ` for a target real with `|ŷ - y| <= error_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestNumber {
    #[serde(serialize_with = "ser_exact")]
    pub value: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub error_bound: ExactScalar,
    pub provenance: String,
}

fn isqrt_scaled(k: u32, digits: u32) -> BigInt {
    let scale = BigInt::from(10u32).pow(digits);
    (BigInt::from(k) * &scale * &scale).sqrt()
}

pub fn make_test_number(kind: &TestNumberKind) -> Result<TestNumber> {
    Ok(match kind {
        TestNumberKind::Golden { digits } => {
            let scale = BigInt::from(10u32).pow(*digits);
            let num = (&scale + isqrt_scaled(5, *digits)) / 2;
            TestNumber {
                value: BigRational::new(num, scale),
                error_bound: scalar::pow10(-(*digits as i32)),
                provenance: format!("golden ratio truncated to {digits} decimals"),
            }
        }
        TestNumberKind::Sqrt2 { digits } => TestNumber {
            value: BigRational::new(isqrt_scaled(2, *digits), BigInt::from(10u32).pow(*digits)),
            error_bound: scalar::pow10(-(*digits as i32)),
            provenance: format!("sqrt(2) truncated to {digits} decimals"),
        },
        TestNumberKind::Liouville { base, depth } => {
            if *base < 2 || *depth == 0 || *depth > 7 {
                return Err(Error::InvalidParameter(
                    "Liouville number needs base >= 2 and 1 <= depth <= 7".into(),
                ));
            }
            TestNumber {
                value: liouville_value(*base, *depth),
                error_bound: ExactScalar::zero(),
                provenance: format!("sum of {base}^(-k!) for k = 1..{depth}"),
            }
        }
        TestNumberKind::Rational(r) => TestNumber {
            value: r.clone(),
            error_bound: ExactScalar::zero(),
            provenance: format!("rational {}", scalar::fmt_exact(r)),
        },
        TestNumberKind::Random { seed, digits } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut num = BigInt::zero();
            for _ in 0..*digits {
                num = num * 10 + rng.gen_range(0u32..10);
            }
            TestNumber {
                value: BigRational::new(num, BigInt::from(10u32).pow(*digits)),
                error_bound: scalar::pow10(-(*digits as i32)),
                provenance: format!("uniform random, seed {seed}, {digits} decimals"),
            }
        }
    })
}

fn factorial(k: u32) -> u32 {
    (1..=k).product()
}

fn liouville_value(base: u32, depth: u32) -> ExactScalar {
    let b = int(base as i64);
    (1..=depth).fold(ExactScalar::zero(), |acc, k| {
        acc + scalar::powi(&b, -(factorial(k) as i64))
    })
}

/// The closed-form convergents `q = b^{k!}` of a truncated Liouville number.
pub fn liouville_witnesses(base: u32, depth: u32) -> Vec<ApproxWitness> {
    let y = liouville_value(base, depth);
    let a = vec![vec![y]];
    (1..depth)
        .map(|k| {
            let q = BigInt::from(base).pow(factorial(k));
            let p: BigInt = -(1..=k)
                .map(|i| BigInt::from(base).pow(factorial(k) - factorial(i)))
                .sum::<BigInt>();
            verify_witness(&a, &[q], &[p], Mode::Standard).expect("well-formed witness")
        })
        .collect()
}

impl TestNumber {
    /// Refuses `(Q, v_max)` unless `error_bound < ½·Q^{-(v_max+1)}`.
    pub fn check_sufficiency(&self, q_max: u64, v_max: &ExactScalar) -> Result<()> {
        if self.error_bound.is_zero() {
            return Ok(());
        }
        let e = -(v_max + ExactScalar::one());
        let twice = &self.error_bound * int(2);
        if scalar::cmp_with_power(&twice, &int(q_max as i64), &e) == Ordering::Less {
            return Ok(());
        }
        // Minimal decimal precision 10^-d with 2·10^-d < Q^{-(v_max+1)}.
        let need = (scalar::to_f64(&(v_max + ExactScalar::one())) * (q_max as f64).log10()
            + 2f64.log10())
        .floor() as i64
            + 1;
        Err(Error::TruncationInsufficient {
            precision: scalar::fmt_exact(&self.error_bound),
            q: q_max.to_string(),
            v_max: scalar::fmt_exact(v_max),
            required: format!("1/2*{q_max}^(-{}) (10^-{need} suffices)", scalar::fmt_exact(&(v_max + ExactScalar::one()))),
        })
    }
}
