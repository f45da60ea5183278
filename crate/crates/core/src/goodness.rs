//! Sublevel-set measures and `(C, α)`-goodness for functions of one variable.
//!
//! Polynomials, and maxima of finitely many polynomials, are handled exactly
//! with Sturm root isolation. Everything else goes through log-domain interval
//! evaluation on an adaptive grid and comes back as an enclosing interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::ser_exact;
use crate::scalar::{self, int, ExactScalar};

/// Rational polynomial, lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    c: Vec<ExactScalar>,
}

impl Poly {
    pub fn new(mut c: Vec<ExactScalar>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Self { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| int(x)).collect())
    }

    /// `x^l`.
    pub fn monomial(l: usize) -> Self {
        let mut c = vec![ExactScalar::zero(); l + 1];
        c[l] = ExactScalar::one();
        Self { c }
    }

    /// `(x - a)^l`.
    pub fn shifted_power(a: &ExactScalar, l: usize) -> Self {
        Self::monomial(l).compose_affine(&ExactScalar::one(), &-a.clone())
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.c
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        self.c.iter().rev().fold(ExactScalar::zero(), |acc, k| acc * x + k)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, k)| k * int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        Self::new(self.c.iter().map(|x| x * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.c.len().max(other.c.len());
        let zero = ExactScalar::zero();
        Self::new(
            (0..len)
                .map(|i| self.c.get(i).unwrap_or(&zero) + other.c.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn add_constant(&self, k: &ExactScalar) -> Self {
        self.add(&Self::new(vec![k.clone()]))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut c = vec![ExactScalar::zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `x ↦ p(ax + b)`.
    pub fn compose_affine(&self, a: &ExactScalar, b: &ExactScalar) -> Self {
        let lin = Self::new(vec![b.clone(), a.clone()]);
        self.c
            .iter()
            .rev()
            .fold(Self::new(Vec::new()), |acc, k| acc.mul(&lin).add_constant(k))
    }

    fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("nonzero divisor");
        if self.c.len() <= dd {
            return (Self::new(Vec::new()), self.clone());
        }
        let lead = &d.c[dd];
        let mut r = self.c.clone();
        let mut q = vec![ExactScalar::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = &r[i + dd] / lead;
            if !coef.is_zero() {
                for (k, dk) in d.c.iter().enumerate() {
                    r[i + k] -= &coef * dk;
                }
            }
            q[i] = coef;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        match a.c.last().cloned() {
            Some(lead) => a.scale(&lead.recip()),
            None => a,
        }
    }

    /// Same real roots, all simple.
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) <= 1 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            self.clone()
        } else {
            self.div_rem(&g).0
        }
    }

    /// Enclosure of `p([lo, hi])` by interval Horner.
    fn range(&self, lo: &ExactScalar, hi: &ExactScalar) -> (ExactScalar, ExactScalar) {
        let mut a = ExactScalar::zero();
        let mut b = ExactScalar::zero();
        for k in self.c.iter().rev() {
            let prods = [&a * lo, &a * hi, &b * lo, &b * hi];
            a = prods.iter().min().expect("four") + k;
            b = prods.iter().max().expect("four") + k;
        }
        (a, b)
    }

    fn range_f64(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for k in self.c.iter().rev() {
            let k = scalar::to_f64(k);
            let prods = [a * lo, a * hi, b * lo, b * hi];
            a = prods.iter().copied().fold(f64::INFINITY, f64::min) + k;
            b = prods.iter().copied().fold(f64::NEG_INFINITY, f64::max) + k;
        }
        let pad = 1e-12 * (a.abs() + b.abs()) + 1e-300;
        (a - pad, b + pad)
    }
}

struct Sturm {
    seq: Vec<Poly>,
}

impl Sturm {
    fn new(p: &Poly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-ExactScalar::one()));
        }
        Self { seq }
    }

    fn variations(&self, x: &ExactScalar) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for p in &self.seq {
            let v = p.eval(x);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                continue;
            };
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: &ExactScalar, b: &ExactScalar) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// A root in `(lo, hi]`, exact when `lo == hi`.
#[derive(Clone, Debug)]
struct RootBox {
    lo: ExactScalar,
    hi: ExactScalar,
}

impl RootBox {
    fn exact(x: ExactScalar) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

fn half(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    (a + b) / int(2)
}

/// Width below `tol` or below `2^{-50}` relative to the distance from 0.
fn narrow(a: &ExactScalar, b: &ExactScalar, tol: &ExactScalar) -> bool {
    let w = b - a;
    if w <= *tol {
        return true;
    }
    if a.is_negative() != b.is_negative() || a.is_zero() {
        return false;
    }
    w * int(1i64 << 50) <= a.abs().min(b.abs())
}

/// Roots of a square-free `p` in the open interval `(lo, hi)`, ascending.
fn isolate(p: &Poly, st: &Sturm, lo: &ExactScalar, hi: &ExactScalar, tol: &ExactScalar) -> Vec<RootBox> {
    match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(1) => {
            let r = -&p.c[0] / &p.c[1];
            return if &r > lo && &r < hi { vec![RootBox::exact(r)] } else { Vec::new() };
        }
        _ => {}
    }
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone(), st.count(lo, hi))];
    while let Some((a, b, k)) = stack.pop() {
        if k == 0 {
            continue;
        }
        if k == 1 {
            if p.eval(&b).is_zero() {
                out.push(RootBox::exact(b));
                continue;
            }
            if narrow(&a, &b, tol) {
                out.push(RootBox { lo: a, hi: b });
                continue;
            }
        }
        let m = half(&a, &b);
        let k1 = st.count(&a, &m);
        stack.push((m.clone(), b, k - k1));
        stack.push((a, m, k1));
    }
    out.retain(|r| !(r.is_exact() && r.hi == *hi));
    out
}

fn refine(r: &mut RootBox, p: &Poly, st: &Sturm) {
    if r.is_exact() {
        return;
    }
    let m = half(&r.lo, &r.hi);
    if p.eval(&m).is_zero() {
        *r = RootBox::exact(m);
    } else if st.count(&r.lo, &m) == 1 {
        r.hi = m;
    } else {
        r.lo = m;
    }
}

/// Exact bounds on `|{x ∈ (lo, hi) : max_i |f_i(x)| < τ}|`.
fn poly_sublevel(fs: &[Poly], lo: &ExactScalar, hi: &ExactScalar, tau: &ExactScalar) -> (ExactScalar, ExactScalar) {
    let width = hi - lo;
    let mut product = Poly::new(vec![ExactScalar::one()]);
    let mut exact_roots: Vec<ExactScalar> = Vec::new();
    for f in fs {
        for t in [tau.clone(), -tau.clone()] {
            let g = f.add_constant(&t);
            match g.degree() {
                Some(1) => exact_roots.push(-&g.c[0] / &g.c[1]),
                Some(d) if d >= 2 => product = product.mul(&g),
                _ => {}
            }
        }
    }
    let mut p = product.square_free();
    exact_roots.sort();
    exact_roots.dedup();
    for r in &exact_roots {
        let lin = Poly::new(vec![-r.clone(), ExactScalar::one()]);
        let (q, rem) = p.div_rem(&lin);
        if rem.is_zero() && !q.is_zero() {
            p = q;
        }
    }
    let st = Sturm::new(&p);
    let tol = &width / int(1i64 << 50) / int(1i64 << 40);
    let mut boxes = vec![RootBox::exact(lo.clone())];
    boxes.extend(isolate(&p, &st, lo, hi, &tol));
    boxes.extend(
        exact_roots
            .into_iter()
            .filter(|r| r > lo && r < hi)
            .map(RootBox::exact),
    );
    boxes.push(RootBox::exact(hi.clone()));
    // Separate neighbours so that a test point lies strictly between roots.
    loop {
        boxes.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let Some(i) = (0..boxes.len() - 1).find(|&i| boxes[i].hi >= boxes[i + 1].lo) else {
            break;
        };
        let k = if boxes[i].is_exact() {
            i + 1
        } else if boxes[i + 1].is_exact() || &boxes[i].hi - &boxes[i].lo >= &boxes[i + 1].hi - &boxes[i + 1].lo {
            i
        } else {
            i + 1
        };
        refine(&mut boxes[k], &p, &st);
    }
    let mut lower = ExactScalar::zero();
    let mut upper = ExactScalar::zero();
    for pair in boxes.windows(2) {
        let t = half(&pair[0].hi, &pair[1].lo);
        if fs.iter().all(|f| f.eval(&t).abs() < *tau) {
            lower += &pair[1].lo - &pair[0].hi;
            upper += &pair[1].hi - &pair[0].lo;
        }
    }
    (lower, upper)
}

/// Exact bounds on `sup_{[lo, hi]} |f|`.
fn poly_sup(f: &Poly, lo: &ExactScalar, hi: &ExactScalar) -> (ExactScalar, ExactScalar) {
    let mut s_lo = f.eval(lo).abs().max(f.eval(hi).abs());
    let mut s_hi = s_lo.clone();
    let d = f.derivative().square_free();
    if d.degree().unwrap_or(0) >= 1 {
        let st = Sturm::new(&d);
        let tol = (hi - lo) / int(1i64 << 60);
        for r in isolate(&d, &st, lo, hi, &tol) {
            let mid = half(&r.lo, &r.hi);
            s_lo = s_lo.max(f.eval(&mid).abs());
            let (a, b) = f.range(&r.lo, &r.hi);
            s_hi = s_hi.max(a.abs().max(b.abs()));
        }
    }
    (s_lo, s_hi)
}

fn pad_down(x: f64) -> f64 {
    if x.is_finite() {
        x - 1e-9 * (1.0 + x.abs())
    } else {
        x
    }
}

fn pad_up(x: f64) -> f64 {
    if x.is_finite() {
        x + 1e-9 * (1.0 + x.abs())
    } else {
        x
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    #[serde(serialize_with = "ser_exact")]
    pub a: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub b: ExactScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemovedInterval {
    pub stage: u32,
    #[serde(flatten)]
    pub segment: Segment,
}

#[derive(Clone, Copy, Debug)]
struct Bump {
    a: f64,
    b: f64,
    ln_c: f64,
}

impl Bump {
    /// `ln(c φ(x - a) φ(b - x))`, `-inf` outside `(a, b)`.
    fn ln_at(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return f64::NEG_INFINITY;
        }
        let (u, w) = (x - self.a, self.b - x);
        self.ln_c - 1.0 / (u * u) - 1.0 / (w * w)
    }

    /// Max of the bump over `[lo, hi]`, attained at the point nearest the centre.
    fn ln_max_on(&self, lo: f64, hi: f64) -> f64 {
        let m = 0.5 * (self.a + self.b);
        self.ln_at(m.clamp(lo, hi))
    }
}

/// A truncated smooth function vanishing exactly on a fat Cantor set `K`:
/// stage `k` splits every surviving interval into `3^k` equal pieces and
/// removes the middle one, and each removed `J = (a, b)` carries the bump
/// `c_k φ(x - a) φ(b - x)` with `φ(x) = e^{-1/x²}` for `x > 0`.
#[derive(Clone, Debug, Serialize)]
pub struct CantorBad {
    pub levels: u32,
    pub removed: Vec<RemovedInterval>,
    pub surviving: Vec<Segment>,
    /// `|K_levels| = Π_{k<=levels} (1 - 3^{-k})`.
    #[serde(serialize_with = "ser_exact")]
    pub surviving_measure: ExactScalar,
    /// `ln c_k` for `k = 1..=levels`.
    pub ln_decay: Vec<f64>,
    #[serde(skip)]
    bumps: Vec<Bump>,
}

pub const MAX_CANTOR_LEVELS: u32 = 6;

/// The construction with `c_k = 3^{-3^k}`.
pub fn build_cantor_bad(levels: u32) -> Result<CantorBad> {
    let ln3 = 3f64.ln();
    let decay = (1..=levels).map(|k| -(3f64.powi(k as i32)) * ln3).collect();
    build_cantor_bad_with(levels, decay)
}

/// Same construction with an explicit schedule of `ln c_k`.
pub fn build_cantor_bad_with(levels: u32, ln_decay: Vec<f64>) -> Result<CantorBad> {
    if levels > MAX_CANTOR_LEVELS {
        return Err(Error::InvalidParameter(format!(
            "levels {levels} exceeds {MAX_CANTOR_LEVELS}"
        )));
    }
    if ln_decay.len() != levels as usize {
        return Err(Error::InvalidParameter("one decay value per level".into()));
    }
    let mut surviving = vec![Segment {
        a: ExactScalar::zero(),
        b: ExactScalar::one(),
    }];
    let mut removed = Vec::new();
    for k in 1..=levels {
        let pieces = 3i64.pow(k);
        let mid = (pieces - 1) / 2;
        let mut next = Vec::with_capacity(surviving.len() * 2);
        for seg in &surviving {
            let len = (&seg.b - &seg.a) / int(pieces);
            let a = &seg.a + &len * int(mid);
            let b = &a + &len;
            next.push(Segment {
                a: seg.a.clone(),
                b: a.clone(),
            });
            next.push(Segment {
                a: b.clone(),
                b: seg.b.clone(),
            });
            removed.push(RemovedInterval {
                stage: k,
                segment: Segment { a, b },
            });
        }
        surviving = next;
    }
    let surviving_measure = surviving.iter().map(|s| &s.b - &s.a).sum();
    let bumps = removed
        .iter()
        .map(|r| Bump {
            a: scalar::to_f64(&r.segment.a),
            b: scalar::to_f64(&r.segment.b),
            ln_c: ln_decay[r.stage as usize - 1],
        })
        .collect();
    Ok(CantorBad {
        levels,
        removed,
        surviving,
        surviving_measure,
        ln_decay,
        bumps,
    })
}

impl CantorBad {
    /// `x ∈ K_levels`.
    pub fn in_surviving_set(&self, x: &ExactScalar) -> bool {
        self.surviving.iter().any(|s| &s.a <= x && x <= &s.b)
    }

    /// `ln ψ(x)`; `-inf` on `K_levels` and outside `[0, 1]`.
    pub fn ln_value(&self, x: f64) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.ln_at(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bumps have disjoint supports, so `ψ` is the max of them.
    fn ln_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::NEG_INFINITY;
        for b in &self.bumps {
            if hi <= b.a || lo >= b.b {
                continue;
            }
            upper = upper.max(b.ln_max_on(lo.max(b.a), hi.min(b.b)));
            if lo > b.a && hi < b.b {
                lower = b.ln_at(lo).min(b.ln_at(hi));
            }
        }
        (pad_down(lower), pad_up(upper))
    }

    fn ln_sup(&self, lo: f64, hi: f64) -> f64 {
        self.bumps
            .iter()
            .filter(|b| hi > b.a && lo < b.b)
            .map(|b| b.ln_max_on(lo.max(b.a), hi.min(b.b)))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A function on an interval of the line.
#[derive(Clone, Debug)]
pub enum FunctionSpec {
    Polynomial(Poly),
    CantorBad(CantorBad),
    /// `x ↦ max_i |f_i(x)|`.
    SupOf(Vec<FunctionSpec>),
    /// `x ↦ c + Σ w_i f_i(x)`.
    AffineCombination {
        base: Vec<FunctionSpec>,
        weights: Vec<ExactScalar>,
        constant: ExactScalar,
    },
}

impl FunctionSpec {
    pub fn polynomial(coeffs: Vec<ExactScalar>) -> Self {
        Self::Polynomial(Poly::new(coeffs))
    }

    pub fn sup_of(fs: Vec<FunctionSpec>) -> Result<Self> {
        if fs.is_empty() {
            return Err(Error::InvalidParameter("sup of an empty family".into()));
        }
        Ok(Self::SupOf(fs))
    }

    /// Collapses to a polynomial when every base function is one.
    pub fn affine_combination(base: Vec<FunctionSpec>, weights: Vec<ExactScalar>, constant: ExactScalar) -> Result<Self> {
        if base.len() != weights.len() {
            return Err(Error::InvalidParameter("one weight per base function".into()));
        }
        if base.iter().all(|f| matches!(f, Self::Polynomial(_))) {
            let p = base.iter().zip(&weights).fold(
                Poly::new(vec![constant.clone()]),
                |acc, (f, w)| match f {
                    Self::Polynomial(p) => acc.add(&p.scale(w)),
                    _ => unreachable!(),
                },
            );
            return Ok(Self::Polynomial(p));
        }
        Ok(Self::AffineCombination {
            base,
            weights,
            constant,
        })
    }

    /// Leaves when the function is a max of polynomials.
    fn polynomial_leaves(&self) -> Option<Vec<Poly>> {
        match self {
            Self::Polynomial(p) => Some(vec![p.clone()]),
            Self::SupOf(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.polynomial_leaves()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Exact value where the function is built from polynomials.
    pub fn eval_exact(&self, x: &ExactScalar) -> Option<ExactScalar> {
        match self {
            Self::Polynomial(p) => Some(p.eval(x)),
            Self::CantorBad(_) => None,
            Self::SupOf(fs) => fs
                .iter()
                .map(|f| f.eval_exact(x).map(|v| v.abs()))
                .try_fold(ExactScalar::zero(), |m, v| v.map(|v| m.max(v))),
            Self::AffineCombination {
                base,
                weights,
                constant,
            } => base
                .iter()
                .zip(weights)
                .try_fold(constant.clone(), |acc, (f, w)| f.eval_exact(x).map(|v| acc + v * w)),
        }
    }

    /// `ln |f(x)|`.
    pub fn ln_abs_at(&self, x: f64) -> f64 {
        self.ln_abs_range(x, x).1
    }

    fn value_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Self::Polynomial(p) => p.range_f64(lo, hi),
            Self::CantorBad(_) | Self::SupOf(_) => {
                let (a, b) = self.ln_abs_range(lo, hi);
                (a.exp(), b.exp())
            }
            Self::AffineCombination {
                base,
                weights,
                constant,
            } => {
                let c = scalar::to_f64(constant);
                let (mut a, mut b) = (c, c);
                for (f, w) in base.iter().zip(weights) {
                    let w = scalar::to_f64(w);
                    let (fa, fb) = f.value_range(lo, hi);
                    let (x, y) = (w * fa, w * fb);
                    a += x.min(y);
                    b += x.max(y);
                }
                let pad = 1e-12 * (a.abs() + b.abs()) + 1e-300;
                (a - pad, b + pad)
            }
        }
    }

    /// Enclosure of `ln |f|` over `[lo, hi]`.
    fn ln_abs_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Self::CantorBad(c) => c.ln_range(lo, hi),
            Self::SupOf(fs) => fs.iter().map(|f| f.ln_abs_range(lo, hi)).fold(
                (f64::NEG_INFINITY, f64::NEG_INFINITY),
                |(a, b), (x, y)| (a.max(x), b.max(y)),
            ),
            _ => {
                let (a, b) = self.value_range(lo, hi);
                let top = a.abs().max(b.abs()).ln();
                let bottom = if a <= 0.0 && b >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    a.abs().min(b.abs()).ln()
                };
                (bottom, top)
            }
        }
    }

    /// Bounds on `ln sup_B |f|`.
    fn ln_sup(&self, ball: &Ball) -> (f64, f64) {
        let (lo, hi) = (ball.lo(), ball.hi());
        let (flo, fhi) = (scalar::to_f64(&lo), scalar::to_f64(&hi));
        match self {
            Self::Polynomial(p) => {
                let (a, b) = poly_sup(p, &lo, &hi);
                (scalar::ln_abs(&a), scalar::ln_abs(&b))
            }
            Self::CantorBad(c) => {
                let s = c.ln_sup(flo, fhi);
                (pad_down(s), pad_up(s))
            }
            Self::SupOf(fs) => fs.iter().map(|f| f.ln_sup(ball)).fold(
                (f64::NEG_INFINITY, f64::NEG_INFINITY),
                |(a, b), (x, y)| (a.max(x), b.max(y)),
            ),
            Self::AffineCombination { .. } => branch_and_bound(self, flo, fhi),
        }
    }
}

#[derive(PartialEq)]
struct Piece(f64, f64, f64);

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

const BNB_STEPS: usize = 20_000;

fn branch_and_bound(f: &FunctionSpec, lo: f64, hi: f64) -> (f64, f64) {
    let mut best = f.ln_abs_range(lo, lo).0.max(f.ln_abs_range(hi, hi).0);
    let mut heap = BinaryHeap::new();
    heap.push(Piece(f.ln_abs_range(lo, hi).1, lo, hi));
    for _ in 0..BNB_STEPS {
        let Some(Piece(upper, a, b)) = heap.pop() else { break };
        if upper - best <= 1e-9 * (1.0 + best.abs()) {
            heap.push(Piece(upper, a, b));
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            heap.push(Piece(upper, a, b));
            break;
        }
        best = best.max(f.ln_abs_range(m, m).0);
        heap.push(Piece(f.ln_abs_range(a, m).1, a, m));
        heap.push(Piece(f.ln_abs_range(m, b).1, m, b));
    }
    let upper = heap.peek().map_or(best, |p| p.0.max(best));
    (best, upper)
}

const MAX_DEPTH: u32 = 40;

/// `(inside, undecided)` measures of `{ln|f| < ln τ}` on `[lo, hi]`, for every
/// `τ` with `ln τ ∈ [tau_lo, tau_hi]`.
fn interval_sublevel(f: &FunctionSpec, lo: f64, hi: f64, tau_lo: f64, tau_hi: f64) -> (f64, f64) {
    let mut inside = 0.0;
    let mut undecided = 0.0;
    let mut stack = vec![(lo, hi, 0u32)];
    while let Some((a, b, depth)) = stack.pop() {
        let (l, u) = f.ln_abs_range(a, b);
        if u < tau_lo {
            inside += b - a;
        } else if l >= tau_hi {
            continue;
        } else if l >= tau_lo && u < tau_hi {
            // Inside the threshold band itself: refining cannot decide it.
            undecided += b - a;
        } else {
            let m = 0.5 * (a + b);
            if depth >= MAX_DEPTH || m <= a || m >= b {
                undecided += b - a;
            } else {
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
    }
    (inside, undecided)
}

/// `B(center, radius)` on the line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ball {
    #[serde(serialize_with = "ser_exact")]
    pub center: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub radius: ExactScalar,
}

impl Ball {
    pub fn new(center: ExactScalar, radius: ExactScalar) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidParameter("ball radius must be positive".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn interval(lo: ExactScalar, hi: ExactScalar) -> Result<Self> {
        Self::new(half(&lo, &hi), (hi - lo) / int(2))
    }

    pub fn lo(&self) -> ExactScalar {
        &self.center - &self.radius
    }

    pub fn hi(&self) -> ExactScalar {
        &self.center + &self.radius
    }

    pub fn measure(&self) -> ExactScalar {
        &self.radius * int(2)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SublevelMeasure {
    pub lower: f64,
    pub upper: f64,
    /// Set when the measure is known exactly.
    pub exact: Option<String>,
    /// `sturm` or `interval`.
    pub method: &'static str,
    pub ln_sup: (f64, f64),
}

/// Relative undecided mass tolerated before reporting an unresolved sign.
const UNDECIDED_TOLERANCE: f64 = 1e-6;

fn exact_measure(lower: ExactScalar, upper: ExactScalar, ln_sup: (f64, f64)) -> SublevelMeasure {
    SublevelMeasure {
        lower: scalar::to_f64(&lower),
        upper: scalar::to_f64(&upper),
        exact: (lower == upper).then(|| scalar::fmt_exact(&lower)),
        method: "sturm",
        ln_sup,
    }
}

fn interval_measure(f: &FunctionSpec, ball: &Ball, tau: (f64, f64), ln_sup: (f64, f64)) -> Result<SublevelMeasure> {
    let (lo, hi) = (scalar::to_f64(&ball.lo()), scalar::to_f64(&ball.hi()));
    let (inside, undecided) = interval_sublevel(f, lo, hi, tau.0, tau.1);
    if undecided > UNDECIDED_TOLERANCE * (hi - lo) {
        return Err(Error::Unresolved(format!("{undecided:e}")));
    }
    Ok(SublevelMeasure {
        lower: inside,
        upper: (inside + undecided).min(hi - lo),
        exact: None,
        method: "interval",
        ln_sup,
    })
}

/// `|{x ∈ B : |f(x)| < threshold}|`.
pub fn sublevel_measure(f: &FunctionSpec, ball: &Ball, threshold: &ExactScalar) -> Result<SublevelMeasure> {
    if !threshold.is_positive() {
        return Err(Error::InvalidParameter("threshold must be positive".into()));
    }
    let ln_sup = f.ln_sup(ball);
    if let Some(leaves) = f.polynomial_leaves() {
        let (a, b) = poly_sublevel(&leaves, &ball.lo(), &ball.hi(), threshold);
        return Ok(exact_measure(a, b, ln_sup));
    }
    let t = scalar::ln_abs(threshold);
    interval_measure(f, ball, (pad_down(t), pad_up(t)), ln_sup)
}

/// `|{x ∈ B : |f(x)| < ε sup_B |f|}|`.
pub fn relative_sublevel_measure(f: &FunctionSpec, ball: &Ball, eps: &ExactScalar) -> Result<SublevelMeasure> {
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    if let Some(leaves) = f.polynomial_leaves() {
        let (lo, hi) = (ball.lo(), ball.hi());
        let (mut s_lo, mut s_hi) = (ExactScalar::zero(), ExactScalar::zero());
        for p in &leaves {
            let (a, b) = poly_sup(p, &lo, &hi);
            s_lo = s_lo.max(a);
            s_hi = s_hi.max(b);
        }
        let ln_sup = (scalar::ln_abs(&s_lo), scalar::ln_abs(&s_hi));
        if s_hi.is_zero() {
            return Ok(exact_measure(ExactScalar::zero(), ExactScalar::zero(), ln_sup));
        }
        let lower = if s_lo.is_zero() {
            ExactScalar::zero()
        } else {
            poly_sublevel(&leaves, &lo, &hi, &(eps * &s_lo)).0
        };
        let upper = if s_lo == s_hi {
            poly_sublevel(&leaves, &lo, &hi, &(eps * &s_hi))
        } else {
            (lower.clone(), poly_sublevel(&leaves, &lo, &hi, &(eps * &s_hi)).1)
        };
        let lower = if s_lo == s_hi { upper.0.clone() } else { lower };
        return Ok(exact_measure(lower, upper.1, ln_sup));
    }
    let ln_sup = f.ln_sup(ball);
    if ln_sup.1 == f64::NEG_INFINITY {
        return Ok(exact_measure(ExactScalar::zero(), ExactScalar::zero(), ln_sup));
    }
    let ln_eps = scalar::ln_abs(eps);
    interval_measure(f, ball, (pad_down(ln_eps + ln_sup.0), pad_up(ln_eps + ln_sup.1)), ln_sup)
}

/// One `(B, ε)` sample of `|{|f| < ε sup_B|f|}| / (ε^α |B|)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    #[serde(serialize_with = "ser_exact")]
    pub ball_center: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub radius: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub alpha: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub eps: ExactScalar,
    /// From the upper measure bound.
    pub ratio: f64,
    pub ratio_lower: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallProfile {
    pub ball: Ball,
    pub c_hat: f64,
    pub c_hat_lower: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodnessProfile {
    #[serde(serialize_with = "ser_exact")]
    pub alpha: ExactScalar,
    pub eps_grid: Vec<String>,
    pub per_ball: Vec<BallProfile>,
    /// Sup of the measured ratios over all balls and thresholds.
    pub c_hat: f64,
    pub c_hat_lower: f64,
    pub rows: Vec<ProfileRow>,
}

fn ratio(measure: f64, ln_eps: f64, alpha: f64, ball_len: f64) -> f64 {
    if measure <= 0.0 {
        return 0.0;
    }
    (measure.ln() - alpha * ln_eps - ball_len.ln()).exp()
}

pub fn goodness_profile(
    f: &FunctionSpec,
    balls: &[Ball],
    alpha: &ExactScalar,
    eps_grid: &[ExactScalar],
) -> Result<GoodnessProfile> {
    if balls.is_empty() || eps_grid.is_empty() {
        return Err(Error::InvalidParameter("need at least one ball and one ε".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::InvalidParameter("α must be positive".into()));
    }
    let a = scalar::to_f64(alpha);
    let mut rows = Vec::new();
    let mut per_ball = Vec::new();
    for ball in balls {
        let len = scalar::to_f64(&ball.measure());
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        for eps in eps_grid {
            let m = relative_sublevel_measure(f, ball, eps)?;
            let ln_eps = scalar::ln_abs(eps);
            let row = ProfileRow {
                ball_center: ball.center.clone(),
                radius: ball.radius.clone(),
                alpha: alpha.clone(),
                eps: eps.clone(),
                ratio: ratio(m.upper, ln_eps, a, len),
                ratio_lower: ratio(m.lower, ln_eps, a, len),
            };
            hi = hi.max(row.ratio);
            lo = lo.max(row.ratio_lower);
            rows.push(row);
        }
        per_ball.push(BallProfile {
            ball: ball.clone(),
            c_hat: hi,
            c_hat_lower: lo,
        });
    }
    Ok(GoodnessProfile {
        alpha: alpha.clone(),
        eps_grid: eps_grid.iter().map(scalar::fmt_exact).collect(),
        c_hat: per_ball.iter().map(|b| b.c_hat).fold(0.0, f64::max),
        c_hat_lower: per_ball.iter().map(|b| b.c_hat_lower).fold(0.0, f64::max),
        per_ball,
        rows,
    })
}

/// Thresholds used at radius `r` are `ε = r^m` for these `m`.
pub const EPS_POWERS: [u32; 4] = [1, 2, 3, 4];

/// Required growth of `C_hat` between the largest and smallest radius.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct NotGoodRow {
    #[serde(serialize_with = "ser_exact")]
    pub alpha: ExactScalar,
    #[serde(serialize_with = "ser_exact")]
    pub radius: ExactScalar,
    pub c_hat: f64,
    pub c_hat_lower: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaSummary {
    #[serde(serialize_with = "ser_exact")]
    pub alpha: ExactScalar,
    /// `C_hat_lower(smallest r) / C_hat(largest r)`.
    pub growth: f64,
    pub monotone: bool,
    /// Monotone and `growth >= DIVERGENCE_FACTOR`.
    pub diverging: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NotGoodTable {
    #[serde(serialize_with = "ser_exact")]
    pub x0: ExactScalar,
    pub rows: Vec<NotGoodRow>,
    pub summary: Vec<AlphaSummary>,
}

/// `C_hat` over balls `B(x0, r)` for shrinking `r`, with thresholds `ε = r^m`.
/// Growth here is a finite-scale signal, not a proof of unboundedness.
pub fn demonstrate_not_good(
    f: &FunctionSpec,
    x0: &ExactScalar,
    alphas: &[ExactScalar],
    radii: &[ExactScalar],
) -> Result<NotGoodTable> {
    if let FunctionSpec::CantorBad(c) = f {
        if !c.in_surviving_set(x0) {
            return Err(Error::InvalidParameter(format!(
                "x0 = {} is not in the surviving set",
                scalar::fmt_exact(x0)
            )));
        }
    }
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("need at least two radii".into()));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for alpha in alphas {
        let mut per_r = Vec::new();
        for r in radii {
            let ball = Ball::new(x0.clone(), r.clone())?;
            let eps: Vec<ExactScalar> = EPS_POWERS.iter().map(|&m| scalar::powi(r, m as i64)).collect();
            let p = goodness_profile(f, &[ball], alpha, &eps)?;
            per_r.push((p.c_hat, p.c_hat_lower));
            rows.push(NotGoodRow {
                alpha: alpha.clone(),
                radius: r.clone(),
                c_hat: p.c_hat,
                c_hat_lower: p.c_hat_lower,
            });
        }
        let monotone = per_r.windows(2).all(|w| w[1].1 >= w[0].1);
        let growth = per_r.last().expect("radii").1 / per_r[0].0;
        summary.push(AlphaSummary {
            alpha: alpha.clone(),
            growth,
            monotone,
            diverging: monotone && growth >= DIVERGENCE_FACTOR,
        });
    }
    Ok(NotGoodTable {
        x0: x0.clone(),
        rows,
        summary,
    })
}

/// Dyadic radii `r_0, r_0/2, …` (`halvings + 1` values).
pub fn dyadic_radii(r0: &ExactScalar, halvings: u32) -> Vec<ExactScalar> {
    (0..=halvings)
        .map(|k| r0 / ExactScalar::from_integer(num_bigint::BigInt::from(1u64 << k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio as q;

    fn unit_ball() -> Ball {
        Ball::new(int(0), int(1)).unwrap()
    }

    fn eps_grid() -> Vec<ExactScalar> {
        vec![q(1, 2), q(1, 10), q(1, 1000), scalar::pow10(-6), scalar::pow10(-9)]
    }

    #[test]
    fn polynomial_algebra() {
        let p = Poly::from_ints(&[1, -3, 0, 2]);
        assert_eq!(p.derivative(), Poly::from_ints(&[-3, 0, 6]));
        let sq = Poly::from_ints(&[1, 2, 1]).mul(&Poly::from_ints(&[-2, 1]));
        assert_eq!(sq.square_free().degree(), Some(2));
        let shifted = Poly::shifted_power(&q(1, 3), 2);
        assert_eq!(shifted.eval(&q(1, 3)), int(0));
        assert_eq!(shifted.eval(&int(1)), q(4, 9));
    }

    #[test]
    fn sturm_counts_roots() {
        let p = Poly::from_ints(&[0, -1, 0, 1]); // x³ - x
        let st = Sturm::new(&p);
        assert_eq!(st.count(&int(-2), &int(2)), 3);
        assert_eq!(st.count(&q(-1, 2), &q(1, 2)), 1);
        let roots = isolate(&p, &st, &int(-2), &int(2), &q(1, 1 << 20));
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().all(RootBox::is_exact));
    }

    #[test]
    fn linear_sublevel_is_exact() {
        let f = FunctionSpec::polynomial(vec![int(0), int(1)]);
        let m = sublevel_measure(&f, &unit_ball(), &q(1, 10)).unwrap();
        assert_eq!(m.exact.as_deref(), Some("1/5"));
    }

    #[test]
    fn monomials_have_unit_constant() {
        for l in 1..=5 {
            let f = FunctionSpec::Polynomial(Poly::monomial(l));
            let balls = [unit_ball(), Ball::new(int(0), q(1, 3)).unwrap()];
            let p = goodness_profile(&f, &balls, &q(1, l as i64), &eps_grid()).unwrap();
            assert!((p.c_hat - 1.0).abs() < 1e-9, "l={l}: {}", p.c_hat);
            assert!((p.c_hat_lower - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn square_is_not_one_good() {
        let f = FunctionSpec::Polynomial(Poly::monomial(2));
        let p = goodness_profile(&f, &[unit_ball()], &int(1), &eps_grid()).unwrap();
        for row in &p.rows {
            let expected = scalar::to_f64(&row.eps).powf(-0.5);
            assert!((row.ratio / expected - 1.0).abs() < 1e-9);
        }
        assert!(p.c_hat > 3e4);
    }

    #[test]
    fn shifted_power_ratio_is_constant() {
        // (x - 1/3)^3 on [0, 1]: ratio (4/3)ε^{1/3}/ε^{1/3} while the set stays inside.
        let f = FunctionSpec::Polynomial(Poly::shifted_power(&q(1, 3), 3));
        let ball = Ball::interval(int(0), int(1)).unwrap();
        let grid = [scalar::pow10(-3), scalar::pow10(-6), scalar::pow10(-9)];
        let p = goodness_profile(&f, &[ball], &q(1, 3), &grid).unwrap();
        for row in &p.rows {
            assert!((row.ratio - 4.0 / 3.0).abs() < 1e-9, "{row:?}");
        }
    }

    #[test]
    fn sup_of_respects_closure() {
        let f1 = FunctionSpec::polynomial(vec![q(-1, 4), int(0), int(1)]);
        let f2 = FunctionSpec::polynomial(vec![int(0), q(1, 2), int(0), int(1)]);
        let g = FunctionSpec::sup_of(vec![f1.clone(), f2.clone()]).unwrap();
        let balls = [unit_ball(), Ball::new(q(1, 4), q(1, 2)).unwrap()];
        let alpha = q(1, 3);
        let pg = goodness_profile(&g, &balls, &alpha, &eps_grid()).unwrap();
        let p1 = goodness_profile(&f1, &balls, &alpha, &eps_grid()).unwrap();
        let p2 = goodness_profile(&f2, &balls, &alpha, &eps_grid()).unwrap();
        for ((rg, r1), r2) in pg.rows.iter().zip(&p1.rows).zip(&p2.rows) {
            assert!(rg.ratio_lower <= r1.ratio.max(r2.ratio) * (1.0 + 1e-9));
        }
        assert!(pg.c_hat_lower <= p1.c_hat.max(p2.c_hat) * (1.0 + 1e-9));
    }

    #[test]
    fn ratios_invariant_under_scaling_and_reparametrization() {
        let base = Poly::from_ints(&[0, -1, 0, 1]);
        let f = FunctionSpec::Polynomial(base.clone());
        let scaled = FunctionSpec::Polynomial(base.scale(&q(-7, 3)));
        // g(y) = f(2y + 1/3) on the preimage ball.
        let g = FunctionSpec::Polynomial(base.compose_affine(&int(2), &q(1, 3)));
        let ball = Ball::new(q(1, 5), q(9, 10)).unwrap();
        let pre = Ball::new((&ball.center - q(1, 3)) / int(2), &ball.radius / int(2)).unwrap();
        let alpha = q(1, 3);
        let pf = goodness_profile(&f, &[ball.clone()], &alpha, &eps_grid()).unwrap();
        let ps = goodness_profile(&scaled, &[ball], &alpha, &eps_grid()).unwrap();
        let pg = goodness_profile(&g, &[pre], &alpha, &eps_grid()).unwrap();
        for ((a, b), c) in pf.rows.iter().zip(&ps.rows).zip(&pg.rows) {
            assert_eq!(a.ratio, b.ratio);
            assert!((a.ratio - c.ratio).abs() < 1e-9 * a.ratio.max(1.0));
        }
    }

    #[test]
    fn interval_path_encloses_exact_measure() {
        let f = FunctionSpec::polynomial(vec![int(0), q(-1, 2), int(0), int(1)]);
        let ball = Ball::new(q(1, 10), int(1)).unwrap();
        let exact = relative_sublevel_measure(&f, &ball, &q(1, 10)).unwrap();
        let ln_sup = f.ln_sup(&ball);
        let t = scalar::to_f64(&q(1, 10)).ln();
        let m = interval_measure(&f, &ball, (pad_down(t + ln_sup.0), pad_up(t + ln_sup.1)), ln_sup).unwrap();
        assert!(m.lower <= exact.lower + 1e-12 && exact.upper <= m.upper + 1e-12);
        assert!(m.upper - m.lower < 1e-7);
    }

    #[test]
    fn cantor_construction() {
        let one = build_cantor_bad(1).unwrap();
        assert_eq!(one.removed.len(), 1);
        assert_eq!((one.removed[0].segment.a.clone(), one.removed[0].segment.b.clone()), (q(1, 3), q(2, 3)));
        let mut expected = ExactScalar::one();
        for k in 1..=4u32 {
            expected *= ExactScalar::one() - scalar::powi(&int(3), -(k as i64));
            let c = build_cantor_bad(k).unwrap();
            assert_eq!(c.surviving_measure, expected);
            assert_eq!(c.removed.len(), (1 << k) - 1);
        }
        assert!(build_cantor_bad(7).is_err());
    }

    #[test]
    fn cantor_function_vanishes_exactly_on_k() {
        let c = build_cantor_bad(4).unwrap();
        for x in [q(0, 1), q(4, 27), q(1, 3), q(2, 3), q(1, 1)] {
            assert!(c.in_surviving_set(&x));
            assert_eq!(c.ln_value(scalar::to_f64(&x)), f64::NEG_INFINITY);
        }
        for r in &c.removed {
            let m = scalar::to_f64(&half(&r.segment.a, &r.segment.b));
            assert!(c.ln_value(m).is_finite());
            assert!(!c.in_surviving_set(&half(&r.segment.a, &r.segment.b)));
        }
    }

    #[test]
    fn cantor_sublevel_in_removed_interval() {
        let c = build_cantor_bad(2).unwrap();
        let f = FunctionSpec::CantorBad(c);
        // ψ is below any threshold on the zero half of the ball.
        let ball = Ball::new(q(4, 27), q(1, 64)).unwrap();
        let m = relative_sublevel_measure(&f, &ball, &q(1, 2)).unwrap();
        assert!(m.lower > 1.0 / 64.0 && m.upper < 2.0 / 64.0);
        assert_eq!(m.method, "interval");
    }

    #[test]
    fn cantor_endpoint_diverges_and_control_stays_flat() {
        let f = FunctionSpec::CantorBad(build_cantor_bad(4).unwrap());
        let radii = dyadic_radii(&q(1, 64), 4);
        let alphas = [q(1, 4), q(1, 2), int(1)];
        let t = demonstrate_not_good(&f, &q(4, 27), &alphas, &radii).unwrap();
        assert!(t.summary.iter().all(|s| s.diverging), "{:?}", t.summary);
        assert!(t.summary.windows(2).all(|w| w[1].growth > w[0].growth));

        let x = FunctionSpec::polynomial(vec![int(0), int(1)]);
        let c = demonstrate_not_good(&x, &int(0), &[int(1)], &radii).unwrap();
        assert!(c.rows.iter().all(|r| (r.c_hat - 1.0).abs() < 1e-9));
        assert!(!c.summary[0].diverging);
    }

    #[test]
    fn not_good_requires_surviving_point() {
        let f = FunctionSpec::CantorBad(build_cantor_bad(2).unwrap());
        assert!(demonstrate_not_good(&f, &q(1, 2), &[q(1, 2)], &dyadic_radii(&q(1, 64), 2)).is_err());
    }

    #[test]
    fn affine_combination_with_cantor_uses_intervals() {
        let c = FunctionSpec::CantorBad(build_cantor_bad(1).unwrap());
        let x = FunctionSpec::polynomial(vec![int(0), int(1)]);
        let g = FunctionSpec::affine_combination(vec![c, x], vec![int(1), q(1, 1000)], int(0)).unwrap();
        assert!(matches!(g, FunctionSpec::AffineCombination { .. }));
        let ball = Ball::new(q(1, 4), q(1, 8)).unwrap();
        // On [1/8, 3/8] only the linear part away from the bump matters below 1/3.
        let m = sublevel_measure(&g, &ball, &q(3, 10000)).unwrap();
        assert!((m.lower - (0.3 - 0.125)).abs() < 1e-6 && m.upper - m.lower < 1e-6, "{m:?}");
        let collapsed = FunctionSpec::affine_combination(
            vec![FunctionSpec::Polynomial(Poly::monomial(2))],
            vec![int(3)],
            int(1),
        )
        .unwrap();
        assert_eq!(collapsed.eval_exact(&int(2)), Some(int(13)));
    }
}
