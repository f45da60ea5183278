//! Lattices `u_y Z^{n+1}`, the diagonal flows acting on them, and exact
//! shortest vectors in the sup-norm.
//!
//! Flow times are [`LogLinear`] values, so `e^{t}` is carried symbolically.
//! Whenever every scale factor is rational (for instance `t` an integer
//! multiple of `n·ln 2`) the flowed lattice is a rational lattice and its
//! shortest vector is computed exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{c_vector, IndexSet, MultiVector, SubgroupRep};
use crate::logspace::{LogLinear, ScaledValue};
use crate::scalar::{self, ExactScalar};

/// Largest ambient dimension for which shortest vectors are certified.
pub const MAX_SVP_DIM: usize = 6;

/// A full-rank lattice in `R^k`, one basis vector per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    rows: Vec<Vec<ExactScalar>>,
}

impl LatticeBasis {
    pub fn new(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::EmptyBasis);
        }
        for r in &rows {
            if r.len() != k {
                return Err(Error::DimensionMismatch {
                    left: k,
                    right: r.len(),
                });
            }
        }
        if determinant(&rows).is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Self {
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { ExactScalar::one() } else { ExactScalar::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<ExactScalar>] {
        &self.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn determinant(&self) -> ExactScalar {
        determinant(&self.rows)
    }

    /// Multiplies coordinate `i` of every basis vector by `factors[i]`.
    pub fn scale_coordinates(&self, factors: &[ExactScalar]) -> Result<Self> {
        if factors.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                left: self.ambient_dim(),
                right: factors.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().zip(factors).map(|(x, f)| x * f).collect())
            .collect();
        Self::new(rows)
    }

    pub fn scale(&self, c: &ExactScalar) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x * c).collect())
            .collect();
        Self::new(rows)
    }
}

/// Determinant by exact Gaussian elimination.
pub fn determinant(rows: &[Vec<ExactScalar>]) -> ExactScalar {
    let k = rows.len();
    let mut m: Vec<Vec<ExactScalar>> = rows.to_vec();
    let mut det = ExactScalar::one();
    for col in 0..k {
        let Some(piv) = (col..k).find(|&r| !m[r][col].is_zero()) else {
            return ExactScalar::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in (col + 1)..k {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..k {
                let d = &f * &m[col][c];
                m[r][c] -= d;
            }
        }
    }
    det
}

/// Basis of `u_y Z^{n+1}`: row 0 is `(1, y_1, …, y_n)`, row `i` is `e_i`.
pub fn unipotent_embed(y: &[ExactScalar]) -> LatticeBasis {
    let k = y.len() + 1;
    let mut rows = LatticeBasis::identity(k).rows;
    for (i, yi) in y.iter().enumerate() {
        rows[0][i + 1] = yi.clone();
    }
    LatticeBasis { rows }
}

/// The lattice `u_y Z^{n+1}` as the images `u_y e_i` (column convention):
/// `u_y e_0 = e_0` and `u_y e_i = e_i + y_i e_0`. This is the lattice of
/// vectors `(yq + p, q)`.
pub fn unipotent_lattice_vectors(y: &[ExactScalar]) -> Vec<Vec<ExactScalar>> {
    let k = y.len() + 1;
    let mut rows: Vec<Vec<ExactScalar>> = LatticeBasis::identity(k).rows;
    for (i, yi) in y.iter().enumerate() {
        rows[i + 1][0] = yi.clone();
    }
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMode {
    OneParameter,
    MultiParameter,
}

/// `g_t = diag(e^t, e^{-t_1}, …, e^{-t_n})` with `t = Σ t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSpec {
    times: Vec<LogLinear>,
    mode: FlowMode,
}

impl FlowSpec {
    /// `g_t = diag(e^t, e^{-t/n}, …)`.
    pub fn one_parameter(n: usize, t: LogLinear) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("flow needs n >= 1".into()));
        }
        if t.sign() == Ordering::Less {
            return Err(Error::InvalidParameter(format!("negative flow time {t}")));
        }
        let ti = t.scale(&BigRational::new(BigInt::one(), BigInt::from(n)));
        Ok(Self {
            times: vec![ti; n],
            mode: FlowMode::OneParameter,
        })
    }

    pub fn multi_parameter(times: Vec<LogLinear>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("flow needs n >= 1".into()));
        }
        if let Some(t) = times.iter().find(|t| t.sign() == Ordering::Less) {
            return Err(Error::InvalidParameter(format!("negative flow time {t}")));
        }
        Ok(Self {
            times,
            mode: FlowMode::MultiParameter,
        })
    }

    /// One-parameter time `t = step·n·ln(base)`: every scale factor is then
    /// the rational `base^{±…}`.
    pub fn on_grid(n: usize, base: u32, step: u64) -> Result<Self> {
        let t = LogLinear::in_base(
            &scalar::int(base as i64),
            &scalar::int((step as i64) * n as i64),
        )?;
        Self::one_parameter(n, t)
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn mode(&self) -> FlowMode {
        self.mode
    }

    pub fn times(&self) -> &[LogLinear] {
        &self.times
    }

    /// `t = Σ t_i`.
    pub fn total(&self) -> LogLinear {
        self.times
            .iter()
            .fold(LogLinear::zero(), |acc, t| &acc + t)
    }

    /// `t_I = Σ_{i∈I∖{0}} t_i`.
    pub fn partial(&self, set: &IndexSet) -> LogLinear {
        set.members()
            .filter(|&i| i > 0)
            .fold(LogLinear::zero(), |acc, i| &acc + &self.times[i - 1])
    }

    /// Logs of the diagonal entries `(t, -t_1, …, -t_n)`.
    pub fn coordinate_exponents(&self) -> Vec<LogLinear> {
        std::iter::once(self.total())
            .chain(self.times.iter().map(|t| -t))
            .collect()
    }

    /// Diagonal entries when they are all rational.
    pub fn rational_factors(&self) -> Option<Vec<ExactScalar>> {
        self.coordinate_exponents()
            .iter()
            .map(|e| e.exp_exact())
            .collect()
    }
}

/// Scaling exponent of the block `e_I` under `g_t`: `t - t_I` if `0 ∈ I`,
/// else `-t_I`.
pub fn flow_scale_exponents(spec: &FlowSpec, set: &IndexSet) -> LogLinear {
    let partial = spec.partial(set);
    if set.contains(0) {
        &spec.total() - &partial
    } else {
        -partial
    }
}

/// A multivector whose coefficients carry symbolic exponential scales.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowedMultiVector {
    pub ambient_n: usize,
    pub grade: usize,
    pub coeffs: BTreeMap<IndexSet, ScaledValue>,
}

impl FlowedMultiVector {
    pub fn coefficient(&self, set: &IndexSet) -> Option<&ScaledValue> {
        self.coeffs.get(set)
    }

    /// Sup-norm, compared exactly.
    pub fn sup_norm(&self) -> Option<ScaledValue> {
        let v: Vec<ScaledValue> = self.coeffs.values().cloned().collect();
        crate::logspace::max_abs(&v).cloned()
    }
}

/// `g_t u_y w` following the action formula: the coefficient at `I ∋ 0` is
/// `e^{t - t_I}·(1, y)·c_{I,w}` and at `I ∌ 0` it is `e^{-t_I}·w_I`.
pub fn act_flow_unipotent(
    spec: &FlowSpec,
    y: &[ExactScalar],
    w: &MultiVector,
) -> Result<FlowedMultiVector> {
    let n = spec.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: y.len(),
        });
    }
    if w.ambient_n() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: w.ambient_n(),
        });
    }
    let j = w.grade();
    if j == 0 || j > n {
        return Err(Error::GradeMismatch {
            expected: n,
            found: j,
        });
    }
    let mut coeffs = BTreeMap::new();
    for set in IndexSet::all_of_size(n, j) {
        let value = if set.contains(0) {
            let c = c_vector(&set, w)?;
            let mut acc = c[0].clone();
            for (yi, ci) in y.iter().zip(&c[1..]) {
                acc += yi * ci;
            }
            acc
        } else {
            w.coefficient(&set)
        };
        if value.is_zero() {
            continue;
        }
        coeffs.insert(set, ScaledValue::new(value, flow_scale_exponents(spec, &set)));
    }
    Ok(FlowedMultiVector {
        ambient_n: n,
        grade: j,
        coeffs,
    })
}

/// Basis vectors of `g_t u_y Z^{n+1}` when the flow has rational factors.
pub fn flowed_unipotent_lattice(spec: &FlowSpec, y: &[ExactScalar]) -> Result<LatticeBasis> {
    if y.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            left: spec.n(),
            right: y.len(),
        });
    }
    let factors = spec.rational_factors().ok_or_else(|| {
        Error::InvalidParameter("flow scale factors are not rational".into())
    })?;
    LatticeBasis::new(unipotent_lattice_vectors(y))?.scale_coordinates(&factors)
}

/// Result of an exact shortest-vector computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestVector {
    /// Coefficients with respect to the input rows.
    pub coefficients: Vec<BigInt>,
    pub vector: Vec<ExactScalar>,
    /// Sup-norm of `vector`, i.e. `δ`.
    pub norm: ExactScalar,
    /// Coefficient-box radius that certifies the minimum (in the reduced basis).
    pub certified_radius: u64,
}

fn dot(a: &[ExactScalar], b: &[ExactScalar]) -> ExactScalar {
    a.iter()
        .zip(b)
        .fold(ExactScalar::zero(), |acc, (x, y)| acc + x * y)
}

fn sup(v: &[ExactScalar]) -> ExactScalar {
    scalar::sup_abs(v.iter())
}

struct GramSchmidt {
    mu: Vec<Vec<ExactScalar>>,
    norms: Vec<ExactScalar>,
}

fn gram_schmidt(b: &[Vec<ExactScalar>]) -> GramSchmidt {
    let m = b.len();
    let mut stars: Vec<Vec<ExactScalar>> = Vec::with_capacity(m);
    let mut mu = vec![vec![ExactScalar::zero(); m]; m];
    let mut norms = Vec::with_capacity(m);
    for i in 0..m {
        let mut s = b[i].clone();
        for j in 0..i {
            if norms[j] == ExactScalar::zero() {
                continue;
            }
            let c = dot(&b[i], &stars[j]) / &norms[j];
            for (x, y) in s.iter_mut().zip(&stars[j]) {
                *x -= &c * y;
            }
            mu[i][j] = c;
        }
        mu[i][i] = ExactScalar::one();
        norms.push(dot(&s, &s));
        stars.push(s);
    }
    GramSchmidt { mu, norms }
}

/// Exact LLL reduction (δ = 3/4); returns the reduced rows and the
/// unimodular transform `U` with `reduced = U·rows`.
fn lll(rows: &[Vec<ExactScalar>]) -> Result<(Vec<Vec<ExactScalar>>, Vec<Vec<BigInt>>)> {
    let m = rows.len();
    let mut b = rows.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    let mut gs = gram_schmidt(&b);
    if gs.norms.iter().any(|x| x.is_zero()) {
        return Err(Error::SingularBasis);
    }
    let delta = scalar::ratio(3, 4);
    let half = scalar::ratio(1, 2);
    let mut k = 1;
    while k < m {
        for j in (0..k).rev() {
            if gs.mu[k][j].abs() > half {
                let r = scalar::round_half_even(&gs.mu[k][j]);
                let rq = BigRational::from_integer(r.clone());
                let (bj, uj) = (b[j].clone(), u[j].clone());
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &rq * y;
                }
                for (x, y) in u[k].iter_mut().zip(&uj) {
                    *x -= &r * y;
                }
                for i in 0..=j {
                    let d = &rq * &gs.mu[j][i];
                    gs.mu[k][i] -= d;
                }
            }
        }
        let lhs = gs.norms[k].clone();
        let mu2 = &gs.mu[k][k - 1] * &gs.mu[k][k - 1];
        let rhs = (&delta - mu2) * &gs.norms[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            gs = gram_schmidt(&b);
            k = (k - 1).max(1);
        }
    }
    Ok((b, u))
}

/// `⌈√x⌉` upper bound for a nonnegative rational.
fn sqrt_upper(x: &ExactScalar) -> BigInt {
    let c = x.ceil().to_integer();
    if c.is_positive() {
        c.sqrt() + 1
    } else {
        BigInt::zero()
    }
}

/// Certifying coefficient bound: any lattice vector `x = c·R` has
/// `|c_l| <= ‖x‖_∞ · Σ_i |(R_S^{-1})_{il}|` for an invertible column minor `R_S`.
fn coefficient_bound_factor(reduced: &[Vec<ExactScalar>]) -> Result<ExactScalar> {
    let m = reduced.len();
    let k = reduced[0].len();
    // Pick pivot columns by elimination on the transpose.
    let mut work: Vec<Vec<ExactScalar>> = reduced.to_vec();
    let mut cols = Vec::with_capacity(m);
    let mut row = 0;
    for col in 0..k {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&r| !work[r][col].is_zero()) else {
            continue;
        };
        work.swap(p, row);
        for r in (row + 1)..m {
            if work[r][col].is_zero() {
                continue;
            }
            let f = &work[r][col] / &work[row][col];
            for c in col..k {
                let d = &f * &work[row][c];
                work[r][c] -= d;
            }
        }
        cols.push(col);
        row += 1;
    }
    if cols.len() < m {
        return Err(Error::SingularBasis);
    }
    let minor: Vec<Vec<ExactScalar>> = reduced
        .iter()
        .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
        .collect();
    let inv = invert(&minor)?;
    let mut best = ExactScalar::zero();
    for l in 0..m {
        let s = (0..m).fold(ExactScalar::zero(), |acc, i| acc + inv[i][l].abs());
        best = best.max(s);
    }
    Ok(best)
}

/// Inverse of a square rational matrix by Gauss–Jordan elimination.
pub fn invert(a: &[Vec<ExactScalar>]) -> Result<Vec<Vec<ExactScalar>>> {
    let m = a.len();
    let mut aug: Vec<Vec<ExactScalar>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..m).map(|j| if i == j { ExactScalar::one() } else { ExactScalar::zero() }));
            v
        })
        .collect();
    for col in 0..m {
        let p = (col..m)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or(Error::SingularBasis)?;
        aug.swap(p, col);
        let pivot = aug[col][col].clone();
        for x in aug[col].iter_mut() {
            *x /= &pivot;
        }
        for r in 0..m {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            let pivot_row = aug[col].clone();
            for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[m..].to_vec()).collect())
}

/// Exact shortest nonzero vector (sup-norm) of the lattice spanned by the
/// linearly independent `rows`.
///
/// The basis is LLL-reduced, the shortest reduced vector gives an upper bound
/// `b`, and every vector of sup-norm `<= b` is enumerated through the
/// Euclidean ball of radius `√k·b` (Fincke–Pohst). The dual coefficient bound
/// must not exceed `search_bound`.
pub fn shortest_vector(rows: &[Vec<ExactScalar>], search_bound: u64) -> Result<ShortestVector> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::EmptyBasis);
    }
    let k = rows[0].len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            left: k,
            right: rows.iter().map(|r| r.len()).find(|&l| l != k).unwrap_or(k),
        });
    }
    if k > MAX_SVP_DIM {
        return Err(Error::DimensionCap(k));
    }
    if m > k {
        return Err(Error::SingularBasis);
    }
    let (reduced, transform) = lll(rows)?;
    let mut best_idx = 0;
    for i in 1..m {
        if sup(&reduced[i]) < sup(&reduced[best_idx]) {
            best_idx = i;
        }
    }
    let mut best_norm = sup(&reduced[best_idx]);
    let mut best_coeffs: Vec<BigInt> = (0..m).map(|i| BigInt::from((i == best_idx) as i32)).collect();

    let factor = coefficient_bound_factor(&reduced)?;
    let required = (&factor * &best_norm).ceil().to_integer();
    let required_u64 = required.to_u64().unwrap_or(u64::MAX);
    if required_u64 > search_bound {
        return Err(Error::CertificationFailed {
            required: required_u64,
            bound: search_bound,
        });
    }

    let gs = gram_schmidt(&reduced);
    let kq = scalar::int(k as i64);
    let mut radius2 = &kq * &best_norm * &best_norm;
    let mut coeffs = vec![BigInt::zero(); m];
    enumerate_level(
        &reduced,
        &gs,
        m,
        &ExactScalar::zero(),
        &mut coeffs,
        &mut radius2,
        &kq,
        &mut best_norm,
        &mut best_coeffs,
    );

    let vector = combine(&best_coeffs, &reduced);
    let norm = sup(&vector);
    // Express the minimizer in the caller's basis.
    let mut original = vec![BigInt::zero(); m];
    for (c, urow) in best_coeffs.iter().zip(&transform) {
        for (o, u) in original.iter_mut().zip(urow) {
            *o += c * u;
        }
    }
    Ok(ShortestVector {
        coefficients: original,
        vector,
        norm,
        certified_radius: required_u64,
    })
}

fn combine(coeffs: &[BigInt], rows: &[Vec<ExactScalar>]) -> Vec<ExactScalar> {
    let k = rows[0].len();
    let mut v = vec![ExactScalar::zero(); k];
    for (c, r) in coeffs.iter().zip(rows) {
        if c.is_zero() {
            continue;
        }
        let cq = BigRational::from_integer(c.clone());
        for (x, y) in v.iter_mut().zip(r) {
            *x += &cq * y;
        }
    }
    v
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    rows: &[Vec<ExactScalar>],
    gs: &GramSchmidt,
    level: usize,
    partial: &ExactScalar,
    coeffs: &mut Vec<BigInt>,
    radius2: &mut ExactScalar,
    kq: &ExactScalar,
    best_norm: &mut ExactScalar,
    best_coeffs: &mut Vec<BigInt>,
) {
    if level == 0 {
        // Skip zero and one of each ±pair (last nonzero coefficient positive).
        match coeffs.iter().rev().find(|c| !c.is_zero()) {
            Some(c) if c.is_positive() => {}
            _ => return,
        }
        let v = combine(coeffs, rows);
        let norm = sup(&v);
        if norm < *best_norm {
            *best_norm = norm;
            *best_coeffs = coeffs.clone();
            *radius2 = kq * &*best_norm * &*best_norm;
        }
        return;
    }
    let i = level - 1;
    let mut center = ExactScalar::zero();
    for (m, c) in coeffs.iter().enumerate().skip(i + 1) {
        if !c.is_zero() {
            center -= BigRational::from_integer(c.clone()) * &gs.mu[m][i];
        }
    }
    let slack = &*radius2 - partial;
    if slack.is_negative() {
        return;
    }
    let r = sqrt_upper(&(&slack / &gs.norms[i]));
    let lo = (&center - BigRational::from_integer(r.clone())).ceil().to_integer();
    let hi = (&center + BigRational::from_integer(r)).floor().to_integer();
    let mut c = lo;
    while c <= hi {
        let d = BigRational::from_integer(c.clone()) - &center;
        let next = partial + &d * &d * &gs.norms[i];
        if next <= *radius2 {
            coeffs[i] = c.clone();
            enumerate_level(rows, gs, i, &next, coeffs, radius2, kq, best_norm, best_coeffs);
        }
        c += 1;
    }
    coeffs[i] = BigInt::zero();
}

/// `δ(Λ)`: the sup-norm of a shortest nonzero vector.
pub fn shortest_vector_norm(basis: &LatticeBasis, search_bound: u64) -> Result<ExactScalar> {
    Ok(shortest_vector(basis.rows(), search_bound)?.norm)
}

/// Evidence for `δ(Γ) <= c(j)·‖Γ‖^{1/j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinkowskiSample {
    #[serde(serialize_with = "crate::report::ser_exact")]
    pub delta: ExactScalar,
    pub norm_root: f64,
    pub ratio: f64,
}

/// Shortest vector of `Γ` (restricted to its span) against `‖Γ‖^{1/j}`.
pub fn minkowski_check(rep: &SubgroupRep, basis: &[Vec<BigInt>]) -> Result<MinkowskiSample> {
    let rows: Vec<Vec<ExactScalar>> = basis
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let sv = shortest_vector(&rows, u64::MAX)?;
    let j = rep.rank() as f64;
    let norm_root = (scalar::ln_abs(&rep.norm()) / j).exp();
    let delta_f = scalar::to_f64(&sv.norm);
    Ok(MinkowskiSample {
        delta: sv.norm,
        norm_root,
        ratio: delta_f / norm_root,
    })
}

/// One sample of `δ` along the one-parameter orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowSample {
    pub step: u64,
    pub t: f64,
    #[serde(serialize_with = "crate::report::ser_exact")]
    pub delta: ExactScalar,
    pub log_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub gamma_hat: f64,
    pub achieving_times: Vec<f64>,
    pub delta_log_series: Vec<FlowSample>,
    /// Samples with `t` below this are reported but excluded from `gamma_hat`.
    pub window_start: f64,
}

/// Growth exponent of `δ(g_t u_y Z^{n+1})` on the time grid
/// `t = step·n·ln(base)`, `t <= t_max`.
///
/// `gamma_hat` is the largest `-ln δ / t` over the second half of the time
/// range, clamped at 0: early times only measure the starting position in
/// the space of lattices, not its growth.
pub fn growth_exponent_estimate(
    y: &[ExactScalar],
    t_max: u64,
    base: u32,
    search_bound: u64,
) -> Result<GrowthEstimate> {
    let n = y.len();
    if t_max == 0 || n == 0 || base < 2 {
        return Err(Error::InvalidParameter(
            "growth estimate needs t_max >= 1, n >= 1 and base >= 2".into(),
        ));
    }
    let unit = n as f64 * (base as f64).ln();
    let steps = (t_max as f64 / unit).floor() as u64;
    let window_start = t_max as f64 / 2.0;
    let mut series = Vec::new();
    let mut gamma_hat = 0.0f64;
    let mut achieving = Vec::new();
    for step in 1..=steps {
        let spec = FlowSpec::on_grid(n, base, step)?;
        let lattice = flowed_unipotent_lattice(&spec, y)?;
        let delta = shortest_vector_norm(&lattice, search_bound)?;
        let t = step as f64 * unit;
        let log_delta = scalar::ln_abs(&delta);
        if t >= window_start {
            let g = (-log_delta / t).max(0.0);
            if g > gamma_hat + 1e-12 {
                gamma_hat = g;
                achieving = vec![t];
            } else if (g - gamma_hat).abs() <= 1e-12 {
                achieving.push(t);
            }
        }
        series.push(FlowSample {
            step,
            t,
            delta,
            log_delta,
        });
    }
    Ok(GrowthEstimate {
        gamma_hat,
        achieving_times: achieving,
        delta_log_series: series,
        window_start,
    })
}
