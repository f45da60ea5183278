//! Monte-Carlo estimate of the measure of
//! `A(b, v, Q) = {x ∈ [0,1) : |p + (b̃q)x| < Q^{-v} for some p, Q <= ‖q‖ < 2Q}`
//! with `b̃ = (1, b)`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::shell;
use crate::error::{Error, Result};
use crate::scalar::{self, int, ExactScalar};

/// Samples per shard; shard `i` draws from `ChaCha8(seed + i)`.
const SHARD: u64 = 10_000;
/// Floating-point decisions closer than this to the threshold are redone
/// exactly.
const EXACT_MARGIN: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct MeasureEstimate {
    pub q: u64,
    pub samples: u64,
    pub hits: u64,
    pub measure_hat: f64,
    /// Normal-approximation 95% half-width.
    pub halfwidth: f64,
    /// Wilson 95% interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub exact_rechecks: u64,
    pub seed: u64,
}

/// Exact membership of a rational `x`, by enumerating every `q` with
/// `Q <= ‖q‖ < 2Q`.
pub fn is_member_exact(b: &[ExactScalar], v: &ExactScalar, q: u64, x: &ExactScalar) -> bool {
    let n = b.len() + 1;
    let eps_check = |r: &ExactScalar| -> bool {
        let fl = r.floor();
        let d = (r - &fl).min(&fl + int(1) - r);
        d.is_zero() || scalar::cmp_with_power(&d, &int(q as i64), &-v.clone()) == Ordering::Less
    };
    for s in q..2 * q {
        for qi in shell(n, s as i64) {
            let bq = b
                .iter()
                .zip(&qi[1..])
                .fold(int(qi[0]), |acc, (bi, &c)| acc + bi * int(c));
            if eps_check(&(bq * x)) {
                return true;
            }
        }
    }
    false
}

/// Bucketed sorted values in `[0,1)` supporting "any value within `ε` of
/// `t` (mod 1)" queries in expected constant time.
struct Buckets {
    starts: Vec<u32>,
    values: Vec<f64>,
    scale: f64,
}

impl Buckets {
    fn build(vals: &[f64], scratch: &mut Vec<u32>) -> Self {
        let m = vals.len().max(1);
        let scale = m as f64;
        scratch.clear();
        scratch.resize(m + 1, 0);
        for &v in vals {
            let b = ((v * scale) as usize).min(m - 1);
            scratch[b + 1] += 1;
        }
        for i in 0..m {
            scratch[i + 1] += scratch[i];
        }
        let starts = scratch.clone();
        let mut fill = scratch[..m].to_vec();
        let mut values = vec![0.0; vals.len()];
        for &v in vals {
            let b = ((v * scale) as usize).min(m - 1);
            values[fill[b] as usize] = v;
            fill[b] += 1;
        }
        Self { starts, values, scale }
    }

    /// Smallest circular distance from `t` to a stored value, if below
    /// `limit`.
    fn nearest_within(&self, t: f64, limit: f64) -> Option<(f64, usize)> {
        let m = self.starts.len() - 1;
        let center = ((t * self.scale) as isize).min(m as isize - 1);
        let mut best: Option<(f64, usize)> = None;
        for off in -1isize..=1 {
            let b = (center + off).rem_euclid(m as isize) as usize;
            for idx in self.starts[b] as usize..self.starts[b + 1] as usize {
                let d = (self.values[idx] - t).abs();
                let d = d.min(1.0 - d);
                if d < limit && best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, idx));
                }
            }
        }
        best
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

struct Shape {
    /// `q_0` values for `‖q'‖ >= Q` (all of `(-2Q, 2Q)`) and for `‖q'‖ < Q`.
    all_q0: Vec<i64>,
    outer_q0: Vec<i64>,
    /// Sign-normalized `q'` (plus `0`) with `‖q'‖ < 2Q`, and whether
    /// `‖q'‖ >= Q`.
    tails: Vec<(Vec<i64>, bool)>,
}

impl Shape {
    fn new(n: usize, q: u64) -> Self {
        let q = q as i64;
        let all_q0: Vec<i64> = (-2 * q + 1..2 * q).collect();
        let outer_q0: Vec<i64> = all_q0.iter().copied().filter(|c| c.abs() >= q).collect();
        let mut tails = vec![(vec![0; n - 1], false)];
        for s in 1..2 * q {
            for t in shell(n - 1, s) {
                tails.push((t, s >= q));
            }
        }
        Self {
            all_q0,
            outer_q0,
            tails,
        }
    }
}

/// Decides membership of one sample; returns `(member, exact recheck used)`.
#[allow(clippy::too_many_arguments)]
fn sample_member(
    x: f64,
    b_f: &[f64],
    shape: &Shape,
    eps: f64,
    b: &[ExactScalar],
    v: &ExactScalar,
    q: u64,
    scratch: &mut (Vec<f64>, Vec<u32>),
) -> (bool, bool) {
    let frac_of = |q0: i64| frac(q0 as f64 * x);
    scratch.0.clear();
    scratch.0.extend(shape.all_q0.iter().map(|&c| frac_of(c)));
    let all = Buckets::build(&scratch.0, &mut scratch.1);
    scratch.0.clear();
    scratch.0.extend(shape.outer_q0.iter().map(|&c| frac_of(c)));
    let outer = Buckets::build(&scratch.0, &mut scratch.1);
    let bx: Vec<f64> = b_f.iter().map(|bi| bi * x).collect();
    let limit = eps + EXACT_MARGIN;
    let mut rechecked = false;
    for (tail, big) in &shape.tails {
        let s: f64 = tail.iter().zip(&bx).map(|(&c, bxi)| c as f64 * bxi).sum();
        let target = frac(-s);
        let (list, q0s) = if *big {
            (&all, &shape.all_q0)
        } else {
            (&outer, &shape.outer_q0)
        };
        let Some((d, _)) = list.nearest_within(target, limit) else {
            continue;
        };
        if d < eps - EXACT_MARGIN {
            return (true, rechecked);
        }
        // Borderline: decide exactly over every q_0 in the list.
        rechecked = true;
        let xr = BigRational::from_float(x).expect("finite sample");
        let eps_exact = |r: &ExactScalar| -> bool {
            let fl = r.floor();
            let d = (r - &fl).min(&fl + int(1) - r);
            d.is_zero() || scalar::cmp_with_power(&d, &int(q as i64), &-v.clone()) == Ordering::Less
        };
        let bq_tail = b
            .iter()
            .zip(tail)
            .fold(ExactScalar::zero(), |acc, (bi, &c)| acc + bi * int(c));
        for &q0 in q0s {
            let r = (&bq_tail + int(q0)) * &xr;
            let approx = frac(q0 as f64 * x + s);
            let da = approx.min(1.0 - approx);
            if (da - eps).abs() <= 2.0 * EXACT_MARGIN && eps_exact(&r) {
                return (true, true);
            }
        }
    }
    (false, rechecked)
}

/// Estimates `|A(b, v, Q)|` from `samples` uniform draws in `[0,1)`.
/// Membership per draw is decided over the whole `q`-shell; values within
/// `1e-10` of the threshold are re-decided in exact arithmetic.
pub fn measure_a_set(
    b: &[ExactScalar],
    v: &ExactScalar,
    q: u64,
    samples: u64,
    seed: u64,
) -> Result<MeasureEstimate> {
    let n = b.len() + 1;
    if b.is_empty() {
        return Err(Error::InvalidParameter("b must have at least one entry".into()));
    }
    if q < 2 {
        return Err(Error::InvalidParameter("Q must be >= 2".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let tails = (4.0 * q as f64).powi(n as i32 - 1) / 2.0;
    if tails > 5e6 || q > 1 << 20 {
        return Err(Error::EnumerationTooLarge(format!(
            "q-shell for Q = {q} in dimension {n} has about {tails:.0} tails"
        )));
    }
    let shape = Shape::new(n, q);
    let b_f: Vec<f64> = b.iter().map(scalar::to_f64).collect();
    let eps = (q as f64).powf(-scalar::to_f64(v));
    let shards = samples.div_ceil(SHARD);
    let per_shard: Vec<(u64, u64)> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let count = SHARD.min(samples - i * SHARD);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let mut scratch = (Vec::new(), Vec::new());
            let mut hits = 0;
            let mut rechecks = 0;
            for _ in 0..count {
                let x: f64 = rng.gen();
                let (member, re) = sample_member(x, &b_f, &shape, eps, b, v, q, &mut scratch);
                hits += member as u64;
                rechecks += re as u64;
            }
            (hits, rechecks)
        })
        .collect();
    let hits: u64 = per_shard.iter().map(|r| r.0).sum();
    let exact_rechecks = per_shard.iter().map(|r| r.1).sum();
    let nf = samples as f64;
    let p = hits as f64 / nf;
    let z = 1.959_963_984_540_054;
    let halfwidth = z * (p * (1.0 - p) / nf).sqrt();
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let spread = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    Ok(MeasureEstimate {
        q,
        samples,
        hits,
        measure_hat: p,
        halfwidth,
        wilson_low: (center - spread).max(0.0),
        wilson_high: (center + spread).min(1.0),
        exact_rechecks,
        seed,
    })
}

/// Least-squares slope of `ln y` against `ln x` over points with `y > 0`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{make_test_number, TestNumberKind};
    use crate::scalar::ratio;

    fn sqrt2() -> ExactScalar {
        make_test_number(&TestNumberKind::Sqrt2 { digits: 40 }).unwrap().value
    }

    #[test]
    fn origin_is_a_member() {
        assert!(is_member_exact(&[sqrt2()], &int(3), 8, &int(0)));
    }

    #[test]
    fn sampled_membership_agrees_with_exact() {
        let b = [sqrt2()];
        let v = int(3);
        let q = 6;
        let shape = Shape::new(2, q);
        let b_f = [scalar::to_f64(&b[0])];
        let eps = (q as f64).powi(-3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut scratch = (Vec::new(), Vec::new());
        let mut members = 0;
        for _ in 0..300 {
            let x: f64 = rng.gen();
            let (m, _) = sample_member(x, &b_f, &shape, eps, &b, &v, q, &mut scratch);
            let exact = is_member_exact(&b, &v, q, &BigRational::from_float(x).unwrap());
            assert_eq!(m, exact, "x = {x}");
            members += m as u32;
        }
        assert!(members > 0);
    }

    #[test]
    fn estimate_is_reproducible_and_decays() {
        let b = [sqrt2()];
        let a = measure_a_set(&b, &int(3), 16, 4000, 7).unwrap();
        let again = measure_a_set(&b, &int(3), 16, 4000, 7).unwrap();
        assert_eq!(a.hits, again.hits);
        let c = measure_a_set(&b, &int(3), 64, 4000, 7).unwrap();
        assert!(c.measure_hat < a.measure_hat);
        assert!(a.wilson_low <= a.measure_hat && a.measure_hat <= a.wilson_high);
    }

    #[test]
    fn three_dimensional_shell() {
        let b = [sqrt2(), ratio(1, 3)];
        let e = measure_a_set(&b, &int(4), 4, 500, 1).unwrap();
        assert!(e.measure_hat > 0.0);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [16.0, 64.0, 256.0].iter().map(|&q: &f64| (q, 3.0 * q.powf(-0.5))).collect();
        assert!((fit_loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
    }
}
