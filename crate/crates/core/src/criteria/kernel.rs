//! Evaluation of `max_{0∈I}‖c⁺_{I,w} + Ac⁻_{I,w}‖` on integer multivectors,
//! with a machine-integer fast path, and the exhaustive lower-bound suites.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::reps::{rep_sources, EnumerationPlan, RepEnumeration};
use super::{exceeds_cut, le_power, violation_record, SubspaceSpec};
use crate::error::{Error, Result};
use crate::exterior::{shuffle_count, IndexSet};
use crate::report::Violation;
use crate::scalar::{self, ExactScalar};

#[derive(Clone, Debug)]
enum Numerators {
    Small(Vec<Vec<i64>>, i64),
    Big(Vec<Vec<BigInt>>, BigInt),
}

/// One `I ∋ 0`: its position and the nonzero coordinates of `c_{I,w}` as
/// `(coordinate, position of the contributing set, negate)`.
#[derive(Clone, Debug)]
struct ZeroSet {
    set: IndexSet,
    terms: Vec<(usize, usize, bool)>,
}

/// Precomputed `c`-vector layout for rank `j` and the matrix `A = N/D`.
#[derive(Clone, Debug)]
pub struct CKernel {
    n: usize,
    s: usize,
    sets: Vec<IndexSet>,
    zero_sets: Vec<ZeroSet>,
    outer: Vec<usize>,
    a: Numerators,
}

impl CKernel {
    pub fn new(spec: &SubspaceSpec, j: usize) -> Result<Self> {
        let (n, s) = (spec.n(), spec.s());
        if j == 0 || j > n {
            return Err(Error::InvalidParameter(format!("rank j={j} outside 1..={n}")));
        }
        let sets = IndexSet::all_of_size(n, j);
        let mut position = vec![usize::MAX; 1 << (n + 1)];
        for (i, set) in sets.iter().enumerate() {
            position[set.mask() as usize] = i;
        }
        let mut zero_sets = Vec::new();
        let mut outer = Vec::new();
        for (idx, set) in sets.iter().enumerate() {
            if !set.contains(0) {
                outer.push(idx);
                continue;
            }
            let base = set.without(0);
            let mut terms = vec![(0, idx, false)];
            for i in 1..=n {
                if set.contains(i) {
                    continue;
                }
                let p = position[base.with(i).mask() as usize];
                terms.push((i, p, shuffle_count(set, i) % 2 == 1));
            }
            zero_sets.push(ZeroSet { set: *set, terms });
        }
        let den = spec
            .matrix()
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let num: Vec<Vec<BigInt>> = spec
            .matrix()
            .iter()
            .map(|r| r.iter().map(|x| x.numer() * (&den / x.denom())).collect())
            .collect();
        let small = den.to_i64().filter(|d| *d < 1 << 40).and_then(|d| {
            let rows: Option<Vec<Vec<i64>>> = num
                .iter()
                .map(|r| r.iter().map(|x| x.to_i64().filter(|v| v.abs() < 1 << 40)).collect())
                .collect();
            rows.map(|r| (r, d))
        });
        let a = match small {
            Some((r, d)) => Numerators::Small(r, d),
            None => Numerators::Big(num, den),
        };
        Ok(Self {
            n,
            s,
            sets,
            zero_sets,
            outer,
            a,
        })
    }

    /// Grade-`j` sets in the coefficient layout used by every method.
    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn den(&self) -> BigInt {
        match &self.a {
            Numerators::Small(_, d) => BigInt::from(*d),
            Numerators::Big(_, d) => d.clone(),
        }
    }

    /// `max_{0∉I}|w_I|`.
    pub fn outer_max_small(&self, w: &[i64]) -> i64 {
        self.outer.iter().map(|&i| w[i].abs()).max().unwrap_or(0)
    }

    pub fn outer_max_big(&self, w: &[BigInt]) -> BigInt {
        self.outer
            .iter()
            .map(|&i| w[i].abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn fill_c_small(&self, z: &ZeroSet, w: &[i64], c: &mut [i128]) {
        c.iter_mut().for_each(|x| *x = 0);
        for &(coord, idx, neg) in &z.terms {
            let v = w[idx] as i128;
            c[coord] = if neg { -v } else { v };
        }
    }

    /// Numerator of `max_{0∈I}‖c⁺ + Ac⁻‖` over the common denominator `D`,
    /// with the maximizing `I`; `None` when `A` needs big integers.
    pub fn lhs_small(&self, w: &[i64]) -> Option<(i128, IndexSet)> {
        let Numerators::Small(num, den) = &self.a else {
            return None;
        };
        let d = *den as i128;
        let mut c = vec![0i128; self.n + 1];
        let mut best: Option<(i128, IndexSet)> = None;
        for z in &self.zero_sets {
            self.fill_c_small(z, w, &mut c);
            let mut m = 0i128;
            for (k, row) in num.iter().enumerate() {
                let mut acc = d * c[k];
                for (l, &a) in row.iter().enumerate() {
                    acc += a as i128 * c[self.s + 1 + l];
                }
                m = m.max(acc.abs());
            }
            if best.as_ref().map_or(true, |b| m > b.0) {
                best = Some((m, z.set));
            }
        }
        best
    }

    /// `‖c⁺_{I,w} + Ac⁻_{I,w}‖` for each `I ∋ 0`, exactly.
    pub fn lhs_per_set(&self, w: &[BigInt]) -> Vec<(IndexSet, ExactScalar)> {
        let (num, den): (Vec<Vec<BigInt>>, BigInt) = match &self.a {
            Numerators::Small(r, d) => (
                r.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect(),
                BigInt::from(*d),
            ),
            Numerators::Big(r, d) => (r.clone(), d.clone()),
        };
        self.zero_sets
            .iter()
            .map(|z| {
                let mut c = vec![BigInt::zero(); self.n + 1];
                for &(coord, idx, neg) in &z.terms {
                    c[coord] = if neg { -&w[idx] } else { w[idx].clone() };
                }
                let m = num
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        let acc = row
                            .iter()
                            .enumerate()
                            .fold(&den * &c[k], |acc, (l, a)| acc + a * &c[self.s + 1 + l]);
                        acc.abs()
                    })
                    .max()
                    .unwrap_or_else(BigInt::zero);
                (z.set, ExactScalar::new(m, den.clone()))
            })
            .collect()
    }

    /// `max_{0∈I}‖c⁺ + Ac⁻‖` and a maximizing `I`.
    pub fn lhs_big(&self, w: &[BigInt]) -> (ExactScalar, IndexSet) {
        self.lhs_per_set(w)
            .into_iter()
            .fold(None::<(ExactScalar, IndexSet)>, |best, (set, v)| match best {
                Some((b, s)) if b >= v => Some((b, s)),
                _ => Some((v, set)),
            })
            .map(|(v, s)| (v, s))
            .expect("at least one I contains 0")
    }

    /// Whether `max_{0∈I}‖c⁺ + Ac⁻‖ >= 1`.
    pub fn lower_bound_holds(&self, w: &[i64]) -> bool {
        match self.lhs_small(w) {
            Some((m, _)) => {
                let Numerators::Small(_, d) = &self.a else { unreachable!() };
                m >= *d as i128
            }
            None => {
                let wb: Vec<BigInt> = w.iter().map(|&x| BigInt::from(x)).collect();
                self.lhs_big(&wb).0 >= ExactScalar::one()
            }
        }
    }

    /// The rank-`j` violation `lhs <= h^{-v}` for `h > N`, if any.
    pub fn violation_small(&self, w: &[i64], v: &ExactScalar, n_cut: &ExactScalar) -> Option<Violation> {
        let h = self.outer_max_small(w);
        if h == 0 || !exceeds_cut(&BigInt::from(h), n_cut) {
            return None;
        }
        if let Some((m, _)) = self.lhs_small(w) {
            let Numerators::Small(_, d) = &self.a else { unreachable!() };
            // lhs >= 1 > h^{-v} whenever h >= 2 and v > 0
            if m >= *d as i128 && h >= 2 && v.is_positive() {
                return None;
            }
        }
        let wb: Vec<BigInt> = w.iter().map(|&x| BigInt::from(x)).collect();
        self.violation_big(&wb, v, n_cut)
    }

    pub fn violation_big(&self, w: &[BigInt], v: &ExactScalar, n_cut: &ExactScalar) -> Option<Violation> {
        let h = self.outer_max_big(w);
        if h.is_zero() || !exceeds_cut(&h, n_cut) {
            return None;
        }
        let (lhs, set) = self.lhs_big(w);
        le_power(&lhs, &h, v).then(|| violation_record(&self.sets, w, &set, &lhs, &h, v))
    }
}

/// Scale knobs for the exhaustive lower-bound suites.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub matrices: usize,
    pub coeff_bound: i64,
    pub plan: EnumerationPlan,
    pub seed: u64,
    /// Random entries are `p/q` with `|p| <= num_range`, `1 <= q <= den_max`.
    pub num_range: i64,
    pub den_max: i64,
}

impl SuiteConfig {
    pub fn new(matrices: usize, coeff_bound: i64, seed: u64) -> Self {
        Self {
            matrices,
            coeff_bound,
            plan: EnumerationPlan {
                seed,
                ..EnumerationPlan::default()
            },
            seed,
            num_range: 30,
            den_max: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub n: usize,
    pub s: usize,
    pub j: usize,
    pub matrices: usize,
    pub reps: u64,
    pub evaluations: u64,
    pub violations: u64,
    pub search_space: String,
    /// A failing `(A, w)` pair, rendered, when one exists.
    pub first_violation: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.evaluations > 0
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Vec<Vec<ExactScalar>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let p = rng.gen_range(-cfg.num_range..=cfg.num_range);
                    let q = rng.gen_range(1..=cfg.den_max);
                    scalar::ratio(p, q)
                })
                .collect()
        })
        .collect()
}

fn lower_bound_suite(
    suite: &str,
    n: usize,
    s: usize,
    j: usize,
    matrices: Vec<Vec<Vec<ExactScalar>>>,
    sources: &[RepEnumeration],
) -> Result<SuiteOutcome> {
    let kernels: Vec<CKernel> = matrices
        .iter()
        .map(|a| CKernel::new(&SubspaceSpec::new(n, s, a.clone())?, j))
        .collect::<Result<_>>()?;
    let reps: u64 = sources.iter().map(|s| s.len() as u64).sum();
    let results: Vec<(u64, u64, Option<String>)> = kernels
        .par_iter()
        .zip(matrices.par_iter())
        .map(|(k, a)| {
            let mut evals = 0u64;
            let mut bad = 0u64;
            let mut first = None;
            for src in sources {
                for w in src.iter() {
                    evals += 1;
                    if !k.lower_bound_holds(w) {
                        bad += 1;
                        if first.is_none() {
                            first = Some(format!(
                                "A = {:?}, w = {:?}",
                                a.iter()
                                    .map(|r| r.iter().map(scalar::fmt_exact).collect::<Vec<_>>())
                                    .collect::<Vec<_>>(),
                                w
                            ));
                        }
                    }
                }
            }
            (evals, bad, first)
        })
        .collect();
    Ok(SuiteOutcome {
        suite: suite.to_string(),
        n,
        s,
        j,
        matrices: matrices.len(),
        reps,
        evaluations: results.iter().map(|r| r.0).sum(),
        violations: results.iter().map(|r| r.1).sum(),
        search_space: sources
            .iter()
            .map(|s| format!("{} ({} reps)", s.description, s.len()))
            .collect::<Vec<_>>()
            .join("; "),
        first_violation: results.into_iter().find_map(|r| r.2),
    })
}

/// Corank-one lower bound: `max_{0∈I}‖c⁺ + Ac⁻‖ >= 1` for every rank-`n`
/// representative and every `A` of shape `(s+1)×(n-s)`.
pub fn corank_one_suite(n: usize, s: usize, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    if s == 0 || s >= n {
        return Err(Error::InvalidParameter("need 0 < s < n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1000 * n as u64 + s as u64));
    let mats = (0..cfg.matrices)
        .map(|_| random_matrix(s + 1, n - s, &mut rng, cfg))
        .collect();
    let sources = rep_sources(n + 1, n, cfg.coeff_bound, &cfg.plan)?;
    lower_bound_suite("corank-one", n, s, n, mats, &sources)
}

/// Column-vector lower bound: for `A` a single column (`s = n-1`) and any
/// rank `j >= 2`, `max_{0∈I}‖c⁺ + Ac⁻‖ >= 1`.
pub fn column_vector_suite(n: usize, j: usize, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    if j < 2 || j > n {
        return Err(Error::InvalidParameter("need 2 <= j <= n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2000 * n as u64 + j as u64));
    let mats = (0..cfg.matrices)
        .map(|_| random_matrix(n, 1, &mut rng, cfg))
        .collect();
    let sources = rep_sources(n + 1, j, cfg.coeff_bound, &cfg.plan)?;
    lower_bound_suite("column-vector", n, n - 1, j, mats, &sources)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{c_vector, split_c, MultiVector};
    use crate::scalar::{int, ratio};

    fn oracle_lhs(spec: &SubspaceSpec, w: &MultiVector) -> ExactScalar {
        // Direct evaluation through the exterior-algebra module.
        let mut best = ExactScalar::zero();
        for set in IndexSet::all_of_size(spec.n(), w.grade()) {
            if !set.contains(0) {
                continue;
            }
            let c = c_vector(&set, w).unwrap();
            let (plus, minus) = split_c(&c, spec.s()).unwrap();
            for (k, row) in spec.matrix().iter().enumerate() {
                let v = row
                    .iter()
                    .zip(&minus)
                    .fold(plus[k].clone(), |acc, (a, m)| acc + a * m);
                best = best.max(v.abs());
            }
        }
        best
    }

    #[test]
    fn fast_path_matches_exterior_oracle() {
        let spec = SubspaceSpec::new(
            4,
            2,
            vec![
                vec![ratio(3, 4), ratio(-1, 6)],
                vec![ratio(5, 2), int(0)],
                vec![ratio(-7, 3), ratio(2, 9)],
            ],
        )
        .unwrap();
        for j in 1..=4 {
            let k = CKernel::new(&spec, j).unwrap();
            let src = super::super::reps::random_reps(5, j, 3, 300, j as u64).unwrap();
            for i in 0..src.len() {
                let w = src.coeffs(i);
                let (m, _) = k.lhs_small(w).unwrap();
                let lhs = ExactScalar::new(BigInt::from(m), k.den());
                assert_eq!(lhs, oracle_lhs(&spec, &src.multivector(i)));
                let wb: Vec<BigInt> = w.iter().map(|&x| BigInt::from(x)).collect();
                assert_eq!(k.lhs_big(&wb).0, lhs);
            }
        }
    }

    #[test]
    fn corank_one_c_vectors_have_two_entries() {
        // c_{J_i,w} = w_i e_0 + (-1)^{i-1} w_0 e_i for w = Σ w_i e_{J_i}.
        let n = 3;
        let spec = SubspaceSpec::new(n, 1, vec![vec![int(0); 2]; 2]).unwrap();
        let k = CKernel::new(&spec, n).unwrap();
        let w = [5i64, -2, 7, 3];
        // layout position of J_i
        let pos = |i: usize| {
            k.sets()
                .iter()
                .position(|s| *s == IndexSet::all_but(i, n))
                .unwrap()
        };
        let mut dense = vec![0i64; 4];
        for (i, &c) in w.iter().enumerate() {
            dense[pos(i)] = c;
        }
        let mv = MultiVector::from_coeffs(
            n,
            n,
            (0..=n).map(|i| (IndexSet::all_but(i, n), int(w[i]))),
        )
        .unwrap();
        for i in 1..=n {
            let c = c_vector(&IndexSet::all_but(i, n), &mv).unwrap();
            let sign = if (i - 1) % 2 == 0 { 1 } else { -1 };
            let mut expect = vec![int(0); n + 1];
            expect[0] = int(w[i]);
            expect[i] = int(sign * w[0]);
            assert_eq!(c, expect);
        }
        assert!(k.lower_bound_holds(&dense));
    }

    #[test]
    fn small_suites_pass() {
        let mut cfg = SuiteConfig::new(5, 2, 3);
        cfg.plan.random_bases = 300;
        for (n, s) in [(2, 1), (3, 1), (3, 2)] {
            let o = corank_one_suite(n, s, &cfg).unwrap();
            assert!(o.passed(), "{o:?}");
        }
        for (n, j) in [(2, 2), (3, 2), (3, 3)] {
            let o = column_vector_suite(n, j, &cfg).unwrap();
            assert!(o.passed(), "{o:?}");
        }
    }

    #[test]
    fn rank_one_is_not_covered_by_the_bound() {
        // With j = 1 the bound fails: w = (p, q) close to the subspace.
        let spec = SubspaceSpec::hyperplane(&[ratio(1, 3), ratio(1, 2)]).unwrap();
        let k = CKernel::new(&spec, 1).unwrap();
        assert!(!k.lower_bound_holds(&[-2, -3, 6]));
    }
}
