//! Enumeration of decomposable integer multivectors `w = v_1 ∧ … ∧ v_j`
//! representing rank-`j` subgroups of `Z^k`.

use std::collections::HashSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{represent_subgroup, IndexSet, MultiVector, SubgroupRep};
use crate::scalar::int;

/// Tuple budget above which a literal box enumeration is refused.
pub const DEFAULT_TUPLE_BUDGET: u128 = 20_000_000;

/// Wedge coefficient tables for grades `1..=j` in `Z^k`.
struct WedgeTables {
    /// Per grade `m` (index `m-1`): for each set of that grade, the terms
    /// `(index of S∖{i} in grade m-1, i, negate)`.
    expand: Vec<Vec<Vec<(usize, usize, bool)>>>,
    sizes: Vec<usize>,
}

impl WedgeTables {
    fn new(k: usize, j: usize) -> Self {
        let n = k - 1;
        let mut expand = Vec::with_capacity(j);
        let mut sizes = Vec::with_capacity(j);
        let mut prev_index: Vec<usize> = vec![usize::MAX; 1 << k];
        for m in 1..=j {
            let sets = IndexSet::all_of_size(n, m);
            let mut rows = Vec::with_capacity(sets.len());
            for set in &sets {
                let mask = set.mask();
                let terms = set
                    .members()
                    .map(|i| {
                        let rest = mask & !(1 << i);
                        let above = (mask >> (i + 1)).count_ones();
                        let idx = if m == 1 { 0 } else { prev_index[rest as usize] };
                        (idx, i, above % 2 == 1)
                    })
                    .collect();
                rows.push(terms);
            }
            prev_index = vec![usize::MAX; 1 << k];
            for (idx, set) in sets.iter().enumerate() {
                prev_index[set.mask() as usize] = idx;
            }
            sizes.push(sets.len());
            expand.push(rows);
        }
        Self { expand, sizes }
    }

    /// `prev ∧ v`, where `prev` has grade `m - 1` (ignored for `m = 1`).
    fn extend(&self, m: usize, prev: &[i64], v: &[i64], out: &mut Vec<i64>) {
        out.clear();
        for terms in &self.expand[m - 1] {
            let mut acc = 0i64;
            for &(idx, i, neg) in terms {
                let base = if m == 1 { 1 } else { prev[idx] };
                let t = base * v[i];
                acc += if neg { -t } else { t };
            }
            out.push(acc);
        }
    }
}

/// Flips `w` so that its first nonzero coefficient is positive; false for
/// the zero vector.
fn canonicalize(w: &mut [i64]) -> bool {
    match w.iter().find(|&&c| c != 0) {
        None => false,
        Some(&c) => {
            if c < 0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            true
        }
    }
}

/// Deduplication keyed by packed coefficients when they fit in 128 bits.
enum Seen {
    Packed {
        set: HashSet<u128>,
        bits: u32,
        offset: i64,
    },
    Wide(HashSet<Vec<i64>>),
}

impl Seen {
    fn new(len: usize, max_abs: i64) -> Self {
        let bits = 64 - (2 * max_abs as u64 + 1).leading_zeros();
        if (bits as usize) * len <= 128 {
            Seen::Packed {
                set: HashSet::new(),
                bits,
                offset: max_abs,
            }
        } else {
            Seen::Wide(HashSet::new())
        }
    }

    fn insert(&mut self, w: &[i64]) -> bool {
        match self {
            Seen::Packed { set, bits, offset } => {
                let key = w
                    .iter()
                    .fold(0u128, |acc, &c| (acc << *bits) | (c + *offset) as u128);
                set.insert(key)
            }
            Seen::Wide(set) => set.insert(w.to_vec()),
        }
    }
}

/// A deduplicated collection of integer grade-`j` multivectors in `Λ^j Z^k`.
#[derive(Clone, Debug)]
pub struct RepEnumeration {
    k: usize,
    j: usize,
    sets: Vec<IndexSet>,
    coeffs: Vec<i64>,
    bases: Option<Vec<i8>>,
    pub description: String,
    pub tuples_examined: u64,
}

impl RepEnumeration {
    fn empty(k: usize, j: usize, with_bases: bool, description: String) -> Self {
        Self {
            k,
            j,
            sets: IndexSet::all_of_size(k - 1, j),
            coeffs: Vec::new(),
            bases: with_bases.then(Vec::new),
            description,
            tuples_examined: 0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.k
    }

    pub fn grade(&self) -> usize {
        self.j
    }

    /// Grade-`j` index sets in lexicographic order; the coefficient layout.
    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() / self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self, i: usize) -> &[i64] {
        let m = self.sets.len();
        &self.coeffs[i * m..(i + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.coeffs.chunks(self.sets.len())
    }

    /// A generating basis, when the source recorded one.
    pub fn basis(&self, i: usize) -> Option<Vec<Vec<BigInt>>> {
        let b = self.bases.as_ref()?;
        let len = self.j * self.k;
        Some(
            b[i * len..(i + 1) * len]
                .chunks(self.k)
                .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn multivector(&self, i: usize) -> MultiVector {
        let terms = self
            .sets
            .iter()
            .zip(self.coeffs(i))
            .filter(|(_, &c)| c != 0)
            .map(|(s, &c)| (*s, int(c)));
        MultiVector::from_coeffs(self.k - 1, self.j, terms).expect("consistent layout")
    }

    pub fn subgroup_rep(&self, i: usize) -> Option<Result<SubgroupRep>> {
        self.basis(i).map(|b| represent_subgroup(&b))
    }

    fn push(&mut self, w: &[i64], basis: Option<&[&[i64]]>) {
        self.coeffs.extend_from_slice(w);
        if let (Some(store), Some(b)) = (self.bases.as_mut(), basis) {
            for v in b {
                store.extend(v.iter().map(|&x| x as i8));
            }
        }
    }
}

fn check_shape(k: usize, j: usize) -> Result<()> {
    if k < 2 || k > 16 {
        return Err(Error::InvalidParameter(format!(
            "ambient dimension {k} outside 2..=16"
        )));
    }
    if j == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    if j >= k {
        return Err(Error::FullRankSubgroup { rank: j, ambient: k });
    }
    Ok(())
}

/// Nonzero vectors of `[-b, b]^k` whose first nonzero entry is positive.
pub fn box_vectors(k: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-bound; k];
    loop {
        if let Some(&f) = cur.iter().find(|&&x| x != 0) {
            if f > 0 {
                out.push(cur.clone());
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bound {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = -bound;
                }
                break;
            }
        }
    }
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of `j`-tuples a literal box enumeration examines.
pub fn box_tuple_count(k: usize, j: usize, bound: i64) -> u128 {
    let v = ((2 * bound as u128 + 1).saturating_pow(k as u32) - 1) / 2;
    binomial(v, j as u128)
}

fn hadamard_bound(k: usize, j: usize, bound: i64) -> i64 {
    // |minor| <= Π ‖row‖_2 <= (b √j)^j
    let b = bound as f64 * (j as f64).sqrt();
    let h = b.powi(j as i32).ceil() + 1.0;
    let _ = k;
    h.min(i64::MAX as f64 / 4.0) as i64
}

/// All distinct wedges of `j` linearly independent box vectors, with the
/// first generating basis found for each.
pub fn enumerate_reps(k: usize, j: usize, bound: i64) -> Result<RepEnumeration> {
    enumerate_reps_with_budget(k, j, bound, DEFAULT_TUPLE_BUDGET)
}

pub fn enumerate_reps_with_budget(
    k: usize,
    j: usize,
    bound: i64,
    budget: u128,
) -> Result<RepEnumeration> {
    check_shape(k, j)?;
    if !(1..=127).contains(&bound) {
        return Err(Error::InvalidParameter("coefficient bound must be in 1..=127".into()));
    }
    let count = box_tuple_count(k, j, bound);
    if count > budget {
        return Err(Error::EnumerationTooLarge(format!(
            "{count} {j}-tuples from [-{bound},{bound}]^{k} exceed the budget {budget}"
        )));
    }
    let vectors = box_vectors(k, bound);
    let tables = WedgeTables::new(k, j);
    let mut out = RepEnumeration::empty(
        k,
        j,
        true,
        format!("all rank-{j} wedges of vectors in [-{bound},{bound}]^{k}"),
    );
    let mut seen = Seen::new(tables.sizes[j - 1], hadamard_bound(k, j, bound));
    let mut stack: Vec<Vec<i64>> = vec![Vec::new(); j + 1];
    let mut chosen: Vec<usize> = Vec::with_capacity(j);
    descend(&tables, &vectors, j, 0, &mut stack, &mut chosen, &mut seen, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    tables: &WedgeTables,
    vectors: &[Vec<i64>],
    j: usize,
    start: usize,
    stack: &mut Vec<Vec<i64>>,
    chosen: &mut Vec<usize>,
    seen: &mut Seen,
    out: &mut RepEnumeration,
) {
    let m = chosen.len() + 1;
    for idx in start..vectors.len() {
        let (lower, upper) = stack.split_at_mut(m);
        tables.extend(m, &lower[m - 1], &vectors[idx], &mut upper[0]);
        if upper[0].iter().all(|&c| c == 0) {
            if m == j {
                out.tuples_examined += 1;
            }
            continue;
        }
        chosen.push(idx);
        if m == j {
            out.tuples_examined += 1;
            let mut w = stack[m].clone();
            canonicalize(&mut w);
            if seen.insert(&w) {
                let basis: Vec<&[i64]> = chosen.iter().map(|&c| vectors[c].as_slice()).collect();
                out.push(&w, Some(&basis));
            }
        } else {
            descend(tables, vectors, j, idx + 1, stack, chosen, seen, out);
        }
        chosen.pop();
    }
}

/// Every nonzero `w ∈ Λ^{k-1} Z^k` with `‖w‖ <= m`, up to sign. In corank
/// one every integer multivector is decomposable, so these are exactly the
/// representatives with coefficients in `[-m, m]`.
pub fn corank_one_reps(k: usize, m: i64) -> Result<RepEnumeration> {
    check_shape(k, k - 1)?;
    let mut out = RepEnumeration::empty(
        k,
        k - 1,
        false,
        format!("all w in Λ^{} Z^{k} with ‖w‖ <= {m}", k - 1),
    );
    for w in box_vectors(k, m) {
        out.tuples_examined += 1;
        out.push(&w, None);
    }
    Ok(out)
}

/// Wedges of `count` uniformly random `j`-tuples from `[-b, b]^k`.
pub fn random_reps(k: usize, j: usize, bound: i64, count: usize, seed: u64) -> Result<RepEnumeration> {
    check_shape(k, j)?;
    if !(1..=127).contains(&bound) {
        return Err(Error::InvalidParameter("coefficient bound must be in 1..=127".into()));
    }
    let tables = WedgeTables::new(k, j);
    let mut out = RepEnumeration::empty(
        k,
        j,
        true,
        format!("{count} random rank-{j} bases from [-{bound},{bound}]^{k}, seed {seed}"),
    );
    let mut seen = Seen::new(tables.sizes[j - 1], hadamard_bound(k, j, bound));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut partial = Vec::new();
    let mut next = Vec::new();
    for _ in 0..count {
        out.tuples_examined += 1;
        let basis: Vec<Vec<i64>> = (0..j)
            .map(|_| (0..k).map(|_| rng.gen_range(-bound..=bound)).collect())
            .collect();
        partial.clear();
        for (m, v) in basis.iter().enumerate() {
            tables.extend(m + 1, &partial, v, &mut next);
            std::mem::swap(&mut partial, &mut next);
        }
        if !canonicalize(&mut partial) {
            continue;
        }
        if seen.insert(&partial) {
            let refs: Vec<&[i64]> = basis.iter().map(|v| v.as_slice()).collect();
            out.push(&partial, Some(&refs));
        }
    }
    Ok(out)
}

/// How representatives are gathered when the literal box is too large.
#[derive(Clone, Debug)]
pub struct EnumerationPlan {
    pub budget: u128,
    /// Coefficient bound for the corank-one substitute.
    pub corank_bound: i64,
    /// Random bases drawn from the full box when it is refused.
    pub random_bases: usize,
    pub seed: u64,
}

impl Default for EnumerationPlan {
    fn default() -> Self {
        Self {
            budget: DEFAULT_TUPLE_BUDGET,
            corank_bound: 6,
            random_bases: 100_000,
            seed: 0,
        }
    }
}

/// Representatives of rank `j` in `Z^k` from bases with entries in
/// `[-bound, bound]`: the literal box when it fits the budget, otherwise the
/// union of (a) every `w` with small coefficients in corank one, (b) the
/// largest literal box that fits, and (c) random bases from the full box.
pub fn rep_sources(k: usize, j: usize, bound: i64, plan: &EnumerationPlan) -> Result<Vec<RepEnumeration>> {
    check_shape(k, j)?;
    if box_tuple_count(k, j, bound) <= plan.budget {
        return Ok(vec![enumerate_reps_with_budget(k, j, bound, plan.budget)?]);
    }
    let mut out = Vec::new();
    if j + 1 == k {
        out.push(corank_one_reps(k, plan.corank_bound.max(bound))?);
    }
    if let Some(b) = (1..bound).rev().find(|&b| box_tuple_count(k, j, b) <= plan.budget) {
        out.push(enumerate_reps_with_budget(k, j, b, plan.budget)?);
    }
    if plan.random_bases > 0 {
        out.push(random_reps(k, j, bound, plan.random_bases, plan.seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Row-style Hermite normal form of an integer matrix; nonzero rows only.
    fn hnf(mut rows: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
        let cols = rows[0].len();
        let mut r = 0;
        for c in 0..cols {
            // Euclid on column c among rows r..
            loop {
                let piv = (r..rows.len())
                    .filter(|&i| rows[i][c] != 0)
                    .min_by_key(|&i| rows[i][c].abs());
                let Some(p) = piv else { break };
                rows.swap(r, p);
                let mut done = true;
                for i in r + 1..rows.len() {
                    if rows[i][c] != 0 {
                        let q = rows[i][c] / rows[r][c];
                        for cc in 0..cols {
                            rows[i][cc] -= q * rows[r][cc];
                        }
                        if rows[i][c] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if r < rows.len() && rows[r][c] != 0 {
                if rows[r][c] < 0 {
                    rows[r].iter_mut().for_each(|x| *x = -*x);
                }
                for i in 0..r {
                    let q = rows[i][c].div_euclid(rows[r][c]);
                    for cc in 0..cols {
                        rows[i][cc] -= q * rows[r][cc];
                    }
                }
                r += 1;
            }
        }
        rows.truncate(r);
        rows
    }

    #[test]
    fn rank_one_in_plane() {
        let e = enumerate_reps(2, 1, 1).unwrap();
        let got: Vec<Vec<i64>> = e.iter().map(|w| w.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn full_rank_rejected() {
        assert!(matches!(enumerate_reps(3, 3, 1), Err(Error::FullRankSubgroup { .. })));
    }

    #[test]
    fn plane_count_matches_row_space_oracle() {
        let e = enumerate_reps(3, 2, 1).unwrap();
        let vs = box_vectors(3, 1);
        let mut spaces = HashSet::new();
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                let h = hnf(vec![vs[a].clone(), vs[b].clone()]);
                if h.len() == 2 {
                    spaces.insert(h);
                }
            }
        }
        assert_eq!(e.len(), spaces.len());
    }

    #[test]
    fn wedges_match_exterior_module() {
        let e = enumerate_reps(4, 2, 1).unwrap();
        for i in (0..e.len()).step_by(7) {
            let rep = e.subgroup_rep(i).unwrap().unwrap();
            assert_eq!(rep.multivector(), &e.multivector(i));
        }
        let r = random_reps(5, 3, 4, 200, 9).unwrap();
        for i in 0..r.len() {
            let rep = r.subgroup_rep(i).unwrap().unwrap();
            assert_eq!(rep.multivector(), &r.multivector(i));
        }
    }

    #[test]
    fn corank_one_covers_small_box() {
        let lit = enumerate_reps(3, 2, 2).unwrap();
        let all: HashSet<Vec<i64>> = lit.iter().map(|w| w.to_vec()).collect();
        let small = corank_one_reps(3, 2).unwrap();
        for w in small.iter() {
            assert!(all.contains(w), "{w:?}");
        }
    }

    #[test]
    fn budget_refusal_and_substitute() {
        assert!(matches!(
            enumerate_reps_with_budget(5, 4, 5, 1000),
            Err(Error::EnumerationTooLarge(_))
        ));
        let plan = EnumerationPlan {
            budget: 100_000,
            corank_bound: 2,
            random_bases: 500,
            seed: 1,
        };
        let src = rep_sources(4, 3, 5, &plan).unwrap();
        assert_eq!(src.len(), 3);
        assert!(src.iter().all(|s| !s.is_empty()));
    }
}
