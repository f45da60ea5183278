//! Exterior algebra over `R^{n+1}` with exact rational coefficients.
//!
//! Basis blades `e_I` are indexed by subsets `I ⊂ {0,…,n}` and stored as bit
//! masks. A rank-`j` subgroup of `Z^{n+1}` is represented by the wedge of a
//! basis, normalized so that its first nonzero coefficient (in lexicographic
//! order of index sets) is positive.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, ExactScalar};

/// Largest supported `n` (ambient space `R^{n+1}`).
pub const MAX_AMBIENT_N: usize = 15;

/// A subset of `{0,…,n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct IndexSet {
    mask: u32,
    ambient_n: u8,
}

impl IndexSet {
    pub fn new(members: &[usize], ambient_n: usize) -> Result<Self> {
        let invalid = || Error::InvalidIndexSet {
            members: members.to_vec(),
            ambient_n,
        };
        if ambient_n > MAX_AMBIENT_N {
            return Err(invalid());
        }
        let mut mask = 0u32;
        for &m in members {
            if m > ambient_n || mask & (1 << m) != 0 {
                return Err(invalid());
            }
            mask |= 1 << m;
        }
        Ok(Self {
            mask,
            ambient_n: ambient_n as u8,
        })
    }

    pub fn from_mask(mask: u32, ambient_n: usize) -> Self {
        debug_assert!(ambient_n <= MAX_AMBIENT_N && mask >> (ambient_n + 1) == 0);
        Self {
            mask,
            ambient_n: ambient_n as u8,
        }
    }

    pub fn empty(ambient_n: usize) -> Self {
        Self::from_mask(0, ambient_n)
    }

    /// `J_i = {0,…,n} ∖ {i}`.
    pub fn all_but(i: usize, ambient_n: usize) -> Self {
        let full = (1u32 << (ambient_n + 1)) - 1;
        Self::from_mask(full & !(1 << i), ambient_n)
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n as usize
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 32 && self.mask & (1 << i) != 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.ambient_n as usize).filter(move |&i| self.contains(i))
    }

    pub fn with(&self, i: usize) -> Self {
        Self::from_mask(self.mask | (1 << i), self.ambient_n())
    }

    pub fn without(&self, i: usize) -> Self {
        Self::from_mask(self.mask & !(1 << i), self.ambient_n())
    }

    /// All subsets of size `j`, in lexicographic order.
    pub fn all_of_size(ambient_n: usize, j: usize) -> Vec<Self> {
        let k = ambient_n + 1;
        let mut out: Vec<Self> = (0u32..(1 << k))
            .filter(|m| m.count_ones() as usize == j)
            .map(|m| Self::from_mask(m, ambient_n))
            .collect();
        out.sort();
        out
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members()
            .cmp(other.members())
            .then(self.ambient_n.cmp(&other.ambient_n))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

/// `l(I,i)`: the number of elements of `I` strictly between `0` and `i`.
pub fn shuffle_count(set: &IndexSet, i: usize) -> usize {
    if i <= 1 {
        return 0;
    }
    let below = if i >= 32 { u32::MAX } else { (1u32 << i) - 1 };
    (set.mask & below & !1).count_ones() as usize
}

/// Sign of `e_I ∧ e_J` relative to `e_{I∪J}` for disjoint `I`, `J`.
fn merge_sign(a: u32, b: u32) -> bool {
    // Count pairs (i in a, j in b) with i > j.
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (j + 1)).count_ones();
    }
    inversions % 2 == 1
}

/// A homogeneous element of `Λ^grade(R^{n+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiVector {
    ambient_n: usize,
    grade: usize,
    coeffs: BTreeMap<IndexSet, ExactScalar>,
}

impl MultiVector {
    pub fn zero(ambient_n: usize, grade: usize) -> Self {
        Self {
            ambient_n,
            grade,
            coeffs: BTreeMap::new(),
        }
    }

    /// The basis blade `e_I`.
    pub fn blade(set: IndexSet) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(set, ExactScalar::one());
        Self {
            ambient_n: set.ambient_n(),
            grade: set.len(),
            coeffs,
        }
    }

    pub fn basis_vector(i: usize, ambient_n: usize) -> Result<Self> {
        Ok(Self::blade(IndexSet::new(&[i], ambient_n)?))
    }

    /// A grade-1 element from its `n+1` coordinates.
    pub fn from_vector(coords: &[ExactScalar]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_AMBIENT_N + 1 {
            return Err(Error::InvalidParameter(format!(
                "vector length {} outside 1..={}",
                coords.len(),
                MAX_AMBIENT_N + 1
            )));
        }
        let n = coords.len() - 1;
        let coeffs = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (IndexSet::from_mask(1 << i, n), c.clone()))
            .collect();
        Ok(Self {
            ambient_n: n,
            grade: 1,
            coeffs,
        })
    }

    pub fn from_int_vector(coords: &[BigInt]) -> Result<Self> {
        let v: Vec<ExactScalar> = coords
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        Self::from_vector(&v)
    }

    /// Builds from explicit coefficients; every key must have size `grade`.
    pub fn from_coeffs(
        ambient_n: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (IndexSet, ExactScalar)>,
    ) -> Result<Self> {
        let mut mv = Self::zero(ambient_n, grade);
        for (set, c) in terms {
            if set.ambient_n() != ambient_n {
                return Err(Error::DimensionMismatch {
                    left: ambient_n,
                    right: set.ambient_n(),
                });
            }
            if set.len() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: set.len(),
                });
            }
            mv.add_term(set, c);
        }
        Ok(mv)
    }

    fn add_term(&mut self, set: IndexSet, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(set).or_insert_with(ExactScalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&set);
        }
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `w_I`; zero for absent keys.
    pub fn coefficient(&self, set: &IndexSet) -> ExactScalar {
        self.coeffs.get(set).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &ExactScalar)> {
        self.coeffs.iter()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    pub fn scale(&self, a: &ExactScalar) -> Self {
        let mut out = Self::zero(self.ambient_n, self.grade);
        for (s, c) in &self.coeffs {
            out.add_term(*s, c * a);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        if self.grade != other.grade && !self.is_zero() && !other.is_zero() {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        let grade = if self.is_zero() { other.grade } else { self.grade };
        let mut out = Self {
            ambient_n: self.ambient_n,
            grade,
            coeffs: self.coeffs.clone(),
        };
        for (s, c) in &other.coeffs {
            out.add_term(*s, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-ExactScalar::one())
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.ambient_n != other.ambient_n {
            return Err(Error::DimensionMismatch {
                left: self.ambient_n,
                right: other.ambient_n,
            });
        }
        Ok(())
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = Self::zero(self.ambient_n, self.grade + other.grade);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if a.mask & b.mask != 0 {
                    continue;
                }
                let set = IndexSet::from_mask(a.mask | b.mask, self.ambient_n);
                let prod = ca * cb;
                out.add_term(set, if merge_sign(a.mask, b.mask) { -prod } else { prod });
            }
        }
        Ok(out)
    }

    /// `‖w‖ = max_I |w_I|`.
    pub fn sup_norm(&self) -> ExactScalar {
        scalar::sup_abs(self.coeffs.values())
    }

    /// Flips the sign so the first nonzero coefficient is positive; returns
    /// whether a flip happened.
    pub fn canonicalize_sign(&mut self) -> bool {
        let flip = self
            .coeffs
            .values()
            .next()
            .map(|c| c.is_negative())
            .unwrap_or(false);
        if flip {
            for c in self.coeffs.values_mut() {
                *c = -c.clone();
            }
        }
        flip
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w = ")?;
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, (s, c)) in self.coeffs.iter().enumerate() {
            let mag = scalar::fmt_exact(&c.abs());
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{mag}*e{s}")?;
        }
        Ok(())
    }
}

/// Integer multivector representing a rank-`j` subgroup of `Z^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupRep {
    multivector: MultiVector,
    rank: usize,
    source_basis: Option<Vec<Vec<BigInt>>>,
}

impl SubgroupRep {
    pub fn multivector(&self) -> &MultiVector {
        &self.multivector
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_n(&self) -> usize {
        self.multivector.ambient_n
    }

    pub fn source_basis(&self) -> Option<&[Vec<BigInt>]> {
        self.source_basis.as_deref()
    }

    /// `‖Γ‖`.
    pub fn norm(&self) -> ExactScalar {
        self.multivector.sup_norm()
    }

    /// Integer coefficient `w_I`.
    pub fn int_coefficient(&self, set: &IndexSet) -> BigInt {
        self.multivector.coefficient(set).to_integer()
    }
}

/// Wedge of a basis of a rank-`j` subgroup, `1 <= j <= n`, sign-normalized.
pub fn represent_subgroup(basis: &[Vec<BigInt>]) -> Result<SubgroupRep> {
    let first = basis.first().ok_or(Error::EmptyBasis)?;
    let k = first.len();
    if k == 0 {
        return Err(Error::EmptyBasis);
    }
    for v in basis {
        if v.len() != k {
            return Err(Error::DimensionMismatch {
                left: k,
                right: v.len(),
            });
        }
    }
    let j = basis.len();
    if j >= k {
        if j == k {
            return Err(Error::FullRankSubgroup { rank: j, ambient: k });
        }
        return Err(Error::LinearlyDependent);
    }
    let mut w = MultiVector::from_int_vector(&basis[0])?;
    for v in &basis[1..] {
        w = w.wedge(&MultiVector::from_int_vector(v)?)?;
    }
    if w.is_zero() {
        return Err(Error::LinearlyDependent);
    }
    let mut source: Vec<Vec<BigInt>> = basis.to_vec();
    if w.canonicalize_sign() {
        for c in source[0].iter_mut() {
            *c = -c.clone();
        }
    }
    Ok(SubgroupRep {
        multivector: w,
        rank: j,
        source_basis: Some(source),
    })
}

/// `c_{I,w}`: coordinate 0 is `w_I`, coordinate `i ∉ I` is
/// `(-1)^{l(I,i)} w_{I∪{i}∖{0}}`, coordinates in `I∖{0}` vanish.
pub fn c_vector(set: &IndexSet, w: &MultiVector) -> Result<Vec<ExactScalar>> {
    if !set.contains(0) {
        return Err(Error::MissingZeroIndex);
    }
    if set.ambient_n() != w.ambient_n {
        return Err(Error::DimensionMismatch {
            left: set.ambient_n(),
            right: w.ambient_n,
        });
    }
    if set.len() != w.grade && !w.is_zero() {
        return Err(Error::GradeMismatch {
            expected: w.grade,
            found: set.len(),
        });
    }
    let n = w.ambient_n;
    let mut c = vec![ExactScalar::zero(); n + 1];
    c[0] = w.coefficient(set);
    let base = set.without(0);
    for (i, slot) in c.iter_mut().enumerate().skip(1) {
        if set.contains(i) {
            continue;
        }
        let v = w.coefficient(&base.with(i));
        *slot = if shuffle_count(set, i) % 2 == 1 { -v } else { v };
    }
    Ok(c)
}

/// Splits `c` into its first `s+1` and last `n-s` coordinates.
pub fn split_c<T: Clone>(c: &[T], s: usize) -> Result<(Vec<T>, Vec<T>)> {
    if s >= c.len() {
        return Err(Error::InvalidParameter(format!(
            "split index {s} outside 0..{}",
            c.len()
        )));
    }
    Ok((c[..=s].to_vec(), c[s + 1..].to_vec()))
}
