use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use extremal_core::criteria::{CKernel, SubspaceSpec};
use extremal_core::diophantine::{verify_witness, Mode};
use extremal_core::exterior::{c_vector, represent_subgroup, IndexSet, MultiVector};
use extremal_core::goodness::{relative_sublevel_measure, Ball, FunctionSpec, Poly};
use extremal_core::lattice::{determinant, shortest_vector_norm, LatticeBasis};
use extremal_core::report::{CriterionReport, Violation};
use extremal_core::scalar::{self, int, ratio, ExactScalar};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn exact(v: &[i64]) -> Vec<ExactScalar> {
    v.iter().map(|&x| int(x)).collect()
}

fn int_vec(k: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, k)
}

fn rational() -> impl Strategy<Value = ExactScalar> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_antisymmetric((u, v) in (2usize..=5).prop_flat_map(|k| (int_vec(k), int_vec(k)))) {
        let mu = MultiVector::from_int_vector(&big(&u)).unwrap();
        let mv = MultiVector::from_int_vector(&big(&v)).unwrap();
        prop_assert_eq!(mu.wedge(&mv).unwrap(), mv.wedge(&mu).unwrap().neg());
        prop_assert!(mu.wedge(&mu).unwrap().is_zero());
    }

    #[test]
    fn top_wedge_is_determinant(rows in prop::collection::vec(int_vec(4), 4)) {
        let mut w = MultiVector::from_int_vector(&big(&rows[0])).unwrap();
        for r in &rows[1..] {
            w = w.wedge(&MultiVector::from_int_vector(&big(r)).unwrap()).unwrap();
        }
        let top = IndexSet::new(&[0, 1, 2, 3], 3).unwrap();
        let m: Vec<Vec<ExactScalar>> = rows.iter().map(|r| exact(r)).collect();
        prop_assert_eq!(w.coefficient(&top), determinant(&m));
    }

    #[test]
    fn representation_invariant_under_unimodular_change(
        rows in prop::collection::vec(int_vec(4), 2),
        ops in prop::collection::vec((0usize..2, -3i64..=3, any::<bool>()), 1..6),
    ) {
        let basis: Vec<Vec<BigInt>> = rows.iter().map(|r| big(r)).collect();
        let Ok(rep) = represent_subgroup(&basis) else { return Ok(()); };
        let mut b = basis.clone();
        for (i, k, swap) in ops {
            let other = 1 - i;
            if swap {
                b.swap(0, 1);
            }
            let add: Vec<BigInt> = b[other].iter().map(|x| x * k).collect();
            for (x, y) in b[i].iter_mut().zip(add) {
                *x += y;
            }
        }
        let changed = represent_subgroup(&b).unwrap();
        prop_assert_eq!(rep.multivector(), changed.multivector());
    }

    #[test]
    fn c_vector_is_linear(
        r1 in prop::collection::vec(int_vec(4), 2),
        r2 in prop::collection::vec(int_vec(4), 2),
        a in rational(),
        b in rational(),
        set_mask in 0u32..8,
    ) {
        let wedge = |rows: &Vec<Vec<i64>>| {
            MultiVector::from_int_vector(&big(&rows[0]))
                .unwrap()
                .wedge(&MultiVector::from_int_vector(&big(&rows[1])).unwrap())
                .unwrap()
        };
        let (w1, w2) = (wedge(&r1), wedge(&r2));
        let set = IndexSet::from_mask(1 | (1 << (1 + set_mask % 3)), 3);
        let combo = w1.scale(&a).add(&w2.scale(&b)).unwrap();
        let lhs = c_vector(&set, &combo).unwrap();
        let c1 = c_vector(&set, &w1).unwrap();
        let c2 = c_vector(&set, &w2).unwrap();
        for ((l, x), y) in lhs.iter().zip(&c1).zip(&c2) {
            prop_assert_eq!(l.clone(), &a * x + &b * y);
        }
    }

    /// Rank one: the subgroup inequality for `w = (p, q)` is exactly
    /// `‖p + Aq‖ <= ‖(p', q)‖^{-v}`.
    #[test]
    fn rank_one_criterion_is_the_linear_form(
        a in prop::collection::vec(prop::collection::vec(rational(), 1), 3),
        w in int_vec(4),
        v_num in 7i64..=20,
    ) {
        prop_assume!(w[3] != 0);
        let spec = SubspaceSpec::new(3, 2, a.clone()).unwrap();
        let kernel = CKernel::new(&spec, 1).unwrap();
        let wb = big(&w);
        let (lhs, _) = kernel.lhs_big(&wb);
        let witness = verify_witness(&a, &wb[3..], &wb[..3], Mode::Standard).unwrap();
        prop_assert_eq!(&lhs, &witness.quality);
        let h = kernel.outer_max_big(&wb);
        let expected_h = wb[1..].iter().map(|x| x.abs()).max().unwrap();
        prop_assert_eq!(&h, &expected_h);
        let v = ratio(v_num, 2);
        let violated = kernel.violation_big(&wb, &v, &int(1)).is_some();
        let direct = h > BigInt::one()
            && (lhs.is_zero() || scalar::le_neg_power(&lhs, &ExactScalar::from_integer(h.clone()), &v));
        prop_assert_eq!(violated, direct);
    }

    #[test]
    fn shortest_vector_scales_linearly(rows in prop::collection::vec(int_vec(3), 3), c in rational()) {
        prop_assume!(!c.is_zero());
        let m: Vec<Vec<ExactScalar>> = rows.iter().map(|r| exact(r)).collect();
        prop_assume!(!determinant(&m).is_zero());
        let basis = LatticeBasis::new(m).unwrap();
        let d = shortest_vector_norm(&basis, 10_000).unwrap();
        let ds = shortest_vector_norm(&basis.scale(&c).unwrap(), 10_000).unwrap();
        prop_assert_eq!(ds, d * c.abs());
    }

    #[test]
    fn report_merge_is_associative(counts in prop::collection::vec((0u64..50, 0usize..3), 3)) {
        let mk = |(checked, nv): (u64, usize), tag: usize| {
            let mut r = CriterionReport::new("probe");
            r.checked = checked;
            for i in 0..nv {
                let mut coeffs = std::collections::BTreeMap::new();
                coeffs.insert(format!("w{tag}"), i.to_string());
                r.push(Violation::new(coeffs, None, &ratio(1, 8), &int(2), &int(3)));
            }
            r
        };
        let [a, b, c] = [mk(counts[0], 0), mk(counts[1], 1), mk(counts[2], 2)];
        let left = a.clone().merge(b.clone()).merge(c.clone());
        let right = a.merge(b.merge(c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn sublevel_ratio_invariant_under_scaling(
        coeffs in prop::collection::vec(-5i64..=5, 2..=4),
        lambda in rational(),
        eps_den in 2i64..=50,
    ) {
        prop_assume!(!lambda.is_zero() && coeffs.iter().skip(1).any(|&c| c != 0));
        let p = Poly::from_ints(&coeffs);
        let f = FunctionSpec::Polynomial(p.clone());
        let g = FunctionSpec::Polynomial(p.scale(&lambda));
        let ball = Ball::new(ratio(1, 3), ratio(5, 4)).unwrap();
        let eps = ratio(1, eps_den);
        let mf = relative_sublevel_measure(&f, &ball, &eps).unwrap();
        let mg = relative_sublevel_measure(&g, &ball, &eps).unwrap();
        prop_assert_eq!(mf.lower, mg.lower);
        prop_assert_eq!(mf.upper, mg.upper);
    }
}
