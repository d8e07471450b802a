use std::sync::Arc;

use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hopf_forge::abelian::{dual_add, FgAbelianGroup};
use hopf_forge::character::{burnside_character_table, real_type_report};
use hopf_forge::dual::{polar_decompose, probe_characters, DualElement, GrouplikeData, PrimitiveData, Verdict};
use hopf_forge::envelope::{associativity_residual, FdLieAlgebra, LieJson, TruncatedUElement, UAlgebra};
use hopf_forge::group::{builtin_group, conjugacy_classes, FiniteGroup};
use hopf_forge::hopf::{hopf_axiom_residuals, AlgebraElement, Field};
use hopf_forge::profinite::{induced_algebra_map, Tower};
use hopf_forge::scalar::{Scalar, C64};
use hopf_forge::selftest::SUITE_GROUPS;
use hopf_forge::wedderburn::central_idempotents;

type Q = BigRational;

fn suite_group(i: usize) -> Arc<FiniteGroup> {
    Arc::new(builtin_group(SUITE_GROUPS[i % SUITE_GROUPS.len()]).unwrap())
}

fn field(b: bool) -> Field {
    if b {
        Field::R
    } else {
        Field::C
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relabelled_groups_keep_their_structure(i in 0usize..21, seed in any::<u64>()) {
        let g = suite_group(i);
        let mut perm: Vec<usize> = (0..g.order()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = g.relabel(&perm).unwrap();
        let n = h.order();
        for a in 0..n {
            prop_assert_eq!(h.mul(a, h.inv(a)), h.identity());
            for b in 0..n {
                for c in 0..n {
                    prop_assert_eq!(h.mul(h.mul(a, b), c), h.mul(a, h.mul(b, c)));
                }
            }
        }
        let mut sizes_g = conjugacy_classes(&g).class_sizes;
        let mut sizes_h = conjugacy_classes(&h).class_sizes;
        sizes_g.sort_unstable();
        sizes_h.sort_unstable();
        prop_assert_eq!(sizes_g, sizes_h);
        if g.is_abelian() {
            prop_assert_eq!(conjugacy_classes(&g).len(), n);
        }
    }

    #[test]
    fn character_tables_are_orthogonal(i in 0usize..21, seed in any::<u64>()) {
        let g = suite_group(i);
        let t = burnside_character_table(&g, 1e-9, seed).unwrap();
        let part = t.partition();
        for c1 in 0..part.len() {
            for c2 in 0..part.len() {
                let s: C64 = (0..t.len())
                    .map(|e| t.value(e, part.classes[c1][0]) * t.value(e, part.classes[c2][0]).conj())
                    .sum();
                let expected = if c1 == c2 { g.order() as f64 / part.class_sizes[c1] as f64 } else { 0.0 };
                prop_assert!((s - C64::new(expected, 0.0)).norm() < 1e-9);
            }
        }
        prop_assert_eq!(real_type_report(&t).unwrap().total_real_dim(), g.order());
        // degree-one real characters have indicator +1
        for (e, entry) in real_type_report(&t).unwrap().entries.iter().enumerate() {
            let real = (0..g.order()).all(|x| t.value(e, x).im.abs() < 1e-9);
            if t.degrees()[e] == 1 && real {
                prop_assert_eq!(entry.fs_indicator, 1);
            }
        }
    }

    #[test]
    fn hopf_axioms(i in 0usize..21, real in any::<bool>(), seed in any::<u64>()) {
        let g = suite_group(i);
        let a = AlgebraElement::random(&g, field(real), &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(hopf_axiom_residuals(&a).max() < 1e-9);
    }

    #[test]
    fn decomposition_is_multiplicative(i in 0usize..21, real in any::<bool>(), seed in any::<u64>()) {
        let g = suite_group(i);
        let t = burnside_character_table(&g, 1e-9, seed).unwrap();
        let cert = central_idempotents(&t, field(real), 1e-9).unwrap();
        prop_assert!(cert.decomposition_multiplicativity(10, seed) < 1e-9);
        prop_assert_eq!(cert.block_dims().iter().sum::<usize>(), g.order());
    }

    #[test]
    fn exp_is_additive_on_commuting_pairs(i in 0usize..21, seed in any::<u64>()) {
        let g = suite_group(i);
        let t = burnside_character_table(&g, 1e-9, seed).unwrap();
        let cert = central_idempotents(&t, Field::C, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a and b in one commutative block: polynomials in a central idempotent times a central element
        let e = &cert.blocks[rng.gen_range(0..cert.blocks.len())].idempotent;
        let a = e.scale_real(rng.gen_range(-2.0..2.0));
        let center = cert.blocks.iter().fold(AlgebraElement::zero(&g, Field::C), |acc, b| {
            acc.add(&b.idempotent.scale_real(rng.gen_range(-1.0..1.0))).unwrap()
        });
        let b = center;
        prop_assert!(a.multiply(&b).unwrap().max_abs_diff(&b.multiply(&a).unwrap()) < 1e-9);
        let lhs = a.add(&b).unwrap().exp(1e-16);
        let rhs = a.exp(1e-16).multiply(&b.exp(1e-16)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9 * lhs.norm1().max(1.0));
    }

    #[test]
    fn dual_sigma_and_exp(seed in any::<u64>(), re in -1.0f64..1.0, im in -1.0f64..1.0, s in -1.0f64..1.0) {
        let dual = Arc::new(FgAbelianGroup::new(2, &[3]).unwrap());
        let probes = probe_characters(&dual, 100, 20, seed);
        let phi = DualElement::primitive(&dual, PrimitiveData::new(&dual, vec![C64::new(re, im), C64::new(s, 0.5)], &[C64::new(0.0, 0.0)]).unwrap()).unwrap();
        let psi = DualElement::grouplike(&dual, GrouplikeData::new(&dual, vec![C64::from_polar(1.3, im), C64::from_polar(0.7, re)], vec![2]).unwrap()).unwrap();
        let mixed = phi.add(&psi).unwrap();
        for chi in &probes {
            let twice = mixed.sigma().sigma();
            let (x, y) = (twice.evaluate(chi).unwrap(), mixed.evaluate(chi).unwrap());
            prop_assert!((x - y).norm() <= 1e-12 * y.norm().max(1.0));
            let a = phi.exp().sigma().evaluate(chi).unwrap();
            let b = phi.sigma().exp().evaluate(chi).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            let sum = phi.add(&phi.scale(C64::new(0.5, -0.25))).unwrap();
            let l = sum.exp().evaluate(chi).unwrap();
            let r = phi.exp().evaluate(chi).unwrap() * phi.scale(C64::new(0.5, -0.25)).exp().evaluate(chi).unwrap();
            prop_assert!((l - r).norm() <= 1e-10 * l.norm().max(1.0));
            // phi psi = psi phi pointwise
            let pq = phi.mul(&psi).unwrap().evaluate(chi).unwrap();
            let qp = psi.mul(&phi).unwrap().evaluate(chi).unwrap();
            prop_assert!((pq - qp).norm() <= 1e-12 * pq.norm().max(1.0));
        }
        // grouplikes form a group
        prop_assert_eq!(psi.mul(&psi).unwrap().is_grouplike(200, 1e-10, seed), Verdict::StructurallyYes);
        prop_assert_eq!(psi.grouplike_inverse().unwrap().is_grouplike(200, 1e-10, seed), Verdict::StructurallyYes);
        prop_assert_eq!(phi.add(&phi.scale(C64::new(2.0, 1.0))).unwrap().is_primitive(200, 1e-10, seed), Verdict::StructurallyYes);
        for c in [0.0, 2.0] {
            let v = DualElement::constant(&dual, C64::new(c, 0.0)).is_grouplike(200, 1e-10, seed);
            prop_assert!(!v.is_yes());
        }
    }

    #[test]
    fn polar_decomposition_is_unique(r1 in 0.1f64..10.0, r2 in 0.1f64..10.0, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, k in 0u64..3) {
        let dual = FgAbelianGroup::new(2, &[3]).unwrap();
        let g = GrouplikeData::new(&dual, vec![C64::from_polar(r1, t1), C64::from_polar(r2, t2)], vec![k]).unwrap();
        let p = polar_decompose(&g);
        let again = polar_decompose(&p.reconstruct());
        // unique up to rounding: a few ulps in each coordinate
        prop_assert_eq!(&again.group_part.torsion_indices, &p.group_part.torsion_indices);
        for (a, b) in again.group_part.free_values.iter().zip(&p.group_part.free_values) {
            prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON);
        }
        for (a, b) in again.lie_part.iter().zip(&p.lie_part) {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
        }
        prop_assert!(p.group_part.is_unitary());
        let chi = dual.element(vec![1, -2], vec![1]).unwrap();
        let sum = dual_add(&dual, &chi, &chi).unwrap();
        let v = g.evaluate(&dual, &sum);
        let w = g.evaluate(&dual, &chi) * g.evaluate(&dual, &chi);
        prop_assert!((v - w).norm() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn induced_maps_compose(p in 2usize..4, seed in any::<u64>()) {
        let tower = Tower::cyclic_prime_power(p, 3).unwrap();
        for real in [true, false] {
            let f0 = tower.induced(0, field(real)).unwrap();
            let f1 = tower.induced(1, field(real)).unwrap();
            let composed = f0.compose(&f1).unwrap();
            let direct_map: Vec<usize> = (0..tower.levels()[2].order()).map(|g| tower.maps()[0][tower.maps()[1][g]]).collect();
            let direct = induced_algebra_map(&tower.levels()[2], &tower.levels()[0], &direct_map, field(real)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for g in 0..tower.levels()[2].order() {
                let b = AlgebraElement::basis(&tower.levels()[2], field(real), g);
                let img = composed.apply(&b).unwrap();
                prop_assert_eq!(&img, &direct.apply(&b).unwrap());
                // basis to basis: grouplikes go to grouplikes
                prop_assert_eq!(img.coeffs().iter().filter(|c| **c == C64::new(1.0, 0.0)).count(), 1);
            }
            let a = AlgebraElement::random(&tower.levels()[2], field(real), &mut rng);
            prop_assert!(composed.apply(&a).unwrap().max_abs_diff(&f0.apply(&f1.apply(&a).unwrap()).unwrap()) < 1e-12);
        }
    }
}

fn heisenberg<S: Scalar>() -> FdLieAlgebra<S> {
    let json: LieJson =
        serde_json::from_str(r#"{"dim": 3, "field": "R", "brackets": [[0, 1, [0, 0, 1]]]}"#).unwrap();
    FdLieAlgebra::from_json(&json).unwrap()
}

#[test]
fn straightening_is_associative_in_rational_mode() {
    let cases: [(FdLieAlgebra<Q>, usize); 3] =
        [(FdLieAlgebra::sl2(Field::R), 2), (FdLieAlgebra::abelian(2, Field::R), 4), (heisenberg(), 2)];
    for (i, (lie, d)) in cases.into_iter().enumerate() {
        assert_eq!(associativity_residual(&Arc::new(lie), d, 100, i as u64).unwrap(), 0.0);
    }
}

#[test]
fn straightening_is_associative_in_float_mode() {
    let lie = Arc::new(FdLieAlgebra::<f64>::sl2(Field::R));
    assert!(associativity_residual(&lie, 2, 100, 4).unwrap() < 1e-10);
}

#[test]
fn truncating_after_each_product_loses_associativity() {
    // the dropped top-degree part of a product still feeds lower degrees of
    // the next product, which is why the residual above multiplies at 3D
    let u = UAlgebra::new(&Arc::new(FdLieAlgebra::<Q>::sl2(Field::R)), 2);
    let basis: Vec<TruncatedUElement<Q>> =
        u.basis().into_iter().map(|m| TruncatedUElement::monomial(2, m, Q::from_i64(1))).collect();
    let mut broken = 0;
    for a in &basis {
        for b in &basis {
            for c in &basis {
                let left = u.multiply(&u.multiply(a, b).unwrap(), c).unwrap();
                let right = u.multiply(a, &u.multiply(b, c).unwrap()).unwrap();
                broken += usize::from(left != right);
            }
        }
    }
    assert!(broken > 0);
}

#[test]
fn primitives_close_under_brackets_and_exp_inverts() {
    for lie in [FdLieAlgebra::<Q>::sl2(Field::R), heisenberg()] {
        let u = UAlgebra::new(&Arc::new(lie), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let a = u.random_lie_element(&mut rng);
            let b = u.random_lie_element(&mut rng);
            let c = u.commutator(&a, &b).unwrap();
            let one = TruncatedUElement::one(4);
            let expected = hopf_forge::envelope::TruncatedTensorU::outer(&c, &one)
                .add(&hopf_forge::envelope::TruncatedTensorU::outer(&one, &c));
            assert_eq!(u.comultiply(&c).unwrap(), expected);
            let g = u.exp(&a).unwrap();
            let inv = u.exp(&a.scale(&Q::from_i64(-1))).unwrap();
            assert_eq!(u.multiply(&g, &inv).unwrap(), one);
        }
    }
}
