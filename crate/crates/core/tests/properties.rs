use proptest::prelude::*;

use arakelov_eis::analytic::{whittaker_factor, EisParams};
use arakelov_eis::arithmetic::{
    beta_element, degree, diff_set, lifting_length_ord, orbital_product, rho, stacky_point_mass, twisted_ideal,
};
use arakelov_eis::numberfield::rational::{pow_big, val_rat};
use arakelov_eis::numberfield::{hensel_sqrt, BigRat, CmInstance, FIdeal, FPlace, QuadElem, RelSplit};
use arakelov_eis::verify::{brute_rho, integral_ideals_up_to};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

const INSTANCES: [(i64, i64); 5] = [(2, -3), (3, -7), (5, -3), (2, -11), (6, -7)];

fn instance(i: usize) -> CmInstance {
    let (d, delta) = INSTANCES[i % INSTANCES.len()];
    CmInstance::new(d, delta, &[]).unwrap()
}

fn elem() -> impl Strategy<Value = (i64, i64, i64)> {
    (-300i64..300, -300i64..300, 1i64..60).prop_filter("nonzero", |(u, v, _)| *u != 0 || *v != 0)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ord_is_additive(i in 0usize..5, a in elem(), b in elem()) {
        let inst = instance(i);
        let (a, b) = (inst.elem(a.0, a.1, a.2), inst.elem(b.0, b.1, b.2));
        let ab = &a * &b;
        for p in inst.field.support_primes(&ab).unwrap() {
            for q in inst.splitting_in_f(p) {
                prop_assert_eq!(
                    inst.ord_at(&ab, &q).unwrap(),
                    inst.ord_at(&a, &q).unwrap() + inst.ord_at(&b, &q).unwrap()
                );
            }
        }
    }

    #[test]
    fn ord_matches_norm(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        let a = inst.elem(a.0, a.1, a.2);
        for p in inst.field.support_primes(&a).unwrap() {
            let total: i64 = inst
                .splitting_in_f(p)
                .iter()
                .map(|q| q.f as i64 * inst.ord_at(&a, q).unwrap())
                .sum();
            prop_assert_eq!(total, val_rat(&a.norm(), p));
        }
        prop_assert_eq!(inst.principal_ideal(&a).unwrap().norm(), num_traits::Signed::abs(&a.norm()));
    }

    #[test]
    fn hensel_lifts_square_roots(pi in 0usize..6, x in 1u64..10_000, k in 1u32..12) {
        let p = [3u64, 5, 7, 11, 101, 65_537][pi];
        prop_assume!(x % p != 0);
        let n = BigInt::from(x) * BigInt::from(x);
        let s = hensel_sqrt(&n, p, k).unwrap();
        let m = pow_big(p, k);
        prop_assert!((&s * &s - &n).mod_floor(&m).is_zero());
    }

    #[test]
    fn hilbert_symbol_is_bimultiplicative_and_symmetric(i in 0usize..5, a in elem(), b in elem(), c in elem()) {
        let inst = instance(i);
        let (a, b, c) = (inst.elem(a.0, a.1, a.2), inst.elem(b.0, b.1, b.2), inst.elem(c.0, c.1, c.2));
        for q in inst.ramified_primes() {
            let h = |x: &QuadElem, y: &QuadElem| inst.field.tame_hilbert(x, y, q).unwrap();
            prop_assert_eq!(h(&a, &(&b * &c)), h(&a, &b) * h(&a, &c));
            prop_assert_eq!(h(&a, &b), h(&b, &a));
        }
    }

    #[test]
    fn character_product_formula(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        prop_assert_eq!(inst.chi_product_check(&inst.elem(a.0, a.1, a.2)).unwrap(), 1);
    }

    #[test]
    fn diff_is_odd_and_nonsplit(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        let d = diff_set(&inst, &inst.elem(a.0, a.1, a.2)).unwrap();
        prop_assert_eq!(d.len() % 2, 1);
        for q in d.finite_part() {
            prop_assert_ne!(inst.splitting_in_k(q), RelSplit::Split);
        }
    }

    #[test]
    fn orbital_product_is_rho_of_ratio(i in 0usize..5, a in elem(), b in elem()) {
        let inst = instance(i);
        let (a, b) = (inst.elem(a.0, a.1, a.2), inst.elem(b.0, b.1, b.2));
        let ratio = inst.principal_ideal(&a).unwrap().div(&inst.principal_ideal(&b).unwrap());
        prop_assert_eq!(orbital_product(&inst, &a, &b).unwrap(), rho(&inst, &ratio));
    }

    #[test]
    fn rho_matches_enumeration_on_products(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        let b = inst.principal_ideal(&inst.elem(a.0, a.1, 1)).unwrap();
        prop_assume!(b.norm() < BigRat::from_integer(BigInt::from(10_000_000)));
        prop_assert_eq!(brute_rho(&inst, &b).unwrap(), rho(&inst, &b));
    }

    #[test]
    fn rho_is_multiplicative(i in 0usize..5, a in elem(), b in elem()) {
        let inst = instance(i);
        let ia = inst.principal_ideal(&inst.elem(a.0, a.1, 1)).unwrap();
        let ib = inst.principal_ideal(&inst.elem(b.0, b.1, 1)).unwrap();
        let coprime = ia.support().all(|q| ib.exponent(q) == 0);
        prop_assume!(coprime);
        prop_assert_eq!(rho(&inst, &ia.mul(&ib)), rho(&inst, &ia) * rho(&inst, &ib));
    }

    #[test]
    fn degree_has_one_kind_of_contribution(i in 0usize..5, a in elem(), y1 in 0.2f64..3.0, y2 in 0.2f64..3.0) {
        let inst = instance(i);
        let res = degree(&inst, &inst.elem(a.0, a.1, a.2), (y1, y2)).unwrap();
        prop_assert!(res.terms.is_empty() || res.arch_value == 0.0);
        let sum: f64 = res.terms.iter().map(|t| t.value).sum::<f64>() + res.arch_value;
        prop_assert_eq!(res.total, sum);
    }

    #[test]
    fn mass_times_length_is_the_prefactor(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        let a = inst.elem(a.0, a.1, a.2);
        let res = degree(&inst, &a, (1.0, 1.0)).unwrap();
        for t in &res.terms {
            let mass = stacky_point_mass(&inst, &a, &t.q).unwrap();
            let length = lifting_length_ord(&inst, &a, &t.q).unwrap();
            prop_assert_eq!(&mass, &t.mass);
            prop_assert_eq!(&length, &t.length);
            let two = BigRat::from_integer(BigInt::from(2));
            let deg = BigRat::from_integer(BigInt::from(inst.deg_k));
            prop_assert_eq!(&mass * &two * &length / deg, t.prefactor.clone());
        }
    }

    #[test]
    fn vanishing_matches_character(i in 0usize..5, a in elem()) {
        let inst = instance(i);
        let a = inst.elem(a.0, a.1, a.2);
        let params = EisParams::derivative((1.0, 1.0)).unwrap();
        let twisted = twisted_ideal(&inst, &a).unwrap();
        let ac = &a * &inst.c_fin;
        let mut places: Vec<FPlace> = inst.character_support(&ac).unwrap().into_iter().map(FPlace::Finite).collect();
        places.extend([FPlace::Arch(1), FPlace::Arch(2)]);
        for v in places {
            let w = whittaker_factor(&inst, &a, &v, &params).unwrap();
            let chi = match v {
                FPlace::Arch(_) => inst.chi_local(&a, &v).unwrap(),
                FPlace::Finite(_) => inst.chi_local(&ac, &v).unwrap(),
            };
            prop_assert_eq!(w.chi, chi);
            if chi == -1 {
                prop_assert_eq!(w.value_at0, 0.0);
            }
            let checkable = match v {
                FPlace::Finite(q) => twisted.exponent(&q) >= 0,
                // e^{-2π α_v y_v} underflows for large positive α_v
                FPlace::Arch(w) => a.embed(w) < 100.0,
            };
            if checkable {
                prop_assert_eq!(w.value_at0 == 0.0, chi == -1, "place {}", v);
            }
        }
    }
}

#[test]
fn rho_matches_enumeration_up_to_norm_300_everywhere() {
    for i in 0..INSTANCES.len() {
        let inst = instance(i);
        for b in integral_ideals_up_to(&inst, 300) {
            assert_eq!(brute_rho(&inst, &b).unwrap(), rho(&inst, &b), "instance {i}, ideal {b}");
        }
    }
}

/// With a single finite ramified prime, the totally positive generator of
/// `a ∂^{-1} q^{ε_q}` turns every `α` with `Diff(α, c) = {q}` into a
/// global norm everywhere.
#[test]
fn beta_generator_realizes_the_norm_condition() {
    let inst = CmInstance::new(2, -3, &[]).unwrap();
    assert_eq!(inst.ramified_primes().len(), 1);
    let mut checked = 0;
    for alpha in arakelov_eis::verify::alpha_box(2, 6) {
        let diff = diff_set(&inst, &alpha).unwrap();
        let Some(FPlace::Finite(q)) = diff.single() else { continue };
        let beta = beta_element(&inst, &q).unwrap();
        let ab = &alpha * &beta;
        let mut places: Vec<FPlace> = inst.character_support(&ab).unwrap().into_iter().map(FPlace::Finite).collect();
        places.extend([FPlace::Arch(1), FPlace::Arch(2)]);
        for v in places {
            assert_eq!(inst.chi_local(&ab, &v).unwrap(), 1, "alpha={alpha} q={q} v={v}");
        }
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn fifty_random_orbital_pairs() {
    use rand::{Rng, SeedableRng};
    let inst = CmInstance::new(2, -3, &[(7, 1, 1)]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let mut draw = || loop {
            let (u, v, w) = (rng.gen_range(-99..100), rng.gen_range(-99..100), rng.gen_range(1..30));
            if u != 0 || v != 0 {
                return inst.elem(u, v, w);
            }
        };
        let (a, b) = (draw(), draw());
        let ratio: FIdeal = inst.principal_ideal(&(&a / &b)).unwrap();
        assert_eq!(orbital_product(&inst, &a, &b).unwrap(), rho(&inst, &ratio));
    }
}

#[test]
fn zero_is_rejected() {
    let inst = CmInstance::new(2, -3, &[]).unwrap();
    let zero = QuadElem::new(2, BigRat::zero(), BigRat::zero());
    assert!(diff_set(&inst, &zero).is_err());
    assert!(orbital_product(&inst, &zero, &QuadElem::one(2)).is_err());
}
