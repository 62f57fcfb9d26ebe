//! Determinant norm and the acyclic calculus through the public API, checked
//! against closed forms and an independent Laplacian formula.

use hermcone::acyccalc::{ka_class, universal_factorization, Verdict};
use hermcone::gen::{random_acyclic, random_meager, random_square, rng};
use hermcone::hermlin::{cone, cone_of_squares, direct_sum, shift, tensor, ChainMap, HermComplex};
use hermcone::linalg::{log_abs_det, zeros};
use hermcone::torsion::{is_meager, reduce_to_generators, tau};
use hermcone::verify::{run_suite, RunOptions, Suite};
use proptest::prelude::*;

/// `−½ Σ (−1)^i i log det Δ_i`, Laplacians built from the gram adjoint.
fn laplacian_oracle(cx: &HermComplex) -> f64 {
    let mut t = 0.0;
    for i in cx.degrees() {
        let g = cx.gram(i);
        let n = g.nrows();
        if n == 0 {
            continue;
        }
        let gi = g.clone().try_inverse().unwrap();
        let d = cx.diff(i);
        let up = &gi * d.adjoint() * cx.gram(i + 1) * &d;
        let down = if cx.dim(i - 1) > 0 {
            let dm = cx.diff(i - 1);
            &dm * cx.gram(i - 1).try_inverse().unwrap() * dm.adjoint() * &g
        } else {
            zeros(n, n)
        };
        let s = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        t += -0.5 * s * i as f64 * log_abs_det(&(up + down));
    }
    t
}

#[test]
fn generator_anchor() {
    for a in [-2.0, -0.5, 0.0, 1.0, 3.5, 7.25] {
        let e = HermComplex::ea(a);
        assert!((tau(&e).unwrap() - a).abs() <= 1e-12);
        assert!((laplacian_oracle(&e) - a).abs() <= 1e-12);
    }
}

#[test]
fn tau_agrees_with_laplacian_oracle() {
    let mut r = rng(101);
    for _ in 0..60 {
        let (cx, t) = random_acyclic(&mut r, 5, 5);
        let got = tau(&cx).unwrap();
        assert!((got - t).abs() < 1e-8, "{got} vs constructed {t}");
        assert!((got - laplacian_oracle(&cx)).abs() < 1e-8);
    }
}

#[test]
fn generators_sum_to_tau() {
    let mut r = rng(102);
    for _ in 0..60 {
        let (cx, t) = random_acyclic(&mut r, 5, 5);
        let dec = reduce_to_generators(&cx).unwrap();
        assert!((dec.total() - t).abs() < 1e-8);
    }
}

#[test]
fn shift_flips_sign() {
    let mut r = rng(103);
    for _ in 0..20 {
        let (cx, t) = random_acyclic(&mut r, 4, 4);
        assert!((tau(&shift(&cx, 1)).unwrap() + t).abs() < 1e-9);
        assert!((tau(&shift(&cx, -2)).unwrap() - t).abs() < 1e-9);
    }
}

#[test]
fn non_acyclic_is_refused() {
    let p = HermComplex::single(0, hermcone::linalg::eye(2));
    assert!(matches!(tau(&p), Err(hermcone::Error::NotAcyclic { .. })));
    assert!(ka_class(&p).is_err());
}

#[test]
fn meager_family_has_zero_tau() {
    let mut r = rng(104);
    for _ in 0..80 {
        let (m, recipe) = random_meager(&mut r, 3, 3);
        let t = tau(&m).unwrap_or_else(|e| panic!("{recipe}: {e}"));
        assert!(t.abs() <= 1e-8, "{recipe}: {t}");
        assert!(is_meager(&m), "{recipe}");
    }
}

#[test]
fn identity_cone_and_tensor_vanish() {
    let e = HermComplex::ea(1.7);
    assert!(tau(&cone(&ChainMap::identity(&e))).unwrap().abs() < 1e-12);
    // e^a ⊗ e^b is acyclic with χ(e^b)=0 copies of e^a
    let t = tensor(&e, &HermComplex::ea(-0.6));
    assert!(tau(&t).unwrap().abs() < 1e-10);
}

#[test]
fn cone_of_squares_permutation() {
    let mut r = rng(105);
    for k in 0..40 {
        let sq = random_square(&mut r, k % 3 == 0, 4);
        let cs = cone_of_squares(&sq.f1, &sq.f, &sq.g1, &sq.g, &sq.h).unwrap();
        assert!(cs.residual <= 1e-10, "case {k}: {:e}", cs.residual);
    }
}

#[test]
fn factorization_harness() {
    let tau_f = |c: &HermComplex| tau(c).unwrap_or(f64::NAN);
    let two_tau = |c: &HermComplex| 2.0 * tau(c).unwrap_or(f64::NAN);
    let rank = |c: &HermComplex| c.total_dim() as f64;
    assert_eq!(universal_factorization(&tau_f, 3, 40, 1e-9).verdict, Verdict::Factorizes);
    assert_eq!(universal_factorization(&two_tau, 3, 40, 1e-9).verdict, Verdict::Factorizes);
    assert!(matches!(universal_factorization(&rank, 3, 40, 1e-9).verdict, Verdict::NormalizationFails { .. }));
}

#[test]
fn calculus_suite_small_run() {
    let rep = run_suite(Suite::AcyclicCalculus, 9, 12, &RunOptions::default());
    let bad: Vec<_> = rep.failures().map(|r| (&r.rule, r.case, r.residual)).collect();
    assert!(bad.is_empty(), "{bad:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law(a in -4.0f64..4.0, b in -4.0f64..4.0, k in -2i32..=2) {
        let s = direct_sum(&HermComplex::ea(a), &shift(&HermComplex::ea(b), 2 * k));
        prop_assert!((tau(&s).unwrap() - (a + b)).abs() < 1e-10);
        let d = direct_sum(&HermComplex::ea(a), &shift(&HermComplex::ea(b), 2 * k + 1));
        prop_assert!((tau(&d).unwrap() - (a - b)).abs() < 1e-10);
    }
}
