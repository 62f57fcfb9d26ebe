//! Exact series arithmetic, genera at the point and the toy category of
//! tangent-structured morphisms.

use hermcone::derived::{structure_distance, torsor_add};
use hermcone::gen::{random_matrix, random_pd, rng};
use hermcone::genera::{
    additive_from_multiplicative, bernoulli, bott_chern_point, correction_factor_series, exp_x,
    multiplicative_from_additive, naive_exp, naive_log, naive_mul, psi_m_tilde_point, q, todd_oracle, todd_series,
    GenusSpec, PointInput, TruncSeries,
};
use hermcone::hermlin::HermComplex;
use hermcone::osm::{compose, solve_for_f, verify_associativity, ToyMorphism, ToySpace};
use num_rational::BigRational;

fn fact(n: usize) -> BigRational {
    (1..=n as i64).fold(q(1, 1), |acc, k| acc * q(k, 1))
}

#[test]
fn todd_matches_bernoulli_to_order_12() {
    let td = todd_series(12);
    let b = bernoulli(12);
    for (n, bn) in b.iter().enumerate() {
        let sign = if n % 2 == 0 { q(1, 1) } else { q(-1, 1) };
        assert_eq!(td.coeff(n), sign * bn.clone() / fact(n), "x^{n}");
    }
    assert_eq!(td, todd_oracle(12));
    assert_eq!(td.coeff(12), q(-691, 1_307_674_368_000));
}

#[test]
fn todd_times_its_inverse_series() {
    // Td · (1 − e^{−x})/x = 1
    let e = exp_x(13);
    let one_minus: Vec<BigRational> = (1..=13).map(|n| if n % 2 == 1 { e.coeff(n) } else { -e.coeff(n) }).collect();
    let g = TruncSeries::new(12, one_minus);
    assert_eq!(todd_series(12).mul(&g).unwrap(), TruncSeries::one(12));
}

#[test]
fn exp_log_round_trip_exact() {
    let f = TruncSeries::from_fractions(12, &[(0, 1), (3, 2), (-1, 5), (2, 7), (0, 1), (1, 11)]);
    let e = f.exp().unwrap();
    assert_eq!(e, naive_exp(&f));
    assert_eq!(e.log().unwrap(), f);
    let g = TruncSeries::from_fractions(12, &[(1, 1), (-2, 3), (5, 4), (1, 9)]);
    assert_eq!(g.log().unwrap(), naive_log(&g));
    assert_eq!(g.log().unwrap().exp().unwrap(), g);
}

#[test]
fn correction_factor_identity() {
    let lhs = correction_factor_series(12).mul(&TruncSeries::var(12)).unwrap();
    let rhs = exp_x(12).sub(&TruncSeries::one(12)).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn fast_and_naive_products_agree() {
    let a = TruncSeries::from_fractions(9, &[(1, 2), (3, 1), (-4, 7), (0, 1), (2, 3)]);
    let b = TruncSeries::from_fractions(9, &[(-1, 1), (1, 3), (1, 5), (1, 7), (1, 9), (1, 11)]);
    assert_eq!(a.mul(&b).unwrap(), naive_mul(&a, &b));
}

#[test]
fn log_todd_leading_terms() {
    let l = todd_series(6).log().unwrap();
    assert_eq!(l.coeff(0), q(0, 1));
    assert_eq!(l.coeff(1), q(1, 2));
    assert_eq!(l.coeff(2), q(-1, 24));
    assert_eq!(l.coeff(3), q(0, 1));
    assert_eq!(l.coeff(4), q(1, 2880));
}

#[test]
fn genus_conversions_and_point_values() {
    let td = GenusSpec::todd(10);
    let back = multiplicative_from_additive(&additive_from_multiplicative(&td).unwrap()).unwrap();
    assert_eq!(back.series, td.series);
    let ch = GenusSpec::chern_character(8).with_point_scale(2.0);
    let x = PointInput::Acyclic(HermComplex::ea(0.75));
    assert!((bott_chern_point(&ch, &x).unwrap() - 1.5).abs() < 1e-12);
    assert!((psi_m_tilde_point(&td, &x).unwrap() - 0.75).abs() < 1e-12);
    assert!(bott_chern_point(&td, &x).is_err());
}

fn space(r: &mut hermcone::gen::Rng, label: &str, n: usize) -> ToySpace {
    ToySpace::new(label, random_pd(r, n)).unwrap()
}

#[test]
fn toy_composition_associative_and_unital() {
    let mut r = rng(301);
    for _ in 0..8 {
        let (w, x, y, z) = (space(&mut r, "W", 2), space(&mut r, "X", 3), space(&mut r, "Y", 2), space(&mut r, "Z", 3));
        let f = ToyMorphism::ambient(w.clone(), x.clone(), random_matrix(&mut r, 3, 2)).unwrap();
        let g = ToyMorphism::ambient(x.clone(), y.clone(), random_matrix(&mut r, 2, 3)).unwrap();
        let h = ToyMorphism::ambient(y.clone(), z.clone(), random_matrix(&mut r, 3, 2)).unwrap();
        let g = g.with_structure(torsor_add(&g.t_struct, 0.4)).unwrap();
        assert!(verify_associativity(&f, &g, &h).unwrap() <= 1e-8);

        let left = compose(&ToyMorphism::identity(&x), &f).unwrap();
        assert!(structure_distance(&left.t_struct, &f.t_struct).unwrap().abs() <= 1e-8);
    }
}

#[test]
fn torsor_shift_passes_through_composition() {
    let mut r = rng(302);
    let (x, y, z) = (space(&mut r, "X", 3), space(&mut r, "Y", 2), space(&mut r, "Z", 2));
    let f = ToyMorphism::ambient(x.clone(), y.clone(), random_matrix(&mut r, 2, 3)).unwrap();
    let g = ToyMorphism::ambient(y, z, random_matrix(&mut r, 2, 2)).unwrap();
    let base = compose(&g, &f).unwrap();
    let moved = compose(&g, &f.with_structure(torsor_add(&f.t_struct, 1.25)).unwrap()).unwrap();
    assert!((structure_distance(&moved.t_struct, &base.t_struct).unwrap() - 1.25).abs() <= 1e-8);
}

#[test]
fn solve_for_f_recovers_structure() {
    let mut r = rng(303);
    for _ in 0..6 {
        let (x, y, z) = (space(&mut r, "X", 3), space(&mut r, "Y", 3), space(&mut r, "Z", 2));
        let f = ToyMorphism::ambient(x, y.clone(), random_matrix(&mut r, 3, 3)).unwrap();
        let f = f.with_structure(torsor_add(&f.t_struct, -0.3)).unwrap();
        let g = ToyMorphism::ambient(y, z, random_matrix(&mut r, 2, 3)).unwrap();
        let gf = compose(&g, &f).unwrap();
        let hf = solve_for_f(&g, &gf, &f.df).unwrap();
        assert!(structure_distance(&hf, &f.t_struct).unwrap().abs() <= 1e-8);
    }
}

#[test]
fn mismatched_chain_is_refused() {
    let mut r = rng(304);
    let (x, y) = (space(&mut r, "X", 2), space(&mut r, "Y", 2));
    let f = ToyMorphism::ambient(x.clone(), y, random_matrix(&mut r, 2, 2)).unwrap();
    let g = ToyMorphism::ambient(x.clone(), x, random_matrix(&mut r, 2, 2)).unwrap();
    assert!(compose(&f, &g).is_ok());
    assert!(matches!(compose(&g, &f), Err(hermcone::Error::Mismatch(_))));
}
