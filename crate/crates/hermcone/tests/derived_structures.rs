//! Hermitian structures, cones and triangle classes at the point.

use hermcone::derived::{
    class_of_iso, class_of_triangle, herm_cone, parallel_transport, structure_distance, torsor_add, HermStructure,
    HermTriangle, Roof,
};
use hermcone::gen::{random_complex, random_quasi_iso, random_structure, rng};
use hermcone::hermlin::{ChainMap, HermComplex};
use hermcone::linalg::{c, eye};
use hermcone::verify::{run_suite, RunOptions, Suite};

#[test]
fn torsor_distance_is_exact_shift() {
    let mut r = rng(201);
    for k in 0..15 {
        let x = random_complex(&mut r, 3, 3);
        let h = random_structure(&mut r, &x);
        let a = -1.5 + 0.37 * k as f64;
        let d = structure_distance(&torsor_add(&h, a), &h).unwrap();
        assert!((d - a).abs() <= 1e-10, "{d} vs {a}");
        assert!(structure_distance(&h, &h).unwrap().abs() <= 1e-10);
    }
}

#[test]
fn distance_is_antisymmetric_and_additive() {
    let mut r = rng(202);
    let x = random_complex(&mut r, 3, 3);
    let (h1, h2, h3) = (random_structure(&mut r, &x), random_structure(&mut r, &x), random_structure(&mut r, &x));
    let d12 = structure_distance(&h1, &h2).unwrap();
    let d23 = structure_distance(&h2, &h3).unwrap();
    let d13 = structure_distance(&h1, &h3).unwrap();
    assert!((d12 + structure_distance(&h2, &h1).unwrap()).abs() < 1e-10);
    assert!((d12 + d23 - d13).abs() < 1e-10);
}

#[test]
fn scaling_iso_class() {
    // r·Id on a unit line: the cone is e^{log r} one degree down
    let p = HermComplex::single(0, eye(1));
    let id = Roof::identity(&p);
    assert!(class_of_iso(&id).unwrap().abs() < 1e-12);
    let s = ChainMap::from_fn(&p, &p, |_| eye(1) * c(3.0, 0.0)).unwrap();
    let v = class_of_iso(&Roof::from_map(s)).unwrap();
    assert!((v + 3f64.ln()).abs() < 1e-12);
}

#[test]
fn transport_along_composite() {
    let mut r = rng(203);
    for _ in 0..10 {
        let x = random_complex(&mut r, 3, 3);
        let h = random_structure(&mut r, &x);
        let f = random_quasi_iso(&mut r, &x);
        let g = random_quasi_iso(&mut r, f.target());
        let (rf, rg) = (Roof::from_map(f.clone()), Roof::from_map(g.clone()));
        let gf = Roof::from_map(g.compose(&f).unwrap());
        let step = parallel_transport(&rg, &parallel_transport(&rf, &h).unwrap()).unwrap();
        let direct = parallel_transport(&gf, &h).unwrap();
        assert!(structure_distance(&step, &direct).unwrap().abs() <= 1e-9);
    }
}

#[test]
fn identity_cone_is_meager() {
    let mut r = rng(204);
    for _ in 0..10 {
        let x = random_complex(&mut r, 3, 3);
        let h = random_structure(&mut r, &x);
        let hc = herm_cone(&h, &h, &Roof::identity(&x)).unwrap();
        assert!(hc.structure.ka_coordinate().unwrap().abs() < 1e-8);
    }
}

#[test]
fn split_triangle_has_zero_class() {
    let mut r = rng(205);
    for _ in 0..10 {
        let a = random_complex(&mut r, 2, 3);
        let cc = random_complex(&mut r, 2, 3);
        let (ha, hc) = (random_structure(&mut r, &a), random_structure(&mut r, &cc));
        let hb = ha.direct_sum(&hc);
        let t = HermTriangle::split(ha, hc, hb).unwrap();
        assert!(t.check_distinguished().unwrap() < 1e-8);
        assert!(class_of_triangle(&t).unwrap().abs() < 1e-8);
    }
}

#[test]
fn torsor_shift_changes_triangle_class() {
    let mut r = rng(206);
    let a = random_complex(&mut r, 2, 3);
    let cc = random_complex(&mut r, 2, 3);
    let (ha, hc) = (random_structure(&mut r, &a), random_structure(&mut r, &cc));
    let hb: HermStructure = ha.direct_sum(&hc);
    let base = class_of_triangle(&HermTriangle::split(ha.clone(), hc.clone(), hb.clone()).unwrap()).unwrap();
    let moved = class_of_triangle(&HermTriangle::split(ha, hc, torsor_add(&hb, 0.8)).unwrap()).unwrap();
    // the middle term enters with a minus sign
    assert!((moved - base + 0.8).abs() < 1e-8, "{}", moved - base);
}

#[test]
fn derived_suites_small_run() {
    for s in [Suite::TriangleClasses, Suite::ConeWelldef] {
        let rep = run_suite(s, 11, 6, &RunOptions::default());
        let bad: Vec<_> = rep.failures().map(|r| (&r.rule, r.case, r.residual)).collect();
        assert!(bad.is_empty(), "{}: {bad:?}", s.name());
    }
}

#[test]
fn corrupted_rule_is_reported() {
    let opts = RunOptions { corrupt_rule: Some("torsor-distance".into()), ..Default::default() };
    let rep = run_suite(Suite::ConeWelldef, 11, 2, &opts);
    assert!(!rep.rule_passes("torsor-distance"));
    assert!(rep.rule_passes("cone-roof-choice"));
    assert!(rep.failures().all(|f| f.inputs.is_some()));
}
