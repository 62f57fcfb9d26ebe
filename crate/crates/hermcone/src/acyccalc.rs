//! KA-classes of acyclic complexes, the randomized acyclic-calculus suite and
//! the universal-property harness for assignments on acyclic complexes.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::gen::{
    case_rng, isometric_copy, random_acyclic, random_chain_map, random_complex, random_meager, random_pd,
    random_quasi_iso, random_square, Rng,
};
use crate::hermlin::{
    cone, cone_inclusion, cone_of_squares, cone_projection, direct_sum, hodge_decompose, section_to_map, shift,
    ChainMap, DoubleComplex, HermComplex, SplitSes,
};
use crate::linalg::{block_diag, blocks2, eye, kron, zeros, CMat};
use crate::torsion::{is_meager_with, is_tight_with, tau, tau_with};
use crate::verify::{check_result, run_cases, Check, Report, RunOptions};
use crate::{Result, Tolerances};

/// Coordinate in `KA(point) ≅ ℝ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KAClass {
    pub value: f64,
}

impl Add for KAClass {
    type Output = KAClass;
    fn add(self, o: KAClass) -> KAClass {
        KAClass { value: self.value + o.value }
    }
}

impl Sub for KAClass {
    type Output = KAClass;
    fn sub(self, o: KAClass) -> KAClass {
        KAClass { value: self.value - o.value }
    }
}

impl Neg for KAClass {
    type Output = KAClass;
    fn neg(self) -> KAClass {
        KAClass { value: -self.value }
    }
}

impl KAClass {
    pub const ZERO: KAClass = KAClass { value: 0.0 };

    pub fn is_zero(&self, tol: &Tolerances) -> bool {
        self.value.abs() <= tol.tau_tol
    }
}

/// Only acyclic complexes have a class.
pub fn ka_class(cx: &HermComplex) -> Result<KAClass> {
    tau(cx).map(|value| KAClass { value })
}

pub fn ka_class_with(cx: &HermComplex, tol: &Tolerances) -> Result<KAClass> {
    tau_with(cx, tol).map(|value| KAClass { value })
}

fn cx_json(cx: &HermComplex) -> serde_json::Value {
    serde_json::to_value(cx).unwrap_or(serde_json::Value::Null)
}

fn map_json(f: &ChainMap) -> serde_json::Value {
    serde_json::to_value(f).unwrap_or(serde_json::Value::Null)
}

/// `F ⊕ E[1] → cone(f)`, `(y, x) ↦ (0, y)`.
fn into_cone_from_target(f: &ChainMap) -> ChainMap {
    let (e, ff) = (f.source(), f.target());
    let src = direct_sum(ff, &shift(e, 1));
    let cn = cone(f);
    ChainMap::from_fn(&src, &cn, |i| {
        let (a, b) = (e.dim(i + 1), ff.dim(i));
        blocks2(&zeros(a, b), &zeros(a, a), &eye(b), &zeros(b, a))
    })
    .expect("shapes")
}

/// `cone(f) → F ⊕ E[1]`, `(x, y) ↦ (0, x)`.
fn cone_onto_source_shift(f: &ChainMap) -> ChainMap {
    let (e, ff) = (f.source(), f.target());
    let tgt = direct_sum(ff, &shift(e, 1));
    let cn = cone(f);
    ChainMap::from_fn(&cn, &tgt, |i| {
        let (a, b) = (e.dim(i + 1), ff.dim(i));
        blocks2(&zeros(b, a), &zeros(b, b), &eye(a), &zeros(a, b))
    })
    .expect("shapes")
}

/// `cone(g∘f) → cone(g)`, `(x, z) ↦ (f x, z)`.
pub fn cone_comp_to_cone_g(f: &ChainMap, g: &ChainMap) -> Result<ChainMap> {
    let gf = g.compose(f)?;
    let (s, t) = (cone(&gf), cone(g));
    ChainMap::from_fn(&s, &t, |i| block_diag(&f.map(i + 1), &eye(g.target().dim(i))))
}

/// `cone(f) → cone(g∘f)`, `(x, y) ↦ (x, g y)`.
pub fn cone_f_to_cone_comp(f: &ChainMap, g: &ChainMap) -> Result<ChainMap> {
    let gf = g.compose(f)?;
    let (s, t) = (cone(f), cone(&gf));
    ChainMap::from_fn(&s, &t, |i| block_diag(&eye(f.source().dim(i + 1)), &g.map(i)))
}

/// Complex with at least one nonzero cohomology group.
fn random_non_acyclic(r: &mut Rng, max_deg: usize, max_dim: usize) -> HermComplex {
    loop {
        let c = random_complex(r, max_deg, max_dim);
        if !hodge_decompose(&c).map(|h| h.is_acyclic()).unwrap_or(true) {
            return c;
        }
    }
}

/// Orthogonally split sequence `0 → E → F → X[1] → 0` with `F` an isometric
/// copy of `cone(f: X → E)`.
pub struct GeneratedSes {
    pub sub: HermComplex,
    pub middle: HermComplex,
    pub quotient_shifted: HermComplex,
    pub ses: SplitSes,
}

pub fn random_split_ses(r: &mut Rng, sub: HermComplex, x: HermComplex) -> GeneratedSes {
    let f = random_chain_map(r, &x, &sub);
    let cn = cone(&f);
    let (middle, t) = isometric_copy(r, &cn);
    let tinv = ChainMap::from_fn(&middle, &cn, |i| t.map(i).try_inverse().expect("invertible")).expect("shapes");
    let incl = t.compose(&cone_inclusion(&f)).expect("endpoints");
    let proj = cone_projection(&f).compose(&tinv).expect("endpoints");
    let ses = SplitSes { incl, proj, quotient: x.clone(), section: None };
    GeneratedSes { sub, middle, quotient_shifted: shift(&x, 1), ses }
}

/// Double complex `E^{p,q} = A^p ⊗ B^q` with `d_h = d_A ⊗ 1`, `d_v = 1 ⊗ d_B`.
pub fn tensor_double(a: &HermComplex, b: &HermComplex) -> Result<DoubleComplex> {
    let mut grams = BTreeMap::new();
    let mut dh = BTreeMap::new();
    let mut dv = BTreeMap::new();
    for p in a.degrees() {
        for q in b.degrees() {
            grams.insert((p, q), kron(&a.gram(p), &b.gram(q)));
            dh.insert((p, q), kron(&a.diff(p), &eye(b.dim(q))));
            dv.insert((p, q), kron(&eye(a.dim(p)), &b.diff(q)));
        }
    }
    DoubleComplex::new((a.lo(), a.hi()), (b.lo(), b.hi()), grams, dh, dv)
}

/// Two rows `X` (q = 0) and `T·X` (q = 1) joined by the degreewise isomorphism `T`.
pub fn ladder_double(r: &mut Rng, x: &HermComplex) -> Result<DoubleComplex> {
    let (y, t) = isometric_copy(r, x);
    // give the second row its own metric so the columns are not isometries
    let grams_y: BTreeMap<i32, CMat> = y.degrees().map(|i| (i, random_pd(r, y.dim(i)))).collect();
    let y = y.with_grams(&grams_y)?;
    let mut grams = BTreeMap::new();
    let mut dh = BTreeMap::new();
    let mut dv = BTreeMap::new();
    for p in x.degrees() {
        grams.insert((p, 0), x.gram(p));
        grams.insert((p, 1), y.gram(p));
        dh.insert((p, 0), x.diff(p));
        dh.insert((p, 1), y.diff(p));
        dv.insert((p, 0), t.map(p));
    }
    DoubleComplex::new((x.lo(), x.hi()), (0, 1), grams, dh, dv)
}

fn alt_sum(items: impl Iterator<Item = (i32, Result<f64>)>) -> Result<f64> {
    let mut s = 0.0;
    for (k, t) in items {
        let v = t?;
        s += if k.rem_euclid(2) == 0 { v } else { -v };
    }
    Ok(s)
}

/// Residuals of the double-complex identity: rows vs columns vs total.
pub fn double_residual(dc: &DoubleComplex, tol: &Tolerances) -> Result<f64> {
    let (p0, p1) = dc.p_range();
    let (q0, q1) = dc.q_range();
    let cols = alt_sum((p0..=p1).map(|p| (p, tau_with(&dc.column(p), tol))))?;
    let rows = alt_sum((q0..=q1).map(|q| (q, tau_with(&dc.row(q), tol))))?;
    let tot = tau_with(&dc.total(), tol)?;
    Ok((cols - rows).abs().max((tot - cols).abs()))
}

/// One case of every calculus rule.
pub fn calculus_case(seed: u64, k: u64, tol: &Tolerances) -> Vec<Check> {
    let mut r = case_rng(seed, k);
    let t = tol.tau_tol;
    let mut out = Vec::new();

    // meager iff class zero
    let (m, recipe) = random_meager(&mut r, 2, 4);
    out.push(check_result("meager-zero", tau_with(&m, tol).map(f64::abs), t, || {
        json!({ "recipe": recipe, "complex": cx_json(&m) })
    }));
    let a = r.gen_range(0.1..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let ea = HermComplex::ea(a);
    out.push(Check::new("ea-not-meager", if is_meager_with(&ea, tol) { 1.0 } else { 0.0 }, 0.0, json!({ "a": a })));

    let (c1, _) = random_acyclic(&mut r, 4, 5);
    let (c2, _) = random_acyclic(&mut r, 4, 5);
    // sums
    let res2 = (|| Ok((tau_with(&direct_sum(&c1, &c2), tol)? - tau_with(&c1, tol)? - tau_with(&c2, tol)?).abs()))();
    out.push(check_result("sum-additive", res2, t, || json!({ "c": cx_json(&c1), "d": cx_json(&c2) })));

    // E ⊕ E[1] meager, [E[1]] = −[E]
    let res3 = (|| {
        let a = tau_with(&direct_sum(&c1, &shift(&c1, 1)), tol)?.abs();
        let b = (tau_with(&shift(&c1, 1), tol)? + tau_with(&c1, tol)?).abs();
        Ok(a.max(b))
    })();
    out.push(check_result("shift-inverse", res3, t, || json!({ "c": cx_json(&c1) })));

    // E acyclic, F arbitrary
    let ff = random_complex(&mut r, 4, 4);
    let f = random_chain_map(&mut r, &c1, &ff);
    let res4 = (|| {
        let mut res = tau_with(&cone(&into_cone_from_target(&f)), tol)?.abs();
        if let Ok(tf) = tau_with(&ff, tol) {
            res = res.max((tau_with(&cone(&f), tol)? - tf + tau_with(&c1, tol)?).abs());
        }
        Ok(res)
    })();
    out.push(check_result("cone-acyclic-source", res4, t, || json!({ "f": map_json(&f) })));

    // F acyclic, E arbitrary
    let e5 = random_complex(&mut r, 4, 4);
    let f5 = random_chain_map(&mut r, &e5, &c2);
    let res5 = (|| {
        let mut res = tau_with(&cone(&cone_onto_source_shift(&f5)), tol)?.abs();
        if let Ok(te) = tau_with(&e5, tol) {
            res = res.max((tau_with(&cone(&f5), tol)? - tau_with(&c2, tol)? + te).abs());
        }
        Ok(res)
    })();
    out.push(check_result("cone-acyclic-target", res5, t, || json!({ "f": map_json(&f5) })));

    // cones of a homotopy-commutative square
    let sq = random_square(&mut r, true, 3);
    let res6 = (|| {
        let cs = cone_of_squares(&sq.f1, &sq.f, &sq.g1, &sq.g, &sq.h)?;
        Ok((tau_with(&cone(&cs.psi), tol)? - tau_with(&cone(&cs.phi), tol)?).abs())
    })();
    out.push(check_result("cone-of-squares", res6, t, || {
        json!({ "f1": map_json(&sq.f1), "f": map_json(&sq.f), "g1": map_json(&sq.g1), "g": map_json(&sq.g),
                "h": serde_json::to_value(&sq.h).unwrap_or_default() })
    }));

    // composition of quasi-isomorphisms
    let e7 = random_non_acyclic(&mut r, 3, 4);
    let fq = random_quasi_iso(&mut r, &e7);
    let tgt7 = random_complex(&mut r, 3, 4);
    let g7 = random_chain_map(&mut r, fq.target(), &tgt7);
    let res7a = (|| {
        let m1 = cone_comp_to_cone_g(&fq, &g7)?;
        Ok((tau_with(&cone(&m1), tol)? + tau_with(&cone(&fq), tol)?).abs())
    })();
    out.push(check_result("cone-comp-to-cone-g", res7a, t, || json!({ "f": map_json(&fq), "g": map_json(&g7) })));
    let src7 = random_complex(&mut r, 3, 4);
    let f7 = random_chain_map(&mut r, &src7, &e7);
    let gq = random_quasi_iso(&mut r, &e7);
    let res7b = (|| {
        let m2 = cone_f_to_cone_comp(&f7, &gq)?;
        Ok((tau_with(&cone(&m2), tol)? - tau_with(&cone(&gq), tol)?).abs())
    })();
    out.push(check_result("cone-f-to-cone-comp", res7b, t, || json!({ "f": map_json(&f7), "g": map_json(&gq) })));
    let g2 = random_quasi_iso(&mut r, fq.target());
    let res7c = (|| {
        let gf = g2.compose(&fq)?;
        let (a, b, c) = (tau_with(&cone(&gf), tol)?, tau_with(&cone(&g2), tol)?, tau_with(&cone(&fq), tol)?);
        // both forms: [cone(gf)] = [cone g] + [cone f] and [cone g] = −[cone f] + [cone gf]
        Ok((a - b - c).abs().max((b + c - a).abs()))
    })();
    out.push(check_result("composition", res7c, t, || json!({ "f": map_json(&fq), "g": map_json(&g2) })));

    // two of three tight
    let (iso_t, iso) = isometric_copy(&mut r, &e7);
    let gt = random_quasi_iso(&mut r, &iso_t);
    let res_tt = (|| {
        let gf = gt.compose(&iso)?;
        let (a, b, c) = (tau_with(&cone(&gf), tol)?, tau_with(&cone(&gt), tol)?, tau_with(&cone(&iso), tol)?);
        let consistent = is_tight_with(&iso, tol) && (is_tight_with(&gf, tol) == is_tight_with(&gt, tol));
        Ok(if consistent { (a - b - c).abs() } else { f64::INFINITY })
    })();
    out.push(check_result("two-of-three-tight", res_tt, t, || json!({ "f": map_json(&iso), "g": map_json(&gt) })));

    // orthogonally split sequences
    let (x, _) = random_acyclic(&mut r, 3, 4);
    let g = random_split_ses(&mut r, c2.clone(), x);
    let res_ses = (|| {
        let tm = tau_with(&g.middle, tol)?;
        let ts = tau_with(&g.sub, tol)?;
        let tq = tau_with(&g.quotient_shifted, tol)?;
        let sec = section_to_map(&g.ses)?;
        let tc = tau_with(&cone(&sec.map), tol)?;
        Ok((tm - ts - tq).abs().max((tc - tm).abs()).max(sec.residual))
    })();
    out.push(check_result("ses-additivity", res_ses, t, || {
        json!({ "sub": cx_json(&g.sub), "middle": cx_json(&g.middle), "quotient_shifted": cx_json(&g.quotient_shifted) })
    }));

    // double complexes with acyclic rows and columns
    let (a1, _) = random_acyclic(&mut r, 3, 2);
    let (b1, _) = random_acyclic(&mut r, 3, 2);
    let res_dc = (|| {
        let d1 = tensor_double(&a1, &b1)?;
        let d2 = ladder_double(&mut r, &c1)?;
        Ok(double_residual(&d1, tol)?.max(double_residual(&d2, tol)?))
    })();
    out.push(check_result("double-complex", res_dc, t, || json!({ "a": cx_json(&a1), "b": cx_json(&b1), "c": cx_json(&c1) })));

    // negative control: the cone rule does not extend naively to non-acyclic ends
    let en = random_non_acyclic(&mut r, 3, 4);
    let cid = is_meager_with(&cone(&ChainMap::identity(&en)), tol);
    let czero = is_meager_with(&cone(&ChainMap::zero(&en, &en)), tol);
    // naive rule predicts both cones have class [E] − [E] = 0
    let naive_holds = cid && czero;
    out.push(Check::new(
        "naive-extension-fails",
        if cid && !naive_holds { 0.0 } else { 1.0 },
        0.0,
        json!({ "e": cx_json(&en) }),
    ));
    out
}

/// Acyclic-calculus suite over `cases` seeded cases.
pub fn verify_calculus(seed: u64, cases: u64) -> Report {
    run_cases("acyclic-calculus", seed, cases, &RunOptions::default(), calculus_case)
}

/// Outcome of the universal-property harness.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Factorizes,
    NormalizationFails { residual: f64 },
    AdditivityFails { residual: f64 },
    FactorizationFails { residual: f64 },
}

#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub normalization: f64,
    pub additivity: f64,
    pub factorization: f64,
    pub verdict: Verdict,
}

/// Test an assignment on acyclic complexes against the two axioms, then
/// check that it only depends on the class: pairs with equal τ and different
/// shapes must get equal values.
pub fn universal_factorization(
    phi: &(dyn Fn(&HermComplex) -> f64 + Sync),
    seed: u64,
    cases: u64,
    tol: f64,
) -> FactorizationReport {
    let mut normalization: f64 = 0.0;
    let mut additivity: f64 = 0.0;
    let mut factorization: f64 = 0.0;
    for k in 0..cases {
        let mut r = case_rng(seed ^ 0x5eed, k);
        let n = r.gen_range(1..=4);
        let deg = r.gen_range(-2..=2);
        let a = HermComplex::single(deg, random_pd(&mut r, n));
        normalization = normalization.max(phi(&cone(&ChainMap::identity(&a))).abs());

        let (e, _) = random_acyclic(&mut r, 3, 4);
        let (x, _) = random_acyclic(&mut r, 3, 4);
        let g = random_split_ses(&mut r, e, x);
        additivity = additivity.max((phi(&g.middle) - phi(&g.sub) - phi(&g.quotient_shifted)).abs());

        let (cx, tc) = random_acyclic(&mut r, 4, 5);
        let other = direct_sum(&shift(&HermComplex::ea(tc), 2 * r.gen_range(-1..=1)), &crate::gen::random_m0(&mut r, 3));
        let other = isometric_copy(&mut r, &other).0;
        factorization = factorization.max((phi(&cx) - phi(&other)).abs());
    }
    let verdict = if normalization > tol {
        Verdict::NormalizationFails { residual: normalization }
    } else if additivity > tol {
        Verdict::AdditivityFails { residual: additivity }
    } else if factorization > tol {
        Verdict::FactorizationFails { residual: factorization }
    } else {
        Verdict::Factorizes
    };
    FactorizationReport { normalization, additivity, factorization, verdict }
}

/// `Err` unless acyclic, as for [`ka_class`]; convenience for assignments.
pub fn tau_or_nan(cx: &HermComplex) -> f64 {
    tau(cx).unwrap_or(f64::NAN)
}

impl From<KAClass> for f64 {
    fn from(k: KAClass) -> f64 {
        k.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn class_examples() {
        assert!((ka_class(&HermComplex::ea(1.3)).unwrap().value - 1.3).abs() < 1e-12);
        let (c, _) = random_acyclic(&mut crate::gen::rng(3), 4, 4);
        assert!(ka_class(&direct_sum(&c, &shift(&c, 1))).unwrap().value.abs() < 1e-10);
        assert!(matches!(ka_class(&HermComplex::single(0, eye(1))), Err(Error::NotAcyclic { .. })));
        let s = ka_class(&c).unwrap() + ka_class(&shift(&c, 1)).unwrap();
        assert!(s.is_zero(&Tolerances::default()));
    }

    #[test]
    fn calculus_small_run() {
        let rep = verify_calculus(42, 12);
        if let Some(f) = rep.failures().next() {
            panic!("{} case {} residual {:e} {:?}", f.rule, f.case, f.residual, f.inputs.as_ref().map(|v| v.to_string().chars().take(300).collect::<String>()));
        }
        assert!(rep.rules().len() >= 14);
    }

    #[test]
    fn degenerate_vacuous() {
        assert!(verify_calculus(1, 0).all_pass());
        let z = HermComplex::zero();
        assert_eq!(tau(&direct_sum(&z, &shift(&z, 1))).unwrap(), 0.0);
    }

    #[test]
    fn universal_property() {
        let t = universal_factorization(&tau_or_nan, 42, 20, 1e-9);
        assert_eq!(t.verdict, Verdict::Factorizes, "{t:?}");
        let t2 = universal_factorization(&|c: &HermComplex| 2.0 * tau_or_nan(c), 42, 20, 1e-9);
        assert_eq!(t2.verdict, Verdict::Factorizes);
        let rank = universal_factorization(&|c: &HermComplex| c.total_dim() as f64, 42, 5, 1e-9);
        assert!(matches!(rank.verdict, Verdict::NormalizationFails { .. }));
    }
}
