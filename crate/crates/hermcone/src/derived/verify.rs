//! Randomized checks for classes of isomorphisms and triangles, and for the
//! hermitian cone.

use serde_json::{json, Value};

use super::*;
use crate::gen::{
    case_rng, random_chain_map, random_coho, random_complex, random_object_complex, random_object_morphism,
    random_pd, random_qiso_into, random_quasi_iso, random_structure, Rng,
};
use crate::hermlin::{cone, direct_sum, hodge_with, shift_map, ChainMap, HermComplex};
use crate::linalg::{blocks2, zeros};
use crate::verify::{check_result, Check};
use crate::{Result, Tolerances};
use rand::Rng as _;

pub(crate) fn structure_json(h: &HermStructure) -> Value {
    json!({
        "underlying": serde_json::to_value(h.underlying()).unwrap_or(Value::Null),
        "metric": serde_json::to_value(h.metric()).unwrap_or(Value::Null),
        "roof": roof_json(h.roof()),
    })
}

pub(crate) fn roof_json(r: &Roof) -> Value {
    json!({
        "s": serde_json::to_value(r.s()).unwrap_or(Value::Null),
        "g": serde_json::to_value(r.g()).unwrap_or(Value::Null),
    })
}

fn replay(seed: u64, k: u64) -> Value {
    json!({ "seed": seed, "case": k })
}

fn small(r: &mut Rng) -> HermComplex {
    random_complex(r, 3, 3)
}

/// `A ⊕ … ⊕ D` and the map sending part `a` of `src` identically onto part `b` of `tgt`.
fn fold_sum(parts: &[&HermComplex]) -> HermComplex {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, p| direct_sum(&acc, p))
}

fn select(src: &[&HermComplex], tgt: &[&HermComplex], pairs: &[(usize, usize)]) -> Result<ChainMap> {
    let (s, t) = (fold_sum(src), fold_sum(tgt));
    ChainMap::from_fn(&s, &t, |i| {
        let off = |parts: &[&HermComplex], k: usize| parts[..k].iter().map(|p| p.dim(i)).sum::<usize>();
        let mut m = zeros(t.dim(i), s.dim(i));
        for &(a, b) in pairs {
            let (ra, cb) = (off(tgt, b), off(src, a));
            for j in 0..src[a].dim(i) {
                m[(ra + j, cb + j)] = crate::linalg::c(1.0, 0.0);
            }
        }
        m
    })
}

fn split_triangle(
    a: &HermStructure,
    b: &HermStructure,
    c: &HermStructure,
    incl: ChainMap,
    proj: ChainMap,
) -> Result<HermTriangle> {
    let w = ChainMap::zero(c.underlying(), &crate::hermlin::shift(a.underlying(), 1));
    HermTriangle::new(a.clone(), b.clone(), c.clone(), Roof::from_map(incl), Roof::from_map(proj), Roof::from_map(w))
}

fn nine_square(r: &mut Rng) -> Result<f64> {
    let (p, q, rr, s) = (random_complex(r, 2, 2), random_complex(r, 2, 2), random_complex(r, 2, 2), random_complex(r, 2, 2));
    let mut st = |parts: &[&HermComplex]| random_structure(r, &fold_sum(parts));
    let (hp, hq, hr, hs) = (st(&[&p]), st(&[&q]), st(&[&rr]), st(&[&s]));
    let (hpq, hrs, hpr, hqs) = (st(&[&p, &q]), st(&[&rr, &s]), st(&[&p, &rr]), st(&[&q, &s]));
    let hm = st(&[&p, &q, &rr, &s]);
    let all = [&p, &q, &rr, &s];
    let t = |a: &HermStructure, b: &HermStructure, c: &HermStructure, sa: &[&HermComplex], sc: &[&HermComplex], ia: &[(usize, usize)], ic: &[(usize, usize)], sb: &[&HermComplex]| -> Result<f64> {
        let incl = select(sa, sb, ia)?.with_endpoints(a.underlying(), b.underlying())?;
        let proj = select(sb, sc, &ic.iter().map(|&(x, y)| (y, x)).collect::<Vec<_>>())?.with_endpoints(b.underlying(), c.underlying())?;
        class_of_triangle(&split_triangle(a, b, c, incl, proj)?)
    };
    // rows
    let t1 = t(&hp, &hpq, &hq, &[&p], &[&q], &[(0, 0)], &[(0, 1)], &[&p, &q])?;
    let t2 = t(&hpr, &hm, &hqs, &[&p, &rr], &[&q, &s], &[(0, 0), (1, 2)], &[(0, 1), (1, 3)], &all)?;
    let t3 = t(&hr, &hrs, &hs, &[&rr], &[&s], &[(0, 0)], &[(0, 1)], &[&rr, &s])?;
    // columns
    let e1 = t(&hp, &hpr, &hr, &[&p], &[&rr], &[(0, 0)], &[(0, 1)], &[&p, &rr])?;
    let e2 = t(&hpq, &hm, &hrs, &[&p, &q], &[&rr, &s], &[(0, 0), (1, 1)], &[(0, 2), (1, 3)], &all)?;
    let e3 = t(&hq, &hqs, &hs, &[&q], &[&s], &[(0, 0)], &[(0, 1)], &[&q, &s])?;
    Ok(((t1 - t2 + t3) - (e1 - e2 + e3)).abs())
}

fn ladder(r: &mut Rng) -> Result<f64> {
    let (a, b) = (small(r), small(r));
    let u = random_chain_map(r, &a, &b);
    let f = random_quasi_iso(r, &a);
    let g = random_quasi_iso(r, &b);
    let (a2, b2) = (f.target().clone(), g.target().clone());
    let u_star = CohoMap::of(&u)?;
    let u2 = realize(&a2, &b2, &CohoMap::of(&g)?.after(&u_star)?.after(&CohoMap::of(&f)?.inverse()?)?)?;
    let (c, c2) = (cone(&u), cone(&u2));
    let (ha, hb, hc) = (random_structure(r, &a), random_structure(r, &b), random_structure(r, &c));
    let (ha2, hb2, hc2) = (random_structure(r, &a2), random_structure(r, &b2), random_structure(r, &c2));
    let t1 = HermTriangle::standard(ha.clone(), hb.clone(), &Roof::from_map(u.clone()), hc.clone())?;
    let t2 = HermTriangle::standard(ha2.clone(), hb2.clone(), &Roof::from_map(u2.clone()), hc2.clone())?;
    let v = CohoMap::of(&crate::hermlin::cone_inclusion(&u))?;
    let w = CohoMap::of(&crate::hermlin::cone_projection(&u))?;
    let v2 = CohoMap::of(&crate::hermlin::cone_inclusion(&u2))?;
    let w2 = CohoMap::of(&crate::hermlin::cone_projection(&u2))?;
    let f1 = CohoMap::of(&shift_map(&f, 1))?;
    let cmp = solve_comparison(
        &v.target.clone(),
        &v2.target.clone(),
        &[(v, v2.after(&CohoMap::of(&g)?)?)],
        &[(w2, f1.after(&w)?)],
    )?;
    let h = Roof::from_map(realize(&c, &c2, &cmp.alpha)?);
    let cf = class_of_morphism(&Roof::from_map(f), &ha, &ha2)?;
    let cg = class_of_morphism(&Roof::from_map(g), &hb, &hb2)?;
    let ch = class_of_morphism(&h, &hc, &hc2)?;
    Ok((class_of_triangle(&t2)? - class_of_triangle(&t1)? - (cf - cg + ch)).abs().max(cmp.residual))
}

/// `Σ (−1)^j [ξ_j]` against `[μ′] − [μ] + [μ″]` for a short exact sequence
/// of exact complexes of objects.
fn exact_rows(r: &mut Rng) -> Result<f64> {
    let len = 3;
    let mp = random_object_complex(r, 0, len, true);
    let mpp = random_object_complex(r, 0, len, true);
    let mut middle = Vec::new();
    let mut s_maps = Vec::new();
    for j in 0..len as i32 {
        let (u1, u2) = (mp.object(j).unwrap(), mpp.object(j).unwrap());
        let sum = direct_sum(u1.underlying(), u2.underlying());
        middle.push(random_structure(r, &sum));
        s_maps.push(random_coho(r, &u2.rho()?.target, &u1.rho()?.target));
    }
    let real = |x: &Roof| realize(x.source(), x.target(), &x.morphism()?);
    let mut maps = Vec::new();
    for k in 1..len as i32 {
        let (c1, c2) = (mp.differential(k).unwrap(), mpp.differential(k).unwrap());
        let t = c1.morphism()?.after(&s_maps[k as usize])?.add(&s_maps[k as usize - 1].after(&c2.morphism()?)?.scale(-1.0))?;
        let (rc1, rc2) = (real(c1)?, real(c2)?);
        let rt = realize(mpp.object(k).unwrap().underlying(), mp.object(k - 1).unwrap().underlying(), &t)?;
        let (src, tgt) = (middle[k as usize].underlying(), middle[k as usize - 1].underlying());
        maps.push(Roof::from_map(ChainMap::from_fn(src, tgt, |i| {
            blocks2(&rc1.map(i), &rt.map(i), &zeros(rc2.target().dim(i), rc1.source().dim(i)), &rc2.map(i))
        })?));
    }
    let mu = ObjectComplex::new(0, middle.clone(), maps)?;
    let mut lhs = 0.0;
    for j in 0..len as i32 {
        let (a, c) = (mp.object(j).unwrap(), mpp.object(j).unwrap());
        let (ua, uc) = (a.underlying(), c.underlying());
        let b = &middle[j as usize];
        let incl = sum_inclusion(ua, uc, true).with_endpoints(ua, b.underlying())?;
        let proj = sum_projection(ua, uc, false).with_endpoints(b.underlying(), uc)?;
        let xi = ObjectComplex::new(0, vec![c.clone(), b.clone(), a.clone()], vec![Roof::from_map(proj), Roof::from_map(incl)])?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        lhs += sign * xi.ka_class()?;
    }
    let rhs = mp.ka_class()? - mu.ka_class()? + mpp.ka_class()?;
    Ok((lhs - rhs).abs())
}

fn induced(r: &mut Rng) -> Result<(f64, f64)> {
    let c = small(r);
    let f = random_quasi_iso(r, &c);
    let hodge = hodge_with(&c, &Tolerances::default())?;
    let ms: std::collections::BTreeMap<i32, crate::linalg::CMat> = c
        .degrees()
        .filter(|&i| hodge.harmonic_dim(i) > 0)
        .map(|i| (i, random_pd(r, hodge.harmonic_dim(i))))
        .collect();
    let a = cohomology_induced_structure(&c, &ms)?;
    let pushed = pushed_metrics(&f, &ms)?;
    let b = cohomology_induced_structure(f.target(), &pushed)?;
    let tight = class_of_morphism(&Roof::from_map(f.clone()), &a, &b)?.abs();
    let other = pushed.iter().map(|(&i, g)| (i, random_pd(r, g.nrows()))).collect();
    let b2 = cohomology_induced_structure(f.target(), &other)?;
    let general = (class_of_morphism(&Roof::from_map(f.clone()), &a, &b2)? - cohomology_complex_class(&f, &ms, &other)?).abs();
    Ok((tight, general))
}

pub fn triangle_case(seed: u64, k: u64, tol: &Tolerances) -> Vec<Check> {
    let mut r = case_rng(seed, k);
    let t = tol.tau_tol;
    let rp = || replay(seed, k);
    let mut out = Vec::new();

    // composition, inverse and representative independence
    let a = small(&mut r);
    let f = random_quasi_iso(&mut r, &a);
    let g = random_quasi_iso(&mut r, f.target());
    let (b, c) = (f.target().clone(), g.target().clone());
    let (ha, hb, hc) = (random_structure(&mut r, &a), random_structure(&mut r, &b), random_structure(&mut r, &c));
    let (rf, rg) = (Roof::from_map(f.clone()), Roof::from_map(g.clone()));
    let res = (|| {
        let comp = compose_roofs(&rf, &rg)?;
        Ok((class_of_morphism(&comp, &ha, &hc)? - class_of_morphism(&rf, &ha, &hb)? - class_of_morphism(&rg, &hb, &hc)?).abs())
    })();
    out.push(check_result("compose-additive", res, t, || json!({ "f": roof_json(&rf), "g": roof_json(&rg), "replay": rp() })));
    let res = (|| Ok((class_of_morphism(&rf.inverse()?, &hb, &ha)? + class_of_morphism(&rf, &ha, &hb)?).abs()))();
    out.push(check_result("inverse-negates", res, t, || json!({ "f": roof_json(&rf), "replay": rp() })));
    let tq = random_qiso_into(&mut r, &a);
    let res = (|| {
        let refined = rf.refine(&tq)?;
        Ok((class_of_morphism(&refined, &ha, &hb)? - class_of_morphism(&rf, &ha, &hb)?).abs())
    })();
    out.push(check_result("roof-independence", res, 1e-9, || json!({ "f": roof_json(&rf), "replay": rp() })));
    let res = (|| {
        let base = class_of_morphism(&rf, &ha, &hb)?;
        let mut worst: f64 = 0.0;
        for i in [-1, 1, 2] {
            let v = class_of_morphism(&rf.shift(i), &ha.shift(i), &hb.shift(i))?;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((sign * v - base).abs());
        }
        Ok(worst)
    })();
    out.push(check_result("shift-rule", res, t, || json!({ "f": roof_json(&rf), "replay": rp() })));

    // triangles on a random chain map
    let x = small(&mut r);
    let y = small(&mut r);
    let u = Roof::from_map(random_chain_map(&mut r, &x, &y));
    let (hx, hy) = (random_structure(&mut r, &x), random_structure(&mut r, &y));
    let cu = cone(&u.chain_map().expect("chain map roof"));
    let hcu = random_structure(&mut r, &cu);
    let shift_a = r.gen_range(-2.0..2.0);
    let res = (|| {
        let hc = herm_cone(&hx, &hy, &u)?;
        let tri = HermTriangle::standard(hx.clone(), hy.clone(), &u, hc.structure.clone())?;
        let tri2 = HermTriangle::standard(hx.clone(), hy.clone(), &u, torsor_add(&hc.structure, shift_a))?;
        Ok(class_of_triangle(&tri)?.abs().max((class_of_triangle(&tri2)? - shift_a).abs()))
    })();
    out.push(check_result("tight-cone-and-torsor", res, t, || json!({ "u": roof_json(&u), "a": shift_a, "replay": rp() })));
    let res = (|| {
        let tri = HermTriangle::standard(hx.clone(), hy.clone(), &u, hcu.clone())?;
        let c0 = triangle_class(&tri)?;
        let r1 = tri.rotate()?;
        let c1 = class_of_triangle(&r1)?;
        let c3 = class_of_triangle(&r1.rotate()?.rotate()?)?;
        Ok((c0.value + c1).abs().max((c0.value + c3).abs()))
    })();
    out.push(check_result("rotation-negates", res, t, || json!({ "u": roof_json(&u), "c": structure_json(&hcu), "replay": rp() })));
    let res = (|| Ok(triangle_class(&HermTriangle::standard(hx.clone(), hy.clone(), &u, hcu.clone())?)?.independence))();
    out.push(check_result("comparison-independence", res, t, || json!({ "u": roof_json(&u), "replay": rp() })));
    let res = (|| {
        let (p, q) = cone_rotation_classes(&hx, &hy, &u)?;
        Ok(p.abs().max(q.abs()))
    })();
    out.push(check_result("cone-rotation-tight", res, t, || json!({ "u": roof_json(&u), "replay": rp() })));
    let res = (|| {
        let sum = hx.direct_sum(&hy);
        let tri = HermTriangle::split(hx.clone(), hy.clone(), sum.clone())?;
        let tri2 = HermTriangle::split(hx.clone(), torsor_add(&hy, shift_a), sum)?;
        Ok(class_of_triangle(&tri)?.abs().max((class_of_triangle(&tri2)? - shift_a).abs()))
    })();
    out.push(check_result("split-triangle", res, t, || json!({ "a": shift_a, "replay": rp() })));

    out.push(check_result("ladder", ladder(&mut r), t, || json!({ "replay": rp() })));
    out.push(check_result("nine-square", nine_square(&mut r), t, || json!({ "replay": rp() })));

    // complexes of objects
    let res = exact_rows(&mut r);
    out.push(check_result("exact-rows", res, t, || json!({ "replay": rp() })));
    let res = (|| {
        let e = random_object_complex(&mut r, 0, 3, true);
        let m = random_object_complex(&mut r, 0, 3, true);
        let f = random_object_morphism(&mut r, &e, &m);
        Ok((cone_of_complexes(&e, &m, &f)?.ka_class()? - m.ka_class()? + e.ka_class()?).abs())
    })();
    out.push(check_result("cone-of-exact", res, t, || json!({ "replay": rp() })));
    let res = (|| {
        let e = random_object_complex(&mut r, 0, 3, false);
        let m = random_object_complex(&mut r, 0, 3, false);
        let f = random_object_morphism(&mut r, &e, &m);
        Ok(cone_compatibility(&e, &m, &f)?.abs())
    })();
    out.push(check_result("cone-compatibility", res, t, || json!({ "replay": rp() })));
    match induced(&mut r) {
        Ok((tight, general)) => {
            out.push(Check::new("induced-tight", tight, t, rp()));
            out.push(Check::new("induced-class", general, t, rp()));
        }
        Err(e) => {
            out.push(Check::failed("induced-tight", &e, rp()));
            out.push(Check::failed("induced-class", &e, rp()));
        }
    }
    out
}

pub fn cone_case(seed: u64, k: u64, tol: &Tolerances) -> Vec<Check> {
    let mut r = case_rng(seed, k);
    let rp = || replay(seed, k);
    let mut out = Vec::new();
    let (x, y) = (small(&mut r), small(&mut r));
    let u = Roof::from_map(random_chain_map(&mut r, &x, &y));
    let (hx, hy) = (random_structure(&mut r, &x), random_structure(&mut r, &y));
    // another roof N_x ← E″ → N_y for the same morphism
    let t = random_qiso_into(&mut r, hx.metric());
    let bnd = crate::gen::random_homotopy(&mut r, t.source(), hy.metric(), 0.5).boundary();
    let res = (|| {
        let psi = metric_morphism(&u.morphism()?, &hx, &hy)?;
        let g = realize(hx.metric(), hy.metric(), &psi)?.compose(&t)?.add(&bnd)?;
        let alt = Roof::new(t.clone(), g)?;
        let c1 = herm_cone(&hx, &hy, &u)?;
        let c2 = herm_cone_via(&hx, &hy, &u, &alt)?;
        Ok(structure_distance(&c1.structure, &c2.structure)?.abs())
    })();
    out.push(check_result("cone-roof-choice", res, tol.tau_tol, || {
        json!({ "u": roof_json(&u), "x": structure_json(&hx), "y": structure_json(&hy), "replay": rp() })
    }));

    let a = r.gen_range(-3.0..3.0);
    let b = r.gen_range(-3.0..3.0);
    let res = (|| {
        let d1 = (structure_distance(&torsor_add(&hx, a), &hx)? - a).abs();
        let d2 = (structure_distance(&torsor_add(&hx, a), &torsor_add(&hx, b))? - (a - b)).abs();
        Ok(d1.max(d2))
    })();
    out.push(check_result("torsor-distance", res, 1e-10, || json!({ "x": structure_json(&hx), "a": a, "b": b })));

    let f = random_quasi_iso(&mut r, &x);
    let g = random_quasi_iso(&mut r, f.target());
    let res = (|| {
        let (rf, rg) = (Roof::from_map(f.clone()), Roof::from_map(g.clone()));
        let both = parallel_transport(&compose_roofs(&rf, &rg)?, &hx)?;
        let step = parallel_transport(&rg, &parallel_transport(&rf, &hx)?)?;
        let id = parallel_transport(&Roof::identity(&x), &hx)?;
        Ok(structure_distance(&both, &step)?.abs().max(structure_distance(&id, &hx)?.abs()))
    })();
    out.push(check_result("transport-functorial", res, 1e-9, || json!({ "x": structure_json(&hx), "replay": rp() })));
    let res = (|| Ok(herm_cone(&hx, &hx, &Roof::identity(&x))?.structure.ka_coordinate()?.abs()))();
    out.push(check_result("identity-cone-meager", res, tol.tau_tol, || json!({ "x": structure_json(&hx) })));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eye;

    #[test]
    fn suites_pass_on_a_few_cases() {
        let tol = Tolerances::default();
        for k in 0..2 {
            for ch in triangle_case(5, k, &tol).into_iter().chain(cone_case(5, k, &tol)) {
                assert!(ch.passes(), "{} {} {:?}", ch.rule, ch.residual, ch.inputs);
            }
        }
    }

    #[test]
    fn selection_maps() {
        let p = HermComplex::single(0, eye(2));
        let q = HermComplex::single(0, eye(1));
        let m = select(&[&p], &[&p, &q], &[(0, 0)]).unwrap();
        assert_eq!(m.map(0).shape(), (3, 2));
        assert!(m.is_chain_map(&Tolerances::default()));
    }
}
