//! Homotopy-commutative squares, null-homotopies and split sequences.

use std::collections::BTreeMap;

use super::hodge::hodge_decompose;
use super::{cone, shift, ChainMap, HermComplex, Homotopy};
use crate::linalg::{blocks2, frob, inverse_pd, max_abs, zeros, CMat};
use crate::{Error, Result, Tolerances};

/// Output of [`cone_of_squares`].
#[derive(Clone, Debug)]
pub struct ConeSquares {
    /// `ψ: cone(f′) → cone(f)`, `(x′, y′) ↦ (g′x′, g y′ + h x′)`.
    pub psi: ChainMap,
    /// `φ: cone(−g′) → cone(g)`, `(x′, x) ↦ (−f′x′, f x + h x′)`.
    pub phi: ChainMap,
    /// Per degree, `perm[k]` is the position in `cone(ψ)` of coordinate `k` of `cone(φ)`.
    pub perm: BTreeMap<i32, Vec<usize>>,
    /// Largest relative mismatch between permuted `cone(φ)` and `cone(ψ)` data.
    pub residual: f64,
}

fn rel_residual(num: &CMat, a: &CMat, b: &CMat) -> f64 {
    // absolute below unit scale, so rounding noise on zero maps is not amplified
    frob(num) / (frob(a) + frob(b)).max(1.0)
}

/// Square `E′ →f′ F′`, `E →f F`, `g′: E′ → E`, `g: F′ → F` commuting up to
/// `h`: `g f′ − f g′ = d h + h d`. The two cones of cones agree after
/// swapping the middle blocks.
pub fn cone_of_squares(
    f1: &ChainMap,
    f: &ChainMap,
    g1: &ChainMap,
    g: &ChainMap,
    h: &Homotopy,
) -> Result<ConeSquares> {
    let (e1, ff1) = (f1.source(), f1.target());
    let (e, ff) = (f.source(), f.target());
    if !g1.source().same_shape(e1) || !g1.target().same_shape(e) || !g.source().same_shape(ff1) || !g.target().same_shape(ff)
    {
        return Err(Error::Mismatch("square endpoints do not match".into()));
    }
    let lhs = g.compose(f1)?.sub(&f.compose(g1)?)?;
    let rhs = h.boundary();
    let lo = e1.lo().min(ff.lo()) - 1;
    let hi = e1.hi().max(ff.hi()) + 1;
    let mut witness: f64 = 0.0;
    for i in lo..=hi {
        witness = witness.max(rel_residual(&(lhs.map(i) - rhs.map(i)), &lhs.map(i), &rhs.map(i)));
    }
    if witness > Tolerances::default().chain_tol {
        return Err(Error::HomotopyWitness(witness));
    }
    let c1 = cone(f1);
    let c0 = cone(f);
    let psi = ChainMap::from_fn(&c1, &c0, |i| {
        blocks2(&g1.map(i + 1), &zeros(e.dim(i + 1), ff1.dim(i)), &h.map(i + 1), &g.map(i))
    })?;
    let cg1 = cone(&g1.neg());
    let cg = cone(g);
    let phi = ChainMap::from_fn(&cg1, &cg, |i| {
        blocks2(&(-f1.map(i + 1)), &zeros(ff1.dim(i + 1), e.dim(i)), &h.map(i + 1), &f.map(i))
    })?;
    let cphi = cone(&phi);
    let cpsi = cone(&psi);
    let mut perm = BTreeMap::new();
    let mut residual: f64 = 0.0;
    let range_lo = cphi.lo().min(cpsi.lo());
    let range_hi = cphi.hi().max(cpsi.hi());
    let perm_of = |i: i32| -> Vec<usize> {
        // cone(φ)^i = E′^{i+2} ⊕ E^{i+1} ⊕ F′^{i+1} ⊕ F^i
        // cone(ψ)^i = E′^{i+2} ⊕ F′^{i+1} ⊕ E^{i+1} ⊕ F^i
        let (a, b, cc, d) = (e1.dim(i + 2), e.dim(i + 1), ff1.dim(i + 1), ff.dim(i));
        let mut p = Vec::with_capacity(a + b + cc + d);
        p.extend(0..a);
        p.extend((0..b).map(|k| a + cc + k));
        p.extend((0..cc).map(|k| a + k));
        p.extend((0..d).map(|k| a + b + cc + k));
        p
    };
    let pmat = |i: i32| -> CMat {
        let p = perm_of(i);
        let mut m = zeros(p.len(), p.len());
        for (k, &t) in p.iter().enumerate() {
            m[(t, k)] = crate::linalg::c(1.0, 0.0);
        }
        m
    };
    for i in range_lo..=range_hi {
        if cphi.dim(i) != cpsi.dim(i) {
            return Err(Error::Shape(format!("cone dimensions differ in degree {i}")));
        }
        let p0 = pmat(i);
        let p1 = pmat(i + 1);
        let g_perm = &p0 * cphi.gram(i) * p0.transpose();
        residual = residual.max(rel_residual(&(&g_perm - cpsi.gram(i)), &g_perm, &cpsi.gram(i)));
        let d_perm = &p1 * cphi.diff(i) * p0.transpose();
        residual = residual.max(rel_residual(&(&d_perm - cpsi.diff(i)), &d_perm, &cpsi.diff(i)));
        perm.insert(i, perm_of(i));
    }
    Ok(ConeSquares { psi, phi, perm, residual })
}

/// Homotopy `h` with `d h + h d = x` for a chain map inducing zero on
/// cohomology: `h = d⁺x + P_H x d⁺` from the Hodge splittings.
pub fn null_homotopy(x: &ChainMap) -> Result<Homotopy> {
    let (s, t) = (x.source(), x.target());
    let hs = hodge_decompose(s)?;
    let ht = hodge_decompose(t)?;
    let lo = s.lo().max(t.lo() + 1);
    let hi = s.hi().min(t.hi() + 1);
    let mut maps = BTreeMap::new();
    for i in lo..=hi {
        let a = ht.pinv(t, i - 1) * x.map(i);
        let b = ht.harmonic_projector(t, i - 1) * x.map(i - 1) * hs.pinv(s, i - 1);
        maps.insert(i, a + b);
    }
    let h = Homotopy::new(s.clone(), t.clone(), maps)?;
    let bd = h.boundary();
    let mut res: f64 = 0.0;
    for i in s.lo().min(t.lo())..=s.hi().max(t.hi()) {
        res = res.max(rel_residual(&(bd.map(i) - x.map(i)), &bd.map(i), &x.map(i)));
    }
    if res > 1e-8 {
        return Err(Error::HomotopyWitness(res));
    }
    Ok(h)
}

/// Degreewise orthogonally split sequence `0 → F → G → E[1] → 0`.
#[derive(Clone, Debug)]
pub struct SplitSes {
    pub incl: ChainMap,
    /// Target must have the shape of `shift(quotient, 1)`.
    pub proj: ChainMap,
    pub quotient: HermComplex,
    /// Degreewise section `E[1]^i → G^i`; the metric adjoint of `proj` if absent.
    pub section: Option<BTreeMap<i32, CMat>>,
}

#[derive(Clone, Debug)]
pub struct SectionResult {
    /// `f_s: E → F`.
    pub map: ChainMap,
    /// `cone(f_s) → G`, `(x, y) ↦ s x + incl y`.
    pub iso: ChainMap,
    /// Largest relative defect of the isometry (Gram and chain property).
    pub residual: f64,
}

pub fn section_to_map(ses: &SplitSes) -> Result<SectionResult> {
    let f = ses.incl.source();
    let g = ses.incl.target();
    let e = &ses.quotient;
    let e1 = shift(e, 1);
    if !ses.proj.source().same_shape(g) || !ses.proj.target().same_shape(&e1) {
        return Err(Error::Shape("projection endpoints".into()));
    }
    let tol = 1e-9;
    let lo = g.lo().min(e1.lo()).min(f.lo());
    let hi = g.hi().max(e1.hi()).max(f.hi());
    let mut s = BTreeMap::new();
    let mut incl_pinv = BTreeMap::new();
    for i in lo..=hi {
        let gg = g.gram(i);
        let inc = ses.incl.map(i);
        let pr = ses.proj.map(i);
        let scale = 1.0 + max_abs(&gg);
        if max_abs(&(inc.adjoint() * &gg * &inc - f.gram(i))) > tol * scale {
            return Err(Error::NotSplit(format!("inclusion is not isometric in degree {i}")));
        }
        if max_abs(&(&pr * &inc)) > tol * (1.0 + max_abs(&pr)) {
            return Err(Error::NotSplit(format!("proj∘incl ≠ 0 in degree {i}")));
        }
        let si = match &ses.section {
            Some(m) => m.get(&i).cloned().unwrap_or_else(|| zeros(g.dim(i), e1.dim(i))),
            None => {
                if g.dim(i) == 0 {
                    zeros(0, e1.dim(i))
                } else {
                    inverse_pd(&gg).ok_or_else(|| Error::Invalid("middle gram".into()))? * pr.adjoint() * e1.gram(i)
                }
            }
        };
        if si.shape() != (g.dim(i), e1.dim(i)) {
            return Err(Error::Shape(format!("section in degree {i}")));
        }
        let id = crate::linalg::eye(e1.dim(i));
        if max_abs(&(&pr * &si - &id)) > tol {
            return Err(Error::NotSplit(format!("proj∘s ≠ Id in degree {i}")));
        }
        if max_abs(&(si.adjoint() * &gg * &si - e1.gram(i))) > tol * scale {
            return Err(Error::NotSplit(format!("section is not isometric in degree {i}")));
        }
        if max_abs(&(inc.adjoint() * &gg * &si)) > tol * scale {
            return Err(Error::NotSplit(format!("middle gram not block-diagonal in degree {i}")));
        }
        let fp = if f.dim(i) == 0 {
            zeros(0, g.dim(i))
        } else {
            inverse_pd(&f.gram(i)).unwrap() * inc.adjoint() * &gg
        };
        s.insert(i, si);
        incl_pinv.insert(i, fp);
    }
    let get = |m: &BTreeMap<i32, CMat>, i: i32, r: usize, cc: usize| m.get(&i).cloned().unwrap_or_else(|| zeros(r, cc));
    // f^j: E^j → F^j from (d_G s − s d_{E[1]}) on E[1]^{j−1} = E^j
    let fmap = ChainMap::from_fn(e, f, |j| {
        let sj1 = get(&s, j - 1, g.dim(j - 1), e1.dim(j - 1));
        let sj = get(&s, j, g.dim(j), e1.dim(j));
        let ds = g.diff(j - 1) * sj1 - sj * e1.diff(j - 1);
        get(&incl_pinv, j, f.dim(j), g.dim(j)) * ds
    })?;
    let cn = cone(&fmap);
    let iso = ChainMap::from_fn(&cn, g, |i| {
        crate::linalg::hstack(&get(&s, i, g.dim(i), e1.dim(i)), &ses.incl.map(i))
    })?;
    let mut residual = iso.chain_residual();
    for i in cn.degrees() {
        let m = iso.map(i);
        let gi = m.adjoint() * g.gram(i) * &m;
        residual = residual.max(rel_residual(&(&gi - cn.gram(i)), &gi, &cn.gram(i)));
    }
    Ok(SectionResult { map: fmap, iso, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{cone_inclusion, cone_projection};
    use crate::linalg::{eye, real};

    fn one() -> HermComplex {
        HermComplex::single(0, eye(1))
    }

    #[test]
    fn zero_square() {
        let v = HermComplex::ea(0.2);
        let z = ChainMap::zero(&v, &v);
        let r = cone_of_squares(&z, &z, &z, &z, &Homotopy::zero(&v, &v)).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn identity_square() {
        let v = one();
        let id = ChainMap::identity(&v);
        let r = cone_of_squares(&id, &id, &id, &id, &Homotopy::zero(&v, &v)).unwrap();
        assert_eq!(r.psi.map(-1), eye(2).columns(0, 1).rows(0, 1).into_owned());
        assert!(r.residual < 1e-15);
    }

    #[test]
    fn bad_witness_rejected() {
        let v = one();
        let id = ChainMap::identity(&v);
        let z = ChainMap::zero(&v, &v);
        let r = cone_of_squares(&id, &id, &id, &z, &Homotopy::zero(&v, &v));
        assert!(matches!(r, Err(Error::HomotopyWitness(_))));
    }

    #[test]
    fn null_homotopy_on_acyclic_source() {
        // E = e^a is acyclic; any map E → ℂ[0] is null-homotopic
        let e = HermComplex::ea(0.5);
        let t = one();
        let mut m = BTreeMap::new();
        m.insert(0, real(&[&[2.0]]));
        let x = ChainMap::new(e, t, m).unwrap();
        let h = null_homotopy(&x).unwrap();
        assert!(h.boundary().max_diff(&x) < 1e-12);
    }

    #[test]
    fn section_round_trip_on_cone() {
        let src = HermComplex::ea(0.3);
        let tgt = HermComplex::ea(-0.4);
        let mut m = BTreeMap::new();
        m.insert(0, real(&[&[1.5]]));
        m.insert(1, real(&[&[1.5 * (-0.4f64).exp() / 0.3f64.exp()]]));
        let f = ChainMap::new(src.clone(), tgt, m).unwrap();
        assert!(f.chain_residual() < 1e-14);
        let ses = SplitSes { incl: cone_inclusion(&f), proj: cone_projection(&f), quotient: src, section: None };
        let out = section_to_map(&ses).unwrap();
        assert_eq!(out.map.max_diff(&f), 0.0);
        assert!(out.residual < 1e-14);
    }
}
