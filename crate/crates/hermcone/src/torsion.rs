//! Determinant-norm invariant τ of acyclic hermitian complexes and the
//! point-level meager / tight decisions built on it.
//!
//! `τ(C) = Σ_i (−1)^i Σ log σ` over the singular values of `d^i: K^i → B^{i+1}`
//! in gram-orthonormal frames, normalized by `τ(e^a) = a`.

use std::collections::BTreeMap;

use crate::hermlin::{cone, hodge_with, ChainMap, HermComplex, Hodge};
use crate::linalg::{c, eye, zeros, CMat, Frame};
use crate::{Error, Result, Tolerances};

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn tau(cx: &HermComplex) -> Result<f64> {
    tau_with(cx, &Tolerances::default())
}

pub fn tau_with(cx: &HermComplex, tol: &Tolerances) -> Result<f64> {
    let h = hodge_with(cx, tol)?;
    tau_from_hodge(&h, tol)
}

/// τ from an already computed splitting.
pub fn tau_from_hodge(h: &Hodge, tol: &Tolerances) -> Result<f64> {
    if let Some((degree, dim)) = h.first_nonzero() {
        return Err(Error::NotAcyclic { degree, dim });
    }
    let mut t = 0.0;
    for (&i, d) in &h.degrees {
        for &s in &d.sigma {
            if s < tol.pd_tol {
                return Err(Error::NearSingular { degree: i, value: s });
            }
            t += sign(i) * s.ln();
        }
    }
    Ok(t)
}

/// Acyclic with `|τ| ≤ tau_tol`. Ambiguous rank decisions surface as errors.
pub fn try_is_meager(cx: &HermComplex, tol: &Tolerances) -> Result<bool> {
    match tau_with(cx, tol) {
        Ok(t) => Ok(t.abs() <= tol.tau_tol),
        Err(Error::NotAcyclic { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

pub fn is_meager(cx: &HermComplex) -> bool {
    is_meager_with(cx, &Tolerances::default())
}

/// An ambiguous or near-singular complex is reported as not meager.
pub fn is_meager_with(cx: &HermComplex, tol: &Tolerances) -> bool {
    try_is_meager(cx, tol).unwrap_or(false)
}

pub fn is_tight(f: &ChainMap) -> bool {
    is_meager(&cone(f))
}

pub fn is_tight_with(f: &ChainMap, tol: &Tolerances) -> bool {
    is_meager_with(&cone(f), tol)
}

/// Roof `C ← M → D` with both legs tight.
#[derive(Clone, Debug)]
pub struct TightRoof {
    pub middle: HermComplex,
    pub left: ChainMap,
    pub right: ChainMap,
}

/// Harmonic projection followed by harmonic inclusion, with one basis
/// vector in degree `k` scaled by `e^t`.
fn harmonic_transfer(c_: &HermComplex, hc: &Hodge, d: &HermComplex, hd: &Hodge, k: Option<i32>, t: f64) -> ChainMap {
    ChainMap::from_fn(c_, d, |i| {
        let a = hc.harmonic(i, c_.dim(i));
        let b = hd.harmonic(i, d.dim(i));
        if a.ncols() == 0 {
            return zeros(d.dim(i), c_.dim(i));
        }
        let mut mid = eye(a.ncols());
        if Some(i) == k {
            mid[(0, 0)] = c(t.exp(), 0.0);
        }
        b * mid * a.adjoint() * c_.gram(i)
    })
    .expect("harmonic transfer shapes")
}

/// Point-level tight roof between two complexes, verified on both legs.
///
/// Acyclic pair: `C ←Id− C −0→ D`, tight iff `τ(C) = τ(D)`. Otherwise the
/// right leg moves harmonics of `C` onto harmonics of `D`, and one basis
/// vector is rescaled so that the cone has `τ = 0`.
pub fn tight_roof(cx: &HermComplex, dx: &HermComplex, tol: &Tolerances) -> Result<Option<TightRoof>> {
    let hc = hodge_with(cx, tol)?;
    let hd = hodge_with(dx, tol)?;
    let lo = cx.lo().min(dx.lo());
    let hi = cx.hi().max(dx.hi());
    if (lo..=hi).any(|i| hc.harmonic_dim(i) != hd.harmonic_dim(i)) {
        return Ok(None);
    }
    let left = ChainMap::identity(cx);
    let right = match (lo..=hi).find(|&i| hc.harmonic_dim(i) > 0) {
        None => ChainMap::zero(cx, dx),
        Some(k) => {
            // τ(cone) is affine in the log-scale with slope ±1
            let t0 = tau_with(&cone(&harmonic_transfer(cx, &hc, dx, &hd, Some(k), 0.0)), tol)?;
            let t1 = tau_with(&cone(&harmonic_transfer(cx, &hc, dx, &hd, Some(k), 1.0)), tol)?;
            let slope = t1 - t0;
            harmonic_transfer(cx, &hc, dx, &hd, Some(k), -t0 / slope)
        }
    };
    if is_tight_with(&left, tol) && is_tight_with(&right, tol) {
        Ok(Some(TightRoof { middle: cx.clone(), left, right }))
    } else {
        Ok(None)
    }
}

/// Joined by a roof with tight legs. Positive answers always carry a
/// verified witness (see [`tight_roof`]).
pub fn tightly_related(cx: &HermComplex, dx: &HermComplex) -> bool {
    matches!(tight_roof(cx, dx, &Tolerances::default()), Ok(Some(_)))
}

/// `(degree, a)` pairs with `Σ (−1)^degree a = τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDecomposition {
    pub terms: Vec<(i32, f64)>,
}

impl GeneratorDecomposition {
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|&(i, a)| sign(i) * a).sum()
    }
}

/// Peel off rank-one `e^a[−n]` subcomplexes from the bottom.
///
/// In the lowest nonzero degree `n` the differential is injective. Take the
/// coordinate vector `v` of largest gram norm, emit `log(‖dv‖/‖v‖)`, and pass
/// to the quotient by `span{v} → span{dv}` carrying the metric of the
/// orthogonal complements.
pub fn reduce_to_generators(cx: &HermComplex) -> Result<GeneratorDecomposition> {
    reduce_with(cx, &Tolerances::default())
}

pub fn reduce_with(cx: &HermComplex, tol: &Tolerances) -> Result<GeneratorDecomposition> {
    let h = hodge_with(cx, tol)?;
    if let Some((degree, dim)) = h.first_nonzero() {
        return Err(Error::NotAcyclic { degree, dim });
    }
    let mut grams: BTreeMap<i32, CMat> = cx.degrees().map(|i| (i, cx.gram(i))).collect();
    let mut diffs: BTreeMap<i32, CMat> = cx.degrees().map(|i| (i, cx.diff(i))).collect();
    let dim = |g: &BTreeMap<i32, CMat>, i: i32| g.get(&i).map_or(0, |m| m.nrows());
    let mut terms = Vec::new();
    while let Some(n) = cx.degrees().find(|&i| dim(&grams, i) > 0) {
        let g0 = grams[&n].clone();
        let g1 = grams.get(&(n + 1)).cloned().unwrap_or_else(|| zeros(0, 0));
        let d = diffs[&n].clone();
        let j = (0..g0.nrows())
            .max_by(|&a, &b| g0[(a, a)].re.partial_cmp(&g0[(b, b)].re).unwrap().then(b.cmp(&a)))
            .unwrap();
        let nv = g0[(j, j)].re.sqrt();
        let dv = d.column(j).into_owned();
        let ndv = (dv.adjoint() * &g1 * &dv)[(0, 0)].re.max(0.0).sqrt();
        if g1.nrows() == 0 || ndv < tol.pd_tol * nv.max(1.0) {
            return Err(Error::RankCollapse { degree: n });
        }
        terms.push((n, (ndv / nv).ln()));
        // orthonormal bases of v^⊥ ⊂ E^n and (dv)^⊥ ⊂ E^{n+1}
        let mut ev = zeros(g0.nrows(), 1);
        ev[(j, 0)] = c(1.0, 0.0);
        let q0 = gram_complement(&g0, &ev);
        let q1 = gram_complement(&g1, &CMat::from_column_slice(g1.nrows(), 1, dv.as_slice()));
        let new_d = q1.adjoint() * &g1 * &d * &q0;
        grams.insert(n, eye(q0.ncols()));
        grams.insert(n + 1, eye(q1.ncols()));
        diffs.insert(n, new_d);
        if let Some(dn1) = diffs.get(&(n + 1)).cloned() {
            diffs.insert(n + 1, dn1 * &q1);
        }
        if let Some(dm) = diffs.get(&(n - 1)).cloned() {
            diffs.insert(n - 1, zeros(q0.ncols(), dm.ncols()));
        }
    }
    Ok(GeneratorDecomposition { terms })
}

/// Gram-orthonormal basis of the gram-orthogonal complement of `span(w)`.
fn gram_complement(g: &CMat, w: &CMat) -> CMat {
    let n = g.nrows();
    let fr = Frame::new(g, 0.0).expect("positive definite gram");
    let wt = &fr.to_orth * w;
    let nw = wt.norm();
    let q = wt / c(nw, 0.0);
    let comp = crate::linalg::orth_complement(&q, n);
    &fr.from_orth * comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{direct_sum, shift, HermComplex};
    use crate::linalg::{real, scalar_mat};

    /// Ray–Singer style oracle: `−½ Σ (−1)^i i log det Δ_i` with the gram adjoint.
    pub(crate) fn ray_singer(cx: &HermComplex) -> f64 {
        let mut t = 0.0;
        for i in cx.degrees() {
            let g = cx.gram(i);
            let gi = g.clone().try_inverse().unwrap();
            let d = cx.diff(i);
            let dm = cx.diff(i - 1);
            let up = &gi * d.adjoint() * cx.gram(i + 1) * &d;
            let down = if cx.dim(i - 1) > 0 { &dm * cx.gram(i - 1).try_inverse().unwrap() * dm.adjoint() * &g } else { zeros(g.nrows(), g.nrows()) };
            let lap = up + down;
            if lap.nrows() == 0 {
                continue;
            }
            let ld = crate::linalg::log_abs_det(&lap);
            t += -0.5 * sign(i) * i as f64 * ld;
        }
        t
    }

    #[test]
    fn ea_anchor() {
        for a in [-2.0, -0.5, 0.0, 1.0, 3.5] {
            assert!((tau(&HermComplex::ea(a)).unwrap() - a).abs() < 1e-12);
            assert!((ray_singer(&HermComplex::ea(a)) - a).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_and_sum() {
        let e = direct_sum(&HermComplex::ea(0.4), &shift(&HermComplex::ea(1.1), -3));
        let t = tau(&e).unwrap();
        assert!((t - (0.4 - 1.1)).abs() < 1e-12);
        assert!((tau(&shift(&e, 1)).unwrap() + t).abs() < 1e-12);
        assert!((ray_singer(&e) - t).abs() < 1e-10);
    }

    #[test]
    fn non_acyclic_rejected() {
        let cx = HermComplex::single(0, eye(2));
        assert!(matches!(tau(&cx), Err(Error::NotAcyclic { degree: 0, dim: 2 })));
        assert!(!is_meager(&cx));
        assert_eq!(tau(&HermComplex::zero()).unwrap(), 0.0);
    }

    #[test]
    fn three_term_matches_oracle() {
        let g0 = real(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let g1 = real(&[&[1.0, 0.1, 0.0], &[0.1, 3.0, 0.2], &[0.0, 0.2, 0.5]]);
        let g2 = scalar_mat(c(0.7, 0.0));
        let d0 = real(&[&[1.0, 0.0], &[0.5, 2.0], &[1.0, 1.0]]);
        // d1 kills the image of d0
        let k = d0.adjoint();
        let v = crate::linalg::null_space(&k, 1e-12);
        let d1 = v.adjoint();
        let cx = HermComplex::from_parts(0, vec![g0, g1, g2], vec![d0, d1]).unwrap();
        let t = tau(&cx).unwrap();
        assert!((t - ray_singer(&cx)).abs() < 1e-10, "{t} vs {}", ray_singer(&cx));
        let r = reduce_to_generators(&cx).unwrap();
        assert_eq!(r.terms.len(), 3);
        assert!((r.total() - t).abs() < 1e-10);
    }

    #[test]
    fn generators_of_ea() {
        let r = reduce_to_generators(&HermComplex::ea(0.8)).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].0, 0);
        assert!((r.terms[0].1 - 0.8).abs() < 1e-14);
        let s = reduce_to_generators(&direct_sum(&HermComplex::ea(0.8), &HermComplex::ea(-0.3))).unwrap();
        assert!((s.total() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tightness_examples() {
        let v = HermComplex::single(0, eye(3));
        assert!(is_tight(&ChainMap::identity(&v)));
        // r·Id from ‖1‖ = 1 to ‖1‖ = 1/r
        let r = 2.5;
        let a = HermComplex::single(0, eye(1));
        let b = HermComplex::single(0, scalar_mat(c(1.0 / (r * r), 0.0)));
        let f = ChainMap::from_fn(&a, &b, |_| scalar_mat(c(r, 0.0))).unwrap();
        assert!(is_tight(&f));
        let ea = ChainMap::from_fn(&a, &a, |_| scalar_mat(c(0.7f64.exp(), 0.0))).unwrap();
        assert!(!is_tight(&ea));
        assert!(tightly_related(&a, &b));
        let w = tight_roof(&a, &b, &Tolerances::default()).unwrap().unwrap();
        assert!(is_tight(&w.right));
    }

    #[test]
    fn related_acyclic() {
        assert!(!tightly_related(&HermComplex::ea(0.2), &HermComplex::ea(0.5)));
        assert!(tightly_related(&HermComplex::ea(0.2), &shift(&HermComplex::ea(-0.2), 1)));
        let c2 = HermComplex::single(1, real(&[&[2.0, 0.5], &[0.5, 1.0]]));
        let m = crate::hermlin::cone(&ChainMap::identity(&HermComplex::single(0, eye(2))));
        assert!(tightly_related(&c2, &direct_sum(&c2, &m)));
        assert!(!tightly_related(&c2, &HermComplex::single(0, eye(2))));
    }
}
