//! Hodge splitting `E^i = B^i ⊥ H^i ⊥ K^i` computed in orthonormal frames of
//! the Grams. In frame coordinates each differential is an ordinary matrix
//! whose SVD yields K, B and the singular values of `d: K^i → B^{i+1}`.

use std::collections::BTreeMap;

use super::{ChainMap, HermComplex};
use crate::linalg::{col_basis, orth_complement, rank_of, svd, zeros, CMat, Frame, Rank};
use crate::{Error, Result, Tolerances};

#[derive(Clone, Debug)]
pub struct DegreeHodge {
    pub frame: Frame,
    /// Gram-orthonormal basis of `im d^{i−1}`.
    pub exact: CMat,
    /// Gram-orthonormal basis of the harmonic space.
    pub harmonic: CMat,
    /// Gram-orthonormal basis of `(ker d^i)^⊥`.
    pub coexact: CMat,
    /// Singular values of `d^i: K^i → B^{i+1}` (descending).
    pub sigma: Vec<f64>,
    /// Generalized inverse `d^+: E^{i+1} → E^i` (zero on `(B^{i+1})^⊥`).
    pub pinv: CMat,
}

#[derive(Clone, Debug)]
pub struct Hodge {
    pub degrees: BTreeMap<i32, DegreeHodge>,
}

impl Hodge {
    pub fn get(&self, i: i32) -> Option<&DegreeHodge> {
        self.degrees.get(&i)
    }

    pub fn harmonic(&self, i: i32, dim: usize) -> CMat {
        self.degrees.get(&i).map_or_else(|| zeros(dim, 0), |d| d.harmonic.clone())
    }

    pub fn harmonic_dim(&self, i: i32) -> usize {
        self.degrees.get(&i).map_or(0, |d| d.harmonic.ncols())
    }

    pub fn is_acyclic(&self) -> bool {
        self.degrees.values().all(|d| d.harmonic.ncols() == 0)
    }

    /// First degree with nonzero cohomology.
    pub fn first_nonzero(&self) -> Option<(i32, usize)> {
        self.degrees.iter().find(|(_, d)| d.harmonic.ncols() > 0).map(|(&i, d)| (i, d.harmonic.ncols()))
    }

    /// `d^+` as a map `E^{i+1} → E^i` (zero matrix outside the support).
    pub fn pinv(&self, cx: &HermComplex, i: i32) -> CMat {
        self.degrees.get(&i).map_or_else(|| zeros(cx.dim(i), cx.dim(i + 1)), |d| d.pinv.clone())
    }

    /// Orthogonal projector onto harmonics in degree `i`.
    pub fn harmonic_projector(&self, cx: &HermComplex, i: i32) -> CMat {
        let h = self.harmonic(i, cx.dim(i));
        &h * h.adjoint() * cx.gram(i)
    }
}

pub fn hodge_decompose(cx: &HermComplex) -> Result<Hodge> {
    hodge_with(cx, &Tolerances::default())
}

thread_local! {
    static CACHE: std::cell::RefCell<std::collections::HashMap<u64, Vec<(HermComplex, Hodge)>>> =
        std::cell::RefCell::new(std::collections::HashMap::new());
}

const CACHE_CAP: usize = 512;

fn cache_key(cx: &HermComplex, tol: &Tolerances) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (cx.lo(), cx.hi()).hash(&mut h);
    for x in [tol.pd_tol, tol.rank_rel, tol.rank_floor] {
        x.to_bits().hash(&mut h);
    }
    let mut mat = |i: i32, m: &CMat| {
        (i, m.nrows(), m.ncols()).hash(&mut h);
        for z in m.iter() {
            (z.re.to_bits(), z.im.to_bits()).hash(&mut h);
        }
    };
    for (&i, sp) in cx.spaces() {
        mat(i, &sp.gram);
    }
    for (&i, d) in cx.diffs() {
        mat(i, d);
    }
    h.finish()
}

/// Hodge splitting, memoized per thread on the exact contents of `cx`
/// (the same complexes are decomposed many times by the derived layer).
pub fn hodge_with(cx: &HermComplex, tol: &Tolerances) -> Result<Hodge> {
    let key = cache_key(cx, tol);
    let hit = CACHE.with(|c| c.borrow().get(&key).and_then(|v| v.iter().find(|(k, _)| k == cx).map(|(_, h)| h.clone())));
    if let Some(h) = hit {
        return Ok(h);
    }
    let h = compute_hodge(cx, tol)?;
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_CAP {
            c.clear();
        }
        c.entry(key).or_default().push((cx.clone(), h.clone()));
    });
    Ok(h)
}

fn compute_hodge(cx: &HermComplex, tol: &Tolerances) -> Result<Hodge> {
    let mut frames = BTreeMap::new();
    for i in cx.degrees() {
        let f = Frame::new(&cx.gram(i), tol.pd_tol)
            .ok_or_else(|| Error::Invalid(format!("gram in degree {i} is not positive definite")))?;
        frames.insert(i, f);
    }
    // (K basis, B^{i+1} basis, sigma, pinv) in frame coordinates
    let mut k_orth = BTreeMap::new();
    let mut b_orth: BTreeMap<i32, CMat> = BTreeMap::new();
    let mut sigmas = BTreeMap::new();
    let mut pinvs = BTreeMap::new();
    for i in cx.degrees() {
        let n0 = cx.dim(i);
        let n1 = cx.dim(i + 1);
        let dt = if i < cx.hi() {
            &frames[&(i + 1)].to_orth * cx.diff(i) * &frames[&i].from_orth
        } else {
            zeros(0, n0)
        };
        let d = svd(&dt);
        let r = match rank_of(&d.s, tol.rank_rel, tol.rank_floor) {
            Rank::Clear(r) => r,
            Rank::Ambiguous { value, threshold } => return Err(Error::AmbiguousRank { degree: i, value, threshold }),
        };
        let vk = d.v.columns(0, r).into_owned();
        let ub = d.u.columns(0, r).into_owned();
        let mut pinv_t = zeros(n0, n1);
        for k in 0..r {
            pinv_t += d.v.column(k) * d.u.column(k).adjoint() / crate::linalg::c(d.s[k], 0.0);
        }
        let pinv = if i < cx.hi() {
            &frames[&i].from_orth * pinv_t * &frames[&(i + 1)].to_orth
        } else {
            zeros(n0, 0)
        };
        k_orth.insert(i, vk);
        b_orth.insert(i + 1, ub);
        sigmas.insert(i, d.s[..r].to_vec());
        pinvs.insert(i, pinv);
    }
    let mut degrees = BTreeMap::new();
    for i in cx.degrees() {
        let n = cx.dim(i);
        let fr = &frames[&i];
        let k = &k_orth[&i];
        let b = b_orth.get(&i).cloned().unwrap_or_else(|| zeros(n, 0));
        // kernel of d^i in frame coordinates
        let z = orth_complement(k, n);
        if z.ncols() < b.ncols() {
            return Err(Error::Invalid(format!("degree {i}: image exceeds kernel (d∘d ≠ 0?)")));
        }
        let m = z.adjoint() * &b;
        let q = col_basis(&m, b.ncols());
        let h = &z * orth_complement(&q, z.ncols());
        degrees.insert(
            i,
            DegreeHodge {
                exact: &fr.from_orth * &b,
                harmonic: &fr.from_orth * h,
                coexact: &fr.from_orth * k,
                sigma: sigmas[&i].clone(),
                pinv: pinvs[&i].clone(),
                frame: fr.clone(),
            },
        );
    }
    Ok(Hodge { degrees })
}

#[derive(Clone, Debug)]
pub struct CohomologyDegree {
    pub degree: i32,
    pub dim: usize,
    /// Gram-orthonormal harmonic basis.
    pub harmonic: CMat,
    /// Canonical basis (see [`canonical_basis`]) and the Gram restricted to it.
    pub canonical: CMat,
    pub canonical_gram: CMat,
}

#[derive(Clone, Debug)]
pub struct CohomologyReport {
    pub degrees: Vec<CohomologyDegree>,
}

impl CohomologyReport {
    pub fn dims(&self) -> Vec<(i32, usize)> {
        self.degrees.iter().map(|d| (d.degree, d.dim)).collect()
    }

    pub fn dim(&self, i: i32) -> usize {
        self.degrees.iter().find(|d| d.degree == i).map_or(0, |d| d.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(|d| d.dim == 0)
    }
}

/// Harmonic representatives `P e_j` of coordinate vectors, kept greedily
/// while linearly independent. For a complex with zero differential this is
/// the coordinate basis itself.
pub fn canonical_basis(cx: &HermComplex, hodge: &Hodge, i: i32) -> CMat {
    let n = cx.dim(i);
    let h = hodge.harmonic_dim(i);
    let p = hodge.harmonic_projector(cx, i);
    let g = cx.gram(i);
    let mut kept: Vec<nalgebra::DVector<crate::linalg::C64>> = Vec::new();
    let mut ortho: Vec<nalgebra::DVector<crate::linalg::C64>> = Vec::new();
    for j in 0..n {
        if kept.len() == h {
            break;
        }
        let v = p.column(j).into_owned();
        let mut r = v.clone();
        for o in &ortho {
            let coef = (o.adjoint() * &g * &r)[(0, 0)];
            r -= o * coef;
        }
        let nr = (r.adjoint() * &g * &r)[(0, 0)].re.max(0.0).sqrt();
        let nv = (v.adjoint() * &g * &v)[(0, 0)].re.max(0.0).sqrt();
        if nr > 1e-6 * nv.max(1e-300) && nr > 1e-12 {
            ortho.push(r / crate::linalg::c(nr, 0.0));
            kept.push(v);
        }
    }
    let mut b = zeros(n, kept.len());
    for (k, v) in kept.iter().enumerate() {
        b.set_column(k, v);
    }
    b
}

pub fn cohomology(cx: &HermComplex) -> Result<CohomologyReport> {
    let hodge = hodge_decompose(cx)?;
    Ok(cohomology_from(cx, &hodge))
}

pub fn cohomology_from(cx: &HermComplex, hodge: &Hodge) -> CohomologyReport {
    let degrees = cx
        .degrees()
        .map(|i| {
            let harmonic = hodge.harmonic(i, cx.dim(i));
            let canonical = canonical_basis(cx, hodge, i);
            let canonical_gram = canonical.adjoint() * cx.gram(i) * &canonical;
            CohomologyDegree { degree: i, dim: harmonic.ncols(), harmonic, canonical, canonical_gram }
        })
        .collect();
    CohomologyReport { degrees }
}

/// Induced map on cohomology in harmonic orthonormal bases, per degree.
pub fn induced_blocks(f: &ChainMap, hs: &Hodge, ht: &Hodge) -> BTreeMap<i32, CMat> {
    let (s, t) = (f.source(), f.target());
    let lo = s.lo().min(t.lo());
    let hi = s.hi().max(t.hi());
    (lo..=hi)
        .filter_map(|i| {
            let a = hs.harmonic(i, s.dim(i));
            let b = ht.harmonic(i, t.dim(i));
            if a.ncols() == 0 && b.ncols() == 0 {
                return None;
            }
            Some((i, b.adjoint() * t.gram(i) * f.map(i) * a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye, frob, real, CMat};

    #[test]
    fn ea_is_all_k_and_b() {
        let e = HermComplex::ea(0.7);
        let h = hodge_decompose(&e).unwrap();
        assert_eq!(h.get(0).unwrap().coexact.ncols(), 1);
        assert_eq!(h.get(1).unwrap().exact.ncols(), 1);
        assert!(h.is_acyclic());
        assert!((h.get(0).unwrap().sigma[0] - 0.7f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn zero_differential_all_harmonic() {
        let g = real(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let cx = HermComplex::from_parts(0, vec![g.clone(), eye(1)], vec![CMat::zeros(1, 2)]).unwrap();
        let co = cohomology(&cx).unwrap();
        assert_eq!(co.dims(), vec![(0, 2), (1, 1)]);
        assert!(frob(&(&co.degrees[0].canonical - eye(2))) < 1e-12);
        assert!(frob(&(&co.degrees[0].canonical_gram - &g)) < 1e-12);
    }

    #[test]
    fn reconstruction() {
        let g0 = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.2, 0.4), c(0.2, -0.4), c(1.0, 0.0)]);
        let g1 = real(&[&[1.5, 0.1], &[0.1, 0.8]]);
        let d = real(&[&[1.0, 2.0], &[0.5, 1.0]]);
        let cx = HermComplex::from_parts(0, vec![g0, g1], vec![d]).unwrap();
        let h = hodge_decompose(&cx).unwrap();
        for i in cx.degrees() {
            let dh = h.get(i).unwrap();
            let w = crate::linalg::hstack(&crate::linalg::hstack(&dh.exact, &dh.harmonic), &dh.coexact);
            assert_eq!(w.ncols(), cx.dim(i));
            let winv = w.clone().try_inverse().unwrap();
            let rebuilt = winv.adjoint() * &winv;
            assert!(frob(&(rebuilt - cx.gram(i))) < 1e-10);
        }
        assert_eq!(h.harmonic_dim(0), 1);
        assert_eq!(h.harmonic_dim(1), 1);
    }
}
