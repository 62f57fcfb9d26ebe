//! Graded linear maps between cohomologies, written in the gram-orthonormal
//! harmonic bases that `hodge_decompose` returns. Over a point a derived
//! morphism is nothing more than such a map.

use std::collections::BTreeMap;

use crate::hermlin::{hodge_with, induced_blocks, ChainMap, HermComplex, Hodge};
use crate::linalg::{frob, rank_of, svd, zeros, CMat, Rank};
use crate::{Error, Result, Tolerances};

pub type Dims = BTreeMap<i32, usize>;

pub fn harmonic_dims(h: &Hodge) -> Dims {
    h.degrees.iter().filter(|(_, d)| d.harmonic.ncols() > 0).map(|(&i, d)| (i, d.harmonic.ncols())).collect()
}

pub fn cohomology_dims(cx: &HermComplex) -> Result<Dims> {
    Ok(harmonic_dims(&hodge_with(cx, &Tolerances::default())?))
}

fn get(d: &Dims, i: i32) -> usize {
    d.get(&i).copied().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohoMap {
    pub source: Dims,
    pub target: Dims,
    /// Block `i` is `dim H^i(target) × dim H^i(source)`; absent blocks are zero.
    pub blocks: BTreeMap<i32, CMat>,
}

impl CohoMap {
    pub fn new(source: Dims, target: Dims, blocks: BTreeMap<i32, CMat>) -> Result<CohoMap> {
        for (&i, b) in &blocks {
            if b.shape() != (get(&target, i), get(&source, i)) {
                return Err(Error::Shape(format!("cohomology block {i} has shape {:?}", b.shape())));
            }
        }
        let blocks = blocks.into_iter().filter(|(_, b)| b.nrows() > 0 && b.ncols() > 0).collect();
        Ok(CohoMap { source, target, blocks })
    }

    pub fn identity(d: &Dims) -> CohoMap {
        let blocks = d.iter().map(|(&i, &n)| (i, CMat::identity(n, n))).collect();
        CohoMap { source: d.clone(), target: d.clone(), blocks }
    }

    pub fn zero(source: &Dims, target: &Dims) -> CohoMap {
        CohoMap { source: source.clone(), target: target.clone(), blocks: BTreeMap::new() }
    }

    /// Map induced by a chain map.
    pub fn of(f: &ChainMap) -> Result<CohoMap> {
        let tol = Tolerances::default();
        let hs = hodge_with(f.source(), &tol)?;
        let ht = hodge_with(f.target(), &tol)?;
        Ok(CohoMap::of_with(f, &hs, &ht))
    }

    pub fn of_with(f: &ChainMap, hs: &Hodge, ht: &Hodge) -> CohoMap {
        let (source, target) = (harmonic_dims(hs), harmonic_dims(ht));
        let blocks = induced_blocks(f, hs, ht).into_iter().filter(|(_, b)| b.nrows() > 0 && b.ncols() > 0).collect();
        CohoMap { source, target, blocks }
    }

    pub fn degrees(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.source.keys().chain(self.target.keys()).copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn block(&self, i: i32) -> CMat {
        self.blocks.get(&i).cloned().unwrap_or_else(|| zeros(get(&self.target, i), get(&self.source, i)))
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &CohoMap) -> Result<CohoMap> {
        if first.target != self.source {
            return Err(Error::Mismatch(format!(
                "cohomology dims {:?} vs {:?}",
                first.target, self.source
            )));
        }
        let blocks = first.degrees().into_iter().chain(self.degrees()).map(|i| (i, self.block(i) * first.block(i))).collect();
        CohoMap::new(first.source.clone(), self.target.clone(), blocks)
    }

    pub fn add(&self, other: &CohoMap) -> Result<CohoMap> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Mismatch("adding maps with different endpoints".into()));
        }
        let blocks = self.degrees().into_iter().map(|i| (i, self.block(i) + other.block(i))).collect();
        CohoMap::new(self.source.clone(), self.target.clone(), blocks)
    }

    pub fn scale(&self, s: f64) -> CohoMap {
        let blocks = self.blocks.iter().map(|(&i, b)| (i, b * crate::linalg::c(s, 0.0))).collect();
        CohoMap { source: self.source.clone(), target: self.target.clone(), blocks }
    }

    /// Square blocks, none of them numerically singular.
    pub fn is_iso(&self) -> bool {
        self.source == self.target && self.degrees().into_iter().all(|i| {
            let b = self.block(i);
            let d = svd(&b);
            let smax = d.s.first().copied().unwrap_or(0.0);
            d.s.len() == b.nrows() && d.s.iter().all(|&s| s > 1e-8 * smax.max(1.0) && s > 0.0)
        })
    }

    pub fn inverse(&self) -> Result<CohoMap> {
        if !self.is_iso() {
            return Err(Error::NotQuasiIso(format!("cohomology map {:?} → {:?} is not invertible", self.source, self.target)));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|(&i, b)| (i, b.clone().try_inverse().expect("checked invertible")))
            .collect();
        Ok(CohoMap { source: self.target.clone(), target: self.source.clone(), blocks })
    }

    /// Numerical rank of each block.
    pub fn ranks(&self, tol: &Tolerances) -> BTreeMap<i32, usize> {
        self.degrees()
            .into_iter()
            .map(|i| {
                let d = svd(&self.block(i));
                // ambiguous ranks are resolved downward, callers compare
                // against exactness and report failures
                let r = match rank_of(&d.s, tol.rank_rel, tol.rank_floor.max(1e-10)) {
                    Rank::Clear(r) => r,
                    Rank::Ambiguous { .. } => d.s.iter().filter(|&&s| s > 1e-6).count(),
                };
                (i, r)
            })
            .collect()
    }

    /// Largest blockwise Frobenius difference, relative to unit scale.
    pub fn distance(&self, other: &CohoMap) -> f64 {
        if self.source != other.source || self.target != other.target {
            return f64::INFINITY;
        }
        self.degrees()
            .into_iter()
            .map(|i| frob(&(self.block(i) - other.block(i))) / (1.0 + frob(&self.block(i))))
            .fold(0.0, f64::max)
    }

    /// `Σ (−1)^i log|det φ_i|` for an isomorphism between orthonormal bases.
    pub fn log_det(&self) -> Result<f64> {
        if !self.is_iso() {
            return Err(Error::NotQuasiIso("log det of a singular cohomology map".into()));
        }
        Ok(self
            .blocks
            .iter()
            .map(|(&i, b)| {
                let s: f64 = svd(b).s.iter().map(|x| x.ln()).sum();
                if i.rem_euclid(2) == 0 {
                    s
                } else {
                    -s
                }
            })
            .sum())
    }
}

/// Chain map `S → T` realizing `φ`: harmonic projection, `φ`, harmonic inclusion.
pub fn realize(s: &HermComplex, t: &HermComplex, phi: &CohoMap) -> Result<ChainMap> {
    let tol = Tolerances::default();
    let hs = hodge_with(s, &tol)?;
    let ht = hodge_with(t, &tol)?;
    realize_with(s, &hs, t, &ht, phi)
}

pub fn realize_with(s: &HermComplex, hs: &Hodge, t: &HermComplex, ht: &Hodge, phi: &CohoMap) -> Result<ChainMap> {
    if harmonic_dims(hs) != phi.source || harmonic_dims(ht) != phi.target {
        return Err(Error::Mismatch("cohomology map does not fit the complexes".into()));
    }
    ChainMap::from_fn(s, t, |i| {
        let a = hs.harmonic(i, s.dim(i));
        let b = ht.harmonic(i, t.dim(i));
        if a.ncols() == 0 || b.ncols() == 0 {
            return zeros(t.dim(i), s.dim(i));
        }
        b * phi.block(i) * a.adjoint() * s.gram(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{case_rng, random_complex, random_invertible};

    #[test]
    fn realize_round_trip() {
        let mut r = case_rng(5, 0);
        for _ in 0..10 {
            let s = random_complex(&mut r, 3, 3);
            let d = cohomology_dims(&s).unwrap();
            let blocks = d.iter().map(|(&i, &n)| (i, random_invertible(&mut r, n))).collect();
            let phi = CohoMap::new(d.clone(), d.clone(), blocks).unwrap();
            let f = realize(&s, &s, &phi).unwrap();
            assert!(f.chain_residual() < 1e-12);
            assert!(CohoMap::of(&f).unwrap().distance(&phi) < 1e-10);
            let inv = phi.inverse().unwrap();
            assert!(inv.after(&phi).unwrap().distance(&CohoMap::identity(&d)) < 1e-10);
        }
    }

    #[test]
    fn singular_not_iso() {
        let d: Dims = [(0, 2)].into_iter().collect();
        let z = CohoMap::zero(&d, &d);
        assert!(!z.is_iso());
        assert!(z.inverse().is_err());
        assert!(CohoMap::identity(&d).is_iso());
    }
}
