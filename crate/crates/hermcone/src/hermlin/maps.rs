use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::json::{RawHomotopy, RawMaps};
use super::HermComplex;
use crate::linalg::{frob, zeros, CMat, C64};
use crate::{Error, Result, Tolerances};

/// Degree-preserving map of complexes (chain property is checked on demand).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaps", into = "RawMaps")]
pub struct ChainMap {
    source: HermComplex,
    target: HermComplex,
    maps: BTreeMap<i32, CMat>,
}

fn check_shapes(maps: &BTreeMap<i32, CMat>, rows: impl Fn(i32) -> usize, cols: impl Fn(i32) -> usize) -> Result<()> {
    for (&i, m) in maps {
        if m.shape() != (rows(i), cols(i)) {
            return Err(Error::Shape(format!(
                "map in degree {i} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                rows(i),
                cols(i)
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid(format!("non-finite entry in degree {i}")));
        }
    }
    Ok(())
}

impl ChainMap {
    pub fn new(source: HermComplex, target: HermComplex, maps: BTreeMap<i32, CMat>) -> Result<ChainMap> {
        check_shapes(&maps, |i| target.dim(i), |i| source.dim(i))?;
        let maps = maps.into_iter().filter(|(_, m)| m.nrows() > 0 && m.ncols() > 0).collect();
        Ok(ChainMap { source, target, maps })
    }

    pub fn from_fn(source: &HermComplex, target: &HermComplex, mut f: impl FnMut(i32) -> CMat) -> Result<ChainMap> {
        let lo = source.lo().max(target.lo());
        let hi = source.hi().min(target.hi());
        let maps = (lo..=hi).map(|i| (i, f(i))).collect();
        ChainMap::new(source.clone(), target.clone(), maps)
    }

    pub fn identity(c: &HermComplex) -> ChainMap {
        ChainMap::from_fn(c, c, |i| CMat::identity(c.dim(i), c.dim(i))).unwrap()
    }

    pub fn zero(source: &HermComplex, target: &HermComplex) -> ChainMap {
        ChainMap { source: source.clone(), target: target.clone(), maps: BTreeMap::new() }
    }

    pub fn source(&self) -> &HermComplex {
        &self.source
    }

    pub fn target(&self) -> &HermComplex {
        &self.target
    }

    pub fn maps(&self) -> &BTreeMap<i32, CMat> {
        &self.maps
    }

    pub fn map(&self, i: i32) -> CMat {
        self.maps.get(&i).cloned().unwrap_or_else(|| zeros(self.target.dim(i), self.source.dim(i)))
    }

    /// Same matrices, endpoints replaced by complexes of the same shape
    /// (typically the same differentials with other metrics).
    pub fn with_endpoints(&self, source: &HermComplex, target: &HermComplex) -> Result<ChainMap> {
        if !source.same_shape(&self.source) || !target.same_shape(&self.target) {
            return Err(Error::Shape("replacement endpoints change dimensions".into()));
        }
        ChainMap::new(source.clone(), target.clone(), self.maps.clone())
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &ChainMap) -> Result<ChainMap> {
        if !f.target.same_shape(&self.source) {
            return Err(Error::Mismatch("composition endpoints differ in shape".into()));
        }
        let lo = f.source.lo().max(self.target.lo());
        let hi = f.source.hi().min(self.target.hi());
        let maps = (lo..=hi).map(|i| (i, self.map(i) * f.map(i))).collect();
        ChainMap::new(f.source.clone(), self.target.clone(), maps)
    }

    pub fn scale(&self, s: C64) -> ChainMap {
        let maps = self.maps.iter().map(|(&i, m)| (i, m * s)).collect();
        ChainMap { source: self.source.clone(), target: self.target.clone(), maps }
    }

    pub fn neg(&self) -> ChainMap {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        if !self.source.same_shape(&other.source) || !self.target.same_shape(&other.target) {
            return Err(Error::Mismatch("sum of maps with different endpoints".into()));
        }
        let lo = self.source.lo().max(self.target.lo()).min(other.source.lo().max(other.target.lo()));
        let hi = self.source.hi().min(self.target.hi()).max(other.source.hi().min(other.target.hi()));
        let maps = (lo..=hi).map(|i| (i, self.map(i) + other.map(i))).collect();
        ChainMap::new(self.source.clone(), self.target.clone(), maps)
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.add(&other.neg())
    }

    pub fn degree_span(&self) -> std::ops::RangeInclusive<i32> {
        let lo = self.source.lo().min(self.target.lo()) - 1;
        let hi = self.source.hi().max(self.target.hi()) + 1;
        lo..=hi
    }

    /// Largest residual of `d∘f − f∘d` over degrees, relative to the overall
    /// size of `f` and the differentials (a single degree where `f` is
    /// numerically zero would otherwise turn rounding noise into O(1)).
    /// Sizes below 1 count as 1, so a map that is zero up to rounding passes.
    pub fn chain_residual(&self) -> f64 {
        let span = self.degree_span();
        let fmax = span.clone().map(|i| frob(&self.map(i))).fold(0.0, f64::max);
        let dmax = span
            .clone()
            .map(|i| frob(&self.target.diff(i)).max(frob(&self.source.diff(i))))
            .fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in span {
            let lhs = self.target.diff(i) * self.map(i);
            let rhs = self.map(i + 1) * self.source.diff(i);
            let num = frob(&(&lhs - &rhs));
            if num == 0.0 {
                continue;
            }
            worst = worst.max(num / (fmax.max(1.0) * dmax.max(1.0)));
        }
        worst
    }

    pub fn is_chain_map(&self, tol: &Tolerances) -> bool {
        self.chain_residual() <= tol.chain_tol
    }

    /// Largest entrywise difference to another map with the same shape.
    pub fn max_diff(&self, other: &ChainMap) -> f64 {
        self.degree_span().map(|i| crate::linalg::max_abs(&(self.map(i) - other.map(i)))).fold(0.0, f64::max)
    }
}

/// Degree −1 map `h^i: S^i → T^{i−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHomotopy", into = "RawHomotopy")]
pub struct Homotopy {
    source: HermComplex,
    target: HermComplex,
    maps: BTreeMap<i32, CMat>,
}

impl Homotopy {
    pub fn new(source: HermComplex, target: HermComplex, maps: BTreeMap<i32, CMat>) -> Result<Homotopy> {
        check_shapes(&maps, |i| target.dim(i - 1), |i| source.dim(i))?;
        let maps = maps.into_iter().filter(|(_, m)| m.nrows() > 0 && m.ncols() > 0).collect();
        Ok(Homotopy { source, target, maps })
    }

    pub fn zero(source: &HermComplex, target: &HermComplex) -> Homotopy {
        Homotopy { source: source.clone(), target: target.clone(), maps: BTreeMap::new() }
    }

    pub fn source(&self) -> &HermComplex {
        &self.source
    }

    pub fn target(&self) -> &HermComplex {
        &self.target
    }

    pub fn maps(&self) -> &BTreeMap<i32, CMat> {
        &self.maps
    }

    pub fn map(&self, i: i32) -> CMat {
        self.maps.get(&i).cloned().unwrap_or_else(|| zeros(self.target.dim(i - 1), self.source.dim(i)))
    }

    /// The null-homotopic chain map `d∘h + h∘d`.
    pub fn boundary(&self) -> ChainMap {
        let lo = self.source.lo().min(self.target.lo());
        let hi = self.source.hi().max(self.target.hi());
        let maps = (lo..=hi)
            .map(|i| (i, self.target.diff(i - 1) * self.map(i) + self.map(i + 1) * self.source.diff(i)))
            .collect();
        ChainMap::new(self.source.clone(), self.target.clone(), maps).expect("shapes follow from endpoints")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};

    #[test]
    fn identity_is_chain() {
        let e = HermComplex::ea(0.3);
        let id = ChainMap::identity(&e);
        assert_eq!(id.chain_residual(), 0.0);
        let comp = id.compose(&id).unwrap();
        assert_eq!(comp, id);
    }

    #[test]
    fn non_chain_detected() {
        let e = HermComplex::ea(0.0);
        let mut m = BTreeMap::new();
        m.insert(0, real(&[&[1.0]]));
        m.insert(1, real(&[&[2.0]]));
        let f = ChainMap::new(e.clone(), e, m).unwrap();
        assert!(f.chain_residual() > 0.1);
    }

    #[test]
    fn homotopy_boundary_is_chain() {
        let e = HermComplex::ea(0.4);
        let mut m = BTreeMap::new();
        m.insert(1, CMat::from_element(1, 1, c(0.5, 0.25)));
        let h = Homotopy::new(e.clone(), e, m).unwrap();
        assert!(h.boundary().chain_residual() < 1e-15);
    }
}
