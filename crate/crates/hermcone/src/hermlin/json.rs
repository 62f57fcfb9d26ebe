//! JSON shapes. Matrices are row-major arrays of `[re, im]` pairs; degree
//! keys are integers written as strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ChainMap, HermComplex, HermSpace, Homotopy};
use crate::linalg::{c, CMat};
use crate::{Error, Result};

pub type RawMat = Vec<Vec<[f64; 2]>>;

pub fn mat_to_json(m: &CMat) -> RawMat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Parse a row-major matrix of known shape. A matrix with zero rows is
/// written `[]` whatever its column count.
pub fn mat_from_json(raw: &RawMat, rows: usize, cols: usize) -> Result<CMat> {
    if raw.len() != rows {
        return Err(Error::Shape(format!("expected {rows} rows, got {}", raw.len())));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Shape(format!("row {i}: expected {cols} columns, got {}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::Invalid("non-finite matrix entry".into()));
            }
            m[(i, j)] = c(z[0], z[1]);
        }
    }
    Ok(m)
}

/// Parse a matrix whose row count is implied by the data.
pub fn mat_from_json_any(raw: &RawMat) -> Result<CMat> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, |r| r.len());
    mat_from_json(raw, rows, cols)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawSpace {
    pub dim: usize,
    pub gram: RawMat,
}

impl From<HermSpace> for RawSpace {
    fn from(s: HermSpace) -> Self {
        RawSpace { dim: s.dim(), gram: mat_to_json(&s.gram) }
    }
}

impl TryFrom<RawSpace> for HermSpace {
    type Error = Error;
    fn try_from(r: RawSpace) -> Result<HermSpace> {
        HermSpace::new(mat_from_json(&r.gram, r.dim, r.dim)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawComplex {
    pub lo: i32,
    pub hi: i32,
    pub spaces: BTreeMap<i32, RawSpace>,
    #[serde(default)]
    pub diffs: BTreeMap<i32, RawMat>,
}

impl From<HermComplex> for RawComplex {
    fn from(cx: HermComplex) -> Self {
        RawComplex {
            lo: cx.lo(),
            hi: cx.hi(),
            spaces: cx.spaces().iter().map(|(&i, s)| (i, RawSpace::from(s.clone()))).collect(),
            diffs: cx.diffs().iter().map(|(&i, d)| (i, mat_to_json(d))).collect(),
        }
    }
}

impl TryFrom<RawComplex> for HermComplex {
    type Error = Error;
    fn try_from(r: RawComplex) -> Result<HermComplex> {
        let spaces: BTreeMap<i32, HermSpace> =
            r.spaces.into_iter().map(|(i, s)| Ok((i, HermSpace::try_from(s)?))).collect::<Result<_>>()?;
        let dim = |i: i32| spaces.get(&i).map_or(0, |s| s.dim());
        let mut diffs = BTreeMap::new();
        for (i, d) in &r.diffs {
            diffs.insert(*i, mat_from_json(d, dim(i + 1), dim(*i))?);
        }
        HermComplex::new(r.lo, r.hi, spaces, diffs)
    }
}

/// Degreewise maps of a chain map or homotopy, with endpoints inline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawMaps {
    pub source: HermComplex,
    pub target: HermComplex,
    pub maps: BTreeMap<i32, RawMat>,
}

pub fn chain_map_from_raw(
    source: HermComplex,
    target: HermComplex,
    maps: &BTreeMap<i32, RawMat>,
) -> Result<ChainMap> {
    let mut m = BTreeMap::new();
    for (&i, raw) in maps {
        m.insert(i, mat_from_json(raw, target.dim(i), source.dim(i))?);
    }
    ChainMap::new(source, target, m)
}

pub fn homotopy_from_raw(source: HermComplex, target: HermComplex, maps: &BTreeMap<i32, RawMat>) -> Result<Homotopy> {
    let mut m = BTreeMap::new();
    for (&i, raw) in maps {
        m.insert(i, mat_from_json(raw, target.dim(i - 1), source.dim(i))?);
    }
    Homotopy::new(source, target, m)
}

impl From<ChainMap> for RawMaps {
    fn from(f: ChainMap) -> Self {
        let maps = f.maps().iter().map(|(&i, m)| (i, mat_to_json(m))).collect();
        RawMaps { source: f.source().clone(), target: f.target().clone(), maps }
    }
}

impl TryFrom<RawMaps> for ChainMap {
    type Error = Error;
    fn try_from(r: RawMaps) -> Result<ChainMap> {
        chain_map_from_raw(r.source, r.target, &r.maps)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawHomotopy {
    pub source: HermComplex,
    pub target: HermComplex,
    pub maps: BTreeMap<i32, RawMat>,
}

impl From<Homotopy> for RawHomotopy {
    fn from(h: Homotopy) -> Self {
        let maps = h.maps().iter().map(|(&i, m)| (i, mat_to_json(m))).collect();
        RawHomotopy { source: h.source().clone(), target: h.target().clone(), maps }
    }
}

impl TryFrom<RawHomotopy> for Homotopy {
    type Error = Error;
    fn try_from(r: RawHomotopy) -> Result<Homotopy> {
        homotopy_from_raw(r.source, r.target, &r.maps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn complex_round_trip_bit_exact() {
        let g = CMat::from_row_slice(2, 2, &[c(1.1, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(2.0 / 3.0, 0.0)]);
        let d = CMat::from_row_slice(1, 2, &[c(std::f64::consts::PI, 1e-300), c(-0.0, 7.0)]);
        let cx = HermComplex::from_parts(-1, vec![g, real(&[&[0.1 + 0.2]])], vec![d]).unwrap();
        let s = serde_json::to_string(&cx).unwrap();
        let back: HermComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cx);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn zero_rows_and_empty() {
        let cx = HermComplex::from_parts(0, vec![real(&[&[1.0]]), CMat::zeros(0, 0)], vec![CMat::zeros(0, 1)])
            .unwrap();
        let s = serde_json::to_string(&cx).unwrap();
        let back: HermComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cx);
        let z: HermComplex = serde_json::from_str(r#"{"lo":0,"hi":-1,"spaces":{},"diffs":{}}"#).unwrap();
        assert!(z.is_empty_support());
    }

    #[test]
    fn rejects_bad_shape() {
        let bad = r#"{"lo":0,"hi":1,"spaces":{"0":{"dim":1,"gram":[[[1,0]]]},"1":{"dim":1,"gram":[[[1,0]]]}},
                     "diffs":{"0":[[[1,0],[2,0]]]}}"#;
        assert!(serde_json::from_str::<HermComplex>(bad).is_err());
    }

    #[test]
    fn maps_round_trip() {
        let e = HermComplex::ea(0.3);
        let f = ChainMap::identity(&e).scale(c(0.5, -1.0 / 3.0));
        let s = serde_json::to_string(&f).unwrap();
        let back: ChainMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let mut m = BTreeMap::new();
        m.insert(1, real(&[&[0.1]]));
        let h = Homotopy::new(e.clone(), e, m).unwrap();
        let back: Homotopy = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back, h);
    }
}
