use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::json::RawComplex;
use crate::linalg::{c, cholesky, frob, hermitian_residual, scalar_mat, zeros, CMat};
use crate::{Error, Result, Tolerances};

/// Finite-dimensional space with a hermitian Gram matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "super::json::RawSpace", into = "super::json::RawSpace")]
pub struct HermSpace {
    pub gram: CMat,
}

impl HermSpace {
    pub fn new(gram: CMat) -> Result<HermSpace> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::Shape(format!("gram is {}x{}", gram.nrows(), gram.ncols())));
        }
        if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite gram entry".into()));
        }
        Ok(HermSpace { gram })
    }

    pub fn standard(n: usize) -> HermSpace {
        HermSpace { gram: CMat::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }
}

/// Bounded cochain complex of hermitian spaces. Every degree in `lo..=hi`
/// carries a (possibly zero-dimensional) space; `diffs[i]: C^i → C^{i+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComplex", into = "RawComplex")]
pub struct HermComplex {
    lo: i32,
    hi: i32,
    spaces: BTreeMap<i32, HermSpace>,
    diffs: BTreeMap<i32, CMat>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: i32,
    pub hermitian_residual: f64,
    pub hermitian_ok: bool,
    pub min_pivot: f64,
    pub pd_ok: bool,
    pub dd_residual: f64,
    pub dd_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub degrees: Vec<DegreeReport>,
    pub ok: bool,
}

impl HermComplex {
    /// The empty complex.
    pub fn zero() -> HermComplex {
        HermComplex { lo: 0, hi: -1, spaces: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    /// Build from consecutive Grams starting in degree `lo` and the
    /// differentials between them. Shapes are checked, validity is not.
    pub fn from_parts(lo: i32, grams: Vec<CMat>, diffs: Vec<CMat>) -> Result<HermComplex> {
        let n = grams.len();
        if n == 0 {
            if !diffs.is_empty() {
                return Err(Error::Shape("differentials without spaces".into()));
            }
            return Ok(HermComplex { lo, hi: lo - 1, spaces: BTreeMap::new(), diffs: BTreeMap::new() });
        }
        if diffs.len() + 1 != n {
            return Err(Error::Shape(format!("{} spaces need {} differentials, got {}", n, n - 1, diffs.len())));
        }
        let spaces: BTreeMap<i32, HermSpace> = grams
            .into_iter()
            .enumerate()
            .map(|(k, g)| Ok((lo + k as i32, HermSpace::new(g)?)))
            .collect::<Result<_>>()?;
        let diffs: BTreeMap<i32, CMat> = diffs.into_iter().enumerate().map(|(k, d)| (lo + k as i32, d)).collect();
        HermComplex::new(lo, lo + n as i32 - 1, spaces, diffs)
    }

    /// Build from explicit maps; missing differentials are zero.
    pub fn new(
        lo: i32,
        hi: i32,
        spaces: BTreeMap<i32, HermSpace>,
        mut diffs: BTreeMap<i32, CMat>,
    ) -> Result<HermComplex> {
        if hi < lo {
            if !spaces.is_empty() || !diffs.is_empty() {
                return Err(Error::Shape("empty support with data".into()));
            }
            return Ok(HermComplex { lo, hi, spaces, diffs });
        }
        for i in lo..=hi {
            if !spaces.contains_key(&i) {
                return Err(Error::Shape(format!("missing space in degree {i}")));
            }
        }
        if let Some((&k, _)) = spaces.iter().find(|(&k, _)| k < lo || k > hi) {
            return Err(Error::Shape(format!("space in degree {k} outside [{lo},{hi}]")));
        }
        if let Some((&k, _)) = diffs.iter().find(|(&k, _)| k < lo || k >= hi) {
            return Err(Error::Shape(format!("differential in degree {k} outside [{lo},{}]", hi - 1)));
        }
        for i in lo..hi {
            let (r, cc) = (spaces[&(i + 1)].dim(), spaces[&i].dim());
            let d = diffs.entry(i).or_insert_with(|| zeros(r, cc));
            if d.shape() != (r, cc) {
                return Err(Error::Shape(format!(
                    "d^{i} is {}x{}, expected {r}x{cc}",
                    d.nrows(),
                    d.ncols()
                )));
            }
            if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Invalid(format!("non-finite entry in d^{i}")));
            }
        }
        Ok(HermComplex { lo, hi, spaces, diffs })
    }

    /// One space in degree `deg`.
    pub fn single(deg: i32, gram: CMat) -> HermComplex {
        HermComplex::from_parts(deg, vec![gram], vec![]).expect("square gram")
    }

    /// `0 → ℂ → ℂ → 0` in degrees 0, 1 with map `e^a` and standard metrics.
    pub fn ea(a: f64) -> HermComplex {
        let one = scalar_mat(c(1.0, 0.0));
        HermComplex::from_parts(0, vec![one.clone(), one], vec![scalar_mat(c(a.exp(), 0.0))]).unwrap()
    }

    /// Two-term complex `g0 --d--> g1` in degrees `deg`, `deg+1`.
    pub fn two_term(deg: i32, g0: CMat, g1: CMat, d: CMat) -> Result<HermComplex> {
        HermComplex::from_parts(deg, vec![g0, g1], vec![d])
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn is_empty_support(&self) -> bool {
        self.hi < self.lo
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi
    }

    pub fn dim(&self, i: i32) -> usize {
        self.spaces.get(&i).map_or(0, |s| s.dim())
    }

    pub fn dims(&self) -> Vec<(i32, usize)> {
        self.degrees().map(|i| (i, self.dim(i))).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.degrees().map(|i| self.dim(i)).sum()
    }

    pub fn euler_char(&self) -> i64 {
        self.degrees().map(|i| if i.rem_euclid(2) == 0 { 1 } else { -1 } * self.dim(i) as i64).sum()
    }

    pub fn space(&self, i: i32) -> HermSpace {
        self.spaces.get(&i).cloned().unwrap_or_else(|| HermSpace::standard(0))
    }

    pub fn gram(&self, i: i32) -> CMat {
        self.spaces.get(&i).map_or_else(|| zeros(0, 0), |s| s.gram.clone())
    }

    pub fn gram_ref(&self, i: i32) -> Option<&CMat> {
        self.spaces.get(&i).map(|s| &s.gram)
    }

    /// `d^i: C^i → C^{i+1}` (a zero matrix of the right shape when absent).
    pub fn diff(&self, i: i32) -> CMat {
        self.diffs.get(&i).cloned().unwrap_or_else(|| zeros(self.dim(i + 1), self.dim(i)))
    }

    pub fn spaces(&self) -> &BTreeMap<i32, HermSpace> {
        &self.spaces
    }

    pub fn diffs(&self) -> &BTreeMap<i32, CMat> {
        &self.diffs
    }

    /// Same differentials with replacement Grams (shape-checked).
    pub fn with_grams(&self, grams: &BTreeMap<i32, CMat>) -> Result<HermComplex> {
        let mut spaces = self.spaces.clone();
        for (&i, g) in grams {
            if self.dim(i) != g.nrows() || g.nrows() != g.ncols() {
                return Err(Error::Shape(format!("replacement gram in degree {i}")));
            }
            spaces.insert(i, HermSpace::new(g.clone())?);
        }
        HermComplex::new(self.lo, self.hi, spaces, self.diffs.clone())
    }

    /// Same dims and Grams, replacement differentials.
    pub fn with_diffs(&self, diffs: BTreeMap<i32, CMat>) -> Result<HermComplex> {
        HermComplex::new(self.lo, self.hi, self.spaces.clone(), diffs)
    }

    /// Grams and differentials agree after aligning supports (missing degrees
    /// count as zero-dimensional), within `tol` in max-abs.
    pub fn approx_eq(&self, other: &HermComplex, tol: f64) -> bool {
        if !self.same_shape(other) {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        for i in lo..=hi {
            if self.dim(i) == 0 {
                continue;
            }
            let scale = 1.0 + crate::linalg::max_abs(&self.gram(i));
            if crate::linalg::max_abs(&(self.gram(i) - other.gram(i))) > tol * scale {
                return false;
            }
            let d = self.diff(i);
            let scale = 1.0 + crate::linalg::max_abs(&d);
            if crate::linalg::max_abs(&(d - other.diff(i))) > tol * scale {
                return false;
            }
        }
        true
    }

    /// Same graded dimensions.
    pub fn same_shape(&self, other: &HermComplex) -> bool {
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        (lo..=hi).all(|i| self.dim(i) == other.dim(i))
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&Tolerances::default())
    }

    /// Per-degree diagnostics for hermitian-ness, definiteness and d∘d = 0.
    pub fn validate_with(&self, tol: &Tolerances) -> ValidationReport {
        let mut degrees = Vec::new();
        for i in self.degrees() {
            let g = self.gram(i);
            let hr = hermitian_residual(&g);
            let ch = cholesky(&g, tol.pd_tol);
            let d0 = self.diff(i);
            let d1 = self.diff(i + 1);
            let dd = if i < self.hi { frob(&(&d1 * &d0)) } else { 0.0 };
            let scale = frob(&d1) * frob(&d0);
            let dd_rel = if dd == 0.0 { 0.0 } else { dd / scale.max(f64::MIN_POSITIVE) };
            degrees.push(DegreeReport {
                degree: i,
                hermitian_residual: hr,
                hermitian_ok: hr <= tol.chain_tol,
                min_pivot: if g.nrows() == 0 { f64::INFINITY } else { ch.min_pivot },
                pd_ok: ch.l.is_some(),
                dd_residual: dd_rel,
                dd_ok: dd_rel <= tol.chain_tol,
            });
        }
        let ok = degrees.iter().all(|d| d.hermitian_ok && d.pd_ok && d.dd_ok);
        ValidationReport { degrees, ok }
    }

    /// `Ok(self)` when valid, otherwise `Error::Invalid` naming the first failure.
    pub fn validated(self) -> Result<HermComplex> {
        let rep = self.validate();
        if let Some(d) = rep.degrees.iter().find(|d| !(d.hermitian_ok && d.pd_ok && d.dd_ok)) {
            let what = if !d.hermitian_ok {
                format!("gram not hermitian (residual {:e})", d.hermitian_residual)
            } else if !d.pd_ok {
                format!("gram not positive definite (pivot {:e})", d.min_pivot)
            } else {
                format!("d∘d ≠ 0 (residual {:e})", d.dd_residual)
            };
            return Err(Error::Invalid(format!("degree {}: {what}", d.degree)));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn zero_complex_validates() {
        assert!(HermComplex::zero().validate().ok);
        let z = HermComplex::from_parts(-1, vec![zeros(0, 0), zeros(0, 0)], vec![zeros(0, 0)]).unwrap();
        assert!(z.validate().ok);
    }

    #[test]
    fn ea_validates() {
        let e = HermComplex::ea(1.0);
        assert!(e.validate().ok);
        assert_eq!(e.diff(0)[(0, 0)].re, 1f64.exp());
    }

    #[test]
    fn negative_gram_reported() {
        let c1 = HermComplex::single(0, real(&[&[-1.0]]));
        let rep = c1.validate();
        assert!(!rep.ok);
        assert!(!rep.degrees[0].pd_ok);
        assert!(rep.degrees[0].min_pivot < 0.0);
    }

    #[test]
    fn dd_failure_reported() {
        let one = real(&[&[1.0]]);
        let c1 = HermComplex::from_parts(0, vec![one.clone(), one.clone(), one.clone()], vec![one.clone(), one])
            .unwrap();
        let rep = c1.validate();
        assert!(!rep.degrees[0].dd_ok);
        assert!(c1.validated().is_err());
    }

    #[test]
    fn shape_errors() {
        let r = HermComplex::from_parts(0, vec![real(&[&[1.0]]), real(&[&[1.0]])], vec![real(&[&[1.0, 2.0]])]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
