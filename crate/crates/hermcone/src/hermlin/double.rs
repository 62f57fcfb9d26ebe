//! Bounded double complexes with commuting squares. Totalization uses
//! `d = d_h + (−1)^p d_v` on `E^{p,q}`.

use std::collections::BTreeMap;

use super::{ChainMap, HermComplex};
use crate::linalg::{block_diag, c, eye, max_abs, zeros, CMat};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DoubleComplex {
    p: (i32, i32),
    q: (i32, i32),
    grams: BTreeMap<(i32, i32), CMat>,
    dh: BTreeMap<(i32, i32), CMat>,
    dv: BTreeMap<(i32, i32), CMat>,
}

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl DoubleComplex {
    /// `dh[(p,q)]: E^{p,q} → E^{p+1,q}`, `dv[(p,q)]: E^{p,q} → E^{p,q+1}`.
    /// Missing differentials are zero. Rows, columns and commutation are checked.
    pub fn new(
        p: (i32, i32),
        q: (i32, i32),
        grams: BTreeMap<(i32, i32), CMat>,
        dh: BTreeMap<(i32, i32), CMat>,
        dv: BTreeMap<(i32, i32), CMat>,
    ) -> Result<DoubleComplex> {
        let dc = DoubleComplex { p, q, grams, dh, dv };
        for a in p.0..=p.1 {
            for b in q.0..=q.1 {
                let g = dc.gram(a, b);
                if g.nrows() != g.ncols() {
                    return Err(Error::Shape(format!("gram at ({a},{b})")));
                }
                if dc.h(a, b).shape() != (dc.dim(a + 1, b), dc.dim(a, b))
                    || dc.v(a, b).shape() != (dc.dim(a, b + 1), dc.dim(a, b))
                {
                    return Err(Error::Shape(format!("differential at ({a},{b})")));
                }
            }
        }
        for a in p.0..=p.1 {
            for b in q.0..=q.1 {
                let hv = dc.h(a, b + 1) * dc.v(a, b);
                let vh = dc.v(a + 1, b) * dc.h(a, b);
                let scale = 1.0 + max_abs(&hv).max(max_abs(&vh));
                if max_abs(&(hv - vh)) > 1e-9 * scale {
                    return Err(Error::Invalid(format!("square at ({a},{b}) does not commute")));
                }
                let hh = dc.h(a + 1, b) * dc.h(a, b);
                let vv = dc.v(a, b + 1) * dc.v(a, b);
                if max_abs(&hh) > 1e-9 * (1.0 + max_abs(&dc.h(a, b))) || max_abs(&vv) > 1e-9 * (1.0 + max_abs(&dc.v(a, b)))
                {
                    return Err(Error::Invalid(format!("row or column fails d∘d = 0 at ({a},{b})")));
                }
            }
        }
        Ok(dc)
    }

    pub fn p_range(&self) -> (i32, i32) {
        self.p
    }

    pub fn q_range(&self) -> (i32, i32) {
        self.q
    }

    pub fn dim(&self, a: i32, b: i32) -> usize {
        self.grams.get(&(a, b)).map_or(0, |g| g.nrows())
    }

    pub fn gram(&self, a: i32, b: i32) -> CMat {
        self.grams.get(&(a, b)).cloned().unwrap_or_else(|| zeros(0, 0))
    }

    pub fn h(&self, a: i32, b: i32) -> CMat {
        self.dh.get(&(a, b)).cloned().unwrap_or_else(|| zeros(self.dim(a + 1, b), self.dim(a, b)))
    }

    pub fn v(&self, a: i32, b: i32) -> CMat {
        self.dv.get(&(a, b)).cloned().unwrap_or_else(|| zeros(self.dim(a, b + 1), self.dim(a, b)))
    }

    /// Row `q = b`: the complex `E^{*,b}` with `d_h`.
    pub fn row(&self, b: i32) -> HermComplex {
        let grams = (self.p.0..=self.p.1).map(|a| self.gram(a, b)).collect();
        let diffs = (self.p.0..self.p.1).map(|a| self.h(a, b)).collect();
        HermComplex::from_parts(self.p.0, grams, diffs).unwrap()
    }

    /// Column `p = a`: the complex `E^{a,*}` with `d_v`.
    pub fn column(&self, a: i32) -> HermComplex {
        let grams = (self.q.0..=self.q.1).map(|b| self.gram(a, b)).collect();
        let diffs = (self.q.0..self.q.1).map(|b| self.v(a, b)).collect();
        HermComplex::from_parts(self.q.0, grams, diffs).unwrap()
    }

    pub fn transpose(&self) -> DoubleComplex {
        let sw = |m: &BTreeMap<(i32, i32), CMat>| m.iter().map(|(&(a, b), x)| ((b, a), x.clone())).collect();
        DoubleComplex { p: self.q, q: self.p, grams: sw(&self.grams), dh: sw(&self.dv), dv: sw(&self.dh) }
    }

    fn layout(&self, n: i32) -> Vec<(i32, i32, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for a in self.p.0..=self.p.1 {
            let b = n - a;
            if b < self.q.0 || b > self.q.1 {
                continue;
            }
            out.push((a, b, off));
            off += self.dim(a, b);
        }
        out
    }

    fn tdim(&self, n: i32) -> usize {
        self.layout(n).iter().map(|&(a, b, _)| self.dim(a, b)).sum()
    }

    pub fn total(&self) -> HermComplex {
        if self.p.0 > self.p.1 || self.q.0 > self.q.1 {
            return HermComplex::zero();
        }
        let lo = self.p.0 + self.q.0;
        let hi = self.p.1 + self.q.1;
        let grams = (lo..=hi)
            .map(|n| self.layout(n).iter().fold(zeros(0, 0), |g, &(a, b, _)| block_diag(&g, &self.gram(a, b))))
            .collect();
        let diffs = (lo..hi)
            .map(|n| {
                let mut d = zeros(self.tdim(n + 1), self.tdim(n));
                let tgt = self.layout(n + 1);
                for &(a, b, so) in &self.layout(n) {
                    for &(a2, b2, to) in &tgt {
                        let blk = if a2 == a + 1 && b2 == b {
                            self.h(a, b)
                        } else if a2 == a && b2 == b + 1 {
                            self.v(a, b) * c(sign(a), 0.0)
                        } else {
                            continue;
                        };
                        if blk.nrows() > 0 && blk.ncols() > 0 {
                            d.view_mut((to, so), blk.shape()).copy_from(&blk);
                        }
                    }
                }
                d
            })
            .collect();
        HermComplex::from_parts(lo, grams, diffs).unwrap()
    }

    /// Isometry `Tot(D) → Tot(Dᵀ)`: block permutation with signs `(−1)^{pq}`.
    pub fn transpose_witness(&self) -> ChainMap {
        let t = self.transpose();
        let src = self.total();
        let tgt = t.total();
        ChainMap::from_fn(&src, &tgt, |n| {
            let mut m = zeros(t.tdim(n), self.tdim(n));
            for &(a, b, so) in &self.layout(n) {
                for &(b2, a2, to) in &t.layout(n) {
                    if a2 == a && b2 == b && self.dim(a, b) > 0 {
                        let blk = eye(self.dim(a, b)) * c(sign(a * b), 0.0);
                        m.view_mut((to, so), blk.shape()).copy_from(&blk);
                    }
                }
            }
            m
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    /// `A ⊗ B` for two 2-term complexes as a double complex.
    fn product() -> DoubleComplex {
        let mut grams = BTreeMap::new();
        let mut dh = BTreeMap::new();
        let mut dv = BTreeMap::new();
        for a in 0..=1 {
            for b in 0..=1 {
                grams.insert((a, b), real(&[&[1.0 + a as f64 + 0.5 * b as f64]]));
            }
            dv.insert((a, 0), real(&[&[2.0]]));
        }
        for b in 0..=1 {
            dh.insert((0, b), real(&[&[3.0]]));
        }
        DoubleComplex::new((0, 1), (0, 1), grams, dh, dv).unwrap()
    }

    #[test]
    fn total_is_complex_and_transpose_isometric() {
        let d = product();
        let t = d.total();
        assert!(t.validate().ok);
        let w = d.transpose_witness();
        assert!(w.chain_residual() < 1e-14);
        let tt = d.transpose().total();
        for n in t.degrees() {
            let m = w.map(n);
            assert!(crate::linalg::frob(&(m.adjoint() * tt.gram(n) * &m - t.gram(n))) < 1e-12);
        }
    }

    #[test]
    fn rows_columns() {
        let d = product();
        assert_eq!(d.row(0).dims(), vec![(0, 1), (1, 1)]);
        assert_eq!(d.column(1).diff(0), real(&[&[2.0]]));
    }

    #[test]
    fn non_commuting_rejected() {
        let mut d = product();
        d.dv.insert((1, 0), real(&[&[5.0]]));
        let r = DoubleComplex::new(d.p, d.q, d.grams.clone(), d.dh.clone(), d.dv.clone());
        assert!(r.is_err());
    }
}
