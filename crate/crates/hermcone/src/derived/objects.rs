//! Bounded complexes of structured objects, their classes, and structures
//! induced from metrics on cohomology.

use std::collections::BTreeMap;

use super::coho::realize;
use super::cone::herm_cone;
use super::roof::Roof;
use super::structure::{check_ends, class_of_morphism, parallel_transport, HermStructure};
use crate::hermlin::{
    canonical_basis, hodge_with, shift_map, ChainMap, HermComplex, HermSpace,
};
use crate::linalg::{block_diag, blocks2, col_basis, frob, lstsq, svd, vstack, zeros, CMat};
use crate::{Error, Result, Tolerances};

/// `F_top → … → F_low`, homological indices; `maps[j]: F_{low+j+1} → F_{low+j}`.
#[derive(Clone, Debug)]
pub struct ObjectComplex {
    low: i32,
    objects: Vec<HermStructure>,
    maps: Vec<Roof>,
}

impl ObjectComplex {
    pub fn new(low: i32, objects: Vec<HermStructure>, maps: Vec<Roof>) -> Result<ObjectComplex> {
        if objects.is_empty() || maps.len() + 1 != objects.len() {
            return Err(Error::Shape(format!("{} objects need {} maps", objects.len(), objects.len().max(1) - 1)));
        }
        for (j, m) in maps.iter().enumerate() {
            check_ends(m, &objects[j + 1], &objects[j])?;
        }
        for j in 1..maps.len() {
            let (first, second) = (maps[j].morphism()?, maps[j - 1].morphism()?);
            let p = second.after(&first)?;
            for i in p.degrees() {
                let scale = 1.0 + frob(&first.block(i)) * frob(&second.block(i));
                if frob(&p.block(i)) > 1e-8 * scale {
                    return Err(Error::Invalid(format!("maps into index {} do not compose to zero", low + j as i32 - 1)));
                }
            }
        }
        Ok(ObjectComplex { low, objects, maps })
    }

    pub fn single(k: i32, h: HermStructure) -> ObjectComplex {
        ObjectComplex { low: k, objects: vec![h], maps: Vec::new() }
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn top(&self) -> i32 {
        self.low + self.objects.len() as i32 - 1
    }

    pub fn object(&self, k: i32) -> Option<&HermStructure> {
        if k < self.low {
            return None;
        }
        self.objects.get((k - self.low) as usize)
    }

    /// `F_k → F_{k−1}`.
    pub fn differential(&self, k: i32) -> Option<&Roof> {
        if k <= self.low {
            return None;
        }
        self.maps.get((k - self.low - 1) as usize)
    }

    /// Harmonic chain-level representative of `F_k → F_{k−1}`.
    fn realized(&self, k: i32) -> Result<ChainMap> {
        let r = self.differential(k).ok_or_else(|| Error::Invalid(format!("no map out of index {k}")))?;
        realize(r.source(), r.target(), &r.morphism()?)
    }

    /// Structure on the totalization, built as
    /// `S_k = ocone(F_k[k−1] → S_{k−1})` from `S_low = F_low[low]`.
    pub fn total(&self) -> Result<HermStructure> {
        let mut s = self.objects[0].shift(self.low).compact()?;
        for k in self.low + 1..=self.top() {
            let fk = self.object(k).expect("in range").shift(k - 1);
            let c = shift_map(&self.realized(k)?, k - 1);
            let h = if k - 1 == self.low {
                c.with_endpoints(fk.underlying(), s.underlying())?
            } else {
                let tgt = s.underlying().clone();
                ChainMap::from_fn(fk.underlying(), &tgt, |i| {
                    let top = c.map(i);
                    vstack(&top, &zeros(tgt.dim(i) - top.nrows(), top.ncols()))
                })?
            };
            s = herm_cone(&fk, &s, &Roof::from_map(h))?.structure.compact()?;
        }
        Ok(s)
    }

    /// KA coordinate of an exact complex of objects.
    pub fn ka_class(&self) -> Result<f64> {
        let t = self.total()?;
        if let Some((degree, dim)) = hodge_with(t.underlying(), &Tolerances::default())?.first_nonzero() {
            return Err(Error::NotAcyclic { degree, dim });
        }
        t.ka_coordinate()
    }

    /// Dimensions of `F_k[k]^i` in the block order of the totalization.
    fn block_dims(&self, i: i32) -> Vec<usize> {
        (self.low..=self.top()).rev().map(|k| self.object(k).expect("in range").underlying().dim(i + k)).collect()
    }
}

pub fn class_of_object_complex(e: &ObjectComplex) -> Result<HermStructure> {
    e.total()
}

fn check_morphism(e: &ObjectComplex, m: &ObjectComplex, f: &[Roof]) -> Result<()> {
    if e.low != m.low || e.top() != m.top() || f.len() != e.objects.len() {
        return Err(Error::Mismatch("morphism of complexes needs matching index ranges".into()));
    }
    for (j, fj) in f.iter().enumerate() {
        check_ends(fj, &e.objects[j], &m.objects[j])?;
    }
    Ok(())
}

/// `Tot ε → Tot μ`, block diagonal in the harmonic representatives.
pub fn total_map(e: &ObjectComplex, m: &ObjectComplex, f: &[Roof]) -> Result<ChainMap> {
    check_morphism(e, m, f)?;
    let fs: Vec<ChainMap> = f
        .iter()
        .enumerate()
        .map(|(j, r)| Ok(shift_map(&realize(r.source(), r.target(), &r.morphism()?)?, e.low + j as i32)))
        .collect::<Result<_>>()?;
    let (te, tm) = (e.total()?, m.total()?);
    ChainMap::from_fn(te.underlying(), tm.underlying(), |i| {
        fs.iter().rev().fold(zeros(0, 0), |acc, fk| block_diag(&acc, &fk.map(i)))
    })
}

fn zero_structure() -> HermStructure {
    HermStructure::trivial(&HermComplex::zero())
}

/// The cone complex `E_{k−1} ⊕ M_k` with differential `[[−c^E, 0], [f, c^M]]`.
pub fn cone_of_complexes(e: &ObjectComplex, m: &ObjectComplex, f: &[Roof]) -> Result<ObjectComplex> {
    check_morphism(e, m, f)?;
    let (low, top) = (e.low, e.top() + 1);
    let part = |x: &ObjectComplex, k: i32| x.object(k).cloned().unwrap_or_else(zero_structure);
    let objects: Vec<HermStructure> = (low..=top).map(|k| part(e, k - 1).direct_sum(&part(m, k))).collect();
    let realized = |x: &ObjectComplex, k: i32| -> Result<Option<ChainMap>> {
        if x.differential(k).is_some() {
            Ok(Some(x.realized(k)?))
        } else {
            Ok(None)
        }
    };
    let fmap = |k: i32| -> Result<Option<ChainMap>> {
        if k < e.low || k > e.top() {
            return Ok(None);
        }
        let r = &f[(k - e.low) as usize];
        Ok(Some(realize(r.source(), r.target(), &r.morphism()?)?))
    };
    let mut maps = Vec::new();
    for k in low + 1..=top {
        let (src, tgt) = (&objects[(k - low) as usize], &objects[(k - 1 - low) as usize]);
        let (ce, cm, fk) = (realized(e, k - 1)?, realized(m, k)?, fmap(k - 1)?);
        let (e1, m0) = (part(e, k - 1), part(m, k));
        let (e2, m1) = (part(e, k - 2), part(m, k - 1));
        let blk = |x: &Option<ChainMap>, i: i32, r: usize, c: usize, neg: bool| match x {
            Some(g) if r > 0 && c > 0 => {
                if neg {
                    -g.map(i)
                } else {
                    g.map(i)
                }
            }
            _ => zeros(r, c),
        };
        let d = ChainMap::from_fn(src.underlying(), tgt.underlying(), |i| {
            let (ne1, nm0) = (e1.underlying().dim(i), m0.underlying().dim(i));
            let (ne2, nm1) = (e2.underlying().dim(i), m1.underlying().dim(i));
            blocks2(&blk(&ce, i, ne2, ne1, true), &zeros(ne2, nm0), &blk(&fk, i, nm1, ne1, false), &blk(&cm, i, nm1, nm0, false))
        })?;
        maps.push(Roof::from_map(d));
    }
    ObjectComplex::new(low, objects, maps)
}

/// The block permutation `Tot cone(ε, μ) → cone(Tot ε → Tot μ)`, with
/// per-block signs fixed by the chain condition.
pub fn cone_comparison(e: &ObjectComplex, m: &ObjectComplex, f: &[Roof]) -> Result<(ChainMap, HermStructure, HermStructure)> {
    let cc = cone_of_complexes(e, m, f)?;
    let tot_cone = cc.total()?;
    let fmap = total_map(e, m, f)?;
    let ocone = herm_cone(&e.total()?, &m.total()?, &Roof::from_map(fmap.clone()))?.structure;
    let (src, tgt) = (tot_cone.underlying().clone(), ocone.underlying().clone());
    let n = e.objects.len();
    // Tot cone blocks per degree: for k = top+1..low, (E_{k−1}, M_k).
    // Target blocks: E_top..E_low then M_top..M_low.
    let build = |signs: &[f64]| -> Result<ChainMap> {
        ChainMap::from_fn(&src, &tgt, |i| {
            let ed = e.block_dims(i + 1);
            let md = m.block_dims(i);
            let nt: usize = ed.iter().sum::<usize>() + md.iter().sum::<usize>();
            let mut p = zeros(nt, src.dim(i));
            let mut col = 0;
            for j in 0..=n {
                // j-th source block is k = top + 1 − j: E block index j−… in target order
                if j < n {
                    let d = ed[j];
                    let row: usize = ed[..j].iter().sum();
                    for t in 0..d {
                        p[(row + t, col + t)] = crate::linalg::c(signs[j], 0.0);
                    }
                    col += d;
                }
                if j > 0 {
                    let d = md[j - 1];
                    let row: usize = ed.iter().sum::<usize>() + md[..j - 1].iter().sum::<usize>();
                    for t in 0..d {
                        p[(row + t, col + t)] = crate::linalg::c(signs[n + j - 1], 0.0);
                    }
                    col += d;
                }
            }
            p
        })
    };
    let tol = Tolerances::default();
    for mask in 0u32..(1 << (2 * n)) {
        let signs: Vec<f64> = (0..2 * n).map(|b| if mask >> b & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let p = build(&signs)?;
        if p.is_chain_map(&tol) {
            return Ok((p, tot_cone, ocone));
        }
    }
    Err(Error::Invalid("no signed block permutation identifies the two cones".into()))
}

/// Class of the natural isomorphism `Tot cone(ε, μ) ⇢ ocone(Tot ε, Tot μ)`.
pub fn cone_compatibility(e: &ObjectComplex, m: &ObjectComplex, f: &[Roof]) -> Result<f64> {
    let (p, a, b) = cone_comparison(e, m, f)?;
    class_of_morphism(&Roof::from_map(p), &a, &b)
}

/// Structure on `c` induced by Gram matrices on its cohomology, written in
/// the coordinates of [`canonical_basis`].
pub fn cohomology_induced_structure(c: &HermComplex, metrics: &BTreeMap<i32, CMat>) -> Result<HermStructure> {
    let tol = Tolerances::default();
    let hodge = hodge_with(c, &tol)?;
    for i in c.degrees() {
        let h = hodge.harmonic_dim(i);
        match metrics.get(&i) {
            Some(g) if g.shape() != (h, h) => {
                return Err(Error::Shape(format!("cohomology metric in degree {i} is {:?}, H^{i} has dimension {h}", g.shape())))
            }
            None if h > 0 => return Err(Error::Shape(format!("missing cohomology metric in degree {i}"))),
            _ => {}
        }
    }
    if let Some((&k, _)) = metrics.iter().find(|(&k, g)| hodge.harmonic_dim(k) == 0 && g.nrows() > 0) {
        return Err(Error::Shape(format!("metric supplied for zero cohomology in degree {k}")));
    }
    let top = c.degrees().rev().find(|&i| hodge.harmonic_dim(i) > 0);
    let Some(m) = top else {
        let z = HermComplex::zero();
        return HermStructure::new(c.clone(), z.clone(), Roof::from_map(ChainMap::zero(&z, c)));
    };
    // F̃: degrees below m, and the boundaries B^m in degree m
    let dm1 = c.diff(m - 1);
    let bm = if dm1.nrows() > 0 && dm1.ncols() > 0 {
        let s = svd(&dm1);
        let r = s.s.iter().filter(|&&x| x > tol.rank_rel * s.s[0].max(tol.rank_floor)).count();
        col_basis(&dm1, r)
    } else {
        zeros(c.dim(m), 0)
    };
    let mut grams = Vec::new();
    let mut diffs = Vec::new();
    let lo = c.lo();
    for i in lo..m {
        grams.push(c.gram(i));
        if i + 1 < m {
            diffs.push(c.diff(i));
        }
    }
    if bm.ncols() > 0 {
        grams.push(bm.adjoint() * c.gram(m) * &bm);
        diffs.push(lstsq(&bm, &dm1, 1e-12));
    }
    let ft = if grams.is_empty() {
        HermComplex::zero()
    } else {
        HermComplex::from_parts(lo, grams, diffs)?
    };
    let below: BTreeMap<i32, CMat> = metrics.iter().filter(|(&k, _)| k < m).map(|(&k, g)| (k, g.clone())).collect();
    let ht = cohomology_induced_structure(&ft, &below)?;
    let hm = HermComplex::single(m + 1, HermSpace::new(metrics[&m].clone())?.gram);
    let hs = HermStructure::trivial(&hm);
    let zero = Roof::from_map(ChainMap::zero(&hm, &ft));
    let cn = herm_cone(&hs, &ht, &zero)?.structure;
    // cone(0)^i = H^m[−m]^i ⊕ F̃^i → C
    let cb = canonical_basis(c, &hodge, m);
    let q = ChainMap::from_fn(cn.underlying(), c, |i| {
        let first = if i == m { cb.clone() } else { zeros(c.dim(i), hm.dim(i + 1)) };
        let incl = if i == m { bm.clone() } else if i < m { crate::linalg::eye(c.dim(i)).columns(0, ft.dim(i)).into_owned() } else { zeros(c.dim(i), 0) };
        crate::linalg::hstack(&first, &incl)
    })?;
    debug_assert!(same_target(&q, c));
    parallel_transport(&Roof::from_map(q), &cn)
}

fn same_target(q: &ChainMap, c: &HermComplex) -> bool {
    super::roof::same_complex(q.target(), c)
}

/// `φ_*` between canonical cohomology coordinates of `f`'s ends.
pub fn canonical_coho_matrix(f: &ChainMap, i: i32) -> Result<CMat> {
    let tol = Tolerances::default();
    let (s, t) = (f.source(), f.target());
    let (hs, ht) = (hodge_with(s, &tol)?, hodge_with(t, &tol)?);
    let (bs, bt) = (canonical_basis(s, &hs, i), canonical_basis(t, &ht, i));
    if bs.ncols() == 0 || bt.ncols() == 0 {
        return Ok(zeros(bt.ncols(), bs.ncols()));
    }
    let p = ht.harmonic_projector(t, i);
    Ok(lstsq(&bt, &(p * f.map(i) * bs), 1e-12))
}

/// Metrics on the target's cohomology making `f_*` an isometry.
pub fn pushed_metrics(f: &ChainMap, metrics: &BTreeMap<i32, CMat>) -> Result<BTreeMap<i32, CMat>> {
    metrics
        .iter()
        .map(|(&i, g)| {
            let a = canonical_coho_matrix(f, i)?;
            let inv = a.try_inverse().ok_or_else(|| Error::NotQuasiIso(format!("H^{i} map is singular")))?;
            Ok((i, inv.adjoint() * g * &inv))
        })
        .collect()
}

/// The class of `f_*` between the cohomology complexes with the given
/// metrics (zero differentials).
pub fn cohomology_complex_class(f: &ChainMap, ms: &BTreeMap<i32, CMat>, mt: &BTreeMap<i32, CMat>) -> Result<f64> {
    let build = |ms: &BTreeMap<i32, CMat>| -> Result<HermComplex> {
        let present: Vec<i32> = ms.iter().filter(|(_, g)| g.nrows() > 0).map(|(&i, _)| i).collect();
        let (Some(&lo), Some(&hi)) = (present.first(), present.last()) else { return Ok(HermComplex::zero()) };
        let dim = |i: i32| ms.get(&i).map_or(0, |g| g.nrows());
        let grams = (lo..=hi).map(|i| ms.get(&i).cloned().unwrap_or_else(|| zeros(0, 0))).collect();
        let diffs = (lo..hi).map(|i| zeros(dim(i + 1), dim(i))).collect();
        HermComplex::from_parts(lo, grams, diffs)
    };
    let (hs, ht) = (build(ms)?, build(mt)?);
    let blocks = ms.keys().map(|&i| Ok((i, canonical_coho_matrix(f, i)?))).collect::<Result<BTreeMap<_, _>>>()?;
    let g = ChainMap::new(hs.clone(), ht.clone(), blocks)?;
    super::roof::class_of_iso(&Roof::from_map(g))
}
