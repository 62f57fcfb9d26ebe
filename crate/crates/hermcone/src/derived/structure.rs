//! Hermitian structures at the point: an underlying complex `U`, a metric
//! representative `N` and an isomorphism `N ⇢ U` given by a roof.

use super::coho::{realize, CohoMap};
use super::roof::{compose_roofs, same_complex, sum_projection, Roof};
use crate::hermlin::{
    cone, direct_sum, hom_complex, hom_map, shift, tensor, tensor_maps, unit, ChainMap, HermComplex,
};
use crate::torsion::tau;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct HermStructure {
    underlying: HermComplex,
    metric: HermComplex,
    roof: Roof,
}

impl HermStructure {
    pub fn new(underlying: HermComplex, metric: HermComplex, roof: Roof) -> Result<HermStructure> {
        if !same_complex(roof.source(), &metric) || !same_complex(roof.target(), &underlying) {
            return Err(Error::Mismatch("structural roof does not join metric and underlying complex".into()));
        }
        if !roof.is_iso() {
            return Err(Error::NotQuasiIso("structural roof".into()));
        }
        Ok(HermStructure { underlying, metric, roof })
    }

    /// A complex with its own metric.
    pub fn trivial(c: &HermComplex) -> HermStructure {
        HermStructure { underlying: c.clone(), metric: c.clone(), roof: Roof::identity(c) }
    }

    /// Structure given by a quasi-isomorphism `q: N → U`.
    pub fn from_map(q: ChainMap) -> Result<HermStructure> {
        let (u, n) = (q.target().clone(), q.source().clone());
        HermStructure::new(u, n, Roof::from_map(q))
    }

    pub fn underlying(&self) -> &HermComplex {
        &self.underlying
    }

    pub fn metric(&self) -> &HermComplex {
        &self.metric
    }

    pub fn roof(&self) -> &Roof {
        &self.roof
    }

    /// `ρ: H(N) → H(U)`.
    pub fn rho(&self) -> Result<CohoMap> {
        self.roof.morphism()
    }

    pub fn shift(&self, k: i32) -> HermStructure {
        HermStructure {
            underlying: shift(&self.underlying, k),
            metric: shift(&self.metric, k),
            roof: self.roof.shift(k),
        }
    }

    pub fn direct_sum(&self, other: &HermStructure) -> HermStructure {
        HermStructure {
            underlying: direct_sum(&self.underlying, &other.underlying),
            metric: direct_sum(&self.metric, &other.metric),
            roof: self.roof.direct_sum(&other.roof),
        }
    }

    /// KA coordinate of a structure on an acyclic object.
    pub fn ka_coordinate(&self) -> Result<f64> {
        tau(&self.metric)
    }

    /// Equivalent structure whose metric is the harmonic part of `N` plus
    /// one `e^a` summand, joined to `U` by a chain map.
    pub fn compact(&self) -> Result<HermStructure> {
        let tol = crate::Tolerances::default();
        let hn = crate::hermlin::hodge_with(&self.metric, &tol)?;
        let dims = super::coho::harmonic_dims(&hn);
        let harm = match (dims.keys().next(), dims.keys().last()) {
            (Some(&lo), Some(&hi)) => {
                let grams = (lo..=hi).map(|i| crate::linalg::eye(dims.get(&i).copied().unwrap_or(0))).collect();
                let diffs = (lo..hi)
                    .map(|i| crate::linalg::zeros(dims.get(&(i + 1)).copied().unwrap_or(0), dims.get(&i).copied().unwrap_or(0)))
                    .collect();
                HermComplex::from_parts(lo, grams, diffs)?
            }
            _ => HermComplex::zero(),
        };
        let incl = ChainMap::from_fn(&harm, &self.metric, |i| hn.harmonic(i, self.metric.dim(i)))?;
        let hh = crate::hermlin::hodge_with(&harm, &tol)?;
        let incl_star = CohoMap::of_with(&incl, &hh, &hn);
        let q = realize(&harm, &self.underlying, &self.rho()?.after(&incl_star)?)?;
        let small = HermStructure::new(self.underlying.clone(), harm, Roof::from_map(q))?;
        // several small summands keep every entry of order one
        let a = structure_distance(self, &small)?;
        let k = a.abs().ceil().max(1.0) as usize;
        Ok((0..k).fold(small, |h, _| torsor_add(&h, a / k as f64)))
    }

    pub fn is_meager(&self, tol: f64) -> bool {
        self.ka_coordinate().map(|t| t.abs() <= tol).unwrap_or(false)
    }
}

/// `ρ_b⁻¹ ∘ φ ∘ ρ_a`, the map `φ` read between metric representatives.
pub fn metric_morphism(phi: &CohoMap, a: &HermStructure, b: &HermStructure) -> Result<CohoMap> {
    b.rho()?.inverse()?.after(&phi.after(&a.rho()?)?)
}

/// Class of an isomorphism `φ: H(U_a) → H(U_b)` between structured objects.
pub fn class_of_coho(phi: &CohoMap, a: &HermStructure, b: &HermStructure) -> Result<f64> {
    let psi = metric_morphism(phi, a, b)?;
    if !psi.is_iso() {
        return Err(Error::NotQuasiIso("morphism is not an isomorphism".into()));
    }
    let f = realize(&a.metric, &b.metric, &psi)?;
    tau(&cone(&f))
}

/// Class of an isomorphism given by a roof `U_a ⇢ U_b`.
pub fn class_of_morphism(r: &Roof, a: &HermStructure, b: &HermStructure) -> Result<f64> {
    check_ends(r, a, b)?;
    class_of_coho(&r.morphism()?, a, b)
}

pub(crate) fn check_ends(r: &Roof, a: &HermStructure, b: &HermStructure) -> Result<()> {
    if !same_complex(r.source(), &a.underlying) || !same_complex(r.target(), &b.underlying) {
        return Err(Error::Mismatch("morphism endpoints differ from the structures".into()));
    }
    Ok(())
}

/// `H + a`: the metric representative gains an `e^a` summand.
pub fn torsor_add(h: &HermStructure, a: f64) -> HermStructure {
    let ea = HermComplex::ea(a);
    let m = h.roof.middle().clone();
    let s = crate::hermlin::direct_sum_maps(h.roof.s(), &ChainMap::identity(&ea));
    let g = h.roof.g().compose(&sum_projection(&m, &ea, true)).expect("projection then leg");
    let roof = Roof::new(s, g).expect("acyclic summand keeps the left leg a quasi-isomorphism");
    HermStructure { underlying: h.underlying.clone(), metric: direct_sum(&h.metric, &ea), roof }
}

/// `H1 − H2`: class of the identity `H2 → H1`.
pub fn structure_distance(h1: &HermStructure, h2: &HermStructure) -> Result<f64> {
    if !same_complex(&h1.underlying, &h2.underlying) {
        return Err(Error::Mismatch("structures live on different objects".into()));
    }
    let id = CohoMap::identity(&h1.rho()?.target);
    class_of_coho(&id, h2, h1)
}

/// Structure on the target of an isomorphism `r: U ⇢ V` carried over from `h`.
pub fn parallel_transport(r: &Roof, h: &HermStructure) -> Result<HermStructure> {
    if !same_complex(r.source(), &h.underlying) {
        return Err(Error::Mismatch("transport along a morphism from another object".into()));
    }
    if !r.is_iso() {
        return Err(Error::NotQuasiIso("parallel transport needs an isomorphism".into()));
    }
    let roof = compose_roofs(&h.roof, r)?;
    HermStructure::new(r.target().clone(), h.metric.clone(), roof)
}

/// Chain map `N → U` realizing the structural isomorphism.
pub fn structure_map(h: &HermStructure) -> Result<ChainMap> {
    h.roof.chain_map()
}

pub fn tensor_structures(a: &HermStructure, b: &HermStructure) -> Result<HermStructure> {
    let q = tensor_maps(&structure_map(a)?, &structure_map(b)?);
    let u = tensor(&a.underlying, &b.underlying);
    let n = tensor(&a.metric, &b.metric);
    HermStructure::new(u, n.clone(), Roof::from_map(q.with_endpoints(&n, &tensor(&a.underlying, &b.underlying))?))
}

/// `Hom(N_a, N_b) → Hom(U_a, U_b)`, `φ ↦ q_b ∘ φ ∘ q_a⁻¹`.
pub fn hom_structures(a: &HermStructure, b: &HermStructure) -> Result<HermStructure> {
    let inv_a = realize(&a.underlying, &a.metric, &a.rho()?.inverse()?)?;
    let q = hom_map(&inv_a, &structure_map(b)?);
    let u = hom_complex(&a.underlying, &b.underlying);
    let n = hom_complex(&a.metric, &b.metric);
    HermStructure::new(u.clone(), n.clone(), Roof::from_map(q.with_endpoints(&n, &u)?))
}

pub fn dual_structure(h: &HermStructure) -> Result<HermStructure> {
    hom_structures(h, &HermStructure::trivial(&unit()))
}
