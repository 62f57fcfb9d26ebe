//! Roofs `S ←s− M −g→ T` with `s` a quasi-isomorphism.

use super::coho::{realize, CohoMap};
use crate::hermlin::{cone, direct_sum, direct_sum_maps, shift, shift_map, ChainMap, HermComplex};
use crate::linalg::{eye, hstack, vstack, zeros};
use crate::torsion::tau;
use crate::{Error, Result, Tolerances};

/// Endpoint comparison used throughout the derived layer.
pub fn same_complex(a: &HermComplex, b: &HermComplex) -> bool {
    a.approx_eq(b, 1e-10)
}

#[derive(Clone, Debug)]
pub struct Roof {
    s: ChainMap,
    g: ChainMap,
}

impl Roof {
    pub fn new(s: ChainMap, g: ChainMap) -> Result<Roof> {
        if !same_complex(s.source(), g.source()) {
            return Err(Error::Mismatch("roof legs start at different complexes".into()));
        }
        let tol = Tolerances::default();
        for (name, f) in [("s", &s), ("g", &g)] {
            if !f.is_chain_map(&tol) {
                return Err(Error::Invalid(format!("leg {name} is not a chain map ({:e})", f.chain_residual())));
            }
        }
        if !CohoMap::of(&s)?.is_iso() {
            return Err(Error::NotQuasiIso("left leg of a roof".into()));
        }
        Ok(Roof { s, g })
    }

    /// `S ←Id− S −f→ T`.
    pub fn from_map(f: ChainMap) -> Roof {
        Roof { s: ChainMap::identity(f.source()), g: f }
    }

    pub fn identity(c: &HermComplex) -> Roof {
        Roof::from_map(ChainMap::identity(c))
    }

    pub fn middle(&self) -> &HermComplex {
        self.s.source()
    }

    pub fn source(&self) -> &HermComplex {
        self.s.target()
    }

    pub fn target(&self) -> &HermComplex {
        self.g.target()
    }

    pub fn s(&self) -> &ChainMap {
        &self.s
    }

    pub fn g(&self) -> &ChainMap {
        &self.g
    }

    /// `g_* ∘ s_*⁻¹`.
    pub fn morphism(&self) -> Result<CohoMap> {
        CohoMap::of(&self.g)?.after(&CohoMap::of(&self.s)?.inverse()?)
    }

    pub fn is_iso(&self) -> bool {
        CohoMap::of(&self.g).map(|m| m.is_iso()).unwrap_or(false)
    }

    pub fn inverse(&self) -> Result<Roof> {
        Roof::new(self.g.clone(), self.s.clone())
    }

    fn left_is_identity(&self) -> bool {
        same_complex(self.middle(), self.source())
            && self.s.degree_span().all(|i| {
                let m = self.s.map(i);
                m.nrows() == m.ncols() && m == eye(m.nrows())
            })
    }

    /// A chain map `S → T` in the same derived class: `g` itself when the
    /// left leg is the identity, the harmonic realization otherwise.
    pub fn chain_map(&self) -> Result<ChainMap> {
        if self.left_is_identity() {
            return self.g.with_endpoints(self.source(), self.target());
        }
        realize(self.source(), self.target(), &self.morphism()?)
    }

    /// `r[k]`: every complex and leg shifted.
    pub fn shift(&self, k: i32) -> Roof {
        Roof { s: shift_map(&self.s, k), g: shift_map(&self.g, k) }
    }

    pub fn neg(&self) -> Roof {
        Roof { s: self.s.clone(), g: self.g.neg() }
    }

    pub fn direct_sum(&self, other: &Roof) -> Roof {
        Roof { s: direct_sum_maps(&self.s, &other.s), g: direct_sum_maps(&self.g, &other.g) }
    }

    /// Precompose both legs with a quasi-isomorphism `t: M′ → M`.
    pub fn refine(&self, t: &ChainMap) -> Result<Roof> {
        Roof::new(self.s.compose(t)?, self.g.compose(t)?)
    }
}

/// `r2 ∘ r1` through the homotopy fiber product `P = cone(u)[−1]`,
/// `u = (g1, −s2): M1 ⊕ M2 → B`.
pub fn compose_roofs(r1: &Roof, r2: &Roof) -> Result<Roof> {
    if !same_complex(r1.target(), r2.source()) {
        return Err(Error::Mismatch("roof target and source differ".into()));
    }
    let (m1, m2) = (r1.middle(), r2.middle());
    let b = r2.source();
    let sum = direct_sum(m1, m2);
    let u = ChainMap::from_fn(&sum, b, |i| hstack(&r1.g.map(i), &(-r2.s.map(i)))).expect("fiber product leg");
    let u = u.with_endpoints(&sum, b)?;
    let p = shift(&cone(&u), -1);
    // P^i = (M1 ⊕ M2)^i ⊕ B^{i−1}
    let proj = |m: &HermComplex, first: bool| {
        ChainMap::from_fn(&p, m, |i| {
            let (n1, n2, nb) = (m1.dim(i), m2.dim(i), b.dim(i - 1));
            let sel = if first {
                hstack(&eye(n1), &zeros(n1, n2))
            } else {
                hstack(&zeros(n2, n1), &eye(n2))
            };
            hstack(&sel, &zeros(sel.nrows(), nb))
        })
        .expect("projection shapes")
    };
    let p1 = proj(m1, true);
    let p2 = proj(m2, false);
    Roof::new(r1.s.compose(&p1)?, r2.g.compose(&p2)?)
}

pub fn morphisms_equal(r1: &Roof, r2: &Roof) -> bool {
    morphisms_equal_with(r1, r2, 1e-8)
}

pub fn morphisms_equal_with(r1: &Roof, r2: &Roof, tol: f64) -> bool {
    if !same_complex(r1.source(), r2.source()) || !same_complex(r1.target(), r2.target()) {
        return false;
    }
    match (r1.morphism(), r2.morphism()) {
        (Ok(a), Ok(b)) => a.distance(&b) <= tol,
        _ => false,
    }
}

/// `τ(cone g) − τ(cone s)`, the KA coordinate of an isomorphism between
/// complexes carrying their own metrics.
pub fn class_of_iso(r: &Roof) -> Result<f64> {
    let not_iso = |e: Error| match e {
        Error::NotAcyclic { .. } => Error::NotQuasiIso("right leg of the roof".into()),
        e => e,
    };
    let tg = tau(&cone(&r.g)).map_err(not_iso)?;
    let ts = tau(&cone(&r.s))?;
    Ok(tg - ts)
}

/// Inclusion `A → A ⊕ B` or `B → A ⊕ B`.
pub fn sum_inclusion(a: &HermComplex, b: &HermComplex, first: bool) -> ChainMap {
    let sum = direct_sum(a, b);
    let src = if first { a } else { b };
    ChainMap::from_fn(src, &sum, |i| {
        let (na, nb) = (a.dim(i), b.dim(i));
        if first {
            vstack(&eye(na), &zeros(nb, na))
        } else {
            vstack(&zeros(na, nb), &eye(nb))
        }
    })
    .expect("inclusion shapes")
}

/// Projection `A ⊕ B → A` or `A ⊕ B → B`.
pub fn sum_projection(a: &HermComplex, b: &HermComplex, first: bool) -> ChainMap {
    let sum = direct_sum(a, b);
    let tgt = if first { a } else { b };
    ChainMap::from_fn(&sum, tgt, |i| {
        let (na, nb) = (a.dim(i), b.dim(i));
        if first {
            hstack(&eye(na), &zeros(na, nb))
        } else {
            hstack(&zeros(nb, na), &eye(nb))
        }
    })
    .expect("projection shapes")
}
