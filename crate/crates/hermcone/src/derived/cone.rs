//! Hermitian cones and distinguished triangles.

use super::coho::{realize, CohoMap, Dims};
use super::roof::{same_complex, sum_inclusion, sum_projection, Roof};
use super::structure::{check_ends, class_of_coho, metric_morphism, structure_map, HermStructure};
use crate::hermlin::{cone, cone_inclusion, cone_projection, direct_sum, shift, shift_map, ChainMap};
use crate::linalg::{eye, frob, hstack, kron, lstsq, null_space, vstack, zeros, CMat};
use crate::{Error, Result, Tolerances};

/// Degreewise solution of `α∘p = q` (for each right pair) and `l∘α = m`
/// (for each left pair), `α: H(X) → H(Y)`.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub alpha: CohoMap,
    /// Directions along which `α` may move without breaking the constraints.
    pub null: Vec<CohoMap>,
    pub residual: f64,
}

fn dim(d: &Dims, i: i32) -> usize {
    d.get(&i).copied().unwrap_or(0)
}

fn vec_of(m: &CMat) -> CMat {
    CMat::from_column_slice(m.len(), 1, m.as_slice())
}

pub fn solve_comparison(
    x: &Dims,
    y: &Dims,
    right: &[(CohoMap, CohoMap)],
    left: &[(CohoMap, CohoMap)],
) -> Result<Comparison> {
    for (p, q) in right {
        if &p.target != x || &q.target != y || p.source != q.source {
            return Err(Error::Mismatch("right constraint does not fit".into()));
        }
    }
    for (l, m) in left {
        if &l.source != y || &m.source != x || l.target != m.target {
            return Err(Error::Mismatch("left constraint does not fit".into()));
        }
    }
    let mut degs: Vec<i32> = x.keys().chain(y.keys()).copied().collect();
    degs.sort_unstable();
    degs.dedup();
    let mut blocks = std::collections::BTreeMap::new();
    let mut null_blocks: Vec<(i32, CMat)> = Vec::new();
    let mut residual: f64 = 0.0;
    for i in degs {
        let (nx, ny) = (dim(x, i), dim(y, i));
        if nx == 0 || ny == 0 {
            continue;
        }
        let mut a = zeros(0, nx * ny);
        let mut b = zeros(0, 1);
        for (p, q) in right {
            let (pi, qi) = (p.block(i), q.block(i));
            if pi.ncols() == 0 {
                continue;
            }
            a = vstack(&a, &kron(&pi.transpose(), &eye(ny)));
            b = vstack(&b, &vec_of(&qi));
        }
        for (l, m) in left {
            let (li, mi) = (l.block(i), m.block(i));
            if li.nrows() == 0 {
                continue;
            }
            a = vstack(&a, &kron(&eye(nx), &li));
            b = vstack(&b, &vec_of(&mi));
        }
        let sol = if a.nrows() == 0 { zeros(nx * ny, 1) } else { lstsq(&a, &b, 1e-10) };
        if a.nrows() > 0 {
            residual = residual.max(frob(&(&a * &sol - &b)) / (1.0 + frob(&b)));
        }
        blocks.insert(i, CMat::from_column_slice(ny, nx, sol.as_slice()));
        let ns = if a.nrows() == 0 { eye(nx * ny) } else { null_space(&a, 1e-10) };
        for k in 0..ns.ncols() {
            null_blocks.push((i, CMat::from_column_slice(ny, nx, ns.column(k).into_owned().as_slice())));
        }
    }
    let alpha = CohoMap::new(x.clone(), y.clone(), blocks)?;
    let null = null_blocks
        .into_iter()
        .map(|(i, b)| CohoMap::new(x.clone(), y.clone(), [(i, b)].into_iter().collect()))
        .collect::<Result<_>>()?;
    Ok(Comparison { alpha, null, residual })
}

/// A hermitian cone together with the data used to build it.
#[derive(Clone, Debug)]
pub struct HermCone {
    /// Structure on `cone(f_U)` with metric representative `C̄`.
    pub structure: HermStructure,
    /// Chain map on underlying complexes whose cone carries the structure.
    pub map: ChainMap,
    pub comparison: Comparison,
}

impl HermCone {
    /// `U_b → cone(f_U)`.
    pub fn inclusion(&self) -> ChainMap {
        cone_inclusion(&self.map)
    }

    /// `cone(f_U) → U_a[1]`.
    pub fn projection(&self) -> ChainMap {
        cone_projection(&self.map)
    }
}

/// Hermitian cone of `f: U_a ⇢ U_b`, using `N_a ←Id− N_a → N_b` between
/// the metric representatives.
pub fn herm_cone(a: &HermStructure, b: &HermStructure, f: &Roof) -> Result<HermCone> {
    check_ends(f, a, b)?;
    let psi = metric_morphism(&f.morphism()?, a, b)?;
    let metric_roof = Roof::from_map(realize(a.metric(), b.metric(), &psi)?);
    herm_cone_via(a, b, f, &metric_roof)
}

/// Hermitian cone with a chosen roof `N_a ← E″ → N_b` for the induced
/// morphism: `C̄ = cone(E″ → N_a)[1] ⊕ cone(E″ → N_b)`.
pub fn herm_cone_via(a: &HermStructure, b: &HermStructure, f: &Roof, metric_roof: &Roof) -> Result<HermCone> {
    check_ends(f, a, b)?;
    if !same_complex(metric_roof.source(), a.metric()) || !same_complex(metric_roof.target(), b.metric()) {
        return Err(Error::Mismatch("metric roof must join the metric representatives".into()));
    }
    let psi = metric_morphism(&f.morphism()?, a, b)?;
    let err = metric_roof.morphism()?.distance(&psi);
    if err > 1e-8 {
        return Err(Error::Mismatch(format!("metric roof represents another morphism ({err:e})")));
    }
    let (s, g) = (metric_roof.s(), metric_roof.g());
    let cs1 = shift(&cone(s), 1);
    let cg = cone(g);
    let cbar = direct_sum(&cs1, &cg);
    let v = sum_inclusion(&cs1, &cg, false).compose(&cone_inclusion(g))?;
    let w = shift_map(s, 1).compose(&cone_projection(g))?.compose(&sum_projection(&cs1, &cg, false))?;

    let fu = f.chain_map()?;
    let k = cone(&fu);
    let v2 = CohoMap::of(&cone_inclusion(&fu))?;
    let w2 = CohoMap::of(&cone_projection(&fu))?;
    let a1 = CohoMap::of(&shift_map(&structure_map(a)?, 1))?;
    let (vs, ws) = (CohoMap::of(&v)?, CohoMap::of(&w)?);
    let x = vs.target.clone();
    let y = v2.target.clone();
    let comparison = solve_comparison(
        &x,
        &y,
        &[(vs, v2.after(&b.rho()?)?)],
        &[(w2, a1.after(&ws)?)],
    )?;
    let tol = Tolerances::default();
    if comparison.residual > tol.chain_tol.max(1e-8) || !comparison.alpha.is_iso() {
        return Err(Error::NotDistinguished(format!(
            "no comparison isomorphism for the cone (residual {:e})",
            comparison.residual
        )));
    }
    let q = realize(&cbar, &k, &comparison.alpha)?;
    let structure = HermStructure::new(k, cbar, Roof::from_map(q))?;
    Ok(HermCone { structure, map: fu, comparison })
}

/// `A ⇢u B ⇢v C ⇢w A[1]` on structured objects.
#[derive(Clone, Debug)]
pub struct HermTriangle {
    pub a: HermStructure,
    pub b: HermStructure,
    pub c: HermStructure,
    pub u: Roof,
    pub v: Roof,
    pub w: Roof,
}

impl HermTriangle {
    pub fn new(a: HermStructure, b: HermStructure, c: HermStructure, u: Roof, v: Roof, w: Roof) -> Result<HermTriangle> {
        check_ends(&u, &a, &b)?;
        check_ends(&v, &b, &c)?;
        check_ends(&w, &c, &a.shift(1))?;
        Ok(HermTriangle { a, b, c, u, v, w })
    }

    /// `A → B → cone(f) → A[1]` with `c` a structure on `cone(f_U)`.
    pub fn standard(a: HermStructure, b: HermStructure, f: &Roof, c: HermStructure) -> Result<HermTriangle> {
        let fu = f.chain_map()?;
        HermTriangle::new(
            a,
            b,
            c,
            f.clone(),
            Roof::from_map(cone_inclusion(&fu)),
            Roof::from_map(cone_projection(&fu)),
        )
    }

    /// `A → A ⊕ C → C → A[1]` with inclusion, projection and zero.
    pub fn split(a: HermStructure, c: HermStructure, b: HermStructure) -> Result<HermTriangle> {
        let (ua, uc) = (a.underlying().clone(), c.underlying().clone());
        let u = Roof::from_map(sum_inclusion(&ua, &uc, true).with_endpoints(&ua, b.underlying())?);
        let v = Roof::from_map(sum_projection(&ua, &uc, false).with_endpoints(b.underlying(), &uc)?);
        let w = Roof::from_map(ChainMap::zero(&uc, &shift(&ua, 1)));
        HermTriangle::new(a, b, c, u, v, w)
    }

    /// Exactness of the long cohomology sequence; returns the largest
    /// relative norm of the consecutive composites.
    pub fn check_distinguished(&self) -> Result<f64> {
        let tol = Tolerances::default();
        let u = self.u.morphism()?;
        let v = self.v.morphism()?;
        let w = self.w.morphism()?;
        let u1 = self.u.shift(1).morphism()?;
        let mut comp: f64 = 0.0;
        for (second, first) in [(&v, &u), (&w, &v), (&u1, &w)] {
            let p = second.after(first)?;
            for i in p.degrees() {
                let scale = 1.0 + frob(&second.block(i)) * frob(&first.block(i));
                comp = comp.max(frob(&p.block(i)) / scale);
            }
        }
        if comp > 1e-8 {
            return Err(Error::NotDistinguished(format!("consecutive maps compose to {comp:e}")));
        }
        let (ru, rv, rw, ru1) = (u.ranks(&tol), v.ranks(&tol), w.ranks(&tol), u1.ranks(&tol));
        let rk = |m: &std::collections::BTreeMap<i32, usize>, i: i32| m.get(&i).copied().unwrap_or(0);
        let mut degs: Vec<i32> = u.degrees().into_iter().chain(v.degrees()).chain(w.degrees()).chain(u1.degrees()).collect();
        degs.sort_unstable();
        degs.dedup();
        for i in degs {
            let exact_b = dim(&v.source, i) == rk(&ru, i) + rk(&rv, i);
            let exact_c = dim(&w.source, i) == rk(&rv, i) + rk(&rw, i);
            let exact_a1 = dim(&u1.source, i) == rk(&rw, i) + rk(&ru1, i);
            if !(exact_b && exact_c && exact_a1) {
                return Err(Error::NotDistinguished(format!("long cohomology sequence is not exact in degree {i}")));
            }
        }
        Ok(comp)
    }

    /// `B → C → A[1] → B[1]` with third map `−u[1]`.
    pub fn rotate(&self) -> Result<HermTriangle> {
        HermTriangle::new(
            self.b.clone(),
            self.c.clone(),
            self.a.shift(1),
            self.v.clone(),
            self.w.clone(),
            self.u.shift(1).neg(),
        )
    }
}

/// Class of a triangle together with the spread of the class when the
/// comparison isomorphism is moved inside its solution space.
#[derive(Clone, Copy, Debug)]
pub struct TriangleClass {
    pub value: f64,
    pub independence: f64,
}

pub fn class_of_triangle(t: &HermTriangle) -> Result<f64> {
    Ok(triangle_class(t)?.value)
}

/// `[α]` for `α: ocone(u) ⇢ C` compatible with the identity on `A` and `B`.
pub fn triangle_class(t: &HermTriangle) -> Result<TriangleClass> {
    t.check_distinguished()?;
    let hc = herm_cone(&t.a, &t.b, &t.u)?;
    let v2 = CohoMap::of(&hc.inclusion())?;
    let w2 = CohoMap::of(&hc.projection())?;
    let v = t.v.morphism()?;
    let w = t.w.morphism()?;
    let (x, y) = (v2.target.clone(), v.target.clone());
    let cmp = solve_comparison(&x, &y, &[(v2, v)], &[(w, w2)])?;
    if cmp.residual > 1e-8 || !cmp.alpha.is_iso() {
        return Err(Error::NotDistinguished(format!("no comparison with the cone (residual {:e})", cmp.residual)));
    }
    let value = class_of_coho(&cmp.alpha, &hc.structure, &t.c)?;
    // second comparison: move along every free direction at once
    let mut independence: f64 = 0.0;
    if !cmp.null.is_empty() {
        let mut alt = cmp.alpha.clone();
        for (k, n) in cmp.null.iter().enumerate() {
            alt = alt.add(&n.scale(0.3 + 0.1 * (k % 3) as f64))?;
        }
        if alt.is_iso() {
            independence = (class_of_coho(&alt, &hc.structure, &t.c)? - value).abs();
        }
    }
    Ok(TriangleClass { value, independence })
}

/// `cone(v) → A[1]` for `v: B → cone(f)`, projecting on the `A` component.
pub fn cone_of_inclusion_to_shift(f: &ChainMap) -> ChainMap {
    let v = cone_inclusion(f);
    let cv = cone(&v);
    let (a, b) = (f.source(), f.target());
    let a1 = shift(a, 1);
    ChainMap::from_fn(&cv, &a1, |i| {
        let (nb1, na1, nb) = (b.dim(i + 1), a.dim(i + 1), b.dim(i));
        hstack(&hstack(&zeros(na1, nb1), &eye(na1)), &zeros(na1, nb))
    })
    .expect("projection shapes")
}

/// `B → cone(cone(f)[−1] → A)`, `y ↦ (0, y, 0)`.
pub fn target_to_cone_of_projection(f: &ChainMap) -> ChainMap {
    let p = shift_map(&cone_projection(f), -1);
    let cp = cone(&p);
    let (a, b) = (f.source(), f.target());
    ChainMap::from_fn(b, &cp, |i| {
        let (na1, nb, na) = (a.dim(i + 1), b.dim(i), a.dim(i));
        vstack(&vstack(&zeros(na1, nb), &eye(nb)), &zeros(na, nb))
    })
    .expect("inclusion shapes")
}

/// Classes of the two natural isomorphisms
/// `ocone(B, ocone(f)) ⇢ A[1]` and `B ⇢ ocone(ocone(f)[−1], A)`.
pub fn cone_rotation_classes(a: &HermStructure, b: &HermStructure, f: &Roof) -> Result<(f64, f64)> {
    let hc = herm_cone(a, b, f)?;
    let fu = hc.map.clone();
    let v = Roof::from_map(hc.inclusion());
    let c2 = herm_cone(b, &hc.structure, &v)?;
    let p1 = Roof::from_map(cone_of_inclusion_to_shift(&fu).with_endpoints(c2.structure.underlying(), &shift(a.underlying(), 1))?);
    let first = super::structure::class_of_morphism(&p1, &c2.structure, &a.shift(1))?;

    let cm1 = hc.structure.shift(-1);
    let p = Roof::from_map(shift_map(&hc.projection(), -1).with_endpoints(cm1.underlying(), a.underlying())?);
    let c3 = herm_cone(&cm1, a, &p)?;
    let j = Roof::from_map(target_to_cone_of_projection(&fu).with_endpoints(b.underlying(), c3.structure.underlying())?);
    let second = super::structure::class_of_morphism(&j, b, &c3.structure)?;
    Ok((first, second))
}
