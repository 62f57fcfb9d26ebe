//! Toy category of smooth morphisms at a point: a morphism is a linear map
//! between tangent fibers plus a hermitian structure on its tangent complex
//! `T_X → T_Y` (degrees 0 and 1).

use rand::Rng as _;
use serde_json::{json, Value};

use crate::derived::verify::structure_json;
use crate::derived::{
    herm_cone, realize, same_complex, solve_comparison, structure_distance, torsor_add, CohoMap, HermStructure, Roof,
};
use crate::gen::{case_rng, random_matrix, random_pd, random_structure, Rng};
use crate::hermlin::{cone, cone_projection, shift, shift_map, ChainMap, HermComplex, HermSpace};
use crate::linalg::{eye, hstack, lstsq, max_abs, null_space, zeros, CMat};
use crate::torsion::tau;
use crate::verify::{check_result, Check};
use crate::{Error, Result, Tolerances};

#[derive(Clone, Debug)]
pub struct ToySpace {
    pub label: String,
    pub tangent: HermSpace,
}

impl ToySpace {
    pub fn new(label: &str, gram: CMat) -> Result<ToySpace> {
        Ok(ToySpace { label: label.to_string(), tangent: HermSpace::new(gram)? })
    }

    pub fn dim(&self) -> usize {
        self.tangent.dim()
    }
}

/// `[T_X --df--> T_Y]` with `T_X` in degree 0.
pub fn tangent_complex(source: &ToySpace, target: &ToySpace, df: &CMat) -> Result<HermComplex> {
    if df.shape() != (target.dim(), source.dim()) {
        return Err(Error::Shape(format!(
            "df is {}x{}, expected {}x{}",
            df.nrows(),
            df.ncols(),
            target.dim(),
            source.dim()
        )));
    }
    HermComplex::two_term(0, source.tangent.gram.clone(), target.tangent.gram.clone(), df.clone())
}

#[derive(Clone, Debug)]
pub struct ToyMorphism {
    pub source: ToySpace,
    pub target: ToySpace,
    pub df: CMat,
    pub t_struct: HermStructure,
}

impl ToyMorphism {
    pub fn new(source: ToySpace, target: ToySpace, df: CMat, t_struct: HermStructure) -> Result<ToyMorphism> {
        let t = tangent_complex(&source, &target, &df)?;
        if !same_complex(&t, t_struct.underlying()) {
            return Err(Error::Mismatch("structure does not live on the tangent complex".into()));
        }
        Ok(ToyMorphism { source, target, df, t_struct })
    }

    /// Structure given by the metrics of the two tangent fibers.
    pub fn ambient(source: ToySpace, target: ToySpace, df: CMat) -> Result<ToyMorphism> {
        let t = tangent_complex(&source, &target, &df)?;
        let h = HermStructure::trivial(&t);
        ToyMorphism::new(source, target, df, h)
    }

    pub fn identity(x: &ToySpace) -> ToyMorphism {
        ToyMorphism::ambient(x.clone(), x.clone(), eye(x.dim())).expect("square identity")
    }

    pub fn tangent(&self) -> &HermComplex {
        self.t_struct.underlying()
    }

    pub fn with_structure(&self, h: HermStructure) -> Result<ToyMorphism> {
        ToyMorphism::new(self.source.clone(), self.target.clone(), self.df.clone(), h)
    }
}

/// The chain-level pieces attached to a composable pair.
struct Composable {
    tf: HermComplex,
    tg: HermComplex,
    tgf: HermComplex,
    /// `(Id, dg): T_f → T_gf`.
    a: ChainMap,
    /// `(df, Id): T_gf → T_g`.
    b: ChainMap,
    /// `T_g ⇢ T_f[1]` through `T_g ← cone(a) → T_f[1]`.
    w: Roof,
}

fn composable(g: &ToyMorphism, f: &ToyMorphism) -> Result<Composable> {
    if f.target.label != g.source.label || f.target.tangent.gram != g.source.tangent.gram {
        return Err(Error::Mismatch(format!("{} does not start where {} ends", g.source.label, f.target.label)));
    }
    let tf = f.tangent().clone();
    let tg = g.tangent().clone();
    let dgf = &g.df * &f.df;
    let tgf = tangent_complex(&f.source, &g.target, &dgf)?;
    let nx = f.source.dim();
    let nz = g.target.dim();
    let a = ChainMap::from_fn(&tf, &tgf, |i| if i == 0 { eye(nx) } else { g.df.clone() })?;
    let b = ChainMap::from_fn(&tgf, &tg, |i| if i == 0 { f.df.clone() } else { eye(nz) })?;
    // b∘a is the boundary of Id: T_f^1 → T_g^0, which gives cone(a) → T_g
    let ca = cone(&a);
    let ny = f.target.dim();
    let q = ChainMap::from_fn(&ca, &tg, |i| match i {
        0 => hstack(&eye(ny), &f.df),
        1 => eye(nz),
        -1 => zeros(0, nx),
        _ => zeros(tg.dim(i), ca.dim(i)),
    })?;
    let w = Roof::new(q, cone_projection(&a))?;
    Ok(Composable { tf, tg, tgf, a, b, w })
}

/// `ḡ∘f̄`: the structure on `T_gf` is the hermitian cone of the connecting
/// morphism `T_g[−1] ⇢ T_f`, carried to `T_gf` along the comparison with the
/// triangle `T_g[−1] → T_f → T_gf → T_g`.
pub fn compose(g: &ToyMorphism, f: &ToyMorphism) -> Result<ToyMorphism> {
    let c = composable(g, f)?;
    let delta = c.w.shift(-1);
    let hg1 = g.t_struct.shift(-1);
    let delta = Roof::new(
        delta.s().with_endpoints(delta.middle(), hg1.underlying())?,
        delta.g().with_endpoints(delta.middle(), &c.tf)?,
    )?;
    let hc = herm_cone(&hg1, &f.t_struct, &delta)?;
    // α: H(cone δ) → H(T_gf) with α∘incl = a and b∘α = −proj
    let incl = CohoMap::of(&hc.inclusion())?;
    let proj = CohoMap::of(&hc.projection().with_endpoints(hc.structure.underlying(), &c.tg)?)?;
    let a = CohoMap::of(&c.a)?;
    let b = CohoMap::of(&c.b)?;
    let (x, y) = (incl.target.clone(), a.target.clone());
    let cmp = solve_comparison(&x, &y, &[(incl, a)], &[(b, proj.scale(-1.0))])?;
    if cmp.residual > 1e-8 || !cmp.alpha.is_iso() {
        return Err(Error::NotDistinguished(format!("tangent triangle comparison fails ({:e})", cmp.residual)));
    }
    let h = transport(&hc.structure, &c.tgf, &cmp.alpha)?;
    ToyMorphism::new(f.source.clone(), g.target.clone(), &g.df * &f.df, h)
}

/// Structure on `u` from `h` along `α: H(U_h) → H(u)`, compacted.
fn transport(h: &HermStructure, u: &HermComplex, alpha: &CohoMap) -> Result<HermStructure> {
    let phi = alpha.after(&h.rho()?)?;
    let q = realize(h.metric(), u, &phi)?;
    HermStructure::from_map(q)?.compact()
}

/// `T̄_f` determined by `ḡ` and the composite: `ocone(T̄_gf, T̄_g)[−1]`,
/// carried to `T_f`.
pub fn solve_for_f(g: &ToyMorphism, gf: &ToyMorphism, df: &CMat) -> Result<HermStructure> {
    if df.shape() != (g.source.dim(), gf.source.dim()) {
        return Err(Error::Shape("df does not join the sources".into()));
    }
    let prod = &g.df * df;
    let scale = 1.0 + max_abs(&gf.df);
    if gf.target.label != g.target.label || max_abs(&(&prod - &gf.df)) > 1e-9 * scale {
        return Err(Error::Mismatch("composite is not g∘f".into()));
    }
    let f0 = ToyMorphism::ambient(gf.source.clone(), g.source.clone(), df.clone())?;
    let c = composable(g, &f0)?;
    let gf_struct = HermStructure::new(c.tgf.clone(), gf.t_struct.metric().clone(), gf.t_struct.roof().clone())?;
    let hc = herm_cone(&gf_struct, &g.t_struct, &Roof::from_map(c.b.clone()))?;
    // rotated triangle T_gf → T_g → T_f[1] → T_gf[1] with maps b, w, −a[1]
    let tf1 = shift(&c.tf, 1);
    let incl = CohoMap::of(&hc.inclusion())?;
    let proj = CohoMap::of(&hc.projection())?;
    let w = c.w.morphism()?;
    let a1 = CohoMap::of(&shift_map(&c.a, 1).neg())?;
    let (x, y) = (incl.target.clone(), w.target.clone());
    let cmp = solve_comparison(&x, &y, &[(incl, w)], &[(a1, proj)])?;
    if cmp.residual > 1e-8 || !cmp.alpha.is_iso() {
        return Err(Error::NotDistinguished(format!("rotated tangent triangle comparison fails ({:e})", cmp.residual)));
    }
    let on_shift = transport(&hc.structure, &tf1, &cmp.alpha)?;
    let h = on_shift.shift(-1);
    HermStructure::new(c.tf, h.metric().clone(), h.roof().clone())
}

/// `h̄∘(ḡ∘f̄)` against `(h̄∘ḡ)∘f̄`.
pub fn verify_associativity(f: &ToyMorphism, g: &ToyMorphism, h: &ToyMorphism) -> Result<f64> {
    let left = compose(h, &compose(g, f)?)?;
    let right = compose(&compose(h, g)?, f)?;
    structure_distance(&left.t_struct, &right.t_struct).map(f64::abs)
}

/// Todd form at the point: `(1, χ(T_f))`.
pub fn todd_form(f: &ToyMorphism) -> (f64, i64) {
    (1.0, f.tangent().euler_char())
}

// ---------- submersions and fiber metrics ----------

fn kernel_basis(m: &CMat) -> CMat {
    null_space(m, 1e-10)
}

/// Structure on `T_f` of a submersion from a metric on `ker df`.
pub fn fiber_structure(f: &ToyMorphism, metric: &CMat) -> Result<HermStructure> {
    let k = kernel_basis(&f.df);
    if k.ncols() + f.target.dim() != f.source.dim() {
        return Err(Error::Invalid("df is not surjective".into()));
    }
    let fiber = HermComplex::single(0, metric.clone());
    let incl = ChainMap::from_fn(&fiber, f.tangent(), |i| if i == 0 { k.clone() } else { zeros(f.target.dim(), 0) })?;
    HermStructure::from_map(incl)
}

/// `0 → ker df → ker(dg df) → ker dg → 0` with chosen metrics, degrees 0..2.
pub fn fiber_ses(f: &ToyMorphism, g: &ToyMorphism, hf: &CMat, hgf: &CMat, hg: &CMat) -> Result<HermComplex> {
    let (kf, kgf, kg) = (kernel_basis(&f.df), kernel_basis(&(&g.df * &f.df)), kernel_basis(&g.df));
    let i = lstsq(&kgf, &kf, 1e-12);
    let p = lstsq(&kg, &(&f.df * &kgf), 1e-12);
    HermComplex::from_parts(0, vec![hf.clone(), hgf.clone(), hg.clone()], vec![i, p])
}

// ---------- randomized suite ----------

fn random_space(r: &mut Rng, label: &str, n: usize) -> ToySpace {
    ToySpace::new(label, random_pd(r, n)).expect("random metric")
}

fn random_morphism(r: &mut Rng, x: &ToySpace, y: &ToySpace) -> ToyMorphism {
    let df = random_matrix(r, y.dim(), x.dim());
    let t = tangent_complex(x, y, &df).expect("shapes");
    let h = random_structure(r, &t);
    ToyMorphism::new(x.clone(), y.clone(), df, h).expect("random morphism")
}

/// `dim X ≥ dim Y`, generic so surjective.
fn random_submersion(r: &mut Rng, x: &ToySpace, y: &ToySpace) -> ToyMorphism {
    let df = random_matrix(r, y.dim(), x.dim());
    ToyMorphism::ambient(x.clone(), y.clone(), df).expect("shapes")
}

fn morphism_json(f: &ToyMorphism) -> Value {
    json!({
        "source": f.source.label,
        "target": f.target.label,
        "df": crate::hermlin::json::mat_to_json(&f.df),
        "structure": structure_json(&f.t_struct),
    })
}

fn space_json(x: &ToySpace) -> Value {
    json!({"label": x.label, "gram": crate::hermlin::json::mat_to_json(&x.tangent.gram)})
}

/// One associativity case plus the example identities on small spaces.
pub fn assoc_case(seed: u64, k: u64, tol: &Tolerances) -> Vec<Check> {
    let _ = tol;
    let mut r = case_rng(seed, k);
    let mut out = Vec::new();
    let dims: Vec<usize> = (0..4).map(|_| r.gen_range(1..=3)).collect();
    let sp: Vec<ToySpace> = ["X", "Y", "Z", "W"].iter().zip(&dims).map(|(l, &n)| random_space(&mut r, l, n)).collect();
    let f = random_morphism(&mut r, &sp[0], &sp[1]);
    let g0 = random_morphism(&mut r, &sp[1], &sp[2]);
    let eps = r.gen_range(-2.0..2.0);
    let g = g0.with_structure(torsor_add(&g0.t_struct, eps)).expect("same complex");
    let h = random_morphism(&mut r, &sp[2], &sp[3]);
    let chain = || {
        json!({"seed": seed, "case": k, "spaces": sp.iter().map(space_json).collect::<Vec<_>>(),
               "morphisms": [morphism_json(&f), morphism_json(&g), morphism_json(&h)], "epsilon": eps})
    };
    out.push(check_result("associativity", verify_associativity(&f, &g, &h), 1e-8, chain));

    // offset on the middle morphism moves both composites by the same amount
    let shifted = (|| -> Result<f64> {
        let base = compose(&h, &compose(&g0, &f)?)?;
        let moved = compose(&h, &compose(&g, &f)?)?;
        Ok((structure_distance(&moved.t_struct, &base.t_struct)? - eps).abs())
    })();
    out.push(check_result("torsor-equivariance", shifted, 1e-8, chain));

    // identities and ambient metrics
    let ident = (|| -> Result<f64> {
        let l = compose(&f, &ToyMorphism::identity(&sp[0]))?;
        let rr = compose(&ToyMorphism::identity(&sp[1]), &f)?;
        Ok(structure_distance(&l.t_struct, &f.t_struct)?.abs().max(structure_distance(&rr.t_struct, &f.t_struct)?.abs()))
    })();
    out.push(check_result("identity-unit", ident, 1e-9, chain));
    let ambient = (|| -> Result<f64> {
        let fa = ToyMorphism::ambient(sp[0].clone(), sp[1].clone(), f.df.clone())?;
        let ga = ToyMorphism::ambient(sp[1].clone(), sp[2].clone(), g.df.clone())?;
        let direct = ToyMorphism::ambient(sp[0].clone(), sp[2].clone(), &g.df * &f.df)?;
        let comp = compose(&ga, &fa)?;
        Ok(structure_distance(&comp.t_struct, &direct.t_struct)?.abs())
    })();
    out.push(check_result("ambient-composite", ambient, 1e-9, chain));

    // solving for f undoes composition, and is equivariant
    let a = r.gen_range(-2.0..2.0);
    let solve = (|| -> Result<f64> {
        let gf = compose(&g, &f)?;
        let back = solve_for_f(&g, &gf, &f.df)?;
        let moved = gf.with_structure(torsor_add(&gf.t_struct, a))?;
        let back_a = solve_for_f(&g, &moved, &f.df)?;
        let again = compose(&g, &f.with_structure(back.clone())?)?;
        Ok(structure_distance(&back, &f.t_struct)?
            .abs()
            .max((structure_distance(&back_a, &f.t_struct)? - a).abs())
            .max(structure_distance(&again.t_struct, &gf.t_struct)?.abs()))
    })();
    out.push(check_result("solve-for-f", solve, 1e-8, || json!({"chain": chain(), "a": a})));

    // submersions X → Y → Z with independent fiber metrics
    let nx = r.gen_range(3..=5);
    let ny = r.gen_range(1..nx);
    let nz = r.gen_range(1..=ny);
    let (x, y, z) = (random_space(&mut r, "X", nx), random_space(&mut r, "Y", ny), random_space(&mut r, "Z", nz));
    let fs = random_submersion(&mut r, &x, &y);
    let gs = random_submersion(&mut r, &y, &z);
    let (hf, hgf, hg) = (random_pd(&mut r, nx - ny), random_pd(&mut r, nx - nz), random_pd(&mut r, ny - nz));
    let sub = (|| -> Result<f64> {
        let fb = fs.with_structure(fiber_structure(&fs, &hf)?)?;
        let gb = gs.with_structure(fiber_structure(&gs, &hg)?)?;
        let direct = ToyMorphism::ambient(x.clone(), z.clone(), &gs.df * &fs.df)?;
        let gfb = direct.with_structure(fiber_structure(&direct, &hgf)?)?;
        let comp = compose(&gb, &fb)?;
        let d = structure_distance(&comp.t_struct, &gfb.t_struct)?;
        let t = tau(&fiber_ses(&fs, &gs, &hf, &hgf, &hg)?)?;
        Ok((d - t).abs())
    })();
    out.push(check_result("submersion-ses", sub, 1e-8, || {
        json!({"seed": seed, "case": k, "X": space_json(&x), "Y": space_json(&y), "Z": space_json(&z),
               "df": crate::hermlin::json::mat_to_json(&fs.df), "dg": crate::hermlin::json::mat_to_json(&gs.df),
               "hf": crate::hermlin::json::mat_to_json(&hf), "hgf": crate::hermlin::json::mat_to_json(&hgf),
               "hg": crate::hermlin::json::mat_to_json(&hg)})
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::rng;
    use crate::linalg::real;

    fn space(label: &str, n: usize, r: &mut Rng) -> ToySpace {
        random_space(r, label, n)
    }

    #[test]
    fn identity_tangent_complex() {
        let mut r = rng(1);
        let x = space("X", 3, &mut r);
        let id = ToyMorphism::identity(&x);
        assert_eq!(id.tangent().diff(0), eye(3));
        assert_eq!(id.tangent().gram(1), x.tangent.gram);
        assert_eq!(id.tangent().euler_char(), 0);
    }

    #[test]
    fn immersion_and_submersion_cohomology() {
        let mut r = rng(2);
        let x = space("X", 2, &mut r);
        let y = space("Y", 4, &mut r);
        let imm = tangent_complex(&x, &y, &random_matrix(&mut r, 4, 2)).unwrap();
        let dims = crate::derived::cohomology_dims(&imm).unwrap();
        assert_eq!(dims.get(&0).copied().unwrap_or(0), 0);
        assert_eq!(dims[&1], 2);
        let sub = tangent_complex(&y, &x, &random_matrix(&mut r, 2, 4)).unwrap();
        let dims = crate::derived::cohomology_dims(&sub).unwrap();
        assert_eq!(dims[&0], 2);
        assert_eq!(dims.get(&1).copied().unwrap_or(0), 0);
    }

    #[test]
    fn shape_and_endpoint_errors() {
        let mut r = rng(3);
        let x = space("X", 2, &mut r);
        let y = space("Y", 3, &mut r);
        assert!(matches!(tangent_complex(&x, &y, &zeros(2, 3)), Err(Error::Shape(_))));
        let f = ToyMorphism::ambient(x.clone(), y.clone(), random_matrix(&mut r, 3, 2)).unwrap();
        assert!(matches!(compose(&f, &f), Err(Error::Mismatch(_))));
    }

    #[test]
    fn identities_compose_to_identity() {
        let mut r = rng(4);
        let x = space("X", 2, &mut r);
        let id = ToyMorphism::identity(&x);
        let c = compose(&id, &id).unwrap();
        assert!(structure_distance(&c.t_struct, &id.t_struct).unwrap().abs() < 1e-9);
        assert!(verify_associativity(&id, &id, &id).unwrap() < 1e-9);
    }

    #[test]
    fn ambient_chain_is_tight() {
        let mut r = rng(5);
        let x = space("X", 2, &mut r);
        let y = space("Y", 3, &mut r);
        let z = space("Z", 2, &mut r);
        let f = ToyMorphism::ambient(x.clone(), y.clone(), random_matrix(&mut r, 3, 2)).unwrap();
        let g = ToyMorphism::ambient(y, z.clone(), random_matrix(&mut r, 2, 3)).unwrap();
        let direct = ToyMorphism::ambient(x, z, &g.df * &f.df).unwrap();
        let d = structure_distance(&compose(&g, &f).unwrap().t_struct, &direct.t_struct).unwrap();
        assert!(d.abs() < 1e-9, "{d}");
    }

    #[test]
    fn unit_rescaled_fiber() {
        // X = C² → Y = C, fibers scaled by hand: ker df = span(e2)
        let x = ToySpace::new("X", eye(2)).unwrap();
        let y = ToySpace::new("Y", eye(1)).unwrap();
        let z = ToySpace::new("Z", zeros(0, 0)).unwrap();
        let fs = ToyMorphism::ambient(x.clone(), y.clone(), real(&[&[1.0, 0.0]])).unwrap();
        let gs = ToyMorphism::ambient(y, z.clone(), zeros(0, 1)).unwrap();
        let (hf, hgf, hg) = (real(&[&[4.0]]), eye(2), eye(1));
        let fb = fs.with_structure(fiber_structure(&fs, &hf).unwrap()).unwrap();
        let gb = gs.with_structure(fiber_structure(&gs, &hg).unwrap()).unwrap();
        let direct = ToyMorphism::ambient(x, z, zeros(0, 2)).unwrap();
        let gfb = direct.with_structure(fiber_structure(&direct, &hgf).unwrap()).unwrap();
        let d = structure_distance(&compose(&gb, &fb).unwrap().t_struct, &gfb.t_struct).unwrap();
        let t = tau(&fiber_ses(&fs, &gs, &hf, &hgf, &hg).unwrap()).unwrap();
        assert!(t.abs() > 0.1);
        assert!((d - t).abs() < 1e-9, "{d} vs {t}");
    }

    #[test]
    fn identity_g_recovers_composite() {
        let mut r = rng(6);
        let x = space("X", 2, &mut r);
        let y = space("Y", 3, &mut r);
        let f = random_morphism(&mut r, &x, &y);
        let id = ToyMorphism::identity(&y);
        let back = solve_for_f(&id, &f, &f.df).unwrap();
        assert!(structure_distance(&back, &f.t_struct).unwrap().abs() < 1e-8);
        assert!(matches!(solve_for_f(&id, &f, &zeros(3, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn todd_is_one() {
        let mut r = rng(7);
        let x = space("X", 2, &mut r);
        let y = space("Y", 3, &mut r);
        let f = random_morphism(&mut r, &x, &y);
        assert_eq!(todd_form(&f), (1.0, -1));
        let g = random_morphism(&mut r, &y, &x);
        let c = compose(&g, &f).unwrap();
        assert_eq!(todd_form(&c).0, todd_form(&g).0 * todd_form(&f).0);
    }

    #[test]
    fn suite_cases_pass() {
        for k in 0..8 {
            for ch in assoc_case(11, k, &Tolerances::default()) {
                assert!(ch.passes(), "case {k} rule {} residual {} {}", ch.rule, ch.residual, ch.inputs);
            }
        }
    }
}
