//! Seeded random instances: complexes with prescribed singular values,
//! chain maps, quasi-isomorphisms, homotopy-commutative squares and
//! meager complexes built by the closure operations.
//!
//! The PRNG is ChaCha8 (`rand_chacha`), so every case is replayable from
//! its seed.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermlin::{
    cone, direct_sum, hodge_decompose, hom_complex, shift, tensor, ChainMap, HermComplex, Homotopy,
};
use crate::linalg::{c, eye, svd, zeros, CMat, C64};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for case `k` of a suite seeded with `seed`.
pub fn case_rng(seed: u64, k: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k + 1);
    r
}

pub fn cgauss(r: &mut Rng) -> C64 {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    c(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(r: &mut Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cgauss(r))
}

pub fn random_unitary(r: &mut Rng, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let d = svd(&random_matrix(r, n, n));
    &d.u * d.v.adjoint()
}

/// Well-conditioned invertible matrix: unitary times a small perturbation
/// of the identity times a mild diagonal scaling (condition number < ~10).
pub fn random_invertible(r: &mut Rng, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let u = random_unitary(r, n);
    let p = eye(n) + random_matrix(r, n, n) * c(0.3 / (n as f64).sqrt(), 0.0);
    let s = CMat::from_fn(n, n, |i, j| {
        if i == j {
            let x: f64 = r.sample(StandardNormal);
            c((0.3 * x).exp(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    u * p * s
}

pub fn random_pd(r: &mut Rng, n: usize) -> CMat {
    let b = random_invertible(r, n);
    let g = b.adjoint() * b;
    crate::linalg::hermitian_part(&g)
}

/// Degree layout of a random complex: `harm[k]` harmonic dims and
/// `ranks[k]` the rank of `d^{lo+k}`.
#[derive(Clone, Debug)]
pub struct Shape {
    pub lo: i32,
    pub harm: Vec<usize>,
    pub ranks: Vec<usize>,
}

impl Shape {
    pub fn dims(&self) -> Vec<usize> {
        (0..self.harm.len())
            .map(|k| self.harm[k] + self.ranks.get(k).copied().unwrap_or(0) + if k > 0 { self.ranks[k - 1] } else { 0 })
            .collect()
    }
}

/// Shape with at most `max_deg` degrees and at most `max_dim` per degree.
pub fn random_shape(r: &mut Rng, max_deg: usize, max_dim: usize, acyclic: bool) -> Shape {
    let n = r.gen_range(2..=max_deg.max(2));
    let lo = r.gen_range(-2..=1);
    let mut harm = vec![0; n];
    let mut ranks = vec![0; n - 1];
    for k in 0..n - 1 {
        let room = max_dim.saturating_sub(if k > 0 { ranks[k - 1] } else { 0 }).max(1);
        ranks[k] = r.gen_range(0..=room.min(3));
    }
    if !acyclic {
        for k in 0..n {
            let used = ranks.get(k).copied().unwrap_or(0) + if k > 0 { ranks[k - 1] } else { 0 };
            let room = max_dim.saturating_sub(used);
            harm[k] = r.gen_range(0..=room.min(2));
        }
    }
    if ranks.iter().all(|&x| x == 0) && harm.iter().all(|&x| x == 0) {
        ranks[0] = 1;
    }
    Shape { lo, harm, ranks }
}

/// Complex of the given shape with log singular values `logs[k]` on `d^{lo+k}`,
/// conjugated by random invertible maps. Returns it with the τ it has by
/// construction (meaningful when acyclic).
pub fn complex_with_logs(r: &mut Rng, shape: &Shape, logs: &[Vec<f64>]) -> (HermComplex, f64) {
    let n = shape.harm.len();
    let dims = shape.dims();
    let mut t = 0.0;
    // orthonormal model: degree k is [B (ranks[k-1]) | H | K (ranks[k])]
    let mut model = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let mut d = zeros(dims[k + 1], dims[k]);
        let off_k = dims[k] - shape.ranks[k];
        for j in 0..shape.ranks[k] {
            d[(j, off_k + j)] = c(logs[k][j].exp(), 0.0);
            t += if (shape.lo + k as i32).rem_euclid(2) == 0 { logs[k][j] } else { -logs[k][j] };
        }
        model.push(d);
    }
    let ts: Vec<CMat> = dims.iter().map(|&m| random_invertible(r, m)).collect();
    let tinv: Vec<CMat> = ts.iter().map(|m| m.clone().try_inverse().expect("invertible")).collect();
    let grams = (0..n).map(|k| crate::linalg::hermitian_part(&(tinv[k].adjoint() * &tinv[k]))).collect();
    let diffs = (0..n.saturating_sub(1)).map(|k| &ts[k + 1] * &model[k] * &tinv[k]).collect();
    (HermComplex::from_parts(shape.lo, grams, diffs).expect("generated shapes"), t)
}

pub fn random_logs(r: &mut Rng, shape: &Shape) -> Vec<Vec<f64>> {
    shape.ranks.iter().map(|&k| (0..k).map(|_| r.gen_range(-1.5..1.5)).collect()).collect()
}

/// Random acyclic complex and its τ by construction.
pub fn random_acyclic(r: &mut Rng, max_deg: usize, max_dim: usize) -> (HermComplex, f64) {
    let shape = random_shape(r, max_deg, max_dim, true);
    let logs = random_logs(r, &shape);
    complex_with_logs(r, &shape, &logs)
}

/// Random complex, usually with cohomology.
pub fn random_complex(r: &mut Rng, max_deg: usize, max_dim: usize) -> HermComplex {
    let shape = random_shape(r, max_deg, max_dim, false);
    let logs = random_logs(r, &shape);
    complex_with_logs(r, &shape, &logs).0
}

/// Random complex with prescribed harmonic dimensions `harm[k]` in degree `lo + k`.
pub fn random_with_cohomology(r: &mut Rng, lo: i32, harm: &[usize], max_rank: usize) -> HermComplex {
    let n = harm.len() + 1;
    let mut h = harm.to_vec();
    h.push(0);
    let ranks = (0..n - 1).map(|_| r.gen_range(0..=max_rank)).collect();
    let shape = Shape { lo, harm: h, ranks };
    let logs = random_logs(r, &shape);
    complex_with_logs(r, &shape, &logs).0
}

pub fn random_homotopy(r: &mut Rng, s: &HermComplex, t: &HermComplex, scale: f64) -> Homotopy {
    let lo = s.lo().max(t.lo() + 1);
    let hi = s.hi().min(t.hi() + 1);
    let maps = (lo..=hi).map(|i| (i, random_matrix(r, t.dim(i - 1), s.dim(i)) * c(scale, 0.0))).collect();
    Homotopy::new(s.clone(), t.clone(), maps).expect("homotopy shapes")
}

/// `ι_T φ π_S` for per-degree blocks `φ^i` between harmonic coordinates.
pub fn realize_blocks(s: &HermComplex, t: &HermComplex, blocks: &BTreeMap<i32, CMat>) -> ChainMap {
    let hs = hodge_decompose(s).expect("source splitting");
    let ht = hodge_decompose(t).expect("target splitting");
    ChainMap::from_fn(s, t, |i| {
        let a = hs.harmonic(i, s.dim(i));
        let b = ht.harmonic(i, t.dim(i));
        match blocks.get(&i) {
            Some(phi) if a.ncols() > 0 && b.ncols() > 0 => b * phi * a.adjoint() * s.gram(i),
            _ => zeros(t.dim(i), s.dim(i)),
        }
    })
    .expect("realized shapes")
}

/// Random chain map: a random map on cohomology plus a null-homotopic part.
pub fn random_chain_map(r: &mut Rng, s: &HermComplex, t: &HermComplex) -> ChainMap {
    let hs = hodge_decompose(s).expect("source splitting");
    let ht = hodge_decompose(t).expect("target splitting");
    let lo = s.lo().max(t.lo());
    let hi = s.hi().min(t.hi());
    let blocks = (lo..=hi)
        .map(|i| (i, random_matrix(r, ht.harmonic_dim(i), hs.harmonic_dim(i))))
        .collect();
    let base = realize_blocks(s, t, &blocks);
    base.add(&random_homotopy(r, s, t, 0.5).boundary()).expect("same endpoints")
}

/// Random quasi-isomorphism out of `s` into a freshly generated target.
pub fn random_quasi_iso(r: &mut Rng, s: &HermComplex) -> ChainMap {
    let hs = hodge_decompose(s).expect("source splitting");
    let (lo, hi) = (s.lo(), s.hi());
    let harm: Vec<usize> = (lo..=hi).map(|i| hs.harmonic_dim(i)).collect();
    let t = random_with_cohomology(r, lo, &harm, 2);
    let blocks = (lo..=hi).map(|i| (i, random_invertible(r, hs.harmonic_dim(i)))).collect();
    realize_blocks(s, &t, &blocks).add(&random_homotopy(r, s, &t, 0.5).boundary()).expect("same endpoints")
}

/// `T·C` with `d′ = T d T⁻¹`, `G′ = T^{-H} G T^{-1}`: an isometric copy of `C`,
/// returned with the isometry `C → T·C`.
pub fn isometric_copy(r: &mut Rng, cx: &HermComplex) -> (HermComplex, ChainMap) {
    if cx.is_empty_support() {
        return (cx.clone(), ChainMap::identity(cx));
    }
    let ts: BTreeMap<i32, CMat> = cx.degrees().map(|i| (i, random_invertible(r, cx.dim(i)))).collect();
    let inv: BTreeMap<i32, CMat> = ts.iter().map(|(&i, m)| (i, m.clone().try_inverse().expect("invertible"))).collect();
    let grams = cx.degrees().map(|i| crate::linalg::hermitian_part(&(inv[&i].adjoint() * cx.gram(i) * &inv[&i]))).collect();
    let diffs = (cx.lo()..cx.hi()).map(|i| &ts[&(i + 1)] * cx.diff(i) * &inv[&i]).collect();
    let out = HermComplex::from_parts(cx.lo(), grams, diffs).expect("copy shapes");
    let iso = ChainMap::from_fn(cx, &out, |i| ts[&i].clone()).expect("copy map");
    (out, iso)
}

/// Square `E′ →f′ F′`, `g′: E′ → E`, `g: F′ → F`, `f: E → F` with a homotopy
/// `h` for `g f′ − f g′ = dh + hd`.
#[derive(Clone, Debug)]
pub struct Square {
    pub f1: ChainMap,
    pub f: ChainMap,
    pub g1: ChainMap,
    pub g: ChainMap,
    pub h: Homotopy,
}

/// `E = T·E′ ⊕ Z` with `g′ = (T, 0)`; then `f` is forced on the first summand by
/// `f g′ = g f′ − dh − hd` and random on `Z`.
pub fn random_square(r: &mut Rng, acyclic: bool, max_dim: usize) -> Square {
    let pick = |r: &mut Rng| if acyclic { random_acyclic(r, 3, max_dim).0 } else { random_complex(r, 3, max_dim) };
    let e1 = pick(r);
    let ff1 = pick(r);
    let ff = pick(r);
    let z = pick(r);
    let f1 = random_chain_map(r, &e1, &ff1);
    let g = random_chain_map(r, &ff1, &ff);
    let h = random_homotopy(r, &e1, &ff, 0.5);
    let (te, t) = isometric_copy(r, &e1);
    let e = direct_sum(&te, &z);
    let fz = random_chain_map(r, &z, &ff);
    let forced = g.compose(&f1).unwrap().sub(&h.boundary()).unwrap();
    let lo = e.lo().min(e1.lo()).min(ff.lo());
    let hi = e.hi().max(e1.hi()).max(ff.hi());
    let mut fmaps = BTreeMap::new();
    let mut gmaps = BTreeMap::new();
    for i in lo..=hi {
        let tinv = if te.dim(i) > 0 { t.map(i).try_inverse().expect("invertible") } else { zeros(0, 0) };
        let left = forced.map(i) * tinv;
        fmaps.insert(i, crate::linalg::hstack(&left, &fz.map(i)));
        gmaps.insert(i, crate::linalg::vstack(&t.map(i), &zeros(z.dim(i), e1.dim(i))));
    }
    let f = ChainMap::new(e.clone(), ff.clone(), fmaps).expect("f shapes");
    let g1 = ChainMap::new(e1.clone(), e, gmaps).expect("g′ shapes");
    Square { f1, f, g1, g, h }
}

/// A member of M₀: an orthogonally split `cone(Id_A)` or `F ⊥ F[1]` with `F`
/// acyclic, moved by a random isometry.
pub fn random_m0(r: &mut Rng, max_dim: usize) -> HermComplex {
    let base = if r.gen_bool(0.5) {
        let n = r.gen_range(1..=max_dim.clamp(1, 3));
        let a = HermComplex::single(r.gen_range(-1..=1), random_pd(r, n));
        cone(&ChainMap::identity(&a))
    } else {
        let (f, _) = random_acyclic(r, 3, max_dim.min(3));
        direct_sum(&f, &shift(&f, 1))
    };
    isometric_copy(r, &base).0
}

/// Meager complex by iterated closure operations starting from M₀.
/// The recipe is returned for failure reports.
pub fn random_meager(r: &mut Rng, depth: usize, max_dim: usize) -> (HermComplex, String) {
    let mut cx = random_m0(r, max_dim);
    let mut recipe = String::from("m0");
    for _ in 0..depth {
        let op = r.gen_range(0..6);
        let next = match op {
            0 => {
                let k = r.gen_range(-2..=2);
                recipe = format!("shift({recipe},{k})");
                shift(&cx, k)
            }
            1 => {
                let (m2, rec2) = random_meager(r, 0, max_dim);
                recipe = format!("sum({recipe},{rec2})");
                direct_sum(&cx, &m2)
            }
            2 => {
                let other = random_complex(r, 2, 2);
                recipe = format!("tensor({recipe},C)");
                tensor(&cx, &other)
            }
            3 => {
                let other = random_complex(r, 2, 2);
                recipe = format!("hom(C,{recipe})");
                hom_complex(&other, &cx)
            }
            4 => {
                // both ends meager, so the cone is
                let (m2, rec2) = random_meager(r, 0, max_dim);
                let f = random_chain_map(r, &cx, &m2);
                recipe = format!("cone({recipe}->{rec2})");
                cone(&f)
            }
            _ => {
                recipe = format!("iso({recipe})");
                isometric_copy(r, &cx).0
            }
        };
        // keep sizes at desk scale
        if next.degrees().all(|i| next.dim(i) <= 8) && next.hi() - next.lo() < 6 {
            cx = next;
        } else {
            recipe.push_str("[skipped]");
        }
    }
    (cx, recipe)
}


/// Random complex `M` with the cohomology of `t` and a quasi-isomorphism `M → t`.
pub fn random_qiso_into(r: &mut Rng, t: &HermComplex) -> ChainMap {
    let ht = hodge_decompose(t).expect("target splitting");
    if t.is_empty_support() {
        return ChainMap::identity(t);
    }
    let harm: Vec<usize> = t.degrees().map(|i| ht.harmonic_dim(i)).collect();
    let m = random_with_cohomology(r, t.lo(), &harm, 2);
    let blocks = t.degrees().map(|i| (i, random_invertible(r, ht.harmonic_dim(i)))).collect();
    realize_blocks(&m, t, &blocks).add(&random_homotopy(r, &m, t, 0.5).boundary()).expect("same endpoints")
}

/// Random hermitian structure on `u`: a fresh metric representative joined
/// to `u` by a roof with a random middle.
pub fn random_structure(r: &mut Rng, u: &HermComplex) -> crate::derived::HermStructure {
    use crate::derived::{HermStructure, Roof};
    let n_to_u = random_qiso_into(r, u);
    let n = n_to_u.source().clone();
    let s = random_qiso_into(r, &n);
    let m = s.source().clone();
    let g = n_to_u.compose(&s).expect("composable").add(&random_homotopy(r, &m, u, 0.5).boundary()).expect("same ends");
    let roof = Roof::new(s, g).expect("random structural roof");
    HermStructure::new(u.clone(), n, roof).expect("random structure")
}

/// Random graded map between cohomology dimensions.
pub fn random_coho(r: &mut Rng, src: &crate::derived::Dims, tgt: &crate::derived::Dims) -> crate::derived::CohoMap {
    let blocks = src
        .iter()
        .filter_map(|(&i, &n)| tgt.get(&i).map(|&m| (i, random_matrix(r, m, n))))
        .collect();
    crate::derived::CohoMap::new(src.clone(), tgt.clone(), blocks).expect("block shapes")
}

/// Complex of structured objects `F_{low+len−1} → … → F_low` over cohomological
/// degrees 0 and 1. Per degree the cohomology groups form `B_k ⊕ B_{k−1} (⊕ Z_k)`
/// with the evident maps, in a random basis; `exact` drops the `Z_k`.
pub fn random_object_complex(r: &mut Rng, low: i32, len: usize, exact: bool) -> crate::derived::ObjectComplex {
    use crate::derived::{realize, CohoMap, Dims, ObjectComplex, Roof};
    const DEGS: [i32; 2] = [0, 1];
    // per degree: b[k] = dim B_k (k = 0..len−1, b[len−1] = 0), z[k]
    let mut dims: Vec<Dims> = vec![Dims::new(); len];
    let mut raw: Vec<BTreeMap<i32, CMat>> = vec![BTreeMap::new(); len.saturating_sub(1)];
    let mut basis: Vec<BTreeMap<i32, CMat>> = vec![BTreeMap::new(); len];
    for &i in &DEGS {
        let b: Vec<usize> = (0..len).map(|k| if k + 1 < len { r.gen_range(0..=2) } else { 0 }).collect();
        let z: Vec<usize> = (0..len).map(|_| if exact { 0 } else { r.gen_range(0..=1) }).collect();
        let bm = |k: usize| if k == 0 { 0 } else { b[k - 1] };
        for k in 0..len {
            let n = b[k] + bm(k) + z[k];
            if n > 0 {
                dims[k].insert(i, n);
                basis[k].insert(i, random_invertible(r, n));
            }
        }
        // c_{k+1}: V_{k+1} = B_{k+1} ⊕ B_k ⊕ Z → V_k = B_k ⊕ B_{k−1} ⊕ Z, (x, y, z) ↦ (y, 0, 0)
        for k in 0..len.saturating_sub(1) {
            let (ns, nt) = (b[k + 1] + b[k] + z[k + 1], b[k] + bm(k) + z[k]);
            let mut m = zeros(nt, ns);
            for t in 0..b[k] {
                m[(t, b[k + 1] + t)] = c(1.0, 0.0);
            }
            if ns > 0 && nt > 0 {
                raw[k].insert(i, m);
            }
        }
    }
    let objects: Vec<crate::derived::HermStructure> = dims
        .iter()
        .map(|d| {
            let harm: Vec<usize> = DEGS.iter().map(|i| d.get(i).copied().unwrap_or(0)).collect();
            let u = random_with_cohomology(r, DEGS[0], &harm, 2);
            random_structure(r, &u)
        })
        .collect();
    let maps = (0..len.saturating_sub(1))
        .map(|k| {
            let blocks = raw[k]
                .iter()
                .map(|(&i, m)| {
                    let gt = &basis[k][&i];
                    let gs = basis[k + 1][&i].clone().try_inverse().expect("invertible basis change");
                    (i, gt * m * gs)
                })
                .collect();
            let phi = CohoMap::new(dims[k + 1].clone(), dims[k].clone(), blocks).expect("graded map");
            let (s, t) = (objects[k + 1].underlying(), objects[k].underlying());
            Roof::from_map(realize(s, t, &phi).expect("realized differential"))
        })
        .collect();
    ObjectComplex::new(low, objects, maps).expect("generated complex of objects")
}

/// Null-homotopic morphism `f_k = c^M h_k + h_{k−1} c^E` between complexes of
/// objects on the same index range, with random `h_k: E_k → M_{k+1}`.
pub fn random_object_morphism(
    r: &mut Rng,
    e: &crate::derived::ObjectComplex,
    m: &crate::derived::ObjectComplex,
) -> Vec<crate::derived::Roof> {
    use crate::derived::{realize, CohoMap, Roof};
    let (low, top) = (e.low(), e.top());
    let dims = |x: &crate::derived::ObjectComplex, k: i32| x.object(k).map(|o| o.rho().expect("structure").target);
    let h: BTreeMap<i32, CohoMap> = (low..top)
        .map(|k| (k, random_coho(r, &dims(e, k).unwrap(), &dims(m, k + 1).unwrap())))
        .collect();
    (low..=top)
        .map(|k| {
            let (de, dm) = (dims(e, k).unwrap(), dims(m, k).unwrap());
            let mut f = CohoMap::zero(&de, &dm);
            if let (Some(hk), Some(cm)) = (h.get(&k), m.differential(k + 1)) {
                f = f.add(&cm.morphism().unwrap().after(hk).unwrap()).unwrap();
            }
            if let (Some(hk1), Some(ce)) = (h.get(&(k - 1)), e.differential(k)) {
                f = f.add(&hk1.after(&ce.morphism().unwrap()).unwrap()).unwrap();
            }
            let (s, t) = (e.object(k).unwrap().underlying(), m.object(k).unwrap().underlying());
            Roof::from_map(realize(s, t, &f).expect("realized component"))
        })
        .collect()
}
