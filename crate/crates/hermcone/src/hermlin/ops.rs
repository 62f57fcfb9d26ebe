use std::collections::BTreeMap;

use super::{ChainMap, HermComplex, HermSpace};
use crate::linalg::{block_diag, blocks2, c, eye, hstack, inverse_pd, kron, vstack, zeros, CMat};
use crate::{Error, Result};

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Smallest range covering the non-empty supports, `None` if all are empty.
fn union_range(ranges: &[(i32, i32)]) -> Option<(i32, i32)> {
    ranges.iter().filter(|(a, b)| a <= b).fold(None, |acc, &(a, b)| match acc {
        None => Some((a, b)),
        Some((x, y)) => Some((x.min(a), y.max(b))),
    })
}

fn assemble(range: Option<(i32, i32)>, gram: impl Fn(i32) -> CMat, diff: impl Fn(i32) -> CMat) -> HermComplex {
    let Some((lo, hi)) = range else { return HermComplex::zero() };
    let grams = (lo..=hi).map(&gram).collect();
    let diffs = (lo..hi).map(&diff).collect();
    HermComplex::from_parts(lo, grams, diffs).expect("constructed shapes are consistent")
}

/// Mapping cone: `cone(f)^i = S^{i+1} ⊥ T^i`, `d(x, y) = (−dx, f x + dy)`.
pub fn cone(f: &ChainMap) -> HermComplex {
    let s = f.source();
    let t = f.target();
    let range = union_range(&[(s.lo() - 1, s.hi() - 1), (t.lo(), t.hi())]);
    assemble(
        range,
        |i| block_diag(&s.gram(i + 1), &t.gram(i)),
        |i| blocks2(&(-s.diff(i + 1)), &zeros(s.dim(i + 2), t.dim(i)), &f.map(i + 1), &t.diff(i)),
    )
}

/// `T → cone(f)`, `y ↦ (0, y)`.
pub fn cone_inclusion(f: &ChainMap) -> ChainMap {
    let cn = cone(f);
    let (s, t) = (f.source(), f.target());
    ChainMap::from_fn(t, &cn, |i| vstack(&zeros(s.dim(i + 1), t.dim(i)), &eye(t.dim(i)))).unwrap()
}

/// `cone(f) → S[1]`, `(x, y) ↦ x`.
pub fn cone_projection(f: &ChainMap) -> ChainMap {
    let cn = cone(f);
    let (s, t) = (f.source(), f.target());
    let s1 = shift(s, 1);
    ChainMap::from_fn(&cn, &s1, |i| hstack(&eye(s.dim(i + 1)), &zeros(s.dim(i + 1), t.dim(i)))).unwrap()
}

/// The isometry `cone(f) → cone(−f)`, `(x, y) ↦ (−x, y)`.
pub fn cone_sign_isometry(f: &ChainMap) -> ChainMap {
    let a = cone(f);
    let b = cone(&f.neg());
    let (s, t) = (f.source(), f.target());
    ChainMap::from_fn(&a, &b, |i| block_diag(&(-eye(s.dim(i + 1))), &eye(t.dim(i)))).unwrap()
}

/// Degreewise scalar map `x ↦ ε(i)·x` between complexes of equal shape.
pub fn sign_map(source: &HermComplex, target: &HermComplex, eps: impl Fn(i32) -> f64) -> Result<ChainMap> {
    if !source.same_shape(target) {
        return Err(Error::Shape("sign map between different shapes".into()));
    }
    ChainMap::from_fn(source, target, |i| eye(source.dim(i)) * c(eps(i), 0.0))
}

/// `C[k]^i = C^{i+k}`, differential times `(−1)^k`.
pub fn shift(cx: &HermComplex, k: i32) -> HermComplex {
    if cx.is_empty_support() {
        return HermComplex::zero();
    }
    let s = sign(k);
    let spaces: BTreeMap<i32, HermSpace> = cx.spaces().iter().map(|(&i, sp)| (i - k, sp.clone())).collect();
    let diffs: BTreeMap<i32, CMat> = cx.diffs().iter().map(|(&i, d)| (i - k, d * c(s, 0.0))).collect();
    HermComplex::new(cx.lo() - k, cx.hi() - k, spaces, diffs).unwrap()
}

/// `f[k]^i = f^{i+k}`, no sign.
pub fn shift_map(f: &ChainMap, k: i32) -> ChainMap {
    let maps = f.maps().iter().map(|(&i, m)| (i - k, m.clone())).collect();
    ChainMap::new(shift(f.source(), k), shift(f.target(), k), maps).unwrap()
}

pub fn direct_sum(a: &HermComplex, b: &HermComplex) -> HermComplex {
    let range = union_range(&[(a.lo(), a.hi()), (b.lo(), b.hi())]);
    assemble(range, |i| block_diag(&a.gram(i), &b.gram(i)), |i| block_diag(&a.diff(i), &b.diff(i)))
}

pub fn direct_sum_maps(f: &ChainMap, g: &ChainMap) -> ChainMap {
    let s = direct_sum(f.source(), g.source());
    let t = direct_sum(f.target(), g.target());
    ChainMap::from_fn(&s, &t, |i| block_diag(&f.map(i), &g.map(i))).unwrap()
}

/// One-dimensional standard space in degree 0.
pub fn unit() -> HermComplex {
    HermComplex::single(0, eye(1))
}

/// Blocks `(p, q)` of total degree `n` with their offsets.
fn tensor_layout(a: &HermComplex, b: &HermComplex, n: i32) -> Vec<(i32, i32, usize)> {
    let mut out = Vec::new();
    let mut off = 0;
    for p in a.degrees() {
        let q = n - p;
        if q < b.lo() || q > b.hi() {
            continue;
        }
        out.push((p, q, off));
        off += a.dim(p) * b.dim(q);
    }
    out
}

fn tensor_range(a: &HermComplex, b: &HermComplex) -> Option<(i32, i32)> {
    if a.is_empty_support() || b.is_empty_support() {
        None
    } else {
        Some((a.lo() + b.lo(), a.hi() + b.hi()))
    }
}

fn tdim(a: &HermComplex, b: &HermComplex, n: i32) -> usize {
    tensor_layout(a, b, n).iter().map(|&(p, q, _)| a.dim(p) * b.dim(q)).sum()
}

/// `(A⊗B)^n = ⊕_{p+q=n} A^p ⊗ B^q`, `d(x⊗y) = dx⊗y + (−1)^p x⊗dy`.
pub fn tensor(a: &HermComplex, b: &HermComplex) -> HermComplex {
    let range = tensor_range(a, b);
    assemble(
        range,
        |n| {
            let mut g = zeros(0, 0);
            for (p, q, _) in tensor_layout(a, b, n) {
                g = block_diag(&g, &kron(&a.gram(p), &b.gram(q)));
            }
            g
        },
        |n| {
            let src = tensor_layout(a, b, n);
            let tgt = tensor_layout(a, b, n + 1);
            let mut d = zeros(tdim(a, b, n + 1), tdim(a, b, n));
            for &(p, q, so) in &src {
                let w = a.dim(p) * b.dim(q);
                for &(p2, q2, to) in &tgt {
                    let h = a.dim(p2) * b.dim(q2);
                    let blk = if p2 == p + 1 && q2 == q {
                        kron(&a.diff(p), &eye(b.dim(q)))
                    } else if p2 == p && q2 == q + 1 {
                        kron(&eye(a.dim(p)), &b.diff(q)) * c(sign(p), 0.0)
                    } else {
                        continue;
                    };
                    d.view_mut((to, so), (h, w)).copy_from(&blk);
                }
            }
            d
        },
    )
}

/// `f ⊗ g` on the tensor complexes (degree-0 maps carry no sign).
pub fn tensor_maps(f: &ChainMap, g: &ChainMap) -> ChainMap {
    let (a, b) = (f.source(), g.source());
    let (a2, b2) = (f.target(), g.target());
    let s = tensor(a, b);
    let t = tensor(a2, b2);
    ChainMap::from_fn(&s, &t, |n| {
        let mut m = zeros(tdim(a2, b2, n), tdim(a, b, n));
        for &(p, q, so) in &tensor_layout(a, b, n) {
            for &(p2, q2, to) in &tensor_layout(a2, b2, n) {
                if p == p2 && q == q2 {
                    let blk = kron(&f.map(p), &g.map(q));
                    m.view_mut((to, so), blk.shape()).copy_from(&blk);
                }
            }
        }
        m
    })
    .unwrap()
}

/// Blocks `p` of Hom-degree `n`: `Hom(A^p, B^{p+n})`, column-major vec.
fn hom_layout(a: &HermComplex, b: &HermComplex, n: i32) -> Vec<(i32, usize)> {
    let mut out = Vec::new();
    let mut off = 0;
    for p in a.degrees() {
        let q = p + n;
        if q < b.lo() || q > b.hi() {
            continue;
        }
        out.push((p, off));
        off += a.dim(p) * b.dim(q);
    }
    out
}

fn hdim(a: &HermComplex, b: &HermComplex, n: i32) -> usize {
    hom_layout(a, b, n).iter().map(|&(p, _)| a.dim(p) * b.dim(p + n)).sum()
}

fn hom_range(a: &HermComplex, b: &HermComplex) -> Option<(i32, i32)> {
    if a.is_empty_support() || b.is_empty_support() {
        None
    } else {
        Some((b.lo() - a.hi(), b.hi() - a.lo()))
    }
}

/// Internal Hom with metric `⟨φ,ψ⟩ = tr(φ* ψ)`, i.e. Gram `conj(G_A⁻¹) ⊗ G_B`
/// on column-major vectorizations; `d(φ) = d∘φ − (−1)^n φ∘d`.
pub fn hom_complex(a: &HermComplex, b: &HermComplex) -> HermComplex {
    let range = hom_range(a, b);
    assemble(
        range,
        |n| {
            let mut g = zeros(0, 0);
            for (p, _) in hom_layout(a, b, n) {
                let ginv = inverse_pd(&a.gram(p)).expect("positive definite gram");
                g = block_diag(&g, &kron(&ginv.map(|z| z.conj()), &b.gram(p + n)));
            }
            g
        },
        |n| {
            let mut d = zeros(hdim(a, b, n + 1), hdim(a, b, n));
            let tgt = hom_layout(a, b, n + 1);
            for &(p, so) in &hom_layout(a, b, n) {
                let w = a.dim(p) * b.dim(p + n);
                for &(p2, to) in &tgt {
                    let h = a.dim(p2) * b.dim(p2 + n + 1);
                    let blk = if p2 == p {
                        kron(&eye(a.dim(p)), &b.diff(p + n))
                    } else if p2 == p - 1 {
                        kron(&a.diff(p - 1).transpose(), &eye(b.dim(p + n))) * c(-sign(n), 0.0)
                    } else {
                        continue;
                    };
                    d.view_mut((to, so), (h, w)).copy_from(&blk);
                }
            }
            d
        },
    )
}

/// `Hom(f, g): Hom(A', B) → Hom(A, B')`, `φ ↦ g∘φ∘f` for `f: A → A'`, `g: B → B'`.
pub fn hom_map(f: &ChainMap, g: &ChainMap) -> ChainMap {
    let (a, a2) = (f.source(), f.target());
    let (b, b2) = (g.source(), g.target());
    let s = hom_complex(a2, b);
    let t = hom_complex(a, b2);
    ChainMap::from_fn(&s, &t, |n| {
        let mut m = zeros(hdim(a, b2, n), hdim(a2, b, n));
        for &(p, so) in &hom_layout(a2, b, n) {
            for &(p2, to) in &hom_layout(a, b2, n) {
                if p == p2 {
                    let blk = kron(&f.map(p).transpose(), &g.map(p + n));
                    m.view_mut((to, so), blk.shape()).copy_from(&blk);
                }
            }
        }
        m
    })
    .unwrap()
}

/// `C^∨ = Hom(C, 𝟙)`.
pub fn dual(cx: &HermComplex) -> HermComplex {
    hom_complex(cx, &unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, real};

    fn sample() -> HermComplex {
        // two-step complex ℂ² → ℂ² → ℂ with d1 d0 = 0
        let g0 = real(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let g1 = real(&[&[1.0, 0.0], &[0.0, 3.0]]);
        let g2 = real(&[&[0.7]]);
        let d0 = real(&[&[1.0, 2.0], &[0.0, 0.0]]);
        let d1 = real(&[&[0.0, 1.5]]);
        HermComplex::from_parts(-1, vec![g0, g1, g2], vec![d0, d1]).unwrap()
    }

    #[test]
    fn cone_identity_one_dim() {
        let v = HermComplex::single(0, eye(1));
        let cn = cone(&ChainMap::identity(&v));
        assert_eq!((cn.lo(), cn.hi()), (-1, 0));
        assert_eq!(cn.diff(-1), eye(1));
        assert!(cn.validate().ok);
    }

    #[test]
    fn cone_blocks_and_validity() {
        let cx = sample();
        let f = ChainMap::identity(&cx);
        let cn = cone(&f);
        assert!(cn.validate().ok);
        for i in cn.degrees() {
            assert_eq!(cn.gram(i), block_diag(&cx.gram(i + 1), &cx.gram(i)));
        }
        assert!(cone_inclusion(&f).chain_residual() < 1e-15);
        assert!(cone_projection(&f).chain_residual() < 1e-15);
        assert!(cone_sign_isometry(&f).chain_residual() < 1e-15);
    }

    #[test]
    fn cone_of_zero_is_sum() {
        let cx = sample();
        let z = ChainMap::zero(&cx, &cx);
        assert!(cone(&z).approx_eq(&direct_sum(&shift(&cx, 1), &cx), 0.0));
    }

    #[test]
    fn shift_round_trip_exact() {
        let cx = sample();
        assert_eq!(shift(&shift(&cx, 1), -1), cx);
        assert_eq!(shift(&shift(&cx, 3), -3), cx);
        assert!(shift(&HermComplex::zero(), 3).is_empty_support());
    }

    #[test]
    fn tensor_unit_is_identity() {
        let cx = sample();
        assert_eq!(tensor(&unit(), &cx), cx);
        let t = tensor(&cx, &cx);
        assert!(t.validate().ok);
    }

    #[test]
    fn hom_and_dual_validate() {
        let cx = sample();
        assert!(hom_complex(&cx, &cx).validate().ok);
        let dd = dual(&dual(&cx));
        assert!(dd.same_shape(&cx));
        for i in cx.degrees() {
            assert!(frob(&(dd.gram(i) - cx.gram(i))) < 1e-12);
            // biduality comes with d ↦ −d
            assert!(frob(&(dd.diff(i) + cx.diff(i))) < 1e-12);
        }
    }

    #[test]
    fn hom_map_is_chain() {
        let cx = sample();
        let id = ChainMap::identity(&cx);
        let h = hom_map(&id, &id);
        assert!(h.chain_residual() < 1e-14);
        assert_eq!(h.source(), h.target());
    }
}
