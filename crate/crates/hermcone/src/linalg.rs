//! Dense complex matrix helpers: Cholesky with pivots, orthonormal frames,
//! sorted SVD, complements and block assembly.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, cols: usize) -> CMat {
    CMat::zeros(r, cols)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Real matrix from rows (convenience for tests and fixtures).
pub fn real(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let cols = rows.first().map_or(0, |x| x.len());
    CMat::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn scalar_mat(x: C64) -> CMat {
    CMat::from_element(1, 1, x)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// ‖G − Gᴴ‖ / ‖G‖ (0 for empty).
pub fn hermitian_residual(g: &CMat) -> f64 {
    let n = frob(g);
    if n == 0.0 {
        return 0.0;
    }
    frob(&(g - g.adjoint())) / n
}

pub fn hermitian_part(g: &CMat) -> CMat {
    (g + g.adjoint()) * c(0.5, 0.0)
}

pub struct Cholesky {
    /// Lower factor with G = L Lᴴ, when every pivot was positive.
    pub l: Option<CMat>,
    /// Smallest pivot seen (before the square root); +inf for dim 0.
    pub min_pivot: f64,
}

/// Plain Cholesky on the hermitian part, reporting pivots.
pub fn cholesky(g: &CMat, pd_tol: f64) -> Cholesky {
    let n = g.nrows();
    let g = hermitian_part(g);
    let mut l = zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        min_pivot = min_pivot.min(d);
        if d.is_nan() || d <= pd_tol {
            return Cholesky { l: None, min_pivot };
        }
        let djj = d.sqrt();
        l[(j, j)] = c(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Cholesky { l: Some(l), min_pivot }
}

/// Orthonormal frame of a Gram: y = to_orth·x gives ‖x‖_G = ‖y‖₂.
#[derive(Clone, Debug)]
pub struct Frame {
    pub to_orth: CMat,
    pub from_orth: CMat,
}

impl Frame {
    pub fn new(g: &CMat, pd_tol: f64) -> Option<Frame> {
        let n = g.nrows();
        let l = cholesky(g, pd_tol).l?;
        let lh = l.adjoint();
        let from_orth = if n == 0 {
            zeros(0, 0)
        } else {
            lh.solve_upper_triangular(&eye(n))?
        };
        Some(Frame { to_orth: lh, from_orth })
    }
}

/// Inverse of a positive definite matrix.
pub fn inverse_pd(g: &CMat) -> Option<CMat> {
    let f = Frame::new(g, 0.0)?;
    // G = L Lᴴ ⇒ G⁻¹ = L⁻ᴴ L⁻¹
    Some(&f.from_orth * f.from_orth.adjoint())
}

/// Thin SVD with singular values sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (r, cols) = m.shape();
    let k = r.min(cols);
    if k == 0 {
        return Svd { u: zeros(r, 0), s: vec![], v: zeros(cols, 0) };
    }
    if r < cols {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    jacobi_svd(m)
}

// One-sided (Hestenes) Jacobi on the columns; needs rows >= cols.
// nalgebra's bidiagonal SVD returned a wrong factorization on some
// rank-deficient projectors, and Jacobi keeps small singular values
// relatively accurate, which matters for log σ.
fn jacobi_svd(m: &CMat) -> Svd {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = eye(n);
    let eps = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // make the inner product real and positive
                let ph = gamma / g;
                let phc = ph.conj();
                for i in 0..rows {
                    a[(i, q)] *= phc;
                }
                for i in 0..n {
                    v[(i, q)] *= phc;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = x * cs - y * sn;
                    a[(i, q)] = x * sn + y * cs;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = x * cs - y * sn;
                    v[(i, q)] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let smax = norms[idx[0]];
    let mut u = zeros(rows, n);
    let mut sv = zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (new, &old) in idx.iter().enumerate() {
        sv.set_column(new, &v.column(old));
        s.push(norms[old]);
        let good = norms[old] > 0.0 && norms[old] > 1e-10 * smax;
        let mut col = if good { a.column(old) / c(norms[old], 0.0) } else { nalgebra::DVector::zeros(rows) };
        if !good {
            // tiny or zero σ: pick a direction orthogonal to what we have
            col = complement_vector(&u.columns(0, new).into_owned(), rows);
        } else if norms[old] < 1e-6 * smax {
            col = reorth(&u.columns(0, new).into_owned(), col);
        }
        u.set_column(new, &col);
    }
    Svd { u, s, v: sv }
}

fn reorth(q: &CMat, mut x: nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    for _ in 0..2 {
        let coef = q.adjoint() * &x;
        x -= q * coef;
    }
    let nx = x.norm();
    x / c(nx, 0.0)
}

// unit vector orthogonal to the (orthonormal) columns of q, n > q.ncols()
fn complement_vector(q: &CMat, n: usize) -> nalgebra::DVector<C64> {
    let mut best = nalgebra::DVector::zeros(n);
    let mut best_norm = -1.0;
    for j in 0..n {
        let mut x = nalgebra::DVector::zeros(n);
        x[j] = c(1.0, 0.0);
        for _ in 0..2 {
            let coef = q.adjoint() * &x;
            x -= q * coef;
        }
        let nx = x.norm();
        if nx > best_norm {
            best_norm = nx;
            best = x;
        }
    }
    reorth(q, best)
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug, PartialEq)]
pub enum Rank {
    Clear(usize),
    /// A singular value sits inside the ambiguity band around the threshold.
    Ambiguous { value: f64, threshold: f64 },
}

/// Rank with threshold `rel·σ_max` (floored at `abs_floor`), flagging values
/// within a factor 10 of the threshold.
pub fn rank_of(s: &[f64], rel: f64, abs_floor: f64) -> Rank {
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = (rel * smax).max(abs_floor);
    for &x in s {
        if x > 0.1 * thr && x < 10.0 * thr {
            return Rank::Ambiguous { value: x, threshold: thr };
        }
    }
    Rank::Clear(s.iter().filter(|&&x| x >= 10.0 * thr).count())
}

/// Orthonormal basis of the orthogonal complement of the columns of `q`
/// (assumed orthonormal) in ℂⁿ.
pub fn orth_complement(q: &CMat, n: usize) -> CMat {
    let k = q.ncols();
    if k == 0 {
        return eye(n);
    }
    if k >= n {
        return zeros(n, 0);
    }
    let mut basis = q.clone();
    for _ in k..n {
        let x = complement_vector(&basis, n);
        basis = hstack(&basis, &CMat::from_column_slice(n, 1, x.as_slice()));
    }
    basis.columns(k, n - k).into_owned()
}

/// Orthonormal basis of the column span of `m`, using the given rank.
pub fn col_basis(m: &CMat, rank: usize) -> CMat {
    let d = svd(m);
    d.u.columns(0, rank).into_owned()
}

/// Minimum-norm least-squares solve of A x = b with relative cutoff.
pub fn lstsq(a: &CMat, b: &CMat, rel: f64) -> CMat {
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut x = zeros(a.ncols(), b.ncols());
    for (k, &s) in d.s.iter().enumerate() {
        if s > rel * smax && s > 0.0 {
            let uk = d.u.column(k);
            let vk = d.v.column(k);
            let coef = uk.adjoint() * b / c(s, 0.0);
            x += vk * coef;
        }
    }
    x
}

/// Null space basis (orthonormal columns) with relative cutoff.
pub fn null_space(a: &CMat, rel: f64) -> CMat {
    let n = a.ncols();
    if a.nrows() == 0 {
        return eye(n);
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let r = d.s.iter().filter(|&&s| s > rel * smax && s > 0.0).count();
    orth_complement(&d.v.columns(0, r).into_owned(), n)
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// 2×2 block matrix [[a, b], [c, d]].
pub fn blocks2(a: &CMat, b: &CMat, cc: &CMat, d: &CMat) -> CMat {
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    debug_assert_eq!(b.shape(), (r1, c2));
    debug_assert_eq!(cc.shape(), (r2, c1));
    let mut m = zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((0, c1), (r1, c2)).copy_from(b);
    m.view_mut((r1, 0), (r2, c1)).copy_from(cc);
    m.view_mut((r1, c1), (r2, c2)).copy_from(d);
    m
}

pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    let r = a.nrows().max(b.nrows());
    let mut m = zeros(r, a.ncols() + b.ncols());
    if a.ncols() > 0 {
        m.view_mut((0, 0), a.shape()).copy_from(a);
    }
    if b.ncols() > 0 {
        m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    }
    m
}

pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    let cols = a.ncols().max(b.ncols());
    let mut m = zeros(a.nrows() + b.nrows(), cols);
    if a.nrows() > 0 {
        m.view_mut((0, 0), a.shape()).copy_from(a);
    }
    if b.nrows() > 0 {
        m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    }
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// log|det| of a square matrix through its singular values.
pub fn log_abs_det(m: &CMat) -> f64 {
    svd(m).s.iter().map(|s| s.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reports_negative_pivot() {
        let g = real(&[&[-1.0]]);
        let ch = cholesky(&g, 1e-10);
        assert!(ch.l.is_none());
        assert_eq!(ch.min_pivot, -1.0);
    }

    #[test]
    fn frame_orthonormalizes() {
        let g = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.0, 0.0)]);
        let f = Frame::new(&g, 1e-10).unwrap();
        let back = f.to_orth.adjoint() * &f.to_orth;
        assert!(frob(&(back - &g)) < 1e-14);
        let id = f.from_orth.adjoint() * &g * &f.from_orth;
        assert!(frob(&(id - eye(2))) < 1e-14);
    }

    #[test]
    fn svd_sorted_and_reconstructs() {
        let m = real(&[&[0.0, 3.0, 0.0], &[1.0, 0.0, 0.0]]);
        let d = svd(&m);
        assert_eq!(d.s.len(), 2);
        assert!(d.s[0] >= d.s[1]);
        let sig = CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, d.s.iter().map(|&x| c(x, 0.0))));
        let r = &d.u * sig * d.v.adjoint();
        assert!(frob(&(r - m)) < 1e-13);
    }

    #[test]
    fn rank_flags_band() {
        assert_eq!(rank_of(&[1.0, 1e-3], 1e-8, 1e-13), Rank::Clear(2));
        assert_eq!(rank_of(&[1.0, 1e-15], 1e-8, 1e-13), Rank::Clear(1));
        assert!(matches!(rank_of(&[1.0, 2e-8], 1e-8, 1e-13), Rank::Ambiguous { .. }));
    }

    #[test]
    fn complement_dims() {
        let q = real(&[&[1.0], &[0.0], &[0.0]]);
        let p = orth_complement(&q, 3);
        assert_eq!(p.shape(), (3, 2));
        assert!(frob(&(q.adjoint() * &p)) < 1e-14);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(svd(&zeros(0, 3)).v.shape(), (3, 0));
        assert_eq!(null_space(&zeros(0, 2), 1e-12).ncols(), 2);
        assert!(Frame::new(&zeros(0, 0), 1e-10).is_some());
    }

    fn check_svd(m: &CMat) {
        let d = svd(m);
        let k = d.s.len();
        let sig = CMat::from_diagonal(&nalgebra::DVector::from_iterator(k, d.s.iter().map(|&x| c(x, 0.0))));
        assert!(frob(&(&d.u * sig * d.v.adjoint() - m)) < 1e-12 * (1.0 + frob(m)));
        assert!(frob(&(d.u.adjoint() * &d.u - eye(k))) < 1e-12);
        assert!(frob(&(d.v.adjoint() * &d.v - eye(k))) < 1e-12);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_deficient_projector() {
        // this input broke the bidiagonal SVD we used before
        let q = real(&[&[0.9432999601477867], &[0.33194153880643684]]);
        check_svd(&(eye(2) - &q * q.adjoint()));
        let z = orth_complement(&q, 2);
        assert!(frob(&(q.adjoint() * &z)) < 1e-14);
    }

    #[test]
    fn svd_complex_shapes() {
        let mut x = 0.37f64;
        let mut next = || {
            x = (x * 3.9 * (1.0 - x)).fract();
            x - 0.5
        };
        for &(r, cc) in &[(4, 4), (5, 3), (3, 6), (6, 6)] {
            let mut m = zeros(r, cc);
            for i in 0..r {
                for j in 0..cc {
                    m[(i, j)] = c(next(), next());
                }
            }
            check_svd(&m);
            // rank one less
            let low = &m * m.adjoint().columns(0, 1).into_owned() * m.rows(0, 1).into_owned();
            check_svd(&low);
        }
    }
}
