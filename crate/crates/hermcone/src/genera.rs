//! Truncated power series for genera, the Todd series, and evaluation of
//! secondary genus classes at the point.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::acyccalc::KAClass;
use crate::derived::{class_of_iso, class_of_triangle, HermTriangle, Roof};
use crate::gen::{case_rng, random_acyclic, Rng};
use crate::hermlin::{direct_sum, shift, HermComplex};
use crate::torsion::tau;
use crate::verify::{check_result, Check};
use crate::{Error, Result};

/// Coefficient ring for series. Exact rationals are the default; floats are
/// kept for quick evaluation.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// `None` on division by zero.
    fn div(&self, o: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if *o == 0.0 {
            None
        } else {
            Some(self / o)
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `c_0 + c_1 x + … + c_N x^N`, everything past `x^N` discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries<T: Coeff = Q> {
    coeffs: Vec<T>,
}

impl<T: Coeff> TruncSeries<T> {
    /// Coefficients are padded or cut to `order + 1` entries.
    pub fn new(order: usize, mut coeffs: Vec<T>) -> Self {
        coeffs.resize(order + 1, T::zero());
        TruncSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(order, vec![])
    }

    pub fn constant(order: usize, c: T) -> Self {
        Self::new(order, vec![c])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, T::one())
    }

    /// The series `x`.
    pub fn var(order: usize) -> Self {
        Self::new(order, vec![T::zero(), T::one()])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(order, self.coeffs.clone())
    }

    fn same_order(&self, o: &Self) -> Result<()> {
        if self.order() != o.order() {
            return Err(Error::Domain(format!("orders differ: {} vs {}", self.order(), o.order())));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_order(o)?;
        Ok(TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_order(o)?;
        Ok(TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn scale(&self, s: &T) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| a.mul(s)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&T::from_int(-1))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_order(o)?;
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(TruncSeries { coeffs: out })
    }

    /// `1/f`; needs a unit constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        let inv0 = T::one().div(c0).ok_or_else(|| Error::Domain("reciprocal of a series with c_0 = 0".into()))?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut s = T::zero();
            for j in 1..=k {
                s = s.add(&self.coeffs[j].mul(&out[k - j]));
            }
            out.push(T::zero().sub(&s).mul(&inv0));
        }
        Ok(TruncSeries { coeffs: out })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.same_order(o)?;
        self.mul(&o.reciprocal()?)
    }

    /// `f(g(x))`; the inner series must have no constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.same_order(g)?;
        if !g.coeffs[0].is_zero() {
            return Err(Error::Domain("inner series of a composition needs c_0 = 0".into()));
        }
        let n = self.order();
        let mut acc = Self::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g)?.add(&Self::constant(n, c.clone()))?;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let c = (1..=n).map(|k| self.coeffs[k].mul(&T::from_int(k as i64))).collect();
        Self::new(n, c)
    }

    /// Antiderivative with zero constant term; the top coefficient of `self` drops out.
    pub fn integral(&self) -> Self {
        let n = self.order();
        let mut c = vec![T::zero()];
        for k in 0..n {
            c.push(self.coeffs[k].div(&T::from_int(k as i64 + 1)).expect("nonzero integer"));
        }
        Self::new(n, c)
    }

    /// `exp(f)` for `c_0 = 0`, from `E' = f' E`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Domain("exp needs c_0 = 0".into()));
        }
        let n = self.order();
        let mut e: Vec<T> = vec![T::one()];
        for m in 1..=n {
            let mut s = T::zero();
            for k in 1..=m {
                s = s.add(&self.coeffs[k].mul(&T::from_int(k as i64)).mul(&e[m - k]));
            }
            e.push(s.div(&T::from_int(m as i64)).expect("nonzero integer"));
        }
        Ok(TruncSeries { coeffs: e })
    }

    /// `log(f)` for `c_0 = 1`, as the antiderivative of `f'/f`.
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != T::one() {
            return Err(Error::Domain("log needs c_0 = 1".into()));
        }
        let n = self.order();
        // f'/f only matters below x^n, so an order n is enough before integrating
        let q = self.derivative().div(self)?;
        let mut c = vec![T::zero()];
        for k in 0..n {
            c.push(q.coeffs[k].div(&T::from_int(k as i64 + 1)).expect("nonzero integer"));
        }
        Ok(Self::new(n, c))
    }

    /// `f(t)` by Horner.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.to_f64())
    }

    pub fn to_f64(&self) -> TruncSeries<f64> {
        TruncSeries { coeffs: self.coeffs.iter().map(Coeff::to_f64).collect() }
    }
}

impl TruncSeries<Q> {
    /// Coefficients as `"p/q"` strings.
    pub fn fractions(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_fractions(order: usize, fr: &[(i64, i64)]) -> Self {
        Self::new(order, fr.iter().map(|&(a, b)| q(a, b)).collect())
    }

    /// Parses `"p/q"` or `"p"` strings; order is `len − 1`.
    pub fn parse(coeffs: &[String]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("a series needs at least one coefficient".into()));
        }
        let c = coeffs
            .iter()
            .map(|t| t.trim().parse::<Q>().map_err(|e| Error::Invalid(format!("coefficient '{t}': {e}"))))
            .collect::<Result<Vec<Q>>>()?;
        Ok(Self::new(c.len() - 1, c))
    }
}

/// `Σ x^n / n!` to order N.
pub fn exp_x(order: usize) -> TruncSeries {
    let mut c = vec![q(1, 1)];
    for n in 1..=order {
        let prev: Q = c[n - 1].clone();
        c.push(prev / q(n as i64, 1));
    }
    TruncSeries::new(order, c)
}

/// `(1 − e^{−x})/x = Σ (−1)^n x^n/(n+1)!`.
fn one_minus_exp_neg_over_x(order: usize) -> TruncSeries {
    let mut c = Vec::new();
    let mut fact = BigInt::one();
    for n in 0..=order {
        fact *= BigInt::from(n as i64 + 1);
        let sign = if n % 2 == 0 { 1 } else { -1 };
        c.push(BigRational::new(BigInt::from(sign), fact.clone()));
    }
    TruncSeries::new(order, c)
}

/// `x/(1 − e^{−x})` to order N.
pub fn todd_series(order: usize) -> TruncSeries {
    one_minus_exp_neg_over_x(order).reciprocal().expect("constant term 1")
}

/// `(e^t − 1)/t`, the factor turning the additive class into the
/// multiplicative one.
pub fn correction_factor_series(order: usize) -> TruncSeries {
    let e = exp_x(order + 1);
    TruncSeries::new(order, e.coeffs()[1..].to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenusKind {
    Additive,
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenusSpec {
    pub kind: GenusKind,
    pub series: TruncSeries,
    /// Constant converting a KA coordinate into the point value.
    pub point_scale: f64,
}

impl GenusSpec {
    pub fn additive(series: TruncSeries) -> GenusSpec {
        GenusSpec { kind: GenusKind::Additive, series, point_scale: 1.0 }
    }

    pub fn multiplicative(series: TruncSeries) -> Result<GenusSpec> {
        if series.coeff(0) != q(1, 1) {
            return Err(Error::Domain("multiplicative genus needs c_0 = 1".into()));
        }
        Ok(GenusSpec { kind: GenusKind::Multiplicative, series, point_scale: 1.0 })
    }

    pub fn todd(order: usize) -> GenusSpec {
        GenusSpec::multiplicative(todd_series(order)).expect("Td starts with 1")
    }

    /// Chern character: additive with series `e^x`.
    pub fn chern_character(order: usize) -> GenusSpec {
        GenusSpec::additive(exp_x(order))
    }

    pub fn with_point_scale(mut self, s: f64) -> GenusSpec {
        self.point_scale = s;
        self
    }

    fn expect_kind(&self, k: GenusKind) -> Result<()> {
        if self.kind != k {
            return Err(Error::Invalid(format!("expected a {k:?} genus, got {:?}", self.kind)));
        }
        Ok(())
    }
}

/// `φ = log ψ`.
pub fn additive_from_multiplicative(psi: &GenusSpec) -> Result<GenusSpec> {
    psi.expect_kind(GenusKind::Multiplicative)?;
    Ok(GenusSpec { kind: GenusKind::Additive, series: psi.series.log()?, point_scale: psi.point_scale })
}

/// `ψ = exp φ`.
pub fn multiplicative_from_additive(phi: &GenusSpec) -> Result<GenusSpec> {
    phi.expect_kind(GenusKind::Additive)?;
    Ok(GenusSpec { kind: GenusKind::Multiplicative, series: phi.series.exp()?, point_scale: phi.point_scale })
}

/// Only the degree-zero part survives at the point: `c_0 · χ(C)`.
pub fn genus_of_complex(g: &GenusSpec, c: &HermComplex) -> Result<f64> {
    g.expect_kind(GenusKind::Additive)?;
    Ok(Coeff::to_f64(&g.series.coeff(0)) * c.euler_char() as f64)
}

/// Inputs carrying a KA coordinate.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum PointInput {
    Class(KAClass),
    Acyclic(HermComplex),
    Iso(Roof),
    Triangle(HermTriangle),
}

impl PointInput {
    pub fn coordinate(&self) -> Result<f64> {
        match self {
            PointInput::Class(c) => Ok(c.value),
            PointInput::Acyclic(c) => tau(c),
            PointInput::Iso(r) => class_of_iso(r),
            PointInput::Triangle(t) => class_of_triangle(t),
        }
    }
}

/// `point_scale ·` KA coordinate.
pub fn bott_chern_point(g: &GenusSpec, x: &PointInput) -> Result<f64> {
    g.expect_kind(GenusKind::Additive)?;
    Ok(g.point_scale * x.coordinate()?)
}

/// The correction factor is 1 at the point, leaving the class of `log ψ`.
pub fn psi_m_tilde_point(psi: &GenusSpec, x: &PointInput) -> Result<f64> {
    bott_chern_point(&additive_from_multiplicative(psi)?, x)
}

// ---------- randomized suite ----------

fn random_rational(r: &mut Rng) -> Q {
    q(r.gen_range(-9..=9), r.gen_range(1..=7))
}

fn random_series(r: &mut Rng, order: usize, c0: Option<Q>) -> TruncSeries {
    let mut c: Vec<Q> = (0..=order).map(|_| random_rational(r)).collect();
    if let Some(z) = c0 {
        c[0] = z;
    }
    TruncSeries::new(order, c)
}

/// Schoolbook product with no early truncation, cut afterwards.
pub fn naive_mul(a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
    let n = a.order();
    let mut full = vec![q(0, 1); 2 * n + 1];
    for i in 0..=n {
        for j in 0..=n {
            full[i + j] = &full[i + j] + a.coeff(i) * b.coeff(j);
        }
    }
    TruncSeries::new(n, full)
}

/// `Σ g^k/k!`, independent of the recurrence in `exp`.
pub fn naive_exp(g: &TruncSeries) -> TruncSeries {
    let n = g.order();
    let mut term = TruncSeries::one(n);
    let mut acc = TruncSeries::one(n);
    for k in 1..=n {
        term = naive_mul(&term, g).scale(&q(1, k as i64));
        acc = acc.add(&term).expect("same order");
    }
    acc
}

/// `Σ (−1)^{k+1} (f−1)^k / k`.
pub fn naive_log(f: &TruncSeries) -> TruncSeries {
    let n = f.order();
    let u = f.sub(&TruncSeries::one(n)).expect("same order");
    let mut pow = TruncSeries::one(n);
    let mut acc = TruncSeries::zero(n);
    for k in 1..=n {
        pow = naive_mul(&pow, &u);
        let s = if k % 2 == 1 { q(1, k as i64) } else { q(-1, k as i64) };
        acc = acc.add(&pow.scale(&s)).expect("same order");
    }
    acc
}

/// Bernoulli numbers with `B_1 = −1/2`.
pub fn bernoulli(n: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![q(1, 1)];
    for m in 1..=n {
        let mut s = q(0, 1);
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            s += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from((m + 1 - k) as i64) / BigInt::from(k as i64 + 1);
        }
        b.push(-s / q(m as i64 + 1, 1));
    }
    b
}

/// `(−1)^n B_n / n!`.
pub fn todd_oracle(order: usize) -> TruncSeries {
    let b = bernoulli(order);
    let mut fact = BigInt::one();
    let mut c = Vec::new();
    for (n, bn) in b.into_iter().enumerate() {
        if n > 0 {
            fact *= BigInt::from(n as i64);
        }
        let v = bn / BigRational::from_integer(fact.clone());
        c.push(if n % 2 == 1 { -v } else { v });
    }
    TruncSeries::new(order, c)
}

fn exact(rule: &str, ok: bool, inputs: serde_json::Value) -> Check {
    Check::new(rule, if ok { 0.0 } else { 1.0 }, 0.0, inputs)
}

fn series_json(s: &TruncSeries) -> serde_json::Value {
    json!(s.fractions())
}

/// One case of the genera suite. Exact rules compare rationals; the point
/// rules go through floating-point KA coordinates.
pub fn genera_case(seed: u64, k: u64) -> Vec<Check> {
    let mut r = case_rng(seed, k);
    let n = r.gen_range(1..=12usize);
    let mut out = Vec::new();

    let a = random_series(&mut r, n, None);
    let b = random_series(&mut r, n, None);
    let inp = || json!({"order": n, "a": series_json(&a), "b": series_json(&b)});
    out.push(exact("mul-convolution", a.mul(&b).ok() == Some(naive_mul(&a, &b)), inp()));

    let c0 = q(r.gen_range(1..=5), r.gen_range(1..=5));
    let unit = random_series(&mut r, n, Some(c0));
    let recip_ok = unit.reciprocal().and_then(|u| u.mul(&unit)).ok() == Some(TruncSeries::one(n));
    out.push(exact("reciprocal", recip_ok, json!({"order": n, "f": series_json(&unit)})));
    let div_ok = a.div(&unit).and_then(|d| d.mul(&unit)).ok() == Some(a.clone());
    out.push(exact("division", div_ok, json!({"order": n, "a": series_json(&a), "f": series_json(&unit)})));

    let g = random_series(&mut r, n, Some(q(0, 1)));
    let h = random_series(&mut r, n, Some(q(0, 1)));
    let gi = || json!({"order": n, "g": series_json(&g), "h": series_json(&h), "a": series_json(&a)});
    out.push(exact("exp-oracle", g.exp().ok() == Some(naive_exp(&g)), gi()));
    let one_plus = g.add(&TruncSeries::one(n)).expect("same order");
    out.push(exact("log-oracle", one_plus.log().ok() == Some(naive_log(&one_plus)), gi()));
    out.push(exact("log-exp", g.exp().and_then(|e| e.log()).ok() == Some(g.clone()), gi()));
    let comp_assoc = a
        .compose(&g)
        .and_then(|ag| ag.compose(&h))
        .ok()
        .zip(g.compose(&h).and_then(|gh| a.compose(&gh)).ok())
        .map(|(x, y)| x == y)
        .unwrap_or(false);
    out.push(exact("compose-assoc", comp_assoc, gi()));
    let exp_hom = g
        .add(&h)
        .and_then(|s| s.exp())
        .ok()
        .zip(g.exp().and_then(|x| x.mul(&h.exp()?)).ok())
        .map(|(x, y)| x == y)
        .unwrap_or(false);
    out.push(exact("exp-additive", exp_hom, gi()));

    // Todd: division oracle, Bernoulli oracle, defining relation
    let td = todd_series(n);
    out.push(exact("todd-bernoulli", td == todd_oracle(n), json!({"order": n})));
    let one_minus = TruncSeries::one(n).sub(&exp_x(n).compose(&TruncSeries::var(n).neg()).expect("c_0 = 0")).expect("same order");
    out.push(exact("todd-defining", td.mul(&one_minus).ok() == Some(TruncSeries::var(n)), json!({"order": n})));
    let tdg = GenusSpec::todd(n);
    let rt = additive_from_multiplicative(&tdg).and_then(|p| multiplicative_from_additive(&p));
    out.push(exact("genus-round-trip", rt.map(|s| s.series == td).unwrap_or(false), json!({"order": n})));
    let phi = td.log().expect("c_0 = 1");
    let lhs = correction_factor_series(n).compose(&phi).and_then(|c| c.mul(&phi));
    let rhs = phi.exp().map(|e| e.sub(&TruncSeries::one(n)).expect("same order"));
    out.push(exact("correction-factor", lhs.ok().zip(rhs.ok()).map(|(x, y)| x == y).unwrap_or(false), json!({"order": n})));

    // point evaluation is a homomorphism on KA coordinates
    let ch = GenusSpec::chern_character(n).with_point_scale(r.gen_range(0.5..2.0));
    let (x1, t1) = random_acyclic(&mut r, 3, 3);
    let (x2, t2) = random_acyclic(&mut r, 3, 3);
    let pin = || json!({"scale": ch.point_scale, "x1": serde_json::to_value(&x1).unwrap_or_default(), "x2": serde_json::to_value(&x2).unwrap_or_default()});
    let add = (|| -> Result<f64> {
        let s = bott_chern_point(&ch, &PointInput::Acyclic(direct_sum(&x1, &x2)))?;
        let p1 = bott_chern_point(&ch, &PointInput::Acyclic(x1.clone()))?;
        let p2 = bott_chern_point(&ch, &PointInput::Acyclic(x2.clone()))?;
        Ok((s - p1 - p2).abs() + (p1 - ch.point_scale * t1).abs() + (p2 - ch.point_scale * t2).abs())
    })();
    out.push(check_result("point-additive", add, 1e-8, pin));
    let sh = (|| -> Result<f64> {
        let i = r.gen_range(-2..=2);
        let p = bott_chern_point(&ch, &PointInput::Acyclic(x1.clone()))?;
        let ps = bott_chern_point(&ch, &PointInput::Acyclic(shift(&x1, i)))?;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        Ok((sign * ps - p).abs())
    })();
    out.push(check_result("point-shift", sh, 1e-10, pin));
    let psi = (|| -> Result<f64> {
        let psi = GenusSpec::todd(n).with_point_scale(ch.point_scale);
        let phi = additive_from_multiplicative(&psi)?;
        let x = PointInput::Acyclic(x2.clone());
        Ok((psi_m_tilde_point(&psi, &x)? - bott_chern_point(&phi, &x)?).abs())
    })();
    out.push(check_result("psi-tilde-point", psi, 0.0, pin));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derived::HermTriangle;
    use crate::derived::HermStructure;
    use crate::linalg::real;

    fn fr(s: &TruncSeries) -> Vec<String> {
        s.fractions()
    }

    #[test]
    fn exp_at_order_four() {
        let e = TruncSeries::var(4).exp().unwrap();
        assert_eq!(fr(&e), ["1", "1", "1/2", "1/6", "1/24"]);
        assert_eq!(e, exp_x(4));
    }

    #[test]
    fn log_exp_x_is_x() {
        let x = TruncSeries::<Q>::var(10);
        assert_eq!(x.exp().unwrap().log().unwrap(), x);
    }

    #[test]
    fn exp_minus_one_over_x() {
        // (e^x − 1)/x by dividing after cancelling the common factor x
        let num = TruncSeries::new(3, exp_x(4).coeffs()[1..].to_vec());
        let got = num.div(&TruncSeries::one(3)).unwrap();
        assert_eq!(fr(&got), ["1", "1/2", "1/6", "1/24"]);
        assert_eq!(got, correction_factor_series(3));
    }

    #[test]
    fn correction_factor_order_four() {
        assert_eq!(fr(&correction_factor_series(4)), ["1", "1/2", "1/6", "1/24", "1/120"]);
    }

    #[test]
    fn todd_low_orders() {
        assert_eq!(fr(&todd_series(0)), ["1"]);
        assert_eq!(fr(&todd_series(2)), ["1", "1/2", "1/12"]);
        assert_eq!(fr(&todd_series(4)), ["1", "1/2", "1/12", "0", "-1/720"]);
    }

    #[test]
    fn todd_matches_bernoulli_to_order_twelve() {
        assert_eq!(todd_series(12), todd_oracle(12));
        assert_eq!(todd_series(12).coeff(12), q(-691, 1_307_674_368_000));
    }

    #[test]
    fn todd_defining_relation() {
        for n in 0..=12 {
            let one_minus = TruncSeries::one(n).sub(&exp_x(n).compose(&TruncSeries::var(n).neg()).unwrap()).unwrap();
            assert_eq!(todd_series(n).mul(&one_minus).unwrap(), TruncSeries::var(n));
        }
    }

    #[test]
    fn log_todd_coefficients() {
        // direct expansion: log(1+u) with u = x/2 + x²/12 − x⁴/720
        let l = additive_from_multiplicative(&GenusSpec::todd(4)).unwrap();
        assert_eq!(fr(&l.series), ["0", "1/2", "-1/24", "0", "1/2880"]);
        assert_eq!(l.series, naive_log(&todd_series(4)));
    }

    #[test]
    fn todd_round_trip_order_eight() {
        let t = GenusSpec::todd(8);
        let back = multiplicative_from_additive(&additive_from_multiplicative(&t).unwrap()).unwrap();
        assert_eq!(back.series, t.series);
    }

    #[test]
    fn constant_genus_one_has_zero_log() {
        let one = GenusSpec::multiplicative(TruncSeries::one(6)).unwrap();
        assert_eq!(additive_from_multiplicative(&one).unwrap().series, TruncSeries::zero(6));
    }

    #[test]
    fn domain_errors() {
        let x = TruncSeries::<Q>::var(3);
        assert!(matches!(x.reciprocal(), Err(Error::Domain(_))));
        assert!(matches!(x.log(), Err(Error::Domain(_))));
        assert!(matches!(TruncSeries::<Q>::one(3).exp(), Err(Error::Domain(_))));
        assert!(matches!(x.compose(&TruncSeries::one(3)), Err(Error::Domain(_))));
        assert!(matches!(x.add(&TruncSeries::var(4)), Err(Error::Domain(_))));
        assert!(GenusSpec::multiplicative(TruncSeries::var(3)).is_err());
        let ch = GenusSpec::chern_character(3);
        assert!(additive_from_multiplicative(&ch).is_err());
        assert!(psi_m_tilde_point(&ch, &PointInput::Class(KAClass { value: 1.0 })).is_err());
    }

    #[test]
    fn parse_fractions() {
        let s = TruncSeries::parse(&["1".into(), "-1/2".into(), " 3/6 ".into()]).unwrap();
        assert_eq!(s.fractions(), ["1", "-1/2", "1/2"]);
        assert!(TruncSeries::parse(&["x".into()]).is_err());
        assert!(TruncSeries::parse(&["1/0".into()]).is_err());
        assert!(TruncSeries::parse(&[]).is_err());
    }

    #[test]
    fn float_mode_agrees() {
        let t = todd_series(10);
        let tf = t.to_f64();
        let direct = TruncSeries::<f64>::new(10, (0..=10).map(|k| (-1.0f64).powi(k) / (1..=k + 1).product::<i32>() as f64).collect())
            .reciprocal()
            .unwrap();
        for k in 0..=10 {
            assert!((tf.coeff(k) - direct.coeff(k)).abs() < 1e-14);
        }
        let x = 0.3;
        assert!((t.eval(x) - x / (1.0 - (-x).exp())).abs() < 1e-10);
    }

    #[test]
    fn genus_of_complexes() {
        let ch = GenusSpec::chern_character(4);
        let one = HermComplex::single(0, real(&[&[1.0]]));
        assert_eq!(genus_of_complex(&ch, &one).unwrap(), 1.0);
        assert_eq!(genus_of_complex(&ch, &shift(&one, 1)).unwrap(), -1.0);
        assert_eq!(genus_of_complex(&ch, &HermComplex::ea(0.7)).unwrap(), 0.0);
    }

    #[test]
    fn point_values() {
        let ch = GenusSpec::chern_character(4).with_point_scale(2.5);
        let v = bott_chern_point(&ch, &PointInput::Acyclic(HermComplex::ea(1.2))).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        assert_eq!(bott_chern_point(&ch, &PointInput::Class(KAClass::ZERO)).unwrap(), 0.0);
        assert!(bott_chern_point(&ch, &PointInput::Acyclic(HermComplex::single(0, real(&[&[1.0]])))).is_err());
    }

    #[test]
    fn tight_triangle_and_identity_vanish() {
        let ch = GenusSpec::chern_character(2);
        let mut r = crate::gen::rng(3);
        let a = HermStructure::trivial(&crate::gen::random_complex(&mut r, 2, 2));
        let c = HermStructure::trivial(&crate::gen::random_complex(&mut r, 2, 2));
        let b = a.direct_sum(&c);
        let t = HermTriangle::split(a.clone(), c, b).unwrap();
        assert!(bott_chern_point(&ch, &PointInput::Triangle(t)).unwrap().abs() < 1e-9);
        let id = Roof::identity(a.underlying());
        assert!(bott_chern_point(&ch, &PointInput::Iso(id)).unwrap().abs() < 1e-12);
        let td = GenusSpec::todd(4);
        assert_eq!(psi_m_tilde_point(&td, &PointInput::Class(KAClass::ZERO)).unwrap(), 0.0);
    }

    #[test]
    fn suite_cases_pass() {
        for k in 0..20 {
            for ch in genera_case(7, k) {
                assert!(ch.passes(), "case {k} rule {} residual {}", ch.rule, ch.residual);
            }
        }
    }
}
