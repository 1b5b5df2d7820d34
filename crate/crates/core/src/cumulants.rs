//! Exact-rational free moments and cumulants, the Zinn-Justin–Zuber terms
//! `F_n`, and small-λ series for the mutual information and the MMSE.
//!
//! λ is symbolic: quantities depending on it are [`SqrtPoly`] polynomials in
//! `t = √λ`. Signal moments other than `θ₂ = 1` are supported by completing each
//! monomial of `F_n` with powers of `θ₂` so that it has total signal degree `n`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Highest moment / cumulant order handled.
pub const ORDER: usize = 8;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Commutative ring with rational scalars.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero_el() -> Self;
    fn one_el() -> Self;
    fn from_q(q: Q) -> Self;
    fn scale(self, q: Q) -> Self {
        self * Self::from_q(q)
    }
}

impl Ring for Q {
    fn zero_el() -> Self {
        Zero::zero()
    }
    fn one_el() -> Self {
        One::one()
    }
    fn from_q(q: Q) -> Self {
        q
    }
}

/// Polynomial in `t = √λ` with rational coefficients; `c[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SqrtPoly {
    c: Vec<Q>,
}

impl SqrtPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        SqrtPoly { c }
    }
    pub fn constant(q: Q) -> Self {
        Self::new(vec![q])
    }
    /// `q t^k`
    pub fn monomial(q: Q, k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = q;
        Self::new(c)
    }
    /// `t = √λ`
    pub fn t() -> Self {
        Self::monomial(Q::one(), 1)
    }
    pub fn lambda() -> Self {
        Self::monomial(Q::one(), 2)
    }
    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }
    pub fn coeff(&self, k: usize) -> Q {
        self.c.get(k).cloned().unwrap_or_else(Q::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    /// Drop every power above `t^deg`.
    pub fn truncate(&self, deg: usize) -> Self {
        Self::new(self.c.iter().take(deg + 1).cloned().collect())
    }
    pub fn d_dt(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(k, a)| a * Q::from_integer(BigInt::from(k))).collect())
    }
    /// `d/dλ = (1/2t) d/dt`; needs a vanishing `t¹` coefficient.
    pub fn d_dlambda(&self) -> Result<Self> {
        if !self.coeff(1).is_zero() {
            return Err(Error::Domain(0.0));
        }
        Ok(Self::new(
            self.c.iter().enumerate().skip(2).map(|(k, a)| a * q(k as i64, 2)).collect(),
        ))
    }
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * t + a.to_f64().unwrap_or(f64::NAN))
    }
}

impl Add for SqrtPoly {
    type Output = SqrtPoly;
    fn add(self, o: SqrtPoly) -> SqrtPoly {
        let (mut long, short) = if self.c.len() >= o.c.len() { (self.c, o.c) } else { (o.c, self.c) };
        for (a, b) in long.iter_mut().zip(short) {
            *a += b;
        }
        SqrtPoly::new(long)
    }
}

impl Neg for SqrtPoly {
    type Output = SqrtPoly;
    fn neg(self) -> SqrtPoly {
        SqrtPoly { c: self.c.into_iter().map(|a| -a).collect() }
    }
}

impl Sub for SqrtPoly {
    type Output = SqrtPoly;
    fn sub(self, o: SqrtPoly) -> SqrtPoly {
        self + (-o)
    }
}

impl Mul for SqrtPoly {
    type Output = SqrtPoly;
    fn mul(self, o: SqrtPoly) -> SqrtPoly {
        if self.is_zero() || o.is_zero() {
            return SqrtPoly::default();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        SqrtPoly::new(c)
    }
}

impl Ring for SqrtPoly {
    fn zero_el() -> Self {
        SqrtPoly::default()
    }
    fn one_el() -> Self {
        SqrtPoly::constant(Q::one())
    }
    fn from_q(q: Q) -> Self {
        SqrtPoly::constant(q)
    }
}

/// First-order dual number `a + bε`, `ε² = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<R> {
    pub a: R,
    pub b: R,
}

impl<R: Ring> Dual<R> {
    pub fn constant(a: R) -> Self {
        Dual { a, b: R::zero_el() }
    }
    pub fn variable(a: R) -> Self {
        Dual { a, b: R::one_el() }
    }
}

impl<R: Ring> Add for Dual<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { a: self.a + o.a, b: self.b + o.b }
    }
}
impl<R: Ring> Sub for Dual<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { a: self.a - o.a, b: self.b - o.b }
    }
}
impl<R: Ring> Neg for Dual<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { a: -self.a, b: -self.b }
    }
}
impl<R: Ring> Mul for Dual<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { b: self.a.clone() * o.b + self.b * o.a.clone(), a: self.a * o.a }
    }
}
impl<R: Ring> Ring for Dual<R> {
    fn zero_el() -> Self {
        Dual::constant(R::zero_el())
    }
    fn one_el() -> Self {
        Dual::constant(R::one_el())
    }
    fn from_q(q: Q) -> Self {
        Dual::constant(R::from_q(q))
    }
}

// Truncated power series in z, coefficients z^0..z^ORDER.

fn ser_mul<R: Ring>(a: &[R], b: &[R]) -> Vec<R> {
    (0..=ORDER)
        .map(|n| (0..=n).fold(R::zero_el(), |acc, i| acc + a[i].clone() * b[n - i].clone()))
        .collect()
}

/// Inverse of a series with constant term 1.
fn ser_inv_unit<R: Ring>(a: &[R]) -> Vec<R> {
    let mut inv = vec![R::one_el()];
    for n in 1..=ORDER {
        let s = (1..=n).fold(R::zero_el(), |acc, k| acc + a[k].clone() * inv[n - k].clone());
        inv.push(-s);
    }
    inv
}

/// Moments `m₁..m₈` from free cumulants `k₁..k₈` by iterating
/// `M(z) = 1 + Σ k_i (z M(z))^i`.
pub fn moments_from_cumulants_generic<R: Ring>(k: &[R]) -> Vec<R> {
    assert_eq!(k.len(), ORDER);
    let mut m: Vec<R> = (0..=ORDER).map(|i| if i == 0 { R::one_el() } else { R::zero_el() }).collect();
    for _ in 0..ORDER {
        // w = z M
        let mut w = vec![R::zero_el()];
        w.extend(m[..ORDER].iter().cloned());
        let mut wp = w.clone();
        let mut next: Vec<R> = (0..=ORDER).map(|i| if i == 0 { R::one_el() } else { R::zero_el() }).collect();
        for ki in k {
            for (n, x) in next.iter_mut().zip(&wp) {
                *n = n.clone() + ki.clone() * x.clone();
            }
            wp = ser_mul(&wp, &w);
        }
        m = next;
    }
    m.into_iter().skip(1).collect()
}

/// Free cumulants from moments: `k₁ = m₁`, `k_p = −[z^p] M(z)^{1−p} / (p−1)`.
pub fn cumulants_from_moments_generic<R: Ring>(m: &[R]) -> Vec<R> {
    assert_eq!(m.len(), ORDER);
    let mut ms = vec![R::one_el()];
    ms.extend(m.iter().cloned());
    let inv = ser_inv_unit(&ms);
    let mut out = vec![m[0].clone()];
    let mut pw = inv.clone();
    for p in 2..=ORDER {
        // pw = M^{1−p}
        out.push(-pw[p].clone().scale(q(1, p as i64 - 1)));
        pw = ser_mul(&pw, &inv);
    }
    out
}

/// Moments `θ₁..θ₈` of a spectral law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentVector {
    pub m: Vec<Q>,
}

/// Free cumulants `k₁..k₈`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulantVector {
    pub k: Vec<Q>,
}

fn check_len(v: &[Q]) -> Result<()> {
    if v.len() == ORDER {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected {ORDER} entries, got {}", v.len())))
    }
}

impl MomentVector {
    pub fn new(m: Vec<Q>) -> Result<Self> {
        check_len(&m)?;
        Ok(MomentVector { m })
    }
    pub fn from_ratios(v: &[(i64, i64)]) -> Result<Self> {
        Self::new(v.iter().map(|&(a, b)| q(a, b)).collect())
    }
    /// `θ_p`, `p ≥ 1`.
    pub fn get(&self, p: usize) -> Q {
        self.m[p - 1].clone()
    }
    /// Semicircle on `[−2, 2]`: Catalan even moments.
    pub fn semicircle() -> Self {
        let m = (1..=ORDER as i64)
            .map(|p| if p % 2 == 1 { Q::zero() } else { catalan(p / 2) })
            .collect();
        MomentVector { m }
    }
    /// Uniform law on `[−√3, √3]`: `θ_{2k} = 3^k / (2k+1)`.
    pub fn uniform() -> Self {
        let m = (1..=ORDER as u32)
            .map(|p| if p % 2 == 1 { Q::zero() } else { Q::new(BigInt::from(3).pow(p / 2), BigInt::from(p + 1)) })
            .collect();
        MomentVector { m }
    }
    /// Moments after subtracting the mean `θ₁`.
    pub fn centered(&self) -> Self {
        let mu = self.m[0].clone();
        let get = |k: usize| if k == 0 { Q::one() } else { self.m[k - 1].clone() };
        let m = (1..=ORDER)
            .map(|p| {
                (0..=p).fold(Q::zero(), |acc, k| {
                    let b = Q::from_integer(binomial(BigInt::from(p), BigInt::from(k)));
                    acc + b * get(k) * num_traits::pow(-mu.clone(), p - k)
                })
            })
            .collect();
        MomentVector { m }
    }
}

impl CumulantVector {
    pub fn new(k: Vec<Q>) -> Result<Self> {
        check_len(&k)?;
        Ok(CumulantVector { k })
    }
    pub fn from_ratios(v: &[(i64, i64)]) -> Result<Self> {
        Self::new(v.iter().map(|&(a, b)| q(a, b)).collect())
    }
    pub fn get(&self, p: usize) -> Q {
        self.k[p - 1].clone()
    }
    /// Marchenko–Pastur with ratio `φ`: `k_p = φ^{p−1}`.
    pub fn marchenko_pastur(phi: Q) -> Self {
        CumulantVector { k: (0..ORDER).map(|p| num_traits::pow(phi.clone(), p)).collect() }
    }
}

pub fn catalan(n: i64) -> Q {
    Q::new(binomial(BigInt::from(2 * n), BigInt::from(n)), BigInt::from(n + 1))
}

pub fn moments_from_cumulants(k: &CumulantVector) -> MomentVector {
    MomentVector { m: moments_from_cumulants_generic(&k.k) }
}

pub fn cumulants_from_moments(m: &MomentVector) -> CumulantVector {
    CumulantVector { k: cumulants_from_moments_generic(&m.m) }
}

/// Free cumulants `c₁..c₈` of `Y = √λ S + ξ` with `ξ` standard Wigner:
/// `c_p = k_p t^p`, plus 1 on `c₂`.
pub fn data_cumulants(k_signal: &CumulantVector) -> Vec<SqrtPoly> {
    k_signal
        .k
        .iter()
        .enumerate()
        .map(|(i, kp)| {
            let c = SqrtPoly::monomial(kp.clone(), i + 1);
            if i == 1 {
                c + SqrtPoly::one_el()
            } else {
                c
            }
        })
        .collect()
}

/// `F_n` for signal moments `m` and data free cumulants `c` (both indexed from
/// order 1). Monomials are completed with powers of `m₂` to degree `n`.
pub fn f_term<R: Ring>(m: &[R], c: &[R], n: usize) -> Result<R> {
    let m_ = |p: usize| m[p - 1].clone();
    let c_ = |p: usize| c[p - 1].clone();
    let k = |a: i64, b: i64| R::from_q(q(a, b));
    let pw = |x: R, e: usize| (0..e).fold(R::one_el(), |acc, _| acc * x.clone());
    let (m2, m3, c2, c3) = (m_(2), m_(3), c_(2), c_(3));
    let v = match n {
        2 => m2 * c2 * k(1, 2),
        3 => c3 * m3 * k(1, 3),
        4 => c_(4) * m_(4) * k(1, 4) - pw(m2, 2) * (pw(c2, 2) * k(1, 2) + c_(4)) * k(1, 2),
        5 => c_(5) * m_(5) * k(1, 5) - m3 * m2 * (c2 * c3 + c_(5)),
        6 => {
            let (c4, c6) = (c_(4), c_(6));
            -(pw(m3, 2) * (pw(c2.clone(), 3) * k(1, 3) + c2.clone() * c4.clone() + pw(c3.clone(), 2) + c6.clone()) * k(1, 2))
                + pw(m2.clone(), 3)
                    * (pw(c2.clone(), 3) * k(2, 1) + c2.clone() * c4.clone() * k(12, 1) + pw(c3.clone(), 2) * k(5, 1) + c6.clone() * k(7, 1))
                    * k(1, 6)
                - m_(4) * m2 * (c2 * c4 + pw(c3, 2) * k(1, 2) + c6.clone())
                + c6 * m_(6) * k(1, 6)
        }
        7 => {
            let (c4, c5, c7) = (c_(4), c_(5), c_(7));
            let c22 = pw(c2.clone(), 2);
            -(m3.clone() * m_(4) * (c22.clone() * c3.clone() + c2.clone() * c5.clone() + c3.clone() * c4.clone() * k(2, 1) + c7.clone()))
                + m3 * pw(m2.clone(), 2)
                    * (c22 * c3.clone() * k(5, 1) + c2.clone() * c5.clone() * k(7, 1) + c3.clone() * c4.clone() * k(8, 1) + c7.clone() * k(4, 1))
                - m_(5) * m2 * (c2 * c5 + c3 * c4 + c7.clone())
                + c7 * m_(7) * k(1, 7)
        }
        8 => {
            let (c4, c5, c6, c8) = (c_(4), c_(5), c_(6), c_(8));
            let c22 = pw(c2.clone(), 2);
            let c24 = pw(c2.clone(), 4);
            let c33 = pw(c3.clone(), 2);
            let c44 = pw(c4.clone(), 2);
            let c35 = c3.clone() * c5.clone();
            let c226 = c2.clone() * c6.clone();
            let c224 = c22.clone() * c4.clone();
            let c233 = c2.clone() * c33.clone();
            let (m4, m5, m6) = (m_(4), m_(5), m_(6));
            -(m3.clone() * m5 * (c224.clone() + c233.clone() + c226.clone() + c35.clone() * k(2, 1) + c44.clone() + c8.clone()))
                + pw(m3, 2)
                    * m2.clone()
                    * (c24.clone() * k(2, 1)
                        + c224.clone() * k(16, 1)
                        + c233.clone() * k(20, 1)
                        + c226.clone() * k(16, 1)
                        + c35.clone() * k(24, 1)
                        + c44.clone() * k(11, 1)
                        + c8.clone() * k(9, 1))
                - pw(m4.clone(), 2)
                    * (c24.clone() * k(1, 4)
                        + c224.clone()
                        + c233.clone() * k(2, 1)
                        + c226.clone()
                        + c35.clone() * k(2, 1)
                        + c44.clone() * k(3, 2)
                        + c8.clone())
                    * k(1, 2)
                + m4 * pw(m2.clone(), 2)
                    * (c24.clone()
                        + c224.clone() * k(11, 1)
                        + c233.clone() * k(14, 1)
                        + c226.clone() * k(16, 1)
                        + c35.clone() * k(18, 1)
                        + c44.clone() * k(11, 1)
                        + c8.clone() * k(9, 1))
                    * k(1, 2)
                - pw(m2.clone(), 4)
                    * (c24 * k(3, 1)
                        + c224 * k(24, 1)
                        + c233 * k(24, 1)
                        + c226.clone() * k(24, 1)
                        + c35.clone() * k(24, 1)
                        + c44.clone() * k(15, 1)
                        + c8.clone() * k(10, 1))
                    * k(3, 8)
                - m6 * m2 * (c2 * c6 + c35 + c44 * k(1, 2) + c8.clone())
                + c8 * m_(8) * k(1, 8)
        }
        _ => return Err(Error::Range(format!("F_{n} is only available for n in 2..=8"))),
    };
    Ok(v)
}

fn lift(m: &MomentVector) -> Vec<SqrtPoly> {
    m.m.iter().cloned().map(SqrtPoly::constant).collect()
}

/// `F_n` as a polynomial in `√λ` for the signal with moments `theta`
/// (centered first) and data cumulants `c_data`.
pub fn zjz_f(theta: &MomentVector, c_data: &[SqrtPoly], n: usize) -> Result<SqrtPoly> {
    if c_data.len() != ORDER {
        return Err(Error::InvalidArgument(format!("expected {ORDER} data cumulants")));
    }
    f_term(&lift(&theta.centered()), c_data, n)
}

/// Data cumulants for the signal with moments `theta` (centered first).
pub fn data_cumulants_for(theta: &MomentVector) -> Vec<SqrtPoly> {
    data_cumulants(&cumulants_from_moments(&theta.centered()))
}

/// `D̄_p / p = Σ_n t^n ∂F_n/∂θ̄_p` for `p = 2..8`, untruncated, evaluated on
/// the data moments of `theta`'s model. Entry 0 is `p = 2`.
fn dbar_over_p(theta: &MomentVector) -> Result<Vec<SqrtPoly>> {
    let mu = lift(&theta.centered());
    let mbar = moments_from_cumulants_generic(&data_cumulants_for(theta));
    let mu_d: Vec<Dual<SqrtPoly>> = mu.iter().cloned().map(Dual::constant).collect();
    (2..=ORDER)
        .map(|p| {
            let md: Vec<Dual<SqrtPoly>> = mbar
                .iter()
                .enumerate()
                .map(|(i, x)| if i + 1 == p { Dual::variable(x.clone()) } else { Dual::constant(x.clone()) })
                .collect();
            let cd = cumulants_from_moments_generic(&md);
            (2..=ORDER).try_fold(SqrtPoly::zero_el(), |acc, n| {
                Ok(acc + f_term(&mu_d, &cd, n)?.b * SqrtPoly::monomial(Q::one(), n))
            })
        })
        .collect()
}

/// `D̄_p` for `p ∈ {2, 3, 4}`, truncated at `λ²` (`p = 2, 3`) and `λ^{5/2}`
/// (`p = 4`).
pub fn dbar_derivatives(theta: &MomentVector, p: usize) -> Result<SqrtPoly> {
    let deg = match p {
        2 | 3 => 4,
        4 => 5,
        _ => return Err(Error::Range(format!("D_{p} is only available for p in 2..=4"))),
    };
    let d = dbar_over_p(theta)?;
    Ok((d[p - 2].clone() * SqrtPoly::constant(q(p as i64, 1))).truncate(deg))
}

/// Series in `√λ`: `terms[i] = (n, a)` means `a λ^{n/2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSeries {
    pub terms: Vec<(u32, Q)>,
}

impl ExpansionSeries {
    fn from_poly(p: &SqrtPoly, lo: usize, hi: usize) -> Self {
        ExpansionSeries { terms: (lo..=hi).map(|n| (n as u32, p.coeff(n))).collect() }
    }
    /// Coefficient of `λ^{half/2}`.
    pub fn coeff(&self, half: u32) -> Q {
        self.terms.iter().find(|(n, _)| *n == half).map(|(_, a)| a.clone()).unwrap_or_else(Q::zero)
    }
    /// Coefficients of `λ^1, λ^2, ...` among the stored orders, skipping `λ^0`.
    pub fn integer_orders(&self) -> Vec<Q> {
        self.terms.iter().filter(|(n, _)| n % 2 == 0 && *n > 0).map(|(_, a)| a.clone()).collect()
    }
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = crate::math::sqrt(lambda);
        self.terms.iter().map(|(n, a)| a.to_f64().unwrap_or(f64::NAN) * crate::math::powi(t, *n as i32)).sum()
    }
    /// `"n/2"` style exponent label.
    pub fn exponent_label(half: u32) -> String {
        if half % 2 == 0 {
            format!("{}", half / 2)
        } else {
            format!("{half}/2")
        }
    }
}

/// Full MI polynomial `λθ₂ − Σ_{n=2}^{8} t^n F_n`; only powers up to `t⁸` are
/// meaningful since `F₉, F₁₀, ...` are not included.
fn mi_poly(theta: &MomentVector) -> Result<SqrtPoly> {
    let mu = theta.centered();
    let c = data_cumulants_for(theta);
    let mut p = SqrtPoly::monomial(mu.get(2), 2);
    for n in 2..=ORDER {
        p = p - zjz_f(&mu, &c, n)? * SqrtPoly::monomial(Q::one(), n);
    }
    Ok(p)
}

/// Small-λ series of the β = 2 mutual information per `N²`, from `λ` up to
/// `λ^max_order` including half-integer orders. Orders above 4 would need
/// `F₉` onwards and are rejected.
pub fn mi_expansion(theta: &MomentVector, max_order: u32) -> Result<ExpansionSeries> {
    if !(1..=4).contains(&max_order) {
        return Err(Error::Range(format!("max_order {max_order}: the series is only known through lambda^4")));
    }
    Ok(ExpansionSeries::from_poly(&mi_poly(theta)?, 2, 2 * max_order as usize))
}

/// Small-λ series of `β·MMSE` (β = 2) through `λ³`:
/// `4θ₂ − 4Σ (n/2) λ^{n/2−1} F_n − 4 Σ_p (D̄_p/p) dθ̄_p/dλ`.
pub fn mmse_expansion(theta: &MomentVector) -> Result<ExpansionSeries> {
    let mu = theta.centered();
    let c = data_cumulants_for(theta);
    let mbar = moments_from_cumulants_generic(&c);
    let four = SqrtPoly::constant(q(4, 1));
    let mut s = SqrtPoly::constant(mu.get(2) * q(4, 1));
    for n in 2..=ORDER {
        let f = zjz_f(&mu, &c, n)?;
        s = s - four.clone() * SqrtPoly::monomial(q(n as i64, 2), n - 2) * f;
    }
    for (i, d) in dbar_over_p(theta)?.into_iter().enumerate() {
        let dm = mbar[i + 1].d_dlambda()?;
        s = s - four.clone() * d * dm;
    }
    Ok(ExpansionSeries::from_poly(&s, 0, 6))
}

/// `4 dI/dλ` from differentiating the MI polynomial directly, through `λ³`.
pub fn mmse_from_mi_derivative(theta: &MomentVector) -> Result<ExpansionSeries> {
    let d = mi_poly(theta)?.d_dlambda()? * SqrtPoly::constant(q(4, 1));
    Ok(ExpansionSeries::from_poly(&d, 0, 6))
}
