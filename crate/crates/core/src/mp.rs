//! Multiprecision helpers over `rug::Float` and a small complex type.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use std::ops::{Add, Mul, Neg, Sub};

pub fn fl(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn zero(prec: u32) -> Float {
    Float::new(prec)
}

pub fn one(prec: u32) -> Float {
    Float::with_val(prec, 1)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn two_pi(prec: u32) -> Float {
    pi(prec) * 2u32
}

/// 2^e at the given precision.
pub fn pow2(prec: u32, e: i32) -> Float {
    let mut x = Float::with_val(prec, 1);
    x <<= e;
    x
}

pub fn from_rational(prec: u32, r: &rug::Rational) -> Float {
    Float::with_val(prec, r)
}

/// Deterministic decimal rendering: enough digits to round-trip, trailing zeros removed.
pub fn fmt_float(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let s = x.to_string_radix(10, None);
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (&s[..], None),
    };
    let mant = if mant.contains('.') {
        let m = mant.trim_end_matches('0');
        m.trim_end_matches('.')
    } else {
        mant
    };
    match exp {
        Some(e) => format!("{mant}e{e}"),
        None => mant.to_string(),
    }
}

/// Short rendering with `digits` significant digits.
pub fn fmt_digits(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn max_abs(xs: &[Float]) -> f64 {
    xs.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Complex { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn real(x: Float) -> Self {
        let prec = x.prec();
        Complex { re: x, im: Float::new(prec) }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Complex { re: fl(prec, re), im: fl(prec, im) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// e^{i theta}
    pub fn cis(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        Complex { re: c, im: s }
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = self.re.clone().square();
        n += self.im.clone().square();
        n
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Float {
        self.im.clone().atan2(&self.re)
    }

    pub fn scale(&self, s: &Float) -> Self {
        Complex { re: Float::with_val(self.prec(), &self.re * s), im: Float::with_val(self.prec(), &self.im * s) }
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        Complex { re: Float::with_val(self.prec(), &self.re / &n), im: -Float::with_val(self.prec(), &self.im / &n) }
    }

    pub fn div(&self, o: &Complex) -> Self {
        self * &o.inv()
    }

    pub fn sqrt(&self) -> Self {
        let r = self.abs();
        let prec = self.prec();
        if r.is_zero() {
            return Complex::zero(prec);
        }
        let re = Float::with_val(prec, &r + &self.re) / 2u32;
        let re = re.sqrt();
        let im = if re.is_zero() {
            let v = Float::with_val(prec, &r - &self.re) / 2u32;
            v.sqrt()
        } else {
            Float::with_val(prec, &self.im / &re) / 2u32
        };
        Complex { re, im }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Complex::one(self.prec());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn mul_add_assign(&mut self, a: &Complex, b: &Complex) {
        let prec = self.prec();
        let mut t = Float::with_val(prec, &a.re * &b.re);
        t -= Float::with_val(prec, &a.im * &b.im);
        self.re += t;
        let mut u = Float::with_val(prec, &a.re * &b.im);
        u += Float::with_val(prec, &a.im * &b.re);
        self.im += u;
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Complex { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, o: &Complex) -> Complex {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= Float::with_val(p, &self.im * &o.im);
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += Float::with_val(p, &self.im * &o.re);
        Complex { re, im }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex { re: -self.re, im: -self.im }
    }
}

/// Field operations shared by the real and Hermitian Levinson paths.
pub trait Scalar: Clone + std::fmt::Debug + Send + Sync {
    fn zero_like(prec: u32) -> Self;
    fn one_like(prec: u32) -> Self;
    fn conj(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn scale(&self, s: &Float) -> Self;
    fn norm_sqr(&self) -> Float;
    fn re(&self) -> Float;
    fn to_complex(&self) -> Complex;
    fn from_real(x: Float) -> Self;
    fn prec(&self) -> u32;
    fn mul_add_assign(&mut self, a: &Self, b: &Self);
}

impl Scalar for Float {
    fn zero_like(prec: u32) -> Self {
        Float::new(prec)
    }
    fn one_like(prec: u32) -> Self {
        Float::with_val(prec, 1)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn scale(&self, s: &Float) -> Self {
        Float::with_val(self.prec(), self * s)
    }
    fn norm_sqr(&self) -> Float {
        self.clone().square()
    }
    fn re(&self) -> Float {
        self.clone()
    }
    fn to_complex(&self) -> Complex {
        Complex::real(self.clone())
    }
    fn from_real(x: Float) -> Self {
        x
    }
    fn prec(&self) -> u32 {
        Float::prec(self)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += Float::with_val(Float::prec(self), a * b);
    }
}

impl Scalar for Complex {
    fn zero_like(prec: u32) -> Self {
        Complex::zero(prec)
    }
    fn one_like(prec: u32) -> Self {
        Complex::one(prec)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, s: &Float) -> Self {
        Complex::scale(self, s)
    }
    fn norm_sqr(&self) -> Float {
        Complex::norm_sqr(self)
    }
    fn re(&self) -> Float {
        self.re.clone()
    }
    fn to_complex(&self) -> Complex {
        self.clone()
    }
    fn from_real(x: Float) -> Self {
        Complex::real(x)
    }
    fn prec(&self) -> u32 {
        Complex::prec(self)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        Complex::mul_add_assign(self, a, b)
    }
}

/// x^y for positive x.
pub fn powf(x: &Float, y: &Float) -> Float {
    Float::with_val(x.prec(), x.pow(y))
}

pub fn gamma(x: &Float) -> Float {
    x.clone().gamma()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_trims_zeros() {
        assert_eq!(fmt_float(&fl(128, 1.25)), "1.25");
        assert_eq!(fmt_float(&fl(64, 0.0)), "0");
        let s = fmt_float(&fl(128, 1e-30));
        assert!(s.ends_with("e-30"), "{s}");
    }

    #[test]
    fn complex_roundtrip() {
        let z = Complex::from_f64(128, 3.0, -4.0);
        assert_eq!(z.abs().to_f64(), 5.0);
        let w = z.div(&z);
        assert!((w.re.to_f64() - 1.0).abs() < 1e-30 && w.im.to_f64().abs() < 1e-30);
        let s = Complex::from_f64(128, -4.0, 0.0).sqrt();
        assert!((s.im.to_f64() - 2.0).abs() < 1e-30);
    }
}
