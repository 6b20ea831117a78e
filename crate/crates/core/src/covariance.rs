//! Covariances `r(t) = int e^{-itl} f(l) dl` with per-entry error bounds.

use crate::arcs::{Angle, ArcSet};
use crate::error::{Error, Result};
use crate::mp::{self, Complex};
use crate::quadrature::{self, Options};
use crate::spectral::{FactorForm, Kind, PositiveFn, SpectralDensity};
use rug::Float;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct CovarianceSequence {
    values: Vec<Complex>,
    errors: Vec<Float>,
    prec: u32,
    source: Source,
    spec: String,
}

impl CovarianceSequence {
    pub fn new(values: Vec<Complex>, errors: Vec<Float>, prec: u32, source: Source, spec: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty covariance sequence".into()));
        }
        if !(values[0].re > 0) {
            return Err(Error::Degenerate(format!("r(0) = {} is not positive", mp::fmt_digits(&values[0].re, 12))));
        }
        let values: Vec<Complex> = values.into_iter().map(|z| z.with_prec(prec)).collect();
        let errors = errors.into_iter().map(|e| Float::with_val(53, e)).collect();
        Ok(CovarianceSequence { values, errors, prec, source, spec: spec.into() })
    }

    /// Real sequence with zero error bounds.
    pub fn from_real(values: &[Float], prec: u32) -> Result<Self> {
        let v = values.iter().map(|x| Complex::real(Float::with_val(prec, x))).collect();
        let e = vec![Float::new(53); values.len()];
        CovarianceSequence::new(v, e, prec, Source::ClosedForm, "explicit")
    }

    pub fn from_f64(values: &[f64], prec: u32) -> Result<Self> {
        let v: Vec<Float> = values.iter().map(|x| mp::fl(prec, *x)).collect();
        CovarianceSequence::from_real(&v, prec)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest lag available.
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn get(&self, t: usize) -> &Complex {
        &self.values[t]
    }

    pub fn r0(&self) -> &Float {
        &self.values[0].re
    }

    pub fn errors(&self) -> &[Float] {
        &self.errors
    }

    pub fn max_error(&self) -> Float {
        self.errors.iter().fold(Float::new(53), |m, e| if *e > m { e.clone() } else { m })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im.is_zero())
    }

    pub fn real_values(&self) -> Vec<Float> {
        self.values.iter().map(|z| z.re.clone()).collect()
    }

    pub fn truncate(&self, n: usize) -> CovarianceSequence {
        let mut c = self.clone();
        c.values.truncate(n + 1);
        c.errors.truncate(n + 1);
        c
    }

    pub fn with_prec(&self, prec: u32) -> CovarianceSequence {
        let mut c = self.clone();
        c.prec = prec;
        c.values = c.values.iter().map(|z| z.with_prec(prec)).collect();
        c
    }

    /// Covariances of `c f`.
    pub fn scale(&self, c: &Float) -> CovarianceSequence {
        let mut out = self.clone();
        let ca = Float::with_val(53, c.abs_ref());
        for (z, e) in out.values.iter_mut().zip(out.errors.iter_mut()) {
            *z = z.scale(c);
            *e *= &ca;
        }
        out
    }

    /// Covariances of `f(l - l0)`: `e^{-it l0} r(t)`.
    pub fn modulate(&self, l0: &Angle) -> CovarianceSequence {
        let mut out = self.clone();
        let th = l0.to_float(self.prec + 32);
        for (t, z) in out.values.iter_mut().enumerate() {
            let phase = Complex::cis(&(Float::with_val(self.prec + 32, &th * t as u32) * -1i32)).with_prec(self.prec);
            *z = &phase * z;
        }
        out.spec = format!("rotate({}, {})", self.spec, l0);
        out
    }

    /// `(r(0) - xi, r(1), ...)`: the symbol shifted by `xi / (2 pi)`.
    pub fn shifted(&self, xi: &Float) -> CovarianceSequence {
        let mut out = self.clone();
        out.values[0].re -= xi;
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# density={} precision_bits={} source={}", self.spec, self.prec, match self.source {
            Source::ClosedForm => "closed-form",
            Source::Quadrature => "quadrature",
        });
        s.push_str("t,re,im,abs_error_bound\n");
        for (t, (z, e)) in self.values.iter().zip(&self.errors).enumerate() {
            let _ = writeln!(s, "{t},{},{},{}", mp::fmt_float(&z.re), mp::fmt_float(&z.im), mp::fmt_digits(e, 6));
        }
        s
    }
}

/// Working precision for a quadrature target: target bits plus guard, capped by `prec`.
fn quad_prec(prec: u32, target: &Float, n: usize) -> u32 {
    let bits = -target.to_f64().log2();
    let guard = 48 + (n.max(2) as f64).log2().ceil() as u32;
    ((bits.max(20.0) as u32) + guard).min(prec).max(64)
}

fn check_target(prec: u32, target: &Float) -> Result<()> {
    if *target < mp::pow2(53, -(prec as i32) + 16) || !(target.is_sign_positive()) || target.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "target error {} below 2^-(precision-16) for {prec} bits",
            mp::fmt_digits(target, 4)
        )));
    }
    Ok(())
}

fn clip_nonneg(pieces: Vec<(Angle, Angle)>) -> Vec<(Angle, Angle)> {
    let zero = Angle::zero();
    pieces
        .into_iter()
        .filter_map(|(lo, hi)| {
            let lo = if lo.cmp_value(&zero) == Ordering::Less { zero.clone() } else { lo };
            if hi.cmp_value(&lo) == Ordering::Greater {
                Some((lo, hi))
            } else {
                None
            }
        })
        .collect()
}

/// Quadrature of `r(0..=n)` to absolute error `target` per entry.
pub fn covariances_quadrature(f: &SpectralDensity, n: usize, prec: u32, target: &Float) -> Result<CovarianceSequence> {
    check_target(prec, target)?;
    let q = quad_prec(prec, target, n);
    let even = f.is_even();
    let pieces = if even { clip_nonneg(f.support().pieces()) } else { f.support().pieces() };
    let intervals: Vec<(Float, Float)> = pieces.iter().map(|(a, b)| (a.to_float(q), b.to_float(q))).collect();
    let mut sing: Vec<Float> = f.singular_points().iter().map(|a| a.to_float(q)).collect();
    if even {
        sing.extend(f.singular_points().iter().map(|a| a.neg().canonical().to_float(q)));
    }
    let factor = if even { 2u32 } else { 1 };
    let tol = Float::with_val(q, target / factor);
    let mut opts = Options::new(q, tol.clone());
    opts.max_width = std::f64::consts::PI / (4.0 * n.max(1) as f64);
    let cutoff = Float::with_val(q, &tol * mp::pow2(q, -24));
    let dim = if even { n + 1 } else { 2 * n + 1 };
    let res = quadrature::integrate(
        dim,
        |lam, out| {
            let v = f.eval_on_support(lam);
            if v.is_nan() || v.is_infinite() {
                return Err(Error::Evaluation { lambda: lam.to_f64(), msg: format!("density value {v}") });
            }
            if v < cutoff {
                for o in out.iter_mut() {
                    *o = Float::new(q);
                }
                return Ok(());
            }
            let (s1, c1) = lam.clone().sin_cos(Float::new(q));
            let two_c = Float::with_val(q, &c1 * 2u32);
            // cos(t l) and sin(t l) by the three-term recurrence
            let (mut cp, mut cc) = (mp::one(q), c1);
            let (mut sp, mut sc) = (Float::new(q), s1);
            out[0] = v.clone();
            for t in 1..=n {
                out[t] = Float::with_val(q, &cc * &v);
                if !even {
                    out[n + t] = Float::with_val(q, &sc * &v);
                }
                let cn = Float::with_val(q, &two_c * &cc) - &cp;
                cp = std::mem::replace(&mut cc, cn);
                if !even {
                    let sn = Float::with_val(q, &two_c * &sc) - &sp;
                    sp = std::mem::replace(&mut sc, sn);
                }
            }
            Ok(())
        },
        &intervals,
        &sing,
        &opts,
    )?;
    let mut values = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    for t in 0..=n {
        let re = Float::with_val(prec, &res.values[t] * factor);
        let im = if even || t == 0 { Float::new(prec) } else { Float::with_val(prec, -&res.values[n + t]) };
        let mut e = Float::with_val(53, &res.errors[t] * factor);
        if !even && t > 0 {
            e += &res.errors[n + t];
        }
        // rounding in the working precision
        e += mp::pow2(53, -(q as i32) + 8);
        values.push(Complex::new(re, im));
        errors.push(e);
    }
    CovarianceSequence::new(values, errors, prec, Source::Quadrature, f.to_string())
}

pub fn covariances_ma1(b: f64, sigma2: f64, n: usize, prec: u32) -> Result<CovarianceSequence> {
    if !(0.0..=1.0).contains(&b) || !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 <= b <= 1 and sigma2 > 0, got b = {b}, sigma2 = {sigma2}")));
    }
    let bf = mp::fl(prec, b);
    let s2 = mp::fl(prec, sigma2);
    let mut v = vec![Complex::zero(prec); n + 1];
    v[0] = Complex::real(Float::with_val(prec, bf.clone().square() + 1u32) * &s2);
    if n >= 1 {
        v[1] = Complex::real(-Float::with_val(prec, &bf * &s2));
    }
    let spec = SpectralDensity::ma1(b, sigma2)?.to_string();
    CovarianceSequence::new(v, vec![Float::new(53); n + 1], prec, Source::ClosedForm, spec)
}

/// Indicator of the arcs: `r(t) = sum_i e^{-it c_i} 2 sin(t h_i) / t`.
pub fn covariances_arcset(arcs: &ArcSet, n: usize, prec: u32) -> Result<CovarianceSequence> {
    let w = prec + 32;
    let mut v = Vec::with_capacity(n + 1);
    let real = arcs.is_conjugate_symmetric();
    if arcs.is_full() {
        v.push(Complex::real(mp::two_pi(prec)));
        v.extend((1..=n).map(|_| Complex::zero(prec)));
    } else {
        let ar: Vec<(Float, Float)> = arcs.arcs().iter().map(|a| (a.center.to_float(w), a.half.to_float(w))).collect();
        for t in 0..=n {
            let mut acc = Complex::zero(w);
            for (c, h) in &ar {
                if t == 0 {
                    acc.re += Float::with_val(w, h * 2u32);
                    continue;
                }
                let amp = Float::with_val(w, h * t as u32).sin() * 2u32 / t as u32;
                let ph = Complex::cis(&-Float::with_val(w, c * t as u32));
                acc = &acc + &ph.scale(&amp);
            }
            if real {
                acc.im = Float::new(w);
            }
            v.push(acc.with_prec(prec));
        }
    }
    let spec = SpectralDensity::arc_indicator(arcs.clone())?.to_string();
    CovarianceSequence::new(v, vec![Float::new(53); n + 1], prec, Source::ClosedForm, spec)
}

fn arfima_certified() -> &'static Mutex<HashSet<u64>> {
    static C: OnceLock<Mutex<HashSet<u64>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashSet::new()))
}

fn arfima_recurrence(d: f64, sigma2: f64, n: usize, prec: u32) -> Vec<Float> {
    let w = prec + 32;
    let df = mp::fl(w, d);
    let one = mp::one(w);
    let g1 = mp::gamma(&Float::with_val(w, &one - Float::with_val(w, &df * 2u32)));
    let g2 = mp::gamma(&Float::with_val(w, &one - &df)).square();
    let mut r = Float::with_val(w, &g1 / &g2) * sigma2;
    let mut out = Vec::with_capacity(n + 1);
    for t in 0..=n {
        out.push(Float::with_val(prec, &r));
        let num = Float::with_val(w, &df + t as u32);
        let den = Float::with_val(w, Float::with_val(w, (t + 1) as u32) - &df);
        r = r * num / den;
    }
    out
}

/// ARFIMA(0, d, 0) via `r(0) = s2 Gamma(1-2d)/Gamma(1-d)^2`, `r(t+1) = r(t)(t+d)/(t+1-d)`, certified
/// against quadrature for `t <= 20` before first use.
pub fn covariances_arfima0d0(d: f64, n: usize, prec: u32) -> Result<CovarianceSequence> {
    covariances_arfima(d, 1.0, n, prec)
}

pub fn covariances_arfima(d: f64, sigma2: f64, n: usize, prec: u32) -> Result<CovarianceSequence> {
    if !(d < 0.5) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("d = {d} must be below 1/2")));
    }
    let f = SpectralDensity::arfima(d, vec![], vec![], sigma2)?;
    if d == 0.0 {
        let mut v = vec![Complex::zero(prec); n + 1];
        v[0] = Complex::real(mp::fl(prec, sigma2));
        return CovarianceSequence::new(v, vec![Float::new(53); n + 1], prec, Source::ClosedForm, f.to_string());
    }
    let key = d.to_bits() ^ sigma2.to_bits().rotate_left(17);
    let certified = arfima_certified().lock().unwrap().contains(&key);
    if !certified {
        let target = mp::fl(128, 1e-22);
        let quad = covariances_quadrature(&f, 20, 128, &target)?;
        let rec = arfima_recurrence(d, sigma2, 20, 128);
        for t in 0..=20 {
            let diff = Float::with_val(128, &quad.get(t).re - &rec[t]).abs();
            if diff > 1e-20 {
                return Err(Error::Violation(format!(
                    "ARFIMA recurrence disagrees with quadrature at t = {t}: difference {}",
                    mp::fmt_digits(&diff, 4)
                )));
            }
        }
        arfima_certified().lock().unwrap().insert(key);
    }
    let v = arfima_recurrence(d, sigma2, n, prec).into_iter().map(Complex::real).collect();
    let e = vec![mp::pow2(53, -(prec as i32) + 8); n + 1];
    CovarianceSequence::new(v, e, prec, Source::ClosedForm, f.to_string())
}

/// Laurent coefficients `c_{-m}..c_m` of the factor when it is a plain trigonometric polynomial
/// times a constant.
fn polynomial_factor(f: &crate::spectral::Factor, prec: u32) -> Option<Vec<Complex>> {
    let PositiveFn::Const(h) = f.h() else { return None };
    let scale = |c: Vec<Complex>, s: f64| -> Vec<Complex> { c.iter().map(|z| z.scale(&mp::fl(prec, s))).collect() };
    match f.form() {
        FactorForm::Ratio { t1, t2 } if t2.is_constant() => Some(scale(t1.laurent(prec), h / t2.constant_value()?)),
        FactorForm::AbsTrigPower { t, alpha } if alpha.fract() == 0.0 && (t.is_nonneg_certified() || alpha % 2.0 == 0.0) => {
            let base = t.laurent(prec);
            let mut acc = vec![Complex::one(prec)];
            for _ in 0..(*alpha as u32) {
                acc = crate::poly::mul(&acc, &base);
            }
            Some(scale(acc, *h))
        }
        _ => None,
    }
}

/// Closed forms where the structure allows, otherwise quadrature to `target`.
pub fn covariances(f: &SpectralDensity, n: usize, prec: u32, target: &Float) -> Result<CovarianceSequence> {
    let spec = f.to_string();
    let out = match f.kind() {
        Kind::Arma { ar, ma, sigma2 } if ar.is_empty() && ma.is_empty() => {
            let mut v = vec![Complex::zero(prec); n + 1];
            v[0] = Complex::real(mp::fl(prec, *sigma2));
            CovarianceSequence::new(v, vec![Float::new(53); n + 1], prec, Source::ClosedForm, spec.clone())?
        }
        Kind::Ma1 { b, sigma2 } => covariances_ma1(*b, *sigma2, n, prec)?,
        Kind::Arfima { d, ar, ma, sigma2 } if ar.is_empty() && ma.is_empty() => covariances_arfima(*d, *sigma2, n, prec)?,
        Kind::Positive(PositiveFn::Const(c)) => {
            let mut v = vec![Complex::zero(prec); n + 1];
            v[0] = Complex::real(mp::fl(prec, *c) * mp::two_pi(prec));
            CovarianceSequence::new(v, vec![Float::new(53); n + 1], prec, Source::ClosedForm, spec.clone())?
        }
        Kind::ArcRestricted { base, support } => match base.kind() {
            Kind::Positive(PositiveFn::Const(c)) => covariances_arcset(support, n, prec)?.scale(&mp::fl(prec, *c)),
            _ => covariances_quadrature(f, n, prec, target)?,
        },
        Kind::Product { base, factor } => match polynomial_factor(factor, prec + 32) {
            Some(c) => {
                let m = (c.len() - 1) / 2;
                let rb = covariances(base, n + m, prec, target)?;
                convolve(&rb, &c, n, prec)?
            }
            None => covariances_quadrature(f, n, prec, target)?,
        },
        _ => covariances_quadrature(f, n, prec, target)?,
    };
    let mut out = out;
    out.spec = spec;
    Ok(out)
}

/// `r_{ft}(k) = sum_j c_j r_f(k - j)` with `r_f(-m) = conj(r_f(m))`.
fn convolve(rb: &CovarianceSequence, c: &[Complex], n: usize, prec: u32) -> Result<CovarianceSequence> {
    let m = (c.len() - 1) as i64 / 2;
    let w = prec + 32;
    let at = |i: i64| -> (Complex, &Float) {
        let z = rb.get(i.unsigned_abs() as usize).with_prec(w);
        let e = &rb.errors()[i.unsigned_abs() as usize];
        if i < 0 {
            (z.conj(), e)
        } else {
            (z, e)
        }
    };
    let mut values = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    let real = rb.is_real() && c.iter().all(|z| z.im.is_zero());
    for k in 0..=n as i64 {
        let mut acc = Complex::zero(w);
        let mut err = Float::new(53);
        for (idx, cj) in c.iter().enumerate() {
            let j = idx as i64 - m;
            let (r, e) = at(k - j);
            acc.mul_add_assign(cj, &r);
            err += Float::with_val(53, e * &cj.abs());
        }
        if real {
            acc.im = Float::new(w);
        }
        values.push(acc.with_prec(prec));
        errors.push(err);
    }
    CovarianceSequence::new(values, errors, prec, rb.source(), "")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Factor;
    use crate::trig::TrigPolynomial;
    use std::f64::consts::PI;

    #[test]
    fn white_noise_quadrature() {
        let f = SpectralDensity::white(1.0).unwrap();
        let r = covariances_quadrature(&f, 5, 128, &mp::fl(128, 1e-30)).unwrap();
        assert!((r.get(0).re.to_f64() - 1.0).abs() < 1e-30);
        for t in 1..=5 {
            assert!(r.get(t).re.to_f64().abs() < 1e-30);
        }
    }

    #[test]
    fn ma1_quadrature_and_closed() {
        let f = SpectralDensity::ma1(1.0, 1.0).unwrap();
        let r = covariances_quadrature(&f, 3, 128, &mp::fl(128, 1e-30)).unwrap();
        let want = [2.0, -1.0, 0.0, 0.0];
        for t in 0..=3 {
            assert!((r.get(t).re.to_f64() - want[t]).abs() < 1e-29, "{t}");
        }
        let c = covariances_ma1(0.5, 1.0, 3, 128).unwrap();
        assert_eq!(c.get(0).re.to_f64(), 1.25);
        assert_eq!(c.get(1).re.to_f64(), -0.5);
        let c = covariances_ma1(0.0, 3.0, 3, 128).unwrap();
        assert_eq!(c.get(0).re.to_f64(), 3.0);
        assert!(c.get(1).re.is_zero());
    }

    #[test]
    fn pollaczek_against_rectangle_rule() {
        let f = SpectralDensity::pollaczek(1.0).unwrap();
        let r = covariances_quadrature(&f, 2, 128, &mp::fl(128, 1e-25)).unwrap();
        // f is smooth and periodic, so the rectangle rule converges geometrically
        let m = 1_000_000;
        let mut acc = [0.0f64; 3];
        for j in 0..m {
            let l = -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64;
            let v = f.eval_f64(l);
            for (t, a) in acc.iter_mut().enumerate() {
                *a += v * (t as f64 * l).cos();
            }
        }
        for t in 0..3 {
            let brute = acc[t] * 2.0 * PI / m as f64;
            assert!((r.get(t).re.to_f64() - brute).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn arcset_closed_forms() {
        let full = covariances_arcset(&ArcSet::full(), 3, 128).unwrap();
        assert!((full.get(0).re.to_f64() - 2.0 * PI).abs() < 1e-15);
        assert!(full.get(1).re.is_zero());
        let upper = ArcSet::single(Angle::pi_frac(1, 2), Angle::pi_frac(1, 2)).unwrap();
        let r = covariances_arcset(&upper, 1, 128).unwrap();
        assert!(r.get(1).re.to_f64().abs() < 1e-35 && (r.get(1).im.to_f64() + 2.0).abs() < 1e-35);
        let two = ArcSet::new(vec![(Angle::rad(1.25), Angle::rad(0.25)), (Angle::rad(-1.25), Angle::rad(0.25))]).unwrap();
        let closed = covariances_arcset(&two, 2, 256).unwrap();
        let f = SpectralDensity::arc_indicator(two).unwrap();
        let quad = covariances_quadrature(&f, 2, 256, &mp::fl(256, 1e-32)).unwrap();
        let diff = Float::with_val(256, &closed.get(2).re - &quad.get(2).re).abs();
        assert!(diff < 1e-30, "{diff}");
    }

    #[test]
    fn arfima_limits() {
        let r = covariances_arfima0d0(0.25, 200, 128).unwrap();
        let f = SpectralDensity::arfima(0.25, vec![], vec![], 1.0).unwrap();
        let q = covariances_quadrature(&f, 0, 128, &mp::fl(128, 1e-24)).unwrap();
        assert!(Float::with_val(128, &r.get(0).re - &q.get(0).re).abs() < 1e-20);
        let ratio = |t: usize| Float::with_val(128, &r.get(t + 1).re / &r.get(t).re).to_f64();
        assert!((ratio(100) - 1.0).abs() < 0.01 && (ratio(199) - 1.0).abs() < 0.01);
        let r = covariances_arfima0d0(1e-9, 3, 128).unwrap();
        assert!((r.get(0).re.to_f64() - 1.0).abs() < 1e-8 && r.get(1).re.to_f64().abs() < 1e-8);
        assert!(covariances_arfima0d0(0.5, 3, 128).is_err());
    }

    #[test]
    fn product_convolution_matches_quadrature() {
        let f = SpectralDensity::pollaczek(1.0).unwrap();
        let g = Factor::abs_trig_pow(TrigPolynomial::sin2(Angle::zero()), 1.0).unwrap();
        let fg = SpectralDensity::multiply_factor(f, g).unwrap();
        let target = mp::fl(160, 1e-35);
        let conv = covariances(&fg, 6, 160, &target).unwrap();
        let quad = covariances_quadrature(&fg, 6, 160, &target).unwrap();
        for t in 0..=6 {
            let d = Float::with_val(160, &conv.get(t).re - &quad.get(t).re).abs();
            assert!(d < 1e-33, "t={t}: {d}");
        }
    }

    #[test]
    fn modulation_and_scaling() {
        let arc = ArcSet::single(Angle::zero(), Angle::rad(0.75)).unwrap();
        let theta = Angle::rad(0.5);
        let base = covariances_arcset(&arc, 4, 192).unwrap();
        let rotated = covariances_arcset(&arc.rotate(&theta), 4, 192).unwrap();
        let f = SpectralDensity::arc_indicator(arc.rotate(&theta)).unwrap();
        let quad = covariances_quadrature(&f, 4, 192, &mp::fl(192, 1e-35)).unwrap();
        let m = base.modulate(&theta);
        for t in 0..=4 {
            assert!((m.get(t) - rotated.get(t)).abs() < 1e-50);
            assert!((m.get(t) - quad.get(t)).abs() < 1e-34);
        }
        let s = base.scale(&mp::fl(192, 3.0));
        assert!(Float::with_val(192, &s.get(2).re - Float::with_val(192, &base.get(2).re * 3u32)).abs() < 1e-55);
    }

    #[test]
    fn csv_layout() {
        let c = covariances_ma1(0.5, 1.0, 2, 64).unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# density=ma1:b=0.5,sigma2=1 precision_bits=64"));
        assert_eq!(lines[1], "t,re,im,abs_error_bound");
        assert_eq!(lines[2], "0,1.25,0,0");
    }
}
