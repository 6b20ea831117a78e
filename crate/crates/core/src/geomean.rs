//! Geometric means `G(f) = exp((1/2pi) int ln f)`, the Szego condition, and closed forms for factors.

use crate::arcs::Angle;
use crate::error::{Error, Result};
use crate::mp::{self, Complex};
use crate::poly;
use crate::quadrature::{self, Options};
use crate::spectral::{Factor, FactorForm, Kind, PositiveFn, SpectralDensity, Szego};
use crate::trig::TrigPolynomial;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct GeomeanResult {
    /// `None` when the log-integral diverges to -inf.
    pub value: Option<Float>,
    pub log_integral: Option<Float>,
    pub method: Method,
    pub error_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeomeanRecord {
    pub value: String,
    pub method: Method,
    pub log_integral: String,
    pub classification: Szego,
    pub error_bound: Option<f64>,
}

impl GeomeanResult {
    fn zero(method: Method) -> Self {
        GeomeanResult { value: None, log_integral: None, method, error_bound: None }
    }

    fn from_log(log_integral: Float, method: Method, error_bound: Option<f64>) -> Self {
        let prec = log_integral.prec();
        let v = Float::with_val(prec, &log_integral / mp::two_pi(prec)).exp();
        GeomeanResult { value: Some(v), log_integral: Some(log_integral), method, error_bound }
    }

    fn from_value(value: Float, method: Method) -> Self {
        if value.is_zero() {
            return GeomeanResult::zero(method);
        }
        let prec = value.prec();
        let li = value.clone().ln() * mp::two_pi(prec);
        GeomeanResult { value: Some(value), log_integral: Some(li), method, error_bound: None }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_none()
    }

    pub fn value_f64(&self) -> Option<f64> {
        Some(self.value.as_ref().map(|v| v.to_f64()).unwrap_or(0.0))
    }

    pub fn value_or_zero(&self, prec: u32) -> Float {
        self.value.as_ref().map(|v| Float::with_val(prec, v)).unwrap_or_else(|| Float::new(prec))
    }

    /// `G(a) G(b)`
    pub fn mul(&self, o: &GeomeanResult) -> GeomeanResult {
        let method = if self.method == Method::ClosedForm && o.method == Method::ClosedForm {
            Method::ClosedForm
        } else {
            Method::Quadrature
        };
        let err = match (self.error_bound, o.error_bound) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
        };
        match (&self.log_integral, &o.log_integral) {
            (Some(a), Some(b)) => GeomeanResult::from_log(Float::with_val(a.prec().max(b.prec()), a + b), method, err),
            _ => GeomeanResult::zero(method),
        }
    }

    pub fn record(&self, classification: Szego) -> GeomeanRecord {
        GeomeanRecord {
            value: self.value.as_ref().map(mp::fmt_float).unwrap_or_else(|| "0".into()),
            method: self.method,
            log_integral: self.log_integral.as_ref().map(mp::fmt_float).unwrap_or_else(|| "-inf".into()),
            classification,
            error_bound: self.error_bound,
        }
    }
}

/// `s_0 .. s_nu` with `|s(e^{il})|^2 = t(l)`, no zeros in the open disc and `s(0) > 0`.
pub fn fejer_riesz(t: &TrigPolynomial, prec: u32) -> Result<Vec<Complex>> {
    Ok(t.factor(prec)?.s)
}

/// `G(t) = |s(0)|^2`.
pub fn geomean_trig(t: &TrigPolynomial, prec: u32) -> Result<Float> {
    let s = fejer_riesz(t, prec)?;
    Ok(s[0].norm_sqr())
}

/// Geometric mean of a bounded positive function.
pub fn geomean_positive(h: &PositiveFn, prec: u32) -> Result<GeomeanResult> {
    match h {
        PositiveFn::Const(c) => Ok(GeomeanResult::from_value(mp::fl(prec, *c), Method::ClosedForm)),
        PositiveFn::ExpOdd(_) => Ok(GeomeanResult::from_value(mp::one(prec), Method::ClosedForm)),
        PositiveFn::Custom(_) => {
            let w = prec.min(128);
            let opts = Options::new(w, mp::pow2(w, -(w as i32) + 24));
            let iv = [(-mp::pi(w), mp::pi(w))];
            let (li, err) = quadrature::integrate_scalar(|x| Ok(h.ln_eval(x)), &iv, &[], &opts)?;
            Ok(GeomeanResult::from_log(li, Method::Quadrature, Some(err.to_f64())))
        }
    }
}

/// `int_{-pi}^{pi} ln|l - rho| dl` for complex `rho`.
fn log_distance_integral(rho: &Complex, prec: u32) -> Float {
    let pi = mp::pi(prec);
    let u = &rho.re;
    let v = rho.im.clone().abs();
    let anti = |x: Float| -> Float {
        if v.is_zero() {
            if x.is_zero() {
                return Float::new(prec);
            }
            let l = x.clone().abs().ln();
            return Float::with_val(prec, &x * &l) - &x;
        }
        let x2 = Float::with_val(prec, x.clone().square() + v.clone().square());
        let a = Float::with_val(prec, &x * x2.ln());
        let b = Float::with_val(prec, &x * 2u32);
        let c = Float::with_val(prec, Float::with_val(prec, &x / &v).atan() * &v) * 2u32;
        (a - b + c) / 2u32
    };
    let hi = anti(Float::with_val(prec, &pi - u));
    let lo = anti(Float::with_val(prec, -Float::with_val(prec, &pi + u)));
    hi - lo
}

/// `G(|q|)` for a real algebraic polynomial (ascending coefficients).
pub fn geomean_algebraic(q: &[rug::Rational], prec: u32) -> Result<Float> {
    let w = prec + 64;
    let c: Vec<Complex> = q.iter().map(|r| Complex::real(mp::from_rational(w, r))).collect();
    let lead = c.last().unwrap().re.clone().abs();
    let mut s = lead.ln();
    let roots = poly::roots(&c)?;
    let two_pi = mp::two_pi(w);
    for z in &roots {
        s += log_distance_integral(z, w) / &two_pi;
    }
    Ok(Float::with_val(prec, s.exp()))
}

/// `G(g)` from product and power rules.
pub fn geometric_mean_closed(g: &Factor) -> Result<GeomeanResult> {
    geometric_mean_closed_prec(g, 128)
}

pub fn geometric_mean_closed_prec(g: &Factor, prec: u32) -> Result<GeomeanResult> {
    let gh = geomean_positive(g.h(), prec)?;
    let core = match g.form() {
        FactorForm::Ratio { t1, t2 } => {
            let a = geomean_trig(t1, prec)?;
            let b = geomean_trig(t2, prec)?;
            if b.is_zero() {
                return Err(Error::Factorization("denominator has zero geometric mean".into()));
            }
            Float::with_val(prec, &a / &b)
        }
        FactorForm::AbsTrigPower { t, alpha } => {
            let g2 = geomean_trig(&t.square(), prec)?;
            g2.pow(mp::fl(prec, alpha / 2.0))
        }
        FactorForm::NegTrigPower { t, alpha } => {
            let g1 = geomean_trig(t, prec)?;
            g1.pow(mp::fl(prec, -alpha))
        }
        FactorForm::AbsAlgebraicPower { q, alpha } => {
            let g1 = geomean_algebraic(q, prec)?;
            g1.pow(mp::fl(prec, *alpha))
        }
    };
    Ok(gh.mul(&GeomeanResult::from_value(core, Method::ClosedForm)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroProfile {
    /// `ln f ~ A + c/eps`: the log-integral diverges.
    Exponential,
    /// `ln f ~ A + c ln eps`: integrable.
    Polynomial,
    Inconclusive,
}

fn fit_rss(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum()
}

/// Classifies the contact of `f` with zero at `loc` from `ln f(loc +- 2^-k)`, k = 4..20.
pub fn classify_zero(f: &SpectralDensity, loc: &Angle) -> ZeroProfile {
    let prec = 128;
    let l0 = loc.to_float(prec);
    let mut verdicts = Vec::new();
    for side in [-1i32, 1] {
        let mut xs_inv = Vec::new();
        let mut xs_log = Vec::new();
        let mut ys = Vec::new();
        for k in 4..=20 {
            let eps = mp::pow2(prec, -k);
            let lam = Float::with_val(prec, &l0 + Float::with_val(prec, &eps * side));
            let pi = mp::pi(prec);
            let lam = if lam > pi {
                lam - mp::two_pi(prec)
            } else if lam <= -pi.clone() {
                lam + mp::two_pi(prec)
            } else {
                lam
            };
            if !f.support().contains(&lam) {
                break;
            }
            let y = f.ln_eval(&lam).to_f64();
            if !y.is_finite() {
                break;
            }
            let e = eps.to_f64();
            xs_inv.push(1.0 / e);
            xs_log.push(e.ln());
            ys.push(y);
        }
        if ys.len() < 8 {
            continue;
        }
        let ra = fit_rss(&xs_inv, &ys);
        let rb = fit_rss(&xs_log, &ys);
        let scale = ys.iter().map(|y| y * y).sum::<f64>() * 1e-28 + 1e-300;
        let v = if ra + scale < (rb + scale) / 10.0 {
            ZeroProfile::Exponential
        } else if rb + scale < (ra + scale) / 10.0 {
            ZeroProfile::Polynomial
        } else {
            ZeroProfile::Inconclusive
        };
        verdicts.push(v);
    }
    if verdicts.contains(&ZeroProfile::Exponential) {
        ZeroProfile::Exponential
    } else if !verdicts.is_empty() && verdicts.iter().all(|v| *v == ZeroProfile::Polynomial) {
        ZeroProfile::Polynomial
    } else {
        ZeroProfile::Inconclusive
    }
}

pub fn szego_condition(f: &SpectralDensity) -> Szego {
    if !f.support().is_full() {
        return Szego::Deterministic;
    }
    if f.zeros().iter().any(|z| z.is_exponential()) {
        return Szego::Deterministic;
    }
    let mut out = Szego::Nondeterministic;
    for z in f.zeros() {
        match classify_zero(f, &z.location) {
            ZeroProfile::Exponential => return Szego::Deterministic,
            ZeroProfile::Inconclusive => out = Szego::Indeterminate,
            ZeroProfile::Polynomial => {}
        }
    }
    out
}

/// `int ln f` by singularity-aware quadrature, after the divergence check.
pub fn geometric_mean_numeric(f: &SpectralDensity, prec: u32) -> Result<GeomeanResult> {
    match szego_condition(f) {
        Szego::Deterministic => return Ok(GeomeanResult::zero(Method::Quadrature)),
        Szego::Indeterminate => {
            return Err(Error::Indeterminate("log-integral divergence test inconclusive at a declared zero".into()))
        }
        Szego::Nondeterministic => {}
    }
    let tol = mp::pow2(prec, -(prec as i32) + 16);
    let mut opts = Options::new(prec, tol);
    opts.max_width = std::f64::consts::PI / 8.0;
    let pi = mp::pi(prec);
    let sing: Vec<Float> = f.singular_points().iter().map(|a| a.to_float(prec)).collect();
    let (iv, factor) = if f.is_even() { (vec![(Float::new(prec), pi.clone())], 2u32) } else { (vec![(-pi.clone(), pi)], 1) };
    let res = quadrature::integrate_scalar(
        |x| {
            let v = f.ln_eval(x);
            if v.is_nan() || v.is_infinite() {
                return Err(Error::Evaluation { lambda: x.to_f64(), msg: format!("ln f = {v}") });
            }
            Ok(v)
        },
        &iv,
        &sing,
        &opts,
    );
    let (li, err) = match res {
        Ok(r) => r,
        Err(Error::Quadrature { a, b, bound }) => {
            let declared = sing.iter().any(|s| {
                let s = s.to_f64();
                s >= a && s <= b || (s - a).abs() < 1e-12 || (s - b).abs() < 1e-12
            });
            if declared {
                return Err(Error::Quadrature { a, b, bound });
            }
            return Err(Error::Evaluation {
                lambda: 0.5 * (a + b),
                msg: format!("refinement stalls on [{a}, {b}] away from declared zeros: undeclared singularity suspected"),
            });
        }
        Err(e) => return Err(e),
    };
    Ok(GeomeanResult::from_log(li * factor, Method::Quadrature, Some(err.to_f64() * factor as f64)))
}

/// Closed form when the structure gives one, otherwise quadrature.
pub fn geometric_mean(f: &SpectralDensity, prec: u32) -> Result<GeomeanResult> {
    if let Some(g) = closed_density(f, prec)? {
        return Ok(g);
    }
    geometric_mean_numeric(f, prec)
}

fn closed_density(f: &SpectralDensity, prec: u32) -> Result<Option<GeomeanResult>> {
    if !f.support().is_full() {
        return Ok(Some(GeomeanResult::zero(Method::ClosedForm)));
    }
    let white = |s2: f64| GeomeanResult::from_value(mp::fl(prec, s2) / mp::two_pi(prec), Method::ClosedForm);
    Ok(match f.kind() {
        // roots off the circle and the fractional factor both have unit geometric mean
        Kind::Arma { sigma2, .. } | Kind::Ma1 { sigma2, .. } | Kind::Arfima { sigma2, .. } => Some(white(*sigma2)),
        Kind::Pollaczek { .. } | Kind::HatPollaczek { .. } | Kind::ExpZeroAtOrigin { .. } | Kind::ExpZeroAtPi { .. } => {
            Some(GeomeanResult::zero(Method::ClosedForm))
        }
        Kind::Positive(h) => match h {
            PositiveFn::Custom(_) => None,
            _ => Some(geomean_positive(h, prec)?),
        },
        Kind::ArcRestricted { base, .. } => closed_density(base, prec)?,
        Kind::Product { base, factor } => match closed_density(base, prec)? {
            Some(b) if b.is_zero() => Some(b),
            Some(b) => match geometric_mean_closed_prec(factor, prec) {
                Ok(g) => Some(b.mul(&g)),
                Err(_) => None,
            },
            None => None,
        },
    })
}
