//! The closed family of spectral densities and multiplicative factors, with structural metadata.

use crate::arcs::{parse_arcset, Angle, ArcSet};
use crate::error::{Error, Result};
use crate::grammar::{fmt_f64, fmt_rational, Cursor};
use crate::mp::{self, Complex};
use crate::poly;
use crate::trig::{parse_trig, TrigPolynomial};
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc as Shared;

/// Precision used for construction-time checks.
const CHECK_PREC: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Szego {
    Nondeterministic,
    Deterministic,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Memory {
    Short,
    Long,
    AntiPersistent,
}

/// Local behaviour at a point: `|l - l0|^poly_order` (negative for poles), times
/// `exp(-a pi / |l - l0|)` for each exponential order `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroDescriptor {
    pub location: Angle,
    pub poly_order: f64,
    pub exp_orders: Vec<f64>,
}

impl ZeroDescriptor {
    pub fn poly(location: Angle, order: f64) -> Self {
        ZeroDescriptor { location: location.canonical(), poly_order: order, exp_orders: vec![] }
    }

    pub fn exp(location: Angle, a: f64) -> Self {
        ZeroDescriptor { location: location.canonical(), poly_order: 0.0, exp_orders: vec![a] }
    }

    pub fn is_pole(&self) -> bool {
        self.exp_orders.is_empty() && self.poly_order < 0.0
    }

    pub fn is_exponential(&self) -> bool {
        !self.exp_orders.is_empty()
    }
}

/// Adds polynomial orders and unions exponential orders at coinciding locations.
pub fn compose_zeros(a: &[ZeroDescriptor], b: &[ZeroDescriptor]) -> Vec<ZeroDescriptor> {
    let mut out: Vec<ZeroDescriptor> = a.to_vec();
    for z in b {
        if let Some(e) = out.iter_mut().find(|e| e.location == z.location) {
            e.poly_order += z.poly_order;
            for &x in &z.exp_orders {
                if !e.exp_orders.contains(&x) {
                    e.exp_orders.push(x);
                }
            }
        } else {
            out.push(z.clone());
        }
    }
    out.retain(|z| z.poly_order != 0.0 || !z.exp_orders.is_empty());
    out.sort_by(|x, y| x.location.cmp_value(&y.location));
    out
}

/// User evaluator with declared bounds `m <= h <= big_m`.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub eval: Shared<dyn Fn(f64) -> f64 + Send + Sync>,
    pub m: f64,
    pub big_m: f64,
    pub even: bool,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomFn({}, m={}, M={})", self.name, self.m, self.big_m)
    }
}

impl PartialEq for CustomFn {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.m == o.m && self.big_m == o.big_m
    }
}

/// Bounded positive function `h` with `0 < m <= h <= M`.
#[derive(Clone, Debug, PartialEq)]
pub enum PositiveFn {
    Const(f64),
    /// `exp(sum_j b_j sin(j l))`: odd exponent.
    ExpOdd(Vec<f64>),
    Custom(CustomFn),
}

impl PositiveFn {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            PositiveFn::Const(c) => (*c, *c),
            PositiveFn::ExpOdd(b) => {
                let s: f64 = b.iter().map(|x| x.abs()).sum();
                ((-s).exp(), s.exp())
            }
            PositiveFn::Custom(c) => (c.m, c.big_m),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            PositiveFn::Const(_) => true,
            PositiveFn::ExpOdd(b) => b.iter().all(|x| *x == 0.0),
            PositiveFn::Custom(c) => c.even,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, PositiveFn::Const(c) if *c == 1.0)
    }

    pub fn eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        match self {
            PositiveFn::Const(c) => mp::fl(prec, *c),
            PositiveFn::ExpOdd(b) => {
                let mut s = Float::new(prec);
                for (j, bj) in b.iter().enumerate() {
                    let x = Float::with_val(prec, lambda * (j as u32 + 1));
                    s += x.sin() * *bj;
                }
                s.exp()
            }
            PositiveFn::Custom(c) => mp::fl(prec, (c.eval)(lambda.to_f64())),
        }
    }

    pub fn ln_eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        match self {
            PositiveFn::Const(c) => mp::fl(prec, *c).ln(),
            PositiveFn::ExpOdd(b) => {
                let mut s = Float::new(prec);
                for (j, bj) in b.iter().enumerate() {
                    let x = Float::with_val(prec, lambda * (j as u32 + 1));
                    s += x.sin() * *bj;
                }
                s
            }
            PositiveFn::Custom(c) => mp::fl(prec, (c.eval)(lambda.to_f64()).ln()),
        }
    }

    fn validate(&self) -> Result<()> {
        let (m, big_m) = self.bounds();
        if !(m > 0.0 && m <= big_m && big_m.is_finite()) {
            return Err(Error::InvalidArgument(format!("bounds must satisfy 0 < m <= M < inf, got ({m}, {big_m})")));
        }
        for j in 0..=1000 {
            let l = -PI + 2.0 * PI * j as f64 / 1000.0;
            let v = self.eval(&mp::fl(64, l)).to_f64();
            if !(v >= m * (1.0 - 1e-12) && v <= big_m * (1.0 + 1e-12)) {
                return Err(Error::InvalidArgument(format!("h({l}) = {v} outside declared bounds [{m}, {big_m}]")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PositiveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositiveFn::Const(c) => write!(f, "const({})", fmt_f64(*c)),
            PositiveFn::ExpOdd(b) => write!(f, "expodd({})", fmt_list(b)),
            PositiveFn::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactorForm {
    /// `h t1 / t2`
    Ratio { t1: TrigPolynomial, t2: TrigPolynomial },
    /// `h |t|^alpha`
    AbsTrigPower { t: TrigPolynomial, alpha: f64 },
    /// `h t^{-alpha}`
    NegTrigPower { t: TrigPolynomial, alpha: f64 },
    /// `h |q(l)|^alpha`, q real with ascending coefficients
    AbsAlgebraicPower { q: Vec<Rational>, alpha: f64 },
}

#[derive(Clone, Debug)]
pub struct Factor {
    h: PositiveFn,
    form: FactorForm,
    zeros: Vec<ZeroDescriptor>,
    even: bool,
}

impl PartialEq for Factor {
    fn eq(&self, o: &Self) -> bool {
        self.h == o.h && self.form == o.form
    }
}

impl Factor {
    pub fn new(h: PositiveFn, form: FactorForm) -> Result<Self> {
        h.validate()?;
        let (form, zeros, even) = match form {
            FactorForm::Ratio { t1, t2 } => {
                let t1 = t1.certify_nonnegative(CHECK_PREC)?;
                let t2 = t2.certify_nonnegative(CHECK_PREC)?;
                let z1: Vec<ZeroDescriptor> =
                    t1.zeros().unwrap().iter().map(|(a, m)| ZeroDescriptor::poly(a.clone(), *m as f64)).collect();
                let z2: Vec<ZeroDescriptor> =
                    t2.zeros().unwrap().iter().map(|(a, m)| ZeroDescriptor::poly(a.clone(), -(*m as f64))).collect();
                if t2.is_constant() && t2.constant_value().unwrap() <= 0.0 {
                    return Err(Error::InvalidArgument("denominator polynomial vanishes identically".into()));
                }
                let even = t1.is_even() && t2.is_even();
                (FactorForm::Ratio { t1, t2 }, compose_zeros(&z1, &z2), even)
            }
            FactorForm::AbsTrigPower { t, alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
                }
                let sq = t.square().certify_nonnegative(CHECK_PREC)?;
                let zeros = sq
                    .zeros()
                    .unwrap()
                    .iter()
                    .map(|(a, m)| ZeroDescriptor::poly(a.clone(), *m as f64 * alpha / 2.0))
                    .collect();
                let even = sq.is_even() && t.is_even();
                (FactorForm::AbsTrigPower { t, alpha }, zeros, even)
            }
            FactorForm::NegTrigPower { t, alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
                }
                let t = t.certify_nonnegative(CHECK_PREC)?;
                if t.is_constant() && t.constant_value().unwrap() <= 0.0 {
                    return Err(Error::InvalidArgument("polynomial vanishes identically".into()));
                }
                let zeros = t
                    .zeros()
                    .unwrap()
                    .iter()
                    .map(|(a, m)| ZeroDescriptor::poly(a.clone(), -(*m as f64) * alpha))
                    .collect();
                let even = t.is_even();
                (FactorForm::NegTrigPower { t, alpha }, zeros, even)
            }
            FactorForm::AbsAlgebraicPower { q, alpha } => {
                let mut q = q;
                while q.len() > 1 && *q.last().unwrap() == 0 {
                    q.pop();
                }
                if q.is_empty() || (q.len() == 1 && q[0] == 0) {
                    return Err(Error::InvalidArgument("zero polynomial".into()));
                }
                if !alpha.is_finite() {
                    return Err(Error::InvalidArgument("alpha must be finite".into()));
                }
                let zeros = algebraic_real_zeros(&q)?
                    .into_iter()
                    .map(|(a, m)| ZeroDescriptor::poly(a, m as f64 * alpha))
                    .collect();
                let even_poly = q.iter().skip(1).step_by(2).all(|c| *c == 0) || q.iter().step_by(2).all(|c| *c == 0);
                (FactorForm::AbsAlgebraicPower { q, alpha }, zeros, even_poly)
            }
        };
        let even = even && h.is_even();
        Ok(Factor { h, form, zeros, even })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Factor::new(PositiveFn::Const(c), FactorForm::Ratio { t1: TrigPolynomial::one(), t2: TrigPolynomial::one() })
    }

    pub fn abs_trig_pow(t: TrigPolynomial, alpha: f64) -> Result<Self> {
        Factor::new(PositiveFn::Const(1.0), FactorForm::AbsTrigPower { t, alpha })
    }

    pub fn neg_trig_pow(t: TrigPolynomial, alpha: f64) -> Result<Self> {
        Factor::new(PositiveFn::Const(1.0), FactorForm::NegTrigPower { t, alpha })
    }

    pub fn abs_alg_pow(q: &[f64], alpha: f64) -> Result<Self> {
        let q = q.iter().map(|&c| Rational::from_f64(c).expect("finite")).collect();
        Factor::new(PositiveFn::Const(1.0), FactorForm::AbsAlgebraicPower { q, alpha })
    }

    pub fn h(&self) -> &PositiveFn {
        &self.h
    }

    pub fn form(&self) -> &FactorForm {
        &self.form
    }

    pub fn zeros(&self) -> &[ZeroDescriptor] {
        &self.zeros
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn constant_value(&self) -> Option<f64> {
        match (&self.h, &self.form) {
            (PositiveFn::Const(c), FactorForm::Ratio { t1, t2 }) if t1.is_constant() && t2.is_constant() => {
                Some(c * t1.constant_value()? / t2.constant_value()?)
            }
            _ => None,
        }
    }

    /// Value without the `h` part, or infinity at a pole.
    fn core_eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        match &self.form {
            FactorForm::Ratio { t1, t2 } => {
                let a = t1.eval(lambda);
                let b = t2.eval(lambda);
                Float::with_val(prec, &a / &b)
            }
            FactorForm::AbsTrigPower { t, alpha } => {
                let v = t.eval(lambda).abs();
                Float::with_val(prec, v.pow(mp::fl(prec, *alpha)))
            }
            FactorForm::NegTrigPower { t, alpha } => {
                let v = t.eval(lambda).abs();
                Float::with_val(prec, v.pow(mp::fl(prec, -*alpha)))
            }
            FactorForm::AbsAlgebraicPower { q, alpha } => {
                let v = eval_real_poly(q, lambda).abs();
                Float::with_val(prec, v.pow(mp::fl(prec, *alpha)))
            }
        }
    }

    pub fn eval(&self, lambda: &Float) -> Float {
        let mut v = self.core_eval(lambda);
        if !self.h.is_one() {
            v *= self.h.eval(lambda);
        }
        v
    }

    pub fn ln_eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        let core = match &self.form {
            FactorForm::Ratio { t1, t2 } => {
                let a = t1.eval(lambda).abs().ln();
                let b = t2.eval(lambda).abs().ln();
                Float::with_val(prec, &a - &b)
            }
            FactorForm::AbsTrigPower { t, alpha } => t.eval(lambda).abs().ln() * *alpha,
            FactorForm::NegTrigPower { t, alpha } => t.eval(lambda).abs().ln() * -*alpha,
            FactorForm::AbsAlgebraicPower { q, alpha } => eval_real_poly(q, lambda).abs().ln() * *alpha,
        };
        core + self.h.ln_eval(lambda)
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut c = Cursor::new(src);
        let f = parse_factor(&mut c)?;
        if !c.at_end() {
            return Err(c.error("trailing input after factor"));
        }
        Ok(f)
    }
}

fn eval_real_poly(q: &[Rational], x: &Float) -> Float {
    let prec = x.prec();
    let horner = |w: u32| {
        let x = Float::with_val(w, x);
        let mut acc = Float::new(w);
        let mut scale = Float::new(w);
        for c in q.iter().rev() {
            acc *= &x;
            acc += mp::from_rational(w, c);
            scale *= Float::with_val(w, x.abs_ref());
            scale += mp::from_rational(w, c).abs();
        }
        (acc, scale.to_f64())
    };
    let mut w = prec + 32;
    loop {
        let (v, scale) = horner(w);
        let lost = if v.is_zero() { w as f64 } else { (scale / v.to_f64().abs()).log2().max(0.0) };
        if lost + 16.0 < (w - prec) as f64 || w > 4 * prec + 256 {
            return Float::with_val(prec, v);
        }
        w = prec + lost.ceil() as u32 + 48;
        if v.is_zero() {
            w *= 2;
        }
    }
}

/// Real zeros of q inside [-pi, pi], with multiplicities.
fn algebraic_real_zeros(q: &[Rational]) -> Result<Vec<(Angle, u32)>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < q.len() && q[start] == 0 {
        start += 1;
    }
    if start > 0 {
        out.push((Angle::zero(), start as u32));
    }
    let rest = &q[start..];
    if rest.len() > 1 {
        let prec = 512;
        let c: Vec<Complex> = rest.iter().map(|r| Complex::real(mp::from_rational(prec, r))).collect();
        let roots = poly::roots(&c)?;
        let mut reals: Vec<f64> = roots
            .iter()
            .filter(|z| z.im.to_f64().abs() < 1e-60 && z.re.to_f64().abs() <= PI)
            .map(|z| z.re.to_f64())
            .collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < reals.len() {
            let mut j = i + 1;
            while j < reals.len() && (reals[j] - reals[i]).abs() < 1e-12 {
                j += 1;
            }
            out.push((Angle::rad(reals[i]), (j - i) as u32));
            i = j;
        }
    }
    Ok(out)
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = if self.h.is_one() { String::new() } else { format!("h={},", self.h) };
        match &self.form {
            FactorForm::Ratio { t1, t2 } => write!(f, "ratio({h}t1={t1},t2={t2})"),
            FactorForm::AbsTrigPower { t, alpha } => write!(f, "abs_trig_pow({h}t={t},alpha={})", fmt_f64(*alpha)),
            FactorForm::NegTrigPower { t, alpha } => write!(f, "neg_trig_pow({h}t={t},alpha={})", fmt_f64(*alpha)),
            FactorForm::AbsAlgebraicPower { q, alpha } => {
                let qs: Vec<String> = q.iter().map(fmt_rational).collect();
                write!(f, "abs_alg_pow({h}q=[{}],alpha={})", qs.join(","), fmt_f64(*alpha))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// `sigma2/(2 pi) |theta(e^{-il})|^2 / |psi(e^{-il})|^2`, `psi(z) = 1 - sum ar_j z^j`,
    /// `theta(z) = 1 + sum ma_j z^j`
    Arma { ar: Vec<f64>, ma: Vec<f64>, sigma2: f64 },
    /// `|1 - e^{-il}|^{-2d}` times the ARMA density
    Arfima { d: f64, ar: Vec<f64>, ma: Vec<f64>, sigma2: f64 },
    /// `sigma2/(2 pi) |1 - b e^{il}|^2`
    Ma1 { b: f64, sigma2: f64 },
    Pollaczek { a: f64 },
    HatPollaczek { a: f64 },
    /// `exp(-a pi / |l|)`
    ExpZeroAtOrigin { a: f64 },
    /// `exp(-a pi / (pi - |l|))`
    ExpZeroAtPi { a: f64 },
    ArcRestricted { base: Box<SpectralDensity>, support: ArcSet },
    Product { base: Box<SpectralDensity>, factor: Factor },
    Positive(PositiveFn),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metadata {
    pub support: ArcSet,
    pub zeros: Vec<ZeroDescriptor>,
    pub m_f: Option<f64>,
    pub big_m_f: Option<f64>,
    pub even: bool,
    pub memory: Option<Memory>,
    pub szego: Option<Szego>,
    /// Closed-form geometric mean of the attached factor, for products.
    pub factor_geomean: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SpectralDensity {
    kind: Kind,
    meta: Metadata,
}

impl PartialEq for SpectralDensity {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroRecord {
    pub location: String,
    pub location_rad: f64,
    pub poly_order: f64,
    pub exp_orders: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Description {
    pub kind: String,
    pub spec: String,
    pub support: String,
    pub support_length: f64,
    pub zeros: Vec<ZeroRecord>,
    pub m_f: Option<f64>,
    #[serde(rename = "M_f")]
    pub big_m_f: Option<f64>,
    pub even: bool,
    pub memory: Option<Memory>,
    pub szego: Option<Szego>,
}

fn full_meta(zeros: Vec<ZeroDescriptor>, m: Option<f64>, big_m: Option<f64>, even: bool) -> Metadata {
    Metadata {
        support: ArcSet::full(),
        zeros,
        m_f: m,
        big_m_f: big_m,
        even,
        memory: None,
        szego: None,
        factor_geomean: None,
    }
}

fn check_param(name: &str, v: f64, ok: bool) -> Result<()> {
    if !v.is_finite() || !ok {
        return Err(Error::InvalidArgument(format!("parameter {name} = {v} out of range")));
    }
    Ok(())
}

/// |poly(e^{-il})|^2 with `poly(z) = c0 + sum c_j z^j`.
fn mod_sq(c0: f64, coeffs: &[f64], lambda: &Float) -> Float {
    let prec = lambda.prec();
    let mut re = mp::fl(prec, c0);
    let mut im = Float::new(prec);
    for (j, cj) in coeffs.iter().enumerate() {
        let x = Float::with_val(prec, lambda * (j as u32 + 1));
        let (s, c) = x.sin_cos(Float::new(prec));
        re += c * *cj;
        im -= s * *cj;
    }
    re.square() + im.square()
}

fn arma_unit_root_check(what: &str, c0: f64, coeffs: &[f64]) -> Result<()> {
    if coeffs.iter().all(|c| *c == 0.0) {
        return Ok(());
    }
    let prec = CHECK_PREC;
    let mut c = vec![Complex::real(mp::fl(prec, c0))];
    c.extend(coeffs.iter().map(|x| Complex::real(mp::fl(prec, *x))));
    for z in poly::roots(&c)? {
        let m = z.abs().to_f64();
        if (m - 1.0).abs() < 1e-12 {
            return Err(Error::InvalidArgument(format!("{what} polynomial has a root on the unit circle")));
        }
    }
    Ok(())
}

/// Min and max of an f64 function on a grid with golden refinement at the extremes.
fn grid_range(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = 4096;
    let xs: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..vals.len() {
        if vals[i] < vals[imin] {
            imin = i;
        }
        if vals[i] > vals[imax] {
            imax = i;
        }
    }
    let h = (hi - lo) / n as f64;
    let refine = |i: usize, sign: f64| -> f64 {
        let (mut a, mut b) = ((xs[i] - h).max(lo), (xs[i] + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if sign * f(c) > sign * f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    };
    let mn = refine(imin, -1.0).min(vals[imin]);
    let mx = refine(imax, 1.0).max(vals[imax]);
    (mn, mx)
}

impl SpectralDensity {
    pub fn white(sigma2: f64) -> Result<Self> {
        SpectralDensity::arma(vec![], vec![], sigma2)
    }

    pub fn arma(ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_param("sigma2", sigma2, sigma2 > 0.0)?;
        for v in ar.iter().chain(&ma) {
            check_param("coefficient", *v, true)?;
        }
        let neg_ar: Vec<f64> = ar.iter().map(|x| -x).collect();
        arma_unit_root_check("AR", 1.0, &neg_ar)?;
        arma_unit_root_check("MA", 1.0, &ma)?;
        let kind = Kind::Arma { ar, ma, sigma2 };
        let mut d = SpectralDensity { kind, meta: full_meta(vec![], None, None, true) };
        let (m, big_m) = if let Kind::Arma { ar, ma, .. } = &d.kind {
            if ar.is_empty() && ma.is_empty() {
                let c = sigma2 / (2.0 * PI);
                (c, c)
            } else {
                let (m, big_m) = grid_range(|l| d.eval_f64(l), 0.0, PI);
                (m * (1.0 - 1e-9), big_m * (1.0 + 1e-9))
            }
        } else {
            unreachable!()
        };
        d.meta.m_f = Some(m);
        d.meta.big_m_f = Some(big_m);
        d.meta.memory = Some(Memory::Short);
        d.meta.szego = Some(Szego::Nondeterministic);
        Ok(d)
    }

    pub fn ma1(b: f64, sigma2: f64) -> Result<Self> {
        check_param("b", b, (0.0..=1.0).contains(&b))?;
        check_param("sigma2", sigma2, sigma2 > 0.0)?;
        let zeros = if b == 1.0 { vec![ZeroDescriptor::poly(Angle::zero(), 2.0)] } else { vec![] };
        let c = sigma2 / (2.0 * PI);
        let mut meta = full_meta(zeros, Some(c * (1.0 - b).powi(2)), Some(c * (1.0 + b).powi(2)), true);
        meta.memory = Some(Memory::Short);
        meta.szego = Some(Szego::Nondeterministic);
        Ok(SpectralDensity { kind: Kind::Ma1 { b, sigma2 }, meta })
    }

    pub fn arfima(d: f64, ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Result<Self> {
        check_param("d", d, d < 0.5)?;
        let inner = SpectralDensity::arma(ar.clone(), ma.clone(), sigma2)?;
        let zeros = if d == 0.0 { vec![] } else { vec![ZeroDescriptor::poly(Angle::zero(), -2.0 * d)] };
        let mut meta = full_meta(zeros, None, None, true);
        let kind = Kind::Arfima { d, ar, ma, sigma2 };
        let dens = SpectralDensity { kind, meta: meta.clone() };
        if d > 0.0 {
            let (m, _) = grid_range(|l| dens.eval_f64(l), 1e-3, PI);
            meta.m_f = Some(m * (1.0 - 1e-9));
            meta.memory = Some(Memory::Long);
        } else if d < 0.0 {
            meta.m_f = Some(0.0);
            let (_, big_m) = grid_range(|l| dens.eval_f64(l), 1e-6, PI);
            meta.big_m_f = Some(big_m * (1.0 + 1e-9));
            meta.memory = Some(Memory::AntiPersistent);
        } else {
            meta.m_f = inner.meta.m_f;
            meta.big_m_f = inner.meta.big_m_f;
            meta.memory = Some(Memory::Short);
        }
        meta.szego = Some(Szego::Nondeterministic);
        Ok(SpectralDensity { kind: dens.kind, meta })
    }

    pub fn pollaczek(a: f64) -> Result<Self> {
        check_param("a", a, a > 0.0)?;
        let zeros = vec![ZeroDescriptor::exp(Angle::zero(), a), ZeroDescriptor::exp(Angle::pi(), a)];
        let mut meta = full_meta(zeros, Some(0.0), Some(1.0), true);
        meta.szego = Some(Szego::Deterministic);
        Ok(SpectralDensity { kind: Kind::Pollaczek { a }, meta })
    }

    pub fn hat_pollaczek(a: f64) -> Result<Self> {
        check_param("a", a, a > 0.0)?;
        let zeros = vec![ZeroDescriptor::exp(Angle::zero(), a), ZeroDescriptor::exp(Angle::pi(), a)];
        let mut meta = full_meta(zeros, Some(0.0), Some(1.0), true);
        meta.szego = Some(Szego::Deterministic);
        Ok(SpectralDensity { kind: Kind::HatPollaczek { a }, meta })
    }

    pub fn exp_zero_at_origin(a: f64) -> Result<Self> {
        check_param("a", a, a > 0.0)?;
        let mut meta = full_meta(vec![ZeroDescriptor::exp(Angle::zero(), a)], Some(0.0), Some((-a).exp()), true);
        meta.szego = Some(Szego::Deterministic);
        Ok(SpectralDensity { kind: Kind::ExpZeroAtOrigin { a }, meta })
    }

    pub fn exp_zero_at_pi(a: f64) -> Result<Self> {
        check_param("a", a, a > 0.0)?;
        let mut meta = full_meta(vec![ZeroDescriptor::exp(Angle::pi(), a)], Some(0.0), Some((-a).exp()), true);
        meta.szego = Some(Szego::Deterministic);
        Ok(SpectralDensity { kind: Kind::ExpZeroAtPi { a }, meta })
    }

    pub fn positive(h: PositiveFn) -> Result<Self> {
        h.validate()?;
        let (m, big_m) = h.bounds();
        let mut meta = full_meta(vec![], Some(m), Some(big_m), h.is_even());
        meta.szego = Some(Szego::Nondeterministic);
        Ok(SpectralDensity { kind: Kind::Positive(h), meta })
    }

    pub fn constant(c: f64) -> Result<Self> {
        SpectralDensity::positive(PositiveFn::Const(c))
    }

    /// Indicator-type density: `base` on the arcs, zero elsewhere.
    pub fn arc_restricted(base: SpectralDensity, support: ArcSet) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("empty arc set".into()));
        }
        if let Kind::ArcRestricted { .. } = base.kind {
            return Err(Error::InvalidArgument("nested arc restriction; intersect the arc sets instead".into()));
        }
        let full = support.is_full();
        let even = base.meta.even && support.is_conjugate_symmetric();
        let zeros = base.meta.zeros.iter().filter(|z| support.contains(&z.location.to_float(CHECK_PREC))).cloned().collect();
        let mut meta = Metadata {
            support: support.clone(),
            zeros,
            m_f: if full { base.meta.m_f } else { Some(0.0) },
            big_m_f: base.meta.big_m_f,
            even,
            memory: base.meta.memory,
            szego: if full { base.meta.szego } else { Some(Szego::Deterministic) },
            factor_geomean: None,
        };
        if !full {
            meta.memory = None;
        }
        Ok(SpectralDensity { kind: Kind::ArcRestricted { base: Box::new(base), support }, meta })
    }

    /// Indicator of the arcs (base identically 1).
    pub fn arc_indicator(support: ArcSet) -> Result<Self> {
        SpectralDensity::arc_restricted(SpectralDensity::constant(1.0)?, support)
    }

    pub fn multiply_factor(f: SpectralDensity, g: Factor) -> Result<Self> {
        let zeros = compose_zeros(&f.meta.zeros, g.zeros());
        for z in &zeros {
            if z.is_pole() && z.poly_order <= -1.0 && region_has_mass(&f, &z.location) {
                return Err(Error::NotIntegrable(format!(
                    "pole of order {} at lambda = {} ({})",
                    -z.poly_order,
                    z.location,
                    z.location.to_f64()
                )));
            }
        }
        // sufficient condition for non-integer powers: f t^{-(floor(alpha)+1)} integrable
        if let FactorForm::NegTrigPower { t, alpha } = g.form() {
            if alpha.fract() != 0.0 {
                let k1 = alpha.floor() + 1.0;
                let strong: Vec<ZeroDescriptor> = t
                    .zeros()
                    .unwrap()
                    .iter()
                    .map(|(a, m)| ZeroDescriptor::poly(a.clone(), -(*m as f64) * k1))
                    .collect();
                for z in compose_zeros(&f.meta.zeros, &strong) {
                    if z.is_pole() && z.poly_order <= -1.0 && region_has_mass(&f, &z.location) {
                        return Err(Error::NotIntegrable(format!(
                            "f t^-{k1} has a pole of order {} at lambda = {} ({})",
                            -z.poly_order,
                            z.location,
                            z.location.to_f64()
                        )));
                    }
                }
            }
        }
        let even = f.meta.even && g.is_even();
        let support = f.meta.support.clone();
        let szego = match f.meta.szego {
            Some(Szego::Deterministic) => Some(Szego::Deterministic),
            _ => None,
        };
        let memory = f.meta.memory;
        let factor_geomean = crate::geomean::geometric_mean_closed(&g).ok().and_then(|r| r.value_f64());
        let mut d = SpectralDensity {
            kind: Kind::Product { base: Box::new(f), factor: g },
            meta: Metadata {
                support,
                zeros,
                m_f: None,
                big_m_f: None,
                even,
                memory,
                szego,
                factor_geomean,
            },
        };
        d.check_integrable_numerically()?;
        if let Some(c) = d.factor().and_then(|g| g.constant_value()) {
            let bm = d.base().unwrap().meta.clone();
            d.meta.m_f = bm.m_f.map(|m| m * c);
            d.meta.big_m_f = bm.big_m_f.map(|m| m * c);
            d.meta.szego = bm.szego;
        } else if d.meta.zeros.iter().all(|z| !z.is_pole()) {
            let (m, big_m) = grid_range(|l| d.eval_f64(l), -PI, PI);
            d.meta.big_m_f = Some(big_m * (1.0 + 1e-6));
            d.meta.m_f = if d.meta.zeros.is_empty() && d.meta.support.is_full() { Some(m * (1.0 - 1e-6)) } else { Some(0.0) };
        }
        Ok(d)
    }

    /// Shell integrals around every pole of the factor must decay geometrically.
    fn check_integrable_numerically(&self) -> Result<()> {
        let Kind::Product { factor, .. } = &self.kind else { return Ok(()) };
        for z in factor.zeros().iter().filter(|z| z.poly_order < 0.0) {
            let p = z.location.to_f64();
            for side in [-1.0, 1.0] {
                let mut shells = Vec::new();
                for k in 4..=20 {
                    let (e1, e0) = (2f64.powi(-k - 1), 2f64.powi(-k));
                    let mut s = 0.0;
                    let m = 16;
                    for j in 0..m {
                        // midpoint rule in log-spaced coordinate
                        let u = e1 * (e0 / e1).powf((j as f64 + 0.5) / m as f64);
                        let l = p + side * u;
                        let l = if l > PI { l - 2.0 * PI } else if l < -PI { l + 2.0 * PI } else { l };
                        let v = self.eval(&mp::fl(64, l)).map(|x| x.to_f64()).unwrap_or(f64::INFINITY);
                        s += v * u * (e0 / e1).ln() / m as f64;
                    }
                    shells.push(s);
                }
                let tail = &shells[shells.len() - 6..];
                let grows = tail.windows(2).all(|w| w[1] >= 0.97 * w[0] && w[0] > 0.0) || tail.iter().any(|x| !x.is_finite());
                if grows {
                    return Err(Error::NotIntegrable(format!(
                        "integral near the pole at lambda = {} ({p}) does not converge",
                        z.location
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn meta(&self) -> &Metadata {
        &self.meta
    }

    pub fn support(&self) -> &ArcSet {
        &self.meta.support
    }

    pub fn zeros(&self) -> &[ZeroDescriptor] {
        &self.meta.zeros
    }

    pub fn is_even(&self) -> bool {
        self.meta.even
    }

    pub fn bounds(&self) -> (Option<f64>, Option<f64>) {
        (self.meta.m_f, self.meta.big_m_f)
    }

    pub fn base(&self) -> Option<&SpectralDensity> {
        match &self.kind {
            Kind::Product { base, .. } | Kind::ArcRestricted { base, .. } => Some(base),
            _ => None,
        }
    }

    pub fn factor(&self) -> Option<&Factor> {
        match &self.kind {
            Kind::Product { factor, .. } => Some(factor),
            _ => None,
        }
    }

    /// A copy with the Szego classification recorded.
    pub fn with_szego(mut self, s: Szego) -> Self {
        self.meta.szego = Some(s);
        self
    }

    pub fn eval(&self, lambda: &Float) -> Result<Float> {
        let l = reduce(lambda);
        if let Kind::ArcRestricted { support, .. } = &self.kind {
            if !support.contains(&l) {
                return Ok(Float::new(l.prec()));
            }
        }
        let v = self.eval_on_support(&l);
        if v.is_nan() || v.is_infinite() {
            return Err(Error::Evaluation { lambda: l.to_f64(), msg: format!("non-finite density value {v}") });
        }
        Ok(v)
    }

    pub fn eval_f64(&self, lambda: f64) -> f64 {
        self.eval(&mp::fl(64, lambda)).map(|v| v.to_f64()).unwrap_or(f64::INFINITY)
    }

    /// Density value ignoring any arc restriction (the caller integrates over the support).
    pub fn eval_on_support(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        match &self.kind {
            Kind::Arma { ar, ma, sigma2 } => arma_value(ar, ma, *sigma2, lambda),
            Kind::Arfima { d, ar, ma, sigma2 } => {
                let base = arma_value(ar, ma, *sigma2, lambda);
                let half = Float::with_val(prec, lambda / 2u32);
                let s = (half.sin().abs() * 2u32).pow(mp::fl(prec, -2.0 * d));
                Float::with_val(prec, s * base)
            }
            Kind::Ma1 { b, sigma2 } => {
                // (1-b)^2 + 4b sin^2(l/2) avoids cancellation near l = 0
                let s = Float::with_val(prec, lambda / 2u32).sin().square();
                let v = s * (4.0 * b) + (1.0 - b) * (1.0 - b);
                v * *sigma2 / mp::two_pi(prec)
            }
            Kind::Pollaczek { a } => pollaczek_value(*a, lambda),
            Kind::HatPollaczek { a } => {
                let x = lambda.clone().abs();
                if x.is_zero() || x >= mp::pi(prec) {
                    return Float::new(prec);
                }
                let pi = mp::pi(prec);
                let denom = Float::with_val(prec, &x * Float::with_val(prec, &pi - &x));
                let e = Float::with_val(prec, pi.square() * *a) / denom;
                (mp::fl(prec, 4.0 * a) - e).exp()
            }
            Kind::ExpZeroAtOrigin { a } => {
                let x = lambda.clone().abs();
                if x.is_zero() {
                    return Float::new(prec);
                }
                (-(mp::pi(prec) * *a) / x).exp()
            }
            Kind::ExpZeroAtPi { a } => {
                let x = Float::with_val(prec, mp::pi(prec) - lambda.clone().abs());
                if x.is_zero() || x.is_sign_negative() {
                    return Float::new(prec);
                }
                (-(mp::pi(prec) * *a) / x).exp()
            }
            Kind::ArcRestricted { base, .. } => base.eval_on_support(lambda),
            Kind::Product { base, factor } => {
                let b = base.eval_on_support(lambda);
                if b.is_zero() {
                    return b;
                }
                let g = factor.eval(lambda);
                Float::with_val(prec, &b * &g)
            }
            Kind::Positive(h) => h.eval(lambda),
        }
    }

    /// ln f, possibly -inf; computed without forming f where it would underflow.
    pub fn ln_eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        let l = reduce(lambda);
        match &self.kind {
            Kind::Pollaczek { a } => pollaczek_ln(*a, &l),
            Kind::HatPollaczek { a } => {
                let x = l.abs();
                let pi = mp::pi(prec);
                if x.is_zero() || x >= pi {
                    return Float::with_val(prec, rug::float::Special::NegInfinity);
                }
                let denom = Float::with_val(prec, &x * Float::with_val(prec, &pi - &x));
                let e = Float::with_val(prec, pi.square() * *a) / denom;
                mp::fl(prec, 4.0 * a) - e
            }
            Kind::ExpZeroAtOrigin { a } => -(mp::pi(prec) * *a) / l.abs(),
            Kind::ExpZeroAtPi { a } => -(mp::pi(prec) * *a) / (mp::pi(prec) - l.abs()),
            Kind::ArcRestricted { base, support } => {
                if support.contains(&l) {
                    base.ln_eval(&l)
                } else {
                    Float::with_val(prec, rug::float::Special::NegInfinity)
                }
            }
            Kind::Product { base, factor } => {
                let b = base.ln_eval(&l);
                if b.is_infinite() && b.is_sign_negative() {
                    return b;
                }
                b + factor.ln_eval(&l)
            }
            Kind::Positive(h) => h.ln_eval(&l),
            _ => self.eval_on_support(&l).ln(),
        }
    }

    pub fn describe(&self) -> Description {
        Description {
            kind: self.kind_name().to_string(),
            spec: self.to_string(),
            support: self.meta.support.to_string(),
            support_length: self.meta.support.total_length().to_f64(),
            zeros: self
                .meta
                .zeros
                .iter()
                .map(|z| ZeroRecord {
                    location: z.location.to_string(),
                    location_rad: z.location.to_f64(),
                    poly_order: z.poly_order,
                    exp_orders: z.exp_orders.clone(),
                })
                .collect(),
            m_f: self.meta.m_f,
            big_m_f: self.meta.big_m_f,
            even: self.meta.even,
            memory: self.meta.memory,
            szego: self.meta.szego,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Arma { ar, ma, .. } if ar.is_empty() && ma.is_empty() => "white",
            Kind::Arma { .. } => "arma",
            Kind::Arfima { .. } => "arfima",
            Kind::Ma1 { .. } => "ma1",
            Kind::Pollaczek { .. } => "pollaczek",
            Kind::HatPollaczek { .. } => "hat_pollaczek",
            Kind::ExpZeroAtOrigin { .. } => "exp_zero0",
            Kind::ExpZeroAtPi { .. } => "exp_zeropi",
            Kind::ArcRestricted { .. } => "arc",
            Kind::Product { .. } => "product",
            Kind::Positive(_) => "positive",
        }
    }

    /// Points where the integrand of the covariance or log integral is singular or
    /// non-smooth: declared zeros and poles. Arc endpoints come from `pieces`.
    pub fn singular_points(&self) -> Vec<Angle> {
        self.meta.zeros.iter().map(|z| z.location.clone()).collect()
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut c = Cursor::new(src);
        let d = parse_density(&mut c)?;
        if !c.at_end() {
            return Err(c.error("trailing input after density"));
        }
        Ok(d)
    }
}

/// Whether the density carries mass on both sides near `loc` (so a pole there matters).
fn region_has_mass(f: &SpectralDensity, loc: &Angle) -> bool {
    let x = loc.to_f64();
    let eps = 1e-9;
    f.support().contains_f64(x + eps) || f.support().contains_f64(x - eps)
}

fn reduce(lambda: &Float) -> Float {
    let prec = lambda.prec();
    let pi = mp::pi(prec);
    if lambda.clone().abs() <= pi {
        return lambda.clone();
    }
    let two_pi = mp::two_pi(prec);
    let k = Float::with_val(prec, lambda / &two_pi).round();
    let mut l = Float::with_val(prec, lambda - k * &two_pi);
    if l > pi {
        l -= &two_pi;
    }
    if l <= -pi.clone() {
        l += &two_pi;
    }
    l
}

fn arma_value(ar: &[f64], ma: &[f64], sigma2: f64, lambda: &Float) -> Float {
    let prec = lambda.prec();
    let num = mod_sq(1.0, ma, lambda);
    let neg_ar: Vec<f64> = ar.iter().map(|x| -x).collect();
    let den = mod_sq(1.0, &neg_ar, lambda);
    let v = Float::with_val(prec, &num / &den);
    v * sigma2 / mp::two_pi(prec)
}

/// `2 e^{2 l phi} / (e^{2 pi phi} + 1)`, `phi = (a/2) cot l`, branch-selected so that every
/// exponential has a nonpositive argument.
pub fn pollaczek_value(a: f64, lambda: &Float) -> Float {
    let prec = lambda.prec();
    let x = lambda.clone().abs();
    let pi = mp::pi(prec);
    if x.is_zero() || x >= pi {
        return Float::new(prec);
    }
    let phi = Float::with_val(prec, x.clone().cot() * (a / 2.0));
    if !phi.is_sign_negative() {
        let e1 = Float::with_val(prec, &phi * Float::with_val(prec, &pi - &x)) * -2i32;
        let e2 = Float::with_val(prec, &phi * &pi) * -2i32;
        let num = e1.exp() * 2u32;
        num / (e2.exp() + 1u32)
    } else {
        let e1 = Float::with_val(prec, &phi * &x) * 2u32;
        let e2 = Float::with_val(prec, &phi * &pi) * 2u32;
        e1.exp() * 2u32 / (e2.exp() + 1u32)
    }
}

pub fn pollaczek_ln(a: f64, lambda: &Float) -> Float {
    let prec = lambda.prec();
    let x = lambda.clone().abs();
    let pi = mp::pi(prec);
    if x.is_zero() || x >= pi {
        return Float::with_val(prec, rug::float::Special::NegInfinity);
    }
    let phi = Float::with_val(prec, x.clone().cot() * (a / 2.0));
    let ln2 = Float::with_val(prec, rug::float::Constant::Log2);
    if !phi.is_sign_negative() {
        let e1 = Float::with_val(prec, &phi * Float::with_val(prec, &pi - &x)) * -2i32;
        let e2 = Float::with_val(prec, &phi * &pi) * -2i32;
        ln2 + e1 - e2.exp().ln_1p()
    } else {
        let e1 = Float::with_val(prec, &phi * &x) * 2u32;
        let e2 = Float::with_val(prec, &phi * &pi) * 2u32;
        ln2 + e1 - e2.exp().ln_1p()
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", parts.join(","))
}

fn fmt_nested(d: &SpectralDensity) -> String {
    match &d.kind {
        Kind::Positive(PositiveFn::Const(c)) => format!("const({})", fmt_f64(*c)),
        _ => format!("({d})"),
    }
}

impl fmt::Display for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Arma { ar, ma, sigma2 } if ar.is_empty() && ma.is_empty() => {
                write!(f, "white:sigma2={}", fmt_f64(*sigma2))
            }
            Kind::Arma { ar, ma, sigma2 } => {
                write!(f, "arma:ar={},ma={},sigma2={}", fmt_list(ar), fmt_list(ma), fmt_f64(*sigma2))
            }
            Kind::Arfima { d, ar, ma, sigma2 } => write!(
                f,
                "arfima:d={},ar={},ma={},sigma2={}",
                fmt_f64(*d),
                fmt_list(ar),
                fmt_list(ma),
                fmt_f64(*sigma2)
            ),
            Kind::Ma1 { b, sigma2 } => write!(f, "ma1:b={},sigma2={}", fmt_f64(*b), fmt_f64(*sigma2)),
            Kind::Pollaczek { a } => write!(f, "pollaczek:a={}", fmt_f64(*a)),
            Kind::HatPollaczek { a } => write!(f, "hat_pollaczek:a={}", fmt_f64(*a)),
            Kind::ExpZeroAtOrigin { a } => write!(f, "exp_zero0:a={}", fmt_f64(*a)),
            Kind::ExpZeroAtPi { a } => write!(f, "exp_zeropi:a={}", fmt_f64(*a)),
            Kind::ArcRestricted { base, support } => write!(f, "arc:base={},arcs={support}", fmt_nested(base)),
            Kind::Product { base, factor } => write!(f, "product:f={};g={factor}", fmt_nested(base)),
            Kind::Positive(PositiveFn::Const(c)) => write!(f, "const({})", fmt_f64(*c)),
            Kind::Positive(h) => write!(f, "positive:h={h}"),
        }
    }
}

fn parse_list(c: &mut Cursor) -> Result<Vec<f64>> {
    c.expect('[')?;
    let mut v = Vec::new();
    if c.eat(']') {
        return Ok(v);
    }
    loop {
        v.push(c.number()?);
        if !c.eat(',') {
            break;
        }
    }
    c.expect(']')?;
    Ok(v)
}

fn parse_rational_list(c: &mut Cursor) -> Result<Vec<Rational>> {
    c.expect('[')?;
    let mut v = Vec::new();
    loop {
        v.push(c.rational()?);
        if !c.eat(',') {
            break;
        }
    }
    c.expect(']')?;
    Ok(v)
}

/// Parses `key=value` pairs separated by `,` or `;`; stops (without consuming the
/// separator) at a key outside `keys`, so nested specs need no parentheses.
fn parse_params<T>(
    c: &mut Cursor,
    keys: &[&str],
    mut value: impl FnMut(&mut Cursor, &str) -> Result<T>,
) -> Result<Vec<(String, T)>> {
    let mut out: Vec<(String, T)> = Vec::new();
    loop {
        let save = c.pos();
        if !out.is_empty() && !(c.eat(',') || c.eat(';')) {
            break;
        }
        let key_pos = c.pos();
        let key = match c.ident() {
            Ok(k) => k,
            Err(e) => {
                if out.is_empty() {
                    return Err(e);
                }
                c.set_pos(save);
                break;
            }
        };
        if !keys.contains(&key.as_str()) || c.peek() != Some('=') {
            if out.is_empty() {
                c.set_pos(key_pos);
                return Err(c.error(format!("unexpected key '{key}' (expected one of {})", keys.join(", "))));
            }
            c.set_pos(save);
            break;
        }
        if out.iter().any(|(k, _)| *k == key) {
            c.set_pos(key_pos);
            return Err(c.error(format!("duplicate key '{key}'")));
        }
        c.expect('=')?;
        let v = value(c, &key)?;
        out.push((key, v));
    }
    Ok(out)
}

enum Val {
    Num(f64),
    List(Vec<f64>),
    Dens(SpectralDensity),
    Fac(Factor),
    Arcs(ArcSet),
    Pos(PositiveFn),
}

fn get_num(p: &[(String, Val)], k: &str) -> Option<f64> {
    p.iter().find(|(key, _)| key == k).and_then(|(_, v)| if let Val::Num(x) = v { Some(*x) } else { None })
}

fn get_list(p: &[(String, Val)], k: &str) -> Vec<f64> {
    p.iter()
        .find(|(key, _)| key == k)
        .and_then(|(_, v)| if let Val::List(x) = v { Some(x.clone()) } else { None })
        .unwrap_or_default()
}

/// density := '(' density ')' | 'const(' num ')' | kind ':' params
pub fn parse_density(c: &mut Cursor) -> Result<SpectralDensity> {
    if c.eat('(') {
        let d = parse_density(c)?;
        c.expect(')')?;
        return Ok(d);
    }
    let start = c.pos();
    let kind = c.ident()?;
    if kind == "const" {
        c.expect('(')?;
        let v = c.number()?;
        c.expect(')')?;
        return SpectralDensity::constant(v).map_err(|e| at(c, start, e));
    }
    if !c.eat(':') {
        c.set_pos(start);
        return Err(c.error(format!("unknown density '{kind}' (expected kind:params)")));
    }
    let keys: &[&str] = match kind.as_str() {
        "white" => &["sigma2"],
        "ma1" => &["b", "sigma2"],
        "arma" => &["ar", "ma", "sigma2"],
        "arfima" => &["d", "ar", "ma", "sigma2"],
        "pollaczek" | "hat_pollaczek" | "exp_zero0" | "exp_zeropi" => &["a"],
        "arc" => &["base", "arcs"],
        "product" => &["f", "g"],
        "positive" => &["h"],
        _ => {
            c.set_pos(start);
            return Err(c.error(format!("unknown density kind '{kind}'")));
        }
    };
    let p = parse_params(c, keys, |c, key| match key {
        "ar" | "ma" => parse_list(c).map(Val::List),
        "base" | "f" => parse_density(c).map(Val::Dens),
        "g" => parse_factor(c).map(Val::Fac),
        "arcs" => parse_arcset(c).map(Val::Arcs),
        "h" => parse_positive(c).map(Val::Pos),
        _ => c.number().map(Val::Num),
    })?;
    let need = |k: &str| -> Result<f64> {
        get_num(&p, k).ok_or_else(|| Error::Parse { line: 1, col: start + 1, msg: format!("{kind} requires parameter '{k}'") })
    };
    let sigma2 = get_num(&p, "sigma2").unwrap_or(1.0);
    let built = match kind.as_str() {
        "white" => SpectralDensity::white(sigma2),
        "ma1" => SpectralDensity::ma1(need("b")?, sigma2),
        "arma" => SpectralDensity::arma(get_list(&p, "ar"), get_list(&p, "ma"), sigma2),
        "arfima" => SpectralDensity::arfima(need("d")?, get_list(&p, "ar"), get_list(&p, "ma"), sigma2),
        "pollaczek" => SpectralDensity::pollaczek(need("a")?),
        "hat_pollaczek" => SpectralDensity::hat_pollaczek(need("a")?),
        "exp_zero0" => SpectralDensity::exp_zero_at_origin(need("a")?),
        "exp_zeropi" => SpectralDensity::exp_zero_at_pi(need("a")?),
        "arc" => {
            let mut base = None;
            let mut arcs = None;
            for (k, v) in p {
                match (k.as_str(), v) {
                    ("base", Val::Dens(d)) => base = Some(d),
                    ("arcs", Val::Arcs(a)) => arcs = Some(a),
                    _ => {}
                }
            }
            let base = match base {
                Some(b) => b,
                None => SpectralDensity::constant(1.0)?,
            };
            let arcs = arcs.ok_or_else(|| Error::Parse { line: 1, col: start + 1, msg: "arc requires 'arcs'".into() })?;
            SpectralDensity::arc_restricted(base, arcs)
        }
        "product" => {
            let mut f = None;
            let mut g = None;
            for (k, v) in p {
                match (k.as_str(), v) {
                    ("f", Val::Dens(d)) => f = Some(d),
                    ("g", Val::Fac(x)) => g = Some(x),
                    _ => {}
                }
            }
            let (Some(f), Some(g)) = (f, g) else {
                return Err(Error::Parse { line: 1, col: start + 1, msg: "product requires 'f' and 'g'".into() });
            };
            SpectralDensity::multiply_factor(f, g)
        }
        "positive" => {
            let h = p.into_iter().find_map(|(_, v)| if let Val::Pos(h) = v { Some(h) } else { None });
            let h = h.ok_or_else(|| Error::Parse { line: 1, col: start + 1, msg: "positive requires 'h'".into() })?;
            SpectralDensity::positive(h)
        }
        _ => unreachable!(),
    };
    built.map_err(|e| at(c, start, e))
}

/// Attributes a construction error to the spec position where the density starts.
fn at(_c: &Cursor, pos: usize, e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::Parse { line: 1, col: pos + 1, msg: m },
        other => other,
    }
}

/// h := 'const(' num ')' | 'expodd(' list ')'
pub fn parse_positive(c: &mut Cursor) -> Result<PositiveFn> {
    let start = c.pos();
    let id = c.ident()?;
    match id.as_str() {
        "const" => {
            c.expect('(')?;
            let v = c.number()?;
            c.expect(')')?;
            Ok(PositiveFn::Const(v))
        }
        "expodd" => {
            c.expect('(')?;
            let v = parse_list(c)?;
            c.expect(')')?;
            Ok(PositiveFn::ExpOdd(v))
        }
        _ => {
            c.set_pos(start);
            Err(c.error(format!("unknown bounded function '{id}' (expected const or expodd)")))
        }
    }
}

/// factor := form '(' key=value, ... ')'
pub fn parse_factor(c: &mut Cursor) -> Result<Factor> {
    let start = c.pos();
    let id = c.ident()?;
    let keys: &[&str] = match id.as_str() {
        "ratio" => &["h", "t1", "t2"],
        "abs_trig_pow" | "neg_trig_pow" => &["h", "t", "alpha"],
        "abs_alg_pow" => &["h", "q", "alpha"],
        "const" => {
            c.expect('(')?;
            let v = c.number()?;
            c.expect(')')?;
            return Factor::constant(v).map_err(|e| at(c, start, e));
        }
        _ => {
            c.set_pos(start);
            return Err(c.error(format!("unknown factor form '{id}'")));
        }
    };
    c.expect('(')?;
    enum FV {
        H(PositiveFn),
        T(TrigPolynomial),
        N(f64),
        Q(Vec<Rational>),
    }
    let p = parse_params(c, keys, |c, key| match key {
        "h" => parse_positive(c).map(FV::H),
        "t" | "t1" | "t2" => parse_trig(c).map(FV::T),
        "alpha" => c.number().map(FV::N),
        "q" => parse_rational_list(c).map(FV::Q),
        _ => unreachable!(),
    })?;
    c.expect(')')?;
    let mut h = PositiveFn::Const(1.0);
    let (mut t, mut t1, mut t2, mut alpha, mut q) = (None, None, None, None, None);
    for (k, v) in p {
        match (k.as_str(), v) {
            ("h", FV::H(x)) => h = x,
            ("t", FV::T(x)) => t = Some(x),
            ("t1", FV::T(x)) => t1 = Some(x),
            ("t2", FV::T(x)) => t2 = Some(x),
            ("alpha", FV::N(x)) => alpha = Some(x),
            ("q", FV::Q(x)) => q = Some(x),
            _ => {}
        }
    }
    let missing = |what: &str| Error::Parse { line: 1, col: start + 1, msg: format!("{id} requires '{what}'") };
    let form = match id.as_str() {
        "ratio" => FactorForm::Ratio {
            t1: t1.unwrap_or_else(TrigPolynomial::one),
            t2: t2.unwrap_or_else(TrigPolynomial::one),
        },
        "abs_trig_pow" => FactorForm::AbsTrigPower { t: t.ok_or_else(|| missing("t"))?, alpha: alpha.ok_or_else(|| missing("alpha"))? },
        "neg_trig_pow" => FactorForm::NegTrigPower { t: t.ok_or_else(|| missing("t"))?, alpha: alpha.ok_or_else(|| missing("alpha"))? },
        "abs_alg_pow" => {
            FactorForm::AbsAlgebraicPower { q: q.ok_or_else(|| missing("q"))?, alpha: alpha.ok_or_else(|| missing("alpha"))? }
        }
        _ => unreachable!(),
    };
    Factor::new(h, form).map_err(|e| at(c, start, e))
}
