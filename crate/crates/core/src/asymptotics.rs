//! Rate diagnostics for prediction-error traces and quantitative checks of the limit theorems.

use crate::arcs::{Angle, ArcSet};
use crate::capacity;
use crate::covariance::{self, CovarianceSequence};
use crate::error::{Error, Result};
use crate::geomean;
use crate::mp;
use crate::quadrature::{self, Options};
use crate::spectral::{Factor, SpectralDensity, Szego};
use crate::toeplitz::{self, PredictionTrace};
use rug::Float;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A fitted exponent moved more than its tolerance between the two half-windows.
    TrendOnly,
    Insufficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Exponential,
    PowerLaw,
    /// Ratios tend to one; no exponential rate.
    ExponentiallyNeutral,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tolerance {
    Rel(f64),
    Abs(f64),
    /// `computed <= target`
    AtMost,
    /// `computed >= target`
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub tolerance: Tolerance,
    pub deviation: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, target: f64, computed: f64, tolerance: Tolerance) -> Self {
        let (deviation, pass) = match tolerance {
            Tolerance::Rel(t) => {
                let d = ((computed - target) / target).abs();
                (d, d <= t)
            }
            Tolerance::Abs(t) => {
                let d = (computed - target).abs();
                (d, d <= t)
            }
            Tolerance::AtMost => (computed - target, computed <= target),
            Tolerance::AtLeast => (target - computed, computed >= target),
        };
        Check { name: name.into(), target, computed, tolerance, deviation, pass: pass && computed.is_finite() }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, 1.0, if ok { 1.0 } else { 0.0 }, Tolerance::AtLeast)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerFit {
    pub prefactor: f64,
    /// `y ~ prefactor * n^(-exponent)`
    pub exponent: f64,
    pub window: (usize, usize),
    /// Max abs residual of `ln y` over the window.
    pub residual: f64,
    pub half_window_exponents: (f64, f64),
}

/// Least squares of `ln y = ln c - alpha ln n` over the points with `lo <= n <= hi`, geometrically
/// subsampled to at most 32 points.
pub fn power_fit(ns: &[usize], ys: &[f64], lo: usize, hi: usize) -> Option<PowerFit> {
    let pts = subsample(ns, ys, lo, hi);
    if pts.len() < 3 {
        return None;
    }
    let (c, alpha, res) = loglog(&pts);
    let mid = ((lo as f64) * (hi as f64)).sqrt().round() as usize;
    let a1 = loglog(&subsample(ns, ys, lo, mid)).1;
    let a2 = loglog(&subsample(ns, ys, mid, hi)).1;
    Some(PowerFit { prefactor: c, exponent: alpha, window: (lo, hi), residual: res, half_window_exponents: (a1, a2) })
}

fn subsample(ns: &[usize], ys: &[f64], lo: usize, hi: usize) -> Vec<(f64, f64)> {
    let inside: Vec<(usize, f64)> = ns.iter().zip(ys).filter(|(n, y)| **n >= lo && **n <= hi && **y > 0.0).map(|(n, y)| (*n, *y)).collect();
    if inside.len() <= 32 {
        return inside.iter().map(|(n, y)| (*n as f64, *y)).collect();
    }
    let k = 32;
    let (a, b) = (inside[0].0 as f64, inside[inside.len() - 1].0 as f64);
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut last = usize::MAX;
    for j in 0..k {
        let target = a * (b / a).powf(j as f64 / (k - 1) as f64);
        let idx = inside.iter().enumerate().min_by(|x, y| {
            let dx = (x.1 .0 as f64 - target).abs();
            let dy = (y.1 .0 as f64 - target).abs();
            dx.partial_cmp(&dy).unwrap()
        });
        let (i, p) = idx.unwrap();
        if i != last {
            out.push((p.0 as f64, p.1));
            last = i;
        }
    }
    out
}

fn loglog(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (b0, b1) = linfit(&xs, &ys);
    let res = xs.iter().zip(&ys).map(|(x, y)| (y - b0 - b1 * x).abs()).fold(0.0, f64::max);
    (b0.exp(), -b1, res)
}

/// Intercept and slope.
fn linfit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b1 * mx, b1)
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub id: String,
    /// `n` for `values`.
    pub n: Vec<usize>,
    /// `delta_n = sigma2_n - sigma2` when the process is nondeterministic, else `sigma2_n`.
    pub values: Vec<f64>,
    /// `ln` of `values`, kept separately since the values can leave double range.
    pub ln_values: Vec<f64>,
    pub on_excess: bool,
    /// `values[n]^(1/2n)`
    pub nth_root_seq: Vec<f64>,
    /// `values[n+1] / values[n]`
    pub ratio_seq: Vec<f64>,
    pub power_fit: Option<PowerFit>,
    /// Slope of `ln values` against `n` over the fit window.
    pub log_slope: Option<f64>,
    pub classification: DecayClass,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    /// Smallest slack over the checks, in units of each tolerance (negative when failing).
    pub margin: f64,
    /// Weakly varying sequences must be exponentially neutral.
    pub neutral_closure: Option<bool>,
    pub warnings: Vec<String>,
}

impl RateReport {
    fn empty(id: &str) -> Self {
        RateReport {
            id: id.into(),
            n: vec![],
            values: vec![],
            ln_values: vec![],
            on_excess: false,
            nth_root_seq: vec![],
            ratio_seq: vec![],
            power_fit: None,
            log_slope: None,
            classification: DecayClass::Unclassified,
            checks: vec![],
            verdict: Verdict::Insufficient,
            margin: 0.0,
            neutral_closure: None,
            warnings: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Recomputes verdict and margin from the checks; `unstable` downgrades a pass.
    pub fn finish(&mut self, unstable: bool) {
        if self.verdict == Verdict::Insufficient && self.checks.is_empty() {
            return;
        }
        let all = self.checks.iter().all(|c| c.pass);
        self.margin = self
            .checks
            .iter()
            .map(|c| match c.tolerance {
                Tolerance::Rel(t) | Tolerance::Abs(t) => 1.0 - c.deviation / t,
                _ => -c.deviation,
            })
            .fold(f64::INFINITY, f64::min);
        self.verdict = if !all {
            Verdict::Fail
        } else if unstable {
            Verdict::TrendOnly
        } else {
            Verdict::Pass
        };
    }

    /// `n,value,ln_value,nth_root,ratio`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,value,ln_value,nth_root,ratio\n");
        for (i, n) in self.n.iter().enumerate() {
            let root = self.nth_root_seq.get(i).map(|x| fmt(*x)).unwrap_or_default();
            let ratio = self.ratio_seq.get(i).map(|x| fmt(*x)).unwrap_or_default();
            let _ = writeln!(s, "{n},{},{},{root},{ratio}", fmt(self.values[i]), fmt(self.ln_values[i]));
        }
        s
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Diagnostic sequences of a trace. `sigma_inf_sq` is `2 pi G(f)`; `None` or zero selects the
/// raw `sigma2_n`.
pub fn analyze(trace: &PredictionTrace, sigma_inf_sq: Option<&Float>) -> RateReport {
    analyze_window(trace, sigma_inf_sq, None)
}

pub fn analyze_window(trace: &PredictionTrace, sigma_inf_sq: Option<&Float>, window: Option<(usize, usize)>) -> RateReport {
    let mut rep = RateReport::empty("analyze");
    if trace.n_max() < 16 {
        rep.warnings.push(format!("trace has only {} usable entries", trace.n_max()));
        rep.warnings.extend(trace.warnings.iter().cloned());
        return rep;
    }
    let prec = trace.prec;
    let excess = sigma_inf_sq.filter(|s| !s.is_zero());
    rep.on_excess = excess.is_some();
    let mut lnv: Vec<Float> = Vec::new();
    for n in 1..=trace.n_max() {
        let v = match excess {
            Some(s) => Float::with_val(prec, &trace.sigma2[n] - s),
            None => trace.sigma2[n].clone(),
        };
        if !(v > 0) {
            rep.warnings.push(format!("excess error non-positive from n = {n}; sequence truncated"));
            break;
        }
        rep.n.push(n);
        rep.values.push(v.to_f64());
        lnv.push(v.ln());
    }
    if rep.n.len() < 16 {
        rep.warnings.push("fewer than 16 positive entries".into());
        return rep;
    }
    rep.ln_values = lnv.iter().map(|x| x.to_f64()).collect();
    for (i, n) in rep.n.iter().enumerate() {
        rep.nth_root_seq.push((rep.ln_values[i] / (2.0 * *n as f64)).exp());
        if i + 1 < rep.n.len() {
            rep.ratio_seq.push(Float::with_val(prec, &lnv[i + 1] - &lnv[i]).to_f64().exp());
        }
    }
    let n_max = *rep.n.last().unwrap();
    let (lo, hi) = window.unwrap_or((n_max / 2, n_max));
    rep.power_fit = power_fit(&rep.n, &rep.values, lo, hi);
    if rep.values.iter().any(|v| *v == 0.0) {
        // leave double range: fit the logs directly
        let pts: Vec<(f64, f64)> = rep.n.iter().zip(&rep.ln_values).filter(|(n, _)| **n >= lo && **n <= hi).map(|(n, l)| ((*n as f64).ln(), *l)).collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (b0, b1) = linfit(&xs, &ys);
        rep.power_fit = Some(PowerFit { prefactor: b0.exp(), exponent: -b1, window: (lo, hi), residual: f64::NAN, half_window_exponents: (f64::NAN, f64::NAN) });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rep.n.iter().zip(&rep.ln_values).filter(|(n, _)| **n >= lo && **n <= hi).map(|(n, l)| (*n as f64, *l)).unzip();
    let (b0, slope) = linfit(&xs, &ys);
    rep.log_slope = Some(slope);
    // model choice: linear in n (exponential) against linear in ln n (power law)
    let lin_res = xs.iter().zip(&ys).map(|(x, y)| (y - b0 - slope * x).powi(2)).sum::<f64>();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let (c0, c1) = linfit(&lx, &ys);
    let pow_res = lx.iter().zip(&ys).map(|(x, y)| (y - c0 - c1 * x).powi(2)).sum::<f64>();
    let last_ratio = *rep.ratio_seq.last().unwrap();
    rep.classification = if (1.0 - last_ratio).abs() < 1e-3 && pow_res <= lin_res {
        if c1 < -0.05 {
            DecayClass::PowerLaw
        } else {
            DecayClass::ExponentiallyNeutral
        }
    } else if lin_res < pow_res {
        DecayClass::Exponential
    } else {
        DecayClass::PowerLaw
    };
    if (1.0 - last_ratio).abs() < 1e-2 {
        let i = rep.n.len() - 1;
        let q = (rep.n.len() / 4).max(1) - 1;
        rep.neutral_closure = Some((rep.nth_root_seq[i] - 1.0).abs() <= (rep.nth_root_seq[q] - 1.0).abs());
    }
    rep.warnings.extend(trace.warnings.iter().cloned());
    rep.verdict = Verdict::Pass;
    rep
}

/// Exponential decay of `sigma2_n` is impossible unless the density vanishes on a set of
/// positive measure; downgrades such a classification.
pub fn guard_classification(rep: &mut RateReport, f: &SpectralDensity) {
    if rep.classification == DecayClass::Exponential && !rep.on_excess && f.support().is_full() {
        rep.classification = DecayClass::ExponentiallyNeutral;
        rep.warnings.push("exponential rate rejected for an a.e. positive density".into());
    }
}

/// Quadrature target used by the pipelines at working precision `prec`.
pub fn pipeline_target(prec: u32) -> Float {
    mp::pow2(prec, -((prec / 4).max(80) as i32))
}

pub fn pipeline_covariances(f: &SpectralDensity, n: usize, prec: u32) -> Result<CovarianceSequence> {
    covariance::covariances(f, n, prec, &pipeline_target(prec))
}

/// `2 pi G(f)` at `prec`, zero for deterministic densities; indeterminate classifications abort.
pub fn sigma_inf_sq(f: &SpectralDensity, prec: u32) -> Result<Float> {
    match geomean::szego_condition(f) {
        Szego::Deterministic => Ok(Float::new(prec)),
        Szego::Indeterminate => Err(Error::Indeterminate("Szego classification indeterminate; refusing to pick a limit".into())),
        Szego::Nondeterministic => {
            let g = geomean::geometric_mean(f, prec)?;
            Ok(Float::with_val(prec, g.value_or_zero(prec) * mp::two_pi(prec)))
        }
    }
}

fn trace_of(f: &SpectralDensity, n: usize, prec: u32) -> Result<PredictionTrace> {
    let r = pipeline_covariances(f, n, prec)?;
    toeplitz::levinson(&r, n)
}

fn v_abs(trace: &PredictionTrace, n: usize) -> f64 {
    trace.v(n).abs().to_f64()
}

#[derive(Clone, Debug, PartialEq)]
pub enum DavissonShape {
    /// Support inside an arc of length `2 alpha`.
    SingleArc { alpha: f64 },
    /// Support inside two arcs of length `alpha` at distance `2 delta`.
    TwoArcs { alpha: f64, delta: f64 },
}

impl DavissonShape {
    pub fn from_support(s: &ArcSet) -> Result<Self> {
        if s.is_full() {
            return Err(Error::Precondition("bound needs the density to vanish on an arc; support is the full circle".into()));
        }
        let arcs = s.arcs();
        if arcs.len() == 2 && arcs[0].half.cmp_value(&arcs[1].half) == Ordering::Equal {
            let alpha = arcs[0].length().to_f64();
            let g = s.gaps();
            let delta = g[0].to_f64().min(g[1].to_f64()) / 2.0;
            return Ok(DavissonShape::TwoArcs { alpha, delta });
        }
        // smallest containing arc
        let widest = s.gaps().into_iter().max_by(|x, y| x.cmp_value(y)).unwrap();
        let len = Angle::pi_frac(2, 1).sub(&widest).to_f64();
        Ok(DavissonShape::SingleArc { alpha: len / 2.0 })
    }

    /// `4 c s^(n-1)` with `s` the per-step factor, at precision `prec`.
    pub fn bound(&self, c: &Float, n: usize, prec: u32) -> Float {
        let s = match self {
            DavissonShape::SingleArc { alpha } => mp::fl(prec, alpha / 2.0).sin().square(),
            DavissonShape::TwoArcs { alpha, delta } => {
                Float::with_val(prec, mp::fl(prec, alpha / 2.0).sin() * mp::fl(prec, alpha / 2.0 + delta).sin())
            }
        };
        let p = if n == 0 { mp::one(prec) } else { Float::with_val(prec, rug::ops::Pow::pow(&s, (n - 1) as u32)) };
        Float::with_val(prec, c * p) * 4u32
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DavissonReport {
    pub checked: usize,
    pub violations: Vec<usize>,
    /// Largest `sigma2_n / bound`.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Checks the bound at every `n` of the trace. A violation is a hard failure.
pub fn verify_davisson(trace: &PredictionTrace, shape: &DavissonShape, c_r0: &Float) -> Result<DavissonReport> {
    let prec = trace.prec;
    let slack = mp::one(prec) + mp::pow2(prec, -(prec as i32) / 2);
    let mut violations = Vec::new();
    let mut max_ratio = f64::NEG_INFINITY;
    for n in 1..=trace.n_max() {
        let b = shape.bound(c_r0, n, prec);
        let q = Float::with_val(prec, &trace.sigma2[n] / &b);
        max_ratio = max_ratio.max(q.to_f64());
        if q > slack {
            violations.push(n);
        }
    }
    if !violations.is_empty() {
        return Err(Error::Violation(format!("sigma2_n exceeds the bound at n = {:?}", &violations[..violations.len().min(10)])));
    }
    Ok(DavissonReport { checked: trace.n_max(), violations, max_ratio, holds: true })
}

/// Arc indicator on `[pi/2 - alpha, pi/2 + alpha]`.
pub fn verify_rosenblatt1(alpha: &Angle, n_max: usize, prec: u32) -> Result<RateReport> {
    let support = ArcSet::single(Angle::pi_frac(1, 2), alpha.clone())?;
    let f = SpectralDensity::arc_indicator(support.clone())?;
    let r = pipeline_covariances(&f, n_max + 1, prec)?;
    let trace = toeplitz::levinson(&r, n_max + 1)?;
    let mut rep = analyze(&trace, None);
    rep.id = "rosenblatt1".into();
    if trace.n_max() < n_max + 1 {
        rep.verdict = Verdict::Insufficient;
        rep.warnings.push(format!("trace degenerate at n = {}", trace.n_max() + 1));
        return Ok(rep);
    }
    let a = alpha.to_f64();
    let tau = (a / 2.0).sin();
    let tau_cap = capacity::tau_arcset_with(&support, None);
    rep.push(Check::new("tau matches transfinite diameter of the support", tau_cap.value, tau, Tolerance::Rel(1e-15)));
    let ratio = Float::with_val(prec, &trace.sigma2[n_max + 1] / &trace.sigma2[n_max]).to_f64();
    rep.push(Check::new("ratio limit sin^2(alpha/2)", tau * tau, ratio, Tolerance::Rel(0.01)));
    rep.push(Check::new("nth root limit sin(alpha/2)", tau, trace.nth_root(n_max).to_f64(), Tolerance::Rel(0.03)));
    rep.push(Check::new("|v_n| limit cos(alpha/2)", (a / 2.0).cos(), v_abs(&trace, n_max), Tolerance::Abs(0.02)));
    let gap_half = (2.0 * std::f64::consts::PI - 2.0 * a) / 2.0;
    rep.push(Check::new("nth root below cos(delta/2) for the gap", (gap_half / 2.0).cos() * 1.03, trace.nth_root(n_max).to_f64(), Tolerance::AtMost));
    let shape = DavissonShape::SingleArc { alpha: a };
    let dv = verify_davisson(&trace, &shape, r.r0());
    rep.push(Check::flag("single-arc bound at every n", dv.is_ok()));
    rep.classification = DecayClass::Exponential;
    rep.finish(false);
    Ok(rep)
}

fn table_analytic(a: f64, prec: u32) -> Float {
    let g = mp::gamma(&mp::fl(prec, (a + 1.0) / 2.0));
    let den = Float::with_val(prec, mp::pi(prec) * mp::fl(prec, 2.0 - a).exp2());
    Float::with_val(prec, g.square() / den)
}

pub fn verify_rosenblatt2(a: f64, n_max: usize, prec: u32) -> Result<RateReport> {
    let f = SpectralDensity::pollaczek(a)?;
    let trace = trace_of(&f, n_max, prec)?;
    power_law_report("rosenblatt2", &f, &trace, a, 0.05, table_analytic(a, prec).to_f64(), 0.20)
}

fn power_law_report(id: &str, f: &SpectralDensity, trace: &PredictionTrace, a: f64, exp_tol: f64, prefactor: f64, pre_tol: f64) -> Result<RateReport> {
    let mut rep = analyze(trace, None);
    rep.id = id.into();
    guard_classification(&mut rep, f);
    let Some(fit) = rep.power_fit.clone() else {
        rep.verdict = Verdict::Insufficient;
        return Ok(rep);
    };
    rep.push(Check::new("exponent", a, fit.exponent, Tolerance::Rel(exp_tol)));
    rep.push(Check::new("prefactor", prefactor, fit.prefactor, Tolerance::Rel(pre_tol)));
    let (e1, e2) = fit.half_window_exponents;
    let unstable = !((e1 - e2).abs() < exp_tol * a);
    rep.finish(unstable);
    Ok(rep)
}

/// `sigma2_n(f g) / sigma2_n(f)` against `G(g)`.
pub fn verify_ratio_theorem(f: &SpectralDensity, g: &Factor, n_max: usize, prec: u32, tol: Tolerance) -> Result<RateReport> {
    match geomean::szego_condition(f) {
        Szego::Indeterminate => return Err(Error::Indeterminate("Szego classification of f is indeterminate".into())),
        Szego::Deterministic if !f.support().is_full() => {
            return Err(Error::Precondition("deterministic f must be positive almost everywhere".into()))
        }
        _ => {}
    }
    let fg = SpectralDensity::multiply_factor(f.clone(), g.clone())?;
    let gg = geomean::geometric_mean_closed_prec(g, prec)?;
    let target = gg.value_or_zero(prec);
    let rf = pipeline_covariances(f, n_max, prec)?;
    let rfg = covariance::covariances(&fg, n_max, prec, &pipeline_target(prec))?;
    let tf = toeplitz::levinson(&rf, n_max)?;
    let tfg = toeplitz::levinson(&rfg, n_max)?;
    let m = tf.n_max().min(tfg.n_max());
    let mut rep = RateReport::empty("ratio");
    for n in 1..=m {
        let q = Float::with_val(prec, &tfg.sigma2[n] / &tf.sigma2[n]);
        rep.n.push(n);
        rep.values.push(q.to_f64());
        rep.ln_values.push(q.ln().to_f64());
    }
    rep.warnings.extend(tf.warnings.iter().chain(&tfg.warnings).cloned());
    if m < n_max {
        rep.verdict = Verdict::Insufficient;
        return Ok(rep);
    }
    let last = *rep.values.last().unwrap();
    rep.push(Check::new(format!("ratio at n = {n_max} vs G(g)"), target.to_f64(), last, tol));
    rep.finish(false);
    Ok(rep)
}

/// ARFIMA(0, d, 0) with unit innovation variance: `n delta_n -> d^2`.
pub fn verify_inoue(d: f64, n_max: usize, prec: u32) -> Result<RateReport> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::InvalidArgument("need 0 < d < 1/2".into()));
    }
    let f = SpectralDensity::arfima(d, vec![], vec![], 1.0)?;
    let trace = trace_of(&f, n_max, prec)?;
    let s_inf = sigma_inf_sq(&f, prec)?;
    let mut rep = analyze(&trace, Some(&s_inf));
    rep.id = "inoue".into();
    if trace.n_max() < n_max {
        rep.verdict = Verdict::Insufficient;
        return Ok(rep);
    }
    let scaled = |n: usize| Float::with_val(prec, Float::with_val(prec, &trace.sigma2[n] - &s_inf) * n as u32).to_f64();
    let d2 = d * d;
    let end = scaled(n_max);
    let half = scaled(n_max / 2);
    rep.push(Check::new(format!("n delta_n at n = {n_max} vs d^2"), d2, end, Tolerance::Rel(0.10)));
    rep.push(Check::new("deviation decreases from n/2 to n", (half - d2).abs(), (end - d2).abs(), Tolerance::AtMost));
    let mut worst: f64 = 0.0;
    for k in 0..n_max.min(100) {
        let want = d / (k as f64 - d + 1.0);
        let got = trace.verblunsky[k].re.to_f64();
        worst = worst.max(((got - want) / want).abs());
    }
    rep.push(Check::new("v_(n+1) vs d/(n-d+1), n < 100", 0.0, worst, Tolerance::Abs(1e-6)));
    rep.finish(false);
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub a: f64,
    pub analytic_factor: f64,
    pub c_hat: f64,
    pub c: f64,
}

/// `Gamma^2((a+1)/2) / (pi 2^(2-a))`, `G(hat f_a / f_a)` by quadrature, and their product.
pub fn table1_constants(a: f64) -> Result<Table1Row> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument("need a > 0".into()));
    }
    let prec = 320;
    let analytic = table_analytic(a, prec);
    let f = SpectralDensity::pollaczek(a)?;
    let h = SpectralDensity::hat_pollaczek(a)?;
    let opts = Options::new(prec, mp::fl(prec, 1e-30));
    let pi = mp::pi(prec);
    // the ratio is even and tends to finite limits at 0 and pi
    let (li, _) = quadrature::integrate_scalar(
        |x| Ok(Float::with_val(prec, h.ln_eval(x) - f.ln_eval(x))),
        &[(Float::new(prec), pi.clone())],
        &[Float::new(prec), pi.clone()],
        &opts,
    )?;
    let c_hat = Float::with_val(prec, li / &pi).exp();
    let c = Float::with_val(prec, &analytic * &c_hat);
    Ok(Table1Row { a, analytic_factor: analytic.to_f64(), c_hat: c_hat.to_f64(), c: c.to_f64() })
}

pub fn verify_hat_pollaczek(a: f64, n_max: usize, prec: u32) -> Result<RateReport> {
    let row = table1_constants(a)?;
    let fh = SpectralDensity::hat_pollaczek(a)?;
    let th = trace_of(&fh, n_max, prec)?;
    let mut rep = power_law_report("hat-pollaczek", &fh, &th, a, 0.07, row.c, 0.25)?;
    let unstable = rep.verdict == Verdict::TrendOnly;
    let fa = trace_of(&SpectralDensity::pollaczek(a)?, n_max, prec)?;
    for (name, g) in [("origin", SpectralDensity::exp_zero_at_origin(a)?), ("pi", SpectralDensity::exp_zero_at_pi(a)?)] {
        let tg = trace_of(&g, n_max, prec)?;
        let m = fa.n_max().min(tg.n_max());
        let q: Vec<Float> = (0..=m).map(|n| Float::with_val(prec, &fa.sigma2[n] / &tg.sigma2[n])).collect();
        let start = 50.min(m);
        let monotone = (start..m).all(|n| q[n + 1] < q[n]);
        rep.push(Check::flag(format!("sigma2_n(f_a)/sigma2_n(exp zero at {name}) decreasing beyond n = 50"), monotone && m > start));
    }
    rep.finish(unstable);
    Ok(rep)
}

/// Minimal-eigenvalue rates chosen by the zero structure of `f`.
pub fn verify_eigen_rates(f: &SpectralDensity, n_max: usize, prec: u32) -> Result<RateReport> {
    let r = pipeline_covariances(f, n_max, prec)?;
    let trace = toeplitz::levinson(&r, n_max)?;
    let mut rep = RateReport::empty("eigen-rates");
    rep.warnings.extend(trace.warnings.iter().cloned());
    let top = trace.n_max();
    if !f.support().is_full() {
        let shape = DavissonShape::from_support(f.support())?;
        let c = r.r0().clone();
        let mut ok = true;
        for n in 1..=top {
            let b = shape.bound(&c, n, prec);
            if !toeplitz::min_eigenvalue_at_most(&r, n, &b) {
                ok = false;
            }
        }
        rep.push(Check::flag("lambda_1n below the arc bound at every n", ok));
        let xi = Float::with_val(prec, &trace.sigma2[top] * (1.0 + 1e-12));
        let below = toeplitz::min_eigenvalue_at_most(&r, top, &xi);
        rep.push(Check::flag("lambda_1n <= sigma2_n", below));
        let tau = capacity::tau_arcset(f.support());
        let root = trace.nth_root(top).to_f64();
        let hi = tau.bracket.map(|b| b.1).unwrap_or(tau.value);
        rep.push(Check::new("lambda_1n^(1/2n) upper estimate vs tau", hi * 1.03, root, Tolerance::AtMost));
        rep.classification = DecayClass::Exponential;
        rep.finish(false);
        return Ok(rep);
    }
    let zeros = f.zeros();
    if zeros.iter().any(|z| z.is_exponential()) {
        let a = zeros.iter().flat_map(|z| z.exp_orders.iter().copied()).fold(0.0, f64::max);
        let ns = geometric_ns(top / 4, top, 8);
        let mut ok = true;
        let mut scaled = Vec::new();
        for &n in &ns {
            let tol = trace.sigma2[n].to_f64() * 1e-6;
            let e = toeplitz::min_eigenvalue(&r, n, prec, tol)?;
            if e.bracket.0 > trace.sigma2[n] {
                ok = false;
            }
            rep.n.push(n);
            rep.values.push(e.lambda_min.to_f64());
            rep.ln_values.push(e.lambda_min.clone().ln().to_f64());
            scaled.push(e.lambda_min.to_f64() * (n as f64).powf(a));
        }
        rep.push(Check::flag("lambda_1n <= sigma2_n", ok));
        let (first, last) = (scaled[0], *scaled.last().unwrap());
        rep.push(Check::new("n^a lambda_1n bounded over the window", first * 1.5, last, Tolerance::AtMost));
        rep.classification = DecayClass::PowerLaw;
        rep.finish(false);
        return Ok(rep);
    }
    let k2 = zeros.iter().map(|z| z.poly_order).fold(0.0, f64::max);
    if k2 <= 0.0 {
        return Err(Error::Precondition("density has no classified zero".into()));
    }
    let ns = geometric_ns((top / 8).max(2), top, 16);
    for &n in &ns {
        let guess = trace.sigma2[n].to_f64().min(1.0);
        let e = toeplitz::min_eigenvalue(&r, n, prec, guess * 1e-10)?;
        rep.n.push(n);
        rep.values.push(e.lambda_min.to_f64());
        rep.ln_values.push(e.lambda_min.clone().ln().to_f64());
    }
    let fit = power_fit(&rep.n, &rep.values, ns[0], top);
    if let Some(fit) = fit.clone() {
        rep.push(Check::new("lambda_1n exponent vs zero order 2k", k2, fit.exponent, Tolerance::Rel(0.05)));
    }
    rep.power_fit = fit;
    rep.classification = DecayClass::PowerLaw;
    rep.finish(false);
    Ok(rep)
}

fn geometric_ns(lo: usize, hi: usize, k: usize) -> Vec<usize> {
    let lo = lo.max(1);
    let mut v: Vec<usize> = (0..k).map(|j| (lo as f64 * (hi as f64 / lo as f64).powf(j as f64 / (k - 1) as f64)).round() as usize).collect();
    v.dedup();
    v
}
