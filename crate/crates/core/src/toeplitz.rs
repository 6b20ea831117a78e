//! Levinson/Szego recursion, Toeplitz determinants and extreme eigenvalues of `T_n`.
//!
//! Conventions: `T_n = [r(t-s)]` is `(n+1) x (n+1)`, `sigma2_n = D_n / D_{n-1}` is the error of
//! predicting from `n` past values, `v_1 = r(1)/r(0)` and `v_{n+1} = -conj(p_{n+1}(0))` for the
//! monic orthogonal polynomials `p_n`. The matrix symbol is `2 pi f`.

use crate::covariance::CovarianceSequence;
use crate::error::{Error, Result};
use crate::mp::{self, Complex, Scalar};
use crate::quadrature::{self, Options};
use crate::spectral::SpectralDensity;
use nalgebra::DMatrix;
use rug::Float;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct PredictionTrace {
    pub sigma2: Vec<Float>,
    /// `v_1 ..= v_n`, stored from index 0.
    pub verblunsky: Vec<Complex>,
    /// Predictor coefficients `c_{1,n} ..= c_{n,n}` for the requested `n`.
    pub predictors: BTreeMap<usize, Vec<Complex>>,
    pub prec: u32,
    pub r0: Float,
    pub real: bool,
    /// First index at which positivity was lost within precision.
    pub degenerate_at: Option<usize>,
    pub warnings: Vec<String>,
}

impl PredictionTrace {
    /// Largest `n` with a valid `sigma2_n`.
    pub fn n_max(&self) -> usize {
        self.sigma2.len() - 1
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_at.is_some()
    }

    pub fn v(&self, n: usize) -> &Complex {
        &self.verblunsky[n - 1]
    }

    pub fn nth_root(&self, n: usize) -> Float {
        let s = &self.sigma2[n];
        let e = mp::one(self.prec) / (2 * n as u32);
        Float::with_val(self.prec, s.clone().ln() * e).exp()
    }

    pub fn ratio(&self, n: usize) -> Float {
        Float::with_val(self.prec, &self.sigma2[n + 1] / &self.sigma2[n])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(if self.real { "n,sigma2,v,ratio,nth_root\n" } else { "n,sigma2,v,v_im,ratio,nth_root\n" });
        for n in 0..=self.n_max() {
            let sig = mp::fmt_float(&self.sigma2[n]);
            if n == 0 {
                let _ = writeln!(s, "0,{sig},{}", if self.real { ",," } else { ",,," });
                continue;
            }
            let v = self.v(n);
            let ratio = Float::with_val(self.prec, &self.sigma2[n] / &self.sigma2[n - 1]);
            let root = self.nth_root(n);
            if self.real {
                let _ = writeln!(s, "{n},{sig},{},{},{}", mp::fmt_float(&v.re), mp::fmt_float(&ratio), mp::fmt_float(&root));
            } else {
                let _ = writeln!(
                    s,
                    "{n},{sig},{},{},{},{}",
                    mp::fmt_float(&v.re),
                    mp::fmt_float(&v.im),
                    mp::fmt_float(&ratio),
                    mp::fmt_float(&root)
                );
            }
        }
        s
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            convention: "sigma2_n = D_n/D_{n-1} (prediction from n past values); v_1 = r(1)/r(0); v_{n+1} = -conj(p_{n+1}(0)); symbol 2*pi*f".into(),
            precision_bits: self.prec,
            n_max: self.n_max(),
            r0: mp::fmt_float(&self.r0),
            sigma2_last: mp::fmt_float(&self.sigma2[self.n_max()]),
            degenerate_at: self.degenerate_at,
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSummary {
    pub convention: String,
    pub precision_bits: u32,
    pub n_max: usize,
    pub r0: String,
    pub sigma2_last: String,
    pub degenerate_at: Option<usize>,
    pub warnings: Vec<String>,
}

/// Bits needed to follow `n` steps of a trace with ratio limit `rho`.
pub fn required_bits(n: usize, rho: f64) -> u32 {
    if !(rho > 0.0 && rho < 1.0) {
        return 64;
    }
    (2.0 * n as f64 * (1.0 / rho).log2()).ceil() as u32 + 64
}

struct Raw<S> {
    sigma2: Vec<Float>,
    v: Vec<S>,
    predictors: BTreeMap<usize, Vec<S>>,
    degenerate_at: Option<usize>,
    warn_at: Option<usize>,
}

fn run<S: Scalar>(r: &[S], n_max: usize, prec: u32, keep: &[usize], floor: &Float, warn: &Float) -> Raw<S> {
    let r0 = r[0].re();
    let mut a: Vec<S> = vec![S::one_like(prec)];
    let mut sig = Float::with_val(prec, &r0);
    let mut out = Raw { sigma2: vec![sig.clone()], v: Vec::new(), predictors: BTreeMap::new(), degenerate_at: None, warn_at: None };
    if keep.contains(&0) {
        out.predictors.insert(0, vec![]);
    }
    for n in 0..n_max {
        // v_{n+1} = sum_j conj(a_j) r(j+1) / sigma2_n
        let mut acc = S::zero_like(prec);
        for (j, aj) in a.iter().enumerate() {
            acc.mul_add_assign(&aj.conj(), &r[j + 1]);
        }
        let v = acc.scale(&Float::with_val(prec, sig.recip_ref()));
        let one_minus = Float::with_val(prec, 1) - v.norm_sqr();
        let next = Float::with_val(prec, &sig * &one_minus);
        if !(one_minus > 0) || next <= *floor {
            out.degenerate_at = Some(n + 1);
            break;
        }
        let cv = v.conj();
        let mut b: Vec<S> = Vec::with_capacity(n + 2);
        for j in 0..=n + 1 {
            let shifted = if j >= 1 { a[j - 1].clone() } else { S::zero_like(prec) };
            let refl = if j <= n { cv.mul(&a[n - j].conj()) } else { S::zero_like(prec) };
            b.push(shifted.sub(&refl));
        }
        a = b;
        sig = next;
        if out.warn_at.is_none() && sig < *warn {
            out.warn_at = Some(n + 1);
        }
        out.sigma2.push(sig.clone());
        out.v.push(v);
        if keep.contains(&(n + 1)) {
            // c_{k,n} = -a_{n-k}
            let m = n + 1;
            out.predictors.insert(m, (1..=m).map(|k| a[m - k].scale(&mp::fl(prec, -1.0))).collect());
        }
    }
    out
}

fn floors(r0: &Float, prec: u32) -> (Float, Float) {
    let floor = Float::with_val(prec, r0 * mp::pow2(prec, -(prec as i32) + 16));
    let warn = Float::with_val(prec, r0 * mp::pow2(prec, -(prec as i32 / 2) + 16));
    (floor, warn)
}

/// Levinson recursion up to `n_max`, keeping predictor coefficients for the `keep` indices.
pub fn levinson_keep(r: &CovarianceSequence, n_max: usize, keep: &[usize]) -> Result<PredictionTrace> {
    if r.n_max() < n_max {
        return Err(Error::InvalidArgument(format!("need r(0..={n_max}), have r(0..={})", r.n_max())));
    }
    let prec = r.prec();
    let r0 = r.r0().clone();
    let (floor, warn) = floors(&r0, prec);
    let real = r.is_real();
    let (sigma2, v, predictors, degenerate_at, warn_at) = if real {
        let rr: Vec<Float> = r.values()[..=n_max].iter().map(|z| z.re.clone()).collect();
        let raw = run(&rr, n_max, prec, keep, &floor, &warn);
        let conv = |x: Vec<Float>| x.into_iter().map(Complex::real).collect::<Vec<_>>();
        let p = raw.predictors.into_iter().map(|(k, c)| (k, conv(c))).collect();
        (raw.sigma2, conv(raw.v), p, raw.degenerate_at, raw.warn_at)
    } else {
        let raw = run(&r.values()[..=n_max], n_max, prec, keep, &floor, &warn);
        (raw.sigma2, raw.v, raw.predictors, raw.degenerate_at, raw.warn_at)
    };
    let mut warnings = Vec::new();
    if let Some(k) = degenerate_at {
        warnings.push(format!("positivity lost at n = {k}: sigma2 fell below 2^-(bits-16) r(0); trace truncated at n = {}", k - 1));
    }
    if let Some(k) = warn_at {
        warnings.push(format!("precision-limited from n = {k}: sigma2 below 2^-(bits/2-16) r(0)"));
    }
    let err = r.max_error();
    if !err.is_zero() {
        if let Some(k) = sigma2.iter().position(|s| Float::with_val(53, s) < err) {
            warnings.push(format!(
                "covariance error bound {} exceeds sigma2_n from n = {k}",
                mp::fmt_digits(&err, 3)
            ));
        }
    }
    Ok(PredictionTrace { sigma2, verblunsky: v, predictors, prec, r0, real, degenerate_at, warnings })
}

pub fn levinson(r: &CovarianceSequence, n_max: usize) -> Result<PredictionTrace> {
    levinson_keep(r, n_max, &[])
}

/// Whether `T_n - xi I` is positive definite, checked through the shifted recursion.
fn shifted_positive(r: &[Float], n: usize, xi: &Float, prec: u32) -> bool {
    let mut rs: Vec<Float> = r[..=n].to_vec();
    rs[0] -= xi;
    if !(rs[0] > 0) {
        return false;
    }
    let zero = Float::new(prec);
    let raw = run(&rs, n, prec, &[], &zero, &zero);
    raw.degenerate_at.is_none()
}

/// Certifies `lambda_min(T_n) <= xi` by a single shifted recursion (`T_n - xi I` not positive definite).
pub fn min_eigenvalue_at_most(r: &CovarianceSequence, n: usize, xi: &Float) -> bool {
    let prec = r.prec();
    let rr: Vec<Float> = r.values()[..=n].iter().map(|z| z.re.clone()).collect();
    !shifted_positive(&rr, n, xi, prec)
}

/// `D_n / D_{n-1}` by Gaussian elimination with partial pivoting.
pub fn sigma2_via_determinants(r: &CovarianceSequence, n: usize) -> Result<Float> {
    if n > 12 {
        return Err(Error::InvalidArgument("determinant oracle limited to n <= 12".into()));
    }
    if r.n_max() < n {
        return Err(Error::InvalidArgument(format!("need r(0..={n})")));
    }
    let d_n = toeplitz_det(r, n);
    if n == 0 {
        return Ok(d_n.re);
    }
    let d_m = toeplitz_det(r, n - 1);
    if !(d_m.re > 0) {
        return Err(Error::Degenerate(format!("D_{} = {} is not positive", n - 1, mp::fmt_digits(&d_m.re, 6))));
    }
    Ok(Float::with_val(r.prec(), &d_n.re / &d_m.re))
}

/// Determinant of `T_n = [r(t-s)]`, `r(-k) = conj(r(k))`.
pub fn toeplitz_det(r: &CovarianceSequence, n: usize) -> Complex {
    let prec = r.prec();
    let m = n + 1;
    let entry = |s: usize, t: usize| -> Complex {
        if t >= s {
            r.get(t - s).clone()
        } else {
            r.get(s - t).conj()
        }
    };
    let mut a: Vec<Vec<Complex>> = (0..m).map(|s| (0..m).map(|t| entry(s, t)).collect()).collect();
    let mut det = Complex::one(prec);
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        if a[piv][col].abs().is_zero() {
            return Complex::zero(prec);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det = &det * &a[col][col];
        let inv = a[col][col].inv();
        for i in col + 1..m {
            let f = &a[i][col] * &inv;
            for j in col..m {
                let t = &f * &a[col][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    det
}

/// Monic `p_n` from the Szego recursion `p_{k+1} = z p_k - conj(v_{k+1}) p_k^*`, ascending coefficients.
pub fn optimal_polynomial(trace: &PredictionTrace, n: usize) -> Result<Vec<Complex>> {
    if n > trace.n_max() {
        return Err(Error::InvalidArgument(format!("trace only reaches n = {}", trace.n_max())));
    }
    let prec = trace.prec;
    let mut p = vec![Complex::one(prec)];
    for k in 0..n {
        let cv = trace.verblunsky[k].conj();
        let mut q = Vec::with_capacity(k + 2);
        for j in 0..=k + 1 {
            let shifted = if j >= 1 { p[j - 1].clone() } else { Complex::zero(prec) };
            let refl = if j <= k { &cv * &p[k - j].conj() } else { Complex::zero(prec) };
            q.push(&shifted - &refl);
        }
        p = q;
    }
    Ok(p)
}

/// `c_{1,n} ..= c_{n,n}` with `p_n(z) = z^n - sum_k c_k z^{n-k}`.
pub fn predictor_coefficients(trace: &PredictionTrace, n: usize) -> Result<Vec<Complex>> {
    if let Some(c) = trace.predictors.get(&n) {
        return Ok(c.clone());
    }
    let p = optimal_polynomial(trace, n)?;
    Ok((1..=n).map(|k| -p[n - k].clone()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    Bisection,
    Dense,
}

#[derive(Clone, Debug)]
pub struct EigenRecord {
    pub n: usize,
    pub lambda_min: Float,
    /// Bracket `[lo, hi]` around `lambda_min`.
    pub bracket: (Float, Float),
    pub lambda_max: Option<Float>,
    pub prec: u32,
    pub method: EigenMethod,
    /// Set when `lambda_min` lies below the precision floor and only `lo` is certified.
    pub lower_bound_only: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub n: usize,
    pub lambda_min: String,
    pub lo: String,
    pub hi: String,
    pub lambda_max: Option<String>,
    pub precision_bits: u32,
    pub method: EigenMethod,
    pub lower_bound_only: bool,
}

impl EigenRecord {
    pub fn row(&self) -> EigenRow {
        EigenRow {
            n: self.n,
            lambda_min: mp::fmt_float(&self.lambda_min),
            lo: mp::fmt_float(&self.bracket.0),
            hi: mp::fmt_float(&self.bracket.1),
            lambda_max: self.lambda_max.as_ref().map(mp::fmt_float),
            precision_bits: self.prec,
            method: self.method,
            lower_bound_only: self.lower_bound_only,
        }
    }
}

/// Smallest eigenvalue of `T_n` (size `n+1`) by bisection on the shift, to bracket width `tol`.
pub fn min_eigenvalue(r: &CovarianceSequence, n: usize, prec: u32, tol: f64) -> Result<EigenRecord> {
    if !r.is_real() {
        return Err(Error::InvalidArgument("eigenvalue bisection needs a real symmetric sequence".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if r.n_max() < n {
        return Err(Error::InvalidArgument(format!("need r(0..={n})")));
    }
    let rr: Vec<Float> = r.values()[..=n].iter().map(|z| Float::with_val(prec, &z.re)).collect();
    let r0 = rr[0].clone();
    let floor = Float::with_val(prec, &r0 * mp::pow2(prec, -(prec as i32) + 16));
    // sigma2_n bounds lambda_min from above
    let zero = Float::new(prec);
    let raw = run(&rr, n, prec, &[], &zero, &zero);
    let mut hi = if raw.degenerate_at.is_none() { Float::with_val(prec, &raw.sigma2[n]) } else { r0.clone() };
    hi *= 1.0 + 1e-12;
    if !shifted_positive(&rr, n, &zero, prec) {
        return Ok(EigenRecord {
            n,
            lambda_min: zero.clone(),
            bracket: (zero.clone(), hi),
            lambda_max: None,
            prec,
            method: EigenMethod::Bisection,
            lower_bound_only: true,
        });
    }
    // geometric descent to a certified lower bound
    let mut lo = Float::with_val(prec, &hi / 2u32);
    while !shifted_positive(&rr, n, &lo, prec) {
        hi = lo.clone();
        lo /= 2u32;
        if lo < floor {
            return Ok(EigenRecord {
                n,
                lambda_min: lo.clone(),
                bracket: (Float::new(prec), hi),
                lambda_max: None,
                prec,
                method: EigenMethod::Bisection,
                lower_bound_only: true,
            });
        }
    }
    let tol_f = mp::fl(prec, tol);
    let slack = Float::with_val(prec, &hi * mp::pow2(prec, -(prec as i32) + 24));
    while Float::with_val(prec, &hi - &lo) > tol_f && Float::with_val(prec, &hi - &lo) > slack {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if shifted_positive(&rr, n, &mid, prec) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = Float::with_val(prec, &lo + &hi) / 2u32;
    Ok(EigenRecord { n, lambda_min: mid, bracket: (lo, hi), lambda_max: None, prec, method: EigenMethod::Bisection, lower_bound_only: false })
}

/// Real symmetric `T_n` in double precision.
pub fn dense_matrix(r: &CovarianceSequence, n: usize) -> DMatrix<f64> {
    let vals: Vec<f64> = r.values()[..=n].iter().map(|z| z.re.to_f64()).collect();
    DMatrix::from_fn(n + 1, n + 1, |s, t| vals[s.abs_diff(t)])
}

/// All eigenvalues of `T_n` by a dense symmetric solve, ascending.
pub fn dense_eigenvalues(r: &CovarianceSequence, n: usize) -> Result<Vec<f64>> {
    if !r.is_real() {
        return Err(Error::InvalidArgument("dense solve implemented for real sequences".into()));
    }
    let m = dense_matrix(r, n);
    let eig = nalgebra::SymmetricEigen::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::Degenerate("dense eigensolver did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

pub fn dense_min_eigenvalue(r: &CovarianceSequence, n: usize) -> Result<EigenRecord> {
    let ev = dense_eigenvalues(r, n)?;
    let lo = mp::fl(53, ev[0]);
    Ok(EigenRecord {
        n,
        lambda_min: lo.clone(),
        bracket: (lo.clone(), lo),
        lambda_max: Some(mp::fl(53, *ev.last().unwrap())),
        prec: 53,
        method: EigenMethod::Dense,
        lower_bound_only: false,
    })
}

/// `[(1/(n+1)) sum_k lambda_k^m, (1/2pi) int (2 pi f(u))^m du]` per moment.
pub fn eigen_distribution_check(f: &SpectralDensity, n: usize, moments: &[u32]) -> Result<Vec<(f64, f64)>> {
    if n > 400 {
        return Err(Error::InvalidArgument("distribution check uses a dense solve; n <= 400".into()));
    }
    if !f.is_even() {
        return Err(Error::InvalidArgument("distribution check needs an even density".into()));
    }
    let prec = 128;
    let r = crate::covariance::covariances(f, n, prec, &mp::fl(prec, 1e-25))?;
    let ev = dense_eigenvalues(&r, n)?;
    let mut out = Vec::new();
    for &m in moments {
        let lhs = ev.iter().map(|x| x.powi(m as i32)).sum::<f64>() / (n + 1) as f64;
        let opts = Options::new(prec, mp::fl(prec, 1e-20));
        let pieces: Vec<(Float, Float)> = f.support().pieces().iter().map(|(a, b)| (a.to_float(prec), b.to_float(prec))).collect();
        let sing: Vec<Float> = f.singular_points().iter().map(|a| a.to_float(prec)).collect();
        let two_pi = mp::two_pi(prec);
        let (v, _) = quadrature::integrate_scalar(
            |x| {
                let s = Float::with_val(prec, f.eval_on_support(x) * &two_pi);
                Ok(Float::with_val(prec, rug::ops::Pow::pow(s, m)))
            },
            &pieces,
            &sing,
            &opts,
        )?;
        out.push((lhs, Float::with_val(prec, &v / &two_pi).to_f64()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    pub lambda_min: f64,
    pub sigma2: f64,
    pub upper: f64,
    /// `(sigma2 - lambda)/sigma2`
    pub lower_margin: f64,
    /// `(upper - sigma2)/sigma2`
    pub upper_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub holds: bool,
}

/// `lambda_{1,n} <= sigma2_n <= M lambda_{1,n} / lambda_{1,n-1}` with `M` the supremum of the
/// symbol `2 pi f`. `eigs` must contain consecutive `n`.
pub fn sandwich_check(trace: &PredictionTrace, eigs: &[EigenRecord], symbol_sup: f64) -> Result<SandwichReport> {
    let by_n: BTreeMap<usize, &EigenRecord> = eigs.iter().map(|e| (e.n, e)).collect();
    let mut rows = Vec::new();
    for (&n, e) in &by_n {
        if n == 0 || n > trace.n_max() {
            continue;
        }
        let Some(prev) = by_n.get(&(n - 1)) else { continue };
        let prec = trace.prec;
        let s = Float::with_val(prec, &trace.sigma2[n]);
        let lam = &e.lambda_min;
        let (lam_lo, lam_hi) = (&e.bracket.0, &e.bracket.1);
        let upper = Float::with_val(prec, lam_hi * symbol_sup) / &prev.bracket.0;
        // violation only if it exceeds the bracket widths and rounding
        let slack = Float::with_val(prec, &s * mp::pow2(prec, -(prec as i32) / 2));
        if Float::with_val(prec, lam_lo - &s) > slack {
            return Err(Error::Violation(format!(
                "lambda_min(T_{n}) = {} exceeds sigma2_{n} = {}",
                mp::fmt_digits(lam, 10),
                mp::fmt_digits(&s, 10)
            )));
        }
        if Float::with_val(prec, &s - &upper) > slack {
            return Err(Error::Violation(format!(
                "sigma2_{n} = {} exceeds M lambda_n/lambda_(n-1) = {}",
                mp::fmt_digits(&s, 10),
                mp::fmt_digits(&upper, 10)
            )));
        }
        let upper_mid = Float::with_val(prec, lam * symbol_sup) / &prev.lambda_min;
        rows.push(SandwichRow {
            n,
            lambda_min: lam.to_f64(),
            sigma2: s.to_f64(),
            upper: upper_mid.to_f64(),
            lower_margin: Float::with_val(prec, Float::with_val(prec, &s - lam) / &s).to_f64(),
            upper_margin: Float::with_val(prec, Float::with_val(prec, &upper_mid - &s) / &s).to_f64(),
        });
    }
    Ok(SandwichReport { rows, holds: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::covariances_ma1;
    use std::f64::consts::PI;

    #[test]
    fn white_noise_trace() {
        let r = CovarianceSequence::from_f64(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 128).unwrap();
        let t = levinson(&r, 5).unwrap();
        assert!(t.sigma2.iter().all(|s| *s == 1));
        assert!(t.verblunsky.iter().all(|v| v.re.is_zero() && v.im.is_zero()));
        let p = optimal_polynomial(&t, 3).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p[3].re == 1 && p[..3].iter().all(|z| z.re.is_zero()));
        assert_eq!(sigma2_via_determinants(&r, 5).unwrap(), 1);
    }

    #[test]
    fn ma1_unit_root_convention() {
        let r = covariances_ma1(1.0, 1.0, 60, 256).unwrap();
        let t = levinson(&r, 60).unwrap();
        for n in 0..=60 {
            let want = Float::with_val(256, (n + 2) as u32) / (n + 1) as u32;
            let rel = (Float::with_val(256, &t.sigma2[n] - &want) / &want).abs();
            assert!(rel < 1e-60, "n={n}");
        }
        let s4 = sigma2_via_determinants(&r, 4).unwrap();
        assert!((s4.to_f64() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn first_polynomial_is_minimal() {
        let r = CovarianceSequence::from_f64(&[2.0, 0.7, 0.1], 128).unwrap();
        let t = levinson(&r, 2).unwrap();
        let p = optimal_polynomial(&t, 1).unwrap();
        // p_1 = z - conj(v_1), v_1 = r(1)/r(0)
        assert!((p[0].re.to_f64() + 0.35).abs() < 1e-30);
        // ||z + c||^2 = r(0)(1 + c^2) + 2 c r(1), minimized over a grid
        let norm = |c: f64| 2.0 * (1.0 + c * c) + 2.0 * c * 0.7;
        let best = (-2000..=2000).map(|k| k as f64 / 1000.0).min_by(|a, b| norm(*a).partial_cmp(&norm(*b)).unwrap()).unwrap();
        assert!((best - p[0].re.to_f64()).abs() < 1e-3);
        assert!((norm(p[0].re.to_f64()) - t.sigma2[1].to_f64()).abs() < 1e-14);
        // v_{n+1} = -conj(p_{n+1}(0))
        for n in 1..=2 {
            let p = optimal_polynomial(&t, n).unwrap();
            assert!((&p[0] + &t.v(n).conj()).abs() < 1e-35);
        }
    }

    #[test]
    fn tridiagonal_eigenvalues() {
        let r = covariances_ma1(1.0, 1.0, 50, 128).unwrap();
        for n in [1, 5, 20, 50] {
            let e = min_eigenvalue(&r, n, 128, 1e-14).unwrap();
            let want = 2.0 - 2.0 * (PI / (n as f64 + 2.0)).cos();
            assert!((e.lambda_min.to_f64() - want).abs() < 1e-13, "n={n}");
            let d = dense_min_eigenvalue(&r, n).unwrap();
            assert!((d.lambda_min.to_f64() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_eigen_and_sandwich() {
        let r = CovarianceSequence::from_f64(&[1.0; 1].iter().copied().chain([0.0; 10]).collect::<Vec<_>>(), 128).unwrap();
        let t = levinson(&r, 10).unwrap();
        let eigs: Vec<EigenRecord> = (0..=10).map(|n| min_eigenvalue(&r, n, 128, 1e-20).unwrap()).collect();
        for e in &eigs {
            assert!((e.lambda_min.to_f64() - 1.0).abs() < 1e-15);
        }
        let rep = sandwich_check(&t, &eigs, 1.0).unwrap();
        assert!(rep.holds && rep.rows.len() == 10);
    }

    #[test]
    fn determinant_oracle_agrees() {
        let vals: Vec<f64> = (0..9).map(|t| 0.6f64.powi(t) + 0.3 * (-0.5f64).powi(t)).collect();
        let r = CovarianceSequence::from_f64(&vals, 128).unwrap();
        let t = levinson(&r, 8).unwrap();
        for n in 0..=8 {
            let d = sigma2_via_determinants(&r, n).unwrap();
            let rel = (Float::with_val(128, &d - &t.sigma2[n]) / &d).abs();
            assert!(rel < 1e-25, "n={n}: {rel}");
        }
    }

    #[test]
    fn degeneracy_is_flagged() {
        // r(t) = 1 for all t: a point mass, D_1 = 0
        let r = CovarianceSequence::from_f64(&[1.0, 1.0, 1.0, 1.0], 128).unwrap();
        let t = levinson(&r, 3).unwrap();
        assert_eq!(t.degenerate_at, Some(1));
        assert_eq!(t.n_max(), 0);
        assert!(sigma2_via_determinants(&r, 2).is_err());
    }

    #[test]
    fn csv_columns() {
        let r = covariances_ma1(0.5, 1.0, 3, 64).unwrap();
        let t = levinson(&r, 3).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("n,sigma2,v,ratio,nth_root\n0,1.25,,,\n1,"));
    }
}
