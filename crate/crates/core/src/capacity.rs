//! Transfinite diameters of arc unions and segments.

use crate::arcs::{Angle, ArcSet};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;
use std::cmp::Ordering;
use std::f64::consts::PI;

const PREC: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMethod {
    ClosedFormArc,
    ClosedFormSegment,
    RobinsonProjection,
    FeketeMapping,
    FeketePointsEstimate,
}

/// When `bracket` is set the exact value is unknown; `value` is then the Fekete estimate
/// clamped into the bracket if one was computed, else the lower end.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauResult {
    pub value: f64,
    pub method: TauMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
}

impl TauResult {
    fn exact(value: f64, method: TauMethod) -> Self {
        TauResult { value, method, n_points: None, bracket: None }
    }

    pub fn is_exact(&self) -> bool {
        self.bracket.is_none()
    }
}

fn sin_f(a: &Angle, q: u32) -> Float {
    // sin(a / q)
    Float::with_val(PREC, a.to_float(PREC) / q).sin()
}

/// `(tau / |a|)^(1/n)`: transfinite diameter of the preimage under a degree-`n` polynomial.
pub fn fekete_preimage_tau(tau_f: f64, n: u32, a: f64) -> Result<f64> {
    if !(tau_f >= 0.0) || n == 0 || a == 0.0 {
        return Err(Error::InvalidArgument("need tau >= 0, n >= 1, a != 0".into()));
    }
    Ok(preimage(&Float::with_val(PREC, tau_f), n, a))
}

fn preimage(tau: &Float, n: u32, a: f64) -> f64 {
    if n == 1 && a.abs() == 1.0 {
        return tau.to_f64();
    }
    let t = Float::with_val(PREC, tau / a.abs());
    if t.is_zero() {
        return 0.0;
    }
    Float::with_val(PREC, t.ln() / n).exp().to_f64()
}

pub fn tau_segment(a: f64, b: f64) -> Result<TauResult> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("segment [{a}, {b}] needs a < b")));
    }
    Ok(TauResult::exact((b - a) / 4.0, TauMethod::ClosedFormSegment))
}

/// `([m tau]^(1/n), [M tau]^(1/n))` for preimages under `p/q` with `m <= |q| <= M` on the set.
pub fn robinson_bounds_tau(tau_f: f64, n: u32, m: f64, big_m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && m <= big_m) || n == 0 || !(tau_f >= 0.0) {
        return Err(Error::InvalidArgument("need 0 < m <= M, n >= 1, tau >= 0".into()));
    }
    let root = |x: f64| preimage(&Float::with_val(PREC, x), n, 1.0);
    Ok((root(m * tau_f), root(big_m * tau_f)))
}

/// Projection onto the real axis of a conjugation-symmetric set, `tau = (2 tau(F^x))^(1/2)`.
pub fn robinson_project_tau(arcs: &ArcSet) -> Result<TauResult> {
    if !arcs.is_conjugate_symmetric() {
        return Err(Error::InvalidArgument("projection formula needs a set symmetric about the real axis".into()));
    }
    let mut segs: Vec<(Float, Float)> = Vec::new();
    for (lo, hi) in arcs.pieces() {
        let (a, b) = (lo.to_float(PREC), hi.to_float(PREC));
        let (ca, cb) = (a.clone().cos(), b.clone().cos());
        let mut top = if ca > cb { ca.clone() } else { cb.clone() };
        let mut bot = if ca < cb { ca } else { cb };
        if a <= 0 && b >= 0 {
            top = Float::with_val(PREC, 1);
        }
        let pi = crate::mp::pi(PREC);
        if b >= pi || a <= -pi.clone() {
            bot = Float::with_val(PREC, -1);
        }
        segs.push((bot, top));
    }
    segs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut merged: Vec<(Float, Float)> = Vec::new();
    for s in segs {
        match merged.last_mut() {
            Some(last) if s.0 <= last.1 => {
                if s.1 > last.1 {
                    last.1 = s.1;
                }
            }
            _ => merged.push(s),
        }
    }
    let tau_of = |len: Float| -> f64 { Float::with_val(PREC, len / 2u32).sqrt().to_f64() };
    if merged.len() == 1 {
        let (a, b) = &merged[0];
        let v = tau_of(Float::with_val(PREC, b - a));
        return Ok(TauResult::exact(v, TauMethod::RobinsonProjection));
    }
    let longest = merged.iter().map(|(a, b)| Float::with_val(PREC, b - a)).max_by(|x, y| x.partial_cmp(y).unwrap()).unwrap();
    let hull = Float::with_val(PREC, &merged.last().unwrap().1 - &merged[0].0);
    let lo = tau_of(longest);
    Ok(TauResult { value: lo, method: TauMethod::RobinsonProjection, n_points: None, bracket: Some((lo, tau_of(hull))) })
}

/// Closed forms where the configuration is recognized; otherwise a monotonicity bracket with a
/// Fekete estimate on 24 points.
pub fn tau_arcset(arcs: &ArcSet) -> TauResult {
    tau_arcset_with(arcs, Some(24))
}

pub fn tau_arcset_with(arcs: &ArcSet, estimate_points: Option<usize>) -> TauResult {
    reduce(arcs, estimate_points, 1)
}

fn reduce(arcs: &ArcSet, est: Option<usize>, depth: u32) -> TauResult {
    if let Some(v) = closed_form(arcs) {
        return TauResult::exact(v.to_f64(), TauMethod::ClosedFormArc);
    }
    // largest rotational symmetry: E = preimage of its image under z^k
    let m = arcs.len();
    for k in (2..=m).rev() {
        if m % k != 0 || !arcs.rotate(&Angle::pi_frac(2, k as i64)).eq(arcs) {
            continue;
        }
        let image = power_image(arcs, k);
        if let Some(v) = closed_form(&image) {
            return TauResult::exact(preimage(&v, k as u32, 1.0), TauMethod::ClosedFormArc);
        }
        let inner = reduce(&image, None, depth + 1);
        let root = |x: f64| preimage(&Float::with_val(PREC, x), k as u32, 1.0);
        let (lo, hi) = inner.bracket.unwrap_or((inner.value, inner.value));
        let mut out = TauResult { value: root(inner.value), method: TauMethod::FeketeMapping, n_points: None, bracket: Some((root(lo), root(hi))) };
        attach_estimate(arcs, est, &mut out);
        return out;
    }
    let (lo, hi) = monotone_bracket(arcs);
    let mut out = TauResult { value: lo, method: TauMethod::FeketePointsEstimate, n_points: None, bracket: Some((lo, hi)) };
    attach_estimate(arcs, est, &mut out);
    out
}

fn attach_estimate(arcs: &ArcSet, est: Option<usize>, out: &mut TauResult) {
    if let Some(n) = est {
        if let Ok(fk) = fekete_points(arcs, n) {
            let (lo, hi) = out.bracket.unwrap();
            out.value = fk.d_n.clamp(lo, hi);
            out.n_points = Some(n);
            out.method = TauMethod::FeketePointsEstimate;
        }
    }
}

fn power_image(arcs: &ArcSet, k: usize) -> ArcSet {
    if arcs.len() == k {
        let a = &arcs.arcs()[0];
        if a.half.mul_int(k as i64).cmp_value(&Angle::pi()) != Ordering::Less {
            return ArcSet::full();
        }
    }
    let mut raw: Vec<(Angle, Angle)> = Vec::new();
    for a in arcs.arcs() {
        let c = a.center.mul_int(k as i64).canonical();
        let h = a.half.mul_int(k as i64);
        if !raw.iter().any(|(rc, _)| *rc == c) {
            raw.push((c, h));
        }
    }
    ArcSet::new(raw).expect("image of a symmetric set is a valid arc set")
}

fn closed_form(arcs: &ArcSet) -> Option<Float> {
    if arcs.is_full() {
        return Some(Float::with_val(PREC, 1));
    }
    let list = arcs.arcs();
    match list.len() {
        // length 2 alpha -> sin(alpha / 2)
        1 => Some(sin_f(&list[0].length(), 4)),
        2 if list[0].half == list[1].half || list[0].half.cmp_value(&list[1].half) == Ordering::Equal => {
            // two arcs of length a at distance 2 d: (sin(a/2) sin(a/2 + d))^(1/2)
            let a = list[0].length();
            let d = arcs.gaps()[0].half();
            let s1 = sin_f(&a, 2);
            let s2 = Float::with_val(PREC, a.half().add(&d).to_float(PREC)).sin();
            Some(Float::with_val(PREC, s1 * s2).sqrt())
        }
        _ => None,
    }
}

/// `(sin(L_max / 4), sin((2 pi - g_max) / 4))` from the largest contained and the smallest
/// containing arc.
pub fn monotone_bracket(arcs: &ArcSet) -> (f64, f64) {
    if arcs.is_full() {
        return (1.0, 1.0);
    }
    let longest = arcs.arcs().iter().map(|a| a.length()).max_by(|x, y| x.cmp_value(y)).unwrap();
    let widest = arcs.gaps().into_iter().max_by(|x, y| x.cmp_value(y)).unwrap();
    let hull = Angle::pi_frac(2, 1).sub(&widest);
    (sin_f(&longest, 4).to_f64(), sin_f(&hull, 4).to_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct FeketeResult {
    /// Angles in `[-pi, pi)`, sorted.
    pub points: Vec<f64>,
    pub d_n: f64,
    /// No start converged within the sweep limit.
    pub local: bool,
}

const STARTS: u64 = 8;
const MAX_SWEEPS: usize = 400;
const GRID: usize = 64;

struct Param {
    pieces: Vec<(f64, f64)>,
    cum: Vec<f64>,
    total: f64,
}

impl Param {
    fn new(arcs: &ArcSet) -> Self {
        let pieces: Vec<(f64, f64)> = arcs.pieces().iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect();
        let mut cum = vec![0.0];
        for (a, b) in &pieces {
            cum.push(cum.last().unwrap() + (b - a));
        }
        let total = *cum.last().unwrap();
        Param { pieces, cum, total }
    }

    fn angle(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        let i = match self.cum.iter().position(|c| *c > s) {
            Some(i) => i - 1,
            None => self.pieces.len() - 1,
        };
        let i = i.min(self.pieces.len() - 1);
        (self.pieces[i].0 + (s - self.cum[i])).min(self.pieces[i].1)
    }

    /// Piece containing `s`, as a parameter interval.
    fn piece_of(&self, s: f64) -> (f64, f64) {
        for i in 0..self.pieces.len() {
            if s <= self.cum[i + 1] {
                return (self.cum[i], self.cum[i + 1]);
            }
        }
        (self.cum[self.pieces.len() - 1], self.total)
    }
}

fn log_dist(a: f64, b: f64) -> f64 {
    let s = (0.5 * (a - b)).sin().abs();
    (2.0 * s).ln()
}

fn energy(th: &[f64]) -> f64 {
    let mut e = 0.0;
    for j in 0..th.len() {
        for k in j + 1..th.len() {
            e += log_dist(th[j], th[k]);
        }
    }
    e
}

fn partial(th: &[f64], j: usize, x: f64) -> f64 {
    let mut e = 0.0;
    for (k, t) in th.iter().enumerate() {
        if k != j {
            e += log_dist(x, *t);
        }
    }
    e
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn ascend(p: &Param, seed: u64, n: usize) -> (Vec<f64>, f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * p.total).collect();
    let mut th: Vec<f64> = s.iter().map(|x| p.angle(*x)).collect();
    let mut e = energy(&th);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let before = e;
        for j in 0..n {
            let obj = |x: f64| partial(&th, j, p.angle(x));
            let current = obj(s[j]);
            let step = p.total / GRID as f64;
            let mut best = (s[j], current);
            for g in 0..=GRID {
                let x = g as f64 * step;
                let v = obj(x);
                if v > best.1 {
                    best = (x, v);
                }
            }
            let (lo_p, hi_p) = p.piece_of(best.0);
            let h = step.min(p.total);
            let (x, v) = golden(obj, (best.0 - h).max(lo_p), (best.0 + h).min(hi_p));
            if v > current {
                s[j] = x;
                th[j] = p.angle(x);
            }
        }
        e = energy(&th);
        if (e - before).abs() <= 1e-14 * e.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    (th, e, converged)
}

/// Approximate Fekete points on the arcs by multi-start coordinate ascent in angle space.
pub fn fekete_points(arcs: &ArcSet, n: usize) -> Result<FeketeResult> {
    if !(2..=64).contains(&n) {
        return Err(Error::InvalidArgument(format!("fekete_points needs 2 <= n <= 64, got {n}")));
    }
    let p = Param::new(arcs);
    let runs: Vec<(Vec<f64>, f64, bool)> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..STARTS).map(|seed| sc.spawn({
            let p = &p;
            move || ascend(p, seed, n)
        })).collect();
        handles.into_iter().map(|h| h.join().expect("fekete worker")).collect()
    });
    let local = runs.iter().all(|r| !r.2);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (mut th, e, _) in runs {
        for t in th.iter_mut() {
            if *t >= PI {
                *t -= 2.0 * PI;
            }
        }
        th.sort_by(|a, b| a.partial_cmp(b).unwrap());
        best = match best {
            None => Some((th, e)),
            Some((bt, be)) => {
                if e > be || (e == be && th < bt) {
                    Some((th, e))
                } else {
                    Some((bt, be))
                }
            }
        };
    }
    let (points, e) = best.unwrap();
    let d_n = (2.0 * e / (n * (n - 1)) as f64).exp();
    Ok(FeketeResult { points, d_n, local })
}
