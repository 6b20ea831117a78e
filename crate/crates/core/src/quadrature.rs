//! Adaptive nested Fejer panels for vector-valued integrands in configurable precision.

use crate::error::{Error, Result};
use crate::mp;
use rug::Float;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nested pair of Fejer type-2 rules on [-1, 1]: `2n - 1` fine nodes, the coarse rule
/// reusing every second one.
struct Rule {
    nodes: Vec<Float>,
    fine: Vec<Float>,
    coarse: Vec<Float>,
}

fn fejer_weights(n: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let pi = mp::pi(prec);
    let mut nodes = Vec::with_capacity(n - 1);
    let mut w = Vec::with_capacity(n - 1);
    for k in 1..n {
        let th = Float::with_val(prec, &pi * k as u32) / n as u32;
        let mut s = Float::new(prec);
        for j in 1..=n / 2 {
            let m = 2 * j as u32 - 1;
            s += Float::with_val(prec, &th * m).sin() / m;
        }
        let wk = s * th.clone().sin() * 4u32 / n as u32;
        nodes.push(th.cos());
        w.push(wk);
    }
    (nodes, w)
}

fn rule(n: usize, prec: u32) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(n, prec)) {
        return r.clone();
    }
    let (nodes, fine) = fejer_weights(2 * n, prec);
    let (_, cw) = fejer_weights(n, prec);
    let mut coarse = vec![Float::new(prec); nodes.len()];
    for (j, w) in cw.into_iter().enumerate() {
        coarse[2 * j + 1] = w;
    }
    let r = Arc::new(Rule { nodes, fine, coarse });
    cache.lock().unwrap().insert((n, prec), r.clone());
    r
}

/// Coarse rule order for a target of `digits` decimal digits.
pub fn order_for_digits(digits: f64) -> usize {
    match digits {
        d if d <= 20.0 => 16,
        d if d <= 45.0 => 32,
        d if d <= 110.0 => 64,
        d if d <= 250.0 => 128,
        _ => 256,
    }
}

pub struct Options {
    pub prec: u32,
    /// Absolute error target for every component.
    pub tol: Float,
    /// Upper bound on the initial panel width.
    pub max_width: f64,
    pub max_panels: usize,
}

impl Options {
    pub fn new(prec: u32, tol: Float) -> Self {
        Options { prec, tol, max_width: std::f64::consts::PI / 8.0, max_panels: 400_000 }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub values: Vec<Float>,
    /// Per-component accumulated error estimate.
    pub errors: Vec<Float>,
    pub panels: usize,
}

struct Panel {
    a: Float,
    b: Float,
}

/// Integrates `eval` (writing `dim` components) over the union of `intervals`.
/// `singular` points are mandatory breakpoints; the integrand is never sampled there.
pub fn integrate<F>(dim: usize, eval: F, intervals: &[(Float, Float)], singular: &[Float], opts: &Options) -> Result<QuadResult>
where
    F: Fn(&Float, &mut [Float]) -> Result<()>,
{
    let prec = opts.prec;
    let digits = -opts.tol.to_f64().log10();
    let rule = rule(order_for_digits(digits.max(1.0)), prec);

    // split at singular points and cap the width
    let mut panels: Vec<Panel> = Vec::new();
    let mut total = 0.0;
    let mut n_sides = 0usize;
    for (a, b) in intervals {
        let mut cuts = vec![a.clone()];
        let mut inner: Vec<&Float> = singular.iter().filter(|s| *s > a && *s < b).collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        inner.dedup_by(|x, y| x == y);
        cuts.extend(inner.into_iter().cloned());
        cuts.push(b.clone());
        for w in cuts.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if lo >= hi {
                continue;
            }
            if singular.contains(lo) {
                n_sides += 1;
            }
            if singular.contains(hi) {
                n_sides += 1;
            }
            let len = Float::with_val(prec, hi - lo);
            total += len.to_f64();
            let m = (len.to_f64() / opts.max_width).ceil().max(1.0) as usize;
            for k in 0..m {
                let pa = if k == 0 { lo.clone() } else { Float::with_val(prec, lo + Float::with_val(prec, &len * k as u32) / m as u32) };
                let pb = if k + 1 == m {
                    hi.clone()
                } else {
                    Float::with_val(prec, lo + Float::with_val(prec, &len * (k + 1) as u32) / m as u32)
                };
                panels.push(Panel { a: pa, b: pb });
            }
        }
    }
    panels.reverse();
    let mut values = vec![Float::new(prec); dim];
    let mut errors = vec![Float::new(53); dim];
    if total <= 0.0 {
        return Ok(QuadResult { values, errors, panels: 0 });
    }
    let tol = opts.tol.to_f64();
    let tol_f = Float::with_val(53, &opts.tol);
    let sing_tol = Float::with_val(53, &tol_f / (2 * n_sides.max(1)) as u32);
    let mut f_vals = vec![Float::new(prec); dim];
    let mut fine = vec![Float::new(prec); dim];
    let mut coarse = vec![Float::new(prec); dim];
    let mut processed = 0usize;
    let min_width = mp::pow2(53, -(prec as i32) + 8);
    let floor = mp::pow2(53, -4 * prec as i32);
    while let Some(p) = panels.pop() {
        processed += 1;
        // node placement error times the integrand slope near a breakpoint
        let scale = Float::with_val(53, p.a.abs_ref()).max(&Float::with_val(53, p.b.abs_ref())).to_f64();
        let approx_half = Float::with_val(53, &p.b - &p.a).to_f64() / 2.0;
        let raw_gap = singular.iter().map(|s| gap_to(s, &p.a, &p.b)).fold(f64::INFINITY, f64::min);
        let gap = raw_gap.max(approx_half * 1e-4);
        let extra = if scale > 0.0 && gap.is_finite() { (scale / gap).log2().ceil().max(0.0) as u32 } else { 0 };
        let wprec = prec + extra.min(3 * prec);
        let half = Float::with_val(wprec, &p.b - &p.a) / 2u32;
        let mid = Float::with_val(wprec, &p.a + &p.b) / 2u32;
        for v in fine.iter_mut().chain(coarse.iter_mut()) {
            *v = Float::new(prec);
        }
        for (k, x) in rule.nodes.iter().enumerate() {
            let lam = Float::with_val(wprec, &mid + Float::with_val(wprec, x * &half));
            eval(&lam, &mut f_vals)?;
            let cw = &rule.coarse[k];
            for i in 0..dim {
                if f_vals[i].is_zero() {
                    continue;
                }
                let t = Float::with_val(prec, &f_vals[i] * &rule.fine[k]);
                fine[i] += &t;
                if !cw.is_zero() {
                    coarse[i] += Float::with_val(prec, &f_vals[i] * cw);
                }
            }
        }
        let mut err = Float::new(53);
        let mut mag = Float::new(53);
        for i in 0..dim {
            fine[i] *= &half;
            coarse[i] *= &half;
            let e = Float::with_val(53, &fine[i] - &coarse[i]).abs();
            if e > err {
                err = e;
            }
            let m = Float::with_val(53, fine[i].abs_ref());
            if m > mag {
                mag = m;
            }
        }
        let width = Float::with_val(53, &half * 2u32).to_f64();
        let allowed = tol / 2.0 * width / total;
        // a breakpoint is only known to its last bit, so the true singularity may sit in any
        // panel within that distance
        let near_singular = raw_gap <= min_width.to_f64() * scale;
        // agreement at the rounding level cannot be improved by bisection
        let noise = Float::with_val(53, &mag * &min_width);
        let accept = err.to_f64() <= allowed
            || err <= noise
            || (near_singular && Float::with_val(53, &mag + &err) <= sing_tol)
            || err.is_zero();
        if accept {
            for i in 0..dim {
                values[i] += &fine[i];
                errors[i] += Float::with_val(53, &fine[i] - &coarse[i]).abs();
            }
            continue;
        }
        let w = Float::with_val(53, &half * 2u32);
        let too_narrow = if near_singular { w < floor } else { w < Float::with_val(53, &min_width * scale.min(raw_gap)) };
        if processed >= opts.max_panels || too_narrow {
            return Err(Error::Quadrature { a: p.a.to_f64(), b: p.b.to_f64(), bound: err.to_f64() });
        }
        panels.push(Panel { a: mid.clone(), b: p.b });
        panels.push(Panel { a: p.a, b: mid });
    }
    Ok(QuadResult { values, errors, panels: processed })
}

fn gap_to(s: &Float, a: &Float, b: &Float) -> f64 {
    if s < a {
        Float::with_val(53, a - s).to_f64()
    } else if s > b {
        Float::with_val(53, s - b).to_f64()
    } else {
        0.0
    }
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(f: F, intervals: &[(Float, Float)], singular: &[Float], opts: &Options) -> Result<(Float, Float)>
where
    F: Fn(&Float) -> Result<Float>,
{
    let r = integrate(
        1,
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        intervals,
        singular,
        opts,
    )?;
    Ok((r.values[0].clone(), r.errors[0].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exp() {
        let prec = 256;
        let opts = Options::new(prec, mp::pow2(prec, -200));
        let iv = [(mp::fl(prec, 0.0), mp::fl(prec, 1.0))];
        let (v, _) = integrate_scalar(|x| Ok(x.clone().exp()), &iv, &[], &opts).unwrap();
        let exact = mp::fl(prec, 1.0).exp() - 1u32;
        assert!(Float::with_val(prec, &v - &exact).abs() < 1e-58);
    }

    #[test]
    fn endpoint_singularity() {
        let prec = 192;
        let opts = Options::new(prec, mp::fl(prec, 1e-30));
        let iv = [(mp::fl(prec, 0.0), mp::fl(prec, 1.0))];
        let sing = [mp::fl(prec, 0.0)];
        // int_0^1 x^{-1/2} = 2
        let (v, _) = integrate_scalar(|x| Ok(x.clone().sqrt().recip()), &iv, &sing, &opts).unwrap();
        assert!((v.to_f64() - 2.0).abs() < 1e-14, "{v}");
        // int_0^1 ln x = -1
        let opts = Options::new(prec, mp::fl(prec, 1e-40));
        let (v, _) = integrate_scalar(|x| Ok(x.clone().ln()), &iv, &sing, &opts).unwrap();
        assert!(Float::with_val(prec, &v + 1u32).abs() < 1e-38, "{v}");
    }

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = fejer_weights(32, 128);
        let s: Float = w.iter().fold(Float::new(128), |acc, x| acc + x);
        assert!(Float::with_val(128, &s - 2u32).abs() < 1e-35);
    }
}
