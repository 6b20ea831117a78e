//! Complex polynomials in ascending coefficient order and Aberth-Ehrlich root finding.

use crate::error::{Error, Result};
use crate::mp::{self, Complex};
use rug::Float;

pub fn horner(coeffs: &[Complex], z: &Complex) -> Complex {
    let prec = z.prec();
    let mut acc = Complex::zero(prec);
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Value and derivative together.
fn horner_d(coeffs: &[Complex], z: &Complex) -> (Complex, Complex) {
    let prec = z.prec();
    let mut p = Complex::zero(prec);
    let mut d = Complex::zero(prec);
    for c in coeffs.iter().rev() {
        d = &(&d * z) + &p;
        p = &(&p * z) + c;
    }
    (p, d)
}

pub fn mul(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let prec = a[0].prec();
    let mut out = vec![Complex::zero(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j].mul_add_assign(x, y);
        }
    }
    out
}

/// `lead * prod (z - r)` in ascending order.
pub fn from_roots(lead: &Complex, roots: &[Complex]) -> Vec<Complex> {
    let prec = lead.prec();
    let mut p = vec![lead.clone()];
    for r in roots {
        let factor = vec![-r.clone(), Complex::one(prec)];
        p = mul(&p, &factor);
    }
    p
}

/// All roots of a polynomial with nonzero leading coefficient, at the coefficients' precision.
pub fn roots(coeffs: &[Complex]) -> Result<Vec<Complex>> {
    let mut c: Vec<Complex> = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|x| x.re.is_zero() && x.im.is_zero()).unwrap_or(false) {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return Ok(vec![]);
    }
    let prec = c[0].prec();
    // exact roots at the origin
    let mut zeros_at_origin = 0;
    while c.len() > 1 && c[0].re.is_zero() && c[0].im.is_zero() {
        c.remove(0);
        zeros_at_origin += 1;
    }
    let d = c.len() - 1;
    let mut out: Vec<Complex> = (0..zeros_at_origin).map(|_| Complex::zero(prec)).collect();
    if d == 0 {
        return Ok(out);
    }
    // monic
    let lead = c[d].clone();
    let c: Vec<Complex> = c.iter().map(|x| x.div(&lead)).collect();
    let r0 = {
        let a0 = c[0].abs().to_f64();
        a0.powf(1.0 / d as f64).max(1e-3)
    };
    let mut z: Vec<Complex> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            let rad = r0 * (1.0 + 0.01 * k as f64 / d as f64);
            Complex::from_f64(prec, rad * th.cos(), rad * th.sin())
        })
        .collect();
    let tiny = mp::pow2(64, -(prec as i32) + 12).to_f64();
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for _iter in 0..(200 + 8 * prec as usize) {
        let mut max_corr: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = horner_d(&c, &z[i]);
            if p.re.is_zero() && p.im.is_zero() {
                continue;
            }
            let newton = p.div(&dp);
            let mut s = Complex::zero(prec);
            for j in 0..d {
                if j != i {
                    let diff = &z[i] - &z[j];
                    if diff.re.is_zero() && diff.im.is_zero() {
                        continue;
                    }
                    s = &s + &diff.inv();
                }
            }
            let denom = &Complex::one(prec) - &(&newton * &s);
            let corr = if denom.re.is_zero() && denom.im.is_zero() { newton } else { newton.div(&denom) };
            let mag = corr.abs().to_f64() / z[i].abs().to_f64().max(1.0);
            max_corr = max_corr.max(mag);
            z[i] = &z[i] - &corr;
        }
        if !max_corr.is_finite() {
            return Err(Error::Factorization("root iteration diverged".into()));
        }
        if max_corr <= tiny {
            break;
        }
        if max_corr < 0.5 * best {
            best = max_corr;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 60 && best < 1e-6 {
                break;
            }
        }
    }
    out.extend(z);
    Ok(out)
}

/// Real roots of real-coefficient polynomials: roots whose imaginary part is below `tol`.
pub fn real_parts_within(roots: &[Complex], tol: &Float) -> Vec<Float> {
    roots.iter().filter(|r| r.im.clone().abs() <= *tol).map(|r| r.re.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(prec: u32, re: f64, im: f64) -> Complex {
        Complex::from_f64(prec, re, im)
    }

    #[test]
    fn quadratic_roots() {
        let p = 128;
        // z^2 + 1
        let r = roots(&[c(p, 1.0, 0.0), c(p, 0.0, 0.0), c(p, 1.0, 0.0)]).unwrap();
        let mut ims: Vec<f64> = r.iter().map(|z| z.im.to_f64()).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-30 && (ims[1] - 1.0).abs() < 1e-30);
    }

    #[test]
    fn reconstruct_from_roots() {
        let p = 192;
        let coeffs = vec![c(p, 2.0, 1.0), c(p, -3.0, 0.5), c(p, 0.0, 0.0), c(p, 1.5, -0.25), c(p, 1.0, 0.0)];
        let r = roots(&coeffs).unwrap();
        let back = from_roots(&coeffs[4], &r);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs().to_f64() < 1e-40);
        }
    }

    #[test]
    fn double_root_cluster() {
        let p = 256;
        // (z-1)^2 (z+2)
        let coeffs = from_roots(&c(p, 1.0, 0.0), &[c(p, 1.0, 0.0), c(p, 1.0, 0.0), c(p, -2.0, 0.0)]);
        let r = roots(&coeffs).unwrap();
        let near_one = r.iter().filter(|z| (*z - &c(p, 1.0, 0.0)).abs().to_f64() < 1e-30).count();
        assert_eq!(near_one, 2);
    }
}
