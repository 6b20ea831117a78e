//! Real-valued trigonometric polynomials `t(l) = sum_{|k|<=nu} c_k e^{ikl}` with `c_{-k} = conj(c_k)`.

use crate::arcs::Angle;
use crate::error::{Error, Result};
use crate::grammar::{fmt_rational, Cursor};
use crate::mp::{self, Complex};
use crate::poly;
use rug::ops::Pow;
use rug::{Float, Rational};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum TrigForm {
    /// `c_0..c_nu` as exact (re, im) pairs; `c_0` real.
    Coeffs(Vec<(Rational, Rational)>),
    /// `sin^{2k}(l - shift)`
    SinPow { k: u32, shift: Angle },
}

#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    form: TrigForm,
    certified: Option<Vec<(Angle, u32)>>,
}

impl PartialEq for TrigPolynomial {
    fn eq(&self, o: &Self) -> bool {
        self.form == o.form
    }
}

/// Result of a Fejer-Riesz factorization `t = |s(e^{il})|^2`.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// `s_0..s_nu`, `s_0 > 0`, no zeros in the open disc.
    pub s: Vec<Complex>,
    /// Zeros of `t` on the circle as (angle, order in `t`).
    pub circle_zeros: Vec<(Float, u32)>,
}

impl TrigPolynomial {
    pub fn constant(c: f64) -> Self {
        let c = Rational::from_f64(c).expect("finite constant");
        let nonneg = c >= 0;
        TrigPolynomial { form: TrigForm::Coeffs(vec![(c, Rational::new())]), certified: nonneg.then(Vec::new) }
    }

    pub fn one() -> Self {
        TrigPolynomial::constant(1.0)
    }

    pub fn sin_pow(k: u32, shift: Angle) -> Self {
        let shift = shift.canonical();
        let zeros = if k == 0 { vec![] } else { sin_zeros(&shift, 2 * k) };
        TrigPolynomial { form: TrigForm::SinPow { k, shift }, certified: Some(zeros) }
    }

    /// `sin^2(l - shift)`
    pub fn sin2(shift: Angle) -> Self {
        TrigPolynomial::sin_pow(1, shift)
    }

    /// Coefficients `c_0..c_nu` as (re, im) doubles, taken exactly.
    pub fn from_f64(coeffs: &[(f64, f64)]) -> Result<Self> {
        let c = coeffs
            .iter()
            .map(|&(re, im)| {
                let re = Rational::from_f64(re).ok_or_else(|| Error::InvalidArgument("non-finite coefficient".into()))?;
                let im = Rational::from_f64(im).ok_or_else(|| Error::InvalidArgument("non-finite coefficient".into()))?;
                Ok((re, im))
            })
            .collect::<Result<Vec<_>>>()?;
        TrigPolynomial::from_rationals(c)
    }

    pub fn from_rationals(mut c: Vec<(Rational, Rational)>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient list".into()));
        }
        if c[0].1 != 0 {
            return Err(Error::InvalidArgument("c_0 must be real".into()));
        }
        while c.len() > 1 && c.last().map(|(a, b)| *a == 0 && *b == 0).unwrap_or(false) {
            c.pop();
        }
        Ok(TrigPolynomial { form: TrigForm::Coeffs(c), certified: None })
    }

    pub fn form(&self) -> &TrigForm {
        &self.form
    }

    pub fn degree(&self) -> usize {
        match &self.form {
            TrigForm::Coeffs(c) => c.len() - 1,
            TrigForm::SinPow { k, .. } => 2 * *k as usize,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn constant_value(&self) -> Option<f64> {
        match &self.form {
            TrigForm::Coeffs(c) if c.len() == 1 => Some(Float::with_val(53, &c[0].0).to_f64()),
            TrigForm::SinPow { k: 0, .. } => Some(1.0),
            _ => None,
        }
    }

    pub fn is_nonneg_certified(&self) -> bool {
        self.certified.is_some()
    }

    /// Runs the Fejer-Riesz factorization and records the circle zeros.
    pub fn certify_nonnegative(mut self, prec: u32) -> Result<Self> {
        if self.certified.is_some() {
            return Ok(self);
        }
        let f = self.factor(prec)?;
        let zeros = f.circle_zeros.iter().map(|(a, m)| (snap_angle(a), *m)).collect();
        self.certified = Some(zeros);
        Ok(self)
    }

    /// Zeros on the circle with their orders, when known.
    pub fn zeros(&self) -> Option<&[(Angle, u32)]> {
        self.certified.as_deref()
    }

    pub fn is_even(&self) -> bool {
        match &self.form {
            TrigForm::Coeffs(c) => c.iter().all(|(_, im)| *im == 0),
            TrigForm::SinPow { shift, .. } => {
                let two = shift.mul_int(2);
                two.rad_part().clone() == 0 && *two.pi_part().denom() == 1
            }
        }
    }

    /// `t^2`, exact.
    pub fn square(&self) -> TrigPolynomial {
        match &self.form {
            TrigForm::SinPow { k, shift } => TrigPolynomial::sin_pow(2 * k, shift.clone()),
            TrigForm::Coeffs(c) => {
                let nu = c.len() - 1;
                let mut full: Vec<(Rational, Rational)> = c[1..]
                    .iter()
                    .rev()
                    .map(|(re, im)| (re.clone(), Rational::from(-im)))
                    .collect();
                full.extend(c.iter().cloned());
                let n = full.len();
                let mut out = vec![(Rational::new(), Rational::new()); 2 * n - 1];
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = &full[i];
                        let (x, y) = &full[j];
                        out[i + j].0 += Rational::from(a * x) - Rational::from(b * y);
                        out[i + j].1 += Rational::from(a * y) + Rational::from(b * x);
                    }
                }
                // index of the constant term is 2 nu
                let half = out[2 * nu..].to_vec();
                TrigPolynomial::from_rationals(half).expect("square is real-valued")
            }
        }
    }

    /// `c_0..c_nu` at the given precision.
    pub fn coeffs(&self, prec: u32) -> Vec<Complex> {
        match &self.form {
            TrigForm::Coeffs(c) => c
                .iter()
                .map(|(re, im)| Complex::new(mp::from_rational(prec, re), mp::from_rational(prec, im)))
                .collect(),
            TrigForm::SinPow { k, shift } => {
                // sin^2(x) = 1/2 - (e^{2ix} + e^{-2ix})/4 with x = l - shift
                let w = prec + 16;
                let rot = Complex::cis(&(shift.to_float(w) * -2i32)).scale(&mp::fl(w, -0.25));
                let mut base = vec![Complex::zero(w); 5];
                base[0] = rot.conj();
                base[2] = Complex::real(mp::fl(w, 0.5));
                base[4] = rot;
                let mut acc = vec![Complex::one(w)];
                for _ in 0..*k {
                    acc = poly::mul(&acc, &base);
                }
                let nu = 2 * *k as usize;
                acc[nu..].iter().map(|z| z.with_prec(prec)).collect()
            }
        }
    }

    /// Laurent coefficients `c_{-nu}..c_nu`.
    pub fn laurent(&self, prec: u32) -> Vec<Complex> {
        let c = self.coeffs(prec);
        let mut out: Vec<Complex> = c[1..].iter().rev().map(|z| z.conj()).collect();
        out.extend(c);
        out
    }

    pub fn eval(&self, lambda: &Float) -> Float {
        let prec = lambda.prec();
        match &self.form {
            TrigForm::SinPow { k, shift } => {
                let x = Float::with_val(prec, lambda - &shift.to_float(prec));
                let s = x.sin();
                Float::with_val(prec, s.square().pow(*k))
            }
            TrigForm::Coeffs(c) => {
                // near a zero the sum cancels; retry with the bits lost added back
                let scale: f64 = c.iter().map(|(re, im)| re.to_f64().abs() + im.to_f64().abs()).sum::<f64>() * 2.0;
                let mut w = prec + 32;
                loop {
                    let x = Float::with_val(w, lambda);
                    let v = eval_coeffs(&self.coeffs(w), &x);
                    let lost = if v.is_zero() { w as f64 } else { (scale / v.to_f64().abs()).log2().max(0.0) };
                    if lost + 16.0 < (w - prec) as f64 || w > 4 * prec + 256 {
                        return Float::with_val(prec, v);
                    }
                    w = prec + lost.ceil() as u32 + 48;
                    if v.is_zero() {
                        w = 2 * w;
                    }
                }
            }
        }
    }

    pub fn eval_f64(&self, lambda: f64) -> f64 {
        self.eval(&mp::fl(64, lambda)).to_f64()
    }

    /// Fejer-Riesz factorization at working precision `prec`.
    pub fn factor(&self, prec: u32) -> Result<Factorization> {
        if let TrigForm::SinPow { k, shift } = &self.form {
            return Ok(sin_pow_factor(*k, shift, prec));
        }
        let nu = self.degree();
        let c = self.coeffs(prec);
        if nu == 0 {
            let c0 = c[0].re.clone();
            if c0.is_sign_negative() && !c0.is_zero() {
                return Err(Error::Negative { witness: 0.0, value: c0.to_f64() });
            }
            return Ok(Factorization { s: vec![Complex::real(c0.sqrt())], circle_zeros: vec![] });
        }
        let scale = c.iter().map(|z| z.abs().to_f64()).fold(0.0, f64::max);
        // grid scan for a negativity witness
        let grid = 64 * nu;
        let slack = scale * mp::pow2(64, -(prec as i32) + 24).to_f64() * (nu as f64 + 1.0);
        for j in 0..grid {
            let lam = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / grid as f64;
            let v = eval_coeffs(&c, &mp::fl(prec, lam));
            if v.to_f64() < -slack {
                return Err(Error::Negative { witness: lam, value: v.to_f64() });
            }
        }
        let q = 4 * prec + 64;
        let lc = self.laurent(q);
        let r = poly::roots(&lc)?;
        let snap_tol = mp::pow2(64, -((prec / 2) as i32)).to_f64();
        let mut outside = Vec::new();
        let mut on_circle = Vec::new();
        for z in r {
            let m = z.abs().to_f64();
            if (m - 1.0).abs() <= snap_tol {
                on_circle.push(z);
            } else if m > 1.0 {
                outside.push(z);
            }
        }
        let clusters = cluster(&on_circle, snap_tol);
        let mut chosen = outside.clone();
        let mut circle_zeros = Vec::new();
        for cl in &clusters {
            if cl.len() % 2 == 1 {
                let ang = centroid(cl).arg().to_f64();
                let mut worst = (ang, f64::INFINITY);
                for d in [1e-6, 1e-4, 1e-3, 1e-2] {
                    for l in [ang - d, ang + d] {
                        let v = eval_coeffs(&c, &mp::fl(prec, l)).to_f64();
                        if v < worst.1 {
                            worst = (l, v);
                        }
                    }
                }
                return Err(Error::Negative { witness: worst.0, value: worst.1 });
            }
            let cen = centroid(cl);
            let unit = cen.scale(&cen.abs().recip());
            for _ in 0..cl.len() / 2 {
                chosen.push(unit.clone());
            }
            circle_zeros.push((Float::with_val(prec, unit.arg()), cl.len() as u32));
        }
        if chosen.len() != nu {
            return Err(Error::Factorization(format!(
                "root split gives {} roots for degree {nu} (outside {}, on circle {})",
                chosen.len(),
                outside.len(),
                on_circle.len()
            )));
        }
        // |C|^2 = |c_nu| / prod_{outside} |z|
        let lead_abs = lc[2 * nu].abs();
        let mut prod_out = mp::one(q);
        for z in &outside {
            prod_out *= z.abs();
        }
        let c_abs = Float::with_val(q, &lead_abs / &prod_out).sqrt();
        let mut u = Complex::one(q);
        for z in &chosen {
            u = &u * &(-z.clone());
        }
        let phase = u.conj().scale(&u.abs().recip());
        let lead = phase.scale(&c_abs);
        let s_hi = poly::from_roots(&lead, &chosen);
        let s: Vec<Complex> = s_hi.iter().map(|z| z.with_prec(prec)).collect();
        // residual check on a grid
        let tol = scale * mp::pow2(64, -(prec as i32) / 2).to_f64();
        for j in 0..grid {
            let lam = mp::fl(prec, -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / grid as f64);
            let z = Complex::cis(&lam);
            let sv = poly::horner(&s, &z).norm_sqr();
            let tv = eval_coeffs(&c, &lam);
            let diff = Float::with_val(prec, &sv - &tv).abs().to_f64();
            if diff > tol {
                return Err(Error::Factorization(format!("reconstruction residual {diff:e} at lambda = {}", lam.to_f64())));
            }
        }
        circle_zeros.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Factorization { s, circle_zeros })
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut c = Cursor::new(src);
        let t = parse_trig(&mut c)?;
        if !c.at_end() {
            return Err(c.error("trailing input after trigonometric polynomial"));
        }
        Ok(t)
    }
}

pub fn eval_coeffs(c: &[Complex], lambda: &Float) -> Float {
    let prec = lambda.prec();
    let mut acc = Float::with_val(prec, &c[0].re);
    if c.len() == 1 {
        return acc;
    }
    let z = Complex::cis(lambda);
    let mut zk = z.clone();
    let mut sum = Float::new(prec);
    for ck in &c[1..] {
        let term = ck * &zk;
        sum += &term.re;
        zk = &zk * &z;
    }
    acc += sum * 2u32;
    acc
}

fn centroid(cl: &[Complex]) -> Complex {
    let prec = cl[0].prec();
    let mut s = Complex::zero(prec);
    for z in cl {
        s = &s + z;
    }
    s.scale(&Float::with_val(prec, cl.len()).recip())
}

fn cluster(pts: &[Complex], tol: f64) -> Vec<Vec<Complex>> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (&pts[i] - &pts[j]).abs().to_f64() <= tol {
                let a = find(&mut label, i);
                let b = find(&mut label, j);
                label[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex>> = Default::default();
    for i in 0..n {
        let r = find(&mut label, i);
        groups.entry(r).or_default().push(pts[i].clone());
    }
    groups.into_values().collect()
}

/// s(z) = ((1 - e^{-2i shift} z^2)/2)^k
fn sin_pow_factor(k: u32, shift: &Angle, prec: u32) -> Factorization {
    let w = prec + 16;
    let rot = Complex::cis(&(shift.to_float(w) * -2i32)).scale(&mp::fl(w, -0.5));
    let base = vec![Complex::real(mp::fl(w, 0.5)), Complex::zero(w), rot];
    let mut s = vec![Complex::one(w)];
    for _ in 0..k {
        s = poly::mul(&s, &base);
    }
    let zeros = sin_zeros(shift, 2 * k)
        .into_iter()
        .map(|(a, m)| (a.to_float(prec), m))
        .collect();
    Factorization { s: s.into_iter().map(|z| z.with_prec(prec)).collect(), circle_zeros: zeros }
}

fn sin_zeros(shift: &Angle, order: u32) -> Vec<(Angle, u32)> {
    let a = shift.canonical();
    let b = shift.add(&Angle::pi()).canonical();
    let mut z = vec![(a, order), (b, order)];
    z.sort_by(|x, y| x.0.cmp_value(&y.0));
    z
}

/// Snaps a numerically located zero onto a nearby rational multiple of pi.
fn snap_angle(a: &Float) -> Angle {
    let x = a.to_f64();
    for d in 1..=24i64 {
        let k = (x * d as f64 / std::f64::consts::PI).round() as i64;
        let cand = Angle::pi_frac(k, d);
        if (cand.to_f64() - x).abs() < 1e-14 {
            return cand.canonical();
        }
    }
    Angle::rad(x)
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            TrigForm::SinPow { k, shift } => {
                if *k == 1 && shift.is_zero() {
                    f.write_str("sin2")
                } else if *k == 1 {
                    write!(f, "sin2({shift})")
                } else {
                    write!(f, "sinpow({k},{shift})")
                }
            }
            TrigForm::Coeffs(c) => {
                if c.len() == 1 && c[0].0 == 1 {
                    return f.write_str("one");
                }
                if c.len() == 1 {
                    return write!(f, "const({})", fmt_rational(&c[0].0));
                }
                f.write_str("trig[")?;
                for (i, (re, im)) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "({},{})", fmt_rational(re), fmt_rational(im))?;
                }
                f.write_str("]")
            }
        }
    }
}

/// trig := 'one' | 'const(' num ')' | 'sin2' ['(' angle ')'] | 'sinpow(' int ',' angle ')'
///       | 'trig[' '(' num ',' num ')' (',' ...)* ']'
pub fn parse_trig(c: &mut Cursor) -> Result<TrigPolynomial> {
    let start = c.pos();
    let id = c.ident()?;
    match id.as_str() {
        "one" => Ok(TrigPolynomial::one()),
        "const" => {
            c.expect('(')?;
            let v = c.rational()?;
            c.expect(')')?;
            let nonneg = v >= 0;
            let t = TrigPolynomial::from_rationals(vec![(v, Rational::new())])?;
            Ok(TrigPolynomial { certified: nonneg.then(Vec::new), ..t })
        }
        "sin2" => {
            let shift = if c.eat('(') {
                let a = crate::arcs::parse_angle(c)?;
                c.expect(')')?;
                a
            } else {
                Angle::zero()
            };
            Ok(TrigPolynomial::sin2(shift))
        }
        "sinpow" => {
            c.expect('(')?;
            let k = c.integer()?;
            if !(0..=64).contains(&k) {
                return Err(c.error("sinpow order out of range"));
            }
            c.expect(',')?;
            let a = crate::arcs::parse_angle(c)?;
            c.expect(')')?;
            Ok(TrigPolynomial::sin_pow(k as u32, a))
        }
        "trig" => {
            c.expect('[')?;
            let mut v = Vec::new();
            loop {
                c.expect('(')?;
                let re = c.rational()?;
                c.expect(',')?;
                let im = c.rational()?;
                c.expect(')')?;
                v.push((re, im));
                if !c.eat(',') {
                    break;
                }
            }
            c.expect(']')?;
            TrigPolynomial::from_rationals(v).map_err(|e| c.error(e.to_string()))
        }
        _ => {
            c.set_pos(start);
            Err(c.error(format!("unknown trigonometric polynomial '{id}'")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin2_coefficients_match_eval() {
        let t = TrigPolynomial::sin2(Angle::rad(1.0));
        let c = t.coeffs(128);
        for &l in &[-2.0, 0.3, 1.7] {
            let x = mp::fl(128, l);
            let a = eval_coeffs(&c, &x).to_f64();
            assert!((a - (l - 1.0f64).sin().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_minus_two_cos() {
        let t = TrigPolynomial::from_f64(&[(2.0, 0.0), (-1.0, 0.0)]).unwrap();
        let f = t.factor(128).unwrap();
        assert!((f.s[0].re.to_f64() - 1.0).abs() < 1e-30);
        assert!((f.s[1].re.to_f64() + 1.0).abs() < 1e-30);
        assert_eq!(f.circle_zeros.len(), 1);
        assert_eq!(f.circle_zeros[0].1, 2);
        let t = t.certify_nonnegative(128).unwrap();
        assert_eq!(t.zeros().unwrap()[0].0, Angle::zero());
    }

    #[test]
    fn negative_rejected_with_witness() {
        // cos(l) changes sign
        let t = TrigPolynomial::from_f64(&[(0.0, 0.0), (0.5, 0.0)]).unwrap();
        match t.factor(128) {
            Err(Error::Negative { witness, .. }) => assert!(witness.cos() < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generic_factor_matches_sin2() {
        // sin^2(l - pi/4) = 1/2 + (i/4) e^{2il} + conj
        let generic = TrigPolynomial::from_rationals(vec![
            (Rational::from((1, 2)), Rational::new()),
            (Rational::new(), Rational::new()),
            (Rational::new(), Rational::from((1, 4))),
        ])
        .unwrap();
        let f = generic.factor(256).unwrap();
        assert!((f.s[0].norm_sqr().to_f64() - 0.25).abs() < 1e-30);
        assert_eq!(f.circle_zeros.len(), 2);
        let closed = TrigPolynomial::sin2(Angle::pi_frac(1, 4)).factor(256).unwrap();
        for (a, b) in f.s.iter().zip(&closed.s) {
            assert!((a - b).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn grammar_roundtrip() {
        for s in ["sin2", "sin2(1)", "sinpow(2,pi/3)", "one", "const(2.5)", "trig[(2,0),(-1,0.5)]"] {
            let t = TrigPolynomial::parse(s).unwrap();
            assert_eq!(TrigPolynomial::parse(&t.to_string()).unwrap(), t, "{s}");
        }
    }
}
