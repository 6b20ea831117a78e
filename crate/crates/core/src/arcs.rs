//! Exact angles (rational multiples of pi plus rational radians) and unions of circular arcs.

use crate::error::{Error, Result};
use crate::grammar::{fmt_rational, Cursor};
use crate::mp;
use rug::{Float, Rational};
use std::cmp::Ordering;
use std::fmt;

/// `pi_part * pi + rad`, both parts exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    pi_part: Rational,
    rad: Rational,
}

const CMP_PREC: u32 = 512;

impl Angle {
    pub fn zero() -> Self {
        Angle { pi_part: Rational::new(), rad: Rational::new() }
    }

    pub fn pi() -> Self {
        Angle::pi_frac(1, 1)
    }

    pub fn pi_frac(n: i64, d: i64) -> Self {
        Angle { pi_part: Rational::from((n, d)), rad: Rational::new() }
    }

    pub fn from_parts(pi_part: Rational, rad: Rational) -> Self {
        Angle { pi_part, rad }
    }

    /// Exact value of the binary double.
    pub fn rad(x: f64) -> Self {
        let rad = Rational::from_f64(x).expect("finite angle");
        Angle { pi_part: Rational::new(), rad }
    }

    pub fn pi_part(&self) -> &Rational {
        &self.pi_part
    }

    pub fn rad_part(&self) -> &Rational {
        &self.rad
    }

    pub fn is_zero(&self) -> bool {
        self.pi_part == 0 && self.rad == 0
    }

    pub fn to_float(&self, prec: u32) -> Float {
        let mut x = mp::pi(prec + 8) * Float::with_val(prec + 8, &self.pi_part);
        x += Float::with_val(prec + 8, &self.rad);
        Float::with_val(prec, x)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(128).to_f64()
    }

    pub fn add(&self, o: &Angle) -> Angle {
        Angle {
            pi_part: Rational::from(&self.pi_part + &o.pi_part),
            rad: Rational::from(&self.rad + &o.rad),
        }
    }

    pub fn sub(&self, o: &Angle) -> Angle {
        Angle {
            pi_part: Rational::from(&self.pi_part - &o.pi_part),
            rad: Rational::from(&self.rad - &o.rad),
        }
    }

    pub fn neg(&self) -> Angle {
        Angle { pi_part: Rational::from(-&self.pi_part), rad: Rational::from(-&self.rad) }
    }

    pub fn scale(&self, q: &Rational) -> Angle {
        Angle { pi_part: Rational::from(&self.pi_part * q), rad: Rational::from(&self.rad * q) }
    }

    pub fn mul_int(&self, k: i64) -> Angle {
        self.scale(&Rational::from(k))
    }

    pub fn half(&self) -> Angle {
        self.scale(&Rational::from((1, 2)))
    }

    pub fn sign(&self) -> Ordering {
        if self.pi_part == 0 {
            return self.rad.cmp0();
        }
        if self.rad == 0 {
            return self.pi_part.cmp0();
        }
        // pi is irrational, so the sum vanishes only if both parts do
        self.to_float(CMP_PREC).cmp0().unwrap_or(Ordering::Equal)
    }

    pub fn cmp_value(&self, o: &Angle) -> Ordering {
        self.sub(o).sign()
    }

    /// Representative in (-pi, pi].
    pub fn canonical(&self) -> Angle {
        let v = self.to_float(CMP_PREC);
        let two_pi = mp::two_pi(CMP_PREC);
        let k = Float::with_val(CMP_PREC, &v / &two_pi).round();
        let k = k.to_integer().expect("finite");
        let mut a = self.sub(&Angle { pi_part: Rational::from(k * 2), rad: Rational::new() });
        let pi = Angle::pi();
        while a.cmp_value(&pi) == Ordering::Greater {
            a = a.sub(&Angle::pi_frac(2, 1));
        }
        while a.cmp_value(&pi.neg()) != Ordering::Greater {
            a = a.add(&Angle::pi_frac(2, 1));
        }
        a
    }

    pub fn parse(src: &str) -> Result<Angle> {
        let mut c = Cursor::new(src);
        let a = parse_angle(&mut c)?;
        if !c.at_end() {
            return Err(c.error("trailing input after angle"));
        }
        Ok(a)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.pi_part != 0 {
            let n = self.pi_part.numer();
            let d = self.pi_part.denom();
            if *n == -1 {
                out.push('-');
            } else if *n != 1 {
                out.push_str(&n.to_string());
            }
            out.push_str("pi");
            if *d != 1 {
                out.push('/');
                out.push_str(&d.to_string());
            }
        }
        if self.rad != 0 || self.pi_part == 0 {
            let r = fmt_rational(&self.rad);
            if self.pi_part != 0 && !r.starts_with('-') {
                out.push('+');
            }
            out.push_str(&r);
        }
        f.write_str(&out)
    }
}

/// angle := term (('+'|'-') term)* ; term := [num] 'pi' ['/' int] | num
pub fn parse_angle(c: &mut Cursor) -> Result<Angle> {
    let mut acc = Angle::zero();
    let mut sign = 1i64;
    if c.eat('-') {
        sign = -1;
    } else {
        c.eat('+');
    }
    loop {
        let t = parse_term(c)?;
        acc = if sign > 0 { acc.add(&t) } else { acc.sub(&t) };
        // a following sign continues the sum only when a term follows
        let save = c.pos();
        if c.eat('+') {
            sign = 1;
        } else if c.eat('-') {
            sign = -1;
        } else {
            break;
        }
        match c.peek() {
            Some(ch) if ch.is_ascii_digit() || ch == '.' || ch == 'p' => {}
            _ => {
                c.set_pos(save);
                break;
            }
        }
    }
    Ok(acc)
}

fn parse_term(c: &mut Cursor) -> Result<Angle> {
    let coef = if c.peek() == Some('p') { Rational::from(1) } else { c.rational()? };
    if c.eat_str("pi") {
        let mut q = coef;
        if c.eat('/') {
            let d = c.integer()?;
            if d == 0 {
                return Err(c.error("zero denominator"));
            }
            q /= Rational::from(d);
        }
        Ok(Angle { pi_part: q, rad: Rational::new() })
    } else {
        Ok(Angle { pi_part: Rational::new(), rad: coef })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub center: Angle,
    pub half: Angle,
}

impl Arc {
    pub fn start(&self) -> Angle {
        self.center.sub(&self.half)
    }

    pub fn end(&self) -> Angle {
        self.center.add(&self.half)
    }

    pub fn length(&self) -> Angle {
        self.half.mul_int(2)
    }
}

/// Finite union of closed arcs in canonical form: centers in (-pi, pi], touching arcs merged,
/// sorted by center.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn full() -> Self {
        ArcSet { arcs: vec![Arc { center: Angle::pi(), half: Angle::pi() }] }
    }

    pub fn single(center: Angle, half: Angle) -> Result<Self> {
        ArcSet::new(vec![(center, half)])
    }

    /// Arc `[lo, hi]` (counter-clockwise from lo to hi).
    pub fn from_endpoints(lo: Angle, hi: Angle) -> Result<Self> {
        let center = lo.add(&hi).half();
        let half = hi.sub(&lo).half();
        ArcSet::single(center, half)
    }

    pub fn new(raw: Vec<(Angle, Angle)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument("empty arc set".into()));
        }
        let pi = Angle::pi();
        let mut arcs = Vec::with_capacity(raw.len());
        for (c, h) in raw {
            if h.sign() != Ordering::Greater {
                return Err(Error::InvalidArgument(format!("arc half-length {h} must be positive")));
            }
            if h.cmp_value(&pi) == Ordering::Greater {
                return Err(Error::InvalidArgument(format!("arc half-length {h} exceeds pi")));
            }
            arcs.push(Arc { center: c.canonical(), half: h });
        }
        let mut total = Angle::zero();
        for a in &arcs {
            total = total.add(&a.length());
        }
        if total.cmp_value(&Angle::pi_frac(2, 1)) == Ordering::Greater {
            return Err(Error::InvalidArgument("total arc length exceeds 2pi".into()));
        }
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                let d = circular_distance(&arcs[i].center, &arcs[j].center);
                let reach = arcs[i].half.add(&arcs[j].half);
                if d.cmp_value(&reach) == Ordering::Less {
                    return Err(Error::InvalidArgument(format!(
                        "arcs ({}, {}) and ({}, {}) overlap",
                        arcs[i].center, arcs[i].half, arcs[j].center, arcs[j].half
                    )));
                }
            }
        }
        let mut set = ArcSet { arcs };
        set.merge_touching();
        set.arcs.sort_by(|a, b| a.center.cmp_value(&b.center));
        Ok(set)
    }

    fn merge_touching(&mut self) {
        'outer: loop {
            if self.arcs.len() == 1 {
                if self.arcs[0].half == Angle::pi() || self.arcs[0].half.cmp_value(&Angle::pi()) == Ordering::Equal {
                    *self = ArcSet::full();
                }
                return;
            }
            for i in 0..self.arcs.len() {
                for j in 0..self.arcs.len() {
                    if i == j {
                        continue;
                    }
                    // does arc j start where arc i ends?
                    let gap = self.arcs[j].start().sub(&self.arcs[i].end()).canonical();
                    if gap.is_zero() {
                        let half = self.arcs[i].half.add(&self.arcs[j].half);
                        let center = self.arcs[i].start().add(&half).canonical();
                        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                        self.arcs.remove(hi);
                        self.arcs.remove(lo);
                        self.arcs.push(Arc { center, half });
                        continue 'outer;
                    }
                }
            }
            return;
        }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].half == Angle::pi()
    }

    pub fn total_length(&self) -> Angle {
        self.arcs.iter().fold(Angle::zero(), |acc, a| acc.add(&a.length()))
    }

    pub fn rotate(&self, theta: &Angle) -> ArcSet {
        if self.is_full() {
            return self.clone();
        }
        let raw = self.arcs.iter().map(|a| (a.center.add(theta), a.half.clone())).collect();
        ArcSet::new(raw).expect("rotation preserves validity")
    }

    pub fn conjugate(&self) -> ArcSet {
        if self.is_full() {
            return self.clone();
        }
        let raw = self.arcs.iter().map(|a| (a.center.neg(), a.half.clone())).collect();
        ArcSet::new(raw).expect("conjugation preserves validity")
    }

    pub fn is_conjugate_symmetric(&self) -> bool {
        self.conjugate() == *self
    }

    /// Gaps between consecutive arcs (counter-clockwise), in arc order.
    pub fn gaps(&self) -> Vec<Angle> {
        if self.is_full() {
            return vec![];
        }
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                let next = &self.arcs[(i + 1) % n];
                let g = next.start().sub(&self.arcs[i].end()).canonical();
                if n == 1 || g.sign() != Ordering::Greater {
                    // a single arc, or the wrap, measures the full complement
                    if n == 1 {
                        Angle::pi_frac(2, 1).sub(&self.arcs[0].length())
                    } else {
                        g.add(&Angle::pi_frac(2, 1))
                    }
                } else {
                    g
                }
            })
            .collect()
    }

    /// Exact pieces `[lo, hi]` inside `[-pi, pi]`, arcs crossing `pi` split, sorted by `lo`.
    pub fn pieces(&self) -> Vec<(Angle, Angle)> {
        if self.is_full() {
            return vec![(Angle::pi().neg(), Angle::pi())];
        }
        let pi = Angle::pi();
        let two_pi = Angle::pi_frac(2, 1);
        let mut out = Vec::new();
        for a in &self.arcs {
            let lo = a.start();
            let hi = a.end();
            if lo.cmp_value(&pi.neg()) == Ordering::Less {
                out.push((lo.add(&two_pi), pi.clone()));
                out.push((pi.neg(), hi));
            } else if hi.cmp_value(&pi) == Ordering::Greater {
                out.push((lo, pi.clone()));
                out.push((pi.neg(), hi.sub(&two_pi)));
            } else {
                out.push((lo, hi));
            }
        }
        out.sort_by(|x, y| x.0.cmp_value(&y.0));
        out
    }

    pub fn contains(&self, lambda: &Float) -> bool {
        let prec = lambda.prec().max(64) + 16;
        self.pieces().iter().any(|(lo, hi)| {
            let lo = lo.to_float(prec);
            let hi = hi.to_float(prec);
            *lambda >= lo && *lambda <= hi
        })
    }

    pub fn contains_f64(&self, lambda: f64) -> bool {
        self.contains(&Float::with_val(64, lambda))
    }

    /// Whether every arc of `self` lies inside some arc of `other`.
    pub fn is_subset_of(&self, other: &ArcSet) -> bool {
        if other.is_full() {
            return true;
        }
        let mine = self.pieces();
        let theirs = other.pieces();
        mine.iter().all(|(lo, hi)| {
            theirs
                .iter()
                .any(|(a, b)| a.cmp_value(lo) != Ordering::Greater && hi.cmp_value(b) != Ordering::Greater)
        })
    }

    pub fn parse(src: &str) -> Result<ArcSet> {
        let mut c = Cursor::new(src);
        let s = parse_arcset(&mut c)?;
        if !c.at_end() {
            return Err(c.error("trailing input after arc set"));
        }
        Ok(s)
    }
}

/// |a - b| reduced to [0, pi].
pub fn circular_distance(a: &Angle, b: &Angle) -> Angle {
    let d = a.sub(b).canonical();
    if d.sign() == Ordering::Less {
        d.neg()
    } else {
        d
    }
}

impl fmt::Display for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return f.write_str("full");
        }
        f.write_str("[")?;
        for (i, a) in self.arcs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", a.center, a.half)?;
        }
        f.write_str("]")
    }
}

/// arcset := 'full' | '[' '(' angle ',' angle ')' (',' ...)* ']'
pub fn parse_arcset(c: &mut Cursor) -> Result<ArcSet> {
    if c.eat_str("full") {
        return Ok(ArcSet::full());
    }
    c.expect('[')?;
    let mut raw = Vec::new();
    loop {
        c.expect('(')?;
        let center = parse_angle(c)?;
        c.expect(',')?;
        let half = parse_angle(c)?;
        c.expect(')')?;
        raw.push((center, half));
        if !c.eat(',') {
            break;
        }
    }
    c.expect(']')?;
    ArcSet::new(raw).map_err(|e| match e {
        Error::InvalidArgument(m) => c.error(m),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_roundtrip() {
        for s in ["pi/2", "-pi/4", "3pi/4", "1.5708", "pi/2+0.25", "-pi-0.5", "0", "1/3"] {
            let a = Angle::parse(s).unwrap();
            assert_eq!(Angle::parse(&a.to_string()).unwrap(), a, "{s}");
        }
        assert_eq!(Angle::parse("pi/2").unwrap(), Angle::pi_frac(1, 2));
        assert_eq!(Angle::parse("0.5pi").unwrap(), Angle::pi_frac(1, 2));
    }

    #[test]
    fn canonical_range() {
        let a = Angle::pi_frac(3, 2).canonical();
        assert_eq!(a, Angle::pi_frac(-1, 2));
        assert_eq!(Angle::pi_frac(-1, 1).canonical(), Angle::pi());
        let b = Angle::rad(7.0).canonical();
        assert!((b.to_f64() - (7.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn overlap_rejected_touching_merged() {
        let q = Angle::pi_frac(1, 4);
        assert!(ArcSet::new(vec![(Angle::zero(), q.clone()), (Angle::pi_frac(1, 8), q.clone())]).is_err());
        let s = ArcSet::new(vec![(q.clone(), q.clone()), (q.neg(), q.clone())]).unwrap();
        assert_eq!(s, ArcSet::single(Angle::zero(), Angle::pi_frac(1, 2)).unwrap());
    }

    #[test]
    fn wraparound_split() {
        let s = ArcSet::single(Angle::pi(), Angle::pi_frac(1, 4)).unwrap();
        let p = s.pieces();
        assert_eq!(p.len(), 2);
        assert!(s.contains_f64(3.0) && s.contains_f64(-3.0) && !s.contains_f64(0.0));
    }

    #[test]
    fn membership_two_arcs() {
        // arcs [0.5, 1.5] and [-1.5, -0.5]
        let s = ArcSet::new(vec![(Angle::rad(1.0), Angle::rad(0.5)), (Angle::rad(-1.0), Angle::rad(0.5))]).unwrap();
        assert!(!s.contains_f64(0.3));
        assert!(s.contains_f64(0.8));
        assert!(s.is_conjugate_symmetric());
        assert_eq!(s.gaps().len(), 2);
    }

    #[test]
    fn order_independent_equality() {
        let a = (Angle::rad(1.0), Angle::rad(0.2));
        let b = (Angle::rad(-2.0), Angle::rad(0.3));
        let s1 = ArcSet::new(vec![a.clone(), b.clone()]).unwrap();
        let s2 = ArcSet::new(vec![b, a]).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(ArcSet::parse(&s1.to_string()).unwrap(), s1);
    }
}
