//! Cursor and literal helpers shared by the density, factor and arc-set parsers.

use crate::error::{Error, Result};
use rug::ops::Pow;
use rug::{Integer, Rational};

pub struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn set_pos(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    pub fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let before = &self.src[..self.pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map(|i| self.pos - i).unwrap_or(self.pos + 1);
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = self.rest();
        let n = rest
            .char_indices()
            .take_while(|&(i, c)| c.is_ascii_alphabetic() || c == '_' || (i > 0 && c.is_ascii_digit()))
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        if n == 0 {
            return Err(self.error("expected identifier"));
        }
        self.pos += n;
        Ok(rest[..n].to_string())
    }

    /// Signed decimal (with optional exponent) or `n/d` fraction, converted exactly.
    pub fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return Err(self.error("expected number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                j += 1;
            }
            let k = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > k {
                i = j;
            }
        }
        let mut value = parse_decimal(&rest[..i]).ok_or_else(|| self.error("malformed number"))?;
        self.pos = start + i;
        // fraction n/d, but not a `/` that belongs to `pi/d`
        let save = self.pos;
        if self.rest().starts_with('/') {
            self.pos += 1;
            let r2 = self.rest();
            let m = r2.bytes().take_while(|b| b.is_ascii_digit()).count();
            if m > 0 {
                let den: Integer = r2[..m].parse().expect("digits");
                if den == 0 {
                    return Err(self.error("zero denominator"));
                }
                value /= Rational::from(den);
                self.pos += m;
            } else {
                self.pos = save;
            }
        }
        Ok(value)
    }

    pub fn number(&mut self) -> Result<f64> {
        Ok(rug::Float::with_val(53, self.rational()?).to_f64())
    }

    pub fn integer(&mut self) -> Result<i64> {
        let r = self.rational()?;
        if *r.denom() != 1 {
            return Err(self.error("expected integer"));
        }
        r.numer().to_i64().ok_or_else(|| self.error("integer out of range"))
    }
}

pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.contains('.') {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: Integer = if digits.is_empty() { Integer::new() } else { digits.parse().ok()? };
    let scale = exp - frac_part.len() as i64;
    let mut r = if scale >= 0 {
        num *= Integer::from(10).pow(scale as u32);
        Rational::from(num)
    } else {
        Rational::from((num, Integer::from(10).pow((-scale) as u32)))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Exact decimal when the denominator has only factors 2 and 5, otherwise `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d.is_divisible_u(2) {
        d /= 2;
        twos += 1;
    }
    while d.is_divisible_u(5) {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = twos.max(fives);
    let scaled = Rational::from(r * Rational::from(Integer::from(10).pow(k)));
    let n = scaled.numer().clone();
    let neg = n < 0;
    let mut s = Integer::from(n.abs_ref()).to_string();
    while s.len() <= k as usize {
        s.insert(0, '0');
    }
    let split = s.len() - k as usize;
    let out = format!("{}.{}", &s[..split], &s[split..]);
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

/// Shortest decimal for an f64 parameter (Rust's `{}` is round-trip exact).
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_exact() {
        let r = parse_decimal("1.5708").unwrap();
        assert_eq!(r, Rational::from((15708, 10000)));
        assert_eq!(fmt_rational(&r), "1.5708");
        assert_eq!(fmt_rational(&parse_decimal("-0.0625").unwrap()), "-0.0625");
        assert_eq!(fmt_rational(&Rational::from((1, 3))), "1/3");
        assert_eq!(parse_decimal("2.5e-3").unwrap(), Rational::from((25, 10000)));
    }

    #[test]
    fn cursor_fraction() {
        let mut c = Cursor::new("3/4pi");
        assert_eq!(c.rational().unwrap(), Rational::from((3, 4)));
        assert!(c.eat_str("pi"));
        let mut c = Cursor::new("2/x");
        assert_eq!(c.rational().unwrap(), Rational::from(2));
        assert_eq!(c.rest(), "/x");
    }
}
