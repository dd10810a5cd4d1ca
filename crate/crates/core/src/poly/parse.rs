//! Text grammar for polynomials.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/')? unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' natural)?
//! atom  := natural | ident | '(' expr ')'
//! ```
//!
//! Juxtaposition multiplies, so `2x`, `3/2 x y` and `(x+1)(y-1)` all parse.
//! Division is only allowed by expressions that evaluate to a nonzero constant.

use num_bigint::BigInt;

use super::{Poly, Rational};
use crate::error::{Error, Result};

/// Guards that keep hostile input from exhausting memory.
#[derive(Clone, Copy, Debug)]
pub struct ParseLimits {
    pub max_exponent: u32,
    pub max_terms: usize,
    pub max_depth: usize,
}

impl Default for ParseLimits {
    fn default() -> Self {
        ParseLimits {
            max_exponent: 512,
            max_terms: 100_000,
            max_depth: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: "bad number".into(),
                })?;
                out.push((start, Tok::Num(n)));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {}
        }
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character {:?}", src[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((start, t));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
    limits: ParseLimits,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.to_string(),
        })
    }

    fn guard(&self, p: &Poly) -> Result<()> {
        if p.len() > self.limits.max_terms {
            return Err(Error::TooLarge);
        }
        Ok(())
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        if a.len().saturating_mul(b.len()) > self.limits.max_terms.saturating_mul(8) {
            return Err(Error::TooLarge);
        }
        let r = a.checked_mul(b)?;
        self.guard(&r)?;
        Ok(r)
    }

    fn expr(&mut self) -> Result<Poly> {
        self.depth += 1;
        if self.depth > self.limits.max_depth {
            return self.err("nesting too deep");
        }
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_add(&t)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_sub(&t)?;
                }
                _ => break,
            }
            self.guard(&acc)?;
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let f = self.unary()?;
                    acc = self.mul(&acc, &f)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let f = self.unary()?;
                    if !f.is_constant() || f.is_zero() {
                        return self.err("division by a non-constant or zero");
                    }
                    let c = f.constant_term();
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let f = self.unary()?;
                    acc = self.mul(&acc, &f)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.enter()?;
                let u = self.unary()?;
                self.depth -= 1;
                Ok(-u)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.enter()?;
                let u = self.unary()?;
                self.depth -= 1;
                Ok(u)
            }
            _ => self.power(),
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > self.limits.max_depth {
            return self.err("nesting too deep");
        }
        Ok(())
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let n = match self.peek() {
                Some(Tok::Num(n)) => n.clone(),
                _ => return self.err("expected a natural exponent"),
            };
            self.pos += 1;
            let e: u32 = match u32::try_from(&n) {
                Ok(e) if e <= self.limits.max_exponent => e,
                _ => return self.err("exponent too large"),
            };
            return self.pow(&base, e);
        }
        Ok(base)
    }

    fn pow(&self, base: &Poly, e: u32) -> Result<Poly> {
        if base.len() <= 1 {
            if let Some((_, c)) = base.leading_term() {
                let bits = c.numer().bits() + c.denom().bits();
                if bits.saturating_mul(u64::from(e)) > 1 << 20 {
                    return Err(Error::TooLarge);
                }
            }
            let r = base.checked_pow(e)?;
            return Ok(r);
        }
        // cheap upper bound on the term count: monomials of degree <= e*deg
        // in the variables that actually occur
        let k = base.support_vars().len() as u64;
        let top = base.degree().unwrap_or(0).saturating_mul(u64::from(e));
        let mut bound: u64 = 1;
        for i in 1..=k {
            bound = bound.saturating_mul(top + i) / i;
        }
        if bound > (self.limits.max_terms as u64).saturating_mul(20) {
            return Err(Error::TooLarge);
        }
        let mut acc = Poly::one(base.arity());
        for _ in 0..e {
            acc = self.mul(&acc, base)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Poly> {
        let arity = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Poly::constant(arity, Rational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                let idx = match self.vars.iter().position(|v| *v == name) {
                    Some(i) => i,
                    None => return self.err(&format!("unknown variable {name:?}")),
                };
                self.pos += 1;
                Ok(Poly::var(arity, idx))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.err("expected a number, variable or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse with default limits over the given variable names.
pub fn parse_poly(src: &str, vars: &[String]) -> Result<Poly> {
    parse_poly_with(src, vars, ParseLimits::default())
}

pub fn parse_poly_with(src: &str, vars: &[String], limits: ParseLimits) -> Result<Poly> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        vars,
        limits,
        depth: 0,
    };
    if p.toks.is_empty() {
        return p.err("empty polynomial");
    }
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn implicit_products_and_rationals() {
        let a = parse_poly("3/2 x y^2 + 2(z - 1)", &v()).unwrap();
        let b = parse_poly("3/2*x*y^2 + 2*z - 2", &v()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.display(&v()).to_string(), "2*z + 3/2*x*y^2 - 2");
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let a = parse_poly("-x^2", &v()).unwrap();
        assert_eq!(a.coeff(&[2, 0, 0]), Rational::from_integer((-1).into()));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x +", "q", "x^y", "x/y", "x/0", "(x", "x)", "x ^ 99999", "#"] {
            assert!(parse_poly(bad, &v()).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn size_guard() {
        assert_eq!(
            parse_poly("(x+y+z+1)^500", &v()),
            Err(Error::TooLarge)
        );
    }

    #[test]
    fn depth_guard() {
        let s = "(".repeat(500) + "x" + &")".repeat(500);
        assert!(parse_poly(&s, &v()).is_err());
        let s = "-".repeat(500) + "x";
        assert!(parse_poly(&s, &v()).is_err());
    }
}
