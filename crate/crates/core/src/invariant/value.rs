use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::Rational;

/// How a value ends after its last `(nu, s)` pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `nu_{q+1} = inf`: the last coefficient ideal vanished.
    Inf,
    /// `nu_{q+1} = 0`: the monomial case.
    Zero,
    /// Truncation `inv_{k+1/2}` ending with `nu_{k+1}`.
    Half(Rational),
    /// Truncation `inv_k` ending with `s_k`.
    Open,
}

/// `(nu_1, s_1, ..., nu_q, s_q, nu_{q+1})`, compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantValue {
    pairs: Vec<(Rational, u32)>,
    tail: Tail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Entry {
    Num(Rational),
    Inf,
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Entry::Num(a), Entry::Num(b)) => a.cmp(b),
            (Entry::Num(_), Entry::Inf) => Ordering::Less,
            (Entry::Inf, Entry::Num(_)) => Ordering::Greater,
            (Entry::Inf, Entry::Inf) => Ordering::Equal,
        }
    }
}

/// A truncation level: `inv_k`, `inv_{k+1/2}` or the whole value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Int(usize),
    Half(usize),
    Full,
}

impl InvariantValue {
    pub fn new(pairs: Vec<(Rational, u32)>, tail: Tail) -> Result<Self> {
        for (nu, _) in &pairs {
            if !nu.is_positive() {
                return Err(Error::pre("every nu before the tail must be positive"));
            }
        }
        if let Tail::Half(nu) = &tail {
            if !nu.is_positive() {
                return Err(Error::pre("half tail must be positive; use Tail::Zero"));
            }
        }
        Ok(InvariantValue { pairs, tail })
    }

    /// `inv(a) = (0)` for points off the hypersurface.
    pub fn off() -> Self {
        InvariantValue {
            pairs: Vec::new(),
            tail: Tail::Zero,
        }
    }

    pub fn pairs(&self) -> &[(Rational, u32)] {
        &self.pairs
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// `nu_1`, or zero off the hypersurface.
    pub fn nu1(&self) -> Rational {
        match (self.pairs.first(), &self.tail) {
            (Some((nu, _)), _) => nu.clone(),
            (None, Tail::Half(nu)) => nu.clone(),
            _ => Rational::zero(),
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.tail, Tail::Inf | Tail::Zero)
    }

    fn entries(&self) -> Vec<Entry> {
        let mut v = Vec::with_capacity(2 * self.pairs.len() + 1);
        for (nu, s) in &self.pairs {
            v.push(Entry::Num(nu.clone()));
            v.push(Entry::Num(Rational::from_integer(BigInt::from(*s))));
        }
        match &self.tail {
            Tail::Inf => v.push(Entry::Inf),
            Tail::Zero => v.push(Entry::Num(Rational::zero())),
            Tail::Half(nu) => v.push(Entry::Num(nu.clone())),
            Tail::Open => {}
        }
        v
    }

    pub fn truncate(&self, level: Level) -> Result<InvariantValue> {
        match level {
            Level::Full => Ok(self.clone()),
            Level::Int(k) => {
                if k > self.pairs.len() {
                    return Err(Error::pre(format!("truncation level {k} exceeds the value")));
                }
                Ok(InvariantValue {
                    pairs: self.pairs[..k].to_vec(),
                    tail: Tail::Open,
                })
            }
            Level::Half(k) => {
                if k < self.pairs.len() {
                    return Ok(InvariantValue {
                        pairs: self.pairs[..k].to_vec(),
                        tail: Tail::Half(self.pairs[k].0.clone()),
                    });
                }
                if k == self.pairs.len() && self.tail != Tail::Open {
                    return Ok(self.clone());
                }
                Err(Error::pre(format!("truncation level {k}+1/2 exceeds the value")))
            }
        }
    }
}

impl Ord for InvariantValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries().cmp(&other.entries())
    }
}

impl PartialOrd for InvariantValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic comparison with `inf` above every number.
pub fn compare(a: &InvariantValue, b: &InvariantValue) -> Ordering {
    a.cmp(b)
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (nu, s) in &self.pairs {
            parts.push(nu.to_string());
            parts.push(s.to_string());
        }
        match &self.tail {
            Tail::Inf => parts.push("inf".into()),
            Tail::Zero => parts.push("0".into()),
            Tail::Half(nu) => parts.push(nu.to_string()),
            Tail::Open => {}
        }
        write!(f, "({})", parts.join(","))
    }
}

fn parse_err(msg: &str) -> Error {
    Error::Parse {
        pos: 0,
        msg: msg.to_string(),
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let ok = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) && t.len() <= 64;
    if !ok(n) || !ok(d) {
        return Err(parse_err("expected a nonnegative rational"));
    }
    let n: BigInt = n.parse().map_err(|_| parse_err("bad numerator"))?;
    let d: BigInt = d.parse().map_err(|_| parse_err("bad denominator"))?;
    if d.is_zero() {
        return Err(parse_err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

impl FromStr for InvariantValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| parse_err("value must be parenthesized"))?;
        let toks: Vec<&str> = inner.split(',').map(str::trim).collect();
        if toks.len() == 1 && toks[0].is_empty() {
            return Err(parse_err("empty value"));
        }
        let is_inf = |t: &str| t == "inf" || t == "\u{221e}" || t == "INF";
        let (body, tail_inf) = match toks.last() {
            Some(t) if is_inf(t) => (&toks[..toks.len() - 1], true),
            _ => (&toks[..], false),
        };
        let mut nums = Vec::with_capacity(body.len());
        for t in body {
            if is_inf(t) {
                return Err(parse_err("inf may only end a value"));
            }
            nums.push(parse_rational(t)?);
        }
        let mut pairs = Vec::new();
        let mut it = nums.chunks_exact(2);
        for c in it.by_ref() {
            if !c[1].is_integer() {
                return Err(parse_err("s entries must be naturals"));
            }
            let sv: u32 = u32::try_from(c[1].to_integer())
                .map_err(|_| parse_err("s entry too large"))?;
            if c[0].is_zero() {
                return Err(parse_err("zero may only end a value"));
            }
            pairs.push((c[0].clone(), sv));
        }
        let rest = it.remainder();
        let tail = match (rest, tail_inf) {
            ([], true) => Tail::Inf,
            ([], false) => Tail::Open,
            ([nu], false) if nu.is_zero() => Tail::Zero,
            ([nu], false) => Tail::Half(nu.clone()),
            _ => return Err(parse_err("inf must follow a complete pair")),
        };
        if pairs.is_empty() && tail == Tail::Open {
            return Err(parse_err("empty value"));
        }
        InvariantValue::new(pairs, tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> InvariantValue {
        s.parse().unwrap()
    }

    #[test]
    fn ordering() {
        assert!(v("(2,0,5/2,0,1,0,inf)") > v("(2,0,1,1,1,0,inf)"));
        assert!(v("(2,0,1,0,inf)") > v("(2,0,0)"));
        let a = v("(2,0,3/2,0,1,0,inf)");
        assert_eq!(compare(&a, &a), Ordering::Equal);
        assert!(v("(2,0)") < a);
        assert!(v("(2,0,3/2)") < a);
        assert!(v("(0)") < v("(1,0,inf)"));
    }

    #[test]
    fn round_trip() {
        for s in ["(2,0,3/2,0,1,0,inf)", "(2,0,0)", "(0)", "(2,0)", "(2,0,1)", "(1,0,inf)"] {
            assert_eq!(v(s).to_string(), s);
        }
        assert_eq!(v("( 2, 0, \u{221e} )").to_string(), "(2,0,inf)");
    }

    #[test]
    fn rejects() {
        for s in ["", "()", "2,0", "(2,0,inf,1)", "(2,1/2,inf)", "(0,0,inf)", "(-1)", "(2,0,1/0)", "(inf,0)"] {
            assert!(s.parse::<InvariantValue>().is_err(), "{s}");
        }
    }

    #[test]
    fn truncations() {
        let a = v("(2,0,3/2,0,1,0,inf)");
        assert_eq!(a.truncate(Level::Int(1)).unwrap(), v("(2,0)"));
        assert_eq!(a.truncate(Level::Full).unwrap(), a);
        let b = v("(2,0,1,1,1,0,inf)");
        assert_eq!(b.truncate(Level::Half(1)).unwrap(), v("(2,0,1)"));
        assert!(a.truncate(Level::Int(4)).is_err());
        assert_eq!(v("(2,0,0)").truncate(Level::Half(1)).unwrap(), v("(2,0,0)"));
    }
}
