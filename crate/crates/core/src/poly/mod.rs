//! Sparse multivariate polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so two equal polynomials always iterate (and print)
//! the same way. Nothing here ever rounds.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use parse::{parse_poly, ParseLimits};

pub type Rational = BigRational;

/// Integer numerators and their common denominator.
type Integral = (Vec<(Monomial, BigInt)>, BigInt);

/// Build a rational from a pair of machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Order of vanishing. The zero polynomial has infinite order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Order::Infinite
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

/// An exponent vector. Ordered by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

// hashes like its slice, so maps can be probed without allocating
impl std::borrow::Borrow<[u32]> for Monomial {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn checked_mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_add(*b)?);
        }
        Some(Monomial(out))
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Printing order: the last variable is the most significant one.
fn print_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    a.0.iter().rev().cmp(b.0.iter().rev())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Rational::one())
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = Self::zero(arity);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(arity), c);
        }
        p
    }

    /// The coordinate function `x_i`. Panics when `i >= arity`.
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable {i} out of range for arity {arity}");
        let mut e = vec![0; arity];
        e[i] = 1;
        Self::monomial(Monomial(e), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(m.0.len());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::Arity {
                    expected: arity,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.arity])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Nonvanishing at the origin.
    pub fn is_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn check_arity(&self, other: &Poly) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::Arity {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.mul_upto(other, None)
    }

    /// Product with every term of degree above `max` dropped.
    pub fn mul_upto(&self, other: &Poly, max: Option<u64>) -> Result<Poly> {
        self.check_arity(other)?;
        // Work over the integers: clear denominators, multiply, divide once.
        let (a, da) = self.integral();
        let (b, db) = other.integral();
        let den = da * db;
        let pairs = |f: &mut dyn FnMut(&[u32], usize, usize)| -> Result<()> {
            let degs: Vec<u64> = b.iter().map(|(m, _)| m.degree()).collect();
            let mut buf = vec![0u32; self.arity];
            for (i, (m1, _)) in a.iter().enumerate() {
                let d1 = m1.degree();
                for (j, (m2, _)) in b.iter().enumerate() {
                    if max.is_some_and(|mx| d1 + degs[j] > mx) {
                        continue;
                    }
                    for (slot, (x, y)) in buf.iter_mut().zip(m1.0.iter().zip(&m2.0)) {
                        *slot = x.checked_add(*y).ok_or(Error::Overflow)?;
                    }
                    f(&buf, i, j);
                }
            }
            Ok(())
        };
        // machine words while they last
        let small = |v: &[(&Monomial, BigInt)]| v.iter().map(|(_, c)| c.to_i64()).collect::<Option<Vec<i64>>>();
        if let (Some(sa), Some(sb)) = (small(&a), small(&b)) {
            let mut acc: HashMap<Monomial, i128> = HashMap::new();
            let mut overflow = false;
            pairs(&mut |m, i, j| {
                let c = i128::from(sa[i]) * i128::from(sb[j]);
                match acc.get_mut(m) {
                    Some(v) => match v.checked_add(c) {
                        Some(x) => *v = x,
                        None => overflow = true,
                    },
                    None => {
                        acc.insert(Monomial(m.to_vec()), c);
                    }
                }
            })?;
            if !overflow {
                return Ok(Poly::over(self.arity, acc.into_iter().map(|(m, c)| (m, BigInt::from(c))), &den));
            }
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
        pairs(&mut |m, i, j| {
            let c = &a[i].1 * &b[j].1;
            match acc.get_mut(m) {
                Some(v) => *v += c,
                None => {
                    acc.insert(Monomial(m.to_vec()), c);
                }
            }
        })?;
        Ok(Poly::over(self.arity, acc, &den))
    }

    /// The polynomial with integer numerators `terms` over `den`.
    fn over(arity: usize, terms: impl IntoIterator<Item = (Monomial, BigInt)>, den: &BigInt) -> Poly {
        Poly {
            arity,
            terms: terms
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m, Rational::new(c, den.clone())))
                .collect(),
        }
    }

    /// Integer coefficients and the common denominator they are over.
    fn integral(&self) -> (Vec<(&Monomial, BigInt)>, BigInt) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m, c.numer() * (&den / c.denom())))
            .collect();
        (terms, den)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// `self^n` without the terms of degree above `max`.
    pub fn pow_upto(&self, n: u32, max: Option<u64>) -> Result<Poly> {
        let mut result = Poly::one(self.arity);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_upto(&base, max)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_upto(&base, max)?;
            }
        }
        Ok(result)
    }

    pub fn checked_pow(&self, n: u32) -> Result<Poly> {
        let mut result = Poly::one(self.arity);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.checked_mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn pow(&self, n: u32) -> Poly {
        self.checked_pow(n).expect("exponent overflow")
    }

    /// Formal partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        assert!(i < self.arity, "variable {i} out of range");
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.0.clone();
            m2[i] = e - 1;
            out.add_term(Monomial(m2), c * int(i64::from(e)));
        }
        out
    }

    /// `n`-fold partial derivative in variable `i`.
    pub fn partial_n(&self, i: usize, n: u32) -> Poly {
        let mut p = self.clone();
        for _ in 0..n {
            if p.is_zero() {
                break;
            }
            p = p.partial(i);
        }
        p
    }

    /// Composition `p(images)`. All images must share one arity, which
    /// becomes the arity of the result.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        self.substitute_upto(images, None)
    }

    /// `substitute` truncated to total degree `max`, without forming the
    /// higher terms.
    pub fn substitute_upto(&self, images: &[Poly], max: Option<u64>) -> Result<Poly> {
        if images.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                found: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.arity,
            None => 0,
        };
        for im in images {
            if im.arity != target {
                return Err(Error::Arity {
                    expected: target,
                    found: im.arity,
                });
            }
        }
        // coordinates mapped to themselves only shift exponents
        let fixed: Vec<bool> = images
            .iter()
            .enumerate()
            .map(|(i, im)| target == self.arity && *im == Poly::var(target, i))
            .collect();
        // powers[i][k] = images[i]^k, filled lazily
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|_| vec![Poly::one(target)]).collect();
        // products of powers of the moving images, over the integers
        let mut products: HashMap<Vec<u32>, Integral> = HashMap::new();
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut shift = vec![0u32; target];
            let mut key = vec![0u32; self.arity];
            let mut sdeg = 0u64;
            for (i, &e) in m.0.iter().enumerate() {
                if fixed[i] {
                    shift[i] = e;
                    sdeg += u64::from(e);
                } else {
                    key[i] = e;
                }
            }
            if max.is_some_and(|mx| sdeg > mx) {
                continue;
            }
            if !products.contains_key(&key) {
                let mut t = Poly::one(target);
                for (i, &e) in key.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    while powers[i].len() <= e as usize {
                        let next = powers[i].last().unwrap().mul_upto(&images[i], max)?;
                        powers[i].push(next);
                    }
                    t = t.mul_upto(&powers[i][e as usize], max)?;
                }
                let (terms, den) = t.integral();
                let terms = terms.into_iter().map(|(m, c)| (m.clone(), c)).collect();
                products.insert(key.clone(), (terms, den));
            }
            parts.push((Monomial(shift), sdeg, c, key));
        }
        let den = parts
            .iter()
            .fold(BigInt::one(), |l, (_, _, c, key)| l.lcm(&(c.denom() * &products[key].1)));
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (shift, sdeg, c, key) in &parts {
            let (terms, d) = &products[key];
            let factor = c.numer() * (&den / (c.denom() * d));
            for (m, k) in terms {
                if max.is_some_and(|mx| m.degree() + sdeg > mx) {
                    continue;
                }
                let m = m.checked_mul(shift).ok_or(Error::Overflow)?;
                *acc.entry(m).or_insert_with(BigInt::zero) += &factor * k;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, Rational::new(c, den.clone())))
            .collect();
        Ok(Poly {
            arity: target,
            terms,
        })
    }

    /// Substitute a single variable, leaving the others alone.
    pub fn substitute_var(&self, i: usize, image: &Poly) -> Result<Poly> {
        self.substitute_var_upto(i, image, None)
    }

    pub fn substitute_var_upto(&self, i: usize, image: &Poly, max: Option<u64>) -> Result<Poly> {
        if i >= self.arity {
            return Err(Error::VarIndex {
                index: i,
                arity: self.arity,
            });
        }
        let images: Vec<Poly> = (0..self.arity)
            .map(|k| {
                if k == i {
                    image.clone()
                } else {
                    Poly::var(self.arity, k)
                }
            })
            .collect();
        self.substitute_upto(&images, max)
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                found: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Recenter at `point`: the result at the origin is `self` at `point`.
    pub fn translate(&self, point: &[Rational]) -> Result<Poly> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                found: point.len(),
            });
        }
        let images: Vec<Poly> = point
            .iter()
            .enumerate()
            .map(|(i, a)| {
                Poly::var(self.arity, i)
                    .checked_add(&Poly::constant(self.arity, a.clone()))
                    .unwrap()
            })
            .collect();
        self.substitute(&images)
    }

    pub fn ord_at_origin(&self) -> Order {
        match self.terms.keys().next() {
            Some(m) => Order::Finite(m.degree() as u32),
            None => Order::Infinite,
        }
    }

    /// Exact division by a single polynomial via leading-term cancellation.
    /// `Ok(None)` means "not divisible".
    pub fn div_exact(&self, h: &Poly) -> Result<Option<Poly>> {
        self.check_arity(h)?;
        let (hm, hc) = match h.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(Error::BadDivisor),
        };
        if h.len() == 1 {
            // monomial divisor: termwise
            let mut out = Poly::zero(self.arity);
            for (m, c) in &self.terms {
                match m.div(&hm) {
                    Some(q) => {
                        out.terms.insert(q, c / &hc);
                    }
                    None => return Ok(None),
                }
            }
            return Ok(Some(out));
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.arity);
        while let Some((m, c)) = rem.leading_term() {
            let q = match m.div(&hm) {
                Some(q) => q,
                None => return Ok(None),
            };
            let qc = c / &hc;
            let t = Poly::monomial(q.clone(), qc.clone());
            rem = rem.checked_sub(&t.checked_mul(h)?)?;
            quot.add_term(q, qc);
        }
        Ok(Some(quot))
    }

    /// Largest `mu` with `h^mu | self`. Requires `h` nonzero and vanishing at
    /// the origin.
    pub fn ord_along(&self, h: &Poly) -> Result<Order> {
        self.check_arity(h)?;
        if h.is_zero() || h.is_unit() || h.is_constant() {
            return Err(Error::BadDivisor);
        }
        if self.is_zero() {
            return Ok(Order::Infinite);
        }
        let mut p = self.clone();
        let mut mu = 0u32;
        while let Some(q) = p.div_exact(h)? {
            p = q;
            mu += 1;
        }
        Ok(Order::Finite(mu))
    }

    /// Divide out `h` as often as possible, returning the exponent and the cofactor.
    pub fn split_off(&self, h: &Poly) -> Result<(u32, Poly)> {
        if self.is_zero() {
            return Err(Error::pre("cannot split the zero polynomial"));
        }
        let mut p = self.clone();
        let mut mu = 0;
        while let Some(q) = p.div_exact(h)? {
            p = q;
            mu += 1;
        }
        Ok((mu, p))
    }

    /// Drop all terms of total degree above `max`.
    pub fn truncate(&self, max: u64) -> Poly {
        Poly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= max)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, d: u64) -> Poly {
        Poly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    /// Coefficients `c_k` with `self = sum c_k x_i^k`; each `c_k` is free of `x_i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<Poly> {
        let n = self.degree_in(i).map_or(0, |d| d as usize + 1);
        let mut out = vec![Poly::zero(self.arity); n];
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            let mut e = m.0.clone();
            e[i] = 0;
            out[k].add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Coefficients of the degree-one terms, one per variable.
    pub fn linear_coefficients(&self) -> Vec<Rational> {
        (0..self.arity)
            .map(|i| {
                let mut e = vec![0; self.arity];
                e[i] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// The coefficient that leads in printing order.
    pub fn print_lead_coeff(&self) -> Option<&Rational> {
        self.terms
            .iter()
            .max_by(|a, b| print_cmp(a.0, b.0))
            .map(|(_, c)| c)
    }

    /// Rescaled so the first printed coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.print_lead_coeff() {
            Some(c) if !c.is_one() => {
                let inv = c.recip();
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    /// Exact square root, if `self` is the square of a rational polynomial.
    pub fn sqrt_exact(&self) -> Option<Poly> {
        let (lm, lc) = match self.leading_term() {
            None => return Some(Poly::zero(self.arity)),
            Some(t) => t,
        };
        let half: Vec<u32> = lm
            .0
            .iter()
            .map(|&e| if e % 2 == 0 { Some(e / 2) } else { None })
            .collect::<Option<_>>()?;
        let root_c = rational_sqrt(lc)?;
        let mut s = Poly::monomial(Monomial(half), root_c);
        let two_lt = {
            let (m, c) = s.leading_term().unwrap();
            (m.clone(), c * int(2))
        };
        loop {
            let rem = self.checked_sub(&s.checked_mul(&s).ok()?).ok()?;
            let (rm, rc) = match rem.leading_term() {
                None => return Some(s),
                Some(t) => t,
            };
            let q = rm.div(&two_lt.0)?;
            if q >= two_lt.0 {
                return None;
            }
            // the new term must sit strictly below everything already in s
            if let Some((smallest, _)) = s.terms.iter().next() {
                if q >= *smallest {
                    return None;
                }
            }
            s.add_term(q, rc / &two_lt.1);
        }
    }

    /// `self = c * s^2` with `s` monic; returns `(c, s)`.
    pub fn sqrt_up_to_constant(&self) -> Option<(Rational, Poly)> {
        let c = self.print_lead_coeff()?.clone();
        let s = self.scale(&c.recip()).sqrt_exact()?;
        let s = s.monic();
        Some((c, s))
    }

    /// Variables that occur in some term.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.arity).filter(|&i| self.involves(i)).collect()
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }

    /// Terms sorted for printing (leading first).
    pub fn print_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| print_cmp(b.0, a.0));
        t
    }

    /// Canonical total order used to sort generator lists.
    pub fn canonical_cmp(&self, other: &Poly) -> Ordering {
        let a = self.print_terms();
        let b = other.print_terms();
        for (x, y) in a.iter().zip(&b) {
            let c = print_cmp(y.0, x.0).then_with(|| x.1.cmp(y.1));
            if c != Ordering::Equal {
                return c;
            }
        }
        a.len().cmp(&b.len())
    }
}

/// Square root of a nonnegative rational square, if it is one.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Whether a rational is a square in the rationals.
pub fn is_rational_square(q: &Rational) -> bool {
    rational_sqrt(q).is_some()
}

/// Least common multiple of the denominators of a list of rationals.
pub fn denominator_lcm<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

macro_rules! binop {
    ($tr:ident, $f:ident, $method:ident) => {
        impl std::ops::$tr<&Poly> for &Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                self.$method(rhs).expect("polynomial arity mismatch")
            }
        }
        impl std::ops::$tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                self.$method(&rhs).expect("polynomial arity mismatch")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    vars: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.poly.print_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{a}")?;
                continue;
            }
            if !a.is_one() {
                write!(f, "{a}*")?;
            }
            let mut first = true;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                match self.vars.get(i) {
                    Some(name) => f.write_str(name)?,
                    None => write!(f, "x{i}")?,
                }
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn p(s: &str) -> Poly {
        parse_poly(s, &names(&["x", "y", "z"])).unwrap()
    }

    #[test]
    fn cancellation_and_square() {
        assert_eq!(p("x+y") + p("x-y"), p("2x"));
        assert_eq!(p("z") * p("z"), p("z^2"));
        assert!((p("x") - p("x")).is_empty());
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("z^2 + x*y^2").partial(2), p("2z"));
        assert_eq!(p("x*y^2").partial(1), p("2x*y"));
        let v = names(&["w", "x", "y", "z"]);
        let f = parse_poly("z^3 + w*y^3", &v).unwrap();
        assert_eq!(f.partial_n(3, 2), parse_poly("6z", &v).unwrap());
    }

    #[test]
    fn chart_substitutions() {
        let f = p("z^2 + x*y^2");
        let xc = f.substitute(&[p("x"), p("x*y"), p("x*z")]).unwrap();
        assert_eq!(xc, p("x^2*(z^2 + x*y^2)"));
        let yc = f.substitute(&[p("x*y"), p("y"), p("y*z")]).unwrap();
        assert_eq!(yc, p("y^2*(z^2 + x*y)"));
        let id = f.substitute(&[p("x"), p("y"), p("z")]).unwrap();
        assert_eq!(id, f);
    }

    #[test]
    fn orders() {
        assert_eq!(p("z^2 + x*y^2").ord_at_origin(), Order::Finite(2));
        assert_eq!(Poly::zero(3).ord_at_origin(), Order::Infinite);
        assert_eq!(p("1 + x").ord_at_origin(), Order::Finite(0));
        assert_eq!(p("x^3*y^2").ord_along(&p("x")).unwrap(), Order::Finite(3));
        assert_eq!(p("z^2 + x*y^2").ord_along(&p("x")).unwrap(), Order::Finite(0));
        assert_eq!(
            p("x^2*(z^2 + x*y^2)").ord_along(&p("x")).unwrap(),
            Order::Finite(2)
        );
        assert_eq!(p("x").ord_along(&p("1")), Err(Error::BadDivisor));
        assert_eq!(p("x").ord_along(&Poly::zero(3)), Err(Error::BadDivisor));
    }

    #[test]
    fn ord_along_non_monomial() {
        let h = p("x + z^2");
        let g = &h.pow(3) * &p("y + 1");
        assert_eq!(g.ord_along(&h).unwrap(), Order::Finite(3));
    }

    #[test]
    fn translation() {
        let v = names(&["x"]);
        let x = parse_poly("x", &v).unwrap();
        assert_eq!(x.translate(&[int(1)]).unwrap(), parse_poly("x + 1", &v).unwrap());
        let f = p("z^2 + x*y^2");
        let t = f.translate(&[int(1), int(0), int(0)]).unwrap();
        // smooth? no: order 2 along the x-axis, the nc2 locus
        assert_eq!(t.ord_at_origin(), Order::Finite(2));
        let t = f.translate(&[int(0), int(1), int(0)]).unwrap();
        assert_eq!(t.ord_at_origin(), Order::Finite(1));
    }

    #[test]
    fn printing() {
        let v = names(&["x", "y", "z"]);
        assert_eq!(p("x*y^2 + z^2").display(&v).to_string(), "z^2 + x*y^2");
        assert_eq!(
            p("(y+2x^2)*(y-x^2)^2").display(&v).to_string(),
            "y^3 - 3*x^4*y + 2*x^6"
        );
        assert_eq!(p("3/2 x - 1").display(&v).to_string(), "3/2*x - 1");
        assert_eq!(Poly::zero(3).display(&v).to_string(), "0");
        assert_eq!(p("-x").display(&v).to_string(), "-x");
    }

    #[test]
    fn square_roots() {
        let s = p("x + 2y - z^2");
        assert_eq!((&s * &s).sqrt_exact(), Some(s.clone()).map(|s| {
            // the root is determined up to sign; sqrt_exact picks positive lead
            if s.leading_term().unwrap().1.is_negative() { -s } else { s }
        }));
        assert_eq!(p("x^2 + y").sqrt_exact(), None);
        assert_eq!(p("2x^2").sqrt_exact(), None);
        let (c, s) = p("-3x^4").sqrt_up_to_constant().unwrap();
        assert_eq!(c, int(-3));
        assert_eq!(s, p("x^2"));
    }

    #[test]
    fn coefficient_slices() {
        let f = p("z^2 + 2y*z + x*y^2");
        let c = f.coefficients_in(2);
        assert_eq!(c, vec![p("x*y^2"), p("2y"), p("1")]);
    }
}
