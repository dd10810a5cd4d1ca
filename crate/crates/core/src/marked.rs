//! Charts, divisors and the marked-ideal calculus.
//!
//! A marked ideal lives on a maximal contact subspace `N` cut out by a chain
//! of graphs `x_v = h(...)`. Generators are stored with every chain variable
//! already eliminated. Sums are kept unexpanded as lists of summands; `expand`
//! builds the literal lcm power and exists for cross-checking.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{denominator_lcm, Order, Poly, Rational};

pub type Label = u32;

/// A smooth hypersurface in the chart, usually a coordinate hyperplane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub label: Label,
    pub poly: Poly,
    pub birth_year: u32,
}

impl Divisor {
    pub fn new(label: Label, poly: Poly, birth_year: u32) -> Result<Self> {
        if poly.is_zero() || poly.is_constant() {
            return Err(Error::pre(format!("divisor {label} is zero or a unit")));
        }
        Ok(Divisor {
            label,
            poly,
            birth_year,
        })
    }

    pub fn through_origin(&self) -> bool {
        !self.poly.is_unit()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChartId(pub usize);

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// How a chart was produced from its parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lineage {
    pub parent: ChartId,
    /// Center constraints, in parent coordinates.
    pub center: Vec<Poly>,
    /// The chart variable that carries the exceptional divisor.
    pub chart_var: usize,
    /// Parent coordinates as polynomials in this chart's coordinates.
    pub images: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub id: ChartId,
    pub year: u32,
    pub variables: Vec<String>,
    pub lineage: Option<Lineage>,
    pub divisors: Vec<Divisor>,
}

impl Chart {
    pub fn root(variables: Vec<String>, year: u32, divisors: Vec<Divisor>) -> Result<Chart> {
        let chart = Chart {
            id: ChartId(0),
            year,
            variables,
            lineage: None,
            divisors,
        };
        chart.validate()?;
        Ok(chart)
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.arity();
        let mut labels: Vec<Label> = Vec::new();
        for d in &self.divisors {
            if d.poly.arity() != n {
                return Err(Error::Arity {
                    expected: n,
                    found: d.poly.arity(),
                });
            }
            if d.birth_year > self.year {
                return Err(Error::pre(format!(
                    "divisor {} born in year {} after chart year {}",
                    d.label, d.birth_year, self.year
                )));
            }
            if labels.contains(&d.label) {
                return Err(Error::pre(format!("duplicate divisor label {}", d.label)));
            }
            labels.push(d.label);
        }
        if let Some(l) = &self.lineage {
            if l.images.iter().any(|p| p.arity() != n) {
                return Err(Error::pre("lineage images have the wrong arity"));
            }
        }
        Ok(())
    }

    pub fn divisor(&self, label: Label) -> Option<&Divisor> {
        self.divisors.iter().find(|d| d.label == label)
    }

    /// Divisors passing through the chart origin, in label order.
    pub fn divisors_at_origin(&self) -> Vec<&Divisor> {
        let mut v: Vec<&Divisor> = self.divisors.iter().filter(|d| d.through_origin()).collect();
        v.sort_by_key(|d| d.label);
        v
    }

    pub fn show(&self, p: &Poly) -> String {
        p.display(&self.variables).to_string()
    }
}

/// One link of the maximal contact chain: the graph `x_var = graph`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainElem {
    pub var: usize,
    pub graph: Poly,
}

impl ChainElem {
    pub fn coordinate(arity: usize, var: usize) -> Self {
        ChainElem {
            var,
            graph: Poly::zero(arity),
        }
    }

    /// The defining function `x_var - graph`.
    pub fn as_poly(&self) -> Poly {
        &Poly::var(self.graph.arity(), self.var) - &self.graph
    }
}

/// Restrict a chart polynomial to the chain's subspace.
pub fn restrict_to_chain(p: &Poly, chain: &[ChainElem]) -> Result<Poly> {
    let mut out = p.clone();
    for c in chain {
        out = out.substitute_var(c.var, &c.graph)?;
    }
    Ok(out)
}

/// Shared context of the summands of a weighted sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub chart: ChartId,
    pub arity: usize,
    pub chain: Vec<ChainElem>,
    pub blocks: Vec<Vec<Label>>,
}

impl Context {
    pub fn ambient(chart: ChartId, arity: usize) -> Self {
        Context {
            chart,
            arity,
            chain: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn is_eliminated(&self, var: usize) -> bool {
        self.chain.iter().any(|c| c.var == var)
    }

    /// Variables still free on `N`.
    pub fn free_vars(&self) -> Vec<usize> {
        (0..self.arity).filter(|&v| !self.is_eliminated(v)).collect()
    }
}

/// Drop zeros, scale each generator to a monic form, sort and dedupe.
pub fn reduce_generators(gens: impl IntoIterator<Item = Poly>, prec: Option<u32>) -> Vec<Poly> {
    let mut v: Vec<Poly> = gens
        .into_iter()
        .map(|g| match prec {
            Some(p) => g.truncate(u64::from(p)),
            None => g,
        })
        .filter(|g| !g.is_zero())
        .map(|g| g.monic())
        .collect();
    v.sort_by(|a, b| a.canonical_cmp(b));
    v.dedup();
    v
}

fn ideal_order(gens: &[Poly]) -> Order {
    gens.iter()
        .map(Poly::ord_at_origin)
        .min()
        .unwrap_or(Order::Infinite)
}

/// A nonnegative rational or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Finite(Rational),
    Infinite,
}

impl Weight {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Weight::Finite(q) => Some(q),
            Weight::Infinite => None,
        }
    }

    pub(crate) fn of(o: Order, d: u32) -> Weight {
        match o {
            Order::Finite(n) => Weight::Finite(Rational::new(BigInt::from(n), BigInt::from(d))),
            Order::Infinite => Weight::Infinite,
        }
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Weight::Finite(a), Weight::Finite(b)) => a.cmp(b),
            (Weight::Finite(_), Weight::Infinite) => Ordering::Less,
            (Weight::Infinite, Weight::Finite(_)) => Ordering::Greater,
            (Weight::Infinite, Weight::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(q) => write!(f, "{q}"),
            Weight::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedIdeal {
    pub ctx: Context,
    gens: Vec<Poly>,
    d: u32,
}

impl MarkedIdeal {
    /// Generators must not mention eliminated chain variables.
    pub fn new(ctx: Context, gens: Vec<Poly>, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::pre("marking must be positive"));
        }
        for g in &gens {
            if g.arity() != ctx.arity {
                return Err(Error::Arity {
                    expected: ctx.arity,
                    found: g.arity(),
                });
            }
            if ctx.chain.iter().any(|c| g.involves(c.var)) {
                return Err(Error::pre("generator involves an eliminated variable"));
            }
        }
        Ok(MarkedIdeal {
            ctx,
            gens: reduce_generators(gens, None),
            d,
        })
    }

    pub fn generators(&self) -> &[Poly] {
        &self.gens
    }

    pub fn marking(&self) -> u32 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn ord(&self) -> Order {
        ideal_order(&self.gens)
    }

    pub fn cosupp_contains_origin(&self) -> bool {
        self.ord() >= Order::Finite(self.d)
    }

    /// Whether `point` (chart coordinates, lying on `N`) is in the cosupport.
    pub fn cosupp_contains(&self, point: &[Rational]) -> Result<bool> {
        for g in &self.gens {
            if g.translate(point)?.ord_at_origin() < Order::Finite(self.d) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn into_sum(self) -> WeightedSum {
        WeightedSum {
            ctx: self.ctx,
            summands: vec![Summand {
                gens: self.gens,
                d: self.d,
                prec: None,
            }],
            floor: None,
        }
    }
}

/// One summand of a weighted sum. `prec` bounds the degrees known exactly
/// when generators are truncated jets; `None` means exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub gens: Vec<Poly>,
    pub d: u32,
    pub prec: Option<u32>,
}

impl Summand {
    pub fn exact(gens: Vec<Poly>, d: u32) -> Self {
        Summand {
            gens: reduce_generators(gens, None),
            d,
            prec: None,
        }
    }

    pub fn ord(&self) -> Order {
        ideal_order(&self.gens)
    }

    pub fn ratio(&self) -> Weight {
        Weight::of(self.ord(), self.d)
    }
}

/// An unexpanded sum `I_1 + ... + I_k` of marked ideals on a common `N`.
///
/// `floor` is a lower bound for the ratio of summands dropped because their
/// truncated jets vanished; it is `None` in exact computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedSum {
    pub ctx: Context,
    pub summands: Vec<Summand>,
    pub floor: Option<Rational>,
}

fn min_floor(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn pmin(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Left-fold sum of two marked ideals on the same subspace.
pub fn sum(a: &MarkedIdeal, b: &MarkedIdeal) -> Result<WeightedSum> {
    let mut w = a.clone().into_sum();
    w.push(b)?;
    Ok(w)
}

impl WeightedSum {
    pub fn push(&mut self, m: &MarkedIdeal) -> Result<()> {
        if m.ctx != self.ctx {
            return Err(Error::ContextMismatch);
        }
        self.summands.push(Summand {
            gens: m.gens.clone(),
            d: m.d,
            prec: None,
        });
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.ctx.arity
    }

    /// True when every summand is the zero ideal.
    pub fn is_zero(&self) -> bool {
        self.summands.iter().all(|s| s.gens.is_empty())
    }

    pub fn is_exact(&self) -> bool {
        self.floor.is_none() && self.summands.iter().all(|s| s.prec.is_none())
    }

    /// `min_k ord(I_k)/d_k`.
    pub fn mu(&self) -> Weight {
        self.summands
            .iter()
            .map(Summand::ratio)
            .min()
            .unwrap_or(Weight::Infinite)
    }

    pub fn cosupp_contains_origin(&self) -> bool {
        self.summands
            .iter()
            .all(|s| s.ord() >= Order::Finite(s.d))
    }

    pub fn cosupp_contains(&self, point: &[Rational]) -> Result<bool> {
        for s in &self.summands {
            for g in &s.gens {
                if g.translate(point)?.ord_at_origin() < Order::Finite(s.d) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The literal `(I^{l/d} + J^{l/e}, l)`. Exponential in size; for checks.
    pub fn expand(&self) -> Result<MarkedIdeal> {
        let l = self
            .summands
            .iter()
            .fold(1u32, |acc, s| acc.lcm(&s.d));
        let mut gens = Vec::new();
        for s in &self.summands {
            gens.extend(ideal_power(&s.gens, l / s.d, self.ctx.arity)?);
        }
        MarkedIdeal::new(self.ctx.clone(), gens, l)
    }
}

/// Generators of `(g_1, ..., g_r)^k`: all products of `k` generators.
pub fn ideal_power(gens: &[Poly], k: u32, arity: usize) -> Result<Vec<Poly>> {
    let mut out = Vec::new();
    fn rec(gens: &[Poly], start: usize, k: u32, acc: Poly, out: &mut Vec<Poly>) -> Result<()> {
        if k == 0 {
            out.push(acc);
            return Ok(());
        }
        for i in start..gens.len() {
            rec(gens, i, k - 1, acc.checked_mul(&gens[i])?, out)?;
        }
        Ok(())
    }
    rec(gens, 0, k, Poly::one(arity), &mut out)?;
    Ok(out)
}

/// Order of `g` along the smooth divisor `h`, on possibly truncated data.
pub(crate) fn divisor_order(g: &Poly, h: &Poly, prec: Option<u32>) -> Result<u32> {
    if let Some(w) = coordinate_index(h) {
        return Ok(g.terms().map(|(m, _)| m.exps()[w]).min().unwrap_or(0));
    }
    if prec.is_some() {
        return Err(Error::Precision(
            "non-coordinate divisor on truncated data".into(),
        ));
    }
    match g.ord_along(h)? {
        Order::Finite(n) => Ok(n),
        Order::Infinite => Ok(0),
    }
}

/// `Some(w)` when `h` is a nonzero multiple of the coordinate `x_w`.
pub fn coordinate_index(h: &Poly) -> Option<usize> {
    if h.len() != 1 {
        return None;
    }
    let (m, _) = h.leading_term()?;
    if m.degree() != 1 {
        return None;
    }
    m.exps().iter().position(|&e| e == 1)
}

fn divide_power(g: &Poly, h: &Poly, e: u32) -> Result<Poly> {
    if e == 0 {
        return Ok(g.clone());
    }
    let q = g
        .div_exact(&h.pow(e))?
        .ok_or_else(|| Error::pre("monomial part does not divide a generator"))?;
    Ok(q)
}

/// Exponents of the monomial part and the residual generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub exponents: Vec<(Label, u32)>,
    pub residual: MarkedIdeal,
}

/// Factor `m` as (monomial in the active divisors) times residual.
pub fn monomial_residual_split(m: &MarkedIdeal, active: &[Divisor]) -> Result<Split> {
    let restricted = restrict_divisors(active, &m.ctx.chain)?;
    let mut exponents = Vec::new();
    let mut gens = m.gens.clone();
    for (label, h) in &restricted {
        let e = gens
            .iter()
            .map(|g| divisor_order(g, h, None))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .unwrap_or(0);
        gens = gens
            .iter()
            .map(|g| divide_power(g, h, e))
            .collect::<Result<_>>()?;
        exponents.push((*label, e));
    }
    let residual = MarkedIdeal::new(m.ctx.clone(), gens, m.d)?;
    Ok(Split {
        exponents,
        residual,
    })
}

/// Active divisors restricted to `N`; those not meeting the origin of `N`
/// transversally are rejected.
pub fn restrict_divisors(active: &[Divisor], chain: &[ChainElem]) -> Result<Vec<(Label, Poly)>> {
    active
        .iter()
        .map(|d| {
            let h = restrict_to_chain(&d.poly, chain)?;
            if h.ord_at_origin() != Order::Finite(1) {
                return Err(Error::pre(format!(
                    "divisor {} is not smooth and transverse on the contact subspace",
                    d.label
                )));
            }
            Ok((d.label, h))
        })
        .collect()
}

/// Monomial exponents and residual multiplicity of a weighted sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialData {
    /// `min_k ord(I_k)/d_k`.
    pub mu: Weight,
    /// Normalized exponent `min_k ord_H(I_k)/d_k` per active divisor.
    pub mu_h: Vec<(Label, Rational)>,
    /// Raw exponents `e_{kH}` per summand, in `mu_h` order.
    pub exponents: Vec<Vec<u32>>,
    /// Residual multiplicity `mu - sum mu_H`.
    pub nu: Weight,
}

pub fn monomial_data(w: &WeightedSum, active: &[(Label, Poly)]) -> Result<MonomialData> {
    let mu = w.mu();
    if let (Weight::Finite(m), Some(f)) = (&mu, &w.floor) {
        if m > f {
            return Err(Error::Precision(format!(
                "order {m} exceeds the truncation bound {f}"
            )));
        }
    }
    let mut exponents = Vec::with_capacity(w.summands.len());
    for s in &w.summands {
        let mut row = Vec::with_capacity(active.len());
        for (_, h) in active {
            let e = s
                .gens
                .iter()
                .map(|g| divisor_order(g, h, s.prec))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap_or(0);
            row.push(e);
        }
        exponents.push(row);
    }
    let mut mu_h = Vec::with_capacity(active.len());
    for (j, (label, _)) in active.iter().enumerate() {
        let q = w
            .summands
            .iter()
            .zip(&exponents)
            .filter(|(s, _)| !s.gens.is_empty())
            .map(|(s, row)| Rational::new(BigInt::from(row[j]), BigInt::from(s.d)))
            .min()
            .unwrap_or_else(Rational::zero);
        mu_h.push((*label, q));
    }
    let nu = match &mu {
        Weight::Finite(m) => {
            let total: Rational = mu_h.iter().map(|(_, q)| q.clone()).sum();
            Weight::Finite(m - total)
        }
        Weight::Infinite => Weight::Infinite,
    };
    Ok(MonomialData {
        mu,
        mu_h,
        exponents,
        nu,
    })
}

/// Residual multiplicity `nu` of a weighted sum with respect to `active`.
pub fn residual_multiplicity(w: &WeightedSum, active: &[Divisor]) -> Result<Weight> {
    let restricted = restrict_divisors(active, &w.ctx.chain)?;
    Ok(monomial_data(w, &restricted)?.nu)
}

fn to_u32(q: &Rational) -> Result<u32> {
    if !q.is_integer() {
        return Err(Error::pre("non-integral marking"));
    }
    q.to_integer().to_u32().ok_or(Error::Overflow)
}

/// The companion ideal of `w` with respect to the active divisors.
///
/// Each summand is replaced by an integrally equivalent presentation of its
/// residual part at marking `d_k * nu`, scaled by the least common
/// denominator. When `nu < 1` the monomial part joins as an extra summand.
pub fn companion(w: &WeightedSum, active: &[(Label, Poly)]) -> Result<WeightedSum> {
    if !w.cosupp_contains_origin() {
        return Err(Error::pre("origin is not in the cosupport"));
    }
    let data = monomial_data(w, active)?;
    let nu = match &data.nu {
        Weight::Finite(q) if q.is_zero() => {
            return Err(Error::pre("residual part is trivial (monomial case)"))
        }
        Weight::Finite(q) => q.clone(),
        Weight::Infinite => return Err(Error::pre("companion of the zero ideal")),
    };
    let mut out = WeightedSum {
        ctx: w.ctx.clone(),
        summands: Vec::new(),
        floor: w.floor.clone(),
    };
    for (s, row) in w.summands.iter().zip(&data.exponents) {
        if s.gens.is_empty() {
            continue;
        }
        let dk = Rational::from_integer(BigInt::from(s.d));
        let target = &dk * &nu;
        let shifts: Vec<Rational> = row
            .iter()
            .zip(&data.mu_h)
            .map(|(&e, (_, q))| Rational::from_integer(BigInt::from(e)) - &dk * q)
            .collect();
        let scale = denominator_lcm(std::iter::once(&target).chain(shifts.iter()));
        let sc = scale.to_u32().ok_or(Error::Overflow)?;
        let scq = Rational::from_integer(scale);
        let removed: u32 = row.iter().sum();
        let added: u32 = shifts
            .iter()
            .map(|q| to_u32(&(q * &scq)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        let mut prec: Option<u32> = None;
        let mut gens = Vec::with_capacity(s.gens.len());
        for g in &s.gens {
            let mut r = g.clone();
            for (&e, (_, h)) in row.iter().zip(active) {
                r = divide_power(&r, h, e)?;
            }
            let ord_r = r.ord_at_origin().finite().unwrap_or(0);
            // terms above the known degree are noise; never compute them
            let pg = s.prec.map(|p| p.saturating_sub(removed) + (sc - 1) * ord_r + added);
            let cut = pg.map(u64::from);
            let mut t = r.pow_upto(sc, cut)?;
            for (q, (_, h)) in shifts.iter().zip(active) {
                let k = to_u32(&(q * &scq))?;
                if k > 0 {
                    t = t.mul_upto(&h.pow_upto(k, cut)?, cut)?;
                }
            }
            gens.push(t);
            if let Some(pg) = pg {
                prec = Some(prec.map_or(pg, |q: u32| q.min(pg)));
            }
        }
        out.summands.push(Summand {
            gens: reduce_generators(gens, prec),
            d: to_u32(&(&target * &scq))?,
            prec,
        });
    }
    if nu < Rational::one() {
        let gap = Rational::one() - &nu;
        let scale = denominator_lcm(
            std::iter::once(&gap).chain(data.mu_h.iter().map(|(_, q)| q)),
        );
        let scq = Rational::from_integer(scale);
        let mut mono = Poly::one(w.ctx.arity);
        for ((_, q), (_, h)) in data.mu_h.iter().zip(active) {
            let k = to_u32(&(q * &scq))?;
            if k > 0 {
                mono = mono.checked_mul(&h.pow(k))?;
            }
        }
        out.summands.push(Summand {
            gens: vec![mono.monic()],
            d: to_u32(&(&gap * &scq))?,
            prec: None,
        });
    }
    Ok(out)
}

/// `(I, d)` together with its first partials along `N`, marked `d - 1`.
pub fn derivative_ideal(m: &MarkedIdeal) -> Result<MarkedIdeal> {
    if m.d < 2 {
        return Err(Error::pre("derivative ideal needs marking at least 2"));
    }
    let mut gens = m.gens.clone();
    for v in m.ctx.free_vars() {
        for g in &m.gens {
            gens.push(g.partial(v));
        }
    }
    MarkedIdeal::new(m.ctx.clone(), gens, m.d - 1)
}

/// Result of a coefficient-ideal computation: either a weighted sum on the
/// extended chain or the zero marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coeff {
    Zero(Context),
    Sum(WeightedSum),
}

impl Coeff {
    pub fn ctx(&self) -> &Context {
        match self {
            Coeff::Zero(c) => c,
            Coeff::Sum(w) => &w.ctx,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coeff::Zero(_))
    }

    pub fn sum(&self) -> Option<&WeightedSum> {
        match self {
            Coeff::Sum(w) => Some(w),
            Coeff::Zero(_) => None,
        }
    }
}

fn check_chain_elem(ctx: &Context, z: &ChainElem) -> Result<()> {
    if z.var >= ctx.arity {
        return Err(Error::VarIndex {
            index: z.var,
            arity: ctx.arity,
        });
    }
    if ctx.is_eliminated(z.var) {
        return Err(Error::pre("variable already eliminated"));
    }
    if z.graph.involves(z.var) || ctx.chain.iter().any(|c| z.graph.involves(c.var)) {
        return Err(Error::pre("graph involves eliminated variables"));
    }
    if z.graph.ord_at_origin() < Order::Finite(1) {
        return Err(Error::pre("maximal contact must pass through the origin"));
    }
    Ok(())
}

/// `sum_j ((D_z^j I)|_{z=0}, d - j)`, with `z` the graph `x_var = graph`.
pub fn coefficient_ideal(w: &WeightedSum, z: &ChainElem) -> Result<Coeff> {
    check_chain_elem(&w.ctx, z)?;
    coefficient_ideal_with(w, z, None)
}

/// As [`coefficient_ideal`]; `zprec` is the precision of the graph itself.
pub(crate) fn coefficient_ideal_with(
    w: &WeightedSum,
    z: &ChainElem,
    zprec: Option<u32>,
) -> Result<Coeff> {
    let mut ctx = w.ctx.clone();
    ctx.chain.push(z.clone());
    let mut out = WeightedSum {
        ctx: ctx.clone(),
        summands: Vec::new(),
        floor: w.floor.clone(),
    };
    for s in &w.summands {
        for j in 0..s.d {
            let prec = pmin(s.prec.map(|p| p.saturating_sub(j)), zprec);
            let gens = s
                .gens
                .iter()
                .map(|g| g.partial_n(z.var, j).substitute_var(z.var, &z.graph))
                .collect::<Result<Vec<_>>>()?;
            let gens = reduce_generators(gens, prec);
            let d = s.d - j;
            if gens.is_empty() {
                if let Some(p) = prec {
                    let f = Rational::new(BigInt::from(p + 1), BigInt::from(d));
                    out.floor = min_floor(out.floor.take(), Some(f));
                }
                continue;
            }
            out.summands.push(Summand { gens, d, prec });
        }
    }
    if out.summands.is_empty() {
        return Ok(Coeff::Zero(ctx));
    }
    Ok(Coeff::Sum(out))
}

/// Append `(H|_N, 1)` for each divisor of the block.
pub fn add_boundary(c: Coeff, block: &[Divisor]) -> Result<Coeff> {
    let chain = c.ctx().chain.clone();
    let restricted = block
        .iter()
        .map(|d| {
            if !d.through_origin() {
                return Err(Error::pre(format!("divisor {} misses the origin", d.label)));
            }
            Ok((d.label, restrict_to_chain(&d.poly, &chain)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(add_boundary_restricted(c, &restricted, None))
}

pub(crate) fn add_boundary_restricted(
    c: Coeff,
    block: &[(Label, Poly)],
    prec: Option<u32>,
) -> Coeff {
    let (mut ctx, mut summands, floor) = match c {
        Coeff::Zero(ctx) => (ctx, Vec::new(), None),
        Coeff::Sum(w) => (w.ctx, w.summands, w.floor),
    };
    ctx.blocks.push(block.iter().map(|(l, _)| *l).collect());
    for (_, h) in block {
        let gens = reduce_generators([h.clone()], prec);
        if gens.is_empty() {
            continue;
        }
        summands.push(Summand { gens, d: 1, prec });
    }
    if summands.is_empty() {
        return Coeff::Zero(ctx);
    }
    Coeff::Sum(WeightedSum {
        ctx,
        summands,
        floor,
    })
}

/// The substitution of one blow-up chart together with its exceptional
/// coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pub images: Vec<Poly>,
    pub exc: Poly,
}

/// `(p o images) / exc^k` with `k` maximal. Returns `(k, quotient)`.
pub fn strict_transform(p: &Poly, map: &ChartMap) -> Result<(u32, Poly)> {
    let pulled = p.substitute(&map.images)?;
    if pulled.is_zero() {
        return Err(Error::pre("strict transform of zero"));
    }
    pulled.split_off(&map.exc)
}

pub fn total_transform(p: &Poly, map: &ChartMap) -> Result<Poly> {
    p.substitute(&map.images)
}

/// `(p o images) / exc^d`, failing when the division is inexact.
pub fn controlled_poly(p: &Poly, map: &ChartMap, d: u32) -> Result<Poly> {
    let pulled = p.substitute(&map.images)?;
    divide_power(&pulled, &map.exc, d)
        .map_err(|_| Error::Inadmissible("controlled transform is not divisible".into()))
}

/// Controlled transform of an ambient marked ideal.
pub fn controlled_transform(m: &MarkedIdeal, map: &ChartMap, chart: ChartId) -> Result<MarkedIdeal> {
    if !m.ctx.chain.is_empty() {
        return Err(Error::pre("controlled transform of a restricted ideal"));
    }
    let gens = m
        .gens
        .iter()
        .map(|g| controlled_poly(g, map, m.d))
        .collect::<Result<Vec<_>>>()?;
    let arity = map.exc.arity();
    MarkedIdeal::new(Context::ambient(chart, arity), gens, m.d)
}

/// The monomial `prod H^{e_H}` as a polynomial.
pub fn monomial_of(factors: &[(Poly, u32)], arity: usize) -> Poly {
    factors
        .iter()
        .fold(Poly::one(arity), |acc, (h, e)| &acc * &h.pow(*e))
}
