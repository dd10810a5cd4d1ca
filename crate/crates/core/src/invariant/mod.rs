//! The invariant `inv(a) = (nu_1, s_1, ..., nu_q, s_q, nu_{q+1})` at a chart origin.
//!
//! Each level takes the companion ideal of the current marked ideal, picks a
//! maximal contact hypersurface among the order-one derivatives, passes to
//! the coefficient ideal on it and adds the block of old divisors. Levels are
//! kept in "level coordinates": the chart coordinates after the coordinate
//! changes needed to make each contact hypersurface a coordinate hyperplane.
//! When every contact hypersurface is a graph over a coordinate these are the
//! chart coordinates themselves and the computation is exact. Otherwise the
//! change is computed as a truncated jet and precision is tracked.

mod value;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::marked::{
    add_boundary_restricted, coefficient_ideal_with, companion, coordinate_index, monomial_data,
    ChainElem, Chart, Coeff, Context, Label, MarkedIdeal, Summand, Weight, WeightedSum,
};
use crate::poly::{Order, Poly, Rational};

pub use value::{compare, InvariantValue, Level, Tail};

/// Smallest jet degree tried when a contact hypersurface is not a graph.
pub const DEFAULT_PRECISION: u32 = 8;

/// Automatic precision grows by four on a truncation failure up to this degree.
pub const MAX_PRECISION: u32 = 32;

/// Years of birth of the truncations `inv_{k+1/2}` along a history path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirthTable {
    year: u32,
    inherited: Option<(InvariantValue, Vec<u32>)>,
    overrides: BTreeMap<usize, u32>,
    reset: Option<(usize, u32)>,
}

impl BirthTable {
    /// No history: `nu_1` counts as born in year zero, deeper levels now.
    pub fn fresh(year: u32) -> Self {
        BirthTable {
            year,
            inherited: None,
            overrides: BTreeMap::new(),
            reset: None,
        }
    }

    /// Births for a chart of `year` lying over the point described by `parent`.
    pub fn inherit(parent: &InvRecord, year: u32) -> Self {
        BirthTable {
            year,
            inherited: Some((parent.value.clone(), parent.births.clone())),
            overrides: BTreeMap::new(),
            reset: None,
        }
    }

    pub fn year(&self) -> u32 {
        self.year
    }

    /// Pin the birth year of level `k` (zero based).
    pub fn with_override(mut self, k: usize, year: u32) -> Self {
        self.overrides.insert(k, year);
        self
    }

    /// Treat levels `k..` as born no earlier than `year` (restart after cleaning).
    pub fn with_reset(mut self, k: usize, year: u32) -> Self {
        self.reset = Some((k, year));
        self
    }

    pub fn reset(&self) -> Option<(usize, u32)> {
        self.reset
    }

    /// Birth year of `prefix = inv_{k+1/2}`; `prev` is the year of level `k - 1`.
    pub fn birth(&self, k: usize, prefix: &InvariantValue, prev: Option<u32>) -> u32 {
        let mut b = if let Some(&y) = self.overrides.get(&k) {
            y
        } else {
            let from_parent = self.inherited.as_ref().and_then(|(v, births)| {
                let t = v.truncate(Level::Half(k)).ok()?;
                if &t == prefix {
                    births.get(k).copied()
                } else {
                    None
                }
            });
            match from_parent {
                Some(y) => y,
                None if k == 0 && self.inherited.is_none() => 0,
                None => self.year,
            }
        };
        if let Some((level, y)) = self.reset {
            if k >= level {
                b = b.max(y);
            }
        }
        b.max(prev.unwrap_or(0))
    }
}

/// What happened at one level `i` of the computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRecord {
    /// `I^i` on the current contact subspace.
    pub ideal: Coeff,
    /// Divisors of `I^i` not yet assigned to a block.
    pub active: Vec<Label>,
    /// Normalized monomial exponents `mu_H`.
    pub monomial: Vec<(Label, Rational)>,
    pub nu: Weight,
    pub companion: Option<WeightedSum>,
    /// Contact hypersurface chosen in level coordinates.
    pub contact: Option<ChainElem>,
    /// Every valid order-one candidate, best first.
    pub alternatives: Vec<Poly>,
    /// `E^{i+1}`.
    pub boundary: Vec<Label>,
    /// False once a non-graph contact hypersurface was used at or before this level.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvRecord {
    pub value: InvariantValue,
    /// Birth year per computed pair.
    pub births: Vec<u32>,
    pub levels: Vec<LevelRecord>,
    /// Contact chain; in chart coordinates when `exact`.
    pub chain: Vec<ChainElem>,
    pub exact: bool,
    /// Jet precision of the level coordinates, if approximate.
    pub precision: Option<u32>,
    pub diagnostics: Vec<String>,
}

impl InvRecord {
    fn empty(value: InvariantValue) -> Self {
        InvRecord {
            value,
            births: Vec::new(),
            levels: Vec::new(),
            chain: Vec::new(),
            exact: true,
            precision: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn blocks(&self) -> Vec<Vec<Label>> {
        self.levels
            .iter()
            .take(self.value.pairs().len())
            .map(|l| l.boundary.clone())
            .collect()
    }

    pub fn residual_exponents(&self) -> Vec<Vec<(Label, Rational)>> {
        self.levels.iter().map(|l| l.monomial.clone()).collect()
    }

    pub fn truncate(&self, level: Level) -> Result<InvariantValue> {
        self.value.truncate(level)
    }
}

#[derive(Clone, Debug, Default)]
pub struct InvOptions {
    /// Jet degree for non-graph contact hypersurfaces. Zero picks one from
    /// the degree of the input and raises it while truncation gets in the way.
    pub precision: u32,
    /// `(level, k)`: use the `k`-th ranked candidate at `level` instead of the first.
    pub contact: Option<(usize, usize)>,
}

impl InvOptions {
    fn prec(&self) -> u32 {
        if self.precision == 0 {
            DEFAULT_PRECISION
        } else {
            self.precision
        }
    }

    fn with_precision(&self, precision: u32) -> InvOptions {
        InvOptions {
            precision,
            ..self.clone()
        }
    }
}

/// An order-one element of the top derivative ideal of a companion ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub poly: Poly,
    /// The variable the hypersurface is solved for.
    pub pivot: usize,
    /// `poly` is `a*x_pivot + r` with `r` free of `x_pivot`.
    pub graph: bool,
    pub transverse: bool,
    pub pure: bool,
    pub summand: usize,
    pub generator: usize,
}

impl Candidate {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .transverse
            .cmp(&self.transverse)
            .then(other.graph.cmp(&self.graph))
            .then(other.pivot.cmp(&self.pivot))
            .then(other.pure.cmp(&self.pure))
            .then(self.summand.cmp(&other.summand))
            .then(self.generator.cmp(&other.generator))
            .then_with(|| self.poly.canonical_cmp(&other.poly))
    }

    /// Rescaled so the pivot coefficient is one.
    pub fn normalized(&self) -> Poly {
        let a = self.poly.linear_coefficients()[self.pivot].clone();
        self.poly.scale(&a.recip())
    }
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for j in c..cols {
                    let t = &rows[r][j] * &f;
                    rows[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn multi_indices(vars: &[usize], total: u32) -> Vec<Vec<(usize, u32)>> {
    fn rec(vars: &[usize], left: u32, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Vec<(usize, u32)>>) {
        match vars {
            [] => {
                if left == 0 {
                    out.push(cur.clone());
                }
            }
            [v, rest @ ..] => {
                for k in (0..=left).rev() {
                    if k > 0 {
                        cur.push((*v, k));
                    }
                    rec(rest, left - k, cur, out);
                    if k > 0 {
                        cur.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, total, &mut Vec::new(), &mut out);
    out
}

fn derive(g: &Poly, alpha: &[(usize, u32)]) -> Poly {
    alpha.iter().fold(g.clone(), |acc, &(v, k)| acc.partial_n(v, k))
}

/// Ranked maximal contact candidates for `w` on its current subspace.
///
/// Only summands of maximal order (`ord = d`) contribute; within them every
/// `(d-1)`-st partial derivative of order one is a candidate. Transversality
/// is measured against `active`, given in the same coordinates as `w`.
pub fn contact_candidates(w: &WeightedSum, active: &[(Label, Poly)]) -> Vec<Candidate> {
    let free = w.ctx.free_vars();
    let div_rows: Vec<Vec<Rational>> = active.iter().map(|(_, h)| h.linear_coefficients()).collect();
    let div_rank = rank(div_rows.clone());
    let div_coords: Vec<usize> = active.iter().filter_map(|(_, h)| coordinate_index(h)).collect();
    let mut out: Vec<Candidate> = Vec::new();
    for (si, s) in w.summands.iter().enumerate() {
        if s.ord() != Order::Finite(s.d) {
            continue;
        }
        let alphas = multi_indices(&free, s.d - 1);
        for (gi, g) in s.gens.iter().enumerate() {
            if g.ord_at_origin() != Order::Finite(s.d) {
                continue;
            }
            let top = g.homogeneous_part(u64::from(s.d));
            for alpha in &alphas {
                if derive(&top, alpha).is_zero() {
                    continue;
                }
                let z = derive(g, alpha);
                let z = match s.prec {
                    Some(p) => z.truncate(u64::from(p.saturating_sub(s.d - 1))),
                    None => z,
                }
                .monic();
                let lin = z.linear_coefficients();
                let graph_vars: Vec<usize> = free
                    .iter()
                    .copied()
                    .filter(|&v| {
                        !lin[v].is_zero()
                            && z.degree_in(v) == Some(1)
                            && z.coefficients_in(v)[1].is_constant()
                    })
                    .collect();
                let graph = !graph_vars.is_empty();
                let pivot = if graph {
                    *graph_vars.iter().max().unwrap()
                } else {
                    let nonzero: Vec<usize> = free.iter().copied().filter(|&v| !lin[v].is_zero()).collect();
                    nonzero
                        .iter()
                        .copied()
                        .filter(|v| !div_coords.contains(v))
                        .max()
                        .or_else(|| nonzero.iter().copied().max())
                        .unwrap_or(0)
                };
                let mut rows = div_rows.clone();
                rows.push(lin);
                let transverse = rank(rows) == div_rank + 1;
                out.push(Candidate {
                    poly: z,
                    pivot,
                    graph,
                    transverse,
                    pure: alpha.len() <= 1,
                    summand: si,
                    generator: gi,
                });
            }
        }
    }
    out.sort_by(Candidate::rank_cmp);
    let mut seen: Vec<Poly> = Vec::new();
    out.retain(|c| {
        if seen.contains(&c.poly) {
            false
        } else {
            seen.push(c.poly.clone());
            true
        }
    });
    out
}

/// The preferred maximal contact hypersurface of a marked ideal of maximal
/// order, ignoring the boundary, with its pivot coefficient scaled to one.
pub fn find_maximal_contact(m: &MarkedIdeal) -> Result<Poly> {
    if m.ord() != Order::Finite(m.marking()) {
        return Err(Error::pre("marked ideal is not of maximal order"));
    }
    let w = m.clone().into_sum();
    contact_candidates(&w, &[])
        .first()
        .map(Candidate::normalized)
        .ok_or_else(|| Error::MaximalContact("no order-one derivative".into()))
}

/// A coordinate change `x_j -> images[j]`, images in the new coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    pub var: usize,
    pub images: Vec<Poly>,
}

impl CoordinateChange {
    pub fn identity(arity: usize, var: usize) -> Self {
        CoordinateChange {
            var,
            images: (0..arity).map(|i| Poly::var(arity, i)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, p)| *p == Poly::var(p.arity(), i))
    }

    pub fn apply(&self, p: &Poly) -> Result<Poly> {
        p.substitute(&self.images)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &CoordinateChange) -> Result<CoordinateChange> {
        let images = self
            .images
            .iter()
            .map(|p| p.substitute(&next.images))
            .collect::<Result<_>>()?;
        Ok(CoordinateChange {
            var: next.var,
            images,
        })
    }
}

/// Make `z` the coordinate hyperplane `x_i = 0` and, for a single generator
/// of degree exactly `d` in `x_i` with constant leading coefficient, shift
/// `x_i` to kill the `x_i^{d-1}` coefficient.
pub fn normalize_to_coordinate(m: &MarkedIdeal, z: &Poly) -> Result<(MarkedIdeal, CoordinateChange)> {
    if !m.ctx.chain.is_empty() {
        return Err(Error::pre("normalization works on ambient marked ideals"));
    }
    let n = m.ctx.arity;
    if z.arity() != n {
        return Err(Error::Arity {
            expected: n,
            found: z.arity(),
        });
    }
    if z.ord_at_origin() != Order::Finite(1) {
        return Err(Error::MaximalContact("hypersurface is not of order one".into()));
    }
    let lin = z.linear_coefficients();
    let i = (0..n)
        .rev()
        .find(|&v| {
            !lin[v].is_zero() && z.degree_in(v) == Some(1) && z.coefficients_in(v)[1].is_constant()
        })
        .ok_or_else(|| {
            Error::MaximalContact("hypersurface is not a graph over a coordinate".into())
        })?;
    let a = lin[i].clone();
    let r = z.checked_sub(&Poly::var(n, i).scale(&a))?;
    let mut change = CoordinateChange::identity(n, i);
    change.images[i] = Poly::var(n, i).checked_sub(&r.scale(&a.recip()))?;
    let mut gens = m
        .generators()
        .iter()
        .map(|g| change.apply(g))
        .collect::<Result<Vec<_>>>()?;
    let d = m.marking();
    if let [g] = gens.as_slice() {
        if g.degree_in(i) == Some(d) && d >= 2 {
            let cs = g.coefficients_in(i);
            let lead = &cs[d as usize];
            let sub = &cs[d as usize - 1];
            if lead.is_constant() && !sub.is_zero() {
                let k = Rational::from_integer(d.into()) * lead.constant_term();
                let mut shear = CoordinateChange::identity(n, i);
                shear.images[i] = Poly::var(n, i).checked_sub(&sub.scale(&k.recip()))?;
                gens = vec![shear.apply(g)?];
                change = change.then(&shear)?;
            }
        }
    }
    Ok((MarkedIdeal::new(m.ctx.clone(), gens, d)?, change))
}

fn pmin(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// How one level lowers polynomials to the next contact subspace.
enum Lowering {
    Graph(ChainElem),
    Jet { images: Vec<Poly>, var: usize, prec: u32 },
}

impl Lowering {
    fn apply(&self, p: &Poly) -> Result<Poly> {
        match self {
            Lowering::Graph(e) => p.substitute_var(e.var, &e.graph),
            Lowering::Jet { images, var, prec } => Ok(p
                .substitute_upto(images, Some(u64::from(*prec)))?
                .substitute_var(*var, &Poly::zero(p.arity()))?),
        }
    }
}

/// A jet coordinate change making the order-one `z` the hyperplane `x_v = 0`
/// up to degree `prec`. Returns the images of the old coordinates.
fn jet_straightening(z: &Poly, v: usize, free: &[usize], prec: u32) -> Result<Vec<Poly>> {
    let n = z.arity();
    let p = u64::from(prec);
    let lin = z.linear_coefficients();
    let z = z.scale(&lin[v].recip());
    let lin = z.linear_coefficients();
    let mut images: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
    let mut shear = Poly::var(n, v);
    for &w in free {
        if w != v && !lin[w].is_zero() {
            shear = shear.checked_sub(&Poly::var(n, w).scale(&lin[w]))?;
        }
    }
    images[v] = shear.clone();
    let straight = z.substitute_upto(&images, Some(p))?;
    let k = straight.checked_sub(&Poly::var(n, v))?;
    // k has order at least two, so pass j fixes phi up to degree j + 1
    let mut phi = Poly::zero(n);
    for j in 0..=p {
        let cut = (j + 2).min(p);
        let next = -k.substitute_var_upto(v, &phi, Some(cut))?;
        if next == phi && cut == p {
            break;
        }
        phi = next;
    }
    images[v] = shear.checked_add(&phi)?;
    Ok(images)
}

/// `compute_inv` with default options.
pub fn compute_inv(chart: &Chart, f: &Poly, births: &BirthTable) -> Result<InvRecord> {
    compute_inv_with(chart, f, births, &InvOptions::default())
}

/// The invariant at the origin of `chart` of the hypersurface `f = 0`.
pub fn compute_inv_with(
    chart: &Chart,
    f: &Poly,
    births: &BirthTable,
    opts: &InvOptions,
) -> Result<InvRecord> {
    if opts.precision != 0 {
        return compute_at(chart, f, births, opts);
    }
    // jets must at least see every term of f
    let deg = f.degree().unwrap_or(0).min(u64::from(MAX_PRECISION)) as u32;
    let mut p = DEFAULT_PRECISION.max(deg + 2);
    loop {
        match compute_at(chart, f, births, &opts.with_precision(p)) {
            Err(Error::Precision(_)) if p < MAX_PRECISION => p = (p + 4).min(MAX_PRECISION),
            r => return r,
        }
    }
}

fn compute_at(
    chart: &Chart,
    f: &Poly,
    births: &BirthTable,
    opts: &InvOptions,
) -> Result<InvRecord> {
    let n = chart.arity();
    if f.arity() != n {
        return Err(Error::Arity {
            expected: n,
            found: f.arity(),
        });
    }
    if f.is_zero() {
        return Err(Error::pre("the zero polynomial does not define a hypersurface"));
    }
    if f.is_unit() {
        return Ok(InvRecord::empty(InvariantValue::off()));
    }
    let mut rec = InvRecord::empty(InvariantValue::off());
    let mut cur = Coeff::Sum(WeightedSum {
        ctx: Context::ambient(chart.id, n),
        summands: vec![Summand::exact(vec![f.clone()], 1)],
        floor: None,
    });
    let mut active: Vec<(Label, Poly)> = Vec::new();
    for d in chart.divisors_at_origin() {
        if d.poly.ord_at_origin() != Order::Finite(1) {
            return Err(Error::pre(format!("divisor {} is singular at the origin", d.label)));
        }
        active.push((d.label, d.poly.clone()));
    }
    let year_of = |l: Label| chart.divisor(l).map_or(u32::MAX, |d| d.birth_year);
    let mut pairs: Vec<(Rational, u32)> = Vec::new();
    let mut exact = true;
    let mut frame_prec: Option<u32> = None;
    let tail = loop {
        let i = rec.levels.len();
        let labels: Vec<Label> = active.iter().map(|(l, _)| *l).collect();
        let mut level = LevelRecord {
            ideal: cur.clone(),
            active: labels,
            monomial: Vec::new(),
            nu: Weight::Infinite,
            companion: None,
            contact: None,
            alternatives: Vec::new(),
            boundary: Vec::new(),
            exact,
        };
        let w = match &cur {
            Coeff::Zero(_) => {
                rec.levels.push(level);
                break Tail::Inf;
            }
            Coeff::Sum(w) => w.clone(),
        };
        let data = monomial_data(&w, &active)?;
        level.monomial = data.mu_h.clone();
        level.nu = data.nu.clone();
        let nu = match &data.nu {
            Weight::Infinite => {
                rec.levels.push(level);
                break Tail::Inf;
            }
            Weight::Finite(q) if q.is_zero() => {
                rec.levels.push(level);
                break Tail::Zero;
            }
            Weight::Finite(q) => q.clone(),
        };
        let prefix = InvariantValue::new(pairs.clone(), Tail::Half(nu.clone()))?;
        let b = births.birth(i, &prefix, rec.births.last().copied());
        rec.births.push(b);
        let (block, rest): (Vec<_>, Vec<_>) =
            active.iter().cloned().partition(|(l, _)| year_of(*l) <= b);
        level.boundary = block.iter().map(|(l, _)| *l).collect();
        let smooth = i == 0 && nu == Rational::from_integer(1.into());
        pairs.push((nu, block.len() as u32));
        if smooth {
            // a smooth hypersurface: what follows concerns the divisors only
            rec.levels.push(level);
            break Tail::Inf;
        }

        let comp = companion(&w, &active)?;
        let cands = contact_candidates(&comp, &active);
        level.alternatives = cands
            .iter()
            .filter(|c| c.transverse)
            .map(Candidate::normalized)
            .collect();
        let pick = match opts.contact {
            Some((lvl, k)) if lvl == i => cands
                .iter()
                .filter(|c| c.transverse)
                .nth(k)
                .ok_or_else(|| Error::pre(format!("no contact alternative {k} at level {lvl}")))?,
            _ => cands
                .first()
                .ok_or_else(|| Error::MaximalContact("no order-one derivative".into()))?,
        };
        if !pick.transverse {
            return Err(Error::MaximalContact(
                "no candidate is transverse to the boundary".into(),
            ));
        }
        let (coeff, lowering, elem) = if pick.graph {
            let z = pick.normalized();
            let elem = ChainElem {
                var: pick.pivot,
                graph: Poly::var(n, pick.pivot).checked_sub(&z)?,
            };
            let c = coefficient_ideal_with(&comp, &elem, None)?;
            (c, Lowering::Graph(elem.clone()), elem)
        } else {
            let p = opts.prec();
            exact = false;
            frame_prec = pmin(frame_prec, Some(p));
            rec.diagnostics.push(format!(
                "level {i}: contact hypersurface is not a graph; using jets of degree {p}"
            ));
            let free = comp.ctx.free_vars();
            let images = jet_straightening(&pick.poly, pick.pivot, &free, p)?;
            let mut moved = WeightedSum {
                ctx: comp.ctx.clone(),
                summands: Vec::new(),
                floor: comp.floor.clone(),
            };
            for s in &comp.summands {
                let prec = pmin(s.prec, Some(p));
                let gens = s
                    .gens
                    .iter()
                    .map(|g| g.substitute_upto(&images, Some(u64::from(p))))
                    .collect::<Result<Vec<_>>>()?;
                let gens = crate::marked::reduce_generators(gens, prec);
                if gens.is_empty() {
                    let fl = Rational::new((p + 1).into(), s.d.into());
                    moved.floor = Some(moved.floor.map_or(fl.clone(), |x| x.min(fl)));
                    continue;
                }
                moved.summands.push(Summand { gens, d: s.d, prec });
            }
            let elem = ChainElem::coordinate(n, pick.pivot);
            let c = coefficient_ideal_with(&moved, &elem, Some(p.saturating_sub(1)))?;
            let lw = Lowering::Jet {
                images,
                var: pick.pivot,
                prec: p,
            };
            (c, lw, elem)
        };
        level.companion = Some(comp);
        level.contact = Some(elem.clone());
        rec.chain.push(elem);
        let lower = |set: &[(Label, Poly)]| -> Result<Vec<(Label, Poly)>> {
            set.iter()
                .map(|(l, h)| {
                    let h2 = lowering.apply(h)?;
                    if h2.ord_at_origin() != Order::Finite(1) {
                        return Err(Error::MaximalContact(format!(
                            "divisor {l} is not transverse to the contact subspace"
                        )));
                    }
                    Ok((*l, h2))
                })
                .collect()
        };
        let block_low = lower(&block)?;
        active = lower(&rest)?;
        cur = add_boundary_restricted(coeff, &block_low, frame_prec);
        rec.levels.push(level);
    };
    rec.value = InvariantValue::new(pairs, tail)?;
    rec.exact = exact;
    rec.precision = frame_prec;
    Ok(rec)
}

/// Print a chain as `(z=y=0)`; exact chains only, in chart variables.
pub fn show_chain(chain: &[ChainElem], vars: &[String]) -> String {
    if chain.len() == vars.len() && chain.iter().all(|c| c.graph.is_zero()) {
        let names: Vec<&str> = chain.iter().map(|c| vars[c.var].as_str()).collect();
        return format!("({}=0)", names.join("="));
    }
    let mut parts = Vec::new();
    let mut plain = Vec::new();
    for c in chain {
        if c.graph.is_zero() {
            plain.push(vars[c.var].clone());
        } else {
            let g = c.graph.display(vars).to_string();
            parts.push(format!("{}={}", vars[c.var], g));
        }
    }
    let mut out = String::new();
    if !plain.is_empty() {
        out.push_str(&plain.join("="));
        out.push_str("=0");
    }
    for p in parts {
        if !out.is_empty() {
            out.push_str(", ");
        }
        out.push_str(&p);
    }
    format!("({out})")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked::Divisor;
    use crate::poly::parse_poly;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn chart(vars: &[&str], year: u32, divs: &[(&str, u32)]) -> Chart {
        let vs = names(vars);
        let divisors = divs
            .iter()
            .enumerate()
            .map(|(i, (p, y))| Divisor::new(i as Label, parse_poly(p, &vs).unwrap(), *y).unwrap())
            .collect();
        Chart::root(vs, year, divisors).unwrap()
    }

    fn inv(vars: &[&str], f: &str, year: u32, divs: &[(&str, u32)]) -> InvRecord {
        let c = chart(vars, year, divs);
        let p = parse_poly(f, &c.variables).unwrap();
        compute_inv(&c, &p, &BirthTable::fresh(year)).unwrap()
    }

    const XYZ: &[&str] = &["x", "y", "z"];

    #[test]
    fn pinch_point() {
        let r = inv(XYZ, "z^2 + x*y^2", 0, &[]);
        assert_eq!(r.value.to_string(), "(2,0,3/2,0,1,0,inf)");
        let vs = names(XYZ);
        assert_eq!(show_chain(&r.chain[..1], &vs), "(z=0)");
        assert_eq!(show_chain(&r.chain[..2], &vs), "(z=y=0)");
        assert_eq!(show_chain(&r.chain, &vs), "(z=y=x=0)");
        assert!(r.exact);
    }

    #[test]
    fn year_one_with_old_divisor() {
        let r = inv(XYZ, "z^2 + x*y^2", 1, &[("x", 1)]);
        assert_eq!(r.value.to_string(), "(2,0,1,1,1,0,inf)");
        assert_eq!(r.blocks(), vec![vec![], vec![0], vec![]]);
        let t = inv(XYZ, "x*(z^2 + x*y^2)", 1, &[("x", 1)]);
        assert_eq!(t.value, r.value);
    }

    #[test]
    fn monomial_case() {
        let r = inv(XYZ, "x*y^2*(z^2 + x*y)", 2, &[("x", 1), ("y", 2)]);
        assert_eq!(r.value.to_string(), "(2,0,0)");
    }

    #[test]
    fn normal_crossings() {
        assert_eq!(inv(&["x"], "x", 0, &[]).value.to_string(), "(1,0,inf)");
        assert_eq!(
            inv(XYZ, "x*y*z", 0, &[]).value.to_string(),
            "(3,0,1,0,1,0,inf)"
        );
        assert_eq!(
            inv(XYZ, "x^3 + y^3 + z^3", 0, &[]).value.to_string(),
            "(3,0,1,0,1,0,inf)"
        );
        assert_eq!(inv(XYZ, "1 + x", 0, &[]).value.to_string(), "(0)");
    }

    #[test]
    fn catalog_values() {
        let dpp = inv(XYZ, "z^2 + (y + 2*x^2)*(y - x^2)^2", 0, &[]);
        assert_eq!(dpp.value.to_string(), "(2,0,3/2,0,2,0,inf)");
        let iso = inv(XYZ, "z^2 + y^3 + x^3", 0, &[]);
        assert_eq!(iso.value.to_string(), "(2,0,3/2,0,1,0,inf)");
        let e = inv(XYZ, "z^2 + x^3*y^2", 0, &[]);
        assert_eq!(e.value.to_string(), "(2,0,5/2,0,1,0,inf)");
    }

    #[test]
    fn non_graph_contact_matches_graph_value() {
        // (z + x^2 + y)^2 + x*y^2 after substituting y -> y - z^2 style shears
        let a = inv(XYZ, "z^2 + x*y^2", 0, &[]);
        let b = inv(XYZ, "(z + y^2 + x*z^2)^2 + x*(y + z^3)^2", 0, &[]);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn contact_alternatives_agree() {
        let c = chart(XYZ, 0, &[]);
        let f = parse_poly("z^2 + x*y^2", &c.variables).unwrap();
        let base = compute_inv(&c, &f, &BirthTable::fresh(0)).unwrap();
        assert_eq!(base.levels[1].alternatives.len(), 2);
        for k in 0..2 {
            let opts = InvOptions {
                contact: Some((1, k)),
                ..InvOptions::default()
            };
            let r = compute_inv_with(&c, &f, &BirthTable::fresh(0), &opts).unwrap();
            assert_eq!(r.value, base.value);
        }
    }

    #[test]
    fn maximal_contact_choice() {
        let vs = names(XYZ);
        let ctx = Context::ambient(crate::marked::ChartId(0), 3);
        let m = MarkedIdeal::new(ctx.clone(), vec![parse_poly("z^2+x*y^2", &vs).unwrap()], 2).unwrap();
        assert_eq!(find_maximal_contact(&m).unwrap(), parse_poly("z", &vs).unwrap());
        let m = MarkedIdeal::new(ctx.clone(), vec![parse_poly("x*y^2", &vs).unwrap()], 3).unwrap();
        assert_eq!(find_maximal_contact(&m).unwrap(), parse_poly("y", &vs).unwrap());
        let m = MarkedIdeal::new(ctx, vec![parse_poly("y^2", &vs).unwrap()], 2).unwrap();
        assert_eq!(find_maximal_contact(&m).unwrap(), parse_poly("y", &vs).unwrap());
    }

    #[test]
    fn normalization() {
        let vs = names(XYZ);
        let ctx = Context::ambient(crate::marked::ChartId(0), 3);
        let g = parse_poly("z^2 + 2*y*z + x*y^2", &vs).unwrap();
        let m = MarkedIdeal::new(ctx.clone(), vec![g], 2).unwrap();
        let (n, ch) = normalize_to_coordinate(&m, &parse_poly("z + y", &vs).unwrap()).unwrap();
        assert_eq!(n.generators()[0], parse_poly("z^2 + x*y^2 - y^2", &vs).unwrap());
        assert!(!ch.is_identity());
        let g = parse_poly("z^2 + (y + 2*x)*(y - x)^2", &vs).unwrap();
        let m = MarkedIdeal::new(ctx, vec![g.clone()], 2).unwrap();
        let (n, ch) = normalize_to_coordinate(&m, &parse_poly("z", &vs).unwrap()).unwrap();
        assert!(ch.is_identity());
        assert_eq!(n.generators()[0], g);
    }

    #[test]
    fn births() {
        let parent: InvRecord = inv(XYZ, "z^2 + x*y^2", 0, &[]);
        let t = BirthTable::inherit(&parent, 1);
        let p: InvariantValue = "(2)".parse().unwrap();
        assert_eq!(t.birth(0, &p, None), 0);
        let q: InvariantValue = "(2,0,1)".parse().unwrap();
        assert_eq!(t.birth(1, &q, Some(0)), 1);
        let q: InvariantValue = "(2,0,3/2)".parse().unwrap();
        assert_eq!(t.birth(1, &q, Some(0)), 0);
        assert_eq!(t.clone().with_reset(1, 1).birth(1, &q, Some(0)), 1);
    }
}
