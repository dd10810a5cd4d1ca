//! Blowing up, choosing centers, cleaning and the scripted drivers.
//!
//! Everything is chart-local: a center is a smooth subspace through the
//! origin of one chart given by graphs `x_v = h`, each graph free of its own
//! variable and of the variables solved before it. Blowing up first
//! straightens the center to a coordinate subspace and then covers the
//! result by one chart per center variable.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::classify::{classify, iota, pp_value, Classification, Kind};
use crate::error::{Error, Result};
use crate::invariant::{compute_inv, show_chain, BirthTable, InvRecord, InvariantValue, Tail};
use crate::marked::{
    restrict_to_chain, ChainElem, Chart, ChartId, Divisor, Label, Lineage,
};
use crate::poly::{Order, Poly, Rational};

/// Default limit on the number of blow-ups in one run.
pub const DEFAULT_BUDGET: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Center {
    pub chart: ChartId,
    pub constraints: Vec<ChainElem>,
}

impl Center {
    pub fn origin(chart: ChartId, arity: usize) -> Center {
        Center {
            chart,
            constraints: (0..arity).rev().map(|v| ChainElem::coordinate(arity, v)).collect(),
        }
    }

    /// The coordinate subspace `x_v = 0` for `v` in `vars`.
    pub fn coordinates(chart: ChartId, arity: usize, vars: &[usize]) -> Center {
        Center {
            chart,
            constraints: vars.iter().map(|&v| ChainElem::coordinate(arity, v)).collect(),
        }
    }

    pub fn codim(&self) -> usize {
        self.constraints.len()
    }

    /// Center variables in increasing index order.
    pub fn vars(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.constraints.iter().map(|c| c.var).collect();
        s.into_iter().collect()
    }

    pub fn show(&self, vars: &[String]) -> String {
        if self.constraints.len() == vars.len() {
            return "{0}".into();
        }
        show_chain(&self.constraints, vars)
    }

    fn check(&self, arity: usize) -> Result<()> {
        let mut seen: Vec<usize> = Vec::new();
        for c in &self.constraints {
            if c.var >= arity || c.graph.arity() != arity {
                return Err(Error::Inadmissible("center constraint out of range".into()));
            }
            if seen.contains(&c.var) || c.graph.involves(c.var) {
                return Err(Error::Inadmissible("center constraints are not independent".into()));
            }
            if seen.iter().any(|&v| c.graph.involves(v)) {
                return Err(Error::Inadmissible(
                    "center is not a coordinate subspace after normalization".into(),
                ));
            }
            if !c.graph.constant_term().is_zero() {
                return Err(Error::Inadmissible("center misses the chart origin".into()));
            }
            seen.push(c.var);
        }
        if seen.is_empty() {
            return Err(Error::Inadmissible("empty center".into()));
        }
        Ok(())
    }

    /// Images of the chart coordinates in coordinates where the center is
    /// `x_v = 0` for its variables.
    pub fn straightening(&self, arity: usize) -> Result<Vec<Poly>> {
        self.check(arity)?;
        let mut images: Vec<Poly> = (0..arity).map(|i| Poly::var(arity, i)).collect();
        for c in self.constraints.iter().rev() {
            let g = c.graph.substitute(&images)?;
            images[c.var] = &Poly::var(arity, c.var) + &g;
        }
        Ok(images)
    }
}

/// Solve an order-one `h`, restricted to `prior`, for a variable not yet used.
fn divisor_constraint(h: &Poly, prior: &[ChainElem]) -> Option<ChainElem> {
    let r = restrict_to_chain(h, prior).ok()?;
    let n = r.arity();
    let lin = r.linear_coefficients();
    let v = (0..n).rev().find(|&v| {
        !prior.iter().any(|c| c.var == v)
            && !lin[v].is_zero()
            && r.degree_in(v) == Some(1)
            && r.coefficients_in(v)[1].is_constant()
    })?;
    let a = lin[v].clone();
    let rest = r.checked_sub(&Poly::var(n, v).scale(&a)).ok()?;
    let graph = (-rest).scale(&a.recip());
    if !graph.constant_term().is_zero() {
        return None;
    }
    Some(ChainElem { var: v, graph })
}

/// Hypersurface transforms carried along a history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyper {
    pub strict: Poly,
    pub total: Poly,
    /// Controlled transform of `(f, 1)`.
    pub controlled: Poly,
}

impl Hyper {
    pub fn new(f: Poly) -> Hyper {
        Hyper {
            strict: f.clone(),
            total: f.clone(),
            controlled: f,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChildChart {
    pub chart: Chart,
    pub hyper: Hyper,
}

/// Order of `p` along the coordinate subspace `x_v = 0, v in vars`.
fn order_along(p: &Poly, vars: &[usize]) -> Order {
    p.terms()
        .map(|(m, _)| vars.iter().map(|&v| m.exps()[v]).sum::<u32>())
        .min()
        .map_or(Order::Infinite, Order::Finite)
}

fn rank(rows: Vec<Vec<Rational>>) -> usize {
    let mut m = rows;
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let k = &m[i][c] / &m[r][c];
                for j in 0..cols {
                    let t = &m[r][j] * &k;
                    m[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Check that `center` may be blown up for a hypersurface of multiplicity
/// at least `marking` along it. Returns the straightening images.
pub fn admissible(chart: &Chart, center: &Center, strict: &Poly, marking: u32) -> Result<Vec<Poly>> {
    let n = chart.arity();
    let phi = center.straightening(n)?;
    let cv = center.vars();
    let moved = strict.substitute(&phi)?;
    match order_along(&moved, &cv) {
        Order::Finite(k) if k < marking => {
            return Err(Error::Inadmissible(format!(
                "the hypersurface has order {k} < {marking} along {}",
                center.show(&chart.variables)
            )))
        }
        _ => {}
    }
    let mut rows: Vec<Vec<Rational>> = cv
        .iter()
        .map(|&v| {
            let mut e = vec![Rational::zero(); n];
            e[v] = Rational::one();
            e
        })
        .collect();
    let mut outside = 0;
    for d in chart.divisors_at_origin() {
        let h = d.poly.substitute(&phi)?;
        let zero: Vec<Poly> = (0..n)
            .map(|i| if cv.contains(&i) { Poly::zero(n) } else { Poly::var(n, i) })
            .collect();
        if h.substitute(&zero)?.is_zero() {
            continue;
        }
        outside += 1;
        rows.push(h.linear_coefficients());
    }
    if rank(rows) != cv.len() + outside {
        return Err(Error::Inadmissible(format!(
            "{} is not in normal crossings with the divisors",
            center.show(&chart.variables)
        )));
    }
    Ok(phi)
}

/// Blow up `center` and return one chart per center variable.
///
/// `marking` is the multiplicity the center must have on the strict
/// transform; the new divisor gets `label` and is born next year.
pub fn blow_up(
    chart: &Chart,
    center: &Center,
    hyper: &Hyper,
    marking: u32,
    label: Label,
) -> Result<Vec<ChildChart>> {
    if center.chart != chart.id {
        return Err(Error::Inadmissible("center lives in another chart".into()));
    }
    if chart.divisors.iter().any(|d| d.label >= label) {
        return Err(Error::pre("the new divisor must come last"));
    }
    let n = chart.arity();
    let phi = admissible(chart, center, &hyper.strict, marking)?;
    let cv = center.vars();
    let mut out = Vec::with_capacity(cv.len());
    for &c in &cv {
        let exc = Poly::var(n, c);
        let mut sigma: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
        for &o in &cv {
            if o != c {
                sigma[o] = &exc * &Poly::var(n, o);
            }
        }
        let images = phi
            .iter()
            .map(|p| p.substitute(&sigma))
            .collect::<Result<Vec<_>>>()?;
        let total = hyper.total.substitute(&images)?;
        let (k, strict) = hyper.strict.substitute(&images)?.split_off(&exc)?;
        if k < marking {
            return Err(Error::Inadmissible("exceptional order below the marking".into()));
        }
        let controlled = hyper
            .controlled
            .substitute(&images)?
            .div_exact(&exc)?
            .ok_or_else(|| Error::Inadmissible("center is not contained in the hypersurface".into()))?;
        if total.div_exact(&strict)?.is_none() {
            return Err(Error::pre("total transform is not a multiple of the strict one"));
        }
        let mut divisors = Vec::new();
        for d in &chart.divisors {
            let (_, h) = d.poly.substitute(&images)?.split_off(&exc)?;
            if h.is_constant() {
                continue;
            }
            divisors.push(Divisor::new(d.label, h, d.birth_year)?);
        }
        divisors.push(Divisor::new(label, exc.clone(), chart.year + 1)?);
        let child = Chart {
            id: ChartId(usize::MAX),
            year: chart.year + 1,
            variables: chart.variables.clone(),
            lineage: Some(Lineage {
                parent: chart.id,
                center: center.constraints.iter().map(ChainElem::as_poly).collect(),
                chart_var: c,
                images,
            }),
            divisors,
        };
        child.validate()?;
        out.push(ChildChart {
            chart: child,
            hyper: Hyper {
                strict,
                total,
                controlled,
            },
        });
    }
    Ok(out)
}

/// Smallest set of labels (fewest, then lexicographically first) whose
/// exponents sum to at least one.
pub fn minimal_subset(exps: &[(Label, Rational)]) -> Option<Vec<Label>> {
    let mut e: Vec<(Label, Rational)> =
        exps.iter().filter(|(_, m)| *m > Rational::zero()).cloned().collect();
    e.sort_by_key(|(l, _)| *l);
    let n = e.len();
    for k in 1..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let s: Rational = idx.iter().map(|&i| e[i].1.clone()).sum();
            if s >= Rational::one() {
                return Some(idx.iter().map(|&i| e[i].0).collect());
            }
            // next combination in lexicographic order
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

/// The chain subspace `N_p` cut by the divisors in `labels`.
fn chain_and_divisors(chart: &Chart, chain: &[ChainElem], labels: &[Label]) -> Result<Center> {
    let mut cons: Vec<ChainElem> = chain.to_vec();
    for l in labels {
        let d = chart
            .divisor(*l)
            .ok_or_else(|| Error::pre(format!("divisor {l} is not in this chart")))?;
        let e = divisor_constraint(&d.poly, &cons).ok_or_else(|| {
            Error::Inadmissible(format!("divisor {l} is not transverse to the chain"))
        })?;
        cons.push(e);
    }
    Ok(Center {
        chart: chart.id,
        constraints: cons,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// Maximal contact subspace of the full invariant.
    Algorithm,
    /// Monomial case: chain subspace cut by divisors.
    Monomial,
    Cleaning { level: usize },
    /// The origin blow-up making `|alpha| = 2` in the ncp driver.
    Special,
}

/// Center chosen from an invariant record, with diagnostics.
#[derive(Clone, Debug)]
pub struct Selection {
    pub center: Center,
    pub kind: StepKind,
    pub diagnostics: Vec<String>,
}

fn nu1_marking(rec: &InvRecord) -> Result<u32> {
    let nu = rec.value.nu1();
    if !nu.is_integer() || nu < Rational::one() {
        return Err(Error::pre("no center at a point off the hypersurface"));
    }
    u32::try_from(nu.to_integer()).map_err(|_| Error::Overflow)
}

pub fn select_center(chart: &Chart, strict: &Poly, rec: &InvRecord) -> Result<Selection> {
    let n = chart.arity();
    let marking = nu1_marking(rec)?;
    let q = rec.value.pairs().len();
    let mut diagnostics = Vec::new();
    let picked = if !rec.exact {
        Err(Error::Inadmissible("the contact chain is only known as a jet".into()))
    } else {
        match rec.value.tail() {
            Tail::Inf => Ok((
                Center {
                    chart: chart.id,
                    constraints: rec.chain[..q].to_vec(),
                },
                StepKind::Algorithm,
            )),
            Tail::Zero => {
                let exps = &rec.levels[q].monomial;
                let s = minimal_subset(exps)
                    .ok_or_else(|| Error::pre("monomial case without a qualifying subset"))?;
                chain_and_divisors(chart, &rec.chain[..q], &s).map(|c| (c, StepKind::Monomial))
            }
            _ => return Err(Error::pre("the invariant record is truncated")),
        }
    };
    let picked = picked.and_then(|(c, k)| admissible(chart, &c, strict, marking).map(|_| (c, k)));
    let (center, kind) = match picked {
        Ok(x) => x,
        Err(e) => {
            diagnostics.push(format!("{e}; blowing up the origin instead"));
            let c = Center::origin(chart.id, n);
            admissible(chart, &c, strict, marking)?;
            (c, StepKind::Algorithm)
        }
    };
    Ok(Selection {
        center,
        kind,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Open,
    /// Origin not on the strict transform.
    Off,
    Leaf,
    Blown(usize),
}

#[derive(Clone, Debug)]
pub struct Node {
    pub chart: Chart,
    pub hyper: Hyper,
    pub births: BirthTable,
    /// Invariant of the controlled transform at the origin.
    pub record: InvRecord,
    pub class: Option<Classification>,
    pub status: Status,
    pub protected: bool,
    pub notes: Vec<String>,
}

impl Node {
    pub fn is_off(&self) -> bool {
        self.hyper.strict.is_unit()
    }

    pub fn parent(&self) -> Option<ChartId> {
        self.chart.lineage.as_ref().map(|l| l.parent)
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub node: usize,
    pub center: Center,
    pub kind: StepKind,
    pub marking: u32,
    pub children: Vec<usize>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct History {
    pub nodes: Vec<Node>,
    pub steps: Vec<Step>,
    next_label: Label,
    jobs: usize,
}

fn record_for(chart: &Chart, hyper: &Hyper, births: &BirthTable) -> Result<InvRecord> {
    if hyper.strict.is_unit() {
        return compute_inv(chart, &hyper.strict, births);
    }
    compute_inv(chart, &hyper.controlled, births)
}

impl History {
    pub fn new(root: Chart, f: Poly, births: BirthTable) -> Result<History> {
        let hyper = Hyper::new(f);
        let record = record_for(&root, &hyper, &births)?;
        let next_label = root.divisors.iter().map(|d| d.label + 1).max().unwrap_or(0);
        let node = Node {
            chart: root,
            hyper,
            births,
            record,
            class: None,
            status: Status::Open,
            protected: false,
            notes: Vec::new(),
        };
        let mut h = History {
            nodes: vec![node],
            steps: Vec::new(),
            next_label,
            jobs: 1,
        };
        if h.nodes[0].is_off() {
            h.nodes[0].status = Status::Off;
        }
        Ok(h)
    }

    /// Worker threads for computing sibling records.
    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        match self.nodes[id].status {
            Status::Blown(s) => &self.steps[s].children,
            _ => &[],
        }
    }

    pub fn step_of(&self, id: usize) -> Option<&Step> {
        match self.nodes[id].status {
            Status::Blown(s) => Some(&self.steps[s]),
            _ => None,
        }
    }

    /// Node ids in depth-first order, children in chart-variable order.
    pub fn dfs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &c in self.children(id).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.dfs()
            .into_iter()
            .filter(|&i| !matches!(self.nodes[i].status, Status::Blown(_)))
            .collect()
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent().map(|c| c.0)
    }

    /// Root to `id`, inclusive.
    pub fn path(&self, id: usize) -> Vec<usize> {
        let mut p = vec![id];
        let mut cur = id;
        while let Some(q) = self.parent(cur) {
            p.push(q);
            cur = q;
        }
        p.reverse();
        p
    }

    /// Follow chart variables from the root.
    pub fn descend(&self, chart_vars: &[usize]) -> Option<usize> {
        let mut cur = 0;
        for &v in chart_vars {
            cur = *self.children(cur).iter().find(|&&c| {
                self.nodes[c].chart.lineage.as_ref().map(|l| l.chart_var) == Some(v)
            })?;
        }
        Some(cur)
    }

    pub fn blowups(&self) -> usize {
        self.steps.len()
    }

    /// Execute one admissible blow-up at node `id`.
    pub fn blow_up(&mut self, id: usize, center: Center, kind: StepKind, marking: u32) -> Result<Vec<usize>> {
        if self.nodes[id].status != Status::Open && self.nodes[id].status != Status::Leaf {
            return Err(Error::pre(format!("chart {id} is already blown up or off")));
        }
        if self.nodes[id].protected {
            return Err(Error::Inadmissible(format!(
                "{} meets a protected point",
                center.show(&self.nodes[id].chart.variables)
            )));
        }
        let node = &self.nodes[id];
        let label = self.next_label;
        let kids = blow_up(&node.chart, &center, &node.hyper, marking, label)?;
        let parent_rec = node.record.clone();
        let year = node.chart.year + 1;
        let records = self.child_records(&kids, &parent_rec, year)?;
        self.next_label += 1;
        let step_id = self.steps.len();
        let mut ids = Vec::with_capacity(kids.len());
        for (mut kid, (births, record)) in kids.into_iter().zip(records) {
            let cid = self.nodes.len();
            kid.chart.id = ChartId(cid);
            let mut node = Node {
                chart: kid.chart,
                hyper: kid.hyper,
                births,
                record,
                class: None,
                status: Status::Open,
                protected: false,
                notes: Vec::new(),
            };
            if node.is_off() {
                node.status = Status::Off;
            }
            self.nodes.push(node);
            ids.push(cid);
        }
        self.steps.push(Step {
            node: id,
            center,
            kind,
            marking,
            children: ids.clone(),
            diagnostics: Vec::new(),
        });
        self.nodes[id].status = Status::Blown(step_id);
        Ok(ids)
    }

    fn child_records(
        &self,
        kids: &[ChildChart],
        parent: &InvRecord,
        year: u32,
    ) -> Result<Vec<(BirthTable, InvRecord)>> {
        let one = |k: &ChildChart| -> Result<(BirthTable, InvRecord)> {
            let b = BirthTable::inherit(parent, year);
            let r = record_for(&k.chart, &k.hyper, &b)?;
            Ok((b, r))
        };
        if self.jobs <= 1 || kids.len() < 2 {
            return kids.iter().map(one).collect();
        }
        let chunk = kids.len().div_ceil(self.jobs);
        let parts: Vec<Result<Vec<_>>> = std::thread::scope(|s| {
            let handles: Vec<_> = kids
                .chunks(chunk)
                .map(|ks| s.spawn(move || ks.iter().map(one).collect::<Result<Vec<_>>>()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::pre("worker panicked"))))
                .collect()
        });
        let mut out = Vec::with_capacity(kids.len());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    fn classify_node(&mut self, id: usize) -> Kind {
        let n = &self.nodes[id];
        let c = classify(&n.chart, &n.hyper.strict, &n.record, None);
        let k = c.kind.clone();
        self.nodes[id].class = Some(c);
        k
    }

    /// Recompute the record of `id` with births of levels `>= level`
    /// restarted in the current year.
    fn restart(&mut self, id: usize, level: usize) -> Result<()> {
        let n = &self.nodes[id];
        let year = n.chart.year;
        let births = n.births.clone().with_reset(level, year);
        let record = record_for(&n.chart, &n.hyper, &births)?;
        let n = &mut self.nodes[id];
        n.births = births;
        n.record = record;
        n.notes.push(format!(
            "births of levels >= {} restarted in year {year} after cleaning",
            level + 1
        ));
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Driver {
    /// The invariant algorithm, stopping where the value is at most `until`.
    Paper { until: Option<InvariantValue> },
    /// Run the algorithm until the value equals `at` (at once when absent),
    /// then clean at `level` and stop.
    Clean { at: Option<InvariantValue>, level: usize },
    /// Minimal singularities in dimension two.
    Min3,
    /// Pinch point cleaning of Theorem 1.15 (I), then as `Min3`.
    Ncp,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub driver: Driver,
    pub budget: usize,
}

impl RunConfig {
    pub fn new(driver: Driver) -> Self {
        RunConfig {
            driver,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Then {
    Leaf,
    Resume,
    Alpha,
    Special,
    Min3,
}

#[derive(Clone, Debug)]
struct Cleaning {
    level: usize,
    exps: Vec<(Label, Rational)>,
    then: Then,
}

#[derive(Clone, Debug)]
enum Mode {
    Algo { cleaned: bool },
    Clean(Cleaning),
    Reduce,
    Min3 { cleaned: bool },
}

struct Engine<'a> {
    h: &'a mut History,
    cfg: &'a RunConfig,
    stack: Vec<(usize, Mode)>,
}

impl Engine<'_> {
    fn step(&mut self, id: usize, center: Center, kind: StepKind) -> Result<Vec<usize>> {
        if self.h.blowups() >= self.cfg.budget {
            return Err(Error::Budget(self.cfg.budget));
        }
        let marking = nu1_marking(&self.h.nodes[id].record)?;
        self.h.blow_up(id, center, kind, marking)
    }

    fn push_children(&mut self, kids: Vec<usize>, mode: impl Fn(usize) -> Mode) {
        for &c in kids.iter().rev() {
            self.stack.push((c, mode(c)));
        }
    }

    fn algorithm_step(&mut self, id: usize, next: Mode) -> Result<()> {
        let n = &self.h.nodes[id];
        let sel = select_center(&n.chart, &n.hyper.strict, &n.record)?;
        let kids = self.step(id, sel.center, sel.kind)?;
        let s = self.h.steps.len() - 1;
        self.h.steps[s].diagnostics = sel.diagnostics;
        self.push_children(kids, |_| next.clone());
        Ok(())
    }

    fn leaf(&mut self, id: usize) {
        self.h.nodes[id].status = Status::Leaf;
        self.h.classify_node(id);
    }

    fn start_cleaning(&mut self, id: usize, level: usize, then: Then) -> Result<()> {
        let rec = &self.h.nodes[id].record;
        if level == 0 || level >= rec.value.pairs().len() || level >= rec.levels.len() {
            return Err(Error::pre(format!(
                "cleaning level {level} is out of range for {}",
                rec.value
            )));
        }
        let exps = rec.levels[level].monomial.clone();
        self.stack.push((id, Mode::Clean(Cleaning { level, exps, then })));
        Ok(())
    }

    fn clean(&mut self, id: usize, st: Cleaning) -> Result<()> {
        let node = &self.h.nodes[id];
        let here: Vec<(Label, Rational)> = st
            .exps
            .iter()
            .filter(|(l, _)| node.chart.divisor(*l).is_some_and(Divisor::through_origin))
            .cloned()
            .collect();
        let rec = &node.record;
        let usable = rec.exact && rec.chain.len() >= st.level;
        let subset = if usable { minimal_subset(&here) } else { None };
        let Some(s) = subset else {
            return self.finish_cleaning(id, st.level, &here, st.then);
        };
        let center = chain_and_divisors(&node.chart, &rec.chain[..st.level], &s)?;
        let chain_vars: Vec<usize> = center.constraints[..st.level].iter().map(|c| c.var).collect();
        let div_var: Vec<(usize, Label)> = center.constraints[st.level..]
            .iter()
            .map(|c| c.var)
            .zip(s.iter().copied())
            .collect();
        let total: Rational = here
            .iter()
            .filter(|(l, _)| s.contains(l))
            .map(|(_, m)| m.clone())
            .sum();
        let label = self.h.next_label;
        let kids = self.step(id, center, StepKind::Cleaning { level: st.level })?;
        for &c in kids.iter().rev() {
            let var = self.h.nodes[c].chart.lineage.as_ref().map(|l| l.chart_var);
            let mut exps: Vec<(Label, Rational)> = Vec::new();
            if !var.is_some_and(|v| chain_vars.contains(&v)) {
                let dropped = div_var.iter().find(|(v, _)| Some(*v) == var).map(|(_, l)| *l);
                exps = here.iter().filter(|(l, _)| Some(*l) != dropped).cloned().collect();
                let e = &total - Rational::one();
                if e > Rational::zero() {
                    exps.push((label, e));
                }
            }
            self.stack.push((
                c,
                Mode::Clean(Cleaning {
                    level: st.level,
                    exps,
                    then: st.then,
                }),
            ));
        }
        Ok(())
    }

    fn finish_cleaning(&mut self, id: usize, level: usize, left: &[(Label, Rational)], then: Then) -> Result<()> {
        match then {
            Then::Leaf => self.leaf(id),
            Then::Resume => {
                self.h.restart(id, level)?;
                self.stack.push((id, Mode::Min3 { cleaned: true }));
            }
            Then::Alpha => self.start_or_skip(id, 1, Then::Special)?,
            Then::Special => {
                let alpha: Rational = left.iter().map(|(_, m)| m * Rational::from_integer(2.into())).sum();
                if alpha == Rational::one() {
                    let node = &self.h.nodes[id];
                    let rec = &node.record;
                    let q = rec.value.pairs().len();
                    if *rec.value.tail() != Tail::Inf || !rec.exact {
                        return Err(Error::pre("special blow-up needs a complete exact chain"));
                    }
                    let labels: Vec<Label> = left.iter().map(|(l, _)| *l).collect();
                    let center = chain_and_divisors(&node.chart, &rec.chain[..q], &labels)?;
                    let kids = self.step(id, center, StepKind::Special)?;
                    for &c in kids.iter().rev() {
                        let exps = self.h.nodes[c].record.levels.get(1).map(|l| l.monomial.clone());
                        match exps {
                            Some(exps) if self.h.nodes[c].record.value.pairs().len() > 1 => {
                                self.stack.push((c, Mode::Clean(Cleaning { level: 1, exps, then: Then::Min3 })))
                            }
                            _ => self.stack.push((c, Mode::Min3 { cleaned: false })),
                        }
                    }
                } else {
                    self.stack.push((id, Mode::Min3 { cleaned: true }));
                }
            }
            Then::Min3 => self.stack.push((id, Mode::Min3 { cleaned: true })),
        }
        Ok(())
    }

    fn start_or_skip(&mut self, id: usize, level: usize, then: Then) -> Result<()> {
        let rec = &self.h.nodes[id].record;
        if level < rec.value.pairs().len() && rec.exact {
            self.start_cleaning(id, level, then)
        } else {
            self.finish_cleaning(id, level, &[], then)
        }
    }

    fn min3(&mut self, id: usize, cleaned: bool) -> Result<()> {
        let kind = self.h.classify_node(id);
        let protect = matches!(kind, Kind::Pp | Kind::Nc { k: 2..=3, .. });
        if protect {
            self.h.nodes[id].protected = true;
            self.h.nodes[id].status = Status::Leaf;
            return Ok(());
        }
        let rec = &self.h.nodes[id].record;
        if rec.value == iota(2) && !cleaned {
            return self.start_cleaning(id, 1, Then::Resume);
        }
        self.algorithm_step(id, Mode::Min3 { cleaned: false })
    }

    fn visit(&mut self, id: usize, mode: Mode) -> Result<()> {
        let node = &self.h.nodes[id];
        if node.is_off() {
            self.h.nodes[id].status = Status::Off;
            return Ok(());
        }
        if node.hyper.strict.ord_at_origin() <= Order::Finite(1) {
            self.leaf(id);
            return Ok(());
        }
        match mode {
            Mode::Clean(st) => self.clean(id, st),
            Mode::Min3 { cleaned } => self.min3(id, cleaned),
            Mode::Reduce => {
                let v = self.h.nodes[id].record.value.clone();
                match v.cmp(&pp_value()) {
                    std::cmp::Ordering::Greater => self.algorithm_step(id, Mode::Reduce),
                    std::cmp::Ordering::Equal => self.start_or_skip(id, 2, Then::Alpha),
                    std::cmp::Ordering::Less => self.min3(id, false),
                }
            }
            Mode::Algo { cleaned } => match &self.cfg.driver {
                Driver::Paper { until } => {
                    let v = &self.h.nodes[id].record.value;
                    if until.as_ref().is_some_and(|u| v <= u) {
                        self.leaf(id);
                        return Ok(());
                    }
                    self.algorithm_step(id, Mode::Algo { cleaned })
                }
                Driver::Clean { at, level } => {
                    let v = &self.h.nodes[id].record.value;
                    if !cleaned && at.as_ref().map_or(true, |a| a == v) {
                        return self.start_cleaning(id, *level, Then::Leaf);
                    }
                    self.algorithm_step(id, Mode::Algo { cleaned })
                }
                Driver::Min3 => self.min3(id, cleaned),
                Driver::Ncp => self.visit(id, Mode::Reduce),
            },
        }
    }
}

/// Run a driver from the open root of `h` until every chart origin is settled.
pub fn run(h: &mut History, cfg: &RunConfig) -> Result<()> {
    let mut e = Engine {
        h,
        cfg,
        stack: vec![(0, Mode::Algo { cleaned: false })],
    };
    while let Some((id, mode)) = e.stack.pop() {
        e.visit(id, mode)?;
    }
    Ok(())
}

/// Clean the monomial part of level `level` at the root of `h`, then stop.
pub fn clean(h: &mut History, level: usize, budget: usize) -> Result<()> {
    let cfg = RunConfig {
        driver: Driver::Clean { at: None, level },
        budget,
    };
    run(h, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn history(vars: &[&str], f: &str, year: u32, divs: &[(&str, u32)]) -> History {
        let vs = names(vars);
        let divisors = divs
            .iter()
            .enumerate()
            .map(|(i, (p, y))| Divisor::new(i as Label, parse_poly(p, &vs).unwrap(), *y).unwrap())
            .collect();
        let chart = Chart::root(vs.clone(), year, divisors).unwrap();
        let f = parse_poly(f, &vs).unwrap();
        History::new(chart, f, BirthTable::fresh(year)).unwrap()
    }

    fn show(h: &History, id: usize, p: &Poly) -> String {
        h.nodes[id].chart.show(p)
    }

    const XYZ: &[&str] = &["x", "y", "z"];

    #[test]
    fn example_1_12_path() {
        let mut h = history(XYZ, "z^2 + x^3*y^2", 0, &[]);
        run(&mut h, &RunConfig::new(Driver::Paper { until: None })).unwrap();
        let vals: Vec<String> = [vec![], vec![0], vec![0, 0], vec![0, 0, 1]]
            .iter()
            .map(|p| h.nodes[h.descend(p).unwrap()].record.value.to_string())
            .collect();
        assert_eq!(
            vals,
            ["(2,0,5/2,0,1,0,inf)", "(2,0,1,1,1,0,inf)", "(2,0,1,0,inf)", "(2,0,0)"]
        );
        let t = |p: &[usize]| {
            let id = h.descend(p).unwrap();
            show(&h, id, &h.nodes[id].hyper.total)
        };
        let want = |s: &str| parse_poly(s, &names(XYZ)).unwrap().display(&names(XYZ)).to_string();
        assert_eq!(t(&[0]), want("x^2*(z^2 + x^3*y^2)"));
        assert_eq!(t(&[0, 0]), want("x^4*(z^2 + x^3*y^2)"));
        assert_eq!(t(&[0, 0, 1]), want("x^4*y^2*(z^2 + x^3)"));
        for &l in &h.leaves() {
            assert!(h.nodes[l].is_off() || h.nodes[l].hyper.strict.ord_at_origin() == Order::Finite(1));
        }
    }

    #[test]
    fn example_1_12_clean_branch() {
        let mut h = history(XYZ, "z^2 + x^3*y^2", 0, &[]);
        let at: InvariantValue = "(2,0,1,0,inf)".parse().unwrap();
        run(&mut h, &RunConfig::new(Driver::Clean { at: Some(at), level: 1 })).unwrap();
        let id = h.descend(&[0, 0, 0]).unwrap();
        let n = &h.nodes[id];
        let want = parse_poly("x^6*(z^2 + x*y^2)", &names(XYZ)).unwrap();
        assert_eq!(n.hyper.total, want);
        assert_eq!(n.class.as_ref().unwrap().kind, Kind::Pp);
        let parent = h.descend(&[0, 0]).unwrap();
        let step = h.step_of(parent).unwrap();
        assert_eq!(step.center.show(&names(XYZ)), "(z=x=0)");
    }

    #[test]
    fn cleaning_ladder() {
        for a in 2..=7u32 {
            let f = format!("z^2 + x^{a}*y^2");
            let mut h = history(XYZ, &f, 1, &[("x", 1)]);
            clean(&mut h, 1, DEFAULT_BUDGET).unwrap();
            assert_eq!(h.blowups(), (a / 2) as usize, "alpha {a}");
            let path: Vec<usize> = vec![0; (a / 2) as usize];
            let id = h.descend(&path).unwrap();
            let k = h.nodes[id].class.clone().unwrap().kind;
            if a % 2 == 0 {
                assert!(matches!(k, Kind::Nc { k: 2, .. }), "alpha {a}: {k}");
            } else {
                assert_eq!(k, Kind::Pp, "alpha {a}");
            }
        }
    }

    #[test]
    fn a2_centers() {
        let mut h = history(XYZ, "z^2 + x*y^2", 0, &[]);
        run(&mut h, &RunConfig::new(Driver::Paper { until: None })).unwrap();
        let vs = names(XYZ);
        let c = |p: &[usize]| h.step_of(h.descend(p).unwrap()).unwrap().center.show(&vs);
        assert_eq!(c(&[]), "{0}");
        assert_eq!(c(&[0]), "{0}");
        assert_eq!(c(&[0, 0]), "(z=y=0)");
        assert_eq!(c(&[0, 1]), "{0}");
        assert!(h.blowups() <= DEFAULT_BUDGET);
        let y = h.descend(&[0, 1]).unwrap();
        assert_eq!(h.nodes[y].record.value.to_string(), "(2,0,0)");
        assert_eq!(
            h.nodes[y].hyper.controlled,
            parse_poly("x*y^2*(z^2 + x*y)", &vs).unwrap()
        );
    }

    #[test]
    fn exc_from_blow_up() {
        let vs = names(&["u", "x", "y", "z"]);
        let chart = Chart::root(vs.clone(), 0, Vec::new()).unwrap();
        let f = parse_poly("z^2 + u*y*(y + x^2)^2", &vs).unwrap();
        let center = Center::coordinates(ChartId(0), 4, &[3, 2, 0]);
        let kids = blow_up(&chart, &center, &Hyper::new(f), 2, 0).unwrap();
        let u = kids.iter().find(|k| k.chart.lineage.as_ref().unwrap().chart_var == 0).unwrap();
        assert_eq!(u.hyper.strict, parse_poly("z^2 + y*(u*y + x^2)^2", &vs).unwrap());
    }

    #[test]
    fn inadmissible_centers() {
        let vs = names(XYZ);
        let chart = Chart::root(vs.clone(), 0, vec![Divisor::new(0, parse_poly("x + y", &vs).unwrap(), 0).unwrap()])
            .unwrap();
        let f = Hyper::new(parse_poly("z^2 + x*y^2", &vs).unwrap());
        // not in the double locus
        let c = Center::coordinates(ChartId(0), 3, &[2]);
        assert!(matches!(blow_up(&chart, &c, &f, 2, 1), Err(Error::Inadmissible(_))));
        // (z=x=0) meets x+y=0 tangentially along nothing but is not snc with it
        let c = Center::coordinates(ChartId(0), 3, &[2, 1]);
        assert!(blow_up(&chart, &c, &f, 2, 1).is_ok());
        let g = Hyper::new(parse_poly("z^2 + x^2*y^2", &vs).unwrap());
        let c = Center::coordinates(ChartId(0), 3, &[2, 0]);
        assert!(blow_up(&chart, &c, &g, 2, 1).is_ok());
        let c = Center {
            chart: ChartId(0),
            constraints: vec![ChainElem { var: 2, graph: parse_poly("x + 1", &vs).unwrap() }],
        };
        assert!(blow_up(&chart, &c, &f, 1, 1).is_err());
    }

    #[test]
    fn ncp_reaches_pinch_points() {
        let vs = names(&["u", "x", "y", "z"]);
        let f = "z^2 + (y + u*x)^2*(y - 2u*x)";
        let divisors = vec![Divisor::new(0, parse_poly("u", &vs).unwrap(), 1).unwrap()];
        let chart = Chart::root(vs.clone(), 1, divisors).unwrap();
        let births = BirthTable::fresh(1).with_override(1, 0).with_override(2, 0);
        let mut h = History::new(chart, parse_poly(f, &vs).unwrap(), births).unwrap();
        assert_eq!(h.root().record.value, pp_value());
        let mut cfg = RunConfig::new(Driver::Ncp);
        cfg.budget = 32;
        run(&mut h, &cfg).unwrap();
        let kinds: Vec<StepKind> = h.steps.iter().map(|s| s.kind).collect();
        assert!(kinds.contains(&StepKind::Cleaning { level: 2 }));
        assert!(kinds.contains(&StepKind::Special));
        let pp = h
            .leaves()
            .into_iter()
            .filter(|&l| h.nodes[l].class.as_ref().is_some_and(|c| c.kind == Kind::Pp))
            .count();
        assert!(pp >= 1);
    }

    #[test]
    fn min3_leaves() {
        for f in ["z^2 + x^3*y^2", "z^2 + x^5*y^2"] {
            let mut h = history(XYZ, f, 0, &[]);
            run(&mut h, &RunConfig::new(Driver::Min3)).unwrap();
            for l in h.leaves() {
                let n = &h.nodes[l];
                if n.is_off() {
                    continue;
                }
                let k = n.class.as_ref().unwrap().kind.clone();
                assert!(
                    matches!(k, Kind::Smooth | Kind::Pp | Kind::Nc { k: 2, .. } | Kind::MonomialCase),
                    "{f}: {k}"
                );
            }
            for s in &h.steps {
                assert!(!h.nodes[s.node].protected);
            }
        }
    }
}
