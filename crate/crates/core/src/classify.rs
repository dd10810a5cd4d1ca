//! Recognizing the catalog of minimal singularities at a chart origin.
//!
//! Kinds are decided on the singularity of the strict transform itself, so
//! the invariant used for `nc_k`, `pp` and `dpp` is the one of the bare
//! hypersurface with no divisor history. The record of the chart is only
//! consulted for the monomial case.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::invariant::{
    compute_inv, find_maximal_contact, normalize_to_coordinate, BirthTable, CoordinateChange,
    InvRecord, InvariantValue, Tail,
};
use crate::marked::{Chart, ChartId, Context, MarkedIdeal};
use crate::poly::{int, is_rational_square, Order, Poly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reason {
    OffHypersurface,
    BranchCount,
    SingCodim,
    NoRationalRoot,
    NotPrepared,
    NotInCatalog,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::OffHypersurface => "origin off the hypersurface",
            Reason::BranchCount => "branch count unresolved",
            Reason::SingCodim => "Sing codim > 2",
            Reason::NoRationalRoot => "discriminant vanishes but A is not rational",
            Reason::NotPrepared => "no Weierstrass preparation",
            Reason::NotInCatalog => "not in the catalog",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Smooth,
    /// `split` says whether the branches are defined over the rationals.
    Nc { k: u32, split: Option<bool> },
    Pp,
    Dpp,
    Prod,
    Cp3,
    Exc,
    MonomialCase,
    Inconclusive(Reason),
}

impl Kind {
    /// Short table name.
    pub fn name(&self) -> String {
        match self {
            Kind::Smooth => "smooth".into(),
            Kind::Nc { k, .. } => format!("nc{k}"),
            Kind::Pp => "pp".into(),
            Kind::Dpp => "dpp".into(),
            Kind::Prod => "prod".into(),
            Kind::Cp3 => "cp3".into(),
            Kind::Exc => "exc".into(),
            Kind::MonomialCase => "monomial".into(),
            Kind::Inconclusive(_) => "inconclusive".into(),
        }
    }

    pub fn is_definite(&self) -> bool {
        !matches!(self, Kind::Inconclusive(_))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Nc { split: Some(false), .. } => write!(f, "{} (not split)", self.name()),
            Kind::Inconclusive(r) => write!(f, "inconclusive: {}", r.as_str()),
            _ => f.write_str(&self.name()),
        }
    }
}

/// Images of the chart coordinates and the normal form they produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub change: Vec<Poly>,
    /// Equal to the changed generator up to a nonzero constant.
    pub normal_form: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub kind: Kind,
    pub witness: Option<Witness>,
}

impl Classification {
    fn plain(kind: Kind) -> Self {
        Classification { kind, witness: None }
    }

    fn inconclusive(r: Reason) -> Self {
        Classification::plain(Kind::Inconclusive(r))
    }
}

/// `(k,0,1,0,...,1,0,inf)`.
pub fn iota(k: u32) -> InvariantValue {
    let mut pairs = vec![(int(i64::from(k)), 0)];
    for _ in 1..k {
        pairs.push((int(1), 0));
    }
    InvariantValue::new(pairs, Tail::Inf).expect("positive entries")
}

fn value(s: &str) -> InvariantValue {
    s.parse().expect("well-formed constant")
}

pub fn pp_value() -> InvariantValue {
    value("(2,0,3/2,0,1,0,inf)")
}

pub fn dpp_value() -> InvariantValue {
    value("(2,0,3/2,0,2,0,inf)")
}

/// Outcome of the discriminant test on `y^3 + B y + C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discriminant {
    pub zero: bool,
    /// `A` with `B = -3A^2`, `C = 2A^3`, when the identity holds and `A` is rational.
    pub a: Option<Poly>,
}

pub fn discriminant_test(b: &Poly, c: &Poly) -> Result<Discriminant> {
    let d = b
        .checked_pow(3)?
        .scale(&int(4))
        .checked_add(&c.checked_pow(2)?.scale(&int(27)))?;
    if !d.is_zero() {
        return Ok(Discriminant { zero: false, a: None });
    }
    let a2 = b.scale(&Rational::new((-1).into(), 3.into()));
    let a = a2.sqrt_exact().and_then(|s| {
        [s.clone(), -s].into_iter().find(|a| {
            a.checked_pow(3)
                .map(|a3| a3.scale(&int(2)) == *c)
                .unwrap_or(false)
        })
    });
    Ok(Discriminant { zero: true, a })
}

/// Generators of Definitions 1.8 and 1.14 over `(w,x,y,z)`.
fn catalog() -> Vec<(Kind, Poly)> {
    let v: Vec<String> = ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let p = |s: &str| crate::poly::parse_poly(s, &v).expect("catalog form parses");
    vec![
        (Kind::Prod, p("x*(z^2 + w*y^2)")),
        (Kind::Cp3, p("z^3 + w*y^3 + w^2*x^3 - 3*w*x*y*z")),
        (Kind::Exc, p("z^2 + y*(w*y + x^2)^2")),
    ]
}

fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::new(), &mut out);
    out
}

fn match_catalog(f: &Poly) -> Option<Classification> {
    let n = f.arity();
    if !(4..=8).contains(&n) || f.support_vars().len() > 4 {
        return None;
    }
    let target = f.monic();
    for (kind, form) in catalog() {
        if form.degree() != f.degree() {
            continue;
        }
        for map in injections(n, 4) {
            let images: Vec<Poly> = map.iter().map(|&i| Poly::var(n, i)).collect();
            let Ok(g) = form.substitute(&images) else { continue };
            if g.monic() == target {
                let change = (0..n).map(|i| Poly::var(n, i)).collect();
                return Some(Classification {
                    kind,
                    witness: Some(Witness {
                        change,
                        normal_form: g,
                    }),
                });
            }
        }
    }
    None
}

/// The invariant of `f = 0` with no divisors and no history.
pub fn bare_inv(variables: &[String], f: &Poly) -> Result<InvRecord> {
    let chart = Chart::root(variables.to_vec(), 0, Vec::new())?;
    compute_inv(&chart, f, &BirthTable::fresh(0))
}

fn identity(n: usize) -> Vec<Poly> {
    (0..n).map(|i| Poly::var(n, i)).collect()
}

fn linear_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let k = &m[r][c] / &piv;
                for j in 0..cols {
                    let t = &m[rank][j] * &k;
                    m[r][j] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Symmetric matrix of the quadratic part.
fn quadric(f: &Poly) -> Vec<Vec<Rational>> {
    let n = f.arity();
    let q = f.homogeneous_part(2);
    let mut m = vec![vec![Rational::zero(); n]; n];
    for (mono, c) in q.terms() {
        let vs: Vec<usize> = (0..n).filter(|&i| mono.exps()[i] > 0).collect();
        match vs.as_slice() {
            [i] => m[*i][*i] = c.clone(),
            [i, j] => {
                let h = c / int(2);
                m[*i][*j] = h.clone();
                m[*j][*i] = h;
            }
            _ => {}
        }
    }
    m
}

fn nc_test(f: &Poly, k: u32, hint: Option<&[Poly]>) -> Classification {
    let n = f.arity();
    if let Some(factors) = hint {
        let prod = factors
            .iter()
            .try_fold(Poly::one(n), |acc, g| acc.checked_mul(g));
        let ok = factors.len() == k as usize
            && factors.iter().all(|g| g.arity() == n && g.ord_at_origin() == Order::Finite(1))
            && prod.map(|p| p.monic() == f.monic()).unwrap_or(false)
            && linear_rank(&factors.iter().map(Poly::linear_coefficients).collect::<Vec<_>>())
                == k as usize;
        if ok {
            return Classification {
                kind: Kind::Nc { k, split: Some(true) },
                witness: Some(Witness {
                    change: identity(n),
                    normal_form: f.monic(),
                }),
            };
        }
    }
    if f.len() == 1 {
        let (m, _) = f.leading_term().expect("nonzero");
        if m.exps().iter().all(|&e| e <= 1) && m.degree() == u64::from(k) {
            return Classification {
                kind: Kind::Nc { k, split: Some(true) },
                witness: Some(Witness {
                    change: identity(n),
                    normal_form: f.monic(),
                }),
            };
        }
    }
    if k == 2 {
        // ord 2, quadratic part of rank 2 and nothing left after two
        // contact steps: z^2 + y^2 up to an etale change
        let m = quadric(f);
        if linear_rank(&m) == 2 {
            let mut split = None;
            'outer: for i in 0..n {
                for j in i + 1..n {
                    let det = &m[i][i] * &m[j][j] - &m[i][j] * &m[j][i];
                    if !det.is_zero() {
                        split = Some(is_rational_square(&-det));
                        break 'outer;
                    }
                }
            }
            return Classification {
                kind: Kind::Nc { k, split },
                witness: Some(Witness {
                    change: identity(n),
                    normal_form: f.homogeneous_part(2).monic(),
                }),
            };
        }
    }
    Classification::inconclusive(Reason::BranchCount)
}

/// `z^2 + a*(y^3 + B y + C)` coordinates for an order-two `f`.
struct Prepared {
    change: Vec<Poly>,
    /// Generator after the change, divided by its `z^2` coefficient.
    generator: Poly,
    z: usize,
    y: usize,
    lead: Rational,
    b: Poly,
    c: Poly,
}

fn prepare(f: &Poly) -> Result<Option<Prepared>> {
    let n = f.arity();
    let m = MarkedIdeal::new(Context::ambient(ChartId(0), n), vec![f.clone()], 2)?;
    let zc = find_maximal_contact(&m)?;
    let (m2, ch) = normalize_to_coordinate(&m, &zc)?;
    let zi = ch.var;
    let g = m2.generators()[0].clone();
    let cs = g.coefficients_in(zi);
    if cs.len() != 3 || !cs[2].is_constant() || !cs[1].is_zero() {
        return Ok(None);
    }
    let a = cs[2].constant_term();
    let g = g.scale(&a.recip());
    let b = cs[0].scale(&a.recip());
    let others: Vec<usize> = (0..n).rev().filter(|&v| v != zi).collect();
    let mut shears: Vec<Option<(usize, i64)>> = vec![None];
    for &w in &others {
        for l in [1, -1, 2, -2] {
            shears.push(Some((w, l)));
        }
    }
    for &y in &others {
        for sh in &shears {
            let mut step = CoordinateChange::identity(n, y);
            if let Some((w, l)) = *sh {
                if w == y {
                    continue;
                }
                step.images[w] = &Poly::var(n, w) + &Poly::var(n, y).scale(&int(l));
            }
            let b1 = step.apply(&b)?;
            if b1.degree_in(y) != Some(3) {
                continue;
            }
            let ys = b1.coefficients_in(y);
            if !ys[3].is_constant() {
                continue;
            }
            let lead = ys[3].constant_term();
            let mut tsch = CoordinateChange::identity(n, y);
            tsch.images[y] = &Poly::var(n, y) - &ys[2].scale(&(int(3) * &lead).recip());
            let step = step.then(&tsch)?;
            let b2 = step.apply(&b)?.scale(&lead.recip());
            let ys = b2.coefficients_in(y);
            let full = CoordinateChange {
                var: zi,
                images: ch.images.clone(),
            }
            .then(&step)?;
            return Ok(Some(Prepared {
                change: full.images,
                generator: step.apply(&g)?,
                z: zi,
                y,
                lead,
                b: ys.get(1).cloned().unwrap_or_else(|| Poly::zero(n)),
                c: ys[0].clone(),
            }));
        }
    }
    Ok(None)
}

fn pinch_test(f: &Poly, want: &Kind) -> Result<Classification> {
    let Some(p) = prepare(f)? else {
        return Ok(Classification::inconclusive(Reason::NotPrepared));
    };
    let disc = discriminant_test(&p.b, &p.c)?;
    if !disc.zero {
        return Ok(Classification::inconclusive(Reason::SingCodim));
    }
    let Some(a) = disc.a else {
        return Ok(Classification::inconclusive(Reason::NoRationalRoot));
    };
    let n = f.arity();
    let y = Poly::var(n, p.y);
    let z = Poly::var(n, p.z);
    let l = &y - &a;
    let r = &y + &a.scale(&int(2));
    let normal = &z.pow(2) + &(&(&l * &l) * &r).scale(&p.lead);
    if normal != p.generator {
        return Err(Error::pre("prepared form does not re-expand"));
    }
    let kind = match a.ord_at_origin() {
        Order::Finite(1) => Kind::Pp,
        Order::Finite(2) => match a.sqrt_up_to_constant() {
            Some((_, s)) if s.ord_at_origin() == Order::Finite(1) => Kind::Dpp,
            _ => Kind::Inconclusive(Reason::NotInCatalog),
        },
        _ => Kind::Inconclusive(Reason::NotInCatalog),
    };
    if &kind != want {
        return Ok(Classification::plain(kind));
    }
    Ok(Classification {
        kind,
        witness: Some(Witness {
            change: p.change,
            normal_form: normal,
        }),
    })
}

/// Classify the singularity of `f = 0` at the origin of `chart`.
///
/// `record` is the invariant of the chart (with its divisor history) and
/// `hint` an optional factorization into branches.
pub fn classify(chart: &Chart, f: &Poly, record: &InvRecord, hint: Option<&[Poly]>) -> Classification {
    classify_inner(chart, f, record, hint)
        .unwrap_or_else(|_| Classification::inconclusive(Reason::NotInCatalog))
}

fn classify_inner(
    chart: &Chart,
    f: &Poly,
    record: &InvRecord,
    hint: Option<&[Poly]>,
) -> Result<Classification> {
    match f.ord_at_origin() {
        Order::Finite(0) => return Ok(Classification::inconclusive(Reason::OffHypersurface)),
        Order::Finite(1) => return Ok(Classification::plain(Kind::Smooth)),
        Order::Infinite => return Err(Error::pre("zero generator")),
        _ => {}
    }
    if let Some(c) = match_catalog(f) {
        return Ok(c);
    }
    if *record.value.tail() == Tail::Zero && !record.value.pairs().is_empty() {
        return Ok(Classification::plain(Kind::MonomialCase));
    }
    let bare = bare_inv(&chart.variables, f)?;
    let v = &bare.value;
    let nu1 = v.nu1();
    if nu1.is_integer() && nu1 >= Rational::one() {
        let k = u32::try_from(nu1.to_integer()).unwrap_or(0);
        if k > 0 && *v == iota(k) {
            return Ok(nc_test(f, k, hint));
        }
    }
    if *v == pp_value() {
        return pinch_test(f, &Kind::Pp);
    }
    if *v == dpp_value() {
        return pinch_test(f, &Kind::Dpp);
    }
    Ok(Classification::inconclusive(Reason::NotInCatalog))
}
