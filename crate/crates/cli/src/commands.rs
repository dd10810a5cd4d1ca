//! The subcommands, as functions from a scene to printed text.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use desing_core::classify::classify as classify_hyper;
use desing_core::invariant::{show_chain, InvRecord};
use desing_core::marked::{Chart, ChartId, Divisor};
use desing_core::resolve::{clean as clean_history, run, Center, Driver, History, RunConfig, Status, StepKind};
use desing_core::poly::int;
use desing_core::{compute_inv, Error, Poly, Rational, Result};

use crate::scene::Scene;
use crate::trace::{self, Format};

/// Scene recentered at `point`; divisors missing the point are dropped.
fn at_point(scene: &Scene, point: &[Rational]) -> Result<(Chart, Poly)> {
    let f = scene.gen.translate(point)?;
    let mut divisors = Vec::new();
    for d in &scene.divisors {
        let p = d.poly.translate(point)?;
        if p.constant_term() == int(0) {
            divisors.push(Divisor::new(d.label, p, d.birth_year)?);
        }
    }
    Ok((Chart::root(scene.vars.clone(), scene.year, divisors)?, f))
}

fn show_point(p: &[Rational]) -> String {
    let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
    format!("({})", cs.join(","))
}

fn write_record(out: &mut String, chart: &Chart, rec: &InvRecord) {
    let vars = &chart.variables;
    let _ = writeln!(out, "inv(0) = {}", rec.value);
    if !rec.chain.is_empty() {
        let _ = writeln!(out, "maximal contact {}", show_chain(&rec.chain, vars));
    }
    for (k, block) in rec.blocks().iter().enumerate() {
        let ds: Vec<String> = block
            .iter()
            .filter_map(|l| chart.divisor(*l))
            .map(|d| format!("({}=0)", chart.show(&d.poly)))
            .collect();
        let births = rec.births.get(k).map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(out, "E^{} = {{{}}}, born {births}", k + 1, ds.join(", "));
    }
    for (k, exps) in rec.residual_exponents().iter().enumerate() {
        if exps.is_empty() {
            continue;
        }
        let ms: Vec<String> = exps
            .iter()
            .map(|(l, e)| match chart.divisor(*l) {
                Some(d) => format!("({})^{e}", chart.show(&d.poly)),
                None => format!("E{l}^{e}"),
            })
            .collect();
        let _ = writeln!(out, "monomial part {k}: {}", ms.join(" "));
    }
    for d in &rec.diagnostics {
        let _ = writeln!(out, "note: {d}");
    }
}

/// A random invertible linear change: lower times upper unitriangular.
fn random_linear(n: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let mut lower = vec![vec![int(0); n]; n];
    let mut upper = vec![vec![int(0); n]; n];
    for i in 0..n {
        lower[i][i] = int(1);
        upper[i][i] = int(1);
        for j in 0..i {
            lower[i][j] = int(rng.gen_range(-2..=2));
            upper[j][i] = int(rng.gen_range(-2..=2));
        }
    }
    (0..n)
        .map(|i| {
            let terms = (0..n).map(|j| {
                let c: Rational = (0..n).map(|k| &lower[i][k] * &upper[k][j]).sum();
                Poly::var(n, j).scale(&c)
            });
            terms.fold(Poly::zero(n), |acc, t| &acc + &t)
        })
        .collect()
}

/// `inv` at the origin and at each point of the scene. With `check`, also
/// compares against random linear changes of coordinates.
pub fn inv(scene: &Scene, check: Option<(usize, u64)>) -> Result<String> {
    let mut out = String::new();
    let chart = scene.chart()?;
    let births = scene.birth_table();
    let rec = compute_inv(&chart, &scene.gen, &births)?;
    write_record(&mut out, &chart, &rec);
    for p in &scene.points {
        let (c, f) = at_point(scene, p)?;
        let r = compute_inv(&c, &f, &births)?;
        let _ = writeln!(out, "\nat {}", show_point(p));
        write_record(&mut out, &c, &r);
    }
    if let Some((trials, seed)) = check {
        let n = scene.vars.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = Vec::new();
        for t in 0..trials {
            let images = random_linear(n, &mut rng);
            let f = scene.gen.substitute(&images)?;
            let divisors = scene
                .divisors
                .iter()
                .map(|d| Divisor::new(d.label, d.poly.substitute(&images)?, d.birth_year))
                .collect::<Result<Vec<_>>>()?;
            let c = Chart::root(scene.vars.clone(), scene.year, divisors)?;
            let r = compute_inv(&c, &f, &births)?;
            if r.value != rec.value {
                bad.push(format!("trial {t}: {}", r.value));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Precondition(format!(
                "value changed under linear coordinate changes ({})",
                bad.join("; ")
            )));
        }
        let _ = writeln!(out, "\ncheck: {trials} random linear changes agree (seed {seed})");
    }
    Ok(out)
}

fn var_indices(vars: &[String], names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|v| {
            vars.iter()
                .position(|w| w == v)
                .ok_or_else(|| Error::Precondition(format!("unknown variable {v:?}")))
        })
        .collect()
}

/// Blow up the coordinate subspace of `center` (the origin when empty).
pub fn blowup(scene: &Scene, center: &[String], marking: u32) -> Result<String> {
    let n = scene.vars.len();
    let mut h = History::new(scene.chart()?, scene.gen.clone(), scene.birth_table())?;
    let c = if center.is_empty() {
        Center::origin(ChartId(0), n)
    } else {
        Center::coordinates(ChartId(0), n, &var_indices(&scene.vars, center)?)
    };
    let shown = c.show(&scene.vars);
    let kids = h.blow_up(0, c, StepKind::Algorithm, marking)?;
    let mut out = format!("center {shown}\n");
    for id in kids {
        let node = &h.nodes[id];
        let ch = &node.chart;
        let lin = ch.lineage.as_ref().expect("child chart has a lineage");
        let imgs: Vec<String> = lin.images.iter().map(|p| ch.show(p).replace(' ', "")).collect();
        let _ = writeln!(out, "\n{}-chart ({})", ch.variables[lin.chart_var], imgs.join(","));
        let _ = writeln!(out, "strict {}", ch.show(&node.hyper.strict));
        let _ = writeln!(out, "total {}", ch.show(&node.hyper.total));
        let _ = writeln!(out, "controlled {}", ch.show(&node.hyper.controlled));
        for d in &ch.divisors {
            let _ = writeln!(out, "divisor {} {} {}", d.label, d.birth_year, ch.show(&d.poly));
        }
        if node.is_off() {
            let _ = writeln!(out, "origin off the strict transform");
        } else {
            let _ = writeln!(out, "inv(0) = {}", node.record.value);
        }
    }
    Ok(out)
}

/// Build the history of `scene` under `driver`.
pub fn history(scene: &Scene, driver: &Driver, budget: usize, jobs: usize) -> Result<History> {
    let mut h = History::new(scene.chart()?, scene.gen.clone(), scene.birth_table())?.with_jobs(jobs);
    run(
        &mut h,
        &RunConfig {
            driver: driver.clone(),
            budget,
        },
    )?;
    Ok(h)
}

fn chart_path(h: &History, id: usize) -> String {
    let names: Vec<String> = h
        .path(id)
        .into_iter()
        .skip(1)
        .map(|i| {
            let c = &h.nodes[i].chart;
            let v = c.lineage.as_ref().map_or(0, |l| l.chart_var);
            c.variables[v].clone()
        })
        .collect();
    if names.is_empty() {
        "root".into()
    } else {
        names.join("/")
    }
}

/// Steps, leaves and the set of leaf classifications.
pub fn summary(h: &History) -> String {
    let mut out = format!("{} blow-ups\n", h.blowups());
    for (i, s) in h.steps.iter().enumerate() {
        let node = &h.nodes[s.node];
        let kind = match s.kind {
            StepKind::Algorithm => "algorithm".to_string(),
            StepKind::Monomial => "monomial".to_string(),
            StepKind::Cleaning { level } => format!("cleaning level {level}"),
            StepKind::Special => "special".to_string(),
        };
        let _ = writeln!(
            out,
            "step {}: {} year {} inv {} center {} [{kind}]",
            i + 1,
            chart_path(h, s.node),
            node.chart.year,
            node.record.value,
            s.center.show(&node.chart.variables)
        );
        for d in &s.diagnostics {
            let _ = writeln!(out, "  note: {d}");
        }
    }
    let mut kinds = BTreeSet::new();
    for id in h.leaves() {
        let node = &h.nodes[id];
        let what = if node.status == Status::Off || node.is_off() {
            "off".to_string()
        } else if let Some(c) = &node.class {
            kinds.insert(c.kind.name());
            c.kind.to_string()
        } else {
            format!("inv {}", node.record.value)
        };
        let _ = writeln!(
            out,
            "leaf {} year {}: {} -> {what}",
            chart_path(h, id),
            node.chart.year,
            node.chart.show(&node.hyper.strict)
        );
        for n in &node.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    let ks: Vec<&str> = kinds.iter().map(|s| s.as_str()).collect();
    let _ = writeln!(out, "classification: {}", if ks.is_empty() { "-".into() } else { ks.join(", ") });
    out
}

pub fn resolve(scene: &Scene, driver: &Driver, budget: usize, jobs: usize) -> Result<String> {
    let h = history(scene, driver, budget, jobs)?;
    Ok(summary(&h))
}

pub fn clean(scene: &Scene, level: usize, budget: usize) -> Result<String> {
    let mut h = History::new(scene.chart()?, scene.gen.clone(), scene.birth_table())?;
    clean_history(&mut h, level, budget)?;
    Ok(summary(&h))
}

pub fn classify(scene: &Scene) -> Result<String> {
    let chart = scene.chart()?;
    let rec = compute_inv(&chart, &scene.gen, &scene.birth_table())?;
    let hint = (!scene.hint.is_empty()).then_some(scene.hint.as_slice());
    let c = classify_hyper(&chart, &scene.gen, &rec, hint);
    let mut out = format!("{}\n", c.kind);
    if let Some(w) = &c.witness {
        let imgs: Vec<String> = w.change.iter().map(|p| chart.show(p)).collect();
        let _ = writeln!(out, "change ({})", imgs.join(", "));
        let _ = writeln!(out, "normal form {}", chart.show(&w.normal_form));
    }
    let _ = writeln!(out, "inv(0) = {}", rec.value);
    Ok(out)
}

pub fn trace(scene: &Scene, driver: &Driver, budget: usize, jobs: usize, format: Format) -> Result<String> {
    let h = history(scene, driver, budget, jobs)?;
    Ok(trace::render(&h, format))
}
