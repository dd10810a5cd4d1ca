//! Per-year tables of a resolution history.
//!
//! Every chart whose origin is a singular point of the strict transform gets
//! one block: the rows of its invariant computation followed by the value
//! and the center blown up there.

use desing_core::invariant::{show_chain, InvRecord, LevelRecord};
use desing_core::marked::{Chart, Coeff, WeightedSum};
use desing_core::resolve::{History, Node, Status, StepKind};
use desing_core::{Order, Poly};

pub const COLUMNS: [&str; 5] = ["codim i", "marked ideal", "companion ideal", "maximal contact", "boundary"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Md,
    Tsv,
}

/// One table of the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub node: usize,
    pub year: u32,
    /// Parent coordinates in terms of the chart coordinates.
    pub chart: String,
    pub rows: Vec<[String; 5]>,
    pub value: String,
    /// `C_j = ...` or the classification of a leaf.
    pub outcome: String,
    pub notes: Vec<String>,
}

impl Block {
    pub fn title(&self) -> String {
        format!("Year {}. Coordinate chart {}", year_word(self.year), self.chart)
    }

    pub fn footer(&self) -> String {
        if self.outcome.is_empty() {
            format!("inv(0) = {}", self.value)
        } else {
            format!("inv(0) = {}, {}", self.value, self.outcome)
        }
    }
}

pub fn year_word(y: u32) -> String {
    const WORDS: [&str; 21] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
        "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
    ];
    WORDS.get(y as usize).map_or_else(|| y.to_string(), |w| w.to_string())
}

fn tuple(ps: &[Poly], chart: &Chart) -> String {
    let parts: Vec<String> = ps.iter().map(|p| chart.show(p).replace(' ', "")).collect();
    format!("({})", parts.join(","))
}

fn chart_coordinates(node: &Node) -> String {
    let c = &node.chart;
    match &c.lineage {
        Some(l) => tuple(&l.images, c),
        None => {
            let n = c.arity();
            let ids: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
            tuple(&ids, c)
        }
    }
}

fn show_sum(w: &WeightedSum, chart: &Chart) -> String {
    let mut parts: Vec<String> = Vec::new();
    for s in w.summands.iter().filter(|s| !s.gens.is_empty()) {
        let gs: Vec<String> = s.gens.iter().map(|g| chart.show(g)).collect();
        let p = format!("({},{})", gs.join(", "), s.d);
        // a sum of marked ideals is idempotent
        if !parts.contains(&p) {
            parts.push(p);
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Row zero: the controlled transform, written `M*(strict)` with `M` the
/// exceptional monomial.
fn show_controlled(node: &Node) -> String {
    let h = &node.hyper;
    let c = &node.chart;
    let strict = c.show(&h.strict);
    match h.controlled.div_exact(&h.strict) {
        Ok(Some(m)) if m == Poly::one(m.arity()) => format!("({strict},1)"),
        Ok(Some(m)) => format!("({}*({strict}),1)", c.show(&m)),
        _ => format!("({},1)", c.show(&h.controlled)),
    }
}

fn boundary(level: &LevelRecord, chart: &Chart) -> String {
    let parts: Vec<String> = level
        .boundary
        .iter()
        .filter_map(|l| chart.divisor(*l))
        .map(|d| format!("({}=0)", chart.show(&d.poly)))
        .collect();
    parts.join(", ")
}

fn rows(node: &Node) -> Vec<[String; 5]> {
    let rec: &InvRecord = &node.record;
    let c = &node.chart;
    rec.levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let ideal = if i == 0 {
                show_controlled(node)
            } else {
                match &level.ideal {
                    Coeff::Zero(_) => "0".to_string(),
                    Coeff::Sum(w) => show_sum(w, c),
                }
            };
            let companion = level.companion.as_ref().map(|w| show_sum(w, c)).unwrap_or_default();
            let contact = if i < rec.chain.len() {
                show_chain(&rec.chain[..=i], &c.variables)
            } else {
                String::new()
            };
            [i.to_string(), ideal, companion, contact, boundary(level, c)]
        })
        .collect()
}

fn step_label(kind: StepKind) -> &'static str {
    match kind {
        StepKind::Algorithm => "",
        StepKind::Monomial => "monomial case",
        StepKind::Cleaning { .. } => "cleaning",
        StepKind::Special => "special",
    }
}

/// Blocks in depth-first order over charts with a singular origin.
pub fn blocks(h: &History) -> Vec<Block> {
    h.dfs()
        .into_iter()
        .filter(|&id| h.nodes[id].hyper.strict.ord_at_origin() >= Order::Finite(2))
        .map(|id| {
            let node = &h.nodes[id];
            let mut notes = node.notes.clone();
            let outcome = match (&node.status, h.step_of(id)) {
                (Status::Blown(_), Some(step)) => {
                    notes.extend(step.diagnostics.iter().cloned());
                    match step.kind {
                        StepKind::Cleaning { level } => notes.push(format!("cleaning blow-up at level {level}")),
                        k => {
                            let label = step_label(k);
                            if !label.is_empty() {
                                notes.push(format!("{label} blow-up"));
                            }
                        }
                    }
                    format!("C_{} = {}", node.chart.year, step.center.show(&node.chart.variables))
                }
                _ => match &node.class {
                    Some(cl) => format!("classified {}", cl.kind),
                    None => String::new(),
                },
            };
            notes.extend(node.record.diagnostics.iter().cloned());
            Block {
                node: id,
                year: node.chart.year,
                chart: chart_coordinates(node),
                rows: rows(node),
                value: node.record.value.to_string(),
                outcome,
                notes,
            }
        })
        .collect()
}

pub fn render(h: &History, format: Format) -> String {
    let bs = blocks(h);
    match format {
        Format::Md => render_md(&bs),
        Format::Tsv => render_tsv(&bs),
    }
}

fn render_md(bs: &[Block]) -> String {
    let mut out = String::new();
    for (i, b) in bs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("**Year {}.** Coordinate chart {}\n\n", year_word(b.year), b.chart));
        out.push_str(&format!("| {} |\n", COLUMNS.join(" | ")));
        out.push_str("|---|---|---|---|---|\n");
        for r in &b.rows {
            out.push_str(&format!("| {} |\n", r.join(" | ")));
        }
        out.push_str(&format!("\n{}\n", b.footer()));
        for n in &b.notes {
            out.push_str(&format!("\nnote: {n}\n"));
        }
    }
    out
}

fn render_tsv(bs: &[Block]) -> String {
    let mut out = format!("year\tchart\t{}\n", COLUMNS.join("\t"));
    for b in bs {
        for r in &b.rows {
            out.push_str(&format!("{}\t{}\t{}\n", b.year, b.chart, r.join("\t")));
        }
        out.push_str(&format!("{}\t{}\tinv\t{}\t{}\t\t\n", b.year, b.chart, b.value, b.outcome));
    }
    out
}
