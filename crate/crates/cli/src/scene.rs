//! The scene file: a hypersurface germ together with its history.
//!
//! ```text
//! desing-scene 1
//! vars x y z
//! year 1
//! gen z^2 + x*y^2
//! divisor 0 1 x
//! ```
//!
//! One directive per line, `#` starts a comment. Printing is canonical, so
//! parse followed by print is stable.

use std::collections::BTreeSet;
use std::fmt;

use desing_core::marked::{Chart, Divisor, Label};
use desing_core::{parse_poly, BirthTable, Error, Poly, Rational, Result};

pub const HEADER: &str = "desing-scene 1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scene {
    pub vars: Vec<String>,
    pub year: u32,
    pub gen: Poly,
    pub divisors: Vec<Divisor>,
    /// Birth year overrides for the invariant blocks, `(k, year)` with `k`
    /// counted from one.
    pub births: Vec<(usize, u32)>,
    pub points: Vec<Vec<Rational>>,
    /// Optional factorization of the generator, used by classification.
    pub hint: Vec<Poly>,
}

impl Scene {
    pub fn new(vars: &[&str], gen: &str) -> Result<Scene> {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let gen = parse_poly(gen, &vars)?;
        Ok(Scene {
            vars,
            year: 0,
            gen,
            divisors: Vec::new(),
            births: Vec::new(),
            points: Vec::new(),
            hint: Vec::new(),
        })
    }

    pub fn chart(&self) -> Result<Chart> {
        Chart::root(self.vars.clone(), self.year, self.divisors.clone())
    }

    pub fn birth_table(&self) -> BirthTable {
        self.births
            .iter()
            .fold(BirthTable::fresh(self.year), |t, &(k, y)| t.with_override(k - 1, y))
    }

    /// Checks the invariants a parsed scene must satisfy.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for v in &self.vars {
            if !seen.insert(v.as_str()) {
                return Err(Error::Precondition(format!("variable {v} declared twice")));
            }
        }
        let mut labels = BTreeSet::new();
        for d in &self.divisors {
            if d.birth_year > self.year {
                return Err(Error::Precondition(format!(
                    "divisor {} born in year {} after the scene year {}",
                    d.label, d.birth_year, self.year
                )));
            }
            if !labels.insert(d.label) {
                return Err(Error::Precondition(format!("divisor label {} repeated", d.label)));
            }
        }
        for &(k, y) in &self.births {
            if k == 0 {
                return Err(Error::Precondition("birth blocks are counted from 1".into()));
            }
            if y > self.year {
                return Err(Error::Precondition(format!("birth year {y} after the scene year")));
            }
        }
        for p in &self.points {
            if p.len() != self.vars.len() {
                return Err(Error::Arity {
                    expected: self.vars.len(),
                    found: p.len(),
                });
            }
        }
        if self.gen.is_zero() {
            return Err(Error::Precondition("the generator is zero".into()));
        }
        self.chart().map(|_| ())
    }
}

fn parse_err(line: usize, offset: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos: offset,
        msg: format!("line {}: {}", line + 1, msg.into()),
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim_start()),
        None => (s, ""),
    }
}

fn number<T: std::str::FromStr>(w: &str, line: usize, offset: usize, what: &str) -> Result<T> {
    w.parse()
        .map_err(|_| parse_err(line, offset, format!("expected {what}, found {w:?}")))
}

/// Parses a scene file. Syntax problems are `Error::Parse`, violated
/// invariants are `Error::Precondition`.
pub fn parse_scene(src: &str) -> Result<Scene> {
    let mut header = false;
    let mut vars: Option<Vec<String>> = None;
    let mut year: Option<u32> = None;
    let mut gen: Option<Poly> = None;
    let mut divisors = Vec::new();
    let mut births = Vec::new();
    let mut points = Vec::new();
    let mut hint = Vec::new();

    let mut offset = 0;
    for (n, raw) in src.split('\n').enumerate() {
        let start = offset;
        offset += raw.len() + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if !header {
            if line.split_whitespace().collect::<Vec<_>>() != ["desing-scene", "1"] {
                return Err(parse_err(n, start, format!("expected header {HEADER:?}")));
            }
            header = true;
            continue;
        }
        let (key, rest) = split_word(line);
        let need_vars = || {
            vars.clone()
                .ok_or_else(|| parse_err(n, start, format!("{key} before vars")))
        };
        let poly = |text: &str, vs: &[String]| {
            parse_poly(text, vs).map_err(|e| match e {
                Error::Parse { pos, msg } => parse_err(n, start + pos, msg),
                e => e,
            })
        };
        match key {
            "vars" => {
                if vars.is_some() {
                    return Err(parse_err(n, start, "vars given twice"));
                }
                let vs: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if vs.is_empty() {
                    return Err(parse_err(n, start, "no variables"));
                }
                if let Some(bad) = vs.iter().find(|v| !is_ident(v)) {
                    return Err(parse_err(n, start, format!("bad variable name {bad:?}")));
                }
                vars = Some(vs);
            }
            "year" => {
                if year.is_some() {
                    return Err(parse_err(n, start, "year given twice"));
                }
                let (w, tail) = split_word(rest);
                if !tail.is_empty() {
                    return Err(parse_err(n, start, "trailing input after year"));
                }
                year = Some(number(w, n, start, "a year")?);
            }
            "gen" => {
                if gen.is_some() {
                    return Err(parse_err(n, start, "only one generator is allowed"));
                }
                gen = Some(poly(rest, &need_vars()?)?);
            }
            "divisor" => {
                let vs = need_vars()?;
                let (l, rest) = split_word(rest);
                let (y, text) = split_word(rest);
                let label: Label = number(l, n, start, "a divisor label")?;
                let birth: u32 = number(y, n, start, "a birth year")?;
                let p = poly(text, &vs)?;
                divisors.push(Divisor::new(label, p, birth)?);
            }
            "birth" => {
                let (k, rest) = split_word(rest);
                let (y, tail) = split_word(rest);
                if !tail.is_empty() {
                    return Err(parse_err(n, start, "trailing input after birth"));
                }
                births.push((number(k, n, start, "a block index")?, number(y, n, start, "a year")?));
            }
            "point" => {
                let pt = rest
                    .split_whitespace()
                    .map(|w| number::<Rational>(w, n, start, "a rational coordinate"))
                    .collect::<Result<Vec<_>>>()?;
                points.push(pt);
            }
            "hint" => {
                hint.push(poly(rest, &need_vars()?)?);
            }
            other => return Err(parse_err(n, start, format!("unknown directive {other:?}"))),
        }
    }
    if !header {
        return Err(parse_err(0, 0, format!("expected header {HEADER:?}")));
    }
    let vars = vars.ok_or_else(|| parse_err(0, 0, "missing vars"))?;
    let gen = gen.ok_or_else(|| parse_err(0, 0, "missing gen"))?;
    let scene = Scene {
        vars,
        year: year.unwrap_or(0),
        gen,
        divisors,
        births,
        points,
        hint,
    };
    scene.validate()?;
    Ok(scene)
}

impl fmt::Display for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER}")?;
        writeln!(f, "vars {}", self.vars.join(" "))?;
        writeln!(f, "year {}", self.year)?;
        writeln!(f, "gen {}", self.gen.display(&self.vars))?;
        for d in &self.divisors {
            writeln!(f, "divisor {} {} {}", d.label, d.birth_year, d.poly.display(&self.vars))?;
        }
        for (k, y) in &self.births {
            writeln!(f, "birth {k} {y}")?;
        }
        for p in &self.points {
            let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            writeln!(f, "point {}", cs.join(" "))?;
        }
        for h in &self.hint {
            writeln!(f, "hint {}", h.display(&self.vars))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A2: &str = "\
desing-scene 1
# year one of the pinch point
vars x y z
year 1
gen z^2 + x*y^2
divisor 0 1 x
";

    #[test]
    fn parses_and_round_trips() {
        let s = parse_scene(A2).unwrap();
        assert_eq!(s.year, 1);
        assert_eq!(s.divisors.len(), 1);
        let printed = s.to_string();
        assert_eq!(parse_scene(&printed).unwrap(), s);
        assert_eq!(parse_scene(&printed).unwrap().to_string(), printed);
    }

    #[test]
    fn points_and_hints() {
        let src = "desing-scene 1\nvars x y z\ngen x*y*z\npoint 1 0 -1/2\nhint x\nhint y\nhint z\nbirth 2 0\n";
        let s = parse_scene(src).unwrap();
        assert_eq!(s.points[0][2], Rational::new((-1).into(), 2.into()));
        assert_eq!(s.hint.len(), 3);
        assert_eq!(parse_scene(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn syntax_errors() {
        for src in [
            "",
            "vars x\ngen x\n",
            "desing-scene 2\nvars x\ngen x\n",
            "desing-scene 1\ngen x\n",
            "desing-scene 1\nvars x\ngen x +\n",
            "desing-scene 1\nvars x\ngen x\nyear -1\n",
            "desing-scene 1\nvars x\ngen x\nfoo\n",
            "desing-scene 1\nvars x 1y\ngen x\n",
            "desing-scene 1\nvars x\ngen x\npoint 1/0\n",
        ] {
            assert!(matches!(parse_scene(src), Err(Error::Parse { .. })), "{src:?}");
        }
    }

    #[test]
    fn semantic_errors() {
        for src in [
            "desing-scene 1\nvars x y\ngen x\ndivisor 0 2 x\nyear 1\n",
            "desing-scene 1\nvars x y\ngen x\nyear 1\ndivisor 0 1 x\ndivisor 0 1 y\n",
            "desing-scene 1\nvars x x\ngen x\n",
            "desing-scene 1\nvars x y\ngen x\npoint 1\n",
            "desing-scene 1\nvars x y\ngen 0\n",
        ] {
            assert!(matches!(parse_scene(src), Err(Error::Precondition(_)) | Err(Error::Arity { .. })), "{src:?}");
        }
    }
}
