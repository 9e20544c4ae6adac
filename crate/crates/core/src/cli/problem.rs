//! Line-oriented problem files.
//!
//! ```text
//! file     := { line '\n' }
//! line     := blank | '#' text | '[' section ']' | key ':' value
//! section  := 'chart' | 'metric' | 'fields' | 'symmetries' | 'pde' | 'extras' | 'run'
//!
//! [chart]       coords: NAME {',' NAME}
//!               params: NAME {',' NAME}
//!               interval NAME: LO HI
//!               positive: EXPR          nonzero: EXPR
//! [metric]      diag: EXPR {',' EXPR}   or n lines  row: EXPR {',' EXPR}
//! [fields]      NAME: EXPR {',' EXPR}
//! [symmetries]  NAME: xi = EXPR {',' EXPR}; eta = EXPR
//! [pde]         kind: laplace | klein_gordon | conformal_laplace | poisson
//!               dependent: NAME         potential: EXPR      source: EXPR
//! [extras]      NAME: EXPR {',' EXPR}   (fields on the reduced chart)
//! [run]         by: NAME   mu: NUMBER   a0: NUMBER
//!               tol: NUMBER   trials: INT   seed: INT
//! ```
//!
//! `[chart]` must come first. Every symbol in an expression must be a
//! coordinate, a declared parameter or the dependent variable.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::expr::{Expr, SymbolKind};
use crate::geometry::{Chart, GeometryError, Matrix};
use crate::parse::parse_with;
use crate::rational::Rational;
use crate::zero::Guard;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ProblemError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeDecl {
    pub kind: String,
    pub dependent: String,
    pub potential: Option<Expr>,
    pub source: Option<Expr>,
}

/// A symmetry as declared: ξ components and η, still to be placed on the
/// chart with the declared dependent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryDecl {
    pub name: String,
    pub xi: Vec<Expr>,
    pub eta: Expr,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub by: Option<String>,
    pub mu: Option<Rational>,
    pub a0: Option<Rational>,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub chart: Chart,
    pub params: Vec<String>,
    pub metric: Option<Matrix>,
    pub fields: Vec<(String, Vec<Expr>)>,
    pub symmetries: Vec<SymmetryDecl>,
    pub pde: Option<PdeDecl>,
    pub extras: Vec<(String, Vec<Expr>)>,
    pub run: RunOptions,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Chart,
    Metric,
    Fields,
    Symmetries,
    Pde,
    Extras,
    Run,
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn err(&self, col: usize, msg: impl Into<String>) -> ProblemError {
        ProblemError {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }
}

struct Builder {
    coords: Option<Vec<String>>,
    chart: Option<Chart>,
    params: Vec<String>,
    dependent: String,
    diag: Option<Vec<Expr>>,
    rows: Vec<Vec<Expr>>,
    fields: Vec<(String, Vec<Expr>)>,
    symmetries: Vec<SymmetryDecl>,
    pde_kind: Option<String>,
    potential: Option<(String, usize, usize)>,
    source: Option<(String, usize, usize)>,
    extras: Vec<(String, Vec<(String, usize)>, usize)>,
    run: RunOptions,
    pending_sym: Vec<(String, String, usize, usize)>,
}

/// Offset of `part` inside `line`, as a 1-based column.
fn col_of(line: &str, part: &str) -> usize {
    (part.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

impl Builder {
    fn chart(&self, ctx: &Ctx) -> Result<&Chart, ProblemError> {
        self.chart
            .as_ref()
            .ok_or_else(|| ctx.err(1, "the [chart] section with `coords` must come first"))
    }

    fn expr(
        &self,
        ctx: &Ctx,
        text: &str,
        col: usize,
        dependent_ok: bool,
    ) -> Result<Expr, ProblemError> {
        let chart = self.chart(ctx)?;
        let coords = chart.coords();
        let e = parse_with(text, |n| {
            if coords.iter().any(|c| c == n) {
                SymbolKind::Coordinate
            } else if n == self.dependent {
                SymbolKind::Dependent
            } else {
                SymbolKind::Parameter
            }
        })
        .map_err(|e| ctx.err(col + e.column() - 1, e.message()))?;
        for s in e.symbols() {
            let known = coords.contains(&s)
                || self.params.contains(&s)
                || (dependent_ok && s == self.dependent);
            if !known {
                let at = text.find(s.as_str()).map(|i| col + i).unwrap_or(col);
                return Err(ctx.err(at, format!("undeclared symbol `{s}`")));
            }
        }
        Ok(e)
    }

    fn list(
        &self,
        ctx: &Ctx,
        line: &str,
        value: &str,
        dependent_ok: bool,
    ) -> Result<Vec<Expr>, ProblemError> {
        value
            .split(',')
            .map(|p| {
                let t = p.trim();
                self.expr(ctx, t, col_of(line, t), dependent_ok)
            })
            .collect()
    }

    fn components(&self, ctx: &Ctx, line: &str, value: &str) -> Result<Vec<Expr>, ProblemError> {
        let v = self.list(ctx, line, value, false)?;
        let n = self.chart(ctx)?.dim();
        if v.len() != n {
            return Err(ctx.err(
                col_of(line, value),
                format!("expected {n} components, got {}", v.len()),
            ));
        }
        Ok(v)
    }
}

fn number<T: std::str::FromStr>(ctx: &Ctx, line: &str, v: &str) -> Result<T, ProblemError> {
    v.parse()
        .map_err(|_| ctx.err(col_of(line, v), format!("invalid number `{v}`")))
}

/// Parse a rational such as `3/4`, `-2` or `0.25`.
pub fn parse_rational(v: &str) -> Option<Rational> {
    let e = crate::parse::parse::<&str>(v, &[]).ok()?;
    e.as_const()
}

fn rational(ctx: &Ctx, line: &str, v: &str) -> Result<Rational, ProblemError> {
    parse_rational(v).ok_or_else(|| ctx.err(col_of(line, v), format!("invalid rational `{v}`")))
}

fn is_name(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let mut b = Builder {
        coords: None,
        chart: None,
        params: Vec::new(),
        dependent: "u".into(),
        diag: None,
        rows: Vec::new(),
        fields: Vec::new(),
        symmetries: Vec::new(),
        pde_kind: None,
        potential: None,
        source: None,
        extras: Vec::new(),
        run: RunOptions::default(),
        pending_sym: Vec::new(),
    };
    let mut section = Section::None;
    let mut ctx = Ctx { line: 0 };
    for (i, raw) in text.lines().enumerate() {
        ctx.line = i + 1;
        let line = raw.trim_end();
        let body = line.trim_start();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ctx.err(col_of(line, body), "unterminated section header"))?;
            section = match name.trim() {
                "chart" => Section::Chart,
                "metric" => Section::Metric,
                "fields" => Section::Fields,
                "symmetries" => Section::Symmetries,
                "pde" => Section::Pde,
                "extras" => Section::Extras,
                "run" => Section::Run,
                other => {
                    return Err(
                        ctx.err(col_of(line, body) + 1, format!("unknown section `{other}`"))
                    )
                }
            };
            if section != Section::Chart && b.chart.is_none() {
                return Err(ctx.err(1, "the [chart] section with `coords` must come first"));
            }
            continue;
        }
        let (key, value) = body
            .split_once(':')
            .ok_or_else(|| ctx.err(col_of(line, body), "expected `key: value`"))?;
        let key = key.trim();
        let value = value.trim();
        let vcol = col_of(line, value);
        if value.is_empty() {
            return Err(ctx.err(vcol, format!("missing value for `{key}`")));
        }
        match section {
            Section::None => return Err(ctx.err(1, "entry outside of any section")),
            Section::Chart => {
                if key == "coords" {
                    let names: Vec<String> =
                        value.split(',').map(|s| s.trim().to_string()).collect();
                    if let Some(bad) = names.iter().find(|n| !is_name(n)) {
                        return Err(ctx.err(vcol, format!("invalid coordinate name `{bad}`")));
                    }
                    let chart = Chart::new(&names)
                        .map_err(|e: GeometryError| ctx.err(vcol, e.to_string()))?;
                    b.coords = Some(names);
                    b.chart = Some(chart);
                } else if key == "params" {
                    for p in value.split(',') {
                        let p = p.trim();
                        if !is_name(p) {
                            return Err(
                                ctx.err(col_of(line, p), format!("invalid parameter name `{p}`"))
                            );
                        }
                        b.params.push(p.to_string());
                    }
                } else if let Some(name) = key.strip_prefix("interval") {
                    let name = name.trim();
                    let chart = b.chart(&ctx)?.clone();
                    if chart.index_of(name).is_none() && !b.params.iter().any(|p| p == name) {
                        return Err(ctx.err(col_of(line, name), format!("unknown symbol `{name}`")));
                    }
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(ctx.err(vcol, "expected `LO HI`"));
                    }
                    let lo: f64 = number(&ctx, line, parts[0])?;
                    let hi: f64 = number(&ctx, line, parts[1])?;
                    if !(lo < hi) {
                        return Err(ctx.err(vcol, "empty interval"));
                    }
                    b.chart = Some(chart.with_interval(name, lo, hi));
                } else if key == "positive" || key == "nonzero" {
                    let e = b.expr(&ctx, value, vcol, false)?;
                    let g = if key == "positive" {
                        Guard::Positive(e)
                    } else {
                        Guard::NonZero(e)
                    };
                    b.chart = Some(b.chart(&ctx)?.with_guard(g));
                } else {
                    return Err(ctx.err(col_of(line, key), format!("unknown chart key `{key}`")));
                }
            }
            Section::Metric => match key {
                "diag" => b.diag = Some(b.components(&ctx, line, value)?),
                "row" => {
                    let r = b.components(&ctx, line, value)?;
                    b.rows.push(r);
                }
                _ => return Err(ctx.err(col_of(line, key), format!("unknown metric key `{key}`"))),
            },
            Section::Fields => {
                if !is_field_name(key) {
                    return Err(ctx.err(col_of(line, key), format!("invalid field name `{key}`")));
                }
                let c = b.components(&ctx, line, value)?;
                b.fields.push((key.to_string(), c));
            }
            Section::Symmetries => {
                b.pending_sym
                    .push((key.to_string(), value.to_string(), ctx.line, vcol));
            }
            Section::Pde => match key {
                "kind" => b.pde_kind = Some(value.to_string()),
                "dependent" => {
                    if !is_name(value) {
                        return Err(ctx.err(vcol, format!("invalid dependent name `{value}`")));
                    }
                    if b.chart(&ctx)?.index_of(value).is_some() {
                        return Err(ctx.err(
                            vcol,
                            format!("dependent `{value}` clashes with a coordinate"),
                        ));
                    }
                    b.dependent = value.to_string();
                }
                "potential" => b.potential = Some((value.to_string(), ctx.line, vcol)),
                "source" => b.source = Some((value.to_string(), ctx.line, vcol)),
                _ => return Err(ctx.err(col_of(line, key), format!("unknown pde key `{key}`"))),
            },
            Section::Extras => {
                let parts = value
                    .split(',')
                    .map(|p| {
                        let t = p.trim();
                        (t.to_string(), col_of(line, t))
                    })
                    .collect();
                b.extras.push((key.to_string(), parts, ctx.line));
            }
            Section::Run => match key {
                "by" => b.run.by = Some(value.to_string()),
                "mu" => b.run.mu = Some(rational(&ctx, line, value)?),
                "a0" => b.run.a0 = Some(rational(&ctx, line, value)?),
                "tol" => b.run.tol = Some(number(&ctx, line, value)?),
                "trials" => b.run.trials = Some(number(&ctx, line, value)?),
                "seed" => b.run.seed = Some(number(&ctx, line, value)?),
                _ => return Err(ctx.err(col_of(line, key), format!("unknown run key `{key}`"))),
            },
        }
    }
    finish(b, ctx.line)
}

fn is_field_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "_^+-.".contains(c))
}

fn finish(mut b: Builder, last_line: usize) -> Result<Problem, ProblemError> {
    let end = Ctx {
        line: last_line.max(1),
    };
    let chart = b
        .chart
        .clone()
        .ok_or_else(|| end.err(1, "missing [chart] section with `coords`"))?;
    let _ = b.coords.take();

    // symmetries and the pde may mention the dependent variable, which is
    // only known once the whole file has been read
    for (name, value, line, vcol) in std::mem::take(&mut b.pending_sym) {
        let ctx = Ctx { line };
        let (xi_part, eta_part) = value
            .split_once(';')
            .ok_or_else(|| ctx.err(vcol, "expected `xi = ...; eta = ...`"))?;
        let xi_text = xi_part
            .trim()
            .strip_prefix("xi")
            .and_then(|s| s.trim_start().strip_prefix('='))
            .ok_or_else(|| ctx.err(vcol, "expected `xi = ...`"))?;
        let eta_text = eta_part
            .trim()
            .strip_prefix("eta")
            .and_then(|s| s.trim_start().strip_prefix('='))
            .ok_or_else(|| ctx.err(vcol + xi_part.len() + 1, "expected `eta = ...`"))?;
        let base = vcol - 1;
        let mut xi = Vec::new();
        let mut offset = value.len() - value.trim_start().len();
        let xi_start = value.find(xi_text.trim_start()).unwrap_or(offset);
        offset = xi_start;
        for p in xi_text.split(',') {
            let t = p.trim();
            let at = value[offset..]
                .find(t)
                .map(|k| offset + k)
                .unwrap_or(offset);
            xi.push(b.expr(&ctx, t, base + at + 1, false)?);
            offset = at + t.len();
        }
        if xi.len() != chart.dim() {
            return Err(ctx.err(
                vcol,
                format!(
                    "expected {} components of xi, got {}",
                    chart.dim(),
                    xi.len()
                ),
            ));
        }
        let eta_t = eta_text.trim();
        let at = value.rfind(eta_t).unwrap_or(0);
        let eta = b.expr(&ctx, eta_t, base + at + 1, true)?;
        b.symmetries.push(SymmetryDecl {
            name,
            xi,
            eta,
            line,
        });
    }
    let parse_opt = |v: &Option<(String, usize, usize)>| -> Result<Option<Expr>, ProblemError> {
        match v {
            Some((t, line, col)) => Ok(Some(b.expr(&Ctx { line: *line }, t, *col, true)?)),
            None => Ok(None),
        }
    };
    let potential = parse_opt(&b.potential.clone())?;
    let source = parse_opt(&b.source.clone())?;

    let n = chart.dim();
    let metric = match (b.diag.take(), b.rows.is_empty()) {
        (Some(_), false) => {
            return Err(end.err(1, "use either `diag` or `row` lines in [metric], not both"))
        }
        (Some(d), true) => {
            let mut m = vec![vec![Expr::zero(); n]; n];
            for (i, e) in d.into_iter().enumerate() {
                m[i][i] = e;
            }
            Some(m)
        }
        (None, false) => {
            if b.rows.len() != n {
                return Err(end.err(1, format!("[metric] needs {n} rows, got {}", b.rows.len())));
            }
            Some(std::mem::take(&mut b.rows))
        }
        (None, true) => None,
    };
    let pde = match b.pde_kind.take() {
        Some(kind) => Some(PdeDecl {
            kind,
            dependent: b.dependent.clone(),
            potential,
            source,
        }),
        None => None,
    };
    let mut extras = Vec::new();
    let known: BTreeSet<String> = chart
        .coords()
        .iter()
        .chain(b.params.iter())
        .cloned()
        .collect();
    for (name, parts, line) in std::mem::take(&mut b.extras) {
        let ctx = Ctx { line };
        let mut comps = Vec::new();
        for (t, col) in parts {
            // extras live on the reduced chart, a subset of the coordinates
            let e = parse_with(&t, |s| {
                if known.contains(s) {
                    SymbolKind::Coordinate
                } else {
                    SymbolKind::Parameter
                }
            })
            .map_err(|e| ctx.err(col + e.column() - 1, e.message()))?;
            if let Some(s) = e.symbols().into_iter().find(|s| !known.contains(s)) {
                return Err(ctx.err(col, format!("undeclared symbol `{s}`")));
            }
            comps.push(e);
        }
        extras.push((name, comps));
    }
    Ok(Problem {
        chart,
        params: b.params,
        metric,
        fields: b.fields,
        symmetries: b.symmetries,
        pde,
        extras,
        run: b.run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANE: &str = "\
# the Euclidean plane
[chart]
coords: x, y
params: k

[metric]
diag: 1, 1

[fields]
rot: y, -x

[symmetries]
S: xi = 1, 0; eta = k*u

[pde]
kind: klein_gordon
potential: k^2

[run]
mu: 1/2
";

    #[test]
    fn parses_a_complete_file() {
        let p = parse_problem(PLANE).unwrap();
        assert_eq!(p.chart.coords(), &["x".to_string(), "y".to_string()]);
        assert_eq!(p.fields.len(), 1);
        assert_eq!(p.symmetries[0].eta.to_string(), "k*u");
        assert_eq!(p.pde.as_ref().unwrap().kind, "klein_gordon");
        assert_eq!(p.run.mu, Some(Rational::new(1, 2).unwrap()));
        assert!(p.metric.unwrap()[1][1].is_one());
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = parse_problem("[metric]\ndiag: 1, 1\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_problem("[chart]\ncoords: x, y\n[metric]\ndiag: 1, 1 +* 2\n").unwrap_err();
        assert_eq!((e.line, e.col), (4, 13));
        let e = parse_problem("[chart]\ncoords: x, y\n[fields]\nv: x, z\n").unwrap_err();
        assert_eq!((e.line, e.col), (4, 7));
        assert!(e.msg.contains("undeclared symbol `z`"));
        let e = parse_problem("[chart]\ncoords: x, y\n[fields]\nv: x\n").unwrap_err();
        assert!(e.msg.contains("expected 2 components"));
        let e = parse_problem("[chart]\ncoords: x, y\n[bogus]\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_problem("[chart]\ncoords: x, y\n[symmetries]\nS: xi = 1, 0; eta = q\n")
            .unwrap_err();
        assert_eq!((e.line, e.col), (4, 21));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/4"), Some(Rational::new(-3, 4).unwrap()));
        assert_eq!(parse_rational("0.25"), Some(Rational::new(1, 4).unwrap()));
        assert_eq!(parse_rational("x"), None);
    }
}
