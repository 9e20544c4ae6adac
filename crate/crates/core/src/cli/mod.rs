//! Batch command-line interface.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog::{self, CatalogSpace};
use crate::conformal::{classify, closure_check, ClassifiedVector, ConformalError};
use crate::expr::{Expr, SymbolKind};
use crate::geometry::{Chart, Metric, VectorField};
use crate::parse::parse_with;
use crate::rational::Rational;
use crate::reduction::{
    classify_reduced, reduce_by, sp_ckv_reduce, Candidate, ReducedPde, ReductionError,
};
use crate::symmetry::{generate, verify_symmetry, PdeSpec, SymmetryError, SymmetryVector};
use crate::zero::ZeroTest;

use problem::{parse_problem, parse_rational, Problem};
use report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "lieconf",
    version,
    about = "Conformal symmetries and symmetry reductions of linear second-order PDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum CommandKind {
    /// Classify vector fields in the conformal hierarchy and compute their
    /// structure constants.
    Classify,
    /// Generate the Lie point symmetries of the equation from the fields.
    Symmetries,
    /// Check the symmetries declared in a problem file by prolongation.
    Verify,
    /// Reduce the equation by a symmetry and partition the symmetries of
    /// the reduced equation.
    Reduce,
    /// List catalogue spaces, or export and validate one.
    Catalog,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum PdeChoice {
    Laplace,
    #[value(name = "klein_gordon")]
    KleinGordon,
    #[value(name = "conformal_laplace")]
    ConformalLaplace,
    Poisson,
}

impl PdeChoice {
    fn from_name(s: &str) -> Option<PdeChoice> {
        PdeChoice::from_str(s, true).ok()
    }
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Problem file.
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Catalogue space.
    #[arg(long, global = true, value_name = "NAME")]
    space: Option<String>,
    /// Zero-test tolerance [default: 1e-9].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample points per zero test [default: 20].
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Root seed of all randomized checks [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    output: Output,
    /// Equation kind [default: laplace].
    #[arg(long, global = true, value_enum)]
    pde: Option<PdeChoice>,
    /// Potential V of Δu + Vu = 0.
    #[arg(long, global = true, value_name = "EXPR")]
    potential: Option<String>,
    /// Right-hand side f(x, u) of Δu = f.
    #[arg(long, global = true, value_name = "EXPR")]
    source: Option<String>,
    /// Constant part of the u-coefficient of generated symmetries.
    #[arg(long, global = true, allow_hyphen_values = true)]
    a0: Option<String>,
    /// Name of the field to reduce by.
    #[arg(long, global = true, value_name = "FIELD")]
    by: Option<String>,
    /// Multiple of u∂_u added to the reducing symmetry.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Failed(String),
}

impl From<problem::ProblemError> for CliError {
    fn from(e: problem::ProblemError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::NotASymmetry(_) | ReductionError::NotEquivalent(_) => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Run with process arguments, writing to stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Run with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let text = match cli.opts.output {
                Output::Json => report.to_json(),
                Output::Text => report.to_text(),
            };
            let _ = out.write_all(text.as_bytes());
            if report.ok {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(CliError::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(CliError::Failed(m)) => {
            let _ = writeln!(err, "failed: {m}");
            EXIT_FAILED
        }
    }
}

/// Everything a command works on.
struct Loaded {
    source: String,
    chart: Chart,
    params: Vec<String>,
    metric: Option<Metric>,
    fields: Vec<(String, VectorField)>,
    space: Option<CatalogSpace>,
    problem: Option<Problem>,
}

struct Context {
    zt: ZeroTest,
    settings: Settings,
}

fn settings(opts: &Opts, problem: Option<&Problem>) -> Result<Context, CliError> {
    let run = problem.map(|p| p.run.clone()).unwrap_or_default();
    let tol = opts.tol.or(run.tol).unwrap_or(1e-9);
    let trials = opts.trials.or(run.trials).unwrap_or(20);
    let seed = opts.seed.or(run.seed).unwrap_or(42);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if trials == 0 {
        return Err(CliError::Input("trials must be at least 1".into()));
    }
    Ok(Context {
        zt: ZeroTest { trials, tol, seed },
        settings: Settings { tol, trials, seed },
    })
}

fn read_problem(opts: &Opts) -> Result<Option<(String, Problem)>, CliError> {
    let Some(path) = &opts.input else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let p =
        parse_problem(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Some((format!("file:{}", path.display()), p)))
}

fn load(opts: &Opts) -> Result<(Loaded, Context), CliError> {
    if opts.input.is_some() && opts.space.is_some() {
        return Err(CliError::Input(
            "use either --input or --space, not both".into(),
        ));
    }
    if let Some((source, p)) = read_problem(opts)? {
        let ctx = settings(opts, Some(&p))?;
        let metric = match &p.metric {
            Some(m) => Some(Metric::new(&p.chart, m.clone(), &ctx.zt).map_err(input)?),
            None => None,
        };
        let fields = p
            .fields
            .iter()
            .map(|(n, c)| {
                Ok((
                    n.clone(),
                    VectorField::new(&p.chart, c.clone()).map_err(input)?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let loaded = Loaded {
            source,
            chart: p.chart.clone(),
            params: p.params.clone(),
            metric,
            fields,
            space: None,
            problem: Some(p),
        };
        return Ok((loaded, ctx));
    }
    let Some(name) = &opts.space else {
        return Err(CliError::Input(
            "one of --input or --space is required".into(),
        ));
    };
    let ctx = settings(opts, None)?;
    let space = catalog::by_name(name, &ctx.zt).map_err(input)?;
    let loaded = Loaded {
        source: format!("space:{name}"),
        chart: space.chart().clone(),
        params: Vec::new(),
        metric: Some(space.metric.clone()),
        fields: space
            .generators
            .iter()
            .map(|g| (g.name.clone(), g.field.clone()))
            .collect(),
        space: Some(space),
        problem: None,
    };
    Ok((loaded, ctx))
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    if cli.command == CommandKind::Catalog {
        return catalog_command(&cli.opts);
    }
    let (l, ctx) = load(&cli.opts)?;
    let mut report = Report::new(
        command_name(cli.command),
        l.source.clone(),
        ctx.settings.clone(),
    );
    match cli.command {
        CommandKind::Classify => classify_command(&l, &ctx, &mut report)?,
        CommandKind::Symmetries => symmetries_command(&cli.opts, &l, &ctx, &mut report)?,
        CommandKind::Verify => verify_command(&cli.opts, &l, &ctx, &mut report)?,
        CommandKind::Reduce => reduce_command(&cli.opts, &l, &ctx, &mut report)?,
        CommandKind::Catalog => unreachable!(),
    }
    Ok(report)
}

fn command_name(c: CommandKind) -> &'static str {
    match c {
        CommandKind::Classify => "classify",
        CommandKind::Symmetries => "symmetries",
        CommandKind::Verify => "verify",
        CommandKind::Reduce => "reduce",
        CommandKind::Catalog => "catalog",
    }
}

fn strings(v: &[Expr]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

fn metric_of(l: &Loaded) -> Result<&Metric, CliError> {
    l.metric
        .as_ref()
        .ok_or_else(|| CliError::Input("a [metric] section is required".into()))
}

fn class_row(name: &str, c: &ClassifiedVector, tol: f64) -> ClassRow {
    ClassRow {
        name: name.to_string(),
        xi: strings(c.field.comps()),
        class: c.class.name().to_string(),
        psi: c.psi.to_string(),
        gradient: c.is_gradient,
        residual: c.residual,
        tol,
        declared: None,
    }
}

fn closure(names: &[String], g: &Metric, fields: &[VectorField], zt: &ZeroTest) -> Closure {
    match closure_check(g, fields, zt) {
        Ok(sc) => Closure {
            closed: true,
            residual: sc.max_residual,
            tol: zt.tol,
            nonzero: sc
                .nonzero()
                .into_iter()
                .map(|(a, b, terms)| Bracket {
                    a: names[a].clone(),
                    b: names[b].clone(),
                    result: terms
                        .into_iter()
                        .map(|(k, r)| Term {
                            coefficient: r.to_string(),
                            field: names[k].clone(),
                        })
                        .collect(),
                })
                .collect(),
            error: None,
        },
        Err(e) => {
            let (residual, error) = match &e {
                ConformalError::NotClosed { a, b, residual } => (
                    *residual,
                    format!(
                        "[{}, {}] is not in the span (residual {residual:e})",
                        names[*a], names[*b]
                    ),
                ),
                other => (f64::INFINITY, other.to_string()),
            };
            Closure {
                closed: false,
                residual,
                tol: zt.tol,
                nonzero: Vec::new(),
                error: Some(error),
            }
        }
    }
}

fn classify_command(l: &Loaded, ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let g = metric_of(l)?;
    if l.fields.is_empty() {
        return Err(CliError::Input("no vector fields to classify".into()));
    }
    let zt = &ctx.zt;
    let mut rows = Vec::new();
    for (name, field) in &l.fields {
        let c = classify(g, field, zt).map_err(input)?;
        let mut row = class_row(name, &c, zt.tol);
        if let Some(decl) = l.space.as_ref().and_then(|s| s.generator(name)) {
            let psi_ok = zt
                .is_zero(&(&c.psi - &decl.psi), g.chart().sampler())
                .map_err(input)?;
            let matches = decl.class == c.class && decl.gradient == c.is_gradient && psi_ok;
            report.ok &= matches;
            row.declared = Some(Declared {
                class: decl.class.name().to_string(),
                psi: decl.psi.to_string(),
                gradient: decl.gradient,
                matches,
            });
        }
        rows.push(row);
    }
    report.classifications = Some(rows);
    if l.fields.len() >= 2 {
        let names: Vec<String> = l.fields.iter().map(|(n, _)| n.clone()).collect();
        let fields: Vec<VectorField> = l.fields.iter().map(|(_, f)| f.clone()).collect();
        report.structure_constants = Some(closure(&names, g, &fields, zt));
    }
    Ok(())
}

fn dependent_of(l: &Loaded) -> String {
    l.problem
        .as_ref()
        .and_then(|p| p.pde.as_ref())
        .map(|d| d.dependent.clone())
        .unwrap_or_else(|| "u".to_string())
}

/// Parse an expression given on the command line against the loaded chart.
fn flag_expr(l: &Loaded, text: &str, what: &str) -> Result<Expr, CliError> {
    let coords = l.chart.coords();
    let dep = dependent_of(l);
    let e = parse_with(text, |n| {
        if coords.iter().any(|c| c == n) {
            SymbolKind::Coordinate
        } else if n == dep {
            SymbolKind::Dependent
        } else {
            SymbolKind::Parameter
        }
    })
    .map_err(|e| CliError::Input(format!("--{what}: {e}")))?;
    if let Some(s) = e
        .symbols()
        .into_iter()
        .find(|s| !coords.contains(s) && !l.params.contains(s) && *s != dep)
    {
        return Err(CliError::Input(format!(
            "--{what}: undeclared symbol `{s}`"
        )));
    }
    Ok(e)
}

fn flag_rational(v: &Option<String>, what: &str) -> Result<Option<Rational>, CliError> {
    match v {
        Some(t) => parse_rational(t)
            .map(Some)
            .ok_or_else(|| CliError::Input(format!("--{what}: invalid rational `{t}`"))),
        None => Ok(None),
    }
}

fn build_pde(opts: &Opts, l: &Loaded) -> Result<PdeSpec, CliError> {
    let g = metric_of(l)?;
    let decl = l.problem.as_ref().and_then(|p| p.pde.as_ref());
    let kind = match (opts.pde, decl) {
        (Some(k), _) => k,
        (None, Some(d)) => PdeChoice::from_name(&d.kind)
            .ok_or_else(|| CliError::Input(format!("unknown equation kind `{}`", d.kind)))?,
        (None, None) => PdeChoice::Laplace,
    };
    let dep = dependent_of(l);
    let potential = match &opts.potential {
        Some(t) => Some(flag_expr(l, t, "potential")?),
        None => decl.and_then(|d| d.potential.clone()),
    };
    let source = match &opts.source {
        Some(t) => Some(flag_expr(l, t, "source")?),
        None => decl.and_then(|d| d.source.clone()),
    };
    let pde = match kind {
        PdeChoice::Laplace => PdeSpec::laplace(g, &dep),
        PdeChoice::ConformalLaplace => PdeSpec::conformal_laplace(g, &dep),
        PdeChoice::KleinGordon => {
            let v = potential
                .ok_or_else(|| CliError::Input("klein_gordon needs a potential".into()))?;
            if v.contains(&dep) {
                return Err(CliError::Input(
                    "the potential must not involve the dependent variable".into(),
                ));
            }
            PdeSpec::klein_gordon(g, &dep, v)
        }
        PdeChoice::Poisson => {
            let f = source.ok_or_else(|| CliError::Input("poisson needs a source".into()))?;
            PdeSpec::poisson(g, &dep, f)
        }
    };
    pde.map_err(input)
}

fn pde_text(p: &PdeSpec) -> PdeText {
    PdeText {
        kind: p.kind().name().to_string(),
        coordinates: p.chart().coords().to_vec(),
        dependent: p.dependent().to_string(),
        a: p.a().iter().map(|r| strings(r)).collect(),
        b: strings(p.b()),
        f: p.f().to_string(),
        potential: p.potential().map(|v| v.to_string()),
        equation: format!("{} = 0", p.residual_expr()),
    }
}

/// The scaling symmetry followed by the theorem symmetries of every
/// conformal Killing vector among the fields. Only admissible ones are
/// returned as symmetries.
fn theorem_symmetries(
    pde: &PdeSpec,
    fields: &[(String, VectorField)],
    a0: Rational,
    zt: &ZeroTest,
) -> Result<(Vec<SymRow>, Vec<SymmetryVector>), CliError> {
    let g = pde.metric().expect("metric kinds carry their metric");
    let mut rows = Vec::new();
    let mut syms = Vec::new();
    let xu = SymmetryVector::scaling(pde.chart(), pde.dependent()).labeled("X_u");
    let v = verify_symmetry(pde, &xu, zt).map_err(input)?;
    rows.push(SymRow {
        name: "X_u".into(),
        class: "scaling".into(),
        xi: strings(xu.xi().comps()),
        eta: xu.eta().to_string(),
        admissible: true,
        constraint: "0".into(),
        constraint_residual: 0.0,
        verified: Some(v.holds),
        verify_residual: Some(v.max_residual),
        tol: zt.tol,
    });
    syms.push(xu);
    for (name, field) in fields {
        let c = classify(g, field, zt).map_err(input)?;
        if !c.class.is_ckv() {
            rows.push(SymRow {
                name: name.clone(),
                class: c.class.name().into(),
                xi: strings(field.comps()),
                eta: String::new(),
                admissible: false,
                constraint: "not a conformal Killing vector".into(),
                constraint_residual: c.residual,
                verified: None,
                verify_residual: None,
                tol: zt.tol,
            });
            continue;
        }
        let gen = generate(pde, &c, a0, &Expr::zero(), zt).map_err(input)?;
        let s = gen.symmetry.labeled(name);
        let (verified, verify_residual) = if gen.admissible {
            let v = verify_symmetry(pde, &s, zt).map_err(input)?;
            (Some(v.holds), Some(v.max_residual))
        } else {
            (None, None)
        };
        rows.push(SymRow {
            name: name.clone(),
            class: c.class.name().into(),
            xi: strings(s.xi().comps()),
            eta: s.eta().to_string(),
            admissible: gen.admissible,
            constraint: gen.constraint.to_string(),
            constraint_residual: gen.residual,
            verified,
            verify_residual,
            tol: zt.tol,
        });
        if gen.admissible {
            syms.push(s);
        }
    }
    Ok((rows, syms))
}

fn symmetries_command(
    opts: &Opts,
    l: &Loaded,
    ctx: &Context,
    report: &mut Report,
) -> Result<(), CliError> {
    let pde = build_pde(opts, l)?;
    let a0 = a0_of(opts, l)?;
    let (rows, _) = theorem_symmetries(&pde, &l.fields, a0, &ctx.zt)?;
    report.ok = rows.iter().all(|r| r.verified != Some(false));
    if !report.ok {
        report
            .messages
            .push("an admissible generated symmetry failed the prolongation check".into());
    }
    report.pde = Some(pde_text(&pde));
    report.symmetries = Some(rows);
    Ok(())
}

fn a0_of(opts: &Opts, l: &Loaded) -> Result<Rational, CliError> {
    let run = l.problem.as_ref().and_then(|p| p.run.a0);
    Ok(flag_rational(&opts.a0, "a0")?
        .or(run)
        .unwrap_or(Rational::ZERO))
}

fn verify_command(
    opts: &Opts,
    l: &Loaded,
    ctx: &Context,
    report: &mut Report,
) -> Result<(), CliError> {
    let decls = l
        .problem
        .as_ref()
        .map(|p| p.symmetries.clone())
        .unwrap_or_default();
    if decls.is_empty() {
        return Err(CliError::Input(
            "verify needs a problem file with a [symmetries] section".into(),
        ));
    }
    let pde = build_pde(opts, l)?;
    let mut rows = Vec::new();
    for d in decls {
        let xi = VectorField::new(&l.chart, d.xi.clone()).map_err(input)?;
        let s = SymmetryVector::new(xi, pde.dependent(), d.eta.clone())
            .map_err(|e| CliError::Input(format!("line {}: {e}", d.line)))?;
        let v = verify_symmetry(&pde, &s, &ctx.zt).map_err(input)?;
        report.ok &= v.holds;
        rows.push(VerifyRow {
            name: d.name.clone(),
            xi: strings(&d.xi),
            eta: d.eta.to_string(),
            holds: v.holds,
            residual: v.max_residual,
            tol: ctx.zt.tol,
        });
    }
    report.pde = Some(pde_text(&pde));
    report.verifications = Some(rows);
    Ok(())
}

fn candidate_rows(c: &[Candidate], tol: f64) -> Vec<CandidateRow> {
    c.iter()
        .map(|c| CandidateRow {
            name: c.label.clone(),
            xi: strings(c.symmetry.xi().comps()),
            eta: c.symmetry.eta().to_string(),
            holds: c.holds,
            residual: c.residual,
            tol,
        })
        .collect()
}

/// Fields of the reduced chart that may generate type II symmetries: the
/// [extras] of the problem file, else the conformal generators of a flat
/// Lorentzian reduced metric.
fn reduced_extras(
    l: &Loaded,
    red: &ReducedPde,
    zt: &ZeroTest,
) -> Result<Vec<(String, VectorField)>, CliError> {
    let chart = red.pde.chart();
    if let Some(p) = &l.problem {
        if !p.extras.is_empty() {
            return p
                .extras
                .iter()
                .map(|(n, c)| {
                    VectorField::new(chart, c.clone())
                        .map(|f| (n.clone(), f))
                        .map_err(|e| CliError::Input(format!("extra `{n}`: {e}")))
                })
                .collect();
        }
    }
    let Some(g) = red.pde.metric() else {
        return Ok(Vec::new());
    };
    let n = g.dim();
    let flat = (0..n).all(|i| {
        (0..n).all(|j| {
            let want = match (i == j, i) {
                (false, _) => 0,
                (true, 0) => -1,
                (true, _) => 1,
            };
            g.g(i, j).as_const() == Some(Rational::from(want))
        })
    });
    if !flat || n < 2 {
        return Ok(Vec::new());
    }
    let m = catalog::minkowski_with_coords(chart.coords(), zt).map_err(input)?;
    Ok(m.generators
        .into_iter()
        .map(|g| (format!("reduced:{}", g.name), g.field))
        .collect())
}

fn test_function(chart: &Chart) -> Expr {
    let c: Vec<Expr> = (0..chart.dim()).map(|i| chart.coord(i)).collect();
    let mut t: Vec<Expr> = c.iter().map(|x| x.powi(3)).collect();
    t.push(Expr::product(c.iter().cloned()));
    Expr::sum(t)
}

fn reduce_command(
    opts: &Opts,
    l: &Loaded,
    ctx: &Context,
    report: &mut Report,
) -> Result<(), CliError> {
    let zt = &ctx.zt;
    let run = l
        .problem
        .as_ref()
        .map(|p| p.run.clone())
        .unwrap_or_default();
    let by = opts
        .by
        .clone()
        .or(run.by)
        .ok_or_else(|| CliError::Input("reduce needs --by FIELD".into()))?;
    let mu = flag_rational(&opts.mu, "mu")?
        .or(run.mu)
        .unwrap_or(Rational::ZERO);
    let pde = build_pde(opts, l)?;
    let a0 = a0_of(opts, l)?;
    let (_, originals) = theorem_symmetries(&pde, &l.fields, a0, zt)?;

    let les = l
        .space
        .as_ref()
        .filter(|s| s.name.starts_with("les") && by == "C_S");
    let red = if let Some(s) = les {
        if !mu.is_zero() {
            report
                .messages
                .push("--mu is ignored for the special conformal reduction".into());
        }
        sp_ckv_reduce(&pde, s.metric.dim() - 1, zt)?
    } else {
        let (_, field) = l
            .fields
            .iter()
            .find(|(n, _)| *n == by)
            .ok_or_else(|| CliError::Input(format!("no field named `{by}`")))?;
        let g = metric_of(l)?;
        let c = classify(g, field, zt).map_err(input)?;
        let used = if c.class.is_ckv() {
            generate(&pde, &c, mu, &Expr::zero(), zt)
                .map_err(|e: SymmetryError| input(e))?
                .symmetry
        } else {
            SymmetryVector::linear(
                field.clone(),
                pde.dependent(),
                Expr::constant(mu),
                Expr::zero(),
            )
            .map_err(input)?
        };
        reduce_by(&pde, &used.labeled(&by), zt)?
    };
    let used = red
        .used
        .clone()
        .expect("reductions by a symmetry record it");
    let used_label = if used.label.is_empty() {
        by.clone()
    } else {
        used.label.clone()
    };
    let extras = reduced_extras(l, &red, zt)?;
    let cls = classify_reduced(&originals, &used, &red, &extras, zt)?;
    let w = test_function(red.retained_form().chart());
    let rt = red.round_trip(&w, zt)?;
    let consistent = cls.govinder_consistent();
    report.ok = rt.holds && consistent;
    if !rt.holds {
        report
            .messages
            .push("the reduced equation does not reproduce the original on the ansatz".into());
    }
    if !consistent {
        report
            .messages
            .push("a commutator prediction was not confirmed".into());
    }
    let a = &red.ansatz;
    report.reduction = Some(ReductionReport {
        used: used_label,
        used_xi: strings(used.xi().comps()),
        used_eta: used.eta().to_string(),
        reduction_coordinate: a.reduction_coordinate.clone(),
        ansatz: format!("{} = {}", a.dependent, a.rule()),
        normalization: red.normalization.to_string(),
        absence_residual: red.absence_residual,
        round_trip_residual: rt.max_residual,
        tol: zt.tol,
        reduced: pde_text(&red.pde),
        general: red.general.as_ref().map(|(p, _)| pde_text(p)),
        inherited: candidate_rows(&cls.inherited, zt.tol),
        type_ii: candidate_rows(&cls.type_ii, zt.tol),
        rejected: candidate_rows(&cls.rejected, zt.tol),
        lost: cls.lost.clone(),
        govinder: cls
            .govinder
            .iter()
            .map(|g| GovinderRow {
                name: g.label.clone(),
                factor: g.factor.to_string(),
                inherited: g.inherited,
            })
            .collect(),
        govinder_consistent: consistent,
    });
    Ok(())
}

fn catalog_command(opts: &Opts) -> Result<Report, CliError> {
    if opts.input.is_some() {
        return Err(CliError::Input("catalog takes --space, not --input".into()));
    }
    let ctx = settings(opts, None)?;
    let spaces: Vec<String> = catalog::SPACE_NAMES.iter().map(|s| s.to_string()).collect();
    let Some(name) = &opts.space else {
        let mut r = Report::new("catalog", "catalogue".into(), ctx.settings);
        r.catalog = Some(CatalogReport {
            spaces,
            problem_text: None,
            notes: None,
        });
        return Ok(r);
    };
    let space = catalog::by_name(name, &ctx.zt).map_err(input)?;
    let mut r = Report::new("catalog", format!("space:{name}"), ctx.settings.clone());
    let checks = space.validate(&ctx.zt).map_err(input)?;
    let mut rows = Vec::new();
    for c in &checks {
        let decl = space
            .generator(&c.name)
            .expect("validated generators exist");
        let mut row = class_row(&c.name, &c.classified, ctx.zt.tol);
        row.declared = Some(Declared {
            class: decl.class.name().into(),
            psi: decl.psi.to_string(),
            gradient: decl.gradient,
            matches: c.ok(),
        });
        r.ok &= c.ok();
        rows.push(row);
    }
    r.classifications = Some(rows);
    r.catalog = Some(CatalogReport {
        spaces: vec![name.clone()],
        problem_text: Some(space.to_problem_text()),
        notes: Some(space.notes.clone()),
    });
    Ok(r)
}
