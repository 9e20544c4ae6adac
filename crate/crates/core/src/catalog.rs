//! Built-in spaces with their known conformal generators.

use std::fmt::Write as _;

use thiserror::Error;

use crate::conformal::{classify, ClassifiedVector, ConformalClass, ConformalError};
use crate::expr::Expr;
use crate::geometry::{Chart, GeometryError, Matrix, Metric, VectorField};
use crate::parse::parse;
use crate::zero::{Guard, ZeroTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("{what} = {value} is outside {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("scale factor `{0}` vanishes on the sampling domain")]
    Vanishing(String),
    #[error("unknown catalogue space `{0}`")]
    UnknownSpace(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
}

/// A known conformal generator together with its declared classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub field: VectorField,
    pub class: ConformalClass,
    pub psi: Expr,
    pub gradient: bool,
}

/// Outcome of re-classifying a declared generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCheck {
    pub name: String,
    pub classified: ClassifiedVector,
    pub class_ok: bool,
    pub psi_ok: bool,
    pub gradient_ok: bool,
}

impl GeneratorCheck {
    pub fn ok(&self) -> bool {
        self.class_ok && self.psi_ok && self.gradient_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSpace {
    pub name: String,
    pub metric: Metric,
    pub generators: Vec<Generator>,
    pub notes: Vec<String>,
}

impl CatalogSpace {
    pub fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn fields(&self) -> Vec<VectorField> {
        self.generators.iter().map(|g| g.field.clone()).collect()
    }

    /// Classify every generator and compare with its declaration.
    pub fn validate(&self, zt: &ZeroTest) -> Result<Vec<GeneratorCheck>, CatalogError> {
        let mut out = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let c = classify(&self.metric, &g.field, zt)?;
            let psi_ok = zt
                .is_zero(&(&c.psi - &g.psi), self.chart().sampler())
                .map_err(GeometryError::from)?;
            out.push(GeneratorCheck {
                name: g.name.clone(),
                class_ok: c.class == g.class,
                psi_ok,
                gradient_ok: c.is_gradient == g.gradient,
                classified: c,
            });
        }
        Ok(out)
    }

    /// The space as a problem file: chart, metric and fields sections.
    pub fn to_problem_text(&self) -> String {
        let chart = self.chart();
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.name);
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "[chart]");
        let _ = writeln!(s, "coords: {}", chart.coords().join(", "));
        for c in chart.coords() {
            let (lo, hi) = chart.sampler().interval(c);
            let _ = writeln!(s, "interval {c}: {lo} {hi}");
        }
        for g in chart.sampler().guards() {
            match g {
                Guard::NonZero(e) => {
                    let _ = writeln!(s, "nonzero: {e}");
                }
                Guard::Positive(e) => {
                    let _ = writeln!(s, "positive: {e}");
                }
            }
        }
        let _ = writeln!(s, "\n[metric]");
        if self.metric.is_diagonal() {
            let d: Vec<String> = (0..chart.dim())
                .map(|i| self.metric.g(i, i).to_string())
                .collect();
            let _ = writeln!(s, "diag: {}", d.join(", "));
        } else {
            for row in self.metric.components() {
                let r: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(s, "row: {}", r.join(", "));
            }
        }
        if !self.generators.is_empty() {
            let _ = writeln!(s, "\n[fields]");
            for g in &self.generators {
                let c: Vec<String> = g.field.comps().iter().map(|e| e.to_string()).collect();
                let _ = writeln!(s, "{}: {}", g.name, c.join(", "));
            }
        }
        s
    }
}

fn ex(text: &str, chart: &Chart) -> Expr {
    parse(text, chart.coords()).unwrap_or_else(|e| panic!("catalogue formula `{text}`: {e}"))
}

fn field(chart: &Chart, comps: Vec<Expr>) -> VectorField {
    VectorField::new(chart, comps).expect("catalogue field has chart dimension")
}

fn gen(name: &str, f: VectorField, class: ConformalClass, psi: Expr, gradient: bool) -> Generator {
    Generator {
        name: name.to_string(),
        field: f,
        class,
        psi,
        gradient,
    }
}

fn range(what: &'static str, v: usize, lo: usize, hi: usize) -> Result<(), CatalogError> {
    if v < lo || v > hi {
        return Err(CatalogError::OutOfRange {
            what,
            value: v as i64,
            lo: lo as i64,
            hi: hi as i64,
        });
    }
    Ok(())
}

/// Minkowski space diag(−1, 1, …, 1) in (t, z, y1, …) with its full
/// conformal algebra.
pub fn minkowski(n: usize, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    range("n", n, 3, 6)?;
    let mut coords = vec!["t".to_string(), "z".to_string()];
    coords.extend((1..=n - 2).map(|a| format!("y{a}")));
    minkowski_with_coords(&coords, zt)
}

/// Minkowski space with the given coordinates, the first being time.
pub fn minkowski_with_coords<S: AsRef<str>>(
    coords: &[S],
    zt: &ZeroTest,
) -> Result<CatalogSpace, CatalogError> {
    let chart = Chart::new(coords)?;
    let n = chart.dim();
    range("n", n, 2, 6)?;
    let mut diag = vec![Expr::one(); n];
    diag[0] = Expr::int(-1);
    let metric = Metric::diagonal(&chart, diag, zt)?;
    let c = chart.coords().to_vec();
    let x: Vec<Expr> = (0..n).map(|i| chart.coord(i)).collect();
    let unit = |i: usize| VectorField::coordinate(&chart, &c[i]).expect("coordinate of chart");
    let label = |i: usize| {
        if i == 0 {
            "1".to_string()
        } else {
            c[i].clone()
        }
    };
    let t = &x[0];

    let mut g = Vec::new();
    for i in 0..n {
        g.push(gen(
            &format!("K_G^{}", label(i)),
            unit(i),
            ConformalClass::Killing,
            Expr::zero(),
            true,
        ));
    }
    for a in 1..n {
        let mut comps = vec![Expr::zero(); n];
        comps[0] = x[a].clone();
        comps[a] = t.clone();
        g.push(gen(
            &format!("X_R^1{}", c[a]),
            field(&chart, comps),
            ConformalClass::Killing,
            Expr::zero(),
            false,
        ));
    }
    for a in 1..n {
        for b in a + 1..n {
            let mut comps = vec![Expr::zero(); n];
            comps[a] = x[b].clone();
            comps[b] = -x[a].clone();
            g.push(gen(
                &format!("X_R^{}{}", c[a], c[b]),
                field(&chart, comps),
                ConformalClass::Killing,
                Expr::zero(),
                false,
            ));
        }
    }
    g.push(gen(
        "H",
        field(&chart, x.clone()),
        ConformalClass::Homothetic,
        Expr::one(),
        true,
    ));

    let space2: Expr = x[1..].iter().map(|y| y.powi(2)).sum();
    let mut comps = vec![Expr::rational(1, 2) * (t.powi(2) + &space2)];
    comps.extend(x[1..].iter().map(|y| t * y));
    g.push(gen(
        "X_C^1",
        field(&chart, comps),
        ConformalClass::SpecialCKV,
        t.clone(),
        false,
    ));
    for a in 1..n {
        let ya = &x[a];
        let mut comps = vec![t * ya];
        for b in 1..n {
            if b == a {
                let others: Expr = (1..n).filter(|&k| k != a).map(|k| x[k].powi(2)).sum();
                comps.push(Expr::rational(1, 2) * (ya.powi(2) + t.powi(2) - others));
            } else {
                comps.push(ya * &x[b]);
            }
        }
        g.push(gen(
            &format!("X_C^{}", c[a]),
            field(&chart, comps),
            ConformalClass::SpecialCKV,
            ya.clone(),
            false,
        ));
    }
    Ok(CatalogSpace {
        name: format!("minkowski{n}"),
        metric,
        generators: g,
        notes: vec!["diag(-1, 1, ..., 1); translations, boosts, rotations, dilation and special conformal fields".into()],
    })
}

/// dθ1² + cosh²θ1(dθ2² + cosh²θ2(…)) in coordinates th1, …, thd.
pub fn hyperbolic_sphere(d: usize, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    range("d", d, 2, 4)?;
    let coords: Vec<String> = (1..=d).map(|i| format!("th{i}")).collect();
    let chart = Chart::new(&coords)?;
    let mut diag = Vec::with_capacity(d);
    let mut acc = Expr::one();
    for i in 0..d {
        diag.push(acc.clone());
        acc = acc * chart.coord(i).cosh().powi(2);
    }
    let metric = Metric::diagonal(&chart, diag, zt)?;
    let mut generators = Vec::new();
    if d == 2 {
        let f = |a: &str, b: &str| field(&chart, vec![ex(a, &chart), ex(b, &chart)]);
        use ConformalClass::{Killing, ProperCKV};
        generators = vec![
            gen("K_1", f("0", "1"), Killing, Expr::zero(), false),
            gen(
                "K_2",
                f("cosh(th2)", "-tanh(th1)*sinh(th2)"),
                Killing,
                Expr::zero(),
                false,
            ),
            gen(
                "K_3",
                f("-sinh(th2)", "tanh(th1)*cosh(th2)"),
                Killing,
                Expr::zero(),
                false,
            ),
            gen(
                "C_1",
                f("cosh(th1)", "0"),
                ProperCKV,
                ex("sinh(th1)", &chart),
                true,
            ),
            gen(
                "C_2",
                f("sinh(th1)*cosh(th2)", "sinh(th2)/cosh(th1)"),
                ProperCKV,
                ex("cosh(th1)*cosh(th2)", &chart),
                true,
            ),
            gen(
                "C_3",
                f("sinh(th1)*sinh(th2)", "cosh(th2)/cosh(th1)"),
                ProperCKV,
                ex("cosh(th1)*sinh(th2)", &chart),
                true,
            ),
        ];
    }
    Ok(CatalogSpace {
        name: format!("hsphere{d}"),
        metric,
        generators,
        notes: vec!["constant negative curvature; generators listed for d = 2 only".into()],
    })
}

/// dr² + r^{2K} h on (r, h-coordinates). K = 0 adds the gradient KV ∂_r,
/// K = 1 the gradient HV r∂_r. Killing generators of `h` are lifted, and
/// for K = 0 an h-homothety H is combined into r∂_r + H.
pub fn decomposable(k: u8, h: &CatalogSpace, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    range("K", k as usize, 0, 1)?;
    let hc = h.chart();
    let mut coords = vec!["r".to_string()];
    coords.extend(hc.coords().iter().cloned());
    let chart = Chart::new(&coords)?.with_sampler(hc.sampler().clone());
    let n = chart.dim();
    let r = chart.coord(0);
    let warp = if k == 0 { Expr::one() } else { r.powi(2) };
    let mut g: Matrix = vec![vec![Expr::zero(); n]; n];
    g[0][0] = Expr::one();
    for i in 1..n {
        for j in 1..n {
            g[i][j] = &warp * h.metric.g(i - 1, j - 1);
        }
    }
    let metric = Metric::new(&chart, g, zt)?;
    let lift = |f: &VectorField, radial: Expr| {
        let mut comps = vec![radial];
        comps.extend(f.comps().iter().cloned());
        field(&chart, comps)
    };
    let mut generators = Vec::new();
    if k == 0 {
        let e = VectorField::coordinate(&chart, "r")?;
        generators.push(gen("K_r", e, ConformalClass::Killing, Expr::zero(), true));
    } else {
        let mut comps = vec![Expr::zero(); n];
        comps[0] = r.clone();
        generators.push(gen(
            "H_r",
            field(&chart, comps),
            ConformalClass::Homothetic,
            Expr::one(),
            true,
        ));
    }
    for hg in &h.generators {
        match hg.class {
            ConformalClass::Killing => generators.push(gen(
                &hg.name,
                lift(&hg.field, Expr::zero()),
                ConformalClass::Killing,
                Expr::zero(),
                k == 0 && hg.gradient,
            )),
            ConformalClass::Homothetic if k == 0 && hg.psi.is_one() => generators.push(gen(
                &format!("H_r+{}", hg.name),
                lift(&hg.field, r.clone()),
                ConformalClass::Homothetic,
                Expr::one(),
                hg.gradient,
            )),
            _ => {}
        }
    }
    Ok(CatalogSpace {
        name: format!("decomposable{k}({})", h.name),
        metric,
        generators,
        notes: vec![format!("dr^2 + r^{} h with h = {}", 2 * k, h.name)],
    })
}

/// −dz² + dR² + R² f on (z, R, f-coordinates), f given by its
/// coordinates and components (it may be one-dimensional).
pub fn sp_ckv_canonical<S: AsRef<str>>(
    m: usize,
    f_coords: &[S],
    f: &Matrix,
    zt: &ZeroTest,
) -> Result<CatalogSpace, CatalogError> {
    range("m", m, 2, 5)?;
    if f_coords.len() != m - 1 || f.len() != m - 1 || f.iter().any(|r| r.len() != m - 1) {
        return Err(GeometryError::Shape {
            expected: m - 1,
            got: f.len(),
        }
        .into());
    }
    let mut coords = vec!["z".to_string(), "R".to_string()];
    coords.extend(f_coords.iter().map(|s| s.as_ref().to_string()));
    let chart = Chart::new(&coords)?;
    let n = m + 1;
    let big_r = ex("R", &chart);
    let z = ex("z", &chart);
    let mut g: Matrix = vec![vec![Expr::zero(); n]; n];
    g[0][0] = Expr::int(-1);
    g[1][1] = Expr::one();
    for i in 0..m - 1 {
        for j in 0..m - 1 {
            g[i + 2][j + 2] = big_r.powi(2) * &f[i][j];
        }
    }
    let metric = Metric::new(&chart, g, zt)?;
    let pad = |a: Expr, b: Expr| {
        let mut comps = vec![a, b];
        comps.extend((2..n).map(|_| Expr::zero()));
        field(&chart, comps)
    };
    let generators = vec![
        gen(
            "K_G",
            pad(Expr::one(), Expr::zero()),
            ConformalClass::Killing,
            Expr::zero(),
            true,
        ),
        gen(
            "H",
            pad(z.clone(), big_r.clone()),
            ConformalClass::Homothetic,
            Expr::one(),
            true,
        ),
        gen(
            "C_S",
            pad(
                Expr::rational(1, 2) * (z.powi(2) + big_r.powi(2)),
                &z * &big_r,
            ),
            ConformalClass::SpecialCKV,
            z.clone(),
            false,
        ),
    ];
    Ok(CatalogSpace {
        name: format!("les{m}"),
        metric,
        generators,
        notes: vec!["-dz^2 + dR^2 + R^2 f with gradient KV, gradient HV and special CKV".into()],
    })
}

/// sp_ckv_canonical with flat f in y1, … (a single `y` when m = 2).
pub fn sp_ckv_flat(m: usize, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    range("m", m, 2, 5)?;
    let coords: Vec<String> = if m == 2 {
        vec!["y".into()]
    } else {
        (1..m).map(|a| format!("y{a}")).collect()
    };
    let k = m - 1;
    let f: Matrix = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect();
    sp_ckv_canonical(m, &coords, &f, zt)
}

fn bianchi_chart(coords: &[&str]) -> Result<Chart, CatalogError> {
    Ok(Chart::new(coords)?.with_interval("t", 0.3, 1.2))
}

fn metric_or_vanishing(
    chart: &Chart,
    diag: Vec<Expr>,
    factors: &[&Expr],
    zt: &ZeroTest,
) -> Result<Metric, CatalogError> {
    for f in factors {
        if f.is_zero() {
            return Err(CatalogError::Vanishing(f.to_string()));
        }
    }
    // the factors themselves must keep one sign, which the squares hide
    let mut probe = vec![Expr::int(-1)];
    probe.extend(factors.iter().map(|f| (*f).clone()));
    Metric::diagonal(chart, probe, zt)
        .and_then(|_| Metric::diagonal(chart, diag, zt))
        .map_err(|e| match e {
            GeometryError::Degenerate(_) => {
                let names: Vec<String> = factors.iter().map(|f| f.to_string()).collect();
                CatalogError::Vanishing(names.join(", "))
            }
            other => other.into(),
        })
}

fn translations(chart: &Chart, scales: &[(&str, &Expr)]) -> Vec<Generator> {
    scales
        .iter()
        .map(|(c, s)| {
            gen(
                &format!("K_{c}"),
                VectorField::coordinate(chart, c).expect("coordinate of chart"),
                ConformalClass::Killing,
                Expr::zero(),
                s.as_const().is_some(),
            )
        })
        .collect()
}

/// −dt² + A²dx² + B²dy² + C²dz² with t sampled in [0.3, 1.2].
pub fn bianchi_i(
    a: &Expr,
    b: &Expr,
    c: &Expr,
    zt: &ZeroTest,
) -> Result<CatalogSpace, CatalogError> {
    let chart = bianchi_chart(&["t", "x", "y", "z"])?;
    let metric = metric_or_vanishing(
        &chart,
        vec![Expr::int(-1), a.powi(2), b.powi(2), c.powi(2)],
        &[a, b, c],
        zt,
    )?;
    let mut generators = translations(&chart, &[("x", a), ("y", b), ("z", c)]);
    let mut notes = Vec::new();
    if a.powi(2) == b.powi(2) {
        let f = field(
            &chart,
            vec![
                Expr::zero(),
                ex("y", &chart),
                ex("-x", &chart),
                Expr::zero(),
            ],
        );
        generators.push(gen("X_I3", f, ConformalClass::Killing, Expr::zero(), false));
        notes.push("A^2 = B^2: rotation in the (x, y) plane".into());
    }
    let t = ex("t", &chart);
    if a == &t && b == &t && c.is_one() {
        let f = field(
            &chart,
            vec![t.clone(), Expr::zero(), Expr::zero(), ex("z", &chart)],
        );
        generators.push(gen("H", f, ConformalClass::Homothetic, Expr::one(), true));
    }
    Ok(CatalogSpace {
        name: "bianchi1".into(),
        metric,
        generators,
        notes,
    })
}

/// The three-dimensional −dt² + A²dx² + B²dy².
pub fn bianchi_slice(a: &Expr, b: &Expr, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    let chart = bianchi_chart(&["t", "x", "y"])?;
    let metric = metric_or_vanishing(
        &chart,
        vec![Expr::int(-1), a.powi(2), b.powi(2)],
        &[a, b],
        zt,
    )?;
    let mut generators = Vec::new();
    let mut notes = Vec::new();
    let t = ex("t", &chart);
    let (sin, cos) = (t.sin(), t.cos());
    if a == &sin && b == &cos {
        generators = ads3_generators(&metric);
        notes.push("constant curvature: six KVs and four gradient CKVs from the embedding".into());
    } else {
        generators.extend(translations(&chart, &[("x", a), ("y", b)]));
        if a.powi(2) == b.powi(2) {
            let f = field(
                &chart,
                vec![Expr::zero(), ex("y", &chart), ex("-x", &chart)],
            );
            generators.push(gen("X_I3", f, ConformalClass::Killing, Expr::zero(), false));
        }
        if a == &t && b == &t {
            let f = field(&chart, vec![t.clone(), Expr::zero(), Expr::zero()]);
            generators.push(gen("H", f, ConformalClass::Homothetic, Expr::one(), true));
        }
    }
    Ok(CatalogSpace {
        name: "bianchi1_slice".into(),
        metric,
        generators,
        notes,
    })
}

/// −dt² + sin²t dx² + cos²t dy² embedded in R^{2,2} as
/// U = cos t cosh y, Y = cos t sinh y, V = sin t cosh x, X = sin t sinh x.
fn ads3_generators(g: &Metric) -> Vec<Generator> {
    let chart = g.chart();
    let emb = [
        ("U", ex("cos(t)*cosh(y)", chart)),
        ("V", ex("sin(t)*cosh(x)", chart)),
        ("X", ex("sin(t)*sinh(x)", chart)),
        ("Y", ex("cos(t)*sinh(y)", chart)),
    ];
    let raise = |w: Vec<Expr>| {
        let inv = g.inverse();
        let comps = (0..3)
            .map(|i| {
                Expr::sum(
                    (0..3)
                        .filter(|&j| !inv[i][j].is_zero())
                        .map(|j| &inv[i][j] * &w[j]),
                )
            })
            .collect();
        field(chart, comps)
    };
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let (na, xa) = &emb[a];
            let (nb, xb) = &emb[b];
            let w = chart
                .gradient(xb)
                .into_iter()
                .zip(chart.gradient(xa))
                .map(|(db, da)| xa * db - xb * da)
                .collect();
            out.push(gen(
                &format!("K_{na}{nb}"),
                raise(w),
                ConformalClass::Killing,
                Expr::zero(),
                false,
            ));
        }
    }
    for (name, l) in &emb {
        out.push(gen(
            &format!("C_{name}"),
            raise(chart.gradient(l)),
            ConformalClass::ProperCKV,
            l.clone(),
            true,
        ));
    }
    out
}

/// Names accepted by [`by_name`].
pub const SPACE_NAMES: &[&str] = &[
    "minkowski3",
    "minkowski4",
    "minkowski5",
    "minkowski6",
    "hsphere2",
    "hsphere3",
    "hsphere4",
    "les2",
    "les3",
    "les4",
    "les5",
    "bianchi1",
    "bianchi1_ab",
    "bianchi1_c1",
    "bianchi1_t",
    "bianchi1_ads",
    "decomposable0",
    "decomposable1",
];

/// Look up a catalogue space by its command-line name.
pub fn by_name(name: &str, zt: &ZeroTest) -> Result<CatalogSpace, CatalogError> {
    let chart4 = Chart::new(&["t", "x", "y", "z"])?;
    let e = |s: &str| ex(s, &chart4);
    let suffix = |p: &str| name.strip_prefix(p).and_then(|s| s.parse::<usize>().ok());
    let mut space = match name {
        "bianchi1" => bianchi_i(&e("t"), &e("exp(t)"), &e("cosh(t)"), zt)?,
        "bianchi1_ab" => bianchi_i(&e("t^2"), &e("t^2"), &e("cosh(t)"), zt)?,
        "bianchi1_c1" => bianchi_i(&e("t"), &e("exp(t)"), &Expr::one(), zt)?,
        "bianchi1_t" => bianchi_i(&e("t"), &e("t"), &Expr::one(), zt)?,
        "bianchi1_ads" => bianchi_slice(&e("sin(t)"), &e("cos(t)"), zt)?,
        "decomposable0" => decomposable(
            0,
            &minkowski_with_coords(&["t", "x"], zt).map(killing_and_homothetic)?,
            zt,
        )?,
        "decomposable1" => decomposable(1, &hyperbolic_sphere(2, zt)?, zt)?,
        _ => {
            if let Some(n) = suffix("minkowski") {
                minkowski(n, zt)?
            } else if let Some(d) = suffix("hsphere") {
                hyperbolic_sphere(d, zt)?
            } else if let Some(m) = suffix("les") {
                sp_ckv_flat(m, zt)?
            } else {
                return Err(CatalogError::UnknownSpace(name.to_string()));
            }
        }
    };
    space.name = name.to_string();
    Ok(space)
}

/// Keep the Killing and homothetic generators of a two-dimensional
/// Minkowski plane.
fn killing_and_homothetic(mut s: CatalogSpace) -> CatalogSpace {
    s.generators.retain(|g| {
        matches!(
            g.class,
            ConformalClass::Killing | ConformalClass::Homothetic
        )
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::commutator;

    fn zt() -> ZeroTest {
        ZeroTest::default()
    }

    fn assert_valid(s: &CatalogSpace) {
        for c in s.validate(&zt()).unwrap() {
            assert!(
                c.ok(),
                "{}: {} declared wrong: got {:?} psi {} gradient {}",
                s.name,
                c.name,
                c.classified.class,
                c.classified.psi,
                c.classified.is_gradient
            );
        }
    }

    #[test]
    fn minkowski_inventory() {
        for n in 3..=5 {
            let s = minkowski(n, &zt()).unwrap();
            assert_eq!(s.generators.len(), (n + 1) * (n + 2) / 2);
        }
        let s = minkowski(4, &zt()).unwrap();
        assert_valid(&s);
        assert!(matches!(
            minkowski(2, &zt()),
            Err(CatalogError::OutOfRange { .. })
        ));
    }

    #[test]
    fn hyperbolic_plane() {
        let s = hyperbolic_sphere(2, &zt()).unwrap();
        assert_valid(&s);
        assert_eq!(
            s.metric.constant_ricci_scalar(&zt()).unwrap(),
            Some(crate::Rational::from(-2))
        );
        let s3 = hyperbolic_sphere(3, &zt()).unwrap();
        assert!(s3.generators.is_empty());
        assert!(s3.metric.constant_ricci_scalar(&zt()).unwrap().is_some());
    }

    #[test]
    fn les_generators_and_brackets() {
        for m in 2..=4 {
            let s = sp_ckv_flat(m, &zt()).unwrap();
            assert_valid(&s);
        }
        let s = sp_ckv_flat(3, &zt()).unwrap();
        let (k, h, c) = (
            &s.generators[0].field,
            &s.generators[1].field,
            &s.generators[2].field,
        );
        let b = commutator(k, h).unwrap().sub(k).unwrap();
        assert!(b
            .comps()
            .iter()
            .all(|e| zt().is_zero(e, s.chart().sampler()).unwrap()));
        let b = commutator(h, c).unwrap().sub(c).unwrap();
        assert!(b
            .comps()
            .iter()
            .all(|e| zt().is_zero(e, s.chart().sampler()).unwrap()));
    }

    #[test]
    fn decomposable_spaces() {
        for name in ["decomposable0", "decomposable1"] {
            assert_valid(&by_name(name, &zt()).unwrap());
        }
    }

    #[test]
    fn bianchi_family() {
        for name in ["bianchi1", "bianchi1_ab", "bianchi1_c1", "bianchi1_t"] {
            let s = by_name(name, &zt()).unwrap();
            assert_valid(&s);
        }
        assert!(by_name("bianchi1_ab", &zt())
            .unwrap()
            .generator("X_I3")
            .is_some());
        assert!(by_name("bianchi1", &zt())
            .unwrap()
            .generator("X_I3")
            .is_none());
        let c1 = by_name("bianchi1_c1", &zt()).unwrap();
        assert!(c1.generator("K_z").unwrap().gradient);
        assert!(!c1.generator("K_x").unwrap().gradient);
    }

    #[test]
    fn ads_slice() {
        let s = by_name("bianchi1_ads", &zt()).unwrap();
        assert_eq!(s.generators.len(), 10);
        assert_valid(&s);
        assert_eq!(
            s.metric.constant_ricci_scalar(&zt()).unwrap(),
            Some(crate::Rational::from(-6))
        );
    }

    #[test]
    fn vanishing_scale_factor() {
        let c = Chart::new(&["t", "x"]).unwrap();
        let t = ex("t", &c);
        let err = bianchi_i(
            &(t - Expr::rational(1, 2)),
            &Expr::one(),
            &Expr::one(),
            &zt(),
        )
        .unwrap_err();
        assert!(matches!(err, CatalogError::Vanishing(_)));
        assert!(matches!(
            by_name("nowhere", &zt()),
            Err(CatalogError::UnknownSpace(_))
        ));
    }

    #[test]
    fn export_lists_fields() {
        let s = minkowski(3, &zt()).unwrap();
        let text = s.to_problem_text();
        assert!(text.contains("[metric]\ndiag: -1, 1, 1"));
        assert!(text.contains("X_C^1: "));
    }
}
