//! Lie point symmetries of A^{ij}u_{ij} − B^k u_k − f = 0.
//!
//! Generators build symmetry vectors from conformal Killing vectors of the
//! metric; [`verify_symmetry`] checks any claimed symmetry independently by
//! second prolongation.

use std::fmt;

use thiserror::Error;

use crate::calculus::{diff, substitute_one};
use crate::conformal::{ClassifiedVector, ConformalClass, ConformalError};
use crate::expr::Expr;
use crate::geometry::{inverse_matrix, Chart, GeometryError, Matrix, Metric, VectorField};
use crate::rational::Rational;
use crate::zero::{DomainSampler, ZeroError, ZeroTest};

pub const JET_RANGE: (f64, f64) = (-2.0, 2.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Sampling(#[from] ZeroError),
    #[error("principal symbol A is identically zero")]
    ZeroPrincipalSymbol,
    #[error("the component ξ^{0} depends on the dependent variable")]
    XiDependsOnU(usize),
    #[error("the field is not a conformal Killing vector (residual {0:e})")]
    NotCkv(f64),
    #[error("the equation is not of linear kind: {0}")]
    NotLinear(&'static str),
    #[error("dependent variable `{0}` clashes with a coordinate")]
    DependentClash(String),
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
}

/// Symbols of the second-order jet over a chart: u, u_i and u_ij (i ≤ j,
/// indices in chart order), named `u`, `u_x`, `u_x_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dep: String,
    coords: Vec<String>,
}

impl Jet {
    pub fn new(chart: &Chart, dependent: &str) -> Jet {
        Jet {
            dep: dependent.to_string(),
            coords: chart.coords().to_vec(),
        }
    }

    pub fn dependent(&self) -> &str {
        &self.dep
    }

    pub fn u(&self) -> Expr {
        Expr::dependent(&self.dep)
    }

    pub fn ui_name(&self, i: usize) -> String {
        format!("{}_{}", self.dep, self.coords[i])
    }

    pub fn uij_name(&self, i: usize, j: usize) -> String {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        format!("{}_{}_{}", self.dep, self.coords[a], self.coords[b])
    }

    pub fn ui(&self, i: usize) -> Expr {
        Expr::symbol(&self.ui_name(i))
    }

    pub fn uij(&self, i: usize, j: usize) -> Expr {
        Expr::symbol(&self.uij_name(i, j))
    }

    /// Every jet symbol name, u first.
    pub fn names(&self) -> Vec<String> {
        let n = self.coords.len();
        let mut out = vec![self.dep.clone()];
        out.extend((0..n).map(|i| self.ui_name(i)));
        for i in 0..n {
            for j in i..n {
                out.push(self.uij_name(i, j));
            }
        }
        out
    }

    /// `sampler` extended with the jet ranges.
    pub fn sampler(&self, sampler: &DomainSampler) -> DomainSampler {
        let mut s = sampler.clone();
        for name in self.names() {
            s.set_interval(&name, JET_RANGE.0, JET_RANGE.1);
        }
        s
    }
}

/// ξ^i(x)∂_i + η(x,u)∂_u, optionally with η = a(x)u + b(x).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVector {
    pub label: String,
    xi: VectorField,
    dep: String,
    eta: Expr,
    ab: Option<(Expr, Expr)>,
}

impl SymmetryVector {
    pub fn new(
        xi: VectorField,
        dependent: &str,
        eta: Expr,
    ) -> Result<SymmetryVector, SymmetryError> {
        if xi.chart().index_of(dependent).is_some() {
            return Err(SymmetryError::DependentClash(dependent.to_string()));
        }
        if let Some(i) = xi.comps().iter().position(|c| c.contains(dependent)) {
            return Err(SymmetryError::XiDependsOnU(i));
        }
        Ok(SymmetryVector {
            label: String::new(),
            xi,
            dep: dependent.to_string(),
            eta,
            ab: None,
        })
    }

    /// η = a·u + b.
    pub fn linear(
        xi: VectorField,
        dependent: &str,
        a: Expr,
        b: Expr,
    ) -> Result<SymmetryVector, SymmetryError> {
        let u = Expr::dependent(dependent);
        let mut s = SymmetryVector::new(xi, dependent, &a * &u + &b)?;
        s.ab = Some((a, b));
        Ok(s)
    }

    /// The linearity symmetry u∂_u.
    pub fn scaling(chart: &Chart, dependent: &str) -> SymmetryVector {
        SymmetryVector::linear(
            VectorField::zero(chart),
            dependent,
            Expr::one(),
            Expr::zero(),
        )
        .expect("zero field is independent of u")
    }

    pub fn labeled(mut self, label: &str) -> SymmetryVector {
        self.label = label.to_string();
        self
    }

    pub fn xi(&self) -> &VectorField {
        &self.xi
    }

    pub fn eta(&self) -> &Expr {
        &self.eta
    }

    pub fn dependent(&self) -> &str {
        &self.dep
    }

    pub fn chart(&self) -> &Chart {
        self.xi.chart()
    }

    /// (a, b) if η was built as a·u + b.
    pub fn decomposition(&self) -> Option<&(Expr, Expr)> {
        self.ab.as_ref()
    }

    /// X(f) = ξ^k f_{,k} + η f_{,u}.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.xi.apply(f) + &self.eta * diff(f, &self.dep)
    }

    /// Linear combination with another symmetry on the same chart.
    pub fn plus(&self, other: &SymmetryVector, c: &Expr) -> Result<SymmetryVector, SymmetryError> {
        let xi = self.xi.add(&other.xi.scale(c))?;
        match (&self.ab, &other.ab) {
            (Some((a1, b1)), Some((a2, b2))) => {
                SymmetryVector::linear(xi, &self.dep, a1 + c * a2, b1 + c * b2)
            }
            _ => SymmetryVector::new(xi, &self.dep, &self.eta + c * &other.eta),
        }
    }
}

impl fmt::Display for SymmetryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi = {}; eta = {}", self.xi, self.eta)
    }
}

/// Commutator of two point symmetries in the (x, u) space.
pub fn symmetry_bracket(
    x: &SymmetryVector,
    y: &SymmetryVector,
) -> Result<SymmetryVector, SymmetryError> {
    if x.chart().coords() != y.chart().coords() {
        return Err(GeometryError::ChartMismatch.into());
    }
    let n = x.chart().dim();
    let comps = (0..n)
        .map(|i| x.apply(y.xi.comp(i)) - y.apply(x.xi.comp(i)))
        .collect();
    let xi = VectorField::new(x.chart(), comps)?;
    let eta = x.apply(&y.eta) - y.apply(&x.eta);
    SymmetryVector::new(xi, &x.dep, eta)
}

/// Second prolongation: (η_i, η_ij) over the jet symbols, one dependent
/// variable.
pub fn prolong2(x: &SymmetryVector) -> (Vec<Expr>, Matrix) {
    let chart = x.chart();
    let n = chart.dim();
    let jet = Jet::new(chart, &x.dep);
    let u = &x.dep;
    let c = chart.coords();
    let eta = &x.eta;
    let xi = x.xi.comps();
    let eta_u = diff(eta, u);
    let eta_uu = diff(&eta_u, u);
    let xi_u: Vec<Expr> = xi.iter().map(|e| diff(e, u)).collect();
    let xi_uu: Vec<Expr> = xi_u.iter().map(|e| diff(e, u)).collect();

    let mut eta_i = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = vec![diff(eta, &c[i]), jet.ui(i) * &eta_u];
        for j in 0..n {
            t.push(-(diff(&xi[j], &c[i]) * jet.ui(j)));
            t.push(-(jet.ui(i) * jet.ui(j) * &xi_u[j]));
        }
        eta_i.push(Expr::sum(t));
    }

    let mut eta_ij = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let (ui, uj) = (jet.ui(i), jet.ui(j));
            let mut t = vec![
                diff(&diff(eta, &c[i]), &c[j]),
                diff(&eta_u, &c[i]) * &uj,
                diff(&eta_u, &c[j]) * &ui,
                &eta_uu * &ui * &uj,
                &eta_u * jet.uij(i, j),
            ];
            for k in 0..n {
                let uk = jet.ui(k);
                t.push(-(diff(&diff(&xi[k], &c[i]), &c[j]) * &uk));
                t.push(-((diff(&xi_u[k], &c[i]) * &uj + diff(&xi_u[k], &c[j]) * &ui) * &uk));
                t.push(-(&xi_uu[k] * &ui * &uj * &uk));
                t.push(-(diff(&xi[k], &c[j]) * jet.uij(i, k)));
                t.push(-(diff(&xi[k], &c[i]) * jet.uij(j, k)));
                t.push(
                    -(&xi_u[k] * (&uk * jet.uij(i, j) + &uj * jet.uij(i, k) + &ui * jet.uij(j, k))),
                );
            }
            let e = Expr::sum(t);
            eta_ij[i][j] = e.clone();
            eta_ij[j][i] = e;
        }
    }
    (eta_i, eta_ij)
}

/// Which kind of equation a [`PdeSpec`] describes.
#[derive(Debug, Clone, PartialEq)]
pub enum PdeKind {
    Generic,
    Poisson { f: Expr },
    KleinGordon { v: Expr },
    Laplace,
    ConformalLaplace,
}

impl PdeKind {
    pub fn name(&self) -> &'static str {
        match self {
            PdeKind::Generic => "generic",
            PdeKind::Poisson { .. } => "poisson",
            PdeKind::KleinGordon { .. } => "klein_gordon",
            PdeKind::Laplace => "laplace",
            PdeKind::ConformalLaplace => "conformal_laplace",
        }
    }
}

/// A^{ij}u_{ij} − B^k u_k − f = 0 on a chart.
#[derive(Debug, Clone)]
pub struct PdeSpec {
    chart: Chart,
    dep: String,
    a: Matrix,
    b: Vec<Expr>,
    f: Expr,
    kind: PdeKind,
    metric: Option<Metric>,
}

impl PdeSpec {
    pub fn generic(
        chart: &Chart,
        dependent: &str,
        a: Matrix,
        b: Vec<Expr>,
        f: Expr,
        zt: &ZeroTest,
    ) -> Result<PdeSpec, SymmetryError> {
        let n = chart.dim();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(SymmetryError::Shape {
                expected: n,
                got: a.len(),
            });
        }
        if b.len() != n {
            return Err(SymmetryError::Shape {
                expected: n,
                got: b.len(),
            });
        }
        if chart.index_of(dependent).is_some() {
            return Err(SymmetryError::DependentClash(dependent.to_string()));
        }
        let jet = Jet::new(chart, dependent);
        let sampler = jet.sampler(chart.sampler());
        let mut nonzero = false;
        for e in a.iter().flatten() {
            if !e.is_zero() && !zt.is_zero(e, &sampler)? {
                nonzero = true;
                break;
            }
        }
        if !nonzero {
            return Err(SymmetryError::ZeroPrincipalSymbol);
        }
        Ok(PdeSpec {
            chart: chart.clone(),
            dep: dependent.to_string(),
            a,
            b,
            f,
            kind: PdeKind::Generic,
            metric: None,
        })
    }

    fn from_metric(
        g: &Metric,
        dependent: &str,
        f: Expr,
        kind: PdeKind,
    ) -> Result<PdeSpec, SymmetryError> {
        if g.chart().index_of(dependent).is_some() {
            return Err(SymmetryError::DependentClash(dependent.to_string()));
        }
        Ok(PdeSpec {
            chart: g.chart().clone(),
            dep: dependent.to_string(),
            a: g.inverse().clone(),
            b: g.contracted_christoffel().clone(),
            f,
            kind,
            metric: Some(g.clone()),
        })
    }

    /// Δu = f(x, u).
    pub fn poisson(g: &Metric, dependent: &str, f: Expr) -> Result<PdeSpec, SymmetryError> {
        PdeSpec::from_metric(g, dependent, f.clone(), PdeKind::Poisson { f })
    }

    /// Δu + V(x)u = 0.
    pub fn klein_gordon(g: &Metric, dependent: &str, v: Expr) -> Result<PdeSpec, SymmetryError> {
        let f = -(&v * Expr::dependent(dependent));
        PdeSpec::from_metric(g, dependent, f, PdeKind::KleinGordon { v })
    }

    /// Δu = 0.
    pub fn laplace(g: &Metric, dependent: &str) -> Result<PdeSpec, SymmetryError> {
        PdeSpec::from_metric(g, dependent, Expr::zero(), PdeKind::Laplace)
    }

    /// Δu − (n−2)/(4(n−1)) R u = 0, the conformally invariant operator for
    /// the curvature sign convention of [`crate::geometry`].
    pub fn conformal_laplace(g: &Metric, dependent: &str) -> Result<PdeSpec, SymmetryError> {
        let u = Expr::dependent(dependent);
        let f = conformal_coupling(g.dim()) * g.ricci_scalar() * u;
        PdeSpec::from_metric(g, dependent, f, PdeKind::ConformalLaplace)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dependent(&self) -> &str {
        &self.dep
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[Expr] {
        &self.b
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn kind(&self) -> &PdeKind {
        &self.kind
    }

    pub fn metric(&self) -> Option<&Metric> {
        self.metric.as_ref()
    }

    pub fn jet(&self) -> Jet {
        Jet::new(&self.chart, &self.dep)
    }

    /// The potential V of Δu + Vu = 0 when the equation has that shape.
    pub fn potential(&self) -> Option<Expr> {
        match &self.kind {
            PdeKind::KleinGordon { v } => Some(v.clone()),
            PdeKind::Laplace => Some(Expr::zero()),
            PdeKind::ConformalLaplace => {
                let g = self.metric.as_ref()?;
                Some(-(conformal_coupling(g.dim()) * g.ricci_scalar()))
            }
            _ => None,
        }
    }

    /// H = A^{ij}u_ij − B^k u_k − f over the jet symbols.
    pub fn residual_expr(&self) -> Expr {
        let jet = self.jet();
        let n = self.chart.dim();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !self.a[i][j].is_zero() {
                    t.push(&self.a[i][j] * jet.uij(i, j));
                }
            }
            if !self.b[i].is_zero() {
                t.push(-(&self.b[i] * jet.ui(i)));
            }
        }
        t.push(-self.f.clone());
        Expr::sum(t)
    }

    /// The operator applied to a function of the coordinates.
    pub fn apply_to(&self, w: &Expr) -> Expr {
        let c = self.chart.coords();
        let n = c.len();
        let mut t = Vec::new();
        for i in 0..n {
            let wi = diff(w, &c[i]);
            for j in 0..n {
                if !self.a[i][j].is_zero() {
                    t.push(&self.a[i][j] * diff(&wi, &c[j]));
                }
            }
            if !self.b[i].is_zero() {
                t.push(-(&self.b[i] * wi));
            }
        }
        t.push(-substitute_one(&self.f, &self.dep, w));
        Expr::sum(t)
    }

    /// Same equation with a different kind tag.
    pub fn with_kind(mut self, kind: PdeKind, metric: Option<Metric>) -> PdeSpec {
        self.kind = kind;
        self.metric = metric;
        self
    }
}

/// (n−2)/(4(n−1)).
pub fn conformal_coupling(n: usize) -> Expr {
    let n = n as i64;
    Expr::rational(n - 2, 4 * (n - 1))
}

/// (2−n)/2.
pub fn weight(n: usize) -> Rational {
    Rational::new(2 - n as i64, 2).expect("nonzero denominator")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub holds: bool,
    pub max_residual: f64,
}

/// Symmetry condition with one second derivative eliminated via H = 0.
pub fn symmetry_condition(
    pde: &PdeSpec,
    x: &SymmetryVector,
    zt: &ZeroTest,
) -> Result<Expr, SymmetryError> {
    if x.chart().coords() != pde.chart.coords() {
        return Err(GeometryError::ChartMismatch.into());
    }
    let n = pde.chart.dim();
    let jet = pde.jet();
    let sampler = jet.sampler(pde.chart.sampler());
    let (eta_i, eta_ij) = prolong2(x);
    let u = &pde.dep;

    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a = &pde.a[i][j];
            if a.is_zero() {
                continue;
            }
            t.push(a * &eta_ij[i][j]);
            let xa = x.apply(a);
            if !xa.is_zero() {
                t.push(xa * jet.uij(i, j));
            }
        }
    }
    // X^[1](F) with F = B^k u_k + f
    let big_f: Expr = Expr::sum((0..n).map(|k| &pde.b[k] * jet.ui(k)).chain([pde.f.clone()]));
    t.push(-(x.xi.apply(&big_f) + x.eta() * diff(&big_f, u)));
    for k in 0..n {
        if !pde.b[k].is_zero() {
            t.push(-(&pde.b[k] * &eta_i[k]));
        }
    }
    let e = Expr::sum(t);

    // eliminate u_kk from H = 0
    let h = pde.residual_expr();
    let mut pivot = None;
    for k in 0..n {
        let akk = &pde.a[k][k];
        if !akk.is_zero() && !zt.is_zero(akk, &sampler)? {
            pivot = Some((k, k));
            break;
        }
    }
    if pivot.is_none() {
        'outer: for k in 0..n {
            for l in k + 1..n {
                let akl = &pde.a[k][l];
                if !akl.is_zero() && !zt.is_zero(akl, &sampler)? {
                    pivot = Some((k, l));
                    break 'outer;
                }
            }
        }
    }
    let (k, l) = pivot.ok_or(SymmetryError::ZeroPrincipalSymbol)?;
    let name = jet.uij_name(k, l);
    let sym = Expr::symbol(&name);
    let coef = diff(&h, &name);
    let rest = h - &coef * &sym;
    let solved = -rest / coef;
    Ok(substitute_one(&e, &name, &solved))
}

/// Independent check of a claimed symmetry by second prolongation.
pub fn verify_symmetry(
    pde: &PdeSpec,
    x: &SymmetryVector,
    zt: &ZeroTest,
) -> Result<Verification, SymmetryError> {
    let cond = symmetry_condition(pde, x, zt)?;
    let sampler = pde.jet().sampler(pde.chart.sampler());
    let c = zt.check(&cond, &sampler)?;
    Ok(Verification {
        holds: c.holds,
        max_residual: c.max_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub name: String,
    pub holds: bool,
    pub max_residual: f64,
}

fn linear_parts(pde: &PdeSpec) -> Result<(), SymmetryError> {
    let u = &pde.dep;
    if pde.a.iter().flatten().any(|e| e.contains(u)) {
        return Err(SymmetryError::NotLinear("A depends on u"));
    }
    if pde.b.iter().any(|e| e.contains(u)) {
        return Err(SymmetryError::NotLinear("B depends on u"));
    }
    Ok(())
}

/// λ = a + (1/n) A_ij (L_ξ A)^{ij}, read off the principal-symbol condition.
pub fn infer_multiplier(pde: &PdeSpec, x: &SymmetryVector) -> Result<Expr, SymmetryError> {
    let n = pde.chart.dim();
    let a_low = inverse_matrix(&pde.a)?;
    let l = lie_derivative_contravariant(&pde.a, x.xi());
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !a_low[i][j].is_zero() && !l[i][j].is_zero() {
                t.push(&a_low[i][j] * &l[i][j]);
            }
        }
    }
    let a = diff(x.eta(), &pde.dep);
    Ok(a + Expr::sum(t) / Expr::int(n as i64))
}

/// (L_ξ A)^{ij} = ξ^k A^{ij}_{,k} − A^{kj}ξ^i_{,k} − A^{ik}ξ^j_{,k}.
pub fn lie_derivative_contravariant(a: &Matrix, xi: &VectorField) -> Matrix {
    let c = xi.chart().coords();
    let n = c.len();
    let dxi: Matrix = (0..n)
        .map(|i| (0..n).map(|k| diff(xi.comp(i), &c[k])).collect())
        .collect();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut t = vec![xi.apply(&a[i][j])];
            for k in 0..n {
                t.push(-(&a[k][j] * &dxi[i][k]));
                t.push(-(&a[i][k] * &dxi[j][k]));
            }
            out[i][j] = Expr::sum(t);
        }
    }
    out
}

/// The determining equations of the linear class, each tested on its own:
/// ξ_{,u} = 0, η_{,uu} = 0, the principal-symbol condition (one entry per
/// i ≤ j), the first-order condition (one per k) and the zeroth-order
/// condition. `lambda` defaults to [`infer_multiplier`].
pub fn linear_conditions_check(
    pde: &PdeSpec,
    x: &SymmetryVector,
    lambda: Option<&Expr>,
    zt: &ZeroTest,
) -> Result<Vec<ConditionResult>, SymmetryError> {
    linear_parts(pde)?;
    let n = pde.chart.dim();
    let u = &pde.dep;
    let c = pde.chart.coords();
    let jet = pde.jet();
    let sampler = jet.sampler(pde.chart.sampler());
    let lambda = match lambda {
        Some(l) => l.clone(),
        None => infer_multiplier(pde, x)?,
    };
    let mut out = Vec::new();
    let mut record = |name: String, e: &Expr| -> Result<(), SymmetryError> {
        let chk = zt.check(e, &sampler)?;
        out.push(ConditionResult {
            name,
            holds: chk.holds,
            max_residual: chk.max_residual,
        });
        Ok(())
    };

    let xi_u: Expr = Expr::sum(x.xi().comps().iter().map(|e| diff(e, u).powi(2)));
    record("xi_u = 0".into(), &xi_u)?;
    let a = diff(x.eta(), u);
    record("eta = a u + b".into(), &diff(&a, u))?;

    let l = lie_derivative_contravariant(&pde.a, x.xi());
    for i in 0..n {
        for j in i..n {
            let e = &l[i][j] - (&lambda - &a) * &pde.a[i][j] + x.eta() * diff(&pde.a[i][j], u);
            record(format!("principal({},{})", c[i], c[j]), &e)?;
        }
    }
    let bracket =
        crate::geometry::commutator(x.xi(), &VectorField::new(&pde.chart, pde.b.clone())?)?;
    for k in 0..n {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !pde.a[i][j].is_zero() {
                    t.push(&pde.a[i][j] * diff(&diff(x.xi().comp(k), &c[i]), &c[j]));
                }
            }
            if !pde.a[i][k].is_zero() {
                t.push(Expr::int(-2) * &pde.a[i][k] * diff(&a, &c[i]));
            }
        }
        t.push(bracket.comp(k).clone());
        t.push((&a - &lambda) * &pde.b[k]);
        record(format!("first_order({})", c[k]), &Expr::sum(t))?;
    }
    let eta = x.eta();
    let mut t = Vec::new();
    for i in 0..n {
        let ei = diff(eta, &c[i]);
        for j in 0..n {
            if !pde.a[i][j].is_zero() {
                t.push(&pde.a[i][j] * diff(&ei, &c[j]));
            }
        }
        t.push(-(&pde.b[i] * ei));
    }
    t.push(-x.xi().apply(&pde.f));
    t.push(-(eta * diff(&pde.f, u)));
    t.push(&lambda * &pde.f);
    record("zeroth_order".into(), &Expr::sum(t))?;
    Ok(out)
}

/// A theorem-generated symmetry with its admissibility data.
#[derive(Debug, Clone)]
pub struct Generated {
    pub symmetry: SymmetryVector,
    /// The constraint as an expression in (x, u); admissible iff ≡ 0.
    pub constraint: Expr,
    pub admissible: bool,
    pub residual: f64,
    /// Whether b solves the equation (None when b = 0 or not applicable).
    pub b_solves: Option<bool>,
    /// For Poisson with n > 2: the a₀-dependent part a₀(f − u f_u),
    /// already included in `constraint`.
    pub a0_correction: Option<Expr>,
}

fn require_ckv(ckv: &ClassifiedVector) -> Result<(), SymmetryError> {
    if ckv.class == ConformalClass::NotCKV {
        return Err(SymmetryError::NotCkv(ckv.residual));
    }
    Ok(())
}

fn theorem_vector(
    g: &Metric,
    dep: &str,
    ckv: &ClassifiedVector,
    a0: Rational,
    b: &Expr,
) -> Result<(SymmetryVector, Expr), SymmetryError> {
    let n = g.dim();
    let a = if n > 2 {
        Expr::constant(weight(n)) * &ckv.psi + Expr::constant(a0)
    } else {
        Expr::constant(a0)
    };
    let field = ckv.field.on_chart(g.chart())?;
    let s = SymmetryVector::linear(field, dep, a.clone(), b.clone())?;
    Ok((s, a))
}

/// Symmetry of Δu = f(x, u) built from a conformal Killing vector.
pub fn generate_poisson(
    g: &Metric,
    dep: &str,
    f: &Expr,
    ckv: &ClassifiedVector,
    a0: Rational,
    b: &Expr,
    zt: &ZeroTest,
) -> Result<Generated, SymmetryError> {
    require_ckv(ckv)?;
    let n = g.dim();
    let (symmetry, _) = theorem_vector(g, dep, ckv, a0, b)?;
    let u = Expr::dependent(dep);
    let psi = &ckv.psi;
    let xi = &symmetry.xi;
    let f_u = diff(f, dep);
    let a0e = Expr::constant(a0);
    let (constraint, correction) = if n > 2 {
        let w = Expr::constant(weight(n));
        let printed = Expr::sum([
            &w * g.laplacian(psi) * &u,
            g.laplacian(b),
            -xi.apply(f),
            -(&w * psi * &u * &f_u),
            -(Expr::rational(2 + n as i64, 2) * psi * f),
            -(b * &f_u),
        ]);
        let corr = &a0e * (f - &u * &f_u);
        (printed + &corr, Some(corr))
    } else {
        let c = Expr::sum([
            g.laplacian(b),
            -xi.apply(f),
            -(&a0e * &u * &f_u),
            (&a0e - Expr::int(2) * psi) * f,
            -(b * &f_u),
        ]);
        (c, None)
    };
    let jet = Jet::new(g.chart(), dep);
    let chk = zt.check(&constraint, &jet.sampler(g.chart().sampler()))?;
    Ok(Generated {
        symmetry,
        constraint,
        admissible: chk.holds,
        residual: chk.max_residual,
        b_solves: None,
        a0_correction: correction,
    })
}

/// ξ^k V_{,k} + 2ψV + ((2−n)/2)Δψ.
pub fn klein_gordon_condition(g: &Metric, v: &Expr, ckv: &ClassifiedVector) -> Expr {
    let n = g.dim();
    ckv.field.apply(v)
        + Expr::int(2) * &ckv.psi * v
        + Expr::constant(weight(n)) * g.laplacian(&ckv.psi)
}

/// Symmetry of Δu + V(x)u = 0 built from a conformal Killing vector.
pub fn generate_klein_gordon(
    g: &Metric,
    dep: &str,
    v: &Expr,
    ckv: &ClassifiedVector,
    a0: Rational,
    b: &Expr,
    zt: &ZeroTest,
) -> Result<Generated, SymmetryError> {
    require_ckv(ckv)?;
    let (symmetry, _) = theorem_vector(g, dep, ckv, a0, b)?;
    let constraint = klein_gordon_condition(g, v, ckv);
    let chk = zt.check(&constraint, g.chart().sampler())?;
    let b_solves = if b.is_zero() {
        None
    } else {
        Some(zt.is_zero(&(g.laplacian(b) + v * b), g.chart().sampler())?)
    };
    Ok(Generated {
        symmetry,
        constraint,
        admissible: chk.holds,
        residual: chk.max_residual,
        b_solves,
        a0_correction: None,
    })
}

/// Symmetry of Δu = 0 built from a conformal Killing vector.
pub fn generate_laplace(
    g: &Metric,
    dep: &str,
    ckv: &ClassifiedVector,
    a0: Rational,
    b: &Expr,
    zt: &ZeroTest,
) -> Result<Generated, SymmetryError> {
    generate_klein_gordon(g, dep, &Expr::zero(), ckv, a0, b, zt)
}

/// Dispatch on the equation kind.
pub fn generate(
    pde: &PdeSpec,
    ckv: &ClassifiedVector,
    a0: Rational,
    b: &Expr,
    zt: &ZeroTest,
) -> Result<Generated, SymmetryError> {
    let g = pde.metric().ok_or(SymmetryError::NotLinear(
        "no metric attached to the equation",
    ))?;
    match pde.kind() {
        PdeKind::Poisson { f } => generate_poisson(g, &pde.dep, f, ckv, a0, b, zt),
        PdeKind::Laplace => generate_laplace(g, &pde.dep, ckv, a0, b, zt),
        PdeKind::KleinGordon { .. } | PdeKind::ConformalLaplace => {
            let v = pde.potential().expect("metric kinds have a potential");
            generate_klein_gordon(g, &pde.dep, &v, ckv, a0, b, zt)
        }
        PdeKind::Generic => Err(SymmetryError::NotLinear(
            "generic equations have no generator",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::classify;
    use crate::parse::parse;

    fn zt() -> ZeroTest {
        ZeroTest::default()
    }

    fn line_chart() -> Chart {
        Chart::new(&["x", "y"]).unwrap()
    }

    fn p(c: &Chart, s: &str) -> Expr {
        parse(s, c.coords()).unwrap()
    }

    fn field(c: &Chart, comps: &[&str]) -> VectorField {
        VectorField::new(c, comps.iter().map(|s| p(c, s)).collect()).unwrap()
    }

    #[test]
    fn jet_names() {
        let j = Jet::new(&line_chart(), "u");
        assert_eq!(j.names(), ["u", "u_x", "u_y", "u_x_x", "u_x_y", "u_y_y"]);
        assert_eq!(j.uij_name(1, 0), "u_x_y");
    }

    #[test]
    fn translation_and_scaling_prolongations() {
        let c = line_chart();
        let t = SymmetryVector::new(field(&c, &["1", "0"]), "u", Expr::zero()).unwrap();
        let (ei, eij) = prolong2(&t);
        assert!(ei.iter().all(Expr::is_zero));
        assert!(eij.iter().flatten().all(Expr::is_zero));
        let s = SymmetryVector::scaling(&c, "u");
        let (ei, eij) = prolong2(&s);
        let j = Jet::new(&c, "u");
        assert_eq!(ei[0], j.ui(0));
        assert_eq!(eij[0][1], j.uij(0, 1));
    }

    #[test]
    fn dilation_prolongation() {
        let c = line_chart();
        let x = SymmetryVector::new(field(&c, &["x", "0"]), "u", Expr::zero()).unwrap();
        let (ei, eij) = prolong2(&x);
        let j = Jet::new(&c, "u");
        assert_eq!(ei[0], -j.ui(0));
        assert_eq!(eij[0][0], Expr::int(-2) * j.uij(0, 0));
    }

    #[test]
    fn xi_may_not_depend_on_u() {
        let c = line_chart();
        let bad = VectorField::new(&c, vec![Expr::dependent("u"), Expr::zero()]).unwrap();
        assert_eq!(
            SymmetryVector::new(bad, "u", Expr::zero()),
            Err(SymmetryError::XiDependsOnU(0))
        );
    }

    #[test]
    fn plane_laplace_symmetries() {
        let c = line_chart();
        let g = Metric::diagonal(&c, vec![Expr::one(), Expr::one()], &zt()).unwrap();
        let pde = PdeSpec::laplace(&g, "u").unwrap();
        for comps in [["1", "0"], ["y", "-x"], ["x", "y"], ["x^2 - y^2", "2*x*y"]] {
            let ckv = classify(&g, &field(&c, &comps), &zt()).unwrap();
            let gen =
                generate_laplace(&g, "u", &ckv, Rational::ZERO, &Expr::zero(), &zt()).unwrap();
            assert!(gen.admissible);
            assert!(
                verify_symmetry(&pde, &gen.symmetry, &zt()).unwrap().holds,
                "{comps:?}"
            );
        }
        let bad = SymmetryVector::new(field(&c, &["x^2", "0"]), "u", Expr::zero()).unwrap();
        let v = verify_symmetry(&pde, &bad, &zt()).unwrap();
        assert!(!v.holds && v.max_residual > 1e-3);
        assert!(
            verify_symmetry(&pde, &SymmetryVector::scaling(&c, "u"), &zt())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn two_dimensional_poisson_branch() {
        let c = line_chart();
        let g = Metric::diagonal(&c, vec![Expr::one(), Expr::one()], &zt()).unwrap();
        let f = Expr::dependent("u").exp();
        let pde = PdeSpec::poisson(&g, "u", f.clone()).unwrap();
        let ckv = classify(&g, &field(&c, &["x^2 - y^2", "2*x*y"]), &zt()).unwrap();
        assert_eq!(ckv.class, ConformalClass::SpecialCKV);
        // Liouville's equation: a0 = 0, b = -2ψ is admissible
        let b = Expr::int(-2) * &ckv.psi;
        let gen = generate_poisson(&g, "u", &f, &ckv, Rational::ZERO, &b, &zt()).unwrap();
        assert!(gen.admissible, "residual {}", gen.residual);
        assert!(verify_symmetry(&pde, &gen.symmetry, &zt()).unwrap().holds);
        let gen0 =
            generate_poisson(&g, "u", &f, &ckv, Rational::ZERO, &Expr::zero(), &zt()).unwrap();
        assert!(!gen0.admissible);
        assert!(!verify_symmetry(&pde, &gen0.symmetry, &zt()).unwrap().holds);
    }

    #[test]
    fn conditions_agree_with_prolongation() {
        let c = Chart::new(&["t", "x", "y"]).unwrap();
        let g = Metric::diagonal(&c, vec![Expr::int(-1), Expr::one(), Expr::one()], &zt()).unwrap();
        let pde = PdeSpec::laplace(&g, "u").unwrap();
        let h = classify(&g, &field(&c, &["t", "x", "y"]), &zt()).unwrap();
        let gen = generate_laplace(&g, "u", &h, Rational::ZERO, &Expr::zero(), &zt()).unwrap();
        let lam = infer_multiplier(&pde, &gen.symmetry).unwrap();
        assert_eq!(lam, Expr::rational(-5, 2));
        let conds = linear_conditions_check(&pde, &gen.symmetry, None, &zt()).unwrap();
        assert!(conds.iter().all(|r| r.holds), "{conds:?}");
        // a off by one on a proper conformal field breaks the first-order condition
        let sp = classify(
            &g,
            &field(&c, &["(t^2 + x^2 + y^2)/2", "t*x", "t*y"]),
            &zt(),
        )
        .unwrap();
        let good = generate_laplace(&g, "u", &sp, Rational::ZERO, &Expr::zero(), &zt()).unwrap();
        assert!(linear_conditions_check(&pde, &good.symmetry, None, &zt())
            .unwrap()
            .iter()
            .all(|r| r.holds));
        let wrong =
            SymmetryVector::linear(sp.field.clone(), "u", sp.psi.clone(), Expr::zero()).unwrap();
        let conds = linear_conditions_check(&pde, &wrong, None, &zt()).unwrap();
        assert!(conds
            .iter()
            .any(|r| r.name.starts_with("first_order") && !r.holds));
        assert!(!verify_symmetry(&pde, &wrong, &zt()).unwrap().holds);
    }
}
