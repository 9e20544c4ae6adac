//! Tensor calculus on a coordinate chart.
//!
//! Index conventions: `christoffel()[i][j][k]` is Γ^i_{jk}; the contracted
//! symbol is Γ^k = g^{ij}Γ^k_{ij}, so that Δu = g^{ij}u_{,ij} − Γ^k u_{,k}.
//! The Riemann tensor is R^i_{jkl} = Γ^i_{jl,k} − Γ^i_{jk,l} +
//! Γ^i_{mk}Γ^m_{jl} − Γ^i_{ml}Γ^m_{jk} and R_{jl} = R^i_{jil}; round spheres
//! have positive scalar curvature.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::calculus::diff;
use crate::eval::eval_num;
use crate::expr::Expr;
use crate::rational::Rational;
use crate::zero::{derive_seed, DomainSampler, Guard, ZeroError, ZeroTest};

pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("a chart needs at least two coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("dimension {0} exceeds the supported maximum of 6")]
    DimensionTooLarge(usize),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("metric is not symmetric in entry ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("degenerate metric: {0}")]
    Degenerate(String),
    #[error("vector fields live on different charts")]
    ChartMismatch,
    #[error(transparent)]
    Sampling(#[from] ZeroError),
}

#[derive(Debug, PartialEq)]
struct ChartInner {
    coords: Vec<String>,
    sampler: DomainSampler,
}

/// Ordered coordinate names plus the sampling domain used for identity
/// tests on this chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart(Arc<ChartInner>);

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Chart, GeometryError> {
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        if coords.len() < 2 {
            return Err(GeometryError::TooFewCoordinates(coords.len()));
        }
        if coords.len() > MAX_DIM {
            return Err(GeometryError::DimensionTooLarge(coords.len()));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(GeometryError::DuplicateCoordinate(c.clone()));
            }
        }
        Ok(Chart(Arc::new(ChartInner {
            coords,
            sampler: DomainSampler::new(),
        })))
    }

    /// Same chart with the given sampling domain.
    pub fn with_sampler(&self, sampler: DomainSampler) -> Chart {
        Chart(Arc::new(ChartInner {
            coords: self.0.coords.clone(),
            sampler,
        }))
    }

    pub fn with_interval(&self, name: &str, lo: f64, hi: f64) -> Chart {
        self.with_sampler(self.0.sampler.clone().with_interval(name, lo, hi))
    }

    pub fn with_guard(&self, g: Guard) -> Chart {
        self.with_sampler(self.0.sampler.clone().with_guard(g))
    }

    pub fn coords(&self) -> &[String] {
        &self.0.coords
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == name)
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::coordinate(&self.0.coords[i])
    }

    pub fn sampler(&self) -> &DomainSampler {
        &self.0.sampler
    }

    /// Chart without coordinate `name`, keeping the sampling domain except
    /// for guards that mention `name`.
    pub fn without(&self, name: &str) -> Result<Chart, GeometryError> {
        let rest: Vec<&String> = self.coords().iter().filter(|c| *c != name).collect();
        if rest.len() == self.dim() {
            return Err(GeometryError::UnknownCoordinate(name.to_string()));
        }
        Ok(Chart::new(&rest)?.with_sampler(self.0.sampler.clone().without_guards_on(name)))
    }

    /// Gradient ∂_i f as a list.
    pub fn gradient(&self, f: &Expr) -> Vec<Expr> {
        self.coords().iter().map(|c| diff(f, c)).collect()
    }
}

/// Components of a contravariant vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<VectorField, GeometryError> {
        if comps.len() != chart.dim() {
            return Err(GeometryError::Shape {
                expected: chart.dim(),
                got: comps.len(),
            });
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps,
        })
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate field ∂_name.
    pub fn coordinate(chart: &Chart, name: &str) -> Result<VectorField, GeometryError> {
        let i = chart
            .index_of(name)
            .ok_or_else(|| GeometryError::UnknownCoordinate(name.to_string()))?;
        let mut v = VectorField::zero(chart);
        v.comps[i] = Expr::one();
        Ok(v)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    /// X(f) = X^k ∂_k f.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.comps
            .iter()
            .zip(self.chart.coords())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| c * diff(f, x))
            .sum()
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        if self.chart.coords() != other.chart.coords() {
            return Err(GeometryError::ChartMismatch);
        }
        Ok(VectorField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Same components on another chart with the same coordinate names.
    pub fn on_chart(&self, chart: &Chart) -> Result<VectorField, GeometryError> {
        if chart.coords() != self.chart.coords() {
            return Err(GeometryError::ChartMismatch);
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps: self.comps.clone(),
        })
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// [X, Y]^i = X^k Y^i_{,k} − Y^k X^i_{,k}.
pub fn commutator(x: &VectorField, y: &VectorField) -> Result<VectorField, GeometryError> {
    if x.chart.coords() != y.chart.coords() {
        return Err(GeometryError::ChartMismatch);
    }
    let comps = (0..x.chart.dim())
        .map(|i| x.apply(&y.comps[i]) - y.apply(&x.comps[i]))
        .collect();
    VectorField::new(&x.chart, comps)
}

pub type Matrix = Vec<Vec<Expr>>;

/// Determinant by cofactor expansion, skipping structural zeros.
pub fn determinant(m: &Matrix) -> Expr {
    let n = m.len();
    let idx: Vec<usize> = (0..n).collect();
    det_minor(m, 0, &idx)
}

fn det_minor(m: &Matrix, row: usize, cols: &[usize]) -> Expr {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut terms = Vec::new();
    for (k, &c) in cols.iter().enumerate() {
        let a = &m[row][c];
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_minor(m, row + 1, &rest);
        if minor.is_zero() {
            continue;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        terms.push(Expr::int(sign) * a * minor);
    }
    Expr::sum(terms)
}

/// Adjugate divided by the determinant.
pub fn inverse_matrix(m: &Matrix) -> Result<Matrix, GeometryError> {
    let n = m.len();
    if n > MAX_DIM {
        return Err(GeometryError::DimensionTooLarge(n));
    }
    let det = determinant(m);
    if det.is_zero() {
        return Err(GeometryError::Degenerate(
            "determinant is identically 0".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![vec![det.recip()]]);
    }
    let inv_det = det.recip();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji: delete row j, column i
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let sub: Matrix = rows
                .iter()
                .map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect())
                .collect();
            let minor = determinant(&sub);
            if minor.is_zero() {
                continue;
            }
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            out[i][j] = Expr::int(sign) * minor * &inv_det;
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
struct Cache {
    inverse: OnceLock<Matrix>,
    christoffel: OnceLock<Vec<Matrix>>,
    contracted: OnceLock<Vec<Expr>>,
    ricci: OnceLock<Expr>,
}

/// A non-degenerate symmetric metric g_ij on a chart.
#[derive(Debug, Clone)]
pub struct Metric {
    chart: Chart,
    g: Matrix,
    det: Expr,
    det_sign: i64,
    cache: Arc<Cache>,
}

impl PartialEq for Metric {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.g == other.g
    }
}

impl Metric {
    pub fn new(chart: &Chart, g: Matrix, zt: &ZeroTest) -> Result<Metric, GeometryError> {
        let n = chart.dim();
        if g.len() != n {
            return Err(GeometryError::Shape {
                expected: n,
                got: g.len(),
            });
        }
        for row in &g {
            if row.len() != n {
                return Err(GeometryError::Shape {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if g[i][j] != g[j][i] {
                    let diff = &g[i][j] - &g[j][i];
                    if !zt.is_zero(&diff, chart.sampler())? {
                        return Err(GeometryError::NotSymmetric(i, j));
                    }
                }
            }
        }
        let det = determinant(&g);
        let det_sign = sample_sign(&det, chart, zt)?;
        Ok(Metric {
            chart: chart.clone(),
            g,
            det,
            det_sign,
            cache: Arc::default(),
        })
    }

    pub fn diagonal(
        chart: &Chart,
        diag: Vec<Expr>,
        zt: &ZeroTest,
    ) -> Result<Metric, GeometryError> {
        let n = diag.len();
        let mut g = vec![vec![Expr::zero(); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            g[i][i] = d;
        }
        Metric::new(chart, g, zt)
    }

    /// Metric whose inverse is the given contravariant tensor.
    pub fn from_inverse(
        chart: &Chart,
        inv: Matrix,
        zt: &ZeroTest,
    ) -> Result<Metric, GeometryError> {
        let g = inverse_matrix(&inv)?;
        let m = Metric::new(chart, g, zt)?;
        let _ = m.cache.inverse.set(inv);
        Ok(m)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn components(&self) -> &Matrix {
        &self.g
    }

    pub fn g(&self, i: usize, j: usize) -> &Expr {
        &self.g[i][j]
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    /// Sign of the determinant on the sampling domain.
    pub fn det_sign(&self) -> i64 {
        self.det_sign
    }

    /// √|g| written as (s·det)^{1/2} with the sampled sign s.
    pub fn volume_density(&self) -> Expr {
        Expr::pow(Expr::int(self.det_sign) * &self.det, Expr::rational(1, 2))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || self.g[i][j].is_zero()))
    }

    pub fn inverse(&self) -> &Matrix {
        self.cache.inverse.get_or_init(|| {
            if self.is_diagonal() {
                let n = self.dim();
                let mut out = vec![vec![Expr::zero(); n]; n];
                for (i, row) in out.iter_mut().enumerate() {
                    row[i] = self.g[i][i].recip();
                }
                out
            } else {
                inverse_matrix(&self.g).expect("determinant checked at construction")
            }
        })
    }

    /// Γ^i_{jk}, symmetric in j, k by construction.
    pub fn christoffel(&self) -> &Vec<Matrix> {
        self.cache.christoffel.get_or_init(|| {
            let n = self.dim();
            let x = self.chart.coords();
            let dg: Vec<Matrix> = (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| (0..n).map(|j| diff(&self.g[i][j], &x[k])).collect())
                        .collect()
                })
                .collect();
            let ginv = self.inverse();
            let mut gamma = vec![vec![vec![Expr::zero(); n]; n]; n];
            for i in 0..n {
                for j in 0..n {
                    for k in j..n {
                        let mut terms = Vec::new();
                        for l in 0..n {
                            if ginv[i][l].is_zero() {
                                continue;
                            }
                            let bracket = &dg[k][l][j] + &dg[j][l][k] - &dg[l][j][k];
                            if !bracket.is_zero() {
                                terms.push(&ginv[i][l] * bracket);
                            }
                        }
                        let v = Expr::rational(1, 2) * Expr::sum(terms);
                        gamma[i][j][k] = v.clone();
                        gamma[i][k][j] = v;
                    }
                }
            }
            gamma
        })
    }

    /// Γ^k = g^{ij}Γ^k_{ij}.
    pub fn contracted_christoffel(&self) -> &Vec<Expr> {
        self.cache.contracted.get_or_init(|| {
            let n = self.dim();
            let ginv = self.inverse();
            let gamma = self.christoffel();
            (0..n)
                .map(|k| {
                    let mut terms = Vec::new();
                    for i in 0..n {
                        for j in 0..n {
                            if !ginv[i][j].is_zero() && !gamma[k][i][j].is_zero() {
                                terms.push(&ginv[i][j] * &gamma[k][i][j]);
                            }
                        }
                    }
                    Expr::sum(terms)
                })
                .collect()
        })
    }

    pub fn ricci_tensor(&self) -> Matrix {
        let n = self.dim();
        let x = self.chart.coords();
        let gamma = self.christoffel();
        let mut out = vec![vec![Expr::zero(); n]; n];
        for j in 0..n {
            for l in j..n {
                let mut terms = Vec::new();
                for i in 0..n {
                    terms.push(diff(&gamma[i][j][l], &x[i]));
                    terms.push(-diff(&gamma[i][j][i], &x[l]));
                    for m in 0..n {
                        terms.push(&gamma[i][m][i] * &gamma[m][j][l]);
                        terms.push(-(&gamma[i][m][l] * &gamma[m][j][i]));
                    }
                }
                let v = Expr::sum(terms);
                out[j][l] = v.clone();
                out[l][j] = v;
            }
        }
        out
    }

    pub fn ricci_scalar(&self) -> &Expr {
        self.cache.ricci.get_or_init(|| {
            let ric = self.ricci_tensor();
            let ginv = self.inverse();
            let n = self.dim();
            let mut terms = Vec::new();
            for j in 0..n {
                for l in 0..n {
                    if !ginv[j][l].is_zero() && !ric[j][l].is_zero() {
                        terms.push(&ginv[j][l] * &ric[j][l]);
                    }
                }
            }
            Expr::sum(terms)
        })
    }

    /// The scalar curvature as an exact rational when it is constant on
    /// the domain and numerically close to a small-denominator fraction.
    pub fn constant_ricci_scalar(&self, zt: &ZeroTest) -> Result<Option<Rational>, GeometryError> {
        constant_value(self.ricci_scalar(), &self.chart, zt)
    }

    /// Divergence form |g|^{-1/2} ∂_i(|g|^{1/2} g^{ij} ∂_j u).
    pub fn laplacian(&self, u: &Expr) -> Expr {
        let n = self.dim();
        let x = self.chart.coords();
        let ginv = self.inverse();
        let rho = self.volume_density();
        let du = self.chart.gradient(u);
        let mut terms = Vec::new();
        for i in 0..n {
            let flux: Expr = (0..n)
                .filter(|&j| !ginv[i][j].is_zero() && !du[j].is_zero())
                .map(|j| &ginv[i][j] * &du[j])
                .sum();
            if !flux.is_zero() {
                terms.push(diff(&(&rho * flux), &x[i]));
            }
        }
        Expr::sum(terms) / rho
    }

    /// g^{ij}u_{,ij} − Γ^k u_{,k}.
    pub fn laplacian_christoffel(&self, u: &Expr) -> Expr {
        let n = self.dim();
        let x = self.chart.coords();
        let ginv = self.inverse();
        let gk = self.contracted_christoffel();
        let du = self.chart.gradient(u);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !ginv[i][j].is_zero() {
                    terms.push(&ginv[i][j] * diff(&du[j], &x[i]));
                }
            }
            terms.push(-(&gk[i] * &du[i]));
        }
        Expr::sum(terms)
    }

    /// (L_X g)_{ij} = X^k g_{ij,k} + g_{kj} X^k_{,i} + g_{ik} X^k_{,j}.
    pub fn lie_derivative(&self, v: &VectorField) -> Matrix {
        let n = self.dim();
        let x = self.chart.coords();
        let dv: Matrix = (0..n)
            .map(|k| (0..n).map(|i| diff(v.comp(k), &x[i])).collect())
            .collect();
        let mut out = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut terms = vec![v.apply(&self.g[i][j])];
                for k in 0..n {
                    if !self.g[k][j].is_zero() && !dv[k][i].is_zero() {
                        terms.push(&self.g[k][j] * &dv[k][i]);
                    }
                    if !self.g[i][k].is_zero() && !dv[k][j].is_zero() {
                        terms.push(&self.g[i][k] * &dv[k][j]);
                    }
                }
                let e = Expr::sum(terms);
                out[i][j] = e.clone();
                out[j][i] = e;
            }
        }
        out
    }

    /// φ_{;ij} = φ_{,ij} − Γ^k_{ij} φ_{,k}.
    pub fn covariant_hessian(&self, phi: &Expr) -> Matrix {
        let n = self.dim();
        let x = self.chart.coords();
        let gamma = self.christoffel();
        let dphi = self.chart.gradient(phi);
        let mut out = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut terms = vec![diff(&dphi[i], &x[j])];
                for k in 0..n {
                    if !gamma[k][i][j].is_zero() && !dphi[k].is_zero() {
                        terms.push(-(&gamma[k][i][j] * &dphi[k]));
                    }
                }
                let e = Expr::sum(terms);
                out[i][j] = e.clone();
                out[j][i] = e;
            }
        }
        out
    }

    /// ∇_k g_{ij} = g_{ij,k} − Γ^l_{ki} g_{lj} − Γ^l_{kj} g_{il}, indexed [k][i][j].
    pub fn metric_covariant_derivative(&self) -> Vec<Matrix> {
        let n = self.dim();
        let x = self.chart.coords();
        let gamma = self.christoffel();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut terms = vec![diff(&self.g[i][j], &x[k])];
                                for l in 0..n {
                                    terms.push(-(&gamma[l][k][i] * &self.g[l][j]));
                                    terms.push(-(&gamma[l][k][j] * &self.g[i][l]));
                                }
                                Expr::sum(terms)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// X_i = g_{ik} X^k.
    pub fn lower(&self, v: &VectorField) -> Vec<Expr> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| !self.g[i][k].is_zero())
                    .map(|k| &self.g[i][k] * v.comp(k))
                    .sum()
            })
            .collect()
    }

    /// X^i = g^{ik} X_k.
    pub fn raise(&self, covector: &[Expr]) -> Result<VectorField, GeometryError> {
        let n = self.dim();
        let ginv = self.inverse();
        let comps = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| !ginv[i][k].is_zero())
                    .map(|k| &ginv[i][k] * &covector[k])
                    .sum()
            })
            .collect();
        VectorField::new(&self.chart, comps)
    }

    /// Metric N²g on the same chart.
    pub fn rescaled(&self, n: &Expr, zt: &ZeroTest) -> Result<Metric, GeometryError> {
        let n2 = n.powi(2);
        let g = self
            .g
            .iter()
            .map(|row| row.iter().map(|e| &n2 * e).collect())
            .collect();
        Metric::new(&self.chart, g, zt)
    }

    /// Same components on a chart with a different sampling domain.
    pub fn on_chart(&self, chart: &Chart, zt: &ZeroTest) -> Result<Metric, GeometryError> {
        if chart.coords() != self.chart.coords() {
            return Err(GeometryError::ChartMismatch);
        }
        Metric::new(chart, self.g.clone(), zt)
    }
}

fn sample_sign(det: &Expr, chart: &Chart, zt: &ZeroTest) -> Result<i64, GeometryError> {
    if let Some(c) = det.as_const() {
        if c.is_zero() {
            return Err(GeometryError::Degenerate(
                "determinant is identically 0".into(),
            ));
        }
        return Ok(if c.is_negative() { -1 } else { 1 });
    }
    let names: Vec<String> = det.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(zt.seed, det.structural_hash()));
    let mut sign = 0i64;
    for _ in 0..zt.trials.max(1) {
        let p = chart.sampler().sample(&names, &mut rng, |p| {
            eval_num(det, p).map(|_| ()).map_err(|e| e.to_string())
        })?;
        let v = eval_num(det, &p).expect("accepted point evaluates");
        if v.abs() < 1e-12 {
            return Err(GeometryError::Degenerate(format!(
                "determinant vanishes at a sample point ({v:e})"
            )));
        }
        let s = if v < 0.0 { -1 } else { 1 };
        if sign != 0 && s != sign {
            return Err(GeometryError::Degenerate(
                "determinant changes sign on the domain".into(),
            ));
        }
        sign = s;
    }
    Ok(sign)
}

/// If `e` has vanishing gradient on the chart, its value recognised as a
/// rational with denominator at most 1000.
pub fn constant_value(
    e: &Expr,
    chart: &Chart,
    zt: &ZeroTest,
) -> Result<Option<Rational>, GeometryError> {
    if let Some(c) = e.as_const() {
        return Ok(Some(c));
    }
    for x in chart.coords() {
        if !zt.is_zero(&diff(e, x), chart.sampler())? {
            return Ok(None);
        }
    }
    let names: Vec<String> = e.symbols().into_iter().collect();
    if names.iter().any(|s| chart.index_of(s).is_none()) {
        return Ok(None);
    }
    let mut rng = zt.rng_for(e);
    let p = chart.sampler().sample(&names, &mut rng, |p| {
        eval_num(e, p).map(|_| ()).map_err(|e| e.to_string())
    })?;
    let v = eval_num(e, &p).expect("accepted point evaluates");
    Ok(Rational::approximate(v, 1000, 1e-9 * (1.0 + v.abs())))
}
