//! Reduction by zero-order invariants and the inherited / type II split.
//!
//! Three shapes are supported: ξ = ∂_r (profile e^{μr}), ξ = r∂_r
//! (profile r^μ), and the special conformal reduction of
//! −dz² + dR² + R²f handled by [`sp_ckv_reduce`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::calculus::{diff, expand, substitute, substitute_one};
use crate::conformal::{classify, ConformalError};
use crate::expr::Expr;
use crate::geometry::{constant_value, Chart, GeometryError, Matrix, Metric, VectorField};
use crate::rational::Rational;
use crate::symmetry::{
    generate, symmetry_bracket, verify_symmetry, Jet, PdeKind, PdeSpec, SymmetryError,
    SymmetryVector,
};
use crate::zero::{ZeroCheck, ZeroError, ZeroTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("unsupported symmetry shape: {0}")]
    UnsupportedShape(String),
    #[error("`{coordinate}` survives in {coefficient} (residual {residual:e})")]
    NotEliminated {
        coordinate: String,
        coefficient: String,
        residual: f64,
    },
    #[error("the symmetry does not annihilate {0}")]
    NotInvariant(String),
    #[error("the field is not a symmetry of the equation (residual {0:e})")]
    NotASymmetry(f64),
    #[error("wrong chart: {0}")]
    WrongChart(String),
    #[error("coordinate change does not invert: {0}")]
    BadInverse(String),
    #[error("specialized form disagrees with the reduced equation in {0}")]
    NotEquivalent(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Sampling(#[from] ZeroError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// φ = e^{μr}, from ξ = ∂_r.
    Exponential,
    /// φ = r^μ, from ξ = r∂_r.
    Power,
}

/// u = φ(r)·w(retained coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantAnsatz {
    pub reduction_coordinate: String,
    pub retained_coordinates: Vec<String>,
    pub dependent: String,
    pub reduced_dependent: String,
    pub shape: ProfileShape,
    pub mu: Expr,
    pub profile: Expr,
}

impl InvariantAnsatz {
    pub fn new(
        chart: &Chart,
        coordinate: &str,
        dependent: &str,
        shape: ProfileShape,
        mu: Expr,
    ) -> Result<InvariantAnsatz, ReductionError> {
        if chart.index_of(coordinate).is_none() {
            return Err(ReductionError::WrongChart(format!(
                "no coordinate `{coordinate}`"
            )));
        }
        let r = Expr::coordinate(coordinate);
        let profile = match shape {
            ProfileShape::Exponential => (&mu * &r).exp(),
            ProfileShape::Power => Expr::pow(r, mu.clone()),
        };
        let reduced_dependent = if dependent == "w" { "v" } else { "w" };
        Ok(InvariantAnsatz {
            reduction_coordinate: coordinate.to_string(),
            retained_coordinates: chart
                .coords()
                .iter()
                .filter(|c| *c != coordinate)
                .cloned()
                .collect(),
            dependent: dependent.to_string(),
            reduced_dependent: reduced_dependent.to_string(),
            shape,
            mu,
            profile,
        })
    }

    /// φ·w.
    pub fn rule(&self) -> Expr {
        &self.profile * Expr::dependent(&self.reduced_dependent)
    }

    /// The combined invariant φ^{-1}u.
    pub fn invariant(&self) -> Expr {
        Expr::dependent(&self.dependent) / &self.profile
    }

    /// X annihilates every retained coordinate and φ^{-1}u.
    pub fn check_annihilation(
        &self,
        x: &SymmetryVector,
        zt: &ZeroTest,
    ) -> Result<f64, ReductionError> {
        if x.dependent() != self.dependent {
            return Err(ReductionError::WrongChart(format!(
                "dependent `{}`",
                x.dependent()
            )));
        }
        let chart = x.chart();
        let sampler = Jet::new(chart, &self.dependent).sampler(chart.sampler());
        let mut worst: f64 = 0.0;
        let mut targets: Vec<Expr> = self
            .retained_coordinates
            .iter()
            .map(|c| Expr::coordinate(c))
            .collect();
        targets.push(self.invariant());
        for t in targets {
            let c = zt.check(&x.apply(&t), &sampler)?;
            worst = worst.max(c.max_residual);
            if !c.holds {
                return Err(ReductionError::NotInvariant(t.to_string()));
            }
        }
        Ok(worst)
    }
}

/// Closed-form invariants of ξ^r(r)∂_r + μu∂_u with ξ^r ∈ {c, c·r}.
pub fn invariants_for(
    x: &SymmetryVector,
    zt: &ZeroTest,
) -> Result<InvariantAnsatz, ReductionError> {
    let chart = x.chart();
    let n = chart.dim();
    let nz: Vec<usize> = (0..n).filter(|&i| !x.xi().comp(i).is_zero()).collect();
    if nz.len() != 1 {
        return Err(ReductionError::UnsupportedShape(
            "ξ must have exactly one nonzero component".into(),
        ));
    }
    let q = nz[0];
    let r = chart.coord(q);
    let xq = x.xi().comp(q);
    let (shape, c) = match xq.as_const() {
        Some(c) => (ProfileShape::Exponential, c),
        None => match (xq / &r).as_const() {
            Some(c) => (ProfileShape::Power, c),
            None => {
                return Err(ReductionError::UnsupportedShape(format!(
                    "ξ^{} = {xq} is neither constant nor proportional to {r}",
                    chart.coords()[q]
                )))
            }
        },
    };
    let u = x.dependent();
    let sampler = Jet::new(chart, u).sampler(chart.sampler());
    let a = diff(x.eta(), u);
    let b = x.eta() - &a * Expr::dependent(u);
    if !zt.is_zero(&b, &sampler)? {
        return Err(ReductionError::UnsupportedShape("η must be μ·u".into()));
    }
    for c in chart.coords() {
        if !zt.is_zero(&diff(&a, c), &sampler)? || a.contains(u) {
            return Err(ReductionError::UnsupportedShape(
                "μ must be constant".into(),
            ));
        }
    }
    let mu = expand(&(a / Expr::constant(c)));
    let ansatz = InvariantAnsatz::new(chart, &chart.coords()[q], u, shape, mu)?;
    ansatz.check_annihilation(x, zt)?;
    Ok(ansatz)
}

/// An invertible change of coordinates y^a(x) between two charts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChange {
    pub from: Chart,
    pub to: Chart,
    /// New coordinates as functions of the old ones.
    pub forward: Vec<Expr>,
    /// Old coordinates as functions of the new ones; a name missing here
    /// must be shared by both charts and maps to itself.
    pub inverse: BTreeMap<String, Expr>,
}

impl CoordinateChange {
    pub fn new(
        from: &Chart,
        to: &Chart,
        forward: Vec<Expr>,
        inverse: BTreeMap<String, Expr>,
        zt: &ZeroTest,
    ) -> Result<CoordinateChange, ReductionError> {
        if forward.len() != to.dim() {
            return Err(GeometryError::Shape {
                expected: to.dim(),
                got: forward.len(),
            }
            .into());
        }
        for c in from.coords() {
            if !inverse.contains_key(c) && to.index_of(c).is_none() {
                return Err(ReductionError::BadInverse(format!("no inverse for `{c}`")));
            }
        }
        let ch = CoordinateChange {
            from: from.clone(),
            to: to.clone(),
            forward,
            inverse,
        };
        for (a, y) in ch.forward.iter().enumerate() {
            let e = ch.pull(y) - to.coord(a);
            if !zt.is_zero(&e, to.sampler())? {
                return Err(ReductionError::BadInverse(format!(
                    "{} = {y}",
                    to.coords()[a]
                )));
            }
        }
        Ok(ch)
    }

    /// An expression in the old coordinates rewritten in the new ones.
    pub fn pull(&self, e: &Expr) -> Expr {
        expand(&substitute(e, &self.inverse))
    }

    fn jacobian(&self) -> Matrix {
        self.forward
            .iter()
            .map(|y| self.from.coords().iter().map(|c| diff(y, c)).collect())
            .collect()
    }

    pub fn field(&self, v: &VectorField) -> Result<VectorField, ReductionError> {
        if v.chart().coords() != self.from.coords() {
            return Err(GeometryError::ChartMismatch.into());
        }
        let j = self.jacobian();
        let comps = j
            .iter()
            .map(|row| self.pull(&Expr::sum(row.iter().zip(v.comps()).map(|(d, c)| d * c))))
            .collect();
        Ok(VectorField::new(&self.to, comps)?)
    }

    pub fn vector(&self, x: &SymmetryVector) -> Result<SymmetryVector, ReductionError> {
        let xi = self.field(x.xi())?;
        let s = match x.decomposition() {
            Some((a, b)) => SymmetryVector::linear(xi, x.dependent(), self.pull(a), self.pull(b))?,
            None => SymmetryVector::new(xi, x.dependent(), self.pull(x.eta()))?,
        };
        Ok(s.labeled(&x.label))
    }

    /// A'^{ab} = A^{ij}y^a_i y^b_j, B'^a = B^k y^a_k − A^{ij}y^a_{ij}.
    pub fn pde(&self, pde: &PdeSpec, zt: &ZeroTest) -> Result<PdeSpec, ReductionError> {
        if pde.chart().coords() != self.from.coords() {
            return Err(GeometryError::ChartMismatch.into());
        }
        let c = self.from.coords();
        let n = c.len();
        let m = self.to.dim();
        let j = self.jacobian();
        let a = pde.a();
        let mut a2 = vec![vec![Expr::zero(); m]; m];
        for p in 0..m {
            for q in p..m {
                let mut t = Vec::new();
                for i in 0..n {
                    for k in 0..n {
                        if !a[i][k].is_zero() && !j[p][i].is_zero() && !j[q][k].is_zero() {
                            t.push(&a[i][k] * &j[p][i] * &j[q][k]);
                        }
                    }
                }
                let e = self.pull(&Expr::sum(t));
                a2[p][q] = e.clone();
                a2[q][p] = e;
            }
        }
        let mut b2 = Vec::with_capacity(m);
        for p in 0..m {
            let mut t = Vec::new();
            for k in 0..n {
                if !pde.b()[k].is_zero() && !j[p][k].is_zero() {
                    t.push(&pde.b()[k] * &j[p][k]);
                }
            }
            for i in 0..n {
                for k in 0..n {
                    if !a[i][k].is_zero() {
                        let d = diff(&j[p][i], &c[k]);
                        if !d.is_zero() {
                            t.push(-(&a[i][k] * d));
                        }
                    }
                }
            }
            b2.push(self.pull(&Expr::sum(t)));
        }
        let f2 = self.pull(pde.f());
        Ok(PdeSpec::generic(&self.to, pde.dependent(), a2, b2, f2, zt)?)
    }
}

/// `pde` rewritten in the coordinates of `change.to`.
pub fn change_coordinates(
    pde: &PdeSpec,
    change: &CoordinateChange,
    zt: &ZeroTest,
) -> Result<PdeSpec, ReductionError> {
    change.pde(pde, zt)
}

/// A reduced equation together with how it was obtained.
#[derive(Debug, Clone)]
pub struct ReducedPde {
    /// The reduced equation in its final form.
    pub pde: PdeSpec,
    /// The equation the ansatz was substituted into.
    pub parent: PdeSpec,
    pub ansatz: InvariantAnsatz,
    pub used: Option<SymmetryVector>,
    /// The reduced equation was divided by φ·N with N = N(r).
    pub normalization: Expr,
    /// Largest residual of the reduction-coordinate absence check.
    pub absence_residual: f64,
    /// Map from the original chart to the parent chart, if any.
    pub change: Option<CoordinateChange>,
    /// The reduced equation before specialization, with the map from its
    /// chart to the final one.
    pub general: Option<(PdeSpec, Option<CoordinateChange>)>,
    pub inherited: Vec<SymmetryVector>,
    pub hidden: Vec<SymmetryVector>,
}

impl ReducedPde {
    /// The reduced equation on the retained coordinates of the parent.
    pub fn retained_form(&self) -> &PdeSpec {
        self.general.as_ref().map(|(p, _)| p).unwrap_or(&self.pde)
    }

    /// L(φ·w) − φ·N·L̂(w) on the parent chart for a test function w of
    /// the retained coordinates.
    pub fn round_trip(&self, w: &Expr, zt: &ZeroTest) -> Result<ZeroCheck, ReductionError> {
        let lhs = self.parent.apply_to(&(&self.ansatz.profile * w));
        let rhs = &self.ansatz.profile * &self.normalization * self.retained_form().apply_to(w);
        Ok(zt.check(&(lhs - rhs), self.parent.chart().sampler())?)
    }

    /// Record a classification's verified sets.
    pub fn with_classification(mut self, c: &Classification) -> ReducedPde {
        self.inherited = c.inherited.iter().map(|x| x.symmetry.clone()).collect();
        self.hidden = c.type_ii.iter().map(|x| x.symmetry.clone()).collect();
        self
    }
}

fn rational_near(x: f64) -> Expr {
    Expr::constant(Rational::approximate(x, 8, 0.5).unwrap_or(Rational::ONE))
}

/// Substitute u = φw, divide by φ·N and reassemble on the retained chart.
pub fn reduce(
    pde: &PdeSpec,
    ansatz: &InvariantAnsatz,
    zt: &ZeroTest,
) -> Result<ReducedPde, ReductionError> {
    let chart = pde.chart();
    let r = &ansatz.reduction_coordinate;
    let q = chart
        .index_of(r)
        .ok_or_else(|| ReductionError::WrongChart(format!("no coordinate `{r}`")))?;
    if pde.dependent() != ansatz.dependent {
        return Err(ReductionError::WrongChart(format!(
            "dependent `{}`",
            pde.dependent()
        )));
    }
    let n = chart.dim();
    let keep: Vec<usize> = (0..n).filter(|&i| i != q).collect();
    let phi = &ansatz.profile;
    let lp = expand(&(diff(phi, r) / phi));
    let lpp = expand(&(diff(&diff(phi, r), r) / phi));
    let a = pde.a();
    let b = pde.b();
    let wname = &ansatz.reduced_dependent;
    let w = Expr::dependent(wname);

    let mut ra: Matrix = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| a[i][j].clone()).collect())
        .collect();
    let mut rb: Vec<Expr> = keep
        .iter()
        .map(|&i| &b[i] - Expr::int(2) * &a[q][i] * &lp)
        .collect();
    let mut rf = substitute_one(pde.f(), pde.dependent(), &ansatz.rule()) / phi
        - (&a[q][q] * &lpp - &b[q] * &lp) * &w;

    let pivot = (0..keep.len()).find(|&k| !ra[k][k].is_zero());
    let norm = match pivot {
        Some(k) => {
            let c = &ra[k][k];
            expand(&(c / substitute_one(c, r, &Expr::one())))
        }
        None => Expr::one(),
    };
    let tidy = |e: &Expr| expand(&(e / &norm));
    ra = ra
        .iter()
        .map(|row| row.iter().map(&tidy).collect())
        .collect();
    rb = rb.iter().map(&tidy).collect();
    rf = tidy(&rf);

    let sampler = Jet::new(chart, wname).sampler(chart.sampler());
    let mut absence: f64 = 0.0;
    let cn = chart.coords();
    let mut check = |e: &Expr, label: String| -> Result<(), ReductionError> {
        let c = zt.check(&diff(e, r), &sampler)?;
        absence = absence.max(c.max_residual);
        if !c.holds {
            return Err(ReductionError::NotEliminated {
                coordinate: r.clone(),
                coefficient: label,
                residual: c.max_residual,
            });
        }
        Ok(())
    };
    for (x, &i) in keep.iter().enumerate() {
        for (y, &j) in keep.iter().enumerate() {
            if y >= x {
                check(&ra[x][y], format!("A^({},{})", cn[i], cn[j]))?;
            }
        }
        check(&rb[x], format!("B^{}", cn[i]))?;
    }
    check(&rf, "f".into())?;

    // constant in r: any admissible value of r may be substituted
    let (lo, hi) = chart.sampler().interval(r);
    let r0 = rational_near(0.5 * (lo + hi));
    let fix = |e: &Expr| {
        if e.contains(r) {
            expand(&substitute_one(e, r, &r0))
        } else {
            e.clone()
        }
    };
    ra = ra
        .iter()
        .map(|row| row.iter().map(&fix).collect())
        .collect();
    rb = rb.iter().map(&fix).collect();
    rf = fix(&rf);

    let reduced_chart = chart.without(r)?;
    let generic = PdeSpec::generic(&reduced_chart, wname, ra, rb, rf, zt)?;
    let reduced = recognize(generic, zt)?;
    Ok(ReducedPde {
        pde: reduced,
        parent: pde.clone(),
        ansatz: ansatz.clone(),
        used: None,
        normalization: norm,
        absence_residual: absence,
        change: None,
        general: None,
        inherited: Vec::new(),
        hidden: Vec::new(),
    })
}

/// Tag the equation as Laplace or Klein–Gordon when A^{ij} is the inverse
/// of a metric whose contracted Christoffel symbols equal B and f = −Vu.
fn recognize(pde: PdeSpec, zt: &ZeroTest) -> Result<PdeSpec, ReductionError> {
    let chart = pde.chart().clone();
    let g = match Metric::from_inverse(&chart, pde.a().clone(), zt) {
        Ok(g) => g,
        Err(GeometryError::Degenerate(_)) => return Ok(pde),
        Err(e) => return Err(e.into()),
    };
    let jet = pde.jet();
    let sampler = jet.sampler(chart.sampler());
    for (b, gamma) in pde.b().iter().zip(g.contracted_christoffel()) {
        if !zt.is_zero(&(b - gamma), &sampler)? {
            return Ok(pde);
        }
    }
    let w = pde.dependent().to_string();
    let fw = diff(pde.f(), &w);
    if !zt.is_zero(&(pde.f() - &fw * Expr::dependent(&w)), &sampler)? || fw.contains(&w) {
        return Ok(pde);
    }
    let v = expand(&(-fw));
    let v = match constant_value(&v, &chart, zt)? {
        Some(c) => Expr::constant(c),
        None => v,
    };
    let kind = if zt.is_zero(&v, chart.sampler())? {
        PdeKind::Laplace
    } else {
        PdeKind::KleinGordon { v }
    };
    Ok(pde.with_kind(kind, Some(g)))
}

/// Reduce by a verified symmetry of the supported shape.
pub fn reduce_by(
    pde: &PdeSpec,
    x: &SymmetryVector,
    zt: &ZeroTest,
) -> Result<ReducedPde, ReductionError> {
    let v = verify_symmetry(pde, x, zt)?;
    if !v.holds {
        return Err(ReductionError::NotASymmetry(v.max_residual));
    }
    let ansatz = invariants_for(x, zt)?;
    let mut red = reduce(pde, &ansatz, zt)?;
    red.used = Some(x.clone());
    Ok(red)
}

fn check_multiple(
    target: &PdeSpec,
    source: &PdeSpec,
    factor: &Expr,
    zt: &ZeroTest,
) -> Result<(), ReductionError> {
    let sampler = target.jet().sampler(target.chart().sampler());
    let n = target.chart().dim();
    for i in 0..n {
        for j in i..n {
            let e = &target.a()[i][j] - factor * &source.a()[i][j];
            if !zt.is_zero(&e, &sampler)? {
                return Err(ReductionError::NotEquivalent(format!("A({i},{j})")));
            }
        }
        let e = &target.b()[i] - factor * &source.b()[i];
        if !zt.is_zero(&e, &sampler)? {
            return Err(ReductionError::NotEquivalent(format!("B({i})")));
        }
    }
    if !zt.is_zero(&(target.f() - factor * source.f()), &sampler)? {
        return Err(ReductionError::NotEquivalent("f".into()));
    }
    Ok(())
}

/// Reduce Laplace's equation on −dz² + dR² + R²f (chart z, R, y…) by the
/// special conformal symmetry C_S + 2pzX_u, 2p = (1−m)/2, through
/// x = R/(R² − z²). The general result is
/// x²w_xx + f^{AB}w_AB − Γ^A w_A − 2p(2p+1)w = 0; for m = 3 it is returned
/// as Laplace's equation of x^{-4}dx² + x^{-2}f and for m ≥ 4 as a
/// Klein–Gordon equation of dφ² + f/V, V = (m−2)²/φ², φ = x^{-1/(m-2)}.
pub fn sp_ckv_reduce(pde: &PdeSpec, m: usize, zt: &ZeroTest) -> Result<ReducedPde, ReductionError> {
    let chart = pde.chart();
    let c = chart.coords();
    if m < 2 || chart.dim() != m + 1 || c[0] != "z" || c[1] != "R" {
        return Err(ReductionError::WrongChart(format!(
            "expected coordinates (z, R, {} more) for m = {m}",
            m.saturating_sub(1)
        )));
    }
    let g = pde
        .metric()
        .filter(|_| matches!(pde.kind(), PdeKind::Laplace))
        .ok_or_else(|| {
            ReductionError::WrongChart("expected Laplace's equation with its metric".into())
        })?;
    let ys: Vec<String> = c[2..].to_vec();
    let u = pde.dependent();

    let mut new_coords = vec!["x".to_string(), "R".to_string()];
    new_coords.extend(ys.iter().cloned());
    let new_chart = Chart::new(&new_coords)?
        .with_sampler(chart.sampler().clone().without_guards_on("z"))
        .with_interval("x", 1.2, 1.7)
        .with_interval("R", 1.0, 1.7);
    let e = |s: &str, ch: &Chart| crate::parse::parse(s, ch.coords()).expect("fixed formula");
    let mut forward = vec![e("R/(R^2 - z^2)", chart), e("R", chart)];
    forward.extend(ys.iter().map(|y| Expr::coordinate(y)));
    let inverse = BTreeMap::from([("z".to_string(), e("sqrt(R*(R - 1/x))", &new_chart))]);
    let change = CoordinateChange::new(chart, &new_chart, forward, inverse, zt)?;
    let parent = change.pde(pde, zt)?;

    let two_p = Rational::new(1 - m as i64, 2).expect("nonzero denominator");
    let z = Expr::coordinate("z");
    let big_r = Expr::coordinate("R");
    let mut xi = vec![
        Expr::rational(1, 2) * (z.powi(2) + big_r.powi(2)),
        &z * &big_r,
    ];
    xi.extend(ys.iter().map(|_| Expr::zero()));
    let used = SymmetryVector::linear(
        VectorField::new(chart, xi)?,
        u,
        Expr::constant(two_p) * &z,
        Expr::zero(),
    )?
    .labeled("X^3");
    let ansatz = InvariantAnsatz::new(
        &new_chart,
        "R",
        u,
        ProfileShape::Power,
        Expr::constant(two_p),
    )?;
    ansatz.check_annihilation(&change.vector(&used)?, zt)?;

    let mut red = reduce(&parent, &ansatz, zt)?;
    red.used = Some(used);
    red.change = Some(change);
    if m == 2 {
        return Ok(red);
    }

    let wname = ansatz.reduced_dependent.clone();
    let k = m - 1;
    let mut f: Matrix = vec![vec![Expr::zero(); k]; k];
    for a in 0..k {
        for b in 0..k {
            let fab = expand(&(g.g(a + 2, b + 2) / big_r.powi(2)));
            if fab.contains("z") || fab.contains("R") {
                return Err(ReductionError::WrongChart(
                    "f must depend on the y coordinates only".into(),
                ));
            }
            f[a][b] = fab;
        }
    }
    let general = red.pde.clone();
    let rc = general.chart().clone();
    let x = Expr::coordinate("x");
    if m == 3 {
        let mut gm: Matrix = vec![vec![Expr::zero(); m]; m];
        gm[0][0] = x.powi(-4);
        for a in 0..k {
            for b in 0..k {
                gm[a + 1][b + 1] = x.powi(-2) * &f[a][b];
            }
        }
        let metric = Metric::new(&rc, gm, zt)?;
        let lap = PdeSpec::laplace(&metric, &wname)?;
        check_multiple(&lap, &general, &x.powi(2), zt)?;
        red.pde = lap;
        red.general = Some((general, None));
        return Ok(red);
    }

    let s = (m - 2) as i64;
    let mut phi_coords = vec!["phi".to_string()];
    phi_coords.extend(ys.iter().cloned());
    let (xlo, xhi) = rc.sampler().interval("x");
    let phi_chart = Chart::new(&phi_coords)?
        .with_sampler(rc.sampler().clone().without_guards_on("x"))
        .with_interval("phi", xhi.powf(-1.0 / s as f64), xlo.powf(-1.0 / s as f64));
    let phi = Expr::coordinate("phi");
    let mut forward = vec![Expr::pow(x.clone(), Expr::rational(-1, s))];
    forward.extend(ys.iter().map(|y| Expr::coordinate(y)));
    let inverse = BTreeMap::from([("x".to_string(), phi.powi(-s))]);
    let to_phi = CoordinateChange::new(&rc, &phi_chart, forward, inverse, zt)?;
    let in_phi = to_phi.pde(&general, zt)?;

    let v = Expr::int(s * s) * phi.powi(-2);
    let c = Expr::constant(two_p) * Expr::constant(two_p + Rational::ONE);
    let mut gm: Matrix = vec![vec![Expr::zero(); m]; m];
    gm[0][0] = Expr::one();
    for a in 0..k {
        for b in 0..k {
            gm[a + 1][b + 1] = &f[a][b] / &v;
        }
    }
    let metric = Metric::new(&phi_chart, gm, zt)?;
    let kg = PdeSpec::klein_gordon(&metric, &wname, -(c * &v))?;
    check_multiple(&kg, &in_phi, &v, zt)?;
    red.pde = kg;
    red.general = Some((general, Some(to_phi)));
    Ok(red)
}

/// A candidate symmetry of the reduced equation and its verification.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: String,
    pub symmetry: SymmetryVector,
    pub holds: bool,
    pub residual: f64,
}

/// [used, X] = c·used, predicting that X survives the reduction by `used`.
#[derive(Debug, Clone, PartialEq)]
pub struct GovinderCheck {
    pub label: String,
    pub factor: Rational,
    pub inherited: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Classification {
    pub inherited: Vec<Candidate>,
    pub type_ii: Vec<Candidate>,
    /// Candidates that failed verification.
    pub rejected: Vec<Candidate>,
    /// Originals whose remaining components still involve the reduction
    /// coordinate.
    pub lost: Vec<String>,
    pub govinder: Vec<GovinderCheck>,
}

impl Classification {
    /// Every Govinder prediction was confirmed.
    pub fn govinder_consistent(&self) -> bool {
        self.govinder.iter().all(|g| g.inherited)
    }

    pub fn is_inherited(&self, label: &str) -> bool {
        self.inherited.iter().any(|c| c.label == label)
    }
}

/// The symmetry of the reduced equation built on ξ̂, with η from the
/// equation's own conformal theorem when it has a metric.
fn reduced_candidate(
    pde: &PdeSpec,
    xi: VectorField,
    zt: &ZeroTest,
) -> Result<Option<SymmetryVector>, ReductionError> {
    let w = pde.dependent();
    let sampler = pde.chart().sampler();
    let mut trivial = true;
    for c in xi.comps() {
        if !c.is_zero() && !zt.is_zero(c, sampler)? {
            trivial = false;
            break;
        }
    }
    if trivial {
        return Ok(Some(SymmetryVector::scaling(pde.chart(), w)));
    }
    match (pde.metric(), pde.kind()) {
        (Some(g), kind) if !matches!(kind, PdeKind::Generic) => {
            let c = classify(g, &xi, zt)?;
            if !c.class.is_ckv() {
                return Ok(None);
            }
            Ok(Some(
                generate(pde, &c, Rational::ZERO, &Expr::zero(), zt)?.symmetry,
            ))
        }
        _ => Ok(Some(SymmetryVector::linear(
            xi,
            w,
            Expr::zero(),
            Expr::zero(),
        )?)),
    }
}

fn same_field(a: &VectorField, b: &VectorField, zt: &ZeroTest) -> Result<bool, ReductionError> {
    for (x, y) in a.comps().iter().zip(b.comps()) {
        if !zt.is_zero(&(x - y), a.chart().sampler())? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn push(
    pde: &PdeSpec,
    x: SymmetryVector,
    label: &str,
    zt: &ZeroTest,
) -> Result<Candidate, ReductionError> {
    let v = verify_symmetry(pde, &x, zt)?;
    Ok(Candidate {
        label: label.to_string(),
        symmetry: x.labeled(label),
        holds: v.holds,
        residual: v.max_residual,
    })
}

/// Split the symmetries of the reduced equation into those descending
/// from `original` and type II hidden ones among `extras` (fields on the
/// final reduced chart), and report the commutator predictions.
pub fn classify_reduced(
    original: &[SymmetryVector],
    used: &SymmetryVector,
    reduced: &ReducedPde,
    extras: &[(String, VectorField)],
    zt: &ZeroTest,
) -> Result<Classification, ReductionError> {
    let mut out = Classification::default();
    let pde = &reduced.pde;
    let r = &reduced.ansatz.reduction_coordinate;
    let retained = reduced.retained_form().chart().clone();
    let parent_chart = reduced.parent.chart().clone();
    let q = parent_chart
        .index_of(r)
        .expect("reduction coordinate on the parent chart");
    let final_change = reduced.general.as_ref().and_then(|(_, c)| c.as_ref());
    let same = |x: &SymmetryVector| x.xi() == used.xi() && x.eta() == used.eta();

    for x in original.iter().filter(|x| !same(x)) {
        let label = if x.label.is_empty() {
            x.to_string()
        } else {
            x.label.clone()
        };
        let xp = match &reduced.change {
            Some(ch) => ch.vector(x)?,
            None => x.clone(),
        };
        let mut comps = Vec::with_capacity(retained.dim());
        let mut lost = false;
        for (i, c) in xp.xi().comps().iter().enumerate() {
            if i == q {
                continue;
            }
            if c.contains(r) && !zt.is_zero(&diff(c, r), parent_chart.sampler())? {
                lost = true;
                break;
            }
            comps.push(c.clone());
        }
        if lost {
            out.lost.push(label);
            continue;
        }
        let mut xi = VectorField::new(&retained, comps)?;
        if let Some(ch) = final_change {
            xi = ch.field(&xi)?;
        }
        let Some(cand) = reduced_candidate(pde, xi.clone(), zt)? else {
            let s = SymmetryVector::linear(xi, pde.dependent(), Expr::zero(), Expr::zero())?;
            out.rejected.push(push(pde, s, &label, zt)?);
            continue;
        };
        let c = push(pde, cand, &label, zt)?;
        if c.holds {
            out.inherited.push(c);
        } else {
            out.rejected.push(c);
        }
    }

    for (label, f) in extras {
        let f = f.on_chart(pde.chart())?;
        let Some(cand) = reduced_candidate(pde, f.clone(), zt)? else {
            let s = SymmetryVector::linear(f, pde.dependent(), Expr::zero(), Expr::zero())?;
            out.rejected.push(push(pde, s, label, zt)?);
            continue;
        };
        let c = push(pde, cand, label, zt)?;
        if !c.holds {
            out.rejected.push(c);
            continue;
        }
        let mut known = false;
        for i in &out.inherited {
            if same_field(i.symmetry.xi(), c.symmetry.xi(), zt)? {
                known = true;
                break;
            }
        }
        if !known {
            out.type_ii.push(c);
        }
    }

    let chart = used.chart();
    let sampler = Jet::new(chart, used.dependent()).sampler(chart.sampler());
    if let Some(k) = (0..chart.dim()).find(|&i| !used.xi().comp(i).is_zero()) {
        for x in original.iter().filter(|x| !same(x)) {
            let br = symmetry_bracket(used, x)?;
            let ratio = br.xi().comp(k) / used.xi().comp(k);
            let Some(c) = constant_value(&expand(&ratio), chart, zt)? else {
                continue;
            };
            let ce = Expr::constant(c);
            let mut prop = zt.is_zero(&(br.eta() - &ce * used.eta()), &sampler)?;
            for i in 0..chart.dim() {
                if !prop {
                    break;
                }
                prop = zt.is_zero(&(br.xi().comp(i) - &ce * used.xi().comp(i)), &sampler)?;
            }
            if prop {
                let label = if x.label.is_empty() {
                    x.to_string()
                } else {
                    x.label.clone()
                };
                let inherited = out.is_inherited(&label);
                out.govinder.push(GovinderCheck {
                    label,
                    factor: c,
                    inherited,
                });
            }
        }
    }
    Ok(out)
}
