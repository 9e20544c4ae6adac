//! The conformal hierarchy: Killing ⊂ homothetic ⊂ special conformal ⊂
//! conformal Killing vectors, gradient detection and algebra closure.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::calculus::{diff, expand};
use crate::eval::eval_num;
use crate::expr::Expr;
use crate::geometry::{commutator, constant_value, GeometryError, Metric, VectorField};
use crate::rational::Rational;
use crate::zero::{derive_seed, ZeroError, ZeroTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConformalError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] ZeroError),
    #[error("closure check needs at least two fields")]
    TooFewFields,
    #[error("[X{a}, X{b}] is not in the span of the given fields (residual {residual:e})")]
    NotClosed { a: usize, b: usize, residual: f64 },
}

/// Position in the conformal hierarchy. Later variants refine earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConformalClass {
    NotCKV,
    ProperCKV,
    SpecialCKV,
    Homothetic,
    Killing,
}

impl ConformalClass {
    pub fn name(self) -> &'static str {
        match self {
            ConformalClass::NotCKV => "NotCKV",
            ConformalClass::ProperCKV => "ProperCKV",
            ConformalClass::SpecialCKV => "SpecialCKV",
            ConformalClass::Homothetic => "Homothetic",
            ConformalClass::Killing => "Killing",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            ConformalClass::NotCKV,
            ConformalClass::ProperCKV,
            ConformalClass::SpecialCKV,
            ConformalClass::Homothetic,
            ConformalClass::Killing,
        ]
        .into_iter()
        .find(|c| c.name().eq_ignore_ascii_case(s))
    }

    pub fn is_ckv(self) -> bool {
        self != ConformalClass::NotCKV
    }
}

impl fmt::Display for ConformalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedVector {
    pub field: VectorField,
    pub psi: Expr,
    pub class: ConformalClass,
    pub is_gradient: bool,
    /// Largest relative residual of L_X g − 2ψg over the samples.
    pub residual: f64,
}

/// ψ = (1/(2n)) g^{ij}(L_X g)_{ij}, expanded, and replaced by its exact
/// value when it is a constant.
pub fn conformal_factor(g: &Metric, x: &VectorField) -> Expr {
    let n = g.dim();
    let l = g.lie_derivative(x);
    let ginv = g.inverse();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !ginv[i][j].is_zero() && !l[i][j].is_zero() {
                terms.push(&ginv[i][j] * &l[i][j]);
            }
        }
    }
    let psi = Expr::sum(terms) / Expr::int(2 * n as i64);
    expand(&psi)
}

fn tidy(e: Expr, g: &Metric, zt: &ZeroTest) -> Result<Expr, ConformalError> {
    if e.as_const().is_some() {
        return Ok(e);
    }
    Ok(match constant_value(&e, g.chart(), zt)? {
        Some(c) => Expr::constant(c),
        None => e,
    })
}

pub fn classify(
    g: &Metric,
    x: &VectorField,
    zt: &ZeroTest,
) -> Result<ClassifiedVector, ConformalError> {
    let n = g.dim();
    let sampler = g.chart().sampler();
    let psi = tidy(conformal_factor(g, x), g, zt)?;
    let l = g.lie_derivative(x);
    let two_psi = Expr::int(2) * &psi;
    let mut holds = true;
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let r = &l[i][j] - &two_psi * g.g(i, j);
            let c = zt.check(&r, sampler)?;
            holds &= c.holds;
            residual = residual.max(c.max_residual);
        }
    }
    let is_gradient = is_gradient(g, x, zt)?;
    let class = if !holds {
        ConformalClass::NotCKV
    } else if zt.is_zero(&psi, sampler)? {
        ConformalClass::Killing
    } else if all_zero(g.chart().gradient(&psi).iter(), g, zt)? {
        ConformalClass::Homothetic
    } else if all_zero(g.covariant_hessian(&psi).iter().flatten(), g, zt)? {
        ConformalClass::SpecialCKV
    } else {
        ConformalClass::ProperCKV
    };
    let psi = if class == ConformalClass::Killing {
        Expr::zero()
    } else {
        psi
    };
    Ok(ClassifiedVector {
        field: x.clone(),
        psi,
        class,
        is_gradient,
        residual,
    })
}

fn all_zero<'a>(
    mut it: impl Iterator<Item = &'a Expr>,
    g: &Metric,
    zt: &ZeroTest,
) -> Result<bool, ConformalError> {
    it.try_fold(
        true,
        |acc, e| Ok(acc && zt.is_zero(e, g.chart().sampler())?),
    )
}

/// True iff the lowered field X_i = g_{ik}X^k is closed.
pub fn is_gradient(g: &Metric, x: &VectorField, zt: &ZeroTest) -> Result<bool, ConformalError> {
    let low = g.lower(x);
    let coords = g.chart().coords();
    for i in 0..g.dim() {
        for j in i + 1..g.dim() {
            let curl = diff(&low[i], &coords[j]) - diff(&low[j], &coords[i]);
            if !zt.is_zero(&curl, g.chart().sampler())? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// c^k_{ab} with [X_a, X_b] = c^k_{ab} X_k.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<Vec<Vec<Rational>>>,
    /// Largest certification residual over all pairs.
    pub max_residual: f64,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bracket(&self, a: usize, b: usize) -> &[Rational] {
        &self.c[a][b]
    }

    /// Nonzero brackets (a < b) with their nonzero coefficients.
    pub fn nonzero(&self) -> Vec<(usize, usize, Vec<(usize, Rational)>)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                let terms: Vec<_> = self.c[a][b]
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !r.is_zero())
                    .map(|(k, r)| (k, *r))
                    .collect();
                if !terms.is_empty() {
                    out.push((a, b, terms));
                }
            }
        }
        out
    }
}

/// Expresses each commutator in the span of `fields`: least squares at
/// 2·dim sample points, rational recognition, then symbolic certification
/// of the residual field.
pub fn closure_check(
    g: &Metric,
    fields: &[VectorField],
    zt: &ZeroTest,
) -> Result<StructureConstants, ConformalError> {
    let m = fields.len();
    if m < 2 {
        return Err(ConformalError::TooFewFields);
    }
    let n = g.dim();
    let chart = g.chart();
    let mut names = std::collections::BTreeSet::new();
    for f in fields {
        for c in f.comps() {
            names.extend(c.symbols());
        }
    }
    names.extend(chart.coords().iter().cloned());
    let names: Vec<String> = names.into_iter().collect();

    let mut rng =
        <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(zt.seed, 0xc105));
    let npts = 2 * m;
    let mut points = Vec::with_capacity(npts);
    for _ in 0..npts {
        let p = chart.sampler().sample(&names, &mut rng, |p| {
            fields
                .iter()
                .flat_map(|f| f.comps())
                .try_for_each(|c| eval_num(c, p).map(|_| ()))
                .map_err(|e| e.to_string())
        })?;
        points.push(p);
    }
    let mut basis = DMatrix::<f64>::zeros(npts * n, m);
    for (pi, p) in points.iter().enumerate() {
        for (k, f) in fields.iter().enumerate() {
            for i in 0..n {
                basis[(pi * n + i, k)] =
                    eval_num(f.comp(i), p).expect("sampled point is admissible");
            }
        }
    }
    let svd = basis.clone().svd(true, true);

    let mut c = vec![vec![vec![Rational::ZERO; m]; m]; m];
    let mut max_residual: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            let br = commutator(&fields[a], &fields[b])?;
            let mut rhs = DVector::<f64>::zeros(npts * n);
            let mut ok = true;
            for (pi, p) in points.iter().enumerate() {
                for i in 0..n {
                    match eval_num(br.comp(i), p) {
                        Ok(v) => rhs[pi * n + i] = v,
                        Err(_) => ok = false,
                    }
                }
            }
            let coeffs = if ok {
                svd.solve(&rhs, 1e-10).ok()
            } else {
                None
            };
            let Some(coeffs) = coeffs else {
                return Err(ConformalError::NotClosed {
                    a,
                    b,
                    residual: f64::INFINITY,
                });
            };
            let mut rat = vec![Rational::ZERO; m];
            for k in 0..m {
                let v = coeffs[k];
                rat[k] = Rational::approximate(v, 1000, 1e-6 * (1.0 + v.abs())).ok_or(
                    ConformalError::NotClosed {
                        a,
                        b,
                        residual: f64::INFINITY,
                    },
                )?;
            }
            let mut res = br.clone();
            for (k, r) in rat.iter().enumerate() {
                if !r.is_zero() {
                    res = res.sub(&fields[k].scale(&Expr::constant(*r)))?;
                }
            }
            for i in 0..n {
                let chk = zt.check(res.comp(i), chart.sampler())?;
                max_residual = max_residual.max(chk.max_residual);
                if !chk.holds {
                    return Err(ConformalError::NotClosed {
                        a,
                        b,
                        residual: chk.max_residual,
                    });
                }
            }
            let neg: Vec<Rational> = rat.iter().map(|r| -*r).collect();
            c[a][b] = rat;
            c[b][a] = neg;
        }
    }
    Ok(StructureConstants {
        dim: m,
        c,
        max_residual,
    })
}

/// Re-classify `x` against the rescaled metric N²g, computing the new
/// conformal factor from its own Lie derivative.
pub fn conformal_rescale(
    g: &Metric,
    n: &Expr,
    x: &ClassifiedVector,
    zt: &ZeroTest,
) -> Result<ClassifiedVector, ConformalError> {
    let gbar = g.rescaled(n, zt)?;
    classify(&gbar, &x.field, zt)
}
