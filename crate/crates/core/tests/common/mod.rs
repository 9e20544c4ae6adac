#![allow(dead_code)]

use lieconf::catalog::{self, CatalogSpace};
use lieconf::conformal::classify;
use lieconf::rational::Rational;
use lieconf::symmetry::{generate, PdeSpec, SymmetryVector};
use lieconf::{eval_num, Expr, Point, ZeroTest};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn zt() -> ZeroTest {
    ZeroTest {
        trials: 20,
        tol: 1e-9,
        seed: 42,
    }
}

fn x() -> Expr {
    Expr::coordinate("x")
}

fn y() -> Expr {
    Expr::coordinate("y")
}

/// Random expression trees in x and y that stay finite and moderate on
/// [0.5, 1.5]².
pub fn tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(x()),
        Just(y()),
        (-3i64..=3).prop_map(Expr::int),
        (1i64..=4, 2i64..=5).prop_map(|(a, b)| Expr::rational(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.powi(2) + Expr::one())),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).ln()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).sqrt()),
            inner.clone().prop_map(|a| a.tanh()),
            (inner, 2i64..=3).prop_map(|(a, k)| a.powi(k)),
        ]
    })
}

pub fn point(x: f64, y: f64) -> Point {
    Point::new().with("x", x).with("y", y)
}

/// |a − b| / max(|a|, |b|, 1).
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Relative error of the symbolic x-derivative against a central
/// difference with step 1e-5.
pub fn fd_error(e: &Expr, d: &Expr, x: f64, y: f64) -> Option<f64> {
    let h = 1e-5;
    let fp = eval_num(e, &point(x + h, y)).ok()?;
    let fm = eval_num(e, &point(x - h, y)).ok()?;
    let exact = eval_num(d, &point(x, y)).ok()?;
    Some(rel(exact, (fp - fm) / (2.0 * h)))
}

/// X_u followed by the theorem symmetry of every generator of the space,
/// labeled by generator name; only admissible ones are kept.
pub fn theorem_symmetries(space: &CatalogSpace, pde: &PdeSpec) -> Vec<SymmetryVector> {
    let zt = zt();
    let mut out = vec![SymmetryVector::scaling(pde.chart(), pde.dependent()).labeled("X_u")];
    for g in &space.generators {
        let c = classify(&space.metric, &g.field, &zt).unwrap();
        let gen = generate(pde, &c, Rational::ZERO, &Expr::zero(), &zt).unwrap();
        if gen.admissible {
            out.push(gen.symmetry.labeled(&g.name));
        }
    }
    out
}

/// A polynomial test function of the given coordinates.
pub fn test_function(coords: &[String]) -> Expr {
    let c: Vec<Expr> = coords.iter().map(|n| Expr::coordinate(n)).collect();
    let mut t: Vec<Expr> = c.iter().map(|x| x.powi(3)).collect();
    t.push(c.iter().cloned().product());
    Expr::sum(t)
}

/// Pairs of (equation, candidate symmetry), some theorem-generated and some
/// perturbed, drawn from a fixed seed.
pub fn randomized_pairs(count: usize) -> Vec<(PdeSpec, SymmetryVector)> {
    let zt = zt();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spaces = ["minkowski3", "minkowski4", "hsphere2", "les3", "bianchi1_t"];
    let mut out = Vec::new();
    while out.len() < count {
        let name = spaces[rng.gen_range(0..spaces.len())];
        let s = catalog::by_name(name, &zt).unwrap();
        let pde = if rng.gen_bool(0.5) {
            PdeSpec::laplace(&s.metric, "u").unwrap()
        } else {
            let v = Expr::rational(rng.gen_range(1..5), rng.gen_range(1..5));
            PdeSpec::klein_gordon(&s.metric, "u", v).unwrap()
        };
        let syms = theorem_symmetries(&s, &pde);
        let base = syms[rng.gen_range(0..syms.len())].clone();
        let c = s.chart().coord(rng.gen_range(0..s.chart().dim()));
        let u = Expr::dependent("u");
        let x = match rng.gen_range(0..3) {
            0 => base,
            1 => SymmetryVector::new(
                base.xi().clone(),
                "u",
                base.eta() + Expr::rational(1, 100) * &c * &u,
            )
            .unwrap(),
            _ => SymmetryVector::new(base.xi().clone(), "u", base.eta() + c.powi(2)).unwrap(),
        };
        out.push((pde, x));
    }
    out
}
