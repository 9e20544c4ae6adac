mod common;

use std::collections::BTreeMap;

use common::*;
use lieconf::catalog::{self, sp_ckv_flat};
use lieconf::reduction::{classify_reduced, reduce_by, sp_ckv_reduce};
use lieconf::symmetry::{PdeKind, PdeSpec, SymmetryVector};
use lieconf::{diff, expand, parse, substitute, Expr, Rational};

/// −u_zz + u_RR + (m−1)/R u_R + R^{-2} Σ u_{y^A y^A}, written out by hand.
fn les_operator(u: &Expr, m: usize, ys: &[String]) -> Expr {
    let r = Expr::coordinate("R");
    let mut t = vec![
        -diff(&diff(u, "z"), "z"),
        diff(&diff(u, "R"), "R"),
        Expr::int(m as i64 - 1) / &r * diff(u, "R"),
    ];
    for y in ys {
        t.push(diff(&diff(u, y), y) / r.powi(2));
    }
    Expr::sum(t)
}

#[test]
fn m5_reduction_against_direct_substitution() {
    let zt = zt();
    let m = 5;
    let s = sp_ckv_flat(m, &zt).unwrap();
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = sp_ckv_reduce(&pde, m, &zt).unwrap();
    let (general, _) = red.general.as_ref().unwrap();

    // 2p = (1 − m)/2 = −2, so the zeroth-order coefficient 2p(2p+1) is 2
    let x = Expr::coordinate("x");
    let n = general.chart().dim();
    assert_eq!(general.chart().coords()[0], "x");
    for i in 0..n {
        for j in 0..n {
            let want = match (i, j) {
                (0, 0) => x.powi(2),
                (a, b) if a == b => Expr::one(),
                _ => Expr::zero(),
            };
            assert_eq!(expand(&general.a()[i][j]), want, "A({i},{j})");
        }
        assert!(general.b()[i].is_zero(), "B({i})");
    }
    assert_eq!(expand(general.f()), Expr::int(2) * Expr::dependent("w"));

    // u = R^{-2} W(x(z, R), y) in the original operator equals
    // R^{-2}·R^{-2}·(x²W_xx + ΣW_yy − 2W), the x²/R² coming from
    // x_R² − x_z² = 1/(R² − z²)²
    let ys: Vec<String> = (1..m).map(|a| format!("y{a}")).collect();
    let mut names = vec!["x".to_string()];
    names.extend(ys.iter().cloned());
    let w = parse("x^3*y1 + x*y2^2 + x^2*y3*y4 + sin(y1)*x", &names).unwrap();
    let mut reduced = vec![x.powi(2) * diff(&diff(&w, "x"), "x"), Expr::int(-2) * &w];
    for y in &ys {
        reduced.push(diff(&diff(&w, y), y));
    }
    let reduced = Expr::sum(reduced);
    let r = Expr::coordinate("R");
    let z = Expr::coordinate("z");
    let xr: BTreeMap<String, Expr> = [("x".to_string(), &r / (r.powi(2) - z.powi(2)))].into();
    let u = r.powi(-2) * substitute(&w, &xr);
    let lhs = les_operator(&u, m, &ys);
    let rhs = r.powi(-4) * substitute(&reduced, &xr);
    let c = zt.check(&(lhs - rhs), s.chart().sampler()).unwrap();
    assert!(c.holds, "residual {:e}", c.max_residual);
}

#[test]
fn les_m4_specialized_form() {
    let zt = zt();
    let s = sp_ckv_flat(4, &zt).unwrap();
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = sp_ckv_reduce(&pde, 4, &zt).unwrap();
    let PdeKind::KleinGordon { v } = red.pde.kind() else {
        panic!(
            "expected a Klein-Gordon equation, got {}",
            red.pde.kind().name()
        );
    };
    // −2p(2p+1)·(m−2)²/φ² with 2p = −3/2
    let phi = Expr::coordinate("phi");
    let want = Expr::rational(-3, 1) / phi.powi(2);
    assert!(zt.is_zero(&(v - want), red.pde.chart().sampler()).unwrap());
}

#[test]
fn gradient_kv_reduction_keeps_the_homothety_only_without_mu() {
    let zt = zt();
    let s = catalog::by_name("les3", &zt).unwrap();
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let orig = theorem_symmetries(&s, &pde);
    let kg = s.generator("K_G").unwrap().field.clone();
    for (mu, kept) in [
        (Rational::ZERO, true),
        (Rational::new(1, 2).unwrap(), false),
    ] {
        let used = SymmetryVector::linear(kg.clone(), "u", Expr::constant(mu), Expr::zero())
            .unwrap()
            .labeled("K_G");
        let red = reduce_by(&pde, &used, &zt).unwrap();
        let cls = classify_reduced(&orig, &used, &red, &[], &zt).unwrap();
        assert_eq!(cls.is_inherited("H"), kept, "mu = {mu}");
        assert!(cls.govinder_consistent());
    }
}

#[test]
fn bianchi_reduction_to_the_three_metric() {
    let zt = zt();
    let s = catalog::by_name("bianchi1_c1", &zt).unwrap();
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let kz = s.generator("K_z").unwrap().field.clone();
    let mu = Rational::new(2, 3).unwrap();
    let used = SymmetryVector::linear(kz, "u", Expr::constant(mu), Expr::zero()).unwrap();
    let red = reduce_by(&pde, &used, &zt).unwrap();
    let three = lieconf::geometry::Metric::diagonal(
        red.pde.chart(),
        vec![
            Expr::int(-1),
            Expr::coordinate("t").powi(2),
            Expr::coordinate("t").exp().powi(2),
        ],
        &zt,
    )
    .unwrap();
    let expect = PdeSpec::klein_gordon(&three, "w", Expr::constant(mu * mu)).unwrap();
    let sampler = red.pde.chart().sampler();
    for i in 0..3 {
        for j in 0..3 {
            assert!(zt
                .is_zero(&(&red.pde.a()[i][j] - &expect.a()[i][j]), sampler)
                .unwrap());
        }
        assert!(zt
            .is_zero(&(&red.pde.b()[i] - &expect.b()[i]), sampler)
            .unwrap());
    }
    assert!(zt.is_zero(&(red.pde.f() - expect.f()), sampler).unwrap());
    let w = test_function(red.pde.chart().coords());
    assert!(red.round_trip(&w, &zt).unwrap().holds);
}
