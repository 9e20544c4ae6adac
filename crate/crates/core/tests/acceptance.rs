//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Tolerances: zero tests at 1e-9 relative with 20 sample points and root
//! seed 42 unless a criterion says otherwise; finite differences at
//! h = 1e-5 with relative error ≤ 1e-6.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use common::*;
use lieconf::catalog::{self, minkowski, minkowski_with_coords, sp_ckv_flat, SPACE_NAMES};
use lieconf::conformal::{classify, closure_check, ConformalClass};
use lieconf::geometry::{constant_value, Chart, Metric, VectorField};
use lieconf::reduction::{classify_reduced, reduce_by, sp_ckv_reduce};
use lieconf::symmetry::{
    generate, generate_klein_gordon, linear_conditions_check, verify_symmetry, PdeSpec,
    SymmetryVector,
};
use lieconf::{diff, expand, Expr, Rational, ZeroTest};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

/// 1. Conformal inventory of M⁴.
fn inventory() -> Outcome {
    let zt = zt();
    let s = minkowski(4, &zt).map_err(|e| e.to_string())?;
    ensure(s.generators.len() == (4 + 1) * (4 + 2) / 2, || {
        format!("{} generators", s.generators.len())
    })?;
    let mut counts = [0usize; 3];
    for g in &s.generators {
        let c = classify(&s.metric, &g.field, &zt).map_err(|e| e.to_string())?;
        match c.class {
            ConformalClass::Killing => counts[0] += 1,
            ConformalClass::Homothetic => {
                counts[1] += 1;
                ensure(c.psi.is_one(), || format!("psi(H) = {}", c.psi))?;
            }
            ConformalClass::SpecialCKV => counts[2] += 1,
            other => return Err(format!("{} classified as {other}", g.name)),
        }
        let want_gradient = g.name.starts_with("K_G") || g.name == "H";
        if g.name.starts_with("K_G") || g.name == "H" || g.name.starts_with("X_R") {
            ensure(c.is_gradient == want_gradient, || {
                format!("{}: gradient = {}", g.name, c.is_gradient)
            })?;
        }
    }
    ensure(counts == [10, 1, 4], || format!("counts {counts:?}"))?;
    Ok("10 Killing, 1 Homothetic (psi = 1), 4 SpecialCKV; translations and H gradient".into())
}

/// The wave equation −u_tt + Σ u_aa = 0 in t, z, y1, … written directly.
fn wave(n: usize) -> (Chart, PdeSpec) {
    let mut names = vec!["t".to_string(), "z".to_string()];
    names.extend((1..n - 1).map(|a| format!("y{a}")));
    let chart = Chart::new(&names).unwrap();
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, i) {
                    (false, _) => Expr::zero(),
                    (true, 0) => Expr::int(-1),
                    _ => Expr::one(),
                })
                .collect()
        })
        .collect();
    let pde = PdeSpec::generic(&chart, "u", a, vec![Expr::zero(); n], Expr::zero(), &zt()).unwrap();
    (chart, pde)
}

/// The listed symmetries of the n-dimensional wave equation, written from
/// their component formulas.
fn listed_wave_symmetries(chart: &Chart, n: usize) -> Vec<(String, SymmetryVector)> {
    let x: Vec<Expr> = (0..n).map(|i| chart.coord(i)).collect();
    let names = chart.coords();
    let u = Expr::dependent("u");
    let w = Expr::rational(2 - n as i64, 2);
    let unit = |i: usize| {
        let mut c = vec![Expr::zero(); n];
        c[i] = Expr::one();
        c
    };
    let mk = |comps: Vec<Expr>, eta: Expr| {
        SymmetryVector::new(VectorField::new(chart, comps).unwrap(), "u", eta).unwrap()
    };
    let mut out = vec![("X_u".to_string(), mk(vec![Expr::zero(); n], u.clone()))];
    for i in 0..n {
        out.push((format!("K_G^{}", names[i]), mk(unit(i), Expr::zero())));
    }
    for a in 1..n {
        let mut c = vec![Expr::zero(); n];
        c[0] = x[a].clone();
        c[a] = x[0].clone();
        out.push((format!("X_R^t{}", names[a]), mk(c, Expr::zero())));
        for b in a + 1..n {
            let mut c = vec![Expr::zero(); n];
            c[a] = x[b].clone();
            c[b] = -x[a].clone();
            out.push((format!("X_R^{}{}", names[a], names[b]), mk(c, Expr::zero())));
        }
    }
    out.push(("H".into(), mk(x.clone(), &w * &u)));
    let sq: Vec<Expr> = x.iter().map(|e| e.powi(2)).collect();
    let space_sq = Expr::sum(sq[1..].iter().cloned());
    let mut c = vec![Expr::rational(1, 2) * (&sq[0] + &space_sq)];
    c.extend((1..n).map(|a| &x[0] * &x[a]));
    out.push(("X_C^t - tX_u".into(), mk(c, &w * &x[0] * &u)));
    for a in 1..n {
        let mut c: Vec<Expr> = (0..n).map(|b| &x[a] * &x[b]).collect();
        c[a] = Expr::rational(1, 2) * (&sq[0] + Expr::int(2) * &sq[a] - &space_sq);
        out.push((
            format!("X_C^{0} - {0}X_u", names[a]),
            mk(c, &w * &x[a] * &u),
        ));
    }
    out
}

/// 2. Wave-equation symmetries for n = 4, 5.
fn wave_symmetries() -> Outcome {
    let zt = zt();
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for n in [4, 5] {
        let (chart, pde) = wave(n);
        let syms = listed_wave_symmetries(&chart, n);
        ensure(syms.len() == 1 + (n + 1) * (n + 2) / 2, || {
            format!("{} listed", syms.len())
        })?;
        for (name, x) in &syms {
            let v = verify_symmetry(&pde, x, &zt).map_err(|e| e.to_string())?;
            worst = worst.max(v.max_residual);
            ensure(v.holds && v.max_residual < 1e-9, || {
                format!("n = {n}: {name} residual {:e}", v.max_residual)
            })?;
            total += 1;
            let bumped = SymmetryVector::new(
                x.xi().clone(),
                "u",
                x.eta() + Expr::rational(1, 1000) * chart.coord(0) * Expr::dependent("u"),
            )
            .unwrap();
            let v = verify_symmetry(&pde, &bumped, &zt).map_err(|e| e.to_string())?;
            ensure(!v.holds, || format!("n = {n}: perturbed {name} passes"))?;
        }
    }
    Ok(format!(
        "{total} listed symmetries verify (max residual {worst:.1e}), all perturbed η fail"
    ))
}

/// 3. Commutator table of M⁴.
fn commutators() -> Outcome {
    let zt = zt();
    let s = minkowski(4, &zt).map_err(|e| e.to_string())?;
    let names: Vec<&str> = s.generators.iter().map(|g| g.name.as_str()).collect();
    let sc = closure_check(&s.metric, &s.fields(), &zt).map_err(|e| e.to_string())?;
    let idx = |n: &str| names.iter().position(|m| *m == n).unwrap();
    let only = |a: &str, b: &str, k: &str, c: Rational| -> Result<(), String> {
        let br = sc.bracket(idx(a), idx(b));
        for (j, v) in br.iter().enumerate() {
            let want = if j == idx(k) { c } else { Rational::ZERO };
            ensure(*v == want, || {
                format!("[{a}, {b}] has {v} {} (expected {want})", names[j])
            })?;
        }
        Ok(())
    };
    let labels = ["1", "z", "y1", "y2"];
    let rot = |i: usize, j: usize| format!("X_R^{}{}", labels[i.min(j)], labels[i.max(j)]);
    let mut checked = 0;
    for i in 0..4 {
        let kg = format!("K_G^{}", labels[i]);
        let xc = format!("X_C^{}", labels[i]);
        only(&kg, "H", &kg, Rational::ONE)?;
        only("H", &xc, &xc, Rational::ONE)?;
        checked += 2;
        for j in 0..4 {
            if i == j {
                continue;
            }
            // X_R^{JI} = −X_R^{IJ} for spatial rotations, boosts are symmetric
            let sign = if i < j || i.min(j) == 0 {
                Rational::ONE
            } else {
                Rational::MINUS_ONE
            };
            only(&kg, &format!("X_C^{}", labels[j]), &rot(i, j), sign)?;
            only(&rot(i, j), &xc, &format!("X_C^{}", labels[j]), sign)?;
            checked += 2;
        }
    }
    Ok(format!(
        "{checked} listed brackets exact (certification residual {:.1e})",
        sc.max_residual
    ))
}

/// 4. Klein–Gordon admissibility on the hyperbolic 2-sphere.
fn hyperbolic_sphere() -> Outcome {
    let zt = zt();
    let s = catalog::hyperbolic_sphere(2, &zt).map_err(|e| e.to_string())?;
    let g = &s.metric;
    let rh = g
        .constant_ricci_scalar(&zt)
        .map_err(|e| e.to_string())?
        .ok_or("Ricci scalar is not constant")?;
    let n = g.dim() as i64;
    let target = Rational::new(n - 2, 4 * (n - 1)).unwrap() * rh;
    let proper: Vec<_> = s
        .generators
        .iter()
        .filter(|x| x.class == ConformalClass::ProperCKV)
        .collect();
    ensure(proper.len() == 3, || {
        format!("{} proper CKVs", proper.len())
    })?;
    let admits = |mu2: Rational| -> Result<bool, String> {
        let mut all = true;
        for p in &proper {
            let c = classify(g, &p.field, &zt).map_err(|e| e.to_string())?;
            let gen = generate_klein_gordon(
                g,
                "w",
                &Expr::constant(mu2),
                &c,
                Rational::ZERO,
                &Expr::zero(),
                &zt,
            )
            .map_err(|e| e.to_string())?;
            all &= gen.admissible;
        }
        Ok(all)
    };
    ensure(admits(target)?, || {
        format!("mu^2 = {target} not admissible")
    })?;
    let others = [r(1, 2), r(1, 1), r(3, 2), r(2, 1), r(-3, 4)];
    for mu in others {
        ensure(!admits(mu * mu)?, || format!("mu = {mu} admissible"))?;
    }
    Ok(format!(
        "R_h = {rh}; proper CKVs admissible exactly at mu^2 = {target}, not for mu in {{1/2, 1, 3/2, 2, -3/4}}"
    ))
}

fn kg_matches(red: &PdeSpec, metric: &Metric, v: Expr, zt: &ZeroTest) -> Result<(), String> {
    let want = PdeSpec::klein_gordon(metric, red.dependent(), v).map_err(|e| e.to_string())?;
    let n = metric.dim();
    for i in 0..n {
        for j in 0..n {
            ensure(expand(&red.a()[i][j]) == expand(&want.a()[i][j]), || {
                format!("A({i},{j}) = {}", red.a()[i][j])
            })?;
        }
        let d = &red.b()[i] - &want.b()[i];
        ensure(zt.is_zero(&d, metric.chart().sampler()).unwrap(), || {
            format!("B({i}) = {}", red.b()[i])
        })?;
    }
    ensure(expand(red.f()) == expand(want.f()), || {
        format!("f = {}", red.f())
    })
}

/// 5. Reduction golden tests.
fn golden_reductions() -> Outcome {
    let zt = zt();
    let e = |x: lieconf::reduction::ReductionError| x.to_string();
    let mu = r(2, 3);
    let mu_u = |x: &VectorField| {
        SymmetryVector::linear(x.clone(), "u", Expr::constant(mu), Expr::zero()).unwrap()
    };

    // (a) dr² + h, h the Minkowski plane
    let s = catalog::by_name("decomposable0", &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = reduce_by(&pde, &mu_u(&s.generator("K_r").unwrap().field), &zt).map_err(e)?;
    let h = minkowski_with_coords(&["t", "x"], &zt).map_err(|e| e.to_string())?;
    kg_matches(&red.pde, &h.metric, Expr::constant(mu * mu), &zt)
        .map_err(|m| format!("(a) {m}"))?;
    let w = test_function(red.pde.chart().coords());
    ensure(red.round_trip(&w, &zt).map_err(e)?.holds, || {
        "(a) round trip".into()
    })?;

    // (b) M⁴ wave by K_G^z + μX_u
    let s = minkowski(4, &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = reduce_by(&pde, &mu_u(&s.generator("K_G^z").unwrap().field), &zt).map_err(e)?;
    let m3 = minkowski_with_coords(&["t", "y1", "y2"], &zt).map_err(|e| e.to_string())?;
    kg_matches(&red.pde, &m3.metric, Expr::constant(mu * mu), &zt)
        .map_err(|m| format!("(b) {m}"))?;
    let w = test_function(red.pde.chart().coords());
    ensure(red.round_trip(&w, &zt).map_err(e)?.holds, || {
        "(b) round trip".into()
    })?;

    // (c) m = 2 special conformal reduction
    let s = sp_ckv_flat(2, &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = sp_ckv_reduce(&pde, 2, &zt).map_err(e)?;
    let x = Expr::coordinate("x");
    let wdep = Expr::dependent("w");
    ensure(
        red.pde.a()[0][0] == x.powi(2)
            && red.pde.a()[0][1].is_zero()
            && red.pde.a()[1][0].is_zero()
            && red.pde.a()[1][1].is_one()
            && red.pde.b().iter().all(|b| b.is_zero())
            && *red.pde.f() == Expr::rational(-1, 4) * &wdep,
        || format!("(c) {}", red.pde.residual_expr()),
    )?;
    let w = test_function(red.pde.chart().coords());
    ensure(red.round_trip(&w, &zt).map_err(e)?.holds, || {
        "(c) round trip".into()
    })?;

    // (d) Bianchi I with C = 1 by ∂_z + μu∂_u
    let s = catalog::by_name("bianchi1_c1", &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let red = reduce_by(&pde, &mu_u(&s.generator("K_z").unwrap().field), &zt).map_err(e)?;
    let t = Expr::coordinate("t");
    let ap11 = Metric::diagonal(
        red.pde.chart(),
        vec![Expr::int(-1), t.powi(2), t.exp().powi(2)],
        &zt,
    )
    .map_err(|e| e.to_string())?;
    kg_matches(&red.pde, &ap11, Expr::constant(mu * mu), &zt).map_err(|m| format!("(d) {m}"))?;
    let w = test_function(red.pde.chart().coords());
    ensure(red.round_trip(&w, &zt).map_err(e)?.holds, || {
        "(d) round trip".into()
    })?;

    Ok(format!(
        "(a) K=0 warped, (b) M4 wave, (c) x^2 w_xx + w_yy + 1/4 w = 0, (d) Bianchi I at mu = {mu}; structural match and round trip"
    ))
}

fn cli_reduce(mu: &str) -> Result<(i32, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lieconf"))
        .args([
            "reduce",
            "--space",
            "minkowski4",
            "--pde",
            "laplace",
            "--by",
            "K_G^z",
            "--mu",
            mu,
            "--output",
            "json",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), v["reduction"].clone()))
}

fn names(v: &Value) -> Vec<String> {
    v.as_array()
        .map(|a| {
            a.iter()
                .map(|c| c["name"].as_str().unwrap_or("").to_string())
                .collect()
        })
        .unwrap_or_default()
}

/// 6. Type II hidden symmetries, checked through the command line.
fn type_ii() -> Outcome {
    let sp = ["reduced:X_C^1", "reduced:X_C^y1", "reduced:X_C^y2"];
    let (code, red) = cli_reduce("0")?;
    ensure(code == 0, || format!("exit {code} at mu = 0"))?;
    let hidden = names(&red["type_ii"]);
    ensure(hidden == sp, || format!("type II at mu = 0: {hidden:?}"))?;
    let inherited = names(&red["inherited"]);
    ensure(
        sp.iter().all(|s| !inherited.contains(&s.to_string())),
        || format!("inherited: {inherited:?}"),
    )?;
    let (code, red) = cli_reduce("1/3")?;
    ensure(code == 0, || format!("exit {code} at mu = 1/3"))?;
    ensure(names(&red["type_ii"]).is_empty(), || {
        "type II at mu = 1/3".into()
    })?;
    let rejected = names(&red["rejected"]);
    ensure(sp.iter().all(|s| rejected.contains(&s.to_string())), || {
        format!("rejected at mu = 1/3: {rejected:?}")
    })?;
    // n = 5 through the library: four special conformal candidates
    let zt = zt();
    let s = minkowski(5, &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let used = SymmetryVector::linear(
        s.generator("K_G^z").unwrap().field.clone(),
        "u",
        Expr::zero(),
        Expr::zero(),
    )
    .unwrap();
    let red = reduce_by(&pde, &used, &zt).map_err(|e| e.to_string())?;
    let m4 = minkowski_with_coords(red.pde.chart().coords(), &zt).map_err(|e| e.to_string())?;
    let extras: Vec<(String, VectorField)> = m4
        .generators
        .iter()
        .filter(|g| g.name.starts_with("X_C"))
        .map(|g| (g.name.clone(), g.field.clone()))
        .collect();
    let orig = theorem_symmetries(&s, &pde);
    let cls = classify_reduced(&orig, &used, &red, &extras, &zt).map_err(|e| e.to_string())?;
    ensure(cls.type_ii.len() == 4, || {
        format!("n = 5: {} type II", cls.type_ii.len())
    })?;
    Ok("n = 4: 3 type II at mu = 0 (exit 0), all rejected at mu = 1/3; n = 5: 4 type II".into())
}

/// 7. Commutator prediction on −dz² + dR² + R²f.
fn govinder() -> Outcome {
    let zt = zt();
    let s = catalog::by_name("les3", &zt).map_err(|e| e.to_string())?;
    let pde = PdeSpec::laplace(&s.metric, "u").unwrap();
    let n = s.metric.dim() as i64;
    let mu_h = r(1, 5);
    let h = s.generator("H").unwrap().field.clone();
    let x2 = SymmetryVector::linear(
        h,
        "u",
        Expr::constant(Rational::new(2 - n, 2).unwrap() + mu_h),
        Expr::zero(),
    )
    .unwrap()
    .labeled("X^2");
    let v = verify_symmetry(&pde, &x2, &zt).map_err(|e| e.to_string())?;
    ensure(v.holds, || "X^2 is not a symmetry".into())?;
    let kg = s.generator("K_G").unwrap().field.clone();
    for (mu_g, kept) in [
        (r(0, 1), true),
        (r(1, 2), false),
        (r(-1, 1), false),
        (r(2, 1), false),
    ] {
        let x1 = SymmetryVector::linear(kg.clone(), "u", Expr::constant(mu_g), Expr::zero())
            .unwrap()
            .labeled("X^1");
        let red = reduce_by(&pde, &x1, &zt).map_err(|e| e.to_string())?;
        let cls =
            classify_reduced(&[x2.clone()], &x1, &red, &[], &zt).map_err(|e| e.to_string())?;
        ensure(cls.is_inherited("X^2") == kept, || {
            format!("mu_G = {mu_g}: X^2 inherited = {}", cls.is_inherited("X^2"))
        })?;
        let predicted = cls.govinder.iter().any(|g| g.label == "X^2");
        ensure(predicted == kept && cls.govinder_consistent(), || {
            format!("mu_G = {mu_g}: prediction {predicted}")
        })?;
    }
    Ok("X^2 survives reduction by X^1 iff mu_G = 0 (tested mu_G = 0, 1/2, -1, 2)".into())
}

/// 8. Property suites.
fn properties() -> Outcome {
    let zt = zt();
    let mut runner = TestRunner::deterministic();
    let strategy = tree();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for k in 0..200 {
        let e = strategy.new_tree(&mut runner).unwrap().current();
        let d = diff(&e, "x");
        let (x, y) = (
            0.5 + (k % 10) as f64 * 0.1,
            0.55 + (k / 10 % 10) as f64 * 0.1,
        );
        if let Some(err) = fd_error(&e, &d, x, y) {
            evaluated += 1;
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("{e}: relative error {err:e}"))?;
        }
    }
    ensure(evaluated >= 190, || {
        format!("only {evaluated} trees evaluated")
    })?;

    for name in SPACE_NAMES {
        let s = catalog::by_name(name, &zt).map_err(|e| e.to_string())?;
        let g = &s.metric;
        let sampler = g.chart().sampler();
        for m in g.metric_covariant_derivative() {
            for e in m.iter().flatten() {
                ensure(zt.is_zero(e, sampler).unwrap(), || {
                    format!("{name}: ∇g ≠ 0")
                })?;
            }
        }
        let u = test_function(g.chart().coords());
        let d = g.laplacian(&u) - g.laplacian_christoffel(&u);
        ensure(zt.is_zero(&d, sampler).unwrap(), || {
            format!("{name}: Laplacian forms")
        })?;
        for c in s.validate(&zt).map_err(|e| e.to_string())? {
            ensure(c.ok(), || {
                format!("{name}: {} is {}", c.name, c.classified.class)
            })?;
        }
    }

    let mut agree = 0;
    for (pde, x) in randomized_pairs(10) {
        let v = verify_symmetry(&pde, &x, &zt).map_err(|e| e.to_string())?;
        let lin = linear_conditions_check(&pde, &x, None, &zt).map_err(|e| e.to_string())?;
        ensure(v.holds == lin.iter().all(|c| c.holds), || {
            format!("disagreement on {x}")
        })?;
        agree += 1;
    }
    Ok(format!(
        "{evaluated}/200 trees within 1e-6 (worst {worst:.1e}); {} spaces compatible and self-validating; {agree}/10 pairs agree",
        SPACE_NAMES.len()
    ))
}

/// 9. Bianchi I special cases.
fn bianchi_special() -> Outcome {
    let zt = zt();
    let t = Expr::coordinate("t");

    // A = B adds the rotation y∂_x − x∂_y
    let equal = catalog::bianchi_slice(&t, &t, &zt).map_err(|e| e.to_string())?;
    let rot = equal.generator("X_I3").ok_or("no rotation for A = B")?;
    let c = classify(&equal.metric, &rot.field, &zt).map_err(|e| e.to_string())?;
    ensure(c.class == ConformalClass::Killing, || {
        format!("rotation is {}", c.class)
    })?;
    let unequal = catalog::bianchi_slice(&t, &t.exp(), &zt).map_err(|e| e.to_string())?;
    let c = classify(
        &unequal.metric,
        &rot.field.on_chart(unequal.chart()).unwrap(),
        &zt,
    )
    .map_err(|e| e.to_string())?;
    ensure(c.class == ConformalClass::NotCKV, || {
        format!("A ≠ B rotation is {}", c.class)
    })?;

    // (sin²t, cos²t): constant curvature and six KVs for generic μ
    let ads = catalog::bianchi_slice(&t.sin(), &t.cos(), &zt).map_err(|e| e.to_string())?;
    let g = &ads.metric;
    let rs = g
        .constant_ricci_scalar(&zt)
        .map_err(|e| e.to_string())?
        .ok_or("Ricci scalar is not constant")?;
    let admissible = |mu2: Rational, zt: &ZeroTest| -> Result<(usize, usize), String> {
        let pde = PdeSpec::klein_gordon(g, "w", Expr::constant(mu2)).unwrap();
        let (mut kv, mut ckv) = (0, 0);
        for gen in &ads.generators {
            let c = classify(g, &gen.field, zt).map_err(|e| e.to_string())?;
            let res =
                generate(&pde, &c, Rational::ZERO, &Expr::zero(), zt).map_err(|e| e.to_string())?;
            if res.admissible {
                let v = verify_symmetry(&pde, &res.symmetry, zt).map_err(|e| e.to_string())?;
                ensure(v.holds, || {
                    format!("{} admissible but fails prolongation", gen.name)
                })?;
                match c.class {
                    ConformalClass::Killing => kv += 1,
                    _ => ckv += 1,
                }
            }
        }
        Ok((kv, ckv))
    };
    for mu in [r(1, 3), r(1, 1), r(2, 1)] {
        let counts = admissible(mu * mu, &zt)?;
        ensure(counts == (6, 0), || format!("mu = {mu}: {counts:?}"))?;
    }

    // the conformal value of μ² from ξV_k + 2ψV + ((2−n)/2)Δψ = 0 with V = μ²
    let n = g.dim() as i64;
    let mut values = Vec::new();
    for seed in [1u64, 42, 2024, 77, 9000] {
        let zs = zt.with_seed(seed);
        let mut found = None;
        for gen in ads
            .generators
            .iter()
            .filter(|x| x.class != ConformalClass::Killing)
        {
            let c = classify(g, &gen.field, &zs).map_err(|e| e.to_string())?;
            let mu2 = Expr::rational(n - 2, 4) * g.laplacian(&c.psi) / &c.psi;
            let v = constant_value(&mu2, g.chart(), &zs)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("{}: mu^2 not constant", gen.name))?;
            ensure(found.map_or(true, |f| f == v), || {
                format!("{}: mu^2 = {v}", gen.name)
            })?;
            found = Some(v);
        }
        values.push(found.ok_or("no proper CKVs")?);
    }
    ensure(values.iter().all(|v| *v == values[0]), || {
        format!("unstable: {values:?}")
    })?;
    let mu2 = values[0];
    let counts = admissible(mu2, &zt)?;
    ensure(counts == (6, 4), || format!("at mu^2 = {mu2}: {counts:?}"))?;
    Ok(format!(
        "A = B rotation KV; (sin^2 t, cos^2 t): R = {rs}, 6 KVs for generic mu; conformal mu^2 = {mu2} (= -R/8) stable over 5 seeds, 10 symmetries"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("conformal inventory of M4", inventory),
        ("wave equation symmetries, n = 4, 5", wave_symmetries),
        ("commutator table of M4", commutators),
        (
            "Klein-Gordon constraint on the hyperbolic 2-sphere",
            hyperbolic_sphere,
        ),
        ("reduction golden tests", golden_reductions),
        ("type II hidden symmetries", type_ii),
        ("commutator criterion for inherited symmetries", govinder),
        ("property suites", properties),
        ("Bianchi I special cases", bianchi_special),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
