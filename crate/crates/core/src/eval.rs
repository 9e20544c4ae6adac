//! Floating-point evaluation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Expr, Func, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain {
        subexpr: String,
        reason: &'static str,
    },
}

/// Bindings from symbol names to values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    bindings: BTreeMap<String, f64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.bindings.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: AsRef<str>> FromIterator<(S, f64)> for Point {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Point {
            bindings: iter
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_string(), v))
                .collect(),
        }
    }
}

pub fn eval_num(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    eval_scaled(e, p).map(|(v, _)| v)
}

fn domain(e: &Expr, reason: &'static str) -> EvalError {
    EvalError::Domain {
        subexpr: e.to_string(),
        reason,
    }
}

/// Value together with a first-order bound on its accumulated rounding
/// scale. Sums add the scales of their terms, so a cancelling sum keeps
/// the magnitude of what cancelled.
pub fn eval_scaled(e: &Expr, p: &Point) -> Result<(f64, f64), EvalError> {
    let (v, s) = match e.node() {
        Node::Const(r) => {
            let v = r.to_f64();
            (v, v.abs())
        }
        Node::Sym(s) => {
            let v = p
                .get(s.name())
                .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?;
            (v, v.abs())
        }
        Node::Sum(ch) => {
            let mut v = 0.0;
            let mut s = 0.0;
            for c in ch {
                let (cv, cs) = eval_scaled(c, p)?;
                v += cv;
                s += cs;
            }
            (v, s)
        }
        Node::Product(ch) => {
            let mut v = 1.0;
            let mut s = 1.0;
            for c in ch {
                let (cv, cs) = eval_scaled(c, p)?;
                v *= cv;
                s *= cs;
            }
            (v, s)
        }
        Node::Pow(b, x) => {
            let (bv, bs) = eval_scaled(b, p)?;
            match x.as_const() {
                Some(r) => {
                    let v = if r.is_integer() {
                        if bv == 0.0 && r.is_negative() {
                            return Err(domain(e, "division by zero"));
                        }
                        powi(bv, r.numer())
                    } else if bv < 0.0 {
                        if r.denom() % 2 == 0 {
                            return Err(domain(e, "even root of a negative number"));
                        }
                        let m = (-bv).powf(r.to_f64());
                        if r.numer() % 2 == 0 {
                            m
                        } else {
                            -m
                        }
                    } else {
                        if bv == 0.0 && r.is_negative() {
                            return Err(domain(e, "division by zero"));
                        }
                        bv.powf(r.to_f64())
                    };
                    let dv = if bv == 0.0 { 0.0 } else { r.to_f64() * v / bv };
                    (v, v.abs() + dv.abs() * bs)
                }
                None => {
                    let (xv, xs) = eval_scaled(x, p)?;
                    if bv <= 0.0 {
                        return Err(domain(e, "non-positive base with symbolic exponent"));
                    }
                    let lb = bv.ln();
                    let v = (xv * lb).exp();
                    (v, v.abs() * (1.0 + lb.abs() * xs + (xv / bv).abs() * bs))
                }
            }
        }
        Node::Apply(f, a) => {
            let (av, as_) = eval_scaled(a, p)?;
            let (v, dv) = match f {
                Func::Sin => (av.sin(), av.cos()),
                Func::Cos => (av.cos(), -av.sin()),
                Func::Tan => (av.tan(), 1.0 / av.cos().powi(2)),
                Func::Sinh => (av.sinh(), av.cosh()),
                Func::Cosh => (av.cosh(), av.sinh()),
                Func::Tanh => (av.tanh(), 1.0 / av.cosh().powi(2)),
                Func::Exp => (av.exp(), av.exp()),
                Func::Ln => {
                    if av <= 0.0 {
                        return Err(domain(e, "logarithm of a non-positive number"));
                    }
                    (av.ln(), 1.0 / av)
                }
                Func::Sqrt => {
                    if av < 0.0 {
                        return Err(domain(e, "square root of a negative number"));
                    }
                    (av.sqrt(), if av > 0.0 { 0.5 / av.sqrt() } else { 0.0 })
                }
            };
            (v, v.abs() + dv.abs() * as_)
        }
    };
    if !v.is_finite() {
        return Err(domain(e, "non-finite value"));
    }
    Ok((v, s))
}

fn powi(b: f64, n: i64) -> f64 {
    match i32::try_from(n) {
        Ok(n) => b.powi(n),
        Err(_) => b.powf(n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn pythagorean_identity() {
        let e = parse("sin(x)^2 + cos(x)^2", &["x"]).unwrap();
        let v = eval_num(&e, &Point::new().with("x", 0.7)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + ln(x)", &["x"]).unwrap();
        match eval_num(&e, &Point::new().with("x", -1.0)) {
            Err(EvalError::Domain { subexpr, .. }) => assert_eq!(subexpr, "ln(x)"),
            other => panic!("expected domain error, got {other:?}"),
        }
        let e = parse("1/x", &["x"]).unwrap();
        assert!(matches!(
            eval_num(&e, &Point::new().with("x", 0.0)),
            Err(EvalError::Domain { .. })
        ));
        let e = parse("sqrt(x)", &["x"]).unwrap();
        assert!(eval_num(&e, &Point::new().with("x", -2.0)).is_err());
    }

    #[test]
    fn unbound_symbol() {
        let e = parse("x + y", &["x"]).unwrap();
        assert_eq!(
            eval_num(&e, &Point::new().with("x", 1.0)),
            Err(EvalError::Unbound("y".into()))
        );
    }

    #[test]
    fn odd_roots_of_negatives() {
        let e = parse("x^(1/3)", &["x"]).unwrap();
        let v = eval_num(&e, &Point::new().with("x", -8.0)).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn symbolic_exponent() {
        let e = parse("r^mu", &["r"]).unwrap();
        let v = eval_num(&e, &Point::new().with("r", 2.0).with("mu", 0.5)).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scale_tracks_cancellation() {
        let e = parse("x^2 - x^2 + y", &["x", "y"]).unwrap();
        let (_, s) = eval_scaled(&e, &Point::new().with("x", 1.0).with("y", 0.0)).unwrap();
        assert_eq!(s, 0.0);
        let e = parse("cosh(t)^2 - sinh(t)^2", &["t"]).unwrap();
        let (v, s) = eval_scaled(&e, &Point::new().with("t", 3.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(s > 100.0);
    }
}
