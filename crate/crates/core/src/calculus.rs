//! Differentiation, substitution and polynomial expansion.

use std::collections::{BTreeMap, HashMap};

use crate::expr::{Expr, Func, Node};

/// Partial derivative with respect to the symbol `var`.
pub fn diff(e: &Expr, var: &str) -> Expr {
    let mut memo = HashMap::new();
    diff_memo(e, var, &mut memo)
}

fn diff_memo(e: &Expr, var: &str, memo: &mut HashMap<Expr, Expr>) -> Expr {
    if !e.contains(var) {
        return Expr::zero();
    }
    if let Some(d) = memo.get(e) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Sym(s) => {
            if s.name() == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(ch) => Expr::sum(ch.iter().map(|c| diff_memo(c, var, memo))),
        Node::Product(ch) => {
            let mut terms = Vec::new();
            for (i, c) in ch.iter().enumerate() {
                let dc = diff_memo(c, var, memo);
                if dc.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = ch
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, f)| f.clone())
                    .collect();
                factors.push(dc);
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, p) => {
            let db = diff_memo(b, var, memo);
            if !p.contains(var) {
                p * Expr::pow(b.clone(), p - 1) * db
            } else {
                let dp = diff_memo(p, var, memo);
                e * (dp * b.ln() + p * db / b)
            }
        }
        Node::Apply(f, a) => {
            let da = diff_memo(a, var, memo);
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => -a.sin(),
                Func::Tan => a.cos().powi(-2),
                Func::Sinh => a.cosh(),
                Func::Cosh => a.sinh(),
                Func::Tanh => a.cosh().powi(-2),
                Func::Exp => e.clone(),
                Func::Ln => a.recip(),
                Func::Sqrt => Expr::rational(1, 2) / e,
            };
            outer * da
        }
    };
    memo.insert(e.clone(), d.clone());
    d
}

/// Simultaneous substitution of symbols by expressions.
pub fn substitute(e: &Expr, bindings: &BTreeMap<String, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let mask = bindings.keys().fold(0u64, |m, k| m | Expr::name_mask(k));
    let mut memo = HashMap::new();
    subst_memo(e, bindings, mask, &mut memo)
}

/// Substitute a single symbol.
pub fn substitute_one(e: &Expr, name: &str, value: &Expr) -> Expr {
    let mut b = BTreeMap::new();
    b.insert(name.to_string(), value.clone());
    substitute(e, &b)
}

fn subst_memo(
    e: &Expr,
    b: &BTreeMap<String, Expr>,
    mask: u64,
    memo: &mut HashMap<Expr, Expr>,
) -> Expr {
    if e.mask() & mask == 0 {
        return e.clone();
    }
    if let Some(r) = memo.get(e) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Const(_) => e.clone(),
        Node::Sym(s) => b.get(s.name()).cloned().unwrap_or_else(|| e.clone()),
        Node::Sum(ch) => Expr::sum(ch.iter().map(|c| subst_memo(c, b, mask, memo))),
        Node::Product(ch) => Expr::product(ch.iter().map(|c| subst_memo(c, b, mask, memo))),
        Node::Pow(x, p) => Expr::pow(subst_memo(x, b, mask, memo), subst_memo(p, b, mask, memo)),
        Node::Apply(f, a) => Expr::apply(*f, subst_memo(a, b, mask, memo)),
    };
    memo.insert(e.clone(), r.clone());
    r
}

const MAX_EXPAND_POWER: i64 = 12;

/// Distribute products over sums and multiply out small positive integer
/// powers of sums. Two expressions that are equal as rational functions of
/// their atoms with polynomial numerators usually expand to the same tree.
pub fn expand(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    expand_memo(e, &mut memo)
}

fn expand_memo(e: &Expr, memo: &mut HashMap<Expr, Expr>) -> Expr {
    if let Some(r) = memo.get(e) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Const(_) | Node::Sym(_) => e.clone(),
        Node::Sum(ch) => Expr::sum(ch.iter().map(|c| expand_memo(c, memo))),
        Node::Product(ch) => {
            let factors: Vec<Expr> = ch.iter().map(|c| expand_memo(c, memo)).collect();
            distribute(&factors)
        }
        Node::Pow(b, p) => {
            let b = expand_memo(b, memo);
            let p = expand_memo(p, memo);
            match (b.node(), p.as_const()) {
                (Node::Sum(_), Some(r))
                    if r.is_integer() && r.numer() > 1 && r.numer() <= MAX_EXPAND_POWER =>
                {
                    let factors = vec![b.clone(); r.numer() as usize];
                    distribute(&factors)
                }
                _ => {
                    let q = Expr::pow(b, p);
                    if matches!(q.node(), Node::Product(_)) {
                        expand_memo(&q, memo)
                    } else {
                        q
                    }
                }
            }
        }
        Node::Apply(f, a) => Expr::apply(*f, expand_memo(a, memo)),
    };
    memo.insert(e.clone(), r.clone());
    r
}

fn distribute(factors: &[Expr]) -> Expr {
    let mut acc: Vec<Expr> = vec![Expr::one()];
    for f in factors {
        let terms = f.terms();
        if terms.len() == 1 {
            acc = acc.into_iter().map(|a| a * &terms[0]).collect();
        } else {
            let mut next = Vec::with_capacity(acc.len() * terms.len());
            for a in &acc {
                for t in &terms {
                    next.push(a * t);
                }
            }
            acc = Expr::sum(next).terms();
        }
    }
    Expr::sum(acc)
}

/// Coefficients of `e` as a polynomial in the symbol `var` after expansion.
/// Returns `None` if `var` occurs non-polynomially.
pub fn polynomial_coefficients(e: &Expr, var: &str) -> Option<BTreeMap<i64, Expr>> {
    let mut out: BTreeMap<i64, Vec<Expr>> = BTreeMap::new();
    for t in expand(e).terms() {
        let factors = match t.node() {
            Node::Product(ch) => ch.clone(),
            _ => vec![t.clone()],
        };
        let mut degree = 0;
        let mut rest = Vec::new();
        for f in factors {
            if !f.contains(var) {
                rest.push(f);
                continue;
            }
            match f.node() {
                Node::Sym(_) => degree += 1,
                Node::Pow(b, p) if b.as_symbol() == Some(var) => {
                    let r = p
                        .as_const()
                        .filter(|r| r.is_integer() && !r.is_negative())?;
                    degree += r.numer();
                }
                _ => return None,
            }
        }
        out.entry(degree).or_default().push(Expr::product(rest));
    }
    Some(
        out.into_iter()
            .map(|(k, v)| (k, Expr::sum(v)))
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn p(s: &str) -> Expr {
        parse(s, &["x", "y", "r", "z", "R"]).unwrap()
    }

    #[test]
    fn basic_derivatives() {
        assert_eq!(diff(&p("x^2"), "x"), p("2*x"));
        assert_eq!(diff(&p("r^mu"), "r"), p("mu*r^(mu - 1)"));
        assert_eq!(diff(&p("sin(x)"), "x"), p("cos(x)"));
        assert_eq!(diff(&p("exp(2*x)"), "x"), p("2*exp(2*x)"));
        assert_eq!(diff(&p("ln(x)"), "x"), p("1/x"));
        assert!(diff(&p("y^3"), "x").is_zero());
    }

    #[test]
    fn substitution_is_simultaneous() {
        assert_eq!(substitute_one(&p("x + y"), "x", &p("y")), p("2*y"));
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), p("y"));
        b.insert("y".to_string(), p("x"));
        assert_eq!(substitute(&p("x - 2*y"), &b), p("y - 2*x"));
    }

    #[test]
    fn exponential_ansatz() {
        let u = Expr::dependent("u");
        let e = substitute_one(&u, "u", &p("exp(mu*z)*w"));
        let d2 = diff(&diff(&e, "z"), "z");
        assert_eq!(d2, p("mu^2*exp(mu*z)*w"));
    }

    #[test]
    fn expansion() {
        assert_eq!(expand(&p("(x + y)^2")), p("x^2 + 2*x*y + y^2"));
        assert_eq!(expand(&p("(x + 1)*(x - 1)")), p("x^2 - 1"));
        assert_eq!(expand(&p("x*(1/x + y)")), p("1 + x*y"));
        assert!(expand(&p("(x+y)^2 - x^2 - 2*x*y - y^2")).is_zero());
    }

    #[test]
    fn polynomial_coefficients_in_u() {
        let c = polynomial_coefficients(&p("(x + u)^2 + sin(x)"), "u").unwrap();
        assert_eq!(c[&0], p("x^2 + sin(x)"));
        assert_eq!(c[&1], p("2*x"));
        assert_eq!(c[&2], p("1"));
        assert!(polynomial_coefficients(&p("sin(u)"), "u").is_none());
    }
}
