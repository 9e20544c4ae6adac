//! Immutable symbolic expression trees in canonical form.
//!
//! Every constructor canonicalizes: sums and products are flattened,
//! rational constants folded, like terms (sums) and like bases (products)
//! collected, and children kept in a deterministic total order. No other
//! rewriting happens here; trigonometric identities are left to the
//! numeric zero test in [`crate::zero`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::rational::Rational;

/// Elementary functions understood by the parser and evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Role of a symbol. Informational only: identity is by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolKind {
    Coordinate,
    #[default]
    Parameter,
    Dependent,
}

#[derive(Debug, Clone)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl Symbol {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Symbol {}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

#[derive(Debug)]
pub enum Node {
    Const(Rational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, Expr),
    Apply(Func, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
    mask: u64,
}

/// A canonical expression. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn mix(h: u64, v: u64) -> u64 {
    (h ^ v).wrapping_mul(0x100_0000_01b3).rotate_left(23) ^ 0x9e37_79b9_7f4a_7c15
}

fn str_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

fn name_bit(name: &str) -> u64 {
    1u64 << (str_hash(name) % 64)
}

impl Expr {
    fn raw(node: Node) -> Expr {
        let (hash, mask) = match &node {
            Node::Const(r) => (mix(mix(1, r.numer() as u64), r.denom() as u64), 0),
            Node::Sym(s) => (mix(2, str_hash(&s.name)), name_bit(&s.name)),
            Node::Sum(ch) => ch
                .iter()
                .fold((3, 0), |(h, m), c| (mix(h, c.0.hash), m | c.0.mask)),
            Node::Product(ch) => ch
                .iter()
                .fold((4, 0), |(h, m), c| (mix(h, c.0.hash), m | c.0.mask)),
            Node::Pow(b, e) => (mix(mix(5, b.0.hash), e.0.hash), b.0.mask | e.0.mask),
            Node::Apply(f, a) => (mix(mix(6, *f as u64), a.0.hash), a.0.mask),
        };
        Expr(Arc::new(Inner { node, hash, mask }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(r: Rational) -> Expr {
        Expr::raw(Node::Const(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Rational::integer(n))
    }

    /// Panics on a zero denominator.
    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(Rational::new(num, den).expect("nonzero denominator"))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn symbol_of_kind(name: &str, kind: SymbolKind) -> Expr {
        Expr::raw(Node::Sym(Symbol {
            name: Arc::from(name),
            kind,
        }))
    }

    /// A parameter symbol (the default kind).
    pub fn symbol(name: &str) -> Expr {
        Expr::symbol_of_kind(name, SymbolKind::Parameter)
    }

    pub fn coordinate(name: &str) -> Expr {
        Expr::symbol_of_kind(name, SymbolKind::Coordinate)
    }

    pub fn dependent(name: &str) -> Expr {
        Expr::symbol_of_kind(name, SymbolKind::Dependent)
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.node() {
            Node::Const(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s.name()),
            _ => None,
        }
    }

    /// Structural zero (the canonical constant 0).
    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_one())
    }

    /// Deterministic structural hash (independent of process and build).
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn mask(&self) -> u64 {
        self.0.mask
    }

    pub(crate) fn name_mask(name: &str) -> u64 {
        name_bit(name)
    }

    /// True if `name` occurs anywhere in the tree.
    pub fn contains(&self, name: &str) -> bool {
        if self.0.mask & name_bit(name) == 0 {
            return false;
        }
        match self.node() {
            Node::Const(_) => false,
            Node::Sym(s) => s.name() == name,
            Node::Sum(ch) | Node::Product(ch) => ch.iter().any(|c| c.contains(name)),
            Node::Pow(b, e) => b.contains(name) || e.contains(name),
            Node::Apply(_, a) => a.contains(name),
        }
    }

    pub fn contains_any<S: AsRef<str>>(&self, names: &[S]) -> bool {
        names.iter().any(|n| self.contains(n.as_ref()))
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Sym(s) => {
                out.insert(s.name().to_string());
            }
            Node::Sum(ch) | Node::Product(ch) => ch.iter().for_each(|c| c.collect_symbols(out)),
            Node::Pow(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            Node::Apply(_, a) => a.collect_symbols(out),
        }
    }

    /// Additive terms (a single non-sum is its own term).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Sum(ch) => ch.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => 1,
            Node::Sum(ch) | Node::Product(ch) => 1 + ch.iter().map(Expr::size).sum::<usize>(),
            Node::Pow(b, e) => 1 + b.size() + e.size(),
            Node::Apply(_, a) => 1 + a.size(),
        }
    }

    /// Split into rational coefficient and the remaining monomial.
    pub fn split_coeff(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Const(r) => (*r, Expr::one()),
            Node::Product(ch) => match ch[0].as_const() {
                Some(c) => {
                    let rest = &ch[1..];
                    let m = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::raw(Node::Product(rest.to_vec()))
                    };
                    (c, m)
                }
                None => (Rational::ONE, self.clone()),
            },
            _ => (Rational::ONE, self.clone()),
        }
    }

    fn scaled(c: Rational, m: Expr) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        if m.is_one() {
            return Expr::constant(c);
        }
        if c.is_one() {
            return m;
        }
        match m.node() {
            Node::Product(ch) => {
                let mut v = Vec::with_capacity(ch.len() + 1);
                v.push(Expr::constant(c));
                v.extend(ch.iter().cloned());
                Expr::raw(Node::Product(v))
            }
            _ => Expr::raw(Node::Product(vec![Expr::constant(c), m])),
        }
    }

    fn base_exp(&self) -> (Expr, Expr) {
        match self.node() {
            Node::Pow(b, e) => (b.clone(), e.clone()),
            _ => (self.clone(), Expr::one()),
        }
    }

    /// Canonical sum.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::ZERO;
        let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut push = |t: &Expr, constant: &mut Rational| match t.node() {
            Node::Const(c) => *constant = checked(constant.checked_add(*c)),
            _ => {
                let (c, m) = t.split_coeff();
                let slot = collected.entry(m).or_insert(Rational::ZERO);
                *slot = checked(slot.checked_add(c));
            }
        };
        for t in terms {
            match t.node() {
                Node::Sum(ch) => ch.iter().for_each(|c| push(c, &mut constant)),
                _ => push(&t, &mut constant),
            }
        }
        let mut out: Vec<Expr> = collected
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| Expr::scaled(c, m))
            .collect();
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Node::Sum(out)),
        }
    }

    /// Canonical product.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coef = Rational::ONE;
        let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut push =
            |f: &Expr, coef: &mut Rational, bases: &mut BTreeMap<Expr, Vec<Expr>>| match f.node() {
                Node::Const(c) => *coef = checked(coef.checked_mul(*c)),
                Node::Apply(Func::Exp, a) => exp_args.push(a.clone()),
                _ => {
                    let (b, e) = f.base_exp();
                    bases.entry(b).or_default().push(e);
                }
            };
        for f in factors {
            match f.node() {
                Node::Product(ch) => ch.iter().for_each(|c| push(c, &mut coef, &mut bases)),
                _ => push(&f, &mut coef, &mut bases),
            }
            if coef.is_zero() {
                return Expr::zero();
            }
        }
        let mut out = Vec::with_capacity(bases.len() + 1);
        let mut refold = Vec::new();
        if !exp_args.is_empty() {
            let e = Expr::apply(Func::Exp, Expr::sum(exp_args));
            match e.as_const() {
                Some(c) => coef = checked(coef.checked_mul(c)),
                None => out.push(e),
            }
        }
        for (b, exps) in bases {
            let e = if exps.len() == 1 {
                exps.into_iter().next().unwrap()
            } else {
                Expr::sum(exps)
            };
            let p = Expr::pow(b, e);
            match p.node() {
                Node::Const(c) => coef = checked(coef.checked_mul(*c)),
                Node::Product(_) => refold.push(p),
                _ => out.push(p),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        if !refold.is_empty() {
            out.extend(refold);
            out.push(Expr::constant(coef));
            return Expr::product(out);
        }
        out.sort();
        match (out.len(), coef.is_one()) {
            (0, _) => Expr::constant(coef),
            (1, true) => out.pop().unwrap(),
            _ => {
                if !coef.is_one() {
                    out.insert(0, Expr::constant(coef));
                }
                Expr::raw(Node::Product(out))
            }
        }
    }

    /// Canonical power `base^exp`.
    pub fn pow(base: Expr, exp: Expr) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        let int_exp = exp.as_const().filter(|r| r.is_integer()).map(|r| r.numer());
        match base.node() {
            Node::Const(c) if c.is_one() => return Expr::one(),
            Node::Const(c) if c.is_zero() => {
                if exp.as_const().is_some_and(|r| r > Rational::ZERO) {
                    return Expr::zero();
                }
            }
            Node::Const(c) => {
                if let Some(r) = exp.as_const() {
                    if r.is_integer() {
                        return Expr::constant(checked(c.checked_pow(r.numer())));
                    }
                    if let Some(root) = c.exact_root(r.denom()) {
                        return Expr::constant(checked(root.checked_pow(r.numer())));
                    }
                }
            }
            Node::Pow(b, e) if int_exp.is_some() => {
                return Expr::pow(b.clone(), e * &exp);
            }
            Node::Product(ch) if int_exp.is_some() => {
                return Expr::product(ch.iter().map(|c| Expr::pow(c.clone(), exp.clone())));
            }
            Node::Apply(Func::Exp, a) => return Expr::apply(Func::Exp, a * &exp),
            _ => {}
        }
        Expr::raw(Node::Pow(base, exp))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self.clone(), Expr::int(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    /// Canonical function application.
    pub fn apply(f: Func, arg: Expr) -> Expr {
        if f == Func::Sqrt {
            return Expr::pow(arg, Expr::rational(1, 2));
        }
        if arg.is_zero() {
            match f {
                Func::Sin | Func::Tan | Func::Sinh | Func::Tanh => return Expr::zero(),
                Func::Cos | Func::Cosh | Func::Exp => return Expr::one(),
                _ => {}
            }
        }
        match (f, arg.node()) {
            (Func::Ln, Node::Const(c)) if c.is_one() => return Expr::zero(),
            (Func::Ln, Node::Apply(Func::Exp, a)) => return a.clone(),
            (Func::Exp, Node::Apply(Func::Ln, a)) => return a.clone(),
            _ => {}
        }
        Expr::raw(Node::Apply(f, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }
    pub fn tan(&self) -> Expr {
        Expr::apply(Func::Tan, self.clone())
    }
    pub fn sinh(&self) -> Expr {
        Expr::apply(Func::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Expr {
        Expr::apply(Func::Cosh, self.clone())
    }
    pub fn tanh(&self) -> Expr {
        Expr::apply(Func::Tanh, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Ln, self.clone())
    }
    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self.clone())
    }

    /// Rebuild through the canonical constructors. Idempotent on trees
    /// produced by this module.
    pub fn canonical(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Sum(ch) => Expr::sum(ch.iter().map(Expr::canonical)),
            Node::Product(ch) => Expr::product(ch.iter().map(Expr::canonical)),
            Node::Pow(b, e) => Expr::pow(b.canonical(), e.canonical()),
            Node::Apply(f, a) => Expr::apply(*f, a.canonical()),
        }
    }

    fn rank(&self) -> u8 {
        match self.node() {
            Node::Const(_) => 0,
            Node::Sym(_) => 1,
            Node::Pow(..) => 2,
            Node::Apply(..) => 3,
            Node::Product(_) => 4,
            Node::Sum(_) => 5,
        }
    }
}

fn checked(r: Result<Rational, crate::rational::RationalError>) -> Rational {
    match r {
        Ok(r) => r,
        Err(e) => panic!("exact constant folding failed: {e}"),
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let r = self.rank().cmp(&other.rank());
        if r != Ordering::Equal {
            return r;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.cmp(b),
            (Node::Sym(a), Node::Sym(b)) => a.cmp(b),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Node::Apply(f1, a1), Node::Apply(f2, a2)) => f1.cmp(f2).then_with(|| a1.cmp(a2)),
            (Node::Sum(c1), Node::Sum(c2)) | (Node::Product(c1), Node::Product(c2)) => {
                for (a, b) in c1.iter().zip(c2.iter()) {
                    let o = a.cmp(b);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                c1.len().cmp(&c2.len())
            }
            _ => unreachable!("ranks matched"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Self {
        Expr::constant(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl $trait<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::int(rhs))
            }
        }
        impl $trait<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::int(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, -b]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, b.recip()]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::product(iter)
    }
}

// ---------------------------------------------------------------------------
// printing

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Sum(_) => PREC_SUM,
            Node::Product(_) => {
                let (c, _) = self.split_coeff();
                if c.is_negative() {
                    PREC_UNARY
                } else {
                    PREC_PRODUCT
                }
            }
            Node::Const(r) if r.is_negative() => PREC_UNARY,
            Node::Const(r) if !r.is_integer() => PREC_PRODUCT,
            Node::Pow(_, e) if e.as_const().is_some_and(|r| r.is_negative()) => PREC_PRODUCT,
            Node::Pow(..) => PREC_POW,
            _ => PREC_ATOM,
        }
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.write_bare(f)?;
            write!(f, ")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(r) => write!(f, "{r}"),
            Node::Sym(s) => write!(f, "{}", s.name()),
            Node::Apply(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_bare(f)?;
                write!(f, ")")
            }
            Node::Pow(b, e) => {
                if let Some(r) = e.as_const().filter(|r| r.is_negative()) {
                    write!(f, "1/")?;
                    Expr::pow(b.clone(), Expr::constant(-r)).write_with(f, PREC_POW)
                } else {
                    b.write_with(f, PREC_ATOM)?;
                    write!(f, "^")?;
                    match e.as_const() {
                        Some(r) if r.is_integer() && !r.is_negative() => write!(f, "{r}"),
                        _ => {
                            write!(f, "(")?;
                            e.write_bare(f)?;
                            write!(f, ")")
                        }
                    }
                }
            }
            Node::Sum(ch) => {
                let lead = ch
                    .iter()
                    .position(|t| !t.split_coeff().0.is_negative())
                    .unwrap_or(0);
                let ordered = ch[lead..].iter().chain(ch[..lead].iter());
                for (i, t) in ordered.enumerate() {
                    let (c, m) = t.split_coeff();
                    if i == 0 {
                        t.write_with(f, PREC_SUM)?;
                    } else if c.is_negative() {
                        write!(f, " - ")?;
                        Expr::scaled(-c, m).write_with(f, PREC_PRODUCT)?;
                    } else {
                        write!(f, " + ")?;
                        t.write_with(f, PREC_PRODUCT)?;
                    }
                }
                Ok(())
            }
            Node::Product(_) => {
                let (c, m) = self.split_coeff();
                if c.is_negative() {
                    write!(f, "-")?;
                    return Expr::scaled(-c, m).write_with(f, PREC_POW);
                }
                let factors = match m.node() {
                    Node::Product(ch) => ch.clone(),
                    _ => vec![m.clone()],
                };
                let mut num = Vec::new();
                let mut den = Vec::new();
                for x in factors {
                    match x.node() {
                        Node::Pow(b, e) if e.as_const().is_some_and(|r| r.is_negative()) => {
                            den.push(Expr::pow(b.clone(), Expr::constant(-e.as_const().unwrap())));
                        }
                        _ => num.push(x),
                    }
                }
                let mut first = true;
                if !c.is_one() || num.is_empty() {
                    write!(f, "{c}")?;
                    first = false;
                }
                for x in &num {
                    if !first {
                        write!(f, "*")?;
                    }
                    x.write_with(f, PREC_POW)?;
                    first = false;
                }
                if !den.is_empty() {
                    write!(f, "/")?;
                    if den.len() == 1 {
                        den[0].write_with(f, PREC_POW)?;
                    } else {
                        write!(f, "(")?;
                        for (i, x) in den.iter().enumerate() {
                            if i > 0 {
                                write!(f, "*")?;
                            }
                            x.write_with(f, PREC_POW)?;
                        }
                        write!(f, ")")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}
