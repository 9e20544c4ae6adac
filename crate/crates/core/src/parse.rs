//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! number := digits ('.' digits)?
//! ident  := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Decimal literals are read exactly as rationals. Identifiers that are
//! not declared coordinates become parameters.

use thiserror::Error;

use crate::expr::{Expr, Func, SymbolKind};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("unknown function `{name}` at column {col}")]
    UnknownFunction { name: String, col: usize },
}

impl ParseError {
    /// 1-based column of the offending character.
    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { col, .. } | ParseError::UnknownFunction { col, .. } => *col,
        }
    }

    /// The message without its position.
    pub fn message(&self) -> String {
        match self {
            ParseError::Syntax { msg, .. } => msg.clone(),
            ParseError::UnknownFunction { name, .. } => format!("unknown function `{name}`"),
        }
    }
}

/// Parse `text`; names in `chart_symbols` become coordinates.
pub fn parse<S: AsRef<str>>(text: &str, chart_symbols: &[S]) -> Result<Expr, ParseError> {
    parse_with(text, |name| {
        if chart_symbols.iter().any(|s| s.as_ref() == name) {
            SymbolKind::Coordinate
        } else {
            SymbolKind::Parameter
        }
    })
}

/// Parse with a caller-supplied symbol classifier.
pub fn parse_with(text: &str, kind_of: impl Fn(&str) -> SymbolKind) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        kind_of: &kind_of,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    kind_of: &'a dyn Fn(&str) -> SymbolKind,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::sum(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                self.skip_ws();
                if self.peek() == Some('(') {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError::UnknownFunction {
                            name,
                            col: start + 1,
                        });
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.error("expected `)`"));
                    }
                    return Ok(Expr::apply(func, arg));
                }
                Ok(Expr::symbol_of_kind(&name, (self.kind_of)(&name)))
            }
            Some(c) => Err(self.error(&format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int_part = String::new();
        let mut frac_part = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            int_part.push(c);
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                frac_part.push(c);
                self.pos += 1;
            }
        }
        if int_part.is_empty() && frac_part.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let too_long = || ParseError::Syntax {
            col: start + 1,
            msg: "numeric literal too large".into(),
        };
        let num: i64 = digits.parse().map_err(|_| too_long())?;
        let den = 10i64
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(too_long)?;
        let r = Rational::new(num, den).map_err(|_| too_long())?;
        Ok(Expr::constant(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    fn p(s: &str) -> Expr {
        parse(s, &["t", "x", "R"]).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("1 + 2*3"), Expr::int(7));
        assert_eq!(p("2^3^2"), Expr::int(512));
        assert_eq!(p("-2^2"), Expr::int(-4));
        assert_eq!(p("8/4/2"), Expr::int(1));
        assert_eq!(p("x^-1"), Expr::coordinate("x").recip());
    }

    #[test]
    fn hyperbolic_identity_has_two_power_terms() {
        let e = p("cosh(t)^2 - sinh(t)^2");
        let Node::Sum(terms) = e.node() else {
            panic!("not a sum: {e}")
        };
        assert_eq!(terms.len(), 2);
        let powers = terms
            .iter()
            .filter(|t| matches!(t.split_coeff().1.node(), Node::Pow(..)))
            .count();
        assert_eq!(powers, 2);
    }

    #[test]
    fn half_sum_of_squares() {
        let e = p("1/2*(t^2 + R^2)");
        let Node::Product(ch) = e.node() else {
            panic!()
        };
        assert_eq!(ch[0], Expr::rational(1, 2));
        let Node::Sum(s) = ch[1].node() else { panic!() };
        assert!(s.iter().all(|t| matches!(t.node(), Node::Pow(..))));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.25"), Expr::rational(1, 4));
        assert_eq!(p("1.5*x"), Expr::rational(3, 2) * Expr::coordinate("x"));
    }

    #[test]
    fn symbol_kinds() {
        let e = p("mu*x");
        assert!(e.contains("mu") && e.contains("x"));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            p_err("foo(x)"),
            ParseError::UnknownFunction {
                name: "foo".into(),
                col: 1
            }
        );
        assert_eq!(p_err("x + * 2").column(), 5);
        assert_eq!(p_err("(x + 1").column(), 7);
        assert!(matches!(p_err(""), ParseError::Syntax { .. }));
        assert!(matches!(p_err("x $ y"), ParseError::Syntax { col: 3, .. }));
    }

    fn p_err(s: &str) -> ParseError {
        parse(s, &["x"]).unwrap_err()
    }
}
