//! Symbolic conformal geometry and Lie point symmetries of second-order
//! linear PDEs on curved spaces.
//!
//! The crate is layered: an exact symbolic kernel ([`expr`], [`parse`],
//! [`calculus`], [`eval`], [`zero`]), tensor calculus on a chart
//! ([`geometry`]), the conformal hierarchy ([`conformal`]), symmetry
//! generation and verification ([`symmetry`]), reductions ([`reduction`]),
//! a catalogue of spaces ([`catalog`]) and the command-line front end
//! ([`cli`]).

pub mod calculus;
pub mod catalog;
pub mod cli;
pub mod conformal;
pub mod eval;
pub mod expr;
pub mod geometry;
pub mod parse;
pub mod rational;
pub mod reduction;
pub mod symmetry;
pub mod zero;

pub use calculus::{diff, expand, substitute};
pub use eval::{eval_num, EvalError, Point};
pub use expr::{Expr, Func, Node, SymbolKind};
pub use parse::{parse, ParseError};
pub use rational::{Rational, RationalError};
pub use zero::{is_zero, DomainSampler, Guard, ZeroCheck, ZeroError, ZeroTest};
