//! Randomized numeric identity testing.
//!
//! An expression is declared identically zero when it vanishes, relative to
//! its rounding scale, at every one of a number of random admissible points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{eval_scaled, EvalError, Point};
use crate::expr::Expr;

pub const DEFAULT_INTERVAL: (f64, f64) = (0.3, 1.7);
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
const GUARD_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("no admissible sample point after {retries} attempts (last failure: {last})")]
    Exhausted { retries: usize, last: String },
    #[error("trials must be at least 1")]
    NoTrials,
}

/// Constraint a sample point must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// Reject points where the expression is (nearly) zero.
    NonZero(Expr),
    /// Reject points where the expression is not strictly positive.
    Positive(Expr),
}

impl Guard {
    fn expr(&self) -> &Expr {
        match self {
            Guard::NonZero(e) | Guard::Positive(e) => e,
        }
    }

    fn admits(&self, p: &Point) -> Result<(), String> {
        let v = crate::eval::eval_num(self.expr(), p).map_err(|e| e.to_string())?;
        let ok = match self {
            Guard::NonZero(_) => v.abs() >= GUARD_EPS,
            Guard::Positive(_) => v >= GUARD_EPS,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("guard `{}` violated", self.expr()))
        }
    }
}

/// Produces random points for the symbols of an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSampler {
    default: (f64, f64),
    intervals: BTreeMap<String, (f64, f64)>,
    guards: Vec<Guard>,
    max_retries: usize,
}

impl Default for DomainSampler {
    fn default() -> Self {
        DomainSampler {
            default: DEFAULT_INTERVAL,
            intervals: BTreeMap::new(),
            guards: Vec::new(),
            max_retries: 200,
        }
    }
}

impl DomainSampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_interval(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.set_interval(name, lo, hi);
        self
    }

    pub fn set_interval(&mut self, name: &str, lo: f64, hi: f64) {
        assert!(lo < hi, "empty sampling interval for {name}");
        self.intervals.insert(name.to_string(), (lo, hi));
    }

    pub fn with_guard(mut self, g: Guard) -> Self {
        self.guards.push(g);
        self
    }

    pub fn with_max_retries(mut self, n: usize) -> Self {
        self.max_retries = n;
        self
    }

    pub fn interval(&self, name: &str) -> (f64, f64) {
        self.intervals.get(name).copied().unwrap_or(self.default)
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// Drop the guards that mention `name`.
    pub fn without_guards_on(mut self, name: &str) -> Self {
        self.guards.retain(|g| !g.expr().contains(name));
        self
    }

    /// Merge another sampler's overrides and guards into this one.
    pub fn merged(mut self, other: &DomainSampler) -> Self {
        for (k, v) in &other.intervals {
            self.intervals.insert(k.clone(), *v);
        }
        for g in &other.guards {
            if !self.guards.contains(g) {
                self.guards.push(g.clone());
            }
        }
        self
    }

    fn draw(&self, names: &[String], rng: &mut ChaCha8Rng) -> Point {
        names
            .iter()
            .map(|n| {
                let (lo, hi) = self.interval(n);
                (n.as_str(), rng.gen_range(lo..hi))
            })
            .collect()
    }

    /// Draw an admissible point for `names`, also binding guard symbols.
    /// `accept` may reject a point (for example on an evaluation error).
    pub fn sample<F>(
        &self,
        names: &[String],
        rng: &mut ChaCha8Rng,
        mut accept: F,
    ) -> Result<Point, ZeroError>
    where
        F: FnMut(&Point) -> Result<(), String>,
    {
        let mut all: Vec<String> = names.to_vec();
        for g in &self.guards {
            for s in g.expr().symbols() {
                if !all.contains(&s) {
                    all.push(s);
                }
            }
        }
        let mut last = String::from("none");
        for _ in 0..self.max_retries.max(1) {
            let p = self.draw(&all, rng);
            let verdict = self
                .guards
                .iter()
                .try_for_each(|g| g.admits(&p))
                .and_then(|_| accept(&p));
            match verdict {
                Ok(()) => return Ok(p),
                Err(e) => last = e,
            }
        }
        Err(ZeroError::Exhausted {
            retries: self.max_retries,
            last,
        })
    }
}

/// Outcome of a numeric identity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCheck {
    pub holds: bool,
    /// Largest `|value| / (1 + scale)` seen.
    pub max_residual: f64,
}

/// Settings of the identity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroTest {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            trials: DEFAULT_TRIALS,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
        }
    }
}

/// Derive a reproducible stream seed from a root seed and labels.
pub fn derive_seed(root: u64, label: u64) -> u64 {
    let mut z = root ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ZeroTest {
    pub fn with_seed(self, seed: u64) -> Self {
        ZeroTest { seed, ..self }
    }

    /// Random stream for `e`: depends only on the root seed and the
    /// structure of `e`, never on the order in which checks run.
    pub fn rng_for(&self, e: &Expr) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, e.structural_hash()))
    }

    pub fn check(&self, e: &Expr, sampler: &DomainSampler) -> Result<ZeroCheck, ZeroError> {
        if self.trials == 0 {
            return Err(ZeroError::NoTrials);
        }
        if e.is_zero() {
            return Ok(ZeroCheck {
                holds: true,
                max_residual: 0.0,
            });
        }
        let names: Vec<String> = e.symbols().into_iter().collect();
        let mut rng = self.rng_for(e);
        let mut holds = true;
        let mut max_residual: f64 = 0.0;
        for _ in 0..self.trials {
            let mut value = (0.0, 0.0);
            sampler.sample(&names, &mut rng, |p| match eval_scaled(e, p) {
                Ok(vs) => {
                    value = vs;
                    Ok(())
                }
                Err(err @ EvalError::Domain { .. }) => Err(err.to_string()),
                Err(err) => Err(err.to_string()),
            })?;
            let (v, s) = value;
            let r = v.abs() / (1.0 + s);
            max_residual = max_residual.max(r);
            if r > self.tol {
                holds = false;
            }
        }
        Ok(ZeroCheck {
            holds,
            max_residual,
        })
    }

    pub fn is_zero(&self, e: &Expr, sampler: &DomainSampler) -> Result<bool, ZeroError> {
        self.check(e, sampler).map(|c| c.holds)
    }
}

/// Identity test with the default seed.
pub fn is_zero(
    e: &Expr,
    sampler: &DomainSampler,
    trials: usize,
    tol: f64,
) -> Result<bool, ZeroError> {
    ZeroTest {
        trials,
        tol,
        seed: DEFAULT_SEED,
    }
    .is_zero(e, sampler)
}
