//! Model state `{s, T}` and the law of motion
//!
//! ```text
//! s(t+1) = Ramp((beta T+ - mu T- + lambda T0) s(t))
//! ```
//!
//! Tactic columns are shares of the sender's stock, so the product turns
//! shares back into absolute transfers. Internal conflict is charged
//! separately (see [`TacticMatrix`]).

mod params;
mod tactics;
mod validate;

use ndarray::{Array2, ArrayView1};

pub use params::{Coefficient, Parameters};
pub use tactics::{SizeVector, TacticMatrix};
pub use validate::{validate, Component, ValidationReport, Violation, COLUMN_TOLERANCE};

use crate::error::{Error, Result};
use crate::registry::CountryRegistry;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStructure {
    pub registry: CountryRegistry,
    pub sizes: SizeVector,
    pub tactics: TacticMatrix,
}

impl PowerStructure {
    /// Checks that every component matches the registry length. Values are
    /// not checked; use [`validate`] for that.
    pub fn new(
        registry: CountryRegistry,
        sizes: SizeVector,
        tactics: TacticMatrix,
    ) -> Result<Self> {
        let n = registry.len();
        let check = |what, found| {
            if found == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found,
                })
            }
        };
        check("sizes", sizes.len())?;
        check("T+", tactics.constructive.nrows())?;
        check("T+", tactics.constructive.ncols())?;
        check("T-", tactics.destructive.nrows())?;
        check("T-", tactics.destructive.ncols())?;
        check("T0", tactics.retained.len())?;
        check("self-destruction", tactics.self_destruction.len())?;
        Ok(Self {
            registry,
            sizes,
            tactics,
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// `max(0, x)`, mapping `-0.0` to `0.0`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// `operator . sizes` without the Ramp.
pub fn apply_unramped(operator: &Array2<f64>, sizes: &[f64]) -> Vec<f64> {
    operator.dot(&ArrayView1::from(sizes)).to_vec()
}

/// One step with a prebuilt operator. Also returns the indices that Ramp
/// floored.
pub fn advance(operator: &Array2<f64>, sizes: &[f64]) -> (SizeVector, Vec<usize>) {
    let mut floored = Vec::new();
    let next = apply_unramped(operator, sizes)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v < 0.0 {
                floored.push(i);
            }
            ramp(v)
        })
        .collect::<Vec<_>>();
    (next.into(), floored)
}

/// The law of motion before Ramp is applied.
pub fn step_unramped(ps: &PowerStructure, params: &Parameters) -> Result<Vec<f64>> {
    let op = ps.tactics.combined(params)?;
    Ok(apply_unramped(&op, &ps.sizes))
}

/// One application of the law of motion. `ps` is not modified.
pub fn step(ps: &PowerStructure, params: &Parameters) -> Result<SizeVector> {
    let op = ps.tactics.combined(params)?;
    Ok(advance(&op, &ps.sizes).0)
}

/// `(sender, receiver)` size changes when `x` is sent constructively.
pub fn constructive_delta(x: f64, beta: f64) -> (f64, f64) {
    (-x, beta * x)
}

/// `(sender, target)` size changes when `x` is spent destructively.
pub fn destructive_delta(x: f64, mu: f64) -> (f64, f64) {
    (-x, -mu * x)
}
