use std::ops::{Deref, DerefMut};

use ndarray::{Array1, Array2};

use super::params::Parameters;
use crate::error::Result;

/// Per-country power stock, billions of constant-2020 USD.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SizeVector(Vec<f64>);

impl SizeVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl From<Vec<f64>> for SizeVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for SizeVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SizeVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Column `j` of every component is country `j`'s foreign policy: the share
/// of its stock sent constructively (`constructive[i][j]`), destructively
/// (`destructive[i][j]`) or kept (`retained[j]`, the diagonal of T0).
///
/// `self_destruction[j]` is the share spent on internal conflict. It is not
/// part of the column budget; the law of motion charges `(1 + mu)` times the
/// spent amount against country `j` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct TacticMatrix {
    pub constructive: Array2<f64>,
    pub destructive: Array2<f64>,
    pub retained: Array1<f64>,
    pub self_destruction: Array1<f64>,
}

impl TacticMatrix {
    /// Every state keeps all of its power.
    pub fn isolated(n: usize) -> Self {
        Self {
            constructive: Array2::zeros((n, n)),
            destructive: Array2::zeros((n, n)),
            retained: Array1::ones(n),
            self_destruction: Array1::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    /// The linear operator of the law of motion,
    /// `diag(beta) T+ - mu T- + diag(lambda) T0 - (1 + mu) diag(self_destruction)`.
    ///
    /// Per-country `beta` applies to the receiving row.
    pub fn combined(&self, params: &Parameters) -> Result<Array2<f64>> {
        let n = self.len();
        params.check_dimension(n)?;
        let mu = params.mu;
        let mut m = Array2::zeros((n, n));
        for ((i, j), out) in m.indexed_iter_mut() {
            let mut v =
                params.beta.at(i) * self.constructive[[i, j]] - mu * self.destructive[[i, j]];
            if i == j {
                v += params.lambda.at(i) * self.retained[i] - (1.0 + mu) * self.self_destruction[i];
            }
            *out = v;
        }
        Ok(m)
    }
}
