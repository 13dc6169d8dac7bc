use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multiplier that is either global or given per country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Scalar(f64),
    PerCountry(Vec<f64>),
}

impl Coefficient {
    /// Value for country `i`; scalars broadcast.
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Coefficient::Scalar(v) => *v,
            Coefficient::PerCountry(vs) => vs[i],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Coefficient::Scalar(v) => std::slice::from_ref(v),
            Coefficient::PerCountry(vs) => vs,
        }
    }

    pub fn check_len(&self, what: &'static str, n: usize) -> Result<()> {
        match self {
            Coefficient::PerCountry(vs) if vs.len() != n => Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: vs.len(),
            }),
            _ => Ok(()),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Scalar(v)
    }
}

/// The three constants of the law of motion.
///
/// `beta` multiplies constructive transfers at the receiver, `mu` multiplies
/// destructive transfers at the target and `lambda` is the intrinsic growth
/// of retained power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub beta: Coefficient,
    pub mu: f64,
    pub lambda: Coefficient,
}

impl Parameters {
    pub const BETA: f64 = 1.392;
    pub const MU: f64 = 30.0;
    pub const LAMBDA: f64 = 1.025;

    /// Checked constructor: `beta > 1`, `mu > beta`, `lambda > 0`.
    pub fn new(beta: f64, mu: f64, lambda: f64) -> Result<Self> {
        let p = Self::unchecked(beta, mu, lambda);
        p.validate()?;
        Ok(p)
    }

    /// No invariant checks. Used for analysis runs such as the conservation
    /// case `beta = lambda = 1`, and inside grid searches.
    pub fn unchecked(beta: f64, mu: f64, lambda: f64) -> Self {
        Self {
            beta: beta.into(),
            mu,
            lambda: lambda.into(),
        }
    }

    pub fn published() -> Self {
        Self::unchecked(Self::BETA, Self::MU, Self::LAMBDA)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameters(msg));
        let all_finite = self
            .beta
            .values()
            .iter()
            .chain(self.lambda.values())
            .all(|v| v.is_finite());
        if !all_finite || !self.mu.is_finite() {
            return fail("values must be finite".into());
        }
        if let Some(b) = self.beta.values().iter().find(|&&b| b <= 1.0) {
            return fail(format!("beta must exceed 1, got {b}"));
        }
        let max_beta = self
            .beta
            .values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.mu <= max_beta {
            return fail(format!("mu must exceed beta ({max_beta}), got {}", self.mu));
        }
        if let Some(l) = self.lambda.values().iter().find(|&&l| l <= 0.0) {
            return fail(format!("lambda must be positive, got {l}"));
        }
        Ok(())
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        self.beta.check_len("beta", n)?;
        self.lambda.check_len("lambda", n)
    }

    /// Reads `{"beta": .., "mu": .., "lambda": ..}` and validates it.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let p: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        p.validate()?;
        Ok(p)
    }
}

impl Default for Parameters {
    fn default() -> Self {
        Self::published()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_values_are_valid() {
        let p = Parameters::published();
        p.validate().unwrap();
        assert_eq!(p.beta, Coefficient::Scalar(1.392));
        assert_eq!(p.mu, 30.0);
        assert_eq!(p.lambda, Coefficient::Scalar(1.025));
    }

    #[test]
    fn invariant_violations() {
        assert!(Parameters::new(1.0, 30.0, 1.025).is_err());
        assert!(Parameters::new(1.4, 1.3, 1.025).is_err());
        assert!(Parameters::new(1.4, 30.0, 0.0).is_err());
        assert!(Parameters::new(1.4, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn parses_scalar_and_vector_json() {
        let p: Parameters =
            serde_json::from_str(r#"{"beta":1.392,"mu":30,"lambda":1.025}"#).unwrap();
        assert_eq!(p, Parameters::published());
        let p: Parameters =
            serde_json::from_str(r#"{"beta":[1.2,1.5],"mu":30,"lambda":1.0}"#).unwrap();
        assert_eq!(p.beta.at(1), 1.5);
        assert!(p.check_dimension(2).is_ok());
        assert!(p.check_dimension(3).is_err());
        assert!(
            serde_json::from_str::<Parameters>(r#"{"beta":1.3,"mu":30,"lambda":1,"x":1}"#).is_err()
        );
    }

    #[test]
    fn mu_must_exceed_every_beta() {
        let p = Parameters {
            beta: Coefficient::PerCountry(vec![1.2, 5.0]),
            mu: 4.0,
            lambda: 1.0.into(),
        };
        assert!(p.validate().is_err());
    }
}
