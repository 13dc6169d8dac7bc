//! Estimating `mu`, `lambda` and `beta` from panel data, in that order:
//! `mu` from civil-war wealth losses, `lambda` as the intercept of growth
//! regressed on trade share, then `beta` by a grid search over one-year
//! predictions.

mod beta;
mod growth;
mod mu;

pub use beta::{fit_beta, BetaFit, BetaGrid};
pub use growth::{
    fit_growth_regression, fit_growth_regression_for, growth_observations, ols, GrowthFit,
    GrowthObservation, LineFit,
};
pub use mu::{estimate_mu, peacetime_growth, Episode, MuEstimate, MuRecord};

/// Euclidean distance between two equal-length vectors.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
