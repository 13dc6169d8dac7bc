use ndarray::Array2;

use super::{simulate_dynamic, Denominator};
use crate::error::Result;
use crate::model::Parameters;
use crate::registry::CountryRegistry;
use crate::{PanelData, Year};

/// Dynamic run from `start` compared with recorded wealth.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub registry: CountryRegistry,
    pub years: Vec<Year>,
    pub predicted: Array2<f64>,
    /// Recorded wealth, NaN where the panel has none.
    pub actual: Array2<f64>,
    /// Euclidean distance per row over countries with recorded wealth.
    pub distances: Vec<f64>,
    /// Mean of `|predicted - actual| / actual` per country over rows after
    /// the first, skipping rows where the actual value is missing or zero.
    /// NaN when no row qualifies.
    pub relative_errors: Vec<f64>,
}

impl BacktestReport {
    /// Mean of the finite per-country relative errors.
    pub fn mean_relative_error(&self) -> f64 {
        let finite: Vec<f64> = self
            .relative_errors
            .iter()
            .copied()
            .filter(|e| e.is_finite())
            .collect();
        if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        }
    }
}

pub fn backtest(
    panel: &PanelData,
    params: &Parameters,
    start: Year,
    end: Year,
    denominator: Denominator,
) -> Result<BacktestReport> {
    let traj = simulate_dynamic(panel, start, end, params, denominator)?;
    let registry = traj.registry.clone();
    let actual = Array2::from_shape_fn(traj.sizes.dim(), |(k, j)| {
        panel
            .wealth()
            .get(registry.code(j), traj.years[k])
            .unwrap_or(f64::NAN)
    });
    let distances = traj
        .sizes
        .rows()
        .into_iter()
        .zip(actual.rows())
        .map(|(p, a)| {
            p.iter()
                .zip(a.iter())
                .filter(|(_, a)| !a.is_nan())
                .map(|(p, a)| (p - a) * (p - a))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let relative_errors = (0..registry.len())
        .map(|j| {
            let errs: Vec<f64> = (1..traj.years.len())
                .filter_map(|k| {
                    let a = actual[[k, j]];
                    (a.is_finite() && a != 0.0).then(|| (traj.sizes[[k, j]] - a).abs() / a)
                })
                .collect();
            if errs.is_empty() {
                f64::NAN
            } else {
                errs.iter().sum::<f64>() / errs.len() as f64
            }
        })
        .collect();
    Ok(BacktestReport {
        registry,
        years: traj.years,
        predicted: traj.sizes,
        actual,
        distances,
        relative_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{ConflictFlows, MilexSeries, TradeFlows, WealthSeries};

    #[test]
    fn isolated_growth_backtest() {
        let mut w = WealthSeries::new();
        w.insert("AAA", 2000, 100.0);
        w.insert("AAA", 2001, 100.0);
        w.insert("AAA", 2002, 0.0);
        w.insert("BBB", 2000, 10.0);
        let panel = PanelData::new(
            w,
            TradeFlows::new(),
            MilexSeries::new(),
            ConflictFlows::new(),
        )
        .unwrap();
        let r = backtest(
            &panel,
            &Parameters::published(),
            2000,
            2002,
            Denominator::Simulated,
        )
        .unwrap();
        assert_eq!(r.years, vec![2000, 2001, 2002]);
        assert_eq!(r.distances[0], 0.0);
        assert!((r.distances[1] - 2.5).abs() < 1e-12);
        assert!((r.relative_errors[0] - 0.025).abs() < 1e-12);
        assert!(r.relative_errors[1].is_nan());
        assert!(r.actual[[1, 1]].is_nan());
        assert!((r.mean_relative_error() - 0.025).abs() < 1e-12);
    }
}
