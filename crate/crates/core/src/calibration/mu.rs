use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::{PanelData, Year};

/// A country and the years it spent in civil war.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub country: String,
    pub war_years: BTreeSet<Year>,
}

impl Episode {
    pub fn new(country: impl Into<String>, war_years: impl IntoIterator<Item = Year>) -> Self {
        Self {
            country: country.into(),
            war_years: war_years.into_iter().collect(),
        }
    }
}

/// One war year. `loss = expected - actual` and
/// `mu = (loss - expenditure) / expenditure`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuRecord {
    pub country: String,
    pub year: Year,
    pub expected: f64,
    pub actual: f64,
    pub loss: f64,
    pub expenditure: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuEstimate {
    pub records: Vec<MuRecord>,
    pub raw_mean: f64,
    /// Mean over records with `mu` at or below the 90th percentile.
    pub trimmed_mean: f64,
    pub trimmed_count: usize,
}

impl MuEstimate {
    pub fn count(&self) -> usize {
        self.records.len()
    }
}

/// Geometric mean of year-over-year wealth ratios, using only pairs of
/// consecutive years where neither year is a war year.
pub fn peacetime_growth(series: &BTreeMap<Year, f64>, war_years: &BTreeSet<Year>) -> Option<f64> {
    let logs: Vec<f64> = series
        .iter()
        .zip(series.iter().skip(1))
        .filter(|((y0, w0), (y1, _))| {
            **y1 == **y0 + 1 && **w0 > 0.0 && !war_years.contains(y0) && !war_years.contains(y1)
        })
        .map(|((_, w0), (_, w1))| (w1 / w0).ln())
        .collect();
    if logs.is_empty() {
        return None;
    }
    Some((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

/// Linear-interpolation percentile of sorted values, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Per war year: expected wealth compounds the last non-war wealth forward
/// at the peacetime rate, the loss is expected minus actual, and the year's
/// full military expenditure is the amount spent.
pub fn estimate_mu(panel: &PanelData, episodes: &[Episode]) -> Result<MuEstimate> {
    if episodes.is_empty() {
        return Err(Error::NoEpisodes);
    }
    let mut records = Vec::new();
    for ep in episodes {
        let country = ep.country.as_str();
        panel.registry().require(country)?;
        let series = panel.wealth().series(country);
        let rate = peacetime_growth(&series, &ep.war_years)
            .ok_or_else(|| Error::InsufficientPeacetime(country.to_string()))?;
        for &year in &ep.war_years {
            let (base_year, base) = series
                .range(..year)
                .rev()
                .find(|(y, _)| !ep.war_years.contains(y))
                .map(|(y, w)| (*y, *w))
                .ok_or_else(|| Error::InsufficientPeacetime(country.to_string()))?;
            let actual = series
                .get(&year)
                .copied()
                .ok_or_else(|| Error::MissingWealth {
                    country: country.to_string(),
                    year,
                })?;
            let expected = base * rate.powi(year - base_year);
            if expected.is_nan() || expected <= 0.0 {
                return Err(Error::NonPositiveExpected {
                    country: country.to_string(),
                    year,
                    expected,
                });
            }
            let x = panel
                .milex()
                .get(country, year)
                .ok_or_else(|| Error::MissingMilex {
                    country: country.to_string(),
                    year,
                })?;
            if x == 0.0 {
                return Err(Error::ZeroExpenditure {
                    country: country.to_string(),
                    year,
                });
            }
            let loss = expected - actual;
            records.push(MuRecord {
                country: country.to_string(),
                year,
                expected,
                actual,
                loss,
                expenditure: x,
                mu: (loss - x) / x,
            });
        }
    }

    let raw_mean = records.iter().map(|r| r.mu).sum::<f64>() / records.len() as f64;
    let mut sorted: Vec<f64> = records.iter().map(|r| r.mu).collect();
    sorted.sort_by(f64::total_cmp);
    let cut = percentile(&sorted, 0.9);
    let kept: Vec<f64> = sorted.into_iter().filter(|&m| m <= cut).collect();
    Ok(MuEstimate {
        raw_mean,
        trimmed_mean: kept.iter().sum::<f64>() / kept.len() as f64,
        trimmed_count: kept.len(),
        records,
    })
}
