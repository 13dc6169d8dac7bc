//! Naive and dynamic simulations, coalition totals, backtests and scenario
//! edits.
//!
//! A trajectory row labelled `y` is the state at year `y`; the flows dated
//! `y` move it to row `y + 1`.

mod backtest;
mod scenario;

use ndarray::{Array2, ArrayView1};

pub use backtest::{backtest, BacktestReport};
pub use scenario::{apply_scenario, Channel, Edit, Scenario, TradeScope, YearSpan};

use crate::error::{Error, Result};
use crate::ingestion::{build_tactics, build_tactics_lenient};
use crate::model::{advance, Parameters};
use crate::registry::CountryRegistry;
use crate::warning::Warning;
use crate::{PanelData, Year};

/// How a dynamic run turns a year's absolute flows into shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// Divide by the simulated sizes, so shares stay true fractions of what
    /// each state holds in the run.
    #[default]
    Simulated,
    /// Divide by the actual wealth recorded for that year.
    Actual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub registry: CountryRegistry,
    pub years: Vec<Year>,
    /// `years.len() x registry.len()`.
    pub sizes: Array2<f64>,
    /// Warnings per row: clamps from building that row's tactics, floors
    /// that produced it, and base-year drops on row 0.
    pub warnings: Vec<Vec<Warning>>,
}

impl Trajectory {
    fn start(registry: CountryRegistry, year: Year, sizes: &[f64], warnings: Vec<Warning>) -> Self {
        let n = registry.len();
        let mut m = Array2::zeros((1, n));
        m.row_mut(0).assign(&ArrayView1::from(sizes));
        Self {
            registry,
            years: vec![year],
            sizes: m,
            warnings: vec![warnings],
        }
    }

    fn push(&mut self, sizes: &[f64], floored: &[usize]) {
        let year = self.years.last().copied().unwrap_or_default() + 1;
        self.sizes
            .push_row(ArrayView1::from(sizes))
            .expect("row length matches registry");
        self.years.push(year);
        self.warnings.push(
            floored
                .iter()
                .map(|&i| Warning::RampedToZero {
                    country: self.registry.code(i).to_string(),
                    year,
                })
                .collect(),
        );
    }

    pub fn row(&self, year: Year) -> Option<ArrayView1<'_, f64>> {
        let k = self.years.iter().position(|&y| y == year)?;
        Some(self.sizes.row(k))
    }

    /// One country's sizes by row.
    pub fn series(&self, country: &str) -> Result<Vec<f64>> {
        let j = self.registry.require(country)?;
        Ok(self.sizes.column(j).to_vec())
    }

    pub fn totals(&self) -> Vec<f64> {
        self.sizes.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn last(&self) -> ArrayView1<'_, f64> {
        self.sizes.row(self.sizes.nrows() - 1)
    }

    pub fn all_warnings(&self) -> impl Iterator<Item = &Warning> {
        self.warnings.iter().flatten()
    }
}

fn checked(params: &Parameters, n: usize) -> Result<()> {
    params.validate()?;
    params.check_dimension(n)
}

/// Builds tactics once from `base_year` flows and sizes and iterates the law
/// of motion `n_years` times with those shares held fixed.
pub fn simulate_naive(
    panel: &PanelData,
    base_year: Year,
    n_years: usize,
    params: &Parameters,
) -> Result<Trajectory> {
    let (panel, mut warnings) = panel.for_base_year(base_year)?;
    checked(params, panel.registry().len())?;
    let sizes = panel.wealth_vector(base_year)?;
    let (tactics, clamps) = build_tactics(&panel, base_year, &sizes)?;
    warnings.extend(clamps);
    let op = tactics.combined(params)?;

    let mut traj = Trajectory::start(panel.registry().clone(), base_year, &sizes, warnings);
    let mut current = sizes;
    for _ in 0..n_years {
        let (next, floored) = advance(&op, &current);
        traj.push(&next, &floored);
        current = next.into_inner();
    }
    Ok(traj)
}

/// Starts from actual `start_year` wealth and, for every year up to
/// `end_year - 1`, converts that year's absolute flows into shares and
/// applies one step.
///
/// States whose simulated size reached zero allocate nothing.
pub fn simulate_dynamic(
    panel: &PanelData,
    start_year: Year,
    end_year: Year,
    params: &Parameters,
    denominator: Denominator,
) -> Result<Trajectory> {
    if end_year < start_year {
        return Err(Error::InvalidValue(format!(
            "end year {end_year} precedes start year {start_year}"
        )));
    }
    let (panel, warnings) = panel.for_base_year(start_year)?;
    checked(params, panel.registry().len())?;
    let sizes = panel.wealth_vector(start_year)?;
    let mut traj = Trajectory::start(panel.registry().clone(), start_year, &sizes, warnings);
    let mut current = sizes;
    for (k, year) in (start_year..end_year).enumerate() {
        if !panel.covers_year(year) {
            return Err(Error::MissingYear(year));
        }
        let (tactics, clamps) = match denominator {
            Denominator::Simulated => build_tactics_lenient(&panel, year, &current)?,
            Denominator::Actual => {
                build_tactics_lenient(&panel, year, &panel.wealth_vector(year)?)?
            }
        };
        traj.warnings[k].extend(clamps);
        let (next, floored) = advance(&tactics.combined(params)?, &current);
        traj.push(&next, &floored);
        current = next.into_inner();
    }
    Ok(traj)
}

/// Per-row sum of the members' sizes.
pub fn coalition_power<S: AsRef<str>>(traj: &Trajectory, members: &[S]) -> Result<Vec<f64>> {
    let idx = members
        .iter()
        .map(|m| traj.registry.require(m.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(traj
        .sizes
        .rows()
        .into_iter()
        .map(|row| idx.iter().map(|&j| row[j]).sum())
        .collect())
}
