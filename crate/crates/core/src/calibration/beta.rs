use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::euclidean_distance;
use crate::error::{Error, Result};
use crate::ingestion::build_tactics;
use crate::model::{step, Parameters, PowerStructure};
use crate::{PanelData, Year};

/// Inclusive grid `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self {
            lo: 1.001,
            hi: 2.0,
            step: 0.001,
        }
    }
}

impl BetaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = Self { lo, hi, step };
        g.candidates()?;
        Ok(g)
    }

    pub fn candidates(&self) -> Result<Vec<f64>> {
        let Self { lo, hi, step } = *self;
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if lo <= 1.0 {
            return Err(Error::InvalidGrid(format!(
                "lower bound {lo} must exceed 1"
            )));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        if hi < lo {
            return Err(Error::InvalidGrid(format!("empty grid: {hi} < {lo}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| lo + k as f64 * step).collect())
    }
}

impl FromStr for BetaGrid {
    type Err = Error;

    /// `lo:hi:step`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(Error::InvalidGrid(format!(
                "expected lo:hi:step, got `{s}`"
            )));
        };
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("invalid number `{p}`")))
        };
        Self::new(num(lo)?, num(hi)?, num(step)?)
    }
}

impl fmt::Display for BetaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit {
    pub beta: f64,
    /// Mean Euclidean distance between predicted and actual wealth vectors.
    pub objective: f64,
    pub grid: BetaGrid,
    /// `(beta, objective)` for every candidate, in grid order.
    pub curve: Vec<(f64, f64)>,
    /// Years `t` whose `t -> t + 1` prediction entered the objective.
    pub years: Vec<Year>,
}

/// A one-year prediction problem: the state at `year` and the wealth actually
/// observed a year later.
struct YearCase {
    year: Year,
    structure: PowerStructure,
    actual_next: Vec<f64>,
}

fn year_cases(panel: &PanelData) -> Result<Vec<YearCase>> {
    let (first, last) = panel.years().ok_or(Error::NoYearOverlap)?;
    let mut cases = Vec::new();
    for year in first..last {
        let countries: BTreeSet<String> = panel
            .registry()
            .iter()
            .filter(|c| {
                panel.wealth().get(c, year).is_some_and(|w| w > 0.0)
                    && panel.wealth().get(c, year + 1).is_some()
            })
            .map(str::to_string)
            .collect();
        if countries.is_empty() {
            continue;
        }
        let slice = panel.cross_section(year..=year + 1, &countries)?;
        let sizes = slice.wealth_vector(year)?;
        let actual_next = slice.wealth_vector(year + 1)?;
        let (tactics, _) = build_tactics(&slice, year, &sizes)?;
        let structure = PowerStructure::new(slice.registry().clone(), sizes.into(), tactics)?;
        cases.push(YearCase {
            year,
            structure,
            actual_next,
        });
    }
    if cases.is_empty() {
        return Err(Error::NoYearOverlap);
    }
    Ok(cases)
}

fn objective(cases: &[YearCase], params: &Parameters) -> Result<f64> {
    let mut total = 0.0;
    for case in cases {
        let predicted = step(&case.structure, params)?;
        total += euclidean_distance(&predicted, &case.actual_next);
    }
    Ok(total / cases.len() as f64)
}

/// For each candidate `beta`, predicts every year's wealth from the previous
/// year's actual wealth and flows, and scores the mean Euclidean distance to
/// the actual vectors. Returns the first candidate attaining the minimum.
///
/// Candidates are scored in parallel; the curve keeps grid order.
pub fn fit_beta(panel: &PanelData, lambda: f64, mu: f64, grid: BetaGrid) -> Result<BetaFit> {
    let candidates = grid.candidates()?;
    let cases = year_cases(panel)?;
    let scores = candidates
        .par_iter()
        .map(|&beta| objective(&cases, &Parameters::unchecked(beta, mu, lambda)))
        .collect::<Result<Vec<f64>>>()?;
    let curve: Vec<(f64, f64)> = candidates.into_iter().zip(scores).collect();
    let (beta, objective) = curve
        .iter()
        .copied()
        .reduce(|best, c| if c.1 < best.1 { c } else { best })
        .expect("grid is non-empty");
    Ok(BetaFit {
        beta,
        objective,
        grid,
        curve,
        years: cases.iter().map(|c| c.year).collect(),
    })
}
