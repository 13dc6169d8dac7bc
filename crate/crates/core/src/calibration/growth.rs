use crate::error::{Error, Result};
use crate::{PanelData, Year};

/// One country-year: `growth = wealth(t+1) / wealth(t)` and
/// `trade_share = (exports + imports)(t) / wealth(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthObservation {
    pub country: String,
    pub year: Year,
    pub trade_share: f64,
    pub growth: f64,
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x` with an intercept.
pub fn ols(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            found: n,
        });
    }
    let first = points[0].0;
    if points.iter().all(|p| p.0 == first) {
        return Err(Error::DegenerateDesign);
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LineFit {
        intercept,
        slope,
        rss,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Growth at zero trade; the intrinsic growth estimate.
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
    pub r_squared: f64,
    pub observations: Vec<GrowthObservation>,
}

impl GrowthFit {
    pub fn n(&self) -> usize {
        self.observations.len()
    }
}

/// Country-years with wealth at `t` and `t + 1`, positive wealth at `t`, and
/// no conflict involvement in `t`. Restricted to one country if given.
pub fn growth_observations(panel: &PanelData, country: Option<&str>) -> Vec<GrowthObservation> {
    let mut out = Vec::new();
    let Some((first, last)) = panel.years() else {
        return out;
    };
    for year in first..last {
        let war = panel.at_war(year);
        for c in panel.registry().iter() {
            if country.is_some_and(|only| only != c) || war.contains(c) {
                continue;
            }
            let (Some(w0), Some(w1)) =
                (panel.wealth().get(c, year), panel.wealth().get(c, year + 1))
            else {
                continue;
            };
            if w0 <= 0.0 {
                continue;
            }
            out.push(GrowthObservation {
                country: c.to_string(),
                year,
                trade_share: panel.trade_volume(c, year) / w0,
                growth: w1 / w0,
            });
        }
    }
    out
}

fn fit(observations: Vec<GrowthObservation>) -> Result<GrowthFit> {
    let points: Vec<(f64, f64)> = observations
        .iter()
        .map(|o| (o.trade_share, o.growth))
        .collect();
    let line = ols(&points)?;
    Ok(GrowthFit {
        intercept: line.intercept,
        slope: line.slope,
        rss: line.rss,
        r_squared: line.r_squared,
        observations,
    })
}

/// Pooled regression of annual growth on trade share over all countries.
pub fn fit_growth_regression(panel: &PanelData) -> Result<GrowthFit> {
    fit(growth_observations(panel, None))
}

/// The same regression on one country's observations.
pub fn fit_growth_regression_for(panel: &PanelData, country: &str) -> Result<GrowthFit> {
    panel.registry().require(country)?;
    fit(growth_observations(panel, Some(country)))
}
