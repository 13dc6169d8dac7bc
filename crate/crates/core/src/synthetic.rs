//! Seeded panel generators for tests, benchmarks and demos.
//!
//! `engine_panel` records wealth produced by the law of motion itself, so
//! calibrating or backtesting against it should recover the generating
//! parameters exactly. `growth_line_panel` places every country-year on a
//! straight growth-versus-trade line.
//!
//! Both directions of every dyad are written, zeros included, so that
//! reloading a generated panel from CSV does not mirror anything.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingestion::{ConflictFlows, MilexSeries, TradeFlows, WealthSeries};
use crate::model::{apply_unramped, Parameters, TacticMatrix};
use crate::{PanelData, Year};

/// `AAA`, `AAB`, ... in sorted order.
pub fn country_codes(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            let l = |d: usize| (b'A' + (d % 26) as u8) as char;
            [l(k / 676), l(k / 26), l(k)].iter().collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct EngineSpec {
    pub countries: usize,
    pub start_year: Year,
    /// Number of wealth years; flows are generated for all but the last.
    pub years: usize,
    pub params: Parameters,
    pub seed: u64,
    /// Sparse interstate conflict, always within military budgets.
    pub conflict: bool,
    pub civil_war: bool,
    /// Keep every allocation share constant across years.
    pub fixed_shares: bool,
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self {
            countries: 5,
            start_year: 2000,
            years: 10,
            params: Parameters::published(),
            seed: 1,
            conflict: false,
            civil_war: false,
            fixed_shares: false,
        }
    }
}

fn random_tactics(rng: &mut ChaCha8Rng, spec: &EngineSpec) -> TacticMatrix {
    let n = spec.countries;
    let mut t = TacticMatrix::isolated(n);
    for j in 0..n {
        for i in 0..n {
            if i != j && rng.gen_bool(0.6) {
                t.constructive[[i, j]] = rng.gen_range(0.001..0.3 / n as f64);
            }
        }
        if spec.conflict && n > 1 && rng.gen_bool(0.2) {
            let target = (j + rng.gen_range(1..n)) % n;
            t.destructive[[target, j]] = rng.gen_range(0.0001..0.001);
        }
        if spec.civil_war && rng.gen_bool(0.2) {
            t.self_destruction[j] = rng.gen_range(0.0001..0.001);
        }
        let used = t.constructive.column(j).sum() + t.destructive.column(j).sum();
        t.retained[j] = 1.0 - used;
    }
    t
}

fn record_flows(
    panel: (&mut TradeFlows, &mut ConflictFlows, &mut MilexSeries),
    codes: &[String],
    year: Year,
    t: &TacticMatrix,
    sizes: &[f64],
) {
    let (trade, conflicts, milex) = panel;
    let n = codes.len();
    for j in 0..n {
        let mut spend = t.self_destruction[j] * sizes[j];
        if spend > 0.0 {
            conflicts.insert(&codes[j], &codes[j], year, spend);
        }
        for i in 0..n {
            let (c, d) = (t.constructive[[i, j]], t.destructive[[i, j]]);
            if i != j {
                trade.insert(&codes[j], &codes[i], year, c * sizes[j]);
            }
            if d > 0.0 {
                conflicts.insert(&codes[j], &codes[i], year, d * sizes[j]);
                spend += d * sizes[j];
            }
        }
        milex.insert(&codes[j], year, (2.0 * spend).max(0.01 * sizes[j]));
    }
}

/// Wealth follows the law of motion under randomly drawn shares; trade and
/// conflict rows are those shares times the recorded wealth.
pub fn engine_panel(spec: &EngineSpec) -> Result<PanelData> {
    if spec.countries == 0 || spec.years == 0 {
        return Err(Error::InvalidValue(
            "engine panel needs countries and years".into(),
        ));
    }
    spec.params.validate()?;
    spec.params.check_dimension(spec.countries)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let codes = country_codes(spec.countries);
    let mut sizes: Vec<f64> = (0..spec.countries)
        .map(|_| rng.gen_range(50.0..500.0))
        .collect();
    let (mut wealth, mut trade, mut conflicts, mut milex) = (
        WealthSeries::new(),
        TradeFlows::new(),
        ConflictFlows::new(),
        MilexSeries::new(),
    );
    let fixed = random_tactics(&mut rng, spec);
    for k in 0..spec.years {
        let year = spec.start_year + k as Year;
        for (c, s) in codes.iter().zip(&sizes) {
            wealth.insert(c, year, *s);
        }
        if k + 1 == spec.years {
            break;
        }
        let t = if spec.fixed_shares {
            fixed.clone()
        } else {
            random_tactics(&mut rng, spec)
        };
        record_flows(
            (&mut trade, &mut conflicts, &mut milex),
            &codes,
            year,
            &t,
            &sizes,
        );
        sizes = apply_unramped(&t.combined(&spec.params)?, &sizes);
        if let Some(j) = sizes.iter().position(|&s| s.is_nan() || s <= 0.0) {
            return Err(Error::InvalidValue(format!(
                "generated size of {} hit zero in {}",
                codes[j],
                year + 1
            )));
        }
    }
    PanelData::new(wealth, trade, milex, conflicts)
}

#[derive(Debug, Clone)]
pub struct GrowthLineSpec {
    pub countries: usize,
    pub start_year: Year,
    pub years: usize,
    pub intercept: f64,
    pub slope: f64,
    pub seed: u64,
}

/// Random trade; each country's wealth grows by exactly
/// `intercept + slope * (exports + imports) / wealth` every year.
pub fn growth_line_panel(spec: &GrowthLineSpec) -> Result<PanelData> {
    if spec.countries < 2 || spec.years < 2 {
        return Err(Error::InvalidValue(
            "growth panel needs two countries and two years".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.countries;
    let codes = country_codes(n);
    let mut sizes = Array1::from_shape_fn(n, |_| rng.gen_range(50.0..500.0));
    let (mut wealth, mut trade) = (WealthSeries::new(), TradeFlows::new());
    for k in 0..spec.years {
        let year = spec.start_year + k as Year;
        for (c, s) in codes.iter().zip(&sizes) {
            wealth.insert(c, year, *s);
        }
        if k + 1 == spec.years {
            break;
        }
        let flows = Array2::from_shape_fn((n, n), |(i, j)| {
            if i != j && rng.gen_bool(0.5) {
                rng.gen_range(0.0..0.5 / n as f64) * sizes[j]
            } else {
                0.0
            }
        });
        for ((i, j), v) in flows.indexed_iter() {
            if i != j {
                trade.insert(&codes[j], &codes[i], year, *v);
            }
        }
        let volume = flows.sum_axis(ndarray::Axis(0)) + flows.sum_axis(ndarray::Axis(1));
        sizes = Array1::from_shape_fn(n, |i| {
            sizes[i] * (spec.intercept + spec.slope * volume[i] / sizes[i])
        });
    }
    PanelData::new(wealth, trade, MilexSeries::new(), ConflictFlows::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::growth_observations;

    #[test]
    fn codes() {
        let c = country_codes(30);
        assert_eq!(&c[..3], &["AAA", "AAB", "AAC"]);
        assert_eq!(c[26], "ABA");
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn deterministic() {
        let spec = EngineSpec {
            conflict: true,
            civil_war: true,
            ..EngineSpec::default()
        };
        assert_eq!(engine_panel(&spec).unwrap(), engine_panel(&spec).unwrap());
        let other = EngineSpec {
            seed: 2,
            ..spec.clone()
        };
        assert_ne!(engine_panel(&spec).unwrap(), engine_panel(&other).unwrap());
    }

    #[test]
    fn engine_conflict_within_budget() {
        let spec = EngineSpec {
            countries: 8,
            conflict: true,
            civil_war: true,
            ..EngineSpec::default()
        };
        let p = engine_panel(&spec).unwrap();
        assert!(!p.conflicts().is_empty());
        for y in 2000..2009 {
            let sizes = p.wealth_vector(y).unwrap();
            let (_, warnings) = crate::ingestion::build_tactics(&p, y, &sizes).unwrap();
            assert!(warnings.is_empty(), "{warnings:?}");
        }
    }

    #[test]
    fn growth_line_is_exact() {
        let spec = GrowthLineSpec {
            countries: 4,
            start_year: 1990,
            years: 6,
            intercept: 1.025,
            slope: 0.201,
            seed: 3,
        };
        let p = growth_line_panel(&spec).unwrap();
        let obs = growth_observations(&p, None);
        assert_eq!(obs.len(), 20);
        for o in obs {
            assert!((o.growth - (1.025 + 0.201 * o.trade_share)).abs() < 1e-12);
        }
    }
}
