//! Country-year panel data and its conversion into tactic matrices.
//!
//! All monetary values are billions of constant-2020 USD. Flows are keyed by
//! year first so that one year's cross-section is a contiguous range.

mod csv_io;
mod tactics;

use std::collections::{BTreeMap, BTreeSet};

pub use csv_io::{load_episodes, load_panel, write_panel, PanelPaths};
pub use tactics::{build_tactics, build_tactics_lenient, civil_war_diagonal, clamp_column};

use crate::error::{Error, Result};
use crate::registry::CountryRegistry;
use crate::warning::Warning;
use crate::Year;

/// `(country, year) -> value`. Used for wealth and military expenditure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountryYearSeries(BTreeMap<(String, Year), f64>);

pub type WealthSeries = CountryYearSeries;
pub type MilexSeries = CountryYearSeries;

impl CountryYearSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, country: &str, year: Year) -> Option<f64> {
        self.0.get(&(country.to_string(), year)).copied()
    }

    /// Returns the previous value, if any.
    pub fn insert(&mut self, country: &str, year: Year, value: f64) -> Option<f64> {
        self.0.insert((country.to_string(), year), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Year, f64)> {
        self.0.iter().map(|((c, y), v)| (c.as_str(), *y, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One country's values by year.
    pub fn series(&self, country: &str) -> BTreeMap<Year, f64> {
        self.0
            .range((country.to_string(), Year::MIN)..=(country.to_string(), Year::MAX))
            .map(|((_, y), v)| (*y, *v))
            .collect()
    }

    fn retain(&mut self, mut keep: impl FnMut(&str, Year) -> bool) {
        self.0.retain(|(c, y), _| keep(c, *y));
    }
}

impl FromIterator<(String, Year, f64)> for CountryYearSeries {
    fn from_iter<I: IntoIterator<Item = (String, Year, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(c, y, v)| ((c, y), v)).collect())
    }
}

/// Directed `(from, to, year) -> value`. Used for trade (exports of `from` to
/// `to`) and conflict (spending of `from` against `to`; `from == to` is civil
/// war).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DyadFlows(BTreeMap<(Year, String, String), f64>);

pub type TradeFlows = DyadFlows;
pub type ConflictFlows = DyadFlows;

impl DyadFlows {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, from: &str, to: &str, year: Year) -> Option<f64> {
        self.0
            .get(&(year, from.to_string(), to.to_string()))
            .copied()
    }

    pub fn insert(&mut self, from: &str, to: &str, year: Year, value: f64) -> Option<f64> {
        self.0
            .insert((year, from.to_string(), to.to_string()), value)
    }

    pub fn remove(&mut self, from: &str, to: &str, year: Year) -> Option<f64> {
        self.0.remove(&(year, from.to_string(), to.to_string()))
    }

    /// `(from, to, year, value)` in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Year, f64)> {
        self.0
            .iter()
            .map(|((y, a, b), v)| (a.as_str(), b.as_str(), *y, *v))
    }

    pub(crate) fn values_mut(&mut self) -> impl Iterator<Item = (&str, &str, Year, &mut f64)> {
        self.0
            .iter_mut()
            .map(|((y, a, b), v)| (a.as_str(), b.as_str(), *y, v))
    }

    fn years_in(
        &self,
        years: std::ops::RangeInclusive<Year>,
    ) -> impl Iterator<Item = (&str, &str, Year, f64)> {
        let (lo, hi) = (*years.start(), *years.end());
        self.0
            .range((lo, String::new(), String::new())..)
            .take_while(move |((y, ..), _)| *y <= hi)
            .map(|((y, a, b), v)| (a.as_str(), b.as_str(), *y, *v))
    }

    /// `(from, to, value)` for one year.
    pub fn year(&self, year: Year) -> impl Iterator<Item = (&str, &str, f64)> {
        self.0
            .range((year, String::new(), String::new())..(year + 1, String::new(), String::new()))
            .map(|((_, a, b), v)| (a.as_str(), b.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fills each missing direction of a dyad-year from the reported one.
    pub fn mirror_missing(&mut self) {
        let missing: Vec<_> = self
            .0
            .iter()
            .filter(|((y, a, b), _)| !self.0.contains_key(&(*y, b.clone(), a.clone())))
            .map(|((y, a, b), v)| ((*y, b.clone(), a.clone()), *v))
            .collect();
        self.0.extend(missing);
    }

    fn retain(&mut self, mut keep: impl FnMut(&str, &str, Year) -> bool) {
        self.0.retain(|(y, a, b), _| keep(a, b, *y));
    }
}

impl FromIterator<(String, String, Year, f64)> for DyadFlows {
    fn from_iter<I: IntoIterator<Item = (String, String, Year, f64)>>(iter: I) -> Self {
        Self(
            iter.into_iter()
                .map(|(a, b, y, v)| ((y, a, b), v))
                .collect(),
        )
    }
}

/// The four input datasets over one country registry.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    registry: CountryRegistry,
    pub(crate) wealth: WealthSeries,
    pub(crate) trade: TradeFlows,
    pub(crate) milex: MilexSeries,
    pub(crate) conflicts: ConflictFlows,
}

impl PanelData {
    /// Builds the registry from the union of all codes and checks every
    /// value is finite and non-negative and no trade flow is a self-loop.
    pub fn new(
        wealth: WealthSeries,
        trade: TradeFlows,
        milex: MilexSeries,
        conflicts: ConflictFlows,
    ) -> Result<Self> {
        let mut codes = BTreeSet::new();
        codes.extend(wealth.iter().map(|(c, ..)| c));
        codes.extend(milex.iter().map(|(c, ..)| c));
        for (a, b, ..) in trade.iter().chain(conflicts.iter()) {
            codes.insert(a);
            codes.insert(b);
        }
        let registry = CountryRegistry::new(codes)?;
        let panel = Self {
            registry,
            wealth,
            trade,
            milex,
            conflicts,
        };
        panel.check_values()?;
        Ok(panel)
    }

    pub(crate) fn check_values(&self) -> Result<()> {
        let bad = |v: f64| !v.is_finite() || v < 0.0;
        for (name, series) in [("wealth", &self.wealth), ("milex", &self.milex)] {
            if let Some((c, y, v)) = series.iter().find(|e| bad(e.2)) {
                return Err(Error::InvalidValue(format!("{name} {c} {y}: {v}")));
            }
        }
        for (name, flows) in [("trade", &self.trade), ("conflict", &self.conflicts)] {
            if let Some((a, b, y, v)) = flows.iter().find(|e| bad(e.3)) {
                return Err(Error::InvalidValue(format!("{name} {a}->{b} {y}: {v}")));
            }
        }
        if let Some((a, _, y, _)) = self.trade.iter().find(|(a, b, ..)| a == b) {
            return Err(Error::InvalidValue(format!(
                "trade {a}->{a} {y}: reporter equals partner"
            )));
        }
        let unknown = self
            .wealth
            .iter()
            .map(|e| e.0)
            .chain(self.milex.iter().map(|e| e.0))
            .chain(self.trade.iter().flat_map(|e| [e.0, e.1]))
            .chain(self.conflicts.iter().flat_map(|e| [e.0, e.1]))
            .find(|c| !self.registry.contains(c));
        match unknown {
            Some(c) => Err(Error::UnknownCountry(c.to_string())),
            None => Ok(()),
        }
    }

    pub fn registry(&self) -> &CountryRegistry {
        &self.registry
    }

    pub fn wealth(&self) -> &WealthSeries {
        &self.wealth
    }

    pub fn trade(&self) -> &TradeFlows {
        &self.trade
    }

    pub fn milex(&self) -> &MilexSeries {
        &self.milex
    }

    pub fn conflicts(&self) -> &ConflictFlows {
        &self.conflicts
    }

    /// Smallest and largest year appearing in any dataset.
    pub fn years(&self) -> Option<(Year, Year)> {
        let years = self
            .wealth
            .iter()
            .map(|e| e.1)
            .chain(self.milex.iter().map(|e| e.1))
            .chain(self.trade.iter().map(|e| e.2))
            .chain(self.conflicts.iter().map(|e| e.2));
        years.fold(None, |acc, y| match acc {
            None => Some((y, y)),
            Some((lo, hi)) => Some((lo.min(y), hi.max(y))),
        })
    }

    pub fn covers_year(&self, year: Year) -> bool {
        matches!(self.years(), Some((lo, hi)) if (lo..=hi).contains(&year))
    }

    /// True if any wealth figure exists for `year`.
    pub fn has_wealth_year(&self, year: Year) -> bool {
        self.wealth.iter().any(|e| e.1 == year)
    }

    /// Wealth of every registry country in `year`.
    pub fn wealth_vector(&self, year: Year) -> Result<Vec<f64>> {
        self.registry
            .iter()
            .map(|c| {
                self.wealth
                    .get(c, year)
                    .ok_or_else(|| Error::MissingWealth {
                        country: c.to_string(),
                        year,
                    })
            })
            .collect()
    }

    /// Keeps only `countries` and drops every row touching anyone else.
    pub fn subset(&self, countries: &BTreeSet<String>) -> Result<Self> {
        let mut out = self.clone();
        out.wealth.retain(|c, _| countries.contains(c));
        out.milex.retain(|c, _| countries.contains(c));
        out.trade
            .retain(|a, b, _| countries.contains(a) && countries.contains(b));
        out.conflicts
            .retain(|a, b, _| countries.contains(a) && countries.contains(b));
        out.registry = CountryRegistry::new(countries.iter().cloned())?;
        Ok(out)
    }

    /// Only `countries` and only rows dated within `years`.
    pub fn cross_section(
        &self,
        years: std::ops::RangeInclusive<Year>,
        countries: &BTreeSet<String>,
    ) -> Result<Self> {
        let keep_c = |c: &str, y: Year| countries.contains(c) && years.contains(&y);
        let keep_d = |a: &str, b: &str, y: Year| keep_c(a, y) && countries.contains(b);
        let series = |s: &CountryYearSeries| -> CountryYearSeries {
            s.iter()
                .filter(|(c, y, _)| keep_c(c, *y))
                .map(|(c, y, v)| (c.to_string(), y, v))
                .collect()
        };
        let flows = |f: &DyadFlows| -> DyadFlows {
            f.years_in(years.clone())
                .filter(|(a, b, y, _)| keep_d(a, b, *y))
                .map(|(a, b, y, v)| (a.to_string(), b.to_string(), y, v))
                .collect()
        };
        Ok(Self {
            registry: CountryRegistry::new(countries.iter().cloned())?,
            wealth: series(&self.wealth),
            trade: flows(&self.trade),
            milex: series(&self.milex),
            conflicts: flows(&self.conflicts),
        })
    }

    /// Restricts the registry to countries with a wealth figure in `year`.
    pub fn for_base_year(&self, year: Year) -> Result<(Self, Vec<Warning>)> {
        if !self.has_wealth_year(year) {
            return Err(Error::MissingYear(year));
        }
        let (keep, drop): (BTreeSet<String>, BTreeSet<String>) = self
            .registry
            .iter()
            .map(str::to_string)
            .partition(|c| self.wealth.get(c, year).is_some());
        if drop.is_empty() {
            return Ok((self.clone(), Vec::new()));
        }
        let warnings = drop
            .into_iter()
            .map(|country| Warning::CountryDropped { country, year })
            .collect();
        Ok((self.subset(&keep)?, warnings))
    }

    /// Countries touched by any conflict row in `year`, as aggressor or
    /// target.
    pub fn at_war(&self, year: Year) -> BTreeSet<&str> {
        self.conflicts
            .year(year)
            .filter(|e| e.2 > 0.0)
            .flat_map(|(a, b, _)| [a, b])
            .collect()
    }

    /// Exports plus imports of `country` in `year`.
    pub fn trade_volume(&self, country: &str, year: Year) -> f64 {
        self.trade
            .year(year)
            .filter(|(a, b, _)| *a == country || *b == country)
            .map(|e| e.2)
            .sum()
    }
}
