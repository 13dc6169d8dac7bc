use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::TradeFlows;
use crate::{PanelData, Year};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearSpan {
    pub from: Year,
    pub to: Year,
}

impl YearSpan {
    pub fn new(from: Year, to: Year) -> Self {
        Self { from, to }
    }

    pub fn years(&self) -> RangeInclusive<Year> {
        self.from..=self.to
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TradeScope {
    /// Both directions between two countries.
    Dyad { a: String, b: String },
    /// Every flow into or out of one country.
    CountryAll { country: String },
    /// Every flow between a member of `a` and a member of `b`.
    CoalitionPair { a: Vec<String>, b: Vec<String> },
}

impl TradeScope {
    fn matches(&self, from: &str, to: &str) -> bool {
        match self {
            TradeScope::Dyad { a, b } => (from == a && to == b) || (from == b && to == a),
            TradeScope::CountryAll { country } => from == country || to == country,
            TradeScope::CoalitionPair { a, b } => {
                let (in_a, in_b) = (
                    |c: &str| a.iter().any(|m| m == c),
                    |c: &str| b.iter().any(|m| m == c),
                );
                (in_a(from) && in_b(to)) || (in_b(from) && in_a(to))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    #[default]
    Constructive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Edit {
    /// Sets the annual conflict spending of `aggressor` against `target`
    /// for every year of the span.
    SetConflict {
        aggressor: String,
        target: String,
        years: YearSpan,
        expenditure: f64,
    },
    RemoveConflict {
        aggressor: String,
        target: String,
        years: YearSpan,
    },
    ScaleTrade {
        scope: TradeScope,
        years: YearSpan,
        factor: f64,
    },
    /// Each member moves `fraction` of its exports to the other coalition
    /// onto its own coalition, pro rata to existing intra-coalition exports
    /// (evenly if there are none). Applies to every year unless a span is
    /// given.
    ReallocateTrade {
        coalition_a: Vec<String>,
        coalition_b: Vec<String>,
        fraction: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        years: Option<YearSpan>,
    },
    /// Aid from `donor` to `recipient`, added to the constructive channel.
    Transfer {
        donor: String,
        recipient: String,
        year: Year,
        amount: f64,
        #[serde(default)]
        channel: Channel,
    },
}

/// A named, ordered list of edits applied to panel data before simulating
/// `horizon` years from `base_year`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub base_year: Year,
    pub horizon: u32,
    pub edits: Vec<Edit>,
}

impl Scenario {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn end_year(&self) -> Year {
        self.base_year + self.horizon as Year
    }

    fn check_span(&self, span: &YearSpan) -> Result<()> {
        if span.from > span.to {
            return Err(Error::InvalidScenario(format!(
                "span {}..{} is reversed",
                span.from, span.to
            )));
        }
        let horizon = self.base_year..=self.end_year();
        if !horizon.contains(&span.from) || !horizon.contains(&span.to) {
            return Err(Error::InvalidScenario(format!(
                "span {}..{} outside horizon {}..{}",
                span.from,
                span.to,
                self.base_year,
                self.end_year()
            )));
        }
        Ok(())
    }

    /// Checks value ranges, spans, country codes and coalition overlap.
    pub fn validate(&self, panel: &PanelData) -> Result<()> {
        let known = |c: &String| panel.registry().require(c).map(|_| ());
        let non_negative = |what: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidScenario(format!(
                    "{what} must be non-negative, got {v}"
                )))
            }
        };
        let disjoint = |a: &[String], b: &[String]| {
            if a.is_empty() || b.is_empty() {
                return Err(Error::InvalidScenario("empty coalition".into()));
            }
            let a: BTreeSet<&String> = a.iter().collect();
            match b.iter().find(|c| a.contains(c)) {
                Some(c) => Err(Error::OverlappingCoalitions(c.clone())),
                None => Ok(()),
            }
        };
        for edit in &self.edits {
            match edit {
                Edit::SetConflict {
                    aggressor,
                    target,
                    years,
                    expenditure,
                } => {
                    known(aggressor)?;
                    known(target)?;
                    self.check_span(years)?;
                    non_negative("expenditure", *expenditure)?;
                }
                Edit::RemoveConflict {
                    aggressor,
                    target,
                    years,
                } => {
                    known(aggressor)?;
                    known(target)?;
                    self.check_span(years)?;
                }
                Edit::ScaleTrade {
                    scope,
                    years,
                    factor,
                } => {
                    match scope {
                        TradeScope::Dyad { a, b } => {
                            known(a)?;
                            known(b)?;
                        }
                        TradeScope::CountryAll { country } => known(country)?,
                        TradeScope::CoalitionPair { a, b } => {
                            a.iter().chain(b).try_for_each(known)?;
                            disjoint(a, b)?;
                        }
                    }
                    self.check_span(years)?;
                    non_negative("factor", *factor)?;
                }
                Edit::ReallocateTrade {
                    coalition_a,
                    coalition_b,
                    fraction,
                    years,
                } => {
                    coalition_a.iter().chain(coalition_b).try_for_each(known)?;
                    disjoint(coalition_a, coalition_b)?;
                    if !(0.0..=1.0).contains(fraction) {
                        return Err(Error::InvalidScenario(format!(
                            "fraction must be in [0, 1], got {fraction}"
                        )));
                    }
                    if let Some(span) = years {
                        self.check_span(span)?;
                    }
                }
                Edit::Transfer {
                    donor,
                    recipient,
                    year,
                    amount,
                    ..
                } => {
                    known(donor)?;
                    known(recipient)?;
                    if donor == recipient {
                        return Err(Error::InvalidScenario(format!(
                            "transfer from {donor} to itself"
                        )));
                    }
                    self.check_span(&YearSpan::new(*year, *year))?;
                    non_negative("amount", *amount)?;
                }
            }
        }
        Ok(())
    }
}

fn reallocate(trade: &mut TradeFlows, own: &[String], other: &[String], fraction: f64, year: Year) {
    for member in own {
        let partners: Vec<&String> = own.iter().filter(|p| *p != member).collect();
        if partners.is_empty() {
            continue;
        }
        let outgoing: Vec<(&String, f64)> = other
            .iter()
            .filter_map(|z| trade.get(member, z, year).map(|v| (z, v)))
            .collect();
        let moved = fraction * outgoing.iter().map(|e| e.1).sum::<f64>();
        if moved == 0.0 {
            continue;
        }
        for (z, v) in outgoing {
            trade.insert(member, z, year, v - fraction * v);
        }
        let weights: Vec<f64> = partners
            .iter()
            .map(|p| trade.get(member, p, year).unwrap_or(0.0))
            .collect();
        let total: f64 = weights.iter().sum();
        for (p, w) in partners.iter().zip(weights) {
            let share = if total > 0.0 {
                w / total
            } else {
                1.0 / partners.len() as f64
            };
            trade.insert(member, p, year, w + moved * share);
        }
    }
}

/// Applies the scenario's edits in order to a copy of `panel`.
pub fn apply_scenario(panel: &PanelData, scenario: &Scenario) -> Result<PanelData> {
    scenario.validate(panel)?;
    let mut out = panel.clone();
    for edit in &scenario.edits {
        match edit {
            Edit::SetConflict {
                aggressor,
                target,
                years,
                expenditure,
            } => {
                for y in years.years() {
                    out.conflicts.insert(aggressor, target, y, *expenditure);
                }
            }
            Edit::RemoveConflict {
                aggressor,
                target,
                years,
            } => {
                for y in years.years() {
                    out.conflicts.remove(aggressor, target, y);
                }
            }
            Edit::ScaleTrade {
                scope,
                years,
                factor,
            } => {
                for (from, to, y, v) in out.trade.values_mut() {
                    if years.years().contains(&y) && scope.matches(from, to) {
                        *v *= factor;
                    }
                }
            }
            Edit::ReallocateTrade {
                coalition_a,
                coalition_b,
                fraction,
                years,
            } => {
                let span = match years {
                    Some(s) => s.years(),
                    None => match out.years() {
                        Some((lo, hi)) => lo..=hi,
                        None => continue,
                    },
                };
                for y in span {
                    reallocate(&mut out.trade, coalition_a, coalition_b, *fraction, y);
                    reallocate(&mut out.trade, coalition_b, coalition_a, *fraction, y);
                }
            }
            Edit::Transfer {
                donor,
                recipient,
                year,
                amount,
                channel: Channel::Constructive,
            } => {
                let current = out.trade.get(donor, recipient, *year).unwrap_or(0.0);
                out.trade.insert(donor, recipient, *year, current + amount);
            }
        }
    }
    out.check_values()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::ingestion::{ConflictFlows, MilexSeries, WealthSeries};

    fn panel() -> PanelData {
        let mut w = WealthSeries::new();
        let mut t = TradeFlows::new();
        let mut k = ConflictFlows::new();
        for y in 2010..=2020 {
            for c in ["RUS", "SYR", "UKR", "XXA", "YYB", "ZZC"] {
                w.insert(c, y, 100.0);
            }
            k.insert("SYR", "SYR", y, 2.0);
            t.insert("RUS", "UKR", y, 4.0);
            t.insert("UKR", "RUS", y, 3.0);
            t.insert("RUS", "SYR", y, 1.0);
            t.insert("SYR", "UKR", y, 2.0);
        }
        t.insert("XXA", "ZZC", 2020, 10.0);
        t.insert("XXA", "YYB", 2020, 5.0);
        PanelData::new(w, t, MilexSeries::new(), k).unwrap()
    }

    fn scenario(edits: Vec<Edit>) -> Scenario {
        Scenario {
            name: "test".into(),
            base_year: 2010,
            horizon: 10,
            edits,
        }
    }

    #[test]
    fn remove_conflict_span() {
        let s = scenario(vec![Edit::RemoveConflict {
            aggressor: "SYR".into(),
            target: "SYR".into(),
            years: YearSpan::new(2011, 2020),
        }]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert!(out
            .conflicts()
            .iter()
            .all(|(a, _, y, _)| a != "SYR" || y < 2011));
        assert_eq!(out.conflicts().get("SYR", "SYR", 2010), Some(2.0));
    }

    #[test]
    fn scale_country_all() {
        let s = scenario(vec![Edit::ScaleTrade {
            scope: TradeScope::CountryAll {
                country: "RUS".into(),
            },
            years: YearSpan::new(2020, 2020),
            factor: 0.8,
        }]);
        let before = panel();
        let out = apply_scenario(&before, &s).unwrap();
        for (a, b, y, v) in before.trade().iter() {
            let expected = if y == 2020 && (a == "RUS" || b == "RUS") {
                v * 0.8
            } else {
                v
            };
            assert_eq!(out.trade().get(a, b, y), Some(expected));
        }
    }

    #[test]
    fn scale_dyad_and_coalition_pair() {
        let s = scenario(vec![
            Edit::ScaleTrade {
                scope: TradeScope::Dyad {
                    a: "UKR".into(),
                    b: "RUS".into(),
                },
                years: YearSpan::new(2015, 2015),
                factor: 0.5,
            },
            Edit::ScaleTrade {
                scope: TradeScope::CoalitionPair {
                    a: vec!["SYR".into()],
                    b: vec!["UKR".into(), "RUS".into()],
                },
                years: YearSpan::new(2016, 2016),
                factor: 0.0,
            },
        ]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert_eq!(out.trade().get("RUS", "UKR", 2015), Some(2.0));
        assert_eq!(out.trade().get("UKR", "RUS", 2015), Some(1.5));
        assert_eq!(out.trade().get("RUS", "SYR", 2015), Some(1.0));
        assert_eq!(out.trade().get("RUS", "SYR", 2016), Some(0.0));
        assert_eq!(out.trade().get("SYR", "UKR", 2016), Some(0.0));
        assert_eq!(out.trade().get("RUS", "UKR", 2016), Some(4.0));
    }

    #[test]
    fn reallocation_example() {
        let s = scenario(vec![Edit::ReallocateTrade {
            coalition_a: vec!["XXA".into(), "YYB".into()],
            coalition_b: vec!["ZZC".into()],
            fraction: 0.1,
            years: None,
        }]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert!((out.trade().get("XXA", "ZZC", 2020).unwrap() - 9.0).abs() < 1e-12);
        assert!((out.trade().get("XXA", "YYB", 2020).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn reallocation_splits_evenly_without_partners() {
        let s = scenario(vec![Edit::ReallocateTrade {
            coalition_a: vec!["RUS".into(), "XXA".into(), "YYB".into()],
            coalition_b: vec!["UKR".into()],
            fraction: 0.5,
            years: Some(YearSpan::new(2012, 2012)),
        }]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert_eq!(out.trade().get("RUS", "UKR", 2012), Some(2.0));
        assert_eq!(out.trade().get("RUS", "XXA", 2012), Some(1.0));
        assert_eq!(out.trade().get("RUS", "YYB", 2012), Some(1.0));
        // UKR has no coalition partner to receive its trade
        assert_eq!(out.trade().get("UKR", "RUS", 2012), Some(3.0));
        assert_eq!(out.trade().get("RUS", "UKR", 2013), Some(4.0));
    }

    #[test]
    fn transfer_adds_constructive_flow() {
        let s = scenario(vec![
            Edit::Transfer {
                donor: "RUS".into(),
                recipient: "UKR".into(),
                year: 2020,
                amount: 20.0,
                channel: Channel::Constructive,
            },
            Edit::Transfer {
                donor: "ZZC".into(),
                recipient: "UKR".into(),
                year: 2020,
                amount: 1.5,
                channel: Channel::Constructive,
            },
        ]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert_eq!(out.trade().get("RUS", "UKR", 2020), Some(24.0));
        assert_eq!(out.trade().get("ZZC", "UKR", 2020), Some(1.5));
    }

    #[test]
    fn edits_apply_in_order() {
        let s = scenario(vec![
            Edit::SetConflict {
                aggressor: "RUS".into(),
                target: "UKR".into(),
                years: YearSpan::new(2020, 2020),
                expenditure: 100.0,
            },
            Edit::SetConflict {
                aggressor: "RUS".into(),
                target: "UKR".into(),
                years: YearSpan::new(2020, 2020),
                expenditure: 50.0,
            },
        ]);
        let out = apply_scenario(&panel(), &s).unwrap();
        assert_eq!(out.conflicts().get("RUS", "UKR", 2020), Some(50.0));
    }

    #[test]
    fn validation_errors() {
        let p = panel();
        let bad = [
            Edit::RemoveConflict {
                aggressor: "QQQ".into(),
                target: "SYR".into(),
                years: YearSpan::new(2011, 2012),
            },
            Edit::RemoveConflict {
                aggressor: "SYR".into(),
                target: "SYR".into(),
                years: YearSpan::new(2012, 2011),
            },
            Edit::RemoveConflict {
                aggressor: "SYR".into(),
                target: "SYR".into(),
                years: YearSpan::new(2011, 2031),
            },
            Edit::ScaleTrade {
                scope: TradeScope::CountryAll {
                    country: "RUS".into(),
                },
                years: YearSpan::new(2011, 2011),
                factor: -1.0,
            },
            Edit::ReallocateTrade {
                coalition_a: vec!["RUS".into()],
                coalition_b: vec!["UKR".into()],
                fraction: 1.5,
                years: None,
            },
            Edit::Transfer {
                donor: "RUS".into(),
                recipient: "RUS".into(),
                year: 2011,
                amount: 1.0,
                channel: Channel::Constructive,
            },
        ];
        for edit in bad {
            assert!(
                apply_scenario(&p, &scenario(vec![edit.clone()])).is_err(),
                "{edit:?}"
            );
        }
        let overlap = Edit::ReallocateTrade {
            coalition_a: vec!["RUS".into(), "SYR".into()],
            coalition_b: vec!["SYR".into()],
            fraction: 0.1,
            years: None,
        };
        assert!(matches!(
            apply_scenario(&p, &scenario(vec![overlap])),
            Err(Error::OverlappingCoalitions(c)) if c == "SYR"
        ));
    }

    #[test]
    fn json_format() {
        let text = r#"{
            "name": "war", "base_year": 2020, "horizon": 1,
            "edits": [
                {"kind": "set_conflict", "aggressor": "RUS", "target": "UKR", "years": {"from": 2020, "to": 2020}, "expenditure": 100},
                {"kind": "remove_conflict", "aggressor": "SYR", "target": "SYR", "years": {"from": 2020, "to": 2020}},
                {"kind": "scale_trade", "scope": {"type": "country_all", "country": "RUS"}, "years": {"from": 2020, "to": 2020}, "factor": 0.8},
                {"kind": "scale_trade", "scope": {"type": "dyad", "a": "RUS", "b": "UKR"}, "years": {"from": 2020, "to": 2020}, "factor": 0.8},
                {"kind": "scale_trade", "scope": {"type": "coalition_pair", "a": ["RUS"], "b": ["UKR"]}, "years": {"from": 2020, "to": 2020}, "factor": 0.8},
                {"kind": "reallocate_trade", "coalition_a": ["RUS"], "coalition_b": ["UKR"], "fraction": 0.1},
                {"kind": "transfer", "donor": "XXA", "recipient": "UKR", "year": 2020, "amount": 20, "channel": "constructive"}
            ]
        }"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        assert_eq!(s.edits.len(), 7);
        assert_eq!(s.end_year(), 2021);
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Edit>(r#"{"kind":"transfer","donor":"A","recipient":"B","year":1,"amount":1,"channel":"destructive"}"#).is_err());
        assert!(serde_json::from_str::<Edit>(r#"{"kind":"remove_conflict","aggressor":"A","target":"B","years":{"from":1,"to":1},"extra":1}"#).is_err());
    }

    fn outflows(p: &PanelData, year: Year) -> std::collections::BTreeMap<String, f64> {
        let mut m = std::collections::BTreeMap::new();
        for (a, _, v) in p.trade().year(year) {
            *m.entry(a.to_string()).or_insert(0.0) += v;
        }
        m
    }

    proptest! {
        #[test]
        fn reallocation_conserves_outflow(
            flows in prop::collection::vec(0.0f64..50.0, 30),
            fraction in 0.0f64..=1.0,
        ) {
            let codes = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF"];
            let mut t = TradeFlows::new();
            let mut k = 0;
            for a in codes {
                for b in codes {
                    if a != b {
                        if flows[k] > 10.0 {
                            t.insert(a, b, 2000, flows[k] - 10.0);
                        }
                        k += 1;
                    }
                }
            }
            let w: WealthSeries = codes.iter().map(|c| (c.to_string(), 2000, 100.0)).collect();
            let p = PanelData::new(w, t, MilexSeries::new(), ConflictFlows::new()).unwrap();
            let s = Scenario {
                name: "r".into(),
                base_year: 2000,
                horizon: 1,
                edits: vec![Edit::ReallocateTrade {
                    coalition_a: vec!["AAA".into(), "BBB".into(), "CCC".into()],
                    coalition_b: vec!["DDD".into(), "EEE".into()],
                    fraction,
                    years: None,
                }],
            };
            let before = p.clone();
            let out = apply_scenario(&p, &s).unwrap();
            prop_assert_eq!(&p, &before);
            let (o0, o1) = (outflows(&before, 2000), outflows(&out, 2000));
            for (c, v) in &o0 {
                prop_assert!((o1[c] - v).abs() <= 1e-9 * v.max(1.0));
            }
        }

        #[test]
        fn remove_then_set_restores(values in prop::collection::vec(0.0f64..10.0, 1..6)) {
            let mut k = ConflictFlows::new();
            let w: WealthSeries = [("AAA".to_string(), 2000, 1.0), ("BBB".to_string(), 2000, 1.0)].into_iter().collect();
            for (i, v) in values.iter().enumerate() {
                k.insert("AAA", "BBB", 2000 + i as Year, *v);
            }
            let p = PanelData::new(w, TradeFlows::new(), MilexSeries::new(), k).unwrap();
            let last = 2000 + values.len() as Year - 1;
            let mut edits = vec![Edit::RemoveConflict { aggressor: "AAA".into(), target: "BBB".into(), years: YearSpan::new(2000, last) }];
            for (i, v) in values.iter().enumerate() {
                let y = 2000 + i as Year;
                edits.push(Edit::SetConflict { aggressor: "AAA".into(), target: "BBB".into(), years: YearSpan::new(y, y), expenditure: *v });
            }
            let s = Scenario { name: "rt".into(), base_year: 2000, horizon: values.len() as u32, edits };
            prop_assert_eq!(apply_scenario(&p, &s).unwrap(), p);
        }
    }
}
