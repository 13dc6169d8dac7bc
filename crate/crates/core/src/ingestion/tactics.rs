use crate::error::{Error, Result};
use crate::model::TacticMatrix;
use crate::warning::Warning;
use crate::{PanelData, Year};

/// Allocations above this total are rescaled. The slack keeps a second pass
/// over an already rescaled column from rescaling again.
const OVERFLOW_SLACK: f64 = 1e-12;

/// Rescales a column's off-diagonal shares to sum to 1 when they exceed it.
/// Returns the original total if rescaling happened.
pub fn clamp_column(shares: &mut [f64]) -> Option<f64> {
    let total: f64 = shares.iter().sum();
    if total > 1.0 + OVERFLOW_SLACK {
        shares.iter_mut().for_each(|s| *s /= total);
        Some(total)
    } else {
        None
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ZeroSize {
    Reject,
    Isolate,
}

/// Turns one year's absolute flows into allocation shares of `sizes`.
///
/// Column `j` gets `trade(j -> i) / sizes[j]` in T+ and
/// `conflict(j -> i) / sizes[j]` in T-. Conflict spending including civil war
/// is capped at `milex[j] / sizes[j]`; off-diagonal totals above 1 are
/// rescaled to 1; the remainder is retained. Civil war (`j -> j`) goes to
/// `self_destruction`.
///
/// A sender without a positive size is an error.
pub fn build_tactics(
    panel: &PanelData,
    year: Year,
    sizes: &[f64],
) -> Result<(TacticMatrix, Vec<Warning>)> {
    build(panel, year, sizes, ZeroSize::Reject)
}

/// As [`build_tactics`], but a sender with zero size keeps everything it has
/// (nothing) and a warning is recorded instead of an error.
pub fn build_tactics_lenient(
    panel: &PanelData,
    year: Year,
    sizes: &[f64],
) -> Result<(TacticMatrix, Vec<Warning>)> {
    build(panel, year, sizes, ZeroSize::Isolate)
}

/// Share of each country's size spent on civil war in `year`, after the
/// military-expenditure cap.
pub fn civil_war_diagonal(panel: &PanelData, year: Year, sizes: &[f64]) -> Result<Vec<f64>> {
    Ok(build_tactics(panel, year, sizes)?
        .0
        .self_destruction
        .to_vec())
}

fn build(
    panel: &PanelData,
    year: Year,
    sizes: &[f64],
    zero: ZeroSize,
) -> Result<(TacticMatrix, Vec<Warning>)> {
    let registry = panel.registry();
    let n = registry.len();
    if sizes.len() != n {
        return Err(Error::DimensionMismatch {
            what: "sizes",
            expected: n,
            found: sizes.len(),
        });
    }
    if !panel.covers_year(year) {
        return Err(Error::MissingYear(year));
    }

    let mut t = TacticMatrix::isolated(n);
    let mut sends = vec![false; n];
    for (from, to, v) in panel.trade().year(year) {
        let (j, i) = (registry.require(from)?, registry.require(to)?);
        t.constructive[[i, j]] += v;
        sends[j] |= v > 0.0;
    }
    for (from, to, v) in panel.conflicts().year(year) {
        let (j, i) = (registry.require(from)?, registry.require(to)?);
        if i == j {
            t.self_destruction[j] += v;
        } else {
            t.destructive[[i, j]] += v;
        }
        sends[j] |= v > 0.0;
    }

    let mut warnings = Vec::new();
    for j in 0..n {
        let country = registry.code(j);
        let size = sizes[j];
        if !(size > 0.0 && size.is_finite()) {
            if sends[j] && zero == ZeroSize::Reject {
                return Err(Error::MissingSize {
                    country: country.to_string(),
                    year,
                });
            }
            if sends[j] {
                warnings.push(Warning::ZeroSizeSender {
                    country: country.to_string(),
                    year,
                });
            }
            t.constructive.column_mut(j).fill(0.0);
            t.destructive.column_mut(j).fill(0.0);
            t.self_destruction[j] = 0.0;
            t.retained[j] = 1.0;
            continue;
        }
        if !sends[j] {
            continue;
        }
        t.constructive.column_mut(j).mapv_inplace(|v| v / size);
        t.destructive.column_mut(j).mapv_inplace(|v| v / size);
        t.self_destruction[j] /= size;

        let conflict = t.destructive.column(j).sum() + t.self_destruction[j];
        if conflict > 0.0 {
            match panel.milex().get(country, year) {
                Some(milex) => {
                    let cap = milex / size;
                    if conflict > cap {
                        let f = cap / conflict;
                        t.destructive.column_mut(j).mapv_inplace(|v| v * f);
                        t.self_destruction[j] *= f;
                        warnings.push(Warning::ConflictCapped {
                            country: country.to_string(),
                            year,
                            requested: conflict,
                            cap,
                        });
                    }
                }
                None => warnings.push(Warning::MilexMissing {
                    country: country.to_string(),
                    year,
                }),
            }
        }

        // a country cannot spend more than all of itself on civil war
        if t.self_destruction[j] > 1.0 + OVERFLOW_SLACK {
            warnings.push(Warning::AllocationClamped {
                country: country.to_string(),
                year,
                total: t.self_destruction[j],
            });
            t.self_destruction[j] = 1.0;
        }

        let mut shares: Vec<f64> = t
            .constructive
            .column(j)
            .iter()
            .chain(t.destructive.column(j).iter())
            .copied()
            .collect();
        if let Some(total) = clamp_column(&mut shares) {
            for i in 0..n {
                t.constructive[[i, j]] = shares[i];
                t.destructive[[i, j]] = shares[n + i];
            }
            warnings.push(Warning::AllocationClamped {
                country: country.to_string(),
                year,
                total,
            });
        }
        let used: f64 = t.constructive.column(j).sum() + t.destructive.column(j).sum();
        t.retained[j] = (1.0 - used).max(0.0);
    }
    Ok((t, warnings))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::ingestion::{ConflictFlows, MilexSeries, TradeFlows, WealthSeries};
    use crate::model::{validate, PowerStructure};

    /// `JJJ` sends to `III`; both have wealth 100 in 2000.
    fn panel(
        trade: &[(&str, &str, f64)],
        conflicts: &[(&str, &str, f64)],
        milex: &[(&str, f64)],
    ) -> PanelData {
        let wealth: WealthSeries = [
            ("III".to_string(), 2000, 100.0),
            ("JJJ".to_string(), 2000, 100.0),
        ]
        .into_iter()
        .collect();
        let trade: TradeFlows = trade
            .iter()
            .map(|(a, b, v)| (a.to_string(), b.to_string(), 2000, *v))
            .collect();
        let conflicts: ConflictFlows = conflicts
            .iter()
            .map(|(a, b, v)| (a.to_string(), b.to_string(), 2000, *v))
            .collect();
        let milex: MilexSeries = milex
            .iter()
            .map(|(c, v)| (c.to_string(), 2000, *v))
            .collect();
        PanelData::new(wealth, trade, milex, conflicts).unwrap()
    }

    const I: usize = 0;
    const J: usize = 1;

    #[test]
    fn trade_and_conflict_shares() {
        let p = panel(&[("JJJ", "III", 5.0)], &[("JJJ", "III", 1.0)], &[]);
        let (t, w) = build_tactics(&p, 2000, &[100.0, 100.0]).unwrap();
        assert!((t.constructive[[I, J]] - 0.05).abs() < 1e-15);
        assert!((t.destructive[[I, J]] - 0.01).abs() < 1e-15);
        assert!((t.retained[J] - 0.94).abs() < 1e-15);
        assert_eq!(t.retained[I], 1.0);
        assert_eq!(
            w,
            vec![Warning::MilexMissing {
                country: "JJJ".into(),
                year: 2000
            }]
        );
    }

    #[test]
    fn isolated_column() {
        let p = panel(&[], &[], &[]);
        let (t, w) = build_tactics(&p, 2000, &[100.0, 100.0]).unwrap();
        assert_eq!(t, TacticMatrix::isolated(2));
        assert!(w.is_empty());
    }

    #[test]
    fn overflow_rescaled_with_warning() {
        let p = panel(&[("JJJ", "III", 110.0)], &[], &[]);
        let (t, w) = build_tactics(&p, 2000, &[100.0, 100.0]).unwrap();
        // direct summation of the rescaled column
        let sum = t.constructive.column(J).sum() + t.destructive.column(J).sum() + t.retained[J];
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((t.constructive[[I, J]] - 1.1 * 100.0 / 110.0).abs() < 1e-12);
        assert_eq!(t.retained[J], 0.0);
        assert!(
            matches!(w.as_slice(), [Warning::AllocationClamped { total, .. }] if (total - 1.1).abs() < 1e-12)
        );
    }

    #[test]
    fn conflict_capped_by_milex() {
        let p = panel(
            &[],
            &[("JJJ", "III", 4.0), ("JJJ", "JJJ", 4.0)],
            &[("JJJ", 2.0)],
        );
        let (t, w) = build_tactics(&p, 2000, &[100.0, 100.0]).unwrap();
        assert!((t.destructive[[I, J]] - 0.01).abs() < 1e-15);
        assert!((t.self_destruction[J] - 0.01).abs() < 1e-15);
        assert!(matches!(w.as_slice(), [Warning::ConflictCapped { .. }]));
        // under the cap nothing changes
        let p = panel(&[], &[("JJJ", "III", 1.0)], &[("JJJ", 2.0)]);
        let (t, w) = build_tactics(&p, 2000, &[100.0, 100.0]).unwrap();
        assert!((t.destructive[[I, J]] - 0.01).abs() < 1e-15);
        assert!(w.is_empty());
    }

    #[test]
    fn civil_war_fraction() {
        let p = panel(&[], &[("JJJ", "JJJ", 2.0)], &[]);
        assert_eq!(
            civil_war_diagonal(&p, 2000, &[100.0, 100.0]).unwrap(),
            vec![0.0, 0.02]
        );
        let p = panel(&[("III", "JJJ", 1.0)], &[], &[]);
        assert_eq!(
            civil_war_diagonal(&p, 2000, &[100.0, 100.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn civil_war_step() {
        let p = panel(&[], &[("JJJ", "JJJ", 1.0)], &[]);
        let sizes = vec![100.0, 100.0];
        let (t, _) = build_tactics(&p, 2000, &sizes).unwrap();
        // the civil-war charge does not come out of the retained share
        assert_eq!(t.retained[J], 1.0);
        let ps = PowerStructure::new(p.registry().clone(), sizes.into(), t).unwrap();
        let next = crate::model::step(&ps, &crate::Parameters::published()).unwrap();
        assert!((next[J] - 71.5).abs() < 1e-12);
    }

    #[test]
    fn zero_size_sender() {
        let p = panel(&[("JJJ", "III", 5.0)], &[], &[]);
        assert!(matches!(
            build_tactics(&p, 2000, &[100.0, 0.0]),
            Err(Error::MissingSize { country, year: 2000 }) if country == "JJJ"
        ));
        // receivers may have zero size
        assert!(build_tactics(&p, 2000, &[0.0, 100.0]).is_ok());
        let (t, w) = build_tactics_lenient(&p, 2000, &[100.0, 0.0]).unwrap();
        assert_eq!(t, TacticMatrix::isolated(2));
        assert!(matches!(w.as_slice(), [Warning::ZeroSizeSender { .. }]));
    }

    #[test]
    fn missing_year_and_dimensions() {
        let p = panel(&[], &[], &[]);
        assert!(matches!(
            build_tactics(&p, 1990, &[1.0, 1.0]),
            Err(Error::MissingYear(1990))
        ));
        assert!(matches!(
            build_tactics(&p, 2000, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn arb_panel() -> impl Strategy<Value = (PanelData, Vec<f64>)> {
        let codes = ["AAA", "BBB", "CCC", "DDD"];
        (
            prop::collection::vec(1.0f64..1000.0, 4),
            prop::collection::vec(0.0f64..400.0, 16),
            prop::collection::vec(0.0f64..20.0, 16),
            prop::collection::vec(0.0f64..50.0, 4),
        )
            .prop_map(move |(sizes, trade, conflict, milex)| {
                let wealth: WealthSeries = codes
                    .iter()
                    .zip(&sizes)
                    .map(|(c, s)| (c.to_string(), 2000, *s))
                    .collect();
                let mut t = TradeFlows::new();
                let mut k = ConflictFlows::new();
                for (a, ca) in codes.iter().enumerate() {
                    for (b, cb) in codes.iter().enumerate() {
                        if a != b && trade[4 * a + b] > 100.0 {
                            t.insert(ca, cb, 2000, trade[4 * a + b] - 100.0);
                        }
                        if conflict[4 * a + b] > 15.0 {
                            k.insert(ca, cb, 2000, conflict[4 * a + b] - 15.0);
                        }
                    }
                }
                let m: MilexSeries = codes
                    .iter()
                    .zip(&milex)
                    .map(|(c, v)| (c.to_string(), 2000, *v))
                    .collect();
                (PanelData::new(wealth, t, m, k).unwrap(), sizes)
            })
    }

    proptest! {
        #[test]
        fn output_always_validates((p, sizes) in arb_panel()) {
            let (t, _) = build_tactics(&p, 2000, &sizes).unwrap();
            let ps = PowerStructure::new(p.registry().clone(), sizes.into(), t).unwrap();
            let report = validate(&ps);
            prop_assert!(report.is_clean(), "{}", report);
        }

        #[test]
        fn flows_round_trip_when_unclamped((p, sizes) in arb_panel()) {
            let (t, w) = build_tactics(&p, 2000, &sizes).unwrap();
            let reg = p.registry();
            for (a, b, v) in p.trade().year(2000) {
                let (j, i) = (reg.index_of(a).unwrap(), reg.index_of(b).unwrap());
                let clamped = w.iter().any(|w| matches!(w, Warning::AllocationClamped { country, .. } if country == a));
                if !clamped {
                    let back = t.constructive[[i, j]] * sizes[j];
                    prop_assert!((back - v).abs() <= 1e-9 * v.abs().max(1e-300));
                }
            }
        }

        #[test]
        fn clamp_idempotent_and_proportional(mut shares in prop::collection::vec(0.0f64..1.0, 1..12)) {
            let before = shares.clone();
            clamp_column(&mut shares);
            let once = shares.clone();
            prop_assert_eq!(clamp_column(&mut shares), None);
            prop_assert_eq!(&shares, &once);
            let total: f64 = before.iter().sum();
            let f = if total > 1.0 + OVERFLOW_SLACK { 1.0 / total } else { 1.0 };
            for (a, b) in before.iter().zip(&once) {
                prop_assert!((a * f - b).abs() <= 1e-15);
            }
        }
    }
}
