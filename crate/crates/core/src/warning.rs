use std::fmt;

use crate::Year;

/// Non-fatal conditions raised while turning data into tactics or while
/// simulating. They travel alongside results instead of aborting them.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A column's off-diagonal allocations summed to `total` > 1 and were
    /// rescaled to 1.
    AllocationClamped {
        country: String,
        year: Year,
        total: f64,
    },
    /// Conflict spending exceeded military expenditure and was scaled down.
    ConflictCapped {
        country: String,
        year: Year,
        requested: f64,
        cap: f64,
    },
    /// Conflict spending present without a military expenditure figure; left
    /// uncapped.
    MilexMissing { country: String, year: Year },
    /// No wealth figure in the base year, so the country was left out.
    CountryDropped { country: String, year: Year },
    /// A country with zero size still originated flows; it allocates nothing.
    ZeroSizeSender { country: String, year: Year },
    /// Ramp floored a negative size to zero.
    RampedToZero { country: String, year: Year },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::AllocationClamped {
                country,
                year,
                total,
            } => write!(
                f,
                "{year} {country}: allocations sum to {total}, rescaled to 1"
            ),
            Warning::ConflictCapped {
                country,
                year,
                requested,
                cap,
            } => write!(
                f,
                "{year} {country}: conflict share {requested} capped at military share {cap}"
            ),
            Warning::MilexMissing { country, year } => write!(
                f,
                "{year} {country}: conflict spending without military expenditure, left uncapped"
            ),
            Warning::CountryDropped { country, year } => {
                write!(f, "{year} {country}: no wealth figure, dropped")
            }
            Warning::ZeroSizeSender { country, year } => {
                write!(
                    f,
                    "{year} {country}: zero size with outgoing flows, allocates nothing"
                )
            }
            Warning::RampedToZero { country, year } => {
                write!(f, "{year} {country}: size floored at zero")
            }
        }
    }
}
