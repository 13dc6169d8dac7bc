use std::fmt;

use super::PowerStructure;

/// Tolerance on column sums.
pub const COLUMN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Constructive,
    Destructive,
    Retained,
    SelfDestruction,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Constructive => "T+",
            Component::Destructive => "T-",
            Component::Retained => "T0",
            Component::SelfDestruction => "self-destruction",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// `excess` is `sum - 1`; negative when the column falls short.
    ColumnSum {
        column: usize,
        sum: f64,
        excess: f64,
    },
    NonzeroDiagonal {
        component: Component,
        index: usize,
        value: f64,
    },
    EntryOutOfRange {
        component: Component,
        row: usize,
        column: usize,
        value: f64,
    },
    NegativeSize {
        index: usize,
        value: f64,
    },
    NonFiniteSize {
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension {
                what,
                expected,
                found,
            } => write!(f, "{what} has length {found}, expected {expected}"),
            Violation::ColumnSum {
                column,
                sum,
                excess,
            } => {
                write!(f, "column {column} sums to {sum} (excess {excess})")
            }
            Violation::NonzeroDiagonal {
                component,
                index,
                value,
            } => write!(f, "nonzero diagonal in {component} at {index}: {value}"),
            Violation::EntryOutOfRange {
                component,
                row,
                column,
                value,
            } => write!(f, "{component}[{row}][{column}] = {value} outside [0, 1]"),
            Violation::NegativeSize { index, value } => {
                write!(f, "size {index} is negative: {value}")
            }
            Violation::NonFiniteSize { index } => write!(f, "size {index} is not finite"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// Collects every invariant violation of `ps`. Diagonal entries of T+ and T-
/// are reported on their own and left out of the column sums.
pub fn validate(ps: &PowerStructure) -> ValidationReport {
    let mut out = Vec::new();
    let n = ps.registry.len();
    let t = &ps.tactics;
    let dims = [
        ("sizes", ps.sizes.len()),
        ("T+ rows", t.constructive.nrows()),
        ("T+ columns", t.constructive.ncols()),
        ("T- rows", t.destructive.nrows()),
        ("T- columns", t.destructive.ncols()),
        ("T0", t.retained.len()),
        ("self-destruction", t.self_destruction.len()),
    ];
    for (what, found) in dims {
        if found != n {
            out.push(Violation::Dimension {
                what,
                expected: n,
                found,
            });
        }
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }

    for (index, &value) in ps.sizes.iter().enumerate() {
        if !value.is_finite() {
            out.push(Violation::NonFiniteSize { index });
        } else if value < 0.0 {
            out.push(Violation::NegativeSize { index, value });
        }
    }

    for j in 0..n {
        let mut sum = 0.0;
        for (component, m) in [
            (Component::Constructive, &t.constructive),
            (Component::Destructive, &t.destructive),
        ] {
            for i in 0..n {
                let value = m[[i, j]];
                if !in_unit(value) {
                    out.push(Violation::EntryOutOfRange {
                        component,
                        row: i,
                        column: j,
                        value,
                    });
                }
                if i == j {
                    if value != 0.0 {
                        out.push(Violation::NonzeroDiagonal {
                            component,
                            index: j,
                            value,
                        });
                    }
                } else {
                    sum += value;
                }
            }
        }
        for (component, value) in [
            (Component::Retained, t.retained[j]),
            (Component::SelfDestruction, t.self_destruction[j]),
        ] {
            if !in_unit(value) {
                out.push(Violation::EntryOutOfRange {
                    component,
                    row: j,
                    column: j,
                    value,
                });
            }
        }
        sum += t.retained[j];
        let excess = sum - 1.0;
        if excess.is_nan() || excess.abs() > COLUMN_TOLERANCE {
            out.push(Violation::ColumnSum {
                column: j,
                sum,
                excess,
            });
        }
    }
    ValidationReport { violations: out }
}
