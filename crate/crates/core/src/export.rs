//! CSV and DOT writers for trajectories, calibration reports, combined
//! matrices and trade graphs.
//!
//! Numbers are written in their shortest round-trip form so that files are
//! byte-stable and parse back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::calibration::{BetaFit, GrowthFit, MuEstimate};
use crate::error::{Error, Result};
use crate::registry::CountryRegistry;
use crate::simulation::{BacktestReport, Trajectory};
use crate::{PanelData, Year};

/// Shortest decimal that parses back to the same `f64`. Negative zero prints
/// as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `year,country,size`, one row per country per year.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("year,country,size\n");
    for (k, year) in traj.years.iter().enumerate() {
        for (j, code) in traj.registry.iter().enumerate() {
            let _ = writeln!(out, "{year},{code},{}", fmt_num(traj.sizes[[k, j]]));
        }
    }
    out
}

/// Dense matrix with a header row and column of country codes.
pub fn matrix_csv(registry: &CountryRegistry, m: &Array2<f64>) -> String {
    let mut out = String::new();
    for code in registry.iter() {
        out.push(',');
        out.push_str(code);
    }
    out.push('\n');
    for (code, row) in registry.iter().zip(m.rows()) {
        out.push_str(code);
        for v in row {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses what [`matrix_csv`] writes.
pub fn read_matrix_csv(path: &Path) -> Result<(CountryRegistry, Array2<f64>)> {
    let parse_err = |line: u64, reason: String| Error::Parse {
        file: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => parse_err(1, format!("{other:?}")),
        })?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "empty file".into())),
    };
    let codes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let registry = CountryRegistry::new(codes.iter().cloned())?;
    if registry.codes() != codes.as_slice() {
        return Err(parse_err(
            1,
            "country codes must be unique and sorted".into(),
        ));
    }
    let n = codes.len();
    let mut m = Array2::zeros((n, n));
    let mut rows = 0;
    for (i, record) in records.enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if i >= n || record.len() != n + 1 || record[0] != codes[i] {
            return Err(parse_err(line, "row does not match header".into()));
        }
        for (j, field) in record.iter().skip(1).enumerate() {
            m[[i, j]] = field
                .parse()
                .map_err(|_| parse_err(line, format!("invalid number `{field}`")))?;
        }
        rows = i + 1;
    }
    if rows != n {
        return Err(parse_err(
            rows as u64 + 2,
            format!("expected {n} rows, found {rows}"),
        ));
    }
    Ok((registry, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeRule {
    /// One edge per trading country, to the partner with the largest
    /// exports plus imports; ties go to the smaller code.
    #[default]
    PrimaryPartner,
    /// Every positive directed trade flow.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphExport {
    pub nodes: Vec<(String, f64)>,
    pub edges: Vec<Edge>,
    pub rule: EdgeRule,
}

impl GraphExport {
    /// Nodes sized by `year` wealth (0 where missing), edges from `year`
    /// trade.
    pub fn from_panel(panel: &PanelData, year: Year, rule: EdgeRule) -> Result<Self> {
        if !panel.covers_year(year) {
            return Err(Error::MissingYear(year));
        }
        let registry = panel.registry();
        let nodes = registry
            .iter()
            .map(|c| (c.to_string(), panel.wealth().get(c, year).unwrap_or(0.0)))
            .collect();
        let trade = panel.trade();
        let edges = match rule {
            EdgeRule::Full => trade
                .year(year)
                .filter(|(_, _, v)| *v > 0.0)
                .map(|(a, b, v)| Edge {
                    source: a.to_string(),
                    target: b.to_string(),
                    weight: v,
                })
                .collect(),
            EdgeRule::PrimaryPartner => {
                let n = registry.len();
                let mut volume = Array2::<f64>::zeros((n, n));
                for (a, b, v) in trade.year(year) {
                    let (i, j) = (registry.require(a)?, registry.require(b)?);
                    volume[[i, j]] += v;
                    volume[[j, i]] += v;
                }
                let mut edges = Vec::new();
                for (i, row) in volume.rows().into_iter().enumerate() {
                    let mut best: Option<(usize, f64)> = None;
                    for (j, &v) in row.iter().enumerate() {
                        // strict comparison keeps the first, i.e. smallest, code on ties
                        if j != i && v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                            best = Some((j, v));
                        }
                    }
                    if let Some((j, v)) = best {
                        edges.push(Edge {
                            source: registry.code(i).to_string(),
                            target: registry.code(j).to_string(),
                            weight: v,
                        });
                    }
                }
                edges
            }
        };
        Ok(Self { nodes, edges, rule })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph powerflow {\n");
        for (code, size) in &self.nodes {
            let _ = writeln!(out, "  \"{code}\" [size={}];", fmt_num(*size));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [weight={}];",
                e.source,
                e.target,
                fmt_num(e.weight)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// `country,year,expected,actual,loss,x,mu`.
pub fn mu_report_csv(est: &MuEstimate) -> String {
    let mut out = String::from("country,year,expected,actual,loss,x,mu\n");
    for r in &est.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.country,
            r.year,
            fmt_num(r.expected),
            fmt_num(r.actual),
            fmt_num(r.loss),
            fmt_num(r.expenditure),
            fmt_num(r.mu)
        );
    }
    out
}

/// `intercept,slope,n,rss`.
pub fn growth_fit_csv(fit: &GrowthFit) -> String {
    format!(
        "intercept,slope,n,rss\n{},{},{},{}\n",
        fmt_num(fit.intercept),
        fmt_num(fit.slope),
        fit.n(),
        fmt_num(fit.rss)
    )
}

/// `beta,objective`, one row per grid candidate.
pub fn beta_curve_csv(fit: &BetaFit) -> String {
    let mut out = String::from("beta,objective\n");
    for (b, obj) in &fit.curve {
        let _ = writeln!(out, "{},{}", fmt_num(*b), fmt_num(*obj));
    }
    out
}

/// `metric,key,value`: per-year distances, per-country relative errors and
/// their mean.
pub fn backtest_metrics_csv(report: &BacktestReport) -> String {
    let mut out = String::from("metric,key,value\n");
    for (year, d) in report.years.iter().zip(&report.distances) {
        let _ = writeln!(out, "distance,{year},{}", fmt_num(*d));
    }
    for (code, e) in report.registry.iter().zip(&report.relative_errors) {
        let _ = writeln!(out, "relative_error,{code},{}", fmt_num(*e));
    }
    let _ = writeln!(
        out,
        "mean_relative_error,all,{}",
        fmt_num(report.mean_relative_error())
    );
    out
}

/// `year,country,predicted,actual`.
pub fn backtest_series_csv(report: &BacktestReport) -> String {
    let mut out = String::from("year,country,predicted,actual\n");
    for (k, year) in report.years.iter().enumerate() {
        for (j, code) in report.registry.iter().enumerate() {
            let _ = writeln!(
                out,
                "{year},{code},{},{}",
                fmt_num(report.predicted[[k, j]]),
                fmt_num(report.actual[[k, j]])
            );
        }
    }
    out
}
