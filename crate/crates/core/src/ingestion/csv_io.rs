use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use super::{DyadFlows, MilexSeries, PanelData, TradeFlows, WealthSeries};
use crate::calibration::Episode;
use crate::error::{Error, Result};
use crate::export::fmt_num;
use crate::registry::is_valid_code;
use crate::Year;

pub const WEALTH_COLUMNS: [&str; 3] = ["country", "year", "wealth"];
pub const TRADE_COLUMNS: [&str; 4] = ["reporter", "partner", "year", "flow"];
pub const MILEX_COLUMNS: [&str; 3] = ["country", "year", "expenditure"];
pub const CONFLICT_COLUMNS: [&str; 4] = ["aggressor", "target", "year", "expenditure"];
pub const EPISODE_COLUMNS: [&str; 2] = ["country", "year"];

/// Locations of the four panel files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelPaths {
    pub wealth: PathBuf,
    pub trade: PathBuf,
    pub milex: PathBuf,
    pub conflicts: PathBuf,
}

impl PanelPaths {
    /// `wealth.csv`, `trade.csv`, `milex.csv` and `conflicts.csv` in `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            wealth: dir.join("wealth.csv"),
            trade: dir.join("trade.csv"),
            milex: dir.join("milex.csv"),
            conflicts: dir.join("conflicts.csv"),
        }
    }
}

struct Table<'a> {
    file: &'a Path,
}

impl Table<'_> {
    fn parse_err(&self, line: u64, reason: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.to_path_buf(),
            line,
            reason: reason.into(),
        }
    }

    /// Rows reordered to `columns`, each tagged with its line number.
    fn read(&self, columns: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(self.file)
            .map_err(|e| self.csv_err(e))?;
        let headers = reader.headers().map_err(|e| self.csv_err(e))?.clone();
        let mut position = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if !columns.contains(&h) {
                return Err(Error::UnknownColumn {
                    file: self.file.to_path_buf(),
                    column: h.to_string(),
                });
            }
            position.insert(h, i);
        }
        let order = columns
            .iter()
            .map(|c| {
                position
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::MissingColumn {
                        file: self.file.to_path_buf(),
                        column: c.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| self.csv_err(e))?;
            let line = record.position().map_or(0, |p| p.line());
            let fields = order.iter().map(|&i| record[i].to_string()).collect();
            rows.push((line, fields));
        }
        Ok(rows)
    }

    fn csv_err(&self, e: csv::Error) -> Error {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: self.file.to_path_buf(),
                source,
            },
            kind => self.parse_err(line, format!("{kind:?}")),
        }
    }

    fn code(&self, line: u64, s: &str) -> Result<String> {
        if is_valid_code(s) {
            Ok(s.to_string())
        } else {
            Err(self.parse_err(line, format!("invalid country code `{s}`")))
        }
    }

    fn year(&self, line: u64, s: &str) -> Result<Year> {
        s.parse()
            .map_err(|_| self.parse_err(line, format!("invalid year `{s}`")))
    }

    fn amount(&self, line: u64, s: &str) -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| self.parse_err(line, format!("invalid number `{s}`")))?;
        if !v.is_finite() {
            return Err(self.parse_err(line, format!("non-finite number `{s}`")));
        }
        if v < 0.0 {
            return Err(Error::NegativeValue {
                file: self.file.to_path_buf(),
                line,
                value: v,
            });
        }
        Ok(v)
    }

    fn duplicate(&self, line: u64, key: String) -> Error {
        Error::DuplicateKey {
            file: self.file.to_path_buf(),
            line,
            key,
        }
    }

    fn country_years(&self, columns: &[&str; 3]) -> Result<WealthSeries> {
        let mut out = WealthSeries::new();
        for (line, f) in self.read(columns)? {
            let country = self.code(line, &f[0])?;
            let year = self.year(line, &f[1])?;
            let value = self.amount(line, &f[2])?;
            if out.insert(&country, year, value).is_some() {
                return Err(self.duplicate(line, format!("{country},{year}")));
            }
        }
        Ok(out)
    }

    fn dyads(&self, columns: &[&str; 4], allow_self: bool) -> Result<DyadFlows> {
        let mut out = DyadFlows::new();
        for (line, f) in self.read(columns)? {
            let from = self.code(line, &f[0])?;
            let to = self.code(line, &f[1])?;
            if !allow_self && from == to {
                return Err(Error::ReporterEqualsPartner {
                    file: self.file.to_path_buf(),
                    line,
                    code: from,
                });
            }
            let year = self.year(line, &f[2])?;
            let value = self.amount(line, &f[3])?;
            if out.insert(&from, &to, year, value).is_some() {
                return Err(self.duplicate(line, format!("{from},{to},{year}")));
            }
        }
        Ok(out)
    }
}

/// Civil-war years as `country,year` rows, grouped into one episode per
/// country.
pub fn load_episodes(path: &Path) -> Result<Vec<Episode>> {
    let table = Table { file: path };
    let mut years: BTreeMap<String, BTreeSet<Year>> = BTreeMap::new();
    for (line, f) in table.read(&EPISODE_COLUMNS)? {
        let country = table.code(line, &f[0])?;
        let year = table.year(line, &f[1])?;
        if !years.entry(country.clone()).or_default().insert(year) {
            return Err(table.duplicate(line, format!("{country},{year}")));
        }
    }
    Ok(years.into_iter().map(|(c, y)| Episode::new(c, y)).collect())
}

/// Reads and validates the four panel files.
///
/// Trade dyad-years reported in one direction only get the other direction
/// mirrored from that report.
pub fn load_panel(paths: &PanelPaths) -> Result<PanelData> {
    let wealth = Table {
        file: &paths.wealth,
    }
    .country_years(&WEALTH_COLUMNS)?;
    let mut trade = Table { file: &paths.trade }.dyads(&TRADE_COLUMNS, false)?;
    let milex = Table { file: &paths.milex }.country_years(&MILEX_COLUMNS)?;
    let conflicts = Table {
        file: &paths.conflicts,
    }
    .dyads(&CONFLICT_COLUMNS, true)?;
    trade.mirror_missing();
    PanelData::new(wealth, trade, milex, conflicts)
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        kind => io(std::io::Error::other(format!("{kind:?}"))),
    })?;
    let to_io = |e: csv::Error| io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(io)
}

/// Writes the panel as the four CSV files in `dir`.
pub fn write_panel(panel: &PanelData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = PanelPaths::in_dir(dir);
    let country_rows = |s: &MilexSeries| -> Vec<Vec<String>> {
        s.iter()
            .map(|(c, y, v)| vec![c.to_string(), y.to_string(), fmt_num(v)])
            .collect()
    };
    let dyad_rows = |s: &TradeFlows| -> Vec<Vec<String>> {
        let mut rows: Vec<_> = s.iter().collect();
        rows.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        rows.into_iter()
            .map(|(a, b, y, v)| vec![a.to_string(), b.to_string(), y.to_string(), fmt_num(v)])
            .collect()
    };
    write_csv(
        &paths.wealth,
        &WEALTH_COLUMNS,
        country_rows(panel.wealth()).into_iter(),
    )?;
    write_csv(
        &paths.trade,
        &TRADE_COLUMNS,
        dyad_rows(panel.trade()).into_iter(),
    )?;
    write_csv(
        &paths.milex,
        &MILEX_COLUMNS,
        country_rows(panel.milex()).into_iter(),
    )?;
    write_csv(
        &paths.conflicts,
        &CONFLICT_COLUMNS,
        dyad_rows(panel.conflicts()).into_iter(),
    )
}
