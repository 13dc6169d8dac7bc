//! The `powerflow` command line.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calibration::{
    estimate_mu, fit_beta, fit_growth_regression, fit_growth_regression_for, BetaGrid,
};
use crate::error::{Error, Result};
use crate::export::{self, EdgeRule, GraphExport};
use crate::ingestion::{build_tactics, load_episodes, load_panel, PanelPaths};
use crate::model::{Coefficient, Parameters};
use crate::simulation::{
    apply_scenario, backtest, simulate_dynamic, simulate_naive, Denominator, Scenario, Trajectory,
};
use crate::{PanelData, PowerStructure, Warning, Year};

#[derive(Debug, Parser)]
#[command(
    name = "powerflow",
    version,
    about = "Simulate national power as flows of wealth between states"
)]
pub struct Cli {
    /// Print every warning to standard error instead of a count.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a panel and its base-year tactic matrices.
    Validate(ValidateArgs),
    /// Estimate mu, lambda (growth regression) or beta.
    Calibrate(CalibrateArgs),
    /// Run the law of motion forward from a base year.
    Simulate(SimulateArgs),
    /// Compare a dynamic run with recorded wealth.
    Backtest(BacktestArgs),
    /// Apply a scenario file to the panel and simulate it.
    Scenario(ScenarioArgs),
    /// Write the combined matrix or the trade graph of one year.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding wealth.csv, trade.csv, milex.csv and conflicts.csv.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// JSON file with `beta`, `mu` and `lambda`; defaults to the published values.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<Parameters> {
        let mut p = match &self.params {
            Some(path) => Parameters::from_json_file(path)?,
            None => Parameters::published(),
        };
        if let Some(b) = self.beta {
            p.beta = Coefficient::Scalar(b);
        }
        if let Some(m) = self.mu {
            p.mu = m;
        }
        if let Some(l) = self.lambda {
            p.lambda = Coefficient::Scalar(l);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Naive,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DenominatorArg {
    Simulated,
    Actual,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Simulated => Denominator::Simulated,
            DenominatorArg::Actual => Denominator::Actual,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Defaults to the latest year with wealth data.
    #[arg(long)]
    pub base_year: Option<Year>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Calibration {
    Mu,
    Growth,
    Beta,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    pub which: Calibration,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// CSV of civil-war country-years (`country,year`), for mu.
    #[arg(long)]
    pub episodes: Option<PathBuf>,
    /// Beta grid as `lo:hi:step`.
    #[arg(long, default_value_t = BetaGrid::default())]
    pub grid: BetaGrid,
    /// Fit the growth regression for one country only.
    #[arg(long)]
    pub country: Option<String>,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub base_year: Year,
    /// Number of steps after the base year.
    #[arg(long)]
    pub years: u32,
    #[arg(long, value_enum, default_value_t = Mode::Naive)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Simulated)]
    pub denominator: DenominatorArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub base_year: Year,
    #[arg(long)]
    pub years: u32,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Simulated)]
    pub denominator: DenominatorArg,
    /// Directory for trajectory.csv and metrics.csv; metrics go to standard
    /// output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub scenario_file: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Dynamic)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Simulated)]
    pub denominator: DenominatorArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Matrix,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Primary,
    Full,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub what: ExportKind,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Defaults to the latest year with wealth data.
    #[arg(long)]
    pub base_year: Option<Year>,
    #[arg(long, value_enum, default_value_t = RuleArg::Primary)]
    pub rule: RuleArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Calibrate(a) => calibrate(a).map(|_| ExitCode::SUCCESS),
        Command::Simulate(a) => simulate(a, cli.verbose).map(|_| ExitCode::SUCCESS),
        Command::Backtest(a) => run_backtest(a).map(|_| ExitCode::SUCCESS),
        Command::Scenario(a) => scenario(a, cli.verbose).map(|_| ExitCode::SUCCESS),
        Command::Export(a) => run_export(a).map(|_| ExitCode::SUCCESS),
    }
}

fn load(data: &DataArgs) -> Result<PanelData> {
    load_panel(&PanelPaths::in_dir(&data.data))
}

fn latest_wealth_year(panel: &PanelData) -> Result<Year> {
    panel
        .wealth()
        .iter()
        .map(|e| e.1)
        .max()
        .ok_or_else(|| Error::InvalidValue("panel has no wealth data".into()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => export::write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn report_warnings<'a>(warnings: impl Iterator<Item = &'a Warning>, verbose: bool) {
    let mut count = 0;
    for w in warnings {
        if verbose {
            eprintln!("warning: {w}");
        }
        count += 1;
    }
    if !verbose && count > 0 {
        eprintln!("{count} warnings (use --verbose to list them)");
    }
}

fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    let panel = load(&a.data)?;
    let year = match a.base_year {
        Some(y) => y,
        None => latest_wealth_year(&panel)?,
    };
    let (panel, mut warnings) = panel.for_base_year(year)?;
    let sizes = panel.wealth_vector(year)?;
    let (tactics, clamps) = build_tactics(&panel, year, &sizes)?;
    warnings.extend(clamps);
    for w in &warnings {
        println!("warning: {w}");
    }
    let report = PowerStructure::new(panel.registry().clone(), sizes.into(), tactics)?.validate();
    if report.is_clean() {
        println!("OK");
        Ok(ExitCode::SUCCESS)
    } else {
        print!("{report}");
        Ok(ExitCode::from(1))
    }
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let panel = load(&a.data)?;
    let out = a.out.as_deref();
    match a.which {
        Calibration::Mu => {
            let episodes = match &a.episodes {
                Some(path) => load_episodes(path)?,
                None => Vec::new(),
            };
            let est = estimate_mu(&panel, &episodes)?;
            eprintln!(
                "mu: raw mean {}, trimmed mean {} over {} of {} records",
                export::fmt_num(est.raw_mean),
                export::fmt_num(est.trimmed_mean),
                est.trimmed_count,
                est.count()
            );
            emit(out, &export::mu_report_csv(&est))
        }
        Calibration::Growth => {
            let fit = match &a.country {
                Some(c) => fit_growth_regression_for(&panel, c)?,
                None => fit_growth_regression(&panel)?,
            };
            eprintln!(
                "growth: lambda {}, slope {}, r^2 {}",
                export::fmt_num(fit.intercept),
                export::fmt_num(fit.slope),
                export::fmt_num(fit.r_squared)
            );
            emit(out, &export::growth_fit_csv(&fit))
        }
        Calibration::Beta => {
            let params = a.params.resolve()?;
            let lambda = match params.lambda {
                Coefficient::Scalar(l) => l,
                Coefficient::PerCountry(_) => {
                    return Err(Error::InvalidParameters(
                        "beta fit needs a scalar lambda".into(),
                    ))
                }
            };
            let fit = fit_beta(&panel, lambda, params.mu, a.grid)?;
            eprintln!(
                "beta: {} (mean distance {}) on grid {}",
                export::fmt_num(fit.beta),
                export::fmt_num(fit.objective),
                fit.grid
            );
            emit(out, &export::beta_curve_csv(&fit))
        }
    }
}

fn run_mode(
    panel: &PanelData,
    base: Year,
    years: u32,
    mode: Mode,
    denominator: DenominatorArg,
    params: &Parameters,
) -> Result<Trajectory> {
    match mode {
        Mode::Naive => simulate_naive(panel, base, years as usize, params),
        Mode::Dynamic => simulate_dynamic(
            panel,
            base,
            base + years as Year,
            params,
            denominator.into(),
        ),
    }
}

fn simulate(a: &SimulateArgs, verbose: bool) -> Result<()> {
    let panel = load(&a.data)?;
    let params = a.params.resolve()?;
    let traj = run_mode(&panel, a.base_year, a.years, a.mode, a.denominator, &params)?;
    report_warnings(traj.all_warnings(), verbose);
    emit(a.out.as_deref(), &export::trajectory_csv(&traj))
}

fn run_backtest(a: &BacktestArgs) -> Result<()> {
    let panel = load(&a.data)?;
    let params = a.params.resolve()?;
    let end = a.base_year + a.years as Year;
    let report = backtest(&panel, &params, a.base_year, end, a.denominator.into())?;
    eprintln!(
        "backtest {}..{}: mean relative error {}",
        a.base_year,
        end,
        export::fmt_num(report.mean_relative_error())
    );
    let metrics = export::backtest_metrics_csv(&report);
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            export::write_text(
                &dir.join("trajectory.csv"),
                &export::backtest_series_csv(&report),
            )?;
            export::write_text(&dir.join("metrics.csv"), &metrics)
        }
        None => emit(None, &metrics),
    }
}

fn scenario(a: &ScenarioArgs, verbose: bool) -> Result<()> {
    let panel = load(&a.data)?;
    let params = a.params.resolve()?;
    let scenario = Scenario::from_json_file(&a.scenario_file)?;
    let edited = apply_scenario(&panel, &scenario)?;
    let traj = run_mode(
        &edited,
        scenario.base_year,
        scenario.horizon,
        a.mode,
        a.denominator,
        &params,
    )?;
    eprintln!(
        "scenario {}: {} edits applied",
        scenario.name,
        scenario.edits.len()
    );
    report_warnings(traj.all_warnings(), verbose);
    emit(a.out.as_deref(), &export::trajectory_csv(&traj))
}

fn run_export(a: &ExportArgs) -> Result<()> {
    let panel = load(&a.data)?;
    let year = match a.base_year {
        Some(y) => y,
        None => latest_wealth_year(&panel)?,
    };
    let text = match a.what {
        ExportKind::Matrix => {
            let params = a.params.resolve()?;
            let (panel, _) = panel.for_base_year(year)?;
            params.check_dimension(panel.registry().len())?;
            let sizes = panel.wealth_vector(year)?;
            let (tactics, _) = build_tactics(&panel, year, &sizes)?;
            export::matrix_csv(panel.registry(), &tactics.combined(&params)?)
        }
        ExportKind::Graph => {
            let rule = match a.rule {
                RuleArg::Primary => EdgeRule::PrimaryPartner,
                RuleArg::Full => EdgeRule::Full,
            };
            GraphExport::from_panel(&panel, year, rule)?.to_dot()
        }
    };
    emit(a.out.as_deref(), &text)
}
