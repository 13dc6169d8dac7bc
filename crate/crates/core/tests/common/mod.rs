#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use powerflow::ingestion::write_panel;
use powerflow::synthetic::{engine_panel, growth_line_panel, EngineSpec, GrowthLineSpec};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn run_cli<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powerflow"))
        .args(args)
        .output()
        .expect("powerflow binary runs")
}

pub fn self_generated_spec() -> EngineSpec {
    EngineSpec {
        countries: 6,
        start_year: 2000,
        years: 12,
        seed: 7,
        conflict: true,
        civil_war: true,
        ..EngineSpec::default()
    }
}

pub fn growth_line_spec() -> GrowthLineSpec {
    GrowthLineSpec {
        countries: 6,
        start_year: 2000,
        years: 8,
        intercept: 1.025,
        slope: 0.201,
        seed: 11,
    }
}

/// Writes the generated panels once per test binary and returns their
/// directories.
pub fn generated() -> (PathBuf, PathBuf) {
    static DIRS: OnceLock<(PathBuf, PathBuf)> = OnceLock::new();
    DIRS.get_or_init(write_generated).clone()
}

fn write_generated() -> (PathBuf, PathBuf) {
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("powerflow-generated");
    let selfgen = root.join("self_generated");
    let growth = root.join("growth_line");
    for (dir, panel) in [
        (&selfgen, engine_panel(&self_generated_spec()).unwrap()),
        (&growth, growth_line_panel(&growth_line_spec()).unwrap()),
    ] {
        std::fs::create_dir_all(dir).unwrap();
        write_panel(&panel, dir).unwrap();
    }
    (selfgen, growth)
}

/// One CLI invocation whose standard output (and optional output file) is
/// pinned by a golden file.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: Vec<String>,
    /// File written via `--out`, compared instead of standard output.
    pub out_file: Option<PathBuf>,
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

pub fn golden_cases(scratch: &Path) -> Vec<GoldenCase> {
    let (selfgen, growth) = generated();
    let f = |n: &str| s(&fixture(n));
    let case = |name: &'static str, args: &[&str]| GoldenCase {
        name,
        args: args.iter().map(|a| a.to_string()).collect(),
        out_file: None,
    };
    let matrix_out = scratch.join("matrix.csv");
    vec![
        case(
            "validate_isolated.txt",
            &["validate", "--data", &f("isolated")],
        ),
        case("validate_clamp.txt", &["validate", "--data", &f("clamp")]),
        case(
            "simulate_isolated.csv",
            &[
                "simulate",
                "--data",
                &f("isolated"),
                "--base-year",
                "2020",
                "--years",
                "2",
            ],
        ),
        case(
            "simulate_syria_dynamic.csv",
            &[
                "simulate",
                "--data",
                &f("syria"),
                "--base-year",
                "2008",
                "--years",
                "12",
                "--mode",
                "dynamic",
            ],
        ),
        case(
            "scenario_syria_counterfactual.csv",
            &[
                "scenario",
                "--data",
                &f("syria"),
                "--scenario-file",
                &f("syria_counterfactual.json"),
            ],
        ),
        case(
            "scenario_syria_baseline.csv",
            &[
                "scenario",
                "--data",
                &f("syria"),
                "--scenario-file",
                &f("syria_baseline.json"),
            ],
        ),
        GoldenCase {
            name: "export_matrix_isolated.csv",
            args: [
                "export",
                "matrix",
                "--data",
                &f("isolated"),
                "--out",
                &s(&matrix_out),
            ]
            .iter()
            .map(|a| a.to_string())
            .collect(),
            out_file: Some(matrix_out),
        },
        case(
            "export_matrix_symmetric.csv",
            &[
                "export",
                "matrix",
                "--data",
                &f("symmetric"),
                "--params",
                &f("params.json"),
            ],
        ),
        case(
            "export_graph_symmetric.dot",
            &["export", "graph", "--data", &f("symmetric")],
        ),
        case(
            "export_graph_tie.dot",
            &[
                "export",
                "graph",
                "--data",
                &f("tie"),
                "--base-year",
                "2020",
            ],
        ),
        case(
            "calibrate_growth.csv",
            &["calibrate", "growth", "--data", &s(&growth)],
        ),
        case(
            "calibrate_mu_syria.csv",
            &[
                "calibrate",
                "mu",
                "--data",
                &f("syria"),
                "--episodes",
                &f("syria_episodes.csv"),
            ],
        ),
        case(
            "calibrate_beta_self_generated.csv",
            &[
                "calibrate",
                "beta",
                "--data",
                &s(&selfgen),
                "--grid",
                "1.3:1.5:0.001",
            ],
        ),
        case(
            "backtest_self_generated.csv",
            &[
                "backtest",
                "--data",
                &s(&selfgen),
                "--base-year",
                "2000",
                "--years",
                "11",
            ],
        ),
    ]
}

/// Runs a case and returns its exit status and the bytes being pinned.
pub fn run_case(case: &GoldenCase) -> (Option<i32>, Vec<u8>) {
    if let Some(path) = &case.out_file {
        let _ = std::fs::remove_file(path);
    }
    let out = run_cli(&case.args);
    let bytes = match &case.out_file {
        Some(path) => std::fs::read(path).unwrap_or_default(),
        None => out.stdout,
    };
    (out.status.code(), bytes)
}
