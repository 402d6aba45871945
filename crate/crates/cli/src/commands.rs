//! The four subcommands. Each returns `Ok` or a [`CliError`] carrying its exit
//! code; printing is left to the caller except for the command's own stdout.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;

use pss_core::metrics::metrics_row;
use pss_core::stabilizers::{fpss_system, fsmc_system};
use pss_core::{
    compare_report, simulate, FuzzySystem, MetricsReport, ScenarioConfig, SimulationTrace,
    StabilizerKind,
};

use crate::config::{config_template, parse_scenario_for};
use crate::output::{generator_path, write_atomic, write_trace};
use crate::report::{report_csv, report_text};
use crate::CliError;

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })
}

fn load(path: &Path, controller: Option<StabilizerKind>) -> Result<ScenarioConfig, CliError> {
    Ok(parse_scenario_for(&read_config(path)?, controller)?)
}

fn run_traces(cfg: &ScenarioConfig) -> Result<Vec<SimulationTrace>, CliError> {
    simulate(cfg).map_err(CliError::Simulation)
}

/// Simulates one scenario and writes one CSV per generator. Returns the
/// summary printed to stdout.
pub fn run(
    config: &Path,
    controller: Option<StabilizerKind>,
    output: &Path,
) -> Result<String, CliError> {
    let cfg = load(config, controller)?;
    let traces = run_traces(&cfg)?;
    let mut summary = String::new();
    for (j, tr) in traces.iter().enumerate() {
        let path = generator_path(output, j, traces.len());
        write_trace(&path, tr)?;
        let row = metrics_row(cfg.controller, tr).map_err(CliError::Metrics)?;
        let _ = writeln!(
            summary,
            "generator {j} [{}] -> {}\n  settling time: {}\n  peak overshoot: {}\n  ISE: {}\n  ITAE: {}\n  chattering index: {}\n  max |S|: {}",
            cfg.controller,
            path.display(),
            match row.settling_time.is_settled() {
                true => format!("{} s", row.settling_time.seconds()),
                false => "not settled".to_string(),
            },
            row.peak_overshoot.map_or_else(|| "-".to_string(), |v| v.to_string()),
            row.ise,
            row.itae,
            row.chattering_index,
            row.max_abs_s,
        );
    }
    Ok(summary)
}

pub struct CompareOutcome {
    pub reports: Vec<MetricsReport>,
    pub text: String,
}

/// Runs the scenario once per controller kind, in parallel, and writes the
/// traces plus `report.csv` and `report.txt` into `out_dir`.
pub fn compare(
    config: &Path,
    out_dir: &Path,
    assert_ordering: bool,
) -> Result<CompareOutcome, CliError> {
    let text = read_config(config)?;
    // Every kind must be runnable before anything is simulated.
    let configs: Vec<ScenarioConfig> = StabilizerKind::ALL
        .iter()
        .map(|&k| parse_scenario_for(&text, Some(k)))
        .collect::<Result<_, _>>()?;
    let base = &configs[0];

    let runs: Vec<Result<Vec<SimulationTrace>, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || run_traces(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(out_dir).map_err(|source| {
        CliError::Output(crate::output::OutputError::Write {
            path: out_dir.to_path_buf(),
            source,
        })
    })?;
    let count = base.generators.len();
    let mut reports = Vec::with_capacity(count);
    for j in 0..count {
        let per_kind: Vec<(StabilizerKind, &SimulationTrace)> = StabilizerKind::ALL
            .iter()
            .zip(&runs)
            .map(|(&k, traces)| (k, &traces[j]))
            .collect();
        reports.push(compare_report(&per_kind, base.last_clearance()).map_err(CliError::Metrics)?);
    }
    for (kind, traces) in StabilizerKind::ALL.iter().zip(&runs) {
        for (j, tr) in traces.iter().enumerate() {
            write_trace(&generator_path(&trace_path(out_dir, *kind), j, count), tr)?;
        }
    }
    let text = report_text(&reports);
    write_atomic(&out_dir.join("report.csv"), report_csv(&reports).as_bytes())?;
    write_atomic(&out_dir.join("report.txt"), text.as_bytes())?;

    if assert_ordering {
        let violations: Vec<String> = reports
            .iter()
            .flat_map(|r| r.violations.iter().cloned())
            .collect();
        if !violations.is_empty() {
            return Err(CliError::Ordering {
                report: text,
                violations,
            });
        }
    }
    Ok(CompareOutcome { reports, text })
}

pub fn trace_path(dir: &Path, kind: StabilizerKind) -> PathBuf {
    dir.join(format!("{kind}.csv"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RuleTable {
    Fpss,
    Fsmc,
}

/// Labeled grid (fuzzy PSS) or rule list (fuzzy reaching gain).
pub fn dump_rules(which: RuleTable) -> String {
    match which {
        RuleTable::Fpss => fpss_grid(&fpss_system().expect("built-in rule base")),
        RuleTable::Fsmc => fsmc_list(&fsmc_system().expect("built-in rule base")),
    }
}

fn labels(sys: &FuzzySystem, input: usize) -> Vec<&str> {
    sys.inputs()[input]
        .terms()
        .iter()
        .map(|(l, _)| l.as_str())
        .collect()
}

fn fpss_grid(sys: &FuzzySystem) -> String {
    let rows = labels(sys, 0);
    let cols = labels(sys, 1);
    let mut out = String::from("rows: speed deviation, columns: acceleration\n");
    out.push_str(&format!("{:<4}", ""));
    for c in &cols {
        out.push_str(&format!("{c:>4}"));
    }
    out.push('\n');
    for r in &rows {
        out.push_str(&format!("{r:<4}"));
        for c in &cols {
            let cell = sys.rules().lookup(&[r, c]).unwrap_or("-");
            out.push_str(&format!("{cell:>4}"));
        }
        out.push('\n');
    }
    out
}

fn fsmc_list(sys: &FuzzySystem) -> String {
    let mut out = String::from("|S| -> eta\n");
    for l in labels(sys, 0) {
        let cons = sys.rules().lookup(&[l]).unwrap_or("-");
        out.push_str(&format!("{l} → {cons}\n"));
    }
    out
}

pub fn dump_config_template() -> String {
    config_template()
}

pub fn write_stdout(text: &str) -> io::Result<()> {
    use io::Write;
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()
}
