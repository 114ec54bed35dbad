//! Pipeline execution and table output.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ComposeConfig, Family, Format, Pipeline, RunConfig, TransformKind};
use crate::composition::{compose_quasi_flow, TransformSymbol};
use crate::discrepancy::{cosine_symbol_t, improperness};
use crate::error::{Error, Result};
use crate::extrapolate::loglog_slope;
use crate::fock::{evolve_annihilator, expectation, make_state, SymbolProbe};
use crate::phase_space::{ComplexAmplitude, PhasePoint};
use crate::quasi_flow::quasi_flow;

/// Environment variable that replaces `output.path`.
pub const OUTPUT_DIR_ENV: &str = "QUASIFLOW_OUTPUT_DIR";

/// Rows with ħ²·|correction| above this are flagged.
pub const WARN_DEFORMATION: f64 = 0.5;

pub const QUASIFLOW_COLUMNS: [&str; 12] = [
    "oscillator_id",
    "hbar",
    "t",
    "beta_re",
    "beta_im",
    "classical_re",
    "classical_im",
    "corr_re",
    "corr_im",
    "total_re",
    "total_im",
    "warn",
];
pub const ORACLE_EXTRA_COLUMNS: [&str; 3] = ["exact_re", "exact_im", "abs_err"];
pub const DISCREPANCY_COLUMNS: [&str; 8] = ["oscillator_id", "hbar", "t", "Q", "alpha", "c_t", "excess", "verdict"];
pub const COMPOSE_COLUMNS: [&str; 12] = [
    "oscillator_id",
    "hbar",
    "t",
    "q",
    "p",
    "classical_q",
    "classical_p",
    "corr_q",
    "corr_p",
    "total_q",
    "total_p",
    "warn",
];

/// 17 significant digits, lowercase exponent.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Flag(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format_float(*x),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) => s.clone().into(),
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Cell::Flag(b) => (*b).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text)).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: serde_json::Map<String, serde_json::Value> =
                    self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                serde_json::Value::Object(m)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows).expect("rows serialize");
        out.push(b'\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateExpectation {
    pub hbar: f64,
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub pipeline: String,
    pub file: String,
    pub rows: usize,
    pub checks: Vec<Check>,
    /// Median log-log slope of the oracle error against ħ.
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub state_expectations: Vec<StateExpectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitReport {
    pub pipelines: Vec<PipelineReport>,
}

impl ExitReport {
    pub fn all_passed(&self) -> bool {
        self.pipelines.iter().all(|p| p.checks.iter().all(|c| c.passed))
    }
}

fn warn(hbar: f64, corr: f64) -> bool {
    hbar * hbar * corr > WARN_DEFORMATION
}

fn harmonic(cfg: &RunConfig) -> bool {
    cfg.oscillator.family == Family::Harmonic
}

fn max_action(grid: &[ComplexAmplitude]) -> f64 {
    grid.iter().map(|b| b.action()).fold(0.0, f64::max)
}

fn quasiflow_table(cfg: &RunConfig, with_oracle: bool) -> Result<(Table, Vec<Check>, Option<f64>, Vec<StateExpectation>)> {
    let fm = cfg.frequency()?;
    let grid = cfg.grid();
    let times = cfg.times();
    let id = cfg.hamiltonian(1.0)?.id().to_string();
    let mut cols = QUASIFLOW_COLUMNS.to_vec();
    if with_oracle {
        cols.extend(ORACLE_EXTRA_COLUMNS);
    }
    let mut table = Table::new(&cols);
    let mut t0_err = 0.0f64;
    let mut max_corr = 0.0f64;
    let mut max_exact_err = 0.0f64;
    // errors[t][β] along the ladder
    let mut errors = vec![vec![Vec::new(); grid.len()]; times.len()];
    let mut states = Vec::new();
    for &h in &cfg.hbar_ladder {
        let osc = cfg.hamiltonian(h)?;
        let trunc = cfg.truncation(max_action(&grid), h)?;
        for (ti, &t) in times.iter().enumerate() {
            let evolved = if with_oracle { Some(evolve_annihilator(&osc, t, trunc)?) } else { None };
            for (bi, &beta) in grid.iter().enumerate() {
                let r = quasi_flow(beta, &fm, h, t);
                if t == 0.0 {
                    t0_err = t0_err.max((r.total - beta.0).norm());
                }
                max_corr = max_corr.max(r.correction.norm());
                let mut row = vec![
                    Cell::Text(id.clone()),
                    Cell::Num(h),
                    Cell::Num(t),
                    Cell::Num(beta.0.re),
                    Cell::Num(beta.0.im),
                    Cell::Num(r.classical.re),
                    Cell::Num(r.classical.im),
                    Cell::Num(r.correction.re),
                    Cell::Num(r.correction.im),
                    Cell::Num(r.total.re),
                    Cell::Num(r.total.im),
                    Cell::Flag(warn(h, r.correction.norm())),
                ];
                if let Some(op) = &evolved {
                    let exact = SymbolProbe::new(beta, h, trunc)?.symbol(op)?;
                    let err = (exact - r.total).norm();
                    max_exact_err = max_exact_err.max(err);
                    errors[ti][bi].push(err);
                    row.extend([Cell::Num(exact.re), Cell::Num(exact.im), Cell::Num(err)]);
                }
                table.rows.push(row);
            }
            if with_oracle {
                if let Some(kind) = cfg.state_kind() {
                    let state = make_state(kind, h, trunc)?;
                    let e = expectation(evolved.as_ref().expect("oracle operator"), &state)?;
                    states.push(StateExpectation { hbar: h, t, re: e.re, im: e.im });
                }
            }
        }
    }

    let mut checks = Vec::new();
    if times.contains(&0.0) {
        checks.push(Check::new("t0_identity", t0_err <= 1e-14, format!("max |total - beta| at t = 0: {t0_err:e}")));
    }
    if harmonic(cfg) {
        checks.push(Check::new("harmonic_nullity", max_corr == 0.0, format!("max |correction|: {max_corr:e}")));
        if with_oracle {
            checks.push(Check::new(
                "harmonic_exactness",
                max_exact_err <= 1e-10,
                format!("max |exact - total|: {max_exact_err:e}"),
            ));
        }
    }
    let slope = if with_oracle { median_slope(&cfg.hbar_ladder, &errors) } else { None };
    Ok((table, checks, slope, states))
}

/// Median over (t, β) of the log-log error slope, skipping points whose
/// error is at round-off level.
fn median_slope(ladder: &[f64], errors: &[Vec<Vec<f64>>]) -> Option<f64> {
    if ladder.len() < 2 {
        return None;
    }
    let mut slopes: Vec<f64> = errors
        .iter()
        .flatten()
        .filter(|e| e.iter().all(|x| *x > 1e-13))
        .filter_map(|e| loglog_slope(ladder, e).ok())
        .collect();
    if slopes.is_empty() {
        return None;
    }
    slopes.sort_by(f64::total_cmp);
    let n = slopes.len();
    Some(if n % 2 == 1 { slopes[n / 2] } else { 0.5 * (slopes[n / 2 - 1] + slopes[n / 2]) })
}

fn discrepancy_table(cfg: &RunConfig) -> Result<(Table, Vec<Check>)> {
    let d = cfg.discrepancy.as_ref().ok_or_else(|| Error::Validation("discrepancy: missing".into()))?;
    let fm = cfg.frequency()?;
    let id = cfg.hamiltonian(1.0)?.id().to_string();
    let times = cfg.times();
    let mut table = Table::new(&DISCREPANCY_COLUMNS);
    let mut t0_excess = 0.0f64;
    let mut max_excess = 0.0f64;
    for &h in &cfg.hbar_ladder {
        for &t in &times {
            for &q in &d.q {
                let c = cosine_symbol_t(q, d.alpha, &fm, h, t);
                let imp = improperness(c, 1.0)?;
                if t == 0.0 {
                    t0_excess = t0_excess.max(imp.excess);
                }
                max_excess = max_excess.max(imp.excess);
                table.rows.push(vec![
                    Cell::Text(id.clone()),
                    Cell::Num(h),
                    Cell::Num(t),
                    Cell::Num(q),
                    Cell::Num(d.alpha),
                    Cell::Num(c),
                    Cell::Num(imp.excess),
                    Cell::Text(imp.verdict().into()),
                ]);
            }
        }
    }
    let mut checks = Vec::new();
    if times.contains(&0.0) {
        checks.push(Check::new("t0_identity", t0_excess == 0.0, format!("max excess at t = 0: {t0_excess:e}")));
    }
    if harmonic(cfg) {
        checks.push(Check::new("harmonic_nullity", max_excess == 0.0, format!("max excess: {max_excess:e}")));
    }
    Ok((table, checks))
}

/// The transform selected by a compose section.
pub fn transform_from_config(c: &ComposeConfig) -> Result<TransformSymbol> {
    match c.transform {
        TransformKind::Identity => Ok(TransformSymbol::identity()),
        TransformKind::Rotation => Ok(TransformSymbol::rotation(c.theta.unwrap_or(0.0))),
        TransformKind::CubicPhase => {
            TransformSymbol::cubic_phase(c.eps.unwrap_or(0.0), c.eta.unwrap_or(0.0))
        }
    }
}

fn compose_table(cfg: &RunConfig) -> Result<(Table, Vec<Check>)> {
    let c = cfg.compose.as_ref().ok_or_else(|| Error::Validation("compose: missing".into()))?;
    let z_map = transform_from_config(c)?;
    let fm = cfg.frequency()?;
    let id = cfg.hamiltonian(1.0)?.id().to_string();
    let times = cfg.times();
    let points: Vec<PhasePoint> = cfg.grid().iter().map(|b| b.to_phase_point()).collect();
    z_map.check_canonical(&points)?;
    let mut table = Table::new(&COMPOSE_COLUMNS);
    let mut t0_err = 0.0f64;
    let mut max_corr = 0.0f64;
    for &h in &cfg.hbar_ladder {
        for &t in &times {
            for &z in &points {
                let r = compose_quasi_flow(&z_map, &fm, h, t, z)?;
                let corr = r.correction[0].hypot(r.correction[1]);
                if t == 0.0 {
                    t0_err = t0_err.max((r.total.q - z.q).hypot(r.total.p - z.p));
                }
                max_corr = max_corr.max(corr);
                table.rows.push(vec![
                    Cell::Text(id.clone()),
                    Cell::Num(h),
                    Cell::Num(t),
                    Cell::Num(z.q),
                    Cell::Num(z.p),
                    Cell::Num(r.classical.q),
                    Cell::Num(r.classical.p),
                    Cell::Num(r.correction[0]),
                    Cell::Num(r.correction[1]),
                    Cell::Num(r.total.q),
                    Cell::Num(r.total.p),
                    Cell::Flag(warn(h, corr)),
                ]);
            }
        }
    }
    let mut checks = Vec::new();
    if times.contains(&0.0) {
        checks.push(Check::new("t0_identity", t0_err <= 1e-10, format!("max |z_0 - z|: {t0_err:e}")));
    }
    if harmonic(cfg) && c.transform != TransformKind::CubicPhase {
        checks.push(Check::new("harmonic_nullity", max_corr <= 1e-12, format!("max |correction|: {max_corr:e}")));
    }
    Ok((table, checks))
}

/// Resolves the output directory: the environment override if set,
/// otherwise `output.path` relative to the config file's directory.
pub fn output_dir(cfg: &RunConfig, config_path: &Path) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    if cfg.output.path.is_absolute() {
        cfg.output.path.clone()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(&cfg.output.path)
    }
}

/// Computes every requested pipeline; nothing is written.
pub fn execute(cfg: &RunConfig) -> Result<Vec<(PipelineReport, Table)>> {
    let ext = match cfg.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut out = Vec::new();
    for p in &cfg.pipelines {
        let (table, checks, slope, states) = match p {
            Pipeline::Quasiflow => quasiflow_table(cfg, false)?,
            Pipeline::OracleCompare => quasiflow_table(cfg, true)?,
            Pipeline::Discrepancy => {
                let (t, c) = discrepancy_table(cfg)?;
                (t, c, None, Vec::new())
            }
            Pipeline::Compose => {
                let (t, c) = compose_table(cfg)?;
                (t, c, None, Vec::new())
            }
        };
        let report = PipelineReport {
            pipeline: p.name().into(),
            file: format!("{}.{ext}", p.name()),
            rows: table.rows.len(),
            checks,
            slope,
            state_expectations: states,
        };
        out.push((report, table));
    }
    Ok(out)
}

/// Runs the pipelines and writes one file per pipeline plus `report.json`
/// into the resolved output directory.
pub fn run(cfg: &RunConfig, config_path: &Path) -> Result<ExitReport> {
    let findings = cfg.validate();
    if !findings.is_empty() {
        return Err(Error::Validation(findings.join("; ")));
    }
    let results = execute(cfg)?;
    let dir = output_dir(cfg, config_path);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut reports = Vec::new();
    for (report, table) in results {
        let bytes = match cfg.output.format {
            Format::Csv => table.to_csv()?,
            Format::Json => table.to_json(),
        };
        std::fs::write(dir.join(&report.file), bytes).map_err(io)?;
        reports.push(report);
    }
    let exit = ExitReport { pipelines: reports };
    let mut json = serde_json::to_vec_pretty(&exit).expect("report serializes");
    json.push(b'\n');
    std::fs::write(dir.join("report.json"), json).map_err(io)?;
    Ok(exit)
}
