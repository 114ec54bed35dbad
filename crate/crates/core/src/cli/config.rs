//! Run configuration: TOML, unknown keys rejected.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockTruncation, StateKind};
use crate::phase_space::{frequency_from_hamiltonian, ComplexAmplitude, FrequencyModel, HamiltonianModel};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Harmonic,
    Kerr,
    CubicAction,
    CustomCoefficients,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OscillatorParams {
    /// harmonic frequency, f(B) = omega·B
    pub omega: Option<f64>,
    /// Kerr strength, f(B) = chi·B²/2
    pub chi: Option<f64>,
    /// f(B) = kappa·B³/3
    pub kappa: Option<f64>,
    /// f(B) = Σ c_k B^k
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub family: Family,
    #[serde(default)]
    pub parameters: OscillatorParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum StateKindName {
    Coherent,
    Fock,
    Squeezed,
}

/// Optional probe state; its exact ⟨b̂_t⟩ is reported by oracle-compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: StateKindName,
    /// coherent amplitude [re, im]
    pub beta: Option<[f64; 2]>,
    /// Fock level
    pub n: Option<usize>,
    /// squeezing magnitude and angle
    pub r: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TimeRange {
    pub start: f64,
    pub stop: f64,
    /// number of samples, endpoints included
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum Times {
    List(Vec<f64>),
    Range(TimeRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    /// [min, max, count]
    pub q: (f64, f64, usize),
    pub p: (f64, f64, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RandomGrid {
    pub count: usize,
    /// points are drawn uniformly in the disc |β|² ≤ b_max
    pub b_max: f64,
}

/// Exactly one of `beta`, `mesh`, `random`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    /// explicit points [re, im]
    pub beta: Option<Vec<[f64; 2]>>,
    /// (q, p) mesh, β = (q + ip)/√2
    pub mesh: Option<Mesh>,
    pub random: Option<RandomGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Quasiflow,
    OracleCompare,
    Discrepancy,
    Compose,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Quasiflow => "quasiflow",
            Pipeline::OracleCompare => "oracle-compare",
            Pipeline::Discrepancy => "discrepancy",
            Pipeline::Compose => "compose",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// output directory
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyConfig {
    /// cos(alpha·P̂) is the probed observable
    pub alpha: f64,
    /// positions Q on the p = 0 axis
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Identity,
    Rotation,
    CubicPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ComposeConfig {
    pub transform: TransformKind,
    /// rotation angle
    pub theta: Option<f64>,
    /// cubic-phase strengths: Z = (q − eta(p + eps q²)², p + eps q²)
    pub eps: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// basis size; sized from the grid when absent
    pub n_max: Option<usize>,
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub oscillator: OscillatorConfig,
    pub hbar_ladder: Vec<f64>,
    pub state: Option<StateConfig>,
    pub times: Times,
    #[serde(default)]
    pub phase_grid: PhaseGrid,
    pub pipelines: Vec<Pipeline>,
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    pub discrepancy: Option<DiscrepancyConfig>,
    pub compose: Option<ComposeConfig>,
    pub oracle: Option<OracleConfig>,
}

pub const MAX_GRID_POINTS: usize = 100_000;
pub const MAX_TIMES: usize = 100_000;

/// Parses TOML text; syntax errors and unknown keys become a single finding.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::Validation(e.message().to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn config_schema() -> String {
    serde_json::to_string_pretty(&schemars::schema_for!(RunConfig)).expect("schema serializes")
}

fn finite(findings: &mut Vec<String>, field: &str, v: f64) -> bool {
    if !v.is_finite() {
        findings.push(format!("{field}: must be finite"));
        return false;
    }
    true
}

impl RunConfig {
    /// Structural and semantic findings; empty when the config is runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut f = Vec::new();
        self.check_oscillator(&mut f);

        if self.hbar_ladder.is_empty() {
            f.push("hbar_ladder: empty".into());
        }
        for &h in &self.hbar_ladder {
            if finite(&mut f, "hbar_ladder", h) && h <= 0.0 {
                f.push("hbar_ladder: must be positive".into());
            }
        }
        if self.pipelines.contains(&Pipeline::OracleCompare)
            && self.hbar_ladder.windows(2).any(|w| !(w[1] < w[0]))
        {
            f.push("hbar_ladder: must be strictly decreasing for oracle-compare".into());
        }

        match &self.times {
            Times::List(ts) => {
                if ts.is_empty() {
                    f.push("times: empty".into());
                }
                if ts.len() > MAX_TIMES {
                    f.push(format!("times: more than {MAX_TIMES} entries"));
                }
                for &t in ts {
                    if finite(&mut f, "times", t) && t < 0.0 {
                        f.push("times: must be non-negative".into());
                    }
                }
            }
            Times::Range(r) => {
                let ok = finite(&mut f, "times.start", r.start) & finite(&mut f, "times.stop", r.stop);
                if r.count == 0 {
                    f.push("times: empty".into());
                } else if r.count > MAX_TIMES {
                    f.push(format!("times.count: more than {MAX_TIMES}"));
                }
                if ok && (r.start < 0.0 || r.stop < 0.0) {
                    f.push("times: must be non-negative".into());
                }
                if ok && r.stop < r.start {
                    f.push("times: stop before start".into());
                }
            }
        }

        self.check_grid(&mut f);

        if self.pipelines.is_empty() {
            f.push("pipelines: empty".into());
        }
        let mut seen = Vec::new();
        for p in &self.pipelines {
            if seen.contains(p) {
                f.push(format!("pipelines: '{}' listed twice", p.name()));
            }
            seen.push(*p);
        }
        if self.pipelines.contains(&Pipeline::Discrepancy) {
            match &self.discrepancy {
                None => f.push("discrepancy: required by the discrepancy pipeline".into()),
                Some(d) => {
                    finite(&mut f, "discrepancy.alpha", d.alpha);
                    if d.q.is_empty() {
                        f.push("discrepancy.q: empty".into());
                    }
                    for &q in &d.q {
                        finite(&mut f, "discrepancy.q", q);
                    }
                }
            }
        }
        if self.pipelines.contains(&Pipeline::Compose) {
            match &self.compose {
                None => f.push("compose: required by the compose pipeline".into()),
                Some(c) => self.check_compose(c, &mut f),
            }
        }
        if let Some(s) = &self.state {
            check_state(s, &mut f);
        }
        if let Some(o) = &self.oracle {
            if let Some(n) = o.n_max {
                if !(1..=4096).contains(&n) {
                    f.push("oracle.n_max: must lie in [1, 4096]".into());
                }
            }
            if let Some(t) = o.tail_tol {
                if !(t > 0.0 && t <= 1e-4) {
                    f.push("oracle.tail_tol: must lie in (0, 1e-4]".into());
                }
            }
        }
        if self.output.path.as_os_str().is_empty() {
            f.push("output.path: empty".into());
        }
        f
    }

    fn check_oscillator(&self, f: &mut Vec<String>) {
        let p = &self.oscillator.parameters;
        let (needed, name) = match self.oscillator.family {
            Family::Harmonic => (p.omega.map(|v| vec![v]), "omega"),
            Family::Kerr => (p.chi.map(|v| vec![v]), "chi"),
            Family::CubicAction => (p.kappa.map(|v| vec![v]), "kappa"),
            Family::CustomCoefficients => (p.coefficients.clone(), "coefficients"),
        };
        match needed {
            None => f.push(format!("oscillator.parameters.{name}: required for this family")),
            Some(vs) => {
                if vs.is_empty() {
                    f.push(format!("oscillator.parameters.{name}: empty"));
                }
                if vs.iter().any(|v| !v.is_finite()) {
                    f.push(format!("oscillator.parameters.{name}: must be finite"));
                }
            }
        }
        let given = [p.omega.is_some(), p.chi.is_some(), p.kappa.is_some(), p.coefficients.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            f.push("oscillator.parameters: give only the parameter of the chosen family".into());
        }
    }

    fn check_grid(&self, f: &mut Vec<String>) {
        let g = &self.phase_grid;
        let set = [g.beta.is_some(), g.mesh.is_some(), g.random.is_some()].iter().filter(|b| **b).count();
        let needs_grid = self
            .pipelines
            .iter()
            .any(|p| matches!(p, Pipeline::Quasiflow | Pipeline::OracleCompare | Pipeline::Compose));
        if set == 0 && needs_grid {
            f.push("phase_grid: one of beta, mesh, random is required".into());
        }
        if set > 1 {
            f.push("phase_grid: give exactly one of beta, mesh, random".into());
        }
        if let Some(bs) = &g.beta {
            if bs.is_empty() {
                f.push("phase_grid.beta: empty".into());
            }
            if bs.iter().flatten().any(|v| !v.is_finite()) {
                f.push("phase_grid.beta: must be finite".into());
            }
        }
        if let Some(m) = &g.mesh {
            for (name, (lo, hi, n)) in [("q", m.q), ("p", m.p)] {
                let field = format!("phase_grid.mesh.{name}");
                if finite(f, &field, lo) & finite(f, &field, hi) && hi < lo {
                    f.push(format!("{field}: max below min"));
                }
                if n == 0 {
                    f.push(format!("{field}: count must be positive"));
                }
            }
            if m.q.2.saturating_mul(m.p.2) > MAX_GRID_POINTS {
                f.push(format!("phase_grid.mesh: more than {MAX_GRID_POINTS} points"));
            }
        }
        if let Some(r) = &g.random {
            if r.count == 0 || r.count > MAX_GRID_POINTS {
                f.push(format!("phase_grid.random.count: must lie in [1, {MAX_GRID_POINTS}]"));
            }
            if finite(f, "phase_grid.random.b_max", r.b_max) && r.b_max <= 0.0 {
                f.push("phase_grid.random.b_max: must be positive".into());
            }
        }
    }

    fn check_compose(&self, c: &ComposeConfig, f: &mut Vec<String>) {
        match c.transform {
            TransformKind::Identity => {}
            TransformKind::Rotation => match c.theta {
                None => f.push("compose.theta: required for rotation".into()),
                Some(v) => {
                    finite(f, "compose.theta", v);
                }
            },
            TransformKind::CubicPhase => {
                for (name, v) in [("eps", c.eps), ("eta", c.eta)] {
                    match v {
                        None => f.push(format!("compose.{name}: required for cubic-phase")),
                        Some(v) => {
                            finite(f, &format!("compose.{name}"), v);
                        }
                    }
                }
            }
        }
    }

    pub fn times(&self) -> Vec<f64> {
        match &self.times {
            Times::List(ts) => ts.clone(),
            Times::Range(r) if r.count == 1 => vec![r.start],
            Times::Range(r) => (0..r.count)
                .map(|i| r.start + (r.stop - r.start) * i as f64 / (r.count - 1) as f64)
                .collect(),
        }
    }

    /// Grid points in enumeration order; random grids are drawn from the seed.
    pub fn grid(&self) -> Vec<ComplexAmplitude> {
        let g = &self.phase_grid;
        if let Some(bs) = &g.beta {
            return bs.iter().map(|b| ComplexAmplitude::new(b[0], b[1])).collect();
        }
        if let Some(m) = &g.mesh {
            let axis = |(lo, hi, n): (f64, f64, usize)| -> Vec<f64> {
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
            };
            let mut out = Vec::new();
            for q in axis(m.q) {
                for p in axis(m.p) {
                    out.push(ComplexAmplitude(C64::new(q, p) * std::f64::consts::FRAC_1_SQRT_2));
                }
            }
            return out;
        }
        if let Some(r) = &g.random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            return (0..r.count)
                .map(|_| {
                    let b: f64 = rng.gen_range(0.0..r.b_max);
                    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    ComplexAmplitude(C64::from_polar(b.sqrt(), phi))
                })
                .collect();
        }
        Vec::new()
    }

    /// Normal-form Hamiltonian at the given ħ.
    pub fn hamiltonian(&self, hbar: f64) -> Result<HamiltonianModel> {
        let p = &self.oscillator.parameters;
        let missing = || Error::Validation("oscillator parameters incomplete".into());
        match self.oscillator.family {
            Family::Harmonic => HamiltonianModel::harmonic(p.omega.ok_or_else(missing)?, hbar),
            Family::Kerr => HamiltonianModel::kerr(p.chi.ok_or_else(missing)?, hbar),
            Family::CubicAction => HamiltonianModel::cubic_action(p.kappa.ok_or_else(missing)?, hbar),
            Family::CustomCoefficients => {
                HamiltonianModel::polynomial("custom-coefficients", p.coefficients.as_ref().ok_or_else(missing)?, hbar)
            }
        }
    }

    pub fn frequency(&self) -> Result<FrequencyModel> {
        frequency_from_hamiltonian(&self.hamiltonian(1.0)?)
    }

    pub fn state_kind(&self) -> Option<StateKind> {
        let s = self.state.as_ref()?;
        Some(match s.kind {
            StateKindName::Coherent => {
                let b = s.beta.unwrap_or([0.0, 0.0]);
                StateKind::Coherent(C64::new(b[0], b[1]))
            }
            StateKindName::Fock => StateKind::Fock(s.n.unwrap_or(0)),
            StateKindName::Squeezed => StateKind::Squeezed { r: s.r.unwrap_or(0.0), phi: s.phi.unwrap_or(0.0) },
        })
    }

    /// Oracle truncation for symbols up to action `b_max` at `hbar`.
    pub fn truncation(&self, b_max: f64, hbar: f64) -> Result<FockTruncation> {
        let o = self.oracle.clone().unwrap_or_default();
        let n = o.n_max.unwrap_or_else(|| FockTruncation::required_n_max(b_max, hbar));
        FockTruncation::new(n, o.tail_tol.unwrap_or(1e-10))
    }
}

fn check_state(s: &StateConfig, f: &mut Vec<String>) {
    let (allowed, name): (&[&str], _) = match s.kind {
        StateKindName::Coherent => (&["beta"], "coherent"),
        StateKindName::Fock => (&["n"], "fock"),
        StateKindName::Squeezed => (&["r", "phi"], "squeezed"),
    };
    let given = [("beta", s.beta.is_some()), ("n", s.n.is_some()), ("r", s.r.is_some()), ("phi", s.phi.is_some())];
    for (k, g) in given {
        if g && !allowed.contains(&k) {
            f.push(format!("state.{k}: not a parameter of a {name} state"));
        }
    }
    let vals = s.beta.into_iter().flatten().chain(s.r).chain(s.phi);
    if vals.into_iter().any(|v| !v.is_finite()) {
        f.push("state: parameters must be finite".into());
    }
    if let Some(n) = s.n {
        if n > 4096 {
            f.push("state.n: too large".into());
        }
    }
}
