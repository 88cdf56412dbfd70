//! Command-line front end: JSON run configuration, subcommands and
//! artifact output.
//!
//! Every artifact carries the resolved [`RunConfig`]. JSON results embed it
//! under `"config"`; CSV tables get a `<stem>.json` sidecar with the config
//! and a summary. Nothing is written until the whole command has finished.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::{self, EnsembleConfig, EnsembleStats, PotentialForm};
use crate::lindblad::{self, Cutoff, SteadyStateReport, SteadyStateResult};
use crate::meanfield::{self, Phase, RootGrid};
use crate::ops::CutoffConfig;
use crate::params::{Branch, ModelParams};
use crate::roots::{geomspace, linspace};
use crate::scaling::{self, Backend, BackendConfig, BinSpread, CollapseSampling, ScalingReport, ScalingSample};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "rabi-dpt", version, about = "Steady states and phase transitions of the amplified open Rabi model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for every stochastic stream of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Δx² backend for scaling and collapse: master, quadrature or ensemble.
    #[arg(long, global = true)]
    pub backend: Option<Backend>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mean-field phase of both branches on a (μ, g) grid.
    PhaseDiagram,
    /// Mean-field steady-state boson number and s_z against g.
    Mf,
    /// Lindblad steady state with observables.
    Steady,
    /// Wigner function grids, numerical and/or Boltzmann.
    Wigner,
    /// Stochastic ensemble against quadrature moments.
    Langevin,
    /// Finite-frequency scan of Δx² with exponent fits.
    Scaling,
    /// Θ–Λ collapse data set.
    Collapse,
}

impl Command {
    pub fn stem(self) -> &'static str {
        match self {
            Command::PhaseDiagram => "phase_diagram",
            Command::Mf => "mf",
            Command::Steady => "steady",
            Command::Wigner => "wigner",
            Command::Langevin => "langevin",
            Command::Scaling => "scaling",
            Command::Collapse => "collapse",
        }
    }
}

/// Either an explicit list or `n` points from `lo` to `hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        lo: f64,
        hi: f64,
        n: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { lo, hi, n, log: true } => geomspace(*lo, *hi, *n),
            Grid::Range { lo, hi, n, log: false } => linspace(*lo, *hi, *n),
        }
    }

    fn check(&self, name: &str, positive: bool) -> Result<Vec<f64>> {
        if let Grid::Range { lo, hi, log: true, .. } = self {
            if !(*lo > 0.0 && *hi > 0.0) {
                return Err(Error::Config(format!("{name}: log grid needs positive bounds")));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(Error::Config(format!("{name}: empty grid")));
        }
        if v.iter().any(|x| !x.is_finite() || (positive && *x <= 0.0)) {
            let what = if positive { "positive finite" } else { "finite" };
            return Err(Error::Config(format!("{name}: every value must be {what}")));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteadyModel {
    Full,
    Minus,
    Plus,
}

impl SteadyModel {
    fn label(self) -> &'static str {
        match self {
            SteadyModel::Full => "full",
            SteadyModel::Minus => "-",
            SteadyModel::Plus => "+",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub mu: Grid,
    pub g: Grid,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        PhaseDiagramConfig {
            mu: Grid::Range { lo: -2.0, hi: 3.0, n: 51, log: false },
            g: Grid::Range { lo: 0.0, hi: 3.0, n: 61, log: false },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfConfig {
    pub g: Grid,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig { g: Grid::Range { lo: 0.0, hi: 3.0, n: 121, log: false } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyConfig {
    pub model: SteadyModel,
    /// Fixed Fock cutoff; adaptive selection when absent.
    pub n_c: Option<usize>,
    pub cutoff: CutoffConfig,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig { model: SteadyModel::Minus, n_c: None, cutoff: CutoffConfig::default() }
    }
}

impl SteadyConfig {
    fn cutoff(&self) -> Cutoff {
        match self.n_c {
            Some(n) => Cutoff::Fixed(n),
            None => Cutoff::Auto(self.cutoff),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub x: Grid,
    pub p: Grid,
    pub numeric: bool,
    pub boltzmann: bool,
}

impl Default for WignerConfig {
    fn default() -> Self {
        WignerConfig {
            x: Grid::Range { lo: -6.0, hi: 6.0, n: 121, log: false },
            p: Grid::Range { lo: -3.0, hi: 3.0, n: 61, log: false },
            numeric: true,
            boltzmann: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LangevinConfig {
    pub branch: Branch,
    /// `seed` here is ignored; the run seed is used.
    pub ensemble: EnsembleConfig,
}

impl Default for LangevinConfig {
    fn default() -> Self {
        LangevinConfig { branch: Branch::Minus, ensemble: EnsembleConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub eta: Grid,
    /// `g − g_c` offsets for a ν scan; skipped when absent.
    pub dg: Option<Grid>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { eta: Grid::Range { lo: 1e3, hi: 1e5, n: 9, log: true }, dg: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub lambda: Vec<f64>,
    pub eta: Grid,
    pub sampling: CollapseSampling,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig {
            lambda: vec![0.0, 0.2, 0.4],
            eta: Grid::Range { lo: 2e4, hi: 1e5, n: 4, log: true },
            sampling: CollapseSampling::Theta(geomspace(1e-3, 10.0, 20)),
        }
    }
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub version: String,
    pub params: ModelParams,
    pub seed: u64,
    pub threads: Option<usize>,
    pub backend: Backend,
    /// Cutoff and ensemble controls shared by the scaling backends.
    pub backend_config: BackendConfig,
    pub phase_diagram: PhaseDiagramConfig,
    pub mf: MfConfig,
    pub steady: SteadyConfig,
    pub wigner: WignerConfig,
    pub langevin: LangevinConfig,
    pub scaling: ScalingConfig,
    pub collapse: CollapseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: VERSION.to_string(),
            params: ModelParams::normalized(100.0, 2.0, 1.5, 0.1, 44.26).expect("default parameters are valid"),
            seed: 0,
            threads: None,
            backend: Backend::Quadrature,
            backend_config: BackendConfig::default(),
            phase_diagram: PhaseDiagramConfig::default(),
            mf: MfConfig::default(),
            steady: SteadyConfig::default(),
            wigner: WignerConfig::default(),
            langevin: LangevinConfig::default(),
            scaling: ScalingConfig::default(),
            collapse: CollapseConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies command-line overrides.
    pub fn resolve(mut self, cli: &Cli) -> Self {
        if let Some(s) = cli.seed {
            self.seed = s;
        }
        if let Some(t) = cli.threads {
            self.threads = Some(t);
        }
        if let Some(b) = cli.backend {
            self.backend = b;
        }
        self.langevin.ensemble.seed = self.seed;
        self.backend_config.ensemble.seed = self.seed;
        self
    }

    /// Rejects inputs of the given command before any work is done.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        match cmd {
            Command::PhaseDiagram => {
                self.phase_diagram.mu.check("phase_diagram.mu", false)?;
                self.phase_diagram.g.check("phase_diagram.g", false)?;
            }
            Command::Mf => {
                self.mf.g.check("mf.g", false)?;
            }
            Command::Steady => {}
            Command::Wigner => {
                self.wigner.x.check("wigner.x", false)?;
                self.wigner.p.check("wigner.p", false)?;
                if !self.wigner.numeric && !self.wigner.boltzmann {
                    return Err(Error::Config("wigner: enable numeric or boltzmann".into()));
                }
            }
            Command::Langevin => {
                let e = &self.langevin.ensemble;
                if !(e.t_burn >= 0.0 && e.t_max > e.t_burn && e.dt.is_none_or(|d| d > 0.0)) {
                    return Err(Error::Config("langevin: need 0 ≤ t_burn < t_max and dt > 0".into()));
                }
            }
            Command::Scaling => {
                self.scaling.eta.check("scaling.eta", true)?;
                if let Some(dg) = &self.scaling.dg {
                    dg.check("scaling.dg", true)?;
                }
            }
            Command::Collapse => {
                self.collapse.eta.check("collapse.eta", true)?;
                if self.collapse.lambda.is_empty() || self.collapse.lambda.iter().any(|l| !l.is_finite()) {
                    return Err(Error::Config("collapse.lambda: need finite values".into()));
                }
                let v = match &self.collapse.sampling {
                    CollapseSampling::DeltaG(v) | CollapseSampling::Theta(v) => v,
                };
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::Config("collapse.sampling: need positive values".into()));
                }
            }
        }
        Ok(())
    }
}

/// Failure of a whole run.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) | Error::InvalidParams(m) => CliError::Config(m),
            other => CliError::Solver(other),
        }
    }
}

/// One file to be written once the command succeeds.
enum Artifact {
    Json(PathBuf, serde_json::Value),
    Csv(PathBuf, Vec<u8>),
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn envelope<T: Serialize>(config: &RunConfig, result: T) -> Result<serde_json::Value> {
    serde_json::to_value(Envelope { config, result }).map_err(|e| Error::Io(e.to_string()))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct MfRow {
    g: f64,
    branch: Branch,
    phase: Option<Phase>,
    n_mf: f64,
    sz: f64,
    status: String,
}

#[derive(Serialize)]
struct ScalingResult {
    zeta: std::result::Result<ScalingReport, String>,
    nu: Option<std::result::Result<ScalingReport, String>>,
    failed_samples: usize,
}

#[derive(Serialize)]
struct CollapseResult {
    bins: Vec<BinSpread>,
    max_spread: f64,
    failed_samples: usize,
}

#[derive(Serialize)]
struct LangevinResult {
    ensemble: EnsembleStats,
    quadrature_x2: f64,
    quadrature_p2: f64,
    z_x2: f64,
    z_p2: f64,
}

#[derive(Serialize)]
struct WignerSummary {
    numeric: Option<WignerInfo>,
    boltzmann: Option<WignerInfo>,
}

#[derive(Serialize)]
struct WignerInfo {
    file: String,
    integral: f64,
    boundary_max: f64,
}

fn fit_or_message(r: Result<ScalingReport>) -> std::result::Result<ScalingReport, String> {
    r.map_err(|e| e.to_string())
}

fn steady_solve(cfg: &RunConfig) -> Result<SteadyStateResult> {
    let p = &cfg.params;
    match cfg.steady.model {
        SteadyModel::Full => lindblad::steady_state_full(p, cfg.steady.cutoff()),
        SteadyModel::Minus => lindblad::steady_state_branch(p, Branch::Minus, cfg.steady.cutoff()),
        SteadyModel::Plus => lindblad::steady_state_branch(p, Branch::Plus, cfg.steady.cutoff()),
    }
}

fn execute(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<Artifact>> {
    let stem = cmd.stem();
    let path = |suffix: &str| out.join(format!("{stem}{suffix}"));
    let p = cfg.params;
    let mut arts = Vec::new();
    match cmd {
        Command::PhaseDiagram => {
            let mu = cfg.phase_diagram.mu.values();
            let g = cfg.phase_diagram.g.values();
            let pts = meanfield::phase_diagram(&mu, &g, &p);
            let failed = pts.iter().filter(|q| q.failure.is_some()).count();
            arts.push(Artifact::Csv(path(".csv"), csv_bytes(&pts)?));
            arts.push(Artifact::Json(path(".json"), envelope(cfg, serde_json::json!({ "nodes": pts.len(), "failed": failed }))?));
        }
        Command::Mf => {
            let grid = RootGrid::default();
            let rows: Vec<MfRow> = cfg
                .mf
                .g
                .values()
                .iter()
                .flat_map(|&g| {
                    let grid = &grid;
                    Branch::BOTH.into_iter().map(move |b| match meanfield::classify_phase(&p.with_g(g), b, grid) {
                        Ok(r) => MfRow { g, branch: b, phase: Some(r.phase), n_mf: r.n_mf, sz: r.sz, status: "ok".into() },
                        Err(e) => MfRow { g, branch: b, phase: None, n_mf: f64::NAN, sz: f64::NAN, status: format!("failed: {e}") },
                    })
                })
                .collect();
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            arts.push(Artifact::Csv(path(".csv"), csv_bytes(&rows)?));
            arts.push(Artifact::Json(path(".json"), envelope(cfg, serde_json::json!({ "rows": rows.len(), "failed": failed }))?));
        }
        Command::Steady => {
            let ss = steady_solve(cfg)?;
            let report: SteadyStateReport = ss.report(&p, cfg.steady.model.label());
            arts.push(Artifact::Json(path(".json"), envelope(cfg, report)?));
        }
        Command::Wigner => {
            let xs = cfg.wigner.x.values();
            let ps = cfg.wigner.p.values();
            let mut summary = WignerSummary { numeric: None, boltzmann: None };
            if cfg.wigner.numeric {
                let ss = steady_solve(cfg)?;
                let rho = if ss.rho.spin { ss.rho.reduced_boson() } else { ss.rho };
                let grid = lindblad::wigner_numeric(&rho, &xs, &ps)?;
                let mut buf = Vec::new();
                grid.write_csv(&mut buf)?;
                let file = path("_numeric.csv");
                summary.numeric = Some(WignerInfo {
                    file: file.file_name().unwrap().to_string_lossy().into_owned(),
                    integral: grid.integral(),
                    boundary_max: grid.boundary_max(),
                });
                arts.push(Artifact::Csv(file, buf));
            }
            if cfg.wigner.boltzmann {
                let b = match cfg.steady.model {
                    SteadyModel::Plus => Branch::Plus,
                    _ => Branch::Minus,
                };
                let bz = langevin::Boltzmann::new(&p, b, PotentialForm::Exact)?;
                let grid = lindblad::WignerGrid {
                    w: xs.iter().map(|&x| ps.iter().map(|&q| bz.wigner(x, q)).collect()).collect(),
                    x: xs.clone(),
                    p: ps.clone(),
                };
                let mut buf = Vec::new();
                grid.write_csv(&mut buf)?;
                let file = path("_boltzmann.csv");
                summary.boltzmann = Some(WignerInfo {
                    file: file.file_name().unwrap().to_string_lossy().into_owned(),
                    integral: grid.integral(),
                    boundary_max: grid.boundary_max(),
                });
                arts.push(Artifact::Csv(file, buf));
            }
            arts.push(Artifact::Json(path(".json"), envelope(cfg, summary)?));
        }
        Command::Langevin => {
            let b = cfg.langevin.branch;
            let ens = langevin::simulate_ensemble(&p, b, &cfg.langevin.ensemble)?;
            let m = langevin::moments_quadrature(&p, b, PotentialForm::Exact, &[(0, 2), (2, 0)])?;
            let res = LangevinResult {
                z_x2: ens.x2.z_score(m[0]),
                z_p2: ens.p2.z_score(m[1]),
                quadrature_x2: m[0],
                quadrature_p2: m[1],
                ensemble: ens,
            };
            arts.push(Artifact::Json(path(".json"), envelope(cfg, res)?));
        }
        Command::Scaling => {
            let bc = &cfg.backend_config;
            let mut samples = scaling::finite_size_scan(&p, &cfg.scaling.eta.values(), cfg.backend, bc)?;
            let zeta = fit_or_message(scaling::zeta_report(&samples));
            let nu = match &cfg.scaling.dg {
                Some(dg) => {
                    let gc = meanfield::critical_coupling_gc(&p)?;
                    let g_list: Vec<f64> = dg.values().iter().map(|d| gc + d).collect();
                    let (report, s) = scaling::critical_exponent_scan(&p, &g_list, cfg.backend, bc)?;
                    samples.extend(s);
                    Some(fit_or_message(Ok(report)))
                }
                None => None,
            };
            let failed = samples.iter().filter(|s| !s.is_ok()).count();
            let mut buf = Vec::new();
            scaling::write_samples_csv(&samples, &mut buf)?;
            arts.push(Artifact::Csv(path(".csv"), buf));
            let res = ScalingResult { zeta, nu, failed_samples: failed };
            arts.push(Artifact::Json(path(".json"), envelope(cfg, res)?));
        }
        Command::Collapse => {
            let c = &cfg.collapse;
            let samples: Vec<ScalingSample> =
                scaling::collapse_dataset(&p, &c.lambda, &c.eta.values(), &c.sampling, cfg.backend, &cfg.backend_config)?;
            let bins = scaling::collapse_spread(&samples, 1e-6);
            let res = CollapseResult {
                max_spread: bins.iter().map(|b| b.spread).fold(0.0, f64::max),
                failed_samples: samples.iter().filter(|s| !s.is_ok()).count(),
                bins,
            };
            let mut buf = Vec::new();
            scaling::write_samples_csv(&samples, &mut buf)?;
            arts.push(Artifact::Csv(path(".csv"), buf));
            arts.push(Artifact::Json(path(".json"), envelope(cfg, res)?));
        }
    }
    Ok(arts)
}

fn persist(arts: Vec<Artifact>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for a in arts {
        match a {
            Artifact::Json(path, v) => {
                crate::io::write_json(&path, &v)?;
                written.push(path);
            }
            Artifact::Csv(path, bytes) => {
                crate::io::write_atomic(&path, |w| std::io::Write::write_all(w, &bytes).map_err(Error::from))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Runs one command with an already resolved configuration and returns the
/// files written.
pub fn run_config(cmd: Command, cfg: &RunConfig, out: &Path) -> std::result::Result<Vec<PathBuf>, CliError> {
    cfg.validate(cmd)?;
    let job = || execute(cmd, cfg, out).and_then(persist);
    let written = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    Ok(written)
}

pub fn run(cli: &Cli) -> std::result::Result<Vec<PathBuf>, CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    run_config(cli.command, &cfg.resolve(cli), &cli.out)
}

#[cfg(test)]
mod tests;
