//! Run configuration: one JSON document per run.
//!
//! Every field has a default, so `{}` is a valid config. The fully resolved
//! document is copied into the metadata of each output.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toricsim_core::eigen::SolverOptions;
use toricsim_core::LatticeSpec;

use crate::error::{CliError, CliResult};

/// Site count allowed without an explicit override.
pub const DEFAULT_MAX_SITES: usize = 20;
/// Largest site count any override may request.
pub const HARD_MAX_SITES: usize = 24;
/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "TORICSIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perturbation {
    /// `h_x` and `h_z` on every site.
    Uniform,
    /// `h_sub` as `X` and `Y` on odd sites, `h_z` everywhere. Even tori only.
    Sublattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateTarget {
    Identity,
    Hadamard,
    PauliX,
    PauliZ,
    /// `diag(1, e^{i lambda})`.
    Phase(f64),
    /// Row-major 2x2 matrix of `[re, im]` pairs.
    Custom([[[f64; 2]; 2]; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub lx: usize,
    pub ly: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { lx: 3, ly: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub g: f64,
    pub perturbation: Perturbation,
    pub h_x: f64,
    pub h_z: f64,
    pub h_sub: f64,
    /// Load this HamiltonianSpec document instead of building one.
    pub hamiltonian: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            g: 1.0,
            perturbation: Perturbation::Uniform,
            h_x: 0.0,
            h_z: 0.0,
            h_sub: 0.0,
            hamiltonian: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_matvecs: usize,
    pub max_basis: usize,
    pub guard: usize,
    /// Number of lowest levels reported by `spectrum`.
    pub levels: usize,
    /// Grouping tolerance for degenerate levels; solver default when absent.
    pub cluster_tol: Option<f64>,
    /// Write eigenvectors next to the spectrum.
    pub eigenvectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig {
            tol: d.tol,
            max_matvecs: d.max_matvecs,
            max_basis: d.max_basis,
            guard: d.guard,
            levels: 8,
            cluster_tol: None,
            eigenvectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lattices: Vec<[usize; 2]>,
    pub field: Field,
    /// Field strengths in units of `g`.
    pub grid: Vec<f64>,
    /// Levels closer than `cluster_tol * g` belong to one cluster.
    pub cluster_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lattices: vec![[3, 3], [3, 4], [4, 3], [4, 4]],
            field: Field::X,
            grid: vec![0.10, 0.15, 0.20, 0.25, 0.30],
            cluster_tol: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub target: GateTarget,
    pub j: f64,
    pub j_zz: f64,
    /// Output of `extract`; its couplings replace `j` and `j_zz`.
    pub effective: Option<PathBuf>,
    pub tol: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            target: GateTarget::Hadamard,
            j: 1.0,
            j_zz: 1.0,
            effective: None,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    pub delta: f64,
    pub transverse: f64,
    pub power: i32,
    pub duration_factor: f64,
    pub max_step_angle: f64,
    /// Ramp time constants in units of the inverse minimum gap.
    pub t0_gap_units: Vec<f64>,
}

impl Default for InitConfig {
    fn default() -> Self {
        let p = toricsim_core::qubit::InitProtocol::default();
        InitConfig {
            delta: p.delta,
            transverse: p.transverse,
            power: p.power,
            duration_factor: p.duration_factor,
            max_step_angle: p.max_step_angle,
            t0_gap_units: vec![0.5, 1.5, 5.0, 15.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub shots: u64,
    pub hop_amplitude: f64,
    pub threshold: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            alpha: 0.6,
            beta: 0.8,
            phi: PI / 3.0,
            shots: 100_000,
            hop_amplitude: 1.0,
            threshold: toricsim_core::interference::PHI_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KitaevConfig {
    pub rows: usize,
    pub cols: usize,
    pub j_x: Vec<f64>,
    pub j_y: f64,
    pub j_z: f64,
    /// Levels computed per model. The default spans the `2^(rows cols / 2)`
    /// dimer states of a 2x6 strip; a block that covers the whole manifold
    /// converges far faster than one that splits it.
    pub levels: usize,
}

impl Default for KitaevConfig {
    fn default() -> Self {
        KitaevConfig {
            rows: 2,
            cols: 6,
            j_x: vec![5.0, 10.0, 20.0],
            j_y: 1.0,
            j_z: 1.0,
            levels: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub threads: Option<usize>,
    pub max_sites: usize,
    pub lattice: LatticeConfig,
    pub model: ModelConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub gate: GateConfig,
    pub init: InitConfig,
    pub measure: MeasureConfig,
    pub kitaev: KitaevConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: SolverOptions::default().seed,
            format: Format::Json,
            threads: None,
            max_sites: DEFAULT_MAX_SITES,
            lattice: LatticeConfig::default(),
            model: ModelConfig::default(),
            solver: SolverConfig::default(),
            sweep: SweepConfig::default(),
            gate: GateConfig::default(),
            init: InitConfig::default(),
            measure: MeasureConfig::default(),
            kitaev: KitaevConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be finite")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn lattice_spec(&self) -> CliResult<LatticeSpec> {
        Ok(LatticeSpec::new(self.lattice.lx, self.lattice.ly)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_matvecs: self.solver.max_matvecs,
            seed: self.seed,
            max_basis: self.solver.max_basis,
            site_cap: self.max_sites,
            want_vectors: self.solver.eigenvectors,
            guard: self.solver.guard,
        }
    }

    pub fn check_sites(&self, sites: usize) -> CliResult<()> {
        if sites > self.max_sites {
            return Err(CliError::Usage(format!(
                "{sites} sites exceeds the site cap of {}; raise it with --max-sites (at most {HARD_MAX_SITES})",
                self.max_sites
            )));
        }
        Ok(())
    }

    /// Checks shared by every command.
    pub fn validate_common(&self) -> CliResult<()> {
        if self.max_sites == 0 || self.max_sites > HARD_MAX_SITES {
            return Err(CliError::Usage(format!("max_sites must be in 1..={HARD_MAX_SITES}")));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        if s.levels == 0 || s.max_matvecs == 0 || s.max_basis == 0 {
            return Err(CliError::Usage("solver levels, max_matvecs and max_basis must be positive".into()));
        }
        if let Some(t) = s.cluster_tol {
            positive("solver.cluster_tol", t)?;
        }
        Ok(())
    }

    pub fn validate_model(&self) -> CliResult<()> {
        let m = &self.model;
        positive("model.g", m.g)?;
        finite("model.h_x", m.h_x)?;
        finite("model.h_z", m.h_z)?;
        finite("model.h_sub", m.h_sub)?;
        if m.hamiltonian.is_none() {
            let l = self.lattice_spec()?;
            self.check_sites(l.n_sites())?;
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> CliResult<()> {
        let s = &self.sweep;
        positive("model.g", self.model.g)?;
        positive("sweep.cluster_tol", s.cluster_tol)?;
        if s.grid.is_empty() || s.lattices.is_empty() {
            return Err(CliError::Usage("sweep needs a non-empty grid and lattice list".into()));
        }
        if let Some(h) = s.grid.iter().find(|h| !(**h > 0.0 && **h <= 0.5)) {
            return Err(CliError::Usage(format!("sweep grid value {h} outside (0, 0.5] in units of g")));
        }
        for [lx, ly] in &s.lattices {
            let l = LatticeSpec::new(*lx, *ly)?;
            self.check_sites(l.n_sites())?;
        }
        Ok(())
    }

    pub fn validate_gate(&self) -> CliResult<()> {
        let g = &self.gate;
        positive("gate.tol", g.tol)?;
        if g.effective.is_none() && (g.j == 0.0 || g.j_zz == 0.0 || !g.j.is_finite() || !g.j_zz.is_finite()) {
            return Err(CliError::Usage("gate couplings j and j_zz must be finite and non-zero".into()));
        }
        match g.target {
            GateTarget::Phase(l) => finite("gate.target.phase", l),
            GateTarget::Custom(m) if m.iter().flatten().flatten().any(|v| !v.is_finite()) => {
                Err(CliError::Usage("custom gate entries must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn validate_init(&self) -> CliResult<()> {
        let i = &self.init;
        positive("init.delta", i.delta)?;
        positive("init.transverse", i.transverse)?;
        positive("init.duration_factor", i.duration_factor)?;
        positive("init.max_step_angle", i.max_step_angle)?;
        if i.max_step_angle > 0.1 {
            return Err(CliError::Usage("init.max_step_angle must not exceed 0.1".into()));
        }
        if i.power < 1 {
            return Err(CliError::Usage("init.power must be at least 1".into()));
        }
        if i.t0_gap_units.is_empty() {
            return Err(CliError::Usage("init.t0_gap_units must not be empty".into()));
        }
        for t in &i.t0_gap_units {
            positive("init.t0_gap_units entry", *t)?;
        }
        Ok(())
    }

    pub fn validate_measure(&self) -> CliResult<()> {
        let m = &self.measure;
        if m.shots == 0 {
            return Err(CliError::Usage("measure.shots must be at least 1".into()));
        }
        positive("measure.hop_amplitude", m.hop_amplitude)?;
        positive("measure.threshold", m.threshold)?;
        Ok(())
    }

    pub fn validate_kitaev(&self) -> CliResult<()> {
        let k = &self.kitaev;
        if k.j_x.is_empty() {
            return Err(CliError::Usage("kitaev.j_x must list at least one value".into()));
        }
        if k.j_x.iter().any(|j| *j == 0.0 || !j.is_finite()) {
            return Err(CliError::Usage("kitaev.j_x values must be finite and non-zero".into()));
        }
        finite("kitaev.j_y", k.j_y)?;
        finite("kitaev.j_z", k.j_z)?;
        if k.levels < 2 {
            return Err(CliError::Usage("kitaev.levels must be at least 2".into()));
        }
        self.check_sites(k.rows * k.cols)
    }
}
