//! Two-path interference readout of a logical qubit.
//!
//! A quasiparticle hops between two sites along two symmetric paths of
//! amplitude `t`. The boundary-condition sign `epsilon` of the logical sector
//! makes the paths add (`T = 4 t^2`) or cancel (`T = 0`). Fermions read the
//! `tau^z` basis and vortices the `(|up> +- |down>)/sqrt(2)` basis, so each run
//! is a Bernoulli draw between the two outcomes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qubit::QubitState;

/// `|psi_1|^2 + |psi_2|^2 + 2 epsilon |psi_1 psi_2|` with both amplitudes `t`.
pub fn transition_amplitude(epsilon: i8, t: f64) -> Result<f64> {
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::InvalidParameter("epsilon must be +1 or -1".into()));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter("hop amplitude must be positive".into()));
    }
    Ok(2.0 * t * t + 2.0 * epsilon as f64 * t * t)
}

/// `(alpha^2, beta^2)`.
pub fn fermion_branch_probabilities(s: &QubitState) -> (f64, f64) {
    let up = s.alpha * s.alpha;
    (up, 1.0 - up)
}

/// `(1/2 + alpha beta cos phi, 1/2 - alpha beta cos phi)`.
pub fn vortex_branch_probabilities(s: &QubitState) -> (f64, f64) {
    let c = s.alpha * s.beta * s.phi.cos();
    (0.5 + c, 0.5 - c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Probe {
    Fermion,
    Vortex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterferenceConfig {
    pub particle: Probe,
    pub hop_amplitude: f64,
    pub shots: u64,
    pub seed: u64,
}

impl InterferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        if !(self.hop_amplitude > 0.0) || !self.hop_amplitude.is_finite() {
            return Err(Error::InvalidParameter("hop amplitude must be positive".into()));
        }
        Ok(())
    }
}

/// Tallies of one interference run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counts {
    pub particle: Probe,
    pub hop_amplitude: f64,
    pub shots: u64,
    /// Shots with `T = 4 t^2`.
    pub constructive: u64,
    /// Shots with `T = 0`.
    pub destructive: u64,
}

impl Counts {
    pub fn constructive_fraction(&self) -> f64 {
        self.constructive as f64 / self.shots as f64
    }
}

/// One sampled shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shot {
    pub shot: u64,
    pub particle: Probe,
    pub t_value: f64,
}

fn branch_up(state: &QubitState, p: Probe) -> f64 {
    let v = match p {
        Probe::Fermion => fermion_branch_probabilities(state).0,
        Probe::Vortex => vortex_branch_probabilities(state).0,
    };
    v.clamp(0.0, 1.0)
}

/// Per-shot outcomes, drawn from the same stream as [`run_experiment`].
pub fn sample_shots(state: &QubitState, cfg: &InterferenceConfig) -> Result<Vec<Shot>> {
    cfg.validate()?;
    let p = branch_up(state, cfg.particle);
    let t4 = transition_amplitude(1, cfg.hop_amplitude)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.shots)
        .map(|shot| Shot {
            shot,
            particle: cfg.particle,
            t_value: if rng.gen::<f64>() < p { t4 } else { 0.0 },
        })
        .collect())
}

/// Bernoulli sampling of the configured probe.
pub fn run_experiment(state: &QubitState, cfg: &InterferenceConfig) -> Result<Counts> {
    cfg.validate()?;
    let p = branch_up(state, cfg.particle);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let constructive = (0..cfg.shots).filter(|_| rng.gen::<f64>() < p).count() as u64;
    Ok(Counts {
        particle: cfg.particle,
        hop_amplitude: cfg.hop_amplitude,
        shots: cfg.shots,
        constructive,
        destructive: cfg.shots - constructive,
    })
}

/// Estimated state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// `|phi|` in `[0, pi]`; `None` when `alpha_hat * beta_hat` is below threshold.
    pub phi_hat: Option<f64>,
    pub cos_phi_hat: Option<f64>,
    /// The sign of `phi` is never observable with these two probes.
    pub phi_sign_ambiguous: bool,
    pub sigma_alpha: f64,
    pub sigma_cos_phi: f64,
    /// `sqrt(sigma_alpha^2 + sigma_cos_phi^2)`.
    pub confidence_radius: f64,
}

/// Default lower bound on `alpha_hat * beta_hat` for reporting `phi`.
pub const PHI_THRESHOLD: f64 = 0.05;

/// Closed-form inversion of the two branch probabilities.
///
/// `shots` gives the sample sizes behind each probability; `None` means exact
/// probabilities and zero error bars.
pub fn reconstruct_from_probabilities(
    p_fermion: f64,
    p_vortex: f64,
    shots: Option<(u64, u64)>,
    threshold: f64,
) -> Result<ReconstructionResult> {
    if !(0.0..=1.0).contains(&p_fermion) || !(0.0..=1.0).contains(&p_vortex) {
        return Err(Error::InvalidParameter("probabilities must lie in [0, 1]".into()));
    }
    let alpha = p_fermion.sqrt();
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let ab = alpha * beta;
    let (sd_f, sd_v) = match shots {
        Some((nf, nv)) if nf > 0 && nv > 0 => (
            (p_fermion * (1.0 - p_fermion) / nf as f64).sqrt(),
            (p_vortex * (1.0 - p_vortex) / nv as f64).sqrt(),
        ),
        Some(_) => return Err(Error::InvalidParameter("count sets must be non-empty".into())),
        None => (0.0, 0.0),
    };
    let sigma_alpha = if alpha > 0.0 { sd_f / (2.0 * alpha) } else { sd_f.sqrt() };
    let (cos_phi, phi, sigma_cos) = if ab >= threshold {
        let raw = (p_vortex - 0.5) / ab;
        // Within round-off of +-1 the input cannot tell phi from 0 or pi.
        let snap = 8.0 * f64::EPSILON / ab;
        let c = if raw >= 1.0 - snap {
            1.0
        } else if raw <= -1.0 + snap {
            -1.0
        } else {
            raw
        };
        let d_v = 1.0 / ab;
        let d_f = -(p_vortex - 0.5) * (1.0 - 2.0 * p_fermion) / (2.0 * ab * ab * ab);
        let s = ((d_v * sd_v).powi(2) + (d_f * sd_f).powi(2)).sqrt();
        (Some(c), Some(c.acos().clamp(0.0, PI)), s)
    } else {
        (None, None, 0.0)
    };
    Ok(ReconstructionResult {
        alpha_hat: alpha,
        beta_hat: beta,
        phi_hat: phi,
        cos_phi_hat: cos_phi,
        phi_sign_ambiguous: true,
        sigma_alpha,
        sigma_cos_phi: sigma_cos,
        confidence_radius: (sigma_alpha * sigma_alpha + sigma_cos * sigma_cos).sqrt(),
    })
}

/// Estimates `(alpha, beta, |phi|)` from a fermion run and a vortex run.
pub fn reconstruct(fermion: &Counts, vortex: &Counts, threshold: f64) -> Result<ReconstructionResult> {
    if fermion.particle != Probe::Fermion || vortex.particle != Probe::Vortex {
        return Err(Error::InvalidParameter("expected one fermion run and one vortex run".into()));
    }
    if fermion.shots == 0 || vortex.shots == 0 {
        return Err(Error::InvalidParameter("count sets must be non-empty".into()));
    }
    reconstruct_from_probabilities(
        fermion.constructive_fraction(),
        vortex.constructive_fraction(),
        Some((fermion.shots, vortex.shots)),
        threshold,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn cfg(particle: Probe, shots: u64, seed: u64) -> InterferenceConfig {
        InterferenceConfig {
            particle,
            hop_amplitude: 1.0,
            shots,
            seed,
        }
    }

    #[test]
    fn amplitude_values() {
        assert_eq!(transition_amplitude(1, 1.0).unwrap(), 4.0);
        assert_eq!(transition_amplitude(-1, 1.0).unwrap(), 0.0);
        assert_eq!(transition_amplitude(1, 0.5).unwrap(), 1.0);
        assert!(transition_amplitude(0, 1.0).is_err());
        assert!(transition_amplitude(1, 0.0).is_err());
    }

    #[test]
    fn branch_probabilities() {
        assert_eq!(fermion_branch_probabilities(&QubitState::UP), (1.0, 0.0));
        let s = QubitState::new(0.6, 0.8, 0.0).unwrap();
        let (a, b) = fermion_branch_probabilities(&s);
        assert!((a - 0.36).abs() < 1e-15 && (b - 0.64).abs() < 1e-15);
        let plus = QubitState::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).unwrap();
        let (a, b) = vortex_branch_probabilities(&plus);
        assert!((a - 1.0).abs() < 1e-15 && b.abs() < 1e-15);
        let (a, _) = vortex_branch_probabilities(&QubitState::new(0.6, 0.8, PI / 2.0).unwrap());
        assert!((a - 0.5).abs() < 1e-15);
        assert_eq!(vortex_branch_probabilities(&QubitState::UP), (0.5, 0.5));
    }

    #[test]
    fn deterministic_limits() {
        let c = run_experiment(&QubitState::UP, &cfg(Probe::Fermion, 1000, 3)).unwrap();
        assert_eq!(c.constructive, 1000);
        let plus = QubitState::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).unwrap();
        let shots = sample_shots(&plus, &cfg(Probe::Vortex, 500, 9)).unwrap();
        assert!(shots.iter().all(|s| s.t_value == 4.0));
    }

    #[test]
    fn shots_and_counts_agree() {
        let s = QubitState::new(0.6, 0.8, 1.0).unwrap();
        let c = cfg(Probe::Vortex, 2000, 17);
        let n = sample_shots(&s, &c).unwrap().iter().filter(|x| x.t_value > 0.0).count() as u64;
        assert_eq!(run_experiment(&s, &c).unwrap().constructive, n);
    }

    #[test]
    fn sampled_frequency_is_binomial() {
        let s = QubitState::new(0.6, 0.8, 0.0).unwrap();
        let c = run_experiment(&s, &cfg(Probe::Fermion, 10_000, 42)).unwrap();
        let sd = (0.36f64 * 0.64 / 10_000.0).sqrt();
        assert!((c.constructive_fraction() - 0.36).abs() < 3.0 * sd);
    }

    #[test]
    fn exact_inversion() {
        let s = QubitState::new(0.6, 0.8, PI / 3.0).unwrap();
        let r = reconstruct_from_probabilities(
            fermion_branch_probabilities(&s).0,
            vortex_branch_probabilities(&s).0,
            None,
            PHI_THRESHOLD,
        )
        .unwrap();
        assert!((r.alpha_hat - 0.6).abs() < 1e-12);
        assert!((r.beta_hat - 0.8).abs() < 1e-12);
        assert!((r.phi_hat.unwrap() - PI / 3.0).abs() < 1e-12);
        assert_eq!(r.confidence_radius, 0.0);
    }

    #[test]
    fn phase_undetermined_for_basis_state() {
        let f = run_experiment(&QubitState::UP, &cfg(Probe::Fermion, 100, 1)).unwrap();
        let v = run_experiment(&QubitState::UP, &cfg(Probe::Vortex, 100, 2)).unwrap();
        let r = reconstruct(&f, &v, PHI_THRESHOLD).unwrap();
        assert_eq!(r.alpha_hat, 1.0);
        assert!(r.phi_hat.is_none());
        assert!(reconstruct(&v, &f, PHI_THRESHOLD).is_err());
    }
}
