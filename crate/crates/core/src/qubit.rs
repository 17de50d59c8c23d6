//! Single logical qubit: pulse sequences, gate compilation and the
//! initialization ramp.
//!
//! Pseudo-spin operators are full Pauli matrices, so a step of duration `t`
//! and coupling `c` applies `exp(-i c t A)` with `A = tau^z` or
//! `A = tau^x + tau^y`. Since `(tau^x + tau^y)^2 = 2`, the second rotates the
//! Bloch vector by `2 sqrt(2) c t` about `(x + y) / sqrt(2)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2, TAU};

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{CompiledOperator, SolverOptions};
use crate::error::{Error, Result};
use crate::model::HamiltonianSpec;
use crate::state::{dot, StateVector};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this an amplitude is treated as absent when fixing phases.
const AMP_EPS: f64 = 1e-14;

/// `alpha |up> + beta e^{i phi} |down>` with `alpha, beta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QubitState {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
}

fn rem_euclid(a: f64, m: f64) -> f64 {
    let r = a % m;
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = rem_euclid(p, TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl QubitState {
    pub const UP: QubitState = QubitState {
        alpha: 1.0,
        beta: 0.0,
        phi: 0.0,
    };
    pub const DOWN: QubitState = QubitState {
        alpha: 0.0,
        beta: 1.0,
        phi: 0.0,
    };

    /// Accepts amplitudes normalized to within `1e-9` and renormalizes them.
    pub fn new(alpha: f64, beta: f64, phi: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) || !phi.is_finite() {
            return Err(Error::InvalidParameter("alpha and beta must be non-negative".into()));
        }
        let n2 = alpha * alpha + beta * beta;
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "alpha^2 + beta^2 = {n2}, expected 1"
            )));
        }
        let n = n2.sqrt();
        Ok(QubitState {
            alpha: alpha / n,
            beta: beta / n,
            phi: wrap_phase(phi),
        })
    }

    /// Canonical form of an arbitrary non-zero amplitude pair.
    pub fn from_amplitudes(up: Complex64, down: Complex64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidParameter("zero state".into()));
        }
        let (a, b) = (up.norm() / n, down.norm() / n);
        let phi = if a < AMP_EPS || b < AMP_EPS {
            0.0
        } else {
            wrap_phase(down.arg() - up.arg())
        };
        Ok(QubitState { alpha: a, beta: b, phi })
    }

    pub fn amplitudes(&self) -> Vector2<Complex64> {
        Vector2::new(
            Complex64::new(self.alpha, 0.0),
            Complex64::from_polar(self.beta, self.phi),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }

    /// Distance between two states as rays: `1 - |<a|b>|^2`.
    pub fn infidelity(&self, other: &QubitState) -> f64 {
        let ip = self.amplitudes().dotc(&other.amplitudes());
        1.0 - ip.norm_sqr()
    }
}

/// Generator of a pulse step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    #[cfg_attr(feature = "serde", serde(rename = "Z"))]
    Z,
    #[cfg_attr(feature = "serde", serde(rename = "XY-diagonal"))]
    XyDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseStep {
    pub axis: Axis,
    pub duration: f64,
    pub coupling: f64,
}

impl PulseStep {
    pub fn angle(&self) -> f64 {
        self.duration * self.coupling
    }

    pub fn unitary(&self) -> Matrix2<Complex64> {
        axis_exp(self.axis, self.angle())
    }
}

/// Steps in application order.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseSequence {
    pub steps: Vec<PulseStep>,
}

impl PulseSequence {
    pub fn new(steps: Vec<PulseStep>) -> Result<Self> {
        for s in &steps {
            if !(s.duration >= 0.0) || !s.duration.is_finite() || !s.coupling.is_finite() {
                return Err(Error::InvalidParameter("step durations must be finite and non-negative".into()));
            }
        }
        Ok(PulseSequence { steps })
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    /// The same steps in reverse order with negated couplings.
    pub fn inverse(&self) -> PulseSequence {
        PulseSequence {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| PulseStep {
                    coupling: -s.coupling,
                    ..*s
                })
                .collect(),
        }
    }
}

/// `exp(-i a A)` for the step generator `A`.
pub fn axis_exp(axis: Axis, a: f64) -> Matrix2<Complex64> {
    match axis {
        Axis::Z => Matrix2::new(Complex64::from_polar(1.0, -a), ZERO, ZERO, Complex64::from_polar(1.0, a)),
        Axis::XyDiagonal => {
            let (s, c) = (SQRT_2 * a).sin_cos();
            // -i sin(.) (X + Y)/sqrt2
            let k = -I * (s * FRAC_1_SQRT_2);
            Matrix2::new(Complex64::new(c, 0.0), k * (ONE - I), k * (ONE + I), Complex64::new(c, 0.0))
        }
    }
}

/// Product of the step exponentials, last step leftmost.
pub fn sequence_unitary(seq: &PulseSequence) -> Matrix2<Complex64> {
    seq.steps.iter().fold(Matrix2::identity(), |acc, s| s.unitary() * acc)
}

/// Applies the sequence step by step and returns the canonical result.
pub fn evolve(seq: &PulseSequence, start: &QubitState) -> QubitState {
    let mut v = start.amplitudes();
    for s in &seq.steps {
        let a = s.angle();
        v = match s.axis {
            Axis::Z => Vector2::new(v[0] * Complex64::from_polar(1.0, -a), v[1] * Complex64::from_polar(1.0, a)),
            Axis::XyDiagonal => {
                let (sn, c) = (SQRT_2 * a).sin_cos();
                let k = -I * (sn * FRAC_1_SQRT_2);
                Vector2::new(c * v[0] + k * (ONE - I) * v[1], k * (ONE + I) * v[0] + c * v[1])
            }
        };
    }
    QubitState::from_amplitudes(v[0], v[1]).expect("unitary steps keep the norm")
}

/// `|tr(U^dagger V)| / 2`, one for equality up to a global phase.
pub fn gate_fidelity(u: &Matrix2<Complex64>, v: &Matrix2<Complex64>) -> f64 {
    (u.adjoint() * v).trace().norm() / 2.0
}

/// `||U^dagger U - 1||` in the Frobenius norm.
pub fn unitarity_deviation(u: &Matrix2<Complex64>) -> f64 {
    (u.adjoint() * u - Matrix2::identity()).norm()
}

pub fn identity_gate() -> Matrix2<Complex64> {
    Matrix2::identity()
}

pub fn hadamard() -> Matrix2<Complex64> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Matrix2::new(h, h, h, -h)
}

pub fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// `diag(1, e^{i lambda})`.
pub fn phase_gate(lambda: f64) -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, Complex64::from_polar(1.0, lambda))
}

/// Euler angles `(gamma, phi, theta)` of `e^{-i gamma Z} e^{-i phi (X+Y)} e^{-i theta Z}`.
pub fn sequence_from_angles(gamma: f64, phi: f64, theta: f64, j: f64, j_zz: f64) -> Result<PulseSequence> {
    if j == 0.0 || j_zz == 0.0 {
        return Err(Error::InvalidParameter("couplings must be non-zero".into()));
    }
    let steps = [(Axis::Z, theta, j_zz), (Axis::XyDiagonal, phi, j), (Axis::Z, gamma, j_zz)]
        .into_iter()
        .map(|(axis, angle, coupling)| PulseStep {
            axis,
            duration: angle / coupling,
            coupling,
        })
        .collect();
    PulseSequence::new(steps)
}

/// The printed Hadamard constants `gamma = pi/4`, `theta = 7 pi/4`, `phi = pi/4`.
pub fn quoted_hadamard_sequence(j: f64, j_zz: f64) -> Result<PulseSequence> {
    sequence_from_angles(FRAC_PI_4, FRAC_PI_4, 7.0 * FRAC_PI_4, j, j_zz)
}

/// Shifts `angle` by multiples of `period` so that `angle / coupling` is in `[0, period / |coupling|)`.
fn reduce_angle(angle: f64, period: f64, coupling: f64) -> f64 {
    let mut a = rem_euclid(angle, period);
    if period - a < 1e-12 || a < 1e-12 {
        a = 0.0;
    }
    if coupling < 0.0 && a > 0.0 {
        a -= period;
    }
    a
}

/// Three-step `Z`, `XY`, `Z` sequence reproducing `target` up to a global phase.
///
/// `tol` bounds the allowed infidelity `1 - |tr(U^dagger V)|/2`.
pub fn compile_gate(target: &Matrix2<Complex64>, j: f64, j_zz: f64, tol: f64) -> Result<PulseSequence> {
    let dev = unitarity_deviation(target);
    if !(dev <= 1e-10) {
        return Err(Error::NonUnitary { deviation: dev });
    }
    if j == 0.0 || j_zz == 0.0 || !j.is_finite() || !j_zz.is_finite() {
        return Err(Error::InvalidParameter("couplings must be finite and non-zero".into()));
    }
    let det = target.determinant();
    let v = target * (ONE / det.sqrt());
    let (a, b) = (v[(0, 0)], v[(0, 1)]);
    // v = Rz(l1) Rx(mu) Rz(l2) with R_n(t) = exp(-i t n.sigma / 2)
    let mu = 2.0 * b.norm().atan2(a.norm());
    let sum = -2.0 * a.arg();
    let diff = -2.0 * b.arg() - PI;
    // With one amplitude absent only the sum or the difference is fixed; pin theta = 0.
    let (l1, l2) = if b.norm() <= 1e-12 {
        (sum + FRAC_PI_4, -FRAC_PI_4)
    } else if a.norm() <= 1e-12 {
        (diff - FRAC_PI_4, -FRAC_PI_4)
    } else {
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    let gamma = (l1 - FRAC_PI_4) / 2.0;
    let theta = (l2 + FRAC_PI_4) / 2.0;
    let phi = mu / (2.0 * SQRT_2);

    let z_period = PI;
    let xy_period = PI / SQRT_2;
    let steps = vec![
        PulseStep {
            axis: Axis::Z,
            duration: reduce_angle(theta, z_period, j_zz) / j_zz,
            coupling: j_zz,
        },
        PulseStep {
            axis: Axis::XyDiagonal,
            duration: reduce_angle(phi, xy_period, j) / j,
            coupling: j,
        },
        PulseStep {
            axis: Axis::Z,
            duration: reduce_angle(gamma, z_period, j_zz) / j_zz,
            coupling: j_zz,
        },
    ];
    let seq = PulseSequence::new(steps)?;
    let fidelity = gate_fidelity(&sequence_unitary(&seq), target);
    if !(1.0 - fidelity <= tol) {
        return Err(Error::CompileFailed { fidelity });
    }
    Ok(seq)
}

/// Where the ramp starts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StartState {
    /// Ground state of the Hamiltonian at `t = 0`.
    InstantaneousGround,
    Given(QubitState),
}

/// Time grid and transverse term of the initialization ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RampConfig {
    pub duration: f64,
    pub dt: f64,
    /// Coefficient of `tau^x`, standing in for residual tunneling.
    pub transverse: f64,
    pub start: StartState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitOutcome {
    pub final_state: QubitState,
    /// `|<up|psi(T)>|^2`.
    pub overlap_up: f64,
    pub steps: usize,
}

/// `delta * (e^{-t/t0} - 1)`.
pub fn ramp_field(delta: f64, t0: f64) -> impl Fn(f64) -> f64 {
    move |t| delta * ((-t / t0).exp() - 1.0)
}

/// `-delta |e^{-t/t0} - 1|^power`.
///
/// A field `h` on every site couples to the logical qubit only through the
/// shortest fermion loop, so the `tau^z` coupling grows like `h^L` with `L`
/// the loop length. `power = 1` recovers [`ramp_field`] up to sign.
pub fn loop_field(delta: f64, t0: f64, power: i32) -> impl Fn(f64) -> f64 {
    move |t| -delta * (1.0 - (-t / t0).exp()).abs().powi(power)
}

/// Effective-level initialization protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitProtocol {
    /// Final `|tau^z|` coupling.
    pub delta: f64,
    /// Residual `tau^x` coupling.
    pub transverse: f64,
    /// Loop length entering [`loop_field`].
    pub power: i32,
    /// Evolution runs to `duration_factor * t0`.
    pub duration_factor: f64,
    /// Largest Bloch rotation per step.
    pub max_step_angle: f64,
}

impl Default for InitProtocol {
    fn default() -> Self {
        InitProtocol {
            delta: 1.0,
            transverse: 0.05,
            power: 3,
            duration_factor: 12.0,
            max_step_angle: 0.02,
        }
    }
}

impl InitProtocol {
    /// Smallest instantaneous gap, reached at `t = 0`.
    pub fn min_gap(&self) -> f64 {
        2.0 * self.transverse.abs()
    }

    /// Runs the ramp with time constant `t0` from the instantaneous ground state.
    pub fn run(&self, t0: f64) -> Result<InitOutcome> {
        if !(t0 > 0.0) || !(self.delta > 0.0) || self.power < 1 {
            return Err(Error::InvalidParameter("need t0 > 0, delta > 0, power >= 1".into()));
        }
        let r = (self.delta * self.delta + self.transverse * self.transverse).sqrt();
        let dt = (self.max_step_angle / (2.0 * r)).min(t0 / 50.0);
        let cfg = RampConfig {
            duration: self.duration_factor * t0,
            dt,
            transverse: self.transverse,
            start: StartState::InstantaneousGround,
        };
        simulate_initialization(&cfg, loop_field(self.delta, t0, self.power))
    }
}

fn ground_of(hz: f64, hx: f64) -> Vector2<Complex64> {
    // lowest eigenvector of hz Z + hx X
    let r = (hz * hz + hx * hx).sqrt();
    if r == 0.0 {
        return Vector2::new(ONE, ZERO);
    }
    let (c, s) = (((1.0 - hz / r) / 2.0).sqrt(), ((1.0 + hz / r) / 2.0).sqrt());
    // (hz - (-r)) c_up + hx c_down = 0 up to sign convention
    if hx >= 0.0 {
        Vector2::new(Complex64::new(c, 0.0), Complex64::new(-s, 0.0))
    } else {
        Vector2::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    }
}

/// Time-ordered evolution under `hz(t) tau^z + transverse tau^x` for `t` in `[0, duration]`.
///
/// Each step uses the exact exponential at the step midpoint; a Bloch rotation
/// of more than 0.1 rad per step is rejected.
pub fn simulate_initialization(cfg: &RampConfig, effective_hz: impl Fn(f64) -> f64) -> Result<InitOutcome> {
    if !(cfg.dt > 0.0) || !(cfg.duration >= 0.0) || !cfg.transverse.is_finite() {
        return Err(Error::InvalidParameter("need dt > 0 and duration >= 0".into()));
    }
    let steps = (cfg.duration / cfg.dt).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { cfg.duration / steps as f64 };
    let mut v = match cfg.start {
        StartState::InstantaneousGround => ground_of(effective_hz(0.0), cfg.transverse),
        StartState::Given(s) => s.amplitudes(),
    };
    let hx = cfg.transverse;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        let hz = effective_hz(t);
        let r = (hz * hz + hx * hx).sqrt();
        let angle = 2.0 * r * dt;
        if angle > 0.1 {
            return Err(Error::StepTooLarge { angle });
        }
        if r == 0.0 {
            continue;
        }
        let (s, c) = (r * dt).sin_cos();
        let (nz, nx) = (hz / r, hx / r);
        let u = Matrix2::new(
            Complex64::new(c, -s * nz),
            Complex64::new(0.0, -s * nx),
            Complex64::new(0.0, -s * nx),
            Complex64::new(c, s * nz),
        );
        v = u * v;
    }
    let overlap_up = v[0].norm_sqr() / (v[0].norm_sqr() + v[1].norm_sqr());
    Ok(InitOutcome {
        final_state: QubitState::from_amplitudes(v[0], v[1])?,
        overlap_up,
        steps,
    })
}

/// Lattice-level check: RK4 integration of `H0 + s(t) V` on at most 12 sites.
///
/// Returns the final state. The caller supplies the schedule `s(t)`.
pub fn evolve_lattice_rk4(
    h0: &HamiltonianSpec,
    v: &HamiltonianSpec,
    schedule: impl Fn(f64) -> f64,
    start: &StateVector,
    duration: f64,
    dt: f64,
) -> Result<StateVector> {
    let cap = SolverOptions::default().site_cap.min(12);
    let a = CompiledOperator::new(h0, cap)?;
    let b = CompiledOperator::new(v, cap)?;
    if start.n_sites() != a.n_sites() || b.n_sites() != a.n_sites() {
        return Err(Error::SizeMismatch {
            left: a.n_sites(),
            right: start.n_sites(),
        });
    }
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidParameter("need dt > 0 and duration >= 0".into()));
    }
    let bound = h0.norm_bound() + v.norm_bound() * (0..=16).map(|k| schedule(duration * k as f64 / 16.0).abs()).fold(0.0, f64::max);
    let steps = (duration / dt).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { duration / steps as f64 };
    if bound * dt > 0.5 {
        return Err(Error::StepTooLarge { angle: bound * dt });
    }
    let dim = a.dim();
    let mut psi = start.amplitudes().to_vec();
    let mut tmp = vec![ZERO; dim];
    let mut deriv = |t: f64, x: &[Complex64], out: &mut Vec<Complex64>| {
        a.apply(x, out);
        b.apply(x, &mut tmp);
        let s = schedule(t);
        for (o, w) in out.iter_mut().zip(&tmp) {
            *o = -I * (*o + w * s);
        }
    };
    let mut k1 = vec![ZERO; dim];
    let mut k2 = vec![ZERO; dim];
    let mut k3 = vec![ZERO; dim];
    let mut k4 = vec![ZERO; dim];
    let mut y = vec![ZERO; dim];
    for n in 0..steps {
        let t = n as f64 * dt;
        deriv(t, &psi, &mut k1);
        for i in 0..dim {
            y[i] = psi[i] + k1[i] * (dt / 2.0);
        }
        deriv(t + dt / 2.0, &y, &mut k2);
        for i in 0..dim {
            y[i] = psi[i] + k2[i] * (dt / 2.0);
        }
        deriv(t + dt / 2.0, &y, &mut k3);
        for i in 0..dim {
            y[i] = psi[i] + k3[i] * dt;
        }
        deriv(t + dt, &y, &mut k4);
        for i in 0..dim {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    StateVector::from_amplitudes(start.n_sites(), psi)
}

/// Squared overlaps `|<w_i|psi>|^2` with a list of reference states.
pub fn populations(psi: &StateVector, refs: &[StateVector]) -> Vec<f64> {
    refs.iter().map(|r| dot(r.amplitudes(), psi.amplitudes()).norm_sqr()).collect()
}

/// Dense 2x2 as a general matrix, for callers working with `DMatrix`.
pub fn to_dmatrix(u: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |i, j| u[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(axis: Axis, angle: f64) -> PulseStep {
        PulseStep {
            axis,
            duration: angle,
            coupling: 1.0,
        }
    }

    #[test]
    fn empty_sequence_is_identity() {
        let s = QubitState::new(0.6, 0.8, 1.0).unwrap();
        let out = evolve(&PulseSequence::default(), &s);
        assert!(s.infidelity(&out) < 1e-15);
        assert!((gate_fidelity(&sequence_unitary(&PulseSequence::default()), &identity_gate()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z_step_keeps_up() {
        let seq = PulseSequence::new(vec![step(Axis::Z, PI)]).unwrap();
        let out = evolve(&seq, &QubitState::UP);
        assert!((out.alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn xy_quarter_turn_makes_equal_superposition() {
        let seq = PulseSequence::new(vec![step(Axis::XyDiagonal, PI / (4.0 * SQRT_2))]).unwrap();
        let out = evolve(&seq, &QubitState::UP);
        assert!((out.alpha - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((out.beta - FRAC_1_SQRT_2).abs() < 1e-12);
        // a full flip takes twice as long
        let seq = PulseSequence::new(vec![step(Axis::XyDiagonal, PI / (2.0 * SQRT_2))]).unwrap();
        assert!(evolve(&seq, &QubitState::UP).beta > 1.0 - 1e-12);
    }

    #[test]
    fn xy_generator_squares_to_two() {
        let u = axis_exp(Axis::XyDiagonal, 0.37);
        assert!(unitarity_deviation(&u) < 1e-14);
        let g = pauli_x() + Matrix2::new(ZERO, -I, I, ZERO);
        assert!((g * g - Matrix2::identity() * Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn named_targets_compile() {
        for target in [identity_gate(), hadamard(), pauli_x(), pauli_z(), phase_gate(0.3), -identity_gate()] {
            let seq = compile_gate(&target, 1.0, 1.0, 1e-9).unwrap();
            assert!(gate_fidelity(&sequence_unitary(&seq), &target) > 1.0 - 1e-9);
            assert!(seq.steps.iter().all(|s| s.duration >= 0.0));
        }
        let id = compile_gate(&identity_gate(), 1.0, 1.0, 1e-9).unwrap();
        assert!(id.steps.iter().all(|s| s.duration == 0.0), "{id:?}");
    }

    #[test]
    fn negative_couplings_give_non_negative_durations() {
        let seq = compile_gate(&hadamard(), -0.5, -2.0, 1e-9).unwrap();
        assert!(seq.steps.iter().all(|s| s.duration >= 0.0));
        assert!(gate_fidelity(&sequence_unitary(&seq), &hadamard()) > 1.0 - 1e-9);
    }

    #[test]
    fn non_unitary_target_rejected() {
        let m = Matrix2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(compile_gate(&m, 1.0, 1.0, 1e-9), Err(Error::NonUnitary { .. })));
        assert!(compile_gate(&hadamard(), 0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn inverse_sequence_undoes() {
        let seq = compile_gate(&hadamard(), 0.7, 1.3, 1e-9).unwrap();
        let mut all = seq.clone();
        all.steps.extend(seq.inverse().steps);
        assert!((sequence_unitary(&all) - Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn canonical_form() {
        let s = QubitState::from_amplitudes(Complex64::new(0.0, 0.6), Complex64::new(0.8, 0.0)).unwrap();
        assert!((s.alpha - 0.6).abs() < 1e-15 && (s.beta - 0.8).abs() < 1e-15);
        assert!((s.phi - 1.5 * PI).abs() < 1e-12);
        assert!(QubitState::new(0.6, 0.6, 0.0).is_err());
    }

    #[test]
    fn ramp_without_transverse_term_keeps_up() {
        let cfg = RampConfig {
            duration: 50.0,
            dt: 0.01,
            transverse: 0.0,
            start: StartState::Given(QubitState::UP),
        };
        let out = simulate_initialization(&cfg, ramp_field(1.0, 3.0)).unwrap();
        assert!((out.overlap_up - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slow_loop_ramp_reaches_up() {
        let p = InitProtocol::default();
        let slow = p.run(50.0 / p.min_gap()).unwrap().overlap_up;
        let fast = p.run(0.5 / p.min_gap()).unwrap().overlap_up;
        assert!(slow > 0.99, "{slow}");
        assert!(fast < slow);
    }

    #[test]
    fn ramp_step_guard() {
        let cfg = RampConfig {
            duration: 1.0,
            dt: 0.5,
            transverse: 0.1,
            start: StartState::InstantaneousGround,
        };
        assert!(matches!(simulate_initialization(&cfg, ramp_field(1.0, 1.0)), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn start_is_transverse_ground_state() {
        let g = ground_of(0.0, 0.2);
        // <g| 0.2 X |g> = -0.2
        let e = (g.adjoint() * pauli_x() * g)[(0, 0)].re * 0.2;
        assert!((e + 0.2).abs() < 1e-15);
        let g = ground_of(-1.0, 0.0);
        assert!((g[0].norm() - 1.0).abs() < 1e-15);
    }
}
