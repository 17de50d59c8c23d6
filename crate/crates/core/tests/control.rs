mod common;

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toricsim_core::eigen::{ground_space, SolverOptions};
use toricsim_core::interference::{
    fermion_branch_probabilities, reconstruct, reconstruct_from_probabilities, run_experiment,
    vortex_branch_probabilities, InterferenceConfig, Probe, PHI_THRESHOLD,
};
use toricsim_core::model::{build_uniform_perturbation, build_wen};
use toricsim_core::qubit::{
    compile_gate, evolve, evolve_lattice_rk4, gate_fidelity, populations, sequence_unitary,
    unitarity_deviation, Axis, InitProtocol, PulseSequence, PulseStep, QubitState,
};
use toricsim_core::toric::{find_logicals, label_ground_space};
use toricsim_core::{HamiltonianSpec, LatticeSpec, StateVector};

/// Haar-distributed SU(2) element times a random phase.
fn haar(rng: &mut ChaCha8Rng) -> Matrix2<Complex64> {
    let q = loop {
        let v: [f64; 4] = [0; 4].map(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            break v.map(|x| x / n);
        }
    };
    let ph = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
    Matrix2::new(
        Complex64::new(q[0], q[1]),
        Complex64::new(q[2], q[3]),
        Complex64::new(-q[2], q[3]),
        Complex64::new(q[0], -q[1]),
    ) * ph
}

fn state(alpha: f64, phi: f64) -> QubitState {
    QubitState::new(alpha, (1.0 - alpha * alpha).sqrt(), phi).unwrap()
}

proptest! {
    #[test]
    fn compiled_sequences_reproduce_haar_targets(seed in any::<u64>(), j in 0.3f64..3.0, jzz in -3.0f64..-0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar(&mut rng);
        prop_assert!(unitarity_deviation(&u) < 1e-12);
        for jz in [jzz, -jzz] {
            let seq = compile_gate(&u, j, jz, 1e-9).unwrap();
            prop_assert!(seq.steps.iter().all(|s| s.duration >= 0.0));
            prop_assert!(1.0 - gate_fidelity(&sequence_unitary(&seq), &u) <= 1e-9);
        }
    }

    #[test]
    fn evolve_matches_sequence_unitary(a in 0.0f64..1.0, phi in 0.0f64..6.28, d in proptest::collection::vec(0.0f64..3.0, 1..6)) {
        let steps: Vec<PulseStep> = d
            .iter()
            .enumerate()
            .map(|(k, &t)| PulseStep { axis: if k % 2 == 0 { Axis::Z } else { Axis::XyDiagonal }, duration: t, coupling: 0.7 })
            .collect();
        let seq = PulseSequence::new(steps).unwrap();
        let s = state(a, phi);
        let out = evolve(&seq, &s);
        let v = sequence_unitary(&seq) * s.amplitudes();
        let expect = QubitState::from_amplitudes(v[0], v[1]).unwrap();
        prop_assert!(out.infidelity(&expect) < 1e-12);
        let back = evolve(&seq.inverse(), &out);
        prop_assert!(back.infidelity(&s) < 1e-12);
    }

    #[test]
    fn branch_probabilities_are_distributions(a in 0.0f64..=1.0, phi in -10.0f64..10.0) {
        let s = state(a, phi);
        for (p, q) in [fermion_branch_probabilities(&s), vortex_branch_probabilities(&s)] {
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&p) && (-1e-15..=1.0 + 1e-15).contains(&q));
            prop_assert!((p + q - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_probabilities_invert(a in 0.2f64..0.97, phi in 0.0f64..PI) {
        let s = state(a, phi);
        let r = reconstruct_from_probabilities(
            fermion_branch_probabilities(&s).0,
            vortex_branch_probabilities(&s).0,
            None,
            PHI_THRESHOLD,
        ).unwrap();
        prop_assert!((r.alpha_hat - s.alpha).abs() < 1e-10);
        prop_assert!((r.beta_hat - s.beta).abs() < 1e-10);
        prop_assert!((r.cos_phi_hat.unwrap() - phi.cos()).abs() < 1e-10);
    }

    #[test]
    fn counts_are_seeded_and_complete(a in 0.0f64..=1.0, phi in 0.0f64..6.0, shots in 1u64..3000, seed in any::<u64>()) {
        let s = state(a, phi);
        for particle in [Probe::Fermion, Probe::Vortex] {
            let cfg = InterferenceConfig { particle, hop_amplitude: 0.5, shots, seed };
            let c = run_experiment(&s, &cfg).unwrap();
            prop_assert_eq!(c.constructive + c.destructive, shots);
            prop_assert_eq!(c, run_experiment(&s, &cfg).unwrap());
        }
    }
}

#[test]
fn sampled_error_shrinks_with_shots() {
    let s = state(0.6, 1.1);
    let mut errs = Vec::new();
    for shots in [100u64, 10_000, 1_000_000] {
        let mut total = 0.0;
        for seed in 0..5 {
            let run = |particle, seed| {
                run_experiment(&s, &InterferenceConfig { particle, hop_amplitude: 1.0, shots, seed }).unwrap()
            };
            let r = reconstruct(&run(Probe::Fermion, 2 * seed), &run(Probe::Vortex, 2 * seed + 1), PHI_THRESHOLD).unwrap();
            total += (r.alpha_hat - 0.6).abs() + (r.cos_phi_hat.unwrap() - 1.1f64.cos()).abs();
        }
        errs.push(total / 5.0);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn slower_ramps_initialize_better() {
    let p = InitProtocol::default();
    let ladder = [0.5, 1.5, 5.0, 15.0, 50.0];
    let overlaps: Vec<f64> = ladder.iter().map(|k| p.run(k / p.min_gap()).unwrap().overlap_up).collect();
    assert!(overlaps.windows(2).all(|w| w[1] > w[0]), "{overlaps:?}");
    assert!(overlaps[4] >= 0.99);
}

fn lattice_3x3() -> (LatticeSpec, HamiltonianSpec) {
    let l = LatticeSpec::new(3, 3).unwrap();
    (l, build_wen(&l, 1.0).unwrap())
}

#[test]
fn rk4_keeps_eigenstates_stationary() {
    let (l, h0) = lattice_3x3();
    let v = build_uniform_perturbation(&l, 0.0, 1.0).unwrap();
    let gs = ground_space(&h0, 2, 1e-6, &SolverOptions::default()).unwrap();
    let out = evolve_lattice_rk4(&h0, &v, |_| 0.0, &gs.basis[0], 3.0, 0.002).unwrap();
    let pop = populations(&out, &gs.basis);
    assert!((pop[0] - 1.0).abs() < 1e-8, "{pop:?}");
    assert!(pop[1] < 1e-12);
}

#[test]
fn rk4_z_ramp_preserves_the_fermion_sector() {
    let (l, h0) = lattice_3x3();
    let v = build_uniform_perturbation(&l, 0.0, 1.0).unwrap();
    let gs = ground_space(&h0, 2, 1e-6, &SolverOptions::default()).unwrap();
    let f = label_ground_space(&gs, &find_logicals(&l).unwrap()).unwrap();
    let up: StateVector = f.labeling.as_ref().unwrap().states[0].clone();
    let z = &f.z_logicals[0];
    let mut out = evolve_lattice_rk4(&h0, &v, |t| 0.2 * ((-t / 2.0f64).exp() - 1.0), &up, 8.0, 0.005).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-6);
    out.normalize();
    // Sum of sigma^z commutes with the Z loop, so its eigenvalue is conserved.
    assert!((z.expectation(&out).unwrap().re - 1.0).abs() < 1e-10);
}
