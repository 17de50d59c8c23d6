mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use toricsim_core::eigen::{ground_space, SolverOptions};
use toricsim_core::model::{build_uniform_perturbation, build_wen};
use toricsim_core::toric::{
    cluster_splitting, extract_effective, find_logicals, label_ground_space, pseudo_spin_operator,
    verify_heisenberg_algebra, LogicalFrame, TunnelingMap,
};
use toricsim_core::LatticeSpec;

fn labeled(lx: usize, ly: usize) -> LogicalFrame {
    let l = LatticeSpec::new(lx, ly).unwrap();
    let h = build_wen(&l, 1.0).unwrap();
    let frame = find_logicals(&l).unwrap();
    let gs = ground_space(&h, frame.code_dimension(), 1e-6, &SolverOptions::default()).unwrap();
    label_ground_space(&gs, &frame).unwrap()
}

#[test]
fn frames_obey_the_algebra() {
    for (lx, ly) in [(3, 3), (4, 4), (3, 4), (4, 3), (5, 3), (4, 6), (6, 6), (5, 7), (8, 4)] {
        let f = find_logicals(&LatticeSpec::new(lx, ly).unwrap()).unwrap();
        assert!(verify_heisenberg_algebra(&f), "{lx}x{ly}");
        let expect = if lx % 2 == 0 && ly % 2 == 0 { 2 } else { 1 };
        assert_eq!(f.pairs(), expect, "{lx}x{ly}");
    }
}

#[test]
fn labeled_basis_diagonalizes_z_logicals() {
    for (lx, ly) in [(3, 3), (4, 4)] {
        let f = labeled(lx, ly);
        let states = &f.labeling.as_ref().unwrap().states;
        let pairs = f.pairs();
        for (k, z) in f.z_logicals.iter().enumerate() {
            let m = matrix_elements(z, states);
            for i in 0..states.len() {
                let down = i >> (pairs - 1 - k) & 1 == 1;
                let want = if down { -1.0 } else { 1.0 };
                assert!((m[(i, i)] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        for (k, x) in f.x_logicals.iter().enumerate() {
            let m = matrix_elements(x, states);
            for i in 0..states.len() {
                let j = i ^ (1 << (pairs - 1 - k));
                assert!((m[(i, j)] - ONE).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn tunneling_loops_act_as_tabulated_pseudo_spin_operators() {
    let f = labeled(4, 4);
    let states = &f.labeling.as_ref().unwrap().states;
    for (process, (a, b)) in TunnelingMap::ENTRIES {
        let s = TunnelingMap::loop_string(&f.lattice, process).unwrap();
        let m = matrix_elements(&s, states);
        let target = pseudo_spin_operator(a, b);
        // equal up to a global phase
        let overlap = (target.adjoint() * &m).trace() / 4.0;
        assert!((overlap.norm() - 1.0).abs() < 1e-10, "{process:?}");
        assert!(max_abs_diff(&m, &(target * overlap)) < 1e-10, "{process:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extraction_reproduces_cluster(hx in 0.05f64..0.3, hz in 0.0f64..0.2) {
        let f = labeled(3, 3);
        let l = f.lattice;
        let h = build_wen(&l, 1.0).unwrap().plus(&build_uniform_perturbation(&l, hx, hz).unwrap()).unwrap();
        let gs = ground_space(&h, 2, 1.0, &SolverOptions::default()).unwrap();
        let p = extract_effective(&h, &gs, &f).unwrap();
        let e = p.eigenvalues();
        prop_assert!((e[0] - gs.energies[0]).abs() < 1e-9);
        prop_assert!((e[1] - gs.energies[1]).abs() < 1e-9);
        prop_assert!((p.splitting() - cluster_splitting(&gs)).abs() < 1e-9);
        prop_assert!(p.fit_residual < 1e-9);
    }
}
