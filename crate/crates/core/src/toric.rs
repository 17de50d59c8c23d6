//! Logical operators and effective pseudo-spin models of the plaquette torus.
//!
//! Loop strings used here:
//! - `Z` on a full row or column moves a fermion around the torus.
//! - Alternating `X`/`Y` along a row or column (even torus length) moves a
//!   vortex (`X` on even sites) or a charge (`X` on odd sites).
//! - `X` along the `(1,-1)` diagonal and `Y` along the `(1,1)` diagonal close
//!   after `lx * ly / gcd(lx, ly)` steps.
//!
//! Each commutes with every plaquette. A z-logical always comes with an
//! anticommuting partner, so none is a product of plaquettes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::GroundSpace;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ParityClass};
use crate::model::{plaquettes, HamiltonianSpec};
use crate::pauli::{Pauli, PauliString};
use crate::state::{dot, StateVector};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `Z` on every site of row `y`.
pub fn z_row(l: &LatticeSpec, y: usize) -> PauliString {
    let ops: Vec<_> = (0..l.lx()).map(|x| (l.site(x as isize, y as isize), Pauli::Z)).collect();
    PauliString::from_ops(l.n_sites(), &ops).expect("row sites are on the lattice")
}

/// `Z` on every site of column `x`.
pub fn z_col(l: &LatticeSpec, x: usize) -> PauliString {
    let ops: Vec<_> = (0..l.ly()).map(|y| (l.site(x as isize, y as isize), Pauli::Z)).collect();
    PauliString::from_ops(l.n_sites(), &ops).expect("column sites are on the lattice")
}

/// Which sublattice carries `X` in an alternating string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Pattern {
    /// `X` on even sites, `Y` on odd sites.
    Vortex,
    /// `X` on odd sites, `Y` on even sites.
    Charge,
}

fn alternating_op(l: &LatticeSpec, site: usize, pattern: Pattern) -> Pauli {
    let even = l.site_parity(site) == 0;
    match (pattern, even) {
        (Pattern::Vortex, true) | (Pattern::Charge, false) => Pauli::X,
        _ => Pauli::Y,
    }
}

/// Alternating string along row `y`; needs an even `lx`.
pub fn alternating_row(l: &LatticeSpec, y: usize, pattern: Pattern) -> Result<PauliString> {
    if l.lx() % 2 != 0 {
        return Err(Error::InvalidLattice(format!("alternating row needs even lx, got {}", l.lx())));
    }
    let ops: Vec<_> = (0..l.lx())
        .map(|x| {
            let s = l.site(x as isize, y as isize);
            (s, alternating_op(l, s, pattern))
        })
        .collect();
    PauliString::from_ops(l.n_sites(), &ops)
}

/// Alternating string along column `x`; needs an even `ly`.
pub fn alternating_col(l: &LatticeSpec, x: usize, pattern: Pattern) -> Result<PauliString> {
    if l.ly() % 2 != 0 {
        return Err(Error::InvalidLattice(format!("alternating column needs even ly, got {}", l.ly())));
    }
    let ops: Vec<_> = (0..l.ly())
        .map(|y| {
            let s = l.site(x as isize, y as isize);
            (s, alternating_op(l, s, pattern))
        })
        .collect();
    PauliString::from_ops(l.n_sites(), &ops)
}

/// `X` on the closed `(1,-1)` diagonal through `(x, y)`.
pub fn diagonal_x(l: &LatticeSpec, x: usize, y: usize) -> PauliString {
    let ops: Vec<_> = (0..l.tunneling_length() as isize)
        .map(|k| (l.site(x as isize + k, y as isize - k), Pauli::X))
        .collect();
    PauliString::from_ops(l.n_sites(), &ops).expect("diagonal sites are on the lattice")
}

/// `Y` on the closed `(1,1)` diagonal through `(x, y)`.
pub fn diagonal_y(l: &LatticeSpec, x: usize, y: usize) -> PauliString {
    let ops: Vec<_> = (0..l.tunneling_length() as isize)
        .map(|k| (l.site(x as isize + k, y as isize + k), Pauli::Y))
        .collect();
    PauliString::from_ops(l.n_sites(), &ops).expect("diagonal sites are on the lattice")
}

/// Basis of the code space: one labeled state per pseudo-spin configuration.
///
/// State `i` has pseudo-spin `k` down when bit `npairs - 1 - k` of `i` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub states: Vec<StateVector>,
    /// `z_eigenvalues[i][k]` is the eigenvalue of z-logical `k` on state `i`.
    pub z_eigenvalues: Vec<Vec<i8>>,
}

/// Loop operators and, once labeled, the pseudo-spin basis they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalFrame {
    pub lattice: LatticeSpec,
    pub z_logicals: Vec<PauliString>,
    pub x_logicals: Vec<PauliString>,
    /// Human-readable shape of each logical, z first.
    pub shapes: Vec<String>,
    pub labeling: Option<Labeling>,
}

impl LogicalFrame {
    pub fn pairs(&self) -> usize {
        self.z_logicals.len()
    }

    pub fn code_dimension(&self) -> usize {
        1 << self.pairs()
    }
}

fn check_logical(l: &LatticeSpec, p: &PauliString, plaq: &[PauliString]) -> bool {
    p.n_sites() == l.n_sites()
        && p.multiply(p).map(|sq| sq == PauliString::identity(l.n_sites())).unwrap_or(false)
        && plaq.iter().all(|f| f.commutes(p).unwrap_or(false))
}

/// Loop operators for the lattice.
///
/// Even tori get fermion loops `Z_col` (pseudo-spin 1) and `Z_row` (pseudo-spin 2)
/// paired with vortex loops along the row and the column. Other tori take the
/// first anticommuting pair from a fixed candidate list.
pub fn find_logicals(l: &LatticeSpec) -> Result<LogicalFrame> {
    let plaq = plaquettes(l);
    let (z, x, shapes) = if l.parity_class() == ParityClass::EvenEven {
        (
            vec![z_col(l, 0), z_row(l, 0)],
            vec![
                alternating_row(l, 0, Pattern::Vortex)?,
                alternating_col(l, 0, Pattern::Vortex)?,
            ],
            vec![
                String::from("Z column x=0"),
                String::from("Z row y=0"),
                String::from("vortex X/Y row y=0"),
                String::from("vortex X/Y column x=0"),
            ],
        )
    } else {
        let zs = [(z_row(l, 0), "Z row y=0"), (z_col(l, 0), "Z column x=0")];
        let mut xs: Vec<(PauliString, &str)> = Vec::new();
        if l.lx() % 2 == 0 {
            xs.push((alternating_row(l, 0, Pattern::Vortex)?, "vortex X/Y row y=0"));
        }
        if l.ly() % 2 == 0 {
            xs.push((alternating_col(l, 0, Pattern::Vortex)?, "vortex X/Y column x=0"));
        }
        xs.push((diagonal_x(l, 0, 0), "X diagonal (1,-1) through (0,0)"));
        xs.push((diagonal_y(l, 0, 0), "Y diagonal (1,1) through (0,0)"));
        let found = zs.iter().find_map(|(zp, zn)| {
            xs.iter()
                .find(|(xp, _)| !zp.commutes(xp).unwrap_or(true))
                .map(|(xp, xn)| (zp.clone(), xp.clone(), String::from(*zn), String::from(*xn)))
        });
        let (zp, xp, zn, xn) = found.ok_or(Error::NoLogicals { lx: l.lx(), ly: l.ly() })?;
        (vec![zp], vec![xp], vec![zn, xn])
    };
    let frame = LogicalFrame {
        lattice: *l,
        z_logicals: z,
        x_logicals: x,
        shapes,
        labeling: None,
    };
    let ok = frame
        .z_logicals
        .iter()
        .chain(&frame.x_logicals)
        .all(|p| check_logical(l, p, &plaq))
        && verify_heisenberg_algebra(&frame);
    if !ok {
        return Err(Error::NoLogicals { lx: l.lx(), ly: l.ly() });
    }
    Ok(frame)
}

fn anticommute_exactly(a: &PauliString, b: &PauliString) -> bool {
    match (a.multiply(b), b.multiply(a)) {
        (Ok(ab), Ok(ba)) => ab.same_masks(&ba) && ab.phase() == ba.phase() * crate::pauli::Phase::MINUS_ONE,
        _ => false,
    }
}

fn commute_exactly(a: &PauliString, b: &PauliString) -> bool {
    matches!((a.multiply(b), b.multiply(a)), (Ok(ab), Ok(ba)) if ab == ba)
}

/// True iff each pair satisfies `x z = -z x`, distinct pairs commute, and
/// every logical squares to the identity. Uses exact phase arithmetic.
pub fn verify_heisenberg_algebra(frame: &LogicalFrame) -> bool {
    let n = frame.lattice.n_sites();
    let id = PauliString::identity(n);
    let pairs = frame.z_logicals.len();
    if pairs == 0 || frame.x_logicals.len() != pairs {
        return false;
    }
    let squares_ok = frame
        .z_logicals
        .iter()
        .chain(&frame.x_logicals)
        .all(|p| p.multiply(p).map(|s| s == id).unwrap_or(false));
    if !squares_ok {
        return false;
    }
    for a in 0..pairs {
        for b in 0..pairs {
            let (z, x) = (&frame.z_logicals[a], &frame.x_logicals[b]);
            let ok = if a == b {
                anticommute_exactly(x, z)
            } else {
                commute_exactly(x, z)
                    && commute_exactly(&frame.z_logicals[a], &frame.z_logicals[b])
                    && commute_exactly(&frame.x_logicals[a], &frame.x_logicals[b])
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

fn matrix_in_basis(p: &PauliString, basis: &[StateVector]) -> Result<(DMatrix<Complex64>, f64)> {
    // Returns the restricted matrix and the norm of the part leaking out.
    let d = basis.len();
    let mut m = DMatrix::from_element(d, d, ZERO);
    let mut leak: f64 = 0.0;
    for j in 0..d {
        let pv = p.apply(&basis[j])?;
        let mut rest = pv.amplitudes().to_vec();
        for i in 0..d {
            let c = dot(basis[i].amplitudes(), pv.amplitudes());
            m[(i, j)] = c;
            for (r, b) in rest.iter_mut().zip(basis[i].amplitudes()) {
                *r -= c * b;
            }
        }
        leak = leak.max(rest.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok((m, leak))
}

fn combine_states(n: usize, basis: &[StateVector], coeffs: &[Complex64]) -> Result<StateVector> {
    let mut out = vec![ZERO; 1 << n];
    for (b, c) in basis.iter().zip(coeffs) {
        for (o, a) in out.iter_mut().zip(b.amplitudes()) {
            *o += c * a;
        }
    }
    StateVector::from_amplitudes(n, out)
}

/// Fixes the pseudo-spin basis of an unperturbed ground space.
///
/// `|up...up>` is the joint +1 eigenvector of the z-logicals, phased so its
/// largest amplitude is real and positive. Other labels follow by applying
/// x-logicals, so every x-logical has matrix elements exactly 1 between
/// labels differing in its bit.
pub fn label_ground_space(gs: &GroundSpace, frame: &LogicalFrame) -> Result<LogicalFrame> {
    let n = frame.lattice.n_sites();
    let pairs = frame.pairs();
    let d = frame.code_dimension();
    if gs.dimension != d || gs.basis.len() != d {
        return Err(Error::FrameInconsistent(format!(
            "ground space has dimension {}, frame expects {d}",
            gs.dimension
        )));
    }
    if gs.basis.iter().any(|v| v.n_sites() != n) {
        return Err(Error::FrameInconsistent("ground space lives on another lattice".into()));
    }
    let mut proj = DMatrix::<Complex64>::identity(d, d);
    for z in &frame.z_logicals {
        let (m, leak) = matrix_in_basis(z, &gs.basis)?;
        if leak > 1e-10 {
            return Err(Error::FrameInconsistent(format!(
                "z-logical leaks out of the ground space by {leak:.2e}"
            )));
        }
        proj = proj * (DMatrix::identity(d, d) + m) * Complex64::new(0.5, 0.0);
    }
    let best = (0..d)
        .max_by(|&a, &b| proj.column(a).norm().total_cmp(&proj.column(b).norm()))
        .expect("non-empty ground space");
    let col: Vec<Complex64> = proj.column(best).iter().copied().collect();
    let mut up = combine_states(n, &gs.basis, &col)?;
    up.normalize();
    let pivot = up
        .amplitudes()
        .iter()
        .copied()
        .fold(ZERO, |acc, a| if a.norm() > acc.norm() + 1e-12 { a } else { acc });
    let rot = pivot.conj() / pivot.norm();
    for a in up.amplitudes_mut() {
        *a *= rot;
    }

    let mut states = Vec::with_capacity(d);
    let mut z_eigenvalues = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = up.clone();
        let mut eig = Vec::with_capacity(pairs);
        for k in 0..pairs {
            let bit = (i >> (pairs - 1 - k)) & 1;
            if bit == 1 {
                v = frame.x_logicals[k].apply(&v)?;
            }
            eig.push(if bit == 1 { -1 } else { 1 });
        }
        states.push(v);
        z_eigenvalues.push(eig);
    }

    // The labeled states must span the ground space and diagonalize every z-logical.
    for (i, s) in states.iter().enumerate() {
        for (k, z) in frame.z_logicals.iter().enumerate() {
            let e = z.expectation(s)?;
            if (e - Complex64::new(z_eigenvalues[i][k] as f64, 0.0)).norm() > 1e-10 {
                return Err(Error::FrameInconsistent(format!("state {i} is not a z-logical eigenstate")));
            }
        }
        for (j, t) in states.iter().enumerate() {
            let ip = s.inner(t)?;
            let want = if i == j { ONE } else { ZERO };
            if (ip - want).norm() > 1e-10 {
                return Err(Error::FrameInconsistent("labeled states are not orthonormal".into()));
            }
        }
        let captured: f64 = gs.basis.iter().map(|g| g.inner(s).map(|c| c.norm_sqr()).unwrap_or(0.0)).sum();
        if (captured - 1.0).abs() > 1e-10 {
            return Err(Error::FrameInconsistent("labeled state leaves the ground space".into()));
        }
    }
    Ok(LogicalFrame {
        labeling: Some(Labeling { states, z_eigenvalues }),
        ..frame.clone()
    })
}

/// Couplings of the pseudo-spin Hamiltonian, in energy units.
///
/// For one logical qubit the `tau^x`, `tau^y`, `tau^z` coefficients land in
/// `j_xx`, `j_yy`, `h1_z` and the rest are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectiveParams {
    pub j_xx: f64,
    pub j_yy: f64,
    pub j_zz: f64,
    pub j_zx: f64,
    pub j_xz: f64,
    pub h1_x: f64,
    pub h1_z: f64,
    pub h2_x: f64,
    pub h2_z: f64,
    /// Frobenius norm of the part of the matrix these terms miss.
    pub fit_residual: f64,
    /// Identity component.
    pub offset: f64,
    pub n_qubits: usize,
}

fn pauli2(p: Pauli) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::identity(2, 2),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Matrix of `tau_1^a (x) tau_2^b`, first factor most significant.
pub fn pseudo_spin_operator(a: Pauli, b: Pauli) -> DMatrix<Complex64> {
    pauli2(a).kronecker(&pauli2(b))
}

/// Matrix of a single pseudo-spin Pauli.
pub fn single_pseudo_spin(a: Pauli) -> DMatrix<Complex64> {
    pauli2(a)
}

const SINGLE_SLOTS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
const PAIR_SLOTS: [(Pauli, Pauli); 9] = [
    (Pauli::X, Pauli::X),
    (Pauli::Y, Pauli::Y),
    (Pauli::Z, Pauli::Z),
    (Pauli::Z, Pauli::X),
    (Pauli::X, Pauli::Z),
    (Pauli::X, Pauli::I),
    (Pauli::Z, Pauli::I),
    (Pauli::I, Pauli::X),
    (Pauli::I, Pauli::Z),
];

impl EffectiveParams {
    /// Decomposes a Hermitian 2x2 or 4x4 matrix in the pseudo-spin basis.
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d || (d != 2 && d != 4) {
            return Err(Error::InvalidParameter(format!("expected a 2x2 or 4x4 matrix, got {d}x{}", m.ncols())));
        }
        let coeff = |op: &DMatrix<Complex64>| (op * m).trace().re / d as f64;
        let mut p = EffectiveParams {
            offset: coeff(&DMatrix::identity(d, d)),
            n_qubits: if d == 2 { 1 } else { 2 },
            ..EffectiveParams::default()
        };
        if d == 2 {
            let c: Vec<f64> = SINGLE_SLOTS.iter().map(|&a| coeff(&pauli2(a))).collect();
            p.j_xx = c[0];
            p.j_yy = c[1];
            p.h1_z = c[2];
        } else {
            let c: Vec<f64> = PAIR_SLOTS.iter().map(|&(a, b)| coeff(&pseudo_spin_operator(a, b))).collect();
            p.j_xx = c[0];
            p.j_yy = c[1];
            p.j_zz = c[2];
            p.j_zx = c[3];
            p.j_xz = c[4];
            p.h1_x = c[5];
            p.h1_z = c[6];
            p.h2_x = c[7];
            p.h2_z = c[8];
        }
        p.fit_residual = (m - p.matrix()).norm();
        Ok(p)
    }

    /// Reconstructed matrix from the stored terms.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let c = |v: f64| Complex64::new(v, 0.0);
        if self.n_qubits == 1 {
            DMatrix::identity(2, 2) * c(self.offset)
                + pauli2(Pauli::X) * c(self.j_xx)
                + pauli2(Pauli::Y) * c(self.j_yy)
                + pauli2(Pauli::Z) * c(self.h1_z)
        } else {
            let vals = [
                self.j_xx, self.j_yy, self.j_zz, self.j_zx, self.j_xz, self.h1_x, self.h1_z, self.h2_x, self.h2_z,
            ];
            PAIR_SLOTS
                .iter()
                .zip(vals)
                .fold(DMatrix::identity(4, 4) * c(self.offset), |acc, (&(a, b), v)| {
                    acc + pseudo_spin_operator(a, b) * c(v)
                })
        }
    }

    /// Ascending eigenvalues of [`EffectiveParams::matrix`].
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.matrix().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Spread of the effective levels.
    pub fn splitting(&self) -> f64 {
        let e = self.eigenvalues();
        e[e.len() - 1] - e[0]
    }

    /// Largest stored coupling magnitude, offset excluded.
    pub fn max_coupling(&self) -> f64 {
        [self.j_xx, self.j_yy, self.j_zz, self.j_zx, self.j_xz, self.h1_x, self.h1_z, self.h2_x, self.h2_z]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

fn labeled_states(frame: &LogicalFrame) -> Result<&[StateVector]> {
    frame
        .labeling
        .as_ref()
        .map(|l| l.states.as_slice())
        .ok_or_else(|| Error::FrameInconsistent("frame has not been labeled".into()))
}

fn hermitian_inverse_sqrt(m: &DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
    let eig = m.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = m.nrows();
    let mut out = DMatrix::from_element(d, d, ZERO);
    for k in 0..d {
        let s = 1.0 / eig.eigenvalues[k].max(1e-300).sqrt();
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * Complex64::new(s, 0.0);
    }
    (out, min.max(0.0).sqrt())
}

/// Effective pseudo-spin Hamiltonian of a perturbed ground cluster.
///
/// The perturbed eigenvectors `V` are mapped onto the labeled unperturbed
/// basis `W` by the unitary closest to `O = W^dagger V`, `U = O (O^dagger O)^{-1/2}`,
/// and `H_eff = U diag(E) U^dagger`. Its eigenvalues are exactly the cluster
/// energies. A smallest singular value of `O` below 0.5 means the cluster has
/// drifted too far from the code space.
pub fn extract_effective(h_full: &HamiltonianSpec, gs: &GroundSpace, frame: &LogicalFrame) -> Result<EffectiveParams> {
    let w = labeled_states(frame)?;
    let d = w.len();
    if gs.dimension != d || gs.basis.len() != d || h_full.n_sites() != frame.lattice.n_sites() {
        return Err(Error::FrameInconsistent(format!(
            "ground space of dimension {} does not match the {d}-state code space",
            gs.dimension
        )));
    }
    let o = DMatrix::from_fn(d, d, |i, j| dot(w[i].amplitudes(), gs.basis[j].amplitudes()));
    let (inv_sqrt, min_sv) = hermitian_inverse_sqrt(&(o.adjoint() * &o));
    if min_sv < 0.5 {
        return Err(Error::ContinuityLost { min_overlap: min_sv });
    }
    let u = &o * inv_sqrt;
    let e = DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(gs.energies[i], 0.0) } else { ZERO });
    let heff = &u * e * u.adjoint();
    EffectiveParams::from_matrix(&((&heff + heff.adjoint()) * Complex64::new(0.5, 0.0)))
}

/// First-order block `W^dagger H W` in the labeled unperturbed basis.
pub fn first_order_projection(h: &HamiltonianSpec, frame: &LogicalFrame) -> Result<EffectiveParams> {
    let w = labeled_states(frame)?;
    let d = w.len();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for t in h.terms() {
        let (pm, _) = matrix_in_basis(&t.op, w)?;
        m += pm * Complex64::new(t.coefficient, 0.0);
    }
    EffectiveParams::from_matrix(&((&m + m.adjoint()) * Complex64::new(0.5, 0.0)))
}

/// Width of the ground cluster, `E_{d-1} - E_0`.
pub fn cluster_splitting(gs: &GroundSpace) -> f64 {
    gs.energies[gs.energies.len() - 1] - gs.energies[0]
}

/// Power-law fit `dE = A h^p` on a log-log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Points discarded for a non-positive `h` or `dE`.
    pub dropped: usize,
}

/// Least-squares slope of `ln dE` against `ln h`. Needs four usable points.
pub fn fit_scaling_exponent(sweep: &[(f64, f64)]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = sweep
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData {
            valid: pts.len(),
            required: 4,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all h values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        dropped: sweep.len() - pts.len(),
    })
}

/// Quasiparticle species carried around the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Particle {
    Vortex,
    Charge,
    Fermion,
}

/// Winding direction of a tunneling process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Direction {
    X,
    Y,
    Diagonal,
}

/// A quasiparticle winding process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Process {
    pub particle: Particle,
    pub direction: Direction,
}

/// The nine winding processes and the two-pseudo-spin operators they act as.
pub struct TunnelingMap;

impl TunnelingMap {
    pub const ENTRIES: [(Process, (Pauli, Pauli)); 9] = [
        (Process { particle: Particle::Vortex, direction: Direction::X }, (Pauli::X, Pauli::I)),
        (Process { particle: Particle::Vortex, direction: Direction::Y }, (Pauli::I, Pauli::X)),
        (Process { particle: Particle::Vortex, direction: Direction::Diagonal }, (Pauli::X, Pauli::X)),
        (Process { particle: Particle::Charge, direction: Direction::X }, (Pauli::X, Pauli::Z)),
        (Process { particle: Particle::Charge, direction: Direction::Y }, (Pauli::Z, Pauli::X)),
        (Process { particle: Particle::Charge, direction: Direction::Diagonal }, (Pauli::Y, Pauli::Y)),
        (Process { particle: Particle::Fermion, direction: Direction::X }, (Pauli::I, Pauli::Z)),
        (Process { particle: Particle::Fermion, direction: Direction::Y }, (Pauli::Z, Pauli::I)),
        (Process { particle: Particle::Fermion, direction: Direction::Diagonal }, (Pauli::Z, Pauli::Z)),
    ];

    pub fn operator(p: Process) -> (Pauli, Pauli) {
        Self::ENTRIES
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, op)| *op)
            .expect("every process is tabulated")
    }

    /// A microscopic loop realizing the process on an even torus.
    ///
    /// Diagonal vortex and charge loops are `X` on the `(1,-1)` diagonal through
    /// an even or odd site; the diagonal fermion loop is their product.
    pub fn loop_string(l: &LatticeSpec, p: Process) -> Result<PauliString> {
        if l.parity_class() != ParityClass::EvenEven {
            return Err(Error::InvalidLattice("process loops are tabulated on even tori only".into()));
        }
        let s = match (p.particle, p.direction) {
            (Particle::Vortex, Direction::X) => alternating_row(l, 0, Pattern::Vortex)?,
            (Particle::Vortex, Direction::Y) => alternating_col(l, 0, Pattern::Vortex)?,
            (Particle::Charge, Direction::X) => alternating_row(l, 0, Pattern::Charge)?,
            (Particle::Charge, Direction::Y) => alternating_col(l, 0, Pattern::Charge)?,
            (Particle::Fermion, Direction::X) => z_row(l, 0),
            (Particle::Fermion, Direction::Y) => z_col(l, 0),
            (Particle::Vortex, Direction::Diagonal) => diagonal_x(l, 0, 0),
            (Particle::Charge, Direction::Diagonal) => diagonal_x(l, 1, 0),
            (Particle::Fermion, Direction::Diagonal) => diagonal_x(l, 0, 0).multiply(&diagonal_x(l, 1, 0))?,
        };
        Ok(s)
    }
}
