//! Low-lying spectra of Pauli-sum Hamiltonians.
//!
//! [`lowest_k`] runs a block Krylov method with Rayleigh-Ritz extraction and
//! thick restarts. The block is wider than the requested count, so degenerate
//! clusters are resolved without missing copies. [`dense_oracle`] diagonalizes
//! the full matrix and exists to check it.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::HamiltonianSpec;
use crate::state::{dot, gaussian, StateVector};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest system the dense oracle accepts.
pub const DENSE_SITE_CAP: usize = 12;

/// Terms sharing one X mask, evaluated together.
#[derive(Debug, Clone)]
struct FlipGroup {
    x: u64,
    z_terms: Vec<(u64, Complex64)>,
}

/// A Hamiltonian lowered for repeated matrix-vector products.
#[derive(Debug, Clone)]
pub struct CompiledOperator {
    n_sites: usize,
    diagonal: Vec<f64>,
    flips: Vec<FlipGroup>,
}

impl CompiledOperator {
    pub fn new(h: &HamiltonianSpec, site_cap: usize) -> Result<Self> {
        let n = h.n_sites();
        if n > site_cap {
            return Err(Error::SiteCap { sites: n, cap: site_cap });
        }
        if n > 62 {
            return Err(Error::SiteCap { sites: n, cap: 62 });
        }
        let dim = 1usize << n;
        let mut diag_terms: Vec<(u64, f64)> = Vec::new();
        let mut flips: Vec<FlipGroup> = Vec::new();
        for t in h.terms() {
            let (x, z) = t.op.low_masks();
            let c = t.op.base_factor() * t.coefficient;
            if x == 0 {
                // Hermitian diagonal strings have a real factor.
                diag_terms.push((z, c.re));
            } else if let Some(g) = flips.iter_mut().find(|g| g.x == x) {
                g.z_terms.push((z, c));
            } else {
                flips.push(FlipGroup {
                    x,
                    z_terms: vec![(z, c)],
                });
            }
        }
        let mut diagonal = vec![0.0; dim];
        for (b, d) in diagonal.iter_mut().enumerate() {
            let b = b as u64;
            for &(z, c) in &diag_terms {
                if (z & b).count_ones() % 2 == 0 {
                    *d += c;
                } else {
                    *d -= c;
                }
            }
        }
        Ok(CompiledOperator {
            n_sites: n,
            diagonal,
            flips,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `dst = H src`.
    pub fn apply(&self, src: &[Complex64], dst: &mut [Complex64]) {
        for ((d, s), h) in dst.iter_mut().zip(src).zip(&self.diagonal) {
            *d = s * *h;
        }
        for g in &self.flips {
            for (b, &amp) in src.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let bb = b as u64;
                let mut f = ZERO;
                for &(z, c) in &g.z_terms {
                    if (z & bb).count_ones() % 2 == 0 {
                        f += c;
                    } else {
                        f -= c;
                    }
                }
                dst[(bb ^ g.x) as usize] += f * amp;
            }
        }
    }

    /// `<v|H|v>` for a normalized `v`.
    pub fn rayleigh(&self, v: &[Complex64]) -> f64 {
        let mut hv = vec![ZERO; v.len()];
        self.apply(v, &mut hv);
        dot(v, &hv).re
    }

    /// Dense matrix; only for small systems.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        let mut e = vec![ZERO; dim];
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for (i, c) in col.iter().enumerate() {
                m[(i, j)] = *c;
            }
            e[j] = ZERO;
        }
        m
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Residual bound `||H v - lambda v||` every returned pair must meet.
    pub tol: f64,
    pub max_matvecs: usize,
    pub seed: u64,
    /// Upper bound on stored Krylov vectors before a restart.
    pub max_basis: usize,
    pub site_cap: usize,
    pub want_vectors: bool,
    /// Extra block vectors beyond the requested count.
    pub guard: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_matvecs: 40_000,
            seed: 0x5eed,
            max_basis: 120,
            site_cap: 24,
            want_vectors: true,
            guard: 3,
        }
    }
}

/// Half-open index range of one degenerate group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cluster {
    pub start: usize,
    pub end: usize,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Lowest eigenpairs and their degeneracy structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<StateVector>>,
    /// Empty when no vectors were formed (eigenvalue-only dense runs).
    pub residual_norms: Vec<f64>,
    pub cluster_tolerance: f64,
    pub clusters: Vec<Cluster>,
    pub matvecs: usize,
}

impl SpectrumResult {
    /// Regroups with another tolerance.
    pub fn recluster(&mut self, tol: f64) {
        self.cluster_tolerance = tol;
        self.clusters = cluster(&self.eigenvalues, tol);
    }
}

/// Default grouping tolerance for a spectrum whose lowest level is `e0`.
pub fn default_cluster_tol(e0: f64) -> f64 {
    1e-9f64.max(1e-6 * e0.abs())
}

/// Groups consecutive ascending values whose neighbours differ by at most `tol`.
pub fn cluster(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > start {
                out.push(Cluster { start, end: i });
            }
            start = i;
        }
    }
    out
}

fn hermitian_eigen(t: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (&t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let n = sym.nrows();
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

fn combine(basis: &[Vec<Complex64>], coeffs: impl Iterator<Item = Complex64>, dim: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; dim];
    for (v, c) in basis.iter().zip(coeffs) {
        if c == ZERO {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes `v` against `basis` (two passes) and normalizes it.
/// Returns false when little of `v` survives.
fn orthonormalize_against(basis: &[Vec<Complex64>], v: &mut [Complex64]) -> bool {
    let before = norm(v);
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let after = norm(v);
    if after < 1e-8 * before || after < 1e-300 {
        return false;
    }
    let inv = 1.0 / after;
    for x in v.iter_mut() {
        *x *= inv;
    }
    true
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect()
}

fn to_states(n: usize, vs: Vec<Vec<Complex64>>) -> Result<Vec<StateVector>> {
    vs.into_iter().map(|v| StateVector::from_amplitudes(n, v)).collect()
}

fn finish(
    n_sites: usize,
    eigenvalues: Vec<f64>,
    vectors: Option<Vec<Vec<Complex64>>>,
    residual_norms: Vec<f64>,
    matvecs: usize,
) -> Result<SpectrumResult> {
    let tol = default_cluster_tol(eigenvalues.first().copied().unwrap_or(0.0));
    let clusters = cluster(&eigenvalues, tol);
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors: match vectors {
            Some(v) => Some(to_states(n_sites, v)?),
            None => None,
        },
        residual_norms,
        cluster_tolerance: tol,
        clusters,
        matvecs,
    })
}

fn dense_lowest(op: &CompiledOperator, k: usize, want_vectors: bool) -> Result<SpectrumResult> {
    let dim = op.dim();
    let (vals, vecs) = hermitian_eigen(op.to_dense());
    let k = k.min(dim);
    let mut out_vecs = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut hv = vec![ZERO; dim];
    for i in 0..k {
        let v: Vec<Complex64> = vecs.column(i).iter().copied().collect();
        op.apply(&v, &mut hv);
        residuals.push(
            hv.iter()
                .zip(&v)
                .map(|(a, b)| (a - b * vals[i]).norm_sqr())
                .sum::<f64>()
                .sqrt(),
        );
        out_vecs.push(v);
    }
    finish(
        op.n_sites(),
        vals[..k].to_vec(),
        want_vectors.then_some(out_vecs),
        residuals,
        dim,
    )
}

/// The `k` lowest eigenpairs of `h`.
pub fn lowest_k(h: &HamiltonianSpec, k: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let op = CompiledOperator::new(h, opts.site_cap)?;
    lowest_k_compiled(&op, k, opts)
}

/// [`lowest_k`] on an already compiled operator.
pub fn lowest_k_compiled(op: &CompiledOperator, k: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    let dim = op.dim();
    let block = k + opts.guard.max(1);
    if dim <= 64.max(4 * block) {
        return dense_lowest(op, k, opts.want_vectors);
    }
    // Keep the stored basis within roughly 1 GiB.
    let mem_cap = ((1usize << 30) / (32 * dim)).max(3 * block);
    let max_basis = opts.max_basis.max(3 * block).min(mem_cap).min(dim);
    let keep = (k + 2 * block).min(max_basis - block);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut t = DMatrix::<Complex64>::zeros(0, 0);
    let mut matvecs = 0usize;

    let mut pending: Vec<Vec<Complex64>> = (0..block).map(|_| random_vector(&mut rng, dim)).collect();

    loop {
        // Extend the basis with whatever survives orthogonalization.
        let old = basis.len();
        for mut v in pending.drain(..) {
            if basis.len() >= max_basis {
                break;
            }
            if orthonormalize_against(&basis, &mut v) {
                let mut w = vec![ZERO; dim];
                op.apply(&v, &mut w);
                matvecs += 1;
                basis.push(v);
                images.push(w);
            }
        }
        let m = basis.len();
        let mut grown = DMatrix::<Complex64>::zeros(m, m);
        grown.view_mut((0, 0), (old, old)).copy_from(&t);
        for j in old..m {
            for i in 0..m {
                let e = dot(&basis[i], &images[j]);
                grown[(i, j)] = e;
                grown[(j, i)] = e.conj();
            }
        }
        t = grown;

        let (theta, y) = hermitian_eigen(t.clone());
        let nwant = block.min(m);
        let mut residual_vecs = Vec::with_capacity(nwant);
        let mut res = Vec::with_capacity(nwant);
        for i in 0..nwant {
            let yi = y.column(i);
            let x = combine(&basis, yi.iter().copied(), dim);
            let ax = combine(&images, yi.iter().copied(), dim);
            let r: Vec<Complex64> = ax.iter().zip(&x).map(|(a, b)| a - b * theta[i]).collect();
            res.push(norm(&r));
            residual_vecs.push(r);
        }
        let last_vals = theta[..nwant.min(k)].to_vec();
        let last_res = res[..nwant.min(k)].to_vec();

        let converged = m >= k && res[..k].iter().all(|&r| r <= opts.tol);
        if converged {
            break;
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NotConverged {
                converged: last_res.iter().filter(|&&r| r <= opts.tol).count(),
                requested: k,
                iterations: matvecs,
                eigenvalues: last_vals,
                residuals: last_res,
            });
        }

        pending = residual_vecs
            .into_iter()
            .zip(&res)
            .filter(|(_, &r)| r > 0.1 * opts.tol)
            .map(|(v, _)| v)
            .collect();
        if pending.is_empty() {
            pending.push(random_vector(&mut rng, dim));
        }

        if m + pending.len() > max_basis {
            let keep = keep.min(m);
            let mut nb = Vec::with_capacity(max_basis);
            let mut ni = Vec::with_capacity(max_basis);
            for i in 0..keep {
                let yi = y.column(i);
                nb.push(combine(&basis, yi.iter().copied(), dim));
                ni.push(combine(&images, yi.iter().copied(), dim));
            }
            basis = nb;
            images = ni;
            t = DMatrix::from_diagonal(&DVector::from_iterator(
                keep,
                theta[..keep].iter().map(|&v| Complex64::new(v, 0.0)),
            ));
        }
    }

    // Final pairs with freshly computed residuals.
    let (_, y) = hermitian_eigen(t);
    let mut vecs = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut hv = vec![ZERO; dim];
    for i in 0..k {
        let mut x = combine(&basis, y.column(i).iter().copied(), dim);
        let nx = norm(&x);
        for a in x.iter_mut() {
            *a /= nx;
        }
        op.apply(&x, &mut hv);
        matvecs += 1;
        let lambda = dot(&x, &hv).re;
        residuals.push(norm(
            &hv.iter().zip(&x).map(|(a, b)| a - b * lambda).collect::<Vec<_>>(),
        ));
        vecs.push((lambda, x));
    }
    vecs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues: Vec<f64> = vecs.iter().map(|v| v.0).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > opts.tol * 10.0 {
        return Err(Error::NotConverged {
            converged: residuals.iter().filter(|&&r| r <= opts.tol).count(),
            requested: k,
            iterations: matvecs,
            eigenvalues,
            residuals,
        });
    }
    let vectors = vecs.into_iter().map(|v| v.1).collect();
    finish(op.n_sites(), eigenvalues, opts.want_vectors.then_some(vectors), residuals, matvecs)
}

/// Full spectrum by dense diagonalization (eigenvalues only).
pub fn dense_oracle(h: &HamiltonianSpec) -> Result<SpectrumResult> {
    let op = CompiledOperator::new(h, DENSE_SITE_CAP)?;
    let m = op.to_dense();
    let real = m.iter().all(|c| c.im == 0.0);
    let mut vals: Vec<f64> = if real {
        let r = m.map(|c| c.re);
        r.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        sym.symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    finish(op.n_sites(), vals, None, Vec::new(), 0)
}

/// Orthonormal basis of the lowest degenerate cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSpace {
    pub dimension: usize,
    pub basis: Vec<StateVector>,
    pub energies: Vec<f64>,
    /// `E_i - E_0` inside the cluster.
    pub splitting: Vec<f64>,
    /// Distance from the top of the cluster to the first level outside it.
    pub gap: f64,
    /// False when the gap does not exceed ten times the largest splitting.
    pub well_separated: bool,
}

impl GroundSpace {
    pub fn max_splitting(&self) -> f64 {
        self.splitting.iter().cloned().fold(0.0, f64::max)
    }
}

/// Lowest cluster of `h`, required to have `expected_dim` members.
///
/// Levels closer than `cluster_tol` are grouped.
pub fn ground_space(
    h: &HamiltonianSpec,
    expected_dim: usize,
    cluster_tol: f64,
    opts: &SolverOptions,
) -> Result<GroundSpace> {
    let op = CompiledOperator::new(h, opts.site_cap)?;
    ground_space_compiled(&op, expected_dim, cluster_tol, opts)
}

/// [`ground_space`] on an already compiled operator.
pub fn ground_space_compiled(
    op: &CompiledOperator,
    expected_dim: usize,
    cluster_tol: f64,
    opts: &SolverOptions,
) -> Result<GroundSpace> {
    if expected_dim == 0 {
        return Err(Error::InvalidParameter("expected_dim must be at least 1".into()));
    }
    let opts = SolverOptions {
        want_vectors: true,
        ..*opts
    };
    let spec = lowest_k_compiled(op, expected_dim + 1, &opts)?;
    let groups = cluster(&spec.eigenvalues, cluster_tol);
    let observed = groups.first().map_or(0, Cluster::len);
    if observed != expected_dim {
        return Err(Error::DegeneracyViolation {
            expected: expected_dim,
            observed,
            eigenvalues: spec.eigenvalues,
        });
    }
    let vecs = spec.eigenvectors.unwrap_or_default();
    let e = &spec.eigenvalues;
    let splitting: Vec<f64> = e[1..expected_dim].iter().map(|v| v - e[0]).collect();
    let gap = e[expected_dim] - e[expected_dim - 1];
    let max_split = splitting.iter().cloned().fold(0.0, f64::max);
    Ok(GroundSpace {
        dimension: expected_dim,
        basis: vecs.into_iter().take(expected_dim).collect(),
        energies: e[..expected_dim].to_vec(),
        splitting,
        gap,
        well_separated: gap > 10.0 * max_split,
    })
}
