//! Hamiltonians as weighted sums of Pauli strings.
//!
//! The plaquette operator based at site `(x, y)` is
//! `F = X(x,y) Y(x+1,y) X(x+1,y+1) Y(x,y+1)` with periodic wrap.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ParityClass};
use crate::pauli::{Pauli, PauliString, Phase};

/// One weighted operator in a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub op: PauliString,
}

/// Named couplings carried with a Hamiltonian. Unused entries stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub g: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub h_x: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub h_z: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub h_sub: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub j_x: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub j_y: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub j_z: Option<f64>,
}

impl Params {
    /// Entries of `other` override ours where present.
    pub fn merged(self, other: Params) -> Params {
        Params {
            g: other.g.or(self.g),
            h_x: other.h_x.or(self.h_x),
            h_z: other.h_z.or(self.h_z),
            h_sub: other.h_sub.or(self.h_sub),
            j_x: other.j_x.or(self.j_x),
            j_y: other.j_y.or(self.j_y),
            j_z: other.j_z.or(self.j_z),
        }
    }
}

/// Hamiltonian `sum_k c_k P_k` on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    lattice: LatticeSpec,
    terms: Vec<Term>,
    params: Params,
}

impl HamiltonianSpec {
    /// Validates sizes and Hermiticity. A `-1` phase is folded into the coefficient.
    pub fn new(lattice: LatticeSpec, terms: Vec<Term>, params: Params) -> Result<Self> {
        let n = lattice.n_sites();
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if t.op.n_sites() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: t.op.n_sites(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
            let (c, op) = match t.op.phase() {
                Phase::ONE => (t.coefficient, t.op),
                Phase::MINUS_ONE => (-t.coefficient, t.op.with_phase(Phase::ONE)),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "term {} is not Hermitian",
                        t.op
                    )))
                }
            };
            out.push(Term { coefficient: c, op });
        }
        Ok(HamiltonianSpec {
            lattice,
            terms: out,
            params,
        })
    }

    pub fn empty(lattice: LatticeSpec) -> Self {
        HamiltonianSpec {
            lattice,
            terms: Vec::new(),
            params: Params::default(),
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Term-wise sum of two Hamiltonians on the same lattice.
    pub fn plus(&self, other: &HamiltonianSpec) -> Result<HamiltonianSpec> {
        if self.lattice != other.lattice {
            return Err(Error::SizeMismatch {
                left: self.n_sites(),
                right: other.n_sites(),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(HamiltonianSpec {
            lattice: self.lattice,
            terms,
            params: self.params.merged(other.params),
        })
    }

    /// Sum of `|c_k|`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

/// Plaquette operator based at `(x, y)`.
pub fn plaquette(lattice: &LatticeSpec, x: usize, y: usize) -> PauliString {
    let (x, y) = (x as isize, y as isize);
    let n = lattice.n_sites();
    // Sites are distinct whenever both dimensions are at least 2.
    PauliString::from_ops(
        n,
        &[
            (lattice.site(x, y), Pauli::X),
            (lattice.site(x + 1, y), Pauli::Y),
            (lattice.site(x + 1, y + 1), Pauli::X),
            (lattice.site(x, y + 1), Pauli::Y),
        ],
    )
    .expect("plaquette sites lie on the lattice")
}

/// All plaquettes, indexed by their base site.
pub fn plaquettes(lattice: &LatticeSpec) -> Vec<PauliString> {
    (0..lattice.n_sites())
        .map(|s| {
            let (x, y) = lattice.coords(s);
            plaquette(lattice, x, y)
        })
        .collect()
}

/// `H0 = -g sum_i F_i`.
pub fn build_wen(lattice: &LatticeSpec, g: f64) -> Result<HamiltonianSpec> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
    }
    let terms = plaquettes(lattice)
        .into_iter()
        .map(|op| Term {
            coefficient: -g,
            op,
        })
        .collect();
    HamiltonianSpec::new(
        *lattice,
        terms,
        Params {
            g: Some(g),
            ..Params::default()
        },
    )
}

fn field_terms(lattice: &LatticeSpec, p: Pauli, coefficient: f64, sites: impl Iterator<Item = usize>) -> Vec<Term> {
    if coefficient == 0.0 {
        return Vec::new();
    }
    let n = lattice.n_sites();
    sites
        .map(|s| Term {
            coefficient,
            op: PauliString::single(n, s, p),
        })
        .collect()
}

/// `h_x sum_i X_i + h_z sum_i Z_i`. Zero-coefficient families are omitted.
pub fn build_uniform_perturbation(lattice: &LatticeSpec, h_x: f64, h_z: f64) -> Result<HamiltonianSpec> {
    let n = lattice.n_sites();
    let mut terms = field_terms(lattice, Pauli::X, h_x, 0..n);
    terms.extend(field_terms(lattice, Pauli::Z, h_z, 0..n));
    HamiltonianSpec::new(
        *lattice,
        terms,
        Params {
            h_x: Some(h_x),
            h_z: Some(h_z),
            ..Params::default()
        },
    )
}

/// `h sum_{i odd} (X_i + Y_i) + h_z sum_i Z_i`, odd meaning `x + y` odd.
pub fn build_sublattice_perturbation(lattice: &LatticeSpec, h: f64, h_z: f64) -> Result<HamiltonianSpec> {
    if lattice.parity_class() != ParityClass::EvenEven {
        return Err(Error::InvalidLattice(format!(
            "sublattice perturbation needs even dimensions, got {}x{}",
            lattice.lx(),
            lattice.ly()
        )));
    }
    let n = lattice.n_sites();
    let odd = || (0..n).filter(|&s| lattice.site_parity(s) == 1);
    let mut terms = field_terms(lattice, Pauli::X, h, odd());
    terms.extend(field_terms(lattice, Pauli::Y, h, odd()));
    terms.extend(field_terms(lattice, Pauli::Z, h_z, 0..n));
    HamiltonianSpec::new(
        *lattice,
        terms,
        Params {
            h_sub: Some(h),
            h_z: Some(h_z),
            ..Params::default()
        },
    )
}

fn check_brick_wall(rows: usize, cols: usize) -> Result<LatticeSpec> {
    if rows < 2 || rows % 2 != 0 || cols < 4 || cols % 2 != 0 {
        return Err(Error::InvalidLattice(format!(
            "brick wall needs even rows >= 2 and even cols >= 4, got {rows}x{cols}"
        )));
    }
    LatticeSpec::new(cols, rows)
}

/// Brick-wall honeycomb model on a `rows x cols` torus, site `(j, l)` at `j + cols * l`.
///
/// For every `j + l` even: `J_x X(j,l) X(j+1,l) + J_y Y(j-1,l) Y(j,l) + J_z Z(j,l) Z(j,l+1)`.
pub fn build_kitaev(rows: usize, cols: usize, j_x: f64, j_y: f64, j_z: f64) -> Result<HamiltonianSpec> {
    let lattice = check_brick_wall(rows, cols)?;
    let n = lattice.n_sites();
    let mut terms = Vec::with_capacity(3 * n / 2);
    for l in 0..rows as isize {
        for j in 0..cols as isize {
            if (j + l) % 2 != 0 {
                continue;
            }
            for (c, p, a, b) in [
                (j_x, Pauli::X, (j, l), (j + 1, l)),
                (j_y, Pauli::Y, (j - 1, l), (j, l)),
                (j_z, Pauli::Z, (j, l), (j, l + 1)),
            ] {
                if c == 0.0 {
                    continue;
                }
                let op = PauliString::from_ops(n, &[(lattice.site(a.0, a.1), p), (lattice.site(b.0, b.1), p)])?;
                terms.push(Term { coefficient: c, op });
            }
        }
    }
    HamiltonianSpec::new(
        lattice,
        terms,
        Params {
            j_x: Some(j_x),
            j_y: Some(j_y),
            j_z: Some(j_z),
            ..Params::default()
        },
    )
}

/// Conserved hexagon operator with lower-left corner `(j, l)`, `j + l` even.
pub fn kitaev_hexagon(rows: usize, cols: usize, j: usize, l: usize) -> Result<PauliString> {
    let lattice = check_brick_wall(rows, cols)?;
    if (j + l) % 2 != 0 {
        return Err(Error::InvalidParameter("hexagon corner must have j + l even".into()));
    }
    let (j, l) = (j as isize, l as isize);
    let s = |a: isize, b: isize| lattice.site(a, b);
    PauliString::from_ops(
        lattice.n_sites(),
        &[
            (s(j, l), Pauli::Y),
            (s(j + 1, l), Pauli::Z),
            (s(j + 2, l), Pauli::X),
            (s(j, l + 1), Pauli::X),
            (s(j + 1, l + 1), Pauli::Z),
            (s(j + 2, l + 1), Pauli::Y),
        ],
    )
}

/// All hexagon operators of a brick wall, ordered by corner index.
pub fn kitaev_hexagons(rows: usize, cols: usize) -> Result<Vec<PauliString>> {
    let mut out = Vec::new();
    for l in 0..rows {
        for j in 0..cols {
            if (j + l) % 2 == 0 {
                out.push(kitaev_hexagon(rows, cols, j, l)?);
            }
        }
    }
    Ok(out)
}

/// `J_z^2 J_y^2 / (16 |J_x|^3)`.
pub fn effective_coupling(j_x: f64, j_y: f64, j_z: f64) -> Result<f64> {
    if j_x == 0.0 || !j_x.is_finite() {
        return Err(Error::InvalidParameter("J_x must be non-zero".into()));
    }
    let ax = j_x.abs();
    Ok(j_z * j_z * j_y * j_y / (16.0 * ax * ax * ax))
}

/// Plaquette model on the strong-bond dimers of a brick wall.
///
/// Dimer `(j, l)` with `j + l` even becomes spin `j / 2 + (cols / 2) * l`. The
/// plaquette of hexagon `(j, l)` acts with X on dimers `(j-1, l+1)` and
/// `(j+2, l)` and with Y on dimers `(j+1, l+1)` and `(j, l)`.
pub fn kitaev_effective_wen(rows: usize, cols: usize, g: f64) -> Result<HamiltonianSpec> {
    check_brick_wall(rows, cols)?;
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
    }
    let lattice = LatticeSpec::new(cols / 2, rows)?;
    let n = lattice.n_sites();
    let dimer = |j: isize, l: isize| {
        let j = j.rem_euclid(cols as isize) as usize;
        let l = l.rem_euclid(rows as isize) as usize;
        j / 2 + (cols / 2) * l
    };
    let mut terms = Vec::with_capacity(n);
    for l in 0..rows as isize {
        for j in 0..cols as isize {
            if (j + l) % 2 != 0 {
                continue;
            }
            let sites = [
                (dimer(j - 1, l + 1), Pauli::X),
                (dimer(j + 2, l), Pauli::X),
                (dimer(j + 1, l + 1), Pauli::Y),
                (dimer(j, l), Pauli::Y),
            ];
            for a in 0..4 {
                for b in a + 1..4 {
                    if sites[a].0 == sites[b].0 {
                        return Err(Error::InvalidLattice(format!(
                            "dimer lattice of {rows}x{cols} is too small for distinct plaquette sites"
                        )));
                    }
                }
            }
            terms.push(Term {
                coefficient: -g,
                op: PauliString::from_ops(n, &sites)?,
            });
        }
    }
    HamiltonianSpec::new(
        lattice,
        terms,
        Params {
            g: Some(g),
            ..Params::default()
        },
    )
}
