//! On-disk formats.
//!
//! Hamiltonians are JSON documents whose terms carry the `X` and `Z` masks as
//! hexadecimal strings (bit `k` is site `k`) plus the exponent of the `i^k`
//! phase. Eigenvectors go to a little-endian binary file:
//!
//! ```text
//! u64 count | u64 dim | count * dim * (f64 re, f64 im)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toricsim_core::eigen::{Cluster, SpectrumResult};
use toricsim_core::{HamiltonianSpec, LatticeSpec, Params, PauliString, Phase, StateVector, Term};

use crate::error::{CliError, CliResult};

/// `0x`-prefixed hex of a mask stored as little-endian 64-bit words.
pub fn mask_to_hex(words: &[u64]) -> String {
    let mut s = String::from("0x");
    let mut started = false;
    for w in words.iter().rev() {
        if started {
            s.push_str(&format!("{w:016x}"));
        } else if *w != 0 {
            s.push_str(&format!("{w:x}"));
            started = true;
        }
    }
    if !started {
        s.push('0');
    }
    s
}

/// Inverse of [`mask_to_hex`] for a register of `n_sites` bits.
pub fn hex_to_mask(hex: &str, n_sites: usize) -> CliResult<Vec<u64>> {
    let digits = hex
        .strip_prefix("0x")
        .or_else(|| hex.strip_prefix("0X"))
        .ok_or_else(|| CliError::Usage(format!("mask {hex:?} lacks the 0x prefix")))?;
    if digits.is_empty() {
        return Err(CliError::Usage("empty mask".into()));
    }
    let mut words = vec![0u64; n_sites.div_ceil(64).max(1)];
    for (k, c) in digits.bytes().rev().enumerate() {
        let v = (c as char)
            .to_digit(16)
            .ok_or_else(|| CliError::Usage(format!("bad hex digit in mask {hex:?}")))? as u64;
        if v == 0 {
            continue;
        }
        let bit = 4 * k;
        if bit / 64 >= words.len() {
            return Err(CliError::Usage(format!("mask {hex:?} is wider than {n_sites} sites")));
        }
        words[bit / 64] |= v << (bit % 64);
    }
    let spare = words.len() * 64 - n_sites;
    if spare > 0 && words[words.len() - 1] >> (64 - spare) != 0 {
        return Err(CliError::Usage(format!("mask {hex:?} is wider than {n_sites} sites")));
    }
    Ok(words)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coefficient: f64,
    pub x_mask: String,
    pub z_mask: String,
    pub phase: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDoc {
    pub lx: usize,
    pub ly: usize,
    pub n_sites: usize,
    pub params: Params,
    pub terms: Vec<TermDoc>,
}

impl HamiltonianDoc {
    pub fn from_spec(h: &HamiltonianSpec) -> Self {
        let l = h.lattice();
        HamiltonianDoc {
            lx: l.lx(),
            ly: l.ly(),
            n_sites: l.n_sites(),
            params: *h.params(),
            terms: h
                .terms()
                .iter()
                .map(|t| TermDoc {
                    coefficient: t.coefficient,
                    x_mask: mask_to_hex(t.op.x_words()),
                    z_mask: mask_to_hex(t.op.z_words()),
                    phase: t.op.phase().exponent(),
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> CliResult<HamiltonianSpec> {
        let l = LatticeSpec::new(self.lx, self.ly)?;
        if l.n_sites() != self.n_sites {
            return Err(CliError::Usage(format!(
                "n_sites {} does not match a {}x{} lattice",
                self.n_sites, self.lx, self.ly
            )));
        }
        let n = l.n_sites();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.phase > 3 {
                return Err(CliError::Usage(format!("phase exponent {} outside 0..4", t.phase)));
            }
            let op = PauliString::from_masks(
                n,
                hex_to_mask(&t.x_mask, n)?,
                hex_to_mask(&t.z_mask, n)?,
                Phase::from_exponent(t.phase as i64),
            )?;
            terms.push(Term {
                coefficient: t.coefficient,
                op,
            });
        }
        Ok(HamiltonianSpec::new(l, terms, self.params)?)
    }

    pub fn load(path: &Path) -> CliResult<HamiltonianSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let doc: HamiltonianDoc =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        doc.to_spec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub seed: u64,
    pub tolerance: f64,
    pub matvecs: usize,
    pub max_matvecs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub n_sites: usize,
    pub eigenvalues: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub cluster_tolerance: f64,
    pub clusters: Vec<Cluster>,
    pub solver: SolverMeta,
}

impl SpectrumDoc {
    pub fn new(n_sites: usize, s: &SpectrumResult, seed: u64, max_matvecs: usize) -> Self {
        SpectrumDoc {
            n_sites,
            eigenvalues: s.eigenvalues.clone(),
            residual_norms: s.residual_norms.clone(),
            cluster_tolerance: s.cluster_tolerance,
            clusters: s.clusters.clone(),
            solver: SolverMeta {
                seed,
                tolerance: s.residual_norms.iter().cloned().fold(0.0, f64::max),
                matvecs: s.matvecs,
                max_matvecs,
            },
        }
    }
}

pub fn write_eigenvectors<W: Write>(mut w: W, vecs: &[StateVector]) -> std::io::Result<()> {
    let dim = vecs.first().map_or(0, |v| v.len());
    w.write_all(&(vecs.len() as u64).to_le_bytes())?;
    w.write_all(&(dim as u64).to_le_bytes())?;
    for v in vecs {
        if v.len() != dim {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "vectors differ in length"));
        }
        for a in v.amplitudes() {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_eigenvectors<R: Read>(mut r: R) -> std::io::Result<Vec<Vec<Complex64>>> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> std::io::Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let count = next(&mut r)? as usize;
    let dim = next(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            let re = f64::from_bits(next(&mut r)?);
            let im = f64::from_bits(next(&mut r)?);
            v.push(Complex64::new(re, im));
        }
        out.push(v);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "trailing bytes after eigenvectors"));
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// CSV with a header row taken from the record fields.
pub fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Numerical(format!("CSV serialization failed: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Numerical(format!("CSV serialization failed: {e}")))
}
