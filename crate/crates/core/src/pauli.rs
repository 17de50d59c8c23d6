//! Multi-site Pauli operators in symplectic form.
//!
//! A [`PauliString`] stores one X bit and one Z bit per site plus a global
//! phase `i^k`. The site operator for bits `(x, z)` is the Hermitian Pauli
//! `I, X, Z, Y` for `(0,0), (1,0), (0,1), (1,1)`, so a string with phase
//! `+1` or `-1` is Hermitian. Phases are tracked as an exponent mod 4.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Global phase `i^k`, `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl core::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

fn words_for(n_sites: usize) -> usize {
    n_sites.div_ceil(64)
}

fn popcount(words: impl Iterator<Item = u64>) -> u32 {
    words.map(u64::count_ones).sum()
}

/// Pauli operator on `n_sites` sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_sites: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Self {
        let w = words_for(n_sites);
        PauliString {
            n_sites,
            x: vec![0; w],
            z: vec![0; w],
            phase: Phase::ONE,
        }
    }

    /// Product of single-site Paulis, applied in the given order.
    ///
    /// Repeated sites are multiplied out, so the phase reflects the order.
    pub fn from_ops(n_sites: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = PauliString::identity(n_sites);
        for &(site, p) in ops {
            if site >= n_sites {
                return Err(Error::InvalidParameter(alloc::format!(
                    "site {site} out of range for {n_sites} sites"
                )));
            }
            out = out.multiply(&PauliString::single(n_sites, site, p))?;
        }
        Ok(out)
    }

    pub fn single(n_sites: usize, site: usize, p: Pauli) -> Self {
        let mut out = PauliString::identity(n_sites);
        let (xb, zb) = p.bits();
        out.set_bits(site, xb, zb);
        out
    }

    /// Builds a string from raw mask words. Bits above `n_sites` must be zero.
    pub fn from_masks(n_sites: usize, x: Vec<u64>, z: Vec<u64>, phase: Phase) -> Result<Self> {
        let w = words_for(n_sites);
        if x.len() != w || z.len() != w {
            return Err(Error::InvalidParameter(alloc::format!(
                "mask length must be {w} words for {n_sites} sites"
            )));
        }
        let tail = n_sites % 64;
        if tail != 0 {
            let high = !((1u64 << tail) - 1);
            if (x[w - 1] | z[w - 1]) & high != 0 {
                return Err(Error::InvalidParameter(
                    "mask has bits set beyond n_sites".into(),
                ));
            }
        }
        Ok(PauliString {
            n_sites,
            x,
            z,
            phase,
        })
    }

    fn set_bits(&mut self, site: usize, xb: bool, zb: bool) {
        let (w, b) = (site / 64, site % 64);
        let m = 1u64 << b;
        if xb {
            self.x[w] |= m;
        } else {
            self.x[w] &= !m;
        }
        if zb {
            self.z[w] |= m;
        } else {
            self.z[w] &= !m;
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn pauli_at(&self, site: usize) -> Pauli {
        let (w, b) = (site / 64, site % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n_sites)
            .filter(|&s| self.pauli_at(s) != Pauli::I)
            .collect()
    }

    pub fn weight(&self) -> usize {
        popcount(self.x.iter().zip(&self.z).map(|(a, b)| a | b)) as usize
    }

    /// True when the masks are all zero (the phase may still be non-trivial).
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Hermitian iff the phase is `±1`.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Equal masks, phases ignored.
    pub fn same_masks(&self, other: &PauliString) -> bool {
        self.n_sites == other.n_sites && self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(Error::SizeMismatch {
                left: self.n_sites,
                right: other.n_sites,
            });
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_size(other)?;
        let x: Vec<u64> = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z: Vec<u64> = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        // sigma(v) = i^{vx vz} X^vx Z^vz; moving Z^az past X^bx costs (-1)^{az bx}.
        let k = self.phase.0 as i64
            + other.phase.0 as i64
            + popcount(self.x.iter().zip(&self.z).map(|(a, b)| a & b)) as i64
            + popcount(other.x.iter().zip(&other.z).map(|(a, b)| a & b)) as i64
            + 2 * popcount(self.z.iter().zip(&other.x).map(|(a, b)| a & b)) as i64
            - popcount(x.iter().zip(&z).map(|(a, b)| a & b)) as i64;
        Ok(PauliString {
            n_sites: self.n_sites,
            x,
            z,
            phase: Phase::from_exponent(k),
        })
    }

    /// Symplectic form: true iff `self · other == other · self`.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_size(other)?;
        let overlap = popcount(self.x.iter().zip(&other.z).map(|(a, b)| a & b))
            + popcount(self.z.iter().zip(&other.x).map(|(a, b)| a & b));
        Ok(overlap % 2 == 0)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> PauliString {
        PauliString {
            phase: Phase::from_exponent(-(self.phase.0 as i64)),
            ..self.clone()
        }
    }

    /// Low 64 mask bits, for basis-state application (requires `n_sites <= 64`).
    pub(crate) fn low_masks(&self) -> (u64, u64) {
        (self.x[0], self.z[0])
    }

    /// Coefficient multiplying `|b ^ x>` when the string acts on `|b>`, before
    /// the basis-dependent sign `(-1)^{popcount(z & b)}`.
    pub(crate) fn base_factor(&self) -> Complex64 {
        let k = self.phase.0 as i64 + popcount(self.x.iter().zip(&self.z).map(|(a, b)| a & b)) as i64;
        Phase::from_exponent(k).to_complex()
    }

    fn check_state(&self, v: &StateVector) -> Result<()> {
        if self.n_sites != v.n_sites() {
            return Err(Error::SizeMismatch {
                left: self.n_sites,
                right: v.n_sites(),
            });
        }
        Ok(())
    }

    /// `self |v>`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply_accumulate(Complex64::new(1.0, 0.0), v.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.n_sites, out)
    }

    /// `out += coeff · self |src>` on raw amplitude slices.
    pub fn apply_accumulate(&self, coeff: Complex64, src: &[Complex64], out: &mut [Complex64]) {
        let (xm, zm) = self.low_masks();
        let base = coeff * self.base_factor();
        let neg = -base;
        for (b, &amp) in src.iter().enumerate() {
            let b = b as u64;
            let f = if (zm & b).count_ones() % 2 == 0 { base } else { neg };
            out[(b ^ xm) as usize] += f * amp;
        }
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &StateVector) -> Result<Complex64> {
        self.check_state(v)?;
        let (xm, zm) = self.low_masks();
        let base = self.base_factor();
        let a = v.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &amp) in a.iter().enumerate() {
            let bb = b as u64;
            let term = a[(bb ^ xm) as usize].conj() * amp;
            if (zm & bb).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok(acc * base)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for s in 0..self.n_sites {
            write!(f, "{}", self.pauli_at(s).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `[+|-|+i|-i]` followed by one of `IXYZ` per site, site 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            (Phase::ONE, s)
        };
        let n = body.chars().count();
        let mut out = PauliString::identity(n);
        for (site, c) in body.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "bad Pauli symbol {c:?}"
                    )))
                }
            };
            let (xb, zb) = p.bits();
            out.set_bits(site, xb, zb);
        }
        out.phase = phase;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_table() {
        assert_eq!(p("X").multiply(&p("X")).unwrap(), p("I"));
        // X·Z = -iY
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), p("+iZ"));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), p("+iX"));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), p("I"));
    }

    #[test]
    fn disjoint_product_has_unit_phase() {
        let x0 = PauliString::single(2, 0, Pauli::X);
        let z1 = PauliString::single(2, 1, Pauli::Z);
        let prod = x0.multiply(&z1).unwrap();
        assert_eq!(prod, p("XZ"));
        assert_eq!(prod.phase(), Phase::ONE);
    }

    #[test]
    fn commutation_basics() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XI").commutes(&p("IZ")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(!p("XY").commutes(&p("XX")).unwrap());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(matches!(
            p("XX").multiply(&p("X")),
            Err(Error::SizeMismatch { left: 2, right: 1 })
        ));
        assert!(p("XX").commutes(&p("X")).is_err());
        let v = StateVector::basis(1, 0).unwrap();
        assert!(p("XX").apply(&v).is_err());
    }

    #[test]
    fn apply_on_basis_states() {
        let v = StateVector::basis(3, 0).unwrap();
        let out = PauliString::single(3, 0, Pauli::X).apply(&v).unwrap();
        assert_eq!(out.amplitudes()[1], Complex64::new(1.0, 0.0));
        let out = PauliString::single(3, 0, Pauli::Z).apply(&out).unwrap();
        assert_eq!(out.amplitudes()[1], Complex64::new(-1.0, 0.0));
        // Y|0> = i|1>
        let out = PauliString::single(1, 0, Pauli::Y)
            .apply(&StateVector::basis(1, 0).unwrap())
            .unwrap();
        assert_eq!(out.amplitudes()[1], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn wide_strings_span_multiple_words() {
        let a = PauliString::single(130, 129, Pauli::X);
        let b = PauliString::single(130, 129, Pauli::Z);
        let c = PauliString::single(130, 3, Pauli::Z);
        assert!(!a.commutes(&b).unwrap());
        assert!(a.commutes(&c).unwrap());
        assert_eq!(a.multiply(&b).unwrap().phase(), Phase::MINUS_I);
        assert_eq!(a.multiply(&b).unwrap().pauli_at(129), Pauli::Y);
        assert_eq!(a.multiply(&c).unwrap().weight(), 2);
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["+XYZI", "-iZZ", "+iY", "-I"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn from_masks_validates_tail_bits() {
        assert!(PauliString::from_masks(3, vec![0b1000], vec![0], Phase::ONE).is_err());
        assert!(PauliString::from_masks(3, vec![0b101], vec![0b1], Phase::ONE).is_ok());
        assert!(PauliString::from_masks(3, vec![], vec![], Phase::ONE).is_err());
    }
}
