//! Periodic square lattices.

use crate::error::{Error, Result};

/// Even/odd class of the two torus dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ParityClass {
    #[cfg_attr(feature = "serde", serde(rename = "e*e"))]
    EvenEven,
    #[cfg_attr(feature = "serde", serde(rename = "e*o"))]
    EvenOdd,
    #[cfg_attr(feature = "serde", serde(rename = "o*e"))]
    OddEven,
    #[cfg_attr(feature = "serde", serde(rename = "o*o"))]
    OddOdd,
}

impl ParityClass {
    pub fn label(self) -> &'static str {
        match self {
            ParityClass::EvenEven => "e*e",
            ParityClass::EvenOdd => "e*o",
            ParityClass::OddEven => "o*e",
            ParityClass::OddOdd => "o*o",
        }
    }

    /// Ground degeneracy of the unperturbed plaquette model.
    pub fn degeneracy(self) -> usize {
        if self == ParityClass::EvenEven {
            4
        } else {
            2
        }
    }
}

/// `lx` by `ly` torus. Site `(x, y)` has index `x + lx * y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSpec {
    lx: usize,
    ly: usize,
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl LatticeSpec {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::InvalidLattice(alloc::format!(
                "torus dimensions must be at least 2, got {lx}x{ly}"
            )));
        }
        if lx.checked_mul(ly).is_none() {
            return Err(Error::InvalidLattice("site count overflows".into()));
        }
        Ok(LatticeSpec { lx, ly })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn parity_class(&self) -> ParityClass {
        match (self.lx % 2 == 0, self.ly % 2 == 0) {
            (true, true) => ParityClass::EvenEven,
            (true, false) => ParityClass::EvenOdd,
            (false, true) => ParityClass::OddEven,
            (false, false) => ParityClass::OddOdd,
        }
    }

    /// Greatest common divisor of the two dimensions.
    pub fn xi(&self) -> usize {
        gcd(self.lx, self.ly)
    }

    /// Length of the closed diagonal path, `lx * ly / gcd(lx, ly)`.
    pub fn tunneling_length(&self) -> usize {
        self.lx * self.ly / self.xi()
    }

    /// A dimension of 2 makes neighbouring plaquettes share two sites.
    pub fn is_thin(&self) -> bool {
        self.lx == 2 || self.ly == 2
    }

    /// Index of `(x, y)` after periodic wrap.
    pub fn site(&self, x: isize, y: isize) -> usize {
        let xw = x.rem_euclid(self.lx as isize) as usize;
        let yw = y.rem_euclid(self.ly as isize) as usize;
        xw + self.lx * yw
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    /// Parity of `x + y`; 1 marks the odd sublattice.
    pub fn site_parity(&self, site: usize) -> usize {
        let (x, y) = self.coords(site);
        (x + y) % 2
    }
}
