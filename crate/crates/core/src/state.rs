//! Dense state vectors over the computational basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

/// Widest register a dense state may hold.
pub const MAX_DENSE_SITES: usize = 30;

/// Amplitudes over `2^n_sites` basis states; site `k` is bit `k` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    fn check_sites(n_sites: usize) -> Result<()> {
        if n_sites == 0 || n_sites > MAX_DENSE_SITES {
            return Err(Error::InvalidParameter(alloc::format!(
                "dense state needs 1..={MAX_DENSE_SITES} sites, got {n_sites}"
            )));
        }
        Ok(())
    }

    pub fn zeros(n_sites: usize) -> Result<Self> {
        Self::check_sites(n_sites)?;
        Ok(StateVector {
            n_sites,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1 << n_sites],
        })
    }

    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        let mut v = Self::zeros(n_sites)?;
        if index >= v.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "basis index {index} out of range"
            )));
        }
        v.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::InvalidParameter(alloc::format!(
                "expected {} amplitudes, got {}",
                1usize << n_sites,
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            n_sites,
            amplitudes,
        })
    }

    /// Normalized state with independent Gaussian real and imaginary parts.
    pub fn random<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> Result<Self> {
        let mut v = Self::zeros(n_sites)?;
        for a in v.amplitudes.iter_mut() {
            *a = Complex64::new(gaussian(rng), gaussian(rng));
        }
        v.normalize();
        Ok(v)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scales to unit norm. A zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in self.amplitudes.iter_mut() {
                *a *= inv;
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_sites != other.n_sites {
            return Err(Error::SizeMismatch {
                left: self.n_sites,
                right: other.n_sites,
            });
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }
}

/// `sum conj(a_i) b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Standard normal draw via Box-Muller.
pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_state_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = StateVector::random(9, &mut rng).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert_eq!(v.len(), 512);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(StateVector::zeros(0).is_err());
        assert!(StateVector::basis(2, 4).is_err());
        assert!(StateVector::from_amplitudes(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn inner_product_is_conjugate_linear_on_the_left() {
        let a = StateVector::from_amplitudes(1, vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        let b = StateVector::basis(1, 0).unwrap();
        assert_eq!(a.inner(&b).unwrap(), Complex64::new(0.0, -1.0));
    }
}
