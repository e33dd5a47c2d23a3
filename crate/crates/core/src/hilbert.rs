//! Pure states of a finite-dimensional complex Hilbert space.
//!
//! A [`QuantumState`] is a unit vector; the physical state is its ray, so
//! comparisons go through [`fidelity`] rather than component equality.

use alloc::vec::Vec;

pub use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::image_space::ImageVector;
use crate::UNIT_NORM_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Wraps amplitudes whose squared moduli already sum to one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let norm = norm(&amplitudes);
        if !(libm::fabs(norm - 1.0) <= UNIT_NORM_TOL) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Picks the unit representative of the ray through `amplitudes`.
    pub fn normalize(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroVector);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes })
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter("basis index out of range"));
        }
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `e^{i phi} |self>`: same ray, different representative.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let lambda = Complex64::from_polar(1.0, phi);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * lambda).collect(),
        }
    }

    /// Real vector carried by a state whose imaginary parts vanish (up to `tol`).
    pub fn to_real(&self, tol: f64) -> Option<ImageVector> {
        if self.amplitudes.iter().any(|a| libm::fabs(a.im) > tol) {
            return None;
        }
        ImageVector::normalize(self.amplitudes.iter().map(|a| a.re).collect()).ok()
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a.norm_sqr()).sum::<f64>())
}

/// Identity embedding of a real unit vector as a state with zero imaginary parts.
pub fn embed(v: &ImageVector) -> QuantumState {
    QuantumState {
        amplitudes: v
            .components()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect(),
    }
}

/// Hermitian scalar product `(a, b) = sum a_i conj(b_i)`, which is `<b|a>`.
pub fn inner(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    check_dim(a.dim(), b.dim())?;
    Ok(inner_unchecked(&a.amplitudes, &b.amplitudes))
}

pub(crate) fn inner_unchecked(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Transition probability `|<a|b>|^2`, clamped to `[0, 1]` against rounding.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr().min(1.0))
}

/// True when `a` and `b` describe the same physical state up to `tol` in fidelity.
pub fn ray_equal(a: &QuantumState, b: &QuantumState, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("ray tolerance must be positive"));
    }
    Ok(1.0 - fidelity(a, b)? <= tol)
}

/// Representative of the ray of `a` whose largest-modulus amplitude (lowest
/// index on ties) is real and positive.
pub fn canonical_phase(a: &QuantumState) -> QuantumState {
    let (pivot, modulus) = a
        .amplitudes
        .iter()
        .map(|a| a.norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, m)| {
            if m > best.1 {
                (i, m)
            } else {
                best
            }
        });
    let lambda = a.amplitudes[pivot].conj() / modulus;
    let mut amplitudes: Vec<Complex64> = a.amplitudes.iter().map(|x| x * lambda).collect();
    amplitudes[pivot] = Complex64::new(modulus, 0.0);
    QuantumState { amplitudes }
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuantumState> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive"));
    }
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(state) = QuantumState::normalize(v) {
            return Ok(state);
        }
    }
}
