//! Quantum read-only memory filter bank.
//!
//! A classical input is prepared repeatedly as the same state, split evenly
//! over `n` arms and sent through one projection filter `|i_k><i_k|` per arm.
//! Each filter passes a particle with probability equal to the fidelity
//! between its stored ray and the input; the arm with the largest intensity
//! names the recognized image.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::hilbert::{canonical_phase, fidelity, QuantumState};
use crate::rng::stream;

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_SHOTS_PER_ARM: u64 = 1000;

/// A single-image filter storing the canonical representative of its ray.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    stored: QuantumState,
    label: String,
}

impl Filter {
    pub fn stored(&self) -> &QuantumState {
        &self.stored
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

pub fn build_filter(image: &QuantumState, label: impl Into<String>) -> Filter {
    Filter {
        stored: canonical_phase(image),
        label: label.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    /// The particle passed and now sits exactly on the stored ray.
    Accepted(QuantumState),
    /// The particle was absorbed.
    Rejected,
}

/// Sends one particle in state `input` through `f`.
pub fn filter_pass<R: Rng + ?Sized>(
    f: &Filter,
    input: &QuantumState,
    rng: &mut R,
) -> Result<FilterOutcome> {
    let p = fidelity(&f.stored, input)?;
    Ok(if passes(p, rng) {
        FilterOutcome::Accepted(f.stored.clone())
    } else {
        FilterOutcome::Rejected
    })
}

#[inline]
fn passes<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Per-arm accept counts from a beam run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialCounts {
    shots_per_arm: u64,
    accepts: Vec<u64>,
}

impl TrialCounts {
    pub fn new(shots_per_arm: u64, accepts: Vec<u64>) -> Result<Self> {
        if shots_per_arm == 0 {
            return Err(Error::InvalidParameter("shots_per_arm must be positive"));
        }
        if accepts.iter().any(|&a| a > shots_per_arm) {
            return Err(Error::InvalidParameter("accepts exceed shots_per_arm"));
        }
        Ok(Self {
            shots_per_arm,
            accepts,
        })
    }

    pub fn shots_per_arm(&self) -> u64 {
        self.shots_per_arm
    }

    pub fn accepts(&self) -> &[u64] {
        &self.accepts
    }

    /// Empirical accept rate of every arm, an estimate of its fidelity.
    pub fn rates(&self) -> Vec<f64> {
        let shots = self.shots_per_arm as f64;
        self.accepts.iter().map(|&a| a as f64 / shots).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<Filter>,
    intensity: f64,
}

impl FilterBank {
    pub fn new(filters: Vec<Filter>, intensity: f64) -> Result<Self> {
        let first = filters.first().ok_or(Error::Empty)?;
        let dim = first.stored.dim();
        for f in &filters {
            check_dim(dim, f.stored.dim())?;
        }
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::InvalidParameter("input intensity must be positive"));
        }
        Ok(Self { filters, intensity })
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    /// Input intensity `I0` before splitting.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.filters[0].stored.dim()
    }

    /// Fidelity of `input` with every stored ray.
    pub fn fidelities(&self, input: &QuantumState) -> Result<Vec<f64>> {
        check_dim(self.dim(), input.dim())?;
        self.filters
            .iter()
            .map(|f| fidelity(&f.stored, input))
            .collect()
    }

    /// Expected intensity after each filter: `|<i_k|input>|^2 * I0 / n`.
    pub fn split_intensities(&self, input: &QuantumState) -> Result<Vec<f64>> {
        let per_arm = self.intensity / self.len() as f64;
        Ok(self
            .fidelities(input)?
            .into_iter()
            .map(|p| p * per_arm)
            .collect())
    }

    /// Undoes the `I0 / n` split, turning intensities back into fidelity estimates.
    pub fn intensity_rates(&self, intensities: &[f64]) -> Vec<f64> {
        let per_arm = self.intensity / self.len() as f64;
        intensities.iter().map(|i| i / per_arm).collect()
    }

    /// Accepts on arm `arm` out of `shots` particles, drawn from sub-stream
    /// `arm` of `seed`.
    pub fn run_arm(&self, arm: usize, input: &QuantumState, shots: u64, seed: u64) -> Result<u64> {
        let filter = self
            .filters
            .get(arm)
            .ok_or(Error::InvalidParameter("arm index out of range"))?;
        let p = fidelity(&filter.stored, input)?;
        let mut rng = stream(seed, arm as u64);
        Ok((0..shots).filter(|_| passes(p, &mut rng)).count() as u64)
    }

    /// Fires `shots_per_arm` particles into every arm.
    pub fn run_beam_trials(
        &self,
        input: &QuantumState,
        shots_per_arm: u64,
        seed: u64,
    ) -> Result<TrialCounts> {
        if shots_per_arm == 0 {
            return Err(Error::InvalidParameter("shots_per_arm must be positive"));
        }
        check_dim(self.dim(), input.dim())?;
        let accepts = (0..self.len())
            .map(|arm| self.run_arm(arm, input, shots_per_arm, seed))
            .collect::<Result<_>>()?;
        TrialCounts::new(shots_per_arm, accepts)
    }
}

/// Outcome of a recognition attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    /// Chosen image, or `None` when nothing was recognized.
    pub best_index: Option<usize>,
    /// Fidelity (estimate) of the input with the chosen image.
    pub score: f64,
    /// Threshold used by threshold-based decisions; `None` when the decision
    /// came from a projective measurement outcome.
    pub epsilon: Option<f64>,
    pub accepted: bool,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("epsilon must lie in (0, 1)"))
    }
}

/// Chooses the arm with the largest normalized rate (lowest index on ties)
/// and accepts it when that rate exceeds `1 - epsilon`.
///
/// `rates` are fidelity estimates: [`TrialCounts::rates`] for sampled runs or
/// [`FilterBank::intensity_rates`] for exact intensities.
pub fn recognize_argmax(rates: &[f64], epsilon: f64) -> Result<RecognitionResult> {
    check_epsilon(epsilon)?;
    let (best, score) = rates
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, s)) if r <= s => best,
            _ => Some((i, r)),
        })
        .ok_or(Error::Empty)?;
    Ok(RecognitionResult {
        best_index: Some(best),
        score,
        epsilon: Some(epsilon),
        accepted: score > 1.0 - epsilon,
    })
}
