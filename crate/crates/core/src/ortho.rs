//! Recognition by a single projective measurement.
//!
//! Nearly orthogonal stored images are orthonormalized with modified
//! Gram-Schmidt, a unitary `U_r` rotates them onto the first `k` canonical
//! basis vectors, and a measurement in the canonical basis then names the
//! stored image. Outcomes `>= k` land in the orthogonal complement and mean
//! "no stored image".

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::hilbert::{canonical_phase, fidelity, inner_unchecked, norm, Complex64, QuantumState};
use crate::qrom_bank::RecognitionResult;

/// Residual norm below which an input counts as linearly dependent.
pub const DEPENDENCE_TOL: f64 = 1e-8;
/// Tolerance for orthonormality, unitarity and basis-mapping checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Orthonormalizes `images` in input order.
///
/// Fails with [`Error::LinearDependence`] naming the first input whose
/// residual norm drops below `tol`.
pub fn orthogonalize(images: &[QuantumState], tol: f64) -> Result<Vec<QuantumState>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("dependence tolerance must be positive"));
    }
    let Some(first) = images.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    if images.len() > dim {
        return Err(Error::InvalidParameter("more images than dimensions"));
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(images.len());
    for (index, image) in images.iter().enumerate() {
        check_dim(dim, image.dim())?;
        let mut r = image.amplitudes().to_vec();
        project_out(&mut r, &basis);
        let residual = norm(&r);
        if residual < tol {
            return Err(Error::LinearDependence { index, residual });
        }
        r.iter_mut().for_each(|a| *a /= residual);
        basis.push(r);
    }
    Ok(basis
        .into_iter()
        .map(|b| QuantumState::from_amplitudes(b).expect("normalized above"))
        .collect())
}

// Modified Gram-Schmidt sweep: each coefficient is taken against the
// already-reduced residual.
fn project_out(r: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let coef = inner_unchecked(r, q);
        for (x, y) in r.iter_mut().zip(q) {
            *x -= coef * y;
        }
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Accepts `rows` only if they form a unitary matrix within [`STRUCTURE_TOL`].
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            entries.extend(row);
        }
        let m = Self { dim, entries };
        let residual = m.unitarity_residual();
        if !(residual <= STRUCTURE_TOL) {
            return Err(Error::NotUnitary { residual });
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.dim)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// `U v` on raw amplitudes.
    pub fn apply_raw(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim, v.len())?;
        Ok(self
            .rows()
            .map(|row| row.iter().zip(v).map(|(u, x)| u * x).sum())
            .collect())
    }

    /// `U |psi>`; stays normalized because `U` is unitary.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        QuantumState::normalize(self.apply_raw(state.amplitudes())?)
    }

    /// Max-norm of `U^dagger U - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    s += self.get(r, i).conj() * self.get(r, j);
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

fn check_orthonormal(states: &[QuantumState]) -> Result<()> {
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate().skip(i) {
            let mut ip = inner_unchecked(a.amplitudes(), b.amplitudes());
            if i == j {
                ip -= 1.0;
            }
            let residual = ip.norm();
            if !(residual <= STRUCTURE_TOL) {
                return Err(Error::NotOrthonormal { i, j, residual });
            }
        }
    }
    Ok(())
}

/// Unitary whose first `k` rows are the bras of `ortho_states`, so that
/// `U |psi_i> = e_i`. The remaining rows are a Gram-Schmidt completion over
/// the canonical basis vectors taken in order, skipping candidates whose
/// residual falls below [`DEPENDENCE_TOL`].
pub fn build_rotation(ortho_states: &[QuantumState], dim: usize) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive"));
    }
    if ortho_states.len() > dim {
        return Err(Error::InvalidParameter("more states than dimensions"));
    }
    for s in ortho_states {
        check_dim(dim, s.dim())?;
    }
    check_orthonormal(ortho_states)?;

    let mut basis: Vec<Vec<Complex64>> =
        ortho_states.iter().map(|s| s.amplitudes().to_vec()).collect();
    for candidate in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut r = vec![Complex64::new(0.0, 0.0); dim];
        r[candidate] = Complex64::new(1.0, 0.0);
        project_out(&mut r, &basis);
        if norm(&r) < DEPENDENCE_TOL {
            continue;
        }
        // second sweep restores orthogonality lost to cancellation
        project_out(&mut r, &basis);
        let residual = norm(&r);
        r.iter_mut().for_each(|a| *a /= residual);
        basis.push(r);
    }
    debug_assert_eq!(basis.len(), dim);

    let rows = basis
        .into_iter()
        .map(|ket| ket.into_iter().map(|a| a.conj()).collect())
        .collect();
    UnitaryMatrix::from_rows(rows)
}

/// Stored images as an orthonormal set plus the rotation onto the
/// measurement basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMemory {
    ortho_states: Vec<QuantumState>,
    rotation: UnitaryMatrix,
    labels: Vec<String>,
    originals: Option<Vec<QuantumState>>,
}

impl OrthoMemory {
    /// Orthonormalizes `images` (input order, [`DEPENDENCE_TOL`]) and builds
    /// the rotation. Orthonormal states are stored in canonical phase.
    pub fn build(images: &[QuantumState], labels: Vec<String>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Empty);
        }
        if labels.len() != images.len() {
            return Err(Error::InvalidParameter("one label per image required"));
        }
        let ortho_states: Vec<QuantumState> = orthogonalize(images, DEPENDENCE_TOL)?
            .iter()
            .map(canonical_phase)
            .collect();
        let rotation = build_rotation(&ortho_states, images[0].dim())?;
        let memory = Self {
            ortho_states,
            rotation,
            labels,
            originals: Some(images.to_vec()),
        };
        memory.validate()?;
        Ok(memory)
    }

    /// Reassembles a memory from persisted parts, re-checking every invariant.
    pub fn from_parts(
        labels: Vec<String>,
        ortho_states: Vec<QuantumState>,
        rotation: UnitaryMatrix,
    ) -> Result<Self> {
        if ortho_states.is_empty() {
            return Err(Error::Empty);
        }
        if labels.len() != ortho_states.len() {
            return Err(Error::InvalidParameter("one label per stored state required"));
        }
        let memory = Self {
            ortho_states,
            rotation,
            labels,
            originals: None,
        };
        memory.validate()?;
        Ok(memory)
    }

    /// Orthonormality, unitarity and `U psi_i = e_i`, all within [`STRUCTURE_TOL`].
    pub fn validate(&self) -> Result<()> {
        let dim = self.rotation.dim();
        if self.ortho_states.len() > dim {
            return Err(Error::InvalidParameter("more states than dimensions"));
        }
        for s in &self.ortho_states {
            check_dim(dim, s.dim())?;
        }
        check_orthonormal(&self.ortho_states)?;
        let residual = self.rotation.unitarity_residual();
        if !(residual <= STRUCTURE_TOL) {
            return Err(Error::NotUnitary { residual });
        }
        for (index, s) in self.ortho_states.iter().enumerate() {
            let image = self.rotation.apply_raw(s.amplitudes())?;
            let residual = image
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let target = if j == index { 1.0 } else { 0.0 };
                    (a - target).norm()
                })
                .fold(0.0, f64::max);
            if !(residual <= STRUCTURE_TOL) {
                return Err(Error::RotationMismatch { index, residual });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    /// Number of stored images `k`.
    pub fn stored_count(&self) -> usize {
        self.ortho_states.len()
    }

    pub fn ortho_states(&self) -> &[QuantumState] {
        &self.ortho_states
    }

    pub fn rotation(&self) -> &UnitaryMatrix {
        &self.rotation
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Pre-orthogonalization inputs; only known for memories built in-process.
    pub fn originals(&self) -> Option<&[QuantumState]> {
        self.originals.as_deref()
    }

    /// `fidelity(original_i, ortho_i)` for every stored image.
    pub fn distortion(&self) -> Option<Vec<f64>> {
        let originals = self.originals.as_ref()?;
        Some(
            originals
                .iter()
                .zip(&self.ortho_states)
                .map(|(o, s)| fidelity(o, s).expect("same dimension"))
                .collect(),
        )
    }

    /// Born probabilities `|(U input)_i|^2` over all `n` outcomes.
    pub fn outcome_probabilities(&self, input: &QuantumState) -> Result<Vec<f64>> {
        Ok(self
            .rotation
            .apply_raw(input.amplitudes())?
            .iter()
            .map(|a| a.norm_sqr())
            .collect())
    }

    /// Probability that a measurement lands outside the stored images.
    pub fn rejection_probability(&self, input: &QuantumState) -> Result<f64> {
        let probs = self.outcome_probabilities(input)?;
        Ok(1.0 - probs[..self.stored_count()].iter().sum::<f64>())
    }
}

/// Draws one outcome index from `probs` using a single uniform variate.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    // rounding left u above the total; fall back to the last possible outcome
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Measures `U_r input` in the canonical basis.
pub fn measure_in_basis<R: Rng + ?Sized>(
    input: &QuantumState,
    memory: &OrthoMemory,
    rng: &mut R,
) -> Result<usize> {
    let probs = memory.outcome_probabilities(input)?;
    Ok(sample_index(&probs, rng))
}

/// One measurement decides: outcome `i < k` recognizes stored image `i`,
/// anything else rejects. The score is the exact probability of the
/// observed stored outcome, which a physical device would not reveal.
pub fn recognize_single_shot<R: Rng + ?Sized>(
    memory: &OrthoMemory,
    input: &QuantumState,
    rng: &mut R,
) -> Result<RecognitionResult> {
    let probs = memory.outcome_probabilities(input)?;
    let outcome = sample_index(&probs, rng);
    Ok(if outcome < memory.stored_count() {
        RecognitionResult {
            best_index: Some(outcome),
            score: probs[outcome].min(1.0),
            epsilon: None,
            accepted: true,
        }
    } else {
        RecognitionResult {
            best_index: None,
            score: 0.0,
            epsilon: None,
            accepted: false,
        }
    })
}
