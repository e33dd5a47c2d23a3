//! Simulation core for analogue quantum image recognition.
//!
//! Pictures are mapped onto the unit sphere ([`image_space`]), embedded as
//! rays of a complex Hilbert space ([`hilbert`]) and recognized either by a
//! bank of single-image projection filters over a split beam ([`qrom_bank`])
//! or by one projective measurement after orthogonalizing the stored set
//! ([`ortho`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence
//! and the command line live in the `qrom` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod hilbert;
pub mod image_space;
pub mod ortho;
pub mod qrom_bank;
pub mod rng;

pub use error::{Error, Result};
pub use hilbert::{
    canonical_phase, embed, fidelity, inner, random_state, ray_equal, Complex64, QuantumState,
};
pub use image_space::{
    apply_noise, center_and_normalize, concentration_estimate, cosine_similarity,
    euclidean_distance, random_unit_vector, ImageVector, NoiseSpec, RawImage,
};
pub use ortho::{
    build_rotation, measure_in_basis, orthogonalize, recognize_single_shot, OrthoMemory,
    UnitaryMatrix,
};
pub use qrom_bank::{
    build_filter, filter_pass, recognize_argmax, Filter, FilterBank, FilterOutcome,
    RecognitionResult, TrialCounts,
};

/// Absolute tolerance on the Euclidean norm of every unit vector and state.
pub const UNIT_NORM_TOL: f64 = 1e-12;
