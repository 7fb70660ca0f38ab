//! Numerical kernels shared by the rest of the crate.

pub mod bessel;
pub mod linalg;
pub mod rng;

pub use bessel::{bessel_j, bessel_j_over_power};
pub use linalg::{
    dominant_left_singular_vector, null_space_basis, ComplexMatrix, ComplexVector,
};
pub use rng::{derive_stream, PathLabel, RandomStream};

/// Convert nats to bits.
#[inline]
pub fn nats_to_bits(x: f64) -> f64 {
    x / std::f64::consts::LN_2
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
