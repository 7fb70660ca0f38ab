//! Rayleigh channels, CSIT errors whose variance decays as `P^-α`, and the
//! conditional sample sets used by the sample-average approximation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{ComplexMatrix, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CsitQuality {
    Perfect,
    /// Error variance `P^-α` per channel entry.
    Scaling(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsitModel {
    quality: CsitQuality,
    power_ref: f64,
}

impl CsitModel {
    pub fn perfect() -> Self {
        CsitModel { quality: CsitQuality::Perfect, power_ref: 1.0 }
    }

    pub fn scaling(alpha: f64, power_ref: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("CSIT exponent must lie in [0, 1], got {alpha}")));
        }
        if !(power_ref > 0.0) || !power_ref.is_finite() {
            return Err(invalid(format!("reference power must be positive, got {power_ref}")));
        }
        Ok(CsitModel { quality: CsitQuality::Scaling(alpha), power_ref })
    }

    pub fn new(quality: CsitQuality, power_ref: f64) -> Result<Self> {
        match quality {
            CsitQuality::Perfect => Ok(Self::perfect()),
            CsitQuality::Scaling(a) => Self::scaling(a, power_ref),
        }
    }

    pub fn quality(&self) -> CsitQuality {
        self.quality
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self.quality, CsitQuality::Perfect)
    }

    /// `α`, with perfect CSIT reported as 1 (perfect in the DoF sense).
    pub fn dof_alpha(&self) -> f64 {
        match self.quality {
            CsitQuality::Perfect => 1.0,
            CsitQuality::Scaling(a) => a,
        }
    }

    pub fn power_ref(&self) -> f64 {
        self.power_ref
    }

    /// Per-entry error variance `P^-α` (0 for perfect CSIT).
    pub fn error_variance(&self) -> f64 {
        match self.quality {
            CsitQuality::Perfect => 0.0,
            CsitQuality::Scaling(a) => self.power_ref.powf(-a),
        }
    }
}

/// One channel realisation split into what the transmitter knows and what it does not.
#[derive(Debug, Clone, PartialEq)]
pub struct CsitSample {
    pub true_channel: ComplexMatrix,
    pub estimate: ComplexMatrix,
    pub error: ComplexMatrix,
}

/// Realisations `H^(s) = Ĥ + H̃^(s)` sharing one estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSampleSet {
    pub estimate: ComplexMatrix,
    pub realizations: Vec<ComplexMatrix>,
}

impl ConditionalSampleSet {
    /// The estimate alone, as used when CSIT is perfect.
    pub fn exact(estimate: ComplexMatrix) -> Self {
        ConditionalSampleSet { realizations: vec![estimate.clone()], estimate }
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }
}

fn check_dims(n_tx: usize, users: usize) -> Result<()> {
    if n_tx == 0 || users == 0 {
        return Err(invalid(format!("channel dimensions must be positive, got {n_tx}x{users}")));
    }
    Ok(())
}

/// i.i.d. `CN(0, 1)` entries, column `k` being user `k`'s channel.
pub fn sample_rayleigh(n_tx: usize, users: usize, stream: &mut RandomStream) -> Result<ComplexMatrix> {
    check_dims(n_tx, users)?;
    Ok(ComplexMatrix::from_fn(n_tx, users, |_, _| stream.complex_normal()))
}

/// i.i.d. `CN(0, P^-α)` entries; all zeros under perfect CSIT.
///
/// Draws are standard normals scaled afterwards, so the same stream gives
/// the same error direction at every power level and CSIT exponent.
pub fn sample_error(
    n_tx: usize,
    users: usize,
    model: &CsitModel,
    stream: &mut RandomStream,
) -> Result<ComplexMatrix> {
    check_dims(n_tx, users)?;
    if model.is_perfect() {
        return Ok(ComplexMatrix::zeros(n_tx, users));
    }
    let sd = model.error_variance().sqrt();
    Ok(ComplexMatrix::from_fn(n_tx, users, |_, _| stream.complex_normal() * sd))
}

/// Draw an error for `channel` and return `(H, Ĥ, H̃)`.
///
/// The stored true channel is recomputed as `Ĥ + H̃` so that the
/// reconstruction identity holds bit-for-bit; it differs from the input by
/// at most one rounding per entry.
pub fn split_estimate(
    channel: &ComplexMatrix,
    model: &CsitModel,
    stream: &mut RandomStream,
) -> Result<CsitSample> {
    let error = sample_error(channel.nrows(), channel.ncols(), model, stream)?;
    let estimate = channel - &error;
    let true_channel = &estimate + &error;
    Ok(CsitSample { true_channel, estimate, error })
}

pub fn conditional_samples(
    estimate: &ComplexMatrix,
    count: usize,
    model: &CsitModel,
    stream: &mut RandomStream,
) -> Result<ConditionalSampleSet> {
    if count == 0 {
        return Err(invalid("conditional sample set needs S >= 1"));
    }
    let realizations = (0..count)
        .map(|_| {
            let err = sample_error(estimate.nrows(), estimate.ncols(), model, stream)?;
            Ok(estimate + err)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalSampleSet { estimate: estimate.clone(), realizations })
}
