//! Max-min fair multigroup multicast beamforming with and without
//! rate splitting under imperfect CSIT.

pub mod conic;
pub mod csit;
pub mod dof;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod satcom;
pub mod wmmse;

pub use csit::{ConditionalSampleSet, CsitModel, CsitSample};
pub use error::{Error, Result};
pub use model::{CommonRateSplit, GroupLayout, PowerConstraint, PowerConstraintKind, PrecoderSet, Strategy};
pub use numerics::{ComplexMatrix, ComplexVector, RandomStream};
pub use wmmse::{EqualizerWeightSet, MmfSolution, SubproblemCoefficients};
