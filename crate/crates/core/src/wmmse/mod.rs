//! Sample-average rates and the WMMSE-based alternating optimizer for the
//! max-min fair average rate, with and without rate splitting.
//!
//! Rates and weighted MSEs are kept in nats; [`MmfSolution`] reports bits.

mod ao;
mod init;
mod mmse;

pub use ao::{ao_solve, build_subproblem, solve_nors, AoOptions, MmfSolution};
pub use init::{initial_precoders, COMMON_POWER_FLOOR};
pub use mmse::{assemble_subproblem, mmse_update, EqualizerWeightSet, SubproblemCoefficients};

use std::time::{Duration, Instant};

use crate::csit::ConditionalSampleSet;
use crate::error::{invalid, Result};
use crate::model::{
    user_rates_nats, CommonRateSplit, GroupLayout, PowerConstraint, PrecoderSet, Strategy, UNIT_NOISE,
};
use crate::numerics::{nats_to_bits, ComplexMatrix, ComplexVector, RandomStream};

/// Per-user sample-average rates in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageRates {
    /// `R̄_c,k`; all zero without a common stream.
    pub common: Vec<f64>,
    /// `R̄_k`.
    pub private: Vec<f64>,
}

impl AverageRates {
    /// `min_{i∈G_m} R̄_i` for every group.
    pub fn group_private(&self, layout: &GroupLayout) -> Vec<f64> {
        (0..layout.num_groups())
            .map(|g| layout.members(g).iter().map(|&i| self.private[i]).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// `min_k R̄_c,k`, the largest common rate every user can decode.
    pub fn common_rate(&self) -> f64 {
        self.common.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0)
    }

    /// Max-min fair split of the common rate and the resulting group rates,
    /// all in nats. `with_common = false` ignores the common stream.
    pub fn fair_allocation(&self, layout: &GroupLayout, with_common: bool) -> (CommonRateSplit, Vec<f64>) {
        let private = self.group_private(layout);
        let split = if with_common {
            CommonRateSplit::water_fill(&private, self.common_rate())
        } else {
            CommonRateSplit::zeros(private.len())
        };
        let rates = private.iter().zip(&split.portions).map(|(r, c)| r + c).collect();
        (split, rates)
    }

    /// MMF rate (nats) under the fair split.
    pub fn mmf(&self, layout: &GroupLayout, with_common: bool) -> f64 {
        let (_, rates) = self.fair_allocation(layout, with_common);
        rates.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `R̄^(S) = (1/S) Σ_s R(H^(s))` for every user, in nats.
pub fn average_rates(
    samples: &ConditionalSampleSet,
    prec: &PrecoderSet,
    layout: &GroupLayout,
) -> Result<AverageRates> {
    if samples.is_empty() {
        return Err(invalid("average rates need at least one sample"));
    }
    let est = &samples.estimate;
    if est.ncols() != layout.num_users() {
        return Err(invalid("sample set and layout disagree on the number of users"));
    }
    prec.check_dims(est.nrows(), layout.num_groups())?;
    let k = layout.num_users();
    let mut common = vec![0.0; k];
    let mut private = vec![0.0; k];
    for h in &samples.realizations {
        let (c, p) = user_rates_nats(h, prec, layout, UNIT_NOISE);
        for i in 0..k {
            common[i] += c[i];
            private[i] += p[i];
        }
    }
    let s = samples.len() as f64;
    common.iter_mut().for_each(|v| *v /= s);
    private.iter_mut().for_each(|v| *v /= s);
    Ok(AverageRates { common, private })
}

/// MMF average rate in bits of `prec`, with the fair common-rate split.
pub fn mmf_average_rate_bits(
    samples: &ConditionalSampleSet,
    prec: &PrecoderSet,
    layout: &GroupLayout,
) -> Result<f64> {
    let rates = average_rates(samples, prec, layout)?;
    Ok(nats_to_bits(rates.mmf(layout, prec.common.is_some())))
}

/// RS and NoRS optima for one channel estimate.
#[derive(Debug, Clone)]
pub struct SchemePair {
    pub rs: MmfSolution,
    pub nors: MmfSolution,
    /// The RS run ended below the NoRS optimum, so `rs` is the NoRS point
    /// with a silent common stream.
    pub rs_from_nors: bool,
    pub rs_time: Duration,
    pub nors_time: Duration,
}

/// Optimise NoRS and RS from their regime constructions.
///
/// NoRS precoders with a zero common stream are feasible for RS, so the
/// reported RS optimum is the better of the RS run and that point.
pub fn optimize_pair(
    est: &ComplexMatrix,
    samples: &ConditionalSampleSet,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    alpha: f64,
    stream: &RandomStream,
    opts: &AoOptions,
) -> Result<SchemePair> {
    let start = Instant::now();
    let init = initial_precoders(Strategy::NoRs, est, layout, pc, alpha, &mut stream.child("nors"))?;
    let nors = solve_nors(samples, layout, pc, &init, opts)?;
    let nors_time = start.elapsed();
    let start = Instant::now();
    let init = initial_precoders(Strategy::Rs, est, layout, pc, alpha, &mut stream.child("rs"))?;
    let rs = ao_solve(samples, layout, pc, &init, opts)?;
    let rs_time = start.elapsed();
    if rs.mmf >= nors.mmf {
        return Ok(SchemePair { rs, nors, rs_from_nors: false, rs_time, nors_time });
    }
    let mut lifted = nors.clone();
    lifted.precoders.common = Some(ComplexVector::zeros(pc.n_tx()));
    lifted.split = CommonRateSplit::zeros(layout.num_groups());
    Ok(SchemePair { rs: lifted, nors, rs_from_nors: true, rs_time, nors_time })
}
