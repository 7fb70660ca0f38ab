//! Fixtures shared by the benchmarks.

use rsmc::csit::{conditional_samples, sample_rayleigh, split_estimate};
use rsmc::model::{GroupLayout, PowerConstraint, PrecoderSet, Strategy};
use rsmc::numerics::RandomStream;
use rsmc::wmmse::initial_precoders;
use rsmc::{ConditionalSampleSet, CsitModel};

pub struct Instance {
    pub samples: ConditionalSampleSet,
    pub layout: GroupLayout,
    pub pc: PowerConstraint,
    pub init: PrecoderSet,
}

/// Rayleigh instance with `S` conditional samples at the given SNR and CSIT
/// exponent, with the RS initial point.
pub fn rayleigh_instance(n_tx: usize, sizes: &[usize], snr_db: f64, alpha: f64, saa: usize) -> Instance {
    let mut st = RandomStream::new(11, &["bench".into()]);
    let layout = GroupLayout::from_sizes(sizes).unwrap();
    let p = 10f64.powf(snr_db / 10.0);
    let h = sample_rayleigh(n_tx, layout.num_users(), &mut st).unwrap();
    let model = CsitModel::scaling(alpha, p).unwrap();
    let cs = split_estimate(&h, &model, &mut st).unwrap();
    let samples = conditional_samples(&cs.estimate, saa, &model, &mut st).unwrap();
    let pc = PowerConstraint::tpc(n_tx, p).unwrap();
    let init = initial_precoders(Strategy::Rs, &cs.estimate, &layout, &pc, alpha, &mut st).unwrap();
    Instance { samples, layout, pc, init }
}
