use super::config::{ChannelKind, CsitSetting, GroupSpec, Scheme, ScenarioConfig};
use crate::error::{invalid, Result};
use crate::model::PowerConstraintKind;
use crate::satcom::Placement;

pub const PRESET_NAMES: [&str; 7] = ["fig1", "fig2", "fig3", "fig5", "fig6", "fig7", "fig8"];

pub const DESK_ESTIMATES: usize = 20;
pub const DESK_SAA: usize = 100;
pub const PAPER_ESTIMATES: usize = 100;
pub const PAPER_SAA: usize = 1000;
pub const DEFAULT_SEED: u64 = 2020;

pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "Rayleigh, N_t=6, G=(1,2,3): underloaded, MMF rate vs SNR",
        "fig2" => "Rayleigh, N_t=4, G=(1,2,3): partially overloaded, MMF rate vs SNR",
        "fig3" => "Rayleigh, N_t=4, G=(2,2,2): fully overloaded, MMF rate vs SNR",
        "fig5" => "satellite, 7 beams, 2 users per beam, PAC: MMF rate vs per-feed power",
        "fig6" => "satellite, 2/4/6 users per beam, 80 W per feed: MMF rate vs alpha",
        "fig7" => "satellite, 2 users per beam, alpha=0.8: PAC vs TPC",
        "fig8" => "satellite hot spot G=[8,1,1,1,1,1,1]: MMF rate vs per-feed power",
        _ => return None,
    })
}

fn snr_grid() -> Vec<f64> {
    (1..=8).map(|i| 5.0 * i as f64).collect()
}

fn feed_grid() -> Vec<f64> {
    (0..7).map(|i| 10.0 + 20.0 * i as f64).collect()
}

fn rayleigh(name: &str, n_tx: usize, sizes: &[usize]) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        channel: ChannelKind::Rayleigh,
        n_tx,
        groups: GroupSpec::Sizes(sizes.to_vec()),
        csit: vec![CsitSetting::Perfect, CsitSetting::Alpha(0.9), CsitSetting::Alpha(0.6)],
        power_constraint: PowerConstraintKind::Tpc,
        powers: snr_grid(),
        schemes: vec![Scheme::Rs, Scheme::NoRs],
        num_estimates: DESK_ESTIMATES,
        saa_samples: DESK_SAA,
        master_seed: DEFAULT_SEED,
        tol: 1e-4,
        max_iter: 200,
    }
}

fn satellite(name: &str, placement: Placement) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        channel: ChannelKind::Satellite,
        n_tx: 7,
        groups: GroupSpec::Beams(placement),
        csit: vec![CsitSetting::Perfect, CsitSetting::Alpha(0.8), CsitSetting::Alpha(0.6)],
        power_constraint: PowerConstraintKind::Pac,
        powers: feed_grid(),
        schemes: vec![Scheme::Rs, Scheme::NoRs, Scheme::FourColor],
        num_estimates: DESK_ESTIMATES,
        saa_samples: DESK_SAA,
        master_seed: DEFAULT_SEED,
        tol: 1e-4,
        max_iter: 200,
    }
}

/// Scenarios behind one figure. Figures with several curves families
/// (users per beam in fig6, power constraints in fig7) yield one scenario
/// per family.
pub fn preset(name: &str, paper_scale: bool) -> Result<Vec<ScenarioConfig>> {
    let mut configs = match name {
        "fig1" => vec![rayleigh("fig1", 6, &[1, 2, 3])],
        "fig2" => vec![rayleigh("fig2", 4, &[1, 2, 3])],
        "fig3" => vec![rayleigh("fig3", 4, &[2, 2, 2])],
        "fig5" => vec![satellite("fig5", Placement::Uniform(2))],
        "fig6" => [2, 4, 6]
            .into_iter()
            .map(|rho| {
                let mut c = satellite(&format!("fig6-rho{rho}"), Placement::Uniform(rho));
                c.csit = vec![
                    CsitSetting::Alpha(0.2),
                    CsitSetting::Alpha(0.4),
                    CsitSetting::Alpha(0.6),
                    CsitSetting::Alpha(0.8),
                    CsitSetting::Perfect,
                ];
                c.powers = vec![80.0];
                c.schemes = vec![Scheme::Rs, Scheme::NoRs];
                c
            })
            .collect(),
        "fig7" => [PowerConstraintKind::Pac, PowerConstraintKind::Tpc]
            .into_iter()
            .map(|kind| {
                let tag = match kind {
                    PowerConstraintKind::Pac => "pac",
                    PowerConstraintKind::Tpc => "tpc",
                };
                let mut c = satellite(&format!("fig7-{tag}"), Placement::Uniform(2));
                c.csit = vec![CsitSetting::Alpha(0.8)];
                c.power_constraint = kind;
                c.schemes = vec![Scheme::Rs, Scheme::NoRs];
                c
            })
            .collect(),
        "fig8" => {
            let mut c = satellite("fig8", Placement::Hotspot(vec![8, 1, 1, 1, 1, 1, 1]));
            c.csit = vec![CsitSetting::Perfect, CsitSetting::Alpha(0.6)];
            vec![c]
        }
        _ => {
            return Err(invalid(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", "))));
        }
    };
    if paper_scale {
        for c in &mut configs {
            c.num_estimates = PAPER_ESTIMATES;
            c.saa_samples = PAPER_SAA;
        }
    }
    Ok(configs)
}
