use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ChannelKind, GroupSpec, Scheme, ScenarioConfig};
use crate::csit::{conditional_samples, sample_rayleigh, split_estimate, ConditionalSampleSet};
use crate::dof;
use crate::error::{invalid, Result};
use crate::model::{GroupLayout, PowerConstraint, Strategy};
use crate::numerics::{nats_to_bits, ComplexMatrix, RandomStream};
use crate::satcom::{build_satellite_channel, four_color_rates, place_users, BeamGeometry, FOUR_COLORS};
use crate::wmmse::{average_rates, initial_precoders, optimize_pair, solve_nors, MmfSolution};

/// One (scheme, CSIT, power, trial) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub scheme: String,
    pub power: f64,
    pub alpha: String,
    pub trial: usize,
    /// MMF average rate in bits/s/Hz; `None` when the scheme failed.
    pub mmf_bits: Option<f64>,
    pub iters: usize,
    /// `converged`, `max_iter`, `nors_point` (RS matched by the NoRS
    /// optimum), `ok` for closed-form schemes, or `failed: <reason>`.
    pub status: String,
    pub seed_path: String,
    pub wall_ms: f64,
}

/// Channel draw shared by every scheme, CSIT level and power of a trial.
struct Realization {
    channel: ComplexMatrix,
    layout: GroupLayout,
    geometry: Option<BeamGeometry>,
}

fn trial_stream(config: &ScenarioConfig, trial: usize) -> RandomStream {
    RandomStream::new(config.master_seed, &["trial".into(), trial.into()])
}

fn realize(config: &ScenarioConfig, stream: &RandomStream) -> Result<Realization> {
    match (&config.channel, &config.groups) {
        (ChannelKind::Rayleigh, GroupSpec::Sizes(_)) => {
            let layout = config.groups.layout()?;
            let channel = sample_rayleigh(config.n_tx, layout.num_users(), &mut stream.child("channel"))?;
            Ok(Realization { channel, layout, geometry: None })
        }
        (ChannelKind::Satellite, GroupSpec::Beams(placement)) => {
            let params = config.satellite_params();
            let geometry = place_users(&params, placement, &mut stream.child("geometry"))?;
            let channel = build_satellite_channel(&geometry, &params, &mut stream.child("channel"))?;
            Ok(Realization { channel, layout: geometry.layout()?, geometry: Some(geometry) })
        }
        _ => Err(invalid("channel kind and group spec disagree")),
    }
}

/// User placement of `trial`, for satellite scenarios.
pub fn trial_geometry(config: &ScenarioConfig, trial: usize) -> Result<Option<BeamGeometry>> {
    config.validate()?;
    Ok(realize(config, &trial_stream(config, trial))?.geometry)
}

fn status_of(sol: &MmfSolution) -> &'static str {
    if sol.converged {
        "converged"
    } else {
        "max_iter"
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// MMF average rate (bits) of a DoF construction, with the common rate
/// shared by the construction's own split rule.
pub fn construction_mmf(
    strategy: Strategy,
    samples: &ConditionalSampleSet,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    alpha: f64,
    stream: &mut RandomStream,
) -> Result<f64> {
    let c = dof::construct(strategy, &samples.estimate, layout, pc.total(), alpha, stream)?;
    let mut prec = c.precoders;
    pc.fit(&mut prec)?;
    let rates = average_rates(samples, &prec, layout)?;
    let private = rates.group_private(layout);
    let common = if prec.common.is_some() { rates.common_rate() } else { 0.0 };
    let split = c.split.apply(common, layout.num_groups());
    let mmf = private.iter().zip(&split.portions).map(|(r, c)| r + c).fold(f64::INFINITY, f64::min);
    Ok(nats_to_bits(mmf))
}

struct Task {
    trial: usize,
    csit: usize,
    power: usize,
}

#[derive(Clone)]
struct Outcome {
    mmf: Option<f64>,
    iters: usize,
    status: String,
    wall: Duration,
}

impl Outcome {
    fn failed(e: &crate::error::Error, wall: Duration) -> Self {
        Outcome { mmf: None, iters: 0, status: format!("failed: {e}"), wall }
    }
}

fn run_task(config: &ScenarioConfig, task: &Task) -> Vec<(Scheme, Outcome)> {
    let stream = trial_stream(config, task.trial);
    let csit = config.csit[task.csit];
    let point = config.powers[task.power];
    let start = Instant::now();
    let setup = (|| -> Result<_> {
        let real = realize(config, &stream)?;
        let p = config.total_power(point);
        let model = csit.model(p)?;
        let cs = split_estimate(&real.channel, &model, &mut stream.child("error"))?;
        let samples = if model.is_perfect() {
            ConditionalSampleSet::exact(cs.estimate.clone())
        } else {
            conditional_samples(&cs.estimate, config.saa_samples, &model, &mut stream.child("saa"))?
        };
        Ok((real, samples, config.power_constraint_at(point)?))
    })();
    let (real, samples, pc) = match setup {
        Ok(s) => s,
        Err(e) => {
            let o = Outcome::failed(&e, start.elapsed());
            return config.schemes.iter().map(|&s| (s, o.clone())).collect();
        }
    };
    let alpha = csit.dof_alpha();
    let opts = config.ao_options();
    let init_stream = stream.child("init");

    let mut out = Vec::new();
    let wants = |s: Scheme| config.schemes.contains(&s);
    if wants(Scheme::Rs) {
        let est = &samples.estimate;
        match optimize_pair(est, &samples, &real.layout, &pc, alpha, &init_stream, &opts) {
            Ok(pair) => {
                let status = if pair.rs_from_nors { "nors_point" } else { status_of(&pair.rs) };
                out.push((
                    Scheme::Rs,
                    Outcome { mmf: Some(pair.rs.mmf), iters: pair.rs.iterations, status: status.into(), wall: pair.rs_time },
                ));
                if wants(Scheme::NoRs) {
                    out.push((
                        Scheme::NoRs,
                        Outcome {
                            mmf: Some(pair.nors.mmf),
                            iters: pair.nors.iterations,
                            status: status_of(&pair.nors).into(),
                            wall: pair.nors_time,
                        },
                    ));
                }
            }
            Err(e) => {
                out.push((Scheme::Rs, Outcome::failed(&e, start.elapsed())));
                if wants(Scheme::NoRs) {
                    out.push((Scheme::NoRs, Outcome::failed(&e, start.elapsed())));
                }
            }
        }
    } else if wants(Scheme::NoRs) {
        let t = Instant::now();
        let r = initial_precoders(Strategy::NoRs, &samples.estimate, &real.layout, &pc, alpha, &mut init_stream.child("nors"))
            .and_then(|init| solve_nors(&samples, &real.layout, &pc, &init, &opts));
        out.push((
            Scheme::NoRs,
            match r {
                Ok(s) => Outcome { mmf: Some(s.mmf), iters: s.iterations, status: status_of(&s).into(), wall: t.elapsed() },
                Err(e) => Outcome::failed(&e, t.elapsed()),
            },
        ));
    }
    for (scheme, strategy) in
        [(Scheme::DofConstructionRs, Strategy::Rs), (Scheme::DofConstructionNoRs, Strategy::NoRs)]
    {
        if wants(scheme) {
            let t = Instant::now();
            let mut s = stream.child("construction");
            let r = construction_mmf(strategy, &samples, &real.layout, &pc, alpha, &mut s);
            out.push((
                scheme,
                match r {
                    Ok(v) => Outcome { mmf: Some(v), iters: 0, status: "ok".into(), wall: t.elapsed() },
                    Err(e) => Outcome::failed(&e, t.elapsed()),
                },
            ));
        }
    }
    if wants(Scheme::FourColor) {
        let t = Instant::now();
        let r = real
            .geometry
            .as_ref()
            .ok_or_else(|| invalid("4-colour baseline needs a satellite geometry"))
            .and_then(|g| four_color_rates(&real.channel, g, &FOUR_COLORS, pc.total() / config.n_tx as f64));
        out.push((
            Scheme::FourColor,
            match r {
                Ok(rates) => Outcome {
                    mmf: Some(rates.into_iter().fold(f64::INFINITY, f64::min)),
                    iters: 0,
                    status: "ok".into(),
                    wall: t.elapsed(),
                },
                Err(e) => Outcome::failed(&e, t.elapsed()),
            },
        ));
    }
    out
}

/// Run every scheme on every (trial, CSIT, power) point of `config`.
///
/// Trials draw their channels from `(master_seed, ["trial", t])`, so the
/// rows are reproducible whatever the thread count. Rows come back sorted
/// by scheme, CSIT, power and trial in config order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let tasks: Vec<Task> = (0..config.num_estimates)
        .flat_map(|trial| {
            (0..config.csit.len())
                .flat_map(move |csit| (0..config.powers.len()).map(move |power| Task { trial, csit, power }))
        })
        .collect();
    let results: Vec<(Task, Vec<(Scheme, Outcome)>)> = tasks
        .into_par_iter()
        .map(|task| {
            let r = run_task(config, &task);
            (task, r)
        })
        .collect();

    let mut keyed = Vec::new();
    for (task, outcomes) in results {
        for (scheme, o) in outcomes {
            let order = config.schemes.iter().position(|&s| s == scheme).unwrap_or(usize::MAX);
            let row = ResultRow {
                scenario: config.name.clone(),
                scheme: scheme.label().to_string(),
                power: config.powers[task.power],
                alpha: config.csit[task.csit].to_string(),
                trial: task.trial,
                mmf_bits: o.mmf,
                iters: o.iters,
                status: o.status,
                seed_path: format!("{}:{}", config.master_seed, trial_stream(config, task.trial).path_string()),
                wall_ms: ms(o.wall),
            };
            keyed.push(((order, task.csit, task.power, task.trial), row));
        }
    }
    keyed.sort_by_key(|(k, _)| *k);
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::CsitSetting;
    use crate::model::PowerConstraintKind;

    fn tiny() -> ScenarioConfig {
        ScenarioConfig {
            name: "tiny".into(),
            channel: ChannelKind::Rayleigh,
            n_tx: 3,
            groups: GroupSpec::Sizes(vec![1, 2]),
            csit: vec![CsitSetting::Perfect, CsitSetting::Alpha(0.5)],
            power_constraint: PowerConstraintKind::Tpc,
            powers: vec![10.0, 20.0],
            schemes: vec![Scheme::Rs, Scheme::NoRs, Scheme::DofConstructionRs, Scheme::DofConstructionNoRs],
            num_estimates: 2,
            saa_samples: 10,
            master_seed: 3,
            tol: 1e-4,
            max_iter: 100,
        }
    }

    #[test]
    fn one_row_per_scheme_power_trial() {
        let c = tiny();
        let rows = run_scenario(&c).unwrap();
        assert_eq!(rows.len(), 4 * 2 * 2 * 2);
        assert!(rows.iter().all(|r| r.mmf_bits.map_or(false, |v| v >= 0.0)));
        assert_eq!(rows[0].scheme, "RS");
        assert_eq!(rows[0].seed_path, "3:trial/0");
        let order: Vec<usize> =
            rows.iter().map(|r| c.schemes.iter().position(|s| s.label() == r.scheme).unwrap()).collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rs_rows_dominate_nors_rows() {
        let rows = run_scenario(&tiny()).unwrap();
        let rs: Vec<_> = rows.iter().filter(|r| r.scheme == "RS").collect();
        let nors: Vec<_> = rows.iter().filter(|r| r.scheme == "NoRS").collect();
        for (a, b) in rs.iter().zip(&nors) {
            assert_eq!((a.power, &a.alpha, a.trial), (b.power, &b.alpha, b.trial));
            assert!(a.mmf_bits.unwrap() >= b.mmf_bits.unwrap() - 1e-6);
        }
    }

    #[test]
    fn deterministic_apart_from_timing() {
        let strip = |rows: Vec<ResultRow>| rows.into_iter().map(|r| ResultRow { wall_ms: 0.0, ..r }).collect::<Vec<_>>();
        let a = strip(run_scenario(&tiny()).unwrap());
        let b = strip(run_scenario(&tiny()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn perfect_single_estimate_is_one_optimisation() {
        let mut c = tiny();
        c.csit = vec![CsitSetting::Perfect];
        c.num_estimates = 1;
        c.saa_samples = 1;
        c.powers = vec![10.0];
        c.schemes = vec![Scheme::NoRs];
        let rows = run_scenario(&c).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, "converged");
    }

    #[test]
    fn satellite_rows_include_four_color() {
        let mut c = tiny();
        c.channel = ChannelKind::Satellite;
        c.n_tx = 7;
        c.groups = GroupSpec::Beams(crate::satcom::Placement::Uniform(1));
        c.power_constraint = PowerConstraintKind::Pac;
        c.csit = vec![CsitSetting::Perfect];
        c.powers = vec![40.0];
        c.num_estimates = 1;
        c.schemes = vec![Scheme::FourColor, Scheme::DofConstructionNoRs];
        let rows = run_scenario(&c).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.status == "ok" && r.mmf_bits.unwrap() > 0.0));
    }
}
