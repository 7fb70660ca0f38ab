use std::io::Write;

use super::config::{CsitSetting, Scheme, ScenarioConfig};
use super::output::{sig9, summarize, SummaryRow};
use super::run::{run_scenario, ResultRow};
use crate::dof::{self, Regime};
use crate::error::{invalid, Result};

/// Width of the high-power window the slope is fitted over.
pub const SLOPE_WINDOW_DB: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DofReportRow {
    pub scheme: Scheme,
    pub csit: CsitSetting,
    pub regime: Regime,
    pub predicted: f64,
    pub fitted: f64,
}

impl DofReportRow {
    pub fn deviation(&self) -> f64 {
        (self.fitted - self.predicted).abs()
    }
}

/// Grid points inside the top `SLOPE_WINDOW_DB` of the power grid.
pub fn slope_window(config: &ScenarioConfig) -> Result<Vec<f64>> {
    let dbs: Vec<f64> = config.powers.iter().map(|&p| config.power_db(p)).collect();
    let top = dbs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom = dbs.iter().cloned().fold(f64::INFINITY, f64::min);
    if top - bottom < SLOPE_WINDOW_DB - 1e-9 {
        return Err(invalid(format!("power grid spans {:.1} dB, need {SLOPE_WINDOW_DB} dB", top - bottom)));
    }
    Ok(config
        .powers
        .iter()
        .zip(&dbs)
        .filter(|(_, &db)| db >= top - SLOPE_WINDOW_DB - 1e-9)
        .map(|(&p, _)| p)
        .collect())
}

/// Least-squares slope of the ergodic MMF rate against `log2 P` for one
/// (scheme, CSIT) series of a summary.
pub fn fitted_slope(config: &ScenarioConfig, summary: &[SummaryRow], scheme: Scheme, csit: CsitSetting) -> Result<f64> {
    let alpha = csit.to_string();
    let points: Vec<(f64, f64)> = summary
        .iter()
        .filter(|s| s.scheme == scheme.label() && s.alpha == alpha)
        .map(|s| (config.total_power(s.power), s.mean))
        .collect();
    dof::estimate_dof_slope(&points)
}

/// Predicted MMF-DoF against the slope fitted over the top of the power
/// grid, for each `schemes` entry and CSIT level of `config`.
///
/// Returns the rows run for the fit along with the report.
pub fn dof_report(config: &ScenarioConfig, schemes: &[Scheme]) -> Result<(Vec<DofReportRow>, Vec<ResultRow>)> {
    config.validate()?;
    let schemes: Vec<Scheme> = schemes.iter().copied().filter(|s| s.strategy().is_some()).collect();
    if schemes.is_empty() {
        return Err(invalid("no scheme with a DoF prediction selected"));
    }
    let reduced = ScenarioConfig { powers: slope_window(config)?, schemes: schemes.clone(), ..config.clone() };
    let rows = run_scenario(&reduced)?;
    let summary = summarize(&rows);
    let layout = config.groups.layout()?;
    let mut report = Vec::new();
    for &scheme in &schemes {
        for &csit in &config.csit {
            let strategy = scheme.strategy().expect("filtered above");
            let p = dof::predict(strategy, &layout, config.n_tx, csit.dof_alpha())?;
            report.push(DofReportRow {
                scheme,
                csit,
                regime: p.regime,
                predicted: p.value,
                fitted: fitted_slope(&reduced, &summary, scheme, csit)?,
            });
        }
    }
    Ok((report, rows))
}

pub fn write_dof_report(report: &[DofReportRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "scheme,alpha,regime,predicted_dof,fitted_slope,deviation")?;
    for r in report {
        writeln!(
            out,
            "{},{},{:?},{},{},{}",
            r.scheme.label(),
            r.csit,
            r.regime,
            sig9(r.predicted),
            sig9(r.fitted),
            sig9(r.deviation())
        )?;
    }
    Ok(())
}
