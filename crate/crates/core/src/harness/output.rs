use std::io::Write;
use std::path::{Path, PathBuf};

use super::run::ResultRow;
use crate::error::Result;
use crate::satcom::BeamGeometry;

pub const ROW_HEADER: &str = "scenario,scheme,power,alpha,trial,mmf_bits,iters,status,seed_path,wall_ms";
pub const SUMMARY_HEADER: &str = "scenario,scheme,power,alpha,n_ok,n_failed,mean_mmf_bits,std_err";
pub const GEOMETRY_HEADER: &str = "kind,index,beam,x_deg,y_deg";

/// `x` rounded to 9 significant digits, printed without an exponent.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_rows(rows: &[ResultRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{ROW_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            field(&r.scenario),
            field(&r.scheme),
            sig9(r.power),
            field(&r.alpha),
            r.trial,
            r.mmf_bits.map(sig9).unwrap_or_default(),
            r.iters,
            field(&r.status),
            field(&r.seed_path),
            sig9(r.wall_ms),
        )?;
    }
    Ok(())
}

/// Ergodic MMF rate at one (scheme, power, CSIT) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub scheme: String,
    pub power: f64,
    pub alpha: String,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Mean over successful trials.
    pub mean: f64,
    /// Sample standard deviation over `√n_ok`; NaN below two trials.
    pub std_err: f64,
}

/// Means and standard errors over trials, in first-appearance order of the
/// (scheme, power, CSIT) points.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String, u64, String)> = Vec::new();
    let mut groups: Vec<Vec<&ResultRow>> = Vec::new();
    for r in rows {
        let key = (r.scenario.clone(), r.scheme.clone(), r.power.to_bits(), r.alpha.clone());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let ok: Vec<f64> = g.iter().filter_map(|r| r.mmf_bits).collect();
            let n = ok.len();
            let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std_err = if n > 1 {
                let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                f64::NAN
            };
            SummaryRow {
                scenario: g[0].scenario.clone(),
                scheme: g[0].scheme.clone(),
                power: g[0].power,
                alpha: g[0].alpha.clone(),
                n_ok: n,
                n_failed: g.len() - n,
                mean,
                std_err,
            }
        })
        .collect()
}

pub fn write_summary(summary: &[SummaryRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            field(&s.scenario),
            field(&s.scheme),
            sig9(s.power),
            field(&s.alpha),
            s.n_ok,
            s.n_failed,
            sig9(s.mean),
            sig9(s.std_err),
        )?;
    }
    Ok(())
}

/// Write `<dir>/<scenario>.csv` and `<dir>/<scenario>_summary.csv`.
pub fn write_outputs(rows: &[ResultRow], dir: &Path, scenario: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let rows_path = dir.join(format!("{scenario}.csv"));
    let summary_path = dir.join(format!("{scenario}_summary.csv"));
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    std::fs::write(&rows_path, buf)?;
    let mut buf = Vec::new();
    write_summary(&summarize(rows), &mut buf)?;
    std::fs::write(&summary_path, buf)?;
    Ok((rows_path, summary_path))
}

/// Beam centres and users as angular coordinates seen from the satellite,
/// `kind` being `beam` or `user`.
pub fn write_geometry(geometry: &BeamGeometry, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{GEOMETRY_HEADER}")?;
    let deg = |c: [f64; 2]| (c[0].atan().to_degrees(), c[1].atan().to_degrees());
    for (i, &c) in geometry.beam_centers.iter().enumerate() {
        let (x, y) = deg(c);
        writeln!(out, "beam,{i},{i},{},{}", sig9(x), sig9(y))?;
    }
    for (i, u) in geometry.users.iter().enumerate() {
        let (x, y) = deg(u.coords);
        writeln!(out, "user,{i},{},{},{}", u.beam, sig9(x), sig9(y))?;
    }
    Ok(())
}
