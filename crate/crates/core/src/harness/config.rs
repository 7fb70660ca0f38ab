use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csit::CsitModel;
use crate::error::{invalid, Result};
use crate::model::{GroupLayout, PowerConstraint, PowerConstraintKind, Strategy};
use crate::numerics::db_to_linear;
use crate::satcom::{Placement, SatelliteParams, NUM_BEAMS};
use crate::wmmse::AoOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Rayleigh,
    Satellite,
}

/// Groups of a Rayleigh scenario, or users per beam of a satellite one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    Sizes(Vec<usize>),
    Beams(Placement),
}

impl GroupSpec {
    /// Group sizes in beam or input order.
    pub fn sizes(&self) -> Result<Vec<usize>> {
        match self {
            GroupSpec::Sizes(s) => Ok(s.clone()),
            GroupSpec::Beams(p) => p.per_beam(),
        }
    }

    pub fn layout(&self) -> Result<GroupLayout> {
        GroupLayout::from_sizes(&self.sizes()?)
    }
}

/// `perfect` or a CSIT scaling exponent `α`. Serialised as the string
/// `"perfect"` or a bare number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CsitRepr", into = "CsitRepr")]
pub enum CsitSetting {
    Perfect,
    Alpha(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CsitRepr {
    Alpha(f64),
    Name(String),
}

impl TryFrom<CsitRepr> for CsitSetting {
    type Error = String;
    fn try_from(r: CsitRepr) -> std::result::Result<Self, String> {
        match r {
            CsitRepr::Alpha(a) => Ok(CsitSetting::Alpha(a)),
            CsitRepr::Name(s) if s == "perfect" => Ok(CsitSetting::Perfect),
            CsitRepr::Name(s) => Err(format!("unknown CSIT setting {s:?}")),
        }
    }
}

impl From<CsitSetting> for CsitRepr {
    fn from(c: CsitSetting) -> Self {
        match c {
            CsitSetting::Perfect => CsitRepr::Name("perfect".into()),
            CsitSetting::Alpha(a) => CsitRepr::Alpha(a),
        }
    }
}

impl fmt::Display for CsitSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsitSetting::Perfect => f.write_str("perfect"),
            CsitSetting::Alpha(a) => write!(f, "{a}"),
        }
    }
}

impl CsitSetting {
    pub fn model(&self, power: f64) -> Result<CsitModel> {
        match *self {
            CsitSetting::Perfect => Ok(CsitModel::perfect()),
            CsitSetting::Alpha(a) => CsitModel::scaling(a, power),
        }
    }

    /// Exponent used by the DoF constructions; perfect CSIT counts as 1.
    pub fn dof_alpha(&self) -> f64 {
        match *self {
            CsitSetting::Perfect => 1.0,
            CsitSetting::Alpha(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "RS")]
    Rs,
    #[serde(rename = "NoRS")]
    NoRs,
    FourColor,
    #[serde(rename = "DofRS")]
    DofConstructionRs,
    #[serde(rename = "DofNoRS")]
    DofConstructionNoRs,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Rs, Scheme::NoRs, Scheme::FourColor, Scheme::DofConstructionRs, Scheme::DofConstructionNoRs];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Rs => "RS",
            Scheme::NoRs => "NoRS",
            Scheme::FourColor => "FourColor",
            Scheme::DofConstructionRs => "DofRS",
            Scheme::DofConstructionNoRs => "DofNoRS",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme> {
        Scheme::ALL.into_iter().find(|x| x.label() == s).ok_or_else(|| invalid(format!("unknown scheme {s:?}")))
    }

    /// Transmission strategy whose DoF the scheme is compared with.
    pub fn strategy(self) -> Option<Strategy> {
        match self {
            Scheme::Rs | Scheme::DofConstructionRs => Some(Strategy::Rs),
            Scheme::NoRs | Scheme::DofConstructionNoRs => Some(Strategy::NoRs),
            Scheme::FourColor => None,
        }
    }
}

fn default_tol() -> f64 {
    AoOptions::default().tol
}

fn default_max_iter() -> usize {
    AoOptions::default().max_iter
}

/// One experiment: a channel family, a layout, and the grid of CSIT
/// qualities and power points every scheme is run on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub channel: ChannelKind,
    pub n_tx: usize,
    pub groups: GroupSpec,
    pub csit: Vec<CsitSetting>,
    pub power_constraint: PowerConstraintKind,
    /// SNR in dB for Rayleigh, watts per feed for satellite.
    pub powers: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub num_estimates: usize,
    pub saa_samples: usize,
    pub master_seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\', ',']) {
            return Err(invalid(format!("scenario name {:?} is not usable as a file name", self.name)));
        }
        if self.n_tx == 0 {
            return Err(invalid("n_tx must be positive"));
        }
        let layout = self.groups.layout()?;
        match (self.channel, &self.groups) {
            (ChannelKind::Rayleigh, GroupSpec::Sizes(_)) => {}
            (ChannelKind::Satellite, GroupSpec::Beams(_)) => {
                if self.n_tx != NUM_BEAMS || layout.num_groups() != NUM_BEAMS {
                    return Err(invalid(format!("satellite scenarios need one feed per beam (N_t = {NUM_BEAMS})")));
                }
            }
            _ => return Err(invalid("rayleigh needs `sizes` groups, satellite needs `beams`")),
        }
        if self.schemes.is_empty() {
            return Err(invalid("no schemes selected"));
        }
        if self.schemes.iter().collect::<HashSet<_>>().len() != self.schemes.len() {
            return Err(invalid("duplicate scheme"));
        }
        if self.schemes.contains(&Scheme::FourColor) && self.channel != ChannelKind::Satellite {
            return Err(invalid("the 4-colour baseline needs the satellite channel"));
        }
        if self.csit.is_empty() || self.powers.is_empty() {
            return Err(invalid("csit and power grids must be non-empty"));
        }
        for c in &self.csit {
            if let CsitSetting::Alpha(a) = c {
                if !(0.0..=1.0).contains(a) {
                    return Err(invalid(format!("alpha must lie in [0, 1], got {a}")));
                }
            }
        }
        for &p in &self.powers {
            if !p.is_finite() || (self.channel == ChannelKind::Satellite && p <= 0.0) {
                return Err(invalid(format!("bad power point {p}")));
            }
        }
        if self.num_estimates == 0 || self.saa_samples == 0 {
            return Err(invalid("num_estimates and saa_samples must be positive"));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(invalid("solver tolerance and iteration cap must be positive"));
        }
        Ok(())
    }

    /// Total transmit power `P` at a grid point.
    pub fn total_power(&self, point: f64) -> f64 {
        match self.channel {
            ChannelKind::Rayleigh => db_to_linear(point),
            ChannelKind::Satellite => self.n_tx as f64 * point,
        }
    }

    /// Power point in dB, for slope windows.
    pub fn power_db(&self, point: f64) -> f64 {
        10.0 * self.total_power(point).log10()
    }

    pub fn power_constraint_at(&self, point: f64) -> Result<PowerConstraint> {
        PowerConstraint::new(self.power_constraint, self.n_tx, self.total_power(point))
    }

    pub fn ao_options(&self) -> AoOptions {
        AoOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }

    pub fn satellite_params(&self) -> SatelliteParams {
        SatelliteParams::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ScenarioConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ScenarioConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
