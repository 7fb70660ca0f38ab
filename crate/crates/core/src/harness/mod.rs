//! Experiment orchestration: scenario configs and figure presets, the
//! Monte-Carlo loop over channel estimates, CSV output and the DoF report.

pub mod config;
pub mod dof_report;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{ChannelKind, CsitSetting, GroupSpec, Scheme, ScenarioConfig};
pub use dof_report::{dof_report, fitted_slope, slope_window, write_dof_report, DofReportRow};
pub use output::{summarize, write_geometry, write_outputs, write_rows, write_summary, SummaryRow};
pub use presets::{preset, preset_description, PRESET_NAMES};
pub use run::{construction_mmf, run_scenario, trial_geometry, ResultRow};
