use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsmc::harness::presets::{PAPER_ESTIMATES, PAPER_SAA};
use rsmc::harness::{
    dof_report, preset, preset_description, run_scenario, trial_geometry, write_dof_report, write_geometry,
    write_outputs, Scheme, ScenarioConfig, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "rsmc", version, about = "Max-min fair multigroup multicast beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON scenario file and write CSV results.
    Run(RunArgs),
    /// Compare predicted MMF-DoF with slopes fitted at high SNR.
    DofReport(DofArgs),
    /// Print the available presets.
    ListPresets,
}

#[derive(Args)]
struct Source {
    /// Preset name, see `list-presets`.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario file in JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the full estimate and sample counts.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of channel estimates.
    #[arg(long)]
    trials: Option<usize>,
    /// Conditional samples per estimate.
    #[arg(long)]
    saa: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct DofArgs {
    #[command(flatten)]
    source: Source,
    /// Fit the optimized RS and NoRS schemes instead of the constructions.
    #[arg(long)]
    optimized: bool,
    /// Also write `<scenario>_dof.csv` into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

impl Source {
    fn configs(&self) -> AnyResult<Vec<ScenarioConfig>> {
        let mut configs = match (&self.preset, &self.config) {
            (Some(name), _) => preset(name, self.paper_scale)?,
            (None, Some(path)) => {
                let mut c = ScenarioConfig::load(path)?;
                if self.paper_scale {
                    c.num_estimates = PAPER_ESTIMATES;
                    c.saa_samples = PAPER_SAA;
                }
                vec![c]
            }
            (None, None) => unreachable!("clap requires a source"),
        };
        for c in &mut configs {
            if let Some(seed) = self.seed {
                c.master_seed = seed;
            }
            if let Some(t) = self.trials {
                c.num_estimates = t;
            }
            if let Some(s) = self.saa {
                c.saa_samples = s;
            }
            c.validate()?;
        }
        Ok(configs)
    }

    fn pool(&self) -> AnyResult<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            if j == 0 {
                return Err("--jobs must be at least 1".into());
            }
            b = b.num_threads(j);
        }
        Ok(b.build()?)
    }
}

fn run(args: &RunArgs) -> AnyResult<()> {
    let configs = args.source.configs()?;
    let pool = args.source.pool()?;
    for config in &configs {
        let rows = pool.install(|| run_scenario(config))?;
        let failed = rows.iter().filter(|r| r.mmf_bits.is_none()).count();
        let (rows_path, summary_path) = write_outputs(&rows, &args.out, &config.name)?;
        println!("{}: {} rows ({failed} failed)", config.name, rows.len());
        println!("  {}", rows_path.display());
        println!("  {}", summary_path.display());
        if let Some(geometry) = trial_geometry(config, 0)? {
            let path = args.out.join(format!("{}_geometry.csv", config.name));
            let mut buf = Vec::new();
            write_geometry(&geometry, &mut buf)?;
            std::fs::write(&path, buf)?;
            println!("  {}", path.display());
        }
    }
    Ok(())
}

fn write_report(dir: &Path, name: &str, text: &[u8]) -> AnyResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}_dof.csv"));
    std::fs::write(&path, text)?;
    Ok(path)
}

fn dof(args: &DofArgs) -> AnyResult<()> {
    let configs = args.source.configs()?;
    let pool = args.source.pool()?;
    let schemes = if args.optimized {
        [Scheme::Rs, Scheme::NoRs]
    } else {
        [Scheme::DofConstructionRs, Scheme::DofConstructionNoRs]
    };
    for config in &configs {
        let (report, _) = pool.install(|| dof_report(config, &schemes))?;
        let mut buf = Vec::new();
        write_dof_report(&report, &mut buf)?;
        println!("# {}", config.name);
        print!("{}", String::from_utf8(buf.clone())?);
        if let Some(dir) = &args.out {
            eprintln!("wrote {}", write_report(dir, &config.name, &buf)?.display());
        }
    }
    Ok(())
}

fn list_presets() {
    for name in PRESET_NAMES {
        println!("{name:<6} {}", preset_description(name).unwrap_or(""));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::DofReport(a) => dof(a),
        Command::ListPresets => {
            list_presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
