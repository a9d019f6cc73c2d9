use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use symrad::cli::{
    dbm_to_watts, emit_csv, emit_plot_script, load_config, watts_to_dbm, LabeledRegion, RunManifest,
};
use symrad::montecarlo::{run_campaign, sweep, SweepParam};
use symrad::{Error, RateRegion64, ScenarioConfig};

#[derive(Parser)]
#[command(name = "symrad", version, about = "Cell-free symbiotic radio rate-region simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single campaign over the configured rho grid.
    Run(RunArgs),
    /// Run one campaign per value of a scenario parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// tau1, tau2, num_aps, antennas_per_ap, alpha, num_trials or snr_db
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Validate a configuration file and print the resolved scenario.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Convert dBm to watts (or watts to dBm with --reverse).
    Dbm {
        #[arg(allow_negative_numbers = true)]
        value: f64,
        #[arg(long)]
        reverse: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON scenario; defaults apply to absent keys (or to everything if omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "SYMRAD_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Also write a matplotlib script next to the CSV.
    #[arg(long)]
    emit_plot: bool,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { 1 } else { 2 })
}

fn resolve_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, Error> {
    let mut cfg = match path {
        // an unreadable config file is a mistake in the experiment description
        Some(p) => load_config(p).map_err(|e| match e {
            Error::Io { path, reason } => Error::Config { key: path, reason },
            e => e,
        })?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn print_summary(label: &str, region: &RateRegion64) {
    println!("{label}");
    println!("{:>6}  {:>14}  {:>14}  {:>14}  {:>14}", "rho", "primary", "secondary", "primary_pcsi", "secondary_pcsi");
    for (k, rho) in region.rho_grid.iter().enumerate() {
        println!(
            "{:>6.2}  {:>14.6}  {:>14.6e}  {:>14.6}  {:>14.6e}",
            rho,
            region.primary_bound.mean[k],
            region.secondary_bound.mean[k],
            region.primary_perfect.mean[k],
            region.secondary_perfect.mean[k]
        );
    }
}

fn finish(
    cfg: &ScenarioConfig,
    run: &RunArgs,
    regions: &[LabeledRegion<'_>],
    started: Instant,
) -> Result<(), Error> {
    emit_csv(regions, &run.out)?;
    let mut outputs = vec![run.out.clone()];
    if run.emit_plot {
        let script = run.out.with_extension("plot.py");
        emit_plot_script(&run.out, &script)?;
        outputs.push(script);
    }
    let manifest_path = run.out.with_extension("manifest.json");
    outputs.push(manifest_path.clone());
    RunManifest::new(cfg, started.elapsed().as_secs_f64(), outputs).write(&manifest_path)
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(run) => {
            let started = Instant::now();
            let cfg = resolve_config(run.config.as_deref(), run.seed)?;
            let region: RateRegion64 = run_campaign(&cfg, run.workers)?;
            print_summary(&format!("{} trials", region.num_trials), &region);
            finish(&cfg, &run, &[LabeledRegion::single(&region)], started)
        }
        Command::Sweep { run, param, values } => {
            let started = Instant::now();
            let cfg = resolve_config(run.config.as_deref(), run.seed)?;
            let param: SweepParam = param.parse()?;
            let points = sweep::<f64>(&cfg, param, &values, run.workers)?;
            for p in &points {
                print_summary(&format!("{}={}", p.param.name(), p.value), &p.region);
            }
            finish(&cfg, &run, &LabeledRegion::from_sweep(&points), started)
        }
        Command::Check { config } => {
            let cfg = resolve_config(config.as_deref(), None)?;
            println!("ok: {} APs x {} antennas, {} trials, digest {}", cfg.num_aps, cfg.antennas_per_ap, cfg.num_trials, cfg.digest());
            Ok(())
        }
        Command::Dbm { value, reverse } => {
            if reverse {
                println!("{} dBm", watts_to_dbm(value));
            } else {
                println!("{} W", dbm_to_watts(value));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
