use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monotomo::cli::{cmd_bench, cmd_forward, cmd_precompute, cmd_reconstruct, exit_code, parse_trace, RunConfig};
use monotomo::Error;

#[derive(Parser)]
#[command(name = "monotomo", version, about = "Monotonicity-based imaging of nonlinear anomalies")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise seed; overrides `noise.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem for one boundary trace.
    Forward {
        /// zero, cos:N, sin:N or file:PATH
        #[arg(long, default_value = "cos:1")]
        trace: String,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Build test potentials and their stored responses.
    Precompute,
    /// Simulate readings and reconstruct the anomaly support.
    Reconstruct {
        /// Potential directory (default: OUT/potentials).
        #[arg(long)]
        potentials: Option<PathBuf>,
    },
    /// Time the pipeline stages.
    Bench {
        /// Also run the exhaustive rectangle search.
        #[arg(long)]
        baseline: bool,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    let path = cli.config.ok_or_else(|| Error::Config("--config is required".into()))?;
    let cfg = RunConfig::load(&path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut resolved = cfg.resolve(base)?;
    if let Some(seed) = cli.seed {
        resolved.seed = seed;
    }
    let out = cli.out.or(cfg.output).unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Forward { trace, amplitude } => {
            let r = cmd_forward(&resolved, &parse_trace(&trace)?, amplitude, &out)?;
            log::info!("{} Newton iterations, field written to {}", r.iterations, r.field_csv.display());
            println!("energy {:.12e}", r.energy);
        }
        Command::Precompute => {
            let r = cmd_precompute(&resolved, &out.join("potentials"))?;
            let empty = r.stats.iter().filter(|s| s.potentials == 0).count();
            println!("potentials {} ({} test anomalies without any) in {}", r.potentials, empty, r.dir.display());
        }
        Command::Reconstruct { potentials } => {
            let dir = potentials.unwrap_or_else(|| out.join("potentials"));
            let r = cmd_reconstruct(&resolved, &dir, &out)?;
            println!("kept {} of {} test anomalies ({} potentials)", r.kept, r.result.cells.len(), r.result.potential_count);
        }
        Command::Bench { baseline } => {
            print!("{}", cmd_bench(&resolved, baseline)?.text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
