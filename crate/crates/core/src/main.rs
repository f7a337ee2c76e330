use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lamsa::commands::run_command;
use lamsa::config::ConfigFile;
use lamsa::{Error, Executor};

#[derive(Parser)]
#[command(name = "lamsa", version, about = "Contact-latch spring actuator simulation and bifurcation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory from `x0`
    Simulate(CommonArgs),
    /// Latched fixed points over the force sweep
    Equilibria(CommonArgs),
    /// Saddle classification of every fixed point in the sweep
    Classify(CommonArgs),
    /// Continue the moving saddle toward F_L = 0
    Trace(CommonArgs),
    /// Saddle-region raster over (p, F_L)
    RegionMap(CommonArgs),
    /// Slope field of the nominal equation
    Quiver(CommonArgs),
    /// Check whether the saddle-node disappearance sits at the origin
    DesignCheck(CommonArgs),
    /// Trajectory bundle over a grid of initial conditions
    PhasePortrait(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<String>,
    /// printed | derived
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fl_range")]
    fl: Option<f64>,
    /// start:stop:step, inclusive
    #[arg(long, allow_hyphen_values = true)]
    fl_range: Option<String>,
    /// NxM
    #[arg(long)]
    grid: Option<String>,
    /// Run sweeps on one thread
    #[arg(long)]
    sequential: bool,
}

impl Command {
    fn split(self) -> (&'static str, CommonArgs) {
        match self {
            Command::Simulate(a) => ("simulate", a),
            Command::Equilibria(a) => ("equilibria", a),
            Command::Classify(a) => ("classify", a),
            Command::Trace(a) => ("trace", a),
            Command::RegionMap(a) => ("region-map", a),
            Command::Quiver(a) => ("quiver", a),
            Command::DesignCheck(a) => ("design-check", a),
            Command::PhasePortrait(a) => ("phase-portrait", a),
        }
    }
}

fn run(name: &str, args: CommonArgs) -> Result<(), Error> {
    let mut file = ConfigFile::load(&args.config)?;
    if let Some(out) = args.out {
        file.output_dir = out;
    }
    if let Some(variant) = args.variant {
        file.variant = variant;
    }
    if let Some(fl) = args.fl {
        file.fl = Some(fl);
        file.fl_range = None;
    }
    if let Some(range) = args.fl_range {
        file.fl_range = Some(range);
        file.fl = None;
    }
    if let Some(grid) = args.grid {
        file.grid = grid;
    }
    let cfg = file.into_run_config()?;
    let executor = if args.sequential { Executor::Sequential } else { Executor::default() };
    let manifest = run_command(name, &cfg, executor)?;
    println!("{}: wrote {} file(s) to {}", name, manifest.files.len() + 1, cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (name, args) = cli.command.split();
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lamsa {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
