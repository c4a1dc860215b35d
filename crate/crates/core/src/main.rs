use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use taxgame::expcli::{
    preset, run_to_dir, ExpError, ExperimentConfig, OutputFormat, RunOptions, Scale, OUT_DIR_ENV,
    PRESET_NAMES,
};

/// Evolutionary Prisoner's Dilemma on networks with wealth redistribution.
#[derive(Parser)]
#[command(name = "taxgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON config file.
    Run(RunArgs),
    /// Check a JSON config file without running it.
    Validate { config: PathBuf },
    /// List preset names.
    Presets,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name or path to a JSON config.
    target: String,
    /// Size factor relative to the full study; desk size when omitted.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $TAXGAME_OUT_DIR/<name> or results/<name>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Print one line per finished cell to stderr.
    #[arg(long, short)]
    verbose: bool,
}

fn resolve(args: &RunArgs) -> Result<ExperimentConfig, ExpError> {
    let mut cfg = if PRESET_NAMES.contains(&args.target.as_str()) {
        preset(&args.target, args.scale.map_or(Scale::Desk, Scale::Factor))?
    } else if Path::new(&args.target).is_file() {
        if args.scale.is_some() {
            return Err(ExpError::Validation {
                field: "scale".into(),
                message: "only applies to presets".into(),
            });
        }
        ExperimentConfig::load(Path::new(&args.target))?
    } else {
        return Err(ExpError::UnknownPreset(args.target.clone()));
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    if let Some(z) = args.population {
        cfg.population = z;
    }
    if let Some(r) = args.replicates {
        cfg.replicates_per_cell = r;
    }
    if let Some(k) = args.instances {
        cfg.network_instances = k;
    }
    if let Some(n) = args.max_iterations {
        cfg.max_iterations = n;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = Some(dir.clone());
    }
    if cfg.output.dir.is_none() {
        let root =
            std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
        cfg.output.dir = Some(root.join(&cfg.name));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), ExpError> {
    match cli.command {
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            println!(
                "{}: {} cells, {} replicates",
                cfg.name,
                cfg.cell_count(),
                cfg.total_replicates()
            );
        }
        Command::Run(args) => {
            let cfg = resolve(&args)?;
            let dir = cfg.output.dir.clone().expect("output dir resolved");
            let opts = RunOptions {
                workers: args.workers,
                checkpoint: None,
                progress: args.verbose,
            };
            let out = run_to_dir(&cfg, &dir, &opts)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
