use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meissner::harness::{self, ExperimentKind, RunConfig};
use meissner::{linalg, Error};

/// Limiting-field, boundary-layer and model-problem experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; overrides MEISSNER_THREADS. `1` gives bit-reproducible output.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment the configuration names.
    Run(RunArgs),
    /// Gauss, S[1], Calderon and jump-relation residuals.
    Validate(RunArgs),
    /// Limiting exterior, interior or thin-shell solve; writes trace.csv.
    Solve(RunArgs),
    /// beta_lambda norms over a lambda sweep; writes sweep.csv.
    Betalayer(RunArgs),
    /// S' and induced B spectra; writes spectrum.csv and b_spectrum.csv.
    Spectra(RunArgs),
    /// Disk D_lambda rate from the Dirichlet eigenexpansion.
    Disk(RunArgs),
    /// London-sphere convergence towards the limiting solution.
    Sphere(RunArgs),
    /// Sheet-current and pairing convergence as lambda -> 0.
    Convergence(RunArgs),
    /// List bundled presets, or print one.
    Presets { name: Option<String> },
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load(args: &RunArgs) -> Result<RunConfig, Error> {
    let mut c = match (&args.config, &args.preset) {
        (Some(p), _) => RunConfig::from_file(p)?,
        (None, Some(name)) => harness::preset(name)?,
        (None, None) => return Err(Error::Config("--config or --preset is required".into())),
    };
    if let Some(s) = args.seed {
        c.seed = s;
    }
    Ok(c)
}

fn execute(kind: Option<ExperimentKind>, args: RunArgs) -> ExitCode {
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(k) = kind {
        if k != config.kind {
            eprintln!("error: subcommand `{}` but configuration kind `{}`", k.name(), config.kind.name());
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let threads = args.threads.or_else(harness::env_threads).unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    linalg::set_sequential(threads == 1);
    match harness::run(&config, &args.out) {
        Ok(m) => {
            for c in &m.checks {
                println!("{} {} = {:.6e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
            }
            if let Some(e) = &m.error {
                eprintln!("error: {e}");
            }
            println!("manifest: {}", args.out.join("manifest.json").display());
            if m.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK)
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Presets { name: None } => {
            for (n, _) in harness::PRESETS {
                println!("{n}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Presets { name: Some(n) } => {
            return match harness::presets::preset_text(&n) {
                Ok(t) => {
                    print!("{t}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
            };
        }
        Command::Run(a) => (None, a),
        Command::Validate(a) => (Some(ExperimentKind::Validate), a),
        Command::Solve(a) => (Some(ExperimentKind::Solve), a),
        Command::Betalayer(a) => (Some(ExperimentKind::Betalayer), a),
        Command::Spectra(a) => (Some(ExperimentKind::Spectra), a),
        Command::Disk(a) => (Some(ExperimentKind::Disk), a),
        Command::Sphere(a) => (Some(ExperimentKind::Sphere), a),
        Command::Convergence(a) => (Some(ExperimentKind::Convergence), a),
    };
    execute(kind, args)
}
