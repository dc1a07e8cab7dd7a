//! Command-line front end: reproducible construction and analysis runs
//! driven by JSON configs.
//!
//! Exit codes: 0 all diagnostics pass, 1 a diagnostic exceeded its
//! tolerance, 2 usage or configuration error.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "heisgraph", about = "Intrinsic-graph calculus runs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a surface and write its grid/fan/mesh files.
    Construct(CommonArgs),
    /// Energy, area, harmonicity and cone diagnostics of a surface.
    Analyze(CommonArgs),
    /// Conservativity diagnostics of a candidate calibration field.
    Calibrate(CommonArgs),
    /// First-variation report for a surface under a contact potential.
    Vary(CommonArgs),
    /// Stretch-limit fits and indicator convergence measurements.
    Limits(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: std::path::PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<String>,
    /// Seed for randomized suites (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Blanket tolerance override for div/jump/slope/flux-energy/stretch-fit.
    #[arg(long)]
    tol: Option<f64>,
    /// Square resolution override (sets nx = nz).
    #[arg(long)]
    resolution: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Construct(a) => ("construct", a),
        Command::Analyze(a) => ("analyze", a),
        Command::Calibrate(a) => ("calibrate", a),
        Command::Vary(a) => ("vary", a),
        Command::Limits(a) => ("limits", a),
    };
    std::process::exit(run(name, args));
}

fn run(name: &str, args: &CommonArgs) -> i32 {
    let raw = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read config {:?}: {e}", args.config);
            return 2;
        }
    };
    let sha = hex_digest(&raw);
    let mut config: RunConfig = match serde_json::from_slice(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return 2;
        }
    };
    if config.command != name {
        eprintln!(
            "error: config command {:?} does not match subcommand {:?}",
            config.command, name
        );
        return 2;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(n) = args.resolution {
        config.resolution = Some(config::Resolution { nx: n, nz: n });
    }
    if let Some(tol) = args.tol {
        config.tolerances.div = tol;
        config.tolerances.jump = tol;
        config.tolerances.slope = tol;
        config.tolerances.flux_energy = tol;
        config.tolerances.stretch_fit = tol;
    }

    let outcome = match name {
        "construct" => commands::cmd_construct(&config, &sha),
        "analyze" => commands::cmd_analyze(&config, &sha),
        "calibrate" => commands::cmd_calibrate(&config, &sha),
        "vary" => commands::cmd_vary(&config, &sha),
        "limits" => commands::cmd_limits(&config, &sha),
        _ => unreachable!(),
    };
    match outcome {
        Ok(o) => {
            println!("{name}: {}", if o.passed { "pass" } else { "DIAGNOSTIC FAILURE" });
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
