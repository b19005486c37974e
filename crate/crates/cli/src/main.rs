use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rcdstab::artifacts::MANIFEST;
use rcdstab::config::ExperimentKind;
use rcdstab::{load_config, run_experiment, verify_manifest, Overrides};
use rcdstab_core::exec::{available_workers, with_workers};

#[derive(Parser)]
#[command(
    name = "rcdstab",
    version,
    about = "Stability experiments for randomized coordinate descent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment a config describes and write its artifacts.
    Run(RunArgs),
    /// Check a manifest's digests against the files next to it.
    Verify { manifest: PathBuf },
    /// Run a property-suite config; exits nonzero if any property fails.
    Props(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replicate fan-out (default: available parallelism).
    #[arg(long, env = "RCDSTAB_WORKERS")]
    workers: Option<usize>,
    /// Re-read the written artifacts and check them against the manifest.
    #[arg(long)]
    verify: bool,
}

const EXIT_FAILED_PROPERTY: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn run(args: &RunArgs, props_only: bool) -> Result<ExitCode> {
    let overrides = Overrides {
        seed: args.seed,
        replicates: args.replicates,
        out: args.out.clone(),
    };
    let loaded = load_config(&args.config, &overrides)?;
    if props_only && loaded.config.kind != ExperimentKind::PropertySuite {
        anyhow::bail!("`props` needs a config with kind \"property-suite\"");
    }
    let workers = args.workers.unwrap_or_else(available_workers).max(1);
    let outcome = with_workers(workers, || run_experiment(&loaded))?;
    let manifest_path = outcome.out_dir.join(MANIFEST);
    for a in &outcome.manifest.artifacts {
        println!("{}  {}", a.sha256, outcome.out_dir.join(&a.file).display());
    }
    if args.verify {
        let bad = verify_manifest(&manifest_path)?;
        if !bad.is_empty() {
            anyhow::bail!("digest mismatch: {}", bad.join(", "));
        }
        println!("verified {}", manifest_path.display());
    }
    if !outcome.manifest.passed {
        eprintln!(
            "one or more properties failed; see {}",
            outcome.out_dir.display()
        );
        return Ok(ExitCode::from(EXIT_FAILED_PROPERTY));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Props(args) => run(args, true),
        Command::Verify { manifest } => verify_manifest(manifest).map(|bad| {
            if bad.is_empty() {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                eprintln!("digest mismatch: {}", bad.join(", "));
                ExitCode::from(EXIT_ERROR)
            }
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_ERROR)
    })
}
