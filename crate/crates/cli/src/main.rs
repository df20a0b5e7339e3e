use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use equiflow_cli::{execute, parse_config, Command, Report};
use equiflow_core::Error;

#[derive(Parser)]
#[command(name = "equiflow", version, about = "Equivariant Landau-Lifshitz flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Evolve the initial data and write the diagnostic series.
    Simulate(Common),
    /// Fit (mu, q) for every profile of a snapshot file.
    Decompose(Common),
    /// Evaluate the m = 2 scale formula on the initial data.
    Predict(Common),
    /// Run a grid of family parameters, one summary row each.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Decompose(a) => (Command::Decompose, a),
        Sub::Predict(a) => (Command::Predict, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    let level = if args.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))
        .and_then(|text| parse_config(&text));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            let report = Report::failed(cmd.name(), &e);
            if let Some(dir) = &args.out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = report.write(dir);
                }
            }
            eprintln!("equiflow: {} [{}]", e, e.code());
            return ExitCode::from(report.exit_code as u8);
        }
    };
    let out = args.out.unwrap_or_else(|| cfg.out_dir.clone());
    let report = execute(cmd, &cfg, &out);
    match &report.error {
        Some(err) => eprintln!("equiflow {}: {} [{}]", cmd.name(), err.message, err.code),
        None if !args.quiet => {
            println!("equiflow {}: ok, wrote {} to {}", cmd.name(), report.files.join(", "), out.display())
        }
        None => {}
    }
    ExitCode::from(report.exit_code as u8)
}
