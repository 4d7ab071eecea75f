use std::path::PathBuf;
use std::process::ExitCode;

use boxtorus_cli::{configure_threads, report_summary, run, ConfigError, Exit, Mode, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boxtorus", version, about = "Time-periodic solutions of semilinear wave equations on a box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file with flat dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-start continuation solve.
    Solve(Common),
    /// Sweep the estimates over random ensembles.
    VerifyEstimates {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        /// Sobolev index of the embedding check.
        #[arg(long)]
        s: Option<f64>,
        /// Integrability exponent.
        #[arg(long)]
        p: Option<f64>,
        /// Spectral decay of the ensemble.
        #[arg(long)]
        decay: Option<f64>,
    },
    /// Reduced property suite.
    Selftest(Common),
    /// Summarize a finished run directory.
    Report {
        /// Run directory.
        dir: PathBuf,
    },
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn exit(code: Exit) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return exit(Exit::InvalidConfig);
    }
    let cfg = match cli.command {
        Command::Report { dir } => {
            return match report_summary(&dir) {
                Ok(text) => {
                    print!("{text}");
                    exit(Exit::Success)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    exit(Exit::Failure)
                }
            };
        }
        Command::Solve(common) => load(&common, Mode::Solve),
        Command::Selftest(common) => load(&common, Mode::Selftest),
        Command::VerifyEstimates {
            common,
            samples,
            s,
            p,
            decay,
        } => load(&common, Mode::VerifyEstimates).map(|mut cfg| {
            cfg.verify.samples = samples.unwrap_or(cfg.verify.samples);
            cfg.verify.s = s.unwrap_or(cfg.verify.s);
            cfg.verify.p = p.unwrap_or(cfg.verify.p);
            cfg.verify.decay = decay.or(cfg.verify.decay);
            cfg
        }),
    };
    let cfg = match cfg.and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(Exit::InvalidConfig);
        }
    };
    match run(&cfg) {
        Ok(manifest) => {
            match report_summary(&cfg.out_dir) {
                Ok(text) => print!("{text}"),
                Err(e) => eprintln!("warning: {e:#}"),
            }
            exit(manifest.status.into())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit(Exit::Failure)
        }
    }
}
