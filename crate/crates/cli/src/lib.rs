//! Batch command-line frontend: `preprocess`, `train`, `evaluate`,
//! `forecast`, `compare`, `gradcheck` and `synth`.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use loadcast_core::data::SynthConfig;
use loadcast_core::model::Architecture;

pub use commands::{
    cmd_compare, cmd_evaluate, cmd_forecast, cmd_gradcheck, cmd_preprocess, cmd_synth, cmd_train,
    Expect, GradCheckArgs,
};
pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "loadcast", version, about = "Daily electricity load forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by `train` and `compare`; each flag overrides the
/// config file.
#[derive(Debug, Args)]
pub struct TrainFlags {
    /// Daily demand CSV (`date,demand_mw`).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    width_scale: Option<f64>,
    /// Conv filter counts, e.g. `4,8,16`.
    #[arg(long)]
    filters: Option<String>,
    /// Units per LSTM direction.
    #[arg(long)]
    units: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

impl TrainFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(p) = &self.out_dir {
            cfg.out_dir = Some(p.clone());
        }
        let numbers = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("epochs", self.epochs.map(|v| v.to_string())),
            ("width_scale", self.width_scale.map(|v| v.to_string())),
            ("filters", self.filters.clone()),
            ("units", self.units.map(|v| v.to_string())),
            ("window", self.window.map(|v| v.to_string())),
            ("horizon", self.horizon.map(|v| v.to_string())),
            ("batch_size", self.batch_size.map(|v| v.to_string())),
            ("learning_rate", self.learning_rate.map(|v| v.to_string())),
        ];
        for (key, value) in numbers {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flag implausible values, fill gaps by linear interpolation and write
    /// the cleaned series.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        max_mw: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train one architecture and write `model.dfc`, `history.csv` and the
    /// test-split metrics.
    Train {
        #[command(flatten)]
        flags: TrainFlags,
        /// proposed, lstm, cnn_lstm or cnn_bilstm.
        #[arg(long)]
        arch: Option<Architecture>,
    },
    /// Evaluate a checkpoint on the test split of `--input`.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Fail unless the checkpoint uses this window length.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Recursive multi-day forecast continuing the input series, in MW.
    Forecast {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train and evaluate all four architectures on the same split.
    Compare {
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Finite-difference check of the analytic gradients on a small model.
    Gradcheck {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = loadcast_core::train::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Write a seeded synthetic daily demand series.
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2190)]
        days: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Preprocess {
            input,
            output,
            max_mw,
            config,
        } => {
            let mut cfg = RunConfig::default();
            if let Some(path) = config {
                cfg.load_file(&path)?;
            }
            cfg.input = Some(input);
            if let Some(m) = max_mw {
                cfg.max_mw = m;
            }
            cmd_preprocess(&cfg, &output, out).map(drop)
        }
        Command::Train { flags, arch } => {
            let mut cfg = flags.resolve()?;
            if let Some(a) = arch {
                cfg.arch = a;
            }
            cmd_train(&cfg, out).map(drop)
        }
        Command::Evaluate {
            checkpoint,
            input,
            out_dir,
            window,
            horizon,
        } => cmd_evaluate(&checkpoint, &input, &out_dir, Expect { window, horizon }, out).map(drop),
        Command::Forecast {
            checkpoint,
            input,
            steps,
            output,
        } => cmd_forecast(&checkpoint, &input, steps, &output, out).map(drop),
        Command::Compare { flags } => cmd_compare(&flags.resolve()?, out).map(drop),
        Command::Gradcheck {
            seed,
            tolerance,
            inject_fault,
        } => {
            let args = GradCheckArgs {
                seed,
                tolerance,
                inject_fault,
                ..Default::default()
            };
            cmd_gradcheck(args, out).map(drop)
        }
        Command::Synth { output, days, seed } => {
            let cfg = SynthConfig {
                days,
                seed,
                ..Default::default()
            };
            cmd_synth(&cfg, &output, out)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are reported on `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
