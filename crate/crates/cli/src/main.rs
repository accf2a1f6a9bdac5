mod commands;
mod scenario;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const PRESET_HELP: &str = "\
Presets:
  fig4       squeezing of each input beam and the EPR sum of each source
  fig5       outer-beam correlations before and after adding the Bell current
  fig7       four-beam sum after the swap
  fig8       three-beam sums (asymmetric second source by default)
  swap       feedforward of the Bell currents onto EPR4
  classical  classical teleportation of EPR2, the baseline for swap

Exit codes: 0 success, 2 configuration error, 3 physicality error.";

#[derive(Debug, Parser)]
#[command(name = "qswap", version, about = "Bright-beam continuous-variable entanglement swapping", after_help = PRESET_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the noise traces of a preset or configuration.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        knobs: Knobs,
        #[command(flatten)]
        output: Output,
    },
    /// Scan one parameter and report the inseparability sum at each point.
    Sweep {
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 61)]
        steps: usize,
        /// Choose the feedforward gain at every point by minimization.
        #[arg(long)]
        optimize_gain: bool,
        #[command(flatten)]
        source: OptionalSource,
        #[command(flatten)]
        knobs: Knobs,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate entanglement criteria.
    Criteria {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        #[arg(long)]
        optimize_gain: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        knobs: Knobs,
        #[command(flatten)]
        output: Output,
    },
    /// Compare analytic trace variances with Monte Carlo estimates.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        knobs: Knobs,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in preset (see below).
    #[arg(long)]
    preset: Option<String>,
    /// Experiment description in JSON.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[group(required = false, multiple = false)]
struct OptionalSource {
    /// Built-in preset; defaults to `swap`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl From<OptionalSource> for Source {
    fn from(s: OptionalSource) -> Self {
        match (s.preset, s.config) {
            (None, None) => Source { preset: Some("swap".into()), config: None },
            (preset, config) => Source { preset, config },
        }
    }
}

/// Physical parameters overriding the preset or configuration.
#[derive(Debug, Clone, Default, Args)]
struct Knobs {
    /// Squeezing below shot noise in dB (positive); without --excess-db the inputs are pure.
    #[arg(long, allow_hyphen_values = true)]
    squeezing_db: Option<f64>,
    /// Anti-squeezed quadrature noise above shot noise in dB.
    #[arg(long, allow_hyphen_values = true)]
    excess_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gain_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gain_y: Option<f64>,
    /// Mode-overlap visibility at the swap splitter.
    #[arg(long)]
    visibility: Option<f64>,
    /// Detector electronic noise relative to each trace's shot noise, in dB.
    #[arg(long, allow_hyphen_values = true)]
    elec_noise_db: Option<f64>,
    /// Absolute level of the two-beam shot noise, in dBm.
    #[arg(long, allow_hyphen_values = true)]
    dbm_anchor: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    oracle: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
struct Output {
    /// Write files into this directory instead of printing to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    /// Squeezing in dB below shot noise.
    Squeezing,
    /// Common feedforward gain.
    Gain,
    Visibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Duan,
    Ppt,
    Vlf,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let physical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<qswap::Error>())
        .any(qswap::Error::is_physicality);
    if physical { 3 } else { 2 }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { source, knobs, output } => commands::run(&source, &knobs, &output),
        Command::Sweep { param, from, to, steps, optimize_gain, source, knobs, output } => {
            sweep::sweep(param, from, to, steps, optimize_gain, &source.into(), &knobs, &output)
        }
        Command::Criteria { which, optimize_gain, format, source, knobs, output } => {
            commands::criteria(which, optimize_gain, format, &source, &knobs, &output)
        }
        Command::Oracle { source, knobs, output } => commands::oracle(&source, &knobs, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
