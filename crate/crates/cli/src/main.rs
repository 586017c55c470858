mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Spike gating flow: event-stream gesture recognition.
#[derive(Debug, Parser)]
#[command(name = "sgf", version)]
pub struct Cli {
    /// Configuration document; defaults apply to every missing key.
    #[arg(long, global = true, env = "SGF_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Overrides `synthetic.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Overrides the similarity operator of the config or model.
    #[arg(long, global = true, value_enum)]
    pub similarity: Option<SimilarityArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimilarityArg {
    Nor,
    Xnor,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum FilterFormat {
    /// One `frame,x,y` line per active output pixel.
    #[default]
    Records,
    /// Plain PGM image of per-pixel activation counts.
    Pgm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CostTarget {
    Sgf,
    Convnet,
    Pat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    A,
    B,
    C,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic event files.
    Generate(GenerateArgs),
    /// Run an ST core over an event file.
    Filter(FilterArgs),
    /// Train a model from a `path,label` manifest in one pass.
    Train(TrainArgs),
    /// Classify one event file.
    Infer(InferArgs),
    /// Accuracy and confusion matrix over a manifest.
    Evaluate(EvaluateArgs),
    /// Parameter, MAC, size and operation tables.
    Cost(CostArgs),
    /// Hex listing of the AER packets of an event file.
    AerDump(AerDumpArgs),
    /// Print the effective configuration.
    Config,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output file for single streams, directory for a suite.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// One suite sample of this class.
    #[arg(long, conflicts_with = "kind")]
    pub class: Option<u8>,
    /// Sample index within the class.
    #[arg(long, default_value_t = 0, requires = "class")]
    pub index: usize,
    /// One raw trajectory (linear-down, circular-cw, oscillate-small-area, ...).
    #[arg(long)]
    pub kind: Option<String>,
    /// Generator frames for `--kind`.
    #[arg(long, requires = "kind")]
    pub frames: Option<usize>,
    /// Noise density per pixel per frame; defaults to `synthetic.noise`.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    pub input: PathBuf,
    /// Use this unit's ST parameters.
    #[arg(long, value_enum, default_value = "a")]
    pub unit: UnitArg,
    /// Explicit `delta_s,theta_s,delta_t,theta_t`.
    #[arg(long, value_name = "DS,TS,DT,TT")]
    pub st: Option<String>,
    #[arg(long, value_enum, default_value = "records")]
    pub format: FilterFormat,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub manifest: PathBuf,
    /// Where to write the trained model.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Knowledge report destination; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Include feature vectors and temporal patterns.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(value_enum)]
    pub target: CostTarget,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AerDumpArgs {
    pub input: PathBuf,
    /// Read a hex listing and write event records.
    #[arg(long)]
    pub reverse: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sgf: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
