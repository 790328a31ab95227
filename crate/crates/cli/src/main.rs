//! Command-line front end: corpus statistics, confusion-model construction,
//! denoising-complexity sweeps, corpus corruption, decoding, and evaluation.
//! Every output artifact embeds the resolved configuration that produced it.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

mod commands;
mod embed;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use garble_core::metrics::Average;

#[derive(Parser)]
#[command(
    name = "garble",
    version,
    about = "Measure and exercise the denoisability of text corpora under character noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vocabulary statistics for a corpus.
    Stats(StatsArgs),
    /// Build a confusion model and write it as JSON.
    Noise(NoiseArgs),
    /// Sweep the word error probability over noise levels and word subsets.
    Complexity(ComplexityArgs),
    /// Push a corpus through the noise channel, chunk by chunk.
    Corrupt(CorruptArgs),
    /// Decode a corrupted corpus back into a hypothesis file.
    Denoise(DenoiseArgs),
    /// Score a hypothesis against its references, next to the noisy baseline.
    Evaluate(EvaluateArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Args)]
struct StatsArgs {
    /// Corpus: a directory of .txt files or a JSONL file of {"id","text"}.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the counted vocabulary as JSON for later reuse.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(subcommand)]
    kind: NoiseKind,
}

#[derive(Subcommand)]
enum NoiseKind {
    /// Uniform confusion: diagonal 1-epsilon, rest spread evenly.
    Uniform(NoiseUniformArgs),
    /// Estimate a model from aligned (gt, ocr) line pairs.
    Estimate(NoiseEstimateArgs),
}

#[derive(Args)]
struct NoiseUniformArgs {
    /// Derive the alphabet from this corpus's characters.
    #[arg(long, conflicts_with = "alphabet", required_unless_present = "alphabet")]
    corpus: Option<PathBuf>,
    /// Explicit alphabet, e.g. --alphabet abc.
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long, default_value_t = 0.07)]
    epsilon: f64,
    /// Model JSON destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseEstimateArgs {
    /// JSONL file of {"gt", "ocr"} aligned line pairs.
    #[arg(long)]
    pairs: PathBuf,
    /// Additive smoothing for substitution counts.
    #[arg(long, default_value_t = 0.1)]
    smoothing: f64,
    /// Model JSON destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Confusion model JSON; default is uniform noise over the corpus alphabet.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Epsilon for the default uniform model.
    #[arg(long, default_value_t = 0.07)]
    epsilon: f64,
    /// Noise level grid, "start:end:step" or a single value.
    #[arg(long, default_value = "0.1:1.0:0.1")]
    gammas: String,
    /// Comma-separated word subsets (all, numeric, alpha); empty ones are
    /// skipped with a warning.
    #[arg(long, default_value = "all,numeric,alpha")]
    subsets: String,
    /// Monte Carlo draws per (subset, noise level) cell.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Master seed; omitted, a seed is generated and recorded.
    #[arg(long)]
    seed: Option<u64>,
    /// Work shards; partitioning never changes the numbers.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report destination; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Additionally write a line chart next to --out.
    #[arg(long)]
    svg: bool,
    /// Corpus label in the report; defaults to the corpus file stem.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Substitution,
    Full,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Substitution => "substitution",
            Mode::Full => "full",
        })
    }
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Confusion model JSON; default is uniform noise over the corpus alphabet.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Epsilon for the default uniform model.
    #[arg(long, default_value_t = 0.07)]
    epsilon: f64,
    /// Noise level the model is interpolated to before corrupting.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Mode::Substitution)]
    mode: Mode,
    /// Chunk size limit in characters.
    #[arg(long, default_value_t = 128)]
    max_chars: usize,
    /// Master seed; omitted, a seed is generated and recorded.
    #[arg(long)]
    seed: Option<u64>,
    /// Corruption JSONL destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Decoder {
    Unigram,
    Beam,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Unigram => "unigram",
            Decoder::Beam => "beam",
        })
    }
}

#[derive(Args)]
struct DenoiseArgs {
    /// Corruption JSONL produced by `garble corrupt`.
    #[arg(long)]
    input: PathBuf,
    /// Clean training corpus for the vocabulary (and bigrams in beam mode).
    #[arg(long, required_unless_present = "vocab", conflicts_with = "vocab")]
    train: Option<PathBuf>,
    /// Pre-counted vocabulary JSON (unigram mode only).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Confusion model JSON; default is uniform noise over the vocabulary alphabet.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Epsilon for the default uniform model.
    #[arg(long, default_value_t = 0.07)]
    epsilon: f64,
    /// Noise level the model is interpolated to before decoding.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Decoder::Unigram)]
    mode: Decoder,
    #[arg(long, default_value_t = 8)]
    beam_width: usize,
    /// Bigram weight in the interpolated conditional prior, strictly in (0,1).
    #[arg(long, default_value_t = 0.7)]
    backoff: f64,
    /// Hypothesis JSONL destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Hypothesis JSONL produced by `garble denoise`.
    #[arg(long)]
    hyp: PathBuf,
    /// Corruption JSONL produced by `garble corrupt`.
    #[arg(long)]
    corruption: PathBuf,
    /// micro: pooled ops over pooled tokens; macro: mean per-document rate.
    #[arg(long, default_value = "micro")]
    average: Average,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report destination; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corpus label in the report; defaults to the corruption file stem.
    #[arg(long)]
    label: Option<String>,
    /// System label; defaults to the decoder recorded in the hypothesis file.
    #[arg(long)]
    system: Option<String>,
}

/// Usage problems exit 1; data and validation problems exit 2.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<garble_core::Error> for CliError {
    fn from(e: garble_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.command {
        Command::Stats(args) => commands::stats(args),
        Command::Noise(args) => commands::noise(args),
        Command::Complexity(args) => commands::complexity(args),
        Command::Corrupt(args) => commands::corrupt(args),
        Command::Denoise(args) => commands::denoise(args),
        Command::Evaluate(args) => commands::evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
