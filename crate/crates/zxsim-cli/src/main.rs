//! `zxsim` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zxsim::circuit::{circuit_stats, parse_circuit, Circuit, CircuitError};
use zxsim::compile::{compile, export_dem, CompileError, CompiledSampler};
use zxsim::encoding::{encode_shots, EncodingError, OutputEncoding};
use zxsim::lower::SampleMode;
use zxsim::sampler::{
    probability_of, sample_detectors, sample_measurements, SampleError, SampleOptions, DEFAULT_BATCH_SIZE,
    DEFAULT_SPARSE_THRESHOLD,
};

#[derive(Parser, Debug)]
#[command(name = "zxsim", version, about = "Noisy circuit sampling by ZX reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample raw measurement records.
    Sample(SampleArgs),
    /// Sample detector bits followed by observable bits.
    DetectorSample(DetectorSampleArgs),
    /// Print the exact probability of one outcome bitstring.
    Prob(ProbArgs),
    /// Compile and print compilation statistics.
    Compile(ModeArgs),
    /// Write the detector error model.
    ExportDem(ExportArgs),
    /// Print circuit statistics.
    Stats(InputArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Circuit file; stdin when absent.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Detectors,
    Measurements,
}

impl From<Mode> for SampleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Detectors => SampleMode::Detectors,
            Mode::Measurements => SampleMode::Measurements,
        }
    }
}

#[derive(Args, Debug)]
struct ModeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "detectors")]
    mode: Mode,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ShotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    /// Worker threads; all available cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "01", value_parser = parse_format)]
    format: OutputEncoding,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Mean flips per shot below which Clifford circuits use gap sampling.
    #[arg(long, default_value_t = DEFAULT_SPARSE_THRESHOLD)]
    sparse_threshold: f64,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    shots: ShotArgs,
}

#[derive(Args, Debug)]
struct DetectorSampleArgs {
    #[command(flatten)]
    shots: ShotArgs,
    /// Write observable bits to this file and only detector bits to the main output.
    #[arg(long, value_name = "FILE")]
    separate_observables: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "measurements")]
    mode: Mode,
    /// Outcome bits in output order, e.g. `010`.
    outcome: String,
    /// Fixed noise assignment over channel parameters instead of marginalizing.
    #[arg(long, value_name = "BITS")]
    noise: Option<String>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("io: {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("parse: {0}")]
    Parse(#[from] CircuitError),
    #[error("compile: {0}")]
    Compile(#[from] CompileError),
    #[error("sample: {0}")]
    Sample(#[from] SampleError),
    #[error("args: {0}")]
    Args(String),
}

fn parse_format(s: &str) -> Result<OutputEncoding, EncodingError> {
    s.parse()
}

fn io_error(path: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn read_circuit(input: &InputArgs) -> Result<Circuit, CliError> {
    let text = match &input.input {
        Some(p) => std::fs::read_to_string(p).map_err(io_error(&p.display().to_string()))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(io_error("<stdin>"))?;
            s
        }
    };
    Ok(parse_circuit(&text)?)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let name = p.display().to_string();
            let mut w = BufWriter::new(File::create(p).map_err(io_error(&name))?);
            w.write_all(bytes).and_then(|()| w.flush()).map_err(io_error(&name))
        }
        None => {
            let mut w = io::stdout().lock();
            w.write_all(bytes)
                .and_then(|()| w.flush())
                .map_err(io_error("<stdout>"))
        }
    }
}

fn parse_bits(s: &str, what: &str) -> Result<Vec<bool>, CliError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::Args(format!(
                "{what} contains `{other}`, expected only 0 and 1"
            ))),
        })
        .collect()
}

/// Drops trailing floating-point noise below 15 significant digits.
fn round_digits(p: f64) -> f64 {
    format!("{p:.14e}").parse().unwrap_or(p)
}

fn options(a: &ShotArgs) -> SampleOptions {
    SampleOptions {
        batch_size: a.batch_size,
        threads: a.threads,
        sparse_threshold: a.sparse_threshold,
        ..SampleOptions::default()
    }
}

fn compiled(input: &InputArgs, mode: SampleMode) -> Result<CompiledSampler, CliError> {
    Ok(compile(&read_circuit(input)?, mode)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(a) => {
            let a = a.shots;
            let cs = compiled(&a.input, SampleMode::Measurements)?;
            let rec = sample_measurements(&cs, a.shots, a.seed, &options(&a))?;
            write_output(a.out.as_deref(), &encode_shots(&rec.bits, a.format))
        }
        Command::DetectorSample(a) => {
            let s = &a.shots;
            let cs = compiled(&s.input, SampleMode::Detectors)?;
            let rec = sample_detectors(&cs, s.shots, s.seed, &options(s))?;
            match &a.separate_observables {
                Some(obs_path) => {
                    let (det, obs) = rec.split_observables();
                    write_output(s.out.as_deref(), &encode_shots(&det, s.format))?;
                    write_output(Some(obs_path), &encode_shots(&obs, s.format))
                }
                None => write_output(s.out.as_deref(), &encode_shots(&rec.bits, s.format)),
            }
        }
        Command::Prob(a) => {
            let cs = compiled(&a.input, a.mode.into())?;
            let outcome = parse_bits(&a.outcome, "outcome")?;
            let noise = a.noise.as_deref().map(|n| parse_bits(n, "noise")).transpose()?;
            let p = probability_of(&cs, &outcome, noise.as_deref())?;
            write_output(None, format!("{}\n", round_digits(p)).as_bytes())
        }
        Command::Compile(a) => {
            let cs = compiled(&a.input, a.mode.into())?;
            write_output(None, cs.stats.to_string().as_bytes())
        }
        Command::ExportDem(a) => {
            let cs = compiled(&a.input, SampleMode::Detectors)?;
            write_output(a.out.as_deref(), export_dem(&cs).as_bytes())
        }
        Command::Stats(a) => {
            let c = read_circuit(&a)?;
            write_output(None, circuit_stats(&c).to_string().as_bytes())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_parse_strictly() {
        assert_eq!(parse_bits("101\n", "outcome").unwrap(), vec![true, false, true]);
        assert!(parse_bits("12", "outcome").is_err());
        assert!(parse_bits("", "outcome").unwrap().is_empty());
    }

    #[test]
    fn rounding_hides_last_bit_noise() {
        assert_eq!(round_digits(0.500_000_000_000_000_1).to_string(), "0.5");
        assert_eq!(round_digits(0.853_553_390_593_273_8), 0.853_553_390_593_274);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn format_flag_accepts_known_encodings() {
        assert_eq!(parse_format("b8").unwrap(), OutputEncoding::B8);
        assert!(parse_format("hex").is_err());
    }
}
