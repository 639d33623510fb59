use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semadev::batch::{self, to_json};
use semadev::signal_file::{Generator, SignalFile};
use semadev::{pipeline, AnalysisConfig, AnalysisReport, InputKind, OutputFormat};
use semadev_core::allan::EnsembleMode;
use semadev_core::scaling::{self, DeviationMode};
use semadev_core::synth::{self, SignalKind};

#[derive(Parser)]
#[command(
    name = "semadev",
    version,
    about = "Allan-deviation analysis of sentence-embedding trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a text into one sentence per line.
    Segment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// 1-based inclusive line range, e.g. 120:4800.
        #[arg(long, value_parser = parse_lines)]
        lines: Option<(usize, usize)>,
    },
    /// Analyze one document.
    Analyze(RunArgs),
    /// Analyze every document under a directory and build ensembles.
    Batch(RunArgs),
    /// Compare the fitted exponent against sentence-order shuffles.
    ShuffleTest(RunArgs),
    /// Ensemble-average curves from existing reports.
    Ensemble {
        /// Report files or directories containing them.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "arithmetic")]
        ensemble_mode: EnsembleArg,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Generate a synthetic increment signal.
    Simulate {
        #[arg(value_enum)]
        kind: KindArg,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        /// fGn amplitude of the crossover signal.
        #[arg(long, default_value_t = 0.15)]
        amplitude: f64,
        /// Constant increment of the ramp.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<KindOfInput>,
    /// Precomputed embeddings for a text input.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, env = "SEMADEV_EMBED_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long, env = "SEMADEV_EMBED_TOKEN", hide_env_values = true)]
    bearer_token: Option<String>,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, value_parser = parse_lines)]
    lines: Option<(usize, usize)>,
    #[arg(long, default_value_t = 20)]
    points_per_decade: usize,
    #[arg(long, default_value_t = scaling::DEFAULT_FIT_FRACTION)]
    fit_fraction: f64,
    #[arg(long, default_value_t = scaling::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "relative")]
    deviation: DeviationArg,
    #[arg(long, default_value_t = scaling::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = scaling::DEFAULT_PERSISTENCE)]
    persistence: usize,
    /// Divide the horizon by this value (e.g. mean sentences per paragraph).
    #[arg(long)]
    normalize_by: Option<f64>,
    #[arg(long)]
    shuffles: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "arithmetic")]
    ensemble_mode: EnsembleArg,
    /// Worker threads for batch runs; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindOfInput {
    Text,
    Sentences,
    Jsonl,
    Binary,
    Signal,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeviationArg {
    Relative,
    Absolute,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Arithmetic,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    White,
    Ramp,
    Fgn,
    Crossover,
}

impl From<EnsembleArg> for EnsembleMode {
    fn from(a: EnsembleArg) -> Self {
        match a {
            EnsembleArg::Arithmetic => EnsembleMode::Arithmetic,
            EnsembleArg::Geometric => EnsembleMode::Geometric,
        }
    }
}

impl From<FormatArg> for OutputFormat {
    fn from(a: FormatArg) -> Self {
        match a {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

fn parse_lines(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    Ok((a, b))
}

impl RunArgs {
    fn config(self, default_shuffles: usize) -> AnalysisConfig {
        AnalysisConfig {
            inputs: self.inputs,
            input_kind: self.kind.map(|k| match k {
                KindOfInput::Text => InputKind::Text,
                KindOfInput::Sentences => InputKind::Sentences,
                KindOfInput::Jsonl => InputKind::Jsonl,
                KindOfInput::Binary => InputKind::Binary,
                KindOfInput::Signal => InputKind::Signal,
            }),
            embeddings: self.embeddings,
            endpoint: self.endpoint,
            bearer_token: self.bearer_token,
            batch_size: self.batch_size,
            lines: self.lines,
            points_per_decade: self.points_per_decade,
            fit_fraction: self.fit_fraction,
            threshold: self.threshold,
            deviation: match self.deviation {
                DeviationArg::Relative => DeviationMode::Relative,
                DeviationArg::Absolute => DeviationMode::Absolute,
            },
            window: self.window,
            persistence: self.persistence,
            normalize_by: self.normalize_by,
            n_shuffles: self.shuffles.unwrap_or(default_shuffles),
            seed: self.seed,
            ensemble_mode: self.ensemble_mode.into(),
            workers: self.workers,
            output: self.output,
            format: self.format.into(),
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_text(report: &AnalysisReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.curve.to_csv(),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Segment {
            input,
            output,
            lines,
        } => {
            let seq = pipeline::segment_file(&input, lines)?;
            std::fs::write(&output, seq.to_lines())
                .with_context(|| format!("writing {}", output.display()))?;
            log::info!("{} sentences written to {}", seq.len(), output.display());
        }
        Command::Analyze(args) => {
            let cfg = args.config(0);
            let report = pipeline::analyze(&cfg)?;
            emit(cfg.output.as_deref(), &report_text(&report, cfg.format))?;
        }
        Command::ShuffleTest(args) => {
            let cfg = args.config(10);
            if cfg.n_shuffles == 0 {
                bail!("shuffle-test needs --shuffles of at least 1");
            }
            let report = pipeline::analyze(&cfg)?;
            let text = match cfg.format {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => {
                    let s = report.shuffle.as_ref().expect("shuffles requested");
                    let mut out = String::from("seed,alpha\n");
                    for (seed, a) in s.seeds.iter().zip(&s.shuffled_alphas) {
                        out.push_str(&format!("{seed},{a}\n"));
                    }
                    out
                }
            };
            emit(cfg.output.as_deref(), &text)?;
        }
        Command::Batch(args) => {
            let cfg = args.config(0);
            let outcome = batch::run_batch(&cfg)?;
            match &cfg.output {
                Some(dir) => batch::write_batch(&outcome, dir)?,
                None => emit(None, &to_json(&outcome.summary))?,
            }
            for f in &outcome.failures {
                log::error!("{}: {}", f.source_id, f.error);
            }
            if outcome.is_partial() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Ensemble {
            reports,
            output,
            ensemble_mode,
            format,
        } => {
            let (ensemble, _reference) =
                batch::ensemble_from_reports(&reports, ensemble_mode.into())?;
            let text = match OutputFormat::from(format) {
                OutputFormat::Json => to_json(&ensemble),
                OutputFormat::Csv => ensemble.to_csv(),
            };
            emit(output.as_deref(), &text)?;
        }
        Command::Simulate {
            kind,
            n,
            seed,
            sigma,
            hurst,
            amplitude,
            step,
            output,
        } => {
            let kind = match kind {
                KindArg::White => SignalKind::White { sigma },
                KindArg::Ramp => SignalKind::Ramp { step },
                KindArg::Fgn => SignalKind::Fgn { hurst },
                KindArg::Crossover => SignalKind::Crossover {
                    sigma,
                    amplitude,
                    hurst,
                },
            };
            let inc = synth::simulate(&kind, n, seed)?;
            let file = SignalFile::new(&inc, Some(Generator { kind, n, seed }));
            std::fs::write(&output, file.to_json())
                .with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
