//! Command-line surface: `fit`, `score`, `bench`, `noise` and `ablate`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::builder::build_forest;
use crate::error::{Error, Result};
use crate::eval::{ablation_suite, noise_robustness, repeated_benchmark, ImprovementMode};
use crate::io::{load_csv, load_model, save_model};
use crate::model::{validate_params, RiForestParams, SplitStrategy};
use crate::scoring::score_dataset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "riforest", version, about = "Robust isolation forest anomaly detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a forest and write the model document.
    Fit(CommonArgs),
    /// Score every row of the input with a saved model.
    Score(CommonArgs),
    /// Repeated fit/score runs on labeled data; reports per-run AUROC, mean and CV.
    Bench(CommonArgs),
    /// AUROC as Gaussian noise columns are appended.
    Noise(CommonArgs),
    /// Full model against its four ablations.
    Ablate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Valley,
    Random,
    Blank,
}

impl From<SplitArg> for SplitStrategy {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Valley => SplitStrategy::Valley,
            SplitArg::Random => SplitStrategy::Random,
            SplitArg::Blank => SplitStrategy::Blank,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Model document (written by `fit`, read by `score`).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    /// Comma-separated noise column counts for `noise`.
    #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100])]
    pub noise_counts: Vec<usize>,

    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 256)]
    pub subsample: usize,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5)]
    pub tau: usize,
    #[arg(long, value_enum, default_value_t = SplitArg::Valley)]
    pub split: SplitArg,
    #[arg(long)]
    pub no_random_hyperplanes: bool,
    /// Every split contributes a path increment of 1.
    #[arg(long)]
    pub unit_path_length: bool,
    /// Treat every non-constant candidate as eligible.
    #[arg(long)]
    pub no_entropy_gate: bool,
    /// Do not add c(size) at unresolved leaves.
    #[arg(long)]
    pub no_leaf_adjustment: bool,
    /// Master seed; drawn from entropy (and reported on stderr) when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Fit,
    Score,
    Bench,
    Noise,
    Ablate,
}

/// A fully resolved command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input_path: PathBuf,
    pub model_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub label_column: String,
    pub format: OutputFormat,
    pub params: RiForestParams,
    pub repeats: usize,
    pub noise_counts: Vec<usize>,
}

impl RunConfig {
    /// Resolves parsed arguments; returns the config and whether the seed was drawn.
    pub fn from_cli(cli: Cli) -> (Self, bool) {
        let (command, args) = match cli.command {
            Command::Fit(a) => (CommandKind::Fit, a),
            Command::Score(a) => (CommandKind::Score, a),
            Command::Bench(a) => (CommandKind::Bench, a),
            Command::Noise(a) => (CommandKind::Noise, a),
            Command::Ablate(a) => (CommandKind::Ablate, a),
        };
        let drawn = args.seed.is_none();
        let params = RiForestParams {
            num_trees: args.trees,
            subsample_size: args.subsample,
            num_bins: args.bins,
            entropy_threshold: args.alpha,
            num_random_hyperplanes: args.tau,
            split_strategy: args.split.into(),
            use_random_hyperplanes: !args.no_random_hyperplanes,
            use_path_length: !args.unit_path_length,
            use_entropy_gate: !args.no_entropy_gate,
            leaf_adjustment: !args.no_leaf_adjustment,
            master_seed: args.seed.unwrap_or_else(rand::random),
        };
        let config = RunConfig {
            command,
            input_path: args.input,
            model_path: args.model,
            output_path: args.output,
            label_column: args.label_column,
            format: args.format,
            params,
            repeats: args.repeats,
            noise_counts: args.noise_counts,
        };
        (config, drawn)
    }

    fn validate(&self) -> Result<()> {
        if matches!(self.command, CommandKind::Fit | CommandKind::Score) && self.model_path.is_none()
        {
            return Err(Error::InvalidParam {
                field: "model",
                reason: "--model is required".into(),
            });
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParam {
                field: "repeats",
                reason: "must be at least 1".into(),
            });
        }
        validate_params(self.params.clone()).map(|_| ())
    }
}

/// Exit status for an error: 1 usage, 2 data, 3 internal invariant.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParam { .. } => EXIT_USAGE,
        Error::DimensionMismatch { .. }
        | Error::InvalidDataset(_)
        | Error::EmptyInput
        | Error::SingleClass
        | Error::Unlabeled
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::ParseCell { .. }
        | Error::InvalidLabel { .. }
        | Error::ModelVersion { .. }
        | Error::ModelStructure(_) => EXIT_DATA,
        _ => EXIT_INTERNAL,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes one command and writes its output once at the end.
pub fn run(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let data = load_csv(&config.input_path, &config.label_column)?;
    if matches!(
        config.command,
        CommandKind::Bench | CommandKind::Noise | CommandKind::Ablate
    ) && data.labels().is_none()
    {
        return Err(Error::Unlabeled);
    }
    let params = &config.params;
    let csv = config.format == OutputFormat::Csv;
    let mut out = String::new();
    match config.command {
        CommandKind::Fit => {
            let forest = build_forest(&data, params)?;
            save_model(&forest, config.model_path.as_ref().expect("validated"))?;
            return Ok(());
        }
        CommandKind::Score => {
            let forest = load_model(config.model_path.as_ref().expect("validated"))?;
            let report = score_dataset(&data, &forest)?;
            if csv {
                out.push_str("row_index,score\n");
                for (i, s) in report.scores.iter().enumerate() {
                    writeln!(out, "{i},{s}").unwrap();
                }
            } else {
                let rows: Vec<_> = report
                    .scores
                    .iter()
                    .enumerate()
                    .map(|(i, s)| json!({"row_index": i, "score": s}))
                    .collect();
                out = json!({ "rows": rows }).to_string();
                out.push('\n');
            }
        }
        CommandKind::Bench => {
            let result = repeated_benchmark(&data, params, config.repeats)?;
            eprintln!("wall time: {:.3}s", result.wall_time_seconds);
            if csv {
                out.push_str("run,auroc\n");
                for (i, a) in result.per_run_auroc.iter().enumerate() {
                    writeln!(out, "{i},{a}").unwrap();
                }
                writeln!(out, "mean,{}", result.mean_auroc).unwrap();
                writeln!(out, "cv,{}", fmt_opt(result.cv)).unwrap();
            } else {
                out = json!({
                    "seed": params.master_seed,
                    "per_run_auroc": result.per_run_auroc,
                    "mean_auroc": result.mean_auroc,
                    "cv": result.cv,
                })
                .to_string();
                out.push('\n');
            }
        }
        CommandKind::Noise => {
            let sweep = noise_robustness(&data, params, &config.noise_counts, config.repeats)?;
            if csv {
                out.push_str("noise_count,mean_auroc,cv\n");
                for (k, r) in sweep.noise_counts.iter().zip(&sweep.results) {
                    writeln!(out, "{k},{},{}", r.mean_auroc, fmt_opt(r.cv)).unwrap();
                }
            } else {
                let rows: Vec<_> = sweep
                    .noise_counts
                    .iter()
                    .zip(&sweep.results)
                    .map(|(k, r)| json!({"noise_count": k, "mean_auroc": r.mean_auroc, "cv": r.cv}))
                    .collect();
                out = json!({ "repeats": sweep.repeats, "rows": rows }).to_string();
                out.push('\n');
            }
        }
        CommandKind::Ablate => {
            let report = ablation_suite(&data, params, config.repeats)?;
            let mut rows = Vec::new();
            for (variant, r) in &report.entries {
                let ratio = report.improvement_rate(*variant, ImprovementMode::Ratio)?;
                let diff = report.improvement_rate(*variant, ImprovementMode::Difference)?;
                rows.push((variant.label(), r.mean_auroc, r.cv, ratio, diff));
            }
            if csv {
                out.push_str("variant,mean_auroc,cv,ir_vs_suite_mean,ir_difference_vs_suite_mean\n");
                for (label, mean, cv, ratio, diff) in &rows {
                    writeln!(out, "{label},{mean},{},{ratio},{diff}", fmt_opt(*cv)).unwrap();
                }
            } else {
                let rows: Vec<_> = rows
                    .iter()
                    .map(|(label, mean, cv, ratio, diff)| {
                        json!({
                            "variant": label,
                            "mean_auroc": mean,
                            "cv": cv,
                            "ir_vs_suite_mean": ratio,
                            "ir_difference_vs_suite_mean": diff,
                        })
                    })
                    .collect();
                out = json!({ "suite_mean_auroc": report.suite_mean(), "rows": rows }).to_string();
                out.push('\n');
            }
        }
    }
    write_output(config.output_path.as_deref(), &out)
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (config, drawn) = RunConfig::from_cli(cli);
    if drawn {
        eprintln!("seed: {}", config.params.master_seed);
    }
    match run(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
