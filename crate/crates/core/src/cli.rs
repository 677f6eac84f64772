//! Command-line front end. Each subcommand is one pipeline stage reading
//! and writing the dataset CSV and model file formats.
//!
//! Exit status: 0 on success, 1 on data or validation errors, 2 on usage
//! errors (bad flags, missing input files).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::balance::{BalanceMode, BalanceTargets};
use crate::config::PipelineConfig;
use crate::datagen::{generate, GeneratorSpec};
use crate::dataset::{load_csv_with, write_csv, ClassCounts, CsvOptions, Dataset};
use crate::error::Error;
use crate::eval::{cross_validate, evaluate_on, EvalReport};
use crate::feature_select::greedy_stepwise;
use crate::tree::{grow, parse, render, serialize, LearnerParams, TreeModel};

/// Environment variable consulted for the seed when `--seed` is absent; it
/// takes precedence over the config file.
pub const SEED_ENV: &str = "SOLVENCY_SEED";

#[derive(Debug, Parser)]
#[command(name = "solvency", version, about = "C4.5 solvency classification pipeline")]
pub struct Cli {
    /// Random seed (overrides SOLVENCY_SEED and the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML pipeline configuration; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic labeled dataset.
    Generate(GenerateArgs),
    /// Derive class labels from CAR.
    Label(IoArgs),
    /// Correlation-based feature subset selection.
    SelectFeatures(SelectArgs),
    /// Resample or SMOTE a labeled dataset.
    Balance(BalanceArgs),
    /// Grow and prune a tree, writing the model file.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation report.
    CrossValidate(CrossValidateArgs),
    /// Score a model on a labeled test set.
    Evaluate(EvaluateArgs),
    /// Per-record predictions and class probabilities.
    Predict(PredictArgs),
    /// Indented text rendering of a model.
    RenderTree(RenderArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Defaults to standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Per-class counts: insolvency,weak,moderate,strong.
    #[arg(long, value_parser = parse_counts, default_value = "44,13,16,543")]
    pub counts: ClassCounts,
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 11)]
    pub attributes: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Equal-frequency bins per attribute.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write the input projected onto the selected attributes.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Resample,
    Smote,
}

impl From<ModeArg> for BalanceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Resample => BalanceMode::Resample,
            ModeArg::Smote => BalanceMode::Smote,
        }
    }
}

#[derive(Debug, Args)]
pub struct BalanceFlags {
    /// Bias toward a uniform class distribution (resample).
    #[arg(long)]
    pub bias: Option<f64>,
    /// Output size as a percentage of the input (resample).
    #[arg(long)]
    pub percent: Option<f64>,
    /// Absolute per-class targets (smote).
    #[arg(long, value_parser = parse_counts)]
    pub targets: Option<ClassCounts>,
    /// Nearest neighbors per seed record (smote).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(flatten)]
    pub flags: BalanceFlags,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Args)]
pub struct LearnerFlags {
    /// Pruning confidence factor.
    #[arg(long)]
    pub cf: Option<f64>,
    /// Minimum records on each side of a split.
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub learner: LearnerFlags,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Model file to write; defaults to standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossValidateArgs {
    #[arg(long)]
    pub folds: Option<usize>,
    #[command(flatten)]
    pub learner: LearnerFlags,
    /// Balance each fold's training portion.
    #[arg(long, value_enum)]
    pub balance: Option<ModeArg>,
    #[command(flatten)]
    pub balance_flags: BalanceFlags,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Report file; defaults to standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// key=value summary file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_counts(s: &str) -> Result<ClassCounts, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated counts, got {}", parts.len()));
    }
    let mut out = [0; 4];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not a non-negative integer"))?;
    }
    Ok(out)
}

enum Failure {
    /// Bad invocation; the subcommand's help follows the message.
    Usage { message: String, subcommand: &'static str },
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Context {
    config: PipelineConfig,
    seed: u64,
    subcommand: &'static str,
}

impl Context {
    fn usage(&self, message: impl Into<String>) -> Failure {
        Failure::Usage {
            message: message.into(),
            subcommand: self.subcommand,
        }
    }

    fn existing(&self, flag: Option<&PathBuf>, fallback: Option<&PathBuf>, what: &str) -> CliResult<PathBuf> {
        let path = flag
            .or(fallback)
            .cloned()
            .ok_or_else(|| self.usage(format!("missing --{what}")))?;
        if !path.is_file() {
            return Err(self.usage(format!("{what} file '{}' does not exist", path.display())));
        }
        Ok(path)
    }

    fn input(&self, flag: Option<&PathBuf>) -> CliResult<PathBuf> {
        self.existing(flag, self.config.paths.input.as_ref(), "input")
    }

    fn model(&self, flag: Option<&PathBuf>) -> CliResult<PathBuf> {
        self.existing(flag, self.config.paths.model.as_ref(), "model")
    }

    fn output<'a>(&'a self, flag: Option<&'a PathBuf>) -> Option<&'a PathBuf> {
        flag.or(self.config.paths.output.as_ref())
    }

    fn learner(&self, flags: &LearnerFlags) -> LearnerParams {
        let base = &self.config.learner;
        LearnerParams {
            confidence_factor: flags.cf.unwrap_or(base.confidence_factor),
            min_leaf: flags.min_leaf.unwrap_or(base.min_leaf),
            max_depth: flags.max_depth.or(base.max_depth),
        }
    }

    fn balance(&self, mode: Option<ModeArg>, flags: &BalanceFlags) -> CliResult<Option<BalanceTargets>> {
        let base = self.config.balance.clone();
        let Some(mode) = mode.map(BalanceMode::from).or(base.as_ref().map(|b| b.mode)) else {
            return Ok(None);
        };
        let mut t = base.filter(|b| b.mode == mode).unwrap_or(BalanceTargets {
            mode,
            ..BalanceTargets::default()
        });
        t.seed = self.seed;
        if let Some(b) = flags.bias {
            t.bias_to_uniform = b;
        }
        if let Some(p) = flags.percent {
            t.sample_size_percent = p;
        }
        if let Some(c) = flags.targets {
            t.target_counts = c;
        }
        if let Some(k) = flags.k {
            t.k_neighbors = k;
        }
        if mode == BalanceMode::Smote && t.target_counts.iter().all(|&c| c == 0) {
            return Err(self.usage("smote needs --targets a,b,c,d"));
        }
        Ok(Some(t))
    }
}

fn read_dataset(path: &Path, opts: CsvOptions) -> CliResult<Dataset> {
    Ok(load_csv_with(BufReader::new(File::open(path)?), opts)?)
}

const PERMISSIVE: CsvOptions = CsvOptions {
    expect_labels: true,
    allow_duplicates: true,
};

fn read_model(path: &Path) -> CliResult<TreeModel> {
    Ok(parse(&std::fs::read_to_string(path)?)?)
}

fn emit(path: Option<&PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn emit_dataset(path: Option<&PathBuf>, ds: &Dataset, stdout: &mut dyn Write) -> CliResult<()> {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf)?;
    emit(path, &buf, stdout)
}

fn emit_report(report: &EvalReport, output: Option<&PathBuf>, summary: Option<&PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    for w in &report.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    emit(output, report.render_table().as_bytes(), stdout)?;
    if let Some(s) = summary {
        std::fs::write(s, report.render_summary())?;
    }
    Ok(())
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Generate(_) => "generate",
        Command::Label(_) => "label",
        Command::SelectFeatures(_) => "select-features",
        Command::Balance(_) => "balance",
        Command::Train(_) => "train",
        Command::CrossValidate(_) => "cross-validate",
        Command::Evaluate(_) => "evaluate",
        Command::Predict(_) => "predict",
        Command::RenderTree(_) => "render-tree",
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let subcommand = subcommand_name(&cli.command);
    let config = match &cli.config {
        Some(p) if !p.is_file() => {
            return Err(Failure::Usage {
                message: format!("config file '{}' does not exist", p.display()),
                subcommand,
            })
        }
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let env_seed = std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok());
    let seed = cli.seed.or(env_seed).unwrap_or(config.seed);
    let ctx = Context { config, seed, subcommand };

    match &cli.command {
        Command::Generate(a) => {
            let ds = generate(&GeneratorSpec {
                class_counts: a.counts,
                separation: a.separation,
                n_attributes: a.attributes,
                seed,
            })?;
            emit_dataset(ctx.output(a.output.as_ref()), &ds, stdout)
        }
        Command::Label(a) => {
            let input = ctx.input(a.input.as_ref())?;
            let mut ds = read_dataset(&input, CsvOptions { expect_labels: false, allow_duplicates: false })?;
            ds.relabel_from_car()?;
            emit_dataset(ctx.output(a.output.as_ref()), &ds, stdout)
        }
        Command::SelectFeatures(a) => {
            let input = ctx.input(a.input.as_ref())?;
            let ds = read_dataset(&input, PERMISSIVE)?;
            let bins = a.bins.unwrap_or(ctx.config.feature_bins);
            let subset = greedy_stepwise(&ds, bins)?;
            writeln!(stdout, "{}", subset.selected.join(","))?;
            writeln!(stdout, "merit={:.6}", subset.merit)?;
            if let Some(out) = a.output.as_ref() {
                emit_dataset(Some(out), &ds.project(&subset.selected)?, stdout)?;
            }
            Ok(())
        }
        Command::Balance(a) => {
            let input = ctx.input(a.io.input.as_ref())?;
            let targets = ctx
                .balance(a.mode, &a.flags)?
                .ok_or_else(|| ctx.usage("missing --mode resample|smote"))?;
            let ds = read_dataset(&input, PERMISSIVE)?;
            let out = targets.apply(&ds)?;
            emit_dataset(ctx.output(a.io.output.as_ref()), &out, stdout)
        }
        Command::Train(a) => {
            let input = ctx.input(a.input.as_ref())?;
            let ds = read_dataset(&input, PERMISSIVE)?;
            let model = grow(&ds, &ctx.learner(&a.learner))?;
            let path = a.output.as_ref().or(ctx.config.paths.model.as_ref());
            emit(path, serialize(&model).as_bytes(), stdout)
        }
        Command::CrossValidate(a) => {
            let input = ctx.input(a.input.as_ref())?;
            let ds = read_dataset(&input, PERMISSIVE)?;
            let folds = a.folds.unwrap_or(ctx.config.folds);
            let balance = ctx.balance(a.balance, &a.balance_flags)?;
            let report = cross_validate(&ds, folds, &ctx.learner(&a.learner), balance.as_ref(), seed)?;
            let summary = a.summary.as_ref().or(ctx.config.paths.summary.as_ref());
            emit_report(&report, ctx.output(a.output.as_ref()), summary, stdout, stderr)
        }
        Command::Evaluate(a) => {
            let model = read_model(&ctx.model(a.model.as_ref())?)?;
            let input = ctx.input(a.input.as_ref())?;
            let ds = read_dataset(&input, PERMISSIVE)?;
            let report = evaluate_on(&model, &ds)?;
            let summary = a.summary.as_ref().or(ctx.config.paths.summary.as_ref());
            emit_report(&report, ctx.output(a.output.as_ref()), summary, stdout, stderr)
        }
        Command::Predict(a) => {
            let model = read_model(&ctx.model(a.model.as_ref())?)?;
            let input = ctx.input(a.input.as_ref())?;
            let ds = read_dataset(&input, CsvOptions { expect_labels: false, allow_duplicates: true })?;
            let mut out = String::new();
            for (r, (class, p)) in ds.records().iter().zip(model.predict_dataset(&ds)?) {
                out.push_str(&format!(
                    "{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                    r.company_id.as_deref().unwrap_or(""),
                    r.year.map(|y| y.to_string()).unwrap_or_default(),
                    class,
                    p[0],
                    p[1],
                    p[2],
                    p[3]
                ));
            }
            emit(ctx.output(a.output.as_ref()), out.as_bytes(), stdout)
        }
        Command::RenderTree(a) => {
            let model = read_model(&ctx.model(a.model.as_ref())?)?;
            emit(ctx.output(a.output.as_ref()), render(&model).as_bytes(), stdout)
        }
    }
}

/// Parses `argv` (including the program name) and runs one subcommand,
/// returning the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage { message, subcommand }) => {
            let _ = writeln!(stderr, "error: {message}\n");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(subcommand) {
                let _ = write!(stderr, "{}", sub.render_help());
            }
            2
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_flag() {
        assert_eq!(parse_counts("44,13,16,543").unwrap(), [44, 13, 16, 543]);
        assert!(parse_counts("1,2,3").is_err());
        assert!(parse_counts("1,2,3,-4").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
