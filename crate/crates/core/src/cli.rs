//! Command-line front end. Exit codes: 0 success, 1 input or parameter
//! error, 2 empty result, 3 validation findings.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{naive_rank, ochiai_rank_with, BaselineRanking, CoverageMatrix, Granularity};
use crate::bench::{run_bench, BenchConfig, BenchManifest};
use crate::rank::{analyze, check_weights, AnalysisConfig, DEFAULT_K1, DEFAULT_K2, DEFAULT_MIN_WEIGHT};
use crate::trace::{read_trace_file, validate_trace, FrameworkPrefixes, KeyPolicy, Trace, TraceLabel, DEFAULT_ROOT};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EMPTY: i32 = 2;
pub const EXIT_FINDINGS: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "filo",
    version,
    about = "Localize the fix for a framework-upgrade failure from a baseline and a failure trace"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank application methods by suspiciousness.
    Analyze(AnalyzeArgs),
    /// Application methods of the trace differences in order of occurrence.
    Naive(NaiveArgs),
    /// Ochiai ranking from a coverage matrix CSV.
    Sbfl(SbflArgs),
    /// Run the synthetic benchmark described by a manifest.
    Bench(BenchArgs),
    /// Check a trace file for structural problems.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeyPolicyArg {
    Full,
    #[value(name = "no_return", alias = "no-return")]
    NoReturn,
}

impl From<KeyPolicyArg> for KeyPolicy {
    fn from(k: KeyPolicyArg) -> Self {
        match k {
            KeyPolicyArg::Full => KeyPolicy::Full,
            KeyPolicyArg::NoReturn => KeyPolicy::NoReturn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    Method,
    Statement,
}

#[derive(Debug, Args)]
pub struct TraceInputs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub failure: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrefixArgs {
    /// Comma-separated package prefixes treated as framework code.
    #[arg(long, env = "FILO_FRAMEWORK_PREFIXES")]
    pub framework_prefixes: Option<String>,
}

impl PrefixArgs {
    fn resolve(&self) -> Result<FrameworkPrefixes> {
        match &self.framework_prefixes {
            Some(list) => FrameworkPrefixes::parse_list(list),
            None => Ok(FrameworkPrefixes::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    /// Weight of ImpBlocks; defaults to 1 - k2, or 0.25.
    #[arg(long)]
    pub k1: Option<f64>,
    /// Weight of Depth; defaults to 1 - k1, or 0.75.
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MIN_WEIGHT)]
    pub min_weight: usize,
    #[arg(long, value_enum, default_value = "full")]
    pub key_policy: KeyPolicyArg,
    #[command(flatten)]
    pub prefixes: PrefixArgs,
    /// Fully qualified name of the outermost stack frame.
    #[arg(long, default_value = DEFAULT_ROOT)]
    pub root: String,
}

impl AnalysisArgs {
    pub fn config(&self) -> Result<AnalysisConfig> {
        let (k1, k2) = match (self.k1, self.k2) {
            (None, None) => (DEFAULT_K1, DEFAULT_K2),
            (Some(k1), None) => (k1, 1.0 - k1),
            (None, Some(k2)) => (1.0 - k2, k2),
            (Some(k1), Some(k2)) => (k1, k2),
        };
        check_weights(k1, k2)?;
        if self.min_weight == 0 {
            return Err(Error::Parameter("--min-weight must be at least 1".into()));
        }
        Ok(AnalysisConfig {
            key_policy: self.key_policy.into(),
            min_weight: self.min_weight,
            k1,
            k2,
            framework_prefixes: self.prefixes.resolve()?,
            root_name: self.root.clone(),
        })
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Show only the first N entries.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub inputs: TraceInputs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct NaiveArgs {
    #[command(flatten)]
    pub inputs: TraceInputs,
    #[arg(long, value_enum, default_value = "full")]
    pub key_policy: KeyPolicyArg,
    #[command(flatten)]
    pub prefixes: PrefixArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SbflArgs {
    #[arg(long)]
    pub coverage: PathBuf,
    #[arg(long, value_enum, default_value = "method")]
    pub granularity: GranularityArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Manifest with a `scenarios` list. Without it a standard suite of 40
    /// localizable and 10 missing-callback scenarios runs.
    pub manifest: Option<PathBuf>,
    /// Seed of the standard suite.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the Ochiai arm.
    #[arg(long)]
    pub no_coverage: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Directory receiving per-scenario artifacts and the summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub trace: PathBuf,
    #[command(flatten)]
    pub prefixes: PrefixArgs,
    #[arg(long, default_value = DEFAULT_ROOT)]
    pub root: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Parses `args` (program name first) and runs the command, writing the
/// result to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Analyze(a) => cmd_analyze(&a, stdout, stderr),
        Command::Naive(a) => cmd_naive(&a, stdout, stderr),
        Command::Sbfl(a) => cmd_sbfl(&a, stdout, stderr),
        Command::Bench(a) => cmd_bench(&a, stdout),
        Command::Validate(a) => cmd_validate(&a, stdout),
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { line, reason } => Error::Parse {
            line,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    }
}

fn load(path: &Path, label: TraceLabel, prefixes: &FrameworkPrefixes) -> Result<Trace> {
    read_trace_file(path, label, prefixes).map_err(|e| with_path(path, e))
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| with_path(path, e.into())),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let config = args.analysis.config()?;
    let baseline = load(&args.inputs.baseline, TraceLabel::Baseline, &config.framework_prefixes)?;
    let failure = load(&args.inputs.failure, TraceLabel::Failure, &config.framework_prefixes)?;
    let report = analyze(&baseline, &failure, &config)?;
    if report.is_empty() {
        writeln!(stderr, "no differences detected")?;
        return Ok(EXIT_EMPTY);
    }
    let text = match args.output.format {
        Format::Text => report.render_text(args.output.top),
        Format::Json => {
            let mut json = report.to_json();
            if let Some(n) = args.output.top {
                json.ranking.truncate(n);
            }
            json_line(&json)?
        }
    };
    emit(&args.output, &text, stdout)?;
    Ok(EXIT_OK)
}

fn emit_baseline(
    ranking: &BaselineRanking,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    if ranking.is_empty() {
        writeln!(stderr, "no differences detected")?;
        return Ok(EXIT_EMPTY);
    }
    let text = match output.format {
        Format::Text => ranking.render_text(output.top),
        Format::Json => {
            let mut shown = ranking.clone();
            if let Some(n) = output.top {
                shown.ranking.truncate(n);
            }
            json_line(&shown)?
        }
    };
    emit(output, &text, stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_naive(args: &NaiveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let prefixes = args.prefixes.resolve()?;
    let baseline = load(&args.inputs.baseline, TraceLabel::Baseline, &prefixes)?;
    let failure = load(&args.inputs.failure, TraceLabel::Failure, &prefixes)?;
    let ranking = naive_rank(&baseline, &failure, args.key_policy.into());
    emit_baseline(&ranking, &args.output, stdout, stderr)
}

pub fn cmd_sbfl(args: &SbflArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let matrix = CoverageMatrix::read_csv_file(&args.coverage).map_err(|e| with_path(&args.coverage, e))?;
    let granularity = match args.granularity {
        GranularityArg::Method => Granularity::Method,
        GranularityArg::Statement => Granularity::Statement,
    };
    let ranking = ochiai_rank_with(&matrix, granularity)?;
    emit_baseline(&ranking, &args.output, stdout, stderr)
}

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<i32> {
    let manifest = match &args.manifest {
        Some(path) => BenchManifest::read(path).map_err(|e| with_path(path, e))?,
        None => BenchManifest::standard(40, 10, args.seed),
    };
    let config = BenchConfig {
        analysis: args.analysis.config()?,
        coverage: !args.no_coverage,
        artifacts: args.out.clone(),
    };
    let result = run_bench(&manifest.scenarios, &config)?;
    match args.format {
        Format::Text => stdout.write_all(result.render_table().as_bytes())?,
        Format::Json => stdout.write_all((result.to_json() + "\n").as_bytes())?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let prefixes = args.prefixes.resolve()?;
    let file = File::open(&args.trace).map_err(|e| with_path(&args.trace, e.into()))?;
    let report = validate_trace(file, &prefixes, &args.root).map_err(|e| with_path(&args.trace, e))?;
    match args.format {
        Format::Text => {
            for f in &report.findings {
                writeln!(stdout, "{f}")?;
            }
            writeln!(
                stdout,
                "{} events, {} errors, {} warnings",
                report.events,
                report.errors().count(),
                report.warnings().count()
            )?;
        }
        Format::Json => stdout.write_all(json_line(&report)?.as_bytes())?,
    }
    Ok(if report.errors().next().is_some() {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}
