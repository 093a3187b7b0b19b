//! The `occsvm` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver did not
//! converge (the model is still written and flagged), 4 every bench cell
//! failed. Success paths write nothing to the error stream.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use occsvm_core::data::MinMaxScaler;
use occsvm_core::{Dataset, KernelSpec, Label, SolverConfig};

use crate::bench::{emit_table, run_bench, BenchPlan, DataFormat, DatasetEntry, KernelFamily, OutputFormat};
use crate::error::{OccError, Result};
use crate::io::{load_csv, load_gram, load_svmlight, sig17, LabelColumn};
use crate::model_file::{load_model, save_model, ModelFile};
use crate::train::{solve_timed, solve_timed_with_upper_bound, train_timed};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_ALL_CELLS_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "occsvm", version, about = "One-class SVM training with an augmented Lagrangian fast projected gradient solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on every +1 row of a dataset and write a model file.
    Train(TrainArgs),
    /// Label (or score) every row of a dataset with a trained model.
    Predict(PredictArgs),
    /// Run the one-class evaluation protocol over a gamma grid.
    Bench(BenchArgs),
    /// Solve the dual QP for a Gram matrix read from a file.
    SolveQp(SolveQpArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Trade-off parameter; the box bound is C = 1/(nu·n).
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Initial penalty parameter c.
    #[arg(long, default_value_t = 0.1)]
    c0: f64,
    /// Inner tolerance factor.
    #[arg(long, default_value_t = 0.99)]
    theta: f64,
    /// Penalty growth factor.
    #[arg(long, default_value_t = 1.01)]
    delta: f64,
    /// Stopping threshold on the optimality measure.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Cap on outer (multiplier) iterations.
    #[arg(long, default_value_t = SolverConfig::default().max_outer)]
    max_outer: usize,
    /// Cap on inner iterations per outer iteration.
    #[arg(long, default_value_t = SolverConfig::default().max_inner)]
    max_inner: usize,
    /// Cap on the penalty parameter c.
    #[arg(long, default_value_t = SolverConfig::default().c_max)]
    c_max: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let config = SolverConfig {
            nu: self.nu,
            c0: self.c0,
            theta: self.theta,
            delta: self.delta,
            tol_final: self.tol,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            c_max: self.c_max,
        };
        config.validate().map_err(to_usage)?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Kernel family.
    #[arg(long, value_enum, default_value_t = KernelFamily::PaperGaussian)]
    kernel: KernelFamily,
    /// Width of the Gaussian kernels.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Polynomial degree.
    #[arg(long, default_value_t = 3)]
    degree: u32,
    /// Polynomial offset.
    #[arg(long, default_value_t = 0.0)]
    coef0: f64,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec> {
        self.kernel.spec(self.gamma, self.degree, self.coef0).validated().map_err(to_usage)
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Dataset format [default: csv for *.csv, svmlight otherwise].
    #[arg(long, value_enum)]
    format: Option<DataFormat>,
    /// CSV label column: 0-based index, header name, or "last".
    #[arg(long, default_value = "last")]
    label_col: LabelColumn,
}

impl DataArgs {
    fn load(&self, min_dim: usize) -> Result<Dataset> {
        match self.format.unwrap_or_else(|| DataFormat::infer(&self.data)) {
            DataFormat::Svmlight => load_svmlight(&self.data, min_dim),
            DataFormat::Csv => load_csv(&self.data, &self.label_col),
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Min-max scale features to [0,1]; the scaling is stored in the model.
    #[arg(long)]
    scale: bool,
    /// Accepted for symmetry with bench; training is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the model document.
    #[arg(long, default_value = "model.json")]
    model_out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model document written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Print raw scores (17 significant digits) instead of labels.
    #[arg(long)]
    scores: bool,
    /// Output file [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// TOML plan file listing datasets and overrides.
    #[arg(long, conflicts_with_all = ["data", "gammas"], required_unless_present = "data")]
    plan: Option<PathBuf>,
    /// Dataset file (repeatable) for an inline plan.
    #[arg(long)]
    data: Vec<PathBuf>,
    /// Comma-separated gamma grid for an inline plan [default: 0.1,0.5,1].
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format [default: the plan's, else text].
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Split seed [default: the plan's, else 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Min-max scale features before splitting (inline plans).
    #[arg(long)]
    scale: bool,
    /// Kernel family for inline plans.
    #[arg(long, value_enum, default_value_t = KernelFamily::PaperGaussian)]
    kernel: KernelFamily,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SolveQpArgs {
    /// Gram matrix file: first line n, then n rows of n numbers.
    #[arg(long)]
    gram: PathBuf,
    /// Box bound C; overrides nu (which gives C = 1/(nu·n)).
    #[arg(long = "C")]
    upper: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output layout.
    #[arg(long, value_enum, default_value_t = QpFormat::Text)]
    format: QpFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum QpFormat {
    Text,
    Json,
}

fn to_usage(e: occsvm_core::Error) -> OccError {
    match e {
        occsvm_core::Error::InvalidInput(msg) => OccError::Usage(msg),
        other => OccError::Usage(other.to_string()),
    }
}

/// Exit code for an error raised outside the solver.
fn exit_code(e: &OccError) -> u8 {
    match e {
        OccError::Usage(_) => EXIT_USAGE,
        OccError::Core(occsvm_core::Error::NumericalFailure { .. } | occsvm_core::Error::DegenerateModel(_)) => {
            EXIT_NOT_CONVERGED
        }
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(&a, stdout, stderr),
        Command::Predict(a) => cmd_predict(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout, stderr),
        Command::SolveQp(a) => cmd_solve_qp(&a, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| OccError::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| OccError::io("<stdout>", e)),
    }
}

fn cmd_train(a: &TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let config = a.solver.config()?;
    let kernel = a.kernel.spec()?;
    let ds = a.data.load(0)?;
    let positives = ds.positives();
    if positives.is_empty() {
        return Err(OccError::EmptyDataset(format!("{} has no rows labeled 1, so it", a.data.data.display())));
    }
    let ignored = ds.len() - positives.len();
    let (x, scaling) = if a.scale {
        let scaler = MinMaxScaler::fit(positives.features())?;
        (scaler.transform(positives.features())?, Some(scaler))
    } else {
        (positives.features().clone(), None)
    };

    let outcome = train_timed(&x, kernel, &config)?;
    let converged = outcome.report.converged;
    let file = ModelFile::new(outcome.model, scaling);
    save_model(&file, &a.model_out)?;

    let m = &file.model;
    let out = (|| -> std::io::Result<()> {
        if ignored > 0 {
            writeln!(stdout, "note: ignored {ignored} rows not labeled 1 (one-class training)")?;
        }
        writeln!(
            stdout,
            "n_train={} n_sv={} offset={} outer_iters={} inner_iters={} converged={} train_time_ms={:.3} model={}",
            m.meta().n_train,
            m.n_support(),
            sig17(m.offset()),
            m.meta().outer_iters,
            m.meta().inner_iters_total,
            converged,
            outcome.report.wall_time.as_secs_f64() * 1e3,
            a.model_out.display()
        )
    })();
    out.map_err(|e| OccError::io("<stdout>", e))?;
    if converged {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            stderr,
            "warning: solver stopped after {} outer iterations with optimality {} > tol {}; model written and flagged",
            m.meta().outer_iters,
            sig17(m.meta().optimality),
            config.tol_final
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_predict(a: &PredictArgs, stdout: &mut dyn Write) -> Result<u8> {
    let file = load_model(&a.model)?;
    let ds = a.data.load(file.model.dim())?;
    if ds.dim() != file.model.dim() {
        return Err(OccError::Core(occsvm_core::Error::DimensionMismatch {
            expected: file.model.dim(),
            found: ds.dim(),
        }));
    }
    let x = file.prepare(ds.features())?;
    let scores = file.model.score_rows(&x)?;
    let mut text = String::with_capacity(scores.len() * 24);
    for s in scores {
        if a.scores {
            text.push_str(&sig17(s));
        } else {
            text.push_str(&Label::from_score(s).to_string());
        }
        text.push('\n');
    }
    write_output(a.output.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let mut plan = match &a.plan {
        Some(path) => BenchPlan::load(path).map_err(|e| match e {
            OccError::Parse { .. } => OccError::Usage(e.to_string()),
            other => other,
        })?,
        None => {
            let mut plan = BenchPlan::new(a.data.iter().map(DatasetEntry::from_path).collect());
            if !a.gammas.is_empty() {
                plan.gammas = a.gammas.clone();
            }
            plan.solver = a.solver.config()?;
            plan.kernel = a.kernel;
            plan.scale = a.scale;
            plan
        }
    };
    if let Some(seed) = a.seed {
        plan.seed = seed;
    }
    if let Some(format) = a.format {
        plan.format = format;
    }
    let result = run_bench(&plan)?;
    write_output(a.out.as_deref(), &emit_table(&result, plan.format), stdout)?;
    if result.n_succeeded() == 0 {
        for cell in &result.cells {
            if let Err(msg) = &cell.outcome {
                let _ = writeln!(stderr, "error: {} gamma={}: {msg}", cell.dataset, cell.gamma);
            }
        }
        return Ok(EXIT_ALL_CELLS_FAILED);
    }
    Ok(EXIT_OK)
}

fn cmd_solve_qp(a: &SolveQpArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let config = a.solver.config()?;
    let k = load_gram(&a.gram)?;
    let n = k.n();
    let report = match a.upper {
        Some(c) => {
            if !(c > 0.0 && c.is_finite() && c * n as f64 >= 1.0) {
                return Err(OccError::Usage(format!("C must satisfy n·C ≥ 1 (n = {n}, C = {c})")));
            }
            solve_timed_with_upper_bound(&k, &config, c)?
        }
        None => solve_timed(&k, &config)?,
    };
    let text = match a.format {
        QpFormat::Text => {
            let alpha: Vec<String> = report.alpha.iter().map(|&v| sig17(v)).collect();
            format!(
                "n {n}\nC {}\nalpha {}\nobjective {}\nequality_residual {}\noptimality {}\nmu {}\n\
                 outer_iters {}\ninner_iters_total {}\nconverged {}\nwall_time_ms {:.3}\n",
                sig17(report.upper_bound),
                alpha.join(" "),
                sig17(report.objective),
                sig17(report.equality_residual),
                sig17(report.optimality),
                sig17(report.mu),
                report.outer_iters,
                report.inner_iters_total,
                report.converged,
                report.wall_time.as_secs_f64() * 1e3
            )
        }
        QpFormat::Json => {
            let doc = serde_json::json!({
                "n": n,
                "C": report.upper_bound,
                "alpha": report.alpha,
                "objective": report.objective,
                "equality_residual": report.equality_residual,
                "optimality": report.optimality,
                "mu": report.mu,
                "outer_iters": report.outer_iters,
                "inner_iters_total": report.inner_iters_total,
                "converged": report.converged,
                "wall_time_ms": report.wall_time.as_secs_f64() * 1e3,
            });
            let mut t = serde_json::to_string_pretty(&doc).unwrap_or_default();
            t.push('\n');
            t
        }
    };
    write_output(None, &text, stdout)?;
    if report.converged {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(stderr, "warning: solver did not reach tol {} (optimality {})", config.tol_final, sig17(report.optimality));
        Ok(EXIT_NOT_CONVERGED)
    }
}
