//! The one-class evaluation protocol.
//!
//! For every dataset in a plan and every γ in its grid: load, optionally
//! min-max scale, split the positives 25/75 with a seeded shuffle, train on
//! the training positives, predict the held-out positives plus all
//! negatives, and report accuracy and F1. Cells fail independently.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use occsvm_core::data::{minmax_scale, split_occ};
use occsvm_core::metrics::{accuracy, f1_score};
use occsvm_core::{Dataset, KernelSpec, SolverConfig, SplitSpec};
use serde::Deserialize;

use crate::error::{OccError, Result};
use crate::io::{load_csv, load_svmlight, read_text, LabelColumn};
use crate::train::train_timed;

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 13] = [
    "dataset",
    "gamma",
    "nu",
    "accuracy",
    "f1",
    "train_time_ms",
    "outer_iters",
    "inner_iters",
    "converged",
    "n_train",
    "n_test",
    "total_time_ms",
    "status",
];

/// Columns that hold wall-clock measurements; everything else in a report
/// is a deterministic function of the plan.
pub const TIMING_COLUMNS: [&str; 2] = ["train_time_ms", "total_time_ms"];

pub const DEFAULT_GAMMAS: [f64; 3] = [0.1, 0.5, 1.0];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Svmlight,
    Csv,
}

impl DataFormat {
    /// `.csv` files are CSV; everything else is read as svmlight.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DataFormat::Csv,
            _ => DataFormat::Svmlight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    #[default]
    PaperGaussian,
    RbfSquared,
    Linear,
    Polynomial,
}

impl KernelFamily {
    pub fn spec(self, gamma: f64, degree: u32, coef0: f64) -> KernelSpec {
        match self {
            KernelFamily::PaperGaussian => KernelSpec::PaperGaussian { gamma },
            KernelFamily::RbfSquared => KernelSpec::RbfSquared { gamma },
            KernelFamily::Linear => KernelSpec::Linear,
            KernelFamily::Polynomial => KernelSpec::Polynomial { degree, coef0 },
        }
    }
}

/// One dataset entry of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: DataFormat,
    pub label_col: LabelColumn,
}

impl DatasetEntry {
    /// Entry named after the file stem with the format inferred from the
    /// extension.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        DatasetEntry {
            name: crate::io::file_stem(&path),
            format: DataFormat::infer(&path),
            path,
            label_col: LabelColumn::Last,
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let mut ds = match self.format {
            DataFormat::Svmlight => load_svmlight(&self.path, 0)?,
            DataFormat::Csv => load_csv(&self.path, &self.label_col)?,
        };
        ds.name = self.name.clone();
        Ok(ds)
    }
}

/// Everything a benchmark run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub datasets: Vec<DatasetEntry>,
    pub gammas: Vec<f64>,
    pub kernel: KernelFamily,
    pub degree: u32,
    pub coef0: f64,
    pub solver: SolverConfig,
    pub seed: u64,
    pub train_fraction: f64,
    pub scale: bool,
    pub format: OutputFormat,
}

impl BenchPlan {
    /// Plan with the default γ grid, kernel and solver parameters.
    pub fn new(datasets: Vec<DatasetEntry>) -> Self {
        BenchPlan {
            datasets,
            gammas: DEFAULT_GAMMAS.to_vec(),
            kernel: KernelFamily::PaperGaussian,
            degree: 3,
            coef0: 0.0,
            solver: SolverConfig::default(),
            seed: DEFAULT_SEED,
            train_fraction: SplitSpec::new(0).train_fraction_of_positives,
            scale: false,
            format: OutputFormat::Text,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(OccError::Usage("plan lists no datasets".into()));
        }
        if self.gammas.is_empty() {
            return Err(OccError::Usage("plan lists no gamma values".into()));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(OccError::Usage(format!("gamma must be positive, got {g}")));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(OccError::Usage("train_fraction must be in (0,1)".into()));
        }
        self.kernel.spec(self.gammas[0], self.degree, self.coef0).validated().map_err(usage)?;
        self.solver.validate().map_err(usage)
    }

    /// Reads a TOML plan. Relative dataset paths are resolved against the
    /// plan file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file: PlanFile = toml::from_str(text).map_err(|e| {
            let at = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_else(|| "document".into());
            OccError::parse("plan", at, e.message().to_string())
        })?;
        let mut plan = BenchPlan::new(Vec::new());
        for d in file.datasets {
            let path = if d.path.is_absolute() { d.path } else { base_dir.join(d.path) };
            let mut entry = DatasetEntry::from_path(path);
            if let Some(name) = d.name {
                entry.name = name;
            }
            if let Some(format) = d.format {
                entry.format = format;
            }
            if let Some(col) = d.label_col {
                entry.label_col = col.parse().unwrap_or_default();
            }
            plan.datasets.push(entry);
        }
        if let Some(g) = file.gammas {
            plan.gammas = g;
        }
        plan.kernel = file.kernel.unwrap_or_default();
        plan.degree = file.degree.unwrap_or(plan.degree);
        plan.coef0 = file.coef0.unwrap_or(plan.coef0);
        plan.seed = file.seed.unwrap_or(plan.seed);
        plan.train_fraction = file.train_fraction.unwrap_or(plan.train_fraction);
        plan.scale = file.scale.unwrap_or(false);
        plan.format = file.format.unwrap_or_default();
        let s = file.solver.unwrap_or_default();
        let d = SolverConfig::default();
        plan.solver = SolverConfig {
            nu: file.nu.unwrap_or(d.nu),
            c0: s.c0.unwrap_or(d.c0),
            theta: s.theta.unwrap_or(d.theta),
            delta: s.delta.unwrap_or(d.delta),
            tol_final: s.tol.unwrap_or(d.tol_final),
            max_outer: s.max_outer.unwrap_or(d.max_outer),
            max_inner: s.max_inner.unwrap_or(d.max_inner),
            c_max: s.c_max.unwrap_or(d.c_max),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// One-line record of the parameters that determine the results.
    pub fn param_echo(&self) -> String {
        let c = &self.solver;
        format!(
            "kernel={} nu={} c0={} theta={} delta={} tol={:e} max_outer={} max_inner={} c_max={:e} \
             train_fraction={} seed={} scaled={}",
            self.kernel_name(),
            c.nu,
            c.c0,
            c.theta,
            c.delta,
            c.tol_final,
            c.max_outer,
            c.max_inner,
            c.c_max,
            self.train_fraction,
            self.seed,
            self.scale
        )
    }

    fn kernel_name(&self) -> String {
        match self.kernel {
            KernelFamily::Polynomial => format!("polynomial(degree={},coef0={})", self.degree, self.coef0),
            k => KernelFamily::spec(k, 1.0, 0, 0.0).family_name().to_string(),
        }
    }
}

fn usage(e: occsvm_core::Error) -> OccError {
    match e {
        occsvm_core::Error::InvalidInput(msg) => OccError::Usage(msg),
        other => OccError::Usage(other.to_string()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    datasets: Vec<PlanDataset>,
    gammas: Option<Vec<f64>>,
    kernel: Option<KernelFamily>,
    degree: Option<u32>,
    coef0: Option<f64>,
    nu: Option<f64>,
    seed: Option<u64>,
    train_fraction: Option<f64>,
    scale: Option<bool>,
    format: Option<OutputFormat>,
    solver: Option<PlanSolver>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDataset {
    name: Option<String>,
    path: PathBuf,
    format: Option<DataFormat>,
    label_col: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PlanSolver {
    c0: Option<f64>,
    theta: Option<f64>,
    delta: Option<f64>,
    tol: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    c_max: Option<f64>,
}

/// Metrics and counters of one successful (dataset, γ) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub accuracy: f64,
    pub f1: f64,
    /// Wall-clock time of the solver alone.
    pub train_time: Duration,
    pub gram_time: Duration,
    /// Load, split, Gram build, solve and prediction.
    pub total_time: Duration,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub converged: bool,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub dataset: String,
    pub gamma: f64,
    pub nu: f64,
    pub outcome: std::result::Result<CellMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub params: String,
    pub gammas: Vec<f64>,
    pub cells: Vec<BenchCell>,
}

impl BenchResult {
    pub fn n_succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_ok()).count()
    }
}

/// Runs every (dataset, γ) cell in plan order.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchResult> {
    plan.validate()?;
    let mut cells = Vec::with_capacity(plan.datasets.len() * plan.gammas.len());
    for entry in &plan.datasets {
        let start = Instant::now();
        let prepared = prepare(entry, plan);
        let prep_time = start.elapsed();
        for &gamma in &plan.gammas {
            let outcome = match &prepared {
                Ok((train, test)) => run_cell(plan, gamma, train, test, prep_time).map_err(|e| e.to_string()),
                Err(msg) => Err(msg.clone()),
            };
            cells.push(BenchCell { dataset: entry.name.clone(), gamma, nu: plan.solver.nu, outcome });
        }
    }
    Ok(BenchResult { params: plan.param_echo(), gammas: plan.gammas.clone(), cells })
}

fn prepare(entry: &DatasetEntry, plan: &BenchPlan) -> std::result::Result<(Dataset, Dataset), String> {
    let mut ds = entry.load().map_err(|e| e.to_string())?;
    if plan.scale {
        ds = minmax_scale(&ds).map_err(|e| e.to_string())?.0;
    }
    let spec = SplitSpec { train_fraction_of_positives: plan.train_fraction, seed: plan.seed };
    split_occ(&ds, &spec).map_err(|e| e.to_string())
}

fn run_cell(plan: &BenchPlan, gamma: f64, train: &Dataset, test: &Dataset, prep_time: Duration) -> Result<CellMetrics> {
    let start = Instant::now();
    let kernel = plan.kernel.spec(gamma, plan.degree, plan.coef0);
    let outcome = train_timed(train.features(), kernel, &plan.solver)?;
    let predictions = outcome.model.predict_rows(test.features())?;
    let acc = accuracy(&predictions, test.labels())?;
    let f1 = f1_score(&predictions, test.labels())?;
    Ok(CellMetrics {
        accuracy: acc,
        f1,
        train_time: outcome.report.wall_time,
        gram_time: outcome.gram_time,
        total_time: prep_time + start.elapsed(),
        outer_iters: outcome.report.outer_iters,
        inner_iters: outcome.report.inner_iters_total,
        converged: outcome.report.converged,
        n_train: train.len(),
        n_test: test.len(),
    })
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Text => "text",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = OccError;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).map_err(|_| OccError::Usage(format!("unknown output format {s:?}")))
    }
}

fn pct(x: f64) -> String {
    format!("{x:.1}")
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

/// Renders a result document.
///
/// * `text` — one `Name & acc(γ₁) & acc(γ₂) & …` row per dataset, first for
///   accuracy then for F1; failed cells show `n/a`.
/// * `csv` — a `#` parameter line, then [`CSV_COLUMNS`].
/// * `json` — `{"params": …, "records": [...]}` with the CSV fields.
pub fn emit_table(result: &BenchResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => emit_text(result),
        OutputFormat::Csv => emit_csv(result),
        OutputFormat::Json => emit_json(result),
    }
}

fn emit_text(result: &BenchResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", result.params);
    let mut names: Vec<&str> = Vec::new();
    for cell in &result.cells {
        if !names.contains(&cell.dataset.as_str()) {
            names.push(&cell.dataset);
        }
    }
    type Metric = fn(&CellMetrics) -> f64;
    let blocks: [(&str, Metric); 2] = [("Accuracy (%)", |m| m.accuracy), ("F1 (%)", |m| m.f1)];
    for (i, (title, metric)) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{title}");
        out.push_str("Name");
        for g in &result.gammas {
            let _ = write!(out, " & gamma={g}");
        }
        out.push('\n');
        for name in &names {
            out.push_str(name);
            for g in &result.gammas {
                let cell = result.cells.iter().find(|c| c.dataset == *name && c.gamma == *g);
                let value = match cell.map(|c| &c.outcome) {
                    Some(Ok(m)) => pct(metric(m)),
                    _ => "n/a".to_string(),
                };
                let _ = write!(out, " & {value}");
            }
            out.push('\n');
        }
    }
    out
}

fn record_fields(cell: &BenchCell) -> Vec<String> {
    let mut fields = vec![cell.dataset.clone(), cell.gamma.to_string(), cell.nu.to_string()];
    match &cell.outcome {
        Ok(m) => fields.extend([
            pct(m.accuracy),
            pct(m.f1),
            ms(m.train_time),
            m.outer_iters.to_string(),
            m.inner_iters.to_string(),
            m.converged.to_string(),
            m.n_train.to_string(),
            m.n_test.to_string(),
            ms(m.total_time),
            "ok".to_string(),
        ]),
        Err(msg) => {
            fields.extend(std::iter::repeat_n(String::new(), 9));
            fields.push(format!("error: {msg}"));
        }
    }
    fields
}

fn emit_csv(result: &BenchResult) -> String {
    let mut out = format!("# {}\n", result.params);
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(CSV_COLUMNS);
    for cell in &result.cells {
        let _ = w.write_record(record_fields(cell));
    }
    let bytes = w.into_inner().unwrap_or_default();
    out.push_str(&String::from_utf8_lossy(&bytes));
    out
}

fn emit_json(result: &BenchResult) -> String {
    use serde_json::{json, Map, Value};
    let records: Vec<Value> = result
        .cells
        .iter()
        .map(|cell| {
            let mut rec = Map::new();
            rec.insert("dataset".into(), json!(cell.dataset));
            rec.insert("gamma".into(), json!(cell.gamma));
            rec.insert("nu".into(), json!(cell.nu));
            let one_decimal = |x: f64| json!((x * 10.0).round() / 10.0);
            let time_ms = |d: Duration| json!((d.as_secs_f64() * 1e6).round() / 1e3);
            match &cell.outcome {
                Ok(m) => {
                    rec.insert("accuracy".into(), one_decimal(m.accuracy));
                    rec.insert("f1".into(), one_decimal(m.f1));
                    rec.insert("train_time_ms".into(), time_ms(m.train_time));
                    rec.insert("outer_iters".into(), json!(m.outer_iters));
                    rec.insert("inner_iters".into(), json!(m.inner_iters));
                    rec.insert("converged".into(), json!(m.converged));
                    rec.insert("n_train".into(), json!(m.n_train));
                    rec.insert("n_test".into(), json!(m.n_test));
                    rec.insert("total_time_ms".into(), time_ms(m.total_time));
                    rec.insert("status".into(), json!("ok"));
                }
                Err(msg) => {
                    for key in &CSV_COLUMNS[3..12] {
                        rec.insert((*key).into(), Value::Null);
                    }
                    rec.insert("status".into(), json!(format!("error: {msg}")));
                }
            }
            Value::Object(rec)
        })
        .collect();
    let doc = json!({ "params": result.params, "records": records });
    let mut text = serde_json::to_string_pretty(&doc).unwrap_or_default();
    text.push('\n');
    text
}
