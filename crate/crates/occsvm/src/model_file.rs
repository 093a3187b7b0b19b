//! Versioned model document.
//!
//! The document is JSON with a fixed field order:
//!
//! ```text
//! format_version, kernel {family, gamma, degree, coef0}, n_sv, dim,
//! support_vectors (row-major, n_sv × dim), coefficients, offset, nu,
//! training_meta
//! ```
//!
//! Every real number is written with 17 significant digits, so loading a
//! saved model reproduces its scores bit for bit.

use std::fs;
use std::path::Path;

use occsvm_core::{KernelSpec, Matrix, MinMaxScaler, OccSvmModel, SolverConfig, TrainingMeta};
use serde::ser::{Error as _, SerializeSeq};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{OccError, Result};
use crate::io::{read_text, sig17};

pub const FORMAT_VERSION: u32 = 1;

const WHAT: &str = "model";

/// A trained model plus the feature scaling that was applied before
/// training, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: OccSvmModel,
    pub scaling: Option<MinMaxScaler>,
}

impl ModelFile {
    pub fn new(model: OccSvmModel, scaling: Option<MinMaxScaler>) -> Self {
        ModelFile { model, scaling }
    }

    /// Applies the stored scaling (if any) to raw feature rows.
    pub fn prepare(&self, x: &Matrix) -> Result<Matrix> {
        match &self.scaling {
            Some(s) => Ok(s.transform(x)?),
            None => Ok(x.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format_version: u32,
    kernel: KernelBlock,
    n_sv: usize,
    dim: usize,
    #[serde(serialize_with = "vec17")]
    support_vectors: Vec<f64>,
    #[serde(serialize_with = "vec17")]
    coefficients: Vec<f64>,
    #[serde(serialize_with = "num17")]
    offset: f64,
    #[serde(serialize_with = "num17")]
    nu: f64,
    training_meta: MetaBlock,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelBlock {
    family: String,
    #[serde(serialize_with = "opt17")]
    gamma: Option<f64>,
    degree: Option<u32>,
    #[serde(serialize_with = "opt17")]
    coef0: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaBlock {
    n_train: usize,
    outer_iters: usize,
    inner_iters_total: usize,
    converged: bool,
    #[serde(serialize_with = "num17")]
    objective: f64,
    #[serde(serialize_with = "num17")]
    equality_residual: f64,
    #[serde(serialize_with = "num17")]
    optimality: f64,
    #[serde(serialize_with = "num17")]
    dual_mass: f64,
    #[serde(serialize_with = "num17")]
    upper_bound: f64,
    solver: ConfigBlock,
    scaling: Option<ScalingBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigBlock {
    #[serde(serialize_with = "num17")]
    nu: f64,
    #[serde(serialize_with = "num17")]
    c0: f64,
    #[serde(serialize_with = "num17")]
    theta: f64,
    #[serde(serialize_with = "num17")]
    delta: f64,
    #[serde(serialize_with = "num17")]
    tol_final: f64,
    max_outer: usize,
    max_inner: usize,
    #[serde(serialize_with = "num17")]
    c_max: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingBlock {
    #[serde(serialize_with = "vec17")]
    mins: Vec<f64>,
    #[serde(serialize_with = "vec17")]
    maxs: Vec<f64>,
}

fn num17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("cannot store non-finite number {x}")));
    }
    RawValue::from_string(sig17(*x)).map_err(S::Error::custom)?.serialize(s)
}

fn opt17<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => num17(v, s),
        None => s.serialize_none(),
    }
}

fn vec17<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    struct Num(f64);
    impl Serialize for Num {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            num17(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&Num(x))?;
    }
    seq.end()
}

impl KernelBlock {
    fn from_spec(k: &KernelSpec) -> Self {
        let (degree, coef0) = match *k {
            KernelSpec::Polynomial { degree, coef0 } => (Some(degree), Some(coef0)),
            _ => (None, None),
        };
        KernelBlock { family: k.family_name().to_string(), gamma: k.gamma(), degree, coef0 }
    }

    fn to_spec(&self) -> Result<KernelSpec> {
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| OccError::parse(WHAT, format!("kernel.{field}"), format!("required for {}", self.family)))
        };
        let spec = match self.family.as_str() {
            "paper-gaussian" => KernelSpec::PaperGaussian { gamma: need(self.gamma, "gamma")? },
            "rbf-squared" => KernelSpec::RbfSquared { gamma: need(self.gamma, "gamma")? },
            "linear" => KernelSpec::Linear,
            "polynomial" => KernelSpec::Polynomial {
                degree: self
                    .degree
                    .ok_or_else(|| OccError::parse(WHAT, "kernel.degree", "required for polynomial"))?,
                coef0: need(self.coef0, "coef0")?,
            },
            other => return Err(OccError::parse(WHAT, "kernel.family", format!("unknown kernel family {other:?}"))),
        };
        spec.validated().map_err(|e| OccError::parse(WHAT, "kernel", e.to_string()))
    }
}

fn to_document(file: &ModelFile) -> Document {
    let m = &file.model;
    let meta = m.meta();
    let cfg = &meta.config;
    Document {
        format_version: FORMAT_VERSION,
        kernel: KernelBlock::from_spec(m.kernel()),
        n_sv: m.n_support(),
        dim: m.dim(),
        support_vectors: m.support_vectors().as_slice().to_vec(),
        coefficients: m.coefficients().to_vec(),
        offset: m.offset(),
        nu: m.nu(),
        training_meta: MetaBlock {
            n_train: meta.n_train,
            outer_iters: meta.outer_iters,
            inner_iters_total: meta.inner_iters_total,
            converged: meta.converged,
            objective: meta.objective,
            equality_residual: meta.equality_residual,
            optimality: meta.optimality,
            dual_mass: meta.dual_mass,
            upper_bound: meta.upper_bound,
            solver: ConfigBlock {
                nu: cfg.nu,
                c0: cfg.c0,
                theta: cfg.theta,
                delta: cfg.delta,
                tol_final: cfg.tol_final,
                max_outer: cfg.max_outer,
                max_inner: cfg.max_inner,
                c_max: cfg.c_max,
            },
            scaling: file.scaling.as_ref().map(|s| ScalingBlock { mins: s.mins.clone(), maxs: s.maxs.clone() }),
        },
    }
}

fn from_document(doc: Document) -> Result<ModelFile> {
    let kernel = doc.kernel.to_spec()?;
    if doc.coefficients.len() != doc.n_sv {
        return Err(OccError::parse(
            WHAT,
            "coefficients",
            format!("expected {} entries, found {}", doc.n_sv, doc.coefficients.len()),
        ));
    }
    if doc.dim == 0 || doc.support_vectors.len() != doc.n_sv * doc.dim {
        return Err(OccError::parse(
            WHAT,
            "support_vectors",
            format!("expected n_sv × dim = {} entries, found {}", doc.n_sv * doc.dim, doc.support_vectors.len()),
        ));
    }
    let sv = Matrix::from_row_major(doc.n_sv, doc.dim, doc.support_vectors)?;
    let t = doc.training_meta;
    let c = t.solver;
    let meta = TrainingMeta {
        n_train: t.n_train,
        outer_iters: t.outer_iters,
        inner_iters_total: t.inner_iters_total,
        converged: t.converged,
        objective: t.objective,
        equality_residual: t.equality_residual,
        optimality: t.optimality,
        dual_mass: t.dual_mass,
        upper_bound: t.upper_bound,
        config: SolverConfig {
            nu: c.nu,
            c0: c.c0,
            theta: c.theta,
            delta: c.delta,
            tol_final: c.tol_final,
            max_outer: c.max_outer,
            max_inner: c.max_inner,
            c_max: c.c_max,
        },
    };
    let scaling = match t.scaling {
        Some(s) if s.mins.len() != doc.dim || s.maxs.len() != doc.dim => {
            return Err(OccError::parse(WHAT, "training_meta.scaling", "length differs from dim"));
        }
        Some(s) => Some(MinMaxScaler { mins: s.mins, maxs: s.maxs }),
        None => None,
    };
    let model = OccSvmModel::from_parts(kernel, sv, doc.coefficients, doc.offset, doc.nu, meta)
        .map_err(|e| OccError::parse(WHAT, "document", e.to_string()))?;
    Ok(ModelFile { model, scaling })
}

/// Renders the model document. Output is a pure function of the model.
pub fn model_to_string(file: &ModelFile) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&to_document(file))
        .map_err(|e| OccError::parse(WHAT, "document", e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses a model document. Nothing is returned unless the whole document
/// is valid.
pub fn model_from_str(text: &str) -> Result<ModelFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        OccError::parse(WHAT, format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    match value.get("format_version") {
        None => return Err(OccError::parse(WHAT, "format_version", "missing field")),
        Some(v) if v.as_u64() != Some(u64::from(FORMAT_VERSION)) => {
            return Err(OccError::Version { expected: FORMAT_VERSION, found: v.to_string() });
        }
        Some(_) => {}
    }
    let doc: Document = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let location = if path == "." { "document".to_string() } else { path };
        OccError::parse(WHAT, location, e.into_inner().to_string())
    })?;
    from_document(doc)
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    let text = model_to_string(file)?;
    fs::write(path, text).map_err(|e| OccError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    model_from_str(&read_text(path)?)
}
