//! JSON interchange for measurement models.
//!
//! One file holds one model under the schema tag `povm/1`. The root
//! object carries `schema_version`, `kind`, and the kind's payload
//! fields inline:
//!
//! * `povm`: `dim`, `outcomes`, `elements`;
//! * `pv`: `dim`, `labels`, `projections`;
//! * `density`: `dim`, `matrix`;
//! * `ancilla_model`: `system` and `ancilla` (each a `pv` payload),
//!   `k_values` (rows of real pointer values), `state` (a `density`
//!   payload).
//!
//! A matrix is a flat row-major array of `[re, im]` pairs. The writer
//! is canonical — sorted keys, compact separators, every float in
//! scientific notation with 17 significant digits, one trailing
//! newline — so loading and re-saving a canonical file reproduces it
//! byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::povm::{DensityMatrix, DiscretePOVM, PVMeasure};
use crate::unsharpness::AncillaModel;

/// Schema tag accepted and produced by this module.
pub const SCHEMA_VERSION: &str = "povm/1";

/// Any model a file can hold.
#[derive(Debug, Clone)]
pub enum Model {
    /// A discrete POVM.
    Povm(DiscretePOVM),
    /// A sharp (projection-valued) observable.
    Sharp(PVMeasure),
    /// A density matrix.
    Density(DensityMatrix),
    /// A system–ancilla measurement model.
    Ancilla(AncillaModel),
}

impl Model {
    /// The `kind` tag used in files.
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Povm(_) => "povm",
            Model::Sharp(_) => "pv",
            Model::Density(_) => "density",
            Model::Ancilla(_) => "ancilla_model",
        }
    }
}

fn malformed(detail: impl Into<String>) -> Error {
    Error::MalformedModel {
        detail: detail.into(),
    }
}

fn as_object<'a>(value: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| malformed(format!("{what} must be a JSON object")))
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| malformed(format!("missing field `{key}`")))
}

fn dim_field(map: &Map<String, Value>) -> Result<usize> {
    let dim = field(map, "dim")?
        .as_u64()
        .ok_or_else(|| malformed("field `dim` must be a non-negative integer"))?;
    Ok(dim as usize)
}

fn f64_value(value: &Value, what: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| malformed(format!("{what} must be a number")))
}

fn f64_array(value: &Value, what: &str) -> Result<Vec<f64>> {
    let arr = value
        .as_array()
        .ok_or_else(|| malformed(format!("{what} must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| f64_value(v, &format!("{what}[{i}]")))
        .collect()
}

/// Parses one flat row-major matrix of `[re, im]` pairs.
fn matrix_value(value: &Value, dim: usize, what: &str) -> Result<HermitianMatrix> {
    let arr = value
        .as_array()
        .ok_or_else(|| malformed(format!("{what} must be an array of [re, im] pairs")))?;
    if arr.len() != dim * dim {
        return Err(malformed(format!(
            "{what} has {} entries, expected {} for dimension {dim}",
            arr.len(),
            dim * dim
        )));
    }
    let mut m = CMatrix::zeros((dim, dim));
    for (pos, entry) in arr.iter().enumerate() {
        let pair = entry
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| malformed(format!("{what}[{pos}] must be a [re, im] pair")))?;
        let re = f64_value(&pair[0], &format!("{what}[{pos}][0]"))?;
        let im = f64_value(&pair[1], &format!("{what}[{pos}][1]"))?;
        m[(pos / dim, pos % dim)] = C64::new(re, im);
    }
    HermitianMatrix::new(m)
}

fn matrix_list(value: &Value, dim: usize, what: &str) -> Result<Vec<HermitianMatrix>> {
    let arr = value
        .as_array()
        .ok_or_else(|| malformed(format!("{what} must be an array of matrices")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| matrix_value(v, dim, &format!("{what}[{i}]")))
        .collect()
}

fn povm_from_map(map: &Map<String, Value>) -> Result<DiscretePOVM> {
    let dim = dim_field(map)?;
    let outcomes = f64_array(field(map, "outcomes")?, "outcomes")?;
    let elements = matrix_list(field(map, "elements")?, dim, "elements")?;
    DiscretePOVM::new(outcomes, elements)
}

fn pv_from_map(map: &Map<String, Value>) -> Result<PVMeasure> {
    let dim = dim_field(map)?;
    let labels = f64_array(field(map, "labels")?, "labels")?;
    let projections = matrix_list(field(map, "projections")?, dim, "projections")?;
    PVMeasure::new(labels, projections)
}

fn density_from_map(map: &Map<String, Value>) -> Result<DensityMatrix> {
    let dim = dim_field(map)?;
    let matrix = matrix_value(field(map, "matrix")?, dim, "matrix")?;
    DensityMatrix::new(matrix)
}

/// Parses and validates a model from JSON text. `origin` names the
/// source (usually a path) in parse errors.
pub fn model_from_json(text: &str, origin: &str) -> Result<Model> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = as_object(&value, "model file")?;
    let version = match root.get("schema_version") {
        Some(v) => v.as_str().unwrap_or("(not a string)").to_string(),
        None => "(missing)".to_string(),
    };
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion { found: version });
    }
    let kind = field(root, "kind")?
        .as_str()
        .ok_or_else(|| malformed("field `kind` must be a string"))?;
    match kind {
        "povm" => Ok(Model::Povm(povm_from_map(root)?)),
        "pv" => Ok(Model::Sharp(pv_from_map(root)?)),
        "density" => Ok(Model::Density(density_from_map(root)?)),
        "ancilla_model" => {
            let system = pv_from_map(as_object(field(root, "system")?, "system")?)?;
            let ancilla = pv_from_map(as_object(field(root, "ancilla")?, "ancilla")?)?;
            let state = density_from_map(as_object(field(root, "state")?, "state")?)?;
            let rows_value = field(root, "k_values")?
                .as_array()
                .ok_or_else(|| malformed("k_values must be an array of rows"))?;
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(rows_value.len());
            for (i, row) in rows_value.iter().enumerate() {
                rows.push(f64_array(row, &format!("k_values[{i}]"))?);
            }
            let ncols = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != ncols) {
                return Err(malformed("k_values rows have unequal lengths"));
            }
            let mut k_values = Array2::<f64>::zeros((rows.len(), ncols));
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    k_values[(i, j)] = v;
                }
            }
            Ok(Model::Ancilla(AncillaModel::new(
                system, ancilla, k_values, state,
            )?))
        }
        other => Err(malformed(format!("unknown kind `{other}`"))),
    }
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_json(&text, &path.display().to_string())
}

fn push_f64(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn push_f64_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_f64(out, v);
    }
    out.push(']');
}

fn push_matrix(out: &mut String, m: &HermitianMatrix) {
    let n = m.dim();
    let a = m.as_array();
    out.push('[');
    for pos in 0..n * n {
        if pos > 0 {
            out.push(',');
        }
        let z = a[(pos / n, pos % n)];
        out.push('[');
        push_f64(out, z.re);
        out.push(',');
        push_f64(out, z.im);
        out.push(']');
    }
    out.push(']');
}

fn push_matrix_list(out: &mut String, ms: &[HermitianMatrix]) {
    out.push('[');
    for (i, m) in ms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_matrix(out, m);
    }
    out.push(']');
}

fn push_pv_body(out: &mut String, pv: &PVMeasure) {
    let _ = write!(out, "{{\"dim\":{},\"labels\":", pv.dim());
    push_f64_array(out, pv.labels());
    out.push_str(",\"projections\":");
    push_matrix_list(out, pv.projections());
    out.push('}');
}

fn push_density_body(out: &mut String, d: &DensityMatrix) {
    let _ = write!(out, "{{\"dim\":{},\"matrix\":", d.dim());
    push_matrix(out, d.matrix());
    out.push('}');
}

/// Serializes a model in the canonical form: sorted keys, compact
/// separators, floats with 17 significant digits, trailing newline.
pub fn model_to_canonical_json(model: &Model) -> String {
    let mut out = String::new();
    match model {
        Model::Povm(povm) => {
            let _ = write!(out, "{{\"dim\":{},\"elements\":", povm.dim());
            push_matrix_list(&mut out, povm.elements());
            out.push_str(",\"kind\":\"povm\",\"outcomes\":");
            push_f64_array(&mut out, povm.outcomes());
            let _ = write!(out, ",\"schema_version\":\"{SCHEMA_VERSION}\"}}");
        }
        Model::Sharp(pv) => {
            let _ = write!(out, "{{\"dim\":{},\"kind\":\"pv\",\"labels\":", pv.dim());
            push_f64_array(&mut out, pv.labels());
            out.push_str(",\"projections\":");
            push_matrix_list(&mut out, pv.projections());
            let _ = write!(out, ",\"schema_version\":\"{SCHEMA_VERSION}\"}}");
        }
        Model::Density(d) => {
            let _ = write!(out, "{{\"dim\":{},\"kind\":\"density\",\"matrix\":", d.dim());
            push_matrix(&mut out, d.matrix());
            let _ = write!(out, ",\"schema_version\":\"{SCHEMA_VERSION}\"}}");
        }
        Model::Ancilla(model) => {
            out.push_str("{\"ancilla\":");
            push_pv_body(&mut out, model.ancilla());
            out.push_str(",\"k_values\":[");
            for (i, row) in model.k_values().rows().into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_f64_array(&mut out, row.as_slice().expect("row-major layout"));
            }
            let _ = write!(out, "],\"kind\":\"ancilla_model\",\"schema_version\":\"{SCHEMA_VERSION}\",\"state\":");
            push_density_body(&mut out, model.state());
            out.push_str(",\"system\":");
            push_pv_body(&mut out, model.system());
            out.push('}');
        }
    }
    out.push('\n');
    out
}

/// Writes a model to a file in canonical form.
pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_canonical_json(model)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
