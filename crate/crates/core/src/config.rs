//! JSON problem configuration.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real),
//! matrices are lists of rows, vectors are flat lists.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "gks": { "hamiltonian": [[...]], "coeff": [[...]], "basis": [ [[...]], ... ] },
//!   "seed": 7,
//!   "tolerance": 1e-9,
//!   "time_grid": [0.001, 0.01, 0.1],
//!   "cp_times": [0.01, 0.1, 1.0]
//! }
//! ```
//!
//! `"lindblad": { "hamiltonian": ..., "jump_operators": [...], "basis": ... }`
//! replaces `"gks"`; exactly one of the two must be present.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::basis::{standard_basis, OperatorBasis};
use crate::generator::{lindblad_to_gks, GKSGenerator, GeneratorError, LindbladGenerator};
use crate::linalg::{c, ComplexMatrix, ComplexVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Gks {
        hamiltonian: ComplexMatrix,
        coeff: ComplexMatrix,
        basis: Option<Vec<ComplexMatrix>>,
    },
    Lindblad {
        hamiltonian: ComplexMatrix,
        jump_operators: Vec<ComplexMatrix>,
        basis: Option<Vec<ComplexMatrix>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanVectors {
    pub psi: ComplexVector,
    pub phi: ComplexVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub dim: usize,
    pub generator: GeneratorSpec,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub time_grid: Option<Vec<f64>>,
    pub cp_times: Option<Vec<f64>>,
    pub state: Option<ComplexMatrix>,
    pub time: Option<f64>,
    pub scan_vectors: Option<ScanVectors>,
    /// Parsed document, echoed into reports.
    pub raw: Value,
}

const KNOWN_KEYS: [&str; 10] =
    ["dim", "gks", "lindblad", "tolerance", "seed", "time_grid", "cp_times", "state", "time", "scan"];

impl ProblemConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_value(raw, None)
    }

    /// Parses with an optional dimension supplied by a preset; a conflicting
    /// `dim` in the document is an error.
    pub fn from_value(raw: Value, forced_dim: Option<usize>) -> Result<Self> {
        let obj = raw.as_object().ok_or_else(|| ConfigError::field("<root>", "expected a JSON object"))?;
        if let Some(key) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::field(key.clone(), "unknown field"));
        }
        let dim = match (obj.get("dim"), forced_dim) {
            (Some(v), forced) => {
                let d = as_usize(v, "dim")?;
                if let Some(f) = forced {
                    if f != d {
                        return Err(ConfigError::field("dim", format!("preset requires dim = {f}, got {d}")));
                    }
                }
                d
            }
            (None, Some(f)) => f,
            (None, None) => return Err(ConfigError::field("dim", "missing")),
        };
        if dim < 2 {
            return Err(ConfigError::field("dim", format!("must be at least 2, got {dim}")));
        }

        let generator = match (obj.get("gks"), obj.get("lindblad")) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field("gks/lindblad", "exactly one generator form may be given"))
            }
            (None, None) => return Err(ConfigError::field("gks/lindblad", "a generator is required")),
            (Some(g), None) => parse_gks(g, dim)?,
            (None, Some(l)) => parse_lindblad(l, dim)?,
        };

        let tolerance = obj.get("tolerance").map(|v| as_positive(v, "tolerance")).transpose()?;
        let seed = match obj.get("seed") {
            Some(v) => v.as_u64().ok_or_else(|| ConfigError::field("seed", "expected a nonnegative integer"))?,
            None => 0,
        };
        let time_grid = obj.get("time_grid").map(|v| parse_reals(v, "time_grid")).transpose()?;
        let cp_times = obj.get("cp_times").map(|v| parse_reals(v, "cp_times")).transpose()?;
        let state = obj.get("state").map(|v| parse_matrix(v, "state", None)).transpose()?;
        let time = obj.get("time").map(|v| as_real(v, "time")).transpose()?;
        let scan_vectors = obj.get("scan").map(|v| parse_scan(v, dim)).transpose()?;

        Ok(Self { dim, generator, tolerance, seed, time_grid, cp_times, state, time, scan_vectors, raw })
    }

    fn basis(&self, custom: &Option<Vec<ComplexMatrix>>) -> std::result::Result<OperatorBasis, GeneratorError> {
        match custom {
            Some(elements) => Ok(OperatorBasis::new(self.dim, elements.clone())?),
            None => Ok(standard_basis(self.dim)?),
        }
    }

    /// The generator in GKS form; Lindblad input is expanded over the
    /// configured (or standard) basis.
    pub fn gks_generator(&self) -> std::result::Result<GKSGenerator, GeneratorError> {
        match &self.generator {
            GeneratorSpec::Gks { hamiltonian, coeff, basis } => {
                GKSGenerator::new(hamiltonian.clone(), coeff.clone(), self.basis(basis)?)
            }
            GeneratorSpec::Lindblad { hamiltonian, jump_operators, basis } => {
                let l = LindbladGenerator::new(self.dim, hamiltonian.clone(), jump_operators.clone())?;
                lindblad_to_gks(&l, &self.basis(basis)?)
            }
        }
    }

    pub fn lindblad_generator(&self) -> std::result::Result<Option<LindbladGenerator>, GeneratorError> {
        match &self.generator {
            GeneratorSpec::Lindblad { hamiltonian, jump_operators, .. } => {
                Ok(Some(LindbladGenerator::new(self.dim, hamiltonian.clone(), jump_operators.clone())?))
            }
            GeneratorSpec::Gks { .. } => Ok(None),
        }
    }

    pub fn basis_for_conversion(&self) -> std::result::Result<OperatorBasis, GeneratorError> {
        match &self.generator {
            GeneratorSpec::Gks { basis, .. } | GeneratorSpec::Lindblad { basis, .. } => self.basis(basis),
        }
    }
}

fn parse_gks(v: &Value, dim: usize) -> Result<GeneratorSpec> {
    let obj = object(v, "gks")?;
    check_keys(obj, "gks", &["hamiltonian", "coeff", "basis"])?;
    let hamiltonian = optional_hamiltonian(obj, "gks", dim)?;
    let coeff = match obj.get("coeff") {
        Some(m) => parse_matrix(m, "gks.coeff", Some(dim * dim - 1))?,
        None => return Err(ConfigError::field("gks.coeff", "missing")),
    };
    let basis = obj.get("basis").map(|b| parse_matrix_list(b, "gks.basis", dim)).transpose()?;
    Ok(GeneratorSpec::Gks { hamiltonian, coeff, basis })
}

fn parse_lindblad(v: &Value, dim: usize) -> Result<GeneratorSpec> {
    let obj = object(v, "lindblad")?;
    check_keys(obj, "lindblad", &["hamiltonian", "jump_operators", "basis"])?;
    let hamiltonian = optional_hamiltonian(obj, "lindblad", dim)?;
    let jump_operators = match obj.get("jump_operators") {
        Some(list) => parse_matrix_list(list, "lindblad.jump_operators", dim)?,
        None => Vec::new(),
    };
    let basis = obj.get("basis").map(|b| parse_matrix_list(b, "lindblad.basis", dim)).transpose()?;
    Ok(GeneratorSpec::Lindblad { hamiltonian, jump_operators, basis })
}

fn parse_scan(v: &Value, dim: usize) -> Result<ScanVectors> {
    let obj = object(v, "scan")?;
    check_keys(obj, "scan", &["psi", "phi"])?;
    let get = |key: &str| -> Result<ComplexVector> {
        let path = format!("scan.{key}");
        let value = obj.get(key).ok_or_else(|| ConfigError::field(path.clone(), "missing"))?;
        let v = parse_vector(value, &path)?;
        if v.len() != dim * dim {
            return Err(ConfigError::field(path, format!("expected {} entries, found {}", dim * dim, v.len())));
        }
        Ok(v)
    };
    Ok(ScanVectors { psi: get("psi")?, phi: get("phi")? })
}

fn optional_hamiltonian(obj: &Map<String, Value>, prefix: &str, dim: usize) -> Result<ComplexMatrix> {
    match obj.get("hamiltonian") {
        Some(m) => parse_matrix(m, &format!("{prefix}.hamiltonian"), Some(dim)),
        None => Ok(ComplexMatrix::zeros(dim, dim)),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| ConfigError::field(path, "expected an object"))
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::field(format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| ConfigError::field(path, "expected a nonnegative integer"))
}

fn as_real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::field(path, "expected a finite number"))
}

fn as_positive(v: &Value, path: &str) -> Result<f64> {
    let x = as_real(v, path)?;
    if x <= 0.0 {
        return Err(ConfigError::field(path, "must be positive"));
    }
    Ok(x)
}

fn parse_reals(v: &Value, path: &str) -> Result<Vec<f64>> {
    let items = v.as_array().ok_or_else(|| ConfigError::field(path, "expected a list of numbers"))?;
    items.iter().enumerate().map(|(i, x)| as_real(x, &format!("{path}[{i}]"))).collect()
}

pub fn parse_complex(v: &Value, path: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        if x.is_finite() {
            return Ok(c(x, 0.0));
        }
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(c(as_real(re, path)?, as_real(im, path)?)),
        _ => Err(ConfigError::field(path, "expected a complex number [re, im]")),
    }
}

pub fn parse_vector(v: &Value, path: &str) -> Result<ComplexVector> {
    let items = v.as_array().ok_or_else(|| ConfigError::field(path, "expected a list of complex numbers"))?;
    if items.is_empty() {
        return Err(ConfigError::field(path, "vector is empty"));
    }
    let entries = items
        .iter()
        .enumerate()
        .map(|(i, x)| parse_complex(x, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexVector::from_vec(entries))
}

/// Parses a square matrix; `expected` pins its size.
pub fn parse_matrix(v: &Value, path: &str, expected: Option<usize>) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| ConfigError::field(path, "expected a list of rows"))?;
    let n = expected.unwrap_or(rows.len());
    if rows.len() != n {
        return Err(ConfigError::field(path, format!("expected {n} rows, found {}", rows.len())));
    }
    if n == 0 {
        return Err(ConfigError::field(path, "matrix is empty"));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let entries = row.as_array().ok_or_else(|| ConfigError::field(row_path.clone(), "expected a row list"))?;
        if entries.len() != n {
            return Err(ConfigError::field(row_path, format!("expected {n} entries, found {}", entries.len())));
        }
        for (j, z) in entries.iter().enumerate() {
            m[(i, j)] = parse_complex(z, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn parse_matrix_list(v: &Value, path: &str, dim: usize) -> Result<Vec<ComplexMatrix>> {
    let items = v.as_array().ok_or_else(|| ConfigError::field(path, "expected a list of matrices"))?;
    items.iter().enumerate().map(|(i, m)| parse_matrix(m, &format!("{path}[{i}]"), Some(dim))).collect()
}

pub fn complex_json(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn matrix_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()).collect()
}

pub fn vector_json(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| complex_json(*z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEPOLARIZING: &str = r#"{
        "dim": 2,
        "gks": {"coeff": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        "seed": 3
    }"#;

    #[test]
    fn parses_gks_config() {
        let cfg = ProblemConfig::from_json_str(DEPOLARIZING).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.seed, 3);
        let g = cfg.gks_generator().unwrap();
        assert_eq!(g.coeff(), &ComplexMatrix::identity(3, 3));
    }

    #[test]
    fn ragged_row_names_field() {
        let text = r#"{"dim": 2, "gks": {"hamiltonian": [[[0,0],[0,0],[1,0]], [[0,0],[0,0]]], "coeff": [[0,0,0],[0,0,0],[0,0,0]]}}"#;
        let err = ProblemConfig::from_json_str(text).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Field { field: "gks.hamiltonian[0]".into(), message: "expected 2 entries, found 3".into() }
        );
    }

    #[test]
    fn exactly_one_generator() {
        let both = r#"{"dim": 2, "gks": {"coeff": [[0,0,0],[0,0,0],[0,0,0]]}, "lindblad": {}}"#;
        assert!(matches!(ProblemConfig::from_json_str(both), Err(ConfigError::Field { .. })));
        let none = r#"{"dim": 2}"#;
        assert!(matches!(ProblemConfig::from_json_str(none), Err(ConfigError::Field { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ProblemConfig::from_json_str("{\n  \"dim\": 2,\n  oops\n}").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }));
    }

    #[test]
    fn lindblad_config_expands_over_basis() {
        let text = r#"{"dim": 2, "lindblad": {"jump_operators": [[[0, 0], [1, 0]]]}}"#;
        let cfg = ProblemConfig::from_json_str(text).unwrap();
        let g = cfg.gks_generator().unwrap();
        assert!((g.coeff()[(0, 1)] - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"dim": 2, "gks": {"coeff": [[0,0,0],[0,0,0],[0,0,0]]}, "sede": 1}"#;
        assert_eq!(
            ProblemConfig::from_json_str(text).unwrap_err(),
            ConfigError::Field { field: "sede".into(), message: "unknown field".into() }
        );
    }
}
