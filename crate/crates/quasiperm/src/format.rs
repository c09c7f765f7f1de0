//! File formats: matrices (JSON and CSV), pattern sets, certificates and witnesses.
//!
//! Every rational is a string `"p/q"` or `"p"`. Documents written here carry
//! `"schema": "v1"`; documents without the field are read as v1.

use std::fs;
use std::path::{Path, PathBuf};

use quasiperm_core::flag::{Certificate, Direction, FlagType, FlagVector, RootedPermutation};
use quasiperm_core::perturbation::SymmetricForm;
use quasiperm_core::rational::{parse_rational, render};
use quasiperm_core::step::MatrixError;
use quasiperm_core::{PermSet, Rational, RationalMatrix};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const SCHEMA: &str = "v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error("{context}: {source}")]
    Invalid { context: String, source: MatrixError },
}

fn parse_err(context: &str, message: impl ToString) -> FormatError {
    FormatError::Parse {
        context: context.to_string(),
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn check_schema(v: Option<&str>, context: &str) -> Result<(), FormatError> {
    match v {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => Err(parse_err(context, format!("unsupported schema `{other}`"))),
    }
}

pub fn rat(r: &Rational) -> Value {
    Value::String(render(r))
}

pub fn rats(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(rat).collect())
}

pub fn parse_rat(text: &str, context: &str) -> Result<Rational, FormatError> {
    parse_rational(text).map_err(|e| parse_err(context, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    n: usize,
    entries: Vec<Vec<String>>,
}

fn parse_grid(rows: &[Vec<String>], context: &str) -> Result<Vec<Vec<Rational>>, FormatError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, cell)| parse_rat(cell, &format!("{context}: row {}, column {}", i + 1, j + 1)))
                .collect()
        })
        .collect()
}

/// Rational grid from the matrix JSON layout, without any validation.
pub fn parse_grid_json(text: &str, context: &str) -> Result<Vec<Vec<Rational>>, FormatError> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
    check_schema(doc.schema.as_deref(), context)?;
    if doc.entries.len() != doc.n || doc.entries.iter().any(|r| r.len() != doc.n) {
        return Err(parse_err(
            context,
            format!("entries do not form an {0}×{0} grid", doc.n),
        ));
    }
    parse_grid(&doc.entries, context)
}

fn validate(rows: Vec<Vec<Rational>>, context: &str) -> Result<RationalMatrix, FormatError> {
    RationalMatrix::new(rows).map_err(|source| FormatError::Invalid {
        context: context.to_string(),
        source,
    })
}

pub fn parse_matrix_json(text: &str, context: &str) -> Result<RationalMatrix, FormatError> {
    validate(parse_grid_json(text, context)?, context)
}

/// One row per record, cells in the rational syntax; `#` starts a comment line.
pub fn parse_grid_csv(text: &str, context: &str) -> Result<Vec<Vec<Rational>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(context, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| parse_rat(cell, &format!("{context}: line {line}, column {}", j + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_matrix_csv(text: &str, context: &str) -> Result<RationalMatrix, FormatError> {
    validate(parse_grid_csv(text, context)?, context)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Loads and validates a doubly stochastic matrix; `.csv` selects the CSV reader.
pub fn load_matrix(path: &Path) -> Result<RationalMatrix, FormatError> {
    let text = read(path)?;
    let context = path.display().to_string();
    if is_csv(path) {
        parse_matrix_csv(&text, &context)
    } else {
        parse_matrix_json(&text, &context)
    }
}

/// Loads a symmetric rational matrix in either layout.
pub fn load_symmetric(path: &Path) -> Result<SymmetricForm, FormatError> {
    let text = read(path)?;
    let context = path.display().to_string();
    let rows = if is_csv(path) {
        parse_grid_csv(&text, &context)?
    } else {
        parse_grid_json(&text, &context)?
    };
    SymmetricForm::new(rows).map_err(|e| parse_err(&context, e))
}

pub fn grid_json(rows: &[Vec<Rational>]) -> Value {
    json!({
        "schema": SCHEMA,
        "n": rows.len(),
        "entries": rows.iter().map(|r| rats(r)).collect::<Vec<_>>(),
    })
}

pub fn matrix_json(m: &RationalMatrix) -> Value {
    grid_json(&m.rows())
}

pub fn matrix_csv(m: &RationalMatrix) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in m.rows() {
        writer
            .write_record(row.iter().map(render))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing memory")).expect("rationals are ASCII")
}

pub fn save_matrix(m: &RationalMatrix, path: &Path) -> Result<(), FormatError> {
    let text = if is_csv(path) {
        matrix_csv(m)
    } else {
        serde_json::to_string_pretty(&matrix_json(m)).expect("serializable") + "\n"
    };
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn set_json(s: PermSet) -> Value {
    Value::Array(s.members().iter().map(|p| Value::String(p.to_string())).collect())
}

fn set_from_value(v: &Value, context: &str) -> Result<PermSet, FormatError> {
    let items = v
        .as_array()
        .ok_or_else(|| parse_err(context, "a set is a JSON array of permutation strings"))?;
    let mut s = PermSet::empty();
    for item in items {
        let text = item
            .as_str()
            .ok_or_else(|| parse_err(context, "set members must be strings"))?;
        let p = text.parse().map_err(|e| parse_err(context, e))?;
        s.insert(&p).map_err(|e| parse_err(context, e))?;
    }
    Ok(s)
}

/// Reads a set from a literal (`"1234,2143"` or a JSON array) or from a file holding one.
pub fn load_set(arg: &str) -> Result<PermSet, FormatError> {
    let path = Path::new(arg);
    let (text, context) = if !arg.trim_start().starts_with(['[', '{']) && path.is_file() {
        (read(path)?, path.display().to_string())
    } else {
        (arg.to_string(), "set literal".to_string())
    };
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        let v: Value = serde_json::from_str(trimmed).map_err(|e| parse_err(&context, e))?;
        return set_from_value(&v, &context);
    }
    trimmed.parse().map_err(|e| parse_err(&context, e))
}

fn vector_json(v: &FlagVector) -> Value {
    Value::Array(
        v.terms()
            .map(|(f, c)| json!({"flag": f.to_string(), "coef": render(c)}))
            .collect(),
    )
}

pub fn certificate_json(c: &Certificate) -> Value {
    json!({
        "schema": SCHEMA,
        "name": c.name,
        "S": set_json(c.set),
        "constant": render(&c.constant),
        "direction": c.direction.symbol(),
        "M": c.m.rows().iter().map(|r| rats(r)).collect::<Vec<_>>(),
        "w1": c.w1.iter().map(vector_json).collect::<Vec<_>>(),
        "w2": c.w2.iter().map(vector_json).collect::<Vec<_>>(),
        "expected_scale": render(&c.expected_scale),
    })
}

#[derive(Debug, Deserialize)]
struct TermDoc {
    flag: String,
    coef: String,
}

#[derive(Debug, Deserialize)]
struct CertificateDoc {
    #[serde(default)]
    schema: Option<String>,
    name: String,
    #[serde(rename = "S")]
    set: Value,
    constant: String,
    direction: String,
    #[serde(rename = "M")]
    m: Vec<Vec<String>>,
    w1: Vec<Vec<TermDoc>>,
    w2: Vec<Vec<TermDoc>>,
    expected_scale: String,
}

fn vector_from_doc(terms: &[TermDoc], t: FlagType, context: &str) -> Result<FlagVector, FormatError> {
    let mut v = FlagVector::zero(t);
    for term in terms {
        let flag = RootedPermutation::parse_typed(&term.flag, Some(t))
            .map_err(|e| parse_err(context, format!("flag `{}`: {e}", term.flag)))?;
        let coef = parse_rat(&term.coef, context)?;
        v.add_term(flag, coef).map_err(|e| parse_err(context, e))?;
    }
    Ok(v)
}

pub fn parse_certificate(text: &str, context: &str) -> Result<Certificate, FormatError> {
    let doc: CertificateDoc = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
    check_schema(doc.schema.as_deref(), context)?;
    let direction = Direction::from_symbol(&doc.direction)
        .ok_or_else(|| parse_err(context, format!("direction `{}` is not >= or <=", doc.direction)))?;
    let m = SymmetricForm::new(parse_grid(&doc.m, &format!("{context}: M"))?)
        .map_err(|e| parse_err(context, e))?;
    let w1 = doc
        .w1
        .iter()
        .map(|t| vector_from_doc(t, FlagType::Tau1, context))
        .collect::<Result<_, _>>()?;
    let w2 = doc
        .w2
        .iter()
        .map(|t| vector_from_doc(t, FlagType::Tau2, context))
        .collect::<Result<_, _>>()?;
    Ok(Certificate {
        name: doc.name,
        set: set_from_value(&doc.set, context)?,
        constant: parse_rat(&doc.constant, context)?,
        direction,
        m,
        w1,
        w2,
        expected_scale: parse_rat(&doc.expected_scale, context)?,
    })
}

pub fn load_certificate(path: &Path) -> Result<Certificate, FormatError> {
    parse_certificate(&read(path)?, &path.display().to_string())
}

/// A stored pair of step permutons on opposite sides of `|S|/24`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessFile {
    pub set: PermSet,
    pub seed: u64,
    pub low: RationalMatrix,
    pub high: RationalMatrix,
    pub low_source: String,
    pub high_source: String,
}

pub fn witness_json(w: &WitnessFile) -> Value {
    json!({
        "schema": SCHEMA,
        "set": set_json(w.set),
        "seed": w.seed,
        "low": matrix_json(&w.low),
        "high": matrix_json(&w.high),
        "low_source": w.low_source,
        "high_source": w.high_source,
    })
}

pub fn parse_witness(text: &str, context: &str) -> Result<WitnessFile, FormatError> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
    check_schema(v.get("schema").and_then(Value::as_str), context)?;
    let field = |name: &str| {
        v.get(name)
            .ok_or_else(|| parse_err(context, format!("missing `{name}`")))
    };
    let matrix = |name: &str| -> Result<RationalMatrix, FormatError> {
        let text = field(name)?.to_string();
        parse_matrix_json(&text, &format!("{context}: {name}"))
    };
    let text_field = |name: &str| -> Result<String, FormatError> {
        Ok(field(name)?.as_str().unwrap_or_default().to_string())
    };
    Ok(WitnessFile {
        set: set_from_value(field("set")?, context)?,
        seed: field("seed")?
            .as_u64()
            .ok_or_else(|| parse_err(context, "`seed` must be a nonnegative integer"))?,
        low: matrix("low")?,
        high: matrix("high")?,
        low_source: text_field("low_source")?,
        high_source: text_field("high_source")?,
    })
}

pub fn load_witness(path: &Path) -> Result<WitnessFile, FormatError> {
    parse_witness(&read(path)?, &path.display().to_string())
}

pub fn save_witness(w: &WitnessFile, path: &Path) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(&witness_json(w)).expect("serializable") + "\n";
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}
