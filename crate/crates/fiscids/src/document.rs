//! JSON system documents.
//!
//! ```text
//! { "version": 1, "n": .., "m": .., "N": .., "class": "quadratic",
//!   "input_names": [..], "state_names": [..],
//!   "F": [[entry; n]; N], "h": [entry; m], "z0": ["log(2)", ..],
//!   "base_point": ["0", ..] }
//! ```
//!
//! A polynomial entry is a list of `{"coeff": "p/q", "exponents": [..]}`
//! terms, a rational entry is `{"num": poly, "den": poly}`. Constants are
//! printed expressions without free variables.

use fiscids_core::expr::{parse, ExprError};
use fiscids_core::model::ModelError;
use fiscids_core::{Class, Entry, Expr, FiscidsSystem, Monomial, Output, Poly, Rational, RationalFn};
use serde_json::{json, Map, Value};

pub const VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schema error at {path}: {message}")]
pub struct SchemaError {
    /// JSON pointer to the offending value.
    pub path: String,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{0} systems cannot be serialized")]
    NotSerializable(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn schema(path: &str, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.to_string(),
        message: message.into(),
    }
}

fn encode_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn encode_poly(p: &Poly) -> Value {
    Value::Array(
        p.terms()
            .map(|(m, c)| json!({ "coeff": encode_rational(c), "exponents": m.exponents() }))
            .collect(),
    )
}

fn encode_entry(e: &Entry, sys: &FiscidsSystem) -> Result<Value, DocumentError> {
    let r = match e {
        Entry::Poly(p) => return Ok(encode_poly(p)),
        Entry::Rational(r) => r.clone(),
        Entry::Expr(x) => e
            .to_rational(sys.states())
            .ok_or_else(|| DocumentError::NotSerializable(format!("entry `{}` of non-rational", x)))?,
    };
    Ok(match r.to_poly() {
        Some(p) => encode_poly(&p),
        None => json!({ "num": encode_poly(r.num()), "den": encode_poly(r.den()) }),
    })
}

/// The document for `sys` as a JSON value.
pub fn to_value(sys: &FiscidsSystem) -> Result<Value, DocumentError> {
    if sys.class() == Class::General {
        return Err(DocumentError::NotSerializable(String::from("general")));
    }
    let h = sys
        .h()
        .entries()
        .ok_or_else(|| DocumentError::NotSerializable(String::from("opaque-output")))?;
    let f = sys
        .f()
        .iter()
        .map(|row| row.iter().map(|e| encode_entry(e, sys)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let h = h.iter().map(|e| encode_entry(e, sys)).collect::<Result<Vec<_>, _>>()?;
    let strings = |es: &[Expr]| es.iter().map(|e| Value::String(e.to_string())).collect::<Vec<_>>();
    Ok(json!({
        "version": VERSION,
        "n": sys.n(),
        "m": sys.m(),
        "N": sys.big_n(),
        "class": sys.class().name(),
        "input_names": sys.input_names(),
        "state_names": sys.state_names(),
        "F": f,
        "h": h,
        "z0": strings(sys.z0()),
        "base_point": strings(sys.base_point()),
    }))
}

/// Pretty-printed document with a trailing newline.
pub fn to_string(sys: &FiscidsSystem) -> Result<String, DocumentError> {
    let mut s = serde_json::to_string_pretty(&to_value(sys)?)?;
    s.push('\n');
    Ok(s)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, SchemaError> {
    obj.get(key)
        .ok_or_else(|| schema(&format!("/{}", key), "missing field"))
}

fn count(obj: &Map<String, Value>, key: &str) -> Result<usize, SchemaError> {
    field(obj, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| schema(&format!("/{}", key), "expected a non-negative integer"))
}

fn array<'a>(v: &'a Value, path: &str, len: Option<usize>) -> Result<&'a [Value], SchemaError> {
    let a = v.as_array().ok_or_else(|| schema(path, "expected an array"))?;
    match len {
        Some(n) if a.len() != n => Err(schema(path, format!("expected {} elements, found {}", n, a.len()))),
        _ => Ok(a),
    }
}

fn strings(v: &Value, path: &str, len: usize) -> Result<Vec<String>, SchemaError> {
    array(v, path, Some(len))?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| schema(&format!("{}/{}", path, i), "expected a string"))
        })
        .collect()
}

fn constants(v: &Value, path: &str, len: usize) -> Result<Vec<Expr>, SchemaError> {
    strings(v, path, len)?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse(s, &[])
                .map(|e| e.fold())
                .map_err(|e: ExprError| schema(&format!("{}/{}", path, i), e.to_string()))
        })
        .collect()
}

fn decode_poly(v: &Value, path: &str, nvars: usize) -> Result<Poly, SchemaError> {
    let mut terms = Vec::new();
    for (i, t) in array(v, path, None)?.iter().enumerate() {
        let tp = format!("{}/{}", path, i);
        let obj = t.as_object().ok_or_else(|| schema(&tp, "expected a term object"))?;
        let coeff = obj
            .get("coeff")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(&format!("{}/coeff", tp), "expected a \"p/q\" string"))?;
        let c: Rational = coeff
            .parse()
            .map_err(|_| schema(&format!("{}/coeff", tp), format!("bad rational `{}`", coeff)))?;
        let ep = format!("{}/exponents", tp);
        let exps = array(obj.get("exponents").unwrap_or(&Value::Null), &ep, Some(nvars))?
            .iter()
            .map(|e| e.as_u64().and_then(|e| u32::try_from(e).ok()))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| schema(&ep, "expected non-negative integers"))?;
        terms.push((c, Monomial::from_exponents(exps)));
    }
    Poly::from_terms(nvars, terms).map_err(|e| schema(path, e.to_string()))
}

fn decode_entry(v: &Value, path: &str, nvars: usize) -> Result<Entry, SchemaError> {
    match v {
        Value::Array(_) => Ok(Entry::Poly(decode_poly(v, path, nvars)?)),
        Value::Object(obj) => {
            let part = |key: &str| {
                let p = format!("{}/{}", path, key);
                decode_poly(obj.get(key).ok_or_else(|| schema(&p, "missing field"))?, &p, nvars)
            };
            let r = RationalFn::new(part("num")?, part("den")?)
                .map_err(|e| schema(&format!("{}/den", path), e.to_string()))?;
            Ok(Entry::from_rational(r))
        }
        _ => Err(schema(path, "expected a polynomial or {num, den}")),
    }
}

/// Reads a system from a JSON value.
pub fn from_value(doc: &Value) -> Result<FiscidsSystem, DocumentError> {
    let obj = doc.as_object().ok_or_else(|| schema("", "expected an object"))?;
    let version = field(obj, "version")?;
    if version.as_u64() != Some(VERSION) {
        return Err(schema("/version", format!("unsupported version {}", version)).into());
    }
    let (n, m, big_n) = (count(obj, "n")?, count(obj, "m")?, count(obj, "N")?);
    let class_name = field(obj, "class")?.as_str().unwrap_or("");
    let class = Class::from_name(class_name)
        .filter(|c| *c != Class::General)
        .ok_or_else(|| {
            schema(
                "/class",
                format!("expected rational, polynomial or quadratic, found `{}`", class_name),
            )
        })?;
    let input_names = strings(field(obj, "input_names")?, "/input_names", n)?;
    let state_names = strings(field(obj, "state_names")?, "/state_names", big_n)?;
    let mut f = Vec::with_capacity(big_n);
    for (k, row) in array(field(obj, "F")?, "/F", Some(big_n))?.iter().enumerate() {
        let rp = format!("/F/{}", k);
        f.push(
            array(row, &rp, Some(n))?
                .iter()
                .enumerate()
                .map(|(j, e)| decode_entry(e, &format!("{}/{}", rp, j), big_n))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let h = array(field(obj, "h")?, "/h", Some(m))?
        .iter()
        .enumerate()
        .map(|(i, e)| decode_entry(e, &format!("/h/{}", i), big_n))
        .collect::<Result<Vec<_>, _>>()?;
    let z0 = constants(field(obj, "z0")?, "/z0", big_n)?;
    let base = match obj.get("base_point") {
        None => Vec::new(),
        Some(v) => constants(v, "/base_point", n)?,
    };
    Ok(FiscidsSystem::new(
        f,
        Output::Entries(h),
        z0,
        base,
        class,
        state_names,
        input_names,
    )?)
}

pub fn from_str(text: &str) -> Result<FiscidsSystem, DocumentError> {
    from_value(&serde_json::from_str(text)?)
}
