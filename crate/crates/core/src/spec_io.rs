//! JSON files for group specs, single matrices and line families.
//!
//! Complex numbers are `[re, im]` pairs; a bare number is read as real.
//! Matrices are 9 entries in row-major order, or 3 rows of 3.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::GroupSpec;
use crate::error::{KlabError, Result};
use crate::group::GroupElement;
use crate::linalg::{c, Complex3, Matrix3, C64};
use crate::proj::ProjLine;

#[derive(Serialize, Deserialize)]
struct SpecFile {
    name: String,
    generators: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Ok(c(re, im)),
            _ => Err(bad("complex entry must be [re, im] numbers")),
        },
        _ => Err(bad("complex entry must be a number or [re, im]")),
    }
}

fn bad(msg: impl Into<String>) -> KlabError {
    KlabError::InvalidInput(msg.into())
}

fn finite(z: C64) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad("non-finite entry"))
    }
}

/// Reads a matrix given flat (9 entries) or as 3 rows of 3.
pub fn matrix_from_value(v: &Value) -> Result<Matrix3> {
    let Value::Array(a) = v else {
        return Err(bad("matrix must be an array"));
    };
    let entries: Vec<C64> = if a.len() == 9 {
        a.iter()
            .map(|x| complex(x).and_then(finite))
            .collect::<Result<_>>()?
    } else if a.len() == 3 {
        let mut out = Vec::with_capacity(9);
        for row in a {
            match row {
                Value::Array(r) if r.len() == 3 => {
                    for x in r {
                        out.push(finite(complex(x)?)?);
                    }
                }
                _ => return Err(bad("matrix rows must have 3 entries")),
            }
        }
        out
    } else {
        return Err(bad(format!(
            "matrix must have 9 entries or 3 rows, got {}",
            a.len()
        )));
    };
    let e: [C64; 9] = entries.try_into().expect("length checked");
    Ok(Matrix3::from_entries(&e))
}

pub fn matrix_to_value(m: &Matrix3) -> Value {
    serde_json::to_value(m.entries().map(pair)).expect("plain numbers serialize")
}

/// A single matrix, either bare or as `{"matrix": ...}`.
pub fn parse_matrix(text: &str) -> Result<Matrix3> {
    let v: Value = serde_json::from_str(text)?;
    match &v {
        Value::Object(o) => {
            matrix_from_value(o.get("matrix").ok_or_else(|| bad("missing \"matrix\""))?)
        }
        _ => matrix_from_value(&v),
    }
}

pub fn parse_group(text: &str) -> Result<GroupSpec> {
    let v: Value = serde_json::from_str(text)?;
    let Value::Object(o) = &v else {
        return Err(bad("group spec must be an object"));
    };
    let name = o
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("group spec needs a string \"name\""))?;
    let gens = o
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("group spec needs a \"generators\" array"))?;
    let generators = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let m = matrix_from_value(g).map_err(|e| bad(format!("generator {i}: {e}")))?;
            GroupElement::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = match o.get("metadata") {
        None | Some(Value::Null) => BTreeMap::new(),
        Some(Value::Object(m)) => m
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), s)
            })
            .collect(),
        Some(_) => return Err(bad("\"metadata\" must be an object")),
    };
    let mut spec = GroupSpec::new(name, generators)?;
    spec.metadata = metadata;
    Ok(spec)
}

pub fn group_to_json(spec: &GroupSpec) -> String {
    let file = SpecFile {
        name: spec.name.clone(),
        generators: spec
            .generators
            .iter()
            .map(|g| g.lift().entries().iter().map(|z| pair(*z)).collect())
            .collect(),
        metadata: spec.metadata.clone(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn read_group(path: &Path) -> Result<GroupSpec> {
    parse_group(&std::fs::read_to_string(path)?)
}

pub fn write_group(spec: &GroupSpec, path: &Path) -> Result<()> {
    std::fs::write(path, group_to_json(spec) + "\n")?;
    Ok(())
}

/// Lines given by dual vectors: an array of triples, or an object with a
/// `"lines"` array (as in a report).
pub fn parse_lines(text: &str) -> Result<Vec<ProjLine>> {
    let v: Value = serde_json::from_str(text)?;
    let arr = match &v {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("lines")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("expected an array of lines or an object with \"lines\""))?,
        _ => return Err(bad("expected an array of lines")),
    };
    arr.iter()
        .enumerate()
        .map(|(i, l)| {
            let l = match l {
                Value::Object(o) => o.get("dual").unwrap_or(l),
                _ => l,
            };
            let Value::Array(t) = l else {
                return Err(bad(format!("line {i} must be a triple")));
            };
            if t.len() != 3 {
                return Err(bad(format!("line {i} must have 3 coordinates")));
            }
            let z = [complex(&t[0])?, complex(&t[1])?, complex(&t[2])?];
            ProjLine::from_dual(Complex3(z)).map_err(|e| bad(format!("line {i}: {e}")))
        })
        .collect()
}

/// Whether a file looks like a group spec rather than a line family.
pub fn is_group_json(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .ok()
        .and_then(|v| v.get("generators").map(|_| ()))
        .is_some()
}
