//! JSON form of an MPS.
//!
//! ```text
//! { "d": 3, "D": 2,
//!   "translation_invariant": true,            // or "N": <bulk sites>
//!   "boundary": { "type": "open", "left": [[[re, im], ...], ...], "right": [...] },
//!   "tensors": [ [[[re, im], ...], ...], ... ] }   // [s][row][col], or [k][s][row][col] with "N"
//! ```
//!
//! `boundary.type` is `"periodic"` (no vectors) or `"open"`. `left` and
//! `right` list one length-D vector per end-site state.

use std::path::Path;

use serde_json::{json, Value};

use super::{MatrixProductState, MpsBoundary, Tensors};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

fn parse_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Parse { field: field.into(), msg: msg.into() }
}

fn schema_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), msg: msg.into() }
}

fn array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(field, "expected an array"))
}

fn complex(v: &Value, field: &str) -> Result<C64> {
    let p = v.as_array().filter(|p| p.len() == 2);
    match p.map(|p| (p[0].as_f64(), p[1].as_f64())) {
        Some((Some(re), Some(im))) if re.is_finite() && im.is_finite() => Ok(C64::new(re, im)),
        _ => Err(parse_err(field, "expected [re, im] with finite numbers")),
    }
}

fn usize_field(root: &Value, name: &str) -> Result<usize> {
    match root.get(name) {
        None => Err(schema_err(name, "missing")),
        Some(v) => v.as_u64().filter(|&x| x > 0).map(|x| x as usize).ok_or_else(|| parse_err(name, "expected a positive integer")),
    }
}

fn vector(v: &Value, field: &str, len: usize) -> Result<CVec> {
    let a = array(v, field)?;
    if a.len() != len {
        return Err(schema_err(field, format!("expected length {len}, found {}", a.len())));
    }
    let z = a.iter().enumerate().map(|(k, x)| complex(x, &format!("{field}[{k}]"))).collect::<Result<Vec<_>>>()?;
    Ok(CVec::from_vec(z))
}

fn matrix(v: &Value, field: &str, bond: usize) -> Result<CMat> {
    let rows = array(v, field)?;
    if rows.len() != bond {
        return Err(schema_err(field, format!("expected {bond} rows, found {}", rows.len())));
    }
    let mut m = CMat::zeros(bond, bond);
    for (r, row) in rows.iter().enumerate() {
        let f = format!("{field}[{r}]");
        let cols = array(row, &f)?;
        if cols.len() != bond {
            return Err(schema_err(&f, format!("expected {bond} columns, found {}", cols.len())));
        }
        for (c, x) in cols.iter().enumerate() {
            m[(r, c)] = complex(x, &format!("{f}[{c}]"))?;
        }
    }
    Ok(m)
}

fn site(v: &Value, field: &str, d: usize, bond: usize) -> Result<Vec<CMat>> {
    let mats = array(v, field)?;
    if mats.len() != d {
        return Err(schema_err(field, format!("expected {d} matrices, found {}", mats.len())));
    }
    mats.iter().enumerate().map(|(s, m)| matrix(m, &format!("{field}[{s}]"), bond)).collect()
}

fn end_vectors(b: &Value, name: &str, bond: usize) -> Result<Vec<CVec>> {
    let field = format!("boundary.{name}");
    let v = b.get(name).ok_or_else(|| schema_err(&field, "missing"))?;
    let vs = array(v, &field)?;
    if vs.is_empty() {
        return Err(schema_err(&field, "need at least one end vector"));
    }
    vs.iter().enumerate().map(|(k, x)| vector(x, &format!("{field}[{k}]"), bond)).collect()
}

/// Parse and validate an MPS from JSON text.
pub fn ingest_mps_str(text: &str) -> Result<MatrixProductState> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err(&format!("line {}", e.line()), e.to_string()))?;
    if !root.is_object() {
        return Err(parse_err("<root>", "expected an object"));
    }
    let d = usize_field(&root, "d")?;
    let bond = usize_field(&root, "D")?;
    let ti = root.get("translation_invariant").map(|v| v.as_bool().ok_or_else(|| parse_err("translation_invariant", "expected a boolean"))).transpose()?.unwrap_or(false);
    let n = root.get("N").map(|_| usize_field(&root, "N")).transpose()?;
    let tv = root.get("tensors").ok_or_else(|| schema_err("tensors", "missing"))?;
    let tensors = match (ti, n) {
        (true, None) => Tensors::Uniform(site(tv, "tensors", d, bond)?),
        (false, Some(n)) => {
            let sites = array(tv, "tensors")?;
            if sites.len() != n {
                return Err(schema_err("tensors", format!("expected {n} sites, found {}", sites.len())));
            }
            Tensors::Sites(sites.iter().enumerate().map(|(k, s)| site(s, &format!("tensors[{k}]"), d, bond)).collect::<Result<_>>()?)
        }
        (true, Some(_)) => return Err(schema_err("N", "give either N or translation_invariant, not both")),
        (false, None) => return Err(schema_err("N", "missing (or set translation_invariant)")),
    };
    let b = root.get("boundary").ok_or_else(|| schema_err("boundary", "missing"))?;
    let kind = b.get("type").and_then(Value::as_str).ok_or_else(|| parse_err("boundary.type", "expected a string"))?;
    let boundary = match kind {
        "periodic" => MpsBoundary::Periodic,
        "open" => MpsBoundary::Open { left: end_vectors(b, "left", bond)?, right: end_vectors(b, "right", bond)? },
        other => return Err(schema_err("boundary.type", format!("unknown boundary '{other}'"))),
    };
    MatrixProductState::new(tensors, boundary)
}

pub fn ingest_mps(path: impl AsRef<Path>) -> Result<MatrixProductState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(&path.display().to_string(), e.to_string()))?;
    ingest_mps_str(&text)
}

fn c_json(z: &C64) -> Value {
    json!([z.re, z.im])
}

fn mat_json(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|r| Value::Array((0..m.ncols()).map(|c| c_json(&m[(r, c)])).collect())).collect())
}

fn site_json(mats: &[CMat]) -> Value {
    Value::Array(mats.iter().map(mat_json).collect())
}

fn vecs_json(vs: &[CVec]) -> Value {
    Value::Array(vs.iter().map(|v| Value::Array(v.iter().map(c_json).collect())).collect())
}

pub fn mps_to_json(mps: &MatrixProductState) -> Value {
    let mut root = serde_json::Map::new();
    root.insert("d".into(), json!(mps.d()));
    root.insert("D".into(), json!(mps.bond_dim()));
    match mps.tensors() {
        Tensors::Uniform(a) => {
            root.insert("translation_invariant".into(), json!(true));
            root.insert("tensors".into(), site_json(a));
        }
        Tensors::Sites(s) => {
            root.insert("N".into(), json!(s.len()));
            root.insert("tensors".into(), Value::Array(s.iter().map(|x| site_json(x)).collect()));
        }
    }
    let boundary = match mps.boundary() {
        MpsBoundary::Periodic => json!({"type": "periodic"}),
        MpsBoundary::Open { left, right } => json!({"type": "open", "left": vecs_json(left), "right": vecs_json(right)}),
    };
    root.insert("boundary".into(), boundary);
    Value::Object(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{mps_named, MpsFamily};

    #[test]
    fn named_families_round_trip() {
        for fam in [MpsFamily::Aklt, MpsFamily::CounterexampleC, MpsFamily::Ghz] {
            let m = mps_named(fam);
            let text = serde_json::to_string_pretty(&mps_to_json(&m)).unwrap();
            assert_eq!(ingest_mps_str(&text).unwrap(), m);
        }
    }

    #[test]
    fn malformed_entry_names_field() {
        let mut v = mps_to_json(&mps_named(MpsFamily::Aklt));
        v["tensors"][1][0][1] = json!([0.0, "x"]);
        match ingest_mps_str(&v.to_string()) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "tensors[1][0][1]"),
            other => panic!("{other:?}"),
        }
        v["tensors"][1][0] = json!(3);
        assert!(matches!(ingest_mps_str(&v.to_string()), Err(Error::Parse { field, .. }) if field == "tensors[1][0]"));
        assert!(matches!(ingest_mps_str("{\"d\": 2,"), Err(Error::Parse { .. })));
    }

    #[test]
    fn bond_mismatch_between_sites() {
        let m = mps_named(MpsFamily::CounterexampleC);
        let sites = Tensors::Sites(vec![m.bulk(0).to_vec(), m.bulk(0).to_vec()]);
        let two = MatrixProductState::new(sites, m.boundary().clone()).unwrap();
        let mut v = mps_to_json(&two);
        v["tensors"][1][0] = json!([[[1.0, 0.0]]]);
        assert!(matches!(ingest_mps_str(&v.to_string()), Err(Error::Schema { .. })));
    }
}
