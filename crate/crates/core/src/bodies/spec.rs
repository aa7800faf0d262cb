//! JSON body specifications.
//!
//! ```text
//! {"type":"cube","dim":3}
//! {"type":"lp_ball","p":"inf","dim":4}
//! {"type":"ellipsoid","matrix":[[4,0],[0,1]]}
//! {"type":"polytope","vertices":[[1,0],[0,1]]}
//! {"op":"cap_p","p":2,"args":[{"type":"cube","dim":2},{"type":"cross","dim":2}]}
//! ```

use nalgebra::DMatrix;
use serde_json::Value;

use super::{Body, Ellipsoid, SymPolytope};
use crate::error::{Error, Result};
use crate::numkernel::SymMatrix;
use crate::ops::{self, PExponent};

/// Parses a body specification document.
pub fn parse_body_spec(text: &str) -> Result<Body> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Spec {
        path: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    body_from_value(&v)
}

/// Builds a body from an already parsed JSON value.
pub fn body_from_value(v: &Value) -> Result<Body> {
    build(v, "$")
}

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Spec {
        path: path.to_string(),
        message: message.into(),
    }
}

fn wrap(path: &str, e: Error) -> Error {
    match e {
        Error::Spec { .. } => e,
        other => err(path, other.to_string()),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(path, format!("missing field `{key}`")))
}

fn as_dim(v: &Value, path: &str) -> Result<usize> {
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(err(path, format!("expected a positive integer, got {v}"))),
    }
}

fn as_real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| err(path, format!("expected a number, got {v}")))
}

fn as_exponent(v: &Value, path: &str) -> Result<PExponent> {
    serde_json::from_value::<PExponent>(v.clone()).map_err(|e| err(path, e.to_string()))
}

fn as_rows(v: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| err(path, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(err(path, "empty list"));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let p = format!("{path}[{i}]");
            let entries = row
                .as_array()
                .ok_or_else(|| err(&p, "expected an array of numbers"))?;
            entries
                .iter()
                .enumerate()
                .map(|(j, x)| as_real(x, &format!("{p}[{j}]")))
                .collect()
        })
        .collect()
}

fn as_square(v: &Value, path: &str) -> Result<DMatrix<f64>> {
    let rows = as_rows(v, path)?;
    let n = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(err(
            &format!("{path}[{i}]"),
            format!("expected {n} entries for a square matrix"),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn build(v: &Value, path: &str) -> Result<Body> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    match (obj.get("type"), obj.get("op")) {
        (Some(t), None) => leaf(obj, t, path),
        (None, Some(op)) => composite(obj, op, path),
        (Some(_), Some(_)) => Err(err(path, "an entry has either `type` or `op`, not both")),
        (None, None) => Err(err(path, "missing `type` or `op`")),
    }
}

fn leaf(obj: &serde_json::Map<String, Value>, t: &Value, path: &str) -> Result<Body> {
    let kind = t
        .as_str()
        .ok_or_else(|| err(&format!("{path}.type"), "expected a string"))?;
    let dim = |p: &str| as_dim(field(obj, "dim", p)?, &format!("{p}.dim"));
    let body = match kind {
        "cube" => Body::cube(dim(path)?),
        "cross" => Body::cross(dim(path)?),
        "ball" => {
            let n = dim(path)?;
            let radius = match obj.get("radius") {
                Some(r) => as_real(r, &format!("{path}.radius"))?,
                None => 1.0,
            };
            Ellipsoid::ball(n, radius).map(Body::ellipsoid)
        }
        "lp_ball" => {
            let p = as_exponent(field(obj, "p", path)?, &format!("{path}.p"))?;
            Body::lp_ball(p, dim(path)?)
        }
        "ellipsoid" => {
            let mpath = format!("{path}.matrix");
            let rows = as_rows(field(obj, "matrix", path)?, &mpath)?;
            SymMatrix::from_rows(&rows)
                .and_then(Ellipsoid::new)
                .map(Body::ellipsoid)
                .map_err(|e| wrap(&mpath, e))
        }
        "polytope" => {
            let vertices = obj
                .get("vertices")
                .map(|v| as_rows(v, &format!("{path}.vertices")))
                .transpose()?;
            let facets = obj
                .get("facets")
                .map(|v| as_rows(v, &format!("{path}.facets")))
                .transpose()?;
            if vertices.is_none() && facets.is_none() {
                return Err(err(path, "polytope needs `vertices` or `facets`"));
            }
            SymPolytope::new(None, vertices, facets).map(Body::polytope)
        }
        other => {
            return Err(err(
                &format!("{path}.type"),
                format!("unknown body type `{other}`"),
            ))
        }
    };
    body.map_err(|e| wrap(path, e))
}

fn args(obj: &serde_json::Map<String, Value>, path: &str, count: usize) -> Result<Vec<Body>> {
    let apath = format!("{path}.args");
    let list = field(obj, "args", path)?
        .as_array()
        .ok_or_else(|| err(&apath, "expected an array"))?;
    if list.len() != count {
        return Err(err(
            &apath,
            format!("expected {count} argument(s), got {}", list.len()),
        ));
    }
    list.iter()
        .enumerate()
        .map(|(i, a)| build(a, &format!("{apath}[{i}]")))
        .collect()
}

fn composite(obj: &serde_json::Map<String, Value>, op: &Value, path: &str) -> Result<Body> {
    let name = op
        .as_str()
        .ok_or_else(|| err(&format!("{path}.op"), "expected a string"))?;
    let exponent = || as_exponent(field(obj, "p", path)?, &format!("{path}.p"));
    let body = match name {
        "polar" => Ok(ops::polar(&args(obj, path, 1)?[0])),
        "cap_p" | "sum_p" | "prod_p" => {
            let p = exponent()?;
            let ab = args(obj, path, 2)?;
            match name {
                "cap_p" => ops::cap_p(p, &ab[0], &ab[1]),
                "sum_p" => ops::sum_p(p, &ab[0], &ab[1]),
                _ => Ok(ops::prod_p(p, &ab[0], &ab[1])),
            }
        }
        "linmap" => {
            let t = as_square(field(obj, "matrix", path)?, &format!("{path}.matrix"))?;
            ops::linear_image(&t, &args(obj, path, 1)?[0])
        }
        "scale" => {
            let t = as_real(field(obj, "factor", path)?, &format!("{path}.factor"))?;
            ops::scale(t, &args(obj, path, 1)?[0])
        }
        other => {
            return Err(err(
                &format!("{path}.op"),
                format!("unknown operation `{other}`"),
            ))
        }
    };
    body.map_err(|e| wrap(path, e))
}
