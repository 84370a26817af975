//! JSON interchange format.
//!
//! ```json
//! { "name": "cst_left", "voxel_size": [2, 2, 2],
//!   "streamlines": [ [[0, 0, 0], [1, 0, 0]], [[0, 1, 0]] ] }
//! ```
//!
//! `name` and `voxel_size` are optional. Numbers are written in their
//! shortest round-tripping form, so every `f64` survives a write/read cycle
//! exactly.

use serde_json::{json, Map, Value};
use tractmap_core::{Point3, Streamline, Tractography};

use crate::error::{Error, Result};

fn number(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| Error::json(path, format!("expected a number, found {}", kind(v))))?;
    if !x.is_finite() {
        return Err(Error::json(path, "number is not finite"));
    }
    Ok(x)
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::json(path, format!("expected an array, found {}", kind(v))))
}

fn point(v: &Value, path: &str) -> Result<Point3> {
    let items = array(v, path)?;
    if items.len() != 3 {
        return Err(Error::json(
            path,
            format!("expected 3 coordinates, found {}", items.len()),
        ));
    }
    Ok(Point3::new(
        number(&items[0], &format!("{path}[0]"))?,
        number(&items[1], &format!("{path}[1]"))?,
        number(&items[2], &format!("{path}[2]"))?,
    ))
}

/// Parses the JSON interchange format. Errors name the offending path, e.g.
/// `$.streamlines[3][0][2]`.
pub fn read_json(text: &str) -> Result<Tractography> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::json("$", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::json("$", format!("expected an object, found {}", kind(&root))))?;
    let raw = obj
        .get("streamlines")
        .ok_or_else(|| Error::json("$", "missing required key \"streamlines\""))?;
    let lines = array(raw, "$.streamlines")?;
    if lines.is_empty() {
        return Err(Error::json(
            "$.streamlines",
            "needs at least one streamline",
        ));
    }
    let mut streamlines = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let path = format!("$.streamlines[{i}]");
        let pts = array(line, &path)?;
        if pts.is_empty() {
            return Err(Error::json(path, "streamline has no points"));
        }
        let points = pts
            .iter()
            .enumerate()
            .map(|(k, p)| point(p, &format!("{path}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        streamlines.push(Streamline::new(points)?);
    }

    let mut t = Tractography::new(streamlines)?;
    if let Some(v) = obj.get("voxel_size").filter(|v| !v.is_null()) {
        let vs = point(v, "$.voxel_size")?;
        t = t
            .with_voxel_size(vs)
            .map_err(|e| Error::json("$.voxel_size", e.to_string()))?;
    }
    match obj.get("name") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => t = t.with_name(s.clone()),
        Some(other) => {
            return Err(Error::json(
                "$.name",
                format!("expected a string, found {}", kind(other)),
            ))
        }
    }
    Ok(t)
}

fn point_value(p: &Point3) -> Value {
    json!([p.x, p.y, p.z])
}

/// Serializes to the JSON interchange format (compact, one line).
pub fn write_json(t: &Tractography) -> String {
    let mut obj = Map::new();
    if let Some(name) = &t.name {
        obj.insert("name".into(), Value::String(name.clone()));
    }
    if let Some(v) = &t.voxel_size {
        obj.insert("voxel_size".into(), point_value(v));
    }
    let lines: Vec<Value> = t
        .streamlines()
        .iter()
        .map(|s| Value::Array(s.points().iter().map(point_value).collect()))
        .collect();
    obj.insert("streamlines".into(), Value::Array(lines));
    let mut out = Value::Object(obj).to_string();
    out.push('\n');
    out
}
