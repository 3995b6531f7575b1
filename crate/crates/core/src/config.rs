//! JSON form of point and ball configurations.
//!
//! ```json
//! {"dim": 2, "eta": 0.01, "particles": [{"mass": 1.0, "position": [0.0, 0.5]}]}
//! ```
//! `eta` is optional and only used for finite-η evaluations.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::limits::{Particle, PointConfiguration};
use crate::local::Mass;
use crate::sharp::BallConfiguration;
use crate::torus::{Dim, TorusPoint};

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigFile {
    pub points: PointConfiguration,
    pub eta: Option<f64>,
}

impl ConfigFile {
    pub fn balls(&self) -> Result<BallConfiguration> {
        let eta = self
            .eta
            .ok_or_else(|| schema("/eta", "required for finite-eta energies"))?;
        BallConfiguration::from_points(&self.points, eta)
    }
}

fn schema(pointer: &str, message: &str) -> Error {
    Error::Schema {
        pointer: pointer.to_string(),
        message: message.to_string(),
    }
}

fn number(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(pointer, "expected a finite number"))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| schema("", &format!("invalid JSON: {e}")))?;
    parse_value(&root)
}

pub fn parse_value(root: &Value) -> Result<ConfigFile> {
    let obj = root
        .as_object()
        .ok_or_else(|| schema("", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "dim" | "particles" | "eta") {
            return Err(schema(&format!("/{key}"), "unknown field"));
        }
    }
    let dim = match obj.get("dim").and_then(Value::as_u64) {
        Some(2) => Dim::Two,
        Some(3) => Dim::Three,
        Some(_) => return Err(schema("/dim", "must be 2 or 3")),
        None => return Err(schema("/dim", "required integer 2 or 3")),
    };
    let eta = match obj.get("eta") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let e = number(v, "/eta")?;
            if !(e > 0.0 && e <= crate::sharp::MAX_ETA) {
                return Err(schema("/eta", "must lie in (0, 0.25]"));
            }
            Some(e)
        }
    };
    let list = obj
        .get("particles")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("/particles", "required array"))?;
    if list.is_empty() {
        return Err(schema("/particles", "must not be empty"));
    }
    let mut particles = Vec::with_capacity(list.len());
    for (i, p) in list.iter().enumerate() {
        let base = format!("/particles/{i}");
        let po = p
            .as_object()
            .ok_or_else(|| schema(&base, "expected an object"))?;
        for key in po.keys() {
            if !matches!(key.as_str(), "mass" | "position") {
                return Err(schema(&format!("{base}/{key}"), "unknown field"));
            }
        }
        let mp = format!("{base}/mass");
        let m = number(po.get("mass").ok_or_else(|| schema(&mp, "required"))?, &mp)?;
        let mass = Mass::new(m).map_err(|_| schema(&mp, "must be positive"))?;
        let pp = format!("{base}/position");
        let coords = po
            .get("position")
            .and_then(Value::as_array)
            .ok_or_else(|| schema(&pp, "required array"))?;
        if coords.len() != dim.n() {
            return Err(schema(&pp, &format!("expected {} coordinates", dim.n())));
        }
        let x = coords
            .iter()
            .enumerate()
            .map(|(k, c)| number(c, &format!("{pp}/{k}")))
            .collect::<Result<Vec<_>>>()?;
        particles.push(Particle {
            mass,
            position: TorusPoint::new(dim, &x)?,
        });
    }
    Ok(ConfigFile {
        points: PointConfiguration::new(dim, particles)?,
        eta,
    })
}

/// JSON value for `points` with optional `eta`.
pub fn config_to_value(points: &PointConfiguration, eta: Option<f64>) -> Value {
    let particles: Vec<Value> = points
        .particles()
        .iter()
        .map(|p| json!({"mass": p.mass.get(), "position": p.position.coords()}))
        .collect();
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(points.dim().n()));
    if let Some(e) = eta {
        obj.insert("eta".into(), json!(e));
    }
    obj.insert("particles".into(), Value::Array(particles));
    Value::Object(obj)
}
