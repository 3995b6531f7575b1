use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use oklim_core::EwaldParameters;
use serde_json::{json, Map, Number, Value};

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}"))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Field text for CSV cells, same precision as JSON.
pub fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

pub struct Manifest {
    command: &'static str,
    parameters: Value,
    ewald: EwaldParameters,
    started: Instant,
}

impl Manifest {
    pub fn new(command: &'static str, parameters: Value, ewald: EwaldParameters) -> Self {
        Self {
            command,
            parameters,
            ewald,
            started: Instant::now(),
        }
    }

    pub fn to_value(&self) -> Value {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("parameters".into(), self.parameters.clone());
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert(
            "ewald".into(),
            json!({
                "alpha": num(self.ewald.alpha),
                "real_cutoff": self.ewald.real_cutoff,
                "fourier_cutoff": self.ewald.fourier_cutoff,
            }),
        );
        m.insert("timestamp".into(), json!(timestamp));
        m.insert(
            "wall_time".into(),
            num(self.started.elapsed().as_secs_f64()),
        );
        Value::Object(m)
    }
}

/// Writes to `out` or stdout.
pub fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// CSV text preceded by `#`-prefixed JSON header lines.
pub fn csv_with_header(
    header: &[(&str, Value)],
    columns: &[&str],
    rows: &[Vec<String>],
) -> io::Result<String> {
    let mut text = String::new();
    for (key, value) in header {
        text.push_str(&format!("# {key}: {value}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    text.push_str(&String::from_utf8_lossy(&body));
    Ok(text)
}
