//! Number formatting, manifests and error reporting shared by all commands.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use hypgaf::error::ErrorKind;
use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_RESOURCE: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Lib(hypgaf::Error),
    /// A numeric-reliability failure whose payload is already on stdout.
    Reported(String),
}

impl From<hypgaf::Error> for CliError {
    fn from(e: hypgaf::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Reported(_) => EXIT_NUMERIC,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Resource => EXIT_RESOURCE,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_IO => "io",
            EXIT_RESOURCE => "resource",
            _ => "numeric",
        };
        let mut obj = Map::new();
        obj.insert("kind".into(), kind.into());
        obj.insert("exit_code".into(), self.exit_code().into());
        let message = match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Reported(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        };
        obj.insert("message".into(), message.into());
        if let CliError::Lib(hypgaf::Error::UnreliableContour { min_modulus, threshold }) = self {
            let mut d = Map::new();
            d.insert("min_modulus".into(), num(*min_modulus));
            d.insert("threshold".into(), num(*threshold));
            obj.insert("diagnostics".into(), Value::Object(d));
        }
        let mut root = Map::new();
        root.insert("error".into(), Value::Object(obj));
        Value::Object(root)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// 17 significant digits; non-finite values become the strings used by Rust's
/// float parser so that CSV columns stay numeric-parsable.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number with 17 significant digits, `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<Number>(&fmt17(x)).map(Value::Number).unwrap_or(Value::Null)
}

/// Re-renders every floating-point number in `v` with 17 significant digits.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                s.parse::<f64>().map(num).unwrap_or(Value::Number(n))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(x: &T) -> Value {
    normalize(serde_json::to_value(x).unwrap_or(Value::Null))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Value>,
}

impl RunManifest {
    pub fn start<P: Serialize>(command: &str, params: &P, seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            params: to_json(params),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started: now(),
            finished: String::new(),
            results: None,
        }
    }

    pub fn finish(mut self, results: Option<Value>) -> Value {
        self.finished = now();
        self.results = results;
        to_json(&self)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_json_file(path: &Path, v: &Value) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, v).map_err(|e| CliError::io(path, e))?;
    writeln!(f).map_err(|e| CliError::io(path, e))
}

/// Writes a header plus rows as RFC 4180 CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}
