//! Run headers, reports and the exit-code contract.

use serde_json::{json, Map, Value};

use crate::io::IoError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input (exit 2).
    #[error("{0}")]
    Input(String),
    /// A well-posed request that has no answer: inadmissible target, point
    /// off the fiber, stalled flow, failed path (exit 1).
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<fiberframe_core::Error> for CliError {
    fn from(e: fiberframe_core::Error) -> Self {
        use fiberframe_core::Error as E;
        match e {
            E::NotAFrame { .. }
            | E::Inadmissible(_)
            | E::NotRegular(_)
            | E::ZeroColumn(_)
            | E::AmbiguousClustering { .. }
            | E::ConstructionFailed(_)
            | E::EndpointOffFiber { .. }
            | E::ConnectFailed { .. } => CliError::Failure(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Core(c) => c.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Version, command, seed and tolerances of one run.
#[derive(Clone, Debug)]
pub struct Header {
    pub command: &'static str,
    pub seed: u64,
    pub tolerances: Vec<(&'static str, f64)>,
}

impl Header {
    pub fn text(&self) -> String {
        let mut line = format!(
            "# fiberframe {} command={} seed={}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.seed
        );
        for (name, value) in &self.tolerances {
            line.push_str(&format!(" {name}={value:e}"));
        }
        line
    }

    pub fn json(&self) -> Value {
        let tol: Map<String, Value> = self.tolerances.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        json!({
            "tool": "fiberframe",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "tolerances": tol,
        })
    }
}

/// Ordered `key: value` findings of a command plus its exit code.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub fields: Vec<(String, Value)>,
    pub exit_code: i32,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn fail(&mut self) {
        self.exit_code = EXIT_FAILURE;
    }

    pub fn text(&self) -> String {
        self.fields
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}: {s}\n"),
                other => format!("{k}: {other}\n"),
            })
            .collect()
    }

    pub fn json(&self, header: &Header, error: Option<&CliError>) -> Value {
        let fields: Map<String, Value> = self.fields.iter().cloned().collect();
        let mut out = json!({
            "header": header.json(),
            "exit_code": error.map_or(self.exit_code, CliError::exit_code),
            "report": fields,
        });
        if let Some(e) = error {
            out["error"] = json!(e.to_string());
        }
        out
    }
}
