//! The JSON result document and exit-code protocol.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_POSITIVE: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_ZERO: u8 = 4;

/// Exit code for a sign decision; `None` means zero or undecided.
pub fn decision_code(positive: Option<bool>) -> u8 {
    match positive {
        Some(true) => EXIT_POSITIVE,
        Some(false) => EXIT_NEGATIVE,
        None => EXIT_ZERO,
    }
}

#[derive(Debug, Serialize)]
pub struct CommandResult {
    pub schema: String,
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    /// Wall-clock milliseconds per stage.
    pub timings: Value,
    pub passed: bool,
    pub summary: String,
    #[serde(skip)]
    pub exit_code: u8,
}

impl CommandResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

pub fn schema() -> String {
    format!("srw-result/{SCHEMA_VERSION}")
}

/// Collects stage timings.
pub struct Clock {
    start: Instant,
    last: Instant,
    stages: serde_json::Map<String, Value>,
}

impl Clock {
    pub fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            stages: serde_json::Map::new(),
        }
    }

    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let ms = (now - self.last).as_secs_f64() * 1e3;
        self.stages.insert(stage.into(), json!(ms));
        self.last = now;
    }

    pub fn finish(mut self) -> Value {
        let total = self.start.elapsed().as_secs_f64() * 1e3;
        self.stages.insert("total".into(), json!(total));
        Value::Object(self.stages)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RESOURCE,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&json!({
            "schema": schema(),
            "error": self.message,
            "exit_code": self.code,
        }))
        .expect("error serializes")
    }
}
