use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::problem::ProblemSummary;
use crate::CliError;

pub const SCHEMA: &str = "oscidecay-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Certificate found or verdict positive.
    Positive,
    /// No certificate, or verdict negative.
    Negative,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Positive => 0,
            Status::Negative => 1,
        }
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Status::Positive
        } else {
            Status::Negative
        }
    }
}

/// Text for people plus a JSON block for machines.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub human: String,
    pub machine: Value,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema: &'static str,
    command: &'a str,
    status: Status,
    exit_code: i32,
    problem: &'a ProblemSummary,
    result: &'a R,
}

impl Report {
    pub fn new<R: Serialize>(
        command: &str,
        status: Status,
        problem: &ProblemSummary,
        result: &R,
        human: String,
    ) -> Self {
        let machine = serde_json::to_value(Envelope {
            schema: SCHEMA,
            command,
            status,
            exit_code: status.code(),
            problem,
            result,
        })
        .expect("report values serialize");
        Report {
            status,
            human,
            machine,
        }
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.machine).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.json()).map_err(|e| CliError::Write {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// One CSV row per lambda sample.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// Empty at the two ends of the grid.
    pub envelope: Option<f64>,
}

pub fn write_csv(path: &Path, rows: &[DecayRow]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    for r in rows {
        w.serialize(r).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}
