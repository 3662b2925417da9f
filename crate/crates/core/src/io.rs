//! File formats: instance and solution JSON, family cache files and run
//! reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{Color, ColorMap, Construction, HashFamily};
use crate::instance::{Instance, InstanceError, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {}", join(.0))]
    Validation(Vec<InstanceError>),
    #[error("malformed family cache at line {line}: {message}")]
    Cache { line: usize, message: String },
}

fn join(errors: &[InstanceError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Parses and validates an instance document. Unknown fields are rejected.
pub fn parse_instance(text: &[u8]) -> Result<Instance, IoError> {
    let inst: Instance = serde_json::from_slice(text)?;
    inst.validate().map_err(IoError::Validation)?;
    Ok(inst)
}

/// Canonical single-line form: sorted altruists and arcs, fixed key order.
pub fn emit_instance(inst: &Instance) -> String {
    serde_json::to_string(inst).expect("instances serialize")
}

pub fn parse_solution(text: &[u8]) -> Result<Solution, IoError> {
    Ok(serde_json::from_slice(text)?)
}

pub fn emit_solution(sol: &Solution) -> String {
    serde_json::to_string(sol).expect("solutions serialize")
}

/// Header line `n k`, then one coloring per line as space-separated colors.
pub fn write_family_cache(fam: &HashFamily) -> String {
    let mut out = format!("{} {}\n", fam.universe, fam.palette);
    for c in &fam.colorings {
        let line: Vec<String> = c.as_slice().iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_family_cache(text: &str) -> Result<HashFamily, IoError> {
    let err = |line: usize, message: String| IoError::Cache { line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| err(1, format!("bad header: {e}")))?;
    let [n, k] = nums[..] else {
        return Err(err(1, "header must be \"n k\"".into()));
    };
    let mut colorings = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let colors: Vec<Color> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| err(i + 1, format!("bad color: {e}")))?;
        if colors.len() != n {
            return Err(err(
                i + 1,
                format!("{} colors for universe {n}", colors.len()),
            ));
        }
        colorings.push(ColorMap::new(k, colors).map_err(|e| err(i + 1, e.to_string()))?);
    }
    Ok(HashFamily {
        universe: n,
        palette: k,
        colorings,
        construction: Construction::Loaded,
    })
}

/// `"yes"`/`"no"` for decisions, the optimum for maximization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Decision(Decision),
    TStar(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub colorings_tried: u64,
    pub dp_transitions: u64,
    pub mode: String,
    pub seed: Option<u64>,
    pub t_star: Option<usize>,
    pub variant: String,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub answer: Answer,
    pub solution: Option<Solution>,
    pub stats: RunStats,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}
