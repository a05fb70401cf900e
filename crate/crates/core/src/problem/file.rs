//! JSON problem definitions.
//!
//! ```json
//! {
//!   "continuous": [{"lower": -5, "upper": 10}, {"lower": 0, "upper": 15}],
//!   "integer": [],
//!   "categorical": [["red", "green", "blue"]],
//!   "objective": "./my_simulator --fast",
//!   "options": {"budget": 200, "seed": 7}
//! }
//! ```
//!
//! `objective` is either the name of a built-in test function with the same
//! variables, or a shell command. A command receives the original-space
//! point on standard input as whitespace-separated numbers and prints one
//! number. `options` holds run settings; command-line flags take
//! precedence.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Objective, ProblemSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub continuous: Vec<Bounds>,
    #[serde(default)]
    pub integer: Vec<Bounds>,
    #[serde(default)]
    pub categorical: Vec<Vec<String>>,
    pub objective: String,
    #[serde(default)]
    pub options: RunOptions,
}

/// Optional run settings stored next to the problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    pub algorithm: Option<String>,
    pub subsolver: Option<String>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub rbf: Option<String>,
    pub refine_freq: Option<usize>,
    pub kappa: Option<usize>,
    pub simulate_latency: Option<String>,
}

/// Runs `command` through the shell for every evaluation. Failures
/// (non-zero exit, unparsable output) yield NaN.
pub fn command_objective(command: &str) -> Objective {
    let command = command.to_string();
    Arc::new(move |x: &[f64]| run_command(&command, x).unwrap_or(f64::NAN))
}

fn run_command(command: &str, x: &[f64]) -> Option<f64> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    let input: Vec<String> = x.iter().map(f64::to_string).collect();
    {
        let mut stdin = child.stdin.take()?;
        writeln!(stdin, "{}", input.join(" ")).ok()?;
    }
    let out = child.wait_with_output().ok()?;
    if !out.status.success() {
        return None;
    }
    String::from_utf8(out.stdout).ok()?.trim().parse().ok()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::InvalidProblem(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidProblem(msg) => Error::InvalidProblem(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn n_vars(&self) -> usize {
        self.continuous.len() + self.integer.len() + self.categorical.len()
    }

    /// Builds the problem. Built-in objectives must match the declared
    /// variable counts.
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let objective = match crate::testbed::builtin(&self.objective) {
            Ok(inst) => {
                let s = &inst.spec;
                let counts = (s.n_r(), s.n_d(), s.categories().iter().map(Vec::len).collect::<Vec<_>>());
                let ours = (
                    self.continuous.len(),
                    self.integer.len(),
                    self.categorical.iter().map(Vec::len).collect::<Vec<_>>(),
                );
                if counts != ours {
                    return Err(Error::InvalidProblem(format!(
                        "field `objective`: built-in `{}` expects {} continuous, {} integer and categorical sizes {:?}",
                        self.objective, counts.0, counts.1, counts.2
                    )));
                }
                s.objective().clone()
            }
            Err(_) if self.objective.trim().is_empty() => {
                return Err(Error::InvalidProblem("field `objective` is empty".into()));
            }
            Err(_) => command_objective(&self.objective),
        };
        if self.n_vars() == 0 {
            return Err(Error::InvalidProblem("no variables declared".into()));
        }
        let mut b = ProblemSpec::builder();
        for c in &self.continuous {
            b = b.continuous(c.lower, c.upper);
        }
        for c in &self.integer {
            b = b.integer(c.lower, c.upper);
        }
        for labels in &self.categorical {
            b = b.categorical(labels.clone());
        }
        b.objective_arc(objective).thread_safe(true).build()
    }
}

/// Reads and builds a problem file.
pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    ProblemFile::load(path)?.to_spec()
}
