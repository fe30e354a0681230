//! File-based adapter for out-of-process solvers.
//!
//! The solver is invoked as
//!
//! ```text
//! <solver> <model.mps> <solution.sol> <mip_gap> <time_limit_seconds>
//! ```
//!
//! and must write `solution.sol` as whitespace-separated records, one per line:
//!
//! ```text
//! status optimal|feasible-gap|infeasible|unbounded|timeout
//! objective <value>
//! bound <value>
//! var <column> <value>
//! dual <row> <value>
//! ```
//!
//! `bound` and `dual` records are optional; `#` starts a comment. Column and
//! row names are those of the emitted MPS file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::milp::emit::sanitized_names;
use crate::milp::{emit_mps, MilpModel};

use super::{relative_gap, SolveResult, SolveStatus, SolverOptions};

pub const MODEL_FILE: &str = "model.mps";
pub const SOLUTION_FILE: &str = "solution.sol";

static RUN_COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(opts: &SolverOptions) -> Result<PathBuf> {
    let base = opts.scratch_dir.clone().unwrap_or_else(std::env::temp_dir);
    let dir = base.join(format!(
        "degsched-{}-{}",
        std::process::id(),
        RUN_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

#[derive(Debug, Default)]
pub struct SolutionFile {
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub values: HashMap<String, f64>,
    pub duals: HashMap<String, f64>,
}

pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let mut out = SolutionFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let num = |tok: &str, field: &str| {
            tok.parse::<f64>()
                .map_err(|_| Error::parse(line, field, format!("`{tok}` is not a number")))
        };
        match f.as_slice() {
            ["status", s] => {
                out.status = Some(
                    SolveStatus::parse(s).ok_or_else(|| Error::parse(line, "status", format!("unknown status `{s}`")))?,
                )
            }
            ["objective", v] => out.objective = Some(num(v, "objective")?),
            ["bound", v] => out.bound = Some(num(v, "bound")?),
            ["var", name, v] => {
                out.values.insert(name.to_string(), num(v, name)?);
            }
            ["dual", name, v] => {
                out.duals.insert(name.to_string(), num(v, name)?);
            }
            _ => return Err(Error::parse(line, "record", format!("unrecognized `{body}`"))),
        }
    }
    if out.status.is_none() {
        return Err(Error::parse(0, "status", "missing status record"));
    }
    Ok(out)
}

pub(super) fn solve(model: &MilpModel, opts: &SolverOptions, solver: &Path) -> Result<SolveResult> {
    let start = Instant::now();
    let dir = scratch(opts)?;
    let mps = dir.join(MODEL_FILE);
    let sol = dir.join(SOLUTION_FILE);
    fs::write(&mps, emit_mps(model)?)?;
    let _ = fs::remove_file(&sol);

    let output = Command::new(solver)
        .arg(&mps)
        .arg(&sol)
        .arg(opts.mip_gap.to_string())
        .arg(opts.time_limit.as_secs_f64().to_string())
        .output()
        .map_err(|e| Error::Environment(format!("cannot run solver `{}`: {e}", solver.display())))?;
    let captured = format!(
        "{}{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    if !output.status.success() {
        return Err(Error::Adapter {
            message: format!("solver exited with {}", output.status),
            output: captured,
        });
    }
    let text = fs::read_to_string(&sol).map_err(|e| Error::Adapter {
        message: format!("no solution file at {}: {e}", sol.display()),
        output: captured.clone(),
    })?;
    let parsed = parse_solution(&text).map_err(|e| Error::Adapter {
        message: e.to_string(),
        output: format!("{captured}--- {SOLUTION_FILE} ---\n{text}"),
    })?;
    if opts.scratch_dir.is_none() {
        let _ = fs::remove_dir_all(&dir);
    }

    let names = sanitized_names(model)?;
    let status = parsed.status.unwrap();
    let with_solution = matches!(
        status,
        SolveStatus::Optimal | SolveStatus::FeasibleGap | SolveStatus::Timeout
    ) && !parsed.values.is_empty();
    let values = if with_solution {
        names
            .vars
            .iter()
            .map(|n| {
                parsed.values.get(n).copied().ok_or_else(|| Error::Adapter {
                    message: format!("solution lacks column `{n}`"),
                    output: captured.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let duals = if with_solution && !model.is_mip() && !parsed.duals.is_empty() {
        Some(
            names
                .rows
                .iter()
                .map(|n| parsed.duals.get(n).copied().unwrap_or(0.0))
                .collect(),
        )
    } else {
        None
    };
    let objective = if with_solution { parsed.objective } else { None };
    let bound = if with_solution {
        parsed.bound.or(if model.is_mip() { None } else { objective })
    } else {
        None
    };
    Ok(SolveResult {
        status,
        objective,
        bound,
        gap: objective.zip(bound).map(|(o, b)| relative_gap(o, b)),
        values,
        duals,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solution_records_parse() {
        let s = parse_solution("status optimal\nobjective 3 # ok\nvar x 3\ndual c 1\n").unwrap();
        assert_eq!(s.status, Some(SolveStatus::Optimal));
        assert_eq!(s.objective, Some(3.0));
        assert_eq!(s.values["x"], 3.0);
        assert_eq!(s.duals["c"], 1.0);
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(parse_solution("objective 1\n").is_err());
        assert!(parse_solution("status optimal\nvar x abc\n").is_err());
        assert!(parse_solution("status maybe\n").is_err());
    }
}
