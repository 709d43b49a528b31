//! Plain-text power problem files:
//!
//! ```text
//! # remshare power problem v1
//! goal sum_power
//! p_max 125.89254117941672
//! n_bs 2
//! row <i_max> <w_1> ... <w_n_bs>
//! ```
//!
//! Blank lines and further `#` lines are ignored. Numbers round-trip exactly.

use std::io::{BufRead, Write};

use super::{Goal, PowerProblem};
use crate::error::{Error, Result};

pub const DUMP_HEADER: &str = "# remshare power problem v1";

pub fn write_problem<W: Write>(problem: &PowerProblem, mut out: W) -> Result<()> {
    writeln!(out, "{DUMP_HEADER}")?;
    writeln!(out, "goal {}", problem.goal.name())?;
    writeln!(out, "p_max {:?}", problem.p_max)?;
    writeln!(out, "n_bs {}", problem.n_bs())?;
    for (row, cap) in problem.w.iter().zip(&problem.i_max) {
        write!(out, "row {cap:?}")?;
        for w in row {
            write!(out, " {w:?}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_problem<R: BufRead>(input: R) -> Result<PowerProblem> {
    let mut goal = None;
    let mut p_max = None;
    let mut n_bs = None;
    let mut w = Vec::new();
    let mut i_max = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if line == DUMP_HEADER {
            saw_header = true;
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number {s:?}: {e}")));
        match key {
            "goal" => goal = Some(parts.next().ok_or_else(|| err("missing goal".into()))?.parse::<Goal>()?),
            "p_max" => p_max = Some(num(parts.next().ok_or_else(|| err("missing p_max".into()))?)?),
            "n_bs" => {
                let s = parts.next().ok_or_else(|| err("missing n_bs".into()))?;
                n_bs = Some(s.parse::<usize>().map_err(|e| err(format!("bad n_bs {s:?}: {e}")))?);
            }
            "row" => {
                let values: Vec<f64> = parts.map(num).collect::<Result<_>>()?;
                let Some((cap, row)) = values.split_first() else {
                    return Err(err("empty row".into()));
                };
                if n_bs.is_some_and(|n| n != row.len()) {
                    return Err(err(format!("row has {} gains, expected {}", row.len(), n_bs.unwrap())));
                }
                i_max.push(*cap);
                w.push(row.to_vec());
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    if !saw_header {
        return Err(Error::Parse(format!("missing header {DUMP_HEADER:?}")));
    }
    let goal = goal.ok_or_else(|| Error::Parse("missing goal".into()))?;
    let p_max = p_max.ok_or_else(|| Error::Parse("missing p_max".into()))?;
    PowerProblem::new(w, i_max, p_max, goal)
}
