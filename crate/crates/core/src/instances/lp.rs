//! Export of the reduced linear program
//!
//! ```text
//! minimize   z
//! subject to v0 z - sum_i y_i >= 0
//!            y_i + b z >= a        for every candidate (a, b) of nest i
//!            z, y_i free
//! ```
//!
//! in CPLEX LP text format. Its optimal value equals the optimal expected
//! revenue, which makes it a cross-check against any external LP solver.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::InstanceError;
use crate::candidates::CandidateSet;
use crate::model::Instance;

/// Terms per line in long rows.
const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpSummary {
    pub variables: usize,
    pub constraints: usize,
}

/// 17 significant digits in scientific notation, e.g. `2.5000000000000000e+00`.
fn num(x: f64) -> String {
    let s = format!("{:.16e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn y(i: usize) -> String {
    format!("y_{}", i + 1)
}

pub fn write_lp<W: Write>(
    out: &mut W,
    instance: &Instance,
    candidate_sets: &[CandidateSet],
) -> io::Result<LpSummary> {
    let m = candidate_sets.len();
    writeln!(out, "\\ Reduced LP of a nested logit assortment problem: {} nests, v0 = {}", m, num(instance.v0))?;
    writeln!(out, "\\ The optimal objective value is the optimal expected revenue.")?;
    writeln!(out, "Minimize")?;
    writeln!(out, " obj: z")?;
    writeln!(out, "Subject To")?;

    write!(out, " link: {} z", num(instance.v0))?;
    for i in 0..m {
        if (i + 1) % TERMS_PER_LINE == 0 {
            write!(out, "\n   ")?;
        }
        write!(out, " - {}", y(i))?;
    }
    writeln!(out, " >= 0")?;
    let mut constraints = 1;

    for (i, set) in candidate_sets.iter().enumerate() {
        for (k, c) in set.candidates.iter().enumerate() {
            write!(out, " n{}_c{}: {}", i + 1, k + 1, y(i))?;
            if c.b != 0.0 {
                write!(out, " + {} z", num(c.b))?;
            }
            writeln!(out, " >= {}", num(c.a))?;
            constraints += 1;
        }
    }

    writeln!(out, "Bounds")?;
    writeln!(out, " z free")?;
    for i in 0..m {
        writeln!(out, " {} free", y(i))?;
    }
    writeln!(out, "End")?;
    Ok(LpSummary {
        variables: m + 1,
        constraints,
    })
}

pub fn export_lp(
    instance: &Instance,
    candidate_sets: &[CandidateSet],
    path: impl AsRef<Path>,
) -> Result<LpSummary, InstanceError> {
    let path = path.as_ref();
    let io_err = |source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let summary = write_lp(&mut out, instance, candidate_sets).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(summary)
}
