//! Upper envelope `g(z) = max_k (a_k - b_k z)` of the candidate lines of a
//! nest, stored as a list of pieces ordered by breakpoint.

use thiserror::Error;

use crate::candidates::CandidateSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("cannot build an envelope from an empty candidate set")]
    EmptyCandidateSet,
}

/// One linear piece `a - b z`, active from `start` up to the next piece's
/// start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub a: f64,
    pub b: f64,
    /// Index of the candidate this line came from.
    pub candidate: usize,
}

impl Piece {
    pub fn value(&self, z: f64) -> f64 {
        self.a - self.b * z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pieces: Vec<Piece>,
}

impl Envelope {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Breakpoints in increasing order (the starts of all pieces but the
    /// first).
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.start)
    }

    /// Index of the piece active at `z`. A breakpoint belongs to the piece
    /// on its right.
    pub fn locate(&self, z: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= z).saturating_sub(1)
    }

    pub fn value(&self, z: f64) -> (f64, usize) {
        let i = self.locate(z);
        (self.pieces[i].value(z), i)
    }

    /// Checks the structural invariants: the first piece starts at `-inf`,
    /// starts and slopes are strictly monotone, and adjacent pieces agree at
    /// their shared breakpoint to `tol` relative.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let first = self.pieces.first().ok_or("empty envelope")?;
        if first.start != f64::NEG_INFINITY {
            return Err(format!("first piece starts at {}", first.start));
        }
        for (j, w) in self.pieces.windows(2).enumerate() {
            let (l, r) = (&w[0], &w[1]);
            if r.start <= l.start || r.start.is_nan() {
                return Err(format!("breakpoint {} not increasing: {} then {}", j + 1, l.start, r.start));
            }
            if r.b >= l.b || r.b.is_nan() {
                return Err(format!("slope not increasing at piece {}: b {} then {}", j + 1, l.b, r.b));
            }
            // a_r - a_l = z (b_r - b_l), so a falls exactly at positive breakpoints.
            if r.start > 0.0 && (r.a >= l.a || r.a.is_nan()) {
                return Err(format!("intercept not decreasing at positive breakpoint {}", r.start));
            }
            let (vl, vr) = (l.value(r.start), r.value(r.start));
            let scale = 1.0 + vl.abs().max(l.a.abs()).max((l.b * r.start).abs());
            if (vl - vr).abs() > tol * scale {
                return Err(format!("discontinuity at {}: {} vs {}", r.start, vl, vr));
            }
        }
        Ok(())
    }
}

/// Value of `env` at `z` and the index of the active piece.
pub fn envelope_value(env: &Envelope, z: f64) -> (f64, usize) {
    env.value(z)
}

/// Builds the envelope of the lines `(a, b, candidate index)`.
///
/// Lines are sorted by `b` descending; among lines with equal `b` only the
/// one with the largest `a` survives. Each new line then pops pieces from
/// the right while it is at least as high at their start, and is pushed with
/// its intersection with the remaining rightmost piece as start.
pub fn envelope_of_lines(lines: impl IntoIterator<Item = (f64, f64, usize)>) -> Result<Envelope, EnvelopeError> {
    let mut lines: Vec<(f64, f64, usize)> = lines.into_iter().collect();
    if lines.is_empty() {
        return Err(EnvelopeError::EmptyCandidateSet);
    }
    lines.sort_unstable_by(|x, y| {
        y.1.total_cmp(&x.1)
            .then_with(|| y.0.total_cmp(&x.0))
            .then_with(|| x.2.cmp(&y.2))
    });
    lines.dedup_by(|later, kept| later.1 == kept.1);

    let mut pieces: Vec<Piece> = Vec::with_capacity(lines.len());
    for (a, b, candidate) in lines {
        let mut start = f64::NEG_INFINITY;
        while let Some(top) = pieces.last() {
            if top.start == f64::NEG_INFINITY {
                start = (top.a - a) / (top.b - b);
                break;
            }
            if a - b * top.start >= top.a - top.b * top.start {
                pieces.pop();
                continue;
            }
            start = (top.a - a) / (top.b - b);
            if start <= top.start {
                // Rounding put the intersection at or left of the top's start.
                pieces.pop();
                continue;
            }
            break;
        }
        pieces.push(Piece { start, a, b, candidate });
    }
    Ok(Envelope { pieces })
}

/// Builds the upper envelope of the candidate lines of one nest.
pub fn build_envelope(candidates: &CandidateSet) -> Result<Envelope, EnvelopeError> {
    envelope_of_lines(
        candidates
            .candidates
            .iter()
            .enumerate()
            .map(|(k, c)| (c.a, c.b, k)),
    )
}
