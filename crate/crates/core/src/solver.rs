//! Global solve: combine the per-nest envelopes into
//! `G(z) = -v0 z + sum_i g_i(z)` and enumerate its linear pieces.
//!
//! On the piece between two consecutive breakpoints every nest uses a fixed
//! candidate, so `G(z) = A - B z` where `A = sum a_i` and
//! `B = v0 + sum b_i`. `A / B` is the expected revenue of that combination,
//! and the largest such ratio over all pieces is the optimal revenue `Z*`,
//! which is also the unique root of `G`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::sweep_nest;
use crate::envelope::{envelope_of_lines, Envelope};
use crate::model::{attraction, evaluate_revenue, Assortment, Instance, ModelError, Nest};

/// Relative tolerance of the built-in agreement check between the scanned
/// optimum and the re-evaluated revenue of the recovered assortment.
pub const SELF_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid instance")]
    InvalidInstance(#[from] ModelError),
    #[error("recovered assortment earns {recomputed}, scan reported {z_star}")]
    SelfCheck { z_star: f64, recomputed: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Build the per-nest candidate sets and envelopes on the rayon pool.
    /// Results are identical to the sequential path.
    pub parallel_nests: bool,
}

/// Change of `(a, b)` when nest `nest` moves to its next envelope piece at
/// `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointDelta {
    pub u: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub nest: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub z_star: f64,
    pub assortment: Assortment,
    /// `G(Z*)`, zero up to rounding.
    pub g_at_zstar: f64,
    /// Number of distinct breakpoints of `G` visited by the scan.
    pub segments_scanned: usize,
    /// Candidate-set size per nest.
    pub candidate_counts: Vec<usize>,
    /// Envelope piece count per nest.
    pub envelope_sizes: Vec<usize>,
}

/// Envelope of one nest plus the members of each of its pieces.
#[derive(Debug, Clone)]
pub struct NestFrontier {
    envelope: Envelope,
    candidate_count: usize,
    members: Vec<Box<[u32]>>,
}

impl NestFrontier {
    pub fn build(nest: &Nest) -> Self {
        let gamma = nest.gamma;
        let mut lines = Vec::new();
        let mut offsets = vec![0usize];
        let mut arena: Vec<u32> = Vec::new();
        sweep_nest(nest, |snap| {
            let b = attraction(snap.weight, gamma);
            lines.push((b * snap.revenue(), b, lines.len()));
            arena.extend(snap.members().map(|j| j as u32));
            offsets.push(arena.len());
        });
        let candidate_count = lines.len();
        let envelope = envelope_of_lines(lines).expect("a sweep always records the initial subset");
        let members = envelope
            .pieces()
            .iter()
            .map(|p| {
                let mut m = arena[offsets[p.candidate]..offsets[p.candidate + 1]].to_vec();
                m.sort_unstable();
                m.into_boxed_slice()
            })
            .collect();
        Self {
            envelope,
            candidate_count,
            members,
        }
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_count
    }

    /// Members of the piece active at `z`.
    pub fn members_at(&self, z: f64) -> Vec<usize> {
        self.members[self.envelope.locate(z)]
            .iter()
            .map(|&j| j as usize)
            .collect()
    }

    fn deltas(&self, nest: usize) -> impl Iterator<Item = BreakpointDelta> + '_ {
        self.envelope.pieces().windows(2).map(move |w| BreakpointDelta {
            u: w[1].start,
            delta_a: w[1].a - w[0].a,
            delta_b: w[1].b - w[0].b,
            nest,
        })
    }
}

/// Per-nest frontiers of a validated instance, ready to be scanned.
#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    instance: &'a Instance,
    nests: Vec<NestFrontier>,
}

/// Outcome of the breakpoint scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub z_star: f64,
    pub segments_scanned: usize,
}

#[derive(Clone, Copy)]
struct HeapEntry {
    u: f64,
    nest: usize,
    piece: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Reversed so that the max-heap pops the smallest breakpoint first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .u
            .total_cmp(&self.u)
            .then_with(|| other.nest.cmp(&self.nest))
    }
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a Instance, options: &SolveOptions) -> Result<Self, SolveError> {
        instance.validate()?;
        let nests = if options.parallel_nests {
            instance.nests.par_iter().map(NestFrontier::build).collect()
        } else {
            instance.nests.iter().map(NestFrontier::build).collect()
        };
        Ok(Self { instance, nests })
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn frontiers(&self) -> &[NestFrontier] {
        &self.nests
    }

    pub fn envelopes(&self) -> Vec<Envelope> {
        self.nests.iter().map(|f| f.envelope.clone()).collect()
    }

    pub fn candidate_counts(&self) -> Vec<usize> {
        self.nests.iter().map(|f| f.candidate_count).collect()
    }

    /// All breakpoint deltas in scan order (ascending `u`, ties by nest).
    pub fn deltas(&self) -> Vec<BreakpointDelta> {
        let mut out: Vec<_> = self
            .nests
            .iter()
            .enumerate()
            .flat_map(|(i, f)| f.deltas(i))
            .collect();
        out.sort_by(|x, y| x.u.total_cmp(&y.u).then_with(|| x.nest.cmp(&y.nest)));
        out
    }

    /// `G(z) = -v0 z + sum_i g_i(z)`.
    pub fn g(&self, z: f64) -> f64 {
        self.nests
            .iter()
            .fold(-self.instance.v0 * z, |acc, f| acc + f.envelope.value(z).0)
    }

    /// Walks the breakpoints of all envelopes in increasing order, merging the
    /// per-nest lists with a heap, and returns the best ratio `A / B`.
    /// Breakpoints sharing the same `u` are applied together before the ratio
    /// is evaluated; the first maximizing segment wins.
    pub fn scan(&self) -> ScanResult {
        let mut a = 0.0;
        let mut b = self.instance.v0;
        let mut heap = BinaryHeap::with_capacity(self.nests.len());
        for (i, f) in self.nests.iter().enumerate() {
            let first = &f.envelope.pieces()[0];
            a += first.a;
            b += first.b;
            if let Some(next) = f.envelope.pieces().get(1) {
                heap.push(HeapEntry {
                    u: next.start,
                    nest: i,
                    piece: 1,
                });
            }
        }
        let mut z_star = a / b;
        let mut segments = 0;
        while let Some(head) = heap.peek().copied() {
            while let Some(entry) = heap.peek().copied() {
                if entry.u != head.u {
                    break;
                }
                heap.pop();
                let pieces = self.nests[entry.nest].envelope.pieces();
                let (prev, cur) = (&pieces[entry.piece - 1], &pieces[entry.piece]);
                a += cur.a - prev.a;
                b += cur.b - prev.b;
                if let Some(next) = pieces.get(entry.piece + 1) {
                    heap.push(HeapEntry {
                        u: next.start,
                        nest: entry.nest,
                        piece: entry.piece + 1,
                    });
                }
            }
            segments += 1;
            let ratio = a / b;
            if ratio > z_star {
                z_star = ratio;
            }
        }
        ScanResult {
            z_star,
            segments_scanned: segments,
        }
    }

    /// Per nest, the candidate maximizing `V^gamma (R - z)`, taking the piece
    /// to the right at a breakpoint.
    pub fn recover(&self, z: f64) -> Assortment {
        Assortment::new(self.nests.iter().map(|f| f.members_at(z)).collect())
    }
}

/// `G(z) = -v0 z + sum_i g_i(z)` for envelopes built from `instance`.
pub fn g_eval(instance: &Instance, envelopes: &[Envelope], z: f64) -> f64 {
    envelopes
        .iter()
        .fold(-instance.v0 * z, |acc, env| acc + env.value(z).0)
}

pub fn solve(instance: &Instance) -> Result<Solution, SolveError> {
    solve_with(instance, &SolveOptions::default())
}

pub fn solve_with(instance: &Instance, options: &SolveOptions) -> Result<Solution, SolveError> {
    let prepared = Prepared::new(instance, options)?;
    let ScanResult {
        z_star,
        segments_scanned,
    } = prepared.scan();
    let assortment = prepared.recover(z_star);
    let recomputed = evaluate_revenue(instance, &assortment)?;
    if (recomputed - z_star).abs() > SELF_CHECK_TOL * z_star.abs().max(recomputed.abs()) {
        return Err(SolveError::SelfCheck { z_star, recomputed });
    }
    Ok(Solution {
        z_star,
        g_at_zstar: prepared.g(z_star),
        assortment,
        segments_scanned,
        candidate_counts: prepared.candidate_counts(),
        envelope_sizes: prepared.nests.iter().map(|f| f.envelope.len()).collect(),
    })
}
