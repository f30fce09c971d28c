//! Per-nest candidate generation.
//!
//! For a fixed `u`, the best subset of at most `C` products maximizes
//! `sum_j v_j (r_j - u)`: take the `C` largest terms and drop the negative
//! ones. Each product is a line `f_j(u) = v_j (r_j - u)`; together with the
//! constant line `f_0 = 0` they form an arrangement whose vertical order only
//! changes at pairwise crosspoints. Sweeping `u` from `-inf` to `+inf` and
//! swapping adjacent lines at each crosspoint visits every distinct top-`C`
//! prefix, so recording the prefix whenever it changes yields a candidate set
//! of size `O(n^2)` that contains a maximizer for every `u`.
//!
//! Products are relabeled as lines `1..=k` ordered by weight ascending (ties
//! by `v * r` ascending); line `0` is the zero line. Zero-weight products are
//! left out of the sweep since their line coincides with `f_0`.
//!
//! [`generate_candidates`] is a pure function of one nest, so the per-nest
//! calls of an instance can run concurrently.

use std::cmp::Ordering;

use crate::model::{attraction, Nest};

/// A line `f(u) = intercept - weight * u` taking part in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepLine {
    pub weight: f64,
    pub intercept: f64,
    /// Where the line crosses zero.
    pub root: f64,
}

impl SweepLine {
    pub const ZERO: SweepLine = SweepLine {
        weight: 0.0,
        intercept: 0.0,
        root: 0.0,
    };

    /// The line `v (r - u)` of a product.
    pub fn product(weight: f64, revenue: f64) -> Self {
        Self {
            weight,
            intercept: weight * revenue,
            root: revenue,
        }
    }

    pub fn from_slope_intercept(weight: f64, intercept: f64) -> Self {
        Self {
            weight,
            intercept,
            root: intercept / weight,
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.intercept - self.weight * u
    }

    fn is_zero(&self) -> bool {
        self.weight == 0.0 && self.intercept == 0.0
    }
}

/// Intersection of two lines of a sweep. `hi` is the line with the larger
/// index (the steeper one when lines are indexed by weight).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crosspoint {
    pub u: f64,
    pub hi: usize,
    pub lo: usize,
}

/// Sweep order of crosspoints: `u` ascending; at equal `u`, the smaller line
/// index descending, then the larger line index descending.
///
/// At a point shared by `r` lines this processes the pairs so that every swap
/// exchanges neighbours and the bundle ends up exactly reversed.
pub fn rule_order(a: &Crosspoint, b: &Crosspoint) -> Ordering {
    a.u.total_cmp(&b.u)
        .then_with(|| b.lo.cmp(&a.lo))
        .then_with(|| b.hi.cmp(&a.hi))
}

fn crosspoint(lines: &[SweepLine], hi: usize, lo: usize) -> Option<Crosspoint> {
    let (h, l) = (&lines[hi], &lines[lo]);
    if h.weight == l.weight {
        return None;
    }
    let u = if l.is_zero() {
        h.root
    } else if h.is_zero() {
        l.root
    } else {
        (h.intercept - l.intercept) / (h.weight - l.weight)
    };
    u.is_finite().then_some(Crosspoint { u, hi, lo })
}

/// All crosspoints between non-parallel pairs of `lines`, sorted by
/// [`rule_order`].
pub fn line_crosspoints(lines: &[SweepLine]) -> Vec<Crosspoint> {
    let mut out = Vec::with_capacity(lines.len() * lines.len().saturating_sub(1) / 2);
    for hi in 1..lines.len() {
        for lo in 0..hi {
            if let Some(c) = crosspoint(lines, hi, lo) {
                out.push(c);
            }
        }
    }
    out.sort_unstable_by(rule_order);
    out
}

/// What a call to [`LineOrder::swap`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapOutcome {
    /// The two lines were neighbours at positions `p` and `p + 1`.
    Adjacent(usize),
    /// `hi` was already below `lo`; nothing changed.
    Skipped,
    /// The lines were not neighbours (floating-point near-coincidence) and
    /// were exchanged in place at positions `p < q`.
    Exchanged(usize, usize),
}

/// Top-to-bottom order of the lines of a sweep with an inverse position map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl LineOrder {
    /// `order` lists line indices from highest to lowest and must be a
    /// permutation of `0..order.len()`.
    pub fn from_order(order: Vec<usize>) -> Self {
        let mut position = vec![usize::MAX; order.len()];
        for (p, &line) in order.iter().enumerate() {
            assert!(
                line < order.len() && position[line] == usize::MAX,
                "order is not a permutation"
            );
            position[line] = p;
        }
        Self { order, position }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, line: usize) -> usize {
        self.position[line]
    }

    /// Lets `lo` overtake `hi`.
    pub fn swap(&mut self, hi: usize, lo: usize) -> SwapOutcome {
        let p = self.position[hi];
        let q = self.position[lo];
        if p > q {
            return SwapOutcome::Skipped;
        }
        self.order.swap(p, q);
        self.position[hi] = q;
        self.position[lo] = p;
        if q == p + 1 {
            SwapOutcome::Adjacent(p)
        } else {
            SwapOutcome::Exchanged(p, q)
        }
    }

    pub fn apply(&mut self, c: &Crosspoint) -> SwapOutcome {
        self.swap(c.hi, c.lo)
    }
}

/// A nest's products relabeled as sweep lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedNest {
    lines: Vec<SweepLine>,
    /// `product_of[j]` is the original index of line `j`; entry 0 is unused.
    product_of: Vec<usize>,
    zero_weight: Vec<usize>,
}

impl RankedNest {
    pub fn lines(&self) -> &[SweepLine] {
        &self.lines
    }

    /// Number of product lines (excluding the zero line).
    pub fn num_lines(&self) -> usize {
        self.lines.len() - 1
    }

    /// Original product index of line `line >= 1`.
    pub fn product(&self, line: usize) -> usize {
        assert!(line >= 1, "line 0 is the zero line");
        self.product_of[line]
    }

    /// Products with zero weight, excluded from the sweep.
    pub fn zero_weight_products(&self) -> &[usize] {
        &self.zero_weight
    }

    /// Order of the lines as `u -> -inf`: `(k, k - 1, ..., 1, 0)`.
    pub fn order(&self) -> Vec<usize> {
        (0..self.lines.len()).rev().collect()
    }
}

/// Relabels the products of `nest` by weight ascending, ties by `v * r`
/// ascending, and returns the line order valid as `u -> -inf`.
pub fn initial_order(nest: &Nest) -> RankedNest {
    let mut positive = Vec::with_capacity(nest.len());
    let mut zero_weight = Vec::new();
    for (j, p) in nest.products.iter().enumerate() {
        if p.weight > 0.0 {
            positive.push((j, SweepLine::product(p.weight, p.revenue)));
        } else {
            zero_weight.push(j);
        }
    }
    positive.sort_by(|(ja, a), (jb, b)| {
        a.weight
            .total_cmp(&b.weight)
            .then_with(|| a.intercept.total_cmp(&b.intercept))
            .then_with(|| ja.cmp(jb))
    });
    let mut lines = Vec::with_capacity(positive.len() + 1);
    let mut product_of = Vec::with_capacity(positive.len() + 1);
    lines.push(SweepLine::ZERO);
    product_of.push(usize::MAX);
    for (j, line) in positive {
        lines.push(line);
        product_of.push(j);
    }
    RankedNest {
        lines,
        product_of,
        zero_weight,
    }
}

/// Crosspoints of the relabeled lines of `nest` (line `0` is `f_0`), sorted
/// for the sweep.
pub fn crosspoints(nest: &Nest) -> Vec<Crosspoint> {
    line_crosspoints(initial_order(nest).lines())
}

/// A subset of one nest together with the line `a - b z` it contributes to
/// the global root-finding problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAssortment {
    /// Original product indices, ascending.
    pub members: Vec<usize>,
    /// Total weight `V`.
    pub weight: f64,
    /// Weight-averaged revenue `R`.
    pub revenue: f64,
    /// `V^gamma * R`.
    pub a: f64,
    /// `V^gamma`.
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub nest_index: usize,
    /// In sweep order.
    pub candidates: Vec<CandidateAssortment>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// `max_S V(S) (R(S) - u)` over the candidates.
    pub fn best_linear_value(&self, u: f64) -> f64 {
        self.candidates
            .iter()
            .map(|c| c.weight * (c.revenue - u))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// State handed to the snapshot callback of [`sweep_nest`].
pub(crate) struct Snapshot<'a> {
    ranked: &'a RankedNest,
    prefix: &'a [usize],
    pub weight: f64,
    pub weighted_revenue: f64,
}

impl Snapshot<'_> {
    /// Original product indices of the current subset, unsorted.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.prefix.iter().map(|&line| self.ranked.product(line))
    }

    pub fn revenue(&self) -> f64 {
        if self.weight > 0.0 {
            self.weighted_revenue / self.weight
        } else {
            0.0
        }
    }
}

/// Runs the sweep over one nest and calls `on_snapshot` with the initial
/// subset and after every swap that changes the subset.
pub(crate) fn sweep_nest(nest: &Nest, mut on_snapshot: impl FnMut(&Snapshot<'_>)) {
    let ranked = initial_order(nest);
    let capacity = nest.capacity;
    let lines = ranked.lines();
    let mut order = LineOrder::from_order(ranked.order());

    let prefix_len = |order: &LineOrder| capacity.min(order.position(0));
    let mut k = prefix_len(&order);
    let (mut weight, mut weighted) = prefix_sums(lines, &order.order()[..k]);

    on_snapshot(&Snapshot {
        ranked: &ranked,
        prefix: &order.order()[..k],
        weight,
        weighted_revenue: weighted,
    });
    if capacity == 0 {
        return;
    }

    for c in line_crosspoints(lines) {
        let changed = match order.apply(&c) {
            SwapOutcome::Skipped => false,
            SwapOutcome::Adjacent(p) => {
                let k_new = prefix_len(&order);
                // Only the two swapped lines can enter or leave the prefix.
                let upper = order.order()[p + 1];
                let lower = order.order()[p];
                let mut changed = false;
                for (line, before, after) in [(upper, p, p + 1), (lower, p + 1, p)] {
                    if line == 0 {
                        continue;
                    }
                    let was_in = before < k;
                    let is_in = after < k_new;
                    if was_in != is_in {
                        let l = &lines[line];
                        if is_in {
                            weight += l.weight;
                            weighted += l.intercept;
                        } else {
                            weight -= l.weight;
                            weighted -= l.intercept;
                        }
                        changed = true;
                    }
                }
                k = k_new;
                changed
            }
            SwapOutcome::Exchanged(..) => {
                k = prefix_len(&order);
                (weight, weighted) = prefix_sums(lines, &order.order()[..k]);
                true
            }
        };
        if changed {
            if k == 0 {
                weight = 0.0;
                weighted = 0.0;
            }
            on_snapshot(&Snapshot {
                ranked: &ranked,
                prefix: &order.order()[..k],
                weight,
                weighted_revenue: weighted,
            });
        }
    }
}

fn prefix_sums(lines: &[SweepLine], prefix: &[usize]) -> (f64, f64) {
    prefix.iter().fold((0.0, 0.0), |(v, a), &line| {
        (v + lines[line].weight, a + lines[line].intercept)
    })
}

/// Builds the candidate set of one nest.
pub fn generate_candidates(nest: &Nest) -> CandidateSet {
    let gamma = nest.gamma;
    let mut candidates = Vec::new();
    sweep_nest(nest, |snap| {
        let mut members: Vec<usize> = snap.members().collect();
        members.sort_unstable();
        let revenue = snap.revenue();
        let b = attraction(snap.weight, gamma);
        candidates.push(CandidateAssortment {
            members,
            weight: snap.weight,
            revenue,
            a: b * revenue,
            b,
        });
    });
    CandidateSet {
        nest_index: 0,
        candidates,
    }
}

/// Candidate sets for every nest of `nests`, indexed by position.
pub fn generate_all(nests: &[Nest], parallel: bool) -> Vec<CandidateSet> {
    use rayon::prelude::*;
    let build = |(i, nest): (usize, &Nest)| CandidateSet {
        nest_index: i,
        ..generate_candidates(nest)
    };
    if parallel {
        nests.par_iter().enumerate().map(build).collect()
    } else {
        nests.iter().enumerate().map(build).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{nest_aggregates, Product};
    use proptest::prelude::*;

    fn nest(products: &[(f64, f64)], capacity: usize) -> Nest {
        Nest::new(
            products.iter().map(|&(v, r)| Product::new(v, r)).collect(),
            1.0,
            capacity,
        )
    }

    fn member_sets(set: &CandidateSet) -> Vec<Vec<usize>> {
        set.candidates.iter().map(|c| c.members.clone()).collect()
    }

    #[test]
    fn initial_order_sorts_by_weight() {
        let r = initial_order(&nest(&[(2.0, 1.0), (1.0, 9.0)], 1));
        assert_eq!(r.order(), vec![2, 1, 0]);
        assert_eq!(r.product(1), 1);
        assert_eq!(r.product(2), 0);
    }

    #[test]
    fn initial_order_breaks_weight_ties_by_intercept() {
        let r = initial_order(&nest(&[(1.0, 3.0), (1.0, 2.0)], 1));
        assert_eq!(r.order(), vec![2, 1, 0]);
        assert_eq!(r.product(1), 1, "v*r = 2 becomes line 1");
        assert_eq!(r.product(2), 0);
    }

    #[test]
    fn zero_weight_products_are_left_out() {
        let r = initial_order(&nest(&[(0.0, 5.0)], 1));
        assert_eq!(r.order(), vec![0]);
        assert_eq!(r.zero_weight_products(), &[0]);
        let set = generate_candidates(&nest(&[(0.0, 5.0)], 1));
        assert_eq!(member_sets(&set), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn crosspoints_two_products() {
        let cs = crosspoints(&nest(&[(1.0, 4.0), (2.0, 1.0)], 1));
        assert_eq!(
            cs,
            vec![
                Crosspoint { u: -2.0, hi: 2, lo: 1 },
                Crosspoint { u: 1.0, hi: 2, lo: 0 },
                Crosspoint { u: 4.0, hi: 1, lo: 0 },
            ]
        );
    }

    #[test]
    fn parallel_lines_do_not_cross() {
        let cs = crosspoints(&nest(&[(1.0, 2.0), (1.0, 3.0)], 1));
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.lo == 0));
    }

    #[test]
    fn coincident_bundle_is_reversed() {
        // Four lines through (1, 1) with weights 1..4, plus one far away.
        let lines: Vec<SweepLine> = (1..=4)
            .map(|w| SweepLine::from_slope_intercept(w as f64, 1.0 + w as f64))
            .collect();
        let cs = line_crosspoints(&lines);
        assert_eq!(cs.len(), 6);
        let mut order = LineOrder::from_order(vec![3, 2, 1, 0]);
        for c in &cs {
            assert!(matches!(order.apply(c), SwapOutcome::Adjacent(_)), "{c:?}");
        }
        assert_eq!(order.order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn single_product() {
        let set = generate_candidates(&nest(&[(1.0, 2.0)], 1));
        assert_eq!(member_sets(&set), vec![vec![0], vec![]]);
    }

    #[test]
    fn two_products_capacity_one() {
        // Product 1 (v=2) is best for u < -2, product 0 on (-2, 4), nothing after.
        let set = generate_candidates(&nest(&[(1.0, 4.0), (2.0, 1.0)], 1));
        assert_eq!(member_sets(&set), vec![vec![1], vec![0], vec![]]);
    }

    #[test]
    fn two_products_capacity_two() {
        let set = generate_candidates(&nest(&[(1.0, 4.0), (2.0, 1.0)], 2));
        assert_eq!(member_sets(&set), vec![vec![0, 1], vec![0], vec![]]);
    }

    #[test]
    fn zero_capacity_yields_only_empty_set() {
        let set = generate_candidates(&nest(&[(1.0, 4.0), (2.0, 1.0), (3.0, 3.0)], 0));
        assert_eq!(member_sets(&set), vec![Vec::<usize>::new()]);
        assert_eq!((set.candidates[0].a, set.candidates[0].b), (0.0, 0.0));
    }

    #[test]
    fn capacity_above_size_behaves_like_size() {
        let a = generate_candidates(&nest(&[(1.0, 4.0), (2.0, 1.0)], 2));
        let b = generate_candidates(&nest(&[(1.0, 4.0), (2.0, 1.0)], 7));
        assert_eq!(a, b);
    }

    #[test]
    fn empty_nest() {
        let set = generate_candidates(&nest(&[], 3));
        assert_eq!(member_sets(&set), vec![Vec::<usize>::new()]);
    }

    fn exhaustive_best(n: &Nest, u: f64) -> f64 {
        let len = n.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << len) {
            if mask.count_ones() as usize > n.capacity {
                continue;
            }
            let value: f64 = (0..len)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| n.products[j].weight * (n.products[j].revenue - u))
                .sum();
            best = best.max(value);
        }
        best
    }

    fn small_nest() -> impl Strategy<Value = Nest> {
        // Draws from a coarse grid so that ties and coincident crosspoints
        // show up regularly.
        let grid = prop_oneof![
            (0u8..6, 0u8..6).prop_map(|(v, r)| (v as f64, r as f64)),
            (0.0..10.0f64, 0.0..10.0f64),
        ];
        (prop::collection::vec(grid, 0..7), 0usize..8, prop::sample::select(vec![0.3, 0.7, 1.0]))
            .prop_map(|(ps, c, g)| {
                Nest::new(ps.into_iter().map(|(v, r)| Product::new(v, r)).collect(), g, c)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn sufficient_on_grid(n in small_nest()) {
            let set = generate_candidates(&n);
            let (lo, hi) = n.products.iter().fold((0.0f64, 0.0f64), |(lo, hi), p| (lo.min(p.revenue), hi.max(p.revenue)));
            for step in 0..=200 {
                let u = (lo - 1.0) + (hi - lo + 2.0) * step as f64 / 200.0;
                let got = set.best_linear_value(u);
                let want = exhaustive_best(&n, u);
                prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "u={u} got={got} want={want}");
            }
        }

        #[test]
        fn size_bound_and_snapshot_consistency(n in small_nest()) {
            let set = generate_candidates(&n);
            let len = n.len();
            prop_assert!(set.len() <= len * (len + 1) / 2 + 1);
            prop_assert!(set.candidates.last().unwrap().members.is_empty());
            for c in &set.candidates {
                prop_assert!(c.members.len() <= n.capacity);
                let (v, r) = nest_aggregates(&n, &c.members).unwrap();
                prop_assert!((c.weight - v).abs() <= 1e-10 * v.max(1e-300), "V {} vs {}", c.weight, v);
                prop_assert!((c.revenue - r).abs() <= 1e-10 * r.max(1e-300), "R {} vs {}", c.revenue, r);
                let b = attraction(v, n.gamma);
                prop_assert!((c.b - b).abs() <= 1e-12 * b.max(1e-300) + 1e-15 * c.b);
                prop_assert!((c.a - b * r).abs() <= 1e-10 * (b * r).max(1e-300));
            }
        }
    }
}
