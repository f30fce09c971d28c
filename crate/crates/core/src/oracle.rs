//! Exhaustive reference solvers for small instances.

use thiserror::Error;

use crate::model::{attraction, evaluate_revenue, nest_aggregates, Assortment, Instance, ModelError, Nest};

/// Largest number of assortments [`brute_force_solve`] will enumerate.
pub const MAX_ASSORTMENTS: u128 = 10_000_000;
/// Largest nest [`brute_force_subproblem`] will enumerate.
pub const MAX_SUBPROBLEM_PRODUCTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("enumeration too large: {count} cases exceed the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// All subsets of `0..n` with at most `k` elements, in lexicographic order.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        if current.len() == k {
            return;
        }
        let from = current.last().map_or(0, |&j| j + 1);
        for j in from..n {
            current.push(j);
            extend(n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, k.min(n), &mut Vec::new(), &mut out);
    out
}

/// `sum_{j <= k} C(n, j)`, saturating.
pub fn count_subsets_up_to(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=k.min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    total
}

/// Maximizes the expected revenue over every feasible assortment.
///
/// Ties go to the lexicographically smallest assortment (nest 0 most
/// significant, each nest's subset compared as a sorted index list).
pub fn brute_force_solve(instance: &Instance) -> Result<(f64, Assortment), OracleError> {
    instance.validate()?;
    let count = instance
        .nests
        .iter()
        .map(|n| count_subsets_up_to(n.len(), n.capacity))
        .fold(1u128, |acc, c| acc.saturating_mul(c));
    if count > MAX_ASSORTMENTS {
        return Err(OracleError::TooLarge {
            count,
            limit: MAX_ASSORTMENTS,
        });
    }

    // Per nest: the subsets and their (V^gamma R, V^gamma) contributions.
    type Table = (Vec<Vec<usize>>, Vec<(f64, f64)>);
    let tables: Vec<Table> = instance
        .nests
        .iter()
        .map(|nest| {
            let subsets = subsets_up_to(nest.len(), nest.capacity);
            let terms = subsets
                .iter()
                .map(|s| {
                    let (v, r) = nest_aggregates(nest, s).expect("indices in range");
                    let b = attraction(v, nest.gamma);
                    (b * r, b)
                })
                .collect();
            (subsets, terms)
        })
        .collect();

    let m = tables.len();
    let mut choice = vec![0usize; m];
    let mut best = f64::NEG_INFINITY;
    let mut best_choice = choice.clone();
    loop {
        let (num, den) = choice
            .iter()
            .zip(&tables)
            .fold((0.0, instance.v0), |(num, den), (&c, (_, terms))| {
                (num + terms[c].0, den + terms[c].1)
            });
        let z = num / den;
        if z > best {
            best = z;
            best_choice.clone_from(&choice);
        }
        // Odometer with the last nest varying fastest.
        let mut i = m;
        loop {
            if i == 0 {
                let assortment = Assortment::new(
                    best_choice
                        .iter()
                        .zip(&tables)
                        .map(|(&c, (subsets, _))| subsets[c].clone())
                        .collect(),
                );
                let value = evaluate_revenue(instance, &assortment)?;
                return Ok((value, assortment));
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < tables[i].0.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

fn linear_value(nest: &Nest, subset: &[usize], u: f64) -> f64 {
    subset
        .iter()
        .map(|&j| nest.products[j].weight * (nest.products[j].revenue - u))
        .sum()
}

/// `max_{|S| <= C} sum_{j in S} v_j (r_j - u)` by enumerating subsets.
pub fn brute_force_subproblem(nest: &Nest, u: f64) -> Result<(f64, Vec<usize>), OracleError> {
    if nest.len() > MAX_SUBPROBLEM_PRODUCTS {
        return Err(OracleError::TooLarge {
            count: count_subsets_up_to(nest.len(), nest.capacity),
            limit: 1 << MAX_SUBPROBLEM_PRODUCTS,
        });
    }
    let mut best = (0.0, Vec::new());
    for s in subsets_up_to(nest.len(), nest.capacity) {
        let value = linear_value(nest, &s, u);
        if value > best.0 {
            best = (value, s);
        }
    }
    Ok(best)
}

/// Same problem solved by selection: keep the `C` largest terms
/// `v_j (r_j - u)` that are positive.
pub fn top_c_subproblem(nest: &Nest, u: f64) -> (f64, Vec<usize>) {
    let mut terms: Vec<(f64, usize)> = nest
        .products
        .iter()
        .enumerate()
        .map(|(j, p)| (p.weight * (p.revenue - u), j))
        .filter(|&(t, _)| t > 0.0)
        .collect();
    terms.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
    terms.truncate(nest.capacity);
    let mut subset: Vec<usize> = terms.iter().map(|&(_, j)| j).collect();
    subset.sort_unstable();
    (linear_value(nest, &subset, u), subset)
}
