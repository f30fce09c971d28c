//! Problem data for the two-level nested logit model and exact revenue
//! evaluation.
//!
//! A customer first picks nest `i` with probability proportional to
//! `V_i^gamma_i`, where `V_i` is the total preference weight offered in that
//! nest, or leaves with probability proportional to `v0`. Inside the nest a
//! product is picked proportionally to its own weight. The expected revenue of
//! an assortment is therefore
//!
//! ```text
//!            sum_i V_i^gamma_i * R_i
//! Pi(S) = ----------------------------
//!          v0 + sum_i V_i^gamma_i
//! ```
//!
//! with `R_i` the weight-averaged revenue of the products offered in nest `i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no-purchase weight v0 must be positive, got {0}")]
    NonPositiveV0(f64),
    #[error("instance must contain at least one nest")]
    NoNests,
    #[error("nest {nest}: dissimilarity parameter gamma must lie in (0, 1], got {gamma}")]
    GammaOutOfRange { nest: usize, gamma: f64 },
    #[error("nest {nest}, product {product}: weight must be finite and non-negative, got {weight}")]
    NegativeWeight { nest: usize, product: usize, weight: f64 },
    #[error("nest {nest}, product {product}: revenue must be finite and non-negative, got {revenue}")]
    NegativeRevenue { nest: usize, product: usize, revenue: f64 },
    #[error("product index {index} out of range for a nest with {len} products (nest {nest:?})")]
    IndexOutOfRange { nest: Option<usize>, index: usize, len: usize },
    #[error("assortment has {got} nests, instance has {expected}")]
    NestCountMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    #[serde(rename = "v")]
    pub weight: f64,
    #[serde(rename = "r")]
    pub revenue: f64,
}

impl Product {
    pub fn new(weight: f64, revenue: f64) -> Self {
        Self { weight, revenue }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nest {
    pub gamma: f64,
    /// Maximum number of products that may be offered. Values above the
    /// product count behave like the product count.
    pub capacity: usize,
    pub products: Vec<Product>,
}

impl Nest {
    pub fn new(products: Vec<Product>, gamma: f64, capacity: usize) -> Self {
        Self {
            gamma,
            capacity,
            products,
        }
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    /// Capacity clipped to the number of products.
    pub fn effective_capacity(&self) -> usize {
        self.capacity.min(self.products.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub v0: f64,
    pub nests: Vec<Nest>,
}

impl Instance {
    pub fn new(nests: Vec<Nest>, v0: f64) -> Self {
        Self { v0, nests }
    }

    pub fn num_nests(&self) -> usize {
        self.nests.len()
    }

    pub fn max_products(&self) -> usize {
        self.nests.iter().map(Nest::len).max().unwrap_or(0)
    }

    pub fn total_products(&self) -> usize {
        self.nests.iter().map(Nest::len).sum()
    }

    /// Checks every invariant of the data model and reports the first
    /// violation in nest-major, product-minor order.
    pub fn validate(&self) -> Result<(), ModelError> {
        // Written as negated comparisons so that NaN is rejected as well.
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(ModelError::NonPositiveV0(self.v0));
        }
        if self.nests.is_empty() {
            return Err(ModelError::NoNests);
        }
        for (i, nest) in self.nests.iter().enumerate() {
            if !(nest.gamma > 0.0 && nest.gamma <= 1.0) {
                return Err(ModelError::GammaOutOfRange {
                    nest: i,
                    gamma: nest.gamma,
                });
            }
            for (j, p) in nest.products.iter().enumerate() {
                if !(p.weight >= 0.0 && p.weight.is_finite()) {
                    return Err(ModelError::NegativeWeight {
                        nest: i,
                        product: j,
                        weight: p.weight,
                    });
                }
                if !(p.revenue >= 0.0 && p.revenue.is_finite()) {
                    return Err(ModelError::NegativeRevenue {
                        nest: i,
                        product: j,
                        revenue: p.revenue,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One subset of product indices per nest. Indices are zero-based positions
/// into [`Nest::products`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Assortment {
    pub per_nest: Vec<Vec<usize>>,
}

impl Assortment {
    pub fn new(per_nest: Vec<Vec<usize>>) -> Self {
        Self { per_nest }
    }

    pub fn empty(num_nests: usize) -> Self {
        Self {
            per_nest: vec![Vec::new(); num_nests],
        }
    }

    /// True when every index is in range and every nest respects its
    /// capacity.
    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.per_nest.len() == instance.nests.len()
            && self
                .per_nest
                .iter()
                .zip(&instance.nests)
                .all(|(s, nest)| s.len() <= nest.capacity && s.iter().all(|&j| j < nest.len()))
    }
}

/// Aggregate weight `V` and weight-averaged revenue `R` of `subset`.
///
/// An empty subset, or one whose total weight is zero, yields `(0, 0)`.
pub fn nest_aggregates(nest: &Nest, subset: &[usize]) -> Result<(f64, f64), ModelError> {
    aggregates_in(None, nest, subset)
}

fn aggregates_in(nest_index: Option<usize>, nest: &Nest, subset: &[usize]) -> Result<(f64, f64), ModelError> {
    let mut weight = 0.0;
    let mut weighted_revenue = 0.0;
    for &j in subset {
        let p = nest.products.get(j).ok_or(ModelError::IndexOutOfRange {
            nest: nest_index,
            index: j,
            len: nest.len(),
        })?;
        weight += p.weight;
        weighted_revenue += p.weight * p.revenue;
    }
    if weight > 0.0 {
        Ok((weight, weighted_revenue / weight))
    } else {
        Ok((0.0, 0.0))
    }
}

/// `V^gamma` with `0^gamma = 0`.
#[inline]
pub fn attraction(weight: f64, gamma: f64) -> f64 {
    if weight > 0.0 {
        weight.powf(gamma)
    } else {
        0.0
    }
}

/// Expected revenue of `assortment`. Capacities are not checked here; the
/// formula is defined for any subsets.
pub fn evaluate_revenue(instance: &Instance, assortment: &Assortment) -> Result<f64, ModelError> {
    if assortment.per_nest.len() != instance.nests.len() {
        return Err(ModelError::NestCountMismatch {
            expected: instance.nests.len(),
            got: assortment.per_nest.len(),
        });
    }
    let mut numerator = 0.0;
    let mut denominator = instance.v0;
    for (i, (nest, subset)) in instance.nests.iter().zip(&assortment.per_nest).enumerate() {
        let (weight, revenue) = aggregates_in(Some(i), nest, subset)?;
        let b = attraction(weight, nest.gamma);
        numerator += b * revenue;
        denominator += b;
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64, r: f64) -> Product {
        Product::new(v, r)
    }

    fn single(products: Vec<Product>, gamma: f64, capacity: usize, v0: f64) -> Instance {
        Instance::new(vec![Nest::new(products, gamma, capacity)], v0)
    }

    #[test]
    fn validate_rejects_zero_v0() {
        let inst = single(vec![p(1.0, 1.0)], 1.0, 1, 0.0);
        assert_eq!(inst.validate(), Err(ModelError::NonPositiveV0(0.0)));
    }

    #[test]
    fn validate_gamma_bounds() {
        assert!(single(vec![p(1.0, 1.0)], 1.0, 1, 1.0).validate().is_ok());
        assert!(matches!(
            single(vec![p(1.0, 1.0)], 0.0, 1, 1.0).validate(),
            Err(ModelError::GammaOutOfRange { nest: 0, .. })
        ));
        assert!(matches!(
            single(vec![], 1.0 + 1e-12, 0, 1.0).validate(),
            Err(ModelError::GammaOutOfRange { .. })
        ));
        assert!(matches!(
            single(vec![], f64::NAN, 0, 1.0).validate(),
            Err(ModelError::GammaOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_names_location() {
        let inst = Instance::new(
            vec![
                Nest::new(vec![p(1.0, 1.0)], 0.5, 1),
                Nest::new(vec![p(1.0, 1.0), p(-1.0, 2.0)], 0.5, 1),
            ],
            1.0,
        );
        assert!(matches!(
            inst.validate(),
            Err(ModelError::NegativeWeight { nest: 1, product: 1, .. })
        ));
        let inst = single(vec![p(1.0, -0.5)], 0.5, 1, 1.0);
        assert!(matches!(
            inst.validate(),
            Err(ModelError::NegativeRevenue { nest: 0, product: 0, .. })
        ));
        assert_eq!(Instance::new(vec![], 1.0).validate(), Err(ModelError::NoNests));
    }

    #[test]
    fn aggregates() {
        let nest = Nest::new(vec![p(4.0, 3.0), p(1.0, 6.0)], 0.5, 2);
        let (v, r) = nest_aggregates(&nest, &[0, 1]).unwrap();
        assert_eq!(v, 5.0);
        assert!((r - 3.6).abs() < 1e-15);
        assert_eq!(nest_aggregates(&nest, &[]).unwrap(), (0.0, 0.0));
        assert_eq!(nest_aggregates(&nest, &[1]).unwrap(), (1.0, 6.0));
        assert!(matches!(
            nest_aggregates(&nest, &[2]),
            Err(ModelError::IndexOutOfRange { index: 2, len: 2, .. })
        ));
    }

    #[test]
    fn zero_weight_subset_is_empty() {
        let nest = Nest::new(vec![p(0.0, 5.0)], 0.5, 1);
        assert_eq!(nest_aggregates(&nest, &[0]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn revenue_examples() {
        let inst = single(vec![p(1.0, 2.0)], 1.0, 1, 1.0);
        assert_eq!(evaluate_revenue(&inst, &Assortment::empty(1)).unwrap(), 0.0);
        assert_eq!(evaluate_revenue(&inst, &Assortment::new(vec![vec![0]])).unwrap(), 1.0);

        let inst = Instance::new(
            vec![
                Nest::new(vec![p(4.0, 3.0), p(1.0, 6.0)], 0.5, 2),
                Nest::new(vec![p(9.0, 2.0)], 0.5, 1),
            ],
            1.0,
        );
        let z = evaluate_revenue(&inst, &Assortment::new(vec![vec![0, 1], vec![0]])).unwrap();
        // (sqrt(5) * 3.6 + 3 * 2) / (1 + sqrt(5) + 3), evaluated independently.
        assert!((z - 2.252997364636203).abs() < 1e-12, "{z}");
        assert!((z - 2.25300).abs() < 5e-6);
    }

    #[test]
    fn revenue_rejects_bad_shape() {
        let inst = single(vec![p(1.0, 2.0)], 1.0, 1, 1.0);
        assert!(matches!(
            evaluate_revenue(&inst, &Assortment::empty(2)),
            Err(ModelError::NestCountMismatch { .. })
        ));
        assert!(matches!(
            evaluate_revenue(&inst, &Assortment::new(vec![vec![3]])),
            Err(ModelError::IndexOutOfRange { nest: Some(0), index: 3, .. })
        ));
    }

    fn instance_and_assortment() -> impl Strategy<Value = (Instance, Assortment)> {
        let nest = (
            prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 0..6),
            prop::sample::select(vec![0.3, 0.5, 0.7, 1.0]),
        );
        (prop::collection::vec(nest, 1..4), 0.1..5.0f64).prop_flat_map(|(nests, v0)| {
            let masks: Vec<_> = nests
                .iter()
                .map(|(ps, _)| prop::collection::vec(any::<bool>(), ps.len()))
                .collect();
            (Just((nests, v0)), masks).prop_map(|((nests, v0), masks)| {
                let inst = Instance::new(
                    nests
                        .iter()
                        .map(|(ps, g)| {
                            Nest::new(ps.iter().map(|&(v, r)| p(v, r)).collect(), *g, ps.len())
                        })
                        .collect(),
                    v0,
                );
                let per_nest = masks
                    .iter()
                    .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
                    .collect();
                (inst, Assortment::new(per_nest))
            })
        })
    }

    proptest! {
        #[test]
        fn revenue_scales_with_prices((inst, s) in instance_and_assortment(), alpha in 0.01..100.0f64) {
            let base = evaluate_revenue(&inst, &s).unwrap();
            let mut scaled = inst.clone();
            for nest in &mut scaled.nests {
                for prod in &mut nest.products {
                    prod.revenue *= alpha;
                }
            }
            let z = evaluate_revenue(&scaled, &s).unwrap();
            prop_assert!((z - alpha * base).abs() <= 1e-12 * (1.0 + alpha * base));
        }

        #[test]
        fn revenue_bounded_by_max_price((inst, s) in instance_and_assortment()) {
            let z = evaluate_revenue(&inst, &s).unwrap();
            let max_r = inst.nests.iter().flat_map(|n| n.products.iter().map(|p| p.revenue)).fold(0.0, f64::max);
            prop_assert!(z >= 0.0);
            prop_assert!(z <= max_r * (1.0 + 1e-12));
        }

        #[test]
        fn fixed_point_identity((inst, s) in instance_and_assortment()) {
            let z = evaluate_revenue(&inst, &s).unwrap();
            let mut rhs = 0.0;
            let mut scale = inst.v0 * z;
            for (nest, subset) in inst.nests.iter().zip(&s.per_nest) {
                let (v, r) = nest_aggregates(nest, subset).unwrap();
                let b = attraction(v, nest.gamma);
                rhs += b * (r - z);
                scale += b * (r + z);
            }
            prop_assert!((inst.v0 * z - rhs).abs() <= 1e-10 * scale.max(1e-300));
        }
    }
}
