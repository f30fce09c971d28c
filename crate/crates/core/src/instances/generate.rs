//! Random instances.
//!
//! The generator is PCG XSL RR 128/64 (`pcg64`), seeded as
//! `Lcg128Xsl64::new(seed as u128, STREAM)`, which matches the reference C
//! implementation's `pcg64_srandom_r(seed, STREAM)`. A uniform draw on
//! `[lo, hi]` takes the top 53 bits of one output, `x = (next >> 11) * 2^-53`,
//! and returns `lo + (hi - lo) * x`. Draws are nest-major, product-minor,
//! with each product's weight drawn before its revenue.

use rand_core::Rng;
use rand_pcg::Lcg128Xsl64;

use super::InstanceError;
use crate::model::{Instance, Nest, Product};

/// Stream selector of every generator built by [`SampleStream::new`].
pub const STREAM: u128 = 0x0a02_bdbf_7bb3_c0a7_ac28_fa16_a64a_bf96;

/// Seeded source of uniform draws.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: Lcg128Xsl64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Lcg128Xsl64::new(seed as u128, STREAM),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `0..n` (slightly biased for huge `n`; fine for
    /// test-case generation).
    pub fn below(&mut self, n: usize) -> usize {
        (self.unit() * n as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapacityRule {
    /// `C_i = max(1, floor(n / 2))`.
    HalfN,
    /// One capacity per nest, or a single value used for every nest.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub v_low: f64,
    pub v_high: f64,
    pub r_low: f64,
    pub r_high: f64,
    pub gamma: f64,
    pub v0: f64,
    pub capacity: CapacityRule,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            m: 1,
            n: 1,
            seed: 0,
            v_low: 0.1,
            v_high: 10.0,
            r_low: 0.0,
            r_high: 10.0,
            gamma: 0.5,
            v0: 1.0,
            capacity: CapacityRule::HalfN,
        }
    }
}

impl GenSpec {
    pub fn check(&self) -> Result<(), InstanceError> {
        let bad = |msg: String| Err(InstanceError::BadSpec(msg));
        if self.m < 1 {
            return bad(format!("m must be >= 1, got {}", self.m));
        }
        if self.n < 1 {
            return bad(format!("n must be >= 1, got {}", self.n));
        }
        for (name, lo, hi) in [("v", self.v_low, self.v_high), ("r", self.r_low, self.r_high)] {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} range must satisfy 0 <= low <= high < inf, got [{lo}, {hi}]"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return bad(format!("v0 must be positive, got {}", self.v0));
        }
        if let CapacityRule::Explicit(caps) = &self.capacity {
            if caps.len() != 1 && caps.len() != self.m {
                return bad(format!("expected 1 or {} capacities, got {}", self.m, caps.len()));
            }
        }
        Ok(())
    }

    fn capacity_of(&self, nest: usize) -> usize {
        match &self.capacity {
            CapacityRule::HalfN => (self.n / 2).max(1),
            CapacityRule::Explicit(caps) if caps.len() == 1 => caps[0],
            CapacityRule::Explicit(caps) => caps[nest],
        }
    }
}

/// Draws an instance; the result depends only on `spec`.
pub fn generate(spec: &GenSpec) -> Result<Instance, InstanceError> {
    spec.check()?;
    let mut stream = SampleStream::new(spec.seed);
    let nests = (0..spec.m)
        .map(|i| {
            let products = (0..spec.n)
                .map(|_| {
                    let v = stream.uniform(spec.v_low, spec.v_high);
                    let r = stream.uniform(spec.r_low, spec.r_high);
                    Product::new(v, r)
                })
                .collect();
            Nest::new(products, spec.gamma, spec.capacity_of(i))
        })
        .collect();
    let instance = Instance::new(nests, spec.v0);
    instance.validate()?;
    Ok(instance)
}
