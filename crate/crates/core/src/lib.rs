//! Revenue-maximizing assortments under the two-level nested logit model with
//! a cardinality limit per nest.
//!
//! The solver works in two stages:
//!
//! 1. [`candidates`]: for each nest, a line sweep produces `O(n^2)` candidate
//!    subsets that contain a maximizer of `V(S) (R(S) - u)` for every `u`.
//! 2. [`envelope`] and [`solver`]: each nest's candidates form the upper
//!    envelope `g_i(z) = max V^gamma (R - z)`. Scanning the merged
//!    breakpoints of `G(z) = -v0 z + sum_i g_i(z)` finds the optimal revenue
//!    as its unique root, in `O(m n^2 log(mn))` total time.
//!
//! ```
//! use nestopt::{solve, Instance, Nest, Product};
//!
//! let instance = Instance::new(
//!     vec![Nest::new(vec![Product::new(1.0, 4.0), Product::new(2.0, 1.0)], 1.0, 1)],
//!     1.0,
//! );
//! let solution = solve(&instance).unwrap();
//! assert_eq!(solution.z_star, 2.0);
//! assert_eq!(solution.assortment.per_nest, vec![vec![0]]);
//! ```
//!
//! [`oracle`] holds exhaustive reference solvers for small instances,
//! [`instances`] the file format, random generator and LP export, and
//! [`harness`] the timing sweep behind `nestopt bench`.

pub mod candidates;
pub mod envelope;
pub mod harness;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod solver;

pub use candidates::{generate_candidates, CandidateAssortment, CandidateSet, Crosspoint};
pub use envelope::{build_envelope, envelope_value, Envelope, EnvelopeError};
pub use model::{evaluate_revenue, nest_aggregates, Assortment, Instance, ModelError, Nest, Product};
pub use oracle::{brute_force_solve, brute_force_subproblem, OracleError};
pub use solver::{g_eval, solve, solve_with, Solution, SolveError, SolveOptions};
