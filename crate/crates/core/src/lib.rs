//! Entropy-based large-deviation upper bounds on the growth rate of directed
//! last-passage percolation, with exact dynamic-programming passage times and
//! Monte Carlo estimates to check them against.
//!
//! For i.i.d. site weights with mean `μ` and a moment generating function
//! near the origin, the growth rate in a direction `p` on the simplex obeys
//! `g(p) ≤ I₊⁻¹(H(p))`, where `I` is the upper-tail rate function of one
//! weight and `H` the Shannon entropy (nats) of `p`. The bound is tight at the
//! simplex vertices and Schur-concave in `p`.
//!
//! Modules:
//! - [`weights`]: weight laws, log-MGFs, sampling; [`rng`]: seeded streams.
//! - [`lattice`]: lattice points, path enumeration and counting, rationalization.
//! - [`lpp`]: last-passage times by dynamic programming.
//! - [`ldp`]: the rate function and its inverse.
//! - [`simplex`]: probability vectors, entropy, majorization.
//! - [`bound`]: the entropy bound and its grid evaluation.
//! - [`montecarlo`]: growth-rate and tail-probability experiments.

pub mod bound;
pub mod error;
pub mod lattice;
pub mod ldp;
pub mod lpp;
pub mod montecarlo;
pub mod numfmt;
pub mod rng;
pub mod simplex;
pub mod weights;

pub use bound::{bound_on_simplex_grid, evaluate_bound, BoundReport};
pub use error::{Error, Result};
pub use lattice::{
    count_paths, entropy_count_bound, enumerate_paths, rationalize, DirectedPath, LatticePoint,
    RationalDirection,
};
pub use ldp::{rate_closed_form, RateFunction, Tolerances};
pub use lpp::{last_passage_profile, last_passage_time, WeightField};
pub use montecarlo::{
    compare_bound_to_simulation, estimate_growth_rate, tail_probability_experiment, ComparisonRow,
    Estimate, McOptions, TailExperimentResult,
};
pub use rng::RandomStream;
pub use simplex::{majorizes, random_majorization_pair, ProbabilityVector};
pub use weights::{Family, WeightDistribution};
