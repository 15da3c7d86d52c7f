//! Extending analytic functions by multiplying and dividing their values on
//! geometric sampling sequences.
//!
//! A function `f` analytic and nonzero near the origin with `f(0) = 1` is
//! recovered at `z` from products of `f` taken at the points
//! `z · ∏_{k∈S} X_{k,n_k}`, grouped over the finite subsets `S` of the
//! positive integers. The crate evaluates truncations of that product, the
//! tools derived from it, and its number-theoretic specialization with the
//! ratios `r_k = p_k^s`.
//!
//! ```
//! use mulext::{builtin, extend, TruncationSpec};
//! use num_complex::Complex64;
//!
//! let f = builtin("half-sine").unwrap();
//! let spec = TruncationSpec::common(vec![1, 2, 3, 4], 40, 2.0).unwrap();
//! let result = extend(&f, Complex64::new(0.5, 0.0), &spec).unwrap();
//! assert!(result.relative_error.unwrap() < 1e-3);
//! ```

pub mod cli;
pub mod error;
pub mod extension;
pub mod function;
pub mod numerics;
pub mod primes;
pub mod sampling;
pub mod subsets;

pub use error::{Error, Result};
pub use extension::{
    elastic_invariance_check, extend, factor_cutoff_limit, identity_residual, isolate_factor,
    product_derivative, truncation_error_factors, CapRule, CutoffClass, CutoffResult,
    ExtensionResult, LimitSchedule, TruncationErrorFactors,
};
pub use function::{builtin, factor_value, AnalyticFunctionModel, Domain, FunctionFactor};
pub use numerics::{extrapolate_limit, parse_complex, principal_root, Extrapolation, LogProduct};
pub use primes::{
    factorize, gpo_entries, gpo_enumerate, moebius, moebius_limit_deviation, moebius_star,
    mu_partial_sums, mu_star_partial_sums, mu_star_terms, nth_prime, prime_extend, prime_pi,
    Factorization, GpoBounds, GpoEntry, MuStarTerm,
};
pub use sampling::{
    consolidated_product, sampling_point, sampling_points, sampling_product,
    sampling_quotient, simplex_sampling_product, CapPolicy, RatioKind, RatioSchedule,
    TruncationSpec,
};
pub use subsets::{composition_count, enumerate_geo, geo_groups, GeoEnumeration, IntegerSubset};
