//! Numerical toolkit for sharp Poincaré–Sobolev constants of BV functions
//! on planar domains and closed surfaces.
//!
//! The closed-form layers ([`constants`], the expansions and constraint
//! algebra in [`test_functions`]) are generic over [`Real`]; grid, surface
//! and solver code works in `f64`. The aliases below fix the scalar to `f64`.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod scalar;
pub mod surfaces;
pub mod test_functions;
pub mod tv_solver;

pub use constants::{
    euler_beta, gamma_half_integer, half_space_constant, sharp_sobolev_constant, unit_ball_volume, SharpConstants,
};
pub use error::{Error, Result};
pub use geometry::{
    boundary_arc_inside, boundary_mean_curvature, build_domain, cap_measure, cap_measure_expansion,
    max_curvature_seed, BoundaryCurve, CurvatureSeed, DomainSpec, GridDomain,
};
pub use scalar::Real;
pub use test_functions::{
    beta_eps, constraint_residual, critical_quotient_expansion, domain_quotient_expansion, optimal_epsilon,
    shift_to_constraint, sign_power, surface_quotient_expansion, two_valued_quotient_exact, EpsilonOptimum,
    ProfileContext, QuotientValue, TwoValuedProfile,
};

/// Sharp constants in double precision.
pub type Constants = SharpConstants<f64>;
/// A quotient in double precision.
pub type Quotient = QuotientValue<f64>;
