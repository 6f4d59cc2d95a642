//! Centralized numeric tolerances.
//!
//! Every tolerance used by more than one module lives here, with the
//! rationale for its magnitude. Tests reference these constants instead of
//! scattering literals, so a tolerance change is a one-line diff with a
//! paper trail.

/// Identities that hold to rounding error on well-scaled inputs
/// (coefficient round-trips, exact algebraic rearrangements).
pub const EXACT: f64 = 1e-12;

/// Residual of a direct dense solve after one iterative-refinement pass,
/// relative to `1 + ‖rhs‖`. Double precision with refinement reaches
/// ~`eps·κ`; the instances here keep κ ≤ 1e4.
pub const SOLVE: f64 = 1e-10;

/// Agreement between two independent computation routes for the same
/// quantity (spectral vs dense solve, DFT vs dense eigensolve).
pub const CROSS_ORACLE: f64 = 1e-9;

/// Relative agreement of dual-route matrix power norms. Looser than
/// [`CROSS_ORACLE`] because repeated multiplication loses digits at a rate
/// governed by the iteration matrix conditioning.
pub const ROUTE_REL: f64 = 1e-8;

/// Deviation of a computed spectral radius or eigenvalue from its closed
/// form on problems of dimension ≤ 128.
pub const SPECTRAL: f64 = 1e-10;

/// Relative error allowed between a closed-form integral value and its
/// periodic-trapezoid quadrature.
pub const QUADRATURE_REL: f64 = 1e-8;

/// Absolute floor below which a quadrature comparison counts as passed
/// regardless of relative error: the extended-precision accumulator used by
/// the oracle carries ~31 significant digits, so any value below this floor
/// is indistinguishable from zero for both routes.
pub const QUADRATURE_ABS_FLOOR: f64 = 1e-30;

/// Multiplicative slack `(1 + BOUND_SLACK)` applied when asserting a
/// geometric envelope pointwise over a recorded trace; absorbs the rounding
/// of the envelope evaluation itself.
pub const BOUND_SLACK: f64 = 1e-10;

/// Default gradient-norm stopping tolerance for iteration drivers. Chosen
/// above the double-precision error plateau of well-scaled quadratics
/// (~1e-15 relative) so recorded traces stay inside the regime where the
/// theoretical envelopes are meaningful.
pub const GRAD_TOL_DEFAULT: f64 = 1e-9;

/// Iterate norm beyond which a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// An eigenvalue with modulus below `SINGULARITY_REL · max|λ|` marks a
/// system as numerically singular.
pub const SINGULARITY_REL: f64 = 1e-12;

/// Relative agreement expected between an analytic gradient and central
/// finite differences with step `1e-5·(1+|x_l|)` (truncation ~h², rounding
/// ~eps/h; the crossover sits near 1e-5 in double precision).
pub const FINITE_DIFF_REL: f64 = 1e-5;

/// Residual tolerance for span-membership certificates, relative to
/// `1 + ‖x‖`. The growing gradient span is orthonormalized incrementally;
/// the surviving error is conditioning of the original (near-linearly-
/// dependent) spanning set.
pub const SPAN_RESIDUAL: f64 = 1e-8;
