//! Centralized numeric tolerances.
//!
//! Every threshold used by the library and its test suites is defined here so
//! that implementation and verification reference the same constants.

/// Maximum Frobenius deviation of `basis^T basis` from the identity for a
/// valid subspace basis.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// Maximum Frobenius norm of `basis^T direction` (relative to the direction
/// scale) for a valid tangent vector. Horizontal-space condition.
pub const HORIZONTAL_TOL: f64 = 1e-10;

/// Relative singular-value threshold below which a column is treated as
/// numerically dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Maximum entrywise asymmetry `|M_ij - M_ji|` accepted by the symmetric
/// eigensolver front end.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Spectral gap below which a top-d eigenspace is flagged as degenerate.
pub const DEGENERATE_GAP_TOL: f64 = 1e-12;

/// Tolerance for projector identities (idempotence, symmetry) and for
/// comparing subspaces through their projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Agreement between the principal-angle chordal distance and the projector
/// Frobenius form `(1/sqrt(2)) * ||P_A - P_B||_F` when dimensions match.
pub const CHORDAL_FROBENIUS_TOL: f64 = 1e-10;

/// Guaranteed accuracy of `sample_ball_boundary`: the returned subspace sits
/// within this chordal distance of the requested radius.
pub const BOUNDARY_SAMPLE_TOL: f64 = 1e-6;

/// Lower bracket offset for the dual bisection: lambda_lo = 2 + GAP_FLOOR.
/// The open interval (2, .] cannot be bisected from 2 exactly; the floor
/// keeps the spectral gap strictly positive.
pub const GAP_FLOOR: f64 = 1e-8;

/// Default bisection tolerance on `|h(lambda)|`.
pub const DEFAULT_EPS_BIS: f64 = 1e-6;

/// Safety cap on bisection iterations.
pub const BISECTION_MAX_ITERS: usize = 200;

/// Boundary activity: an active solution satisfies
/// `|d_c(W*, center) - rho| <= BOUNDARY_ACTIVITY_FACTOR * eps_bis`.
pub const BOUNDARY_ACTIVITY_FACTOR: f64 = 10.0;

/// Nudge applied to lambda when the eigenvalue gap at index d degenerates
/// during bisection; one retry before flagging the solution.
pub const TIE_PERTURB: f64 = 1e-9;

/// Smallest admissible uncertainty radius.
pub const RHO_FLOOR: f64 = 1e-6;

/// The adaptive radius is clamped below `sqrt(k) - RHO_MARGIN` so the inner
/// maximization hypothesis `rho < sqrt(k)` holds strictly.
pub const RHO_MARGIN: f64 = 1e-3;

/// Default outer step size. The theoretically optimal 1/L is not computable;
/// this default is safe at desk scale.
pub const DEFAULT_ALPHA: f64 = 0.25;

/// Step size used by descent-sensitive verification runs.
pub const DESCENT_TEST_ALPHA: f64 = 0.05;

/// Gradient norm at which the deep-descent optimum oracle stops.
pub const STATIONARY_GRAD_TOL: f64 = 1e-9;

/// Iteration cap for the deep-descent optimum oracle.
pub const F_STAR_MAX_ITERS: usize = 10_000;

/// Steps with `F_before - F*` below this are excluded from contraction
/// estimation (no measurable progress possible).
pub const CONTRACTION_MIN_GAP: f64 = 1e-8;

/// Geodesic step used by finite-difference gradient checks.
pub const FD_STEP: f64 = 1e-5;

/// Accepted relative error between analytic and finite-difference
/// directional derivatives.
pub const FD_REL_TOL: f64 = 1e-5;

/// Additive slack allowed when asserting per-iteration descent.
pub const DESCENT_SLACK: f64 = 1e-9;

/// Additive slack allowed when asserting the gradient-domination inequality.
pub const PL_SLACK: f64 = 1e-6;

/// Slack for the spectral-gap lower bound `delta_d(B) >= lambda - 2`.
pub const SPECTRAL_GAP_SLACK: f64 = 1e-10;

/// Slack for the eigenspace perturbation bound
/// `d_c(V_d(B), center) <= sqrt(k) / (lambda - 2)`.
pub const DAVIS_KAHAN_SLACK: f64 = 1e-9;

/// Slack for sampled-maximizer dominance: the closed-form objective must
/// exceed every sampled feasible value minus this.
pub const DOMINANCE_SLACK: f64 = 1e-5;

/// Slack for monotonicity checks of `h` along a lambda grid.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Agreement required between the dense and low-rank eigensolver paths
/// (projector distance of the resulting maximizers).
pub const EIGEN_PATH_AGREE_TOL: f64 = 1e-8;
