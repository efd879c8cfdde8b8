//! Numerical tolerances. The theory assumes exact arithmetic; these are the
//! bands used to decide signs and equalities in floating point.

/// Absolute slack allowed on each halfspace for membership tests.
pub const MEMBERSHIP: f64 = 1e-9;

/// Relative gap tolerated between adjacent pieces on shared boundaries.
pub const CONTINUITY_RTOL: f64 = 1e-7;

/// Absolute per-entry asymmetry accepted before symmetrizing a matrix.
pub const SYMMETRY: f64 = 1e-12;

/// Default relative tolerance for treating two eigenvalues as equal.
pub const EIG_CLUSTER: f64 = 1e-9;

/// Band around zero for the sign of the linear coefficient along minimizing directions.
pub const SIGN: f64 = 1e-9;

/// Relative tolerance for ties with the overall threshold.
pub const ACTIVE_SET_RTOL: f64 = 1e-9;

/// Values of LP optima treated as zero.
pub const LP_ZERO: f64 = 1e-9;

/// A direction is interior to a cone when every normalized slack is below `-INTERIOR`.
pub const INTERIOR: f64 = 1e-9;
