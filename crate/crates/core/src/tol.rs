//! Default tolerances.
//!
//! Operations take their tolerances as parameters; these are the defaults
//! the verification suites and the command line fall back to.

/// Target relative error for one-dimensional adaptive quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Target relative error for the two-dimensional quadrature oracles.
pub const QUAD_REL_TOL_2D: f64 = 1e-8;

/// Panel budget for one adaptive integration.
pub const QUAD_MAX_PANELS: usize = 4000;

/// Closed-form identities evaluated in floating point.
pub const CLOSED_FORM: f64 = 1e-14;

/// Symmetry checks on curvature tensors.
pub const FRAME_SYMMETRY: f64 = 1e-10;

/// Trace conditions of the conformal Fermi gauge.
pub const FRAME_TRACE: f64 = 1e-10;

/// Symmetry and definiteness checks on Hessians.
pub const HESSIAN_SYMMETRY: f64 = 1e-12;

/// Relative band inside which two bubble energies count as equal when
/// selecting a blow-up point.
pub const ENERGY_TIE_BAND: f64 = 1e-9;

/// Reconstruction error allowed when splitting the forcing into angular modes.
pub const DECOMPOSITION: f64 = 1e-10;

/// Smallest admissible singular value of the deflated corrector operator,
/// relative to its norm.
pub const DEFLATION_SIGMA: f64 = 1e-10;
