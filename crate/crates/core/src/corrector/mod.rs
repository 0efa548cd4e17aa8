//! The corrector `V_p`: modal decomposition of the forcing, the sparse
//! half-space solve with kernel deflation, diagnostics, and the ball
//! picture used to check the eigenvalue structure.

mod diagnostics;
mod grid;
mod hyperbolic;
mod io;
mod modes;
mod solve;

pub use diagnostics::{corrector_diagnostics, BoundaryIdentity, DecayFit, Diagnostics};
pub use grid::{fornberg, Axis, Grid, GridSpec};
pub use hyperbolic::{
    hyperbolic_picture, steklov_residual, steklov_variants, Eigenfunction, FirstMode,
    HyperbolicPicture, Operator, VariantReport,
};
pub use io::{ModeHeader, Monomial, SolutionHeader, HEADER_FILE, PROFILE_COLUMNS};
pub use modes::{angular_mean, angular_product, decompose_forcing, reconstruction_error, Decomposition, ForcingMode};
pub use solve::{
    angular_eigenvalue, dilation_profile, solve_corrector, solve_degree, CorrectorSolution, ModeSolution,
    RESIDUAL_POINTS, SCHEME_POINTS,
};
