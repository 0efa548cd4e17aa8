//! Domain types and hypothesis checks.

mod frame;
mod point;
mod tensor;

pub use frame::{
    min_eigenvalue, validate_frame, CurvatureFrame, FrameJson, FrameReport, HessianData,
    MatrixJson, TensorJson,
};
pub use point::{
    alpha_n, c_n, two_sharp, two_star, validate_point, PointReport, ProblemPoint,
    OVERRIDE_MIN_DIM, PAPER_MIN_DIM,
};
pub use tensor::{algebraic_projection, symmetry_violations, weyl_projection, Rank4};
