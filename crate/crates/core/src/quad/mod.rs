//! Quadrature on half-lines, Beta moments and separable half-space integrals.

mod adaptive;
mod brute;
mod moments;
mod sphere;

pub use adaptive::{
    integrate, integrate_halfline, integrate_halfline_with, integrate_split, kronrod15,
    QuadOptions, QuadResult,
};
pub use brute::{brute_boundary, brute_halfspace};
pub use moments::{
    beta_moment, boundary_moment, halfspace_moment, omega, phi, phi_hat, phi_tilde, t_moment,
    MomentTable,
};
pub use sphere::{
    sphere_abs_monomial_average, sphere_monomial_average, sphere_monomial_average_quadrature,
};
