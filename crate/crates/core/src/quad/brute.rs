//! Direct two-dimensional quadrature of radially reducible integrands.
//! These are the independent oracles for the separable reductions.

use std::cell::RefCell;

use super::adaptive::{integrate, integrate_halfline_with, QuadOptions};
use super::moments::omega;
use crate::error::{Error, Result};

fn line<F: Fn(f64) -> f64>(f: F, truncation: f64, opts: QuadOptions) -> Result<f64> {
    if truncation.is_infinite() {
        integrate_halfline_with(f, 0.0, opts).map(|r| r.value)
    } else {
        integrate(f, 0.0, truncation, opts).map(|r| r.value)
    }
}

/// `ω ∫_0^T ∫_0^T g(r, x_n) r^{n-2} dr dx_n`, the integral over `R^n_+` of a
/// function of `(|x̃|, x_n)`. Pass `f64::INFINITY` for no truncation.
pub fn brute_halfspace<G: Fn(f64, f64) -> f64>(
    n: usize,
    g: G,
    truncation: f64,
    rel_tol: f64,
) -> Result<f64> {
    let p = n as f64 - 2.0;
    let plain = QuadOptions {
        rel_tol: rel_tol * 0.1,
        abs_tol: 0.0,
        max_panels: 2000,
    };
    // Far out in x_n the inner integrands are built from subnormal factors
    // and cannot meet a relative target. Those retry against an absolute
    // floor set by a pilot pass over moderate x_n.
    let mut scale: f64 = 0.0;
    for k in -12..=12 {
        let xn = if k == -12 { 0.0 } else { 10f64.powf(k as f64 / 4.0) };
        if xn > truncation {
            continue;
        }
        let v = line(|r| g(r, xn) * r.powf(p), truncation, plain)?;
        scale = scale.max(v.abs() * xn.max(1.0));
    }
    let floor = QuadOptions {
        abs_tol: rel_tol * 1e-4 * scale,
        ..plain
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer = |xn: f64| {
        let f = |r: f64| g(r, xn) * r.powf(p);
        match line(f, truncation, plain).or_else(|_| line(f, truncation, floor)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let v = line(outer, truncation, QuadOptions { rel_tol, ..plain })?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(omega(n) * v)
}

/// `ω ∫_0^T g(r) r^{n-2} dr`, the integral over `R^{n-1}` of a radial function.
pub fn brute_boundary<G: Fn(f64) -> f64>(
    n: usize,
    g: G,
    truncation: f64,
    rel_tol: f64,
) -> Result<f64> {
    let p = n as f64 - 2.0;
    let v = line(|r| g(r) * r.powf(p), truncation, QuadOptions::rel(rel_tol))?;
    Ok(omega(n) * v)
}
