//! Angular decomposition of the forcing into spherical-harmonic modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bubble::Bubble;
use crate::error::{Error, Result};
use crate::geom::{forcing_ep, forcing_polys, forcing_radials, AngularRule, TangentPoly};
use crate::model::{CurvatureFrame, ProblemPoint};
use crate::quad::omega;
use crate::tol;

/// `Y(x̃/|x̃|) e(|x̃|, x_n)`: `Y` is a harmonic homogeneous polynomial of
/// degree `d`, and `e = r^q g_term(r, x_n)` with `q` the degree of the
/// forcing term it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingMode {
    pub d: u32,
    /// Index of the forcing term, see [`forcing_polys`].
    pub term: usize,
    /// Total polynomial degree of that term.
    pub q: u32,
    pub weight: TangentPoly,
}

impl ForcingMode {
    /// Radial profile `e(r, z)` for the normalized bubble.
    pub fn profile(&self, pt: &ProblemPoint) -> impl Fn(f64, f64) -> f64 {
        let g = forcing_radials(pt)[self.term];
        let q = self.q as i32;
        move |r, z| r.powi(q) * g(r, z)
    }

    /// `Y` at the unit vector along `x̃`.
    pub fn angular(&self, xt: &[f64]) -> f64 {
        let r = xt.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return if self.d == 0 { self.weight.eval(xt) } else { 0.0 };
        }
        let u: Vec<f64> = xt.iter().map(|v| v / r).collect();
        self.weight.eval(&u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub modes: Vec<ForcingMode>,
    /// Sum of absolute coefficients of odd-degree monomials in the forcing
    /// polynomials. These would feed the degree-1 and degree-3 modes.
    pub odd_norm: f64,
    /// Largest relative reconstruction error over the sample points.
    pub reconstruction: f64,
}

/// Splits `E_p` for the normalized bubble into modes of degree 0, 2 and 4.
pub fn decompose_forcing(frame: &CurvatureFrame, b: &Bubble) -> Result<Decomposition> {
    if b.delta != 1.0 || b.center.iter().any(|c| *c != 0.0) {
        return Err(Error::Domain("forcing modes are defined for the normalized bubble".into()));
    }
    let polys = forcing_polys(frame);
    // Relative to the frame rather than to the polynomials: the boundary
    // tensor cancels out of E_p and leaves only rounding noise.
    let scale = forcing_polys(&frame.entrywise_abs())
        .iter()
        .map(|p| p.max_abs_coeff())
        .fold(0.0, f64::max);
    let eps = 1e-13 * scale;
    let mut modes = Vec::new();
    let mut odd_norm = 0.0;
    for (t, p) in polys.iter().enumerate() {
        let p = p.pruned(eps);
        for q in p.degrees() {
            let h = p.homogeneous(q);
            if q % 2 == 1 {
                odd_norm += h.terms.values().map(|c| c.abs()).sum::<f64>();
                continue;
            }
            for (d, y) in h.harmonic_split(q) {
                let y = y.pruned(eps);
                if y.is_empty() {
                    continue;
                }
                if !matches!(d, 0 | 2 | 4) {
                    return Err(Error::Domain(format!("unexpected angular degree {d}")));
                }
                modes.push(ForcingMode {
                    d,
                    term: t,
                    q,
                    weight: y,
                });
            }
        }
    }
    let mut dec = Decomposition {
        modes,
        odd_norm,
        reconstruction: 0.0,
    };
    dec.reconstruction = reconstruction_error(&dec, frame, b, 100, 7);
    if !(dec.reconstruction <= tol::DECOMPOSITION) {
        return Err(Error::Decomposition(dec.reconstruction));
    }
    Ok(dec)
}

/// Largest `|Σ Y e - E_p| / scale` over `count` random points. The scale is
/// `E_p` of the entrywise absolute frame at `|x|`, which bounds every term
/// that cancels, so nodal sets and cancelling tensors do not inflate it.
pub fn reconstruction_error(
    dec: &Decomposition,
    frame: &CurvatureFrame,
    b: &Bubble,
    count: usize,
    seed: u64,
) -> f64 {
    let n = b.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: Vec<_> = dec.modes.iter().map(|m| m.profile(&b.pt)).collect();
    let abs_polys = forcing_polys(&frame.entrywise_abs());
    let radials = forcing_radials(&b.pt);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let v: f64 = rng.random_range(-3.0..3.0);
                if i + 1 == n {
                    v.abs()
                } else {
                    v
                }
            })
            .collect();
        let xt = &x[..n - 1];
        let r = xt.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sum: f64 = dec
            .modes
            .iter()
            .zip(&profiles)
            .map(|(m, e)| m.angular(xt) * e(r, x[n - 1]))
            .sum();
        let xa: Vec<f64> = xt.iter().map(|v| v.abs()).collect();
        let bound: f64 = abs_polys
            .iter()
            .zip(&radials)
            .map(|(p, g)| p.eval(&xa) * g(r, x[n - 1]).abs())
            .sum();
        let exact = forcing_ep(frame, b, &x);
        let s = bound.max(exact.abs());
        if s > 0.0 {
            worst = worst.max((sum - exact).abs() / s);
        }
    }
    worst
}

/// `∫_{S^{n-2}} Y_a Y_b dσ`, zero for different degrees.
pub fn angular_product(n: usize, a: &ForcingMode, b: &ForcingMode) -> f64 {
    if a.d != b.d {
        return 0.0;
    }
    let prod = a.weight.mul(&b.weight);
    let avg: f64 = prod
        .angular_average(AngularRule::ClosedForm)
        .iter()
        .filter(|d| !d.odd_only)
        .map(|d| d.average)
        .sum();
    omega(n) * avg
}

/// `∫_{S^{n-2}} Y dσ`; nonzero only for degree 0.
pub fn angular_mean(n: usize, a: &ForcingMode) -> f64 {
    if a.d != 0 {
        return 0.0;
    }
    let avg: f64 = a
        .weight
        .angular_average(AngularRule::ClosedForm)
        .iter()
        .filter(|d| !d.odd_only)
        .map(|d| d.average)
        .sum();
    omega(n) * avg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt() -> ProblemPoint {
        ProblemPoint::with_d(8, -56.0, 2.0, 1.0)
    }

    #[test]
    fn zero_frame_has_no_modes() {
        let dec = decompose_forcing(&CurvatureFrame::zero(8), &Bubble::normalized(pt())).unwrap();
        assert!(dec.modes.is_empty());
        assert_eq!(dec.odd_norm, 0.0);
    }

    #[test]
    fn gauge_frame_is_pure_degree_two() {
        let fr = CurvatureFrame::random_gauge(8, 3, 1.0);
        let dec = decompose_forcing(&fr, &Bubble::normalized(pt())).unwrap();
        assert_eq!(dec.modes.len(), 1);
        assert_eq!(dec.modes[0].d, 2);
        assert!(dec.reconstruction <= tol::DECOMPOSITION, "{}", dec.reconstruction);
    }

    #[test]
    fn normal_trace_gives_degree_zero() {
        let mut fr = CurvatureFrame::zero(8);
        for i in 0..7 {
            fr.normal[i * 7 + i] = 1.0 + i as f64;
        }
        let dec = decompose_forcing(&fr, &Bubble::normalized(pt())).unwrap();
        let degrees: Vec<u32> = dec.modes.iter().map(|m| m.d).collect();
        assert!(degrees.contains(&0) && degrees.contains(&2));
        assert!(dec.reconstruction <= tol::DECOMPOSITION);
    }
}
