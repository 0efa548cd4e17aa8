//! The ball picture: the radius `R` with `D = (1+R²)/(2R)` and the Steklov
//! eigenpairs of `Δ_H φ - nφ = 0`, `∂φ/∂ν_H = μφ` on `B_R`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubble::Residual;
use crate::error::{Error, Result};
use crate::report::Check;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicPicture {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub mu0: f64,
    pub mu1: f64,
}

pub fn hyperbolic_picture(d: f64) -> Result<HyperbolicPicture> {
    if !(d > 1.0) || !d.is_finite() {
        return Err(Error::Domain(format!("the ball picture needs D > 1, got {d}")));
    }
    // R = D - sqrt(D²-1) = 1/(D + sqrt(D²-1)); the second form avoids
    // cancellation for large D.
    let r = 1.0 / (d + (d * d - 1.0).sqrt());
    let mu0 = 2.0 * r / (1.0 + r * r);
    let mu1 = (1.0 + r * r) / (2.0 * r);
    Ok(HyperbolicPicture { d, r, mu0, mu1 })
}

impl HyperbolicPicture {
    pub fn invariant_checks(&self) -> Vec<Check> {
        let tol = crate::tol::CLOSED_FORM;
        vec![
            Check::at_most(
                "R = D - sqrt(D^2-1)",
                (self.r - (self.d - (self.d * self.d - 1.0).sqrt())).abs() / self.r,
                // The direct formula loses digits to cancellation as D grows.
                tol * self.d * self.d,
            ),
            Check::at_most("0 < R < 1", if self.r > 0.0 && self.r < 1.0 { 0.0 } else { 1.0 }, 0.0),
            Check::at_most(
                "(1+R^2)/(2R) = D",
                ((1.0 + self.r * self.r) / (2.0 * self.r) - self.d).abs() / self.d,
                tol,
            ),
            Check::at_most("mu1 = D", (self.mu1 - self.d).abs() / self.d, tol),
            Check::at_most("mu0 * mu1 = 1", (self.mu0 * self.mu1 - 1.0).abs(), tol),
        ]
    }
}

/// First-order term of the hyperbolic Laplacian on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Operator {
    /// `((1-|x|²)²/4)Δv + ((n-2)/2)∇v·x`, as written in the source.
    Written,
    /// `((1-|x|²)²/4)Δv + ((n-2)(1-|x|²)/2)∇v·x`, the Poincaré-ball
    /// Laplace–Beltrami operator.
    Standard,
}

/// Radial profile of the first eigenfunctions `x_i g(|x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FirstMode {
    /// `g = |x|/(1-|x|²)`, as written in the source.
    Written,
    /// `g = 1/(1-|x|²)`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Eigenfunction {
    /// `φ₀ = (1+|x|²)/(1-|x|²)`, eigenvalue `μ₀`.
    Zero,
    /// `φ₁^i = x_i g(|x|)`, eigenvalue `μ₁`.
    One { i: usize, profile: FirstMode },
}

/// `(g, g', g'')` at radius `ρ`.
fn profile(e: Eigenfunction, rho: f64) -> (f64, f64, f64) {
    let s = 1.0 - rho * rho;
    match e {
        Eigenfunction::Zero => (
            (1.0 + rho * rho) / s,
            4.0 * rho / (s * s),
            4.0 / (s * s) + 16.0 * rho * rho / (s * s * s),
        ),
        Eigenfunction::One {
            profile: FirstMode::Corrected,
            ..
        } => (1.0 / s, 2.0 * rho / (s * s), 2.0 / (s * s) + 8.0 * rho * rho / (s * s * s)),
        Eigenfunction::One {
            profile: FirstMode::Written,
            ..
        } => (
            rho / s,
            (1.0 + rho * rho) / (s * s),
            (6.0 * rho + 2.0 * rho.powi(3)) / (s * s * s),
        ),
    }
}

/// `φ`, `Δφ`, `∇φ·x` and `∂_ρφ` at `x`.
fn eval(e: Eigenfunction, x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (g, g1, g2) = profile(e, rho);
    match e {
        Eigenfunction::Zero => {
            let lap = g2 + if rho > 0.0 { (n - 1.0) / rho * g1 } else { (n - 1.0) * g2 };
            (g, lap, rho * g1, g1)
        }
        Eigenfunction::One { i, .. } => {
            let xi = x[i];
            // Δ(x_i g) = x_i (g'' + (n+1) g'/ρ)
            let lap = xi * (g2 + if rho > 0.0 { (n + 1.0) / rho * g1 } else { (n + 1.0) * g2 });
            let dot = xi * (g + rho * g1);
            let dr = if rho > 0.0 { xi / rho * (g + rho * g1) } else { 0.0 };
            (xi * g, lap, dot, dr)
        }
    }
}

/// Interior residual `Δ_Hφ - nφ` at `x` (`|x| < R`) and boundary residual
/// `((1-R²)/2)∂_ρφ - μφ` at `x·R/|x|`.
pub fn steklov_residual(
    hp: &HyperbolicPicture,
    op: Operator,
    e: Eigenfunction,
    x: &[f64],
) -> (Residual, Residual) {
    let n = x.len() as f64;
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let (phi, lap, dot, _) = eval(e, x);
    let a = (1.0 - s2).powi(2) / 4.0;
    let b = match op {
        Operator::Written => (n - 2.0) / 2.0,
        Operator::Standard => (n - 2.0) * (1.0 - s2) / 2.0,
    };
    let interior = Residual {
        value: a * lap + b * dot - n * phi,
        scale: (a * lap).abs() + (b * dot).abs() + (n * phi).abs(),
    };

    let rho = s2.sqrt();
    let xb: Vec<f64> = if rho > 0.0 {
        x.iter().map(|v| v * hp.r / rho).collect()
    } else {
        let mut v = vec![0.0; x.len()];
        v[0] = hp.r;
        v
    };
    let (phi_b, _, _, dr) = eval(e, &xb);
    let mu = match e {
        Eigenfunction::Zero => hp.mu0,
        Eigenfunction::One { .. } => hp.mu1,
    };
    let c = (1.0 - hp.r * hp.r) / 2.0;
    let boundary = Residual {
        value: c * dr - mu * phi_b,
        scale: (c * dr).abs() + (mu * phi_b).abs(),
    };
    (interior, boundary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantReport {
    pub operator: Operator,
    pub first_mode: FirstMode,
    /// Largest relative interior residual of `φ₀` and `φ₁^i`.
    pub phi0_interior: f64,
    pub phi1_interior: f64,
    pub phi0_boundary: f64,
    pub phi1_boundary: f64,
    pub annihilates: bool,
}

/// Evaluates every operator / first-mode combination at `count` random
/// points of `B_R` in dimension `n`.
pub fn steklov_variants(
    hp: &HyperbolicPicture,
    n: usize,
    count: usize,
    seed: u64,
    tol: f64,
) -> Vec<VariantReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..count)
        .map(|_| loop {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-hp.r..hp.r)).collect();
            let s: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s < 0.98 * hp.r && s > 1e-3 * hp.r {
                break x;
            }
        })
        .collect();
    let mut out = Vec::new();
    for op in [Operator::Written, Operator::Standard] {
        for fm in [FirstMode::Written, FirstMode::Corrected] {
            let mut rep = VariantReport {
                operator: op,
                first_mode: fm,
                phi0_interior: 0.0,
                phi1_interior: 0.0,
                phi0_boundary: 0.0,
                phi1_boundary: 0.0,
                annihilates: false,
            };
            for (k, x) in pts.iter().enumerate() {
                let (i0, b0) = steklov_residual(hp, op, Eigenfunction::Zero, x);
                let e1 = Eigenfunction::One {
                    i: k % n,
                    profile: fm,
                };
                let (i1, b1) = steklov_residual(hp, op, e1, x);
                rep.phi0_interior = rep.phi0_interior.max(i0.relative());
                rep.phi0_boundary = rep.phi0_boundary.max(b0.relative());
                rep.phi1_interior = rep.phi1_interior.max(i1.relative());
                rep.phi1_boundary = rep.phi1_boundary.max(b1.relative());
            }
            rep.annihilates = [
                rep.phi0_interior,
                rep.phi1_interior,
                rep.phi0_boundary,
                rep.phi1_boundary,
            ]
            .iter()
            .all(|v| *v <= tol);
            out.push(rep);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_two() {
        let hp = hyperbolic_picture(2.0).unwrap();
        assert!((hp.r - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((hp.mu1 - 2.0).abs() < 1e-14);
        assert!(hyperbolic_picture(1.0).is_err());
        assert!(hyperbolic_picture(0.5).is_err());
    }

    #[test]
    fn limits_near_one() {
        let hp = hyperbolic_picture(1.0 + 1e-6).unwrap();
        assert!(hp.r < 1.0 && hp.r > 0.99);
        assert!(hp.mu0 < 1.0 && hp.mu0 > 0.999);
        assert!(hp.mu1 > 1.0 && hp.mu1 < 1.001);
    }

    #[test]
    fn round_trip() {
        for d in [1.5, 2.0, 3.0, 10.0] {
            let hp = hyperbolic_picture(d).unwrap();
            assert!(hp.invariant_checks().iter().all(|c| c.pass), "{d}");
        }
    }

    #[test]
    fn only_the_standard_operator_with_corrected_mode_annihilates() {
        let hp = hyperbolic_picture(2.0).unwrap();
        let reps = steklov_variants(&hp, 8, 50, 1, 1e-10);
        for r in &reps {
            let expect = r.operator == Operator::Standard && r.first_mode == FirstMode::Corrected;
            assert_eq!(r.annihilates, expect, "{r:?}");
        }
    }

    #[test]
    fn phi0_at_origin_under_both_operators() {
        let hp = hyperbolic_picture(2.0).unwrap();
        let x = vec![0.0; 8];
        for op in [Operator::Written, Operator::Standard] {
            let (i, _) = steklov_residual(&hp, op, Eigenfunction::Zero, &x);
            assert!(i.relative() <= 1e-10);
        }
    }
}
