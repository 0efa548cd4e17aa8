//! The half-space bubble, its Jacobi fields and the bubble energy.

use serde::Serialize;

use crate::error::Result;
use crate::model::ProblemPoint;
use crate::quad::MomentTable;

/// `U_{δ,x̃₀}(x) = c δ^k (|x - x₀|² - δ²)^{-k}`, with `k = (n-2)/2`,
/// `c = α_n |K|^{-(n-2)/4}` and `x₀ = (x̃₀, -Dδ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub pt: ProblemPoint,
    pub delta: f64,
    pub center: Vec<f64>,
}

/// Value, gradient and row-major Hessian of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct UDerivs {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

/// A residual together with the magnitude of the terms that cancel in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualPair {
    pub interior: Residual,
    pub boundary: Residual,
}

/// `P(x) Q(x)^{-p}` with `P` a quadratic polynomial.
struct PolyOverQ {
    p_val: f64,
    p_grad: Vec<f64>,
    p_lap: f64,
    power: f64,
}

impl Bubble {
    pub fn normalized(pt: ProblemPoint) -> Self {
        Bubble {
            pt,
            delta: 1.0,
            center: vec![0.0; pt.n - 1],
        }
    }

    pub fn scaled(pt: ProblemPoint, delta: f64, center: Vec<f64>) -> Self {
        assert_eq!(center.len(), pt.n - 1, "centre must have n-1 components");
        Bubble { pt, delta, center }
    }

    pub fn n(&self) -> usize {
        self.pt.n
    }

    fn k(&self) -> f64 {
        (self.pt.nf() - 2.0) / 2.0
    }

    /// Amplitude `c δ^k`.
    fn amp(&self) -> f64 {
        self.pt.bubble_amp() * self.delta.powf(self.k())
    }

    /// `y = x - x₀`.
    fn shift(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = x.to_vec();
        for i in 0..n - 1 {
            y[i] -= self.center[i];
        }
        y[n - 1] += self.pt.d() * self.delta;
        y
    }

    /// `Q = |x - x₀|² - δ²`, positive on the closed half-space.
    pub fn q(&self, x: &[f64]) -> f64 {
        let y = self.shift(x);
        y.iter().map(|v| v * v).sum::<f64>() - self.delta * self.delta
    }

    pub fn eval_u(&self, x: &[f64]) -> f64 {
        self.amp() * self.q(x).powf(-self.k())
    }

    pub fn eval_u_derivs(&self, x: &[f64]) -> UDerivs {
        let n = self.n();
        let k = self.k();
        let y = self.shift(x);
        let q = y.iter().map(|v| v * v).sum::<f64>() - self.delta * self.delta;
        let a = self.amp();
        let value = a * q.powf(-k);
        let g1 = -2.0 * k * a * q.powf(-k - 1.0);
        let grad = y.iter().map(|yi| g1 * yi).collect();
        let h2 = 4.0 * k * (k + 1.0) * a * q.powf(-k - 2.0);
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = h2 * y[i] * y[j] + if i == j { g1 } else { 0.0 };
            }
        }
        UDerivs { value, grad, hess }
    }

    pub fn laplacian_u(&self, x: &[f64]) -> f64 {
        let n = self.n() as f64;
        let k = self.k();
        let y = self.shift(x);
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let q = r2 - self.delta * self.delta;
        let a = self.amp();
        a * (4.0 * k * (k + 1.0) * r2 * q.powf(-k - 2.0) - 2.0 * k * n * q.powf(-k - 1.0))
    }

    /// Residuals of `-c_n ΔU + |K| U^{(n+2)/(n-2)} = 0` at `x` and of
    /// `(2/(n-2)) ∂_ν U - H U^{n/(n-2)} = 0` at the boundary point below `x`,
    /// with `ν = -e_n`.
    pub fn residual_model(&self, x: &[f64]) -> ResidualPair {
        let n = self.n();
        let nf = self.pt.nf();
        let u = self.eval_u(x);
        let t1 = -self.pt.c_n() * self.laplacian_u(x);
        let t2 = self.pt.abs_k() * u.powf((nf + 2.0) / (nf - 2.0));
        let mut xb = x.to_vec();
        xb[n - 1] = 0.0;
        let d = self.eval_u_derivs(&xb);
        let b1 = 2.0 / (nf - 2.0) * (-d.grad[n - 1]);
        let b2 = self.pt.h * d.value.powf(nf / (nf - 2.0));
        ResidualPair {
            interior: Residual {
                value: t1 + t2,
                scale: t1.abs().max(t2.abs()),
            },
            boundary: Residual {
                value: b1 - b2,
                scale: b1.abs().max(b2.abs()),
            },
        }
    }

    fn jacobi_poly(&self, s: usize, x: &[f64]) -> PolyOverQ {
        let n = self.n();
        let k = self.k();
        let a = self.amp();
        if s + 1 < n {
            let mut p_grad = vec![0.0; n];
            p_grad[s] = -2.0 * k * a;
            PolyOverQ {
                p_val: -2.0 * k * a * (x[s] - self.center[s]),
                p_grad,
                p_lap: 0.0,
                power: k + 1.0,
            }
        } else {
            let mut rel = x.to_vec();
            for i in 0..n - 1 {
                rel[i] -= self.center[i];
            }
            let r2: f64 = rel.iter().map(|v| v * v).sum();
            let d = self.pt.d();
            let dl2 = self.delta * self.delta;
            PolyOverQ {
                p_val: k * a * (r2 + (1.0 - d * d) * dl2),
                p_grad: rel.iter().map(|v| 2.0 * k * a * v).collect(),
                p_lap: 2.0 * n as f64 * k * a,
                power: k + 1.0,
            }
        }
    }

    /// Jacobi field `𝔧_s`, zero-based: `s < n-1` are the tangential
    /// translations `∂_s U`, `s = n-1` is the dilation field.
    pub fn jacobi(&self, s: usize, x: &[f64]) -> f64 {
        let p = self.jacobi_poly(s, x);
        p.p_val * self.q(x).powf(-p.power)
    }

    /// The dilation field written as `-(n-2)/2 U - (x - x̄)·∇U`.
    pub fn jacobi_dilation_alt(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let d = self.eval_u_derivs(x);
        let mut dot = 0.0;
        for i in 0..n {
            let c = if i + 1 < n { self.center[i] } else { 0.0 };
            dot += (x[i] - c) * d.grad[i];
        }
        -self.k() * d.value - dot
    }

    /// Gradient of `𝔧_s`.
    pub fn jacobi_grad(&self, s: usize, x: &[f64]) -> Vec<f64> {
        let p = self.jacobi_poly(s, x);
        let y = self.shift(x);
        let q = self.q(x);
        let qp = q.powf(-p.power);
        let q1 = -2.0 * p.power * q.powf(-p.power - 1.0);
        (0..self.n())
            .map(|i| p.p_grad[i] * qp + p.p_val * q1 * y[i])
            .collect()
    }

    /// `Δ𝔧_s` together with the sum of magnitudes of its pieces.
    fn jacobi_laplacian(&self, s: usize, x: &[f64]) -> (f64, f64) {
        let n = self.n() as f64;
        let p = self.jacobi_poly(s, x);
        let y = self.shift(x);
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let q = r2 - self.delta * self.delta;
        let pw = p.power;
        let t1 = p.p_lap * q.powf(-pw);
        let gy: f64 = p.p_grad.iter().zip(&y).map(|(g, v)| g * v).sum();
        let t2 = -4.0 * pw * gy * q.powf(-pw - 1.0);
        let t3a = p.p_val * 4.0 * pw * (pw + 1.0) * r2 * q.powf(-pw - 2.0);
        let t3b = -p.p_val * 2.0 * pw * n * q.powf(-pw - 1.0);
        (
            t1 + t2 + t3a + t3b,
            t1.abs() + t2.abs() + t3a.abs() + t3b.abs(),
        )
    }

    /// Residuals of the linearized problem for `𝔧_s`.
    pub fn residual_linearized(&self, s: usize, x: &[f64]) -> ResidualPair {
        let n = self.n();
        let nf = self.pt.nf();
        let cn = self.pt.c_n();
        let j = self.jacobi(s, x);
        let u = self.eval_u(x);
        let (lap, lap_scale) = self.jacobi_laplacian(s, x);
        let pot = self.pt.abs_k() * (nf + 2.0) / (nf - 2.0) * u.powf(4.0 / (nf - 2.0)) * j;
        let mut xb = x.to_vec();
        xb[n - 1] = 0.0;
        let jb = self.jacobi(s, &xb);
        let dn = self.jacobi_grad(s, &xb)[n - 1];
        let ub = self.eval_u(&xb);
        let b1 = 2.0 / (nf - 2.0) * (-dn);
        let b2 = nf / (nf - 2.0) * self.pt.h * ub.powf(2.0 / (nf - 2.0)) * jb;
        ResidualPair {
            interior: Residual {
                value: -cn * lap + pot,
                scale: cn * lap_scale + pot.abs(),
            },
            boundary: Residual {
                value: b1 - b2,
                scale: b1.abs().max(b2.abs()),
            },
        }
    }
}

/// Closed-form bubble energy
/// `a_n |K|^{-(n-2)/2} [-(n-1) φ_{(n+1)/2}(D) + D (D²-1)^{-(n-1)/2}]`.
pub fn bubble_energy(pt: &ProblemPoint) -> Result<f64> {
    let tbl = MomentTable::new(pt.n, pt.d())?;
    bubble_energy_with(pt, &tbl)
}

pub fn bubble_energy_with(pt: &ProblemPoint, tbl: &MomentTable) -> Result<f64> {
    let nf = pt.nf();
    let d = pt.d();
    let sharp = crate::model::two_sharp(pt.n);
    let a_n = pt.alpha_n().powf(sharp) * tbl.omega * tbl.beta(nf - 1.0, nf)? * (nf - 3.0)
        / ((nf - 1.0) * (nf * (nf - 1.0)).sqrt());
    let bracket = -(nf - 1.0) * tbl.phi((nf + 1.0) / 2.0)? + d / (d * d - 1.0).powf((nf - 1.0) / 2.0);
    Ok(a_n / pt.abs_k().powf((nf - 2.0) / 2.0) * bracket)
}

/// The energy `½c_n∫|∇U|² + (|K|/2*)∫U^{2*} - (n-2)H∫_∂U^{2♯}` of the
/// normalized bubble by direct quadrature, independent of the closed form.
pub fn bubble_energy_quadrature(pt: &ProblemPoint, rel_tol: f64) -> Result<f64> {
    use crate::model::{two_sharp, two_star};
    use crate::quad::{brute_boundary, brute_halfspace};
    let n = pt.n;
    let b = Bubble::normalized(*pt);
    let at = |r: f64, z: f64| {
        let mut x = vec![0.0; n];
        x[0] = r;
        x[n - 1] = z;
        x
    };
    let grad = brute_halfspace(
        n,
        |r, z| b.eval_u_derivs(&at(r, z)).grad.iter().map(|g| g * g).sum::<f64>(),
        f64::INFINITY,
        rel_tol,
    )?;
    let pot = brute_halfspace(n, |r, z| b.eval_u(&at(r, z)).powf(two_star(n)), f64::INFINITY, rel_tol)?;
    let bdry = brute_boundary(n, |r| b.eval_u(&at(r, 0.0)).powf(two_sharp(n)), f64::INFINITY, rel_tol * 1e-2)?;
    Ok(0.5 * pt.c_n() * grad + pt.abs_k() / two_star(n) * pot - (pt.nf() - 2.0) * pt.h * bdry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt8() -> ProblemPoint {
        ProblemPoint::new(8, -56.0, 2.0, 1.0)
    }

    #[test]
    fn value_at_origin() {
        let b = Bubble::normalized(pt8());
        let x = vec![0.0; 8];
        let expect = crate::model::alpha_n(8) * 56f64.powf(-1.5) / 27.0;
        assert!((b.eval_u(&x) - expect).abs() < 1e-15 * expect);
        let d = b.eval_u_derivs(&x);
        assert!(d.grad[..7].iter().all(|g| *g == 0.0));
    }

    #[test]
    fn dilation_field_at_origin() {
        let b = Bubble::normalized(pt8());
        let x = vec![0.0; 8];
        let c = crate::model::alpha_n(8) * 56f64.powf(-1.5);
        let expect = c * 3.0 * (1.0 - 4.0) / 81.0;
        assert!((b.jacobi(7, &x) - expect).abs() < 1e-14 * expect.abs());
        assert_eq!(b.jacobi(0, &x), 0.0);
    }

    #[test]
    fn model_residuals() {
        let b = Bubble::normalized(pt8());
        let mut x = vec![0.0; 8];
        x[7] = 0.5;
        assert!(b.residual_model(&x).interior.relative() < 1e-12);
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        assert!(b.residual_model(&x).boundary.relative() < 1e-12);
        let c: Vec<f64> = (0..7).map(|i| 0.1 * i as f64 - 0.2).collect();
        let b = Bubble::scaled(pt8(), 0.37, c);
        let x = vec![0.3, -0.2, 0.1, 0.0, 0.5, 0.7, -0.4, 0.2];
        let r = b.residual_model(&x);
        assert!(r.interior.relative() < 1e-12 && r.boundary.relative() < 1e-12);
    }

    #[test]
    fn linearized_residuals() {
        let b = Bubble::normalized(pt8());
        let mut x = vec![0.0; 8];
        x[0] = 0.3;
        x[7] = 0.7;
        let r = b.residual_linearized(0, &x);
        assert!(r.interior.relative() < 1e-12 && r.boundary.relative() < 1e-12);
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        assert!(b.residual_linearized(7, &x).boundary.relative() < 1e-12);
    }

    #[test]
    fn k_scaling_of_energy() {
        let p = ProblemPoint::with_d(8, -1.0, 2.0, 1.0);
        let q = ProblemPoint::with_d(8, -4.0, 2.0, 1.0);
        let r = bubble_energy(&q).unwrap() / bubble_energy(&p).unwrap();
        assert!((r - 4f64.powf(-3.0)).abs() < 1e-10 * r);
    }
}
