//! Stretched tensor grid on `[0, R_max]²`, finite-difference weights and
//! Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of intervals in `r = |x̃|`; even.
    pub nr: usize,
    /// Number of intervals in `x_n`; even.
    pub nz: usize,
    pub r_max: f64,
    /// Slope `dr/dξ` at the origin of the map `ξ ↦ aξ / (1 - ξ + aξ/R_max)`.
    pub stretch: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nr: 400,
            nz: 400,
            r_max: 40.0,
            stretch: 3.0,
        }
    }
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        GridSpec {
            nr: n,
            nz: n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nr", self.nr), ("nz", self.nz)] {
            if v < 16 || v % 2 == 1 {
                return Err(Error::Domain(format!("{name} must be even and at least 16, got {v}")));
            }
        }
        if !(self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Domain(format!("r_max must exceed 1, got {}", self.r_max)));
        }
        if !(self.stretch > 0.0 && self.stretch < self.r_max) {
            return Err(Error::Domain(format!(
                "stretch must lie in (0, r_max), got {}",
                self.stretch
            )));
        }
        Ok(())
    }
}

/// One stretched axis: nodes, `dr/dξ` and Simpson weights in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub x: Vec<f64>,
    pub weight: Vec<f64>,
}

impl Axis {
    pub fn stretched(intervals: usize, r_max: f64, a: f64) -> Self {
        let h = 1.0 / intervals as f64;
        let mut x = Vec::with_capacity(intervals + 1);
        let mut weight = Vec::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let xi = i as f64 * h;
            let den = 1.0 - xi + a * xi / r_max;
            x.push(if i == intervals { r_max } else { a * xi / den });
            let jac = a / (den * den);
            let s = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            weight.push(s * h / 3.0 * jac);
        }
        Axis { x, weight }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Weights of `npts` consecutive nodes for the `deriv`-th derivative at
    /// node `i`, centred where possible. Returns the first node and weights.
    pub fn stencil(&self, i: usize, npts: usize, deriv: usize) -> (usize, Vec<f64>) {
        let n = self.len();
        let lo = i.saturating_sub(npts / 2).min(n - npts);
        let w = fornberg(self.x[i], &self.x[lo..lo + npts], deriv);
        (lo, w)
    }

    /// Stencil for the second derivative: one extra node when off-centre so
    /// the order does not drop.
    pub fn stencil2(&self, i: usize, npts: usize) -> (usize, Vec<f64>) {
        let n = self.len();
        let centred = i >= npts / 2 && i + npts / 2 < n;
        self.stencil(i, if centred { npts } else { npts + 1 }, 2)
    }
}

/// Fornberg's finite-difference weights for derivative `m` at `x0` over the
/// nodes `xs`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Tensor grid; node `(i, j)` has flat index `i * (nz + 1) + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    pub r: Axis,
    pub z: Axis,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Grid {
            spec,
            r: Axis::stretched(spec.nr, spec.r_max, spec.stretch),
            z: Axis::stretched(spec.nz, spec.r_max, spec.stretch),
        })
    }

    pub fn nodes(&self) -> usize {
        self.r.len() * self.z.len()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.z.len() + j
    }

    /// `∫∫ f r^{n-2} dr dx_n` by the tensor Simpson rule.
    pub fn integrate(&self, n: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
        let p = (n - 2) as i32;
        let mut s = 0.0;
        for i in 0..self.r.len() {
            let wr = self.r.weight[i] * self.r.x[i].powi(p);
            if wr == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..self.z.len() {
                row += self.z.weight[j] * f(i, j);
            }
            s += wr * row;
        }
        s
    }

    /// `∫ f r^{n-2} dr` along `x_n = 0`.
    pub fn integrate_boundary(&self, n: usize, f: impl Fn(usize) -> f64) -> f64 {
        let p = (n - 2) as i32;
        (0..self.r.len())
            .map(|i| self.r.weight[i] * self.r.x[i].powi(p) * f(i))
            .sum()
    }

    /// Local Lagrange interpolation of a nodal field at `(r, z)` with
    /// `order + 1` nodes per direction.
    pub fn interpolate(&self, field: &[f64], r: f64, z: f64, order: usize) -> f64 {
        let pick = |ax: &Axis, t: f64| {
            let n = ax.len();
            let k = ax.x.partition_point(|v| *v <= t).clamp(1, n - 1);
            let npts = order + 1;
            let lo = (k - 1).saturating_sub(order / 2).min(n - npts);
            (lo, fornberg(t, &ax.x[lo..lo + npts], 0))
        };
        let (ilo, wr) = pick(&self.r, r);
        let (jlo, wz) = pick(&self.z, z);
        let mut s = 0.0;
        for (a, wa) in wr.iter().enumerate() {
            for (b, wb) in wz.iter().enumerate() {
                s += wa * wb * field[self.idx(ilo + a, jlo + b)];
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_uniform_second_derivative() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg(0.0, &xs, 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stencils_exact_on_polynomials() {
        let ax = Axis::stretched(32, 40.0, 3.0);
        let f = |x: f64| 1.0 + x - 0.3 * x * x + 0.01 * x.powi(4);
        let d1 = |x: f64| 1.0 - 0.6 * x + 0.04 * x.powi(3);
        let d2 = |x: f64| -0.6 + 0.12 * x * x;
        for i in [0, 1, 2, 16, 30, 31, 32] {
            let (lo, w) = ax.stencil(i, 5, 1);
            let v: f64 = w.iter().enumerate().map(|(t, c)| c * f(ax.x[lo + t])).sum();
            assert!((v - d1(ax.x[i])).abs() < 1e-9 * (1.0 + d1(ax.x[i]).abs()));
            let (lo, w) = ax.stencil2(i, 5);
            let v: f64 = w.iter().enumerate().map(|(t, c)| c * f(ax.x[lo + t])).sum();
            assert!((v - d2(ax.x[i])).abs() < 1e-8 * (1.0 + d2(ax.x[i]).abs()));
        }
    }

    #[test]
    fn simpson_on_stretched_axis() {
        let ax = Axis::stretched(200, 40.0, 3.0);
        let s: f64 = ax.x.iter().zip(&ax.weight).map(|(x, w)| w * (-x).exp()).sum();
        assert!((s - (1.0 - (-40.0f64).exp())).abs() < 1e-8);
        assert_eq!(ax.x[200], 40.0);
    }

    #[test]
    fn grid_spec_rejects_odd_or_small() {
        assert!(GridSpec::square(15).validate().is_err());
        assert!(GridSpec::square(33).validate().is_err());
        assert!(GridSpec::square(16).validate().is_ok());
    }
}
