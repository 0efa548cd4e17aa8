//! Modal finite-difference solve of the corrector equation on the truncated
//! quarter plane `{r = |x̃| ≥ 0, x_n ≥ 0}`.
//!
//! For a mode `Y(x̃/|x̃|) ψ(r, x_n)` of degree `d` the equation becomes
//!
//! ```text
//! ψ_rr + (n-2)/r ψ_r - d(d+n-3)/r² ψ + ψ_zz - n(n+2)/Q² ψ = -e/c_n
//! ψ_z + nD/(r² + D² - 1) ψ = 0            on x_n = 0
//! ```
//!
//! with `Q = r² + (x_n + D)² - 1`, `ψ = 0` on `r = 0` for `d > 0`,
//! `ψ_r = 0` there for `d = 0`, and `ψ = 0` at the truncation.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::grid::{Grid, GridSpec};
use super::modes::{decompose_forcing, Decomposition, ForcingMode};
use crate::bubble::Bubble;
use crate::error::{Error, Result};
use crate::geom::jacobi_poly_radial;
use crate::model::{CurvatureFrame, ProblemPoint};
use crate::tol;

/// Nodes per first-derivative stencil of the scheme (fourth order).
pub const SCHEME_POINTS: usize = 5;
/// Nodes per stencil when measuring residuals (sixth order).
pub const RESIDUAL_POINTS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub mode: ForcingMode,
    /// `ψ` at the nodes, flat index `i * (nz + 1) + j`.
    pub psi: Vec<f64>,
    /// `e` at the nodes.
    pub forcing: Vec<f64>,
    /// The deflated solve answers the forcing `e + deflated·j_n` (degree 0
    /// only).
    pub deflated: f64,
    /// Estimated smallest and largest singular values of the system.
    pub sigma_min: f64,
    pub norm_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSolution {
    pub pt: ProblemPoint,
    pub grid: Grid,
    pub modes: Vec<ModeSolution>,
    /// Coefficient of `𝔧_n` subtracted in the final projection.
    pub projection: f64,
    pub decomposition_error: f64,
    pub odd_norm: f64,
}

/// `j_n(r, x_n)`, the dilation field of the normalized bubble.
pub fn dilation_profile(pt: &ProblemPoint) -> impl Fn(f64, f64) -> f64 {
    jacobi_poly_radial(pt, pt.n - 1).1
}

fn q_at(d: f64, r: f64, z: f64) -> f64 {
    r * r + (z + d) * (z + d) - 1.0
}

/// Per-node stencils in one direction: first and second derivative.
struct Stencils {
    d1: Vec<(usize, Vec<f64>)>,
    d2: Vec<(usize, Vec<f64>)>,
}

fn stencils(ax: &super::grid::Axis, npts: usize) -> Stencils {
    Stencils {
        d1: (0..ax.len()).map(|i| ax.stencil(i, npts, 1)).collect(),
        d2: (0..ax.len()).map(|i| ax.stencil2(i, npts)).collect(),
    }
}

/// Applies the interior operator with `npts`-point stencils at node `(i, j)`.
fn apply_interior(
    g: &Grid,
    pt: &ProblemPoint,
    lam: f64,
    sr: &Stencils,
    sz: &Stencils,
    psi: &[f64],
    i: usize,
    j: usize,
) -> f64 {
    let n = pt.nf();
    let r = g.r.x[i];
    let z = g.z.x[j];
    let q = q_at(pt.d(), r, z);
    let (lo, w) = &sr.d2[i];
    let mut v: f64 = w.iter().enumerate().map(|(t, c)| c * psi[g.idx(lo + t, j)]).sum();
    let (lo, w) = &sr.d1[i];
    v += (n - 2.0) / r * w.iter().enumerate().map(|(t, c)| c * psi[g.idx(lo + t, j)]).sum::<f64>();
    let (lo, w) = &sz.d2[j];
    v += w.iter().enumerate().map(|(t, c)| c * psi[g.idx(i, lo + t)]).sum::<f64>();
    v - (lam / (r * r) + n * (n + 2.0) / (q * q)) * psi[g.idx(i, j)]
}

/// `d(d+n-3)`, the eigenvalue of `-Δ` on `S^{n-2}` in degree `d`.
pub fn angular_eigenvalue(n: usize, d: u32) -> f64 {
    let d = d as f64;
    d * (d + n as f64 - 3.0)
}

/// Sparse operator for degree `d` as triplets.
fn assemble(g: &Grid, pt: &ProblemPoint, d: u32) -> Vec<Triplet<usize, usize, f64>> {
    let nr = g.r.len();
    let nz = g.z.len();
    let n = pt.nf();
    let dd = pt.d();
    let lam = angular_eigenvalue(pt.n, d);
    let sr = stencils(&g.r, SCHEME_POINTS);
    let sz = stencils(&g.z, SCHEME_POINTS);
    let mut t = Vec::with_capacity(g.nodes() * 16);
    for i in 0..nr {
        for j in 0..nz {
            let row = g.idx(i, j);
            let r = g.r.x[i];
            let z = g.z.x[j];
            if i == nr - 1 || j == nz - 1 || (i == 0 && d > 0) {
                t.push(Triplet::new(row, row, 1.0));
            } else if i == 0 {
                let (lo, w) = &sr.d1[0];
                for (k, c) in w.iter().enumerate() {
                    t.push(Triplet::new(row, g.idx(lo + k, j), *c));
                }
            } else if j == 0 {
                let (lo, w) = &sz.d1[0];
                for (k, c) in w.iter().enumerate() {
                    t.push(Triplet::new(row, g.idx(i, lo + k), *c));
                }
                t.push(Triplet::new(row, row, n * dd / (r * r + dd * dd - 1.0)));
            } else {
                let q = q_at(dd, r, z);
                let (lo, w) = &sr.d2[i];
                for (k, c) in w.iter().enumerate() {
                    t.push(Triplet::new(row, g.idx(lo + k, j), *c));
                }
                let (lo, w) = &sr.d1[i];
                for (k, c) in w.iter().enumerate() {
                    t.push(Triplet::new(row, g.idx(lo + k, j), (n - 2.0) / r * c));
                }
                let (lo, w) = &sz.d2[j];
                for (k, c) in w.iter().enumerate() {
                    t.push(Triplet::new(row, g.idx(i, lo + k), *c));
                }
                t.push(Triplet::new(row, row, -(lam / (r * r) + n * (n + 2.0) / (q * q))));
            }
        }
    }
    t
}

/// Spectral norm by power iteration on `AᵀA`; approaches from below.
fn norm_estimate(t: &[Triplet<usize, usize, f64>], size: usize, iters: usize) -> f64 {
    let mut x: Vec<f64> = (0..size).map(|i| 1.0 + ((i * 104729) % 17) as f64 * 0.05).collect();
    let mut sigma = 0.0;
    for _ in 0..iters {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut y = vec![0.0; size];
        for e in t {
            y[e.row] += e.val * x[e.col];
        }
        let mut z = vec![0.0; size];
        for e in t {
            z[e.col] += e.val * y[e.row];
        }
        sigma = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = z;
    }
    sigma
}

struct Factored {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    size: usize,
}

impl Factored {
    fn new(t: &[Triplet<usize, usize, f64>], size: usize) -> Result<Self> {
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(size, size, t)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::Solver(format!("{e:?}")))?;
        Ok(Factored { lu, size })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.size, 1, |i, _| b[i]);
        self.lu.solve_in_place(m.as_mut());
        (0..self.size).map(|i| m[(i, 0)]).collect()
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.size, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place(m.as_mut());
        (0..self.size).map(|i| m[(i, 0)]).collect()
    }

    /// Smallest singular value by inverse iteration on `AᵀA`. The estimate
    /// approaches the true value from above.
    fn sigma_min(&self, iters: usize) -> f64 {
        let mut x: Vec<f64> = (0..self.size).map(|i| 1.0 + ((i * 7919) % 13) as f64 * 0.1).collect();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut nu = 0.0;
        for _ in 0..iters {
            let y = self.solve_transpose(&x);
            let z = self.solve(&y);
            nu = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(nu.is_finite() && nu > 0.0) {
                return 0.0;
            }
            x = z.into_iter().map(|v| v / nu).collect();
        }
        1.0 / nu.sqrt()
    }
}

/// Solves every mode of one degree with a single factorization. For degree 0
/// the discrete operator has a near-kernel close to the `𝔧_n` profile;
/// there `ψ` is pinned to zero at the node where that profile peaks and the
/// freed unknown multiplies the profile on the right-hand side. The system
/// stays square and sparse apart from that one column, and the part of the
/// forcing along the kernel is absorbed by the multiplier.
pub fn solve_degree(g: &Grid, pt: &ProblemPoint, d: u32, modes: &[ForcingMode]) -> Result<Vec<ModeSolution>> {
    let nr = g.r.len();
    let nz = g.z.len();
    let nodes = g.nodes();
    let cn = pt.c_n();
    let mut t = assemble(g, pt, d);
    let mut pin = None;
    let mut v_scale = 0.0;
    if d == 0 {
        let jn = dilation_profile(pt);
        let jn_vals: Vec<f64> = (0..nodes).map(|k| jn(g.r.x[k / nz], g.z.x[k % nz])).collect();
        let amax = t.iter().fold(0.0f64, |m, e| m.max(e.val.abs()));
        let (kp, _) = jn_vals
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bk, bv), (k, v)| if v.abs() > bv { (k, v.abs()) } else { (bk, bv) });
        v_scale = amax / jn_vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        t.retain(|e| e.col != kp);
        for i in 1..nr - 1 {
            for j in 1..nz - 1 {
                let k = g.idx(i, j);
                t.push(Triplet::new(k, kp, v_scale * jn_vals[k]));
            }
        }
        pin = Some(kp);
    }
    let nb = norm_estimate(&t, nodes, 40);
    let f = Factored::new(&t, nodes)?;
    let sigma_min = f.sigma_min(20);
    if !(sigma_min >= tol::DEFLATION_SIGMA * nb) {
        return Err(Error::SingularSystem {
            sigma_min: sigma_min / nb,
            threshold: tol::DEFLATION_SIGMA,
        });
    }
    let mut out = Vec::with_capacity(modes.len());
    for mode in modes {
        debug_assert_eq!(mode.d, d);
        let e = mode.profile(pt);
        let mut forcing = vec![0.0; nodes];
        let mut rhs = vec![0.0; nodes];
        for i in 0..nr {
            for j in 0..nz {
                let k = g.idx(i, j);
                forcing[k] = e(g.r.x[i], g.z.x[j]);
                if i > 0 && j > 0 && i + 1 < nr && j + 1 < nz {
                    rhs[k] = -forcing[k] / cn;
                }
            }
        }
        let mut psi = f.solve(&rhs);
        let mut deflated = 0.0;
        if let Some(kp) = pin {
            // Interior rows read L ψ + s λ j_n = -e/c_n.
            deflated = psi[kp] * v_scale * cn;
            psi[kp] = 0.0;
        }
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution".into()));
        }
        out.push(ModeSolution {
            mode: mode.clone(),
            psi,
            forcing,
            deflated,
            sigma_min,
            norm_bound: nb,
        });
    }
    Ok(out)
}

/// `V_p` for the normalized bubble at `pt`.
pub fn solve_corrector(frame: &CurvatureFrame, pt: &ProblemPoint, spec: GridSpec) -> Result<CorrectorSolution> {
    if frame.n() != pt.n {
        return Err(Error::InvalidFrame(format!(
            "frame dimension {} does not match n = {}",
            frame.n(),
            pt.n
        )));
    }
    if !(pt.d() > 1.0) {
        return Err(Error::Domain(format!("bubbles need D > 1, got {}", pt.d())));
    }
    let grid = Grid::new(spec)?;
    let b = Bubble::normalized(*pt);
    let Decomposition {
        modes,
        odd_norm,
        reconstruction,
    } = decompose_forcing(frame, &b)?;
    let mut sols = Vec::with_capacity(modes.len());
    for d in [0, 2, 4] {
        let group: Vec<ForcingMode> = modes.iter().filter(|m| m.d == d).cloned().collect();
        if !group.is_empty() {
            sols.extend(solve_degree(&grid, pt, d, &group)?);
        }
    }
    let mut sol = CorrectorSolution {
        pt: *pt,
        grid,
        modes: sols,
        projection: 0.0,
        decomposition_error: reconstruction,
        odd_norm,
    };
    sol.project_out_dilation();
    Ok(sol)
}

impl CorrectorSolution {
    pub fn n(&self) -> usize {
        self.pt.n
    }

    /// Subtracts the multiple of `𝔧_n` that makes `∫ V_p 𝔧_n` vanish under
    /// the grid quadrature. Only degree-0 modes carry such a component.
    fn project_out_dilation(&mut self) {
        let n = self.n();
        let g = &self.grid;
        let jn = dilation_profile(&self.pt);
        let nz = g.z.len();
        let jv: Vec<f64> = (0..g.nodes()).map(|k| jn(g.r.x[k / nz], g.z.x[k % nz])).collect();
        let jj = g.integrate(n, |i, j| jv[g.idx(i, j)].powi(2));
        let mut total = 0.0;
        for m in self.modes.iter_mut().filter(|m| m.mode.d == 0) {
            let mean = super::modes::angular_mean(n, &m.mode);
            if mean == 0.0 {
                continue;
            }
            let beta = g.integrate(n, |i, j| m.psi[g.idx(i, j)] * jv[g.idx(i, j)]) / jj;
            for (p, j) in m.psi.iter_mut().zip(&jv) {
                *p -= beta * j;
            }
            total += beta * mean;
        }
        self.projection = total;
    }

    /// `V_p(x)` by local interpolation; zero beyond the truncation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::Domain(format!("expected a point in R^{n}")));
        }
        if x[n - 1] < 0.0 {
            return Err(Error::Domain("point below the boundary".into()));
        }
        let xt = &x[..n - 1];
        let r = xt.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rm = self.grid.spec.r_max;
        if r >= rm || x[n - 1] >= rm {
            return Ok(0.0);
        }
        Ok(self
            .modes
            .iter()
            .map(|m| m.mode.angular(xt) * self.grid.interpolate(&m.psi, r, x[n - 1], 5))
            .sum())
    }

    /// Residual of the modal equation at every node, measured with sixth
    /// order stencils and scaled by `c_n`, so it compares with `e`. Boundary
    /// rows are zero.
    pub fn residual_field(&self, m: &ModeSolution) -> Vec<f64> {
        let g = &self.grid;
        let nr = g.r.len();
        let nz = g.z.len();
        let cn = self.pt.c_n();
        let lam = angular_eigenvalue(self.n(), m.mode.d);
        let sr = stencils(&g.r, RESIDUAL_POINTS);
        let sz = stencils(&g.z, RESIDUAL_POINTS);
        let mut out = vec![0.0; g.nodes()];
        for i in 1..nr - 1 {
            for j in 1..nz - 1 {
                let k = g.idx(i, j);
                let lv = apply_interior(g, &self.pt, lam, &sr, &sz, &m.psi, i, j);
                out[k] = cn * lv + m.forcing[k] + m.deflated * self.dilation_at(i, j, m);
            }
        }
        out
    }

    fn dilation_at(&self, i: usize, j: usize, m: &ModeSolution) -> f64 {
        if m.deflated == 0.0 {
            return 0.0;
        }
        dilation_profile(&self.pt)(self.grid.r.x[i], self.grid.z.x[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_profile_is_a_discrete_near_kernel() {
        let pt = ProblemPoint::with_d(8, -56.0, 2.0, 1.0);
        let g = Grid::new(GridSpec::square(64)).unwrap();
        let jn = dilation_profile(&pt);
        let psi: Vec<f64> = (0..g.nodes()).map(|k| jn(g.r.x[k / 65], g.z.x[k % 65])).collect();
        let sr = stencils(&g.r, 7);
        let sz = stencils(&g.z, 7);
        let mut worst: f64 = 0.0;
        for i in 2..30 {
            for j in 2..30 {
                let v = apply_interior(&g, &pt, 0.0, &sr, &sz, &psi, i, j);
                worst = worst.max(v.abs());
            }
        }
        let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-2 * scale, "{worst} vs {scale}");
    }
}
