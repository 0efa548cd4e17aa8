//! A-posteriori checks on a corrector solution.

use serde::Serialize;

use super::grid::Grid;
use super::modes::{angular_mean, angular_product};
use super::solve::{angular_eigenvalue, dilation_profile, CorrectorSolution, RESIDUAL_POINTS};
use crate::geom::{jacobi_poly_radial, AngularRule, TangentPoly};
use crate::quad::omega;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted exponent of `|V_p|` along each ray of the `(r, x_n)` plane.
    pub exponents: Vec<f64>,
    pub worst: f64,
    pub target: f64,
    /// `max |V|(1+ρ)^{n-4}` over `ρ ≤ ρ_inner`.
    pub constant: f64,
    /// The same maximum over the outer region, divided by `constant`.
    pub outer_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryIdentity {
    /// `|K| ∫ U^{(n+2)/(n-2)} V_p`.
    pub lhs: f64,
    /// `(n-1) H ∫_∂ U^{n/(n-2)} V_p`.
    pub rhs: f64,
    /// Magnitude of both sides with `|V_p|` in place of `V_p`.
    pub scale: f64,
    /// `|lhs - rhs| / scale`.
    pub relative: f64,
    /// `((n-2)/4) ∫ E U`, which `lhs - rhs` must equal for any forcing.
    pub forcing_term: f64,
    /// `|lhs - rhs - forcing_term| / scale`.
    pub relative_forced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `∫ V_p 𝔧_s / (‖V_p‖ ‖𝔧_s‖)`, `s = 1..n`.
    pub orthogonality: Vec<f64>,
    pub decay: DecayFit,
    pub boundary_identity: BoundaryIdentity,
    /// `∫ E_p V_p`.
    pub pairing: f64,
    /// `∫ (-c_nΔV_p + ((n+2)/(n-2))|K|U^{4/(n-2)} V_p) V_p` after
    /// integrating by parts.
    pub quadratic_form: f64,
    pub form_agreement: f64,
    /// `‖E_p‖ ‖V_p‖`, the scale for the sign of the quadratic form.
    pub form_scale: f64,
    pub forcing_norm: f64,
    pub solution_norm: f64,
    /// `‖residual‖ / ‖E_p‖` in `L²(R^n_+)`.
    pub residual_l2: f64,
    /// `max |residual| / max |E_p|` over nodes, mode by mode.
    pub residual_max: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// First derivatives in `r` and `x_n` at every node.
fn gradient(g: &Grid, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nr = g.r.len();
    let nz = g.z.len();
    let sr: Vec<_> = (0..nr).map(|i| g.r.stencil(i, RESIDUAL_POINTS, 1)).collect();
    let sz: Vec<_> = (0..nz).map(|j| g.z.stencil(j, RESIDUAL_POINTS, 1)).collect();
    let mut pr = vec![0.0; g.nodes()];
    let mut pz = vec![0.0; g.nodes()];
    for i in 0..nr {
        for j in 0..nz {
            let (lo, w) = &sr[i];
            pr[g.idx(i, j)] = w.iter().enumerate().map(|(t, c)| c * psi[g.idx(lo + t, j)]).sum();
            let (lo, w) = &sz[j];
            pz[g.idx(i, j)] = w.iter().enumerate().map(|(t, c)| c * psi[g.idx(i, lo + t)]).sum();
        }
    }
    (pr, pz)
}

pub fn corrector_diagnostics(sol: &CorrectorSolution) -> Diagnostics {
    let pt = &sol.pt;
    let n = pt.n;
    let nf = pt.nf();
    let g = &sol.grid;
    let nz = g.z.len();
    let modes = &sol.modes;
    let cn = pt.c_n();
    let dd = pt.d();
    let q = |i: usize, j: usize| {
        let (r, z) = (g.r.x[i], g.z.x[j]);
        r * r + (z + dd) * (z + dd) - 1.0
    };
    let at = |k: usize| (k / nz, k % nz);

    let gram: Vec<Vec<f64>> = modes
        .iter()
        .map(|a| modes.iter().map(|b| angular_product(n, &a.mode, &b.mode)).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..modes.len())
        .flat_map(|a| (0..modes.len()).map(move |b| (a, b)))
        .filter(|(a, b)| gram[*a][*b] != 0.0)
        .collect();
    let bilinear = |fa: &[&[f64]], fb: &[&[f64]]| -> f64 {
        pairs
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (fa[a], fb[b]);
                gram[a][b] * g.integrate(n, |i, j| x[g.idx(i, j)] * y[g.idx(i, j)])
            })
            .sum()
    };

    let psi: Vec<&[f64]> = modes.iter().map(|m| m.psi.as_slice()).collect();
    let frc: Vec<&[f64]> = modes.iter().map(|m| m.forcing.as_slice()).collect();
    let residuals: Vec<Vec<f64>> = modes.iter().map(|m| sol.residual_field(m)).collect();
    let res: Vec<&[f64]> = residuals.iter().map(|r| r.as_slice()).collect();

    let forcing_norm = bilinear(&frc, &frc).max(0.0).sqrt();
    let solution_norm = bilinear(&psi, &psi).max(0.0).sqrt();
    let pairing = bilinear(&frc, &psi);
    let residual_l2 = ratio(bilinear(&res, &res).max(0.0).sqrt(), forcing_norm);
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let residual_max = modes
        .iter()
        .zip(&residuals)
        .map(|(m, r)| ratio(max_abs(r), max_abs(&m.forcing)))
        .fold(0.0, f64::max);

    // Quadratic form.
    let grads: Vec<(Vec<f64>, Vec<f64>)> = modes.iter().map(|m| gradient(g, &m.psi)).collect();
    let mut quadratic_form = 0.0;
    for &(a, b) in &pairs {
        let lam = angular_eigenvalue(n, modes[a].mode.d);
        let (pa, pb) = (&modes[a].psi, &modes[b].psi);
        let (ga, gb) = (&grads[a], &grads[b]);
        let interior = g.integrate(n, |i, j| {
            let k = g.idx(i, j);
            let r = g.r.x[i];
            let qq = q(i, j);
            ga.0[k] * gb.0[k]
                + ga.1[k] * gb.1[k]
                + (lam / (r * r) + nf * (nf + 2.0) / (qq * qq)) * pa[k] * pb[k]
        });
        let boundary = g.integrate_boundary(n, |i| {
            let k = g.idx(i, 0);
            nf * dd / q(i, 0) * pa[k] * pb[k]
        });
        quadratic_form += cn * gram[a][b] * (interior - boundary);
    }
    let form_scale = forcing_norm * solution_norm;
    let form_agreement = ratio((pairing - quadratic_form).abs(), pairing.abs().max(quadratic_form.abs()));

    // Orthogonality to the Jacobi fields.
    let jn = dilation_profile(pt);
    let jv: Vec<f64> = (0..g.nodes()).map(|k| {
        let (i, j) = at(k);
        jn(g.r.x[i], g.z.x[j])
    }).collect();
    let mut orthogonality = Vec::with_capacity(n);
    for s in 0..n {
        let (jp, jr) = jacobi_poly_radial(pt, s);
        let jnorm2 = if s + 1 < n {
            omega(n) / (nf - 1.0) * g.integrate(n, |i, j| (g.r.x[i] * jr(g.r.x[i], g.z.x[j])).powi(2))
        } else {
            omega(n) * g.integrate(n, |i, j| jv[g.idx(i, j)].powi(2))
        };
        let mut v = 0.0;
        for m in modes {
            let ang = sphere_integral(n, &m.mode.weight.mul(&jp));
            if ang == 0.0 {
                continue;
            }
            // Tangential fields carry one power of r in the polynomial.
            let extra = if s + 1 < n { 1 } else { 0 };
            v += ang
                * g.integrate(n, |i, j| {
                    let (r, z) = (g.r.x[i], g.z.x[j]);
                    m.psi[g.idx(i, j)] * r.powi(extra) * jr(r, z)
                });
        }
        orthogonality.push(ratio(v.abs(), solution_norm * jnorm2.sqrt()));
    }

    // Boundary identity and its forced form.
    let k_abs = pt.abs_k();
    let c = pt.bubble_amp();
    let u = |i: usize, j: usize| c * q(i, j).powf(-(nf - 2.0) / 2.0);
    let p_int = (nf + 2.0) / (nf - 2.0);
    let p_bdy = nf / (nf - 2.0);
    let (mut lhs, mut rhs, mut scale, mut forced) = (0.0, 0.0, 0.0, 0.0);
    for m in modes {
        let mean = angular_mean(n, &m.mode);
        let rms = (angular_product(n, &m.mode, &m.mode) * omega(n)).sqrt();
        let li = g.integrate(n, |i, j| u(i, j).powf(p_int) * m.psi[g.idx(i, j)]);
        let la = g.integrate(n, |i, j| u(i, j).powf(p_int) * m.psi[g.idx(i, j)].abs());
        let bi = g.integrate_boundary(n, |i| u(i, 0).powf(p_bdy) * m.psi[g.idx(i, 0)]);
        let ba = g.integrate_boundary(n, |i| u(i, 0).powf(p_bdy) * m.psi[g.idx(i, 0)].abs());
        let h_term = (nf - 1.0) * pt.h;
        lhs += k_abs * mean * li;
        rhs += h_term * mean * bi;
        scale += rms * (k_abs * la + h_term.abs() * ba);
        if mean != 0.0 {
            let eu = g.integrate(n, |i, j| {
                let k = g.idx(i, j);
                (m.forcing[k] + m.deflated * jv[k]) * u(i, j)
            });
            forced += (nf - 2.0) / 4.0 * mean * eu;
        }
    }
    let boundary_identity = BoundaryIdentity {
        lhs,
        rhs,
        scale,
        relative: ratio((lhs - rhs).abs(), scale),
        forcing_term: forced,
        relative_forced: ratio((lhs - rhs - forced).abs(), scale),
    };

    Diagnostics {
        orthogonality,
        decay: decay_fit(sol, &gram),
        boundary_identity,
        pairing,
        quadratic_form,
        form_agreement,
        form_scale,
        forcing_norm,
        solution_norm,
        residual_l2,
        residual_max,
    }
}

/// `∫_{S^{n-2}} P dσ`.
fn sphere_integral(n: usize, p: &TangentPoly) -> f64 {
    omega(n)
        * p.angular_average(AngularRule::ClosedForm)
            .iter()
            .filter(|d| !d.odd_only)
            .map(|d| d.average)
            .sum::<f64>()
}

/// Fits the decay of `M(ρ) = Σ_a rms(Y_a) |ψ_a|` along rays.
fn decay_fit(sol: &CorrectorSolution, gram: &[Vec<f64>]) -> DecayFit {
    let n = sol.n();
    let nf = n as f64;
    let g = &sol.grid;
    let rm = g.spec.r_max;
    let rms: Vec<f64> = (0..sol.modes.len())
        .map(|a| (gram[a][a] / omega(n)).max(0.0).sqrt())
        .collect();
    let mag = |r: f64, z: f64| -> f64 {
        sol.modes
            .iter()
            .zip(&rms)
            .map(|(m, w)| w * g.interpolate(&m.psi, r, z, 5).abs())
            .sum()
    };
    let (lo, hi) = (0.25 * rm, 0.625 * rm);
    let mut exponents = Vec::new();
    for theta in [0.2f64, 0.785, 1.37] {
        let k = 20;
        let mut xs = Vec::with_capacity(k);
        let mut ys = Vec::with_capacity(k);
        for t in 0..k {
            let rho = lo * (hi / lo).powf(t as f64 / (k - 1) as f64);
            let v = mag(rho * theta.cos(), rho * theta.sin());
            if v > 0.0 {
                xs.push(rho.ln());
                ys.push(v.ln());
            }
        }
        if xs.len() >= 2 {
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            exponents.push(sxy / sxx);
        }
    }
    let worst = exponents.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let inner = lo;
    let mut constant: f64 = 0.0;
    let mut outer: f64 = 0.0;
    for i in 0..g.r.len() {
        for j in 0..g.z.len() {
            let (r, z) = (g.r.x[i], g.z.x[j]);
            let rho = (r * r + z * z).sqrt();
            if rho >= hi {
                continue;
            }
            let v: f64 = sol
                .modes
                .iter()
                .zip(&rms)
                .map(|(m, w)| w * m.psi[g.idx(i, j)].abs())
                .sum::<f64>()
                * (1.0 + rho).powf(nf - 4.0);
            if rho <= inner {
                constant = constant.max(v);
            } else {
                outer = outer.max(v);
            }
        }
    }
    DecayFit {
        worst: if exponents.is_empty() { 0.0 } else { worst },
        exponents,
        target: 4.0 - nf + 0.2,
        constant,
        outer_ratio: ratio(outer, constant),
    }
}
