//! The curvature forcing `E_p` and its kernel orthogonality.

use serde::Serialize;

use super::poly::{integrate_poly_radial, AngularRule, PolyRadial, RadialCache, TangentPoly};
use crate::bubble::Bubble;
use crate::error::Result;
use crate::model::{CurvatureFrame, ProblemPoint};

/// `E_p(x) = c_n (⅓ R̄_{ikjl} x_k x_l + R_{ninj} x_n²) ∂²_{ij} U(x)`,
/// tangential indices only.
pub fn forcing_ep(frame: &CurvatureFrame, b: &Bubble, x: &[f64]) -> f64 {
    let m = frame.dim();
    let n = m + 1;
    let d = b.eval_u_derivs(x);
    let r = &frame.riem;
    let xn2 = x[n - 1] * x[n - 1];
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut a = 0.0;
            for k in 0..m {
                let mut inner = 0.0;
                for l in 0..m {
                    inner += r.get(i, k, j, l) * x[l];
                }
                a += inner * x[k];
            }
            a = a / 3.0 + frame.normal_at(i, j) * xn2;
            s += a * d.hess[i * n + j];
        }
    }
    b.pt.c_n() * s
}

/// `E_p` for the normalized bubble as `Σ P_t(x̃) g_t(|x̃|, x_n)`:
///
/// * `t = 0`: `⅓ R̄_{ikjl} x_i x_j x_k x_l`, against `c_n·4k(k+1) c Q^{-k-2}`
/// * `t = 1`: `x̃ᵀ N x̃`, against `c_n·4k(k+1) c Q^{-k-2} x_n²`
/// * `t = 2`: `⅓ Ric(x̃, x̃)`, against `-c_n·2k c Q^{-k-1}`
/// * `t = 3`: `tr N`, against `-c_n·2k c Q^{-k-1} x_n²`
///
/// where `k = (n-2)/2` and `N` is the normal block.
pub fn forcing_polys(frame: &CurvatureFrame) -> [TangentPoly; 4] {
    let m = frame.dim();
    let r = &frame.riem;
    let mut quartic = TangentPoly::zero(m);
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                for l in 0..m {
                    quartic.add(&[i, k, j, l], r.get(i, k, j, l) / 3.0);
                }
            }
        }
    }
    let normal = TangentPoly::quadratic(m, &frame.normal);
    let ric: Vec<f64> = r.ricci().iter().map(|v| v / 3.0).collect();
    let ricci = TangentPoly::quadratic(m, &ric);
    let tr: f64 = (0..m).map(|i| frame.normal_at(i, i)).sum();
    [quartic, normal, ricci, TangentPoly::constant(m, tr)]
}

/// Radial factors matching [`forcing_polys`].
pub fn forcing_radials(pt: &ProblemPoint) -> [impl Fn(f64, f64) -> f64 + Sync + Copy; 4] {
    let nf = pt.nf();
    let k = (nf - 2.0) / 2.0;
    let c = pt.bubble_amp();
    let cn = pt.c_n();
    let d = pt.d();
    let q = move |r: f64, z: f64| r * r + (z + d) * (z + d) - 1.0;
    let h2 = cn * 4.0 * k * (k + 1.0) * c;
    let g1 = -cn * 2.0 * k * c;
    [
        (0u8, h2, g1, k, 0.0),
        (1, h2, g1, k, 2.0),
        (2, h2, g1, k, 0.0),
        (3, h2, g1, k, 2.0),
    ]
    .map(move |(t, h2, g1, k, zp)| {
        move |r: f64, z: f64| {
            let qq = q(r, z);
            let zz = if zp == 0.0 { 1.0 } else { z * z };
            if t < 2 {
                h2 * qq.powf(-k - 2.0) * zz
            } else {
                g1 * qq.powf(-k - 1.0) * zz
            }
        }
    })
}

/// Jacobi field `𝔧_s` of the normalized bubble as a polynomial times a
/// radial factor.
pub fn jacobi_poly_radial(pt: &ProblemPoint, s: usize) -> (TangentPoly, impl Fn(f64, f64) -> f64 + Sync + Copy) {
    let n = pt.n;
    let m = n - 1;
    let nf = pt.nf();
    let k = (nf - 2.0) / 2.0;
    let c = pt.bubble_amp();
    let d = pt.d();
    let tangential = s + 1 < n;
    let poly = if tangential {
        TangentPoly::monomial(m, &[s], 1.0)
    } else {
        TangentPoly::constant(m, 1.0)
    };
    let radial = move |r: f64, z: f64| {
        let q = r * r + (z + d) * (z + d) - 1.0;
        if tangential {
            -2.0 * k * c * q.powf(-k - 1.0)
        } else {
            k * c * (r * r + z * z + 1.0 - d * d) * q.powf(-k - 1.0)
        }
    };
    (poly, radial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orthogonality {
    /// Zero-based Jacobi index; `n-1` is the dilation field.
    pub index: usize,
    pub value: f64,
    /// `‖E_p‖_{L²} ‖𝔧_s‖_{L²}`.
    pub scale: f64,
    pub odd_rejected: bool,
}

/// `∫ E_p 𝔧_s dx` for every `s`, computed by angular averaging and 2-D
/// quadrature, together with the Cauchy–Schwarz scale.
pub fn forcing_orthogonality(
    frame: &CurvatureFrame,
    pt: &ProblemPoint,
    rel_tol: f64,
    cache: &mut RadialCache,
) -> Result<Vec<Orthogonality>> {
    let n = pt.n;
    let polys = forcing_polys(frame);
    let fscale = polys.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max);
    let polys = polys.map(|p| p.pruned(1e-15 * fscale));
    let radials = forcing_radials(pt);

    // ‖E_p‖², from the pairwise products of the four terms.
    let mut prods: Vec<(TangentPoly, Box<dyn Fn(f64, f64) -> f64 + Sync>, u64)> = Vec::new();
    for a in 0..4 {
        for b in a..4 {
            if polys[a].is_empty() || polys[b].is_empty() {
                continue;
            }
            let (ga, gb) = (radials[a], radials[b]);
            let mult = if a == b { 1.0 } else { 2.0 };
            prods.push((
                polys[a].mul(&polys[b]).scaled(mult),
                Box::new(move |r, z| ga(r, z) * gb(r, z)),
                100 + (a * 4 + b) as u64,
            ));
        }
    }
    let terms: Vec<PolyRadial> = prods
        .iter()
        .map(|(p, g, k)| PolyRadial {
            poly: p.clone(),
            radial: g.as_ref(),
            key: *k,
        })
        .collect();
    let e_norm = integrate_poly_radial(n, &terms, AngularRule::ClosedForm, rel_tol, cache)?
        .value
        .max(0.0)
        .sqrt();

    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let (jp, jr) = jacobi_poly_radial(pt, s);
        let jkey = if s + 1 < n { 200 } else { 201 };
        let jj = jp.mul(&jp);
        let sq = move |r: f64, z: f64| jr(r, z) * jr(r, z);
        let j_norm = integrate_poly_radial(
            n,
            &[PolyRadial {
                poly: jj,
                radial: &sq,
                key: jkey + 10,
            }],
            AngularRule::ClosedForm,
            rel_tol,
            cache,
        )?
        .value
        .sqrt();
        let prod_radials: Vec<Box<dyn Fn(f64, f64) -> f64 + Sync>> = radials
            .iter()
            .map(|g| {
                let g = *g;
                Box::new(move |r: f64, z: f64| g(r, z) * jr(r, z)) as Box<dyn Fn(f64, f64) -> f64 + Sync>
            })
            .collect();
        let terms: Vec<PolyRadial> = (0..4)
            .filter(|t| !polys[*t].is_empty())
            .map(|t| PolyRadial {
                poly: polys[t].mul(&jp),
                radial: prod_radials[t].as_ref(),
                key: 300 + 10 * jkey + t as u64,
            })
            .collect();
        let r = integrate_poly_radial(n, &terms, AngularRule::ClosedForm, rel_tol, cache)?;
        out.push(Orthogonality {
            index: s,
            value: r.value,
            scale: e_norm * j_norm,
            odd_rejected: r.odd_rejected,
        });
    }
    Ok(out)
}
