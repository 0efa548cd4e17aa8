//! Numerical checks of the cancellations used in the energy expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metric::MetricExpansion;
use super::poly::{integrate_poly_radial, AngularRule, PolyRadial, RadialCache, TangentPoly};
use crate::error::Result;
use crate::model::{algebraic_projection, ProblemPoint, Rank4};
use crate::quad::{brute_halfspace, sphere_monomial_average_quadrature, MomentTable};
use crate::report::{rel_diff, Check};

/// A random `R̄_{ikjl,mp}`: each `(m, p)` slice is an algebraic curvature
/// tensor and the tensor is symmetric in `(m, p)`.
pub fn random_riem_mp(dim: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dim;
    let mut slices: Vec<Rank4> = Vec::with_capacity(m * m);
    for _ in 0..m * m {
        let raw = Rank4::from_fn(m, |_, _, _, _| rng.random_range(-scale..scale));
        slices.push(algebraic_projection(&raw));
    }
    let mut out = vec![0.0; m.pow(6)];
    for a in 0..m.pow(4) {
        for p in 0..m {
            for q in 0..m {
                out[(a * m + p) * m + q] =
                    0.5 * (slices[p * m + q].data[a] + slices[q * m + p].data[a]);
            }
        }
    }
    out
}

/// `P_s(x̃) = Σ_{ikl} R̄_{iksl} x_i x_k x_l` for each `s`.
fn cubic_contractions(r: &Rank4) -> Vec<TangentPoly> {
    let m = r.dim;
    (0..m)
        .map(|s| {
            let mut p = TangentPoly::zero(m);
            for i in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        p.add(&[i, k, l], r.get(i, k, s, l));
                    }
                }
            }
            p
        })
        .collect()
}

fn abs_tensor(r: &Rank4) -> Rank4 {
    Rank4 {
        dim: r.dim,
        data: r.data.iter().map(|v| v.abs()).collect(),
    }
}

fn quartic_form(r: &Rank4, s: f64) -> TangentPoly {
    let m = r.dim;
    let mut p = TangentPoly::zero(m);
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                for l in 0..m {
                    p.add(&[i, k, j, l], r.get(i, k, j, l) * s);
                }
            }
        }
    }
    p
}

fn sextic_form(t: &[f64], m: usize, s: f64) -> TangentPoly {
    let mut p = TangentPoly::zero(m);
    let mut idx = [0usize; 6];
    for (flat, v) in t.iter().enumerate() {
        let mut f = flat;
        for slot in idx.iter_mut().rev() {
            *slot = f % m;
            f /= m;
        }
        p.add(&idx, v * s);
    }
    p
}

/// Runs the cancellation identities at `pt` for the curvature data in `me`.
pub fn cancellation_suite(me: &MetricExpansion, pt: &ProblemPoint, rel_tol: f64) -> Result<Vec<Check>> {
    let n = pt.n;
    let m = n - 1;
    let nf = pt.nf();
    let frame = &me.frame;
    let k = (nf - 2.0) / 2.0;
    let c = pt.bubble_amp();
    let d = pt.d();
    let w = (2.0 * k * c).powi(2);
    let q = move |r: f64, z: f64| r * r + (z + d) * (z + d) - 1.0;
    let g_flat = move |r: f64, z: f64| w * q(r, z).powf(-nf);
    let g_z2 = move |r: f64, z: f64| w * z * z * q(r, z).powf(-nf);
    let mut cache = RadialCache::new();
    let mut out = Vec::new();

    // (1) ∫ (⅓ R̄_{ikjl} x_k x_l + R_{ninj} x_n²) ∂_i U ∂_j U = 0.
    // Each vanishing integral is compared with the same integral of the
    // entrywise absolute values, which no cancellation can make small.
    let r = &frame.riem;
    let ra = abs_tensor(r);
    let normal = TangentPoly::quadratic(m, &frame.normal);
    let normal_abs: Vec<f64> = frame.normal.iter().map(|v| v.abs()).collect();
    let v1 = integrate_poly_radial(
        n,
        &[
            PolyRadial { poly: quartic_form(r, 1.0 / 3.0), radial: &g_flat, key: 1 },
            PolyRadial { poly: normal, radial: &g_z2, key: 2 },
        ],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    let s1 = integrate_poly_radial(
        n,
        &[
            PolyRadial { poly: quartic_form(&ra, 1.0 / 3.0), radial: &g_flat, key: 1 },
            PolyRadial { poly: TangentPoly::quadratic(m, &normal_abs), radial: &g_z2, key: 2 },
        ],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    out.push(Check::at_most(
        "order-delta^2 term vanishes",
        v1.value.abs() / s1.value.max(f64::MIN_POSITIVE),
        1e-8,
    ));

    // (2), (3): the fourth-moment ratios, with sphere averages by quadrature.
    let mut e = vec![0u32; m];
    e[0] = 4;
    let y4 = sphere_monomial_average_quadrature(&e);
    e[0] = 2;
    e[1] = 2;
    let y22 = sphere_monomial_average_quadrature(&e);
    let radial = brute_halfspace(
        n,
        move |r, z| r.powi(4) * z * z * q(r, z).powf(-nf),
        f64::INFINITY,
        rel_tol,
    )?;
    let lhs = y4 * radial;
    out.push(Check::at_most(
        "x_n^2 x_i^4 = 3 x_n^2 x_i^2 x_j^2",
        rel_diff(lhs, 3.0 * y22 * radial),
        1e-8,
    ));
    let tbl = MomentTable::new(n, d)?;
    let rhs = 3.0 / (nf * nf - 1.0) * tbl.halfspace(2, 4, nf)?;
    out.push(Check::at_most(
        "x_n^2 x_i^4 = 3/(n^2-1) x_n^2 |x~|^4",
        rel_diff(lhs, rhs),
        1e-8,
    ));

    // (4) quartic Riemann terms.
    let cubics = cubic_contractions(r);
    let cubics_abs = cubic_contractions(&ra);
    let mut p4 = TangentPoly::zero(m);
    let mut p4_abs = TangentPoly::zero(m);
    if let Some(t) = &me.riem_mp {
        p4 = sextic_form(t, m, 1.0 / 20.0);
        let ta: Vec<f64> = t.iter().map(|v| v.abs()).collect();
        p4_abs = sextic_form(&ta, m, 1.0 / 20.0);
    }
    for s in 0..m {
        p4.add_poly(&cubics[s].mul(&cubics[s]), 1.0 / 15.0);
        p4_abs.add_poly(&cubics_abs[s].mul(&cubics_abs[s]), 1.0 / 15.0);
    }
    let v4 = integrate_poly_radial(
        n,
        &[PolyRadial { poly: p4, radial: &g_flat, key: 3 }],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    let s4 = integrate_poly_radial(
        n,
        &[PolyRadial { poly: p4_abs, radial: &g_flat, key: 3 }],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    out.push(Check::at_most(
        "quartic Riemann term vanishes",
        v4.value.abs() / s4.value.max(f64::MIN_POSITIVE),
        1e-8,
    ));

    // Sym_{ij}(R̄_{iksl} R_{nsnj}) y_n² y_k y_l ∂_i U ∂_j U.
    let mut psym = TangentPoly::zero(m);
    let mut psym_abs = TangentPoly::zero(m);
    for s in 0..m {
        let mut ns = TangentPoly::zero(m);
        let mut ns_abs = TangentPoly::zero(m);
        for j in 0..m {
            ns.add(&[j], frame.normal_at(s, j));
            ns_abs.add(&[j], frame.normal_at(s, j).abs());
        }
        psym.add_poly(&cubics[s].mul(&ns), 1.0 / 3.0);
        psym_abs.add_poly(&cubics_abs[s].mul(&ns_abs), 1.0 / 3.0);
    }
    let vs = integrate_poly_radial(
        n,
        &[PolyRadial { poly: psym, radial: &g_z2, key: 4 }],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    let ss = integrate_poly_radial(
        n,
        &[PolyRadial { poly: psym_abs, radial: &g_z2, key: 4 }],
        AngularRule::ClosedForm,
        rel_tol,
        &mut cache,
    )?;
    out.push(Check::at_most(
        "Sym term vanishes",
        vs.value.abs() / ss.value.max(f64::MIN_POSITIVE),
        1e-8,
    ));
    Ok(out)
}
