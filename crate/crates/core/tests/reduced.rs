use bubblelab::bubble::{bubble_energy, Bubble};
use bubblelab::corrector::{corrector_diagnostics, solve_corrector, GridSpec};
use bubblelab::error::Error;
use bubblelab::geom::weyl_norm;
use bubblelab::model::{two_sharp, two_star, CurvatureFrame, HessianData, ProblemPoint};
use bubblelab::quad::{brute_boundary, brute_halfspace, sphere_monomial_average_quadrature, MomentTable};
use bubblelab::reduced::*;
use bubblelab::report::rel_diff;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt8() -> ProblemPoint {
    ProblemPoint::with_d(8, -56.0, 2.0, 1.0)
}

fn u_at(b: &Bubble, r: f64, z: f64) -> f64 {
    let n = b.n();
    let mut x = vec![0.0; n];
    x[0] = r;
    x[n - 1] = z;
    b.eval_u(&x)
}

/// Random symmetric positive definite `m x m` matrix, row-major.
fn random_pd(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = (0..m).map(|k| g[i * m + k] * g[j * m + k]).sum::<f64>();
        }
        a[i * m + i] += 0.1;
    }
    a
}

/// Average of `<M y, y>` over the unit sphere of `R^m`, from quadrature of
/// each monomial.
fn sphere_quadratic_average(a: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut e = vec![0u32; m];
            e[i] += 1;
            e[j] += 1;
            s += a[i * m + j] * sphere_monomial_average_quadrature(&e);
        }
    }
    s
}

#[test]
fn a_matches_boundary_quadrature() {
    for (n, d) in [(8, 2.0), (10, 1.5)] {
        let pt = ProblemPoint::with_d(n, -56.0, d, 1.0);
        let b = Bubble::normalized(pt);
        let oracle = (n as f64 - 1.0) * brute_boundary(n, |r| u_at(&b, r, 0.0).powi(2), f64::INFINITY, 1e-11).unwrap();
        assert!(rel_diff(coeff_a(&pt).unwrap(), oracle) < 1e-8);
    }
}

#[test]
fn nonconstant_b_matches_angular_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [8, 9] {
        let pt = ProblemPoint::with_d(n, -5.0, 1.7, 1.0);
        let b = Bubble::normalized(pt);
        let hess = HessianData {
            hess_h: random_pd(n - 1, &mut rng),
            hess_k: random_pd(n, &mut rng),
        };
        let cn = pt.c_n();
        let nf = n as f64;
        let mk = |v: &[f64], i: usize, j: usize| v[i * n + j];
        let tangential_k: Vec<f64> = (0..(n - 1) * (n - 1)).map(|q| mk(&hess.hess_k, q / (n - 1), q % (n - 1))).collect();
        let boundary = brute_boundary(n, |r| r * r * u_at(&b, r, 0.0).powf(two_sharp(n)), f64::INFINITY, 1e-11).unwrap();
        let r2 = brute_halfspace(n, |r, z| r * r * u_at(&b, r, z).powf(two_star(n)), f64::INFINITY, 1e-9).unwrap();
        let z2 = brute_halfspace(n, |r, z| z * z * u_at(&b, r, z).powf(two_star(n)), f64::INFINITY, 1e-9).unwrap();
        let oracle = cn * (nf - 2.0) / 4.0 * sphere_quadratic_average(&hess.hess_h, n - 1) * boundary
            + (sphere_quadratic_average(&tangential_k, n - 1) * r2 + mk(&hess.hess_k, n - 1, n - 1) * z2)
                / (2.0 * two_star(n));
        let got = coeff_b_nonconstant(&pt, &hess).unwrap();
        assert!(rel_diff(got, oracle) < 1e-8, "{got} vs {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nonconstant_b_increases_with_hess_h(seed in 0u64..1000, n in 8usize..12, d in 1.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = ProblemPoint::with_d(n, -2.0, d, 1.0);
        let base = HessianData { hess_h: random_pd(n - 1, &mut rng), hess_k: random_pd(n, &mut rng) };
        let inc = random_pd(n - 1, &mut rng);
        let more = HessianData {
            hess_h: base.hess_h.iter().zip(&inc).map(|(a, b)| a + b).collect(),
            hess_k: base.hess_k.clone(),
        };
        prop_assert!(coeff_b_nonconstant(&pt, &more).unwrap() > coeff_b_nonconstant(&pt, &base).unwrap());
    }

    #[test]
    fn closed_form_maximizes(a in 0.1f64..10.0, b in 0.1f64..10.0, gamma in 0.1f64..5.0) {
        let d0 = (a * gamma / (4.0 * b)).cbrt();
        let g0 = model_constants(a, gamma, b, d0);
        for h in [-1e-3 * d0, 1e-3 * d0] {
            prop_assert!(model_constants(a, gamma, b, d0 + h) < g0);
        }
        let d1 = a / (2.0 * b);
        let g1 = model_nonconstant(a, b, d1);
        for h in [-1e-3 * d1, 1e-3 * d1] {
            prop_assert!(model_nonconstant(a, b, d1 + h) < g1);
        }
    }
}

#[test]
fn s_is_positive_and_both_forms_agree() {
    for n in 8..=12 {
        for d in [1.5, 2.0, 3.0] {
            let pt = ProblemPoint::with_d(n, -7.0, d, 1.0);
            let s = compute_s(&pt).unwrap();
            assert!(s > 0.0);
            assert!(rel_diff(i1_closed_form(&pt).unwrap(), -s) < 1e-8);
            let (a, b) = i2_terms(&pt).unwrap();
            assert!((a - b).abs() < 1e-8 * a.abs().max(b.abs()));
        }
    }
}

/// The `R²_nins` bracket built from its two moments by direct quadrature.
#[test]
fn normal_bracket_from_moments() {
    for n in [8, 10] {
        let pt = ProblemPoint::with_d(n, -3.0, 2.0, 1.0);
        let nf = n as f64;
        let b = Bubble::normalized(pt);
        let dd = pt.d();
        let x4 = brute_halfspace(n, |r, z| z.powi(4) * r * r * (r * r + (z + dd).powi(2) - 1.0).powf(-nf), f64::INFINITY, 1e-9).unwrap();
        let x2 = brute_halfspace(n, |r, z| z * z * u_at(&b, r, z).powi(2), f64::INFINITY, 1e-9).unwrap();
        let oracle = pt.c_n() * pt.amp_sq() * (nf - 2.0).powi(2) / (4.0 * (nf - 1.0)) * x4 - 0.5 * x2;
        let got = i1_from_moments(&pt).unwrap();
        assert!(rel_diff(got, oracle) < 1e-7, "{got} vs {oracle}");

        // With -2 rather than -4 in front of φ̂ the two routes coincide.
        let tbl = MomentTable::new(n, dd).unwrap();
        let pre = pt.amp_sq() * tbl.omega * (nf - 2.0) / (nf + 1.0) * tbl.beta(nf, nf + 2.0).unwrap();
        let alt = pre * ((nf - 3.0) * tbl.phi_tilde((nf - 1.0) / 2.0).unwrap() - 2.0 * tbl.phi_hat((nf - 3.0) / 2.0).unwrap());
        assert!(rel_diff(got, alt) < 1e-10);
        assert!(rel_diff(got, i1_closed_form(&pt).unwrap()) > 1e-2);
    }
}

#[test]
fn weyl_only_frame() {
    let pt = pt8();
    let fr = CurvatureFrame::random_gauge(8, 17, 1.0).tangential_only();
    let sol = solve_corrector(&fr, &pt, GridSpec::square(32)).unwrap();
    assert!(sol.modes.is_empty());
    let terms = coeff_b_constant(&pt, &fr, &sol).unwrap();
    assert_eq!(terms.corrector, 0.0);
    assert_eq!(terms.normal, 0.0);
    let b = Bubble::normalized(pt);
    let w = weyl_norm(&fr).unwrap();
    let r2u2 = brute_halfspace(8, |r, z| r * r * u_at(&b, r, z).powi(2), f64::INFINITY, 1e-9).unwrap();
    let oracle = w / (24.0 * 7.0) * r2u2;
    assert!(terms.total() > 0.0);
    assert!(rel_diff(terms.total(), oracle) < 1e-8);
}

#[test]
fn zero_frame_gives_zero_b() {
    let pt = pt8();
    let fr = CurvatureFrame::zero(8);
    let sol = solve_corrector(&fr, &pt, GridSpec::square(32)).unwrap();
    assert_eq!(coeff_b_constant(&pt, &fr, &sol).unwrap().total(), 0.0);
}

#[test]
fn constant_b_corrector_term_matches_quadratic_form() {
    let pt = pt8();
    let fr = CurvatureFrame::random_gauge(8, 2, 1.0);
    let sol = solve_corrector(&fr, &pt, GridSpec::square(160)).unwrap();
    let terms = coeff_b_constant(&pt, &fr, &sol).unwrap();
    let diag = corrector_diagnostics(&sol);
    assert!(rel_diff(terms.corrector, 0.5 * diag.quadratic_form) < 1e-3);
    assert!(terms.total() > 0.0);
    let err = coeff_b_constant(&ProblemPoint::with_d(8, -56.0, 2.5, 1.0), &fr, &sol).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn pairing_is_a_multiple_of_the_normal_norm() {
    let pt = pt8();
    let data: Vec<(f64, f64)> = (0..4)
        .map(|s| {
            let fr = CurvatureFrame::random_gauge(8, 40 + s, 0.5 + s as f64);
            let sol = solve_corrector(&fr, &pt, GridSpec::square(64)).unwrap();
            (fr.nnins_sq(), corrector_diagnostics(&sol).pairing)
        })
        .collect();
    let fit = fit_pairing(&pt, &data).unwrap();
    assert!(fit.spread < 1e-9, "{fit:?}");
    assert!(fit.f_normal > 0.0);
    assert!(fit.minus_two_s < 0.0);
}

fn constant_samples(coeffs: &[(f64, f64, f64)]) -> Vec<SampleCoefficients> {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &(a, b, gamma))| SampleCoefficients {
            id: format!("p{i}"),
            coords: vec![i as f64],
            gamma,
            coeffs: ReducedCoefficients { e: 1.0, a, b, case: CaseTag::Constants, s: Some(1.0) },
            hessians_pd: None,
        })
        .collect()
}

/// Refining grid search for the maximizer of `A γ d - B d⁴`. Candidates are
/// compared through `G(d) - G(c) = (d-c)(Aγ - B(d+c)(d²+c²))`, which keeps
/// full relative precision near the maximum.
fn grid_search(a: f64, gamma: f64, b: f64) -> f64 {
    let diff = |d: f64, c: f64| (d - c) * (a * gamma - b * (d + c) * (d * d + c * c));
    let (mut lo, mut hi) = (0.0, 2.0 * (a * gamma / b).cbrt() + 1.0);
    let mut best = 0.5 * (lo + hi);
    for _ in 0..12 {
        let step = (hi - lo) / 200.0;
        for k in 0..=200 {
            let d = lo + k as f64 * step;
            if diff(d, best) > 0.0 {
                best = d;
            }
        }
        lo = (best - 2.0 * step).max(0.0);
        hi = best + 2.0 * step;
    }
    best
}

#[test]
fn constants_locator_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coeffs: Vec<(f64, f64, f64)> =
        (0..12).map(|_| (rng.random_range(0.5..5.0), rng.random_range(0.2..3.0), rng.random_range(0.5..2.0))).collect();
    let samples = constant_samples(&coeffs);
    let rep = optimize_constants(&samples, vec![]).unwrap();
    for row in &rep.samples {
        let d = grid_search(row.a, row.gamma, row.b);
        assert!(rel_diff(row.d0.unwrap(), d) < 1e-8, "{} vs {d}", row.d0.unwrap());
    }
    let best = rep.samples.iter().map(|r| r.g.unwrap()).fold(f64::MIN, f64::max);
    assert_eq!(rep.j_values.g, best);
    assert!(rep.stationarity_residual < 1e-8);
    assert_eq!(rep.rate, 1.0 / 3.0);

    let scaled: Vec<(f64, f64, f64)> = coeffs.iter().map(|&(a, b, g)| (7.5 * a, 7.5 * b, g)).collect();
    assert_eq!(optimize_constants(&constant_samples(&scaled), vec![]).unwrap().p_star, rep.p_star);
}

#[test]
fn doubling_gamma_scales_the_optimum() {
    let one = optimize_constants(&constant_samples(&[(3.0, 1.3, 1.0)]), vec![]).unwrap();
    let two = optimize_constants(&constant_samples(&[(3.0, 1.3, 2.0)]), vec![]).unwrap();
    assert!(rel_diff(two.d_star / one.d_star, 2f64.cbrt()) < 1e-14);
    assert!(rel_diff(two.j_values.g / one.j_values.g, 2f64.powf(4.0 / 3.0)) < 1e-14);
}

/// Points on the unit sphere of `R^n` from a fixed seed.
fn sphere_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / r).collect()
        })
        .collect()
}

/// `H` and `K` both have a nondegenerate minimum at `p0`, which is not
/// itself a sample; the locator must return the sample nearest to it.
#[test]
fn nonconstant_locator_finds_planted_minimum() {
    let n = 8;
    let p0 = sphere_points(n, 1, 99).remove(0);
    let pts = sphere_points(n, 300, 5);
    let (h0, h1, k0, k1) = (2.0, 0.4, -56.0, 0.5);
    let samples: Vec<SampleCoefficients> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c: f64 = p.iter().zip(&p0).map(|(a, b)| a * b).sum();
            let pt = ProblemPoint::new(n, k0 + k1 * (1.0 - c), h0 + h1 * (1.0 - c), 1.0);
            let eye = |m: usize, s: f64| (0..m * m).map(|q| if q / m == q % m { s } else { 0.0 }).collect();
            let hess = HessianData {
                hess_h: eye(n - 1, h1 * c),
                hess_k: eye(n, k1 * c),
            };
            nonconstant_sample(&format!("s{i}"), p.clone(), &pt, &hess).unwrap()
        })
        .collect();
    let nearest = (0..pts.len())
        .max_by(|&i, &j| {
            let ci: f64 = pts[i].iter().zip(&p0).map(|(a, b)| a * b).sum();
            let cj: f64 = pts[j].iter().zip(&p0).map(|(a, b)| a * b).sum();
            ci.total_cmp(&cj)
        })
        .unwrap();
    let rep = optimize_nonconstant(&samples, vec![]).unwrap();
    assert_eq!(rep.p_star, format!("s{nearest}"));
    let s = &samples[nearest].coeffs;
    assert_eq!(rep.d_star, s.a / (2.0 * s.b));
    assert_eq!(rep.rate, 1.0);
    assert_eq!(rep.flags.hessians_pd, Some(true));
}

#[test]
fn energy_maximizer_is_the_mean_curvature_minimizer() {
    let hs = [2.3, 1.9, 2.8, 1.4, 3.5, 1.6];
    let energies: Vec<f64> = hs.iter().map(|h| bubble_energy(&ProblemPoint::new(9, -72.0, *h, 1.0)).unwrap()).collect();
    let e_arg = (0..hs.len()).max_by(|&i, &j| energies[i].total_cmp(&energies[j])).unwrap();
    let h_arg = (0..hs.len()).min_by(|&i, &j| hs[i].total_cmp(&hs[j])).unwrap();
    assert_eq!(e_arg, h_arg);
    let mut sorted = hs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let es: Vec<f64> = sorted.iter().map(|h| bubble_energy(&ProblemPoint::new(9, -72.0, *h, 1.0)).unwrap()).collect();
    assert!(es.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn indefinite_hessian_at_the_selection_fails() {
    let pt = pt8();
    let mut hess = HessianData::identity(8);
    hess.hess_k[0] = -0.5;
    let s = nonconstant_sample("p", vec![], &pt, &hess).unwrap();
    assert_eq!(s.hessians_pd, Some(false));
    assert!(matches!(optimize_nonconstant(&[s], vec![]), Err(Error::HypothesisFailure(_))));
}

#[test]
fn report_round_trips_through_json() {
    let rep = optimize_constants(&constant_samples(&[(3.0, 1.3, 1.0), (2.0, 0.7, 1.5)]), vec!["q: D <= 1".into()]).unwrap();
    assert!(!rep.flags.d_above_one);
    let text = serde_json::to_string(&rep).unwrap();
    let back: BlowupReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    assert_eq!(rep.samples_csv().lines().count(), 3);
}
