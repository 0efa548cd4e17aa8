use bubblelab::bubble::Bubble;
use bubblelab::geom::{
    cancellation_suite, forcing_ep, forcing_orthogonality, metric_expansion, random_riem_mp,
    MetricExpansion, RadialCache,
};
use bubblelab::model::{weyl_projection, CurvatureFrame, ProblemPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Index-loop evaluation of `E_p` with the Hessian from finite differences
/// of the closed-form gradient.
fn naive_ep(f: &CurvatureFrame, b: &Bubble, x: &[f64]) -> f64 {
    let m = f.dim();
    let n = m + 1;
    let h = 1e-6;
    let mut hess = vec![0.0; m * m];
    for j in 0..m {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let gp = b.eval_u_derivs(&xp).grad;
        let gm = b.eval_u_derivs(&xm).grad;
        for i in 0..m {
            hess[i * m + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    s += f.riem.get(i, k, j, l) * x[k] * x[l] / 3.0 * hess[i * m + j];
                }
            }
            s += f.normal_at(i, j) * x[n - 1] * x[n - 1] * hess[i * m + j];
        }
    }
    b.pt.c_n() * s
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == n - 1 { rng.random_range(0.0..r) } else { rng.random_range(-r..r) })
        .collect()
}

#[test]
fn forcing_matches_index_loop() {
    let pt = ProblemPoint::with_d(8, -2.0, 2.0, 1.0);
    let b = Bubble::normalized(pt);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..5 {
        let f = CurvatureFrame::random_gauge(8, seed, 1.0);
        for _ in 0..10 {
            let x = random_point(&mut rng, 8, 1.5);
            let a = forcing_ep(&f, &b, &x);
            let o = naive_ep(&f, &b, &x);
            let scale = b.eval_u(&x) * f.riem.max_abs().max(1.0);
            assert!((a - o).abs() < 1e-6 * scale.max(a.abs()), "{a} vs {o}");
            let a3 = forcing_ep(&f.scaled(-2.5), &b, &x);
            assert!((a3 + 2.5 * a).abs() <= 1e-13 * scale.max(a.abs()));
        }
    }
    assert_eq!(forcing_ep(&CurvatureFrame::zero(8), &b, &random_point(&mut rng, 8, 1.0)), 0.0);
}

#[test]
fn forcing_vanishes_on_axis() {
    let pt = ProblemPoint::with_d(8, -2.0, 2.0, 1.0);
    let b = Bubble::normalized(pt);
    let f = CurvatureFrame::random_gauge(8, 9, 1.0);
    for z in [0.1, 0.5, 2.0] {
        let mut x = vec![0.0; 8];
        x[7] = z;
        let v = forcing_ep(&f, &b, &x);
        assert!(v.abs() < 1e-14 * b.eval_u(&x) * f.normal.iter().map(|v| v.abs()).sum::<f64>());
    }
}

#[test]
fn forcing_orthogonal_to_kernel() {
    for n in [8, 10] {
        let pt = ProblemPoint::with_d(n, -1.0, 2.0, 1.0);
        let mut cache = RadialCache::new();
        for seed in 0..20 {
            let f = CurvatureFrame::random_gauge(n, 100 + seed, 1.0);
            let res = forcing_orthogonality(&f, &pt, 1e-8, &mut cache).unwrap();
            assert_eq!(res.len(), n);
            for o in res {
                assert!(o.scale > 0.0);
                assert!(o.value.abs() <= 1e-8 * o.scale, "s={} {} vs {}", o.index, o.value, o.scale);
            }
        }
    }
}

#[test]
fn cancellations_hold() {
    for n in [8, 10] {
        let pt = ProblemPoint::with_d(n, -1.0, 2.0, 1.0);
        for seed in 0..3 {
            let mut me = MetricExpansion::new(CurvatureFrame::random_gauge(n, seed, 1.0));
            me.riem_mp = Some(random_riem_mp(n - 1, seed + 50, 1.0));
            let checks = cancellation_suite(&me, &pt, 1e-9).unwrap();
            assert_eq!(checks.len(), 5);
            for c in checks {
                assert!(c.pass, "n={n} {}: {} > {}", c.name, c.value, c.bound);
            }
        }
    }
}

/// Index-loop second-order inverse metric.
fn naive_metric(f: &CurvatureFrame, y: &[f64]) -> Vec<f64> {
    let m = f.dim();
    let n = m + 1;
    let mut g = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..m {
                for l in 0..m {
                    s += f.riem.get(i, k, j, l) * y[k] * y[l] / 3.0;
                }
            }
            s += f.normal_at(i, j) * y[n - 1] * y[n - 1];
            g[i * n + j] = s;
        }
    }
    g[n * n - 1] = 1.0;
    g
}

#[test]
fn metric_order_two_matches_index_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..5 {
        let f = CurvatureFrame::random_gauge(8, seed, 1.0);
        let me = MetricExpansion::new(f.clone());
        for _ in 0..10 {
            let y: Vec<f64> = (0..8).map(|_| rng.random_range(-0.3..0.3)).collect();
            let a = metric_expansion(&me, &y, 2).unwrap();
            let b = naive_metric(&f, &y);
            for (u, v) in a.inverse.iter().zip(&b) {
                assert!((u - v).abs() < 1e-14);
            }
            assert_eq!(a.det, 1.0);
        }
    }
    let me = MetricExpansion::new(CurvatureFrame::zero(8));
    let g = me.evaluate(&[0.1, 0.2, 0.0, 0.0, 0.0, 0.0, -0.3, 0.4], 4).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            assert_eq!(g.inverse[i * 8 + j], if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn metric_on_boundary_is_riemann_quadratic() {
    let f = CurvatureFrame::random_gauge(8, 8, 1.0);
    let me = MetricExpansion::new(f.clone());
    let y = [0.1, -0.2, 0.05, 0.3, 0.0, 0.1, -0.1, 0.0];
    let g = me.tangential(&y, 2).unwrap();
    for i in 0..7 {
        for j in 0..7 {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..7 {
                for l in 0..7 {
                    s += f.riem.get(i, k, j, l) * y[k] * y[l] / 3.0;
                }
            }
            assert!((g[i * 7 + j] - s).abs() < 1e-15);
        }
    }
}

#[test]
fn metric_truncation_slope() {
    let n = 8;
    let m: usize = 7;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut me = MetricExpansion::new(CurvatureFrame::random_gauge(n, 2, 1.0));
    let mut rand_vec = |len: usize| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    me.riem_m = Some(rand_vec(m.pow(5)));
    me.normal_k = Some(rand_vec(m.pow(3)));
    me.normal_n = Some(rand_vec(m.pow(2)));
    me.riem_mp = Some(random_riem_mp(m, 3, 1.0));
    let dir: Vec<f64> = rand_vec(n).iter().map(|v| v.abs()).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut pts = Vec::new();
    for e in 0..6 {
        let t = 0.2 * 0.5f64.powi(e);
        let y: Vec<f64> = dir.iter().map(|v| v / norm * t).collect();
        let g4 = me.tangential(&y, 4).unwrap();
        let g2 = me.tangential(&y, 2).unwrap();
        let diff = g4.iter().zip(&g2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        pts.push((t.ln(), diff.ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope >= 2.9, "slope {slope}");
}

#[test]
fn weyl_norm_full_decomposition_oracle() {
    // With the gauge Ricci conditions the decomposition leaves R̄ unchanged.
    for seed in 0..5 {
        let f = CurvatureFrame::random_gauge(9, seed, 1.0);
        let w = weyl_projection(&f.riem);
        let direct: f64 = f.riem.data.iter().map(|v| v * v).sum();
        assert!((w.norm_sq() - direct).abs() < 1e-12 * direct);
    }
}
