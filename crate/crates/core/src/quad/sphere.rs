use statrs::function::gamma::ln_gamma;

/// Average of `∏ y_i^{a_i}` over the unit sphere `S^{m-1} ⊂ R^m`, where `m`
/// is `exps.len()`. Zero whenever an exponent is odd.
pub fn sphere_monomial_average(exps: &[u32]) -> f64 {
    if exps.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let m = exps.len() as f64;
    let total: u32 = exps.iter().sum();
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let mut ln = ln_gamma(m / 2.0) - ln_gamma((m + total as f64) / 2.0);
    for &a in exps {
        if a > 0 {
            ln += ln_gamma((a as f64 + 1.0) / 2.0) - half_ln_pi;
        }
    }
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_moments() {
        let m = 7;
        let mut e = vec![0u32; m];
        e[0] = 2;
        assert!((sphere_monomial_average(&e) - 1.0 / 7.0).abs() < 1e-15);
        e[0] = 4;
        assert!((sphere_monomial_average(&e) - 3.0 / 63.0).abs() < 1e-15);
        e[0] = 2;
        e[1] = 2;
        assert!((sphere_monomial_average(&e) - 1.0 / 63.0).abs() < 1e-15);
        e[1] = 1;
        assert_eq!(sphere_monomial_average(&e), 0.0);
    }
}

/// Average of `∏ |y_i|^{a_i}` over `S^{m-1}`.
pub fn sphere_abs_monomial_average(exps: &[u32]) -> f64 {
    let m = exps.len() as f64;
    let total: u32 = exps.iter().sum();
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let mut ln = ln_gamma(m / 2.0) - ln_gamma((m + total as f64) / 2.0);
    for &a in exps {
        if a > 0 {
            ln += ln_gamma((a as f64 + 1.0) / 2.0) - half_ln_pi;
        }
    }
    ln.exp()
}

/// Monomial sphere average computed by quadrature in hyperspherical angles,
/// independently of the Gamma-function formula.
pub fn sphere_monomial_average_quadrature(exps: &[u32]) -> f64 {
    use super::adaptive::{integrate, QuadOptions};
    use std::f64::consts::PI;
    let m = exps.len();
    assert!(m >= 2, "sphere average needs at least two coordinates");
    let opts = QuadOptions {
        rel_tol: 1e-13,
        // Odd moments vanish; the Kronrod roundoff floor is near 1e-14.
        abs_tol: 1e-12,
        max_panels: 400,
    };
    let trig = |a: u32, b: i32, hi: f64| -> f64 {
        integrate(
            |t: f64| t.cos().powi(a as i32) * t.sin().powi(b),
            0.0,
            hi,
            opts,
        )
        .expect("trigonometric moment")
        .value
    };
    let mut avg = 1.0;
    // y_1 = cos θ_1, y_2 = sin θ_1 cos θ_2, ..., with weight sin^{m-1-j} θ_j.
    for j in 0..m - 2 {
        let tail: u32 = exps[j + 1..].iter().sum();
        let w = (m - 2 - j) as i32;
        avg *= trig(exps[j], w + tail as i32, PI) / trig(0, w, PI);
    }
    let a = exps[m - 2];
    let b = exps[m - 1] as i32;
    avg * trig(a, b, 2.0 * PI) / (2.0 * PI)
}
