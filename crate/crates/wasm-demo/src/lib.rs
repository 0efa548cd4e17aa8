//! Browser bindings for the static demo page in `www/`.
//!
//! Every export returns plain numbers or a JSON string so the same functions
//! run natively in tests.

use bubblelab::bubble::{bubble_energy, Bubble};
use bubblelab::model::{validate_point, HessianData, ProblemPoint};
use bubblelab::reduced::{coeff_a, coeff_b_nonconstant, compute_s, model_constants};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn point(n: usize, d: f64) -> Result<ProblemPoint, String> {
    if n < 3 {
        return Err(format!("n = {n} is below 3"));
    }
    let pt = ProblemPoint::with_d(n, -((n * (n - 1)) as f64), d, 1.0);
    let rep = validate_point(&pt, true);
    if !rep.pass() {
        return Err(format!("point fails {}", rep.failures().join(", ")));
    }
    Ok(pt)
}

fn error(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Normalized bubble along the normal axis and along the boundary, sampled at
/// `samples` points of `[0, extent]`. Returns `[t_0, U(0,t_0), U(t_0,0), ...]`,
/// or an empty array for an invalid point.
#[wasm_bindgen]
pub fn bubble_profile(n: usize, d: f64, extent: f64, samples: usize) -> Vec<f64> {
    let Ok(pt) = point(n, d) else {
        return Vec::new();
    };
    let b = Bubble::normalized(pt);
    let mut out = Vec::with_capacity(3 * samples);
    let mut x = vec![0.0; n];
    for i in 0..samples {
        let t = extent * i as f64 / (samples.max(2) - 1) as f64;
        x.iter_mut().for_each(|v| *v = 0.0);
        x[n - 1] = t;
        let normal = b.eval_u(&x);
        x[n - 1] = 0.0;
        x[0] = t;
        out.extend([t, normal, b.eval_u(&x)]);
    }
    out
}

/// Energy, `A`, `S` and the non-constant `B` for Hessians `hess_scale · I`.
#[wasm_bindgen]
pub fn reduced_coefficients(n: usize, d: f64, hess_scale: f64) -> String {
    let pt = match point(n, d) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let hess = HessianData::identity(n).scaled(hess_scale);
    let run = || -> bubblelab::Result<String> {
        let (e, a, b, s) = (
            bubble_energy(&pt)?,
            coeff_a(&pt)?,
            coeff_b_nonconstant(&pt, &hess)?,
            compute_s(&pt)?,
        );
        let d0 = (b > 0.0).then(|| a / (2.0 * b));
        Ok(json!({ "H": pt.h, "E": e, "A": a, "B": b, "S": s, "d0": d0 }).to_string())
    };
    run().unwrap_or_else(error)
}

/// `G(d) = Aγd - Bd⁴` on `[0, 2 d0]` and its maximizer `d0 = (Aγ/(4B))^{1/3}`.
#[wasm_bindgen]
pub fn constants_optimum(a: f64, gamma: f64, b: f64, samples: usize) -> String {
    if !(a > 0.0 && gamma > 0.0 && b > 0.0) {
        return error("A, gamma and B must be positive");
    }
    let d0 = (a * gamma / (4.0 * b)).cbrt();
    let curve: Vec<[f64; 2]> = (0..samples.max(2))
        .map(|i| {
            let d = 2.0 * d0 * i as f64 / (samples.max(2) - 1) as f64;
            [d, model_constants(a, gamma, b, d)]
        })
        .collect();
    json!({ "d0": d0, "G": model_constants(a, gamma, b, d0), "curve": curve }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn profile_peaks_at_origin() {
        let p = bubble_profile(8, 2.0, 3.0, 31);
        assert_eq!(p.len(), 93);
        assert_eq!(p[1], p[2]);
        assert!(p.chunks(3).all(|c| c[1] <= p[1] && c[2] <= p[2]));
        assert!(bubble_profile(8, 0.5, 3.0, 10).is_empty());
    }

    #[test]
    fn coefficients_are_positive() {
        let v: Value = serde_json::from_str(&reduced_coefficients(8, 2.0, 1.0)).unwrap();
        for k in ["E", "A", "B", "S", "d0"] {
            assert!(v[k].as_f64().unwrap() > 0.0, "{k}");
        }
        let v: Value = serde_json::from_str(&reduced_coefficients(8, 1.0, 1.0)).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn optimum_maximizes_the_curve() {
        let v: Value = serde_json::from_str(&constants_optimum(2.0, 1.5, 0.7, 101)).unwrap();
        let g = v["G"].as_f64().unwrap();
        let curve = v["curve"].as_array().unwrap();
        assert!(curve.iter().all(|p| p[1].as_f64().unwrap() <= g + 1e-15));
        assert_eq!(curve[50][0].as_f64().unwrap(), v["d0"].as_f64().unwrap());
    }
}
