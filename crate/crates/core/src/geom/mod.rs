//! Curvature-tensor algebra: Weyl norm, metric expansion, the forcing `E_p`
//! and the cancellation identities of the energy expansion.

mod cancel;
mod forcing;
mod metric;
mod poly;

pub use cancel::{cancellation_suite, random_riem_mp};
pub use forcing::{
    forcing_ep, forcing_orthogonality, forcing_polys, forcing_radials, jacobi_poly_radial,
    Orthogonality,
};
pub use metric::{metric_expansion, MetricEval, MetricExpansion};
pub use poly::{
    integrate_poly_radial, AngularRule, DegreeAverage, PolyIntegral, PolyRadial, RadialCache,
    TangentPoly,
};

use crate::error::{Error, Result};
use crate::model::{weyl_projection, CurvatureFrame};
use crate::tol;

/// `|W̄|²` from the full Weyl decomposition of the boundary tensor.
///
/// Fails unless the boundary Ricci tensor vanishes, since only then does the
/// gauge identify `W̄` with `R̄`.
pub fn weyl_norm(frame: &CurvatureFrame) -> Result<f64> {
    let scale = frame.riem.max_abs().max(1.0);
    let ric = frame.riem.ricci();
    let worst = ric.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if worst > tol::FRAME_TRACE * scale {
        return Err(Error::InvalidFrame(format!(
            "boundary Ricci does not vanish (max {worst:.3e})"
        )));
    }
    Ok(weyl_projection(&frame.riem).norm_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::Bubble;
    use crate::model::ProblemPoint;

    #[test]
    fn weyl_norm_examples() {
        assert_eq!(weyl_norm(&CurvatureFrame::zero(8)).unwrap(), 0.0);
        let f = CurvatureFrame::random_gauge(8, 4, 1.0);
        let w = weyl_norm(&f).unwrap();
        assert!((w - f.riem.norm_sq()).abs() < 1e-12 * w);
        let w3 = weyl_norm(&f.scaled(3.0)).unwrap();
        assert!((w3 - 9.0 * w).abs() < 1e-12 * w3);
        let mut bad = f.clone();
        bad.riem.set(0, 1, 0, 1, bad.riem.get(0, 1, 0, 1) + 1.0);
        assert!(matches!(weyl_norm(&bad), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn forcing_polys_reconstruct_pointwise() {
        let pt = ProblemPoint::with_d(8, -3.0, 2.0, 1.0);
        let b = Bubble::normalized(pt);
        let mut f = CurvatureFrame::random_gauge(8, 2, 1.0);
        // Break the gauge so that every term is exercised.
        f.normal[0] += 0.7;
        f.riem = crate::model::algebraic_projection(&crate::model::Rank4::from_fn(7, |a, b, c, d| {
            ((a * 7 + b * 3 + c * 5 + d) as f64).sin()
        }));
        let polys = forcing_polys(&f);
        let rad = forcing_radials(&pt);
        let x = [0.3, -0.5, 0.2, 0.9, -0.1, 0.4, 0.6, 0.8];
        let r = x[..7].iter().map(|v| v * v).sum::<f64>().sqrt();
        let sum: f64 = (0..4).map(|t| polys[t].eval(&x[..7]) * rad[t](r, x[7])).sum();
        let direct = forcing_ep(&f, &b, &x);
        assert!((sum - direct).abs() < 1e-12 * direct.abs(), "{sum} vs {direct}");
    }

    #[test]
    fn metric_identity_at_origin() {
        let me = MetricExpansion::new(CurvatureFrame::random_gauge(8, 1, 1.0));
        let g = me.evaluate(&[0.0; 8], 4).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(g.inverse[i * 8 + j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let far = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        assert!(matches!(me.evaluate(&far, 2), Err(Error::Chart { .. })));
    }
}
