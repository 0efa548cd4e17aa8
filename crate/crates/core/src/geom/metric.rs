//! Inverse metric of the conformal Fermi gauge, expanded to fourth order.

use crate::error::{Error, Result};
use crate::model::CurvatureFrame;

/// Curvature data entering the expansion. Derivative tensors are optional
/// and taken as zero when absent; all are flat, index-major, over tangential
/// indices with the derivative indices last.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpansion {
    pub frame: CurvatureFrame,
    /// `R̄_{ikjl,m}`, `(n-1)^5` entries.
    pub riem_m: Option<Vec<f64>>,
    /// `R̄_{ikjl,mp}`, `(n-1)^6` entries.
    pub riem_mp: Option<Vec<f64>>,
    /// `R_{ninj,k}`, `(n-1)^3` entries.
    pub normal_k: Option<Vec<f64>>,
    /// `R_{ninj,n}`, `(n-1)^2` entries.
    pub normal_n: Option<Vec<f64>>,
    /// `R_{ninj,kl}`, `(n-1)^4` entries.
    pub normal_kl: Option<Vec<f64>>,
    /// `R_{ninj,nk}`, `(n-1)^3` entries.
    pub normal_nk: Option<Vec<f64>>,
    /// `R_{ninj,nn}`, `(n-1)^2` entries.
    pub normal_nn: Option<Vec<f64>>,
    pub chart_radius: f64,
}

/// Full `n x n` inverse metric, row-major, and its determinant, which is
/// `1` through the orders represented here.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEval {
    pub inverse: Vec<f64>,
    pub det: f64,
}

impl MetricExpansion {
    pub fn new(frame: CurvatureFrame) -> Self {
        MetricExpansion {
            frame,
            riem_m: None,
            riem_mp: None,
            normal_k: None,
            normal_n: None,
            normal_kl: None,
            normal_nk: None,
            normal_nn: None,
            chart_radius: 1.0,
        }
    }

    /// Tangential block `g̃^{ij}(y)` through `order` (2, 3 or 4).
    pub fn tangential(&self, y: &[f64], order: u32) -> Result<Vec<f64>> {
        let m = self.frame.dim();
        let n = m + 1;
        if y.len() != n {
            return Err(Error::Domain(format!("point has {} components, expected {n}", y.len())));
        }
        if !(2..=4).contains(&order) {
            return Err(Error::Domain(format!("expansion order must be 2, 3 or 4, got {order}")));
        }
        let radius = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if radius > self.chart_radius {
            return Err(Error::Chart {
                radius,
                chart_radius: self.chart_radius,
            });
        }
        let yt = &y[..m];
        let yn = y[n - 1];
        let r = &self.frame.riem;
        let nb = |i: usize, j: usize| self.frame.normal_at(i, j);
        let mut g = vec![0.0; m * m];

        // R̄_{ikjl} y_k y_l through the partial contraction c[i][k][j] = R̄_{ikjl} y_l.
        let mut ry = vec![0.0; m * m * m];
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for l in 0..m {
                        s += r.get(i, k, j, l) * yt[l];
                    }
                    ry[(i * m + k) * m + j] = s;
                }
            }
        }
        let ryy = |i: usize, j: usize| (0..m).map(|k| ry[(i * m + k) * m + j] * yt[k]).sum::<f64>();
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = if i == j { 1.0 } else { 0.0 } + ryy(i, j) / 3.0 + nb(i, j) * yn * yn;
            }
        }
        if order >= 3 {
            let yn2 = yn * yn;
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    if let Some(t) = &self.riem_m {
                        for k in 0..m {
                            for l in 0..m {
                                for p in 0..m {
                                    s += t[(((i * m + k) * m + j) * m + l) * m + p] * yt[k] * yt[l] * yt[p]
                                        / 6.0;
                                }
                            }
                        }
                    }
                    if let Some(t) = &self.normal_k {
                        for k in 0..m {
                            s += t[(i * m + j) * m + k] * yn2 * yt[k];
                        }
                    }
                    if let Some(t) = &self.normal_n {
                        s += t[i * m + j] * yn2 * yn / 3.0;
                    }
                    g[i * m + j] += s;
                }
            }
        }
        if order >= 4 {
            let yn2 = yn * yn;
            // R̄_{iksl} y_k y_l as a matrix in (i, s).
            let mut rr = vec![0.0; m * m];
            for i in 0..m {
                for s in 0..m {
                    rr[i * m + s] = ryy(i, s);
                }
            }
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    if let Some(t) = &self.riem_mp {
                        for k in 0..m {
                            for l in 0..m {
                                for p in 0..m {
                                    for q in 0..m {
                                        s += t[((((i * m + k) * m + j) * m + l) * m + p) * m + q]
                                            * yt[k]
                                            * yt[l]
                                            * yt[p]
                                            * yt[q]
                                            / 20.0;
                                    }
                                }
                            }
                        }
                    }
                    // R̄_{iksl} R̄_{jmsp} y_k y_l y_m y_p
                    s += (0..m).map(|q| rr[i * m + q] * rr[j * m + q]).sum::<f64>() / 15.0;
                    if let Some(t) = &self.normal_kl {
                        for k in 0..m {
                            for l in 0..m {
                                s += 0.5 * t[((i * m + j) * m + k) * m + l] * yn2 * yt[k] * yt[l];
                            }
                        }
                    }
                    let sym: f64 = (0..m)
                        .map(|q| 0.5 * (rr[i * m + q] * nb(q, j) + rr[j * m + q] * nb(q, i)))
                        .sum();
                    s += sym * yn2 / 3.0;
                    if let Some(t) = &self.normal_nk {
                        for k in 0..m {
                            s += t[(i * m + j) * m + k] * yn2 * yn * yt[k] / 3.0;
                        }
                    }
                    let nn: f64 = (0..m).map(|q| nb(i, q) * nb(q, j)).sum();
                    let dnn = self.normal_nn.as_ref().map_or(0.0, |t| t[i * m + j]);
                    s += (dnn + 8.0 * nn) * yn2 * yn2 / 12.0;
                    g[i * m + j] += s;
                }
            }
        }
        Ok(g)
    }

    /// Full inverse metric with `g̃^{nn} = 1`, `g̃^{ni} = 0`.
    pub fn evaluate(&self, y: &[f64], order: u32) -> Result<MetricEval> {
        let m = self.frame.dim();
        let n = m + 1;
        let t = self.tangential(y, order)?;
        let mut inverse = vec![0.0; n * n];
        for i in 0..m {
            for j in 0..m {
                inverse[i * n + j] = t[i * m + j];
            }
        }
        inverse[n * n - 1] = 1.0;
        Ok(MetricEval { inverse, det: 1.0 })
    }
}

/// `metric_expansion` entry point.
pub fn metric_expansion(me: &MetricExpansion, y: &[f64], order: u32) -> Result<MetricEval> {
    me.evaluate(y, order)
}
