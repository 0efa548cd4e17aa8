use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{algebraic_projection, symmetry_violations, weyl_projection, Rank4};
use crate::error::{Error, Result};
use crate::report::Check;
use crate::tol;

/// Curvature data at `p` in the conformal Fermi gauge.
///
/// `riem` holds the boundary tensor `R̄_ikjl` over tangential indices
/// `0..n-1`, stored as `riem.get(i, k, j, l)`. `normal` is the symmetric
/// block `R_ninj`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameJson", into = "FrameJson")]
pub struct CurvatureFrame {
    pub riem: Rank4,
    pub normal: Vec<f64>,
    pub normal_div: f64,
    pub weyl_norm_sq: Option<f64>,
}

impl CurvatureFrame {
    pub fn zero(n: usize) -> Self {
        let m = n - 1;
        CurvatureFrame {
            riem: Rank4::zeros(m),
            normal: vec![0.0; m * m],
            normal_div: 0.0,
            weyl_norm_sq: None,
        }
    }

    /// Tangential dimension `n-1`.
    pub fn dim(&self) -> usize {
        self.riem.dim
    }

    pub fn n(&self) -> usize {
        self.riem.dim + 1
    }

    #[inline]
    pub fn normal_at(&self, i: usize, j: usize) -> f64 {
        self.normal[i * self.dim() + j]
    }

    /// `sum_{i,s} R_nins^2`.
    pub fn nnins_sq(&self) -> f64 {
        self.normal.iter().map(|v| v * v).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.riem.data.iter().all(|v| *v == 0.0) && self.normal.iter().all(|v| *v == 0.0)
    }

    /// The frame with every component replaced by its absolute value. Its
    /// forcing bounds the size of the terms that cancel in `E_p`.
    pub fn entrywise_abs(&self) -> Self {
        CurvatureFrame {
            riem: Rank4 {
                dim: self.riem.dim,
                data: self.riem.data.iter().map(|v| v.abs()).collect(),
            },
            normal: self.normal.iter().map(|v| v.abs()).collect(),
            normal_div: self.normal_div.abs(),
            weyl_norm_sq: self.weyl_norm_sq,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CurvatureFrame {
            riem: self.riem.scaled(s),
            normal: self.normal.iter().map(|v| v * s).collect(),
            normal_div: self.normal_div * s,
            weyl_norm_sq: self.weyl_norm_sq.map(|w| w * s * s),
        }
    }

    /// Frame with the normal block removed.
    pub fn tangential_only(&self) -> Self {
        CurvatureFrame {
            normal: vec![0.0; self.normal.len()],
            normal_div: 0.0,
            ..self.clone()
        }
    }

    /// Frame with the boundary tensor removed.
    pub fn normal_only(&self) -> Self {
        CurvatureFrame {
            riem: Rank4::zeros(self.dim()),
            weyl_norm_sq: None,
            ..self.clone()
        }
    }

    /// A random frame satisfying every gauge constraint, reproducible from
    /// `seed`. Entries are of order `scale`.
    pub fn random_gauge(n: usize, seed: u64, scale: f64) -> Self {
        let m = n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = Rank4::from_fn(m, |_, _, _, _| rng.random_range(-scale..scale));
        let riem = weyl_projection(&algebraic_projection(&raw));
        let mut normal = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = rng.random_range(-scale..scale);
                normal[i * m + j] = v;
                normal[j * m + i] = v;
            }
        }
        let tr: f64 = (0..m).map(|i| normal[i * m + i]).sum::<f64>() / m as f64;
        for i in 0..m {
            normal[i * m + i] -= tr;
        }
        let normal_div = rng.random_range(-scale..scale);
        CurvatureFrame {
            riem,
            normal,
            normal_div,
            weyl_norm_sq: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorJson {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub riem_boundary: TensorJson,
    pub normal_block: MatrixJson,
    #[serde(default)]
    pub normal_block_div: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl_norm_sq: Option<f64>,
}

impl TryFrom<FrameJson> for CurvatureFrame {
    type Error = Error;

    fn try_from(j: FrameJson) -> Result<Self> {
        let dims = &j.riem_boundary.dims;
        if dims.len() != 4 || dims.iter().any(|d| *d != dims[0]) || dims[0] == 0 {
            return Err(Error::Format(format!(
                "riem_boundary.dims must be four equal positive sizes, got {dims:?}"
            )));
        }
        let m = dims[0];
        if j.riem_boundary.data.len() != m.pow(4) {
            return Err(Error::Format(format!(
                "riem_boundary.data has {} entries, expected {}",
                j.riem_boundary.data.len(),
                m.pow(4)
            )));
        }
        let nb = &j.normal_block;
        if nb.rows != m || nb.cols != m || nb.data.len() != m * m {
            return Err(Error::Format(format!(
                "normal_block must be {m}x{m} with {} entries",
                m * m
            )));
        }
        Ok(CurvatureFrame {
            riem: Rank4 {
                dim: m,
                data: j.riem_boundary.data,
            },
            normal: j.normal_block.data,
            normal_div: j.normal_block_div,
            weyl_norm_sq: j.weyl_norm_sq,
        })
    }
}

impl From<CurvatureFrame> for FrameJson {
    fn from(f: CurvatureFrame) -> Self {
        let m = f.dim();
        FrameJson {
            riem_boundary: TensorJson {
                dims: vec![m; 4],
                data: f.riem.data,
            },
            normal_block: MatrixJson {
                rows: m,
                cols: m,
                data: f.normal,
            },
            normal_block_div: f.normal_div,
            weyl_norm_sq: f.weyl_norm_sq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub checks: Vec<Check>,
    pub weyl_norm_sq: f64,
    pub nnins_sq: f64,
}

impl FrameReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Checks the symmetry classes and gauge trace conditions of a frame,
/// reporting the largest violation per class relative to the largest entry.
pub fn validate_frame(fr: &CurvatureFrame) -> FrameReport {
    let m = fr.dim();
    let scale = fr.riem.max_abs().max(1.0);
    let [p1, p2, ex, bi] = symmetry_violations(&fr.riem);
    let ric = fr.riem.ricci();
    let ric_max = ric.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let nscale = fr.normal.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut nsym = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            nsym = nsym.max((fr.normal_at(i, j) - fr.normal_at(j, i)).abs());
        }
    }
    let ntr: f64 = (0..m).map(|i| fr.normal_at(i, i)).sum();
    let finite = fr
        .riem
        .data
        .iter()
        .chain(&fr.normal)
        .chain(std::iter::once(&fr.normal_div))
        .all(|v| v.is_finite());

    let weyl = fr.riem.norm_sq();
    let mut checks = vec![
        Check::at_most("finite entries", if finite { 0.0 } else { 1.0 }, 0.0),
        Check::at_most("antisymmetry (i,k)", p1 / scale, tol::FRAME_SYMMETRY),
        Check::at_most("antisymmetry (j,l)", p2 / scale, tol::FRAME_SYMMETRY),
        Check::at_most("pair exchange", ex / scale, tol::FRAME_SYMMETRY),
        Check::at_most("first Bianchi", bi / scale, tol::FRAME_SYMMETRY),
        Check::at_most("boundary Ricci = 0", ric_max / scale, tol::FRAME_TRACE),
        Check::at_most("normal block symmetry", nsym / nscale, tol::FRAME_SYMMETRY),
        Check::at_most("R_nn = trace(normal block) = 0", ntr.abs() / nscale, tol::FRAME_TRACE),
    ];
    if let Some(w) = fr.weyl_norm_sq {
        checks.push(Check::at_least("weyl_norm_sq >= 0", w, 0.0));
        checks.push(Check::at_most(
            "supplied weyl_norm_sq matches tensor",
            (w - weyl).abs() / weyl.max(1.0),
            tol::FRAME_SYMMETRY,
        ));
    }
    FrameReport {
        checks,
        weyl_norm_sq: fr.weyl_norm_sq.unwrap_or(weyl),
        nnins_sq: fr.nnins_sq(),
    }
}

/// Second derivatives of `H` (tangential) and `K` (full) at `p`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianData {
    #[serde(rename = "hessH")]
    pub hess_h: Vec<f64>,
    #[serde(rename = "hessK")]
    pub hess_k: Vec<f64>,
}

impl HessianData {
    pub fn identity(n: usize) -> Self {
        let eye = |m: usize| {
            (0..m * m)
                .map(|i| if i / m == i % m { 1.0 } else { 0.0 })
                .collect()
        };
        HessianData {
            hess_h: eye(n - 1),
            hess_k: eye(n),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        HessianData {
            hess_h: self.hess_h.iter().map(|v| v * s).collect(),
            hess_k: self.hess_k.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace_h(&self) -> f64 {
        let m = isqrt(self.hess_h.len());
        (0..m).map(|i| self.hess_h[i * m + i]).sum()
    }

    /// Trace of the tangential block of `D^2 K`.
    pub fn trace_k_tangential(&self) -> f64 {
        let n = isqrt(self.hess_k.len());
        (0..n - 1).map(|i| self.hess_k[i * n + i]).sum()
    }

    pub fn k_nn(&self) -> f64 {
        let n = isqrt(self.hess_k.len());
        self.hess_k[n * n - 1]
    }

    /// Symmetry and positive definiteness checks, with `require_pd` set when
    /// the nondegeneracy hypothesis is asserted.
    pub fn validate(&self, n: usize, require_pd: bool) -> Vec<Check> {
        let mut out = Vec::new();
        for (name, a, m) in [("hessH", &self.hess_h, n - 1), ("hessK", &self.hess_k, n)] {
            if a.len() != m * m {
                out.push(Check::at_most(format!("{name} is {m}x{m}"), 1.0, 0.0));
                continue;
            }
            let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let mut asym = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    asym = asym.max((a[i * m + j] - a[j * m + i]).abs());
                }
            }
            out.push(Check::at_most(
                format!("{name} symmetric"),
                asym / scale,
                tol::HESSIAN_SYMMETRY,
            ));
            if require_pd {
                out.push(
                    Check::at_least(format!("{name} positive definite"), min_eigenvalue(a, m), 0.0)
                        .strict(),
                );
            }
        }
        out
    }
}

fn isqrt(len: usize) -> usize {
    (len as f64).sqrt().round() as usize
}

/// Smallest eigenvalue of the symmetric part of a row-major `m x m` matrix.
pub fn min_eigenvalue(a: &[f64], m: usize) -> f64 {
    let mat = faer::Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (a[i * m + j] + a[j * m + i]));
    match mat.self_adjoint_eigenvalues(faer::Side::Lower) {
        Ok(ev) => ev.iter().cloned().fold(f64::INFINITY, f64::min),
        Err(_) => f64::NAN,
    }
}
