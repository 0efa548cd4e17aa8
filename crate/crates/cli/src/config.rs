//! Flat JSON run configuration. Paths are relative to the config file.

use std::fs;
use std::path::{Path, PathBuf};

use bubblelab::corrector::GridSpec;
use bubblelab::model::{validate_frame, validate_point, CurvatureFrame, FrameJson, HessianData, ProblemPoint};
use bubblelab::verify::{Settings, Tolerances};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    #[default]
    Constants,
    NonConstants,
}

/// Per-sample data for `locate`. Missing scalars fall back to the top level.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub id: String,
    #[serde(default)]
    pub coords: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub gamma: Option<f64>,
    pub frame: Option<PathBuf>,
    #[serde(rename = "hessH")]
    pub hess_h: Option<Vec<f64>>,
    #[serde(rename = "hessK")]
    pub hess_k: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    /// Random points per pointwise check.
    pub points: Option<usize>,
    /// Random frames for the orthogonality check.
    pub frames: Option<usize>,
    /// Sets every verification bound at once; applied before `tolerances`.
    #[serde(alias = "relTol")]
    pub rel_tol: Option<f64>,
    pub tolerances: Option<serde_json::Value>,
    pub frame: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub case: Case,
    #[serde(default)]
    pub samples: Vec<SampleConfig>,
    #[serde(skip)]
    pub base: PathBuf,
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn dimension(&self) -> usize {
        self.n.unwrap_or(8)
    }

    /// `(n, K, H or D, gamma)` with per-sample overrides.
    pub fn point_with(&self, k: Option<f64>, h: Option<f64>, d: Option<f64>, gamma: Option<f64>) -> Result<ProblemPoint, Failure> {
        let n = self.dimension();
        if n < 3 {
            return Err(config_err(format!("n = {n} is below 3")));
        }
        let k = k.or(self.k).unwrap_or(-((n * (n - 1)) as f64));
        let gamma = gamma.or(self.gamma).unwrap_or(1.0);
        let (h, d) = match (h, d) {
            (None, None) => (self.h, self.d),
            other => other,
        };
        match (h, d) {
            (Some(_), Some(_)) => Err(config_err("give either H or D, not both")),
            (Some(h), None) => Ok(ProblemPoint::new(n, k, h, gamma)),
            (None, Some(d)) => Ok(ProblemPoint::with_d(n, k, d, gamma)),
            (None, None) => Ok(ProblemPoint::with_d(n, k, 2.0, gamma)),
        }
    }

    pub fn point(&self) -> Result<ProblemPoint, Failure> {
        self.point_with(None, None, None, None)
    }

    pub fn tolerances(&self) -> Result<Tolerances, Failure> {
        let mut tol = match self.rel_tol {
            Some(t) => Tolerances::uniform(t),
            None => Tolerances::default(),
        };
        if let Some(v) = &self.tolerances {
            // Fields given here replace the ones above; the rest stay.
            let mut merged = serde_json::to_value(tol).expect("tolerances serialize");
            let (Some(dst), Some(src)) = (merged.as_object_mut(), v.as_object()) else {
                return Err(config_err("tolerances must be an object"));
            };
            for (key, val) in src {
                if !dst.contains_key(key) {
                    return Err(config_err(format!("unknown tolerance {key:?}")));
                }
                dst.insert(key.clone(), val.clone());
            }
            tol = serde_json::from_value(merged).map_err(|e| config_err(format!("tolerances: {e}")))?;
        }
        if let Some(bad) = tol.all().iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(config_err(format!("every tolerance must be positive and finite, got {bad}")));
        }
        Ok(tol)
    }

    pub fn settings(&self, override_gate: bool) -> Result<Settings, Failure> {
        let point = checked_point(self.point()?, override_gate)?;
        let mut s = Settings::new(point);
        s.seed = self.seed.unwrap_or(s.seed);
        s.points = self.points.unwrap_or(s.points);
        s.frames = self.frames.unwrap_or(s.frames);
        if s.points == 0 {
            return Err(config_err("points must be at least 1"));
        }
        s.tol = self.tolerances()?;
        Ok(s)
    }

    pub fn grid(&self) -> Result<GridSpec, Failure> {
        let g = self.grid.unwrap_or_default();
        g.validate().map_err(|e| config_err(format!("grid: {e}")))?;
        Ok(g)
    }

    pub fn load_frame(&self, path: &Path, n: usize) -> Result<CurvatureFrame, Failure> {
        let full = self.resolve(path);
        let text = fs::read_to_string(&full).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
        let json: FrameJson =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
        let fr = CurvatureFrame::try_from(json).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
        if fr.n() != n {
            return Err(config_err(format!(
                "{}: frame is for n = {}, config has n = {n}",
                full.display(),
                fr.n()
            )));
        }
        let rep = validate_frame(&fr);
        if !rep.pass() {
            return Err(config_err(format!("{}: frame fails {}", full.display(), rep.failures().join(", "))));
        }
        Ok(fr)
    }
}

/// Gates on a point. `D ≤ 1` is reported separately so `locate` can skip
/// the sample instead of failing.
pub fn checked_point(pt: ProblemPoint, override_gate: bool) -> Result<ProblemPoint, Failure> {
    let rep = validate_point(&pt, override_gate);
    if !rep.pass() {
        return Err(config_err(format!("point fails {}", rep.failures().join(", "))));
    }
    Ok(pt)
}

pub fn hessians(s: &SampleConfig) -> Result<HessianData, Failure> {
    match (&s.hess_h, &s.hess_k) {
        (Some(h), Some(k)) => Ok(HessianData {
            hess_h: h.clone(),
            hess_k: k.clone(),
        }),
        _ => Err(config_err(format!("sample {}: the non-constant case needs hessH and hessK", s.id))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RunConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn defaults() {
        let p = RunConfig::default().point().unwrap();
        assert_eq!((p.n, p.k, p.gamma), (8, -56.0, 1.0));
        assert!((p.d() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sample_values_override_top_level() {
        let c = parse(r#"{"n": 9, "D": 3.0, "gamma": 2.0}"#);
        let p = c.point_with(None, Some(0.5), None, None).unwrap();
        assert_eq!(p.h, 0.5);
        assert_eq!(p.gamma, 2.0);
        assert!((c.point().unwrap().d() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn tolerance_merge() {
        let c = parse(r#"{"relTol": 1e-3, "tolerances": {"energy": 1e-5}}"#);
        let t = c.tolerances().unwrap();
        assert_eq!(t.energy, 1e-5);
        assert_eq!(t.residual, 1e-3);
        let d = RunConfig::default().tolerances().unwrap();
        assert_eq!(d, Tolerances::default());
    }
}
