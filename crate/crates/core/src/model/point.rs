use serde::{Deserialize, Serialize, Serializer};

use crate::report::Check;

/// Smallest dimension covered by the theory.
pub const PAPER_MIN_DIM: usize = 8;
/// Smallest dimension accepted with the override flag.
pub const OVERRIDE_MIN_DIM: usize = 5;

/// Scalar data at a candidate blow-up point.
///
/// `D` is never stored; it is recomputed from `(n, K, H)` on every access.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ProblemPoint {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub gamma: f64,
}

impl Serialize for ProblemPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            n: usize,
            #[serde(rename = "K")]
            k: f64,
            #[serde(rename = "H")]
            h: f64,
            gamma: f64,
            #[serde(rename = "D")]
            d: f64,
        }
        Out {
            n: self.n,
            k: self.k,
            h: self.h,
            gamma: self.gamma,
            d: self.d(),
        }
        .serialize(s)
    }
}

impl ProblemPoint {
    pub fn new(n: usize, k: f64, h: f64, gamma: f64) -> Self {
        ProblemPoint { n, k, h, gamma }
    }

    /// The point with the given `D`, solving for `H`.
    pub fn with_d(n: usize, k: f64, d: f64, gamma: f64) -> Self {
        let nf = n as f64;
        let h = d * k.abs().sqrt() / (nf * (nf - 1.0)).sqrt();
        ProblemPoint { n, k, h, gamma }
    }

    pub fn d(&self) -> f64 {
        let nf = self.n as f64;
        (nf * (nf - 1.0)).sqrt() * self.h / self.k.abs().sqrt()
    }

    pub fn abs_k(&self) -> f64 {
        self.k.abs()
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `c_n = 4(n-1)/(n-2)`.
    pub fn c_n(&self) -> f64 {
        c_n(self.n)
    }

    /// `alpha_n = (4n(n-1))^((n-2)/4)`.
    pub fn alpha_n(&self) -> f64 {
        alpha_n(self.n)
    }

    /// Amplitude of the normalized bubble, `alpha_n / |K|^((n-2)/4)`.
    pub fn bubble_amp(&self) -> f64 {
        let nf = self.nf();
        self.alpha_n() / self.abs_k().powf((nf - 2.0) / 4.0)
    }

    /// `alpha_n^2 / |K|^((n-2)/2)`, the prefactor of every `U^2` moment.
    pub fn amp_sq(&self) -> f64 {
        self.bubble_amp().powi(2)
    }

    pub fn with_k(&self, k: f64) -> Self {
        ProblemPoint { k, ..*self }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        ProblemPoint { gamma, ..*self }
    }
}

pub fn c_n(n: usize) -> f64 {
    let nf = n as f64;
    4.0 * (nf - 1.0) / (nf - 2.0)
}

pub fn alpha_n(n: usize) -> f64 {
    let nf = n as f64;
    (4.0 * nf * (nf - 1.0)).powf((nf - 2.0) / 4.0)
}

/// Interior critical exponent `2n/(n-2)`.
pub fn two_star(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * nf / (nf - 2.0)
}

/// Boundary critical exponent `2(n-1)/(n-2)`.
pub fn two_sharp(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * (nf - 1.0) / (nf - 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub checks: Vec<Check>,
    #[serde(rename = "D")]
    pub d: f64,
    pub outside_paper_regime: bool,
}

impl PointReport {
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

/// Checks the hypotheses on a point. With `override_gate` the dimension gate
/// drops to `n >= 5` and the report is marked outside the paper regime.
pub fn validate_point(pt: &ProblemPoint, override_gate: bool) -> PointReport {
    let d = pt.d();
    let min_dim = if override_gate {
        OVERRIDE_MIN_DIM
    } else {
        PAPER_MIN_DIM
    };
    let dim_name = format!("n >= {min_dim}");
    let checks = vec![
        Check::at_least(dim_name, pt.n as f64, min_dim as f64),
        Check::at_most("K < 0", pt.k, 0.0).strict(),
        Check::at_least("D > 1", d, 1.0).strict(),
        Check::at_least("gamma > 0", pt.gamma, 0.0).strict(),
        Check::at_most("finite inputs", finite_flag(pt), 0.0),
    ];
    PointReport {
        checks,
        d,
        outside_paper_regime: pt.n < PAPER_MIN_DIM,
    }
}

fn finite_flag(pt: &ProblemPoint) -> f64 {
    if pt.k.is_finite() && pt.h.is_finite() && pt.gamma.is_finite() {
        0.0
    } else {
        1.0
    }
}

impl Check {
    /// Turns a non-strict bound into a strict one.
    pub(crate) fn strict(mut self) -> Self {
        self.pass = self.pass && self.value != self.bound;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn d_from_substitution() {
        let pt = ProblemPoint::new(8, -56.0, 2.0, 1.0);
        assert!((pt.d() - 2.0).abs() < 1e-15);
        assert!(validate_point(&pt, false).pass());
    }

    #[test]
    fn small_d_fails() {
        let pt = ProblemPoint::with_d(8, -56.0, 0.5, 1.0);
        let r = validate_point(&pt, false);
        assert_eq!(r.failures(), vec!["D > 1"]);
    }

    #[test]
    fn dimension_gate() {
        let pt = ProblemPoint::with_d(6, -1.0, 2.0, 1.0);
        let r = validate_point(&pt, false);
        assert_eq!(r.failures(), vec!["n >= 8"]);
        let r = validate_point(&pt, true);
        assert!(r.pass());
        assert!(r.outside_paper_regime);
    }

    #[test]
    fn serde_keys() {
        let pt = ProblemPoint::new(8, -56.0, 2.0, 0.5);
        let s = serde_json::to_string(&pt).unwrap();
        assert_eq!(s, r#"{"n":8,"K":-56.0,"H":2.0,"gamma":0.5,"D":2.0}"#);
        let back: ProblemPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, pt);
    }

    proptest! {
        #[test]
        fn pass_iff_invariants(n in 3usize..14, k in -10.0f64..10.0, h in -3.0f64..3.0, g in -1.0f64..1.0) {
            let pt = ProblemPoint::new(n, k, h, g);
            let expect = n >= 8 && k < 0.0 && pt.d() > 1.0 && g > 0.0;
            prop_assert_eq!(validate_point(&pt, false).pass(), expect);
        }
    }
}
