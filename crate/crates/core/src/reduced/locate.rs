use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::coeffs::{reduced_constant, reduced_nonconstant, CaseTag, ReducedCoefficients};
use crate::corrector::CorrectorSolution;
use crate::error::{Error, Result};
use crate::model::{CurvatureFrame, HessianData, ProblemPoint};
use crate::report::all_pass;
use crate::tol;

/// Stationarity rule used in the constants case.
pub const CONSTANTS_RULE: &str = "dG/dd = A*gamma - 4*d^3*B = 0, so d0^3 = A*gamma/(4B)";
/// Stationarity rule used in the non-constant case.
pub const NONCONSTANT_RULE: &str = "dG/dd = A - 2*d*B = 0, so d0 = A/(2B)";

/// Coefficients at one boundary sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCoefficients {
    pub id: String,
    pub coords: Vec<f64>,
    pub gamma: f64,
    pub coeffs: ReducedCoefficients,
    /// Whether `D²H` and `D²K` are positive definite; `None` in the
    /// constants case.
    pub hessians_pd: Option<bool>,
}

pub fn nonconstant_sample(id: &str, coords: Vec<f64>, pt: &ProblemPoint, hess: &HessianData) -> Result<SampleCoefficients> {
    let shape = hess.validate(pt.n, false);
    if !all_pass(&shape) {
        return Err(Error::Domain(format!("sample {id}: Hessians are not symmetric {}x{} / {}x{}", pt.n - 1, pt.n - 1, pt.n, pt.n)));
    }
    Ok(SampleCoefficients {
        id: id.to_string(),
        coords,
        gamma: 1.0,
        coeffs: reduced_nonconstant(pt, hess)?,
        hessians_pd: Some(all_pass(&hess.validate(pt.n, true))),
    })
}

pub fn constant_sample(
    id: &str,
    coords: Vec<f64>,
    pt: &ProblemPoint,
    frame: &CurvatureFrame,
    sol: &CorrectorSolution,
) -> Result<SampleCoefficients> {
    Ok(SampleCoefficients {
        id: id.to_string(),
        coords,
        gamma: pt.gamma,
        coeffs: reduced_constant(pt, frame, sol)?,
        hessians_pd: None,
    })
}

/// One row of the samples table; `d0` and `G` are absent where `B ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub id: String,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub gamma: f64,
    pub d0: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
}

/// Columns of the samples CSV.
pub const SAMPLE_COLUMNS: [&str; 7] = ["sample", "E", "A", "B", "gamma", "d0", "G"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JValues {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub gamma: f64,
    /// The model function at the optimum.
    #[serde(rename = "G")]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// `B > 0` at every sample.
    pub b_positive: bool,
    /// Positive definite Hessians at the selected sample (non-constant case).
    pub hessians_pd: Option<bool>,
    /// `D > 1` at every sample offered, i.e. nothing was excluded.
    pub d_above_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub case: CaseTag,
    pub p_star: String,
    pub p_star_coords: Vec<f64>,
    pub d_star: f64,
    /// Exponent of `ε` in `δ = d ε^rate`.
    pub rate: f64,
    pub stationarity_rule: String,
    /// Relative residual of the stationarity equation at `d_star`.
    pub stationarity_residual: f64,
    pub j_values: JValues,
    pub flags: HypothesisFlags,
    pub samples: Vec<SampleRow>,
    /// Samples dropped before the coefficients were computed, with reasons.
    pub excluded: Vec<String>,
}

impl BlowupReport {
    pub fn samples_csv(&self) -> String {
        let mut s = SAMPLE_COLUMNS.join(",");
        s.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.samples {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", r.id, r.e, r.a, r.b, r.gamma, opt(r.d0), opt(r.g));
        }
        s
    }
}

/// `G(d) = A γ d - B d⁴`.
pub fn model_constants(a: f64, gamma: f64, b: f64, d: f64) -> f64 {
    a * gamma * d - b * d.powi(4)
}

/// `G(d) = A d - B d²`.
pub fn model_nonconstant(a: f64, b: f64, d: f64) -> f64 {
    a * d - b * d * d
}

fn check_case(samples: &[SampleCoefficients], case: CaseTag) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Domain("no admissible samples".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.coeffs.case != case) {
        return Err(Error::Domain(format!("sample {} has the wrong case tag", s.id)));
    }
    Ok(())
}

/// Maximizes `G(d₀(p), p)` over the sample with `d₀ = (Aγ/(4B))^{1/3}`.
/// Samples with `B ≤ 0` are kept in the table without a stationary point.
pub fn optimize_constants(samples: &[SampleCoefficients], excluded: Vec<String>) -> Result<BlowupReport> {
    check_case(samples, CaseTag::Constants)?;
    let rows: Vec<SampleRow> = samples
        .iter()
        .map(|s| {
            let c = &s.coeffs;
            let d0 = (c.b > 0.0).then(|| (c.a * s.gamma / (4.0 * c.b)).cbrt());
            SampleRow {
                id: s.id.clone(),
                e: c.e,
                a: c.a,
                b: c.b,
                gamma: s.gamma,
                d0,
                g: d0.map(|d| model_constants(c.a, s.gamma, c.b, d)),
            }
        })
        .collect();
    let best = argmax(rows.iter().map(|r| r.g))
        .ok_or_else(|| Error::HypothesisFailure("B > 0 fails at every sample".into()))?;
    let s = &samples[best];
    let r = &rows[best];
    let d = r.d0.unwrap();
    let ag = r.a * r.gamma;
    Ok(BlowupReport {
        case: CaseTag::Constants,
        p_star: s.id.clone(),
        p_star_coords: s.coords.clone(),
        d_star: d,
        rate: 1.0 / 3.0,
        stationarity_rule: CONSTANTS_RULE.into(),
        stationarity_residual: (ag - 4.0 * d.powi(3) * r.b).abs() / ag,
        j_values: JValues {
            e: r.e,
            a: r.a,
            b: r.b,
            gamma: r.gamma,
            g: r.g.unwrap(),
        },
        flags: HypothesisFlags {
            b_positive: rows.iter().all(|r| r.b > 0.0),
            hessians_pd: None,
            d_above_one: excluded.is_empty(),
        },
        samples: rows,
        excluded,
    })
}

/// Two-scale selection: the bubble energy `E(p)` is maximized first, and
/// among samples whose energy lies within the tie band of the maximum the
/// largest `G_p(d₀) = A²/(4B)` wins, with `d₀ = A/(2B)`.
pub fn optimize_nonconstant(samples: &[SampleCoefficients], excluded: Vec<String>) -> Result<BlowupReport> {
    check_case(samples, CaseTag::NonConstants)?;
    let rows: Vec<SampleRow> = samples
        .iter()
        .map(|s| {
            let c = &s.coeffs;
            let d0 = (c.b > 0.0).then(|| c.a / (2.0 * c.b));
            SampleRow {
                id: s.id.clone(),
                e: c.e,
                a: c.a,
                b: c.b,
                gamma: s.gamma,
                d0,
                g: d0.map(|d| model_nonconstant(c.a, c.b, d)),
            }
        })
        .collect();
    let e_max = rows.iter().map(|r| r.e).fold(f64::NEG_INFINITY, f64::max);
    let band = tol::ENERGY_TIE_BAND * e_max.abs();
    let top: Vec<usize> = (0..rows.len()).filter(|&i| e_max - rows[i].e <= band).collect();
    let best = argmax(top.iter().map(|&i| rows[i].g)).map(|k| top[k]).ok_or_else(|| {
        Error::HypothesisFailure(format!("B > 0 fails at the energy maximum {}", rows[top[0]].id))
    })?;
    let s = &samples[best];
    if s.hessians_pd != Some(true) {
        return Err(Error::HypothesisFailure(format!(
            "D^2 H and D^2 K are not positive definite at the selected sample {}",
            s.id
        )));
    }
    let r = &rows[best];
    let d = r.d0.unwrap();
    Ok(BlowupReport {
        case: CaseTag::NonConstants,
        p_star: s.id.clone(),
        p_star_coords: s.coords.clone(),
        d_star: d,
        rate: 1.0,
        stationarity_rule: NONCONSTANT_RULE.into(),
        stationarity_residual: (r.a - 2.0 * d * r.b).abs() / r.a,
        j_values: JValues {
            e: r.e,
            a: r.a,
            b: r.b,
            gamma: r.gamma,
            g: r.g.unwrap(),
        },
        flags: HypothesisFlags {
            b_positive: rows.iter().all(|r| r.b > 0.0),
            hessians_pd: s.hessians_pd,
            d_above_one: excluded.is_empty(),
        },
        samples: rows,
        excluded,
    })
}

/// Index of the largest present value; the first one wins a tie.
fn argmax(values: impl Iterator<Item = Option<f64>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(id: &str, e: f64, a: f64, b: f64, gamma: f64, case: CaseTag) -> SampleCoefficients {
        SampleCoefficients {
            id: id.into(),
            coords: vec![],
            gamma,
            coeffs: ReducedCoefficients { e, a, b, case, s: None },
            hessians_pd: (case == CaseTag::NonConstants).then_some(true),
        }
    }

    #[test]
    fn constants_example() {
        let r = optimize_constants(&[synth("p", 0.0, 4.0, 1.0, 1.0, CaseTag::Constants)], vec![]).unwrap();
        assert!((r.d_star - 1.0).abs() < 1e-15);
        assert!((r.j_values.g - 3.0).abs() < 1e-15);
        assert!(r.stationarity_residual < 1e-15);
    }

    #[test]
    fn nonconstant_example() {
        let r = optimize_nonconstant(&[synth("p", 0.0, 2.0, 1.0, 1.0, CaseTag::NonConstants)], vec![]).unwrap();
        assert_eq!(r.d_star, 1.0);
        assert_eq!(r.rate, 1.0);
    }

    #[test]
    fn all_nonpositive_b_fails() {
        let s = [synth("p", 0.0, 4.0, -1.0, 1.0, CaseTag::Constants)];
        assert!(matches!(optimize_constants(&s, vec![]), Err(Error::HypothesisFailure(_))));
    }

    #[test]
    fn energy_takes_precedence() {
        let s = [
            synth("low", 1.0, 10.0, 1.0, 1.0, CaseTag::NonConstants),
            synth("high", 2.0, 1.0, 1.0, 1.0, CaseTag::NonConstants),
            synth("tie", 2.0 * (1.0 - 1e-12), 3.0, 1.0, 1.0, CaseTag::NonConstants),
        ];
        assert_eq!(optimize_nonconstant(&s, vec![]).unwrap().p_star, "tie");
    }

    #[test]
    fn csv_has_blank_for_missing_d0() {
        let s = [
            synth("a", 0.0, 4.0, 1.0, 1.0, CaseTag::Constants),
            synth("b", 0.0, 4.0, -1.0, 1.0, CaseTag::Constants),
        ];
        let csv = optimize_constants(&s, vec![]).unwrap().samples_csv();
        let last = csv.lines().last().unwrap();
        assert!(last.ends_with(",,"), "{last}");
    }
}
