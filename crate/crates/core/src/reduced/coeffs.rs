use serde::{Deserialize, Serialize};

use crate::bubble::bubble_energy_with;
use crate::corrector::{corrector_diagnostics, CorrectorSolution};
use crate::error::{Error, Result};
use crate::geom::weyl_norm;
use crate::model::{two_sharp, two_star, CurvatureFrame, HessianData, ProblemPoint};
use crate::quad::MomentTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    Constants,
    NonConstants,
}

/// Coefficients of the reduced energy: `J = E + A γ ε δ - B δ⁴` when `K`
/// and `H` are constant, `J = E + A ε δ - B δ²` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoefficients {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub case: CaseTag,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none", default)]
    pub s: Option<f64>,
}

fn table(pt: &ProblemPoint) -> Result<MomentTable> {
    MomentTable::new(pt.n, pt.d())
}

/// `A = (n-1) ∫_{R^{n-1}} U²(x̃, 0) dx̃`.
pub fn coeff_a(pt: &ProblemPoint) -> Result<f64> {
    coeff_a_with(pt, &table(pt)?)
}

pub fn coeff_a_with(pt: &ProblemPoint, tbl: &MomentTable) -> Result<f64> {
    let nf = pt.nf();
    Ok((nf - 1.0) * pt.amp_sq() * tbl.boundary(0, nf - 2.0)?)
}

/// `B` for non-constant `K, H`: the Hessian quadratic forms reduce to their
/// traces over the tangential sphere. The `x_n²` moment carries `∂²_nn K`.
pub fn coeff_b_nonconstant(pt: &ProblemPoint, hess: &HessianData) -> Result<f64> {
    coeff_b_nonconstant_with(pt, hess, &table(pt)?)
}

pub fn coeff_b_nonconstant_with(pt: &ProblemPoint, hess: &HessianData, tbl: &MomentTable) -> Result<f64> {
    let n = pt.n;
    let nf = pt.nf();
    let m = nf - 1.0;
    let amp = pt.bubble_amp();
    let sharp = two_sharp(n);
    let star = two_star(n);
    let boundary = pt.c_n() * (nf - 2.0) / 4.0
        * (hess.trace_h() / m)
        * amp.powf(sharp)
        * tbl.boundary(2, nf - 1.0)?;
    let interior = amp.powf(star) / (2.0 * star)
        * ((hess.trace_k_tangential() / m) * tbl.halfspace(0, 2, nf)?
            + hess.k_nn() * tbl.halfspace(2, 0, nf)?);
    Ok(boundary + interior)
}

/// Common prefactor `α_n² |K|^{-(n-2)/2} ω (n-2)/(n+1) I_n^{n+2}`.
fn s_prefactor(pt: &ProblemPoint, tbl: &MomentTable) -> Result<f64> {
    let nf = pt.nf();
    Ok(pt.amp_sq() * tbl.omega * (nf - 2.0) / (nf + 1.0) * tbl.beta(nf, nf + 2.0)?)
}

/// `S = pre · [φ̂_{(n-3)/2} + (n-3) D ∫_D^∞ (t-D)³ (t²-1)^{-(n-1)/2} dt]`.
pub fn compute_s(pt: &ProblemPoint) -> Result<f64> {
    compute_s_with(pt, &table(pt)?)
}

pub fn compute_s_with(pt: &ProblemPoint, tbl: &MomentTable) -> Result<f64> {
    let nf = pt.nf();
    let bracket = tbl.phi_hat((nf - 3.0) / 2.0)? + (nf - 3.0) * pt.d() * tbl.t(3.0, (nf - 1.0) / 2.0)?;
    Ok(s_prefactor(pt, tbl)? * bracket)
}

/// The `R²_nins` bracket in the form `pre · [(n-3) φ̃_{(n-1)/2} - 4 φ̂_{(n-3)/2}]`,
/// which equals `-S`.
pub fn i1_closed_form(pt: &ProblemPoint) -> Result<f64> {
    let tbl = table(pt)?;
    let nf = pt.nf();
    let bracket = (nf - 3.0) * tbl.phi_tilde((nf - 1.0) / 2.0)? - 4.0 * tbl.phi_hat((nf - 3.0) / 2.0)?;
    Ok(s_prefactor(pt, &tbl)? * bracket)
}

/// The `R²_nins` bracket assembled from its two moments,
/// `c_n α_n²(n-2)²/(4(n-1)|K|^{(n-2)/2}) ∫x_n⁴|x̃|²Q^{-n} - ½∫x_n² U²`.
///
/// This reduces to `pre · [(n-3) φ̃_{(n-1)/2} - 2 φ̂_{(n-3)/2}]`, which differs
/// from [`i1_closed_form`] in the `φ̂` coefficient.
pub fn i1_from_moments(pt: &ProblemPoint) -> Result<f64> {
    let tbl = table(pt)?;
    let nf = pt.nf();
    let first = pt.c_n() * pt.amp_sq() * (nf - 2.0).powi(2) / (4.0 * (nf - 1.0)) * tbl.halfspace(4, 2, nf)?;
    let second = 0.5 * pt.amp_sq() * tbl.halfspace(2, 0, nf - 2.0)?;
    Ok(first - second)
}

/// The `R_ninj,ij` bracket; returns both terms so callers can judge the
/// cancellation against their size.
pub fn i2_terms(pt: &ProblemPoint) -> Result<(f64, f64)> {
    let tbl = table(pt)?;
    let nf = pt.nf();
    let first = pt.c_n() * pt.amp_sq() * (nf - 2.0).powi(2) / (2.0 * (nf * nf - 1.0)) * tbl.halfspace(2, 4, nf)?;
    let second = 0.5 * pt.amp_sq() * tbl.halfspace(2, 0, nf - 2.0)?;
    Ok((first, second))
}

/// `|W̄|²/(24(n-1)) ∫ |x̃|² U²`.
pub fn weyl_term(pt: &ProblemPoint, weyl_norm_sq: f64, tbl: &MomentTable) -> Result<f64> {
    let nf = pt.nf();
    Ok(weyl_norm_sq / (24.0 * (nf - 1.0)) * pt.amp_sq() * tbl.halfspace(0, 2, nf - 2.0)?)
}

/// The three contributions to the constants-case `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBTerms {
    /// `½ ∫ E_p V_p`.
    pub corrector: f64,
    pub weyl: f64,
    /// `R²_nins S`.
    pub normal: f64,
}

impl ConstantBTerms {
    pub fn total(&self) -> f64 {
        self.corrector + self.weyl + self.normal
    }
}

/// `B` for constant `K, H`. The corrector term uses
/// `-½∫(c_nΔV + (2*-1)K U^{2*-2} V) V = ½∫E_p V` and takes `∫E_p V` from
/// the solution's diagnostics.
pub fn coeff_b_constant(pt: &ProblemPoint, frame: &CurvatureFrame, sol: &CorrectorSolution) -> Result<ConstantBTerms> {
    if sol.pt != *pt {
        return Err(Error::Domain("corrector was solved for a different point".into()));
    }
    let pairing = corrector_diagnostics(sol).pairing;
    coeff_b_constant_with(pt, frame, pairing)
}

pub fn coeff_b_constant_with(pt: &ProblemPoint, frame: &CurvatureFrame, pairing: f64) -> Result<ConstantBTerms> {
    let tbl = table(pt)?;
    let w = match frame.weyl_norm_sq {
        Some(w) => w,
        None => weyl_norm(frame)?,
    };
    Ok(ConstantBTerms {
        corrector: 0.5 * pairing,
        weyl: weyl_term(pt, w, &tbl)?,
        normal: frame.nnins_sq() * compute_s_with(pt, &tbl)?,
    })
}

/// Coefficients at a point with non-constant `K, H`.
pub fn reduced_nonconstant(pt: &ProblemPoint, hess: &HessianData) -> Result<ReducedCoefficients> {
    let tbl = table(pt)?;
    Ok(ReducedCoefficients {
        e: bubble_energy_with(pt, &tbl)?,
        a: coeff_a_with(pt, &tbl)?,
        b: coeff_b_nonconstant_with(pt, hess, &tbl)?,
        case: CaseTag::NonConstants,
        s: None,
    })
}

/// Coefficients at a point with constant `K, H`, given the solved corrector.
pub fn reduced_constant(pt: &ProblemPoint, frame: &CurvatureFrame, sol: &CorrectorSolution) -> Result<ReducedCoefficients> {
    let tbl = table(pt)?;
    let b = coeff_b_constant(pt, frame, sol)?;
    Ok(ReducedCoefficients {
        e: bubble_energy_with(pt, &tbl)?,
        a: coeff_a_with(pt, &tbl)?,
        b: b.total(),
        case: CaseTag::Constants,
        s: Some(compute_s_with(pt, &tbl)?),
    })
}

/// Experimental: `∫E_p V_p` is quadratic and rotation invariant in the
/// frame, and the boundary tensor drops out of `E_p`, so
/// `∫E_p V_p = f_N R²_nins`. The conjectured form `F_n - 2 R²_nins S`
/// leaves `F_n = (f_N + 2S) R²_nins`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingFit {
    pub f_normal: f64,
    pub minus_two_s: f64,
    /// Largest relative deviation of the samples from `f_N R²_nins`.
    pub spread: f64,
    pub samples: usize,
}

/// Fits `f_N` by least squares over `(R²_nins, ∫E_p V_p)` pairs.
pub fn fit_pairing(pt: &ProblemPoint, data: &[(f64, f64)]) -> Result<PairingFit> {
    let den: f64 = data.iter().map(|(x, _)| x * x).sum();
    if data.is_empty() || den == 0.0 {
        return Err(Error::Domain("pairing fit needs frames with a nonzero normal block".into()));
    }
    let f = data.iter().map(|(x, y)| x * y).sum::<f64>() / den;
    let spread = data
        .iter()
        .filter(|(x, _)| *x != 0.0)
        .map(|(x, y)| (y - f * x).abs() / (f * x).abs())
        .fold(0.0, f64::max);
    Ok(PairingFit {
        f_normal: f,
        minus_two_s: -2.0 * compute_s(pt)?,
        spread,
        samples: data.len(),
    })
}
