//! Coefficients of the reduced energy and the finite-dimensional
//! maximization that locates the blow-up point and rate.

mod coeffs;
mod locate;

pub use coeffs::{
    coeff_a, coeff_a_with, coeff_b_constant, coeff_b_constant_with, coeff_b_nonconstant,
    coeff_b_nonconstant_with, compute_s, compute_s_with, fit_pairing, i1_closed_form, i1_from_moments,
    i2_terms, reduced_constant, reduced_nonconstant, weyl_term, CaseTag, ConstantBTerms, PairingFit,
    ReducedCoefficients,
};
pub use locate::{
    constant_sample, model_constants, model_nonconstant, nonconstant_sample, optimize_constants,
    optimize_nonconstant, BlowupReport, HypothesisFlags, JValues, SampleCoefficients, SampleRow,
    CONSTANTS_RULE, NONCONSTANT_RULE, SAMPLE_COLUMNS,
};
