//! Secret-key rates `R = H(A) - f·H(A|B) - I_pa` for every scheme and
//! processing mode.
//!
//! Rates are signed. Negative values mean no key can be distilled; use
//! [`RateBreakdown::positive_rate`] when a clamped value is wanted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::h2;
use crate::scenario::{
    coarse_error_rate, di_alice_entropy, di_bell_parameter, di_coarse_error, di_joint,
    refined_cond_entropy_erasure, Bb84Params, DdiParams, DiParams, Mode, SchemeParams,
};

/// Error-correction inefficiency: bits actually leaked per bit of `H(A|B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EcParams(f64);

impl EcParams {
    /// Error correction at the Shannon limit.
    pub const SHANNON: EcParams = EcParams(1.0);

    pub fn new(f: f64) -> Result<Self> {
        if f.is_finite() && f >= 1.0 {
            Ok(EcParams(f))
        } else {
            Err(Error::Domain { what: "error-correction factor f (must be >= 1)", value: f })
        }
    }

    pub fn f(self) -> f64 {
        self.0
    }
}

impl Default for EcParams {
    fn default() -> Self {
        EcParams::SHANNON
    }
}

impl TryFrom<f64> for EcParams {
    type Error = Error;

    fn try_from(f: f64) -> Result<Self> {
        EcParams::new(f)
    }
}

impl From<EcParams> for f64 {
    fn from(ec: EcParams) -> f64 {
        ec.0
    }
}

/// The three terms of the rate and their combination, in bits per signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub h_a: f64,
    pub h_a_given_b: f64,
    pub i_pa: f64,
    pub f: f64,
    pub rate: f64,
}

impl RateBreakdown {
    pub fn positive_rate(&self) -> f64 {
        self.rate.max(0.0)
    }
}

pub fn generic_rate(h_a: f64, h_a_given_b: f64, i_pa: f64, ec: EcParams) -> RateBreakdown {
    let f = ec.f();
    RateBreakdown { h_a, h_a_given_b, i_pa, f, rate: h_a - f * h_a_given_b - i_pa }
}

/// Coarse-grained BB84: `1 - f·h(e_c) - h(e_c)`.
pub fn bb84_coarse_rate(params: &Bb84Params, ec: EcParams) -> RateBreakdown {
    let hc = h2(coarse_error_rate(params.p_single(), params.e_single()).value());
    generic_rate(1.0, hc, hc, ec)
}

/// BB84 with Bob's erasure flags used in error correction. Privacy
/// amplification is unchanged and still pays `h(e_c)`.
pub fn bb84_refined_rate(params: &Bb84Params, ec: EcParams) -> RateBreakdown {
    let hc = h2(coarse_error_rate(params.p_single(), params.e_single()).value());
    let leak = refined_cond_entropy_erasure(params.p_single(), params.e_single());
    generic_rate(1.0, leak, hc, ec)
}

pub fn ddi_coarse_rate(params: &DdiParams, ec: EcParams) -> RateBreakdown {
    bb84_coarse_rate(&params.as_bb84(), ec)
}

pub fn ddi_refined_rate(params: &DdiParams, ec: EcParams) -> RateBreakdown {
    bb84_refined_rate(&params.as_bb84(), ec)
}

/// Privacy-amplification cost from the CHSH value,
/// `h((1 + sqrt((S/2)^2 - 1)) / 2)`.
///
/// Without a Bell violation (`S < 2`) the eavesdropper is unconstrained and
/// the cost is one full bit.
pub fn di_ipa(s: f64) -> f64 {
    if s.is_nan() || s < 2.0 {
        return 1.0;
    }
    let v = ((0.5 * s).powi(2) - 1.0).clamp(0.0, 1.0);
    h2(0.5 * (1.0 + v.sqrt()))
}

/// Device-independent rate with fixed-bit coarse graining on both sides.
///
/// The error-correction term is `h(e_c)`, even though Alice's bit is biased.
/// [`di_coarse_leak_gap`] reports how far that sits above the Shannon cost of
/// the coarse table.
pub fn di_coarse_rate(params: &DiParams, ec: EcParams) -> RateBreakdown {
    let h_a = di_alice_entropy(params.eta_a());
    let leak = h2(di_coarse_error(params).value());
    generic_rate(h_a, leak, di_ipa(di_bell_parameter(params)), ec)
}

/// Device-independent rate when Bob corrects errors with his loss flags.
pub fn di_refined_rate(params: &DiParams, ec: EcParams) -> RateBreakdown {
    let h_a = di_alice_entropy(params.eta_a());
    let leak = di_joint(params, Mode::Refined).conditional_entropy();
    generic_rate(h_a, leak, di_ipa(di_bell_parameter(params)), ec)
}

/// `h(e_c) - H(A|B_coarse)` for the device-independent scheme: the excess of
/// the printed error-correction cost over the Shannon cost of the coarse
/// joint table. Non-negative (Fano), zero when Alice's bit is uniform and
/// errors are symmetric.
pub fn di_coarse_leak_gap(params: &DiParams) -> f64 {
    h2(di_coarse_error(params).value()) - di_joint(params, Mode::Coarse).conditional_entropy()
}

/// Rate of any scheme in the given mode.
pub fn rate(params: &SchemeParams, mode: Mode, ec: EcParams) -> RateBreakdown {
    match (params, mode) {
        (SchemeParams::Bb84(p), Mode::Coarse) => bb84_coarse_rate(p, ec),
        (SchemeParams::Bb84(p), Mode::Refined) => bb84_refined_rate(p, ec),
        (SchemeParams::Ddi(p), Mode::Coarse) => ddi_coarse_rate(p, ec),
        (SchemeParams::Ddi(p), Mode::Refined) => ddi_refined_rate(p, ec),
        (SchemeParams::Di(p), Mode::Coarse) => di_coarse_rate(p, ec),
        (SchemeParams::Di(p), Mode::Refined) => di_refined_rate(p, ec),
    }
}
