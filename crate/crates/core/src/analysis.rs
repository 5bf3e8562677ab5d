//! Threshold searches, transmittance sweeps and the tolerable
//! (error rate, transmittance) region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{bisect, scan_brackets, ThresholdResult};
use crate::rates::{rate, EcParams};
use crate::scenario::{Mode, Scheme};

/// Number of grid points used to locate sign changes before bisecting.
pub const PRESCAN_POINTS: usize = 512;
const MAX_BISECT_ITER: u32 = 200;

/// A located threshold together with the number of further sign changes the
/// pre-scan saw. Only the lowest boundary is refined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(flatten)]
    pub result: ThresholdResult,
    pub extra_sign_changes: usize,
}

impl Threshold {
    pub fn root(&self) -> f64 {
        self.result.root
    }

    pub fn warning(&self) -> Option<String> {
        (self.extra_sign_changes > 0).then(|| {
            format!(
                "rate changes sign {} more time(s) on the scan grid; reporting the lowest boundary",
                self.extra_sign_changes
            )
        })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn refine<F: Fn(f64) -> f64>(
    f: F,
    brackets: &[(f64, f64)],
    pick: impl Fn(&F, &(f64, f64)) -> bool,
    tol: f64,
) -> Result<Option<Threshold>> {
    let Some(idx) = brackets.iter().position(|b| pick(&f, b)) else {
        return Ok(None);
    };
    let (lo, hi) = brackets[idx];
    let result = bisect(&f, lo, hi, tol, MAX_BISECT_ITER)?;
    Ok(Some(Threshold { result, extra_sign_changes: brackets.len() - 1 }))
}

/// Lowest transmittance at which the rate becomes positive, at fixed `e_s`.
///
/// For DI both links share the transmittance. Returns `None` when no
/// non-positive to positive transition exists on `[0, 1]`.
pub fn find_eta_threshold(
    scheme: Scheme,
    mode: Mode,
    e_single: f64,
    tol: f64,
    ec: EcParams,
) -> Result<Option<Threshold>> {
    check_tol(tol)?;
    scheme.params_at(1.0, e_single)?;
    let g = |eta: f64| {
        let params = scheme.params_at(eta, e_single).expect("validated e_s, eta on grid");
        rate(&params, mode, ec).rate
    };
    let brackets = scan_brackets(g, 0.0, 1.0, PRESCAN_POINTS);
    refine(g, &brackets, |f, &(lo, _)| f(lo) <= 0.0, tol)
}

/// Largest single-event error rate with positive rate at fixed transmittance.
///
/// Returns `None` when the rate is not positive even without errors.
pub fn find_es_threshold(
    scheme: Scheme,
    mode: Mode,
    eta: f64,
    tol: f64,
    ec: EcParams,
) -> Result<Option<Threshold>> {
    check_tol(tol)?;
    scheme.params_at(eta, 0.0)?;
    let g = |e: f64| {
        let params = scheme.params_at(eta, e).expect("validated eta, e_s on grid");
        rate(&params, mode, ec).rate
    };
    if g(0.0) <= 0.0 {
        return Ok(None);
    }
    let brackets = scan_brackets(g, 0.0, scheme.max_error(), PRESCAN_POINTS);
    refine(g, &brackets, |f, &(lo, _)| f(lo) > 0.0, tol)
}

/// One transmittance point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub rate_coarse: f64,
    pub rate_refined: f64,
    /// Bell parameter, DI only.
    pub s: Option<f64>,
    pub e_c: f64,
    pub h_a: f64,
    pub i_pa_coarse: f64,
}

/// `steps` evenly spaced points of `[lo, hi]`, endpoints included exactly.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|i| if i == steps - 1 { hi } else { lo + step * i as f64 }).collect()
}

#[cfg(feature = "parallel")]
fn grid_map<T: Send, F: Fn(f64) -> T + Sync + Send>(xs: &[f64], f: F) -> Vec<T> {
    use rayon::prelude::*;
    xs.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn grid_map<T, F: Fn(f64) -> T>(xs: &[f64], f: F) -> Vec<T> {
    xs.iter().map(|&x| f(x)).collect()
}

/// Rates of both modes along the transmittance line at fixed `e_s`.
pub fn sweep(
    scheme: Scheme,
    e_single: f64,
    eta_min: f64,
    eta_max: f64,
    steps: usize,
    ec: EcParams,
) -> Result<Vec<SweepRow>> {
    if !(0.0 <= eta_min && eta_min < eta_max && eta_max <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs 0 <= eta_min < eta_max <= 1 (got {eta_min}, {eta_max})"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument("sweep needs at least 2 steps".into()));
    }
    scheme.params_at(eta_max, e_single)?;
    let rows = grid_map(&linspace(eta_min, eta_max, steps), |eta| {
        let params = scheme.params_at(eta, e_single).expect("validated range");
        let coarse = rate(&params, Mode::Coarse, ec);
        let refined = rate(&params, Mode::Refined, ec);
        SweepRow {
            eta,
            rate_coarse: coarse.rate,
            rate_refined: refined.rate,
            s: params.bell_parameter(),
            e_c: params.coarse_error().value(),
            h_a: coarse.h_a,
            i_pa_coarse: coarse.i_pa,
        }
    });
    Ok(rows)
}

/// Transmittance thresholds of both modes at one single-event error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub e_s: f64,
    pub eta_threshold_coarse: Option<f64>,
    pub eta_threshold_refined: Option<f64>,
}

/// Tolerable-region boundary: for each `e_s` on an even grid, the lowest
/// transmittance with positive rate in each mode.
///
/// A single step evaluates `es_min` only.
pub fn tradeoff_curve(
    scheme: Scheme,
    es_min: f64,
    es_max: f64,
    steps: usize,
    tol: f64,
    ec: EcParams,
) -> Result<Vec<TradeoffPoint>> {
    if !(0.0 <= es_min && es_min <= es_max && es_max <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "curve needs 0 <= es_min <= es_max <= 0.5 (got {es_min}, {es_max})"
        )));
    }
    if steps == 0 || (steps > 1 && es_min == es_max) {
        return Err(Error::InvalidArgument(
            "curve needs steps >= 1, and es_min < es_max when steps > 1".into(),
        ));
    }
    check_tol(tol)?;
    let points = grid_map(&linspace(es_min, es_max, steps), |e_s| {
        let find = |mode| {
            find_eta_threshold(scheme, mode, e_s, tol, ec)
                .expect("validated inputs")
                .map(|t| t.root())
        };
        TradeoffPoint {
            e_s,
            eta_threshold_coarse: find(Mode::Coarse),
            eta_threshold_refined: find(Mode::Refined),
        }
    });
    Ok(points)
}
