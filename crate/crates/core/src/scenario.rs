//! Physical models for the three schemes.
//!
//! Each scheme turns its operating point into error rates, the Bell
//! parameter (device-independent case only) and the joint distribution of
//! Alice's key bit against Bob's record, in both the coarse-grained form used
//! by the security proof and the refined form Bob actually holds.
//!
//! BB84 and the detection-device-independent scheme replace unusable events
//! (double clicks, no clicks) by a uniformly random bit. The device-independent
//! scheme replaces a lost signal by the fixed bit `0` on both sides.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{h2, JointTable, Probability};

/// Key-bit labels, shared by Alice and by every coarse-grained Bob record.
pub const BITS: [&str; 2] = ["0", "1"];
/// Bob's refined BB84/DDI record: a single click with its bit, or an erasure.
pub const BB84_REFINED: [&str; 3] = ["click:0", "click:1", "erased"];
/// Bob's refined device-independent record: a detection with its bit, or a loss.
pub const DI_REFINED: [&str; 3] = ["det:0", "det:1", "lost"];

/// Maximum CHSH value reachable by quantum correlations.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bb84,
    Ddi,
    Di,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Bb84, Scheme::Ddi, Scheme::Di];

    /// Operating point on the scheme's one-parameter transmittance line.
    ///
    /// `eta` is `P_s` for BB84, `η` for DDI and the common `η_A = η_B` for DI.
    pub fn params_at(self, eta: f64, e_single: f64) -> Result<SchemeParams> {
        Ok(match self {
            Scheme::Bb84 => SchemeParams::Bb84(Bb84Params::new(eta, e_single)?),
            Scheme::Ddi => SchemeParams::Ddi(DdiParams::new(eta, e_single)?),
            Scheme::Di => SchemeParams::Di(DiParams::symmetric(eta, e_single)?),
        })
    }

    /// Largest admissible single-event error rate.
    pub fn max_error(self) -> f64 {
        match self {
            Scheme::Di => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bb84 => "bb84",
            Scheme::Ddi => "ddi",
            Scheme::Di => "di",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bb84" => Ok(Scheme::Bb84),
            "ddi" => Ok(Scheme::Ddi),
            "di" => Ok(Scheme::Di),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Which of Bob's records is used for error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Coarse,
    Refined,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Coarse, Mode::Refined];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Coarse => "coarse",
            Mode::Refined => "refined",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coarse" => Ok(Mode::Coarse),
            "refined" => Ok(Mode::Refined),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// BB84 with threshold detectors: fraction of single clicks and their error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bb84Params {
    p_single: Probability,
    e_single: Probability,
}

impl Bb84Params {
    pub fn new(p_single: f64, e_single: f64) -> Result<Self> {
        Ok(Bb84Params {
            p_single: Probability::new(p_single)?,
            e_single: Probability::new(e_single)?,
        })
    }

    pub fn p_single(&self) -> Probability {
        self.p_single
    }

    pub fn e_single(&self) -> Probability {
        self.e_single
    }
}

/// Detection-device-independent scheme with a perfect single-photon source,
/// so the single-click fraction equals the overall transmittance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdiParams {
    eta: Probability,
    e_single: Probability,
}

impl DdiParams {
    pub fn new(eta: f64, e_single: f64) -> Result<Self> {
        Ok(DdiParams { eta: Probability::new(eta)?, e_single: Probability::new(e_single)? })
    }

    pub fn eta(&self) -> Probability {
        self.eta
    }

    pub fn e_single(&self) -> Probability {
        self.e_single
    }

    /// The equivalent BB84 operating point (`P_s = η`).
    pub fn as_bb84(&self) -> Bb84Params {
        Bb84Params { p_single: self.eta, e_single: self.e_single }
    }
}

/// Fully device-independent scheme: source-to-Alice and source-to-Bob
/// transmittances, and the error rate among pairs detected on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiParams {
    eta_a: Probability,
    eta_b: Probability,
    e_single: Probability,
}

impl DiParams {
    /// `e_single` must not exceed ½ (it parametrises a depolarising channel).
    pub fn new(eta_a: f64, eta_b: f64, e_single: f64) -> Result<Self> {
        let e = Probability::new(e_single)?;
        if e.value() > 0.5 {
            return Err(Error::Domain { what: "DI single-event error rate (max 0.5)", value: e_single });
        }
        Ok(DiParams { eta_a: Probability::new(eta_a)?, eta_b: Probability::new(eta_b)?, e_single: e })
    }

    /// Source placed symmetrically: `η_A = η_B = eta`.
    pub fn symmetric(eta: f64, e_single: f64) -> Result<Self> {
        DiParams::new(eta, eta, e_single)
    }

    pub fn eta_a(&self) -> Probability {
        self.eta_a
    }

    pub fn eta_b(&self) -> Probability {
        self.eta_b
    }

    pub fn e_single(&self) -> Probability {
        self.e_single
    }
}

/// Parameters of any scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SchemeParams {
    Bb84(Bb84Params),
    Ddi(DdiParams),
    Di(DiParams),
}

impl SchemeParams {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeParams::Bb84(_) => Scheme::Bb84,
            SchemeParams::Ddi(_) => Scheme::Ddi,
            SchemeParams::Di(_) => Scheme::Di,
        }
    }

    pub fn e_single(&self) -> Probability {
        match self {
            SchemeParams::Bb84(p) => p.e_single,
            SchemeParams::Ddi(p) => p.e_single,
            SchemeParams::Di(p) => p.e_single,
        }
    }

    /// Error rate of the coarse-grained key data.
    pub fn coarse_error(&self) -> Probability {
        match self {
            SchemeParams::Bb84(p) => coarse_error_rate(p.p_single, p.e_single),
            SchemeParams::Ddi(p) => coarse_error_rate(p.eta, p.e_single),
            SchemeParams::Di(p) => di_coarse_error(p),
        }
    }

    /// CHSH value, only defined for the device-independent scheme.
    pub fn bell_parameter(&self) -> Option<f64> {
        match self {
            SchemeParams::Di(p) => Some(di_bell_parameter(p)),
            _ => None,
        }
    }

    pub fn joint(&self, mode: Mode) -> JointTable {
        match self {
            SchemeParams::Bb84(p) => bb84_joint(p, mode),
            SchemeParams::Ddi(p) => bb84_joint(&p.as_bb84(), mode),
            SchemeParams::Di(p) => di_joint(p, mode),
        }
    }

    /// True when no event of this operating point is ever coarse-grained.
    pub fn fully_detected(&self) -> bool {
        match self {
            SchemeParams::Bb84(p) => p.p_single.value() == 1.0,
            SchemeParams::Ddi(p) => p.eta.value() == 1.0,
            SchemeParams::Di(p) => p.eta_a.value() == 1.0 && p.eta_b.value() == 1.0,
        }
    }
}

/// `e_c = P_s e_s + (1 - P_s) / 2`: random assignment errs half the time.
pub fn coarse_error_rate(p_single: Probability, e_single: Probability) -> Probability {
    let ps = p_single.value();
    let e = ps * e_single.value() + (1.0 - ps) * 0.5;
    Probability::new(e).expect("convex combination of probabilities")
}

/// `H(A|B_refined) = P_s h(e_s) + (1 - P_s)`: an erasure channel with a
/// binary symmetric channel on the unerased part.
pub fn refined_cond_entropy_erasure(p_single: Probability, e_single: Probability) -> f64 {
    let ps = p_single.value();
    ps * h2(e_single.value()) + (1.0 - ps)
}

/// Joint table of Alice's bit against Bob's record.
///
/// The refined record keeps single clicks with their bit and flags every
/// other event as erased. The coarse record is obtained from it by replacing
/// each erasure with a uniformly random bit.
pub fn bb84_joint(params: &Bb84Params, mode: Mode) -> JointTable {
    let ps = params.p_single.value();
    let e = params.e_single.value();
    let ok = 0.5 * ps * (1.0 - e);
    let flip = 0.5 * ps * e;
    let erased = 0.5 * (1.0 - ps);
    let refined = JointTable::new(BITS, BB84_REFINED, vec![vec![ok, flip, erased], vec![flip, ok, erased]])
        .expect("bb84 refined table is normalised");
    match mode {
        Mode::Refined => refined,
        Mode::Coarse => refined
            .map_b(BITS, &bb84_coarsening())
            .expect("random-assignment channel matches refined alphabet"),
    }
}

/// Channel from the refined BB84 record to the coarse bit.
pub fn bb84_coarsening() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]
}

/// Probabilities of the four detection patterns of a photon pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventClassWeights {
    pub both_detected: f64,
    pub only_a: f64,
    pub only_b: f64,
    pub neither: f64,
}

impl EventClassWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.both_detected, self.only_a, self.only_b, self.neither]
    }
}

pub fn event_class_weights(params: &DiParams) -> EventClassWeights {
    let a = params.eta_a.value();
    let b = params.eta_b.value();
    EventClassWeights {
        both_detected: a * b,
        only_a: a * (1.0 - b),
        only_b: (1.0 - a) * b,
        neither: (1.0 - a) * (1.0 - b),
    }
}

/// CHSH value of each detection pattern, in [`EventClassWeights`] order.
///
/// Detected pairs pass a depolarising channel that keeps the state with
/// probability `1 - 2 e_s`; one-sided detections are uncorrelated; double
/// losses are fixed, perfectly correlated bits.
pub fn di_class_bell_values(e_single: Probability) -> [f64; 4] {
    [TSIRELSON * (1.0 - 2.0 * e_single.value()), 0.0, 0.0, 2.0]
}

/// `S = 2√2 (1 - 2e_s) η_A η_B + 2 (1 - η_A)(1 - η_B)`.
pub fn di_bell_parameter(params: &DiParams) -> f64 {
    let a = params.eta_a.value();
    let b = params.eta_b.value();
    TSIRELSON * (1.0 - 2.0 * params.e_single.value()) * a * b + 2.0 * (1.0 - a) * (1.0 - b)
}

/// Coarse error rate with fixed-bit assignment of losses. Double losses
/// agree; single-sided losses err half the time.
pub fn di_coarse_error(params: &DiParams) -> Probability {
    let a = params.eta_a.value();
    let b = params.eta_b.value();
    let e = a * b * params.e_single.value() + ((1.0 - b) * a + (1.0 - a) * b) * 0.5;
    Probability::new(e).expect("convex combination of probabilities")
}

/// Entropy of Alice's coarse bit when losses become the fixed bit `0`:
/// `P(0) = η_A / 2 + (1 - η_A)`, so `H(A) = h(η_A / 2)`.
pub fn di_alice_entropy(eta_a: Probability) -> f64 {
    h2(0.5 * eta_a.value())
}

/// Joint table of Alice's coarse bit against Bob's record in the
/// device-independent scheme.
///
/// Alice always uses her coarse bit, since it defines the key. Bob's refined
/// record distinguishes detections from losses; his coarse record maps a loss
/// to the fixed bit `0`.
pub fn di_joint(params: &DiParams, mode: Mode) -> JointTable {
    let w = event_class_weights(params);
    let e = params.e_single.value();
    // columns: det:0, det:1, lost
    let mut rows = vec![vec![0.0; 3]; 2];
    // both detected: uniform bit through a binary symmetric channel
    rows[0][0] += 0.5 * w.both_detected * (1.0 - e);
    rows[0][1] += 0.5 * w.both_detected * e;
    rows[1][1] += 0.5 * w.both_detected * (1.0 - e);
    rows[1][0] += 0.5 * w.both_detected * e;
    // Alice only: her bit uniform, Bob lost
    rows[0][2] += 0.5 * w.only_a;
    rows[1][2] += 0.5 * w.only_a;
    // Bob only: Alice fixed 0, Bob uniform
    rows[0][0] += 0.5 * w.only_b;
    rows[0][1] += 0.5 * w.only_b;
    // neither
    rows[0][2] += w.neither;
    let refined = JointTable::new(BITS, DI_REFINED, rows).expect("DI refined table is normalised");
    match mode {
        Mode::Refined => refined,
        Mode::Coarse => refined
            .map_b(BITS, &di_coarsening())
            .expect("fixed-bit channel matches refined alphabet"),
    }
}

/// Channel from the refined DI record to the coarse bit (loss becomes `0`).
pub fn di_coarsening() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coarse_error_examples() {
        for e in [0.0, 0.03, 0.11, 0.5] {
            assert_eq!(coarse_error_rate(p(1.0), p(e)).value(), e);
        }
        assert_eq!(coarse_error_rate(p(0.0), p(0.2)).value(), 0.5);
        assert!(close(coarse_error_rate(p(0.8), p(0.05)).value(), 0.14, 1e-15));
    }

    #[test]
    fn erasure_entropy_examples() {
        assert_eq!(refined_cond_entropy_erasure(p(1.0), p(0.07)), binary_entropy(p(0.07)));
        assert_eq!(refined_cond_entropy_erasure(p(0.0), p(0.3)), 1.0);
        assert!(close(refined_cond_entropy_erasure(p(0.659), p(0.0)), 0.341, 1e-15));
    }

    #[test]
    fn bb84_tables() {
        let t = bb84_joint(&Bb84Params::new(1.0, 0.0).unwrap(), Mode::Coarse);
        assert_eq!(t.to_rows(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        let t = bb84_joint(&Bb84Params::new(0.0, 0.3).unwrap(), Mode::Coarse);
        assert_eq!(t.to_rows(), vec![vec![0.25, 0.25], vec![0.25, 0.25]]);
        let t = bb84_joint(&Bb84Params::new(0.8, 0.05).unwrap(), Mode::Refined);
        let want = 0.8 * binary_entropy(p(0.05)) + 0.2;
        assert!(close(t.conditional_entropy(), want, 1e-12));
        assert_eq!(t.marginal_a(), vec![0.5, 0.5]);
    }

    #[test]
    fn bell_parameter_examples() {
        assert_eq!(di_bell_parameter(&DiParams::new(1.0, 1.0, 0.0).unwrap()), TSIRELSON);
        assert_eq!(di_bell_parameter(&DiParams::new(0.0, 0.0, 0.3).unwrap()), 2.0);
        assert_eq!(di_bell_parameter(&DiParams::new(1.0, 0.0, 0.1).unwrap()), 0.0);
        assert!(close(TSIRELSON, 2.828_427_124_746_19, 1e-14));
    }

    #[test]
    fn di_coarse_error_examples() {
        assert_eq!(di_coarse_error(&DiParams::new(1.0, 1.0, 0.04).unwrap()).value(), 0.04);
        assert_eq!(di_coarse_error(&DiParams::new(0.0, 0.0, 0.2).unwrap()).value(), 0.0);
        assert!(close(di_coarse_error(&DiParams::new(0.9, 0.9, 0.0).unwrap()).value(), 0.09, 1e-15));
    }

    #[test]
    fn di_alice_entropy_examples() {
        assert_eq!(di_alice_entropy(p(1.0)), 1.0);
        assert_eq!(di_alice_entropy(p(0.0)), 0.0);
        // mpmath: h(0.462)
        assert!(close(di_alice_entropy(p(0.924)), 0.995_829_476_472_405, 1e-14));
    }

    #[test]
    fn di_tables() {
        let t = di_joint(&DiParams::new(1.0, 1.0, 0.0).unwrap(), Mode::Coarse);
        assert_eq!(t.to_rows(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        let t = di_joint(&DiParams::new(0.0, 0.0, 0.1).unwrap(), Mode::Coarse);
        assert_eq!(t.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        // brute-force event enumeration in mpmath: 0.29034426450085180...
        let t = di_joint(&DiParams::symmetric(0.909, 0.0).unwrap(), Mode::Refined);
        assert!(close(t.conditional_entropy(), 0.290_344_264_500_852, 1e-13));
    }

    #[test]
    fn event_weights_examples() {
        let w = event_class_weights(&DiParams::new(1.0, 1.0, 0.0).unwrap());
        assert_eq!(w.as_array(), [1.0, 0.0, 0.0, 0.0]);
        let w = event_class_weights(&DiParams::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(w.as_array(), [0.0, 0.0, 0.0, 1.0]);
        let w = event_class_weights(&DiParams::new(0.9, 0.8, 0.0).unwrap());
        for (got, want) in w.as_array().iter().zip([0.72, 0.18, 0.08, 0.02]) {
            assert!(close(*got, want, 1e-15));
        }
        assert!(close(w.as_array().iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn di_rejects_large_error() {
        assert!(DiParams::new(0.9, 0.9, 0.6).is_err());
        assert!(DiParams::new(0.9, 0.9, 0.5).is_ok());
    }

    #[test]
    fn parse_names() {
        assert_eq!("DDI".parse::<Scheme>().unwrap(), Scheme::Ddi);
        assert_eq!("refined".parse::<Mode>().unwrap(), Mode::Refined);
        assert!("b92".parse::<Scheme>().is_err());
    }
}
