//! Asymptotic secret-key rates for quantum key distribution when Bob keeps
//! his refined detection record for error correction instead of only the
//! coarse-grained bits that the security proof is phrased in.
//!
//! Three schemes are modelled: BB84 with threshold detectors, a
//! detection-device-independent scheme (`ddi`) and a fully device-independent
//! scheme (`di`). For each, [`rates::rate`] evaluates
//! `R = H(A) - f·H(A|B) - I_pa` in the coarse and refined modes, the
//! [`analysis`] module locates loss and error thresholds, and
//! [`montecarlo`] samples the same event models as an independent check.
//!
//! ```
//! use keyrate::{analysis, EcParams, Mode, Scheme};
//!
//! let t = analysis::find_eta_threshold(Scheme::Ddi, Mode::Refined, 0.0, 1e-6, EcParams::SHANNON)
//!     .unwrap()
//!     .unwrap();
//! assert!((t.root() - 0.659).abs() < 1e-3);
//! ```

pub mod analysis;
pub mod error;
pub mod info;
pub mod montecarlo;
pub mod rates;
pub mod scenario;

pub use error::{Error, Result};
pub use info::{binary_entropy, shannon_entropy, JointTable, Probability, ThresholdResult};
pub use rates::{rate, EcParams, RateBreakdown};
pub use scenario::{Bb84Params, DdiParams, DiParams, Mode, Scheme, SchemeParams};
