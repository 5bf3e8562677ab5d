//! Seeded per-signal simulation of the event models, used as an independent
//! check of every closed-form quantity.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. Each signal consumes random draws in a fixed order, so a
//! given `(params, n, seed)` always produces the same estimate.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::JointTable;
use crate::scenario::{
    di_alice_entropy, di_class_bell_values, event_class_weights, Bb84Params, DdiParams, DiParams,
    Mode, SchemeParams, BB84_REFINED, BITS, DI_REFINED,
};

/// Name of the random number generator, recorded alongside every estimate.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// Flag threshold for comparisons, in standard errors.
pub const Z_LIMIT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventClass {
    /// BB84/DDI: a single click.
    Detected,
    /// BB84/DDI: anything else (no click, double click).
    Lost,
    BothDetected,
    OnlyA,
    OnlyB,
    Neither,
}

impl EventClass {
    pub fn name(self) -> &'static str {
        match self {
            EventClass::Detected => "detected",
            EventClass::Lost => "lost",
            EventClass::BothDetected => "both_detected",
            EventClass::OnlyA => "only_a",
            EventClass::OnlyB => "only_b",
            EventClass::Neither => "neither",
        }
    }
}

/// Cell counts of Alice's bit against Bob's most detailed record.
///
/// For BB84/DDI the record also keeps the random bit assigned to each
/// erasure, so both the refined and the coarse table are exact merges of
/// these counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCounts {
    pub alphabet_b: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl RawCounts {
    fn merged(&self, groups: &[&[usize]]) -> Vec<Vec<u64>> {
        self.counts
            .iter()
            .map(|row| groups.iter().map(|g| g.iter().map(|&c| row[c]).sum()).collect())
            .collect()
    }
}

const ERASURE_RAW: [&str; 4] = ["click:0", "click:1", "erased>0", "erased>1"];
const ERASURE_REFINED_GROUPS: [&[usize]; 3] = [&[0], &[1], &[2, 3]];
const ERASURE_COARSE_GROUPS: [&[usize]; 2] = [&[0, 2], &[1, 3]];
const DI_REFINED_GROUPS: [&[usize]; 3] = [&[0], &[1], &[2]];
const DI_COARSE_GROUPS: [&[usize]; 2] = [&[0, 2], &[1]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub params: SchemeParams,
    pub rng: String,
    pub seed: u64,
    pub n: u64,
    pub class_counts: BTreeMap<EventClass, u64>,
    /// Same-basis single-event error rate among fully detected signals.
    pub e_s_hat: Option<f64>,
    pub e_c_hat: f64,
    pub s_hat: Option<f64>,
    pub joint_coarse_hat: JointTable,
    pub joint_refined_hat: JointTable,
    pub raw: RawCounts,
    pub std_errors: BTreeMap<String, f64>,
}

fn proportion_se(p: f64, n: u64) -> f64 {
    let n = n as f64;
    (p * (1.0 - p) / n).sqrt().max(1.0 / n)
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("simulation needs n >= 1".into()))
    } else {
        Ok(())
    }
}

/// Single-click / erasure model shared by BB84 and DDI.
fn simulate_erasure(params: SchemeParams, p_single: f64, e_single: f64, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![vec![0u64; 4]; 2];
    let (mut detected, mut flips) = (0u64, 0u64);
    for _ in 0..n {
        let a = rng.random::<bool>() as usize;
        if rng.random_bool(p_single) {
            let flip = rng.random_bool(e_single);
            detected += 1;
            flips += flip as u64;
            counts[a][a ^ flip as usize] += 1;
        } else {
            let assigned = rng.random::<bool>() as usize;
            counts[a][2 + assigned] += 1;
        }
    }
    let raw = RawCounts { alphabet_b: ERASURE_RAW.iter().map(|s| s.to_string()).collect(), counts };
    let class_counts = BTreeMap::from([(EventClass::Detected, detected), (EventClass::Lost, n - detected)]);
    let e_s_hat = (detected > 0).then(|| flips as f64 / detected as f64);
    finish(params, seed, n, raw, &ERASURE_REFINED_GROUPS, &ERASURE_COARSE_GROUPS, &BB84_REFINED, class_counts, e_s_hat, None, detected)
}

pub fn simulate_bb84(params: &Bb84Params, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    simulate_erasure(
        SchemeParams::Bb84(*params),
        params.p_single().value(),
        params.e_single().value(),
        n,
        seed,
    )
}

/// Per signal: Alice's bit is uniform; the photon is detected with
/// probability `η`; a detected bit flips with probability `e_s`; an
/// undetected one is erased in the refined record and replaced by a fresh
/// uniform bit in the coarse record.
pub fn simulate_ddi(params: &DdiParams, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    simulate_erasure(SchemeParams::Ddi(*params), params.eta().value(), params.e_single().value(), n, seed)
}

/// Per signal: independent detections on each side; a pair detected on
/// both sides shares a uniform bit through a binary symmetric channel with
/// crossover `e_s`; a lone detection gives a uniform bit; every loss becomes
/// the fixed bit `0` (coarse) or the `lost` flag (Bob's refined record).
///
/// The Bell parameter is estimated from the class frequencies and the
/// per-class CHSH values of the event model.
pub fn simulate_di(params: &DiParams, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    check_n(n)?;
    let (pa, pb, e) = (params.eta_a().value(), params.eta_b().value(), params.e_single().value());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![vec![0u64; 3]; 2];
    let mut classes = [0u64; 4];
    let mut flips = 0u64;
    for _ in 0..n {
        let da = rng.random_bool(pa);
        let db = rng.random_bool(pb);
        let (a, b, class) = match (da, db) {
            (true, true) => {
                let a = rng.random::<bool>() as usize;
                let flip = rng.random_bool(e);
                flips += flip as u64;
                (a, a ^ flip as usize, 0)
            }
            (true, false) => (rng.random::<bool>() as usize, 2, 1),
            (false, true) => (0, rng.random::<bool>() as usize, 2),
            (false, false) => (0, 2, 3),
        };
        classes[class] += 1;
        counts[a][b] += 1;
    }
    let raw = RawCounts { alphabet_b: DI_REFINED.iter().map(|s| s.to_string()).collect(), counts };
    let class_counts = BTreeMap::from([
        (EventClass::BothDetected, classes[0]),
        (EventClass::OnlyA, classes[1]),
        (EventClass::OnlyB, classes[2]),
        (EventClass::Neither, classes[3]),
    ]);
    let nf = n as f64;
    let per_class = di_class_bell_values(params.e_single());
    let freqs = classes.map(|c| c as f64 / nf);
    let s_hat: f64 = freqs.iter().zip(per_class).map(|(w, s)| w * s).sum();
    let s2: f64 = freqs.iter().zip(per_class).map(|(w, s)| w * s * s).sum();
    let s_se = ((s2 - s_hat * s_hat).max(0.0) / nf).sqrt().max(1.0 / nf);
    let e_s_hat = (classes[0] > 0).then(|| flips as f64 / classes[0] as f64);
    let mut est = finish(
        SchemeParams::Di(*params),
        seed,
        n,
        raw,
        &DI_REFINED_GROUPS,
        &DI_COARSE_GROUPS,
        &DI_REFINED,
        class_counts,
        e_s_hat,
        Some(s_hat),
        classes[0],
    )?;
    est.std_errors.insert("s".into(), s_se);
    Ok(est)
}

/// Dispatches to the simulator of the parameters' scheme.
pub fn simulate(params: &SchemeParams, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    match params {
        SchemeParams::Bb84(p) => simulate_bb84(p, n, seed),
        SchemeParams::Ddi(p) => simulate_ddi(p, n, seed),
        SchemeParams::Di(p) => simulate_di(p, n, seed),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: SchemeParams,
    seed: u64,
    n: u64,
    raw: RawCounts,
    refined_groups: &[&[usize]],
    coarse_groups: &[&[usize]],
    refined_labels: &[&str],
    class_counts: BTreeMap<EventClass, u64>,
    e_s_hat: Option<f64>,
    s_hat: Option<f64>,
    fully_detected: u64,
) -> Result<MonteCarloEstimate> {
    let joint_refined_hat = JointTable::from_counts(BITS, refined_labels.iter().copied(), &raw.merged(refined_groups))?;
    let coarse_counts = raw.merged(coarse_groups);
    let joint_coarse_hat = JointTable::from_counts(BITS, BITS, &coarse_counts)?;
    let e_c_hat = (coarse_counts[0][1] + coarse_counts[1][0]) as f64 / n as f64;

    let mut std_errors = BTreeMap::new();
    std_errors.insert("e_c".to_string(), proportion_se(e_c_hat, n));
    for (class, &count) in &class_counts {
        std_errors.insert(format!("class:{}", class.name()), proportion_se(count as f64 / n as f64, n));
    }
    if let Some(e) = e_s_hat {
        std_errors.insert("e_s".to_string(), proportion_se(e, fully_detected));
    }
    Ok(MonteCarloEstimate {
        params,
        rng: RNG_NAME.to_string(),
        seed,
        n,
        class_counts,
        e_s_hat,
        e_c_hat,
        s_hat,
        joint_coarse_hat,
        joint_refined_hat,
        raw,
        std_errors,
    })
}

/// One analytic-versus-empirical line of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    /// Deviation excused before computing `z` (entropy bias), zero otherwise.
    pub allowance: f64,
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: u64,
    pub seed: u64,
    pub z_limit: f64,
    /// Rule used for the entropy allowance.
    pub entropy_allowance: String,
    pub rows: Vec<ComparisonRow>,
    /// Plug-in `H(A|B_refined) <= H(A|B_coarse)` on this sample.
    pub empirical_dpi_holds: bool,
}

impl ComparisonReport {
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

fn row(quantity: impl Into<String>, analytic: f64, empirical: f64, std_error: f64, allowance: f64) -> ComparisonRow {
    let diff = empirical - analytic;
    let excess = (diff.abs() - allowance).max(0.0);
    let z = if excess == 0.0 { 0.0 } else { diff.signum() * excess / std_error };
    ComparisonRow {
        quantity: quantity.into(),
        analytic,
        empirical,
        std_error,
        allowance,
        z,
        flagged: z.abs() > Z_LIMIT,
    }
}

/// Proportion compared under the analytic null: the standard error is the
/// larger of the null binomial error and the estimate's own.
fn proportion_row(quantity: impl Into<String>, analytic: f64, empirical: f64, trials: u64, est_se: f64) -> ComparisonRow {
    let null = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    row(quantity, analytic, empirical, null.max(est_se), 0.0)
}

/// Delta-method standard error of a plug-in entropy: the spread of the
/// information density `-log2 P(a | b)` over the sample, divided by `√n`.
fn entropy_se(table: &JointTable, n: u64) -> f64 {
    let pb = table.marginal_b();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for a in 0..table.rows() {
        for (b, &p_b) in pb.iter().enumerate() {
            let p = table.get(a, b);
            if p > 0.0 {
                let i = -(p / p_b).log2();
                m1 += p * i;
                m2 += p * i * i;
            }
        }
    }
    let nf = n as f64;
    ((m2 - m1 * m1).max(0.0) / nf).sqrt().max(1.0 / nf)
}

/// Second-order bias allowance of a plug-in entropy over `cells` cells.
fn entropy_allowance(cells: usize, n: u64) -> f64 {
    25.0 * cells as f64 / (2.0 * n as f64 * LN_2)
}

/// Compares an estimate against the closed-form model at `params`.
///
/// Proportions (class frequencies, error rates) and the Bell parameter get
/// plain z-scores. Plug-in entropies first excuse a bias allowance of
/// `25·|A|·|B| / (2 n ln 2)` bits, which bounds the chi-square term of the
/// plug-in estimator at the same confidence as the z limit.
pub fn compare(estimate: &MonteCarloEstimate, params: &SchemeParams) -> Result<ComparisonReport> {
    if estimate.params != *params {
        return Err(Error::MismatchedParams(format!(
            "estimate was generated from {:?}, compared against {:?}",
            estimate.params, params
        )));
    }
    let n = estimate.n;
    let nf = n as f64;
    let se = |key: &str| estimate.std_errors.get(key).copied().unwrap_or(1.0 / nf);
    let mut rows = Vec::new();

    let expected_classes: Vec<(EventClass, f64)> = match params {
        SchemeParams::Di(p) => {
            let w = event_class_weights(p);
            vec![
                (EventClass::BothDetected, w.both_detected),
                (EventClass::OnlyA, w.only_a),
                (EventClass::OnlyB, w.only_b),
                (EventClass::Neither, w.neither),
            ]
        }
        SchemeParams::Bb84(p) => vec![
            (EventClass::Detected, p.p_single().value()),
            (EventClass::Lost, 1.0 - p.p_single().value()),
        ],
        SchemeParams::Ddi(p) => {
            vec![(EventClass::Detected, p.eta().value()), (EventClass::Lost, 1.0 - p.eta().value())]
        }
    };
    let mut fully_detected = 0;
    for (class, weight) in expected_classes {
        let count = estimate.class_counts.get(&class).copied().unwrap_or(0);
        if matches!(class, EventClass::Detected | EventClass::BothDetected) {
            fully_detected = count;
        }
        let key = format!("class:{}", class.name());
        rows.push(proportion_row(key.clone(), weight, count as f64 / nf, n, se(&key)));
    }

    if let Some(e_hat) = estimate.e_s_hat {
        rows.push(proportion_row("e_s", params.e_single().value(), e_hat, fully_detected, se("e_s")));
    }
    rows.push(proportion_row("e_c", params.coarse_error().value(), estimate.e_c_hat, n, se("e_c")));

    if let (Some(s_hat), Some(s)) = (estimate.s_hat, params.bell_parameter()) {
        rows.push(row("s", s, s_hat, se("s"), 0.0));
    }

    let h_a_analytic = match params {
        SchemeParams::Di(p) => di_alice_entropy(p.eta_a()),
        _ => 1.0,
    };
    let marginal = estimate.joint_coarse_hat.marginal_a();
    let alice_only = JointTable::new(BITS, ["*"], marginal.iter().map(|&p| vec![p]).collect())?;
    rows.push(row(
        "h_a",
        h_a_analytic,
        alice_only.conditional_entropy(),
        entropy_se(&alice_only, n),
        entropy_allowance(2, n),
    ));

    let mut plugin = [0.0; 2];
    for (k, (mode, table)) in [
        (Mode::Coarse, &estimate.joint_coarse_hat),
        (Mode::Refined, &estimate.joint_refined_hat),
    ]
    .into_iter()
    .enumerate()
    {
        let analytic = params.joint(mode).conditional_entropy();
        plugin[k] = table.conditional_entropy();
        rows.push(row(
            format!("h_a_given_b_{mode}"),
            analytic,
            plugin[k],
            entropy_se(table, n),
            entropy_allowance(table.rows() * table.cols(), n),
        ));
    }

    Ok(ComparisonReport {
        n,
        seed: estimate.seed,
        z_limit: Z_LIMIT,
        entropy_allowance: "25*|A|*|B|/(2 n ln 2) bits".to_string(),
        rows,
        empirical_dpi_holds: plugin[1] <= plugin[0] + 1e-12,
    })
}
