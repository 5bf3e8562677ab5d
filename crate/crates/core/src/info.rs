//! Information-theoretic primitives: probabilities, entropies, joint tables
//! and a bracketing root finder.
//!
//! Every entropy is measured in bits and uses the convention `0 · log2(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when validating probabilities and normalisation.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// A real number in `[0, 1]`.
///
/// Values that fall outside the interval by at most [`PROB_TOLERANCE`] are
/// clamped; anything further out is rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain { what: "probability", value });
        }
        if !(-PROB_TOLERANCE..=1.0 + PROB_TOLERANCE).contains(&value) {
            return Err(Error::Domain { what: "probability", value });
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    #[inline]
    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Binary entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: Probability) -> f64 {
    let x = x.value();
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    // Evaluate on the smaller half so h(x) and h(1-x) see identical operands.
    let lo = x.min(1.0 - x);
    -(plogp(lo) + plogp(1.0 - lo))
}

/// Binary entropy on a raw `f64`, for callers that already hold a value known
/// to be a probability up to rounding.
pub(crate) fn h2(x: f64) -> f64 {
    binary_entropy(Probability(x.clamp(0.0, 1.0)))
}

fn check_distribution(dist: &[f64]) -> Result<()> {
    for &p in dist {
        if !p.is_finite() || p < -PROB_TOLERANCE {
            return Err(Error::Domain { what: "distribution entry", value: p });
        }
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// Shannon entropy `-Σ p log2 p` of a finite distribution.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    check_distribution(dist)?;
    Ok(-dist.iter().map(|&p| plogp(p.max(0.0))).sum::<f64>())
}

/// A finite joint distribution `P(a, b)` over Alice's alphabet × Bob's alphabet.
///
/// Entries are stored row-major: row index is Alice's symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    alphabet_a: Vec<String>,
    alphabet_b: Vec<String>,
    probs: Vec<f64>,
}

impl JointTable {
    /// Builds a table from row-major rows, one row per symbol of `alphabet_a`.
    pub fn new<S: Into<String>>(
        alphabet_a: impl IntoIterator<Item = S>,
        alphabet_b: impl IntoIterator<Item = S>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let alphabet_a: Vec<String> = alphabet_a.into_iter().map(Into::into).collect();
        let alphabet_b: Vec<String> = alphabet_b.into_iter().map(Into::into).collect();
        if alphabet_a.is_empty() || alphabet_b.is_empty() {
            return Err(Error::Shape("alphabets must be non-empty".into()));
        }
        if rows.len() != alphabet_a.len() || rows.iter().any(|r| r.len() != alphabet_b.len()) {
            return Err(Error::Shape(format!(
                "expected a {}x{} table",
                alphabet_a.len(),
                alphabet_b.len()
            )));
        }
        let mut probs: Vec<f64> = rows.into_iter().flatten().collect();
        check_distribution(&probs)?;
        for p in &mut probs {
            *p = p.max(0.0);
        }
        Ok(JointTable { alphabet_a, alphabet_b, probs })
    }

    /// Builds a table from non-negative counts, normalised by their total.
    pub fn from_counts<S: Into<String>>(
        alphabet_a: impl IntoIterator<Item = S>,
        alphabet_b: impl IntoIterator<Item = S>,
        counts: &[Vec<u64>],
    ) -> Result<Self> {
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Shape("count table is empty".into()));
        }
        let n = total as f64;
        let rows = counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / n).collect())
            .collect();
        JointTable::new(alphabet_a, alphabet_b, rows)
    }

    pub fn alphabet_a(&self) -> &[String] {
        &self.alphabet_a
    }

    pub fn alphabet_b(&self) -> &[String] {
        &self.alphabet_b
    }

    pub fn rows(&self) -> usize {
        self.alphabet_a.len()
    }

    pub fn cols(&self) -> usize {
        self.alphabet_b.len()
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cols() + b]
    }

    /// Table rows as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.cols()).map(<[f64]>::to_vec).collect()
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.probs.chunks(self.cols()).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|b| (0..self.rows()).map(|a| self.get(a, b)).sum())
            .collect()
    }

    /// `H(A|B) = Σ_b P(b) H(A | B = b)`; empty columns contribute nothing.
    pub fn conditional_entropy(&self) -> f64 {
        let mut total = 0.0;
        for b in 0..self.cols() {
            let pb: f64 = (0..self.rows()).map(|a| self.get(a, b)).sum();
            if pb <= 0.0 {
                continue;
            }
            let col: f64 = (0..self.rows()).map(|a| plogp(self.get(a, b) / pb)).sum();
            total -= pb * col;
        }
        total.max(0.0)
    }

    /// Probability that Alice's and Bob's labels differ, pairing symbols by
    /// label. Bob symbols with no counterpart in Alice's alphabet count as
    /// disagreements.
    pub fn disagreement(&self) -> f64 {
        let mut agree = 0.0;
        for (a, la) in self.alphabet_a.iter().enumerate() {
            if let Some(b) = self.alphabet_b.iter().position(|lb| lb == la) {
                agree += self.get(a, b);
            }
        }
        (1.0 - agree).max(0.0)
    }

    /// Pushes Bob's symbol through a stochastic map.
    ///
    /// `channel[b][c]` is the probability that Bob's symbol `b` becomes the
    /// new symbol `c`; every row must sum to one. Merging columns is the
    /// special case of a 0/1 channel.
    pub fn map_b<S: Into<String>>(
        &self,
        new_alphabet_b: impl IntoIterator<Item = S>,
        channel: &[Vec<f64>],
    ) -> Result<JointTable> {
        let new_b: Vec<String> = new_alphabet_b.into_iter().map(Into::into).collect();
        if channel.len() != self.cols() || channel.iter().any(|r| r.len() != new_b.len()) {
            return Err(Error::Shape("channel shape does not match table".into()));
        }
        for row in channel {
            check_distribution(row)?;
        }
        let mut rows = vec![vec![0.0; new_b.len()]; self.rows()];
        for (a, out) in rows.iter_mut().enumerate() {
            for (b, map) in channel.iter().enumerate() {
                let p = self.get(a, b);
                if p == 0.0 {
                    continue;
                }
                for (c, &w) in map.iter().enumerate() {
                    out[c] += p * w;
                }
            }
        }
        JointTable::new(self.alphabet_a.clone(), new_b, rows)
    }

    /// Merges Bob's columns `i` and `j` into one column labelled by `i`.
    pub fn merge_b(&self, i: usize, j: usize) -> Result<JointTable> {
        if i >= self.cols() || j >= self.cols() || i == j {
            return Err(Error::Shape(format!("cannot merge columns {i} and {j}")));
        }
        let keep: Vec<usize> = (0..self.cols()).filter(|&c| c != j).collect();
        let labels: Vec<String> = keep.iter().map(|&c| self.alphabet_b[c].clone()).collect();
        let channel: Vec<Vec<f64>> = (0..self.cols())
            .map(|b| {
                let target = if b == j { i } else { b };
                keep.iter().map(|&c| if c == target { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        self.map_b(labels, &channel)
    }
}

/// Outcome of a bracketing root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub root: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: u32,
    pub achieved_tolerance: f64,
}

#[inline]
fn positive(y: f64) -> bool {
    y > 0.0
}

/// Bisection on a sign-changing bracket.
///
/// The sign test treats zero as non-positive, so a function that is `<= 0` at
/// one end and `> 0` at the other is a valid bracket. Iteration stops once the
/// bracket is no wider than `tol`; the midpoint of the final bracket is
/// returned.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: u32) -> Result<ThresholdResult>
where
    F: Fn(f64) -> f64,
{
    if tol.is_nan() || tol <= 0.0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "bisect needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let sign_a = positive(f(a));
    if sign_a == positive(f(b)) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    while b - a > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations, width: b - a });
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Bracket is at floating-point resolution.
            break;
        }
        if positive(f(mid)) == sign_a {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        root: 0.5 * (a + b),
        bracket_lo: a,
        bracket_hi: b,
        iterations,
        achieved_tolerance: b - a,
    })
}

/// Evaluates `f` on `points` evenly spaced samples of `[lo, hi]` (endpoints
/// included) and returns every adjacent pair whose signs differ, in
/// increasing order.
pub fn scan_brackets<F>(f: F, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let at = |i: usize| if i == points - 1 { hi } else { lo + step * i as f64 };
    let mut out = Vec::new();
    let mut prev_x = at(0);
    let mut prev = positive(f(prev_x));
    for i in 1..points {
        let x = at(i);
        let s = positive(f(x));
        if s != prev {
            out.push((prev_x, x));
        }
        prev_x = x;
        prev = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    #[test]
    fn probability_clamps_and_rejects() {
        assert_eq!(p(-1e-13).value(), 0.0);
        assert_eq!(p(1.0 + 1e-13).value(), 1.0);
        assert!(Probability::new(-1e-9).is_err());
        assert!(Probability::new(1.5).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(p(0.5)), 1.0);
        assert_eq!(binary_entropy(p(0.0)), 0.0);
        assert_eq!(binary_entropy(p(1.0)), 0.0);
        // mpmath, 40 digits
        assert!((binary_entropy(p(0.11)) - 0.499_915_958_164_528).abs() < 1e-14);
    }

    #[test]
    fn shannon_entropy_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(shannon_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(shannon_entropy(&[0.5, 0.25, 0.25]).unwrap(), 1.5);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[1.5, -0.5]).is_err());
        let two = shannon_entropy(&[0.3, 0.7]).unwrap();
        assert!((two - binary_entropy(p(0.3))).abs() < 1e-15);
    }

    #[test]
    fn table_validation() {
        assert!(JointTable::new(["0"], ["0", "1"], vec![vec![0.5, 0.6]]).is_err());
        assert!(JointTable::new(["0", "1"], ["0"], vec![vec![1.0]]).is_err());
        assert!(JointTable::new(["0"], ["0", "1"], vec![vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let product = JointTable::new(["0", "1"], ["x", "y"], vec![vec![0.25, 0.25], vec![0.25, 0.25]])
            .unwrap();
        assert!((product.conditional_entropy() - 1.0).abs() < 1e-15);

        let correlated =
            JointTable::new(["0", "1"], ["0", "1"], vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(correlated.conditional_entropy(), 0.0);

        let e = 0.11;
        let bsc = JointTable::new(
            ["0", "1"],
            ["0", "1"],
            vec![vec![0.5 * (1.0 - e), 0.5 * e], vec![0.5 * e, 0.5 * (1.0 - e)]],
        )
        .unwrap();
        assert!((bsc.conditional_entropy() - 0.499_915_958_164_528).abs() < 1e-13);
        assert!((bsc.disagreement() - e).abs() < 1e-15);
    }

    #[test]
    fn marginals() {
        let t = JointTable::new(["0", "1"], ["0", "1"], vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(t.marginal_a(), vec![0.5, 0.5]);
        let t = JointTable::new(["0", "1"], ["0", "1"], vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(t.marginal_a(), vec![1.0, 0.0]);
        let t = JointTable::new(["0", "1"], ["0", "1"], vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let ma = t.marginal_a();
        assert!((ma[0] - 0.5).abs() < 1e-15 && (ma[1] - 0.5).abs() < 1e-15);
        let mb = t.marginal_b();
        assert!((mb[0] - 0.4).abs() < 1e-15 && (mb[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn merge_and_map() {
        let t = JointTable::new(
            ["0", "1"],
            ["0", "1", "e"],
            vec![vec![0.4, 0.0, 0.1], vec![0.0, 0.4, 0.1]],
        )
        .unwrap();
        let merged = t.merge_b(0, 2).unwrap();
        assert_eq!(merged.alphabet_b(), &["0".to_string(), "1".to_string()]);
        assert!((merged.get(1, 0) - 0.1).abs() < 1e-15);
        assert!(t.merge_b(1, 1).is_err());
        let split = t
            .map_b(["0", "1"], &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]])
            .unwrap();
        assert!((split.get(0, 1) - 0.05).abs() < 1e-15);
        assert!(t.map_b(["0"], &[vec![1.0], vec![0.5]]).is_err());
    }

    #[test]
    fn bisect_examples() {
        let r = bisect(|x| x - 0.5, 0.0, 1.0, 1e-9, 200).unwrap();
        assert!((r.root - 0.5).abs() <= 1e-9);
        assert!(r.achieved_tolerance <= 1e-9);
        assert!(r.bracket_lo <= r.root && r.root <= r.bracket_hi);

        let r = bisect(|x| x * x - 0.25, 0.0, 1.0, 1e-9, 200).unwrap();
        assert!((r.root - 0.5).abs() <= 1e-9);

        let r = bisect(|x| x - binary_entropy(p((1.0 - x) / 2.0)), 0.5, 0.9, 1e-9, 200).unwrap();
        assert!((r.root - 0.658_928_678_299_398).abs() < 1e-8);
    }

    #[test]
    fn bisect_errors() {
        assert!(matches!(
            bisect(|x| x + 1.0, 0.0, 1.0, 1e-9, 100),
            Err(Error::NoSignChange { .. })
        ));
        assert!(matches!(
            bisect(|x| x - 0.3, 0.0, 1.0, 1e-12, 5),
            Err(Error::NoConvergence { .. })
        ));
        assert!(bisect(|x| x, 0.0, 1.0, 0.0, 10).is_err());
        assert!(bisect(|x| x, 1.0, 0.0, 1e-3, 10).is_err());
    }

    #[test]
    fn scan_finds_every_sign_change() {
        let b = scan_brackets(|x| (x - 0.2) * (x - 0.7), 0.0, 1.0, 512);
        assert_eq!(b.len(), 2);
        assert!(b[0].0 <= 0.2 && 0.2 <= b[0].1);
        assert!(b[1].0 <= 0.7 && 0.7 <= b[1].1);
        assert!(scan_brackets(|_| 1.0, 0.0, 1.0, 512).is_empty());
    }
}
