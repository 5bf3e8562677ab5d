use proptest::prelude::*;

use keyrate::analysis::{find_eta_threshold, sweep};
use keyrate::info::bisect;
use keyrate::montecarlo::{simulate, simulate_ddi, simulate_di};
use keyrate::rates::{di_ipa, rate};
use keyrate::scenario::{
    bb84_coarsening, di_bell_parameter, di_class_bell_values, di_coarsening, di_joint, event_class_weights, BITS,
    TSIRELSON,
};
use keyrate::{
    binary_entropy, shannon_entropy, Bb84Params, DdiParams, DiParams, EcParams, JointTable, Mode, Probability,
    Scheme, SchemeParams,
};

fn prob(x: f64) -> Probability {
    Probability::new(x).unwrap()
}

/// Random normalised `rows × cols` table.
fn table(rows: usize, cols: usize) -> impl Strategy<Value = JointTable> {
    prop::collection::vec(0.0f64..1.0, rows * cols).prop_filter_map("all-zero weights", move |w| {
        let total: f64 = w.iter().sum();
        if total <= 1e-9 {
            return None;
        }
        let probs: Vec<Vec<f64>> = w.chunks(cols).map(|r| r.iter().map(|x| x / total).collect()).collect();
        let a: Vec<String> = (0..rows).map(|i| format!("a{i}")).collect();
        let b: Vec<String> = (0..cols).map(|i| format!("b{i}")).collect();
        JointTable::new(a, b, probs).ok()
    })
}

fn any_params() -> impl Strategy<Value = SchemeParams> {
    prop_oneof![
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(p, e)| SchemeParams::Bb84(Bb84Params::new(p, e).unwrap())),
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(p, e)| SchemeParams::Ddi(DdiParams::new(p, e).unwrap())),
        (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=0.5)
            .prop_map(|(a, b, e)| SchemeParams::Di(DiParams::new(a, b, e).unwrap())),
    ]
}

#[test]
fn binary_entropy_symmetric_on_grid() {
    for i in 0..=2000 {
        let x = i as f64 / 2000.0;
        let d = binary_entropy(prob(x)) - binary_entropy(prob(1.0 - x));
        assert!(d.abs() <= 1e-12, "x = {x}");
    }
}

proptest! {
    #[test]
    fn conditioning_reduces_entropy(t in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| table(r, c))) {
        let h_a = shannon_entropy(&t.marginal_a()).unwrap();
        prop_assert!(t.conditional_entropy() <= h_a + 1e-12);
    }

    #[test]
    fn product_tables_have_full_entropy(
        pa in prop::collection::vec(0.01f64..1.0, 2..5),
        pb in prop::collection::vec(0.01f64..1.0, 1..5),
    ) {
        let sa: f64 = pa.iter().sum();
        let sb: f64 = pb.iter().sum();
        let rows: Vec<Vec<f64>> = pa.iter().map(|x| pb.iter().map(|y| x / sa * y / sb).collect()).collect();
        let a: Vec<String> = (0..pa.len()).map(|i| i.to_string()).collect();
        let b: Vec<String> = (0..pb.len()).map(|i| i.to_string()).collect();
        let t = JointTable::new(a, b, rows).unwrap();
        let h_a = shannon_entropy(&t.marginal_a()).unwrap();
        prop_assert!((t.conditional_entropy() - h_a).abs() <= 1e-12);
    }

    #[test]
    fn merging_columns_never_helps(t in (2usize..4, 2usize..5).prop_flat_map(|(r, c)| table(r, c)), i in 0usize..4, j in 0usize..4) {
        let (i, j) = (i % t.cols(), j % t.cols());
        prop_assume!(i != j);
        let merged = t.merge_b(i, j).unwrap();
        prop_assert!(merged.conditional_entropy() >= t.conditional_entropy() - 1e-12);
    }

    #[test]
    fn marginals_normalised(t in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| table(r, c))) {
        prop_assert!((t.marginal_a().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((t.marginal_b().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bisect_root_straddles_sign_change(root in 0.01f64..0.99, tol in 1e-10f64..1e-3) {
        let f = |x: f64| (x - root).powi(3) + 0.1 * (x - root);
        let r = bisect(f, 0.0, 1.0, tol, 200).unwrap();
        prop_assert!(r.achieved_tolerance <= tol);
        prop_assert!(r.bracket_lo <= r.root && r.root <= r.bracket_hi);
        prop_assert!(f(r.root - tol) <= 0.0 && f(r.root + tol) > 0.0);
    }

    #[test]
    fn refined_tables_coarsen_to_coarse(params in any_params()) {
        let refined = params.joint(Mode::Refined);
        let channel = match params { SchemeParams::Di(_) => di_coarsening(), _ => bb84_coarsening() };
        let pushed = refined.map_b(BITS, &channel).unwrap();
        let coarse = params.joint(Mode::Coarse);
        for (r1, r2) in pushed.to_rows().iter().zip(coarse.to_rows()) {
            for (x, y) in r1.iter().zip(r2) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
        // data-processing inequality at table level
        prop_assert!(coarse.conditional_entropy() - refined.conditional_entropy() >= -1e-12);
        // coarse disagreement is the closed-form coarse error rate
        prop_assert!((coarse.disagreement() - params.coarse_error().value()).abs() <= 1e-12);
    }

    #[test]
    fn erasure_closed_forms(ps in 0.0f64..=1.0, e in 0.0f64..=1.0) {
        let params = Bb84Params::new(ps, e).unwrap();
        let sp = SchemeParams::Bb84(params);
        let hc = binary_entropy(sp.coarse_error());
        prop_assert!((sp.joint(Mode::Coarse).conditional_entropy() - hc).abs() <= 1e-12);
        let r = keyrate::scenario::refined_cond_entropy_erasure(prob(ps), prob(e));
        prop_assert!((sp.joint(Mode::Refined).conditional_entropy() - r).abs() <= 1e-12);
    }

    #[test]
    fn di_relabeling_invariance(a in 0.0f64..=1.0, b in 0.0f64..=1.0, e in 0.0f64..=0.5) {
        // Using 1 instead of 0 as the fixed bit swaps both alphabets.
        let params = DiParams::new(a, b, e).unwrap();
        for mode in Mode::ALL {
            let t = di_joint(&params, mode);
            let rows = t.to_rows();
            let swapped: Vec<Vec<f64>> = rows.iter().rev().map(|r| {
                let mut r = r.clone();
                r.swap(0, 1);
                r
            }).collect();
            let s = JointTable::new(t.alphabet_a().to_vec(), t.alphabet_b().to_vec(), swapped).unwrap();
            prop_assert!((s.conditional_entropy() - t.conditional_entropy()).abs() <= 1e-12);
            let ha = shannon_entropy(&t.marginal_a()).unwrap();
            prop_assert!((shannon_entropy(&s.marginal_a()).unwrap() - ha).abs() <= 1e-12);
        }
    }

    #[test]
    fn di_alice_marginal(a in 0.0f64..=1.0, b in 0.0f64..=1.0, e in 0.0f64..=0.5) {
        let params = DiParams::new(a, b, e).unwrap();
        let m = di_joint(&params, Mode::Refined).marginal_a();
        prop_assert!((m[0] - (0.5 * a + 1.0 - a)).abs() <= 1e-12);
        prop_assert!((m[1] - 0.5 * a).abs() <= 1e-12);
        let h = shannon_entropy(&m).unwrap();
        prop_assert!((h - keyrate::scenario::di_alice_entropy(prob(a))).abs() <= 1e-12);
    }

    #[test]
    fn bell_parameter_is_class_mixture(a in 0.0f64..=1.0, b in 0.0f64..=1.0, e in 0.0f64..=0.5) {
        let params = DiParams::new(a, b, e).unwrap();
        let w = event_class_weights(&params).as_array();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let mix: f64 = w.iter().zip(di_class_bell_values(prob(e))).map(|(w, s)| w * s).sum();
        let s = di_bell_parameter(&params);
        prop_assert!((s - mix).abs() <= 1e-12);
        prop_assert!((0.0..=TSIRELSON).contains(&s));
    }

    #[test]
    fn bell_parameter_monotone_in_eta(a in 0.0f64..0.99, b in 0.0f64..=1.0, da in 0.0f64..0.01, e in 0.0f64..0.146) {
        // dS/dη_A = 2√2(1-2e)η_B - 2(1-η_B), non-negative once η_B >= 1/(1 + √2(1-2e))
        let knee = 1.0 / (1.0 + std::f64::consts::SQRT_2 * (1.0 - 2.0 * e));
        prop_assume!(b >= knee);
        let lo = di_bell_parameter(&DiParams::new(a, b, e).unwrap());
        let hi = di_bell_parameter(&DiParams::new(a + da, b, e).unwrap());
        prop_assert!(hi >= lo - 1e-12);
        let lo = di_bell_parameter(&DiParams::new(b, a, e).unwrap());
        let hi = di_bell_parameter(&DiParams::new(b, a + da, e).unwrap());
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn bell_parameter_dips_below_knee(b in 0.0f64..0.4, e in 0.0f64..0.146) {
        let lo = di_bell_parameter(&DiParams::new(0.0, b, e).unwrap());
        let hi = di_bell_parameter(&DiParams::new(0.01, b, e).unwrap());
        prop_assert!(hi < lo);
    }

    #[test]
    fn refined_never_worse(params in any_params()) {
        let c = rate(&params, Mode::Coarse, EcParams::SHANNON);
        let r = rate(&params, Mode::Refined, EcParams::SHANNON);
        prop_assert!(r.rate - c.rate >= -1e-12);
        prop_assert_eq!(c.i_pa, r.i_pa);
        if params.fully_detected() {
            prop_assert!((r.rate - c.rate).abs() <= 1e-12);
        }
    }

    #[test]
    fn rate_affine_in_f(params in any_params(), f1 in 1.0f64..2.0, df in 0.0f64..1.0) {
        for mode in Mode::ALL {
            let r1 = rate(&params, mode, EcParams::new(f1).unwrap());
            let r2 = rate(&params, mode, EcParams::new(f1 + df).unwrap());
            prop_assert!(r2.rate <= r1.rate + 1e-12);
            prop_assert!((r2.rate - r1.rate + df * r1.h_a_given_b).abs() <= 1e-12);
            prop_assert!((r1.rate - (r1.h_a - r1.f * r1.h_a_given_b - r1.i_pa)).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&r1.h_a) && r1.h_a_given_b >= 0.0 && (0.0..=1.0).contains(&r1.i_pa));
        }
    }

    #[test]
    fn ipa_bounds(s in -1.0f64..3.0) {
        let v = di_ipa(s);
        prop_assert!((0.0..=1.0).contains(&v));
        if s <= 2.0 {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn di_rate_nonpositive_without_violation(eta in 0.0f64..=1.0, e in 0.0f64..=0.5) {
        let params = SchemeParams::Di(DiParams::symmetric(eta, e).unwrap());
        if params.bell_parameter().unwrap() <= 2.0 {
            for mode in Mode::ALL {
                prop_assert!(rate(&params, mode, EcParams::SHANNON).rate <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_is_deterministic(params in any_params(), seed in any::<u64>()) {
        let a = simulate(&params, 2_000, seed).unwrap();
        let b = simulate(&params, 2_000, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn estimate_invariants(params in any_params(), seed in any::<u64>()) {
        let est = simulate(&params, 5_000, seed).unwrap();
        prop_assert_eq!(est.class_counts.values().sum::<u64>(), est.n);
        prop_assert!(est.std_errors.values().all(|&s| s > 0.0));
        if let Some(s) = est.s_hat {
            prop_assert!((0.0..=TSIRELSON).contains(&s));
        }
        // coarse and refined tables are exact merges of the same raw counts
        let raw_total: u64 = est.raw.counts.iter().flatten().sum();
        prop_assert_eq!(raw_total, est.n);
        let n = est.n as f64;
        let raw = &est.raw.counts;
        let (coarse_groups, refined_groups): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match params {
            SchemeParams::Di(_) => (vec![vec![0, 2], vec![1]], vec![vec![0], vec![1], vec![2]]),
            _ => (vec![vec![0, 2], vec![1, 3]], vec![vec![0], vec![1], vec![2, 3]]),
        };
        for (a, raw_a) in raw.iter().enumerate().take(2) {
            for (b, g) in coarse_groups.iter().enumerate() {
                let c: u64 = g.iter().map(|&k| raw_a[k]).sum();
                prop_assert_eq!(est.joint_coarse_hat.get(a, b), c as f64 / n);
            }
            for (b, g) in refined_groups.iter().enumerate() {
                let c: u64 = g.iter().map(|&k| raw_a[k]).sum();
                prop_assert_eq!(est.joint_refined_hat.get(a, b), c as f64 / n);
            }
        }
        if let SchemeParams::Di(_) = params {
            let merged = est.joint_refined_hat.map_b(BITS, &di_coarsening()).unwrap();
            for (r1, r2) in merged.to_rows().iter().zip(est.joint_coarse_hat.to_rows()) {
                for (x, y) in r1.iter().zip(r2) {
                    prop_assert!((x - y).abs() <= 1e-15);
                }
            }
        }
    }
}

#[test]
fn class_frequencies_converge() {
    let n = 200_000u64;
    for (a, b) in [(0.9, 0.8), (0.5, 0.5), (0.95, 0.3)] {
        let params = DiParams::new(a, b, 0.02).unwrap();
        let est = simulate_di(&params, n, 17).unwrap();
        let w = event_class_weights(&params).as_array();
        for (count, w) in est.class_counts.values().zip(w) {
            let f = *count as f64 / n as f64;
            assert!((f - w).abs() <= 5.0 * (w * (1.0 - w) / n as f64).sqrt() + 1e-12, "{f} vs {w}");
        }
    }
}

#[test]
fn empirical_dpi_on_same_run() {
    for (eta, e) in [(0.5, 0.0), (0.8, 0.02), (0.95, 0.1)] {
        let est = simulate_ddi(&DdiParams::new(eta, e).unwrap(), 100_000, 23).unwrap();
        assert!(est.joint_refined_hat.conditional_entropy() <= est.joint_coarse_hat.conditional_entropy());
        let est = simulate_di(&DiParams::symmetric(eta, e).unwrap(), 100_000, 23).unwrap();
        assert!(est.joint_refined_hat.conditional_entropy() <= est.joint_coarse_hat.conditional_entropy() + 1e-12);
    }
}

#[test]
fn thresholds_stable_under_refinement() {
    for scheme in Scheme::ALL {
        for mode in Mode::ALL {
            let mut tol = 1e-3;
            let mut prev = find_eta_threshold(scheme, mode, 0.01, tol, EcParams::SHANNON).unwrap().unwrap().root();
            for _ in 0..8 {
                let next = find_eta_threshold(scheme, mode, 0.01, tol / 2.0, EcParams::SHANNON)
                    .unwrap()
                    .unwrap()
                    .root();
                assert!((next - prev).abs() <= tol, "{scheme} {mode}: {prev} -> {next}");
                prev = next;
                tol /= 2.0;
            }
        }
    }
}

#[test]
fn sweep_rows_bracket_thresholds() {
    for scheme in Scheme::ALL {
        let rows = sweep(scheme, 0.0, 0.5, 1.0, 201, EcParams::SHANNON).unwrap();
        for mode in Mode::ALL {
            let t = find_eta_threshold(scheme, mode, 0.0, 1e-9, EcParams::SHANNON).unwrap().unwrap().root();
            let below = rows.iter().rfind(|r| r.eta < t).unwrap();
            let above = rows.iter().find(|r| r.eta > t).unwrap();
            let pick = |r: &keyrate::analysis::SweepRow| match mode {
                Mode::Coarse => r.rate_coarse,
                Mode::Refined => r.rate_refined,
            };
            assert!(pick(below) <= 0.0 && pick(above) > 0.0, "{scheme} {mode} at {t}");
        }
        for r in &rows {
            let params = scheme.params_at(r.eta, 0.0).unwrap();
            assert_eq!(r.rate_coarse, rate(&params, Mode::Coarse, EcParams::SHANNON).rate);
            assert_eq!(r.rate_refined, rate(&params, Mode::Refined, EcParams::SHANNON).rate);
            if r.s.is_some_and(|s| s <= 2.0) {
                assert!(r.rate_coarse <= 0.0 && r.rate_refined <= 0.0);
            }
        }
    }
}
