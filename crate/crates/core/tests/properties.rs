use mpshrink::certify::lemma_check;
use mpshrink::data::{build_dataset, dataset_from_patterns, format_example, parse_str, RawExample};
use mpshrink::oracle::exact_gamma_d_exhaustive;
use mpshrink::{evaluate_margin, exact_gamma_d, synth, train, Algorithm, Hyperparams, Order};
use proptest::prelude::*;

fn example() -> impl Strategy<Value = RawExample> {
    (
        prop_oneof![Just(1i8), Just(-1i8)],
        prop::collection::btree_map(1usize..50, -1e6f64..1e6, 0..8),
    )
        .prop_map(|(label, feats)| RawExample::new(label, feats.into_iter().collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn format_parse_round_trip(rows in prop::collection::vec(example(), 1..10)) {
        let text: String = rows.iter().map(|e| format_example(e) + "\n").collect();
        prop_assert_eq!(parse_str(&text).unwrap(), rows);
    }

    #[test]
    fn margin_is_scale_invariant(seed in 0u64..1000, scale in 1e-3f64..1e3) {
        let ds = build_dataset(&synth::noisy(30, 4, 0.2, seed), 1.0, 0.0).unwrap();
        let w: Vec<f64> = (0..ds.dim()).map(|i| ((i as f64 + 1.0) * (seed as f64 + 0.5)).sin()).collect();
        let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
        let (a, ka) = evaluate_margin(&w, &ds).unwrap();
        let (b, kb) = evaluate_margin(&scaled, &ds).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * ds.radius());
        prop_assert_eq!(ka, kb);
    }

    #[test]
    fn tracked_power_sum_matches_direct_sum(seed in 0u64..1000, n in 0u32..5, lup in 1u64..50) {
        let ds = build_dataset(&synth::separable(40, 3, 0.05, seed), 1.0, 0.0).unwrap();
        let r2 = ds.radius() * ds.radius();
        let hp = Hyperparams { n, eta: 0.5, b: r2, lup, ..Default::default() };
        let run = train(&ds, &hp, Algorithm::Mpvs, Order::Sequential, true).unwrap();
        prop_assert!(run.converged);
        let direct: f64 = (1..=run.t_c).map(|i| (i as f64).powi(n as i32)).sum();
        prop_assert!((run.state.powersum - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn oracle_agrees_with_exhaustive(rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..7)) {
        prop_assume!(rows.iter().all(|r| r.iter().any(|v| v.abs() > 1e-3)));
        let ds = dataset_from_patterns(&rows).unwrap();
        let fast = exact_gamma_d(&ds).unwrap();
        let slow = exact_gamma_d_exhaustive(&ds).unwrap();
        prop_assert!((fast.gamma_d - slow.gamma_d).abs() <= 1e-8 * ds.radius(),
            "{} vs {}", fast.gamma_d, slow.gamma_d);
        if fast.separable {
            prop_assert!(fast.gamma_lower <= fast.gamma_d + 1e-12 * ds.radius());
            prop_assert!(fast.gamma_d - fast.gamma_lower <= 1e-8 * ds.radius());
        }
    }

    #[test]
    fn extension_makes_any_labelling_separable(seed in 0u64..1000, delta in 0.05f64..2.0) {
        let ds = build_dataset(&synth::noisy(25, 3, 0.4, seed), 1.0, delta).unwrap();
        let o = exact_gamma_d(&ds).unwrap();
        prop_assert!(o.separable && o.gamma_d > 0.0);
        let r2 = ds.radius() * ds.radius();
        let hp = Hyperparams { n: 2, eta: 0.5, b: r2, ..Default::default() };
        prop_assert!(train(&ds, &hp, Algorithm::Mpvs, Order::Sequential, true).unwrap().converged);
    }

    #[test]
    fn power_sum_inequalities(n in 0u32..=10, t in 1u64..=400) {
        prop_assert!(lemma_check(n, t).all_hold());
    }

    #[test]
    fn constant_shrinking_inside_proviso_converges(seed in 0u64..1000, u in 0.05f64..0.95) {
        let ds = build_dataset(&synth::separable(60, 4, 0.05, seed), 1.0, 0.0).unwrap();
        let r2 = ds.radius() * ds.radius();
        let gamma_d = exact_gamma_d(&ds).unwrap().gamma_d;
        // delta = eta R^2 / b = 0.2; lambda below (2/(2+delta)) gamma_d^2 / b
        let lambda = u * 2.0 / 2.2 * gamma_d * gamma_d / r2;
        let hp = Hyperparams { eta: 0.2, b: r2, lambda, ..Default::default() };
        let run = train(&ds, &hp, Algorithm::Mpcs, Order::Sequential, true).unwrap();
        prop_assert!(run.converged);
        let (gamma, _) = evaluate_margin(&run.state.weights(), &ds).unwrap();
        prop_assert!(gamma > 0.0 && gamma <= gamma_d * (1.0 + 1e-9));
    }
}
