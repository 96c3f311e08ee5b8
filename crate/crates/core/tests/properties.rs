use hilap::checks::{check_monotone, ultrametric_excess};
use hilap::gen::{random_choice, random_function, random_mean_zero, random_tree, RandomTreeParams};
use hilap::laplacian::{apply, lambda_of, Mode};
use hilap::perturbation::{lambda_at, DyadicBall, EpsilonField, PerturbationConfig};
use hilap::semigroup::HeatOperator;
use hilap::tree::{read_tree, whitney_from_lambda, write_tree};
use hilap::WhitneyMap;
use proptest::prelude::*;

fn tree_params() -> impl Strategy<Value = RandomTreeParams> {
    (1usize..=5, 2usize..=5, 0.0f64..=1.0).prop_map(|(max_depth, max_branching, cell_prob)| {
        RandomTreeParams {
            max_depth,
            max_branching,
            max_leaves: 80,
            cell_prob,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diameters_form_an_ultrametric(seed in any::<u64>(), params in tree_params()) {
        let t = random_tree(seed, &params).unwrap();
        let w = WhitneyMap::from_diam(&t);
        prop_assert!(ultrametric_excess(&t, &w) <= 0.0);
        prop_assert!(check_monotone(&t, &w).is_ok());
    }

    #[test]
    fn lambda_grows_toward_the_leaves(seed in any::<u64>(), params in tree_params(), tail in any::<bool>()) {
        let t = random_tree(seed, &params).unwrap();
        let mode = if tail { Mode::MeanZeroTail } else { Mode::Compact };
        let c = random_choice(&t, seed, mode).unwrap();
        for b in t.internal_balls() {
            for &k in t.children(b) {
                if t.is_internal(k) {
                    prop_assert!(lambda_of(&t, &c, k).unwrap() > lambda_of(&t, &c, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn laplacian_is_symmetric_and_nonnegative(seed in any::<u64>(), params in tree_params()) {
        let t = random_tree(seed, &params).unwrap();
        let c = random_choice(&t, seed, Mode::Compact).unwrap();
        let f = random_function(&t, seed ^ 1);
        let g = random_function(&t, seed ^ 2);
        let lf = apply(&t, &c, &f).unwrap();
        let lg = apply(&t, &c, &g).unwrap();
        let (a, b) = (lf.inner(&t, &g), f.inner(&t, &lg));
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        prop_assert!(lf.inner(&t, &f) >= -1e-12);
    }

    #[test]
    fn heat_is_a_semigroup(seed in any::<u64>(), params in tree_params(), s in 0.0f64..5.0, u in 0.0f64..5.0) {
        let t = random_tree(seed, &params).unwrap();
        let c = random_choice(&t, seed, Mode::MeanZeroTail).unwrap();
        let f = random_mean_zero(&t, seed);
        let hs = HeatOperator::new(&t, &c, s).unwrap();
        let hu = hs.at(u).unwrap();
        let lhs = hs.apply_integral(&hu.apply_integral(&f).unwrap()).unwrap();
        let rhs = hs.at(s + u).unwrap().apply_spectral(&f).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        prop_assert!(rhs.norm_l2(&t) <= f.norm_l2(&t) + 1e-12);
    }

    #[test]
    fn whitney_maps_come_from_rates(seed in any::<u64>(), params in tree_params()) {
        let t = random_tree(seed, &params).unwrap();
        let c = random_choice(&t, seed, Mode::Compact).unwrap();
        let lam: Vec<f64> = t
            .ball_ids()
            .map(|b| lambda_of(&t, &c, b).unwrap_or(0.0))
            .collect();
        let w = whitney_from_lambda(&t, &lam).unwrap();
        prop_assert!(check_monotone(&t, &w).is_ok());
        prop_assert!(ultrametric_excess(&t, &w) <= 0.0);
    }

    #[test]
    fn tree_text_round_trips(seed in any::<u64>(), params in tree_params()) {
        let t = random_tree(seed, &params).unwrap();
        let w = WhitneyMap::from_diam(&t);
        let (back, wb) = read_tree(&write_tree(&t, Some(&w))).unwrap();
        prop_assert_eq!(back, t);
        prop_assert_eq!(wb.unwrap(), w);
    }

    #[test]
    fn perturbed_values_stay_in_their_band(
        seed in any::<u64>(),
        delta in 0.01f64..2.0,
        p in 0.0f64..=1.0,
        level in -20i32..20,
        index in 0u64..1 << 20,
    ) {
        let cfg = PerturbationConfig::new(delta, p, 40, seed).unwrap();
        let field = EpsilonField::new(&cfg);
        let v = lambda_at(&cfg, &field, DyadicBall::new(level, index), 60);
        let lo = 2f64.powi(-level);
        prop_assert!(v >= lo && v <= lo * (1.0 + delta));
    }
}
