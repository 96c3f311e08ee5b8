mod common;

use std::collections::HashMap;

use hilap::laplacian::Mode;
use hilap::padic::{FracDerivOp, PadicWindow};
use hilap::perturbation::{
    clt_experiment, coverage_experiment, dyadic_ball, exact_u_variance, lambda_perturbed,
    ks_distance_normal, moments, DyadicBall, EpsilonField, PerturbationConfig, DEFAULT_TAIL_DEPTH,
};
use hilap::ChoiceFunction;

fn cfg(delta: f64, p: f64, seed: u64) -> PerturbationConfig {
    PerturbationConfig::new(delta, p, DEFAULT_TAIL_DEPTH, seed).unwrap()
}

/// Perturbed rates `2^{-l-1}(1 + δε)` on every window ball and the outer
/// ancestors folded into the tail, summed by the brute scan.
#[test]
fn perturbed_lambda_matches_perturbed_rates() {
    let op = FracDerivOp::new(PadicWindow::new(2, -2, 3).unwrap(), 1.0).unwrap();
    let t = op.window().tree();
    for seed in 0..5 {
        let c = cfg(0.5, 0.4, seed);
        let field = EpsilonField::new(&c);
        let rate = |b: DyadicBall| 2f64.powi(-b.level - 1) * (1.0 + if field.eps(b) { c.delta } else { 0.0 });
        let rates: Vec<f64> = t.ball_ids().map(|b| rate(dyadic_ball(&op, b).unwrap())).collect();
        let root = dyadic_ball(&op, t.root()).unwrap();
        let mut tail: f64 = (1..=c.tail_depth).map(|k| rate(root.ancestor(k))).sum();
        // Unperturbed remainder of the geometric series beyond the last term.
        tail += 2f64.powi(-root.level - c.tail_depth as i32 - 1);
        let choice = ChoiceFunction::new(t, rates, tail, Mode::MeanZeroTail).unwrap();
        for b in t.ball_ids() {
            let want = common::lambda_by_scan(t, &choice, b);
            let got = lambda_perturbed(&c, &field, &op, b).unwrap();
            assert!((got - want).abs() <= 1e-14 * want, "seed {seed} ball {b}");
        }
    }
}

#[test]
fn exact_variance_matches_ancestor_weights() {
    for m in [0u32, 1, 4, 9] {
        for depth in [1u32, 5, 40] {
            let n = 1u64 << m;
            // Coefficient of ε(A) in the average is 2^{-k} (#balls below A) / n.
            let mut coef: HashMap<DyadicBall, f64> = HashMap::new();
            for r in 0..n {
                for k in 1..=m + 1 + depth {
                    let a = DyadicBall::new(0, r).ancestor(k - 1);
                    *coef.entry(a).or_default() += 2f64.powi(-(k as i32)) / n as f64;
                }
            }
            let want = 0.3 * 0.7 * coef.values().map(|c| c * c).sum::<f64>();
            let got = exact_u_variance(0.3, m, depth);
            assert!((got - want).abs() <= 1e-14 * want, "m {m} depth {depth}");
        }
    }
}

#[test]
fn coverage_values_stay_in_the_interval() {
    for seed in 0..20 {
        let r = coverage_experiment(&cfg(0.5, 0.5, seed), -1, 1024, 6, 16).unwrap();
        assert!(r.all_in_interval);
        assert_eq!(r.interval, (2.0, 3.0));
        assert!(r.gap_to_next_level > 0.0 && !r.intervals_connected);
        assert!(r.max_rel_gap < 0.05, "seed {seed}: {}", r.max_rel_gap);
        assert!(r.values.windows(2).all(|w| w[0] <= w[1]));
    }
    let one = coverage_experiment(&cfg(1.0, 0.5, 0), 0, 16, 4, 8).unwrap();
    assert!(one.intervals_connected);
}

#[test]
fn coverage_needs_enough_separated_balls() {
    assert!(coverage_experiment(&cfg(0.5, 0.5, 0), 0, 17, 4, 7).is_err());
    assert!(coverage_experiment(&cfg(0.5, 0.5, 0), 0, 16, 0, 7).is_err());
}

#[test]
fn fields_are_reproducible_and_seed_dependent() {
    let a = EpsilonField::new(&cfg(0.5, 0.5, 11));
    let b = EpsilonField::new(&cfg(0.5, 0.5, 11));
    let c = EpsilonField::new(&cfg(0.5, 0.5, 12));
    let balls: Vec<DyadicBall> = (0..256).map(|r| DyadicBall::new(-3, r)).collect();
    assert!(balls.iter().all(|&x| a.eps(x) == b.eps(x)));
    assert!(balls.iter().any(|&x| a.eps(x) != c.eps(x)));
    let ones = balls.iter().filter(|&&x| a.eps(x)).count();
    assert!((90..=166).contains(&ones), "{ones} of 256");
}

#[test]
fn small_clt_run_centres_on_the_target() {
    let r = clt_experiment(&cfg(0.5, 0.5, 3), 0, 9, 2000).unwrap();
    assert!(r.lln_z.abs() < 4.0, "z = {}", r.lln_z);
    let m = moments(&r.samples.iter().map(|s| s.stat).collect::<Vec<_>>());
    assert_eq!(m, r.stat);
    assert!(ks_distance_normal(&r.samples.iter().map(|s| s.stat).collect::<Vec<_>>()) == r.ks);
    assert!((r.u_var / r.exact_u_var - 1.0).abs() < 0.15);
}

#[test]
fn config_validation() {
    assert!(PerturbationConfig::new(0.0, 0.5, 40, 0).is_err());
    assert!(PerturbationConfig::new(0.5, 1.5, 40, 0).is_err());
    assert!(PerturbationConfig::new(0.5, 0.5, 0, 0).is_err());
    assert!(clt_experiment(&cfg(0.5, 0.5, 0), 0, 5, 2000).is_err());
    assert!(clt_experiment(&cfg(0.5, 0.5, 0), 0, 10, 10).is_err());
}
