mod common;

use hilap::gen::{random_choice, random_function, random_mean_zero, random_tree, RandomTreeParams};
use hilap::laplacian::{eigenfunction, Mode};
use hilap::padic::{FracDerivOp, PadicWindow};
use hilap::semigroup::{markov_checks, probe_set, HeatOperator};
use hilap::Error;
use nalgebra::DVector;

fn small_params() -> RandomTreeParams {
    RandomTreeParams {
        max_depth: 4,
        max_leaves: 96,
        ..RandomTreeParams::default()
    }
}

#[test]
fn matches_dense_exponential() {
    for seed in 0..10 {
        let t = random_tree(seed, &small_params()).unwrap();
        let c = random_choice(&t, seed, Mode::Compact).unwrap();
        let m = common::laplacian_matrix(&t, &c);
        let f = random_function(&t, seed + 1);
        for time in [0.0, 0.1, 1.0, 10.0] {
            let h = HeatOperator::new(&t, &c, time).unwrap();
            let want = common::heat_matrix(&t, &m, time) * DVector::from_column_slice(f.values());
            let spectral = h.apply_spectral(&f).unwrap();
            let integral = h.apply_integral(&f).unwrap();
            assert!(common::sup_diff(spectral.values(), want.as_slice()) <= 1e-10, "seed {seed} t {time}");
            assert!(common::sup_diff(integral.values(), want.as_slice()) <= 1e-10, "seed {seed} t {time}");
        }
    }
}

#[test]
fn tail_mode_matches_dense_exponential_on_mean_zero() {
    for seed in 0..10 {
        let t = random_tree(seed, &small_params()).unwrap();
        let c = random_choice(&t, seed, Mode::MeanZeroTail).unwrap();
        let m = common::laplacian_matrix(&t, &c);
        let f = random_mean_zero(&t, seed + 1);
        let h = HeatOperator::new(&t, &c, 0.7).unwrap();
        let want = common::heat_matrix(&t, &m, 0.7) * DVector::from_column_slice(f.values());
        let got = h.apply_integral(&f).unwrap();
        assert!(common::sup_diff(got.values(), want.as_slice()) <= 1e-10);
        assert!(h.apply_spectral(&f).unwrap().max_abs_diff(&got) <= 1e-10);
    }
}

#[test]
fn eigenfunctions_decay_exponentially() {
    let t = random_tree(4, &small_params()).unwrap();
    let c = random_choice(&t, 4, Mode::Compact).unwrap();
    let h = HeatOperator::new(&t, &c, 0.3).unwrap();
    for bp in t.internal_balls() {
        let lam = common::lambda_by_scan(&t, &c, bp);
        let b = t.children(bp)[0];
        let f = eigenfunction(&t, b, bp).unwrap();
        let got = h.apply_integral(&f).unwrap();
        assert!(got.max_abs_diff(&f.scaled((-0.3 * lam).exp())) <= 1e-12 * f.norm_sup());
    }
}

#[test]
fn markov_properties_on_random_trees() {
    for seed in 0..10 {
        let t = random_tree(seed, &small_params()).unwrap();
        let c = random_choice(&t, seed, Mode::Compact).unwrap();
        for time in [0.1, 1.0, 10.0] {
            let h = HeatOperator::new(&t, &c, time).unwrap();
            let r = markov_checks(&h, 1.0, seed).unwrap();
            assert!(r.max_defect() <= 1e-12, "seed {seed} t {time}: {r:?}");
        }
    }
}

#[test]
fn markov_checks_refuse_tail_mode() {
    let t = random_tree(0, &small_params()).unwrap();
    let c = random_choice(&t, 0, Mode::MeanZeroTail).unwrap();
    let h = HeatOperator::new(&t, &c, 1.0).unwrap();
    assert!(matches!(markov_checks(&h, 1.0, 0), Err(Error::InvalidParameter(_))));
}

#[test]
fn padic_heat_contracts() {
    let op = FracDerivOp::new(PadicWindow::new(3, -2, 2).unwrap(), 1.0).unwrap();
    let t = op.window().tree();
    let h = HeatOperator::new(t, op.choice(), 0.5).unwrap();
    for g in probe_set(t, 8, 3).into_iter().filter(|g| g.integral(t).abs() < 1e-12) {
        let pg = h.apply_integral(&g).unwrap();
        assert!(pg.norm_sup() <= g.norm_sup() + 1e-12);
        assert!(pg.norm_l1(t) <= g.norm_l1(t) + 1e-12);
    }
}

#[test]
fn rejects_negative_time() {
    let t = random_tree(0, &small_params()).unwrap();
    let c = random_choice(&t, 0, Mode::Compact).unwrap();
    assert!(HeatOperator::new(&t, &c, -1.0).is_err());
    assert!(HeatOperator::new(&t, &c, f64::NAN).is_err());
}
