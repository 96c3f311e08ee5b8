use hilap::checks;
use hilap::gen::{random_tree, RandomTreeParams};
use hilap::tree::{
    distance, level_partition, range_of_metric, read_tree, whitney_from_lambda, write_tree,
    ExplicitTree, Node, TreeSpec,
};
use hilap::{BallKind, Error, WhitneyMap};

fn padic(p: u32, k_min: i32, k_max: i32) -> hilap::BallTree {
    TreeSpec::Padic { p, k_min, k_max }.build().unwrap()
}

#[test]
fn padic_window_shape() {
    let t = padic(2, -2, 2);
    assert_eq!(t.len(), 31);
    assert_eq!(t.leaf_count(), 16);
    assert_eq!(t.diam(t.root()), 4.0);
    for &l in t.leaves() {
        assert_eq!(t.diam(l), 0.25);
        assert_eq!(t.measure(l), 0.25);
        assert_eq!(t.kind(l), BallKind::Cell);
    }
    for b in t.internal_balls() {
        assert_eq!(t.branching(b), 2);
    }
}

#[test]
fn nat_dmax_chain_and_meets() {
    let t = TreeSpec::NatDmax { n: 4 }.build().unwrap();
    let w = WhitneyMap::from_diam(&t);
    assert_eq!(range_of_metric(&t, &w), vec![0.0, 2.0, 3.0, 4.0]);
    // Leaves come out in the order {1}, {2}, {3}, {4}.
    for i in 0..4 {
        for j in 0..4 {
            let d = distance(&t, &w, t.point_at(i), t.point_at(j)).unwrap();
            let want = if i == j { 0.0 } else { (i.max(j) + 1) as f64 };
            assert_eq!(d, want, "d({}, {})", i + 1, j + 1);
        }
    }
    assert_eq!(t.meet(t.leaves()[1], t.leaves()[3]).unwrap(), t.root());
    let level1 = level_partition(&t, 1).unwrap();
    let sizes: Vec<usize> = level1.members().iter().map(|&b| t.leaf_range(b).len()).collect();
    assert_eq!(sizes, vec![3, 1]);
}

#[test]
fn meet_of_one_and_three_in_z2() {
    let win = hilap::padic::PadicWindow::new(2, -2, 2).unwrap();
    let t = win.tree();
    let x = win.leaf_of_integer(1).unwrap();
    let y = win.leaf_of_integer(3).unwrap();
    let m = t.meet(x.leaf(), y.leaf()).unwrap();
    assert_eq!(t.diam(m), 0.5);
    assert_eq!(distance(t, &WhitneyMap::from_diam(t), x, y).unwrap(), 0.5);
    assert_eq!(t.meet(x.leaf(), x.leaf()).unwrap(), x.leaf());
}

#[test]
fn whitney_from_lambda_scaling() {
    let t = padic(2, -2, 2);
    let inv: Vec<f64> = t.ball_ids().map(|b| 1.0 / t.diam(b)).collect();
    assert_eq!(whitney_from_lambda(&t, &inv).unwrap(), WhitneyMap::from_diam(&t));
    let twice: Vec<f64> = inv.iter().map(|v| 2.0 * v).collect();
    let half = whitney_from_lambda(&t, &twice).unwrap();
    for b in t.ball_ids() {
        assert_eq!(half.get(b), t.diam(b) / 2.0);
    }
    let mut bad = inv.clone();
    bad[t.root().index()] = 100.0;
    assert!(matches!(whitney_from_lambda(&t, &bad), Err(Error::NonMonotoneLambda { .. })));
}

#[test]
fn whitney_from_lambda_on_random_trees_is_monotone() {
    let params = RandomTreeParams {
        max_depth: 3,
        ..RandomTreeParams::default()
    };
    for seed in 0..20 {
        let t = random_tree(seed, &params).unwrap();
        // λ = 1/diam is decreasing along inclusion for any valid tree.
        let lam: Vec<f64> = t
            .ball_ids()
            .map(|b| if t.kind(b).is_point() { 0.0 } else { 1.0 / t.diam(b) })
            .collect();
        let w = whitney_from_lambda(&t, &lam).unwrap();
        for a in t.ball_ids() {
            for b in t.ball_ids() {
                if a != b && t.contains(b, a) {
                    assert!(w.get(a) < w.get(b));
                    if !t.kind(a).is_point() {
                        assert!(lam[a.index()] > lam[b.index()]);
                    }
                }
            }
        }
    }
}

#[test]
fn range_of_metric_examples() {
    let t = padic(2, -2, 2);
    assert_eq!(
        range_of_metric(&t, &WhitneyMap::from_diam(&t)),
        vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    );
    let two = TreeSpec::Explicit(ExplicitTree::new(vec![
        Node::new(None, 7.0, 1.0),
        Node::new(Some(0), 0.0, 0.5),
        Node::new(Some(0), 0.0, 0.5),
    ]))
    .build()
    .unwrap();
    assert_eq!(range_of_metric(&two, &WhitneyMap::from_diam(&two)), vec![0.0, 7.0]);
}

#[test]
fn level_partitions() {
    let t = padic(2, -2, 2);
    let unit = level_partition(&t, 2).unwrap();
    assert_eq!(unit.len(), 4);
    assert_eq!(level_partition(&t, 0).unwrap().members(), &[t.root()]);
    assert_eq!(
        level_partition(&t, 5),
        Err(Error::LevelOutOfRange { level: 5, max: 4 })
    );
}

#[test]
fn explicit_tree_errors() {
    let build = |nodes: Vec<Node>, collapse: bool| {
        let mut e = ExplicitTree::new(nodes);
        e.collapse = collapse;
        TreeSpec::Explicit(e).build()
    };
    assert!(matches!(
        build(
            vec![
                Node::new(None, 1.0, 1.0),
                Node::new(Some(0), 2.0, 0.5),
                Node::new(Some(0), 0.0, 0.5)
            ],
            true
        ),
        Err(Error::NonMonotoneDiameter { .. })
    ));
    assert!(matches!(
        build(
            vec![
                Node::new(None, 1.0, 1.0),
                Node::new(Some(0), 0.0, 0.4),
                Node::new(Some(0), 0.0, 0.5)
            ],
            true
        ),
        Err(Error::NonAdditiveMeasure { .. })
    ));
    let single = vec![
        Node::new(None, 2.0, 1.0),
        Node::new(Some(0), 1.0, 1.0),
        Node::new(Some(1), 0.0, 0.5),
        Node::new(Some(1), 0.0, 0.5),
    ];
    assert_eq!(build(single.clone(), false), Err(Error::SingleChildBall(0)));
    let collapsed = build(single, true).unwrap();
    assert_eq!(collapsed.len(), 3);
}

#[test]
fn serialization_round_trip() {
    for seed in 0..10 {
        let t = random_tree(seed, &RandomTreeParams::default()).unwrap();
        let w = WhitneyMap::from_diam(&t);
        let text = write_tree(&t, Some(&w));
        assert!(text.starts_with("#hilap-tree v1\n"));
        let (back, w_back) = read_tree(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(w_back.unwrap(), w);
        let (plain, none) = read_tree(&write_tree(&t, None)).unwrap();
        assert_eq!(plain, t);
        assert!(none.is_none());
    }
    assert!(matches!(read_tree("#hilap-tree v1\n0 - 0 x 1 I\n"), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn exhaustive_invariants_on_small_windows() {
    let params = RandomTreeParams {
        max_depth: 4,
        max_leaves: 96,
        ..RandomTreeParams::default()
    };
    for seed in 0..10 {
        let t = random_tree(seed, &params).unwrap();
        let w = WhitneyMap::from_diam(&t);
        checks::check_meets(&t).unwrap();
        checks::check_monotone(&t, &w).unwrap();
        assert!(checks::ultrametric_excess(&t, &w) <= 0.0);
        checks::check_ball_preservation(&t, &w).unwrap();
        checks::check_center_independence(&t, &w).unwrap();
    }
}

#[test]
fn measures_are_additive() {
    for seed in 0..20 {
        let t = random_tree(seed, &RandomTreeParams::default()).unwrap();
        for b in t.internal_balls() {
            let s: f64 = t.children(b).iter().map(|&c| t.measure(c)).sum();
            assert!((s - t.measure(b)).abs() <= 1e-12 * t.measure(b));
        }
    }
}
