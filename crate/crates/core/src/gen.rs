//! Seeded random windows, rates and functions for tests, benches and the
//! `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::laplacian::{CellFunction, ChoiceFunction, Mode};
use crate::tree::{finalize_mapped, BallKind, BallTree, Node};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTreeParams {
    /// Deepest level a ball may sit on (the root is level 0).
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_leaves: usize,
    /// Chance that a leaf is a cell rather than a singleton.
    pub cell_prob: f64,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        RandomTreeParams {
            max_depth: 6,
            max_branching: 4,
            max_leaves: 1024,
            cell_prob: 0.5,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random window grown breadth first. The root always splits; deeper
/// balls split with probability 0.6 while the leaf budget allows.
pub fn random_tree(seed: u64, params: &RandomTreeParams) -> Result<BallTree> {
    let mut rng = rng(seed);
    let mut nodes = vec![Node::new(None, 1.0, 0.0)];
    let mut levels = vec![0usize];
    let mut leaves = 1usize;
    let mut next = 0;
    while next < nodes.len() {
        let v = next;
        next += 1;
        let level = levels[v];
        let wants = v == 0 || rng.random_bool(0.6);
        if level >= params.max_depth || !wants {
            continue;
        }
        let k = rng.random_range(2..=params.max_branching.max(2));
        if leaves + k - 1 > params.max_leaves {
            continue;
        }
        leaves += k - 1;
        for _ in 0..k {
            let diam = nodes[v].diam * rng.random_range(0.2..0.9);
            nodes.push(Node::new(Some(v), diam, 0.0));
            levels.push(level + 1);
        }
    }
    let mut has_child = vec![false; nodes.len()];
    for n in &nodes {
        if let Some(p) = n.parent {
            has_child[p] = true;
        }
    }
    for i in 0..nodes.len() {
        if has_child[i] {
            nodes[i].kind = Some(BallKind::Internal);
        } else if rng.random_bool(params.cell_prob) {
            nodes[i].kind = Some(BallKind::Cell);
            nodes[i].measure = rng.random_range(0.5..2.0);
        } else {
            nodes[i].kind = Some(BallKind::Singleton);
            nodes[i].diam = 0.0;
            nodes[i].measure = rng.random_range(0.5..2.0);
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        if let Some(p) = n.parent {
            children[p].push(i);
        }
    }
    // Children come after their parents; sum in the validator's order.
    for i in (0..nodes.len()).rev() {
        if has_child[i] {
            nodes[i].measure = children[i].iter().map(|&c| nodes[c].measure).fold(0.0, |a, m| a + m);
        }
    }
    Ok(finalize_mapped(&nodes, false, false)?.0)
}

/// Log-uniform rates in `[0.1, 10]` on every non-point ball.
pub fn random_rates(t: &BallTree, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    t.ball_ids()
        .map(|b| {
            if t.kind(b).is_point() {
                0.0
            } else {
                10f64.powf(rng.random_range(-1.0..1.0))
            }
        })
        .collect()
}

/// Random compact choice function; in tail mode the tail rate is drawn from
/// `[0.1, 10]` as well.
pub fn random_choice(t: &BallTree, seed: u64, mode: Mode) -> Result<ChoiceFunction> {
    let rates = random_rates(t, seed);
    let tail = match mode {
        Mode::Compact => 0.0,
        Mode::MeanZeroTail => 10f64.powf(rng(seed ^ 0x7a11).random_range(-1.0..1.0)),
    };
    ChoiceFunction::new(t, rates, tail, mode)
}

/// Values uniform in `[-1, 1)`.
pub fn random_function(t: &BallTree, seed: u64) -> CellFunction {
    let mut rng = rng(seed);
    let values = (0..t.leaf_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    CellFunction::new(t, values).expect("one value per leaf")
}

/// As [`random_function`] with the measure-weighted mean removed.
pub fn random_mean_zero(t: &BallTree, seed: u64) -> CellFunction {
    let f = random_function(t, seed);
    let mean = f.mean(t);
    let values = f.values().iter().map(|v| v - mean).collect();
    CellFunction::new(t, values).expect("one value per leaf")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trees_respect_bounds() {
        let params = RandomTreeParams::default();
        for seed in 0..50 {
            let t = random_tree(seed, &params).unwrap();
            assert!(t.depth() <= 6);
            assert!(t.leaf_count() <= 1024);
            assert!(t.internal_balls().all(|b| (2..=4).contains(&t.branching(b))));
            assert_eq!(t, random_tree(seed, &params).unwrap());
        }
    }

    #[test]
    fn mean_zero_functions() {
        let t = random_tree(3, &RandomTreeParams::default()).unwrap();
        let f = random_mean_zero(&t, 9);
        assert!(f.integral(&t).abs() < 1e-12);
    }
}
