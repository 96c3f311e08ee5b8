//! Exhaustive invariant checks on a window. Each returns the first
//! counterexample found, if any.

use std::collections::HashSet;
use std::ops::Range;

use crate::par;
use crate::tree::{range_of_metric, BallId, BallTree, WhitneyMap};

/// For every pair of balls: the meet is symmetric, contains both, and no
/// child of it contains both.
pub fn check_meets(t: &BallTree) -> Result<(), String> {
    let n = t.len();
    let bad = par::map_range(n, |i| {
        let a = BallId::new(i);
        for j in i..n {
            let b = BallId::new(j);
            let m = t.meet(a, b).map_err(|e| e.to_string())?;
            if t.meet(b, a).map_err(|e| e.to_string())? != m {
                return Err(format!("meet({a}, {b}) is not symmetric"));
            }
            if !(t.contains(m, a) && t.contains(m, b)) {
                return Err(format!("meet({a}, {b}) = {m} misses an argument"));
            }
            if let Some(&c) = t
                .children(m)
                .iter()
                .find(|&&c| t.contains(c, a) && t.contains(c, b))
            {
                return Err(format!("child {c} of meet({a}, {b}) contains both"));
            }
        }
        Ok(())
    });
    bad.into_iter().collect()
}

/// Largest `d(x, y) - max(d(x, z), d(z, y))` over all leaf triples; at most
/// zero for an ultrametric.
pub fn ultrametric_excess(t: &BallTree, w: &WhitneyMap) -> f64 {
    let d = leaf_distances(t, w);
    let n = t.leaf_count();
    par::map_range(n, |x| {
        let mut worst = f64::NEG_INFINITY;
        for y in 0..n {
            for z in 0..n {
                let e = d[x * n + y] - d[x * n + z].max(d[z * n + y]);
                worst = worst.max(e);
            }
        }
        worst
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// Dense leaf-by-leaf distance matrix, row major.
pub fn leaf_distances(t: &BallTree, w: &WhitneyMap) -> Vec<f64> {
    let n = t.leaf_count();
    let leaves = t.leaves();
    par::map_range(n, |x| {
        (0..n)
            .map(|y| {
                if x == y {
                    0.0
                } else {
                    w.get(t.meet(leaves[x], leaves[y]).expect("leaves of t"))
                }
            })
            .collect::<Vec<_>>()
    })
    .concat()
}

/// `A ⊊ B ⇒ w(A) < w(B)` over all pairs of balls, and `w = 0` exactly on
/// point leaves.
pub fn check_monotone(t: &BallTree, w: &WhitneyMap) -> Result<(), String> {
    let n = t.len();
    let bad = par::map_range(n, |i| {
        let a = BallId::new(i);
        if (w.get(a) == 0.0) != t.kind(a).is_point() {
            return Err(format!("w({a}) = {} on a {:?} ball", w.get(a), t.kind(a)));
        }
        for j in 0..n {
            let b = BallId::new(j);
            if a != b && t.contains(b, a) && !(w.get(a) < w.get(b)) {
                return Err(format!("w({a}) = {} is not below w({b}) = {}", w.get(a), w.get(b)));
            }
        }
        Ok(())
    });
    bad.into_iter().collect()
}

/// Closed metric balls `{z : d(x, z) <= r}` for every leaf `x` and every
/// radius `r` in the range of the metric, as leaf-position ranges. Returns
/// an error if one of them is not an interval of leaves, which would make
/// it a set no ball of `t` can equal.
pub fn metric_balls(t: &BallTree, w: &WhitneyMap) -> Result<HashSet<(usize, usize)>, String> {
    let d = leaf_distances(t, w);
    let radii = range_of_metric(t, w);
    let n = t.leaf_count();
    let per_leaf = par::map_range(n, |x| {
        let mut out = Vec::with_capacity(radii.len());
        for &r in &radii {
            let inside: Vec<usize> = (0..n).filter(|&z| d[x * n + z] <= r).collect();
            let (lo, hi) = (inside[0], inside[inside.len() - 1] + 1);
            if hi - lo != inside.len() {
                return Err(format!("ball of radius {r} around leaf {x} is not contiguous"));
            }
            out.push((lo, hi));
        }
        Ok(out)
    });
    let mut all = HashSet::new();
    for r in per_leaf {
        all.extend(r?);
    }
    Ok(all)
}

/// The closed balls of the metric `w(x ∧ y)`, enumerated over all leaves
/// and all radii, are exactly the balls of `t`; any two are nested or
/// disjoint.
pub fn check_ball_preservation(t: &BallTree, w: &WhitneyMap) -> Result<(), String> {
    let metric = metric_balls(t, w)?;
    let tree: HashSet<(usize, usize)> = t
        .ball_ids()
        .map(|b| {
            let Range { start, end } = t.leaf_range(b);
            (start, end)
        })
        .collect();
    if let Some(m) = metric.iter().find(|m| !tree.contains(m)) {
        return Err(format!("metric ball over leaves {}..{} is not a tree ball", m.0, m.1));
    }
    if let Some(b) = tree.iter().find(|b| !metric.contains(b)) {
        return Err(format!("tree ball over leaves {}..{} is not a metric ball", b.0, b.1));
    }
    let list: Vec<_> = metric.into_iter().collect();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            let disjoint = a.1 <= b.0 || b.1 <= a.0;
            let nested = (a.0 <= b.0 && b.1 <= a.1) || (b.0 <= a.0 && a.1 <= b.1);
            if !(disjoint || nested) {
                return Err(format!("balls {a:?} and {b:?} overlap"));
            }
        }
    }
    Ok(())
}

/// For every ball `B` and leaves `x, y ∈ B`, the closed balls of radius
/// `w(B)` around `x` and `y` agree.
pub fn check_center_independence(t: &BallTree, w: &WhitneyMap) -> Result<(), String> {
    let d = leaf_distances(t, w);
    let n = t.leaf_count();
    for b in t.ball_ids() {
        let r = w.get(b);
        let range = t.leaf_range(b);
        let first: Vec<bool> = (0..n).map(|z| d[range.start * n + z] <= r).collect();
        for x in range.clone().skip(1) {
            if (0..n).any(|z| (d[x * n + z] <= r) != first[z]) {
                return Err(format!("balls of radius {r} around leaves {} and {x} differ", range.start));
            }
        }
    }
    Ok(())
}
