use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::values::{LevelBins, ValueSet};
use crate::error::{Error, Result};
use crate::tree::{finalize_mapped, BallId, BallKind, BallTree, Node, Partition, WhitneyMap};

/// A Whitney map together with the tree it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedMetric {
    pub tree: BallTree,
    pub w: WhitneyMap,
    /// For each ball of `tree`, the input ball it copies; `None` for spine
    /// balls and for the two-point sets formed from singleton members.
    pub origin: Vec<Option<BallId>>,
    /// Distinct positive values assigned, ascending.
    pub used: Vec<f64>,
}

/// A piece of the spine: a member of the partition or two singleton
/// members grouped into a two-point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Ball(BallId),
    Pair(BallId, BallId),
}

/// Builds the tree with pieces `P_1 … P_n` hung off the chain
/// `P_1 ∪ P_2 ⊂ P_1 ∪ P_2 ∪ P_3 ⊂ …`. `values` holds the Whitney value of
/// every input ball that lies inside a piece, `pair_values` one value per
/// `Pair` piece in order, and `spine[j]` the value of `P_1 ∪ … ∪ P_{j+2}`.
fn spine_tree(
    t: &BallTree,
    pieces: &[Piece],
    values: &[f64],
    pair_values: &[f64],
    spine: &[f64],
) -> Result<SynthesizedMetric> {
    let n = pieces.len();
    debug_assert!(n >= 2 && spine.len() == n - 1);
    let mut nodes: Vec<Node> = Vec::new();
    let mut origin: Vec<Option<BallId>> = Vec::new();

    // Spine nodes, root first: node j holds P_1 ∪ … ∪ P_{n-j}.
    for j in 0..n - 1 {
        let parent = j.checked_sub(1);
        nodes.push(Node::new(parent, spine[n - 2 - j], 0.0).with_kind(BallKind::Internal));
        origin.push(None);
    }
    // P_k hangs off P_1 ∪ … ∪ P_max(k,2).
    let spine_node = |k: usize| n - k.max(2);

    let mut pairs = pair_values.iter();
    let mut piece_measure = Vec::with_capacity(n);
    for (k, piece) in pieces.iter().enumerate() {
        let attach = spine_node(k + 1);
        match *piece {
            Piece::Ball(b) => {
                let base = nodes.len();
                for c in t.subtree(b) {
                    let parent = if c == b {
                        attach
                    } else {
                        base + (t.parent(c).expect("inside a subtree").index() - b.index())
                    };
                    nodes.push(Node::new(Some(parent), values[c.index()], t.measure(c)).with_kind(t.kind(c)));
                    origin.push(Some(c));
                }
                piece_measure.push(t.measure(b));
            }
            Piece::Pair(a, b) => {
                let v = *pairs.next().expect("one value per pair");
                let m = t.measure(a) + t.measure(b);
                let top = nodes.len();
                nodes.push(Node::new(Some(attach), v, m).with_kind(BallKind::Internal));
                origin.push(None);
                for x in [a, b] {
                    nodes.push(Node::new(Some(top), 0.0, t.measure(x)).with_kind(t.kind(x)));
                    origin.push(Some(x));
                }
                piece_measure.push(m);
            }
        }
    }
    let mut acc = piece_measure[0];
    for k in 1..n {
        acc += piece_measure[k];
        nodes[spine_node(k + 1)].measure = acc;
    }

    let (tree, map) = finalize_mapped(&nodes, false, t.tail_divergent())?;
    let mut w = vec![0.0; tree.len()];
    let mut out_origin = vec![None; tree.len()];
    for (i, node) in nodes.iter().enumerate() {
        w[map[i].index()] = node.diam;
        out_origin[map[i].index()] = origin[i];
    }
    let used = distinct_positive(&w);
    let w = WhitneyMap::new(&tree, w)?;
    Ok(SynthesizedMetric {
        tree,
        w,
        origin: out_origin,
        used,
    })
}

fn distinct_positive(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|&x| x > 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn identity(t: &BallTree, w: WhitneyMap) -> SynthesizedMetric {
    SynthesizedMetric {
        tree: t.clone(),
        used: distinct_positive(w.values()),
        w,
        origin: t.ball_ids().map(Some).collect(),
    }
}

/// The metric `d_Π`: `d` inside each member and `max(m, n)` between members
/// `P_m` and `P_n`. Interior values that reach the spine value at their
/// join are rescaled by the smallest power of 1/2 that puts them below it.
pub fn d_pi_metric(t: &BallTree, base_w: &WhitneyMap, part: &Partition) -> Result<SynthesizedMetric> {
    d_pi(t, base_w, part, true)
}

/// As [`d_pi_metric`] but fails with `SpineValueClash` instead of
/// rescaling.
pub fn d_pi_metric_strict(t: &BallTree, base_w: &WhitneyMap, part: &Partition) -> Result<SynthesizedMetric> {
    d_pi(t, base_w, part, false)
}

fn d_pi(t: &BallTree, base_w: &WhitneyMap, part: &Partition, rescale: bool) -> Result<SynthesizedMetric> {
    let n = part.len();
    if n == 1 {
        return Ok(identity(t, base_w.clone()));
    }
    let mut values = base_w.values().to_vec();
    for (k, &p) in part.members().iter().enumerate() {
        let join = (k + 1).max(2) as f64;
        let top = base_w.get(p);
        if top < join {
            continue;
        }
        if !rescale {
            return Err(Error::SpineValueClash {
                piece: k + 1,
                interior: top,
                spine: join,
            });
        }
        let mut factor = 1.0;
        while top * factor >= join {
            factor *= 0.5;
        }
        for c in t.subtree(p) {
            values[c.index()] *= factor;
        }
    }
    let pieces: Vec<Piece> = part.members().iter().map(|&b| Piece::Ball(b)).collect();
    let spine: Vec<f64> = (2..=n).map(|j| j as f64).collect();
    spine_tree(t, &pieces, &values, &[], &spine)
}

/// Tracks which values of `M` have been handed out as member or spine
/// values.
struct Pool<'a> {
    m: &'a ValueSet,
    taken: BTreeSet<usize>,
}

impl<'a> Pool<'a> {
    fn new(m: &'a ValueSet) -> Self {
        Pool {
            m,
            taken: BTreeSet::new(),
        }
    }

    /// Indices of untaken values strictly above `above`, ascending.
    fn free_above(&self, above: f64) -> impl Iterator<Item = usize> + '_ {
        let start = self.m.positive_values().partition_point(|&v| v <= above);
        (start..self.m.len()).filter(|i| !self.taken.contains(i))
    }

    fn take(&mut self, i: usize) -> f64 {
        self.taken.insert(i);
        self.m.positive_values()[i]
    }
}

/// Fills `out` on the balls strictly inside `top` (already set) with the
/// largest value of `M` below the parent's value and at most the base
/// diameter. Point leaves get 0.
fn assign_interior(t: &BallTree, m: &ValueSet, top: BallId, out: &mut [f64]) -> Result<()> {
    for c in t.subtree(top).skip(1) {
        if t.kind(c).is_point() {
            out[c.index()] = 0.0;
            continue;
        }
        let above = out[t.parent(c).expect("inside a subtree").index()];
        let cap = t.diam(c);
        out[c.index()] = m
            .largest_admissible(above, cap)
            .ok_or(Error::NoSmallValues {
                ball: c.index(),
                bound: above.min(cap),
            })?;
    }
    Ok(())
}

/// Gives a nondegenerate member the smallest free value of `M` for which
/// its interior can be filled, and fills the interior.
fn assign_member(t: &BallTree, pool: &mut Pool<'_>, p: BallId, out: &mut [f64]) -> Result<f64> {
    let mut last_err = None;
    let candidates: Vec<usize> = pool.free_above(0.0).collect();
    for i in candidates {
        out[p.index()] = pool.m.positive_values()[i];
        match assign_interior(t, pool.m, p, out) {
            Ok(()) => return Ok(pool.take(i)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::InsufficientValues(format!("no value of M left for member {p}"))
    }))
}

/// Groups singleton members into two-point sets in enumeration order; a
/// pair sits at the position of its first point. An odd leftover singleton
/// stays a degenerate piece.
fn pieces_of(t: &BallTree, part: &Partition) -> Vec<Piece> {
    let mut pieces = Vec::with_capacity(part.len());
    let mut open: Option<usize> = None;
    for &b in part.members() {
        if t.kind(b) != BallKind::Singleton {
            pieces.push(Piece::Ball(b));
            continue;
        }
        match open.take() {
            Some(slot) => {
                let Piece::Ball(a) = pieces[slot] else {
                    unreachable!("open slots hold single points")
                };
                pieces[slot] = Piece::Pair(a, b);
            }
            None => {
                open = Some(pieces.len());
                pieces.push(Piece::Ball(b));
            }
        }
    }
    pieces
}

/// Whitney map with values in `M` on the tree that joins the members of
/// `part` along a spine. A nonzero `rng_seed` shuffles the enumeration of
/// the pieces; seed 0 keeps partition order.
pub fn synthesize_whitney_t1(
    t: &BallTree,
    part: &Partition,
    m: &ValueSet,
    rng_seed: u64,
) -> Result<SynthesizedMetric> {
    let mut pieces = pieces_of(t, part);
    if pieces.len() < 2 {
        return Err(Error::InsufficientValues(
            "the spine needs at least two pieces".into(),
        ));
    }
    if rng_seed != 0 {
        pieces.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    }
    let mut pool = Pool::new(m);
    let mut values = vec![0.0; t.len()];
    let mut pair_values = Vec::new();
    let mut piece_values = Vec::with_capacity(pieces.len());
    for piece in &pieces {
        let v = match *piece {
            Piece::Ball(b) if t.is_nondegenerate(b) => assign_member(t, &mut pool, b, &mut values)?,
            Piece::Ball(_) => 0.0,
            Piece::Pair(a, _) => {
                let i = pool.free_above(0.0).next().ok_or_else(|| {
                    Error::InsufficientValues(format!("no value of M left for the pair at {a}"))
                })?;
                let v = pool.take(i);
                pair_values.push(v);
                v
            }
        };
        piece_values.push(v);
    }
    let mut spine = Vec::with_capacity(pieces.len() - 1);
    let mut prev = piece_values[0];
    for &v in &piece_values[1..] {
        let bound = prev.max(v);
        let i = pool.free_above(bound).next().ok_or_else(|| {
            Error::InsufficientValues(format!("no value of M above {bound} for the spine"))
        })?;
        prev = pool.take(i);
        spine.push(prev);
    }
    spine_tree(t, &pieces, &values, &pair_values, &spine)
}

/// Ball-preserving Whitney map with values in `M`: members get the `m_i`,
/// a ball made of members gets the smallest value of `M_{s(B)}` above its
/// children, and balls inside members are filled as in
/// [`synthesize_whitney_t1`]. `part` should come from
/// [`super::refine_partition`].
pub fn synthesize_whitney_t2(
    t: &BallTree,
    part: &Partition,
    m: &ValueSet,
    bins: &LevelBins,
) -> Result<SynthesizedMetric> {
    let mut pool = Pool::new(m);
    let mut values = vec![0.0; t.len()];
    let mut s = vec![0usize; t.len()];
    let mut inside = vec![false; t.len()];
    for &p in part.members() {
        for c in t.subtree(p) {
            inside[c.index()] = true;
        }
        if t.is_nondegenerate(p) {
            let v = assign_member(t, &mut pool, p, &mut values)?;
            s[p.index()] = bins.kappa(v).ok_or_else(|| {
                Error::InvalidParameter(format!("value {v} is not covered by the bins"))
            })?;
        }
    }
    for b in t.ball_ids().rev() {
        if inside[b.index()] {
            continue;
        }
        let kids = t.children(b);
        let sum: usize = kids.iter().map(|c| s[c.index()]).sum();
        s[b.index()] = sum;
        let floor = kids
            .iter()
            .map(|c| values[c.index()])
            .fold(0.0, f64::max);
        let bin = bins.bin(sum.max(1)).ok_or(Error::EmptyBin(sum.max(1)))?;
        let i = bin.partition_point(|&v| v <= floor);
        values[b.index()] = *bin.get(i).ok_or(Error::MonotonicityFailure(b.index()))?;
    }
    let w = WhitneyMap::new(t, values).map_err(|e| match e {
        Error::NonMonotoneWhitney { child } => Error::MonotonicityFailure(child),
        e => e,
    })?;
    Ok(identity(t, w))
}
