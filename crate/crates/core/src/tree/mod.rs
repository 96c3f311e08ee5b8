//! Finite windows of the hierarchical lattice of balls of an ultrametric
//! measure space.
//!
//! A [`BallTree`] stores one record per ball: parent, children, diameter,
//! measure and depth. Ball ids are assigned in depth-first preorder, so the
//! subtree of a ball is a contiguous id range and its leaves are a
//! contiguous range of leaf positions. Leaves are either singleton points or
//! unresolved cells of positive diameter.

mod io;
mod partition;
mod spec;
mod whitney;

use std::ops::Range;

use crate::error::{Error, Result};

pub use io::{read_tree, write_tree};
pub use partition::{level_partition, Partition};
pub use spec::{ExplicitTree, Node, TreeSpec};
pub(crate) use spec::{finalize_mapped, is_prime};
pub use whitney::{distance, range_of_metric, whitney_from_lambda, WhitneyMap};

/// Absolute tolerance used for value comparisons throughout the crate.
pub const TOL: f64 = 1e-12;

/// Handle of a ball inside the tree that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallId(u32);

impl BallId {
    pub(crate) fn new(index: usize) -> Self {
        BallId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for BallId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of the window, represented by the leaf it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointId {
    leaf: BallId,
}

impl PointId {
    pub fn leaf(self) -> BallId {
        self.leaf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallKind {
    /// Non-singleton ball with children inside the window.
    Internal,
    /// Unresolved compact ball of positive diameter and measure.
    Cell,
    /// Isolated point carrying an atom.
    Singleton,
    /// Non-isolated point surrogate of measure zero.
    LimitPoint,
}

impl BallKind {
    pub fn flag(self) -> char {
        match self {
            BallKind::Internal => 'I',
            BallKind::Cell => 'C',
            BallKind::Singleton => 'S',
            BallKind::LimitPoint => 'Z',
        }
    }

    pub fn from_flag(c: char) -> Option<Self> {
        match c {
            'I' => Some(BallKind::Internal),
            'C' => Some(BallKind::Cell),
            'S' => Some(BallKind::Singleton),
            'Z' => Some(BallKind::LimitPoint),
            _ => None,
        }
    }

    /// True for the point-like leaves (zero diameter).
    pub fn is_point(self) -> bool {
        matches!(self, BallKind::Singleton | BallKind::LimitPoint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    parent: Option<BallId>,
    children: Vec<BallId>,
    diam: f64,
    measure: f64,
    level: usize,
    kind: BallKind,
    leaves: Range<usize>,
    subtree_end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallTree {
    balls: Vec<Ball>,
    leaves: Vec<BallId>,
    tail_divergent: bool,
}

impl BallTree {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn root(&self) -> BallId {
        BallId(0)
    }

    /// Declared divergence of the Whitney values above the window root.
    pub fn tail_divergent(&self) -> bool {
        self.tail_divergent
    }

    pub fn set_tail_divergent(&mut self, flag: bool) {
        self.tail_divergent = flag;
    }

    pub fn check(&self, b: BallId) -> Result<()> {
        if b.index() < self.balls.len() {
            Ok(())
        } else {
            Err(Error::foreign(b))
        }
    }

    pub fn ball_ids(&self) -> impl DoubleEndedIterator<Item = BallId> + ExactSizeIterator {
        (0..self.balls.len()).map(BallId::new)
    }

    pub fn parent(&self, b: BallId) -> Option<BallId> {
        self.balls[b.index()].parent
    }

    pub fn children(&self, b: BallId) -> &[BallId] {
        &self.balls[b.index()].children
    }

    pub fn diam(&self, b: BallId) -> f64 {
        self.balls[b.index()].diam
    }

    pub fn measure(&self, b: BallId) -> f64 {
        self.balls[b.index()].measure
    }

    /// Depth below the window root.
    pub fn level(&self, b: BallId) -> usize {
        self.balls[b.index()].level
    }

    pub fn kind(&self, b: BallId) -> BallKind {
        self.balls[b.index()].kind
    }

    pub fn is_leaf(&self, b: BallId) -> bool {
        self.balls[b.index()].children.is_empty()
    }

    pub fn is_internal(&self, b: BallId) -> bool {
        !self.is_leaf(b)
    }

    /// Non-singleton: internal balls and cells.
    pub fn is_nondegenerate(&self, b: BallId) -> bool {
        !self.kind(b).is_point()
    }

    /// Number of children, written l(B).
    pub fn branching(&self, b: BallId) -> usize {
        self.balls[b.index()].children.len()
    }

    /// Leaves in depth-first order; positions index [`crate::CellFunction`]s.
    pub fn leaves(&self) -> &[BallId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Positions of the leaves under `b`.
    pub fn leaf_range(&self, b: BallId) -> Range<usize> {
        self.balls[b.index()].leaves.clone()
    }

    pub fn leaf_position(&self, b: BallId) -> Option<usize> {
        if self.is_leaf(b) {
            Some(self.balls[b.index()].leaves.start)
        } else {
            None
        }
    }

    pub fn point(&self, leaf: BallId) -> Result<PointId> {
        self.check(leaf)?;
        if self.is_leaf(leaf) {
            Ok(PointId { leaf })
        } else {
            Err(Error::InvalidParameter(format!("ball {leaf} is not a leaf")))
        }
    }

    pub fn point_at(&self, position: usize) -> PointId {
        PointId {
            leaf: self.leaves[position],
        }
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.leaves.iter().map(|&leaf| PointId { leaf })
    }

    /// Balls of the subtree rooted at `b`, `b` first.
    pub fn subtree(&self, b: BallId) -> impl Iterator<Item = BallId> {
        (b.index()..self.balls[b.index()].subtree_end).map(BallId::new)
    }

    /// `outer ⊇ inner`.
    pub fn contains(&self, outer: BallId, inner: BallId) -> bool {
        let o = outer.index();
        o <= inner.index() && inner.index() < self.balls[o].subtree_end
    }

    /// The chain `b ⊂ parent(b) ⊂ … ⊂ root`, starting at `b`.
    pub fn chain(&self, b: BallId) -> Chain<'_> {
        Chain {
            tree: self,
            next: Some(b),
        }
    }

    /// Smallest ball containing both arguments.
    pub fn meet(&self, a: BallId, b: BallId) -> Result<BallId> {
        self.check(a)?;
        self.check(b)?;
        let (mut a, mut b) = (a, b);
        while self.level(a) > self.level(b) {
            a = self.parent(a).expect("non-root has a parent");
        }
        while self.level(b) > self.level(a) {
            b = self.parent(b).expect("non-root has a parent");
        }
        while a != b {
            a = self.parent(a).expect("distinct balls at equal depth are below the root");
            b = self.parent(b).expect("distinct balls at equal depth are below the root");
        }
        Ok(a)
    }

    pub fn depth(&self) -> usize {
        self.balls.iter().map(|b| b.level).max().unwrap_or(0)
    }

    pub fn balls_at_level(&self, level: usize) -> impl Iterator<Item = BallId> + '_ {
        self.ball_ids().filter(move |&b| self.level(b) == level)
    }

    pub fn internal_balls(&self) -> impl Iterator<Item = BallId> + '_ {
        self.ball_ids().filter(move |&b| self.is_internal(b))
    }

    pub fn has_cells(&self, b: BallId) -> bool {
        self.leaf_range(b)
            .any(|i| self.kind(self.leaves[i]) == BallKind::Cell)
    }

    /// Longest chain of internal balls strictly below `b` (0 when all
    /// children are leaves).
    pub fn internal_height(&self, b: BallId) -> usize {
        self.children(b)
            .iter()
            .filter(|&&c| self.is_internal(c))
            .map(|&c| 1 + self.internal_height(c))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn from_parts(balls: Vec<Ball>, leaves: Vec<BallId>, tail_divergent: bool) -> Self {
        BallTree {
            balls,
            leaves,
            tail_divergent,
        }
    }
}

pub struct Chain<'a> {
    tree: &'a BallTree,
    next: Option<BallId>,
}

impl Iterator for Chain<'_> {
    type Item = BallId;

    fn next(&mut self) -> Option<BallId> {
        let cur = self.next?;
        self.next = self.tree.parent(cur);
        Some(cur)
    }
}
