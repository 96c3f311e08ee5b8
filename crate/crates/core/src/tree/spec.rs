use std::str::FromStr;

use super::{Ball, BallId, BallKind, BallTree};
use crate::error::{Error, Result};

/// One ball of an explicit tree description. `kind` may be left out, in
/// which case leaves are classified from diameter and measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub diam: f64,
    pub measure: f64,
    pub kind: Option<BallKind>,
}

impl Node {
    pub fn new(parent: Option<usize>, diam: f64, measure: f64) -> Self {
        Node {
            parent,
            diam,
            measure,
            kind: None,
        }
    }

    pub fn with_kind(mut self, kind: BallKind) -> Self {
        self.kind = Some(kind);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitTree {
    pub nodes: Vec<Node>,
    /// Merge balls with a single child into that child instead of failing.
    pub collapse: bool,
    pub tail_divergent: bool,
}

impl ExplicitTree {
    pub fn new(nodes: Vec<Node>) -> Self {
        ExplicitTree {
            nodes,
            collapse: true,
            tail_divergent: false,
        }
    }
}

/// Recipe for a window.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeSpec {
    /// Cosets `p^k Z_p + a` for `k_min <= k <= k_max`; level-`k_max` balls
    /// are unresolved cells.
    Padic { p: u32, k_min: i32, k_max: i32 },
    /// Finite subgroups `G_k` of a direct sum of cyclic groups of the given
    /// orders and their cosets, with `d(x, y) = min{k : x - y in G_k}` and
    /// counting measure. `orders[0]` is the order of the innermost factor.
    CyclicGroup { orders: Vec<u32> },
    /// `{1..n}` with `d(m, n) = max(m, n)` for `m != n` and counting measure.
    NatDmax { n: usize },
    Explicit(ExplicitTree),
}

impl TreeSpec {
    pub fn binary(depth: usize) -> Self {
        TreeSpec::CyclicGroup {
            orders: vec![2; depth],
        }
    }

    pub fn build(&self) -> Result<BallTree> {
        match self {
            TreeSpec::Padic { p, k_min, k_max } => build_padic(*p, *k_min, *k_max),
            TreeSpec::CyclicGroup { orders } => build_cyclic(orders),
            TreeSpec::NatDmax { n } => build_nat_dmax(*n),
            TreeSpec::Explicit(e) => finalize(&e.nodes, e.collapse, e.tail_divergent),
        }
    }
}

/// Compact forms: `padic:P:KMIN:KMAX`, `binary:DEPTH`, `cyclic:O1,O2,...`,
/// `natdmax:N`.
impl FromStr for TreeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised tree shape `{s}`"));
        let mut parts = s.trim().split(':');
        let head = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let int = |x: &str| x.trim().parse::<i64>().map_err(|_| bad());
        match (head, rest.as_slice()) {
            ("padic", [p, a, b]) => Ok(TreeSpec::Padic {
                p: u32::try_from(int(p)?).map_err(|_| bad())?,
                k_min: i32::try_from(int(a)?).map_err(|_| bad())?,
                k_max: i32::try_from(int(b)?).map_err(|_| bad())?,
            }),
            ("binary", [d]) => Ok(TreeSpec::binary(
                usize::try_from(int(d)?).map_err(|_| bad())?,
            )),
            ("cyclic", [list]) => {
                let orders = list
                    .split(',')
                    .map(|x| int(x).and_then(|v| u32::try_from(v).map_err(|_| bad())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TreeSpec::CyclicGroup { orders })
            }
            ("natdmax", [n]) => Ok(TreeSpec::NatDmax {
                n: usize::try_from(int(n)?).map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Largest leaf count a generated shape may have.
pub const MAX_SHAPE_LEAVES: usize = 1 << 22;

fn check_leaves(leaves: Option<usize>) -> Result<usize> {
    match leaves {
        Some(n) if n <= MAX_SHAPE_LEAVES => Ok(n),
        n => Err(Error::WindowTooLarge {
            leaves: n.unwrap_or(usize::MAX),
            cap: MAX_SHAPE_LEAVES,
        }),
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn build_padic(p: u32, k_min: i32, k_max: i32) -> Result<BallTree> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
    }
    if k_min >= k_max {
        return Err(Error::InvalidParameter(format!(
            "need k_min < k_max, got {k_min} >= {k_max}"
        )));
    }
    let pf = p as f64;
    let levels = k_max.abs_diff(k_min);
    check_leaves((p as usize).checked_pow(levels))?;
    let total: usize = (0..=levels).map(|j| (p as usize).pow(j)).sum();
    let mut nodes = Vec::with_capacity(total);
    // Breadth-first: level j occupies a contiguous block.
    let mut prev_start = 0;
    for j in 0..=levels {
        let k = k_min + j as i32;
        let size = pf.powi(-k);
        let count = (p as usize).pow(j);
        let start = nodes.len();
        for i in 0..count {
            let parent = (j > 0).then(|| prev_start + i / p as usize);
            let mut node = Node::new(parent, size, size);
            if j == levels {
                node.kind = Some(BallKind::Cell);
            }
            nodes.push(node);
        }
        prev_start = start;
    }
    finalize(&nodes, false, true)
}

fn build_cyclic(orders: &[u32]) -> Result<BallTree> {
    if orders.is_empty() {
        return Err(Error::InvalidParameter("need at least one factor".into()));
    }
    if let Some(&o) = orders.iter().find(|&&o| o < 2) {
        return Err(Error::InvalidParameter(format!("factor order {o} < 2")));
    }
    let depth = orders.len();
    check_leaves(orders.iter().try_fold(1usize, |n, &o| n.checked_mul(o as usize)))?;
    // sizes[k] = |G_k|
    let mut sizes = vec![1.0f64; depth + 1];
    for k in 1..=depth {
        sizes[k] = sizes[k - 1] * orders[k - 1] as f64;
    }
    let mut nodes = Vec::new();
    let mut prev_start = 0;
    let mut count = 1usize;
    for j in 0..=depth {
        let k = depth - j;
        let start = nodes.len();
        let fan = if j > 0 { orders[k] as usize } else { 1 };
        if j > 0 {
            count *= fan;
        }
        for i in 0..count {
            let parent = (j > 0).then(|| prev_start + i / fan);
            nodes.push(Node::new(parent, k as f64, sizes[k]));
        }
        prev_start = start;
    }
    finalize(&nodes, false, true)
}

fn build_nat_dmax(n: usize) -> Result<BallTree> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("natdmax needs n >= 2, got {n}")));
    }
    check_leaves(Some(n))?;
    // Chain {1..n} ⊃ {1..n-1} ⊃ … ⊃ {1,2}; {m} hangs off {1..m} for m >= 3.
    let mut nodes = Vec::with_capacity(2 * n - 1);
    nodes.push(Node::new(None, n as f64, n as f64));
    let mut chain = 0;
    for m in (3..=n).rev() {
        let next = nodes.len();
        nodes.push(Node::new(Some(chain), (m - 1) as f64, (m - 1) as f64));
        nodes.push(Node::new(Some(chain), 0.0, 1.0));
        chain = next;
    }
    nodes.push(Node::new(Some(chain), 0.0, 1.0));
    nodes.push(Node::new(Some(chain), 0.0, 1.0));
    finalize(&nodes, false, true)
}

fn leaf_kind(i: usize, node: &Node) -> Result<BallKind> {
    let inferred = if node.diam > 0.0 {
        BallKind::Cell
    } else if node.measure > 0.0 {
        BallKind::Singleton
    } else {
        BallKind::LimitPoint
    };
    let kind = node.kind.unwrap_or(inferred);
    let ok = match kind {
        BallKind::Internal => false,
        BallKind::Cell => node.diam > 0.0 && node.measure > 0.0,
        BallKind::Singleton => node.diam == 0.0 && node.measure > 0.0,
        BallKind::LimitPoint => node.diam == 0.0 && node.measure == 0.0,
    };
    if ok {
        Ok(kind)
    } else {
        Err(Error::MalformedTree(format!(
            "leaf {i} flagged {:?} has diam {} and measure {}",
            kind, node.diam, node.measure
        )))
    }
}

/// Validates a parent-pointer description and renumbers it in preorder.
pub(crate) fn finalize(nodes: &[Node], collapse: bool, tail_divergent: bool) -> Result<BallTree> {
    finalize_mapped(nodes, collapse, tail_divergent).map(|(t, _)| t)
}

/// As [`finalize`], also returning the ball each input node ended up in
/// (collapsed nodes map to their surviving descendant).
pub(crate) fn finalize_mapped(
    nodes: &[Node],
    collapse: bool,
    tail_divergent: bool,
) -> Result<(BallTree, Vec<BallId>)> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::MalformedTree("no balls".into()));
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut root = None;
    for (i, node) in nodes.iter().enumerate() {
        if !(node.diam.is_finite() && node.diam >= 0.0) {
            return Err(Error::MalformedTree(format!("ball {i} has diameter {}", node.diam)));
        }
        if !(node.measure.is_finite() && node.measure >= 0.0) {
            return Err(Error::MalformedTree(format!("ball {i} has measure {}", node.measure)));
        }
        match node.parent {
            None if root.is_some() => {
                return Err(Error::MalformedTree(format!("second root at ball {i}")))
            }
            None => root = Some(i),
            Some(p) if p >= n || p == i => {
                return Err(Error::MalformedTree(format!("ball {i} has invalid parent {p}")))
            }
            Some(p) => children[p].push(i),
        }
    }
    let root = root.ok_or_else(|| Error::MalformedTree("no root".into()))?;

    let mut kinds = vec![BallKind::Internal; n];
    for i in 0..n {
        let node = &nodes[i];
        if children[i].is_empty() {
            kinds[i] = leaf_kind(i, node)?;
            continue;
        }
        if matches!(node.kind, Some(k) if k != BallKind::Internal) {
            return Err(Error::MalformedTree(format!("ball {i} has children but is flagged as a leaf")));
        }
        if children[i].len() == 1 && !collapse {
            return Err(Error::SingleChildBall(i));
        }
        if node.measure <= 0.0 {
            return Err(Error::ZeroMeasureBall(i));
        }
        let mut sum = 0.0;
        for &c in &children[i] {
            if !(nodes[c].diam < node.diam) {
                return Err(Error::NonMonotoneDiameter {
                    child: c,
                    child_diam: nodes[c].diam,
                    parent_diam: node.diam,
                });
            }
            sum += nodes[c].measure;
        }
        if (node.measure - sum).abs() > 1e-12 * node.measure.max(sum) {
            return Err(Error::NonAdditiveMeasure {
                ball: i,
                measure: node.measure,
                sum,
            });
        }
    }

    // Preorder renumbering, skipping single-child balls.
    let mut balls: Vec<Ball> = Vec::with_capacity(n);
    let mut stack: Vec<(usize, Option<usize>)> = vec![(root, None)];
    let mut seen = 0usize;
    let mut map = vec![BallId::new(0); n];
    while let Some((mut v, parent)) = stack.pop() {
        seen += 1;
        let id = balls.len();
        map[v] = BallId::new(id);
        while children[v].len() == 1 {
            v = children[v][0];
            map[v] = BallId::new(id);
            seen += 1;
        }
        let level = parent.map_or(0, |p| balls[p].level + 1);
        balls.push(Ball {
            parent: parent.map(BallId::new),
            children: Vec::with_capacity(children[v].len()),
            diam: nodes[v].diam,
            measure: nodes[v].measure,
            level,
            kind: kinds[v],
            leaves: 0..0,
            subtree_end: id + 1,
        });
        if let Some(p) = parent {
            balls[p].children.push(BallId::new(id));
        }
        for &c in children[v].iter().rev() {
            stack.push((c, Some(id)));
        }
        if seen > n {
            break;
        }
    }
    if seen != n {
        return Err(Error::MalformedTree("parent links contain a cycle".into()));
    }

    let mut leaves = Vec::new();
    for (i, b) in balls.iter_mut().enumerate() {
        if b.children.is_empty() {
            b.leaves = leaves.len()..leaves.len() + 1;
            leaves.push(BallId::new(i));
        }
    }
    for i in (0..balls.len()).rev() {
        if let (Some(&first), Some(&last)) = (balls[i].children.first(), balls[i].children.last()) {
            let start = balls[first.index()].leaves.start;
            let end = balls[last.index()].leaves.end;
            let sub_end = balls[last.index()].subtree_end;
            balls[i].leaves = start..end;
            balls[i].subtree_end = sub_end;
        }
    }
    Ok((BallTree::from_parts(balls, leaves, tail_divergent), map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_counts_and_sizes() {
        let t = TreeSpec::Padic {
            p: 2,
            k_min: -2,
            k_max: 2,
        }
        .build()
        .unwrap();
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
    fn nat_dmax_is_a_comb() {
        let t = TreeSpec::NatDmax { n: 4 }.build().unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t.leaf_count(), 4);
        let diams: Vec<f64> = t.internal_balls().map(|b| t.diam(b)).collect();
        assert_eq!(diams, vec![4.0, 3.0, 2.0]);
        assert!(t.leaves().iter().all(|&l| t.kind(l) == BallKind::Singleton));
        assert_eq!(t.leaf_range(t.children(t.root())[0]), 0..3);
    }

    #[test]
    fn smallest_explicit_tree() {
        let t = TreeSpec::Explicit(ExplicitTree::new(vec![
            Node::new(None, 1.0, 1.0),
            Node::new(Some(0), 0.0, 0.5),
            Node::new(Some(0), 0.0, 0.5),
        ]))
        .build()
        .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn explicit_errors() {
        let bad_diam = ExplicitTree::new(vec![
            Node::new(None, 1.0, 1.0),
            Node::new(Some(0), 2.0, 0.5),
            Node::new(Some(0), 0.0, 0.5),
        ]);
        assert!(matches!(
            TreeSpec::Explicit(bad_diam).build(),
            Err(Error::NonMonotoneDiameter { child: 1, .. })
        ));
        let bad_measure = ExplicitTree::new(vec![
            Node::new(None, 1.0, 1.0),
            Node::new(Some(0), 0.0, 0.5),
            Node::new(Some(0), 0.0, 0.6),
        ]);
        assert!(matches!(
            TreeSpec::Explicit(bad_measure).build(),
            Err(Error::NonAdditiveMeasure { ball: 0, .. })
        ));
        let mut single = ExplicitTree::new(vec![
            Node::new(None, 2.0, 1.0),
            Node::new(Some(0), 1.0, 1.0),
            Node::new(Some(1), 0.0, 0.5),
            Node::new(Some(1), 0.0, 0.5),
        ]);
        single.collapse = false;
        assert_eq!(
            TreeSpec::Explicit(single.clone()).build().unwrap_err(),
            Error::SingleChildBall(0)
        );
        single.collapse = true;
        let t = TreeSpec::Explicit(single).build().unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.diam(t.root()), 1.0);
    }

    #[test]
    fn cycles_are_rejected() {
        let e = ExplicitTree::new(vec![
            Node::new(None, 3.0, 1.0),
            Node::new(Some(0), 0.0, 0.5),
            Node::new(Some(0), 0.0, 0.5),
            Node::new(Some(4), 1.0, 1.0),
            Node::new(Some(3), 0.5, 1.0),
        ]);
        assert!(TreeSpec::Explicit(e).build().is_err());
    }

    #[test]
    fn parse_compact_forms() {
        assert_eq!(
            "padic:2:-2:2".parse::<TreeSpec>().unwrap(),
            TreeSpec::Padic {
                p: 2,
                k_min: -2,
                k_max: 2
            }
        );
        assert_eq!("binary:3".parse::<TreeSpec>().unwrap(), TreeSpec::binary(3));
        assert!("padic:2".parse::<TreeSpec>().is_err());
        let t = "cyclic:2,3".parse::<TreeSpec>().unwrap().build().unwrap();
        assert_eq!(t.leaf_count(), 6);
        assert_eq!(t.branching(t.root()), 3);
        assert_eq!(t.measure(t.root()), 6.0);
    }

    #[test]
    fn oversized_shapes_are_refused_before_allocation() {
        for s in ["padic:2:-20:20", "binary:40", "cyclic:65536,65536,65536", "padic:3:0:60"] {
            let e = s.parse::<TreeSpec>().unwrap().build().unwrap_err();
            assert!(matches!(e, Error::WindowTooLarge { cap: MAX_SHAPE_LEAVES, .. }), "{s}: {e}");
        }
    }
}
