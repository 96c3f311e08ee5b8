use crate::error::{Error, Result};
use crate::tree::{BallId, BallKind, BallTree, Partition};

/// Whether `b` holds an accumulation surrogate (a cell or a limit point).
pub fn is_infinite(t: &BallTree, b: BallId) -> bool {
    t.leaf_range(b)
        .any(|i| matches!(t.kind(t.leaves()[i]), BallKind::Cell | BallKind::LimitPoint))
}

fn children_all_points(t: &BallTree, b: BallId) -> bool {
    t.children(b).iter().all(|&c| t.kind(c).is_point())
}

/// Replaces every finite nondegenerate member whose children are not all
/// points by the first ball below it (in preorder) whose children are all
/// points, plus the remaining leaves of the member as singletons.
pub fn refine_partition(t: &BallTree, part: &Partition) -> Result<Partition> {
    if !part.members().iter().any(|&b| t.is_nondegenerate(b)) {
        return Err(Error::NoNondegenerateMember);
    }
    let mut members = Vec::with_capacity(part.len());
    for &b in part.members() {
        if !t.is_internal(b) || is_infinite(t, b) || children_all_points(t, b) {
            members.push(b);
            continue;
        }
        let core = t
            .subtree(b)
            .find(|&c| t.is_internal(c) && children_all_points(t, c))
            .expect("a finite subtree has a lowest internal ball");
        let inner = t.leaf_range(core);
        for i in t.leaf_range(b) {
            if i == inner.start {
                members.push(core);
            } else if !inner.contains(&i) {
                members.push(t.leaves()[i]);
            }
        }
    }
    Partition::new(t, members)
}
