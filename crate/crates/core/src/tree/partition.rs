use super::{BallId, BallTree};
use crate::error::{Error, Result};

/// A maximal antichain of balls: every leaf lies under exactly one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    members: Vec<BallId>,
}

impl Partition {
    pub fn new(t: &BallTree, members: Vec<BallId>) -> Result<Self> {
        let mut covered = vec![false; t.leaf_count()];
        for &m in &members {
            t.check(m)?;
            for i in t.leaf_range(m) {
                if covered[i] {
                    return Err(Error::InvalidPartition(format!(
                        "member {m} overlaps another member"
                    )));
                }
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidPartition(format!(
                "leaf {} is not covered",
                t.leaves()[i]
            )));
        }
        Ok(Partition { members })
    }

    pub fn members(&self) -> &[BallId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the member containing `b`, if `b` lies inside a member.
    pub fn member_of(&self, t: &BallTree, b: BallId) -> Option<usize> {
        self.members.iter().position(|&m| t.contains(m, b))
    }
}

/// All balls at `level` together with the leaves sitting above it.
pub fn level_partition(t: &BallTree, level: usize) -> Result<Partition> {
    let max = t.depth();
    if level > max {
        return Err(Error::LevelOutOfRange { level, max });
    }
    let members = t
        .ball_ids()
        .filter(|&b| t.level(b) == level || (t.level(b) < level && t.is_leaf(b)))
        .collect();
    Ok(Partition { members })
}
