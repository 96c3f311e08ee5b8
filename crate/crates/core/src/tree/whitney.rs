use super::{BallId, BallTree, PointId, TOL};
use crate::error::{Error, Result};

/// Nonnegative values on balls, strictly monotone along inclusion and zero
/// exactly on point leaves. Induces the ultrametric `w(x ∧ y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyMap {
    values: Vec<f64>,
}

impl WhitneyMap {
    pub fn new(t: &BallTree, values: Vec<f64>) -> Result<Self> {
        if values.len() != t.len() {
            return Err(Error::LengthMismatch {
                expected: t.len(),
                got: values.len(),
            });
        }
        for b in t.ball_ids() {
            let v = values[b.index()];
            let point = t.kind(b).is_point();
            if !v.is_finite() || v < 0.0 || (v == 0.0) != point {
                return Err(Error::NonMonotoneWhitney { child: b.index() });
            }
            if let Some(p) = t.parent(b) {
                if !(v < values[p.index()]) {
                    return Err(Error::NonMonotoneWhitney { child: b.index() });
                }
            }
        }
        Ok(WhitneyMap { values })
    }

    /// The diameter map of the tree itself.
    pub fn from_diam(t: &BallTree) -> Self {
        WhitneyMap {
            values: t.ball_ids().map(|b| t.diam(b)).collect(),
        }
    }

    pub fn get(&self, b: BallId) -> f64 {
        self.values[b.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn distance(t: &BallTree, w: &WhitneyMap, x: PointId, y: PointId) -> Result<f64> {
    if x == y {
        t.check(x.leaf())?;
        return Ok(0.0);
    }
    Ok(w.get(t.meet(x.leaf(), y.leaf())?))
}

/// `w = 1/lam` on non-point balls and 0 on point leaves. `lam` is indexed by
/// ball id; entries for point leaves are ignored.
pub fn whitney_from_lambda(t: &BallTree, lam: &[f64]) -> Result<WhitneyMap> {
    if lam.len() != t.len() {
        return Err(Error::LengthMismatch {
            expected: t.len(),
            got: lam.len(),
        });
    }
    let mut values = vec![0.0; t.len()];
    for b in t.ball_ids() {
        if t.kind(b).is_point() {
            continue;
        }
        let l = lam[b.index()];
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::NonMonotoneLambda { child: b.index() });
        }
        if let Some(p) = t.parent(b) {
            if !(l > lam[p.index()]) {
                return Err(Error::NonMonotoneLambda { child: b.index() });
            }
        }
        values[b.index()] = 1.0 / l;
    }
    Ok(WhitneyMap { values })
}

/// Distance values realised in the window: `w` on every non-point ball
/// (a cell contains points at its own distance), plus 0.
pub fn range_of_metric(t: &BallTree, w: &WhitneyMap) -> Vec<f64> {
    let mut out: Vec<f64> = t
        .ball_ids()
        .filter(|&b| t.is_nondegenerate(b))
        .map(|b| w.get(b))
        .collect();
    out.push(0.0);
    sort_dedup(&mut out);
    out
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= TOL);
}
