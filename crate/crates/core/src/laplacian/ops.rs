use super::cell::{averages, CellFunction};
use super::choice::{ChoiceFunction, Mode};
use crate::error::{Error, Result};
use crate::par;
use crate::tree::{BallId, BallKind, BallTree};

/// Relative tolerance for the zero-mean precondition of tail mode.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

pub(crate) fn require_mean_zero(t: &BallTree, f: &CellFunction) -> Result<()> {
    let mean = f.mean(t);
    let scale = f.norm_l1(t) / t.measure(t.root());
    if mean.abs() > MEAN_ZERO_TOL * scale {
        return Err(Error::NonZeroMeanInTailMode { mean });
    }
    Ok(())
}

fn check_len(t: &BallTree, f: &CellFunction) -> Result<()> {
    if f.len() == t.leaf_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: t.leaf_count(),
            got: f.len(),
        })
    }
}

/// `L_C f(x) = Σ_{x ∈ B ⊆ root} C(B)(f(x) - P_B f) + τ f(x)`.
pub fn apply(t: &BallTree, c: &ChoiceFunction, f: &CellFunction) -> Result<CellFunction> {
    c.check_tree(t)?;
    check_len(t, f)?;
    if c.mode() == Mode::MeanZeroTail {
        require_mean_zero(t, f)?;
    }
    Ok(CellFunction::from_vec(apply_unchecked(t, c, f.values())))
}

/// Linear extension of the operator to all inputs; in tail mode constants
/// are mapped to `τ` times themselves.
pub(crate) fn apply_unchecked(t: &BallTree, c: &ChoiceFunction, values: &[f64]) -> Vec<f64> {
    let avg = averages(t, values);
    // acc(B) = Σ_{B ⊆ T ⊆ root} C(T) P_T f over internal T
    let mut acc = vec![0.0; t.len()];
    for b in t.internal_balls() {
        let above = t.parent(b).map_or(0.0, |p| acc[p.index()]);
        acc[b.index()] = above + c.rate(b) * avg[b.index()];
    }
    let lam = c.lambdas();
    let leaves = t.leaves();
    par::map_range(leaves.len(), |i| match t.parent(leaves[i]) {
        Some(p) => lam[p.index()] * values[i] - acc[p.index()],
        None => c.tail_rate() * values[i],
    })
}

/// `f_{B,B'} = 1_B/m(B) - 1_{B'}/m(B')` for `B' = parent(B)`.
pub fn eigenfunction(t: &BallTree, b: BallId, bp: BallId) -> Result<CellFunction> {
    t.check(b)?;
    t.check(bp)?;
    if t.parent(b) != Some(bp) {
        return Err(Error::NotParentChild {
            child: b.index(),
            parent: bp.index(),
        });
    }
    let (mb, mp) = (t.measure(b), t.measure(bp));
    if mb <= 0.0 {
        return Err(Error::ZeroMeasureBall(b.index()));
    }
    let mut f = CellFunction::zeros(t);
    let v = f.values_mut();
    for i in t.leaf_range(bp) {
        v[i] = -1.0 / mp;
    }
    for i in t.leaf_range(b) {
        v[i] = 1.0 / mb - 1.0 / mp;
    }
    Ok(f)
}

/// Evaluates `L_C f_T = λ(T) f_T - Σ_{x ∈ B, T ⊆ B} C(B) f_B` for
/// `f_T = 1_T/m(T)` directly from the chain of `T`.
pub fn apply_ft_closed_form(t: &BallTree, c: &ChoiceFunction, target: BallId) -> Result<CellFunction> {
    t.check(target)?;
    c.check_tree(t)?;
    if c.mode() != Mode::Compact {
        return Err(Error::NonZeroMeanInTailMode {
            mean: 1.0 / t.measure(t.root()),
        });
    }
    let m_t = t.measure(target);
    if m_t <= 0.0 {
        return Err(Error::ZeroMeasureBall(target.index()));
    }
    if t.kind(target) == BallKind::Singleton {
        return Err(Error::LeafHasNoLambda(target.index()));
    }
    // s(B) = Σ_{B ⊆ T' ⊆ root} C(T')/m(T') along the chain of the target only.
    let chain: Vec<BallId> = t.chain(target).collect();
    let mut s = vec![0.0; chain.len()];
    let mut acc = 0.0;
    let mut lambda_t = 0.0;
    for (j, &b) in chain.iter().enumerate().rev() {
        acc += c.rate(b) / t.measure(b);
        lambda_t += c.rate(b);
        s[j] = acc;
    }
    let depth_t = t.level(target);
    let leaves = t.leaves();
    let values = par::map_range(leaves.len(), |i| {
        let m = t.meet(target, leaves[i]).expect("ids from this tree");
        let j = depth_t - t.level(m);
        let inside = if m == target { lambda_t / m_t } else { 0.0 };
        inside - s[j]
    });
    Ok(CellFunction::from_vec(values))
}
