use super::cell::CellFunction;
use crate::error::{Error, Result};
use crate::tree::{BallId, BallTree};

/// Orthonormal basis of `H_B` in child coordinates: each vector holds one
/// value per child of `b`. Built by Gram-Schmidt on `f_{C,B}` for the first
/// `l(B) - 1` children in child order.
pub(crate) fn child_basis(t: &BallTree, b: BallId) -> Result<Vec<Vec<f64>>> {
    t.check(b)?;
    if t.is_leaf(b) {
        return Err(Error::InvalidParameter(format!("ball {b} is a leaf")));
    }
    let kids = t.children(b);
    let mc: Vec<f64> = kids.iter().map(|&c| t.measure(c)).collect();
    if let Some(i) = mc.iter().position(|&m| m <= 0.0) {
        return Err(Error::ZeroMeasureBall(kids[i].index()));
    }
    let mb = t.measure(b);
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).zip(&mc).map(|((a, b), m)| a * b * m).sum() };
    let l = kids.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(l - 1);
    for i in 0..l - 1 {
        let mut v: Vec<f64> = (0..l)
            .map(|k| if k == i { 1.0 / mc[i] } else { 0.0 } - 1.0 / mb)
            .collect();
        // Two passes keep the basis orthogonal to rounding level.
        for _ in 0..2 {
            for e in &basis {
                let c = dot(&v, e);
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
        }
        let n = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    Ok(basis)
}

/// `l(B) - 1` m-orthonormal cell functions spanning the eigenspace of `B`.
pub fn eigenbasis(t: &BallTree, b: BallId) -> Result<Vec<CellFunction>> {
    let basis = child_basis(t, b)?;
    Ok(basis
        .iter()
        .map(|v| {
            let mut f = CellFunction::zeros(t);
            for (k, &c) in t.children(b).iter().enumerate() {
                for i in t.leaf_range(c) {
                    f.values_mut()[i] = v[k];
                }
            }
            f
        })
        .collect())
}
