use nalgebra::{DMatrix, SymmetricEigen};

use super::choice::ChoiceFunction;
use super::ops::apply_unchecked;
use crate::error::{Error, Result};
use crate::par;
use crate::tree::BallTree;

pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Matrix of the operator in the leaf basis, built column by column from
/// indicator functions. In tail mode this is the linear extension that
/// agrees with [`super::apply`] on mean-zero inputs and sends constants to
/// `τ` times themselves, so its spectrum is the window spectrum plus `τ`.
pub fn assemble_dense(t: &BallTree, c: &ChoiceFunction, cap: usize) -> Result<DMatrix<f64>> {
    c.check_tree(t)?;
    let n = t.leaf_count();
    if n > cap {
        return Err(Error::WindowTooLarge { leaves: n, cap });
    }
    let columns = par::map_range(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        apply_unchecked(t, c, &e)
    });
    Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

/// `max |m_i M_ij - m_j M_ji|`.
pub fn weighted_asymmetry(t: &BallTree, m: &DMatrix<f64>) -> f64 {
    let w: Vec<f64> = t.leaves().iter().map(|&l| t.measure(l)).collect();
    let n = w.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((w[i] * m[(i, j)] - w[j] * m[(j, i)]).abs());
        }
    }
    worst
}

/// Eigenvalues, ascending, of a matrix that is self-adjoint for the
/// m-weighted inner product, via the symmetric similarity transform
/// `D^{1/2} M D^{-1/2}`.
pub fn dense_eigenvalues(t: &BallTree, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let sq: Vec<f64> = t.leaves().iter().map(|&l| t.measure(l).sqrt()).collect();
    if let Some(pos) = sq.iter().position(|&s| s == 0.0) {
        return Err(Error::ZeroMeasureBall(t.leaves()[pos].index()));
    }
    let s = DMatrix::from_fn(n, n, |i, j| {
        let a = sq[i] * m[(i, j)] / sq[j];
        let b = sq[j] * m[(j, i)] / sq[i];
        0.5 * (a + b)
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Groups sorted values whose consecutive gaps are at most `tol`;
/// returns `(mean, count)` per group.
pub fn cluster(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in sorted {
        match out.last_mut() {
            Some((sum, count)) if v - last <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => out.push((v, 1)),
        }
        last = v;
    }
    out.into_iter().map(|(s, c)| (s / c as f64, c)).collect()
}
