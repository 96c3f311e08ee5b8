//! Brute-force oracles written straight from the definitions, sharing no
//! code paths with the library beyond tree accessors.

#![allow(dead_code)]

use hilap::tree::{BallId, BallTree};
use hilap::ChoiceFunction;
use nalgebra::{DMatrix, SymmetricEigen};

/// `Σ_{T ⊇ B} C(T)` by scanning every ball, plus the tail rate.
pub fn lambda_by_scan(t: &BallTree, c: &ChoiceFunction, b: BallId) -> f64 {
    t.ball_ids()
        .filter(|&s| t.contains(s, b))
        .map(|s| c.rate(s))
        .sum::<f64>()
        + c.tail_rate()
}

/// Matrix of `f ↦ Σ_{B ∋ x} C(B)(f(x) - P_B f) + τ f(x)` on leaf values.
pub fn laplacian_matrix(t: &BallTree, c: &ChoiceFunction) -> DMatrix<f64> {
    let n = t.leaf_count();
    let leaves = t.leaves();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        m[(x, x)] += c.tail_rate();
        for b in t.ball_ids() {
            if t.kind(b).is_point() || !t.contains(b, leaves[x]) {
                continue;
            }
            let rate = c.rate(b);
            m[(x, x)] += rate;
            for y in 0..n {
                if t.contains(b, leaves[y]) {
                    m[(x, y)] -= rate * t.measure(leaves[y]) / t.measure(b);
                }
            }
        }
    }
    m
}

/// Eigenvalues of a matrix self-adjoint in `L²(m)`, ascending, via the
/// similarity `D^{1/2} M D^{-1/2}`.
pub fn weighted_eigenvalues(t: &BallTree, m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let w: Vec<f64> = t.leaves().iter().map(|&l| t.measure(l).sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| {
        let v = w[i] * m[(i, j)] / w[j];
        let u = w[j] * m[(j, i)] / w[i];
        0.5 * (u + v)
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Distinct values within a relative tolerance, with counts.
pub fn clusters(sorted: &[f64], rel: f64) -> Vec<(f64, usize)> {
    let scale = sorted.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() <= rel * scale => last.1 += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// `K Σ_{y ≠ x} (u(x) - u(y)) m(y) / d(x, y)^{1+α}` over the leaf cells of
/// a p-adic window, plus `u(x)` times the kernel mass outside the root
/// summed shell by shell.
pub fn singular_integral(
    t: &BallTree,
    p: u32,
    k_min: i32,
    alpha: f64,
    k: f64,
    u: &[f64],
) -> Vec<f64> {
    let n = t.leaf_count();
    let leaves = t.leaves();
    let pf = p as f64;
    let mut outer = 0.0;
    for j in (k_min - 400..k_min).rev() {
        let shell = pf.powi(-j) - pf.powi(-j - 1);
        outer += pf.powf(j as f64 * (1.0 + alpha)) * shell;
    }
    (0..n)
        .map(|x| {
            let mut s = u[x] * outer;
            for y in 0..n {
                if y == x {
                    continue;
                }
                let d = t.diam(t.meet(leaves[x], leaves[y]).unwrap());
                s += (u[x] - u[y]) * t.measure(leaves[y]) / d.powf(1.0 + alpha);
            }
            k * s
        })
        .collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `exp(-t M)` for `M` self-adjoint in `L²(m)`, through the symmetric
/// similarity and a dense eigendecomposition.
pub fn heat_matrix(t: &BallTree, m: &DMatrix<f64>, time: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let w: Vec<f64> = t.leaves().iter().map(|&l| t.measure(l).sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| w[i] * m[(i, j)] / w[j]);
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let damp = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-time * l).exp()));
    let e = &eig.eigenvectors * damp * eig.eigenvectors.transpose();
    DMatrix::from_fn(n, n, |i, j| e[(i, j)] * w[j] / w[i])
}
