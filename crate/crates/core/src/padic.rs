//! Windows of the coset tree of `Q_p` and the fractional derivative of
//! order `α`, in hierarchical form and as a Riemann-Liouville type singular
//! integral.
//!
//! Leaves are addressed by base-`p` digit strings `d_{k_min} … d_{k_max-1}`:
//! the leaf `a + p^{k_max} Z_p` with `a = Σ d_k p^k`. The first digit is the
//! most significant for leaf order.

use crate::error::{Error, Result};
use crate::laplacian::{
    self, alpha_tail, choice_alpha, integrals, require_mean_zero, CellFunction, ChoiceFunction, Mode,
    SpectrumEntry, SpectrumReport,
};
use crate::par;
use crate::tree::{BallTree, PointId, TreeSpec};

#[derive(Debug, Clone)]
pub struct PadicWindow {
    p: u32,
    k_min: i32,
    k_max: i32,
    tree: BallTree,
}

impl PadicWindow {
    pub fn new(p: u32, k_min: i32, k_max: i32) -> Result<Self> {
        let tree = TreeSpec::Padic { p, k_min, k_max }.build()?;
        Ok(PadicWindow { p, k_min, k_max, tree })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn tree(&self) -> &BallTree {
        &self.tree
    }

    pub fn digit_count(&self) -> usize {
        (self.k_max - self.k_min) as usize
    }

    /// Digits `d_{k_min} … d_{k_max-1}` of the leaf at `position`.
    pub fn leaf_digits(&self, position: usize) -> Vec<u32> {
        let n = self.digit_count();
        let mut out = vec![0; n];
        let mut rest = position;
        for slot in out.iter_mut().rev() {
            *slot = (rest % self.p as usize) as u32;
            rest /= self.p as usize;
        }
        out
    }

    pub fn leaf_of_digits(&self, digits: &[u32]) -> Result<PointId> {
        if digits.len() != self.digit_count() || digits.iter().any(|&d| d >= self.p) {
            return Err(Error::InvalidParameter(format!(
                "need {} base-{} digits",
                self.digit_count(),
                self.p
            )));
        }
        let pos = digits.iter().fold(0usize, |acc, &d| acc * self.p as usize + d as usize);
        Ok(self.tree.point_at(pos))
    }

    /// The leaf containing the integer `a`.
    pub fn leaf_of_integer(&self, a: i64) -> Result<PointId> {
        let p = self.p as i128;
        let top = self.k_max.max(0) as u32;
        let modulus = p.checked_pow(top).ok_or_else(|| Error::InvalidParameter("window too deep".into()))?;
        let r = (a as i128).rem_euclid(modulus);
        if self.k_min > 0 && r % p.pow(self.k_min as u32) != 0 {
            return Err(Error::InvalidParameter(format!(
                "{a} lies outside p^{} Z_p",
                self.k_min
            )));
        }
        let digits: Vec<u32> = (self.k_min..self.k_max)
            .map(|k| if k < 0 { 0 } else { ((r / p.pow(k as u32)) % p) as u32 })
            .collect();
        self.leaf_of_digits(&digits)
    }
}

/// `‖x - y‖_p` at window resolution.
pub fn padic_distance(win: &PadicWindow, x: PointId, y: PointId) -> Result<f64> {
    if x == y {
        win.tree.check(x.leaf())?;
        return Ok(0.0);
    }
    let m = win.tree.meet(x.leaf(), y.leaf())?;
    Ok((win.p as f64).powi(-(win.k_min + win.tree.level(m) as i32)))
}

/// The fractional derivative of order `α` on a window, acting on mean-zero
/// functions.
#[derive(Debug, Clone)]
pub struct FracDerivOp {
    window: PadicWindow,
    alpha: f64,
    choice: ChoiceFunction,
    rl_constant: f64,
}

impl FracDerivOp {
    pub fn new(window: PadicWindow, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::DivergentTail(alpha));
        }
        let choice = choice_alpha(&window.tree, window.p, alpha, Mode::MeanZeroTail)?;
        Ok(FracDerivOp {
            rl_constant: rl_constant(window.p, alpha),
            window,
            alpha,
            choice,
        })
    }

    pub fn window(&self) -> &PadicWindow {
        &self.window
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn choice(&self) -> &ChoiceFunction {
        &self.choice
    }

    pub fn rl_constant(&self) -> f64 {
        self.rl_constant
    }
}

/// Normalising constant of the singular integral that matches the
/// hierarchical rates `(1 - p^-α) diam^-α`: `(1 - p^-α) / (1 - p^{-α-1})`.
/// The classical constant `(p^α - 1)/(1 - p^{-α-1})` is `p^α` times this and
/// yields `p^α` times the same operator.
pub fn rl_constant(p: u32, alpha: f64) -> f64 {
    let pf = p as f64;
    (1.0 - pf.powf(-alpha)) / (1.0 - pf.powf(-alpha - 1.0))
}

pub fn classical_rl_constant(p: u32, alpha: f64) -> f64 {
    let pf = p as f64;
    (pf.powf(alpha) - 1.0) / (1.0 - pf.powf(-alpha - 1.0))
}

pub fn frac_deriv_apply(op: &FracDerivOp, u: &CellFunction) -> Result<CellFunction> {
    laplacian::apply(&op.window.tree, &op.choice, u)
}

/// Contributions of the region outside the window root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailScalars {
    /// `K Σ_{j<k_min} p^{j(1+α)} m(shell_j)`: the integral over the shells
    /// outside the root, per unit of `u(x)`.
    pub shell: f64,
    /// The same kernel regrouped by balls: `Σ_{T ⊋ root} m(T)(k(T) - k(T'))`
    /// with `k(T) = K diam(T)^{-1-α}`; this is the part acting as a scalar on
    /// mean-zero inputs.
    pub resummed: f64,
    /// Tail rate of the hierarchical form.
    pub tau: f64,
}

pub fn tail_scalars(op: &FracDerivOp) -> TailScalars {
    let pf = op.window.p as f64;
    let a = op.alpha;
    let k = op.window.k_min as f64;
    let q = pf.powf(-a);
    // Σ_{j<k} p^{jα} = p^{(k-1)α} / (1 - p^-α)
    let geo = pf.powf((k - 1.0) * a) / (1.0 - q);
    let shell = op.rl_constant * (1.0 - 1.0 / pf) * geo;
    // m(T_j) (p^{j(1+α)} - p^{(j-1)(1+α)}) = p^{jα}(1 - p^{-1-α})
    let resummed = op.rl_constant * (1.0 - pf.powf(-1.0 - a)) * geo;
    TailScalars {
        shell,
        resummed,
        tau: alpha_tail(op.window.p, a, op.window.k_min),
    }
}

/// `K ∫ (u(x) - u(y)) / ‖x - y‖^{1+α} dm(y)` as a finite shell sum along the
/// chain of each leaf, plus the closed-form outer shells.
pub fn riemann_liouville_apply(op: &FracDerivOp, u: &CellFunction) -> Result<CellFunction> {
    let t = &op.window.tree;
    if u.len() != t.leaf_count() {
        return Err(Error::LengthMismatch {
            expected: t.leaf_count(),
            got: u.len(),
        });
    }
    require_mean_zero(t, u)?;
    let pf = op.window.p as f64;
    let a = op.alpha;
    let k_min = op.window.k_min;
    let ints = integrals(t, u.values());
    let outer = tail_scalars(op).shell / op.rl_constant;
    let leaves = t.leaves();
    let values = par::map_range(leaves.len(), |i| {
        let ux = u.values()[i];
        let mut inner = leaves[i];
        let mut sum = ux * outer;
        while let Some(b) = t.parent(inner) {
            let j = (k_min + t.level(b) as i32) as f64;
            let shell_measure = t.measure(b) - t.measure(inner);
            let shell_integral = ints[b.index()] - ints[inner.index()];
            sum += pf.powf(j * (1.0 + a)) * (ux * shell_measure - shell_integral);
            inner = b;
        }
        op.rl_constant * sum
    });
    Ok(CellFunction::from_vec(values))
}

/// `λ = p^{kα}` with multiplicity `(p - 1)` per ball for every window
/// level, leaf cells included: a cell of level `k_max` carries the
/// eigenfunctions one level below the window.
pub fn spectrum_padic(op: &FracDerivOp) -> SpectrumReport {
    let t = &op.window.tree;
    let pf = op.window.p as f64;
    let entries = t
        .ball_ids()
        .map(|b| {
            let k = op.window.k_min + t.level(b) as i32;
            SpectrumEntry {
                ball: b,
                lambda: pf.powf(k as f64 * op.alpha),
                multiplicity: op.window.p as usize - 1,
                level: t.level(b),
            }
        })
        .collect();
    SpectrumReport {
        entries,
        includes_zero: false,
    }
}

/// `f_k`-type eigenfunctions of the window: `f_{B,B'}` for a child `B` of
/// `B'`, with eigenvalue `p^{k'α}` where `B'` sits at exponent `k'`.
pub fn padic_eigenfunction(op: &FracDerivOp, b: crate::tree::BallId) -> Result<(CellFunction, f64)> {
    let t = &op.window.tree;
    let parent = t
        .parent(b)
        .ok_or_else(|| Error::InvalidParameter("the root has no parent in the window".into()))?;
    let f = laplacian::eigenfunction(t, b, parent)?;
    let k = op.window.k_min + t.level(parent) as i32;
    Ok((f, (op.window.p as f64).powf(k as f64 * op.alpha)))
}
