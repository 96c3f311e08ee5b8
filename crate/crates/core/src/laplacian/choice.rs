use crate::error::{Error, Result};
use crate::tree::{BallId, BallTree, WhitneyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The window root is the whole space; constants are eigenfunctions
    /// with eigenvalue 0.
    Compact,
    /// Balls above the root contribute the scalar tail rate; inputs must
    /// have zero mean.
    MeanZeroTail,
}

/// Positive rates on the non-point balls of one tree, plus the analytic
/// tail rate of the balls above its root.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceFunction {
    rates: Vec<f64>,
    lambda: Vec<f64>,
    tail: f64,
    mode: Mode,
}

impl ChoiceFunction {
    /// `rates` is indexed by ball id; entries on point leaves are ignored.
    pub fn new(t: &BallTree, rates: Vec<f64>, tail: f64, mode: Mode) -> Result<Self> {
        if rates.len() != t.len() {
            return Err(Error::LengthMismatch {
                expected: t.len(),
                got: rates.len(),
            });
        }
        if !(tail.is_finite() && tail >= 0.0) || (mode == Mode::Compact && tail != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail rate {tail} is not admissible in {mode:?} mode"
            )));
        }
        let mut rates = rates;
        let mut lambda = vec![0.0; t.len()];
        for b in t.ball_ids() {
            if t.kind(b).is_point() {
                rates[b.index()] = 0.0;
                continue;
            }
            let r = rates[b.index()];
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rate {r} on ball {b} is not positive"
                )));
            }
            let above = t.parent(b).map_or(tail, |p| lambda[p.index()]);
            lambda[b.index()] = above + r;
        }
        Ok(ChoiceFunction {
            rates,
            lambda,
            tail,
            mode,
        })
    }

    pub fn rate(&self, b: BallId) -> f64 {
        self.rates[b.index()]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn tail_rate(&self) -> f64 {
        self.tail
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Cached chain sums; 0 on point leaves.
    pub(crate) fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub(crate) fn check_tree(&self, t: &BallTree) -> Result<()> {
        if self.rates.len() == t.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: t.len(),
                got: self.rates.len(),
            })
        }
    }
}

/// `C(B) = 1/w(B) - 1/w(parent)`, so that `λ(B) = 1/w(B)`. With `tail =
/// None` the root gets `1/w(root)` (compact); otherwise the root rate is
/// `1/w(root) - tail`.
pub fn choice_standard(t: &BallTree, w: &WhitneyMap, tail: Option<f64>) -> Result<ChoiceFunction> {
    let mut rates = vec![0.0; t.len()];
    for b in t.ball_ids() {
        if t.kind(b).is_point() {
            continue;
        }
        let wb = w.get(b);
        let r = match t.parent(b) {
            Some(p) => {
                if !(wb < w.get(p)) {
                    return Err(Error::NonMonotoneWhitney { child: b.index() });
                }
                1.0 / wb - 1.0 / w.get(p)
            }
            None => 1.0 / wb - tail.unwrap_or(0.0),
        };
        if !(r > 0.0) {
            return Err(Error::NonMonotoneWhitney { child: b.index() });
        }
        rates[b.index()] = r;
    }
    match tail {
        None => ChoiceFunction::new(t, rates, 0.0, Mode::Compact),
        Some(tau) => ChoiceFunction::new(t, rates, tau, Mode::MeanZeroTail),
    }
}

/// Level of `b` in a p-adic window, i.e. `k` with `diam(b) = p^-k`.
pub(crate) fn padic_exponent(t: &BallTree, p: u32) -> Result<i32> {
    let k = -(t.diam(t.root()).ln() / (p as f64).ln());
    let kr = k.round();
    if (k - kr).abs() > 1e-9 {
        return Err(Error::NotPadicTree(p));
    }
    Ok(kr as i32)
}

pub(crate) fn check_padic(t: &BallTree, p: u32) -> Result<i32> {
    if !crate::tree::is_prime(p) {
        return Err(Error::NotPadicTree(p));
    }
    let k_root = padic_exponent(t, p)?;
    let pf = p as f64;
    for b in t.ball_ids() {
        let expect = pf.powi(-(k_root + t.level(b) as i32));
        let rel = |x: f64| (x - expect).abs() <= 1e-12 * expect;
        let fan_ok = t.is_leaf(b) || t.branching(b) == p as usize;
        if !(rel(t.diam(b)) && rel(t.measure(b)) && fan_ok) || t.kind(b).is_point() {
            return Err(Error::NotPadicTree(p));
        }
    }
    Ok(k_root)
}

/// `C(B) = (1 - p^-α) diam(B)^-α` on a p-adic window, giving
/// `λ(B) = diam(B)^-α`. In tail mode the balls above the root add
/// `τ = p^{(k_root - 1)α}`; in compact mode that amount is folded into the
/// root rate so the window eigenvalues are the same.
pub fn choice_alpha(t: &BallTree, p: u32, alpha: f64, mode: Mode) -> Result<ChoiceFunction> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let k_root = check_padic(t, p)?;
    let pf = p as f64;
    let factor = 1.0 - pf.powf(-alpha);
    let mut rates: Vec<f64> = t
        .ball_ids()
        .map(|b| factor * t.diam(b).powf(-alpha))
        .collect();
    let tau = alpha_tail(p, alpha, k_root);
    match mode {
        Mode::MeanZeroTail => ChoiceFunction::new(t, rates, tau, mode),
        Mode::Compact => {
            rates[t.root().index()] += tau;
            ChoiceFunction::new(t, rates, 0.0, mode)
        }
    }
}

/// `Σ_{T ⊋ root} (1 - p^-α) diam(T)^-α` in closed form.
pub fn alpha_tail(p: u32, alpha: f64, k_root: i32) -> f64 {
    (p as f64).powf((k_root as f64 - 1.0) * alpha)
}

/// `λ(B) = Σ_{B ⊆ T ⊆ root} C(T) + τ`.
pub fn lambda_of(t: &BallTree, c: &ChoiceFunction, b: BallId) -> Result<f64> {
    t.check(b)?;
    c.check_tree(t)?;
    if t.kind(b).is_point() {
        return Err(Error::LeafHasNoLambda(b.index()));
    }
    Ok(c.lambdas()[b.index()])
}
