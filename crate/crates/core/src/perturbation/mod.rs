//! Bernoulli perturbations of the order-one derivative on `Q_2`:
//! `C(B, ω) = C(B)(1 + δ ε(B))`, giving `λ(B, ω) = 2^{-l}(1 + δ U(B, ω))`
//! for a ball of diameter `2^l`, with `U(B) = Σ_{k≥1} 2^{-k} ε(B_k)` along
//! the ancestor chain `B = B_1 ⊂ B_2 ⊂ …`.
//!
//! Balls are addressed as [`DyadicBall`]s `(l, r)`: `l` is the diameter
//! exponent and `r` the index of the ball among the level-`l` balls of the
//! ball of the same level around 0, so the parent of `(l, r)` is
//! `(l + 1, r >> 1)`.

mod stats;

use crate::error::{Error, Result};
use crate::padic::FracDerivOp;
use crate::par;
use crate::tree::BallId;

pub use stats::{ks_distance_normal, moments, Moments};

pub const DEFAULT_TAIL_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    pub delta: f64,
    pub bern_p: f64,
    /// Ancestors above the window root included in the U-series.
    pub tail_depth: u32,
    pub seed: u64,
}

impl PerturbationConfig {
    pub fn new(delta: f64, bern_p: f64, tail_depth: u32, seed: u64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
        }
        if !(0.0..=1.0).contains(&bern_p) {
            return Err(Error::InvalidParameter(format!("bern_p = {bern_p} is not in [0, 1]")));
        }
        if tail_depth == 0 {
            return Err(Error::InvalidParameter("tail_depth must be at least 1".into()));
        }
        Ok(PerturbationConfig {
            delta,
            bern_p,
            tail_depth,
            seed,
        })
    }

    pub fn bern_q(&self) -> f64 {
        1.0 - self.bern_p
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PerturbationConfig { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicBall {
    pub level: i32,
    pub index: u64,
}

impl DyadicBall {
    pub fn new(level: i32, index: u64) -> Self {
        DyadicBall { level, index }
    }

    pub fn parent(self) -> Self {
        DyadicBall {
            level: self.level + 1,
            index: self.index >> 1,
        }
    }

    /// Ancestor `k` steps up.
    pub fn ancestor(self, k: u32) -> Self {
        DyadicBall {
            level: self.level + k as i32,
            index: self.index.checked_shr(k).unwrap_or(0),
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `ε(B)` as a pure function of the seed and the ball address.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonField {
    seed: u64,
    bern_p: f64,
}

impl EpsilonField {
    pub fn new(cfg: &PerturbationConfig) -> Self {
        EpsilonField {
            seed: cfg.seed,
            bern_p: cfg.bern_p,
        }
    }

    pub fn uniform(&self, b: DyadicBall) -> f64 {
        let h = splitmix64(splitmix64(splitmix64(self.seed) ^ b.level as i64 as u64) ^ b.index);
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn eps(&self, b: DyadicBall) -> bool {
        self.uniform(b) < self.bern_p
    }

    /// `Σ_{k=1}^{terms} 2^{-k} ε(B_k)`.
    pub fn u_series(&self, b: DyadicBall, terms: u32) -> f64 {
        let mut u = 0.0;
        let mut w = 0.5;
        for k in 0..terms {
            if self.eps(b.ancestor(k)) {
                u += w;
            }
            w *= 0.5;
        }
        u
    }
}

pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// `2^{-l}(1 + δ U_K)` for `K = terms`.
pub fn lambda_at(cfg: &PerturbationConfig, field: &EpsilonField, b: DyadicBall, terms: u32) -> f64 {
    pow2(-b.level) * (1.0 + cfg.delta * field.u_series(b, terms))
}

/// Address of a window ball, for windows of `Q_2` whose root contains 0.
pub fn dyadic_ball(op: &FracDerivOp, b: BallId) -> Result<DyadicBall> {
    let win = op.window();
    if win.p() != 2 {
        return Err(Error::WrongParameters);
    }
    let t = win.tree();
    t.check(b)?;
    let depth = t.level(b);
    let below = win.digit_count() - depth;
    Ok(DyadicBall {
        level: -(win.k_min() + depth as i32),
        index: (t.leaf_range(b).start >> below) as u64,
    })
}

/// Perturbed eigenvalue of a window ball. The series runs over the chain of
/// `b` inside the window and `tail_depth` ancestors above it; the
/// truncation error is at most `δ 2^{-l} 2^{-K}`.
pub fn lambda_perturbed(cfg: &PerturbationConfig, field: &EpsilonField, op: &FracDerivOp, b: BallId) -> Result<f64> {
    if op.alpha() != 1.0 || op.window().p() != 2 {
        return Err(Error::WrongParameters);
    }
    let db = dyadic_ball(op, b)?;
    let terms = op.window().tree().level(b) as u32 + 1 + cfg.tail_depth;
    Ok(lambda_at(cfg, field, db, terms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub level: i32,
    pub delta: f64,
    pub n_balls: usize,
    pub interval: (f64, f64),
    pub min: f64,
    pub max: f64,
    /// All values in `[2^{-l}, 2^{-l}(1 + δ)(1 + 1e-12)]`.
    pub all_in_interval: bool,
    /// Largest gap between consecutive sorted values, endpoints included,
    /// over the interval length.
    pub max_rel_gap: f64,
    /// `2^{-l+1} - 2^{-l}(1 + δ)`: positive when the level intervals are
    /// separated, zero when they abut.
    pub gap_to_next_level: f64,
    pub intervals_connected: bool,
    pub values: Vec<f64>,
}

/// Samples `λ(B, ω)` on `n_balls` level-`l` balls whose pairwise meets lie
/// at least `separation` levels up, so their first `separation` ε-terms are
/// independent. The enclosing window has `window_levels` levels above `l`.
pub fn coverage_experiment(
    cfg: &PerturbationConfig,
    l: i32,
    n_balls: usize,
    separation: u32,
    window_levels: u32,
) -> Result<CoverageReport> {
    if separation == 0 || window_levels > 62 {
        return Err(Error::InvalidParameter(format!(
            "separation {separation} and window_levels {window_levels} out of range"
        )));
    }
    let spread = separation - 1;
    let available = if window_levels >= spread {
        1u64 << (window_levels - spread)
    } else {
        0
    };
    if n_balls as u64 > available || n_balls == 0 {
        return Err(Error::NotEnoughBalls {
            requested: n_balls as u64,
            available,
        });
    }
    let field = EpsilonField::new(cfg);
    let terms = window_levels + 1 + cfg.tail_depth;
    let mut values = par::map_range(n_balls, |i| {
        lambda_at(cfg, &field, DyadicBall::new(l, (i as u64) << spread), terms)
    });
    values.sort_by(f64::total_cmp);
    let lo = pow2(-l);
    let hi = lo * (1.0 + cfg.delta);
    let len = hi - lo;
    let min = values[0];
    let max = values[values.len() - 1];
    let mut max_gap = (min - lo).max(hi - max);
    for w in values.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    let gap_to_next_level = pow2(-l + 1) - hi;
    Ok(CoverageReport {
        level: l,
        delta: cfg.delta,
        n_balls,
        interval: (lo, hi),
        min,
        max,
        all_in_interval: min >= lo && max <= hi * (1.0 + 1e-12),
        max_rel_gap: max_gap / len,
        gap_to_next_level,
        intervals_connected: gap_to_next_level <= 0.0,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEigStat {
    pub l: i32,
    pub big_l: i32,
    pub value: f64,
    pub u_value: f64,
}

/// `Ū(B_L)` for the ball `B_L` around 0, from level counts: the ancestors at
/// level `l + k - 1` inside `B_L` are shared by `2^{k-1}` level-`l` balls.
pub fn mean_u(field: &EpsilonField, l: i32, big_l: i32, tail_depth: u32) -> f64 {
    let m = (big_l - l) as u32;
    let mut u = 0.0;
    for k in 1..=m + 1 {
        let lev = l + k as i32 - 1;
        let count_balls = 1u64 << (m + 1 - k);
        let ones = (0..count_balls)
            .filter(|&r| field.eps(DyadicBall::new(lev, r)))
            .count();
        u += pow2(-(k as i32)) * ones as f64 / count_balls as f64;
    }
    for k in m + 2..=m + 1 + tail_depth {
        if field.eps(DyadicBall::new(l + k as i32 - 1, 0)) {
            u += pow2(-(k as i32));
        }
    }
    u
}

fn check_levels(l: i32, big_l: i32) -> Result<u32> {
    if big_l < l {
        return Err(Error::WindowTooShallow(format!(
            "enclosing level {big_l} is below level {l}"
        )));
    }
    let m = (big_l - l) as u32;
    if m > 30 {
        return Err(Error::InvalidParameter(format!("L - l = {m} exceeds 30")));
    }
    Ok(m)
}

/// The arithmetic mean of `λ(B, ω)` over the `2^{L-l}` level-`l` balls in
/// the ball of level `L` around 0.
pub fn mean_eig(cfg: &PerturbationConfig, field: &EpsilonField, l: i32, big_l: i32) -> Result<MeanEigStat> {
    check_levels(l, big_l)?;
    let u = mean_u(field, l, big_l, cfg.tail_depth);
    Ok(MeanEigStat {
        l,
        big_l,
        value: pow2(-l) * (1.0 + cfg.delta * u),
        u_value: u,
    })
}

/// `Var[Ū(B_L)]` for the truncated series, exactly:
/// `pq (Σ_{k≤m+1} 4^{-k} 2^{k-1-m} + Σ_{m+1<k≤K} 4^{-k})`.
pub fn exact_u_variance(bern_p: f64, m: u32, tail_depth: u32) -> f64 {
    let pq = bern_p * (1.0 - bern_p);
    let mut v = 0.0;
    for k in 1..=m + 1 {
        v += pow2(-2 * k as i32) * pow2(k as i32 - 1 - m as i32);
    }
    for k in m + 2..=m + 1 + tail_depth {
        v += pow2(-2 * k as i32);
    }
    pq * v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltSample {
    pub seed: u64,
    pub lambda_bar: f64,
    pub u_bar: f64,
    pub stat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub l: i32,
    pub big_l: i32,
    pub target_mean: f64,
    pub lambda_mean: f64,
    pub lambda_std_error: f64,
    /// `(mean - target) / standard error`.
    pub lln_z: f64,
    pub stat: Moments,
    /// Sup distance between the empirical CDF of the statistic and `Φ`.
    pub ks: f64,
    pub u_var: f64,
    /// `Var[Ū] / (pq 2^{-(L-l)})`.
    pub u_var_ratio: f64,
    /// Exact `Var[Ū]` of the truncated series.
    pub exact_u_var: f64,
    /// Sup distance after rescaling the statistic by the exact variance.
    pub ks_exact_scale: f64,
    pub samples: Vec<CltSample>,
}

pub fn sample_seed(base: u64, i: usize) -> u64 {
    splitmix64(base ^ splitmix64(i as u64))
}

/// Draws `n_samples` independent fields and reports the law of
/// `(λ̄ - 2^{-l}(1 + δp)) / (δ sqrt(2^{-L-l} pq))`.
pub fn clt_experiment(cfg: &PerturbationConfig, l: i32, big_l: i32, n_samples: usize) -> Result<CltReport> {
    let pq = cfg.bern_p * cfg.bern_q();
    if pq == 0.0 {
        return Err(Error::DegenerateBernoulli(cfg.bern_p));
    }
    let m = check_levels(l, big_l)?;
    if m < 8 {
        return Err(Error::WindowTooShallow(format!("L - l = {m} is below 8")));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!("n_samples = {n_samples} is below 1000")));
    }
    let target = pow2(-l) * (1.0 + cfg.delta * cfg.bern_p);
    let scale = cfg.delta * (pow2(-big_l - l) * pq).sqrt();
    let samples = par::map_range(n_samples, |i| {
        let seed = sample_seed(cfg.seed, i);
        let field = EpsilonField::new(&cfg.with_seed(seed));
        let s = mean_eig(cfg, &field, l, big_l).expect("levels checked");
        CltSample {
            seed,
            lambda_bar: s.value,
            u_bar: s.u_value,
            stat: (s.value - target) / scale,
        }
    });
    let lam: Vec<f64> = samples.iter().map(|s| s.lambda_bar).collect();
    let stat: Vec<f64> = samples.iter().map(|s| s.stat).collect();
    let ubar: Vec<f64> = samples.iter().map(|s| s.u_bar).collect();
    let lm = moments(&lam);
    let se = (lm.variance / n_samples as f64).sqrt();
    let sm = moments(&stat);
    let um = moments(&ubar);
    let exact = exact_u_variance(cfg.bern_p, m, cfg.tail_depth);
    let nominal = pq * pow2(-(m as i32));
    let rescale = (nominal / exact).sqrt();
    let rescaled: Vec<f64> = stat.iter().map(|z| z * rescale).collect();
    Ok(CltReport {
        n: n_samples,
        l,
        big_l,
        target_mean: target,
        lambda_mean: lm.mean,
        lambda_std_error: se,
        lln_z: (lm.mean - target) / se,
        ks: ks_distance_normal(&stat),
        stat: sm,
        u_var: um.variance,
        u_var_ratio: um.variance / nominal,
        exact_u_var: exact,
        ks_exact_scale: ks_distance_normal(&rescaled),
        samples,
    })
}
