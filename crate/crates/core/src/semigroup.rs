//! The heat semigroup `P_t = exp(-t L_C)`, evaluated by spectral expansion
//! and by integrating ball averages against the isotropic measure along the
//! chain of each point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laplacian::{averages, child_basis, integrals, require_mean_zero, CellFunction, ChoiceFunction, Mode};
use crate::par;
use crate::tree::BallTree;

#[derive(Debug, Clone, Copy)]
pub struct HeatOperator<'a> {
    tree: &'a BallTree,
    choice: &'a ChoiceFunction,
    time: f64,
}

impl<'a> HeatOperator<'a> {
    pub fn new(tree: &'a BallTree, choice: &'a ChoiceFunction, time: f64) -> Result<Self> {
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidParameter(format!("time {time} must be >= 0")));
        }
        if choice.len() != tree.len() {
            return Err(Error::LengthMismatch {
                expected: tree.len(),
                got: choice.len(),
            });
        }
        Ok(HeatOperator { tree, choice, time })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn at(&self, time: f64) -> Result<Self> {
        Self::new(self.tree, self.choice, time)
    }

    fn precheck(&self, f: &CellFunction) -> Result<()> {
        if f.len() != self.tree.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: self.tree.leaf_count(),
                got: f.len(),
            });
        }
        if self.choice.mode() == Mode::MeanZeroTail {
            require_mean_zero(self.tree, f)?;
        }
        Ok(())
    }

    fn lambda(&self, b: crate::tree::BallId) -> f64 {
        crate::laplacian::lambda_of(self.tree, self.choice, b).expect("internal ball")
    }

    pub fn apply_spectral(&self, f: &CellFunction) -> Result<CellFunction> {
        heat_apply_spectral(self, f)
    }

    pub fn apply_integral(&self, f: &CellFunction) -> Result<CellFunction> {
        heat_apply_integral(self, f)
    }
}

/// Expands `f` in the orthonormal eigenbasis and damps the component in the
/// eigenspace of `B` by `exp(-t λ(B))`.
pub fn heat_apply_spectral(h: &HeatOperator<'_>, f: &CellFunction) -> Result<CellFunction> {
    h.precheck(f)?;
    let t = h.tree;
    let ints = integrals(t, f.values());
    let internal: Vec<_> = t.internal_balls().collect();
    // Per internal ball: damped coefficients pushed back to child values.
    let contributions = par::map_slice(&internal, |&b| -> Result<Vec<f64>> {
        let basis = child_basis(t, b)?;
        let decay = (-h.time * h.lambda(b)).exp();
        let kids = t.children(b);
        let mut out = vec![0.0; kids.len()];
        for e in &basis {
            let coeff: f64 = kids.iter().zip(e).map(|(c, v)| v * ints[c.index()]).sum();
            for (o, v) in out.iter_mut().zip(e) {
                *o += decay * coeff * v;
            }
        }
        Ok(out)
    });
    let mut child_value = vec![0.0; t.len()];
    for (&b, contrib) in internal.iter().zip(contributions) {
        for (&c, v) in t.children(b).iter().zip(contrib?) {
            child_value[c.index()] = v;
        }
    }
    let constant = match h.choice.mode() {
        Mode::Compact => ints[t.root().index()] / t.measure(t.root()),
        Mode::MeanZeroTail => 0.0,
    };
    // acc(B) = Σ over balls strictly above B on the chain of their
    // component values at the child containing B.
    let mut acc = vec![0.0; t.len()];
    for b in t.ball_ids() {
        if let Some(p) = t.parent(b) {
            acc[b.index()] = acc[p.index()] + child_value[b.index()];
        }
    }
    let values = t.leaves().iter().map(|&l| constant + acc[l.index()]).collect();
    Ok(CellFunction::from_vec(values))
}

/// `P_t f(x) = e^{-tλ(B_1)} f(x) + Σ_j (e^{-tλ(B_{j+1})} - e^{-tλ(B_j)}) P_{B_j} f
/// + (1 - e^{-tλ(root)}) P_root f` along the chain `x ∈ B_1 ⊂ … ⊂ root`.
pub fn heat_apply_integral(h: &HeatOperator<'_>, f: &CellFunction) -> Result<CellFunction> {
    h.precheck(f)?;
    let t = h.tree;
    let avg = averages(t, f.values());
    let decay: Vec<f64> = t
        .ball_ids()
        .map(|b| {
            if t.is_internal(b) {
                (-h.time * h.lambda(b)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let top_avg = match h.choice.mode() {
        Mode::Compact => avg[t.root().index()],
        Mode::MeanZeroTail => 0.0,
    };
    let leaves = t.leaves();
    let values = par::map_range(leaves.len(), |i| {
        let x = leaves[i];
        let Some(b1) = t.parent(x) else {
            return f.values()[i];
        };
        let mut v = decay[b1.index()] * f.values()[i];
        let mut b = b1;
        while let Some(next) = t.parent(b) {
            v += (decay[next.index()] - decay[b.index()]) * avg[b.index()];
            b = next;
        }
        v + (1.0 - decay[b.index()]) * top_avg
    });
    Ok(CellFunction::from_vec(values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovReport {
    /// `max_x |P_t 1(x) - 1|`.
    pub stochasticity: f64,
    /// Smallest kernel entry.
    pub min_kernel_entry: f64,
    /// `max(0, -min_kernel_entry)`.
    pub positivity: f64,
    /// `max ‖P_t P_s g - P_{t+s} g‖_∞` over the probes.
    pub semigroup: f64,
    pub l1_contraction: f64,
    pub linf_contraction: f64,
}

impl MarkovReport {
    pub fn max_defect(&self) -> f64 {
        self.stochasticity
            .max(self.positivity)
            .max(self.semigroup)
            .max(self.l1_contraction)
            .max(self.linf_contraction)
    }
}

/// Normalised indicators of every ball of positive measure plus `n_random`
/// seeded random mean-zero functions.
pub fn probe_set(t: &BallTree, n_random: usize, seed: u64) -> Vec<CellFunction> {
    let mut out: Vec<CellFunction> = t
        .ball_ids()
        .filter_map(|b| CellFunction::normalized_indicator(t, b).ok())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let mut f = CellFunction::zeros(t);
        for v in f.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let mean = f.mean(t);
        for v in f.values_mut() {
            *v -= mean;
        }
        out.push(f);
    }
    out
}

/// Markov property defects of `P_t` in compact mode; the semigroup law is
/// checked against `P_s` for the given `s`.
pub fn markov_checks(h: &HeatOperator<'_>, s: f64, seed: u64) -> Result<MarkovReport> {
    if h.choice.mode() != Mode::Compact {
        return Err(Error::InvalidParameter("Markov checks need compact mode".into()));
    }
    let t = h.tree;
    let n = t.leaf_count();
    let one = CellFunction::constant(t, 1.0);
    let stochasticity = heat_apply_integral(h, &one)?
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let columns = par::map_range(n, |j| {
        let mut e = CellFunction::zeros(t);
        e.values_mut()[j] = 1.0;
        heat_apply_integral(h, &e)
    });
    let mut min_kernel_entry = f64::INFINITY;
    for col in columns {
        for &v in col?.values() {
            min_kernel_entry = min_kernel_entry.min(v);
        }
    }
    let hs = h.at(s)?;
    let hts = h.at(h.time + s)?;
    let probes = probe_set(t, 32, seed);
    let per_probe = par::map_slice(&probes, |g| -> Result<(f64, f64, f64)> {
        let ptg = heat_apply_integral(h, g)?;
        let lhs = heat_apply_integral(h, &heat_apply_integral(&hs, g)?)?;
        let rhs = heat_apply_integral(&hts, g)?;
        let semi = lhs.max_abs_diff(&rhs);
        let l1 = (ptg.norm_l1(t) - g.norm_l1(t)).max(0.0);
        let linf = (ptg.norm_sup() - g.norm_sup()).max(0.0);
        Ok((semi, l1, linf))
    });
    let (mut semigroup, mut l1_contraction, mut linf_contraction) = (0.0f64, 0.0f64, 0.0f64);
    for r in per_probe {
        let (a, b, c) = r?;
        semigroup = semigroup.max(a);
        l1_contraction = l1_contraction.max(b);
        linf_contraction = linf_contraction.max(c);
    }
    Ok(MarkovReport {
        stochasticity,
        min_kernel_entry,
        positivity: (-min_kernel_entry).max(0.0),
        semigroup,
        l1_contraction,
        linf_contraction,
    })
}
