use crate::error::{Error, Result};
use crate::tree::{BallId, BallTree};

/// A locally constant function at window resolution: one value per leaf,
/// indexed by leaf position.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFunction {
    values: Vec<f64>,
}

impl CellFunction {
    pub fn new(t: &BallTree, values: Vec<f64>) -> Result<Self> {
        if values.len() != t.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: t.leaf_count(),
                got: values.len(),
            });
        }
        Ok(CellFunction { values })
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        CellFunction { values }
    }

    pub fn zeros(t: &BallTree) -> Self {
        CellFunction {
            values: vec![0.0; t.leaf_count()],
        }
    }

    pub fn constant(t: &BallTree, c: f64) -> Self {
        CellFunction {
            values: vec![c; t.leaf_count()],
        }
    }

    pub fn indicator(t: &BallTree, b: BallId) -> Self {
        let mut f = Self::zeros(t);
        for i in t.leaf_range(b) {
            f.values[i] = 1.0;
        }
        f
    }

    /// `1_B / m(B)`.
    pub fn normalized_indicator(t: &BallTree, b: BallId) -> Result<Self> {
        let m = t.measure(b);
        if m <= 0.0 {
            return Err(Error::ZeroMeasureBall(b.index()));
        }
        let mut f = Self::zeros(t);
        for i in t.leaf_range(b) {
            f.values[i] = 1.0 / m;
        }
        Ok(f)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integral(&self, t: &BallTree) -> f64 {
        integrals(t, &self.values)[t.root().index()]
    }

    pub fn mean(&self, t: &BallTree) -> f64 {
        self.integral(t) / t.measure(t.root())
    }

    /// m-weighted inner product.
    pub fn inner(&self, t: &BallTree, g: &CellFunction) -> f64 {
        let terms: Vec<f64> = t
            .leaves()
            .iter()
            .zip(self.values.iter().zip(&g.values))
            .map(|(&l, (a, b))| t.measure(l) * a * b)
            .collect();
        crate::par::pairwise_sum(&terms)
    }

    pub fn norm_l2(&self, t: &BallTree) -> f64 {
        self.inner(t, self).sqrt()
    }

    pub fn norm_l1(&self, t: &BallTree) -> f64 {
        let terms: Vec<f64> = t
            .leaves()
            .iter()
            .zip(&self.values)
            .map(|(&l, a)| t.measure(l) * a.abs())
            .collect();
        crate::par::pairwise_sum(&terms)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, g: &CellFunction) -> CellFunction {
        CellFunction {
            values: self.values.iter().zip(&g.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> CellFunction {
        CellFunction {
            values: self.values.iter().map(|a| c * a).collect(),
        }
    }

    pub fn max_abs_diff(&self, g: &CellFunction) -> f64 {
        self.values
            .iter()
            .zip(&g.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `∫_B f dm` for every ball, indexed by ball id.
pub fn integrals(t: &BallTree, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for b in t.ball_ids().rev() {
        out[b.index()] = match t.leaf_position(b) {
            Some(i) => values[i] * t.measure(b),
            None => t.children(b).iter().map(|c| out[c.index()]).sum(),
        };
    }
    out
}

/// `P_B f` for every ball; zero-measure balls get the plain value (they are
/// excluded from averaging).
pub fn averages(t: &BallTree, values: &[f64]) -> Vec<f64> {
    let ints = integrals(t, values);
    t.ball_ids()
        .map(|b| {
            let m = t.measure(b);
            if m > 0.0 {
                ints[b.index()] / m
            } else {
                t.leaf_position(b).map_or(0.0, |i| values[i])
            }
        })
        .collect()
}
