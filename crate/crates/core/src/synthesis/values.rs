use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tree::TOL;

/// The window portion of a value set `M ⊂ [0, ∞)`. Zero is always a member
/// and is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSet {
    positive: Vec<f64>,
    zero_is_accumulation: bool,
    unbounded: bool,
}

impl ValueSet {
    /// Sorts `values`; rejects non-positive, non-finite and repeated entries.
    pub fn new(mut values: Vec<f64>, zero_is_accumulation: bool, unbounded: bool) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("value {v} is not a positive real")));
        }
        values.sort_by(f64::total_cmp);
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("value set has repeated entries".into()));
        }
        Ok(ValueSet {
            positive: values,
            zero_is_accumulation,
            unbounded,
        })
    }

    /// `{ j * step : 1 <= j <= count }`.
    pub fn grid(step: f64, count: usize) -> Result<Self> {
        Self::new((1..=count).map(|j| j as f64 * step).collect(), false, true)
    }

    /// `{ 2^j : j_min <= j <= j_max }`.
    pub fn dyadic(j_min: i32, j_max: i32) -> Result<Self> {
        Self::new((j_min..=j_max).map(|j| 2f64.powi(j)).collect(), true, true)
    }

    pub fn positive_values(&self) -> &[f64] {
        &self.positive
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn zero_is_accumulation(&self) -> bool {
        self.zero_is_accumulation
    }

    pub fn unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn contains(&self, v: f64) -> bool {
        if v.abs() <= TOL {
            return true;
        }
        let i = self.positive.partition_point(|&m| m < v - TOL);
        self.positive.get(i).is_some_and(|&m| (m - v).abs() <= TOL)
    }

    /// Largest member strictly below `below` and at most `cap`.
    pub(crate) fn largest_admissible(&self, below: f64, cap: f64) -> Option<f64> {
        let i = self.positive.partition_point(|&m| m < below && m <= cap + TOL);
        i.checked_sub(1).map(|i| self.positive[i])
    }
}

/// Cuts `0 = l_0 < l_1 < … < l_K` and the bins `M_k = M ∩ (l_{k-1}, l_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBins {
    cuts: Vec<f64>,
    bins: Vec<Vec<f64>>,
}

impl LevelBins {
    /// `cuts` lists `l_1 < … < l_K`; `l_0 = 0` is implicit. Every positive
    /// value of `m` must fall into a bin and every bin must be nonempty.
    pub fn new(cuts: Vec<f64>, m: &ValueSet) -> Result<Self> {
        let mut prev = 0.0;
        for &c in &cuts {
            if !(c.is_finite() && c > prev) {
                return Err(Error::InvalidParameter(format!(
                    "cut {c} does not increase past {prev}"
                )));
            }
            prev = c;
        }
        if let Some(&top) = m.positive_values().last() {
            if cuts.last().is_none_or(|&c| top > c) {
                return Err(Error::InvalidParameter(format!(
                    "value {top} lies above the last cut"
                )));
            }
        }
        let mut bins = vec![Vec::new(); cuts.len()];
        for &v in m.positive_values() {
            let k = cuts.partition_point(|&c| c < v);
            bins[k].push(v);
        }
        if let Some(k) = bins.iter().position(Vec::is_empty) {
            return Err(Error::EmptyBin(k + 1));
        }
        Ok(LevelBins { cuts, bins })
    }

    /// Cuts at `width, 2 width, …` up to the largest value of `m`.
    pub fn uniform(width: f64, m: &ValueSet) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("bin width {width}")));
        }
        let top = m.positive_values().last().copied().unwrap_or(width);
        let k = (top / width).ceil().max(1.0) as usize;
        Self::new((1..=k).map(|i| i as f64 * width).collect(), m)
    }

    /// `l_1, …, l_K`.
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    /// `K`.
    pub fn count(&self) -> usize {
        self.cuts.len()
    }

    /// `M_k` for `1 <= k <= K`.
    pub fn bin(&self, k: usize) -> Option<&[f64]> {
        k.checked_sub(1)
            .and_then(|i| self.bins.get(i))
            .map(Vec::as_slice)
    }

    /// The 1-based bin index of a positive value.
    pub fn kappa(&self, v: f64) -> Option<usize> {
        if !(v > 0.0) {
            return None;
        }
        let k = self.cuts.partition_point(|&c| c < v);
        (k < self.cuts.len()).then_some(k + 1)
    }
}

/// A closed target set `S ∩ (0, Λ]` made of disjoint intervals and isolated
/// points. Zero is always an accumulation point and is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpectrum {
    intervals: Vec<(f64, f64)>,
    points: Vec<f64>,
    unbounded: bool,
}

impl TargetSpectrum {
    pub fn new(mut intervals: Vec<(f64, f64)>, mut points: Vec<f64>, unbounded: bool) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTargetSet(msg));
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
                return bad(format!("[{a}, {b}] is not an interval of positive reals"));
            }
        }
        for &p in &points {
            if !(p.is_finite() && p > 0.0) {
                return bad(format!("point {p} is not a positive real"));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        points.sort_by(f64::total_cmp);
        points.dedup();
        if intervals.windows(2).any(|w| w[1].0 <= w[0].1) {
            return bad("intervals overlap".into());
        }
        if let Some(p) = points
            .iter()
            .find(|&&p| intervals.iter().any(|&(a, b)| a <= p && p <= b))
        {
            return bad(format!("point {p} lies inside an interval"));
        }
        if intervals.is_empty() && points.is_empty() {
            return bad("no positive part".into());
        }
        Ok(TargetSpectrum {
            intervals,
            points,
            unbounded,
        })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn unbounded(&self) -> bool {
        self.unbounded
    }

    /// The window cap `Λ`.
    pub fn cap(&self) -> f64 {
        let a = self.intervals.iter().map(|iv| iv.1).fold(0.0, f64::max);
        a.max(self.points.iter().copied().fold(0.0, f64::max))
    }

    pub fn floor(&self) -> f64 {
        let a = self.intervals.iter().map(|iv| iv.0).fold(f64::INFINITY, f64::min);
        a.min(self.points.iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn span(&self) -> f64 {
        self.cap() - self.floor()
    }

    /// Distance from `x` to the positive part of `S`.
    pub fn distance_to(&self, x: f64) -> f64 {
        let a = self
            .intervals
            .iter()
            .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 });
        let p = self.points.iter().map(|&p| (p - x).abs());
        a.chain(p).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.distance_to(x) <= tol
    }

    /// Every interval sampled at spacing `(b - a) 2^{-density}`, plus the
    /// isolated points; ascending.
    pub fn grid(&self, density: u32) -> Vec<f64> {
        let steps = 1u64 << density;
        let mut out: Vec<f64> = self.points.clone();
        for &(a, b) in &self.intervals {
            let h = (b - a) / steps as f64;
            out.extend((0..=steps).map(|j| if j == steps { b } else { a + j as f64 * h }));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Hausdorff distance between the finite set `lams` and the positive
    /// part of `S`.
    pub fn hausdorff(&self, lams: &[f64]) -> f64 {
        let mut sorted = lams.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return f64::INFINITY;
        }
        let near = |x: f64| {
            let i = sorted.partition_point(|&v| v < x);
            let mut d = f64::INFINITY;
            if i < sorted.len() {
                d = d.min(sorted[i] - x);
            }
            if i > 0 {
                d = d.min(x - sorted[i - 1]);
            }
            d
        };
        let into_s = sorted.iter().map(|&l| self.distance_to(l)).fold(0.0, f64::max);
        let mut from_s = self.points.iter().map(|&p| near(p)).fold(0.0, f64::max);
        for &(a, b) in &self.intervals {
            from_s = from_s.max(near(a)).max(near(b));
            for w in sorted.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if a < mid && mid < b {
                    from_s = from_s.max(near(mid));
                }
            }
        }
        into_s.max(from_s)
    }
}

/// Accepts intervals `[a,b]` and bare numbers separated by spaces, commas,
/// semicolons or `∪`; braces are ignored and a zero point is dropped, so
/// `{0} ∪ [1,2] ∪ {3.5}` parses.
impl FromStr for TargetSpectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidTargetSet(msg);
        let num = |tok: &str| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot read number {tok:?}")))
        };
        let mut intervals = Vec::new();
        let mut points = Vec::new();
        let mut rest = s.trim();
        while let Some(c) = rest.chars().next() {
            if c == '[' {
                let end = rest.find(']').ok_or_else(|| bad("unclosed '['".into()))?;
                let body = &rest[1..end];
                let (a, b) = body
                    .split_once(',')
                    .ok_or_else(|| bad(format!("interval [{body}] needs two endpoints")))?;
                intervals.push((num(a)?, num(b)?));
                rest = &rest[end + 1..];
            } else if c.is_whitespace() || matches!(c, ',' | ';' | '{' | '}' | '∪') {
                rest = &rest[c.len_utf8()..];
            } else {
                let end = rest
                    .find(|ch: char| ch.is_whitespace() || matches!(ch, ',' | ';' | '{' | '}' | '∪' | '['))
                    .unwrap_or(rest.len());
                let v = num(&rest[..end])?;
                if v != 0.0 {
                    points.push(v);
                }
                rest = &rest[end..];
            }
        }
        TargetSpectrum::new(intervals, points, false)
    }
}
