use std::fmt::Write as _;

use super::choice::{ChoiceFunction, Mode};
use crate::error::Result;
use crate::tree::{BallId, BallTree};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub ball: BallId,
    pub lambda: f64,
    pub multiplicity: usize,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub entries: Vec<SpectrumEntry>,
    pub includes_zero: bool,
}

impl SpectrumReport {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum::<usize>() + usize::from(self.includes_zero)
    }

    /// The eigenvalue multiset, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect();
        if self.includes_zero {
            out.push(0.0);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Distinct eigenvalues with summed multiplicities, ascending, merging
    /// values within `tol`.
    pub fn histogram(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut pairs: Vec<(f64, usize)> = self
            .entries
            .iter()
            .map(|e| (e.lambda, e.multiplicity))
            .collect();
        if self.includes_zero {
            pairs.push((0.0, 1));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, usize)> = Vec::new();
        for (l, m) in pairs {
            match out.last_mut() {
                Some(last) if (l - last.0).abs() <= tol * l.abs().max(1.0) => last.1 += m,
                _ => out.push((l, m)),
            }
        }
        out
    }

    /// Columns `lambda,multiplicity,ball_id,level`; the zero eigenvalue,
    /// when present, has an empty ball id and level.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,multiplicity,ball_id,level\n");
        if self.includes_zero {
            s.push_str("0,1,,\n");
        }
        for e in &self.entries {
            let _ = writeln!(s, "{:?},{},{},{}", e.lambda, e.multiplicity, e.ball, e.level);
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let hist = self.histogram(1e-12);
        let _ = writeln!(s, "distinct_lambda = {}", hist.len());
        let _ = writeln!(s, "total_multiplicity = {}", self.total_multiplicity());
        let _ = writeln!(s, "includes_zero = {}", self.includes_zero);
        for (l, m) in hist {
            let _ = writeln!(s, "{l:<24e} {m}");
        }
        s
    }
}

/// One entry per internal ball, `λ(B)` with multiplicity `l(B) - 1`, plus
/// the constant direction in compact mode.
pub fn spectrum(t: &BallTree, c: &ChoiceFunction) -> Result<SpectrumReport> {
    c.check_tree(t)?;
    let lam = c.lambdas();
    let entries = t
        .internal_balls()
        .map(|b| SpectrumEntry {
            ball: b,
            lambda: lam[b.index()],
            multiplicity: t.branching(b) - 1,
            level: t.level(b),
        })
        .collect();
    Ok(SpectrumReport {
        entries,
        includes_zero: c.mode() == Mode::Compact,
    })
}
