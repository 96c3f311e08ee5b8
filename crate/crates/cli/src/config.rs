//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//! mode = "compact"
//!
//! [tree]
//! shape = "padic:2:-2:2"
//!
//! [choice]
//! kind = "alpha"
//! alpha = 1.0
//!
//! [experiment]
//! kind = "spectrum"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice: Option<ChoiceConfig>,
    pub experiment: Experiment,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("hilap-out")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Compact,
    MeanZeroTail,
}

impl From<ModeConfig> for hilap::Mode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Compact => hilap::Mode::Compact,
            ModeConfig::MeanZeroTail => hilap::Mode::MeanZeroTail,
        }
    }
}

/// Exactly one of `shape` (compact form, or `random:SEED`) and `file` (tree
/// text format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChoiceConfig {
    /// `λ = 1/diam`; in tail mode the root keeps `tail` of its rate.
    Standard {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<f64>,
    },
    /// `C(B) = (1 - p^-α) diam(B)^-α`; `p` defaults to the window's prime.
    Alpha {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<u32>,
        alpha: f64,
    },
    /// Log-uniform rates in `[0.1, 10]`, seeded by the run seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueSetConfig {
    /// `{j step : 1 <= j <= count}` plus `step 2^-j` for `1 <= j <= depth`.
    Grid {
        step: f64,
        count: usize,
        #[serde(default)]
        depth: u32,
    },
    /// `{2^j : j_min <= j <= j_max}`.
    Dyadic { j_min: i32, j_max: i32 },
    List {
        values: Vec<f64>,
        #[serde(default)]
        zero_accumulates: bool,
    },
}

impl ValueSetConfig {
    pub fn build(&self) -> hilap::Result<hilap::synthesis::ValueSet> {
        use hilap::synthesis::ValueSet;
        match self {
            ValueSetConfig::Grid { step, count, depth } => {
                let mut v: Vec<f64> = (1..=*count).map(|j| j as f64 * step).collect();
                v.extend((1..=*depth as i32).map(|j| step * 2f64.powi(-j)));
                ValueSet::new(v, *depth > 0, false)
            }
            ValueSetConfig::Dyadic { j_min, j_max } => ValueSet::dyadic(*j_min, *j_max),
            ValueSetConfig::List { values, zero_accumulates } => {
                ValueSet::new(values.clone(), *zero_accumulates, false)
            }
        }
    }
}

/// A target set, either as text (`"{0} ∪ [1,2]"`) or as a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetConfig {
    Text(String),
    Table {
        #[serde(default)]
        intervals: Vec<[f64; 2]>,
        #[serde(default)]
        points: Vec<f64>,
        #[serde(default)]
        unbounded: bool,
    },
}

impl TargetConfig {
    pub fn build(&self) -> hilap::Result<hilap::synthesis::TargetSpectrum> {
        match self {
            TargetConfig::Text(s) => s.parse(),
            TargetConfig::Table {
                intervals,
                points,
                unbounded,
            } => hilap::synthesis::TargetSpectrum::new(
                intervals.iter().map(|[a, b]| (*a, *b)).collect(),
                points.iter().copied().filter(|&p| p != 0.0).collect(),
                *unbounded,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Spectrum {
        #[serde(default = "yes")]
        dense_check: bool,
    },
    SynthT1 {
        level: usize,
        values: ValueSetConfig,
    },
    SynthT2 {
        level: usize,
        values: ValueSetConfig,
        #[serde(default = "one")]
        bin_width: f64,
    },
    Prescribe {
        shape: String,
        target: TargetConfig,
        density: u32,
    },
    Heat {
        times: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input: Option<PathBuf>,
    },
    Padic {
        p: u32,
        alpha: f64,
        k_min: i32,
        k_max: i32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input: Option<PathBuf>,
    },
    Perturb {
        delta: f64,
        bern_p: f64,
        level: i32,
        n_balls: usize,
        separation: u32,
        window_levels: u32,
        #[serde(default = "tail_depth")]
        tail_depth: u32,
    },
    Clt {
        delta: f64,
        bern_p: f64,
        level: i32,
        enclosing_level: i32,
        samples: usize,
        #[serde(default = "tail_depth")]
        tail_depth: u32,
    },
    Verify {
        #[serde(default = "verify_trees")]
        trees: u64,
        #[serde(default = "verify_leaves")]
        max_leaves: usize,
    },
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn tail_depth() -> u32 {
    hilap::perturbation::DEFAULT_TAIL_DEPTH
}

fn verify_trees() -> u64 {
    20
}

fn verify_leaves() -> usize {
    256
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::SynthT1 { .. } => "synth-t1",
            Experiment::SynthT2 { .. } => "synth-t2",
            Experiment::Prescribe { .. } => "prescribe",
            Experiment::Heat { .. } => "heat",
            Experiment::Padic { .. } => "padic",
            Experiment::Perturb { .. } => "perturb",
            Experiment::Clt { .. } => "clt",
            Experiment::Verify { .. } => "verify",
        }
    }

    fn needs_tree(&self) -> bool {
        matches!(
            self,
            Experiment::Spectrum { .. } | Experiment::SynthT1 { .. } | Experiment::SynthT2 { .. } | Experiment::Heat { .. }
        )
    }

    fn needs_choice(&self) -> bool {
        matches!(self, Experiment::Spectrum { .. } | Experiment::Heat { .. })
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
            CliError::ConfigParse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML text; the output directory is left out so that runs
    /// differing only in where they write hash the same.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output_dir = default_output_dir();
        toml::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(1e-10)
    }

    /// Checks every block the experiment refers to before anything runs.
    pub fn validate(&self) -> CliResult<()> {
        fn bad(key: &str, message: impl Into<String>) -> CliError {
            CliError::validation(key, message)
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad("tolerance", format!("{t} must be positive")));
            }
        }
        let e = &self.experiment;
        if e.needs_tree() {
            match &self.tree {
                None => return Err(bad("tree", format!("required by `{}`", e.name()))),
                Some(TreeConfig { shape: Some(_), file: Some(_) }) => {
                    return Err(bad("tree", "give either `shape` or `file`, not both"))
                }
                Some(TreeConfig { shape: None, file: None }) => {
                    return Err(bad("tree", "needs `shape` or `file`"))
                }
                _ => {}
            }
        }
        if e.needs_choice() {
            match &self.choice {
                None => return Err(bad("choice", format!("required by `{}`", e.name()))),
                Some(ChoiceConfig::Alpha { alpha, .. }) if !(alpha.is_finite() && *alpha > 0.0) => {
                    return Err(bad("choice.alpha", format!("{alpha} must be positive")))
                }
                Some(ChoiceConfig::Standard { tail: Some(t) }) if !(t.is_finite() && *t > 0.0) => {
                    return Err(bad("choice.tail", format!("{t} must be positive")))
                }
                Some(ChoiceConfig::Standard { tail }) if tail.is_some() != (self.mode == ModeConfig::MeanZeroTail) => {
                    return Err(bad("choice.tail", "a tail rate is given exactly in mean_zero_tail mode"))
                }
                _ => {}
            }
        }
        match e {
            Experiment::SynthT1 { values, .. } | Experiment::SynthT2 { values, .. } => {
                values.build().map_err(|err| bad("experiment.values", err.to_string()))?;
            }
            _ => {}
        }
        match e {
            Experiment::SynthT2 { bin_width, .. } if !(bin_width.is_finite() && *bin_width > 0.0) => {
                Err(bad("experiment.bin_width", format!("{bin_width} must be positive")))
            }
            Experiment::Prescribe { target, density, shape } => {
                target.build().map_err(|err| bad("experiment.target", err.to_string()))?;
                shape
                    .parse::<hilap::TreeSpec>()
                    .map_err(|err| bad("experiment.shape", err.to_string()))?;
                if !(1..=24).contains(density) {
                    return Err(bad("experiment.density", format!("{density} is outside 1..=24")));
                }
                Ok(())
            }
            Experiment::Heat { times, .. } => match times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                Some(t) => Err(bad("experiment.times", format!("{t} is not a time"))),
                None if times.is_empty() => Err(bad("experiment.times", "empty")),
                None => Ok(()),
            },
            Experiment::Padic { alpha, .. } if !(alpha.is_finite() && *alpha > 0.0) => {
                Err(bad("experiment.alpha", format!("{alpha} must be positive")))
            }
            Experiment::Perturb { delta, bern_p, tail_depth, .. } | Experiment::Clt { delta, bern_p, tail_depth, .. } => {
                hilap::perturbation::PerturbationConfig::new(*delta, *bern_p, *tail_depth, self.seed)
                    .map_err(|err| bad("experiment", err.to_string()))?;
                Ok(())
            }
            Experiment::Verify { trees, max_leaves } if *trees == 0 || *max_leaves < 2 => {
                Err(bad("experiment", "verify needs trees >= 1 and max_leaves >= 2"))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECTRUM: &str = r#"
seed = 3
[tree]
shape = "padic:2:-2:2"
[choice]
kind = "alpha"
alpha = 1.0
[experiment]
kind = "spectrum"
"#;

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig::parse(SPECTRUM).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(RunConfig::parse(&c.canonical()).unwrap(), c);
        let mut moved = c.clone();
        moved.output_dir = PathBuf::from("elsewhere");
        assert_eq!(moved.hash(), c.hash());
        let mut reseeded = c.clone();
        reseeded.seed = 4;
        assert_ne!(reseeded.hash(), c.hash());
    }

    #[test]
    fn empty_config_reports_position() {
        match RunConfig::parse("") {
            Err(CliError::ConfigParse { line, column, .. }) => assert_eq!((line, column), (1, 1)),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("seed = 1\nseed = = 2\n") {
            Err(CliError::ConfigParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_blocks_name_their_key() {
        let text = "[experiment]\nkind = \"spectrum\"\n";
        assert_eq!(
            RunConfig::parse(text),
            Err(CliError::validation("tree", "required by `spectrum`"))
        );
        let text = SPECTRUM.replace("alpha = 1.0", "alpha = -1.0");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Validation { key, .. }) if key == "choice.alpha"));
    }

    #[test]
    fn target_table_form() {
        let text = r#"
[experiment]
kind = "prescribe"
shape = "binary:6"
density = 3
target = { intervals = [[1.0, 2.0]], points = [3.5], unbounded = false }
"#;
        let c = RunConfig::parse(text).unwrap();
        let Experiment::Prescribe { target, .. } = c.experiment else { panic!() };
        assert_eq!(target.build().unwrap().points(), &[3.5]);
    }
}
