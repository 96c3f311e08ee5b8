mod config;
mod error;
mod output;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ChoiceConfig, Experiment, ModeConfig, RunConfig, TargetConfig, TreeConfig, ValueSetConfig};
use error::{CliError, CliResult};
use output::Artifacts;

#[derive(Parser)]
#[command(name = "hilap", version, about = "Hierarchical Laplacians on ultrametric ball trees")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Numeric tolerance for the run's internal checks.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of L_C on a window, checked against the dense operator.
    Spectrum {
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        choice: ChoiceArgs,
        #[arg(long)]
        no_dense_check: bool,
    },
    /// Whitney map with values in M joining a level partition along a spine.
    SynthT1 {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        values: ValueArgs,
    },
    /// Ball-preserving Whitney map with values in binned M.
    SynthT2 {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        values: ValueArgs,
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
    },
    /// Tree, Whitney map and choice function with spectrum inside S.
    Prescribe {
        #[arg(long = "S")]
        target: String,
        #[arg(long)]
        density: u32,
        #[arg(long)]
        shape: String,
    },
    /// Heat semigroup trajectories of an initial function.
    Heat {
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        choice: ChoiceArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        times: Vec<f64>,
        /// CSV of leaf values; a seeded random function when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fractional derivative on a p-adic window in both forms.
    Padic {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        kmin: i32,
        #[arg(long, allow_hyphen_values = true)]
        kmax: i32,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Coverage of the perturbed eigenvalues at one level.
    Perturb {
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        level: i32,
        #[arg(long, default_value_t = 4096)]
        n_balls: usize,
        #[arg(long, default_value_t = 8)]
        separation: u32,
        #[arg(long, default_value_t = 20)]
        window_levels: u32,
    },
    /// Law of the mean perturbed eigenvalue over independent seeds.
    Clt {
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        level: i32,
        #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
        enclosing_level: i32,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Invariant suite on seeded random windows.
    Verify {
        #[arg(long, default_value_t = 20)]
        trees: u64,
        #[arg(long, default_value_t = 256)]
        max_leaves: usize,
    },
    /// Runs a TOML run configuration.
    Run { config: PathBuf },
}

#[derive(Args)]
struct TreeArgs {
    /// `padic:P:KMIN:KMAX`, `binary:D`, `cyclic:O1,O2,..`, `natdmax:N` or `random:SEED`.
    #[arg(long, conflicts_with = "tree_file", allow_hyphen_values = true)]
    tree: Option<String>,
    #[arg(long)]
    tree_file: Option<PathBuf>,
}

impl TreeArgs {
    fn config(self) -> TreeConfig {
        TreeConfig {
            shape: self.tree,
            file: self.tree_file,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChoiceKind {
    Standard,
    Alpha,
    Random,
}

#[derive(Args)]
struct ChoiceArgs {
    /// Defaults to `alpha` when `--alpha` is given, else `standard`.
    #[arg(long, value_enum)]
    choice: Option<ChoiceKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<u32>,
    /// Tail rate for the standard choice in mean-zero-tail mode.
    #[arg(long)]
    tail: Option<f64>,
    #[arg(long, value_enum, default_value = "compact")]
    mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Compact,
    MeanZeroTail,
}

impl ChoiceArgs {
    fn config(&self) -> (ChoiceConfig, ModeConfig) {
        let kind = self.choice.unwrap_or(if self.alpha.is_some() {
            ChoiceKind::Alpha
        } else {
            ChoiceKind::Standard
        });
        let choice = match kind {
            ChoiceKind::Standard => ChoiceConfig::Standard { tail: self.tail },
            ChoiceKind::Alpha => ChoiceConfig::Alpha {
                p: self.p,
                alpha: self.alpha.unwrap_or(1.0),
            },
            ChoiceKind::Random => ChoiceConfig::Random,
        };
        let mode = match self.mode {
            ModeArg::Compact => ModeConfig::Compact,
            ModeArg::MeanZeroTail => ModeConfig::MeanZeroTail,
        };
        (choice, mode)
    }
}

#[derive(Args)]
struct ValueArgs {
    /// M = {j step : j <= count}.
    #[arg(long, default_value_t = 0.0625)]
    m_step: f64,
    #[arg(long, default_value_t = 768)]
    m_count: usize,
    /// Also add step 2^-j for j <= depth, accumulating at 0.
    #[arg(long, default_value_t = 32)]
    m_depth: u32,
    /// M = {2^j : JMIN <= j <= JMAX} instead, as `JMIN:JMAX`.
    #[arg(long, allow_hyphen_values = true)]
    m_dyadic: Option<String>,
}

impl ValueArgs {
    fn config(self) -> CliResult<ValueSetConfig> {
        match self.m_dyadic {
            Some(s) => {
                let bad = || CliError::validation("experiment.values", format!("expected JMIN:JMAX, got `{s}`"));
                let (a, b) = s.split_once(':').ok_or_else(bad)?;
                Ok(ValueSetConfig::Dyadic {
                    j_min: a.trim().parse().map_err(|_| bad())?,
                    j_max: b.trim().parse().map_err(|_| bad())?,
                })
            }
            None => Ok(ValueSetConfig::Grid {
                step: self.m_step,
                count: self.m_count,
                depth: self.m_depth,
            }),
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    bern_p: f64,
    #[arg(long, default_value_t = hilap::perturbation::DEFAULT_TAIL_DEPTH)]
    tail_depth: u32,
}

fn base(experiment: Experiment) -> RunConfig {
    RunConfig {
        seed: 0,
        output_dir: PathBuf::from("hilap-out"),
        tolerance: None,
        mode: ModeConfig::Compact,
        tree: None,
        choice: None,
        experiment,
    }
}

fn config_from(cli: Cli) -> CliResult<RunConfig> {
    let mut cfg = match cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            RunConfig::parse(&text)?
        }
        Command::Spectrum { tree, choice, no_dense_check } => {
            let (c, mode) = choice.config();
            RunConfig {
                tree: Some(tree.config()),
                choice: Some(c),
                mode,
                ..base(Experiment::Spectrum {
                    dense_check: !no_dense_check,
                })
            }
        }
        Command::SynthT1 { tree, level, values } => RunConfig {
            tree: Some(tree.config()),
            ..base(Experiment::SynthT1 {
                level,
                values: values.config()?,
            })
        },
        Command::SynthT2 { tree, level, values, bin_width } => RunConfig {
            tree: Some(tree.config()),
            ..base(Experiment::SynthT2 {
                level,
                values: values.config()?,
                bin_width,
            })
        },
        Command::Prescribe { target, density, shape } => base(Experiment::Prescribe {
            shape,
            target: TargetConfig::Text(target),
            density,
        }),
        Command::Heat { tree, choice, times, input } => {
            let (c, mode) = choice.config();
            RunConfig {
                tree: Some(tree.config()),
                choice: Some(c),
                mode,
                ..base(Experiment::Heat { times, input })
            }
        }
        Command::Padic { p, alpha, kmin, kmax, input } => base(Experiment::Padic {
            p,
            alpha,
            k_min: kmin,
            k_max: kmax,
            input,
        }),
        Command::Perturb { noise, level, n_balls, separation, window_levels } => base(Experiment::Perturb {
            delta: noise.delta,
            bern_p: noise.bern_p,
            level,
            n_balls,
            separation,
            window_levels,
            tail_depth: noise.tail_depth,
        }),
        Command::Clt { noise, level, enclosing_level, samples } => base(Experiment::Clt {
            delta: noise.delta,
            bern_p: noise.bern_p,
            level,
            enclosing_level,
            samples,
            tail_depth: noise.tail_depth,
        }),
        Command::Verify { trees, max_leaves } => base(Experiment::Verify { trees, max_leaves }),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    if cli.tolerance.is_some() {
        cfg.tolerance = cli.tolerance;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(cli: Cli) -> CliResult<()> {
    let cfg = config_from(cli)?;
    let mut out = Artifacts::create(&cfg.output_dir, cfg.hash())?;
    let canonical = format!("{}\n{}", out.comment(), cfg.canonical());
    out.write("config.toml", &canonical)?;
    let summary = run::execute(&cfg, &mut out)?;
    out.write("summary.txt", &format!("{}\n{}", out.comment(), summary.text()))?;
    print!("{}", summary.text());
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    if let Some(first) = summary.failures().first() {
        return Err(CliError::Tolerance(format!(
            "{} check(s) failed, first: {first}",
            summary.failures().len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
