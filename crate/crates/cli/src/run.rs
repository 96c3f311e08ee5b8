use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hilap::checks;
use hilap::gen::{random_choice, random_function, random_mean_zero, random_tree, RandomTreeParams};
use hilap::laplacian::{
    apply, assemble_dense, choice_alpha, choice_standard, dense_eigenvalues, eigenfunction, lambda_of,
    spectrum, DEFAULT_DENSE_CAP,
};
use hilap::padic::{
    frac_deriv_apply, riemann_liouville_apply, spectrum_padic, tail_scalars, FracDerivOp, PadicWindow,
};
use hilap::perturbation::{clt_experiment, coverage_experiment, PerturbationConfig};
use hilap::semigroup::{markov_checks, HeatOperator};
use hilap::synthesis::{
    prescribe_spectrum, refine_partition, synthesize_whitney_t1, synthesize_whitney_t2, LevelBins,
    SynthesizedMetric,
};
use hilap::tree::{level_partition, range_of_metric, read_tree, write_tree};
use hilap::{BallTree, CellFunction, ChoiceFunction, Mode, TreeSpec, WhitneyMap};

use crate::config::{ChoiceConfig, Experiment, RunConfig, TreeConfig};
use crate::error::{lib, CliError, CliResult};
use crate::output::{num, Artifacts, Summary};

pub fn build_tree(cfg: &TreeConfig) -> CliResult<BallTree> {
    if let Some(path) = &cfg.file {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return read_tree(&text).map(|(t, _)| t).map_err(lib("tree.file"));
    }
    let shape = cfg.shape.as_deref().unwrap_or_default();
    if let Some(seed) = shape.strip_prefix("random:") {
        let seed = seed
            .parse()
            .map_err(|_| CliError::validation("tree.shape", format!("bad seed in `{shape}`")))?;
        return random_tree(seed, &RandomTreeParams::default()).map_err(lib("tree.shape"));
    }
    let spec: TreeSpec = shape.parse().map_err(lib("tree.shape"))?;
    spec.build().map_err(lib("tree.shape"))
}

fn padic_prime(cfg: &RunConfig) -> Option<u32> {
    let shape = cfg.tree.as_ref()?.shape.as_deref()?;
    match shape.parse().ok()? {
        TreeSpec::Padic { p, .. } => Some(p),
        _ => None,
    }
}

pub fn build_choice(cfg: &RunConfig, t: &BallTree) -> CliResult<ChoiceFunction> {
    let mode: Mode = cfg.mode.into();
    match cfg.choice.as_ref().expect("validated") {
        ChoiceConfig::Standard { tail } => {
            choice_standard(t, &WhitneyMap::from_diam(t), *tail).map_err(lib("choice"))
        }
        ChoiceConfig::Alpha { p, alpha } => {
            let p = p
                .or_else(|| padic_prime(cfg))
                .ok_or_else(|| CliError::validation("choice.p", "needed unless the tree is a p-adic window"))?;
            choice_alpha(t, p, *alpha, mode).map_err(lib("choice"))
        }
        ChoiceConfig::Random => random_choice(t, cfg.seed, mode).map_err(lib("choice")),
    }
}

/// One value per line; `#` lines, blank lines and a non-numeric header are
/// skipped, and the last comma-separated field is taken.
pub fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && i <= 1 => continue,
            Err(_) => {
                return Err(CliError::validation(
                    "experiment.input",
                    format!("line {}: `{field}` is not a number", i + 1),
                ))
            }
        }
    }
    Ok(out)
}

fn input_function(t: &BallTree, path: Option<&Path>, seed: u64, mean_zero: bool) -> CliResult<CellFunction> {
    match path {
        Some(p) => CellFunction::new(t, read_values(p)?).map_err(lib("experiment.input")),
        None if mean_zero => Ok(random_mean_zero(t, seed)),
        None => Ok(random_function(t, seed)),
    }
}

fn leaf_rows(values: &[&[f64]]) -> String {
    let mut s = String::new();
    for i in 0..values[0].len() {
        let _ = write!(s, "{i}");
        for v in values {
            let _ = write!(s, ",{}", num(v[i]));
        }
        s.push('\n');
    }
    s
}

/// Runs the experiment, writing artifacts; tolerance failures are left in
/// the summary for the caller.
pub fn execute(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Summary> {
    let mut sum = Summary::default();
    sum.field("experiment", cfg.experiment.name());
    sum.field("seed", cfg.seed);
    let tol = cfg.tolerance();
    match &cfg.experiment {
        Experiment::Spectrum { dense_check } => {
            let t = build_tree(cfg.tree.as_ref().expect("validated"))?;
            let c = build_choice(cfg, &t)?;
            let report = spectrum(&t, &c).map_err(lib("choice"))?;
            let csv = report.to_csv();
            let (header, rows) = csv.split_once('\n').expect("header line");
            out.csv("spectrum.csv", header, rows)?;
            sum.field("leaves", t.leaf_count());
            sum.block(&report.summary());
            if *dense_check {
                let m = assemble_dense(&t, &c, DEFAULT_DENSE_CAP).map_err(lib("tree"))?;
                let dense = dense_eigenvalues(&t, &m).map_err(lib("tree"))?;
                let listed = report.eigenvalues();
                let scale = listed.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
                let err = dense
                    .iter()
                    .zip(&listed)
                    .map(|(d, l)| (d - l).abs() / if *l == 0.0 { scale } else { l.abs() })
                    .fold(0.0, f64::max);
                sum.check("dense_max_rel_error", num(err), err <= tol && dense.len() == listed.len());
            }
        }
        Experiment::SynthT1 { level, values } | Experiment::SynthT2 { level, values, .. } => {
            let t = build_tree(cfg.tree.as_ref().expect("validated"))?;
            let m = values.build().map_err(lib("experiment.values"))?;
            let part = level_partition(&t, *level).map_err(lib("experiment.level"))?;
            let s: SynthesizedMetric = match &cfg.experiment {
                Experiment::SynthT2 { bin_width, .. } => {
                    let part = refine_partition(&t, &part).map_err(lib("experiment.level"))?;
                    let bins = LevelBins::uniform(*bin_width, &m).map_err(lib("experiment.bin_width"))?;
                    synthesize_whitney_t2(&t, &part, &m, &bins).map_err(lib("experiment"))?
                }
                _ => synthesize_whitney_t1(&t, &part, &m, cfg.seed).map_err(lib("experiment"))?,
            };
            out.write("metric.txt", &write_tree(&s.tree, Some(&s.w)))?;
            let rows: String = s.used.iter().map(|v| format!("{}\n", num(*v))).collect();
            out.csv("used_values.csv", "value", &rows)?;
            sum.field("members", part.len());
            sum.field("used_values", s.used.len());
            let monotone = checks::check_monotone(&s.tree, &s.w).is_ok();
            sum.check("monotone", monotone, monotone);
            let mut want = vec![0.0];
            want.extend(&s.used);
            let range_ok = range_of_metric(&s.tree, &s.w) == want;
            sum.check("range_equals_used", range_ok, range_ok);
            let in_m = s.used.iter().all(|&v| m.contains(v));
            sum.check("values_in_M", in_m, in_m);
            let balls = checks::check_ball_preservation(&s.tree, &s.w).is_ok();
            sum.check("ball_preservation", balls, balls);
        }
        Experiment::Prescribe { shape, target, density } => {
            let spec: TreeSpec = shape.parse().map_err(lib("experiment.shape"))?;
            let s = target.build().map_err(lib("experiment.target"))?;
            let p = prescribe_spectrum(&spec, &s, *density).map_err(lib("experiment"))?;
            out.write("tree.txt", &write_tree(&p.tree, Some(&p.w)))?;
            let mut rows = String::new();
            let mut lams = Vec::new();
            for b in p.tree.ball_ids().filter(|&b| !p.tree.kind(b).is_point()) {
                let lam = lambda_of(&p.tree, &p.choice, b).map_err(lib("experiment"))?;
                lams.push(lam);
                let _ = writeln!(rows, "{},{},{}", b.index(), num(p.choice.rate(b)), num(lam));
            }
            out.csv("choice.csv", "ball_id,rate,lambda", &rows)?;
            let all_in = lams.iter().all(|&l| s.contains(l, 1e-12));
            sum.field("balls", lams.len());
            sum.field("grid_values", p.grid.len());
            sum.verdict("all λ in S", all_in);
            let h = s.hausdorff(&lams);
            let bound = 2f64.powi(-(*density as i32)) * s.span().max(1.0);
            sum.check("hausdorff", num(h), h <= bound + 1e-12);
        }
        Experiment::Heat { times, input } => {
            let t = build_tree(cfg.tree.as_ref().expect("validated"))?;
            let c = build_choice(cfg, &t)?;
            let f = input_function(&t, input.as_deref(), cfg.seed, c.mode() == Mode::MeanZeroTail)?;
            let mut rows = String::new();
            let mut worst = 0.0f64;
            for &time in times {
                let h = HeatOperator::new(&t, &c, time).map_err(lib("experiment.times"))?;
                let a = h.apply_integral(&f).map_err(lib("experiment.input"))?;
                let b = h.apply_spectral(&f).map_err(lib("experiment.input"))?;
                worst = worst.max(a.max_abs_diff(&b));
                for (i, v) in a.values().iter().enumerate() {
                    let _ = writeln!(rows, "{},{i},{}", num(time), num(*v));
                }
            }
            out.csv("heat.csv", "t,leaf,value", &rows)?;
            sum.field("leaves", t.leaf_count());
            sum.check("spectral_vs_integral", num(worst), worst <= tol);
        }
        Experiment::Padic { p, alpha, k_min, k_max, input } => {
            let win = PadicWindow::new(*p, *k_min, *k_max).map_err(lib("experiment"))?;
            let op = FracDerivOp::new(win, *alpha).map_err(lib("experiment.alpha"))?;
            let t = op.window().tree();
            let u = input_function(t, input.as_deref(), cfg.seed, true)?;
            let h = frac_deriv_apply(&op, &u).map_err(lib("experiment.input"))?;
            let rl = riemann_liouville_apply(&op, &u).map_err(lib("experiment.input"))?;
            out.csv(
                "padic.csv",
                "leaf,u,hierarchical,riemann_liouville",
                &leaf_rows(&[u.values(), h.values(), rl.values()]),
            )?;
            let csv = spectrum_padic(&op).to_csv();
            let (header, rows) = csv.split_once('\n').expect("header line");
            out.csv("spectrum.csv", header, rows)?;
            let ts = tail_scalars(&op);
            sum.field("rl_constant", num(op.rl_constant()));
            sum.field("tail_shell", num(ts.shell));
            sum.field("tail_resummed", num(ts.resummed));
            sum.field("tau", num(ts.tau));
            let rel = h.max_abs_diff(&rl) / h.norm_sup().max(f64::MIN_POSITIVE);
            sum.check("hierarchical_vs_rl_rel", num(rel), rel <= tol);
        }
        Experiment::Perturb { delta, bern_p, level, n_balls, separation, window_levels, tail_depth } => {
            let pc = PerturbationConfig::new(*delta, *bern_p, *tail_depth, cfg.seed).map_err(lib("experiment"))?;
            let r = coverage_experiment(&pc, *level, *n_balls, *separation, *window_levels).map_err(lib("experiment"))?;
            let rows: String = r.values.iter().enumerate().map(|(i, v)| format!("{i},{}\n", num(*v))).collect();
            out.csv("coverage.csv", "rank,lambda", &rows)?;
            sum.field("interval", format!("[{}, {}]", num(r.interval.0), num(r.interval.1)));
            sum.field("min", num(r.min));
            sum.field("max", num(r.max));
            sum.field("all_in_interval", r.all_in_interval);
            sum.field("max_rel_gap", num(r.max_rel_gap));
            sum.field("gap_to_next_level", num(r.gap_to_next_level));
            sum.field("intervals_connected", r.intervals_connected);
        }
        Experiment::Clt { delta, bern_p, level, enclosing_level, samples, tail_depth } => {
            let pc = PerturbationConfig::new(*delta, *bern_p, *tail_depth, cfg.seed).map_err(lib("experiment"))?;
            let r = clt_experiment(&pc, *level, *enclosing_level, *samples).map_err(lib("experiment"))?;
            let rows: String = r
                .samples
                .iter()
                .map(|s| format!("{},{},{}\n", s.seed, num(s.lambda_bar), num(s.stat)))
                .collect();
            out.csv("samples.csv", "seed,lambda_bar,normalized_stat", &rows)?;
            sum.block(&format!(
                "{{\n  \"n\": {},\n  \"target_mean\": {},\n  \"lambda_mean\": {},\n  \"lambda_std_error\": {},\n  \
                 \"lln_z\": {},\n  \"stat_mean\": {},\n  \"stat_variance\": {},\n  \"stat_skewness\": {},\n  \
                 \"stat_excess_kurtosis\": {},\n  \"ks\": {},\n  \"u_var\": {},\n  \"u_var_ratio\": {},\n  \
                 \"exact_u_var\": {},\n  \"ks_exact_scale\": {}\n}}",
                r.n,
                num(r.target_mean),
                num(r.lambda_mean),
                num(r.lambda_std_error),
                num(r.lln_z),
                num(r.stat.mean),
                num(r.stat.variance),
                num(r.stat.skewness),
                num(r.stat.excess_kurtosis),
                num(r.ks),
                num(r.u_var),
                num(r.u_var_ratio),
                num(r.exact_u_var),
                num(r.ks_exact_scale),
            ));
        }
        Experiment::Verify { trees, max_leaves } => verify(cfg, *trees, *max_leaves, tol, out, &mut sum)?,
    }
    Ok(sum)
}

/// The invariant suite over seeded random windows and two p-adic windows.
fn verify(cfg: &RunConfig, trees: u64, max_leaves: usize, tol: f64, out: &mut Artifacts, sum: &mut Summary) -> CliResult<()> {
    let params = RandomTreeParams {
        max_leaves,
        ..RandomTreeParams::default()
    };
    let mut rows = String::new();
    let mut row = |sum: &mut Summary, check: &str, case: &str, value: f64, limit: f64| {
        let ok = value <= limit;
        let _ = writeln!(rows, "{check},{case},{},{},{ok}", num(value), num(limit));
        if !ok {
            sum.check(&format!("{check}[{case}]"), num(value), false);
        }
    };
    for i in 0..trees {
        let seed = cfg.seed.wrapping_add(i);
        let case = format!("random:{seed}");
        let t = random_tree(seed, &params).map_err(lib("experiment"))?;
        let w = WhitneyMap::from_diam(&t);
        let structural = [
            ("meets", checks::check_meets(&t)),
            ("monotone", checks::check_monotone(&t, &w)),
            ("ball_preservation", checks::check_ball_preservation(&t, &w)),
            ("center_independence", checks::check_center_independence(&t, &w)),
        ];
        for (name, r) in structural {
            row(sum, name, &case, if r.is_ok() { 0.0 } else { 1.0 }, 0.0);
        }
        row(sum, "ultrametric_excess", &case, checks::ultrametric_excess(&t, &w).max(0.0), 0.0);
        let c = random_choice(&t, seed, Mode::Compact).map_err(lib("experiment"))?;
        let mut eig = 0.0f64;
        for bp in t.internal_balls() {
            let lam = lambda_of(&t, &c, bp).map_err(lib("experiment"))?;
            for &b in t.children(bp) {
                let f = eigenfunction(&t, b, bp).map_err(lib("experiment"))?;
                let lf = apply(&t, &c, &f).map_err(lib("experiment"))?;
                eig = eig.max(lf.max_abs_diff(&f.scaled(lam)) / lam);
            }
        }
        row(sum, "eigen_equation", &case, eig, tol);
        let m = assemble_dense(&t, &c, DEFAULT_DENSE_CAP).map_err(lib("experiment.max_leaves"))?;
        let dense = dense_eigenvalues(&t, &m).map_err(lib("experiment"))?;
        let listed = spectrum(&t, &c).map_err(lib("experiment"))?.eigenvalues();
        let top = listed.last().copied().unwrap_or(1.0);
        let err = dense
            .iter()
            .zip(&listed)
            .map(|(d, l)| (d - l).abs() / if *l == 0.0 { top } else { *l })
            .fold(0.0, f64::max);
        row(sum, "dense_oracle", &case, err, tol);
        let h = HeatOperator::new(&t, &c, 1.0).map_err(lib("experiment"))?;
        let r = markov_checks(&h, 1.0, seed).map_err(lib("experiment"))?;
        row(sum, "markov", &case, r.max_defect(), tol);
    }
    for (p, alpha) in [(2u32, 1.0), (3, 0.5)] {
        let case = format!("padic:{p}:-2:2 alpha={alpha}");
        let op = FracDerivOp::new(PadicWindow::new(p, -2, 2).map_err(lib("experiment"))?, alpha)
            .map_err(lib("experiment"))?;
        let t = op.window().tree();
        let u = random_mean_zero(t, cfg.seed);
        let a = frac_deriv_apply(&op, &u).map_err(lib("experiment"))?;
        let b = riemann_liouville_apply(&op, &u).map_err(lib("experiment"))?;
        row(sum, "riemann_liouville", &case, a.max_abs_diff(&b) / a.norm_sup(), tol);
        let ts = tail_scalars(&op);
        row(sum, "tail_scalar", &case, (ts.resummed - ts.tau).abs(), tol);
    }
    out.csv("verify.csv", "check,case,value,tolerance,pass", &rows)?;
    sum.field("cases", trees + 2);
    sum.field("failed_checks", sum.failures().len());
    Ok(())
}
