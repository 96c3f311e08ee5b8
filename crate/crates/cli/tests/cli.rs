use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hilap(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilap"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV artifact, after the comment and header lines.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn padic_spectrum_is_powers_of_p() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(dir.path(), &["spectrum", "--tree", "padic:2:-2:2", "--alpha", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("spectrum.csv"));
    let total: usize = table.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(total, 16);
    let mut lambdas: Vec<f64> = table.iter().map(|r| r[0].parse().unwrap()).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    assert_eq!(lambdas, [0.0, 0.25, 0.5, 1.0, 2.0]);
    assert!(stdout(&o).contains("total_multiplicity = 16"));
}

#[test]
fn every_csv_starts_with_the_version_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(dir.path(), &["heat", "--tree", "binary:4", "--times", "0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let first = summary.lines().next().unwrap();
    assert!(first.starts_with("#hilap v1 config_sha256="));
    assert_eq!(first.len(), "#hilap v1 config_sha256=".len() + 64);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            let text = fs::read_to_string(&p).unwrap();
            assert_eq!(text.lines().next(), Some(first), "{}", p.display());
        }
    }
}

#[test]
fn heat_at_time_zero_returns_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.csv");
    fs::write(&input, "leaf,value\n0,1\n1,0\n2,0\n3,-1\n").unwrap();
    let out = dir.path().join("out");
    let o = hilap(
        &out,
        &["heat", "--tree", "binary:2", "--times", "0", "--input", input.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let values: Vec<f64> = rows(&out.join("heat.csv")).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(values, [1.0, 0.0, 0.0, -1.0]);
}

#[test]
fn prescribe_lands_in_target() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(
        dir.path(),
        &["prescribe", "--S", "[1,2]", "--density", "6", "--shape", "binary:9"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("all λ in S: true"));
    for r in rows(&dir.path().join("choice.csv")) {
        let l: f64 = r[2].parse().unwrap();
        assert!((1.0..=2.0).contains(&l), "{l}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "synth-t2", "--tree", "random:4", "--level", "1"];
    assert!(hilap(a.path(), &args).status.success());
    assert!(hilap(b.path(), &args).status.success());
    for name in ["config.toml", "metric.txt", "used_values.csv", "summary.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn run_reproduces_a_saved_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = hilap(&first, &["--seed", "3", "padic", "--p", "3", "--alpha", "0.5", "--kmin", "-1", "--kmax", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = dir.path().join("second");
    let cfg = first.join("config.toml");
    let o = hilap(&second, &["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["config.toml", "padic.csv", "spectrum.csv", "summary.txt"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn empty_config_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let o = hilap(&dir.path().join("out"), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error=ConfigParse line=1 column=1 "), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn syntax_error_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\n\n[experiment\nkind = \"verify\"\n").unwrap();
    let o = hilap(&dir.path().join("out"), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error=ConfigParse line=3 "), "{}", stderr(&o));
}

#[test]
fn validation_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[tree]\nshape = \"binary:3\"\n[experiment]\nkind = \"heat\"\ntimes = [1.0]\n").unwrap();
    let o = hilap(&dir.path().join("out"), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error=Validation key=choice "), "{}", stderr(&o));
}

#[test]
fn oversized_window_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(dir.path(), &["spectrum", "--tree", "padic:2:-20:20", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error=WindowTooLarge "), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = hilap(&blocker.join("sub"), &["verify", "--trees", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error=Io "), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(dir.path(), &["run", "/nonexistent/hilap.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn failed_check_exits_with_tolerance_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(
        dir.path(),
        &["--tolerance", "1e-300", "padic", "--p", "3", "--alpha", "0.7", "--kmin", "-2", "--kmax", "2"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stderr(&o).starts_with("error=Tolerance "));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn verify_passes_on_seeded_windows() {
    let dir = tempfile::tempdir().unwrap();
    let o = hilap(dir.path(), &["--seed", "9", "verify", "--trees", "4", "--max-leaves", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("failed_checks = 0"));
    assert!(rows(&dir.path().join("verify.csv")).iter().all(|r| r[4] == "true"));
}
