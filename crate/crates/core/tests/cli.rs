//! The `symma` binary: exit codes, outputs and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use symma::cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symma"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_with(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

const SMALL_SOLVE: &str = r#"
task = "solve"
space = "SU(3)/SO(3)"
density = "exp(0.5*r2)"
seed = 4

[grid]
nodes = 9

[tolerances]
ode_agreement = 1e-2
"#;

#[test]
fn shipped_configs_parse_and_validate() {
    let mut n = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            RunConfig::load(&path).unwrap().validate().unwrap();
            n += 1;
        }
    }
    assert_eq!(n, 4);
}

#[test]
fn solve_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solve.toml");
    fs::write(&cfg, SMALL_SOLVE).unwrap();
    let out = dir.path().join("out");
    let o = run_with(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("overall  PASS"), "{stdout}");
    for f in ["report.json", "summary.txt", "nodes.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["config"]["space"], "SU(3)/SO(3)");
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("reduce.toml");
    fs::write(
        &cfg,
        "task = \"verify-reduction\"\nspace = \"SU(3)/SO(3)\"\nseed = 12\n\
         [sampling]\nfunctions = 4\npoints = 4\nflat_points = 30\nconvexity_samples = 30\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let read = |name: &str| fs::read(out.join(name)).unwrap();

    assert_eq!(run_with(&cfg, &out, &[]).status.code(), Some(0));
    let first = (read("report.json"), read("factorization.csv"), read("convexity.csv"));
    assert_eq!(run_with(&cfg, &out, &[]).status.code(), Some(0));
    let second = (read("report.json"), read("factorization.csv"), read("convexity.csv"));
    assert!(first == second, "outputs differ between identical runs");

    assert_eq!(run_with(&cfg, &out, &["--seed", "13"]).status.code(), Some(0));
    assert_ne!(read("factorization.csv"), first.1);
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.toml");
    fs::write(
        &strict,
        "task = \"verify-reduction\"\nspace = \"S2\"\n[tolerances]\nreduction = 1e-30\n\
         [sampling]\nfunctions = 2\npoints = 2\nflat_points = 5\nconvexity_samples = 5\n",
    )
    .unwrap();
    let o = run_with(&strict, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  factorization_deviation"));
    assert!(dir.path().join("out/report.json").exists());
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("bad.toml");

    fs::write(&cfg, "task = \"solve\"\nspace = \"S2\"\ndensity = \"1\"\nbogus = 1\n").unwrap();
    let o = run_with(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    fs::write(&cfg, "task = \"solve\"\nspace = \"S2\"\n").unwrap();
    assert_eq!(run_with(&cfg, &out, &[]).status.code(), Some(2));

    fs::write(&cfg, "task = \"solve\"\nspace = \"Nowhere\"\ndensity = \"1\"\n").unwrap();
    assert_eq!(run_with(&cfg, &out, &[]).status.code(), Some(2));

    let o = run_with(&dir.path().join("missing.toml"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solve.toml");
    fs::write(&cfg, SMALL_SOLVE).unwrap();
    let out = dir.path().join("out");
    let o = run_with(&cfg, &out, &["--space", "S2", "--seed", "99"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["space"], "S2");
    assert_eq!(json["config"]["seed"], 99);
    assert_eq!(json["config"]["output"]["dir"], out.to_str().unwrap());
}

#[test]
fn spaces_lists_the_catalog() {
    let o = bin().arg("spaces").output().unwrap();
    assert!(o.status.success());
    let listed: Vec<String> = String::from_utf8_lossy(&o.stdout).lines().map(String::from).collect();
    let expected: Vec<String> = symma::catalog::CATALOG.iter().map(|s| s.to_string()).collect();
    assert_eq!(listed, expected);
}
