use super::report::num;
use super::*;
use crate::solver::RicciDensity;

fn small(task: &str, space: &str, extra: &str) -> RunConfig {
    let src = format!(
        "task = \"{task}\"\nspace = \"{space}\"\nseed = 7\n{extra}\n\
         [sampling]\nfunctions = 3\npoints = 3\nflat_points = 20\nconvexity_samples = 20\n\
         levy_functions = 2\nlevy_points = 2\n"
    );
    RunConfig::from_toml(&src).unwrap()
}

fn check<'a>(report: &'a RunReport, name: &str) -> &'a Check {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn minimal_config_takes_defaults() {
    let cfg = RunConfig::from_toml("task = \"verify-reduction\"\nspace = \"S2\"\n").unwrap();
    assert_eq!(cfg.task, Task::VerifyReduction);
    assert_eq!(cfg.profile, ProfileSpec::Hyperbolic);
    assert_eq!(cfg.grid, GridSpec::default());
    assert_eq!(cfg.tolerances, Tolerances::default());
    assert_eq!(cfg.sampling, Sampling::default());
    assert_eq!(cfg.ricci.density, RicciDensity::VolumeCorrected);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.output.report, "report.json");
    cfg.validate().unwrap();
}

#[test]
fn full_config_parses() {
    let src = r#"
task = "solve"
space = "SU(3)/SO(3)"
profile = { custom = { f = "z^2", df = "2*z" } }
density = "exp(r2)"
seed = 9

[grid]
radius = 0.5
nodes = 17

[solver]
newton_tol = 1e-9
max_iter = 20
damping = 0.25
convexity_floor = 1e-6

[tolerances]
reflection = 1e-10

[output]
dir = "elsewhere"
table_prefix = "run_"
"#;
    let cfg = RunConfig::from_toml(src).unwrap();
    assert_eq!(
        cfg.profile,
        ProfileSpec::Custom {
            f: "z^2".into(),
            df: "2*z".into()
        }
    );
    assert_eq!(cfg.grid.nodes, 17);
    assert_eq!(cfg.solver.max_iter, 20);
    assert_eq!(cfg.tolerances.reflection, 1e-10);
    assert_eq!(cfg.tolerances.ricci, Tolerances::default().ricci);
    assert_eq!(cfg.output.table_prefix, "run_");
    cfg.validate().unwrap();
    cfg.profile.build().unwrap();
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    for (src, key) in [
        ("task = \"solve\"\nspace = \"S2\"\ndensty = \"1\"\n", "densty"),
        ("task = \"solve\"\nspace = \"S2\"\n[grid]\nnode = 3\n", "node"),
        ("task = \"solve\"\nspace = \"S2\"\n[solver]\ntol = 1\n", "tol"),
        ("task = \"solve\"\nspace = \"S2\"\n[tolerances]\nlevi = 1\n", "levi"),
    ] {
        match RunConfig::from_toml(src) {
            Err(CliError::Config(msg)) => assert!(msg.contains(key), "{msg}"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }
    assert!(RunConfig::from_toml("task = \"fly\"\nspace = \"S2\"\n").is_err());
    assert!(RunConfig::from_toml("space = \"S2\"\n").is_err());
}

#[test]
fn validation_catches_inconsistent_configs() {
    let bad = |extra: &str, task: &str| {
        let cfg = RunConfig::from_toml(&format!("task = \"{task}\"\nspace = \"S2\"\n{extra}")).unwrap();
        matches!(cfg.validate(), Err(CliError::Config(_)))
    };
    assert!(bad("", "solve"));
    assert!(bad("", "prescribe-ricci"));
    assert!(bad("h = \"0\"\nprofile = \"flat\"\n", "prescribe-ricci"));
    assert!(bad("profile = \"flat\"\n", "verify-levy"));
    assert!(bad("density = \"1\"\n[grid]\nnodes = 2\n", "solve"));
    assert!(bad("density = \"1\"\n[grid]\nradius = -1.0\n", "solve"));
    assert!(bad("[tolerances]\nreduction = 0.0\n", "verify-reduction"));
    assert!(bad("[sampling]\nlevy_levels = 1\n", "verify-levy"));
    assert!(bad("[sampling]\nlevy_coarse_step = 2.0\n", "verify-levy"));
    assert!(bad("density = \"1\"\n[solver]\ndamping = 1.5\n", "solve"));
    assert!(!bad("density = \"1\"\n", "solve"));
    assert!(!bad("profile = \"flat\"\n", "verify-reduction"));
}

#[test]
fn overrides_replace_only_what_is_given() {
    let mut cfg = small("verify-reduction", "S2", "");
    Overrides::default().apply(&mut cfg);
    assert_eq!(cfg, small("verify-reduction", "S2", ""));
    Overrides {
        task: Some(Task::VerifyLevy),
        space: Some("S3".into()),
        out: Some("x/y".into()),
        seed: Some(11),
    }
    .apply(&mut cfg);
    assert_eq!(cfg.task, Task::VerifyLevy);
    assert_eq!(cfg.space, "S3");
    assert_eq!(cfg.output.dir, std::path::PathBuf::from("x/y"));
    assert_eq!(cfg.seed, 11);
}

#[test]
fn task_names_round_trip() {
    for t in [Task::VerifyReduction, Task::VerifyLevy, Task::Solve, Task::PrescribeRicci] {
        assert_eq!(t.name().parse::<Task>().unwrap(), t);
    }
    assert!("solver".parse::<Task>().is_err());
}

#[test]
fn check_semantics() {
    assert!(Check::below("a", 0.5, 1.0).pass);
    assert!(!Check::below("a", 1.0, 1.0).pass);
    assert!(!Check::below("a", f64::NAN, 1.0).pass);
    assert!(Check::at_least("a", 1.0, 1.0).pass);
    assert!(!Check::at_least("a", 0.9, 1.0).pass);
    assert!(Check::none("a", 0).pass);
    assert!(!Check::none("a", 1).pass);
    assert_eq!(Check::none("a", 0).comparison, Comparison::Equal);
    assert!(Check::holds("a", true).pass);
    assert!(!Check::holds("a", false).pass);

    let cfg = small("verify-reduction", "S2", "");
    let ok = RunReport::new(cfg.clone(), vec![Check::none("a", 0)], serde_json::json!({}), vec![]);
    assert!(ok.pass);
    let bad = RunReport::new(
        cfg,
        vec![Check::none("a", 0), Check::below("b", 2.0, 1.0)],
        serde_json::json!({}),
        vec![],
    );
    assert!(!bad.pass);
    assert!(bad.to_text().contains("FAIL  b"));
    assert!(bad.to_text().contains("overall  FAIL"));
}

#[test]
fn numbers_round_trip_through_text() {
    for x in [0.0, -0.0, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
        assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
    assert_eq!(num(f64::INFINITY), "inf");
    assert_eq!(num(0.5), "5.0000000000000000e-1");
}

#[test]
fn report_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("verify-reduction", "S2", "");
    cfg.output.table_prefix = "p_".into();
    let mut t = Table::new("demo", &["a", "b"]);
    t.push(vec![num(1.0), "x,y".into()]);
    let mut report = RunReport::new(cfg, vec![Check::none("a", 0)], serde_json::json!({"k": 1}), vec![t]);
    report.write(dir.path()).unwrap();

    let mut rdr = csv::Reader::from_path(dir.path().join("p_demo.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["a", "b"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "x,y");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["summary"]["k"], 1);
    assert_eq!(json["checks"][0]["comparison"], "=");
    let files: Vec<&str> = json["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["file"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["p_demo.csv", "report.json", "summary.txt"]);
    assert!(json.get("elapsed").is_none());
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn verify_reduction_small_run() {
    let report = run(&small("verify-reduction", "S2-dual", "")).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert_eq!(report.summary["curved_profile"], "hyperbolic");
    let names: Vec<&str> = report.tables.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["factorization", "convexity"]);
    assert_eq!(report.tables[0].rows.len(), 9);
    assert_eq!(report.tables[1].rows.len(), 20);
}

#[test]
fn verify_levy_small_run() {
    let report = run(&small("verify-levy", "S2", "")).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert!(check(&report, "levy_convergence_order").value > 1.9);
    let reference = report.summary["ma_ratio_reference"].as_f64().unwrap();
    for m in report.summary["ma_ratio_means"].as_array().unwrap() {
        let m = m.as_f64().unwrap();
        assert!((m - reference).abs() < 1e-6 * reference, "{m} vs {reference}");
    }
}

#[test]
fn solve_small_run_rank1_and_rank2() {
    let mut cfg = small(
        "solve",
        "S2",
        "density = \"exp(r2)\"\n[grid]\nnodes = 33\n[tolerances]\node_agreement = 1e-3\n",
    );
    let report = run(&cfg).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert!(check(&report, "ode_agreement").value > 1e-6);

    cfg.space = "SU(3)/SO(3)".into();
    cfg.grid.nodes = 9;
    let report = run(&cfg).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert!(report.checks.iter().all(|c| c.name != "ode_agreement"));
    assert_eq!(report.tables[0].header[..2], ["r1", "r2"]);
}

#[test]
fn prescribe_small_run() {
    let cfg = small("prescribe-ricci", "S2", "h = \"0\"\n[grid]\nnodes = 65\n");
    let report = run(&cfg).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert!(check(&report, "ricci_residual").value < 1e-3);
    assert!(report.summary["fit_terms"].as_u64().unwrap() > 0);
}

#[test]
fn run_reports_space_and_expression_errors() {
    let cfg = small("solve", "S7/Q", "density = \"1\"\n");
    assert!(matches!(run(&cfg), Err(CliError::Catalog(_))));
    let cfg = small("solve", "S2", "density = \"exp(\"\n");
    assert!(matches!(run(&cfg), Err(CliError::Expr(_))));
    let cfg = small("solve", "S2", "density = \"-1\"\n");
    assert!(matches!(run(&cfg), Err(CliError::Solver(_))));
}
