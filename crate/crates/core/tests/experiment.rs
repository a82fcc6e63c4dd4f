use lattice_core::distributions::DistributionSpec;
use lattice_core::experiment::*;
use lattice_core::verification::TestReport;
use lattice_core::Error;

const DB_UDKDV: &str = r#"{
  "experiment": "detailed_balance",
  "model": {"family": "udKdV", "params": {"J": 1, "K": 2}},
  "measures": {
    "mu": {"family": "stExp", "params": {"lambda": 0.5, "c1": 0, "c2": 1}},
    "nu": {"family": "stExp", "params": {"lambda": 0.5, "c1": 0, "c2": 2}}
  },
  "mc": {"samples": 20000, "seed": 17}
}"#;

fn config_error(text: &str) -> (String, String) {
    match parse_config(text) {
        Err(Error::Config { field, reason }) => (field, reason),
        other => panic!("expected a config error, got {other:?}"),
    }
}

fn reports(o: Outcome) -> Vec<TestReport> {
    match o {
        Outcome::Reports(r) => r,
        Outcome::Field(_) => panic!("expected reports"),
    }
}

fn with(text: &str, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    edit(&mut v);
    v.to_string()
}

// Parsing.

#[test]
fn minimal_detailed_balance_config_parses() {
    let c = parse_config(DB_UDKDV).unwrap();
    assert_eq!(c.experiment, ExperimentKind::DetailedBalance);
    assert_eq!(c.mc.seed, 17);
    assert_eq!(c.mc.window, 4096);
    assert_eq!(c.test.alpha, 0.01);
    assert_eq!(c.label(), "detailed_balance");
}

#[test]
fn missing_seed_is_a_config_error() {
    let text = with(DB_UDKDV, |v| {
        v["mc"].as_object_mut().unwrap().remove("seed");
    });
    assert_eq!(config_error(&text), ("mc.seed".to_string(), "required".to_string()));
    let text = with(DB_UDKDV, |v| {
        v.as_object_mut().unwrap().remove("mc");
    });
    assert_eq!(config_error(&text).0, "mc");
}

#[test]
fn dkdv_invariance_needs_a_solvable_regime() {
    let base = r#"{
      "experiment": "invariance",
      "model": {"family": "dKdV", "params": {"alpha": 1, "beta": 1}},
      "measures": {"mu": {"family": "Gam", "params": {"lambda": 2, "c": 1}}},
      "mc": {"seed": 1}
    }"#;
    assert!(parse_config(base).is_ok());
    let bad = with(base, |v| v["model"]["params"]["beta"] = 2.0.into());
    assert_eq!(config_error(&bad).0, "model");
}

#[test]
fn diagnostics_name_the_offending_field() {
    let text = with(DB_UDKDV, |v| v["mc"]["sample"] = 3.into());
    assert_eq!(config_error(&text).0, "mc.sample");
    let text = with(DB_UDKDV, |v| v["measures"]["mu"]["params"]["c2"] = (-1.0).into());
    assert_eq!(config_error(&text).0, "measures.mu");
    let text = with(DB_UDKDV, |v| {
        v["measures"].as_object_mut().unwrap().remove("nu");
    });
    assert_eq!(config_error(&text), ("measures.nu".to_string(), "required".to_string()));
    let text = with(DB_UDKDV, |v| v["model"] = serde_json::json!({"family": "udToda"}));
    assert_eq!(config_error(&text).0, "model");
    let text = with(DB_UDKDV, |v| v["experiment"] = "annealing".into());
    assert_eq!(config_error(&text).0, "experiment");
    let text = with(DB_UDKDV, |v| v["test"] = serde_json::json!({"alpha": 1.5}));
    assert_eq!(config_error(&text).0, "test.alpha");
    assert_eq!(config_error("not json").0, "<root>");
}

#[test]
fn type_ii_models_need_the_tilde_law() {
    let text = r#"{
      "experiment": "burke",
      "model": {"family": "udToda"},
      "measures": {"mu": {"family": "sExp", "params": {"lambda": 1, "c": 0}},
                   "nu": {"family": "sExp", "params": {"lambda": 2, "c": 0}}},
      "mc": {"seed": 1}
    }"#;
    assert_eq!(config_error(text), ("measures.mu_tilde".to_string(), "required".to_string()));
}

#[test]
fn limit_experiments_check_their_schedule() {
    let base = r#"{
      "experiment": "ultradiscretization",
      "target": {"target": "sExp_from_Gam", "lambda": 1, "c": 0},
      "mc": {"samples": 1000, "seed": 2},
      "test": {"eps_list": [0.2, 0.1]}
    }"#;
    assert!(parse_config(base).is_ok());
    let bad = with(base, |v| v["test"]["eps_list"] = serde_json::json!([0.1, 0.2]));
    assert_eq!(config_error(&bad).0, "test.eps_list");
    let bad = with(base, |v| v["target"] = serde_json::json!({"side": "ultra", "lambda1": 1, "lambda2": 1, "c": -1, "j": 1}));
    assert_eq!(config_error(&bad).0, "target");
    let bad = with(base, |v| {
        v.as_object_mut().unwrap().remove("target");
    });
    assert_eq!(config_error(&bad), ("target".to_string(), "required".to_string()));
}

#[test]
fn bundled_suite_parses() {
    let suite = parse_suite(PAPER_SUITE).unwrap();
    assert_eq!(suite.experiments.len(), 26);
    let mut seeds: Vec<u64> = suite.experiments.iter().map(|c| c.mc.seed).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds.len(), 26);
    let single = parse_suite(DB_UDKDV).unwrap();
    assert_eq!(single.experiments.len(), 1);
}

#[test]
fn suite_errors_carry_the_experiment_index() {
    let text = format!(r#"{{"experiments": [{DB_UDKDV}, {}]}}"#, with(DB_UDKDV, |v| v["test"] = serde_json::json!({"bins": 1})));
    match parse_suite(&text) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "experiments[1].test.bins"),
        other => panic!("{other:?}"),
    }
    let text = format!(r#"{{"experiments": [{}]}}"#, with(DB_UDKDV, |v| {
        v["mc"].as_object_mut().unwrap().remove("seed");
    }));
    match parse_suite(&text) {
        Err(Error::Config { field, reason }) => assert_eq!((field.as_str(), reason.as_str()), ("experiments[0].mc.seed", "required")),
        other => panic!("{other:?}"),
    }
}

// Running.

#[test]
fn detailed_balance_passes_and_perturbation_fails() {
    let c = parse_config(DB_UDKDV).unwrap();
    let out = run_experiment(&c).unwrap();
    assert!(out.pass(), "{:?}", reports(out));
    let off = with(DB_UDKDV, |v| v["measures"]["mu"]["params"]["lambda"] = 1.5.into());
    let out = run_experiment(&parse_config(&off).unwrap()).unwrap();
    assert!(!out.pass());
}

#[test]
fn exact_bbs_perturbation_fails() {
    let suite = parse_suite(PAPER_SUITE).unwrap();
    let mut c = suite.experiments.iter().find(|c| c.label() == "db_bbs_exact").unwrap().clone();
    assert!(run_experiment(&c).unwrap().pass());
    c.measures.insert("mu".into(), DistributionSpec::sstb_geo(0.8, 0.0, 2.0, 1.5, 1.0));
    assert!(!run_experiment(&c).unwrap().pass());
}

#[test]
fn bbs_soliton_moves_three_sites_per_step() {
    let mut values = vec![0.0; 30];
    values[3..6].copy_from_slice(&[1.0, 1.0, 1.0]);
    let text = serde_json::json!({
        "experiment": "simulate",
        "model": {"family": "udKdV", "params": {"J": 1, "K": "inf"}},
        "initial": {"offset": 1, "values": values},
        "mc": {"time_steps": 2, "margin": 8, "seed": 0}
    })
    .to_string();
    let field = match run_experiment(&parse_config(&text).unwrap()).unwrap() {
        Outcome::Field(f) => f,
        Outcome::Reports(_) => panic!("expected a field"),
    };
    let balls = |t: usize| {
        let row = &field.rows[t];
        (row.offset..row.end()).filter(|&n| row.x(n) == 1.0).collect::<Vec<i64>>()
    };
    assert_eq!(balls(0), vec![4, 5, 6]);
    assert_eq!(balls(2), vec![10, 11, 12]);
    assert_eq!(field.local_residual().unwrap(), 0.0);
    let csv = emit_plot_data(PlotInput::Field(&field), PlotKind::FieldHeatmap).unwrap();
    assert!(csv.starts_with("t,n,value\n"));
    assert!(csv.lines().any(|l| l == "2,12,1"));
}

#[test]
fn sampled_simulation_is_reproducible() {
    let text = r#"{
      "experiment": "simulate",
      "model": {"family": "dToda"},
      "measures": {"mu": {"family": "Gam", "params": {"lambda": 1, "c": 1}},
                   "mu_tilde": {"family": "Gam", "params": {"lambda": 3, "c": 1}}},
      "mc": {"window": 200, "margin": 100, "time_steps": 5, "seed": 9}
    }"#;
    let c = parse_config(text).unwrap();
    let a = simulate(&c).unwrap();
    assert_eq!(a, simulate(&c).unwrap());
    assert_eq!(a.rows.len(), 6);
    assert!(a.local_residual().unwrap() < 1e-9);
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let text = r#"{
      "experiment": "invariance",
      "model": {"family": "udKdV", "params": {"J": 2, "K": 4}},
      "measures": {"mu": {"family": "stExp", "params": {"lambda": 1, "c1": 0, "c2": 2}},
                   "nu": {"family": "stExp", "params": {"lambda": 1, "c1": 0, "c2": 4}}},
      "mc": {"window": 1024, "margin": 128, "n_fields": 8, "seed": 5}
    }"#;
    let c = parse_config(text).unwrap();
    let json = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = reports(pool.install(|| run_experiment(&c)).unwrap());
        reports_json(&[(&c, &r)]).unwrap()
    };
    let one = json(1);
    assert_eq!(one, json(1));
    assert_eq!(one, json(3));
}

#[test]
fn outputs_are_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let c = parse_config(DB_UDKDV).unwrap();
    let r = reports(run_experiment(&c).unwrap());
    let json_path = dir.path().join("out.json");
    write_reports(&[(&c, &r)], &json_path, OutputFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v[0]["experiment"], "detailed_balance");
    assert_eq!(v[0]["seed"], 17);
    assert!(v[0]["anchor"].is_string());
    let csv_path = dir.path().join("out.csv");
    write_reports(&[(&c, &r)], &csv_path, OutputFormat::Csv).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "experiment,model,statistic_name,value,threshold,pass,n,seed");
    let row = lines.next().unwrap();
    assert!(row.starts_with("detailed_balance,\"{\"\"family\"\":\"\"udKdV\"\""), "{row}");
    assert!(row.ends_with(",true,20000,17"), "{row}");
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
    let missing = dir.path().join("no/such/dir/out.json");
    assert!(matches!(write_reports(&[(&c, &r)], &missing, OutputFormat::Json), Err(Error::Io(_))));
}

// Plot data.

#[test]
fn ks_curve_has_one_row_per_eps() {
    let text = r#"{
      "experiment": "ultradiscretization",
      "target": {"target": "sExp_from_Gam", "lambda": 1, "c": 0},
      "mc": {"samples": 5000, "seed": 3},
      "test": {"eps_list": [0.4, 0.2, 0.1]}
    }"#;
    let r = reports(run_experiment(&parse_config(text).unwrap()).unwrap());
    let csv = emit_plot_data(PlotInput::Report(&r[0]), PlotKind::KsCurve).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,ks");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("0.1,"));
}

#[test]
fn field_heatmap_of_a_grid() {
    let grid: Vec<Vec<f64>> = (0..10).map(|t| (0..10).map(|n| (t * n) as f64).collect()).collect();
    let csv = emit_plot_data(PlotInput::Grid(&grid), PlotKind::FieldHeatmap).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.lines().any(|l| l == "9,10,81"));
}

#[test]
fn marginal_histogram_counts_every_draw() {
    let law = DistributionSpec::gig(1.0, 1.0, 1.0).build().unwrap();
    let values = law.sample_n(&mut lattice_core::RngStream::new(4), 100_000);
    let csv = emit_plot_data(PlotInput::Sample { values: &values, law: &law, bins: 32 }, PlotKind::MarginalHist).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(csv.lines().next().unwrap(), "bin_left,bin_right,count,expected");
    assert_eq!(rows.len(), 32);
    assert_eq!(rows.iter().map(|r| r[2]).sum::<f64>(), 100_000.0);
    let expected: f64 = rows.iter().map(|r| r[3]).sum();
    // Bins span the sample range, so the law's tails beyond it are missing.
    assert!((expected - 100_000.0).abs() < 10.0, "{expected}");
    let discrete = DistributionSpec::ss_geo(0.5, 0.0, 1.0).build().unwrap();
    let draws = discrete.sample_n(&mut lattice_core::RngStream::new(5), 1000);
    let csv = emit_plot_data(PlotInput::Sample { values: &draws, law: &discrete, bins: 4 }, PlotKind::MarginalHist).unwrap();
    let total: f64 = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1000.0).abs() < 1.0, "{total}");
}

#[test]
fn plot_kind_must_match_input() {
    let grid = vec![vec![1.0]];
    assert!(matches!(emit_plot_data(PlotInput::Grid(&grid), PlotKind::KsCurve), Err(Error::KindMismatch(_))));
    let c = parse_config(DB_UDKDV).unwrap();
    let r = reports(run_experiment(&c).unwrap());
    assert!(matches!(emit_plot_data(PlotInput::Report(&r[0]), PlotKind::KsCurve), Err(Error::KindMismatch(_))));
    assert!(matches!(emit_plot_data(PlotInput::Report(&r[0]), PlotKind::MarginalHist), Err(Error::KindMismatch(_))));
}
