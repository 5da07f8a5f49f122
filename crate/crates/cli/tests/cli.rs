use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lagvar_cli::{run_experiment, ExperimentKind, Settings, Summary};

fn lagvar(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lagvar")).args(args).output().unwrap()
}

fn heart() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/heart.csv").display().to_string()
}

fn config(pairs: &[(&str, &str)], out: &Path) -> lagvar_cli::ExperimentConfig {
    let mut s = Settings::new();
    for (k, v) in pairs {
        s.set(k, *v).unwrap();
    }
    s.set("out", out.display().to_string()).unwrap();
    s.resolve().unwrap()
}

fn strip_metadata(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("metadata");
    v
}

#[test]
fn synthetic_iid_summary_has_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iid");
    let o = lagvar(&[
        "run", "--experiment", "synthetic-oracle", "--kernel", "bartlett", "--n-iter", "20000", "--stride", "5000",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = Summary::read(&out.join("summary.json")).unwrap();
    assert_eq!(summary.oracle, Some(1.0));
    let f = &summary.seeds[0].functionals[0];
    assert_eq!(f.relative_error, Some(f.gamma2 - 1.0));
    assert!(f.ci.is_some());
    assert_eq!(summary.config.experiment, ExperimentKind::SyntheticOracle);

    let running = fs::read_to_string(out.join("running").join("seed1_x.csv")).unwrap();
    let mut lines = running.lines();
    assert_eq!(lines.next(), Some("step,gamma2,bandwidth,lags_used,mean,negative_flag"));
    let steps: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps, ["5000", "10000", "15000", "20000"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("synthetic-oracle"));
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("garch.conf");
    fs::write(&file, "# short protocol\nexperiment = garch\nn_iter = 30000\nburn_in = 1000\nstride = 1000\nseeds = 1-3\n").unwrap();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = lagvar(&["run", "--config", file.to_str().unwrap(), "--kernel", "parzen", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for rel in ["per_seed.csv", "running/seed1_u2.csv", "running/seed3_u2.csv"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
    let (sa, sb) = (strip_metadata(&a.join("summary.json")), strip_metadata(&b.join("summary.json")));
    assert_eq!(sa["config"]["out"], a.display().to_string());
    let mut sb = sb;
    sb["config"]["out"] = sa["config"]["out"].clone();
    assert_eq!(sa, sb);
    assert_eq!(sa["config"]["kernel"], "parzen");
    assert_eq!(sa["config"]["n_iter"], 30000);
}

#[test]
fn seeds_merge_in_order_with_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        &[("experiment", "synthetic-oracle"), ("process", "ar1"), ("phi", "0.5"), ("n_iter", "20000"), ("seeds", "4,2,9"), ("running", "false")],
        dir.path(),
    );
    let summary = run_experiment(&cfg).unwrap();
    let seeds: Vec<u64> = summary.seeds.iter().map(|s| s.seed).collect();
    assert_eq!(seeds, [4, 2, 9]);
    let agg = summary.aggregate("x").unwrap();
    let g: Vec<f64> = summary.seeds.iter().map(|s| s.functionals[0].gamma2).collect();
    assert!((agg.gamma2_mean - g.iter().sum::<f64>() / 3.0).abs() < 1e-12);
    assert!(agg.gamma2_sd.unwrap() > 0.0);
    assert_eq!(agg.oracle, Some(4.0));
    assert!(!dir.path().join("running").exists());
    let rows = fs::read_to_string(dir.path().join("per_seed.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--experiment", "garch", "--kernel", "tukey", "--out", out],
        vec!["run", "--experiment", "garch", "--bandwidth", "nw:c0=0", "--out", out],
        vec!["run", "--experiment", "garch", "--bandwidth", "wide", "--out", out],
        vec!["run", "--experiment", "unknown", "--out", out],
        vec!["run", "--experiment", "garch", "--set", "colour=red", "--out", out],
        vec!["run", "--experiment", "garch", "--n-iter", "10", "--burn-in", "20", "--out", out],
        vec!["run", "--experiment", "garch", "--set", "alpha=0.9", "--set", "beta=0.9", "--out", out],
        vec!["run", "--bogus-flag"],
    ] {
        let o = lagvar(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let bad_file = dir.path().join("bad.conf");
    fs::write(&bad_file, "experiment garch\n").unwrap();
    let o = lagvar(&["run", "--config", bad_file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let unwritable = blocker.join("out");
    let o = lagvar(&["run", "--experiment", "synthetic-oracle", "--n-iter", "1000", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = lagvar(&[
        "run", "--experiment", "logistic-plain", "--set", "data=/nonexistent/heart.csv", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let missing = dir.path().join("missing.json");
    let o = lagvar(&["compare", missing.to_str().unwrap(), missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compare_identical_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    let short = |name: &str, experiment: &str| -> PathBuf {
        let out = dir.path().join(name);
        let cfg = config(
            &[("experiment", experiment), ("n_iter", "6000"), ("burn_in", "1000"), ("data", &heart()), ("running", "false")],
            &out,
        );
        run_experiment(&cfg).unwrap();
        out.join("summary.json")
    };
    let plain = short("plain", "logistic-plain");
    let adaptive = short("adaptive", "logistic-adaptive");
    let garch = short("garch", "garch");

    let same = lagvar_cli::compare_report(&plain, &plain).unwrap();
    assert!(same.rows.iter().all(|r| r.left_ci == r.right_ci && r.overlap && !r.right_narrower));
    assert_eq!(same.rows.len(), 4);

    let o = lagvar(&["compare", plain.to_str().unwrap(), adaptive.to_str().unwrap()]);
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("logistic-plain") && table.contains("logistic-adaptive") && table.contains("beta4"));

    let o = lagvar(&["compare", plain.to_str().unwrap(), garch.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn adaptive_state_log_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        &[("experiment", "logistic-adaptive"), ("n_iter", "2000"), ("burn_in", "500"), ("data", &heart()), ("log_states", "true"), ("coords", "2"), ("stride", "500")],
        dir.path(),
    );
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.target.functionals, ["beta2"]);
    let log = fs::read_to_string(dir.path().join("states").join("seed1.csv")).unwrap();
    assert_eq!(log.lines().count(), 2001);
    assert!(dir.path().join("running").join("seed1_beta2.csv").exists());
    assert!(summary.seeds[0].acceptance_rate.unwrap() > 0.0);
}
