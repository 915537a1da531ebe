use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rwrs_cli::records::read_csv;
use rwrs_cli::run::{estimate_b, simulate, verify, Options, Suite};

const SMALL: &str = r#"
alpha = 2.0
beta = 2.0
replicates = 2
master_seed = 7

[step_law]
name = "lazy_simple"

[scenery_law]
name = "rademacher"

[kernel]
name = "product_plus_sum"

[n_grid]
points = [16, 32]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn opts(config: PathBuf, out: PathBuf) -> Options {
    Options {
        config,
        out,
        threads: Some(1),
        ..Options::default()
    }
}

fn suite_config() -> String {
    SMALL
        .replace("replicates = 2", "replicates = 200")
        .replace("points = [16, 32]", "min = 64\nmax = 512\nper_octave = 1")
        + "\n[verify.scaling]\nfit_n_min = 64\n[verify.remainder]\nn_min = 64\n"
}

#[test]
fn simulate_writes_one_row_per_replicate_and_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("out");
    simulate(&opts(cfg, out.clone())).unwrap();
    let text = fs::read_to_string(out.join("records.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "replicate,n,u,l,r,v,range");
    assert_eq!(lines.len(), 5);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_ledger"]["master_seed"], 7);
    assert_eq!(
        manifest["seed_ledger"]["replicates"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &suite_config());
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let out = dir.path().join(format!("t{threads}"));
        let o = Options {
            threads: Some(threads),
            ..opts(cfg.clone(), out.clone())
        };
        verify(&o, Suite::Scaling).unwrap();
        outputs.push((
            fs::read(out.join("records.csv")).unwrap(),
            fs::read(out.join("report.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn zero_replicates_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &SMALL.replace("replicates = 2", "replicates = 0"),
    );
    let err = simulate(&opts(cfg, dir.path().join("out"))).unwrap_err();
    assert!(err.to_string().contains("replicates"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn lil_with_beta_below_two_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("beta = 2.0", "beta = 1.5")
        .replace("name = \"rademacher\"", "name = \"sym_pareto_real\"");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let outcome = verify(&opts(cfg, out.clone()), Suite::Lil).unwrap();
    assert!(outcome.refused);
    assert_eq!(outcome.exit_code(), 2);
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("alpha = beta = 2"), "{report}");
}

#[test]
fn ingested_records_give_the_same_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &suite_config());
    let fresh = dir.path().join("fresh");
    simulate(&opts(cfg.clone(), fresh.clone())).unwrap();
    let csv = fresh.join("records.csv");
    assert!(read_csv(&fs::read(&csv).unwrap()).is_ok());

    let mut reports = Vec::new();
    for (name, ingest) in [("mem", None), ("ing", Some(csv))] {
        let out = dir.path().join(name);
        let o = Options {
            ingest,
            ..opts(cfg.clone(), out)
        };
        let outcome = verify(&o, Suite::Scaling).unwrap();
        let mut r = outcome.report.unwrap();
        r.records_source = String::new();
        reports.push(serde_json::to_value(r).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn lil_refuses_ingested_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let fresh = dir.path().join("fresh");
    simulate(&opts(cfg.clone(), fresh.clone())).unwrap();
    let o = Options {
        ingest: Some(fresh.join("records.csv")),
        ..opts(cfg, dir.path().join("out"))
    };
    assert!(verify(&o, Suite::Lil).unwrap().refused);
}

#[test]
fn estimate_b_refuses_recurrent_walks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let err = estimate_b(&opts(cfg, dir.path().join("out"))).unwrap_err();
    assert!(err.to_string().contains("alpha < 1"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn estimate_b_reports_stabilization() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
alpha = 0.8
beta = 2.0
replicates = 2
master_seed = 3

[step_law]
name = "sym_pareto"

[scenery_law]
name = "gaussian"

[kernel]
name = "product"

[n_grid]
points = [16]

[estimate_b]
horizon = 4000
replicates = 100
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    let out = dir.path().join("out");
    estimate_b(&opts(cfg, out.clone())).unwrap();
    let doc: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("b_estimate.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["b"]["estimate"].as_f64().unwrap() > 0.0);
    assert!(doc["stabilization"]["stabilized"].is_boolean());
}

#[test]
fn binary_maps_outcomes_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_rwrs");
    let good = write_config(dir.path(), "good.toml", SMALL);
    let status = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("a"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));

    let bad = write_config(dir.path(), "bad.toml", "alpha = ");
    let status = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("b"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));

    let status = Command::new(bin)
        .args(["verify", "--suite", "nope"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn seed_env_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let bin = env!("CARGO_BIN_EXE_rwrs");
    let mut csvs = Vec::new();
    for (name, seed) in [("a", None), ("b", Some("123"))] {
        let out = dir.path().join(name);
        let mut cmd = Command::new(bin);
        cmd.args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env_remove("RWRS_SEED");
        if let Some(s) = seed {
            cmd.env("RWRS_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        let m: serde_json::Value =
            serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
        csvs.push((
            fs::read(out.join("records.csv")).unwrap(),
            m["seed_ledger"]["master_seed"].clone(),
        ));
    }
    assert_eq!(csvs[1].1, 123);
    assert_ne!(csvs[0].0, csvs[1].0);
}
