use std::f64::consts::{LN_2, PI};
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn minlen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minlen")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let cfg = fixture("small.json");
    let a = minlen(&["verify", "--config", cfg.to_str().unwrap()]);
    let b = minlen(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["summary"]["fail"], 0);
    let reports = doc["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["verdict"] != "fail"));
    let digests: Vec<&str> = reports.iter().map(|r| r["inputs_digest"].as_str().unwrap()).collect();
    assert!(digests.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn thread_cap_does_not_change_output() {
    let cfg = fixture("small.json");
    let a = minlen(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let b = Command::new(env!("CARGO_BIN_EXE_minlen"))
        .args(["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"])
        .env("THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn injected_perturbation_fails_with_exit_one() {
    let cfg = fixture("inject_failure.json");
    let out = minlen(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let failing: Vec<_> = doc["reports"].as_array().unwrap().iter().filter(|r| r["verdict"] == "fail").collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|r| r["relation_id"] == "entropy_identity"));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(minlen(&["verify", "--config", "/nonexistent/run.json"]).status.code(), Some(2));
    let empty = fixture("empty_grid.json");
    assert_eq!(minlen(&["sweep", "--param", "beta", "--config", empty.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(minlen(&["verify", "--state", "square_q"]).status.code(), Some(2));
    assert_eq!(minlen(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(minlen(&["show-state", "--name", "nope"]).status.code(), Some(2));
}

#[test]
fn csv_report_has_fixed_header() {
    let cfg = fixture("small.json");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = minlen(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "relation_id,state,beta,sigma,alpha,gamma,delta_k,delta_x,lhs,rhs,margin,est_error,verdict"
    );
    assert!(text.lines().count() > 20);
}

#[test]
fn beta_sweep_keeps_uniform_correction_at_two_ln_two() {
    let cfg = fixture("small.json");
    let out = minlen(&["sweep", "--param", "beta", "--config", cfg.to_str().unwrap(), "--beta", "0.01,0.3,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "correction_term").unwrap();
    let pv = headers.iter().position(|h| h == "param_value").unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if let Ok(c) = rec[col].parse::<f64>() {
            assert!((c - 2.0 * LN_2).abs() < 1e-8, "{c}");
            seen.insert(rec[pv].to_string());
        }
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn sigma_sweep_has_nonincreasing_sf() {
    let cfg = fixture("small.json");
    let out = minlen(&["sweep", "--param", "sigma", "--config", cfg.to_str().unwrap(), "--sigma", "0.5,1,2,4", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let mut curve: Vec<(f64, f64, f64)> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["relation_id"] == "sf_bound")
        .map(|r| (r["param_value"].as_f64().unwrap(), r["s_f"].as_f64().unwrap(), r["s_f_bound"].as_f64().unwrap()))
        .collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(curve.len(), 4);
    assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
    assert!(curve.iter().all(|c| c.1 <= c.2.min(1.0)));
}

fn table(doc: &serde_json::Value, name: &str) -> (Vec<f64>, Vec<f64>) {
    let t = doc["tables"].as_array().unwrap().iter().find(|t| t[0] == name).unwrap();
    let col = |k: &str| t[1][k].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    (col("coordinate"), col("density"))
}

#[test]
fn show_state_dumps_cauchy_wavenumber_density() {
    let out = minlen(&["show-state", "--name", "uniform_q", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let (k, u) = table(&doc, "u_k");
    for (k, u) in k.iter().zip(&u) {
        let want = 1.0 / (PI * (1.0 + k * k));
        assert!((u - want).abs() <= 1e-10 * want.max(1e-10), "k {k}: {u} vs {want}");
    }
    for m in ["mass_v_q", "mass_u_k", "mass_w_x"] {
        assert!((doc["scalars"][m].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn show_state_undeformed_wavenumber_equals_auxiliary() {
    let out = minlen(&["show-state", "--name", "raised_cosine_q", "--beta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(table(&doc, "u_k"), table(&doc, "v_q"));
    let csv = minlen(&["show-state", "--name", "raised_cosine_q", "--beta", "0", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("table,coordinate,value\nh_q,,"));
}
