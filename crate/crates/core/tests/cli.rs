use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fdrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdrlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn reject_four_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.01\n0.2\n0.3\n0.9\n");
    let o = fdrlab(&["reject", "--input", &input, "--method", "bh", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index,p,rejected\n0,0.01,1\n"));
    assert!(text.ends_with("# R=3 threshold=0.375 q_used=0.5\n"), "{text}");
}

#[test]
fn reject_with_labels_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p,is_null\n0.01,0\n0.9,1\n0.02,0\n0.03,1\n");
    let out = dir.path().join("out.csv");
    let o = fdrlab(&["reject", "--input", &input, "--q", "0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.contains("# R=3 threshold=0.15000000000000002 q_used=0.2 S=1 pi1=0.3333333333333333 pi2=1 pi3=0\n"), "{text}");
}

#[test]
fn reject_bhs_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.001\n0.01\n0.5\n0.9\n");
    let o = fdrlab(&["reject", "--input", &input, "--method", "bhs", "--delta", "0.1", "--x", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gamma_hat="));
}

#[test]
fn reject_edge_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    let o = fdrlab(&["reject", "--input", &empty, "--q", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# R=0 "));

    let bad = write(dir.path(), "bad.csv", "p\n0.2\n1.5\n");
    assert_eq!(fdrlab(&["reject", "--input", &bad, "--q", "0.1"]).status.code(), Some(2));
    let missing = dir.path().join("nope.csv");
    assert_eq!(fdrlab(&["reject", "--input", missing.to_str().unwrap(), "--q", "0.1"]).status.code(), Some(2));
}

#[test]
fn theory_outputs() {
    let o = fdrlab(&["theory", "--model", "power:alpha=0.1", "--gamma", "0.5", "--q", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["summary"]["rho"].as_f64().unwrap() - 0.4352).abs() < 5e-5);
    assert!((v["power_limit"].as_f64().unwrap() - 0.784).abs() < 1e-3);

    let o = fdrlab(&["theory", "--model", "degenerate:x0=0.9", "--gamma", "0.5", "--q", "0.1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["rho"].as_f64(), Some(0.0));
    assert!(v["summary"]["fdr_limit"].is_null());

    let x0 = (0.25f64 / 0.75).to_string();
    let o = fdrlab(&["theory", "--model", &format!("degenerate:x0={x0}"), "--gamma", "0.5", "--q", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["unique"], false);
    assert_eq!(v["summary"]["borderline"], true);
    assert!((v["borderline_limits"]["r_over_m"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let o = fdrlab(&["theory", "--model", "degenerate:x0=0.9", "--gamma", "0.5", "--delta", "0.05", "--x", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["bounds"].is_null());
    assert!(v["diagnostic"].is_string());

    assert_eq!(fdrlab(&["theory", "--model", "weibull:k=2", "--gamma", "0.5", "--q", "0.2"]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_thread_independent() {
    let cfg = r#"{"mixture":{"gamma":0.5,"alt":"power:alpha=0.1","m":500},"procedure":{"method":"bh","q":0.2},"reps":200}"#;
    let a = fdrlab(&["simulate", "--config", cfg, "--seed", "7", "--threads", "1"]);
    let b = fdrlab(&["simulate", "--config", cfg, "--seed", "7", "--threads", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(v.get("wall_time_secs").is_none());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["config", "statistics", "reps", "seed"]);

    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "cfg.json", cfg);
    let c = fdrlab(&["simulate", "--config", &path, "--seed", "7", "--threads", "1"]);
    assert_eq!(c.stdout, a.stdout);
    let t = fdrlab(&["simulate", "--config", cfg, "--timing"]);
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!(v["wall_time_secs"].is_number());

    let zero = cfg.replace("\"reps\":200", "\"reps\":0");
    assert_eq!(fdrlab(&["simulate", "--config", &zero]).status.code(), Some(2));
    assert_eq!(fdrlab(&["simulate", "--config", "{not json"]).status.code(), Some(2));
}

#[test]
fn figures_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    let o = fdrlab(&[
        "figures", "--which", "fig2", "--model", "power:alpha=0.1", "--gamma", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("fig2.csv")).unwrap();
    assert!(text.starts_with("q,power,fdr\n"));
    let row = text.lines().find(|l| l.starts_with("0.2000000000,")).unwrap();
    let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    // Closed form for the power family, written out independently.
    let rho = (0.2f64 * 0.5 / 0.9).powf(1.0 / 0.9) / 0.2;
    let exact = rho * 0.9 / 0.5;
    assert!((cells[1] - exact).abs() < 1e-9, "{} vs {exact}", cells[1]);
    assert!((cells[1] - 0.784).abs() < 1e-3);
    assert_eq!(cells[2], 0.1);

    let all = dir.path().join("all");
    let o = fdrlab(&["figures", "--model", "power:alpha=0.1", "--gamma", "0.5", "--out", all.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["fig1.csv", "fig2.csv", "fig3.csv"] {
        assert!(all.join(name).exists(), "{name}");
    }
    assert!(fs::read_to_string(all.join("fig1.csv")).unwrap().starts_with("t,uniform,h\n"));
    assert!(fs::read_to_string(all.join("fig3.csv")).unwrap().starts_with("x,power_lo,power_hi\n"));
}

#[test]
fn verify_quick_passes() {
    let o = fdrlab(&["verify", "--quick"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 7, "{text}");
}

#[test]
fn usage_errors() {
    assert_eq!(fdrlab(&[]).status.code(), Some(2));
    assert_eq!(fdrlab(&["reject"]).status.code(), Some(2));
    assert_eq!(fdrlab(&["figures", "--which", "fig9", "--model", "power:alpha=0.1", "--gamma", "0.5", "--out", "x"]).status.code(), Some(2));
}
