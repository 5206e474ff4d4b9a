use std::path::Path;
use std::process::{Command, Output};

fn rfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfl"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn rfl")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn rates_writes_report_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rates");
    let o = rfl(&["rates", "--kernel", "gaussian", "--m-list", "1,2,4,8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("tables/rates.csv").exists());
    let r = report(&out);
    assert_eq!(r["config"]["command"], "rates");
    assert_eq!(r["config"]["kernel"]["family"], "gaussian");
    assert!(r["fitted_slopes"].as_object().is_some_and(|m| !m.is_empty()));
}

#[test]
fn missing_kernel_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rfl(&["rates", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"kernel": {"family": "gaussian"}, "extra": 1}"#).unwrap();
    assert_eq!(rfl(&["rates", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rfl(&["rates", "--kernel", "cauchy"]).status.code(), Some(2));
    assert_eq!(rfl(&["rates", "--kernel", "gaussian", "--m", "x"]).status.code(), Some(2));
    assert_eq!(rfl(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn eigen_sobolev_bound_holds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("eigen");
    let o = rfl(&[
        "eigen", "--kernel", "sobolev", "--r", "1", "--d", "1", "--m-list", "1,2,4", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    for (name, ok) in r["checks"].as_object().unwrap() {
        assert_eq!(ok, true, "{name}");
    }
    let csv = std::fs::read_to_string(out.join("tables/eigen.csv")).unwrap();
    let mut rdr = csv_rows(&csv);
    let header = rdr.remove(0);
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    let row2 = rdr.iter().find(|r| r[col("m")] == "2").unwrap();
    assert_eq!(row2[col("m_gamma")].parse::<f64>().unwrap(), 1.0);
}

fn csv_rows(s: &str) -> Vec<Vec<String>> {
    s.lines()
        .map(|l| {
            let mut out = Vec::new();
            let mut cur = String::new();
            let mut quoted = false;
            for ch in l.chars() {
                match ch {
                    '"' => quoted = !quoted,
                    ',' if !quoted => out.push(std::mem::take(&mut cur)),
                    c => cur.push(c),
                }
            }
            out.push(cur);
            out
        })
        .collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = rfl(&[
            "train", "--kernel", "gaussian", "--m", "4", "--n-samples", "60", "--widths", "4x4", "--epochs",
            "3", "--seed", "7", "--threads", "1", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.join("tables/train.csv")).unwrap(),
            std::fs::read(out.join("networks/net_4x4.json")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn output_dir_falls_back_to_env() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rfl"))
        .args(["meta", "--kernel", "sobolev", "--r", "2", "--M", "64"])
        .env("RFL_OUT_DIR", tmp.path())
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let md: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(md["m"], 2);
    let r = report(&tmp.path().join("meta"));
    assert_eq!(r["config"]["M"], 64);
}

#[test]
fn help_lists_flags() {
    let o = rfl(&["rates", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in [
        "--config", "--kernel", "--sigma", "--beta", "--r", "--d", "--m-list", "--M", "--seed", "--out",
        "--threads", "--widths", "--n-samples", "--eval-resolution", "default",
    ] {
        assert!(text.contains(flag), "help lacks {flag}");
    }
}

#[test]
fn schema_is_valid_json() {
    let o = rfl(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["additionalProperties"], false);
}
