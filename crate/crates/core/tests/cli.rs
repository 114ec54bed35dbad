use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_quasiflow");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_in(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).env("QUASIFLOW_OUTPUT_DIR", out).output().unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = configs().join("kerr.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run_in(&["run", cfg.to_str().unwrap()], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn malformed_configs_exit_with_validation_code() {
    let dir = configs().join("malformed");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let out = tempfile::tempdir().unwrap();
        for verb in ["validate", "run"] {
            let o = run_in(&[verb, path.to_str().unwrap()], out.path());
            assert_eq!(o.status.code(), Some(1), "{verb} {path:?}");
        }
        assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0, "nothing written for {path:?}");
        n += 1;
    }
    assert_eq!(n, 5);
}

#[test]
fn validate_reports_named_findings() {
    let out = tempfile::tempdir().unwrap();
    let cases = [("empty_times.toml", "times: empty"), ("negative_hbar.toml", "hbar_ladder: must be positive")];
    for (file, finding) in cases {
        let o = run_in(&["validate", configs().join("malformed").join(file).to_str().unwrap()], out.path());
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), finding);
    }
    let o = run_in(&["validate", configs().join("kerr.toml").to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");
}

#[test]
fn io_failures_exit_3() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(&["run", "/nonexistent/config.toml"], out.path());
    assert_eq!(o.status.code(), Some(3));
    let blocker = out.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run_in(&["run", configs().join("harmonic.toml").to_str().unwrap()], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unresolvable_oracle_exits_2_with_advice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        r#"
hbar_ladder = [0.1]
times = [1.0]
pipelines = ["oracle-compare"]
oracle = { n_max = 120 }
[oscillator]
family = "kerr"
parameters = { chi = 1.0 }
[phase_grid]
beta = [[3.0, 0.0]]
[output]
path = "out"
"#,
    )
    .unwrap();
    let o = run_in(&["run", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_max"));
}

#[test]
fn schema_verb_prints_json_schema() {
    let o = Command::new(BIN).arg("schema").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["title"], "RunConfig");
    assert_eq!(v["additionalProperties"], false);
}

#[test]
fn harmonic_corrections_vanish_and_checks_pass() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(&["run", configs().join("harmonic.toml").to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv_rows(&out.path().join("quasiflow.csv"));
    assert_eq!(h.join(","), "oscillator_id,hbar,t,beta_re,beta_im,classical_re,classical_im,corr_re,corr_im,total_re,total_im,warn");
    assert_eq!(rows.len(), 27);
    for r in &rows {
        assert_eq!(r[column(&h, "corr_re")].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[column(&h, "corr_im")].parse::<f64>().unwrap(), 0.0);
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("report.json")).unwrap()).unwrap();
    let names: Vec<&str> = report["pipelines"][1]["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["t0_identity", "harmonic_nullity", "harmonic_exactness"]);
}

#[test]
fn kerr_oracle_slope_and_cosine_onset() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(&["run", configs().join("kerr.toml").to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = report["pipelines"][1]["slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");

    let (h, rows) = csv_rows(&out.path().join("oracle-compare.csv"));
    assert_eq!(&h[12..], ["exact_re", "exact_im", "abs_err"]);
    assert_eq!(rows.len(), 4 * 5 * 6);

    let (h, rows) = csv_rows(&out.path().join("discrepancy.csv"));
    assert_eq!(h.join(","), "oscillator_id,hbar,t,Q,alpha,c_t,excess,verdict");
    let (ti, ci, ei, vi) = (column(&h, "t"), column(&h, "c_t"), column(&h, "excess"), column(&h, "verdict"));
    for r in rows.iter().filter(|r| r[column(&h, "hbar")].parse::<f64>().unwrap() == 0.1) {
        let t: f64 = r[ti].parse().unwrap();
        let c: f64 = r[ci].parse().unwrap();
        if t > 0.0 {
            assert!(c > 1.0);
            assert_eq!(r[vi], "improper");
            // excess ∝ t² at fixed Q
            let e: f64 = r[ei].parse().unwrap();
            let q: f64 = r[column(&h, "Q")].parse().unwrap();
            let unit = rows
                .iter()
                .find(|s| s[ti].parse::<f64>().unwrap() == 1.0 && s[column(&h, "Q")] == r[column(&h, "Q")] && s[1] == r[1])
                .unwrap()[ei]
                .parse::<f64>()
                .unwrap();
            assert!((e - unit * t * t).abs() <= 1e-12, "Q {q} t {t}");
        } else {
            assert_eq!(r[vi], "proper");
        }
    }
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let out = tempfile::tempdir().unwrap();
    run_in(&["run", configs().join("harmonic.toml").to_str().unwrap()], out.path());
    let (h, rows) = csv_rows(&out.path().join("quasiflow.csv"));
    let cell = &rows[9][column(&h, "t")];
    assert_eq!(cell, "6.9999999999999996e-1");
}
