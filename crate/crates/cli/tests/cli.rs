use std::path::Path;
use std::process::{Command, Output};

fn voltkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voltkit")).args(args).env_remove("VOLTKIT_SEED").output().expect("spawn voltkit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn build_succeeds_and_is_reproducible() {
    let args = ["build", "--rank", "4", "--phi", "1,2,3,4,2+3"];
    let first = voltkit(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, voltkit(&args).stdout);
    let v = json(&first);
    assert_eq!(v["metadata"]["phi"], "1,2,3,4,2+3");
    assert_eq!(v["poisson"]["rank"], 4);
    assert!(v["lax"]["L"].is_array() && v["lax"]["B"].is_array());
    let casimirs = v["integrals"]["casimirs"].as_array().unwrap();
    assert!(casimirs.iter().any(|c| c["expr"] == "x2*x3*x5"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&voltkit(&["build", "--rank", "4", "--phi", "1,2,3,4,1+2"])), 2);
    assert_eq!(code(&voltkit(&["build", "--rank", "3", "--phi", "1,2,3,1+3"])), 3);
    assert_eq!(code(&voltkit(&["build", "--rank", "3"])), 3);
    assert_eq!(code(&voltkit(&["family", "--case", "f2", "--rank", "3"])), 4);
    assert_eq!(code(&voltkit(&["twodiag", "--m", "3", "--n", "5"])), 4);
    assert_eq!(code(&voltkit(&["--version"])), 0);
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let p = path.to_str().unwrap();
    let out = voltkit(&["--out", p, "build", "--rank", "3", "--phi", "1,2,3,1+2,2+3"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let out = voltkit(&["verify", "--input", p]);
    assert_eq!(code(&out), 0);
    let cert = json(&out);
    assert!(cert["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));

    let mut report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    report["odes"]["a_form"][0] = "a1*a2^2".into();
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&report).unwrap()).unwrap();
    let out = voltkit(&["verify", "--input", tampered.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    assert!(json(&out)["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail"));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{}").unwrap();
    assert_eq!(code(&voltkit(&["verify", "--input", garbage.to_str().unwrap()])), 3);
    assert_eq!(code(&voltkit(&["verify", "--input", missing(dir.path()).as_str()])), 1);
}

fn missing(dir: &Path) -> String {
    dir.join("absent.json").to_str().unwrap().to_string()
}

#[test]
fn enumerate_rank_four() {
    let out = voltkit(&["--jobs", "2", "enumerate", "--rank", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["lax_count"], 59);
    assert_eq!(v["failing_masks"], serde_json::json!([1, 11, 32, 33, 56]));
    let lv: Vec<&str> = v["lv_subsets"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(lv, ["1,2,3,4", "1,2,3,4,1+2+3", "1,2,3,4,1+2+3+4", "1,2,3,4,2+3", "1,2,3,4,2+3+4"]);
    let text = voltkit(&["--format", "text", "enumerate", "--rank", "3"]);
    assert!(String::from_utf8(text.stdout).unwrap().starts_with("rank 3: 8/8 admit a Lax pair"));
}

#[test]
fn text_format() {
    let out = voltkit(&["--format", "text", "family", "--case", "pkm", "--rank", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pkm"));
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn integrate_reports_drift() {
    let out = voltkit(&["integrate", "--m", "2", "--n", "7", "--t-end", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["method"], "rk4");
    assert!(v["divergence"].is_null());
    for check in v["certificates"]["checks"].as_array().unwrap() {
        assert_eq!(check["kind"], "numeric");
        assert!(check["witness"]["max"].as_f64().unwrap() < 1e-8);
    }
    let bad = voltkit(&["integrate", "--rank", "3", "--phi", "1,2,3", "--x0", "1,2"]);
    assert_eq!(code(&bad), 4);
    let bad = voltkit(&["integrate", "--rank", "3", "--phi", "1,2,3", "--x0", "1,x,2"]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn seed_from_environment() {
    let args = ["build", "--rank", "3", "--phi", "1,2,3"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_voltkit")).args(args).env("VOLTKIT_SEED", "9").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(v["metadata"]["seed"], 9);
    let flag = voltkit(&["--seed", "9", "build", "--rank", "3", "--phi", "1,2,3"]);
    assert_eq!(with_env.stdout, flag.stdout);
}
