use std::collections::HashMap;
use std::process::Command;

use ppp_ase::cli::{exit_code, run_with_io, OUT_DIR_ENV};
use ppp_ase::Error;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ppp-ase").chain(args.iter().copied());
    let code = run_with_io(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn kv(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", map[key]))
}

#[test]
fn gapa_prints_loading() {
    let (code, out, _) = run(&["gapa", "--alpha", "4"]);
    assert_eq!(code, 0);
    let m = kv(&out);
    assert!((num(&m, "u_star") - 0.5913).abs() < 1e-3);
    assert!((num(&m, "gapa") - 0.8165).abs() < 1e-3);
}

#[test]
fn json_output_parses() {
    let (code, out, _) = run(&["--json", "rate", "-M", "8", "-K", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!((v["mean_rate_nats_per_s_per_hz"].as_f64().unwrap() - 1.72528).abs() < 5e-5);
    assert_eq!(v["is_lower_bound"], false);
}

#[test]
fn rate_ase_and_optimal_k() {
    let (_, out, _) = run(&["rate", "-M", "8.5", "-K", "4.25", "--lower-bound"]);
    assert!(num(&kv(&out), "mean_rate_nats_per_s_per_hz") > 0.0);
    let (code, out, _) = run(&["ase", "--lambda-b", "2", "-M", "10", "-K", "6"]);
    assert_eq!(code, 0);
    assert!((num(&kv(&out), "ase_nats_per_s_per_hz_per_km2") - 2.0 * 8.796_824_773_755).abs() < 1e-6);
    for (m, k) in [("5", "3"), ("10", "6"), ("15", "9")] {
        for method in ["exact", "lower-bound"] {
            let (_, out, _) = run(&["optimal-k", "-M", m, "--method", method]);
            assert_eq!(kv(&out)["k_star"], k);
        }
    }
}

#[test]
fn plan_commands() {
    let (code, out, _) = run(&["plan", "--profile", "macro", "--alpha", "4", "--target", "10"]);
    assert_eq!(code, 0);
    let m = kv(&out);
    assert_eq!((m["m_star"].as_str(), m["k_star"].as_str()), ("35", "6"));
    let (_, out, _) = run(&["plan-sub", "--profile", "pico", "--target", "10"]);
    let m = kv(&out);
    assert_eq!(m["method"], "suboptimal");
    assert!(m.contains_key("m_relaxed"));
    let (_, out, _) = run(&["baseline", "--profile", "pico", "--target", "10", "--kind", "single-antenna"]);
    let m = kv(&out);
    assert_eq!((m["m_star"].as_str(), m["k_star"].as_str()), ("1", "1"));
}

#[test]
fn plan_with_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pico.toml");
    std::fs::write(&path, "p_dbm = 33\neta = 0.08\npc = 6.8\nppre = 1.74\np0 = 1.5\n").unwrap();
    let (code, out, _) = run(&["plan", "--profile", path.to_str().unwrap(), "--target", "10"]);
    assert_eq!(code, 0);
    assert_eq!(kv(&out)["m_star"], "5");

    std::fs::write(&path, "p_dbm = 33\neta = 1.5\npc = 6.8\nppre = 1.74\np0 = 1.5\n").unwrap();
    let (code, _, err) = run(&["plan", "--profile", path.to_str().unwrap(), "--target", "10"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:") && err.lines().count() == 1, "{err}");
}

#[test]
fn sweep_to_stdout_is_unimodal_with_peak_at_six() {
    let (code, out, _) =
        run(&["sweep", "--quantity", "ase_lb", "--axis", "K", "--range", "1:10:1", "--fixed", "M=10,alpha=4,lambda_b=1"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "K");
    assert!(headers.iter().any(|h| h == "M") && headers.iter().any(|h| h == "alpha"));
    assert_eq!(&headers[headers.len() - 1], "ase_lb[nats/s/Hz/km^2]");
    let vals: Vec<f64> = rdr.records().map(|r| r.unwrap()[headers.len() - 1].parse().unwrap()).collect();
    assert_eq!(vals.len(), 10);
    let peak = (0..10).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    assert_eq!(peak + 1, 6);
    assert!(vals[..=peak].windows(2).all(|w| w[1] > w[0]));
    assert!(vals[peak..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_file_output_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/ee.json");
    let args = [
        "sweep", "--quantity", "ee", "--axis", "M", "--range", "30:40:2", "--fixed", "K=6,profile=macro", "--format",
        "json", "--output", path.to_str().unwrap(),
    ];
    assert_eq!(run(&args).0, 0);
    let first = std::fs::read(&path).unwrap();
    assert_eq!(run(&args).0, 0);
    assert_eq!(first, std::fs::read(&path).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["unit"], "nats/s/Hz/W");
}

#[test]
fn sweep_uses_output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ppp-ase"))
        .args(["sweep", "--quantity", "rate_exact", "--axis", "M", "--range", "4:8:1", "--fixed", "K=4"])
        .env(OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    let file = dir.path().join("sweep_rate_exact_M.csv");
    let text = std::fs::read_to_string(file).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn simulate_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let (code, out, _) = run(&[
        "simulate", "-M", "4", "-K", "2", "--trials", "200", "--mode", "gamma-approx", "--samples-csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(kv(&out)["trials"], "200");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("trial,sir,rate,n_bs,r0\n"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn validate_approx_needs_enough_trials() {
    let (code, _, err) = run(&["validate-approx", "-M", "4", "-K", "2", "--trials", "10"]);
    assert_eq!(code, 1);
    assert!(err.contains("10000"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["rate", "-M", "8"]).0, 1);
    assert_eq!(run(&["rate", "-M", "4", "-K", "8"]).0, 1);
    assert_eq!(run(&["rate", "-M", "8", "-K", "4", "--alpha", "2"]).0, 1);
    assert_eq!(run(&["plan", "--profile", "femto", "--target", "1"]).0, 1);
    assert_eq!(run(&["sweep", "--quantity", "ee", "--axis", "K", "--range", "3:1:1"]).0, 1);
    assert_eq!(run(&["sweep", "--quantity", "ee", "--axis", "K", "--range", "1:3:1", "--fixed", "M=5"]).0, 1);
    assert_eq!(exit_code(&Error::NoConvergence { iterations: 200, width: 1.0 }), 2);
    assert_eq!(exit_code(&Error::Quadrature { value: 0.0, error_estimate: 1.0, subdivisions: 2000 }), 2);
    assert_eq!(exit_code(&Error::Domain("x".into())), 1);

    let status = Command::new(env!("CARGO_BIN_EXE_ppp-ase")).args(["rate", "-M", "4", "-K", "8"]).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}
