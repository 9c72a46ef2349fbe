use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use ssr_core::{Density, PureState};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    run_with_threads(args, None)
}

fn run_with_threads(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ssr-toolkit"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SSR_TOOLKIT_THREADS", t),
        None => cmd.env_remove("SSR_TOOLKIT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn measures_of_the_two_sector_example() {
    let out = run(&["measures", "--state", &path("fig1.json")]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    assert!((v["eoe"].as_f64().unwrap() - h(1.0 / 6.0)).abs() < 1e-12);
    assert!((v["eoe"].as_f64().unwrap() - 0.65002).abs() < 1e-5);
    assert!((v["siv"].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-12);
    let dist: Vec<f64> = serde_json::from_value(v["local_number_distribution"].clone()).unwrap();
    assert!((dist[0] - 1.0 / 6.0).abs() < 1e-12 && (dist[1] - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn constant_number_singlet_has_no_variance() {
    let v = json(&run(&["measures", "--state", &path("constant_singlet.json")]));
    assert!((v["eoe"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["siv"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn single_particle_teleport_succeeds_half_the_time() {
    let out = run(&["teleport", "--n", "1", "--m", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["success_prob_exact"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["success_prob_formula"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn unknown_command_is_a_usage_error() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["distill", "--p0"]).status.code(), Some(2));
}

#[test]
fn out_of_range_probability_is_a_domain_error() {
    let out = run(&["distill", "--p0", "1.5", "--copies", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"], "DomainError");
    assert!(v["detail"].as_str().unwrap().contains("p0"));
}

#[test]
fn unreadable_input_reports_format_error() {
    let out = run(&["measures", "--state", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "Format");
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let cases: [&[&str]; 3] = [
        &["formation", "--rho", &path("paper_rho.json"), "--measure", "siv", "--restarts", "8", "--seed", "11"],
        &["hiding", "--a", &path("phi_plus.json"), "--b", &path("phi_minus.json"), "--unrestricted", "--trials", "40", "--seed", "3"],
        &["teleport", "--n", "3", "--m", "4", "--seed", "9", "--shots", "500"],
    ];
    for args in cases {
        let one = run_with_threads(args, Some("1"));
        let four = run_with_threads(args, Some("4"));
        let auto = run_with_threads(args, Some("0"));
        assert!(one.status.success());
        assert_eq!(one.stdout, four.stdout);
        assert_eq!(one.stdout, auto.stdout);
        assert_eq!(one.stdout, run(args).stdout);
    }
}

#[test]
fn fixtures_match_checksums_and_round_trip() {
    let sums = std::fs::read_to_string(fixture("SHA256SUMS")).unwrap();
    let mut seen = 0;
    for line in sums.lines() {
        let (digest, name) = line.split_once("  ").expect("sha256sum line");
        let bytes = std::fs::read(fixture(name)).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, digest, "{name}");
        let text = String::from_utf8(bytes).unwrap();
        let again = if name == "paper_rho.json" {
            Density::from_json(&text).unwrap().to_json()
        } else {
            PureState::from_json(&text).unwrap().to_json()
        };
        assert_eq!(again.trim_end(), text.trim_end(), "{name}");
        seen += 1;
    }
    assert_eq!(seen, 5);
}

#[test]
fn formation_of_the_mixed_example() {
    let dir = std::env::temp_dir().join(format!("ssr-cli-ens-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for measure in ["eoe", "siv"] {
        let ens = dir.join(format!("{measure}.json"));
        let out = run(&["formation", "--rho", &path("paper_rho.json"), "--measure", measure, "--ensemble-out", ens.to_str().unwrap()]);
        assert!(out.status.success());
        let v = json(&out);
        assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-6, "{measure}: {}", v["value"]);
        assert!(v["reconstruction_error"].as_f64().unwrap() <= 1e-8);
        let members: Value = serde_json::from_str(&std::fs::read_to_string(&ens).unwrap()).unwrap();
        let total: f64 = members["members"].as_array().unwrap().iter().map(|m| m["prob"].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn hidden_bit_stays_hidden() {
    let v = json(&run(&["hiding", "--a", &path("phi_plus.json"), "--b", &path("phi_minus.json"), "--trials", "200"]));
    assert!(v["distance"].as_f64().unwrap() <= 1e-10);
    let v = json(&run(&["hiding", "--a", &path("phi_plus.json"), "--b", &path("phi_minus.json"), "--trials", "100", "--unrestricted"]));
    assert!(v["distance"].as_f64().unwrap() > 0.4);
}

#[test]
fn csv_outputs_have_documented_headers() {
    let out = run(&["teleport-scaling", "--n", "1..4", "--targets", "0.5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,target,m"));
    // 1 - N/(M+1) >= 1/2 first holds at M = 2N - 1
    for (n, line) in (1..=4).zip(lines) {
        assert_eq!(line, format!("{n},0.5,{}", 2 * n - 1));
    }
    let out = run(&["projection-bound", "--copies", "3", "--seed", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("sector,rank,eoe,bound"));
    assert_eq!(text.lines().count(), 1 + 7);
    let out = run(&["distill", "--p0", "0.3", "--copies", "5", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,c_n,log2_count"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn protocol_writes_a_loadable_povm() {
    let dir = std::env::temp_dir().join(format!("ssr-cli-povm-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let povm = dir.join("povm.json");
    let out = run(&["protocol", "--source", &path("fig1.json"), "--target", &path("fig1.json"), "--povm-out", povm.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(json(&out)["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
    let mono = run(&["povm-monotone", "--state", &path("fig1.json"), "--povm", povm.to_str().unwrap()]);
    assert!(mono.status.success());
    assert_eq!(json(&mono)["ok"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn impossible_conversion_is_refused() {
    let out = run(&["protocol", "--source", &path("fig1.json"), "--target", &path("phi_plus.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "NotConvertible");
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("10 of 10 criteria passed"));
}
