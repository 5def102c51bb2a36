use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_latcomm"));
    cmd.args(args).env_remove("LATCOMM_THREADS");
    if let Some(t) = threads {
        cmd.env("LATCOMM_THREADS", t);
    }
    cmd.output().expect("run latcomm")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args, None);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.push("--json");
    serde_json::from_str(&stdout(&args)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latcomm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const HEX_THETA: &str = "1.0471975511965976";

#[test]
fn nearest_point_near_a_right_angle() {
    let human = stdout(&["lattice-nearest", "--rho", "1", "--theta", "1.5707963", "--x", "0.6", "--y", "0.2"]);
    assert_eq!(human.lines().next(), Some("(1, 0)"));
    let v = json(&["lattice-nearest", "--rho", "1", "--theta", "1.5707963", "--x", "0.6", "--y", "0.2"]);
    assert_eq!(v["nearest"], serde_json::json!([1, 0]));
    for key in ["input", "babai", "point", "transcript", "bits", "rounds"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn negative_coordinates_are_accepted() {
    let v = json(&["lattice-nearest", "--rho", "1", "--theta", HEX_THETA, "--x", "-3.1", "--y", "-0.05"]);
    assert_eq!(v["nearest"], serde_json::json!([-3, 0]));
}

#[test]
fn entropy_ratio_at_one_half() {
    assert_eq!(stdout(&["entropy-ratio", "--v", "0.5"]).trim(), "3.0");
    assert_eq!(json(&["entropy-ratio", "--v", "0.5"])["ratio"], 3.0);
}

#[test]
fn hexagonal_rates() {
    let v = json(&["lattice-rates", "--rho", "1", "--theta", HEX_THETA]);
    assert_eq!(v["error_free_cells"], 3);
    let n_bar = v["rates"]["N_bar"].as_f64().unwrap();
    let mass = v["crossed_mass"].as_f64().unwrap();
    assert!((n_bar - 4.0 / 3.0).abs() < 1e-12);
    assert!((n_bar - 1.0 - 2.0 * mass).abs() < 1e-12);
}

#[test]
fn simulation_is_identical_across_thread_counts() {
    let args = ["simulate", "--samples", "50000", "--seed", "0xABC", "--json"];
    let one = run(&args, Some("1"));
    let four = run(&args, Some("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["seed"], 0xABC);
    assert_eq!(v["samples"], 50000);
    assert!((v["mean_bits"].as_f64().unwrap() - 4.0).abs() < 0.05);
}

#[test]
fn transcripts_are_written_one_per_run() {
    let path = scratch("transcripts.txt");
    let p = path.to_str().unwrap();
    stdout(&["simulate", "--samples", "7", "--transcripts", p]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 7);
    for line in text.lines() {
        // Bit exchange sends an even number of bits, all binary.
        let bits: Vec<&str> = line.split(',').collect();
        assert_eq!(bits.len() % 2, 0);
        assert!(bits.iter().all(|b| *b == "0" || *b == "1"));
    }
}

#[test]
fn out_flag_writes_the_file() {
    let path = scratch("ratio.json");
    let p = path.to_str().unwrap();
    let printed = stdout(&["entropy-ratio", "--v", "0.25", "--json", "--out", p]);
    assert!(printed.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["v"], 0.25);
}

#[test]
fn partition_round_trips_through_a_file() {
    let path = scratch("bitx.json");
    let p = path.to_str().unwrap();
    let written = stdout(&["partition-show", "--protocol", "bit-exchange", "--max-depth", "3", "--json", "--out", p]);
    assert!(written.is_empty());
    let original = std::fs::read_to_string(&path).unwrap();
    let reread = stdout(&["partition-show", "--in", p, "--json"]);
    assert_eq!(
        serde_json::from_str::<Value>(&original).unwrap(),
        serde_json::from_str::<Value>(&reread).unwrap()
    );
}

#[test]
fn csv_has_a_header() {
    let csv = stdout(&["partition-show", "--protocol", "quadrant", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x_lo,x_hi,y_lo,y_hi,label,prob"));
    assert_eq!(lines.count(), 3);
    let sim = stdout(&["simulate", "--samples", "10", "--format", "csv"]);
    assert_eq!(sim.lines().next(), Some("samples,mean_bits,mean_rounds,seed"));
}

#[test]
fn plot_series() {
    let curve = stdout(&["plot-data", "--which", "ratio-curve", "--resolution", "16"]);
    assert!(curve.lines().any(|l| l == "0.5,3.0"));
    let conv = stdout(&["plot-data", "--which", "convergence", "--resolution", "20"]);
    let rows: Vec<&str> = conv.lines().collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.contains(&"1,2.0") && rows.contains(&"2,3.0"));
    let sub = stdout(&["plot-data", "--which", "subdivision", "--rho", "1", "--theta", HEX_THETA]);
    assert_eq!(sub.lines().count(), 8);
}

#[test]
fn converse_verification_passes() {
    let v = json(&["verify", "converse", "--all"]);
    assert_eq!(v["thm5"]["total_bits"], 4.0);
    assert_eq!(v["passed"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["entropy-ratio", "--v", "1.5"], None).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--protocol", "lattice"], None).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--samples", "10"], Some("0")).status.code(), Some(2));
    assert_eq!(run(&["partition-show", "--in", "/nonexistent/partition.json"], None).status.code(), Some(2));
    let unwritable = ["entropy-ratio", "--v", "0.5", "--out", "/nonexistent/dir/out.txt"];
    assert_eq!(run(&unwritable, None).status.code(), Some(1));
}
