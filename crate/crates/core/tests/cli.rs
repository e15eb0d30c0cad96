//! End-to-end tests of the `cfmm-arb` binary: exit codes, CSV/JSON shape,
//! determinism, config file precedence.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfmm-arb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cfmm-arb")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn csv_headers_are_stable() {
    let o = run(&["ptrade-table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "block_time_s,gamma_bp,ptrade");
    assert_eq!(text.lines().count(), 1 + 25); // 5 block times x 5 fee levels

    let o = run(&["frontier"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "gamma,arb,stdev,ptr,lvrptr,lvr,pcterror");
    assert_eq!(text.lines().count(), 1 + 109); // default grid

    let o = run(&["rates"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("price,pool_value,lvr_rate,arb_rate,fee_rate,"));
    assert_eq!(text.lines().count(), 2);

    let o = run(&["simulate", "--arrivals", "50", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "tau,z_pre,z_post,arb,fee,price");
    assert_eq!(text.lines().count(), 1 + 50);
}

#[test]
fn json_output_parses() {
    let o = run(&["rates", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["arb_rate_normalized"].as_f64().unwrap() > 0.0);
    assert_eq!(v["method"], "ClosedForm");

    // divergent regime serializes as the string "inf" instead of breaking JSON
    let o = run(&["rates", "--out", "json", "--sigma-daily", "0.5", "--block-time-s", "4000000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["arb_rate"], "inf");

    let o = run(&["frontier", "--gamma-bp", "10,30", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["simulate", "--arrivals", "300", "--seed", "42"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let other = run(&["simulate", "--arrivals", "300", "--seed", "43"]);
    assert_ne!(a.stdout, other.stdout);

    let frontier = ["frontier", "--gamma-bp", "5,30,100"];
    assert_eq!(run(&frontier).stdout, run(&frontier).stdout);
}

#[test]
fn exit_codes() {
    // usage problems -> 2
    assert_eq!(run(&["rates", "--pool", "uniswap"]).status.code(), Some(2));
    assert_eq!(run(&["rates", "--block-time-s=-5"]).status.code(), Some(2));
    assert_eq!(run(&["rates", "--gamma-bp", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["rates", "--buy-fee-bp", "10"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--tolerance=-1"]).status.code(), Some(2));

    // I/O problems -> 3
    let o = run(&["simulate", "--arrivals", "50", "--out-file", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(3));

    // missing config file is a usage problem of the I/O kind
    let o = run(&["rates", "--config", "/nonexistent/cfg"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_quick_reports_and_exit_code() {
    // one structurally-red check (the pure power-law clause) is expected:
    // exit 1, seven PASS lines, one FAIL line
    let o = run(&["validate", "--quick"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 7);
    let failing: Vec<&str> = text.lines().filter(|l| l.ends_with("FAIL")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("asymptotics"));

    // scaling every tolerance way up turns it green -> exit 0
    let o = run(&["validate", "--quick", "--tolerance", "1e6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.ends_with("PASS")));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("cfmm-arb-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# analytic desk defaults").unwrap();
    writeln!(f, "sigma-daily = 0.10").unwrap();
    writeln!(f, "gamma-bp = 30").unwrap();
    drop(f);
    let cfg = path.to_str().unwrap();

    // file value used when no flag: lvr = sigma^2/8 * V = 0.01/8 * 2
    let o = run(&["rates", "--config", cfg, "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["lvr_rate"].as_f64().unwrap() - 0.0025).abs() < 1e-15);

    // flag beats file
    let o = run(&["rates", "--config", cfg, "--sigma-daily", "0.05", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["lvr_rate"].as_f64().unwrap() - 0.000625).abs() < 1e-15);

    // malformed line -> usage error
    std::fs::write(&path, "sigma-daily 0.10\n").unwrap();
    assert_eq!(run(&["rates", "--config", cfg]).status.code(), Some(2));

    std::fs::remove_dir_all(&dir).ok();
}
