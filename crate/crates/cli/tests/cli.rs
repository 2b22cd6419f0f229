use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn aiglin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aiglin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen", "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = aiglin(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn correct_multiplier_exits_zero() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "m4.aag", &["-n", "4"]);
    for mode in ["local", "fullgb", "lex"] {
        let o = aiglin(&["verify", m.to_str().unwrap(), "--mode", mode]);
        assert_eq!(code(&o), 0, "{mode}: {}", stdout(&o));
        assert!(stdout(&o).contains("verdict: Verified"));
    }
}

#[test]
fn faulty_multiplier_exits_twenty() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "f.aag", &["-n", "2", "--fault", "flip:0"]);
    let o = aiglin(&["verify", m.to_str().unwrap(), "--report", "json"]);
    assert_eq!(code(&o), 20);
    assert!(stdout(&o).contains("\"remainder_inputs_only\": true"));
}

#[test]
fn exhausted_budget_exits_thirty() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "m2.aag", &["-n", "2"]);
    let o = aiglin(&[
        "verify",
        m.to_str().unwrap(),
        "--mode",
        "fullgb",
        "--max-monomials",
        "10",
    ]);
    assert_eq!(code(&o), 30);
    assert!(stdout(&o).contains("Inconclusive"));
}

#[test]
fn errors_exit_two() {
    assert_eq!(code(&aiglin(&["verify", "/nonexistent.aag"])), 2);
    assert_eq!(code(&aiglin(&["verify"])), 2);
    assert_eq!(code(&aiglin(&["gen", "-n", "2", "--fault", "bogus:1"])), 2);
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.aag");
    std::fs::write(&bad, "aag 1 1 0 1 0\n2\n4\n").unwrap();
    assert_eq!(code(&aiglin(&["verify", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&aiglin(&["--help"])), 0);
}

#[test]
fn json_report_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "m4.aag", &["-n", "4"]);
    let run = || {
        stdout(&aiglin(&[
            "verify",
            m.to_str().unwrap(),
            "--report",
            "json",
        ]))
    };
    let first = run();
    assert_eq!(first, run());
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verdict"], "Verified");
    assert_eq!(v["mode"], "local");
    assert!(v["merged_nodes"].as_u64().unwrap() > 0);
    assert!(v["gb_calls"]["by_depth"].is_object());
    assert!(v.get("total_time_s").is_none());
    let timed = stdout(&aiglin(&[
        "verify",
        m.to_str().unwrap(),
        "--report",
        "json",
        "--times",
    ]));
    let t: serde_json::Value = serde_json::from_str(&timed).unwrap();
    assert!(t["total_time_s"].is_number());
}

#[test]
fn binary_aiger_is_accepted() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "m3.aig", &["-n", "3", "--binary"]);
    assert_eq!(code(&aiglin(&["verify", m.to_str().unwrap()])), 0);
}

#[test]
fn dump_commands() {
    let dir = TempDir::new().unwrap();
    let m = gen(dir.path(), "m2.aag", &["-n", "2"]);
    let path = m.to_str().unwrap();
    let order = stdout(&aiglin(&["dump-order", path]));
    assert!(order.starts_with("a0 < b0 < a1 < b1 < "), "{order}");
    let enc = stdout(&aiglin(&["dump-encoding", path]));
    assert!(enc.contains("spec_lin"));
    let chain = "a0<a1<b0<b1<t11<t10<t01<t00<l16<l10<s0<l12<l14<l18<l20<s1<l22<l24<l26<l28<s2<s3";
    let o = aiglin(&[
        "dump-gb",
        path,
        "--linearization",
        "extensions",
        "--order",
        chain,
    ]);
    assert_eq!(code(&o), 0);
    let gb = stdout(&o);
    assert!(gb.starts_with("gb[1]=l10-t00\n"), "{gb}");
    assert_eq!(
        gb.lines().filter(|l| l.starts_with("gb[")).count(),
        gb.lines().count()
    );
}
