//! End-to-end tests of the `randjoin` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randjoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randjoin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, file: &str, args: &[&str]) -> (i32, Value) {
    let out = dir.join(file);
    let mut all = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    let o = randjoin(&all);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let report = serde_json::from_str(&text).unwrap_or(Value::Null);
    (o.status.code().unwrap(), report)
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn bounds_table_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "bounds.csv");
    let args = [
        "bounds-table",
        "--levels",
        "exponential",
        "--n-max",
        "8",
        "--seed",
        "3",
        "--csv",
        &csv,
    ];
    let (code, report) = run_to(dir.path(), "a.json", &args);
    assert_eq!(code, 0);
    assert_eq!(report["tool"], "randjoin");
    assert_eq!(report["result"]["first_satisfied_level"], 4);
    assert!(report["result"]["gap_condition"]["scaled_6_nlogn"]["gap_exceeds_5log"]["holds_from"].is_u64());

    let first = std::fs::read(dir.path().join("a.json")).unwrap();
    let (_, again) = run_to(dir.path(), "a.json", &args);
    let second = std::fs::read(dir.path().join("a.json")).unwrap();
    assert!(first == second, "same config must give byte-identical reports");
    assert_eq!(report, again);

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, serde_json::to_string(&report["config"]).unwrap()).unwrap();
    let (code, replay) = run_to(dir.path(), "c.json", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(replay["result"], report["result"]);

    let table = std::fs::read_to_string(&csv).unwrap();
    let header = table.lines().next().unwrap();
    assert_eq!(
        header,
        "n,ell_n,m_n,q_n,sum_exact,paper_bound,satisfied,mc_estimate,mc_stderr,trials,seed"
    );
    assert_eq!(table.lines().count(), 1 + 9);

    let (code, report) = run_to(
        dir.path(),
        "d.json",
        &[
            "bounds-table",
            "--levels",
            "custom:0,2,4",
            "--tree-budget",
            "1/4",
            "--tree-seed",
            "7",
        ],
    );
    assert_eq!(code, 0);
    let bounds = report["result"]["level_bounds"].as_array().unwrap();
    assert_eq!(bounds.len(), 2);
    assert_eq!(bounds[1]["sum_exact"], "2/3");
    assert_eq!(bounds[1]["paper_bound"], "8/1");
}

#[test]
fn roundtrip_on_the_full_tree() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_to(
        dir.path(),
        "rt.json",
        &[
            "roundtrip",
            "--levels",
            "custom:0,1,2",
            "--z",
            "10",
            "--name",
            "0110101",
        ],
    );
    assert_eq!(code, 0);
    let r = &report["result"];
    assert_eq!(r["recovered"], "10");
    assert_eq!(r["match"], true);
    assert_eq!(r["trace"]["oracle_use"]["name_bits"], 7);
    assert_eq!(r["trace"]["oracle_use"]["payload_bits"], 2);
}

#[test]
fn coding_failure_exits_two_with_the_failure_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let tree = path(dir.path(), "t.txt");
    std::fs::write(&tree, "L=2\n00\n").unwrap();
    let mut failures = 0;
    for z in ["0", "1"] {
        let (code, report) = run_to(
            dir.path(),
            &format!("enc{z}.json"),
            &[
                "encode",
                "--levels",
                "custom:0,2",
                "--tree",
                &tree,
                "--z",
                z,
                "--system-seed",
                "9",
            ],
        );
        match code {
            0 => assert_eq!(report["result"]["y"], "00"),
            2 => {
                failures += 1;
                assert_eq!(report["result"]["status"], "coding_failure");
                assert_eq!(report["result"]["failure"]["step"], 0);
            }
            other => panic!("exit {other}"),
        }
    }
    assert_eq!(failures, 1, "a lone survivor leaves exactly one class empty");
}

#[test]
fn malformed_decode_input_names_the_expected_levels() {
    let o = randjoin(&["decode", "--levels", "custom:0,1,2", "--y", "101", "--name", "0000000"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("expected one of [0, 1, 2]"), "{err}");
}

#[test]
fn invalid_invocations_exit_one() {
    assert_eq!(randjoin(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(randjoin(&["schedule-report"]).status.code(), Some(1));
    assert_eq!(
        randjoin(&["schedule-report", "--levels", "cubic"]).status.code(),
        Some(1)
    );
    assert_eq!(
        randjoin(&["tree-gen", "--levels", "custom:0,2", "--tree-budget", "3/2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(randjoin(&["--version"]).status.code(), Some(0));
}

#[test]
fn files_flow_between_commands() {
    let dir = tempfile::tempdir().unwrap();
    let tree = path(dir.path(), "t.txt");
    let pruned = path(dir.path(), "p.txt");
    let system = path(dir.path(), "s.txt");
    let common = ["--levels", "custom:0,2,4", "--densities", "custom:1/2,3/8,1/9"];

    let mut args = vec![
        "tree-gen",
        "--tree-budget",
        "1/4",
        "--tree-seed",
        "7",
        "--tree-out",
        &tree,
    ];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "gen.json", &args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["tree"]["measure"], "3/4");
    assert_eq!(
        std::fs::read_to_string(&tree).unwrap(),
        report["result"]["tree"]["tree"].as_str().unwrap()
    );

    let mut args = vec!["tree-prune", "--tree", &tree, "--tree-out", &pruned];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "prune.json", &args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["loss_within_bound"], true);
    // "00" and "11" keep density 1/2 > 3/8, so nothing is pruned
    assert_eq!(report["result"]["after"]["measure"], "3/4");

    let mut args = vec!["ps-sample", "--system-seed", "42", "--system-out", &system];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "ps.json", &args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["system"]["system_count"], "7776");
    assert_eq!(report["result"]["system"]["validation"]["valid"], true);

    let mut args = vec!["roundtrip", "--tree", &pruned, "--system", &system, "--z", "11"];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "rt.json", &args);
    assert!(code == 0 || code == 2);
    if code == 0 {
        assert_eq!(report["result"]["match"], true);
    }
}

#[test]
fn monte_carlo_table_and_failure_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "mc.csv");
    let common = ["--levels", "custom:0,2,4", "--tree-budget", "1/4", "--tree-seed", "7"];
    let mut args = vec!["mc", "--trials", "1000", "--seed", "5", "--level", "1", "--csv", &csv];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "mc.json", &args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["estimates"][0]["hits"], 566);
    let table = std::fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[4], "2/3");
    assert_eq!(row[9], "1000");

    let mut args = vec!["find-n0", "--name-seed", "1"];
    args.extend(common);
    let (code, report) = run_to(dir.path(), "n0.json", &args);
    assert_eq!(code, 0);
    assert!(report["result"]["name"].as_str().unwrap().len() == 18);
}
