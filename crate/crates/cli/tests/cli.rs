use std::path::Path;
use std::process::Command;

use dashsim_cli::{compare, CompareSpec, Profile};

fn dashsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dashsim"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let out = dashsim(&[
        "generate",
        "--profile",
        "desk",
        "--clients",
        "12",
        "--seed",
        "3",
        "--out",
        path(&scenario),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("S=12 K=4"));

    for sched in ["greedy", "bba", "rba"] {
        let run_dir = dir.path().join(sched);
        let out = dashsim(&[
            "run",
            "--scenario",
            path(&scenario),
            "--scheduler",
            sched,
            "--out",
            path(&run_dir),
            "--trace",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let clients = std::fs::read_to_string(run_dir.join("clients.csv")).unwrap();
        assert_eq!(clients.lines().count(), 13);
        assert_eq!(
            std::fs::read_to_string(run_dir.join("summary.csv"))
                .unwrap()
                .lines()
                .count(),
            2
        );
        assert!(run_dir.join("trace.jsonl").exists());
    }
}

#[test]
fn compare_pairs_schedulers_on_the_same_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cmp.csv");
    let out = dashsim(&[
        "compare",
        "--counts",
        "20,40",
        "--seeds",
        "1..5",
        "--out",
        path(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 30);
    for cell in rows.chunks(3) {
        assert_eq!(cell[0][0], cell[1][0]);
        assert_eq!(cell[0][3], cell[1][3]);
        assert_eq!(cell[1][3], cell[2][3]);
        let names: Vec<&str> = cell.iter().map(|r| &r[1]).collect();
        assert_eq!(names, ["greedy", "bba", "rba"]);
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(dashsim(&[
        "compare",
        "--counts",
        "20",
        "--seeds",
        "1..3",
        "--threads",
        "1",
        "--out",
        path(&a)
    ])
    .status
    .success());
    assert!(dashsim(&[
        "compare",
        "--counts",
        "20",
        "--seeds",
        "1..3",
        "--threads",
        "3",
        "--out",
        path(&b)
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    assert!(
        dashsim(&["generate", "--profile", "desk", "--out", path(&scenario)])
            .status
            .success()
    );
    let run_dir = dir.path().join("r");

    let unknown = dashsim(&[
        "run",
        "--scenario",
        path(&scenario),
        "--scheduler",
        "nope",
        "--out",
        path(&run_dir),
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let guarded = dashsim(&[
        "run",
        "--scenario",
        path(&scenario),
        "--scheduler",
        "oracle",
        "--out",
        path(&run_dir),
    ]);
    assert_eq!(guarded.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guarded.stderr).contains("guard"));

    let missing = dashsim(&[
        "run",
        "--scenario",
        "/nonexistent.json",
        "--scheduler",
        "bba",
        "--out",
        path(&run_dir),
    ]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_seeds = dashsim(&[
        "compare",
        "--counts",
        "20",
        "--seeds",
        "9..1",
        "--out",
        path(&run_dir.join("x.csv")),
    ]);
    assert_eq!(bad_seeds.status.code(), Some(2));
}

#[test]
fn oracle_runs_on_tiny_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("tiny.json");
    let cfg = dashsim_core::generate_scenario(&dashsim_core::GenerationParams::tiny(), 2).unwrap();
    dashsim_core::save_scenario(&cfg, &scenario).unwrap();
    let out = dashsim(&[
        "run",
        "--scenario",
        path(&scenario),
        "--scheduler",
        "oracle",
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("oracle on "));
}

#[test]
fn compare_can_count_invariant_violations() {
    let rows = compare(&CompareSpec {
        counts: vec![20],
        schedulers: vec!["greedy".into(), "bba".into()],
        seeds: vec![1, 2],
        profile: Profile::Desk,
        far_near: true,
        threads: Some(1),
        check_invariants: true,
    })
    .unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.invariant_violations == 0));
}
