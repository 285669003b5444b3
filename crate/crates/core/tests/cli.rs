use std::process::Command;

use cf_synth::harness::{generate_task, TaskSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cf-synth"))
}

#[test]
fn gen_then_learn_then_bench() {
    let dir = tempfile::tempdir().unwrap();
    let tasks = dir.path().join("tasks");
    let status = bin()
        .args(["gen", "--seed", "3", "--count", "4", "--out"])
        .arg(&tasks)
        .status()
        .unwrap();
    assert!(status.success());
    let files: Vec<_> = std::fs::read_dir(&tasks).unwrap().collect();
    assert_eq!(files.len(), 4);

    let task = files[0].as_ref().unwrap().path();
    let out = bin()
        .args(["learn", "--examples", "3", "--top", "2", "--task"])
        .arg(&task)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let n = v["suggestions"].as_array().unwrap().len();
    assert!((1..=2).contains(&n));

    let report = dir.path().join("report.json");
    let out = bin()
        .args(["bench", "--examples", "1,3", "--ablate", "clustering", "--tasks"])
        .arg(&tasks)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn simplify_prints_shorter_rule() {
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("task.json");
    std::fs::write(&task, generate_task(1, &TaskSpec { column_type: Some(cf_synth::column::CellType::Number), ..TaskSpec::default() }).unwrap().to_json()).unwrap();
    let rule = dir.path().join("rule.txt");
    std::fs::write(&rule, "IF greater(c, -1000000) AND greater(c, -2000000) THEN 1").unwrap();
    let out = bin().args(["simplify", "--task"]).arg(&task).arg("--rule").arg(&rule).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("IF ") && !text.contains(" AND "), "{text}");
}

#[test]
fn study_writes_csv() {
    let out = bin()
        .args(["study", "--axis", "examples", "--seed", "9", "--count", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 1);
}

#[test]
fn bad_input_exits_nonzero_with_message() {
    let out = bin().args(["learn", "--task", "/nonexistent/task.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bin().args(["bench", "--ablate", "nothing"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown ablation"));
}
