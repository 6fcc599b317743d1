use std::path::Path;
use std::process::Command;

fn rftl(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_rftl")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "rftl {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn master_run_matrix_emit() {
    let dir = tempfile::tempdir().unwrap();
    let master = dir.path().join("master");
    let out = dir.path().join("run");
    let said = rftl(&["gen-master", "--out", s(&master), "--per-class", "400", "--seed", "3", "--length", "128", "--schemes", "BPSK,AWGN"]);
    assert!(said.contains("800 recordings"));

    let plan = serde_json::json!({
        "kind": "snr_sweep",
        "master_path": master,
        "scale": "desk",
        "seeds": [1],
        "out_dir": out,
        "settings": {
            "source": {"train": 10, "val": 4, "test": 6},
            "target_train": 6,
            "target_val": 4,
            "width_scale": 0.02,
            "epochs": 1,
            "batch_size": 8,
            "schemes": ["BPSK", "AWGN"],
            "windows": [0, 25]
        }
    });
    let plan_path = dir.path().join("plan.json");
    std::fs::write(&plan_path, serde_json::to_vec(&plan).unwrap()).unwrap();
    let said = rftl(&["run", "--plan", s(&plan_path)]);
    assert!(said.contains("trained 8, skipped 0, failed 0"), "{said}");
    let said = rftl(&["run", "--plan", s(&plan_path)]);
    assert!(said.contains("trained 0, skipped 8"), "{said}");

    let m = dir.path().join("m.json");
    rftl(&["matrix", "--out", s(&out), "--kind", "vs-baseline", "--method", "fine_tune", "--save", s(&m)]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&m).unwrap()).unwrap();
    assert_eq!(v["labels"], serde_json::json!(["snr_-10_-5", "snr_15_20"]));

    let csv = dir.path().join("m.csv");
    rftl(&["emit", "--matrix", s(&m), "--format", "csv", "--out", s(&csv)]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
    let png = dir.path().join("m.png");
    rftl(&["emit", "--matrix", s(&m), "--format", "png", "--out", s(&png), "--vmin", "-0.5", "--vmax", "0.5"]);
    assert!(std::fs::metadata(&png).unwrap().len() > 0);
}

#[test]
fn run_without_plan_needs_core_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_rftl")).args(["run", "--scale", "desk"]).output().unwrap();
    assert!(!out.status.success());
}
