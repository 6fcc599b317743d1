mod common;

use std::path::Path;

use common::small_master;
use rftl::datastore::{build_master, MasterSpec, PerClass};
use rftl::experiment::*;
use rftl::harness::Method;
use rftl::Scheme;

const SCHEMES: [Scheme; 2] = [Scheme::Bpsk, Scheme::Awgn];

fn tiny_plan(master: &Path, out: &Path) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(PlanKind::SnrSweep, Scale::Desk, master, out);
    plan.seeds = vec![3];
    plan.settings = Some(ScaleSettings {
        source: PerClass { train: 20, val: 5, test: 10 },
        target_train: 10,
        target_val: 5,
        width_scale: 0.02,
        epochs: 2,
        batch_size: 16,
        schemes: Some(SCHEMES.to_vec()),
        windows: Some(vec![0, 25]),
    });
    plan
}

fn labels(plan: &ExperimentPlan) -> Vec<String> {
    plan.configs().unwrap().into_iter().map(|c| c.name).collect()
}

#[test]
fn grid_runs_resumes_and_reproduces() {
    let master = tempfile::tempdir().unwrap();
    small_master(master.path(), &SCHEMES, 700, 128, 11);
    let out = tempfile::tempdir().unwrap();
    let plan = tiny_plan(master.path(), out.path());
    assert_eq!(labels(&plan), vec!["snr_-10_-5", "snr_15_20"]);

    let first = run_plan(&plan).unwrap();
    assert_eq!(first, RunSummary { trained: 8, skipped: 0, failed: 0 });
    assert!(out.path().join("plan.json").exists());
    assert_eq!(ExperimentPlan::load(out.path().join("plan.json")).unwrap(), plan);
    let reg = Registry::open(out.path()).unwrap();
    assert_eq!(reg.rows().len(), 8);
    for row in reg.rows() {
        assert!((0.0..=1.0).contains(&row.top1));
        assert!(out.path().join(row.checkpoint_path.as_ref().unwrap()).exists());
        assert_eq!(row.cell_seed, cell_seed(row.seed, &row.source_id, &row.target_id, row.method));
    }

    let again = run_plan(&plan).unwrap();
    assert_eq!(again, RunSummary { trained: 0, skipped: 8, failed: 0 });
    assert_eq!(Registry::open(out.path()).unwrap().rows().len(), 8);

    for method in [Method::Pretrain, Method::Baseline, Method::HeadRetrain, Method::FineTune] {
        let row = reg.rows().iter().find(|r| r.method == method).unwrap().clone();
        let cell = Cell { source: row.source_id.clone(), target: row.target_id.clone(), method, seed: row.seed };
        let redo = run_cell(&plan, &cell).unwrap();
        assert_eq!(redo, row);
        assert_eq!(redo.top1.to_bits(), row.top1.to_bits());
        assert_eq!(redo.best_val_loss.to_bits(), row.best_val_loss.to_bits());
    }

    let names = labels(&plan);
    let rows = reg.rows();
    let hr = matrix_accuracy(rows, &names, Method::HeadRetrain, &[]).unwrap();
    let pick = |s: &str, t: &str, m: Method| {
        rows.iter().find(|r| r.source_id == s && r.target_id == t && r.method == m).unwrap().top1
    };
    assert_eq!(hr.cells[0][0], pick(&names[0], &names[0], Method::Pretrain));
    assert_eq!(hr.cells[0][1], pick(&names[0], &names[1], Method::HeadRetrain));
    let vs = matrix_vs_baseline(rows, &names, Method::HeadRetrain, &[]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let want = hr.cells[i][j] - pick(&names[j], &names[j], Method::Baseline);
            assert_eq!(vs.cells[i][j], want);
            assert!((-1.0..=1.0).contains(&vs.cells[i][j]));
        }
    }
    let diff = matrix_method_diff(rows, &names, &[]).unwrap();
    let ft = matrix_accuracy(rows, &names, Method::FineTune, &[]).unwrap();
    assert_eq!(diff.cells[1][0], ft.cells[1][0] - hr.cells[1][0]);
    assert_eq!(diff.cells[0][0], 0.0);

    let csv = out.path().join("hr.csv");
    write_csv(&hr, &csv).unwrap();
    let (l, c) = read_csv(&csv).unwrap();
    assert_eq!(l, names);
    assert_eq!(c, hr.cells);
    let png_path = out.path().join("hr.png");
    render_heatmap(&hr, &png_path, 0.0, 1.0, 10).unwrap();
    let decoder = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(&png_path).unwrap()));
    let info = decoder.read_info().unwrap();
    assert_eq!((info.info().width, info.info().height), (20, 20));

    match matrix_accuracy(rows, &names, Method::HeadRetrain, &[3, 4]) {
        Err(ExpError::Incomplete(missing)) => assert!(!missing.is_empty()),
        other => panic!("expected an incomplete matrix, got {other:?}"),
    }
}

#[test]
fn starved_configs_are_logged_and_skipped() {
    let master = tempfile::tempdir().unwrap();
    let mut spec = MasterSpec::new(300, 4);
    spec.length = 128;
    spec.schemes = SCHEMES.to_vec();
    spec.snr_range = [10.0, 20.0];
    build_master(&spec, master.path()).unwrap();
    let out = tempfile::tempdir().unwrap();
    let plan = tiny_plan(master.path(), out.path());
    let summary = run_plan(&plan).unwrap();
    assert_eq!(summary, RunSummary { trained: 2, skipped: 0, failed: 6 });
    let reg = Registry::open(out.path()).unwrap();
    let failures = reg.failures().unwrap();
    assert_eq!(failures.len(), 6);
    assert!(failures.iter().any(|f| f.error.contains("insufficient")));
    assert!(reg.rows().iter().all(|r| r.target_id == "snr_15_20"));

    let again = run_plan(&plan).unwrap();
    assert_eq!(again, RunSummary { trained: 0, skipped: 2, failed: 6 });
}

#[test]
fn full_sweep_matrix_csv_has_header_plus_row_per_source() {
    let labels: Vec<String> = rftl::datastore::make_snr_sweep().into_iter().map(|c| c.name).collect();
    let cells: Vec<Vec<f64>> = (0..26).map(|i| (0..26).map(|j| (i * 26 + j) as f64 / 676.0).collect()).collect();
    let m = ResultMatrix { kind: MatrixKind::Accuracy, method: Some(Method::HeadRetrain), labels: labels.clone(), cells };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    write_csv(&m, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 27);
    assert!(text.lines().next().unwrap().starts_with("source\\target,snr_-10_-5,"));
    let (l, c) = read_csv(&p).unwrap();
    assert_eq!(l, labels);
    assert_eq!(c, m.cells);
}

#[test]
fn full_scale_grid_cardinalities() {
    let count = |kind| {
        let plan = ExperimentPlan::new(kind, Scale::Paper, "m", "o");
        let cells = plan.cells().unwrap();
        let n = |m| cells.iter().filter(|c| c.method == m).count();
        (n(Method::Pretrain), n(Method::Baseline), n(Method::HeadRetrain), n(Method::FineTune))
    };
    assert_eq!(count(PlanKind::SnrSweep), (26, 26, 650, 650));
    assert_eq!(count(PlanKind::FoSweep), (31, 31, 930, 930));
    assert_eq!(count(PlanKind::SnrFoSweep), (25, 25, 600, 600));
    assert_eq!(count(PlanKind::ModExp1), (5, 5, 20, 20));
    assert_eq!(count(PlanKind::ModExp2), (12, 12, 132, 132));
}
