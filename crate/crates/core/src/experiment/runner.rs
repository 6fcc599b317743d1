use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::{io_err, json_err, Cell, ExpError, ExperimentPlan, Registry, Result};
use crate::datastore::{load_view, select_subset, ExampleSet, Manifest, SubsetConfig};
use crate::harness::{self, Method, TrainOutcome, TrainSpec, TransferResult};
use crate::net::{load_checkpoint, save_checkpoint, Checkpoint, ModelConfig};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub trained: usize,
    pub skipped: usize,
    pub failed: usize,
}

struct SplitSets {
    train: ExampleSet,
    val: ExampleSet,
    test: ExampleSet,
}

/// Loaded example sets shared by the cells of one run.
struct Ctx<'a> {
    plan: &'a ExperimentPlan,
    manifest: Manifest,
    configs: Vec<SubsetConfig>,
    cache: Mutex<HashMap<(u64, String), Arc<SplitSets>>>,
}

impl Ctx<'_> {
    fn config(&self, name: &str) -> Result<&SubsetConfig> {
        self.configs
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| ExpError::Plan(format!("config `{name}` is not part of the plan")))
    }

    fn data(&self, seed: u64, name: &str) -> Result<Arc<SplitSets>> {
        let key = (seed, name.to_string());
        if let Some(d) = self.cache.lock().unwrap().get(&key) {
            return Ok(d.clone());
        }
        let config = self.config(name)?;
        let views = select_subset(&self.manifest, config, derive_seed(seed, &[b"views"]))?;
        let sets = Arc::new(SplitSets {
            train: load_view(&self.manifest, &views.train)?,
            val: load_view(&self.manifest, &views.val)?,
            test: load_view(&self.manifest, &views.test)?,
        });
        self.cache.lock().unwrap().insert(key, sets.clone());
        Ok(sets)
    }
}

fn spec_for(plan: &ExperimentPlan, cell: &Cell, seed: u64) -> TrainSpec {
    let s = plan.settings();
    let spec = TrainSpec::for_method(cell.method, seed).with_epochs(s.epochs);
    let spec = match cell.method {
        Method::Pretrain => spec.with_volume(s.source.train, s.source.val),
        _ => spec.with_volume(s.target_train, s.target_val),
    };
    TrainSpec { batch_size: s.batch_size, ..spec }
}

fn execute(ctx: &Ctx, cell: &Cell) -> Result<TransferResult> {
    let plan = ctx.plan;
    let seed = super::cell_seed(cell.seed, &cell.source, &cell.target, cell.method);
    let spec = spec_for(plan, cell, seed);
    let target = ctx.data(cell.seed, &cell.target)?;
    let config = ModelConfig::scaled(target.train.n_classes(), plan.settings().width_scale);
    let outcome: TrainOutcome = match cell.method {
        Method::Pretrain => harness::pretrain(&config, &target.train, &target.val, &spec)?,
        Method::Baseline => harness::train_baseline(&config, &target.train, &target.val, &spec)?,
        Method::HeadRetrain | Method::FineTune => {
            let src_cell = Cell {
                source: cell.source.clone(),
                target: cell.source.clone(),
                method: Method::Pretrain,
                seed: cell.seed,
            };
            let path = plan.out_dir.join(ExperimentPlan::checkpoint_rel_path(&src_cell));
            if !path.exists() {
                return Err(ExpError::MissingSource(cell.source.clone()));
            }
            let source: Checkpoint = load_checkpoint(&path)?;
            if cell.method == Method::HeadRetrain {
                harness::head_retrain(&source, &target.train, &target.val, &spec)?
            } else {
                harness::fine_tune(&source, &target.train, &target.val, &spec)?
            }
        }
    };
    let top1 = harness::evaluate(&outcome.best.model, &target.test)?;
    let rel = ExperimentPlan::checkpoint_rel_path(cell);
    save_checkpoint(&outcome.best, plan.out_dir.join(&rel))?;
    Ok(TransferResult {
        source_id: cell.source.clone(),
        target_id: cell.target.clone(),
        method: cell.method,
        seed: cell.seed,
        cell_seed: seed,
        top1,
        epochs_run: outcome.epochs_run(),
        best_epoch: outcome.best.epoch,
        best_val_loss: outcome.best.val_loss,
        checkpoint_path: Some(rel.to_string_lossy().into_owned()),
    })
}

fn context(plan: &ExperimentPlan) -> Result<Ctx<'_>> {
    plan.validate()?;
    Ok(Ctx {
        plan,
        manifest: Manifest::load(&plan.master_path)?,
        configs: plan.configs()?,
        cache: Mutex::new(HashMap::new()),
    })
}

/// Re-executes one cell without touching the registry. Transfer cells need
/// their source checkpoint on disk.
pub fn run_cell(plan: &ExperimentPlan, cell: &Cell) -> Result<TransferResult> {
    execute(&context(plan)?, cell)
}

/// Runs every cell of the plan that the registry does not already hold.
///
/// Pretrain and baseline cells run first, then transfers. A failed cell is
/// logged to the failures file and does not stop the grid.
pub fn run_plan(plan: &ExperimentPlan) -> Result<RunSummary> {
    let ctx = context(plan)?;
    std::fs::create_dir_all(&plan.out_dir).map_err(io_err(&plan.out_dir))?;
    let plan_path = plan.out_dir.join("plan.json");
    let json = serde_json::to_vec_pretty(plan).map_err(json_err(&plan_path))?;
    std::fs::write(&plan_path, json).map_err(io_err(&plan_path))?;

    let registry = Mutex::new(Registry::open(&plan.out_dir)?);
    let done = registry.lock().unwrap().completed();
    let cells = plan.cells()?;
    let mut summary = RunSummary::default();
    let (todo, skipped): (Vec<Cell>, Vec<Cell>) = cells.into_iter().partition(|c| !done.contains(c));
    summary.skipped = skipped.len();
    let (first, second): (Vec<Cell>, Vec<Cell>) = todo.into_iter().partition(|c| !c.method.is_transfer());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| ExpError::Plan(e.to_string()))?;
    for phase in [first, second] {
        let outcomes: Vec<Result<bool>> = pool.install(|| {
            phase
                .par_iter()
                .map(|cell| match execute(&ctx, cell) {
                    Ok(row) => registry.lock().unwrap().append(row).map(|_| true),
                    Err(e) => registry.lock().unwrap().record_failure(cell, &e.to_string()).map(|_| false),
                })
                .collect()
        });
        for o in outcomes {
            if o? {
                summary.trained += 1;
            } else {
                summary.failed += 1;
            }
        }
    }
    Ok(summary)
}
