use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rftl::datastore::{build_master, MasterSpec};
use rftl::experiment::{
    matrix_accuracy, matrix_method_diff, matrix_vs_baseline, read_csv, render_heatmap, run_plan, write_csv,
    ExperimentPlan, PlanKind, Registry, ResultMatrix, Scale,
};
use rftl::harness::Method;
use rftl::Scheme;

#[derive(Parser)]
#[command(name = "rftl", version, about = "Synthetic RF datasets and transfer-learning experiment grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the master dataset of SigMF recordings.
    GenMaster {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per recording.
        #[arg(long, default_value_t = 1024)]
        length: usize,
        /// Comma-separated scheme names; all 23 when omitted.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<Scheme>,
        /// Also write clean and noise sidecar files.
        #[arg(long)]
        components: bool,
    },
    /// Run (or resume) an experiment grid.
    Run {
        /// JSON plan file; the flags below override its fields.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        master: Option<PathBuf>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
        /// Repeat for several seeds.
        #[arg(long)]
        seed: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build a result matrix from a run directory's registry.
    Matrix {
        /// Run directory holding plan.json and registry.jsonl.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixArg::Accuracy)]
        kind: MatrixArg,
        #[arg(long, default_value = "head_retrain")]
        method: Method,
        /// Seeds to average over; every seed in the registry when omitted.
        #[arg(long)]
        seed: Vec<u64>,
        /// Matrix JSON destination.
        #[arg(long)]
        save: PathBuf,
    },
    /// Write a saved matrix as CSV or a PNG heatmap.
    Emit {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        vmin: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        vmax: Option<f64>,
        #[arg(long, default_value_t = 16)]
        cell_px: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SnrSweep,
    FoSweep,
    SnrFoSweep,
    ModExp1,
    ModExp2,
}

impl From<KindArg> for PlanKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SnrSweep => PlanKind::SnrSweep,
            KindArg::FoSweep => PlanKind::FoSweep,
            KindArg::SnrFoSweep => PlanKind::SnrFoSweep,
            KindArg::ModExp1 => PlanKind::ModExp1,
            KindArg::ModExp2 => PlanKind::ModExp2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Paper,
    Desk,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Paper => Scale::Paper,
            ScaleArg::Desk => Scale::Desk,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixArg {
    Accuracy,
    VsBaseline,
    HeadVsFinetune,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Png,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenMaster { out, per_class, seed, length, schemes, components } => {
            let mut spec = MasterSpec::new(per_class, seed);
            spec.length = length;
            spec.write_components = components;
            if !schemes.is_empty() {
                spec.schemes = schemes;
            }
            let m = build_master(&spec, &out).with_context(|| format!("building master in {}", out.display()))?;
            println!("wrote {} recordings to {}", m.len(), out.display());
        }
        Command::Run { plan, kind, master, scale, seed, out, workers } => {
            let plan = assemble_plan(plan.as_deref(), kind, master, scale, seed, out, workers)?;
            let n = plan.cells()?.len();
            println!("{n} cells, results in {}", plan.out_dir.display());
            let s = run_plan(&plan)?;
            println!("trained {}, skipped {}, failed {}", s.trained, s.skipped, s.failed);
            if s.failed > 0 {
                println!("see {}", plan.out_dir.join(rftl::experiment::FAILURES_FILE).display());
            }
        }
        Command::Matrix { out, kind, method, seed, save } => {
            let plan = ExperimentPlan::load(out.join("plan.json"))?;
            let labels: Vec<String> = plan.configs()?.into_iter().map(|c| c.name).collect();
            let registry = Registry::open(&out)?;
            let rows = registry.rows();
            let m = match kind {
                MatrixArg::Accuracy => matrix_accuracy(rows, &labels, method, &seed)?,
                MatrixArg::VsBaseline => matrix_vs_baseline(rows, &labels, method, &seed)?,
                MatrixArg::HeadVsFinetune => matrix_method_diff(rows, &labels, &seed)?,
            };
            std::fs::write(&save, serde_json::to_vec_pretty(&m)?).with_context(|| format!("writing {}", save.display()))?;
            println!("{}x{} matrix saved to {}", m.labels.len(), m.labels.len(), save.display());
        }
        Command::Emit { matrix, format, out, vmin, vmax, cell_px } => {
            let m = load_matrix(&matrix)?;
            match format {
                FormatArg::Csv => {
                    write_csv(&m, &out)?;
                    let (labels, cells) = read_csv(&out)?;
                    if labels != m.labels || cells != m.cells {
                        bail!("{} does not read back to the saved matrix", out.display());
                    }
                }
                FormatArg::Png => {
                    let (lo, hi) = default_bounds(&m);
                    render_heatmap(&m, &out, vmin.unwrap_or(lo), vmax.unwrap_or(hi), cell_px)?;
                }
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn assemble_plan(
    path: Option<&Path>,
    kind: Option<KindArg>,
    master: Option<PathBuf>,
    scale: Option<ScaleArg>,
    seeds: Vec<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<ExperimentPlan> {
    let mut plan = match path {
        Some(p) => ExperimentPlan::load(p)?,
        None => {
            let (Some(kind), Some(master), Some(out)) = (kind, master.clone(), out.clone()) else {
                bail!("without --plan, --kind, --master and --out are required");
            };
            ExperimentPlan::new(kind.into(), scale.map(Into::into).unwrap_or(Scale::Desk), master, out)
        }
    };
    if let Some(k) = kind {
        plan.kind = k.into();
    }
    if let Some(m) = master {
        plan.master_path = m;
    }
    if let Some(s) = scale {
        plan.scale = s.into();
    }
    if !seeds.is_empty() {
        plan.seeds = seeds;
    }
    if let Some(o) = out {
        plan.out_dir = o;
    }
    if let Some(w) = workers {
        plan.workers = w;
    }
    plan.validate()?;
    Ok(plan)
}

fn load_matrix(path: &Path) -> Result<ResultMatrix> {
    let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))
}

fn default_bounds(m: &ResultMatrix) -> (f64, f64) {
    use rftl::experiment::MatrixKind;
    match m.kind {
        MatrixKind::Accuracy => (0.0, 1.0),
        MatrixKind::VsBaseline | MatrixKind::HeadVsFinetune => (-1.0, 1.0),
    }
}
