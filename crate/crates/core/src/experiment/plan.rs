use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExpError, Result};
use crate::datastore::{
    make_fo_sweep, make_mod_exp1, make_mod_exp2, make_snr_fo_sweep, make_snr_sweep, PerClass, SubsetConfig,
};
use crate::harness::Method;
use crate::scheme::Scheme;
use crate::seed::derive_seed;

/// Class list used by desk-scale plans.
pub const DESK_SCHEMES: [Scheme; 5] = [Scheme::Bpsk, Scheme::Qpsk, Scheme::Psk8, Scheme::Gfsk75k, Scheme::Awgn];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    SnrSweep,
    FoSweep,
    SnrFoSweep,
    ModExp1,
    ModExp2,
}

impl PlanKind {
    pub fn configs(self) -> Vec<SubsetConfig> {
        match self {
            PlanKind::SnrSweep => make_snr_sweep(),
            PlanKind::FoSweep => make_fo_sweep(),
            PlanKind::SnrFoSweep => make_snr_fo_sweep(),
            PlanKind::ModExp1 => make_mod_exp1(),
            PlanKind::ModExp2 => make_mod_exp2(),
        }
    }

    /// Sweep grids vary the channel over a fixed class list.
    pub fn is_domain_sweep(self) -> bool {
        matches!(self, PlanKind::SnrSweep | PlanKind::FoSweep | PlanKind::SnrFoSweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Paper,
    Desk,
}

/// Data volumes and model size for one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSettings {
    /// Source-scale train/val volumes and the test size, per class.
    pub source: PerClass,
    /// Target-scale train and val volumes used by baselines and transfers.
    pub target_train: usize,
    pub target_val: usize,
    pub width_scale: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Restricts every config's class list.
    pub schemes: Option<Vec<Scheme>>,
    /// Indices into the kind's config list to keep.
    pub windows: Option<Vec<usize>>,
}

impl ScaleSettings {
    pub fn paper() -> Self {
        ScaleSettings {
            source: PerClass { train: 5000, val: 500, test: 1000 },
            target_train: 500,
            target_val: 50,
            width_scale: 1.0,
            epochs: 100,
            batch_size: 128,
            schemes: None,
            windows: None,
        }
    }

    pub fn desk(kind: PlanKind) -> Self {
        let windows = match kind {
            PlanKind::SnrSweep => Some(vec![0, 6, 12, 19, 25]),
            PlanKind::FoSweep => Some(vec![0, 8, 15, 22, 30]),
            PlanKind::SnrFoSweep => Some(vec![0, 6, 12, 18, 24]),
            PlanKind::ModExp1 | PlanKind::ModExp2 => None,
        };
        ScaleSettings {
            source: PerClass { train: 500, val: 50, test: 200 },
            target_train: 50,
            target_val: 5,
            width_scale: 0.05,
            epochs: 25,
            batch_size: 128,
            schemes: Some(DESK_SCHEMES.to_vec()),
            windows,
        }
    }

    pub fn for_scale(scale: Scale, kind: PlanKind) -> Self {
        match scale {
            Scale::Paper => Self::paper(),
            Scale::Desk => Self::desk(kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub kind: PlanKind,
    pub master_path: PathBuf,
    pub scale: Scale,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    #[serde(default = "one")]
    pub workers: usize,
    /// Overrides the scale's default settings.
    #[serde(default)]
    pub settings: Option<ScaleSettings>,
}

fn one() -> usize {
    1
}

/// One unit of work. Pretrain and baseline cells have `source == target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub source: String,
    pub target: String,
    pub method: Method,
    pub seed: u64,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}->{} {} seed {}", self.source, self.target, self.method, self.seed)
    }
}

/// Training seed of a cell, derived from the plan seed and its coordinates.
pub fn cell_seed(seed: u64, source: &str, target: &str, method: Method) -> u64 {
    derive_seed(seed, &[source.as_bytes(), target.as_bytes(), method.name().as_bytes()])
}

impl ExperimentPlan {
    pub fn new(kind: PlanKind, scale: Scale, master_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan {
            kind,
            master_path: master_path.into(),
            scale,
            seeds: vec![0],
            out_dir: out_dir.into(),
            workers: 1,
            settings: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read(path).map_err(super::io_err(path))?;
        serde_json::from_slice(&text).map_err(super::json_err(path))
    }

    pub fn settings(&self) -> ScaleSettings {
        self.settings.clone().unwrap_or_else(|| ScaleSettings::for_scale(self.scale, self.kind))
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.settings();
        if self.seeds.is_empty() {
            return Err(ExpError::Plan("at least one seed is required".into()));
        }
        if self.workers == 0 {
            return Err(ExpError::Plan("workers must be at least 1".into()));
        }
        if s.target_train > s.source.train || s.target_val > s.source.val {
            return Err(ExpError::Plan("target volumes cannot exceed source volumes".into()));
        }
        match self.scale {
            Scale::Desk if s.width_scale >= 1.0 => {
                Err(ExpError::Plan("desk scale needs width_scale below 1".into()))
            }
            Scale::Paper if s != ScaleSettings::paper() => {
                Err(ExpError::Plan("paper scale uses the default volumes and full width".into()))
            }
            _ => Ok(()),
        }
    }

    /// Subset configs of the grid after window and class restriction.
    /// Restriction can make consecutive configs identical; repeats are dropped.
    pub fn configs(&self) -> Result<Vec<SubsetConfig>> {
        let s = self.settings();
        let all = self.kind.configs();
        let picked: Vec<SubsetConfig> = match &s.windows {
            Some(idx) => idx
                .iter()
                .map(|&i| {
                    all.get(i).cloned().ok_or_else(|| ExpError::Plan(format!("window index {i} out of range")))
                })
                .collect::<Result<_>>()?,
            None => all,
        };
        let mut out: Vec<SubsetConfig> = Vec::new();
        for c in picked {
            let mut c = c.with_per_class(s.source);
            if let Some(keep) = &s.schemes {
                let schemes: Vec<Scheme> = c.schemes.iter().copied().filter(|x| keep.contains(x)).collect();
                if schemes.is_empty() {
                    continue;
                }
                c = c.with_schemes(&schemes);
            }
            if out.iter().any(|o| o.schemes == c.schemes && o.snr_range == c.snr_range && o.fo_range == c.fo_range)
            {
                continue;
            }
            out.push(c);
        }
        if out.is_empty() {
            return Err(ExpError::Plan("no configs survive the restriction".into()));
        }
        Ok(out)
    }

    /// All cells of the grid: per seed, one pretrain and one baseline per
    /// config and both transfer methods for every ordered pair of distinct
    /// configs.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let names: Vec<String> = self.configs()?.into_iter().map(|c| c.name).collect();
        let mut cells = Vec::new();
        for &seed in &self.seeds {
            for n in &names {
                for method in [Method::Pretrain, Method::Baseline] {
                    cells.push(Cell { source: n.clone(), target: n.clone(), method, seed });
                }
            }
            for s in &names {
                for t in names.iter().filter(|t| *t != s) {
                    for method in [Method::HeadRetrain, Method::FineTune] {
                        cells.push(Cell { source: s.clone(), target: t.clone(), method, seed });
                    }
                }
            }
        }
        Ok(cells)
    }

    pub fn checkpoint_rel_path(cell: &Cell) -> PathBuf {
        PathBuf::from("checkpoints")
            .join(format!("seed_{}", cell.seed))
            .join(cell.method.name())
            .join(format!("{}__{}.ckpt", cell.source, cell.target))
    }
}
