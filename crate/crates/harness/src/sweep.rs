//! Sweep specifications and parallel trial execution.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ricochet_core::costs::CostWeights;
use ricochet_core::simulator::{run_episode, PlanTiming, PlannerConfig, DEFAULT_TIMEOUT};
use ricochet_core::{Vec2, World};

use crate::records::TrialRecord;
use crate::HarnessError;

/// A named weight configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub label: String,
    #[serde(default = "one")]
    pub w_p: f64,
    pub w_r: f64,
    pub w_v: f64,
}

fn one() -> f64 {
    1.0
}

impl StrategySpec {
    pub fn weights(&self) -> CostWeights {
        CostWeights {
            w_p: self.w_p,
            w_r: self.w_r,
            w_v: self.w_v,
        }
    }
}

pub const HARNESS: &str = "harness";
pub const HIGH_RISK: &str = "high_risk";
pub const LOW_RISK: &str = "low_risk";

/// The three reference configurations benchmarked against each other:
/// full harnessing, risk-tolerant but reward-blind, and strict avoidance.
pub fn builtin_strategies() -> Vec<StrategySpec> {
    vec![
        StrategySpec {
            label: HARNESS.into(),
            w_p: 1.0,
            w_r: 0.1,
            w_v: 4.0,
        },
        StrategySpec {
            label: HIGH_RISK.into(),
            w_p: 1.0,
            w_r: 0.1,
            w_v: 0.0,
        },
        StrategySpec {
            label: LOW_RISK.into(),
            w_p: 1.0,
            w_r: 100.0,
            w_v: 0.0,
        },
    ]
}

pub fn strategy_by_label(label: &str) -> Option<StrategySpec> {
    builtin_strategies().into_iter().find(|s| s.label == label)
}

/// Either a builtin label or an inline weight table in the spec file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StrategyEntry {
    Label(String),
    Custom(StrategySpec),
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT
}

#[derive(Debug, Deserialize)]
struct SweepSpecFile {
    world: PathBuf,
    #[serde(default)]
    strategies: Vec<StrategyEntry>,
    t_map_grid: Vec<f64>,
    trials_per_cell: usize,
    base_seed: u64,
    #[serde(default = "default_timeout")]
    timeout: f64,
}

/// A full benchmark: every strategy crossed with every map time, repeated
/// `trials_per_cell` times with seeds `base_seed + trial_index` (the same
/// seed set in every cell, so trials pair across strategies).
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub world: PathBuf,
    pub strategies: Vec<StrategySpec>,
    pub t_map_grid: Vec<f64>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub timeout: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials_per_cell < 1 {
            return Err(HarnessError::InvalidSpec("trials_per_cell must be ≥ 1"));
        }
        if self.strategies.is_empty() {
            return Err(HarnessError::InvalidSpec("at least one strategy required"));
        }
        if self.t_map_grid.is_empty() {
            return Err(HarnessError::InvalidSpec("t_map_grid must be non-empty"));
        }
        if !self.t_map_grid.iter().all(|t| *t > 0.0) {
            return Err(HarnessError::InvalidSpec("t_map values must be positive"));
        }
        let mut labels: Vec<&str> = self.strategies.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.strategies.len() {
            return Err(HarnessError::InvalidSpec("strategy labels must be unique"));
        }
        Ok(())
    }

    /// Loads a TOML spec. A relative world path is resolved against the
    /// spec file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: SweepSpecFile = toml::from_str(&text).map_err(|e| HarnessError::Spec {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let strategies = if file.strategies.is_empty() {
            builtin_strategies()
        } else {
            file.strategies
                .into_iter()
                .map(|entry| match entry {
                    StrategyEntry::Custom(s) => Ok(s),
                    StrategyEntry::Label(l) => {
                        strategy_by_label(&l).ok_or(HarnessError::UnknownStrategy(l))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        let world = if file.world.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(&file.world)
        } else {
            file.world
        };
        let spec = Self {
            world,
            strategies,
            t_map_grid: file.t_map_grid,
            trials_per_cell: file.trials_per_cell,
            base_seed: file.base_seed,
            timeout: file.timeout,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Record plus everything the plot/export layer needs.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub trajectory: Vec<(f64, Vec2)>,
    pub timings: Vec<PlanTiming>,
}

pub fn trial_id(strategy: &str, t_map: f64, index: usize) -> String {
    format!("{strategy}-tm{t_map}-{index:02}")
}

pub fn planner_config(weights: CostWeights, measure_pruning: bool) -> PlannerConfig {
    PlannerConfig {
        weights,
        measure_pruning,
        ..PlannerConfig::default()
    }
}

pub fn run_trial(
    world: &World,
    strategy: &StrategySpec,
    t_map: f64,
    timeout: f64,
    seed: u64,
    id: String,
    measure_pruning: bool,
) -> Result<TrialOutput, HarnessError> {
    let cfg = planner_config(strategy.weights(), measure_pruning);
    let ep = run_episode(world, &cfg, t_map, timeout, seed)?;
    Ok(TrialOutput {
        record: TrialRecord {
            trial_id: id,
            strategy: strategy.label.clone(),
            t_map,
            arrival_time: ep.outcome.arrival_time,
            path_length: ep.outcome.path_length,
            n_collisions: ep.outcome.n_collisions,
            n_intentional: ep.outcome.n_intentional,
            success: ep.outcome.success,
            seed,
        },
        trajectory: ep.outcome.trajectory,
        timings: ep.timings,
    })
}

/// Runs the whole sweep, trials in parallel, results in deterministic
/// (strategy, t_map, trial) order regardless of thread count.
pub fn run_trials(
    spec: &SweepSpec,
    world: &World,
    measure_pruning: bool,
) -> Result<Vec<TrialOutput>, HarnessError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for strategy in &spec.strategies {
        for &t_map in &spec.t_map_grid {
            for i in 0..spec.trials_per_cell {
                cells.push((strategy, t_map, i));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(strategy, t_map, i)| {
            run_trial(
                world,
                strategy,
                t_map,
                spec.timeout,
                spec.base_seed + i as u64,
                trial_id(&strategy.label, t_map, i),
                measure_pruning,
            )
        })
        .collect()
}

/// Same as [`run_trials`] but capped to `jobs` worker threads when given.
pub fn run_trials_with_jobs(
    spec: &SweepSpec,
    world: &World,
    measure_pruning: bool,
    jobs: Option<usize>,
) -> Result<Vec<TrialOutput>, HarnessError> {
    match jobs {
        None => run_trials(spec, world, measure_pruning),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| HarnessError::Spec {
                    path: PathBuf::from("<thread-pool>"),
                    msg: e.to_string(),
                })?;
            pool.install(|| run_trials(spec, world, measure_pruning))
        }
    }
}
