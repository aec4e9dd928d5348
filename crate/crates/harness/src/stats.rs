//! Aggregation: per-cell summaries, the improvement table, and the
//! pruning timing report. All statistics are order-independent.

use std::fmt;

use ricochet_core::simulator::PlanTiming;

use crate::records::TrialRecord;
use crate::sweep::{HARNESS, HIGH_RISK, LOW_RISK};
use crate::HarnessError;

/// Mean and sample standard deviation (n−1 denominator; 0 for n < 2).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate over one (strategy, t_map) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub strategy: String,
    pub t_map: f64,
    pub trials: usize,
    pub successes: usize,
    pub arrival_mean: f64,
    pub arrival_std: f64,
    pub path_mean: f64,
    pub path_std: f64,
    pub collisions_mean: f64,
    pub intentional_mean: f64,
}

/// Groups records by (strategy, t_map), strategies in first-appearance
/// order, map times ascending. Shuffling the input changes nothing.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut strategies: Vec<&str> = Vec::new();
    for r in records {
        if !strategies.contains(&r.strategy.as_str()) {
            strategies.push(&r.strategy);
        }
    }
    let mut t_maps: Vec<f64> = records.iter().map(|r| r.t_map).collect();
    t_maps.sort_by(f64::total_cmp);
    t_maps.dedup();

    let mut out = Vec::new();
    for strategy in strategies {
        for &t_map in &t_maps {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.strategy == strategy && r.t_map == t_map)
                .collect();
            if cell.is_empty() {
                continue;
            }
            let arrivals: Vec<f64> = cell.iter().map(|r| r.arrival_time).collect();
            let paths: Vec<f64> = cell.iter().map(|r| r.path_length).collect();
            let (arrival_mean, arrival_std) = mean_std(&arrivals);
            let (path_mean, path_std) = mean_std(&paths);
            let n = cell.len() as f64;
            out.push(CellSummary {
                strategy: strategy.to_string(),
                t_map,
                trials: cell.len(),
                successes: cell.iter().filter(|r| r.success).count(),
                arrival_mean,
                arrival_std,
                path_mean,
                path_std,
                collisions_mean: cell.iter().map(|r| r.n_collisions as f64).sum::<f64>() / n,
                intentional_mean: cell.iter().map(|r| r.n_intentional as f64).sum::<f64>() / n,
            });
        }
    }
    out
}

/// Percent improvements of the harnessing strategy over one baseline:
/// `100·(baseline − harnessing)/baseline`, per metric and statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementColumn {
    pub arrival_mean: f64,
    pub arrival_std: f64,
    pub path_mean: f64,
    pub path_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementTable {
    pub vs_high_risk: ImprovementColumn,
    pub vs_low_risk: ImprovementColumn,
}

fn improvement(baseline: f64, harnessing: f64) -> f64 {
    100.0 * (baseline - harnessing) / baseline
}

struct StrategyStats {
    arrival_mean: f64,
    arrival_std: f64,
    path_mean: f64,
    path_std: f64,
}

fn strategy_stats(records: &[TrialRecord], label: &str) -> Result<StrategyStats, HarnessError> {
    let arrivals: Vec<f64> = records
        .iter()
        .filter(|r| r.strategy == label)
        .map(|r| r.arrival_time)
        .collect();
    if arrivals.is_empty() {
        return Err(HarnessError::MissingStrategy(label.to_string()));
    }
    let paths: Vec<f64> = records
        .iter()
        .filter(|r| r.strategy == label)
        .map(|r| r.path_length)
        .collect();
    let (arrival_mean, arrival_std) = mean_std(&arrivals);
    let (path_mean, path_std) = mean_std(&paths);
    Ok(StrategyStats {
        arrival_mean,
        arrival_std,
        path_mean,
        path_std,
    })
}

/// Improvement table of the `harness` strategy against both baselines,
/// computed over every record passed in (filter by t_map upstream when a
/// single-cell table is wanted).
pub fn improvement_table(records: &[TrialRecord]) -> Result<ImprovementTable, HarnessError> {
    let h = strategy_stats(records, HARNESS)?;
    let column = |b: &StrategyStats| ImprovementColumn {
        arrival_mean: improvement(b.arrival_mean, h.arrival_mean),
        arrival_std: improvement(b.arrival_std, h.arrival_std),
        path_mean: improvement(b.path_mean, h.path_mean),
        path_std: improvement(b.path_std, h.path_std),
    };
    Ok(ImprovementTable {
        vs_high_risk: column(&strategy_stats(records, HIGH_RISK)?),
        vs_low_risk: column(&strategy_stats(records, LOW_RISK)?),
    })
}

impl fmt::Display for ImprovementTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "improvement of `{HARNESS}` (%)   vs {HIGH_RISK:>9}   vs {LOW_RISK:>9}")?;
        for (name, hi, lo) in [
            ("arrival time mean", self.vs_high_risk.arrival_mean, self.vs_low_risk.arrival_mean),
            ("arrival time STD ", self.vs_high_risk.arrival_std, self.vs_low_risk.arrival_std),
            ("path length mean ", self.vs_high_risk.path_mean, self.vs_low_risk.path_mean),
            ("path length STD  ", self.vs_high_risk.path_std, self.vs_low_risk.path_std),
        ] {
            writeln!(f, "  {name}        {hi:>12.2}   {lo:>12.2}")?;
        }
        Ok(())
    }
}

/// Pruning payoff measured on identical candidate batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingReport {
    pub cycles: usize,
    pub mean_full_ms: f64,
    pub mean_pruned_ms: f64,
    /// Mean per-cycle evaluation time saved by pruning (ms).
    pub mean_saving_ms: f64,
    /// Mean of pruned/full candidate counts.
    pub mean_count_ratio: f64,
}

pub fn timing_report(timings: &[PlanTiming]) -> TimingReport {
    if timings.is_empty() {
        return TimingReport {
            cycles: 0,
            mean_full_ms: 0.0,
            mean_pruned_ms: 0.0,
            mean_saving_ms: 0.0,
            mean_count_ratio: 0.0,
        };
    }
    let n = timings.len() as f64;
    let mean_full_ms = timings.iter().map(|t| t.full_us).sum::<f64>() / n / 1e3;
    let mean_pruned_ms = timings.iter().map(|t| t.pruned_us).sum::<f64>() / n / 1e3;
    let mean_count_ratio = timings
        .iter()
        .map(|t| t.pruned_count as f64 / t.full_count.max(1) as f64)
        .sum::<f64>()
        / n;
    TimingReport {
        cycles: timings.len(),
        mean_full_ms,
        mean_pruned_ms,
        mean_saving_ms: mean_full_ms - mean_pruned_ms,
        mean_count_ratio,
    }
}

impl fmt::Display for TimingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pruning timing over {} planning cycles:", self.cycles)?;
        writeln!(f, "  full evaluation   {:>9.3} ms", self.mean_full_ms)?;
        writeln!(f, "  pruned evaluation {:>9.3} ms", self.mean_pruned_ms)?;
        writeln!(f, "  mean saving       {:>9.3} ms", self.mean_saving_ms)?;
        writeln!(f, "  candidate ratio   {:>9.3}", self.mean_count_ratio)
    }
}
