//! File emission for sweeps: CSVs (byte-reproducible) and SVG plots.

use std::io;
use std::path::{Path, PathBuf};

use ricochet_core::simulator::PlanTiming;
use ricochet_core::World;

use crate::plot::{svg_summary_panels, svg_trajectories};
use crate::records::{parse_trials_csv, render_trajectory_csv, render_trials_csv, TrialRecord};
use crate::sweep::TrialOutput;
use crate::HarnessError;

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const TIMINGS_HEADER: &str = "full_us,pruned_us,full_count,pruned_count";

pub fn render_timings_csv(timings: &[PlanTiming]) -> String {
    let mut out = String::from(TIMINGS_HEADER);
    out.push('\n');
    for t in timings {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.full_us, t.pruned_us, t.full_count, t.pruned_count
        ));
    }
    out
}

pub fn parse_timings_csv(text: &str) -> Result<Vec<PlanTiming>, HarnessError> {
    let err = |line: usize, msg: String| HarnessError::Csv { line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TIMINGS_HEADER => {}
        other => {
            return Err(err(1, format!("unexpected timings header {other:?}")));
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(err(lineno, format!("expected 4 fields, got {}", fields.len())));
        }
        out.push(PlanTiming {
            full_us: fields[0].parse().map_err(|e| err(lineno, format!("full_us: {e}")))?,
            pruned_us: fields[1].parse().map_err(|e| err(lineno, format!("pruned_us: {e}")))?,
            full_count: fields[2].parse().map_err(|e| err(lineno, format!("full_count: {e}")))?,
            pruned_count: fields[3]
                .parse()
                .map_err(|e| err(lineno, format!("pruned_count: {e}")))?,
        });
    }
    Ok(out)
}

/// Writes `trials.csv`, per-trial `trajectories/<trial_id>.csv`, the SVG
/// plots, and `timings.csv` when pruning was instrumented. Returns the
/// paths written. With no records only the header CSV appears.
pub fn emit_outputs(
    outputs: &[TrialOutput],
    world: Option<&World>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    create_dir(out_dir)?;
    let mut written = Vec::new();

    let records: Vec<TrialRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let trials_path = out_dir.join("trials.csv");
    write_file(&trials_path, &render_trials_csv(&records))?;
    written.push(trials_path);

    if !outputs.is_empty() {
        let traj_dir = out_dir.join("trajectories");
        create_dir(&traj_dir)?;
        for o in outputs {
            let path = traj_dir.join(format!("{}.csv", o.record.trial_id));
            write_file(&path, &render_trajectory_csv(&o.trajectory))?;
            written.push(path);
        }

        let panels = out_dir.join("summary_panels.svg");
        write_file(&panels, &svg_summary_panels(&records))?;
        written.push(panels);

        if let Some(world) = world {
            let mut labels: Vec<&str> = Vec::new();
            for o in outputs {
                if !labels.contains(&o.record.strategy.as_str()) {
                    labels.push(&o.record.strategy);
                }
            }
            for label in labels {
                let runs: Vec<&[(f64, ricochet_core::Vec2)]> = outputs
                    .iter()
                    .filter(|o| o.record.strategy == label)
                    .map(|o| o.trajectory.as_slice())
                    .collect();
                let path = out_dir.join(format!("trajectories_{label}.svg"));
                write_file(&path, &svg_trajectories(world, label, &runs))?;
                written.push(path);
            }
        }
    }

    let timings: Vec<PlanTiming> = outputs.iter().flat_map(|o| o.timings.iter().copied()).collect();
    if !timings.is_empty() {
        let path = out_dir.join("timings.csv");
        write_file(&path, &render_timings_csv(&timings))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_trials(dir: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let path = dir.join("trials.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|source| HarnessError::Io { path, source })?;
    parse_trials_csv(&text)
}

/// Timings are optional output; a missing file reads as no cycles.
pub fn read_timings(dir: &Path) -> Result<Vec<PlanTiming>, HarnessError> {
    let path = dir.join("timings.csv");
    match std::fs::read_to_string(&path) {
        Ok(text) => parse_timings_csv(&text),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(source) => Err(HarnessError::Io { path, source }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ricochet_core::Vec2;

    fn outputs() -> Vec<TrialOutput> {
        vec![TrialOutput {
            record: TrialRecord {
                trial_id: "harness-tm0.2-00".into(),
                strategy: "harness".into(),
                t_map: 0.2,
                arrival_time: 4.0,
                path_length: 2.0,
                n_collisions: 1,
                n_intentional: 1,
                success: true,
                seed: 5,
            },
            trajectory: vec![(0.0, Vec2::ZERO), (0.01, Vec2::new(0.01, 0.0))],
            timings: vec![PlanTiming {
                full_us: 900.0,
                pruned_us: 300.0,
                full_count: 120,
                pruned_count: 30,
            }],
        }]
    }

    #[test]
    fn emit_and_read_back_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_outputs(&outputs(), None, dir.path()).unwrap();
        assert!(written.iter().any(|p| p.ends_with("trials.csv")));
        assert!(written
            .iter()
            .any(|p| p.ends_with("trajectories/harness-tm0.2-00.csv")));
        assert!(written.iter().any(|p| p.ends_with("summary_panels.svg")));
        assert!(written.iter().any(|p| p.ends_with("timings.csv")));

        let records = read_trials(dir.path()).unwrap();
        assert_eq!(records, vec![outputs()[0].record.clone()]);
        let timings = read_timings(dir.path()).unwrap();
        assert_eq!(timings.len(), 1);
        assert_eq!(timings[0].full_count, 120);

        // Re-emission is byte-identical for the data files.
        let trials_a = std::fs::read(dir.path().join("trials.csv")).unwrap();
        emit_outputs(&outputs(), None, dir.path()).unwrap();
        let trials_b = std::fs::read(dir.path().join("trials.csv")).unwrap();
        assert_eq!(trials_a, trials_b);
    }

    #[test]
    fn empty_records_emit_header_only_and_no_plots() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_outputs(&[], None, dir.path()).unwrap();
        assert_eq!(written.len(), 1);
        let text = std::fs::read_to_string(&written[0]).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(!dir.path().join("summary_panels.svg").exists());
        assert!(read_timings(dir.path()).unwrap().is_empty());
    }
}
