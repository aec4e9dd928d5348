//! Trial records and their CSV interchange format.
//!
//! The CSV column order is a contract: external tooling indexes by it.
//! Floats are rendered with Rust's shortest round-trip formatting, so
//! `parse(render(records)) == records` holds exactly.

use serde::Serialize;

use crate::HarnessError;

pub const TRIALS_HEADER: &str =
    "trial_id,strategy,t_map,arrival_time,path_length,n_collisions,n_intentional,success,seed";

/// One closed-loop episode under a named strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub strategy: String,
    pub t_map: f64,
    /// Seconds to goal; equals the timeout when `success` is false.
    pub arrival_time: f64,
    pub path_length: f64,
    pub n_collisions: usize,
    /// Debounced interactions begun under a deliberately colliding plan;
    /// never exceeds `n_collisions`.
    pub n_intentional: usize,
    pub success: bool,
    pub seed: u64,
}

pub fn render_trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    for r in records {
        debug_assert!(
            !r.trial_id.contains(',') && !r.strategy.contains(','),
            "identifiers must be comma-free"
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.trial_id,
            r.strategy,
            r.t_map,
            r.arrival_time,
            r.path_length,
            r.n_collisions,
            r.n_intentional,
            r.success,
            r.seed
        ));
    }
    out
}

fn field_err(line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Csv {
        line,
        msg: msg.into(),
    }
}

pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRIALS_HEADER => {}
        Some((_, header)) => {
            return Err(field_err(1, format!("unexpected header `{header}`")));
        }
        None => return Err(field_err(1, "empty file")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(field_err(lineno, format!("expected 9 fields, got {}", fields.len())));
        }
        let f64_field = |i: usize, name: &str| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| field_err(lineno, format!("{name}: {e}")))
        };
        let usize_field = |i: usize, name: &str| {
            fields[i]
                .parse::<usize>()
                .map_err(|e| field_err(lineno, format!("{name}: {e}")))
        };
        records.push(TrialRecord {
            trial_id: fields[0].to_string(),
            strategy: fields[1].to_string(),
            t_map: f64_field(2, "t_map")?,
            arrival_time: f64_field(3, "arrival_time")?,
            path_length: f64_field(4, "path_length")?,
            n_collisions: usize_field(5, "n_collisions")?,
            n_intentional: usize_field(6, "n_intentional")?,
            success: fields[7]
                .parse::<bool>()
                .map_err(|e| field_err(lineno, format!("success: {e}")))?,
            seed: fields[8]
                .parse::<u64>()
                .map_err(|e| field_err(lineno, format!("seed: {e}")))?,
        });
    }
    Ok(records)
}

pub const TRAJECTORY_HEADER: &str = "t,x,y";

pub fn render_trajectory_csv(samples: &[(f64, ricochet_core::Vec2)]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, p) in samples {
        out.push_str(&format!("{},{},{}\n", t, p.x, p.y));
    }
    out
}
