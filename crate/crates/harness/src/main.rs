use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ricochet_core::costs::CostParams;
use ricochet_core::sampling::SamplingParams;
use ricochet_core::simulator::{NoiseParams, PlannerConfig, DEFAULT_TIMEOUT};
use ricochet_core::World;
use ricochet_harness::output::read_timings;
use ricochet_harness::sweep::trial_id;
use ricochet_harness::{
    emit_outputs, improvement_table, read_trials, run_trial, run_trials_with_jobs,
    strategy_by_label, summarize, timing_report, SweepSpec,
};

fn defaults_help() -> String {
    let c = CostParams::default();
    let s = SamplingParams::default();
    let p = PlannerConfig::default();
    let n = NoiseParams::default();
    format!(
        "planner defaults:\n  \
         weights: harness w_p=1 w_r=0.1 w_v=4; high_risk w_p=1 w_r=0.1 w_v=0; low_risk w_p=1 w_r=100 w_v=0\n  \
         sampling: delta_l={} m, n_dirs={}, v_max={} m/s\n  \
         costs: theta_thres={:.4} rad, f_a={}, f_theta={}, delta_v={}, penalty={}, tau_ref={} s\n  \
         restitution: normal={}, tangential={}\n  \
         loop: window={} m, p_safe={}, eps_goal={} m, timeout={DEFAULT_TIMEOUT} s\n  \
         noise: actuation_sigma={}, goal_sigma={}",
        s.delta_l,
        s.n_dirs,
        s.v_max,
        c.theta_thres,
        c.f_a,
        c.f_theta,
        c.delta_v,
        c.penalty,
        c.tau_ref,
        c.restitution_n,
        c.restitution_t,
        p.window_size,
        p.p_safe,
        p.eps_goal,
        n.actuation_sigma,
        n.goal_sigma,
    )
}

/// Closed-loop planner benchmark: single runs, sweeps, and statistics.
#[derive(Parser)]
#[command(name = "ricochet", version, after_long_help = defaults_help(), after_help = defaults_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its record and trajectory.
    Run {
        /// World file (TOML).
        #[arg(long)]
        world: PathBuf,
        /// Strategy label: harness, high_risk, or low_risk.
        #[arg(long, default_value = "harness")]
        strategy: String,
        /// Replanning period in seconds.
        #[arg(long = "t-map", default_value_t = 0.2)]
        t_map: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT)]
        timeout: f64,
        /// Output directory for trials.csv and the trajectory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also emit SVG plots.
        #[arg(long)]
        plot: bool,
    },
    /// Run a full sweep from a TOML spec file.
    Sweep {
        /// Spec file: world, strategies, t_map_grid, trials_per_cell, base_seed.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Score the unpruned candidate set too and record both timings.
        #[arg(long)]
        measure_pruning: bool,
    },
    /// Summarize a sweep output directory.
    Stats {
        /// Directory previously written by `sweep`.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            world,
            strategy,
            t_map,
            seed,
            timeout,
            out,
            plot,
        } => {
            let world = World::load(&world).with_context(|| format!("loading {}", world.display()))?;
            let spec = strategy_by_label(&strategy)
                .ok_or_else(|| anyhow::anyhow!("unknown strategy `{strategy}`"))?;
            let id = trial_id(&spec.label, t_map, 0);
            let output = run_trial(&world, &spec, t_map, timeout, seed, id, false)?;
            let r = &output.record;
            println!(
                "{}: success={} arrival={:.2}s path={:.3}m collisions={} (intentional {})",
                r.trial_id, r.success, r.arrival_time, r.path_length, r.n_collisions, r.n_intentional
            );
            let world_for_plot = plot.then_some(&world);
            let written = emit_outputs(std::slice::from_ref(&output), world_for_plot, &out)?;
            println!("wrote {} files under {}", written.len(), out.display());
            if !r.success {
                anyhow::bail!("episode timed out before reaching the goal");
            }
        }
        Command::Sweep {
            spec,
            out,
            jobs,
            measure_pruning,
        } => {
            let spec = SweepSpec::load(&spec)?;
            let world =
                World::load(&spec.world).with_context(|| format!("loading {}", spec.world.display()))?;
            let outputs = run_trials_with_jobs(&spec, &world, measure_pruning, jobs)?;
            let written = emit_outputs(&outputs, Some(&world), &out)?;
            println!(
                "ran {} trials on `{}`; wrote {} files under {}",
                outputs.len(),
                world.name(),
                written.len(),
                out.display()
            );
            print_stats(
                &outputs.iter().map(|o| o.record.clone()).collect::<Vec<_>>(),
                &outputs.iter().flat_map(|o| o.timings.iter().copied()).collect::<Vec<_>>(),
            );
        }
        Command::Stats { input } => {
            let records = read_trials(&input)?;
            let timings = read_timings(&input)?;
            print_stats(&records, &timings);
        }
    }
    Ok(())
}

fn print_stats(
    records: &[ricochet_harness::TrialRecord],
    timings: &[ricochet_core::simulator::PlanTiming],
) {
    println!("\nper-cell summary (strategy, t_map):");
    println!(
        "  {:<10} {:>5} {:>8} {:>12} {:>12} {:>11} {:>12}",
        "strategy", "t_map", "success", "arrival (s)", "path (m)", "collisions", "intentional"
    );
    for c in summarize(records) {
        println!(
            "  {:<10} {:>5} {:>5}/{:<2} {:>6.2}±{:<5.2} {:>6.3}±{:<5.3} {:>11.2} {:>12.2}",
            c.strategy,
            c.t_map,
            c.successes,
            c.trials,
            c.arrival_mean,
            c.arrival_std,
            c.path_mean,
            c.path_std,
            c.collisions_mean,
            c.intentional_mean,
        );
    }
    let mut t_maps: Vec<f64> = records.iter().map(|r| r.t_map).collect();
    t_maps.sort_by(f64::total_cmp);
    t_maps.dedup();
    for t in t_maps {
        let cell: Vec<_> = records.iter().filter(|r| r.t_map == t).cloned().collect();
        match improvement_table(&cell) {
            Ok(table) => println!("\nt_map = {t}\n{table}"),
            Err(_) => {} // a baseline is absent at this t_map; nothing to compare
        }
    }
    if !timings.is_empty() {
        println!("{}", timing_report(timings));
    }
}
