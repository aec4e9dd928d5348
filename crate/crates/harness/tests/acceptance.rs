//! Acceptance gate: the seven go/no-go criteria for the planner and the
//! benchmark, each as one test printing a single `criterion N (...): PASS`
//! line (visible with `--nocapture`; the test name itself carries the
//! verdict in the default listing).
//!
//! Criteria 1, 2, and 7 share one full corridor sweep (3 strategies ×
//! 5 map times × 20 seeded trials), computed once. Wall-clock sensitive
//! sections (criterion 4's timing comparison, criterion 7's rerun sweep)
//! take a common lock so they never contend with each other.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ricochet_core::costs::{
    cost_pos, cost_risk, cost_vel, potential_collision_point, reflect_velocity, reward_reflection,
    score_batch, select_intermediate_state, CostBreakdown, CostParams, CostWeights, PlannerContext,
};
use ricochet_core::geometry::{segment_segment_intersection, visibility_polygon, OccluderEdge};
use ricochet_core::localmap::{build_local_map, LocalMap};
use ricochet_core::sampling::{
    prune_by_position, prune_by_velocity, sample_candidates, CandidateState, SamplingParams,
};
use ricochet_core::trajectory::{assign_duration, eval_spline, TimedTrajectory};
use ricochet_core::{Polygon, RobotState, Segment, Vec2, World};
use ricochet_harness::records::render_trajectory_csv;
use ricochet_harness::sweep::{trial_id, HARNESS, HIGH_RISK, LOW_RISK};
use ricochet_harness::{
    builtin_strategies, parse_trials_csv, render_trials_csv, run_trial, run_trials,
    strategy_by_label, SweepSpec, TrialRecord,
};

fn ws_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn report(n: usize, label: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n} ({label}): {verdict} — {detail}");
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    assert!(n > 0, "mean of empty set");
    sum / n as f64
}

// ---------------------------------------------------------------------------
// Shared corridor sweep (criteria 1, 2, 7).

struct SweepRun {
    spec: SweepSpec,
    records: Vec<TrialRecord>,
    wall: Duration,
}

static SWEEP: OnceLock<SweepRun> = OnceLock::new();
/// Serializes wall-clock measurements against the rerun sweep.
static TIMING_GATE: Mutex<()> = Mutex::new(());

fn corridor_spec() -> SweepSpec {
    let spec = SweepSpec::load(&ws_path("sweeps/corridor.toml")).expect("sweep spec loads");
    // The shipped protocol is what the criteria below describe; pin it.
    assert_eq!(spec.t_map_grid, vec![0.2, 0.4, 0.6, 0.8, 1.0]);
    assert_eq!(spec.trials_per_cell, 20);
    assert_eq!(spec.strategies.len(), 3);
    spec
}

fn corridor_sweep() -> &'static SweepRun {
    SWEEP.get_or_init(|| {
        let spec = corridor_spec();
        let world = World::load(&spec.world).expect("corridor world loads");
        let t0 = Instant::now();
        let outputs = run_trials(&spec, &world, false).expect("sweep runs");
        let wall = t0.elapsed();
        SweepRun {
            spec,
            records: outputs.into_iter().map(|o| o.record).collect(),
            wall,
        }
    })
}

fn cell<'a>(records: &'a [TrialRecord], strategy: &str, t_map: f64) -> Vec<&'a TrialRecord> {
    records
        .iter()
        .filter(|r| r.strategy == strategy && r.t_map == t_map)
        .collect()
}

fn cell_means(records: &[TrialRecord], strategy: &str, t_map: f64) -> (f64, f64) {
    let rows = cell(records, strategy, t_map);
    assert_eq!(rows.len(), 20, "{strategy} cell at t_map={t_map} is full");
    (
        mean(rows.iter().map(|r| r.arrival_time)),
        mean(rows.iter().map(|r| r.path_length)),
    )
}

// ---------------------------------------------------------------------------
// Randomized convex scenes (criteria 4, 5).

/// Convex obstacles strewn around the origin as tagged occluder edges.
/// Every obstacle keeps a clear berth around the origin so the sensing
/// pose stays valid; obstacles may overlap each other.
fn random_scene(rng: &mut ChaCha8Rng) -> Vec<OccluderEdge> {
    let n_obs = rng.gen_range(2..=4usize);
    let mut edges = Vec::new();
    for source in 0..n_obs {
        let center = Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.35..0.85);
        let radius = rng.gen_range(0.12..0.28);
        let k = rng.gen_range(3..=6usize);
        // Sorted angles with a minimum gap keep the polygon fat enough to
        // avoid degenerate slivers; points on a circle are convex and CCW.
        let vertices = loop {
            let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
            angles.sort_by(f64::total_cmp);
            let wrap = TAU - (angles[k - 1] - angles[0]);
            let min_gap = angles
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(wrap, f64::min);
            if min_gap > 0.35 {
                break angles
                    .iter()
                    .map(|a| center + Vec2::from_angle(*a) * radius)
                    .collect::<Vec<_>>();
            }
        };
        let poly = Polygon::new(vertices).expect("circle-sampled vertices form a polygon");
        edges.extend(poly.edges().map(|seg| OccluderEdge::new(seg.a, seg.b, source)));
    }
    edges
}

fn random_goal(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(1.5..3.0)
}

fn scene_map(edges: &[OccluderEdge]) -> LocalMap {
    build_local_map(Vec2::ZERO, 2.0, edges).expect("origin-centered map builds")
}

/// Bitwise identity of a candidate, for matching pruned survivors back to
/// their position in the full set.
fn state_key(c: &CandidateState) -> (u64, u64, u64, u64, usize) {
    (
        c.pos.x.to_bits(),
        c.pos.y.to_bits(),
        c.vel_dir.to_bits(),
        c.vel_mag.to_bits(),
        c.frontier_id,
    )
}

/// Argmin over `order` with the documented tie rule: total, then j_risk,
/// then earlier index.
fn argmin_scores(scores: &[CostBreakdown], order: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for i in order {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (a, c) = (&scores[i], &scores[b]);
                if a.total < c.total || (a.total == c.total && a.j_risk < c.j_risk) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.expect("non-empty index set")
}

// ---------------------------------------------------------------------------
// Criterion 1 — strategy ordering on the corridor.

#[test]
fn criterion_1_strategy_ordering() {
    let sweep = corridor_sweep();
    let tm = 0.2;
    let (h_arr, h_path) = cell_means(&sweep.records, HARNESS, tm);
    let (hr_arr, _) = cell_means(&sweep.records, HIGH_RISK, tm);
    let (lr_arr, lr_path) = cell_means(&sweep.records, LOW_RISK, tm);

    let path_gain = (lr_path - h_path) / lr_path;
    let ok_arrival = h_arr < hr_arr && h_arr < lr_arr;
    let ok_path = path_gain > 0.05;
    let ok_time = sweep.wall <= Duration::from_secs(300);
    let ok = ok_arrival && ok_path && ok_time;
    let detail = format!(
        "mean arrival {h_arr:.2} s vs high_risk {hr_arr:.2} s / low_risk {lr_arr:.2} s; \
         mean path {h_path:.3} m vs low_risk {lr_path:.3} m ({:.1}% shorter); \
         sweep wall {:.1} s",
        100.0 * path_gain,
        sweep.wall.as_secs_f64()
    );
    report(1, "strategy ordering", ok, &detail);
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// Criterion 2 — monotonic degradation with the map time.

/// Counts decreases along the curve, ignoring dips of at most 1%: cell
/// means over 20 trials jitter by a fraction of a percent between adjacent
/// cells, which is the tolerated noise, not a degradation reversal.
fn inversions(curve: &[f64]) -> usize {
    curve.windows(2).filter(|w| w[1] < w[0] * 0.99).count()
}

#[test]
fn criterion_2_map_time_degradation() {
    let sweep = corridor_sweep();
    let grid = &sweep.spec.t_map_grid;

    let mut ok = sweep.wall <= Duration::from_secs(1800);
    let mut lines = Vec::new();
    for strategy in [HARNESS, HIGH_RISK, LOW_RISK] {
        let (arr, path): (Vec<f64>, Vec<f64>) = grid
            .iter()
            .map(|&tm| cell_means(&sweep.records, strategy, tm))
            .unzip();
        let (ia, ip) = (inversions(&arr), inversions(&path));
        ok &= ia <= 1 && ip <= 1;
        lines.push(format!("{strategy}: arrival inversions {ia}, path inversions {ip}"));
    }
    let detail = format!(
        "{}; sweep wall {:.1} s",
        lines.join("; "),
        sweep.wall.as_secs_f64()
    );
    report(2, "map-time degradation", ok, &detail);
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// Criterion 3 — cautious weights avoid all contact on an open world.

#[test]
fn criterion_3_safe_mode_recovery() {
    let world = World::load(ws_path("worlds/open_two_obstacle.world")).expect("world loads");
    let strategy = strategy_by_label(LOW_RISK).expect("builtin");
    let mut successes = 0usize;
    let mut collisions = 0usize;
    for seed in 0..20u64 {
        let id = trial_id(LOW_RISK, 0.2, seed as usize);
        let out = run_trial(&world, &strategy, 0.2, 60.0, seed, id, false).expect("trial runs");
        successes += usize::from(out.record.success);
        collisions += out.record.n_collisions;
    }
    let ok = successes == 20 && collisions == 0;
    let detail = format!("{successes}/20 arrivals, {collisions} collision events");
    report(3, "safe-mode recovery", ok, &detail);
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// Criterion 4 — pruning keeps the optimum and pays for itself.

#[test]
fn criterion_4_pruning_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let weights = CostWeights::default();
    let params = CostParams::default();
    let sampling = SamplingParams::default();

    let mut scenes = 0usize;
    let mut multi_frontier = 0usize;
    let mut worst_gap = 0.0f64;
    let mut savings_us = Vec::new();
    let mut attempts = 0usize;
    while scenes < 100 {
        attempts += 1;
        assert!(attempts < 2000, "scene generator starved");
        let edges = random_scene(&mut rng);
        let goal = random_goal(&mut rng);
        let map = scene_map(&edges);
        let full = sample_candidates(&map, &sampling);
        if full.is_empty() {
            continue; // fully ringed origin: nothing to prune or select
        }
        scenes += 1;

        let ctx = PlannerContext::initial(Vec2::ZERO, goal);
        let predicted = map.predicted_boundaries();
        let scores = score_batch(&full, &ctx, &map, predicted, &weights, &params);
        let best_full = argmin_scores(&scores, 0..scores.len());

        let pruned = prune_by_velocity(prune_by_position(full.clone(), &map, goal), &map);
        assert!(!pruned.is_empty(), "pruning must leave a candidate");
        let mut index_of: HashMap<_, usize> = HashMap::new();
        for (i, c) in full.iter().enumerate() {
            index_of.entry(state_key(c)).or_insert(i);
        }
        let mut survivor_ids: Vec<usize> = pruned
            .iter()
            .map(|c| *index_of.get(&state_key(c)).expect("survivor came from the full set"))
            .collect();
        survivor_ids.sort_unstable();
        let best_pruned = argmin_scores(&scores, survivor_ids.iter().copied());

        let gap = scores[best_pruned].total - scores[best_full].total;
        worst_gap = worst_gap.max(gap);
        assert!(
            gap <= 1e-9,
            "pruned optimum degrades by {gap:.3e} on scene {scenes} \
             (full {} candidates, pruned {})",
            full.len(),
            pruned.len()
        );

        if map.frontiers().len() >= 2 {
            multi_frontier += 1;
            assert!(
                pruned.len() < full.len(),
                "no candidate pruned on a {}-frontier scene",
                map.frontiers().len()
            );

            let _gate = TIMING_GATE.lock().unwrap();
            // Size the repetition count so each measured sum spans a few
            // milliseconds; single-digit-microsecond batches would
            // otherwise drown in scheduler noise.
            let t0 = Instant::now();
            std::hint::black_box(score_batch(&full, &ctx, &map, predicted, &weights, &params));
            let once = t0.elapsed().as_secs_f64();
            let reps = ((3e-3 / once.max(1e-6)).ceil() as usize).clamp(3, 200);

            let t0 = Instant::now();
            for _ in 0..reps {
                let s = score_batch(&full, &ctx, &map, predicted, &weights, &params);
                std::hint::black_box(s.len());
            }
            let full_elapsed = t0.elapsed();

            let clones: Vec<Vec<CandidateState>> = (0..reps).map(|_| full.clone()).collect();
            let t0 = Instant::now();
            for batch in clones {
                let p = prune_by_velocity(prune_by_position(batch, &map, goal), &map);
                let s = score_batch(&p, &ctx, &map, predicted, &weights, &params);
                std::hint::black_box(s.len());
            }
            let pruned_elapsed = t0.elapsed();

            assert!(
                pruned_elapsed < full_elapsed,
                "pruning did not pay off: {:?} pruned vs {:?} full ({} vs {} candidates)",
                pruned_elapsed,
                full_elapsed,
                pruned.len(),
                full.len()
            );
            savings_us
                .push((full_elapsed - pruned_elapsed).as_secs_f64() * 1e6 / reps as f64);
        }
    }
    assert!(
        multi_frontier >= 20,
        "only {multi_frontier} multi-frontier scenes; the timing claim needs coverage"
    );
    let mean_saving = mean(savings_us.iter().copied());
    let detail = format!(
        "100 scenes sound (worst optimum gap {worst_gap:.2e}); {multi_frontier} scenes with \
         ≥2 frontiers all pruned strictly and evaluated faster; mean per-cycle saving \
         {mean_saving:.0} µs"
    );
    report(4, "pruning soundness", true, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 5 — oracle equivalences.

/// Independent per-candidate re-scoring: raw terms recomputed one by one
/// through the public single-candidate functions, normalized and combined
/// with the same arithmetic, argmin taken linearly. No batch machinery.
fn brute_force_select(
    batch: &[CandidateState],
    ctx: &PlannerContext,
    map: &LocalMap,
    weights: &CostWeights,
    params: &CostParams,
) -> (usize, f64) {
    let predicted = map.predicted_boundaries();
    let raw_pos: Vec<f64> = batch.iter().map(|c| cost_pos(c, ctx, params)).collect();
    let lo = raw_pos.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw_pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, c) in batch.iter().enumerate() {
        let j_pos = if hi > lo { (raw_pos[i] - lo) / (hi - lo) } else { 0.0 };
        let (j_risk, j_risk_h) = cost_risk(c, map, predicted, params, batch);
        let r_ref = match potential_collision_point(c, predicted) {
            Some((p_p, e)) => reward_reflection(c, p_p, &e, map, ctx.p_goal, params),
            None => 0.0,
        };
        let j_vel = cost_vel(c, j_risk_h, r_ref, ctx);
        let total = weights.w_p * j_pos + weights.w_r * j_risk + weights.w_v * j_vel;
        let better = match best {
            None => true,
            Some((_, bt, br)) => total < bt || (total == bt && j_risk < br),
        };
        if better {
            best = Some((i, total, j_risk));
        }
    }
    let (i, total, _) = best.expect("non-empty batch");
    (i, total)
}

fn random_batch(rng: &mut ChaCha8Rng, map: &LocalMap, n: usize) -> Vec<CandidateState> {
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 100_000, "free space too small to sample");
        let p = Vec2::new(rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99));
        if !map.free_space().contains(p) {
            continue;
        }
        let dir = rng.gen_range(0.0..TAU);
        let mag = if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.05..1.2)
        };
        out.push(CandidateState::new(p, dir, mag, rng.gen_range(0..4usize)));
    }
    out
}

fn random_context(rng: &mut ChaCha8Rng) -> PlannerContext {
    let mut ctx = PlannerContext::initial(Vec2::ZERO, random_goal(rng));
    if rng.gen_bool(0.5) {
        // Mid-episode shape: bent approach and accumulated odometry, so the
        // turn amplification and traveled-length terms participate.
        ctx.p_pre = Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        ctx.traveled_length = rng.gen_range(0.0..4.0);
    }
    ctx
}

#[test]
fn criterion_5_oracle_equivalences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);

    // (a) Visibility area against a Monte-Carlo oracle on 20 scenes.
    let window = Polygon::rectangle(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0)).unwrap();
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let edges = random_scene(&mut rng);
        let vis = visibility_polygon(Vec2::ZERO, &window, &edges).expect("valid scene");
        let exact = vis.area();
        let n = 500_000usize;
        let mut hits = 0usize;
        for _ in 0..n {
            let p = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let sight = Segment::new(Vec2::ZERO, p);
            let blocked = edges
                .iter()
                .any(|e| segment_segment_intersection(&sight, &e.seg).is_some());
            hits += usize::from(!blocked);
        }
        let estimate = 4.0 * hits as f64 / n as f64;
        let rel = ((estimate - exact) / exact).abs();
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 0.01,
            "visibility area {exact:.4} vs Monte-Carlo {estimate:.4} ({:.2}% off)",
            100.0 * rel
        );
    }

    // (b) Selection against brute-force re-scoring on 1000 batches.
    let scenes: Vec<(Vec<OccluderEdge>, LocalMap)> = (0..10)
        .map(|_| {
            let edges = random_scene(&mut rng);
            let map = scene_map(&edges);
            (edges, map)
        })
        .collect();
    let params = CostParams::default();
    for b in 0..1000 {
        let (_, map) = &scenes[b % scenes.len()];
        let n = rng.gen_range(4..24);
        let batch = random_batch(&mut rng, map, n);
        let ctx = random_context(&mut rng);
        let weights = builtin_strategies()[b % 3].weights();
        let (winner, costs) =
            select_intermediate_state(&batch, &ctx, map, map.predicted_boundaries(), &weights, &params)
                .expect("non-empty batch");
        let (oracle_idx, oracle_total) = brute_force_select(&batch, &ctx, map, &weights, &params);
        assert_eq!(
            state_key(&winner),
            state_key(&batch[oracle_idx]),
            "batch {b}: selection disagrees with brute force"
        );
        assert!(
            costs.total == oracle_total,
            "batch {b}: totals differ: {} vs {}",
            costs.total,
            oracle_total
        );
    }

    // (c) CSV round-trip identity on randomized records.
    let mut records: Vec<TrialRecord> = (0..64)
        .map(|i| TrialRecord {
            trial_id: format!("t-{i:03}"),
            strategy: ["harness", "high_risk", "low_risk"][i % 3].to_string(),
            t_map: rng.gen_range(0.05..2.0),
            arrival_time: rng.gen_range(0.0..120.0),
            path_length: rng.gen_range(0.0..50.0) * rng.gen_range(1e-6..1e3),
            n_collisions: rng.gen_range(0..40),
            n_intentional: rng.gen_range(0..40),
            success: rng.gen_bool(0.8),
            seed: rng.gen(),
        })
        .collect();
    // Values with awkward shortest representations.
    records[0].arrival_time = 0.1 + 0.2;
    records[1].path_length = f64::MIN_POSITIVE;
    records[2].t_map = 1e300;
    let parsed = parse_trials_csv(&render_trials_csv(&records)).expect("round-trip parses");
    assert_eq!(parsed, records, "CSV round-trip must be lossless");

    let detail = format!(
        "visibility worst error {:.3}% over 20 scenes; 1000 selections match brute force \
         exactly; 64-record CSV round-trips losslessly",
        100.0 * worst_rel
    );
    report(5, "oracle equivalences", true, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 6 — numerical property suites.

fn angle_between(a: Vec2, b: Vec2) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    assert!(na > 0.0 && nb > 0.0, "angle of zero vector");
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[test]
fn criterion_6_numerical_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);

    // Reflection dissipates energy; unit restitution is specular.
    let lossy = CostParams::default();
    let mut specular = CostParams::default();
    specular.restitution_n = 1.0;
    specular.restitution_t = 1.0;
    for _ in 0..1000 {
        let v = Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.01..2.0);
        let e = Vec2::from_angle(rng.gen_range(0.0..TAU));
        let out = reflect_velocity(v, e, &lossy);
        assert!(out.norm() <= v.norm() + 1e-12, "reflection gained energy");
        let mirror = reflect_velocity(v, e, &specular);
        assert!((mirror.norm() - v.norm()).abs() <= 1e-12, "specular norm drifts");
        assert!((mirror.dot(e) - v.dot(e)).abs() <= 1e-12, "tangential changed");
        assert!((mirror.dot(e.perp()) + v.dot(e.perp())).abs() <= 1e-12, "normal not flipped");
    }

    // Risk normalization pins the batch extremes to exactly 0 and 1.
    let block = Polygon::rectangle(Vec2::new(0.4, -0.3), Vec2::new(0.8, 0.3)).unwrap();
    let edges: Vec<OccluderEdge> = block
        .edges()
        .map(|seg| OccluderEdge::new(seg.a, seg.b, 0))
        .collect();
    let map = scene_map(&edges);
    let predicted = map.predicted_boundaries();
    assert!(!predicted.is_empty(), "silhouette junctions must extrapolate");
    let e = predicted[0];
    let from = Vec2::new(0.1, 0.0);
    let aim = e.anchor + e.tangent * 0.2 - from;
    let toward = aim.y.atan2(aim.x);
    let batch = vec![
        CandidateState::new(from, toward, 1.2, 0), // imminent collision
        CandidateState::new(from, toward, 0.3, 0), // same ray, slower
        CandidateState::new(from, toward + std::f64::consts::PI, 1.2, 0), // retreating
    ];
    let ctx = PlannerContext::initial(Vec2::ZERO, Vec2::new(2.0, 0.0));
    let scores = score_batch(
        &batch,
        &ctx,
        &map,
        predicted,
        &CostWeights::default(),
        &CostParams::default(),
    );
    for s in &scores {
        assert!((0.0..=1.0).contains(&s.j_risk_h), "j_risk_h out of range");
    }
    assert_eq!(scores[0].j_risk_h, 1.0, "riskiest candidate must pin to 1");
    assert!(scores.iter().any(|s| s.j_risk_h == 0.0), "safest must pin to 0");

    // Spline invariants: endpoint interpolation, endpoint tangents within
    // 1e-6 rad, convex-hull containment via support functions.
    for _ in 0..300 {
        let p_cur = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let q_cur = RobotState::new(p_cur.x, p_cur.y, rng.gen_range(0.0..TAU), rng.gen_range(0.1..1.2));
        let p_s = p_cur + Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.3..2.0);
        let cand = CandidateState::new(p_s, rng.gen_range(0.0..TAU), rng.gen_range(0.1..1.2), 0);
        let t_map = rng.gen_range(0.05..2.0);
        let tr = TimedTrajectory::plan(&q_cur, &cand, 1.2, 1.2, t_map, 50);

        assert!((tr.start() - p_cur).norm() <= 1e-9, "start endpoint drifts");
        assert!((tr.end() - p_s).norm() <= 1e-9, "end endpoint drifts");

        let wp = tr.control_points();
        let u = 1e-7;
        let head = eval_spline(wp, u) - eval_spline(wp, 0.0);
        let tail = eval_spline(wp, 1.0) - eval_spline(wp, 1.0 - u);
        assert!(angle_between(head, q_cur.vel()) <= 1e-6, "entry tangent off");
        assert!(angle_between(tail, cand.velocity()) <= 1e-6, "exit tangent off");

        for k in 0..16 {
            let d = Vec2::from_angle(TAU * k as f64 / 16.0);
            let hull = wp.iter().map(|w| d.dot(*w)).fold(f64::NEG_INFINITY, f64::max);
            let on_curve = tr
                .samples()
                .iter()
                .map(|(_, p)| d.dot(*p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(on_curve <= hull + 1e-9, "curve escapes its control hull");
        }

        assert_eq!(
            tr.duration(),
            assign_duration(wp, 1.2, 1.2, t_map),
            "duration must follow the max rule"
        );
    }

    // Duration substitution: a 3 m control polygon at 1.2 m/s with no
    // safety margin travels for 2.5 s unless the map interval is longer.
    let straight = [
        Vec2::ZERO,
        Vec2::new(1.0, 0.0),
        Vec2::new(2.0, 0.0),
        Vec2::new(3.0, 0.0),
    ];
    assert!((assign_duration(&straight, 1.2, 1.0, 0.0) - 2.5).abs() <= 1e-12);
    assert!((assign_duration(&straight, 1.2, 1.0, 2.0) - 2.5).abs() <= 1e-12);
    assert_eq!(assign_duration(&straight, 1.2, 1.0, 9.0), 9.0, "map time must win");

    // Rescaling all three weights by a common factor leaves every argmin
    // unchanged. Powers of two scale totals exactly, so even ties are
    // preserved bit for bit.
    let scenes: Vec<LocalMap> = (0..3).map(|_| scene_map(&random_scene(&mut rng))).collect();
    let params = CostParams::default();
    for b in 0..300 {
        let map = &scenes[b % scenes.len()];
        let n = rng.gen_range(4..16);
        let batch = random_batch(&mut rng, map, n);
        let ctx = random_context(&mut rng);
        let base = builtin_strategies()[b % 3].weights();
        let (winner, _) =
            select_intermediate_state(&batch, &ctx, map, map.predicted_boundaries(), &base, &params)
                .expect("non-empty");
        for c in [0.25, 4.0] {
            let scaled = CostWeights {
                w_p: base.w_p * c,
                w_r: base.w_r * c,
                w_v: base.w_v * c,
            };
            let (w2, _) = select_intermediate_state(
                &batch,
                &ctx,
                map,
                map.predicted_boundaries(),
                &scaled,
                &params,
            )
            .expect("non-empty");
            assert_eq!(
                state_key(&winner),
                state_key(&w2),
                "batch {b}: argmin moved under weight rescaling ×{c}"
            );
        }
    }

    report(
        6,
        "numerical properties",
        true,
        "reflection, risk endpoints, spline invariants, duration rule, and weight \
         rescaling all hold",
    );
}

// ---------------------------------------------------------------------------
// Criterion 7 — bit-identical reruns.

#[test]
fn criterion_7_determinism() {
    // One trial, rerun from scratch: record and trajectory must match in
    // every bit, and so must the rendered trajectory CSV.
    let world = World::load(ws_path("worlds/corridor.world")).expect("world loads");
    let strategy = strategy_by_label(HARNESS).expect("builtin");
    let id = trial_id(HARNESS, 0.2, 0);
    let a = run_trial(&world, &strategy, 0.2, 60.0, 100, id.clone(), false).expect("trial");
    let b = run_trial(&world, &strategy, 0.2, 60.0, 100, id, false).expect("trial");
    assert_eq!(a.record, b.record, "records differ across reruns");
    assert_eq!(a.trajectory.len(), b.trajectory.len());
    let same_samples = a
        .trajectory
        .iter()
        .zip(&b.trajectory)
        .all(|(x, y)| x.0.to_bits() == y.0.to_bits() && x.1 == y.1);
    assert!(same_samples, "trajectories differ across reruns");
    let csv_a = render_trajectory_csv(&a.trajectory);
    let csv_b = render_trajectory_csv(&b.trajectory);
    assert_eq!(csv_a, csv_b, "trajectory CSV differs across reruns");

    // The entire 300-episode sweep, rerun against the shared one: the
    // parallel schedule must not leak into any record.
    let sweep = corridor_sweep();
    let _gate = TIMING_GATE.lock().unwrap();
    let world = World::load(&sweep.spec.world).expect("world loads");
    let fresh: Vec<TrialRecord> = run_trials(&sweep.spec, &world, false)
        .expect("rerun sweep")
        .into_iter()
        .map(|o| o.record)
        .collect();
    assert_eq!(fresh, sweep.records, "sweep records differ across reruns");

    let detail = format!(
        "single trial and full {}-record sweep reproduce bit-identically",
        fresh.len()
    );
    report(7, "determinism", true, &detail);
}
