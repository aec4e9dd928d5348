//! Temporary experiment: compares position-dominance predicate variants for
//! soundness (does pruning ever discard the full-set argmin?) and
//! aggressiveness (how much does it remove?) over randomized convex scenes.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ricochet_core::costs::{score_batch, CostBreakdown, CostParams, CostWeights, PlannerContext};
use ricochet_core::geometry::{segment_segment_intersection, OccluderEdge};
use ricochet_core::localmap::{build_local_map, narrow_region_angle, LocalMap};
use ricochet_core::sampling::{prune_by_velocity, sample_candidates, CandidateState, SamplingParams};
use ricochet_core::{Polygon, Segment, Vec2};

fn random_scene(rng: &mut ChaCha8Rng) -> Vec<OccluderEdge> {
    let n_obs = rng.gen_range(2..=4usize);
    let mut edges = Vec::new();
    for source in 0..n_obs {
        let center = Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.35..0.85);
        let radius = rng.gen_range(0.12..0.28);
        let k = rng.gen_range(3..=6usize);
        let vertices = loop {
            let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
            angles.sort_by(f64::total_cmp);
            let wrap = TAU - (angles[k - 1] - angles[0]);
            let min_gap = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min);
            if min_gap > 0.35 {
                break angles
                    .iter()
                    .map(|a| center + Vec2::from_angle(*a) * radius)
                    .collect::<Vec<_>>();
            }
        };
        let poly = Polygon::new(vertices).expect("convex");
        edges.extend(poly.edges().map(|seg| OccluderEdge::new(seg.a, seg.b, source)));
    }
    edges
}

fn key(c: &CandidateState) -> (u64, u64, u64, u64, usize) {
    (
        c.pos.x.to_bits(),
        c.pos.y.to_bits(),
        c.vel_dir.to_bits(),
        c.vel_mag.to_bits(),
        c.frontier_id,
    )
}

fn segment_in_free_space(a: Vec2, b: Vec2, free: &Polygon) -> bool {
    let seg = Segment::new(a, b);
    if !free.contains(seg.midpoint()) {
        return false;
    }
    let len = seg.length();
    if len <= 1e-9 {
        return true;
    }
    let t_eps = (1e-7 / len).min(0.45);
    for edge in free.edges() {
        if let Some(p) = segment_segment_intersection(&seg, &edge) {
            let t = (p - a).dot(seg.direction()) / (len * len);
            if t > t_eps && t < 1.0 - t_eps {
                return false;
            }
        }
    }
    true
}

#[derive(Clone)]
struct PosInfo {
    fid: usize,
    p: Vec2,
    goal_dist: f64,
    path: f64,   // ‖robot→p‖ + ‖p→goal‖ with robot at the origin
    theta: f64,  // sight angle
    movers: bool, // frontier offers nonzero magnitudes
}

/// Variant pruning at position level; returns retained flag per position.
fn prune_positions(positions: &[PosInfo], free: &Polygon, radius: f64, variant: u32) -> Vec<bool> {
    let dominated: Vec<bool> = positions
        .iter()
        .map(|c| {
            positions.iter().any(|d| {
                if d.fid == c.fid || (d.p - c.p).norm() >= radius {
                    return false;
                }
                let rule = match variant {
                    0 => d.goal_dist < c.goal_dist,
                    1 => d.path < c.path,
                    2 => d.path < c.path && d.theta >= c.theta,
                    3 => d.path < c.path && d.theta >= c.theta && d.movers,
                    4 => {
                        d.path < c.path
                            && d.theta >= c.theta
                            && d.movers
                            && d.goal_dist < c.goal_dist
                    }
                    _ => unreachable!(),
                };
                rule && segment_in_free_space(c.p, d.p, free)
            })
        })
        .collect();
    let mut retained: Vec<bool> = dominated.iter().map(|d| !d).collect();

    // Exploration retention, as in the shipped rule.
    let mut fids: Vec<usize> = positions.iter().map(|p| p.fid).collect();
    fids.sort_unstable();
    fids.dedup();
    for fid in fids {
        let emptied = positions
            .iter()
            .zip(&retained)
            .filter(|(p, _)| p.fid == fid)
            .all(|(_, r)| !r);
        if !emptied {
            continue;
        }
        let nearest = positions
            .iter()
            .zip(&retained)
            .filter(|(p, _)| p.fid == fid)
            .map(|(p, _)| {
                positions
                    .iter()
                    .zip(&retained)
                    .filter(|(_, r)| **r)
                    .map(|(q, _)| (q.p - p.p).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        if nearest > radius {
            for (p, r) in positions.iter().zip(retained.iter_mut()) {
                if p.fid == fid {
                    *r = true;
                }
            }
        }
    }
    retained
}

fn argmin(scores: &[CostBreakdown], order: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for i in order {
        best = match best {
            None => Some(i),
            Some(b) => {
                if scores[i].total < scores[b].total
                    || (scores[i].total == scores[b].total && scores[i].j_risk < scores[b].j_risk)
                {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.unwrap()
}

struct Tally {
    violations: usize,
    pos_violations: usize,
    max_gap: f64,
    multi_no_removal: usize,
    sum_reduction: f64,
    n: usize,
}

fn main() {
    const N_SCENES: usize = 400;
    let weights_sets = [
        ("harness", CostWeights { w_p: 1.0, w_r: 0.1, w_v: 4.0 }),
        ("high_risk", CostWeights { w_p: 1.0, w_r: 0.1, w_v: 0.0 }),
        ("low_risk", CostWeights { w_p: 1.0, w_r: 100.0, w_v: 0.0 }),
    ];
    let params = CostParams::default();
    let sampling = SamplingParams::default();

    // tallies[variant][weights]
    let mut tallies: Vec<Vec<Tally>> = (0..5)
        .map(|_| {
            (0..weights_sets.len())
                .map(|_| Tally {
                    violations: 0,
                    pos_violations: 0,
                    max_gap: 0.0,
                    multi_no_removal: 0,
                    sum_reduction: 0.0,
                    n: 0,
                })
                .collect()
        })
        .collect();
    let mut vel_only_violations = vec![0usize; weights_sets.len()];

    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut scenes = 0usize;
    let mut multi = 0usize;
    while scenes < N_SCENES {
        let edges = random_scene(&mut rng);
        let goal = Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(1.5..3.0);
        let map: LocalMap = build_local_map(Vec2::ZERO, 2.0, &edges).expect("map");
        let full = sample_candidates(&map, &sampling);
        if full.is_empty() {
            continue;
        }
        scenes += 1;
        let is_multi = map.frontiers().len() >= 2;
        multi += usize::from(is_multi);

        // Position table shared by all variants.
        let polyline_lengths: Vec<f64> = map
            .frontiers()
            .iter()
            .map(|f| f.length())
            .chain(map.window_arcs().iter().map(|a| {
                a.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
            }))
            .collect();
        let mut positions: Vec<PosInfo> = Vec::new();
        let mut pos_of: Vec<usize> = Vec::with_capacity(full.len());
        for c in &full {
            let found = positions
                .iter()
                .position(|q| q.fid == c.frontier_id && q.p == c.pos);
            let idx = found.unwrap_or_else(|| {
                positions.push(PosInfo {
                    fid: c.frontier_id,
                    p: c.pos,
                    goal_dist: (c.pos - goal).norm(),
                    path: c.pos.norm() + (goal - c.pos).norm(),
                    theta: narrow_region_angle(c.pos, &map),
                    movers: polyline_lengths[c.frontier_id] >= sampling.delta_l,
                });
                positions.len() - 1
            });
            pos_of.push(idx);
        }

        let ctx = PlannerContext::initial(Vec2::ZERO, goal);
        for (wi, (_, weights)) in weights_sets.iter().enumerate() {
            let scores = score_batch(&full, &ctx, &map, map.predicted_boundaries(), weights, &params);
            let best_full = argmin(&scores, 0..scores.len());

            // Velocity-only check.
            let vel_only = prune_by_velocity(full.clone(), &map);
            let mut index_of: HashMap<_, usize> = HashMap::new();
            for (i, c) in full.iter().enumerate() {
                index_of.entry(key(c)).or_insert(i);
            }
            let ids: Vec<usize> = vel_only.iter().map(|c| index_of[&key(c)]).collect();
            let bv = argmin(&scores, ids.iter().copied());
            if scores[bv].total - scores[best_full].total > 1e-9 {
                vel_only_violations[wi] += 1;
            }

            for variant in 0..5u32 {
                let retained = prune_positions(&positions, map.free_space(), 1.0, variant);
                let after_pos: Vec<CandidateState> = full
                    .iter()
                    .zip(&pos_of)
                    .filter(|(_, idx)| retained[**idx])
                    .map(|(c, _)| c.clone())
                    .collect();
                // Position step alone: does it preserve the argmin?
                let pos_ids: Vec<usize> = after_pos.iter().map(|c| index_of[&key(c)]).collect();
                let bpos = argmin(&scores, pos_ids.iter().copied());
                let pos_gap = scores[bpos].total - scores[best_full].total;

                let pruned = prune_by_velocity(after_pos, &map);
                let removed_any = pruned.len() < full.len();
                let ids: Vec<usize> = pruned.iter().map(|c| index_of[&key(c)]).collect();
                let bp = argmin(&scores, ids.iter().copied());
                let gap = scores[bp].total - scores[best_full].total;
                let t = &mut tallies[variant as usize][wi];
                t.n += 1;
                t.sum_reduction += pruned.len() as f64 / full.len() as f64;
                if gap > 1e-9 {
                    t.violations += 1;
                }
                if pos_gap > 1e-9 {
                    t.max_gap = t.max_gap.max(pos_gap);
                    t.pos_violations += 1;
                    if variant == 2 && wi == 0 {
                        let w = &full[best_full];
                        let s = &full[bpos];
                        let wb = &scores[best_full];
                        let sb = &scores[bpos];
                        let widx = pos_of[best_full];
                        let dom = positions
                            .iter()
                            .filter(|d| {
                                d.fid != positions[widx].fid
                                    && (d.p - positions[widx].p).norm() < 1.0
                                    && d.path < positions[widx].path
                                    && d.theta >= positions[widx].theta
                                    && segment_in_free_space(positions[widx].p, d.p, map.free_space())
                            })
                            .min_by(|a, b| a.path.total_cmp(&b.path));
                        println!(
                            "scene {scenes} gap {pos_gap:.3e}: winner fid {} pos ({:.3},{:.3}) dir {:.2} mag {:.2} \
                             [jp {:.4} jrh {:.4} jrg {:.4} jv {:.4}]",
                            w.frontier_id, w.pos.x, w.pos.y, w.vel_dir, w.vel_mag,
                            wb.j_pos, wb.j_risk_h, wb.j_risk_g, wb.j_vel,
                        );
                        if let Some(d) = dom {
                            println!(
                                "    dominator fid {} pos ({:.3},{:.3}) path {:.3} vs {:.3} theta {:.3} vs {:.3} movers {}",
                                d.fid, d.p.x, d.p.y, d.path, positions[widx].path, d.theta,
                                positions[widx].theta, d.movers,
                            );
                        }
                        println!(
                            "    best survivor fid {} pos ({:.3},{:.3}) dir {:.2} mag {:.2} \
                             [jp {:.4} jrh {:.4} jrg {:.4} jv {:.4}]",
                            s.frontier_id, s.pos.x, s.pos.y, s.vel_dir, s.vel_mag,
                            sb.j_pos, sb.j_risk_h, sb.j_risk_g, sb.j_vel,
                        );
                    }
                }
                if is_multi && !removed_any {
                    t.multi_no_removal += 1;
                }
            }
        }
    }

    println!("{scenes} scenes, {multi} with >=2 frontiers\n");
    for (wi, (label, _)) in weights_sets.iter().enumerate() {
        println!("== weights {label} (velocity-only violations: {}) ==", vel_only_violations[wi]);
        for variant in 0..5usize {
            let t = &tallies[variant][wi];
            println!(
                "  V{variant}: pos-only violations {:3} (max gap {:9.3e})  composed {:3}  \
                 multi-without-removal {:3}  mean survivor fraction {:.3}",
                t.pos_violations, t.max_gap, t.violations, t.multi_no_removal,
                t.sum_reduction / t.n as f64
            );
        }
    }
}
