//! Static SVG plots: overlaid trajectories per strategy and the four
//! mean/STD summary panels. Hand-rolled — the drawings are simple
//! polylines and axes, not worth a plotting dependency.

use std::fmt::Write as _;

use ricochet_core::{Vec2, World};

use crate::records::TrialRecord;
use crate::stats::summarize;
use crate::sweep::{HARNESS, HIGH_RISK, LOW_RISK};

fn strategy_color(label: &str) -> &'static str {
    match label {
        HARNESS => "#c0392b",
        HIGH_RISK => "#e67e22",
        LOW_RISK => "#2980b9",
        _ => "#7f8c8d",
    }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    min: Vec2,
    max: Vec2,
}

impl Frame {
    /// Maps data coordinates into the SVG viewport (y axis flipped).
    fn map(&self, p: Vec2) -> (f64, f64) {
        let sx = self.w / (self.max.x - self.min.x);
        let sy = self.h / (self.max.y - self.min.y);
        (
            self.x0 + (p.x - self.min.x) * sx,
            self.y0 + self.h - (p.y - self.min.y) * sy,
        )
    }

    fn polyline(&self, pts: impl Iterator<Item = Vec2>, style: &str) -> String {
        let coords: Vec<String> = pts
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{},{}", fmt2(x), fmt2(y))
            })
            .collect();
        format!("<polyline points=\"{}\" {} fill=\"none\"/>\n", coords.join(" "), style)
    }
}

/// World outline, obstacles, start/goal markers, and every trajectory of
/// one strategy overlaid.
pub fn svg_trajectories(world: &World, label: &str, runs: &[&[(f64, Vec2)]]) -> String {
    let (bmin, bmax) = world.bounds().bounding_box();
    let margin = 0.05 * (bmax - bmin).norm();
    let frame = Frame {
        x0: 40.0,
        y0: 30.0,
        w: 520.0,
        h: 520.0 * (bmax.y - bmin.y) / (bmax.x - bmin.x),
        min: bmin - Vec2::new(margin, margin),
        max: bmax + Vec2::new(margin, margin),
    };
    let mut svg = String::new();
    let total_h = frame.y0 + frame.h + 30.0;
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"{}\" viewBox=\"0 0 600 {}\">\n",
        fmt2(total_h),
        fmt2(total_h)
    );
    let _ = write!(
        svg,
        "<text x=\"40\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{} — {} runs on `{}`</text>\n",
        label,
        runs.len(),
        world.name()
    );

    let closed = |poly: &ricochet_core::Polygon| {
        poly.vertices()
            .iter()
            .copied()
            .chain(std::iter::once(poly.vertices()[0]))
            .collect::<Vec<_>>()
    };
    svg.push_str(&frame.polyline(
        closed(world.bounds()).into_iter(),
        "stroke=\"#2c3e50\" stroke-width=\"2\"",
    ));
    for ob in world.obstacles() {
        let pts: Vec<String> = ob
            .vertices()
            .iter()
            .map(|&p| {
                let (x, y) = frame.map(p);
                format!("{},{}", fmt2(x), fmt2(y))
            })
            .collect();
        let _ = write!(
            svg,
            "<polygon points=\"{}\" fill=\"#bdc3c7\" stroke=\"#2c3e50\"/>\n",
            pts.join(" ")
        );
    }
    let color = strategy_color(label);
    for run in runs {
        svg.push_str(&frame.polyline(
            run.iter().map(|&(_, p)| p),
            &format!("stroke=\"{color}\" stroke-width=\"1\" stroke-opacity=\"0.45\""),
        ));
    }
    for (p, fill, tag) in [(world.start(), "#27ae60", "S"), (world.goal(), "#8e44ad", "G")] {
        let (x, y) = frame.map(p);
        let _ = write!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt2(x),
            fmt2(y),
            fill,
            fmt2(x + 8.0),
            fmt2(y + 4.0),
            tag
        );
    }
    svg.push_str("</svg>\n");
    svg
}

struct Panel<'a> {
    title: &'a str,
    /// (strategy, per-t_map points) series.
    series: Vec<(&'a str, Vec<Vec2>)>,
}

/// Four panels — mean and STD of arrival time and path length against the
/// map time — one curve per strategy.
pub fn svg_summary_panels(records: &[TrialRecord]) -> String {
    let cells = summarize(records);
    let mut strategies: Vec<&str> = Vec::new();
    for c in &cells {
        if !strategies.contains(&c.strategy.as_str()) {
            strategies.push(&c.strategy);
        }
    }
    let series_of = |pick: fn(&crate::stats::CellSummary) -> f64| {
        strategies
            .iter()
            .map(|s| {
                let pts: Vec<Vec2> = cells
                    .iter()
                    .filter(|c| c.strategy == *s)
                    .map(|c| Vec2::new(c.t_map, pick(c)))
                    .collect();
                (*s, pts)
            })
            .collect::<Vec<_>>()
    };
    let panels = [
        Panel { title: "arrival time mean (s)", series: series_of(|c| c.arrival_mean) },
        Panel { title: "arrival time STD (s)", series: series_of(|c| c.arrival_std) },
        Panel { title: "path length mean (m)", series: series_of(|c| c.path_mean) },
        Panel { title: "path length STD (m)", series: series_of(|c| c.path_std) },
    ];

    let (pw, ph, gap) = (330.0, 240.0, 30.0);
    let total_w = 2.0 * pw + 3.0 * gap;
    let total_h = 2.0 * ph + 3.0 * gap + 20.0;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        total_w, total_h, total_w, total_h
    );
    for (i, panel) in panels.iter().enumerate() {
        let px = gap + (i % 2) as f64 * (pw + gap);
        let py = gap + (i / 2) as f64 * (ph + gap);
        draw_panel(&mut svg, panel, px, py, pw, ph);
    }
    // Legend along the bottom edge.
    let mut lx = gap;
    let ly = total_h - 12.0;
    for s in &strategies {
        let color = strategy_color(s);
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"4\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt2(lx),
            fmt2(ly - 4.0),
            color,
            fmt2(lx + 18.0),
            fmt2(ly),
            s
        );
        lx += 120.0;
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_panel(svg: &mut String, panel: &Panel, px: f64, py: f64, pw: f64, ph: f64) {
    let pts: Vec<Vec2> = panel.series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if pts.is_empty() {
        return;
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (0.0f64, f64::NEG_INFINITY);
    for p in &pts {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    if xmax - xmin < 1e-12 {
        xmin -= 0.1;
        xmax += 0.1;
    }
    ymax += 0.1 * (ymax - ymin).max(1e-9);
    let frame = Frame {
        x0: px + 40.0,
        y0: py + 20.0,
        w: pw - 50.0,
        h: ph - 50.0,
        min: Vec2::new(xmin, ymin),
        max: Vec2::new(xmax, ymax),
    };
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        fmt2(px + 40.0),
        fmt2(py + 14.0),
        panel.title
    );
    // Axes.
    let (ox, oy) = frame.map(Vec2::new(xmin, ymin));
    let (tx, _) = frame.map(Vec2::new(xmax, ymin));
    let (_, ty) = frame.map(Vec2::new(xmin, ymax));
    let _ = write!(
        svg,
        "<path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"#34495e\" fill=\"none\"/>\n",
        fmt2(ox), fmt2(oy), fmt2(tx), fmt2(oy), fmt2(ox), fmt2(oy), fmt2(ox), fmt2(ty)
    );
    // Ticks: the x grid values themselves, three y ticks.
    let mut xticks: Vec<f64> = pts.iter().map(|p| p.x).collect();
    xticks.sort_by(f64::total_cmp);
    xticks.dedup();
    for &x in &xticks {
        let (cx, cy) = frame.map(Vec2::new(x, ymin));
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#34495e\"/><text x=\"{0}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{4}</text>\n",
            fmt2(cx),
            fmt2(cy),
            fmt2(cy + 4.0),
            fmt2(cy + 16.0),
            x
        );
    }
    for k in 0..=2 {
        let y = ymin + (ymax - ymin) * k as f64 / 2.0;
        let (cx, cy) = frame.map(Vec2::new(xmin, y));
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#34495e\"/><text x=\"{3}\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{5:.2}</text>\n",
            fmt2(cx - 4.0),
            fmt2(cy),
            fmt2(cx),
            fmt2(cx - 6.0),
            fmt2(cy + 3.0),
            y
        );
    }
    for (label, series) in &panel.series {
        let color = strategy_color(label);
        svg.push_str(&frame.polyline(
            series.iter().copied(),
            &format!("stroke=\"{color}\" stroke-width=\"1.5\""),
        ));
        for p in series {
            let (cx, cy) = frame.map(*p);
            let _ = write!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>\n",
                fmt2(cx),
                fmt2(cy),
                color
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ricochet_core::Polygon;

    fn record(strategy: &str, t_map: f64, arrival: f64) -> TrialRecord {
        TrialRecord {
            trial_id: format!("{strategy}-{t_map}"),
            strategy: strategy.into(),
            t_map,
            arrival_time: arrival,
            path_length: arrival / 2.0,
            n_collisions: 0,
            n_intentional: 0,
            success: true,
            seed: 0,
        }
    }

    #[test]
    fn summary_panels_contain_every_strategy_series() {
        let mut records = Vec::new();
        for (label, base) in [(HARNESS, 8.0), (HIGH_RISK, 9.0), (LOW_RISK, 10.0)] {
            for t_map in [0.2, 0.4] {
                records.push(record(label, t_map, base + t_map));
            }
        }
        let svg = svg_summary_panels(&records);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        for label in [HARNESS, HIGH_RISK, LOW_RISK] {
            assert!(svg.contains(label), "legend lists {label}");
            assert!(svg.contains(strategy_color(label)));
        }
        // 4 panels × 3 strategies = 12 curves plus the world-free polylines.
        assert!(svg.matches("<polyline").count() >= 12);
        // Deterministic output.
        assert_eq!(svg, svg_summary_panels(&records));
    }

    #[test]
    fn trajectory_plot_draws_world_and_runs() {
        let world = World::new(
            "w".into(),
            Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0)).unwrap(),
            vec![Polygon::rectangle(Vec2::new(0.8, 0.8), Vec2::new(1.2, 1.2)).unwrap()],
            Vec2::new(0.2, 0.2),
            Vec2::new(1.8, 1.8),
            0.05,
        )
        .unwrap();
        let run = vec![(0.0, Vec2::new(0.2, 0.2)), (1.0, Vec2::new(0.5, 0.9))];
        let svg = svg_trajectories(&world, HARNESS, &[&run]);
        assert!(svg.contains("<polygon"), "obstacle drawn");
        assert!(svg.matches("<polyline").count() >= 2, "bounds + run");
        assert!(svg.contains(strategy_color(HARNESS)));
    }
}
