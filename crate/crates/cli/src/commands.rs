use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use gravicaustic_core::caustics::{Branch, EnvelopePair, FociCurve, LevelMatch, Singularity};
use gravicaustic_core::dynamics::{simulate, Termination, Trajectory};
use gravicaustic_core::mirror::Mirror;
use gravicaustic_core::par::{self, Execution};
use gravicaustic_core::verify::{
    check_directrix, check_foci_circle, check_foci_slope, matched_level, run_suite, CheckResult, Scenario,
    CHECK_NAMES,
};
use gravicaustic_core::Vec2;
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, KRange, Resolved, RunConfig};
use crate::output::{write_json, Csv, Svg};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_ABNORMAL: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

const ARC_SAMPLES: usize = 64;
const CURVE_SAMPLES: usize = 400;

fn tolerance(name: &str) -> f64 {
    CHECK_NAMES.iter().find(|c| c.0 == name).map_or(0.0, |c| c.1)
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Mirror polyline over `[lo, hi]`.
fn mirror_points(m: &Mirror, lo: f64, hi: f64) -> Vec<Option<Vec2>> {
    (0..CURVE_SAMPLES)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (CURVE_SAMPLES - 1) as f64;
            m.height(x).ok().map(|y| Vec2::new(x, y))
        })
        .collect()
}

/// Drops points further than one box size outside `[lo, hi]`, so poles do not
/// swamp the view.
fn clipped(points: impl IntoIterator<Item = Option<Vec2>>, lo: Vec2, hi: Vec2) -> Vec<Option<Vec2>> {
    let pad = Vec2::new((hi.x - lo.x).max(1.0), (hi.y - lo.y).max(1.0));
    points
        .into_iter()
        .map(|p| {
            p.filter(|p| {
                p.x >= lo.x - pad.x && p.x <= hi.x + pad.x && p.y >= lo.y - pad.y && p.y <= hi.y + pad.y
            })
        })
        .collect()
}

fn grid_points(curve: &[(f64, Result<Vec2, String>)]) -> Vec<Option<Vec2>> {
    curve.iter().map(|(_, p)| p.as_ref().ok().copied()).collect()
}

#[derive(Serialize)]
struct CheckSummary {
    max_residual: f64,
    tolerance: f64,
    pass: bool,
}

impl From<CheckResult> for CheckSummary {
    fn from(c: CheckResult) -> Self {
        CheckSummary { max_residual: c.max_residual, tolerance: c.tolerance, pass: c.pass }
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let initial = r.require_initial()?;
    prepare(&r.out_dir)?;

    let t = match simulate(initial, &r.mirror, r.gravity, r.bounces) {
        Ok(t) => t,
        Err(e) => {
            if r.wants(Format::Json) {
                let summary = json!({ "termination": { "kind": "error", "reason": e.to_string() } });
                write_json(&r.out_dir.join("summary.json"), &summary)?;
            }
            eprintln!("simulation failed: {e}");
            return Ok(EXIT_ABNORMAL);
        }
    };

    if r.wants(Format::Csv) {
        let mut csv = Csv::new(&["bounce_index", "t_flight", "x", "y", "vx", "vy", "focus_x", "focus_y", "alpha"]);
        for (i, b) in t.bounces.iter().enumerate() {
            let f = b.focus_out.point;
            csv.row(&[
                Some((i + 1) as f64),
                Some(b.t_flight),
                Some(b.impact.x),
                Some(b.impact.y),
                Some(b.v_out.x),
                Some(b.v_out.y),
                Some(f.x),
                Some(f.y),
                Some(b.alpha),
            ]);
        }
        csv.write(&r.out_dir.join("trajectory.csv"))?;
    }

    let matched = matched_level(&t, &r.mirror);
    let level = r.level.or(matched.map(|m| m.level));
    if r.wants(Format::Json) {
        let summary = json!({
            "termination": t.termination,
            "bounces": t.bounces.len(),
            "H": t.directrix(),
            "L": level,
            "matched": matched,
            "residuals": {
                "directrix": CheckSummary::from(check_directrix(&t, tolerance("directrix"))),
                "foci_circle": CheckSummary::from(check_foci_circle(&t, &r.mirror, tolerance("foci_circle"))),
                "foci_slope": CheckSummary::from(check_foci_slope(&t, tolerance("foci_slope"))),
            },
        });
        write_json(&r.out_dir.join("summary.json"), &summary)?;
    }
    if r.wants(Format::Svg) {
        trajectory_svg(&r, &t, level)?.write(&r.out_dir.join("trajectory.svg"))?;
    }

    if let Termination::Stuck(reason) = &t.termination {
        eprintln!("simulation stopped after {} bounces: {reason}", t.bounces.len());
        return Ok(EXIT_ABNORMAL);
    }
    Ok(EXIT_OK)
}

fn trajectory_svg(r: &Resolved, t: &Trajectory, level: Option<f64>) -> Result<Svg> {
    let mut svg = Svg::default();
    let mut arcs: Vec<Vec<Option<Vec2>>> = t
        .arcs()
        .iter()
        .map(|(seg, dt)| {
            (0..ARC_SAMPLES)
                .map(|j| Some(seg.position_at(dt * j as f64 / (ARC_SAMPLES - 1) as f64)))
                .collect()
        })
        .collect();
    if arcs.is_empty() {
        arcs.push(vec![Some(t.initial.pos)]);
    }
    // size the view on the orbit before adding anything that might run off
    let mut probe = Svg::default();
    for a in &arcs {
        probe.curve(a, "black", 1.0);
        if let Some(p) = a[0] {
            probe.dot(p, 1.0, "black");
        }
    }
    probe.dot(Vec2::new(t.initial.pos.x, t.directrix()), 1.0, "black");
    let (lo, hi) = probe.extents().context("empty trajectory")?;
    let (mlo, mhi) = r.mirror.domain();
    let span = (hi.x - lo.x).max(1.0);
    let mirror = mirror_points(&r.mirror, (lo.x - 0.25 * span).max(mlo), (hi.x + 0.25 * span).min(mhi));
    svg.curve(&clipped(mirror, lo, hi), "#444444", 2.0);

    if let Some(level) = level {
        let pair = EnvelopePair::new(FociCurve::new(r.mirror.clone(), level), t.directrix());
        let ks = gravicaustic_core::caustics::tan_grid(-1e3, 1e3, 2001);
        for (branch, colour) in [(Branch::Plus, "#2a9d2a"), (Branch::Minus, "#1f6fd1")] {
            let pts = ks.iter().map(|&k| pair.point(k, branch).ok());
            svg.curve(&clipped(pts, lo, hi), colour, 1.5);
        }
    }
    svg.hline(t.directrix(), "#999999");
    for a in &arcs {
        svg.curve(a, "#d12f1f", 0.6);
    }
    for b in &t.bounces {
        svg.dot(b.focus_out.point, 1.5, "#7a3fbf");
    }
    Ok(svg)
}

fn sample(ks: &[f64], f: impl Fn(f64) -> Result<Vec2, String> + Sync + Send) -> Vec<(f64, Result<Vec2, String>)> {
    par::map(Execution::default(), ks, |&k| {
        let p = f(k).and_then(|p| if p.is_finite() { Ok(p) } else { Err("non-finite".into()) });
        (k, p)
    })
}

fn singularities(curve: &[(f64, Result<Vec2, String>)]) -> Vec<Singularity> {
    curve
        .iter()
        .filter_map(|(k, p)| p.as_ref().err().map(|e| Singularity { k: *k, reason: e.clone() }))
        .collect()
}

fn bounds(points: &[Option<Vec2>]) -> Option<(Vec2, Vec2)> {
    let mut probe = Svg::default();
    for p in points.iter().flatten() {
        probe.dot(*p, 1.0, "black");
    }
    probe.extents()
}

pub fn cmd_foci(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let (level, matched) = r.level()?;
    prepare(&r.out_dir)?;
    let foci = FociCurve::new(r.mirror.clone(), level);
    let curve = sample(&r.ks(), |k| foci.point(k).map_err(|e| e.to_string()));

    if r.wants(Format::Csv) {
        let mut csv = Csv::new(&["k", "x", "y"]);
        for (k, p) in &curve {
            let p = p.as_ref().ok();
            csv.row(&[Some(*k), p.map(|p| p.x), p.map(|p| p.y)]);
        }
        csv.write(&r.out_dir.join("foci.csv"))?;
    }
    if r.wants(Format::Json) {
        write_json(&r.out_dir.join("summary.json"), &curve_summary(&r.k_range, level, matched, None, &curve, None))?;
    }
    if r.wants(Format::Svg) {
        let pts = grid_points(&curve);
        let mut svg = Svg::default();
        if let Some((lo, hi)) = bounds(&pts) {
            let (mlo, mhi) = r.mirror.domain();
            svg.curve(&clipped(mirror_points(&r.mirror, lo.x.max(mlo), hi.x.min(mhi)), lo, hi), "#444444", 2.0);
            // the construction circles about (k, f(k)) with radius L - f(k)
            let sparse = 9.min(curve.len());
            for i in 0..sparse {
                let k = curve[i * (curve.len() - 1) / (sparse - 1).max(1)].0;
                if let Ok(f) = r.mirror.height(k) {
                    svg.ring(Vec2::new(k, f), (level - f).abs(), "#bbbbbb");
                }
            }
        }
        svg.curve(&pts, "#d12f1f", 1.5);
        svg.write(&r.out_dir.join("foci.svg"))?;
    }
    Ok(EXIT_OK)
}

fn curve_summary(
    k_range: &KRange,
    level: f64,
    matched: Option<LevelMatch>,
    directrix: Option<f64>,
    first: &[(f64, Result<Vec2, String>)],
    second: Option<&[(f64, Result<Vec2, String>)]>,
) -> serde_json::Value {
    let mut v = json!({
        "L": level,
        "matched": matched,
        "k_range": k_range,
    });
    match second {
        None => v["singularities"] = json!(singularities(first)),
        Some(minus) => {
            v["H"] = json!(directrix);
            v["singularities"] = json!({ "plus": singularities(first), "minus": singularities(minus) });
        }
    }
    v
}

pub fn cmd_envelope(cfg: &RunConfig) -> Result<u8> {
    let r = cfg.resolve()?;
    let (level, matched) = r.level()?;
    let h = r.directrix()?;
    prepare(&r.out_dir)?;
    let foci = FociCurve::new(r.mirror.clone(), level);
    let pair = EnvelopePair::new(foci.clone(), h);
    let ks = r.ks();
    let plus = sample(&ks, |k| pair.point(k, Branch::Plus).map_err(|e| e.to_string()));
    let minus = sample(&ks, |k| pair.point(k, Branch::Minus).map_err(|e| e.to_string()));

    if r.wants(Format::Csv) {
        let mut csv = Csv::new(&["k", "x_plus", "y_plus", "x_minus", "y_minus"]);
        for ((k, p), (_, m)) in plus.iter().zip(&minus) {
            let (p, m) = (p.as_ref().ok(), m.as_ref().ok());
            csv.row(&[Some(*k), p.map(|p| p.x), p.map(|p| p.y), m.map(|m| m.x), m.map(|m| m.y)]);
        }
        csv.write(&r.out_dir.join("envelope.csv"))?;
    }
    if r.wants(Format::Json) {
        let summary = curve_summary(&r.k_range, level, matched, Some(h), &plus, Some(&minus));
        write_json(&r.out_dir.join("summary.json"), &summary)?;
    }
    if r.wants(Format::Svg) {
        let foci_pts = grid_points(&sample(&ks, |k| foci.point(k).map_err(|e| e.to_string())));
        let mut svg = Svg::default();
        // the view is sized on the foci, the directrix and the mirror below them;
        // envelope branches run off to infinity and are clipped
        if let Some((lo, hi)) = bounds(&foci_pts) {
            let (mlo, mhi) = r.mirror.domain();
            let mirror = mirror_points(&r.mirror, lo.x.max(mlo), hi.x.min(mhi));
            let floor = mirror.iter().flatten().map(|p| p.y).fold(lo.y, f64::min);
            let (lo, hi) = (Vec2::new(lo.x, floor), Vec2::new(hi.x, hi.y.max(h)));
            svg.curve(&clipped(mirror, lo, hi), "#444444", 2.0);
            svg.dashed(&clipped(foci_pts, lo, hi), "#d12f1f", 1.0);
            svg.curve(&clipped(grid_points(&plus), lo, hi), "#2a9d2a", 1.5);
            svg.curve(&clipped(grid_points(&minus), lo, hi), "#1f6fd1", 1.5);
        }
        svg.hline(h, "#999999");
        svg.write(&r.out_dir.join("envelope.svg"))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(path: &Path, out_dir: &Path) -> Result<u8> {
    let scenario = Scenario::load(path)?;
    let report = run_suite(&scenario, Execution::default())?;
    prepare(out_dir)?;
    write_json(&out_dir.join("report.json"), &report)?;
    for c in &report.checks {
        println!(
            "{} {:<14} max residual {:.3e} (tol {:e}){}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance,
            c.notice.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default()
        );
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepRun {
    Simulate,
    Foci,
    Envelope,
}

#[derive(Serialize)]
struct SweepEntry {
    value: f64,
    dir: String,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn cmd_sweep(base: &RunConfig, param: &str, values: &[f64], run: SweepRun) -> Result<u8> {
    // reject a bad parameter name before fanning out; anything else is per run
    base.clone().set(param, 0.0)?;
    let root = base.out_dir.clone().unwrap_or_else(|| "out".into());
    prepare(&root)?;
    let entries = par::map(Execution::default(), values, |&value| {
        let dir = format!("{param}_{value}");
        let mut cfg = base.clone();
        cfg.out_dir = Some(root.join(&dir));
        let result = cfg.set(param, value).and_then(|()| match run {
            SweepRun::Simulate => cmd_simulate(&cfg),
            SweepRun::Foci => cmd_foci(&cfg),
            SweepRun::Envelope => cmd_envelope(&cfg),
        });
        match result {
            Ok(code) => SweepEntry { value, dir, exit_code: code, error: None },
            Err(e) => SweepEntry { value, dir, exit_code: EXIT_CONFIG, error: Some(format!("{e:#}")) },
        }
    });
    write_json(&root.join("index.json"), &json!({ "param": param, "command": run, "runs": entries }))?;
    Ok(entries.iter().map(|e| e.exit_code).max().unwrap_or(EXIT_OK))
}
