//! Brute-force impact detection and the randomized agreement check. Nothing here
//! calls into the impact search it is checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CheckResult, Worst};
use crate::dynamics::{next_impact, FlightParabola, ImpactOptions, ImpactOutcome, State};
use crate::mirror::Mirror;
use crate::par::{self, Execution};
use crate::Vec2;

/// Default number of randomized scenarios.
pub const ORACLE_SCENARIOS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleHit {
    pub time: f64,
    pub point: Vec2,
}

/// Time scale `sqrt(2 (H - f(x0)) / g)` of a flight, or `None` when the launch
/// point is off the mirror.
pub fn time_scale(p: &FlightParabola, m: &Mirror) -> Option<f64> {
    let s = p.start;
    let energy_height = s.pos.y + 0.5 * (s.vel.x * s.vel.x + s.vel.y * s.vel.y) / p.gravity;
    let floor = m.height(s.pos.x).ok()?;
    let t = (2.0 * (energy_height - floor) / p.gravity).sqrt();
    (t > 0.0).then_some(t)
}

/// Steps `t` by `dt` until `y(t) - f(x(t))` changes sign, then bisects to 1e-12.
/// `None` when the flight leaves the mirror domain or passes `1e3` time scales.
pub fn oracle_next_impact(p: &FlightParabola, m: &Mirror, dt: f64) -> Option<OracleHit> {
    let horizon = 1e3 * time_scale(p, m)?;
    let (x0, y0) = (p.start.pos.x, p.start.pos.y);
    let (vx, vy, g) = (p.start.vel.x, p.start.vel.y, p.gravity);
    let at = |t: f64| (x0 + vx * t, y0 + vy * t - 0.5 * g * t * t);
    let gap = |t: f64| {
        let (x, y) = at(t);
        m.height(x).ok().map(|h| y - h)
    };

    let mut prev = 0.0;
    let mut g_prev = gap(prev)?;
    let mut i = 1u64;
    let (mut lo, mut hi) = loop {
        let t = i as f64 * dt;
        if t > horizon {
            return None;
        }
        let g_t = gap(t)?;
        if g_prev > 0.0 && g_t <= 0.0 {
            break (prev, t);
        }
        prev = t;
        g_prev = g_t;
        i += 1;
    };
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let time = 0.5 * (lo + hi);
    let (x, y) = at(time);
    Some(OracleHit { time, point: Vec2::new(x, y) })
}

/// Random mirror (parabolic, line or hyperbolic) and a launch state above it.
pub fn random_scenarios(seed: u64, count: usize) -> Vec<(Mirror, FlightParabola)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mirror = match rng.gen_range(0..3) {
                0 => Mirror::parabolic(rng.gen_range(0.25..2.0)).expect("positive focal length"),
                1 => Mirror::line(rng.gen_range(-1.2..1.2)).expect("angle in range"),
                _ => Mirror::hyperbolic(),
            };
            let x0 = rng.gen_range(-3.0..3.0);
            let y0 = mirror.height(x0).expect("default domain") + rng.gen_range(0.05..3.0);
            let speed = rng.gen_range(0.0..3.0);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let g = rng.gen_range(0.5..2.0);
            let start = State::new(Vec2::new(x0, y0), Vec2::new(speed * angle.cos(), speed * angle.sin()));
            (mirror, FlightParabola::new(start, g).expect("positive gravity"))
        })
        .collect()
}

/// Agreement of `next_impact` with the brute-force oracle (step `1e-3` time
/// scales) on `count` seeded scenarios. The residual is the larger of the time
/// and position differences.
pub fn check_oracle(seed: u64, count: usize, tol: f64, exec: Execution) -> CheckResult {
    let scenarios = random_scenarios(seed, count);
    let diffs = par::map(exec, &scenarios, |(m, p)| {
        let fast = next_impact(p, m, &ImpactOptions::default());
        let dt = time_scale(p, m).map_or(f64::NAN, |t| 1e-3 * t);
        let slow = oracle_next_impact(p, m, dt);
        match (fast, slow) {
            (Ok(ImpactOutcome::Hit(a)), Some(b)) => {
                (a.time - b.time).abs().max(a.point.distance(b.point))
            }
            (Ok(ImpactOutcome::Escaped), None) => 0.0,
            _ => f64::INFINITY,
        }
    });
    let mut result = CheckResult::new("oracle", tol);
    for (i, d) in diffs.into_iter().enumerate() {
        result.record(d, Worst { index: i, point: scenarios[i].1.start.pos });
    }
    result.notice = Some(format!("{count} scenarios, seed {seed:#x}"));
    result.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flight(x: f64, y: f64, vx: f64, vy: f64) -> FlightParabola {
        FlightParabola::new(State::new(Vec2::new(x, y), Vec2::new(vx, vy)), 1.0).unwrap()
    }

    #[test]
    fn reproduces_the_simple_impacts() {
        let flat = Mirror::parse("0").unwrap();
        let hit = oracle_next_impact(&flight(0.0, 1.0, 0.0, 0.0), &flat, 1e-6).unwrap();
        assert!((hit.time - 2f64.sqrt()).abs() < 1e-7);
        // launch just above the surface so the start is not itself a root
        let hit = oracle_next_impact(&flight(0.0, 1e-12, 1.0, 1.0), &flat, 1e-6).unwrap();
        assert!((hit.time - 2.0).abs() < 1e-7);
        let bowl = Mirror::parabolic(1.0).unwrap();
        let hit = oracle_next_impact(&flight(0.0, 2.0, 1.0, 0.0), &bowl, 1e-6).unwrap();
        assert!((hit.time - (8.0f64 / 3.0).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn escape_off_the_domain() {
        let m = Mirror::parse("0").unwrap().with_domain(-1.0, 1.0).unwrap();
        assert!(oracle_next_impact(&flight(0.0, 1.0, 5.0, 0.0), &m, 1e-4).is_none());
    }

    #[test]
    fn scenarios_are_seeded() {
        let a = random_scenarios(7, 5);
        let b = random_scenarios(7, 5);
        assert_eq!(a, b);
        assert_ne!(a, random_scenarios(8, 5));
        for (m, p) in &a {
            assert!(p.start.pos.y > m.height(p.start.pos.x).unwrap());
        }
    }
}
