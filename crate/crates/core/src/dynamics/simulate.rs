use serde::{Deserialize, Serialize};

use super::impact::SURFACE_EPS;
use super::{
    next_impact_after, reflect, DynamicsError, FlightParabola, Focus, ImpactOptions,
    ImpactOutcome, State,
};
use crate::mirror::Mirror;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub impact: ImpactOptions,
    /// Impacts with `v_in . n` in `(-grazing_speed, 0]` are treated as tangential
    /// contacts and the flight continues through them.
    pub grazing_speed: f64,
    /// Flights shorter than this count towards corner accumulation.
    pub short_flight: f64,
    /// Consecutive short flights before giving up.
    pub stuck_after: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            impact: ImpactOptions::default(),
            grazing_speed: 1e-10,
            short_flight: 1e-9,
            stuck_after: 50,
        }
    }
}

/// One reflection at the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounce {
    pub impact: Vec2,
    /// Duration of the flight that ended here.
    pub t_flight: f64,
    pub v_in: Vec2,
    pub v_out: Vec2,
    /// Mirror tangent angle at the impact, `atan f'(x)`.
    pub alpha: f64,
    pub focus_in: Focus,
    pub focus_out: Focus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "reason")]
pub enum Termination {
    MaxBounces,
    Escaped,
    Stuck(String),
}

impl Termination {
    pub fn is_abnormal(&self) -> bool {
        matches!(self, Termination::Stuck(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: State,
    pub gravity: f64,
    pub bounces: Vec<Bounce>,
    pub termination: Termination,
}

impl Trajectory {
    /// Flight segments: the launch, then one per bounce (the last one is open-ended).
    pub fn segments(&self) -> Vec<FlightParabola> {
        std::iter::once(self.initial)
            .chain(self.bounces.iter().map(|b| State::new(b.impact, b.v_out)))
            .map(|start| FlightParabola { start, gravity: self.gravity })
            .collect()
    }

    /// Closed flight arcs with their durations.
    pub fn arcs(&self) -> Vec<(FlightParabola, f64)> {
        self.segments()
            .into_iter()
            .zip(self.bounces.iter().map(|b| b.t_flight))
            .collect()
    }

    /// Directrix height of the launch segment.
    pub fn directrix(&self) -> f64 {
        FlightParabola { start: self.initial, gravity: self.gravity }.directrix()
    }
}

/// Runs up to `max_bounces` reflections with default options.
pub fn simulate(
    initial: State,
    mirror: &Mirror,
    gravity: f64,
    max_bounces: usize,
) -> Result<Trajectory, DynamicsError> {
    simulate_with(initial, mirror, gravity, max_bounces, &SimOptions::default())
}

/// Invalid inputs (bad gravity, launch below the mirror) are errors; anything
/// that goes wrong mid-flight ends the run with [`Termination::Stuck`].
pub fn simulate_with(
    initial: State,
    mirror: &Mirror,
    gravity: f64,
    max_bounces: usize,
    opts: &SimOptions,
) -> Result<Trajectory, DynamicsError> {
    let mut segment = FlightParabola::new(initial, gravity)?;
    if mirror.in_domain(initial.pos.x) {
        let floor = mirror.height(initial.pos.x)?;
        if initial.pos.y < floor - SURFACE_EPS {
            return Err(DynamicsError::BelowMirror { pos: initial.pos, height: floor });
        }
    }

    let mut bounces = Vec::with_capacity(max_bounces.min(1 << 16));
    let mut short_run = 0usize;
    let stuck = |reason: String| Termination::Stuck(reason);

    let termination = 'flights: loop {
        if bounces.len() >= max_bounces {
            break Termination::MaxBounces;
        }
        let mut t_from = 0.0;
        let (impact, v_in, normal) = loop {
            let impact = match next_impact_after(&segment, mirror, t_from, &opts.impact) {
                Ok(ImpactOutcome::Hit(i)) => i,
                Ok(ImpactOutcome::Escaped) => break 'flights Termination::Escaped,
                Err(e) => break 'flights stuck(e.to_string()),
            };
            let normal = match mirror.unit_normal(impact.point.x) {
                Ok(n) => n,
                Err(e) => break 'flights stuck(e.to_string()),
            };
            let v_in = segment.velocity_at(impact.time);
            let vn = v_in.dot(normal);
            if vn > -opts.grazing_speed && vn <= 0.0 {
                t_from = impact.time;
                continue;
            }
            break (impact, v_in, normal);
        };

        let v_out = match reflect(v_in, normal) {
            Ok(v) => v,
            Err(e) => break stuck(e.to_string()),
        };
        let next = FlightParabola { start: State::new(impact.point, v_out), gravity };
        bounces.push(Bounce {
            impact: impact.point,
            t_flight: impact.time,
            v_in,
            v_out,
            alpha: mirror.slope(impact.point.x).map(f64::atan).unwrap_or(f64::NAN),
            focus_in: segment.focus(),
            focus_out: next.focus(),
        });
        segment = next;

        if impact.time < opts.short_flight {
            short_run += 1;
            if short_run >= opts.stuck_after {
                break stuck("corner accumulation".to_string());
            }
        } else {
            short_run = 0;
        }
    };

    Ok(Trajectory {
        initial,
        gravity,
        bounces,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: f64, y: f64, vx: f64, vy: f64) -> State {
        State::new(Vec2::new(x, y), Vec2::new(vx, vy))
    }

    #[test]
    fn zero_bounces() {
        let m = Mirror::parse("0").unwrap();
        let t = simulate(state(0.0, 1.0, 1.0, 0.0), &m, 1.0, 0).unwrap();
        assert!(t.bounces.is_empty());
        assert_eq!(t.termination, Termination::MaxBounces);
    }

    #[test]
    fn equal_hops_on_flat_mirror() {
        // drop from height 1 with vx = 1: first impact at x = sqrt(2), then hops of 2 sqrt(2)
        let m = Mirror::parse("0").unwrap();
        let t = simulate(state(0.0, 1.0, 1.0, 0.0), &m, 1.0, 3).unwrap();
        assert_eq!(t.bounces.len(), 3);
        let r2 = 2f64.sqrt();
        for (i, b) in t.bounces.iter().enumerate() {
            let expected = r2 + 2.0 * r2 * i as f64;
            assert!((b.impact.x - expected).abs() < 1e-10, "{i}: {}", b.impact.x);
            assert!(b.impact.y.abs() < 1e-10);
        }
    }

    #[test]
    fn bounce_records_are_consistent() {
        let m = Mirror::parabolic(1.0).unwrap();
        let t = simulate(state(0.3, 3.0, 0.7, 0.0), &m, 1.0, 50).unwrap();
        assert_eq!(t.termination, Termination::MaxBounces);
        let arcs = t.arcs();
        for (b, (seg, dt)) in t.bounces.iter().zip(arcs) {
            assert!(seg.position_at(dt).distance(b.impact) == 0.0);
            assert!((b.v_in.norm() - b.v_out.norm()).abs() <= 1e-12 * b.v_in.norm());
            let n = m.unit_normal(b.impact.x).unwrap();
            assert!((b.v_out - b.v_in).cross(n).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_drop_is_period_two() {
        let m = Mirror::parse("0").unwrap();
        let t = simulate(state(0.0, 1.0, 0.0, 0.0), &m, 1.0, 1000).unwrap();
        assert_eq!(t.bounces.len(), 1000);
        assert!(t.bounces.iter().all(|b| b.focus_out.degenerate && b.impact.x == 0.0));
    }

    #[test]
    fn escape_off_the_domain_edge() {
        let m = Mirror::parse("0").unwrap().with_domain(-5.0, 5.0).unwrap();
        let t = simulate(state(0.0, 1.0, 1.0, 0.0), &m, 1.0, 100).unwrap();
        assert_eq!(t.termination, Termination::Escaped);
        assert_eq!(t.bounces.len(), 2);
    }

    #[test]
    fn invalid_launch() {
        let m = Mirror::parse("0").unwrap();
        assert!(simulate(state(0.0, -1.0, 0.0, 0.0), &m, 1.0, 1).is_err());
        assert!(simulate(state(0.0, 1.0, 0.0, 0.0), &m, -1.0, 1).is_err());
    }
}
