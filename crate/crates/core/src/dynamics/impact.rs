use std::cell::RefCell;

use super::{DynamicsError, FlightParabola};
use crate::mirror::{Mirror, MirrorError};
use crate::numerics::{refine_root, scan_first_bracket, RootOptions};
use crate::Vec2;

/// Launch points may sit this far below the mirror and still count as on it.
pub const SURFACE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactOptions {
    pub roots: RootOptions,
    /// Search horizon in units of the characteristic time `sqrt(2 (H - f(x0)) / g)`.
    pub horizon_factor: f64,
    /// Scan samples per characteristic time.
    pub steps_per_time_scale: f64,
    /// The search starts at `lift_factor * roots.tol_x` so the launch point is not
    /// re-detected as an impact.
    pub lift_factor: f64,
}

impl Default for ImpactOptions {
    fn default() -> Self {
        Self {
            roots: RootOptions::default(),
            horizon_factor: 1e3,
            steps_per_time_scale: 128.0,
            lift_factor: 10.0,
        }
    }
}

impl ImpactOptions {
    pub fn lift_time(&self) -> f64 {
        self.lift_factor * self.roots.tol_x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impact {
    /// Time since the start of the flight.
    pub time: f64,
    pub point: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpactOutcome {
    Hit(Impact),
    /// Left the mirror domain or exceeded the time horizon without touching down.
    Escaped,
}

/// First time the flight meets the mirror, `y(t) = f(x(t))`.
pub fn next_impact(
    p: &FlightParabola,
    m: &Mirror,
    opts: &ImpactOptions,
) -> Result<ImpactOutcome, DynamicsError> {
    next_impact_after(p, m, 0.0, opts)
}

/// Like [`next_impact`] but only considers impacts later than `t_from`; used to
/// continue a flight past a grazing contact.
pub fn next_impact_after(
    p: &FlightParabola,
    m: &Mirror,
    t_from: f64,
    opts: &ImpactOptions,
) -> Result<ImpactOutcome, DynamicsError> {
    let origin = p.position_at(t_from);
    if !m.in_domain(origin.x) {
        return Ok(ImpactOutcome::Escaped);
    }
    let floor = m.height(origin.x)?;
    if origin.y < floor - SURFACE_EPS {
        return Err(DynamicsError::BelowMirror { pos: origin, height: floor });
    }

    let g = p.gravity;
    let head_room = (p.directrix() - floor).max(0.0);
    let time_scale = (2.0 * head_room / g).sqrt();
    if !(time_scale > 0.0) {
        return Err(DynamicsError::NoLiftOff { pos: origin });
    }

    let (lo, hi) = m.domain();
    let vx = p.start.vel.x;
    let t_exit = if vx > 0.0 {
        (hi - p.start.pos.x) / vx
    } else if vx < 0.0 {
        (lo - p.start.pos.x) / vx
    } else {
        f64::INFINITY
    };
    let t_end = (t_from + opts.horizon_factor * time_scale).min(t_exit);

    let failure: RefCell<Option<MirrorError>> = RefCell::new(None);
    let gap = |t: f64| {
        let pos = p.position_at(t);
        match m.height(pos.x) {
            Ok(h) => pos.y - h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    // After a bounce the launch point may sit a rounding error below the surface;
    // step forward until the particle is clear of it.
    let mut t_start = t_from + opts.lift_time();
    let lift_limit = t_from + 1e-6 * time_scale;
    while !(gap(t_start) > 0.0) {
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e.into());
        }
        t_start = t_from + 2.0 * (t_start - t_from);
        if t_start > lift_limit {
            return Err(DynamicsError::NoLiftOff { pos: origin });
        }
    }
    if t_start >= t_end {
        return Ok(ImpactOutcome::Escaped);
    }

    // a grazing hop can be much shorter than the time scale; the return time over
    // the local tangent line keeps it from fitting inside one scan step
    let normal = m.unit_normal(origin.x)?;
    let v_perp = p.velocity_at(t_from).dot(normal);
    let tangent_hop = 2.0 * v_perp / (g * normal.y);
    let mut step = time_scale / opts.steps_per_time_scale;
    if tangent_hop > 0.0 {
        step = step.min(tangent_hop / 8.0).max(1e-6 * time_scale);
    }
    let bracket = scan_first_bracket(gap, t_start, step, t_end - t_start);
    if let Some(e) = failure.borrow_mut().take() {
        // leaving the domain mid-scan is an escape, anything else is a real failure
        return match e {
            MirrorError::OutsideDomain { .. } => Ok(ImpactOutcome::Escaped),
            other => Err(other.into()),
        };
    }
    let Some(bracket) = bracket else {
        return Ok(ImpactOutcome::Escaped);
    };

    let time = refine_root(gap, bracket, &opts.roots)?;
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e.into());
    }
    Ok(ImpactOutcome::Hit(Impact {
        time,
        point: p.position_at(time),
    }))
}
