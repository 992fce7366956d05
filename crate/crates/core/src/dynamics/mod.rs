//! Exact parabolic flight between impacts, specular reflection at the mirror and
//! the bounce-to-bounce simulator.
//!
//! Gravity points along `-y` with magnitude `g > 0`. A flight launched from
//! `(x0, y0)` with velocity `(vx, vy)` follows
//! `x(t) = x0 + vx t`, `y(t) = y0 + vy t - g t^2 / 2`, a downward parabola with
//! focal length `vx^2 / (2g)` and a horizontal directrix at the energy height
//! `H = y0 + |v|^2 / (2g)`.

mod impact;
mod simulate;

pub use impact::{next_impact, next_impact_after, Impact, ImpactOptions, ImpactOutcome};
pub use simulate::{simulate, simulate_with, Bounce, SimOptions, Termination, Trajectory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mirror::MirrorError;
use crate::numerics::NumericsError;
use crate::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("gravitational acceleration must be positive and finite, got {0}")]
    InvalidGravity(f64),
    #[error("non-incident impact: velocity {v_in} does not point into the mirror (normal {normal})")]
    NonIncident { v_in: Vec2, normal: Vec2 },
    #[error("launch point {pos} is below the mirror (f = {height})")]
    BelowMirror { pos: Vec2, height: f64 },
    #[error("particle cannot lift off the mirror at {pos}")]
    NoLiftOff { pos: Vec2 },
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Position and velocity of the particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl State {
    pub fn new(pos: Vec2, vel: Vec2) -> Self {
        Self { pos, vel }
    }
}

/// Focus of a flight parabola. For a vertical flight (`vx = 0`) the parabola
/// collapses to a segment; `point` is then the apex and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Focus {
    pub point: Vec2,
    pub degenerate: bool,
}

/// One gravity-only flight segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightParabola {
    pub start: State,
    pub gravity: f64,
}

impl FlightParabola {
    pub fn new(start: State, gravity: f64) -> Result<Self, DynamicsError> {
        if !(gravity > 0.0 && gravity.is_finite()) {
            return Err(DynamicsError::InvalidGravity(gravity));
        }
        Ok(Self { start, gravity })
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        let State { pos, vel } = self.start;
        Vec2::new(
            pos.x + vel.x * t,
            pos.y - 0.5 * self.gravity * t * t + vel.y * t,
        )
    }

    pub fn velocity_at(&self, t: f64) -> Vec2 {
        Vec2::new(self.start.vel.x, self.start.vel.y - self.gravity * t)
    }

    pub fn state_at(&self, t: f64) -> State {
        State::new(self.position_at(t), self.velocity_at(t))
    }

    pub fn focal_length(&self) -> f64 {
        let vx = self.start.vel.x;
        vx * vx / (2.0 * self.gravity)
    }

    pub fn is_degenerate(&self) -> bool {
        self.start.vel.x == 0.0
    }

    pub fn focus(&self) -> Focus {
        let State { pos, vel } = self.start;
        let g = self.gravity;
        if self.is_degenerate() {
            return Focus {
                point: Vec2::new(pos.x, pos.y + vel.y * vel.y / (2.0 * g)),
                degenerate: true,
            };
        }
        Focus {
            point: Vec2::new(
                pos.x + vel.x * vel.y / g,
                pos.y + (vel.y * vel.y - vel.x * vel.x) / (2.0 * g),
            ),
            degenerate: false,
        }
    }

    /// Height `H` of the directrix, `y_F + 2 f`, computed in energy form.
    pub fn directrix(&self) -> f64 {
        let h = self.start.pos.y + self.start.vel.norm_sq() / (2.0 * self.gravity);
        debug_assert!({
            let focal = self.focus().point.y + 2.0 * self.focal_length();
            let scale = 1f64.max(self.start.pos.y.abs()).max(h.abs());
            (focal - h).abs() <= 1e-14 * scale
        });
        h
    }

    /// Apex of the parabola, `(x_F, (H + y_F) / 2)`.
    pub fn vertex(&self) -> Vec2 {
        let focus = self.focus().point;
        if self.is_degenerate() {
            return focus;
        }
        Vec2::new(focus.x, 0.5 * (self.directrix() + focus.y))
    }
}

/// Specular reflection of `v_in` about the unit `normal`.
///
/// Fails when `v_in` is not heading into the surface (`v_in . normal >= 0`).
pub fn reflect(v_in: Vec2, normal: Vec2) -> Result<Vec2, DynamicsError> {
    if v_in.dot(normal) >= 0.0 {
        return Err(DynamicsError::NonIncident { v_in, normal });
    }
    Ok(mirror_vector(v_in, normal))
}

/// `v - 2 (v . n) n` without the incidence check.
pub fn mirror_vector(v: Vec2, normal: Vec2) -> Vec2 {
    v - normal * (2.0 * v.dot(normal))
}

/// Maps the incoming focus to the outgoing one, both relative to the reflection
/// point, for a mirror tangent inclined at `alpha`:
/// `[[-cos 4a, -sin 4a], [-sin 4a, cos 4a]]`.
pub fn reflect_focus(f_rel: Vec2, alpha: f64) -> Vec2 {
    let (s, c) = (4.0 * alpha).sin_cos();
    Vec2::new(-c * f_rel.x - s * f_rel.y, -s * f_rel.x + c * f_rel.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::Mirror;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn flight(x: f64, y: f64, vx: f64, vy: f64, g: f64) -> FlightParabola {
        FlightParabola::new(State::new(Vec2::new(x, y), Vec2::new(vx, vy)), g).unwrap()
    }

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn kinematics() {
        assert_eq!(flight(0.0, 0.0, 1.0, 1.0, 1.0).position_at(2.0), Vec2::new(2.0, 0.0));
        assert_eq!(flight(1.5, -2.0, 1.0, 1.0, 1.0).position_at(0.0), Vec2::new(1.5, -2.0));
        let p = flight(0.0, 0.0, 3.0, 4.0, 9.81).position_at(0.5);
        assert!(close(p, Vec2::new(1.5, 4.0 * 0.5 - 9.81 * 0.125), 1e-15));
    }

    #[test]
    fn rejects_bad_gravity() {
        let s = State::new(Vec2::ZERO, Vec2::ZERO);
        assert!(FlightParabola::new(s, 0.0).is_err());
        assert!(FlightParabola::new(s, f64::NAN).is_err());
    }

    #[test]
    fn focal_lengths() {
        assert_eq!(flight(0.0, 0.0, 1.0, 1.0, 1.0).focal_length(), 0.5);
        assert_eq!(flight(0.0, 0.0, 0.0, 5.0, 1.0).focal_length(), 0.0);
        let beta = 60f64.to_radians();
        let f = flight(0.0, 0.0, 2.0 * beta.cos(), 2.0 * beta.sin(), 1.0).focal_length();
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn foci() {
        let f = flight(0.0, 0.0, 1.0, 1.0, 1.0).focus();
        assert_eq!(f, Focus { point: Vec2::new(1.0, 0.0), degenerate: false });
        assert_eq!(flight(0.0, 0.0, 1.0, 0.0, 1.0).focus().point, Vec2::new(0.0, -0.5));
        assert_eq!(flight(2.0, 3.0, 1.0, 1.0, 1.0).focus().point, Vec2::new(3.0, 3.0));
        let vertical = flight(0.0, 0.0, 0.0, 2.0, 1.0).focus();
        assert!(vertical.degenerate);
        assert_eq!(vertical.point, Vec2::new(0.0, 2.0));
    }

    #[test]
    fn directrix_and_vertex() {
        let p = flight(0.0, 0.0, 1.0, 1.0, 1.0);
        assert_eq!(p.directrix(), 1.0);
        assert_eq!(p.focus().point.y + 2.0 * p.focal_length(), 1.0);
        assert_eq!(p.vertex(), Vec2::new(1.0, 0.5));
        assert_eq!(flight(0.0, 2.0, 1.0, 0.0, 1.0).directrix(), 2.5);
        assert_eq!(flight(0.0, 0.0, 1.0, 0.0, 1.0).vertex(), Vec2::new(0.0, 0.0));
    }

    #[test]
    fn vertex_is_the_highest_sampled_point() {
        let p = flight(-1.0, 0.3, 0.7, 2.1, 1.3);
        let sampled_max = (0..=400_000)
            .map(|i| p.position_at(i as f64 * 1e-5).y)
            .fold(f64::MIN, f64::max);
        assert!((p.vertex().y - sampled_max).abs() < 1e-9);
    }

    #[test]
    fn reflections() {
        let up = Vec2::new(0.0, 1.0);
        assert_eq!(reflect(Vec2::new(1.0, -1.0), up).unwrap(), Vec2::new(1.0, 1.0));
        assert_eq!(reflect(Vec2::new(0.0, -1.0), up).unwrap(), Vec2::new(0.0, 1.0));
        let n = Vec2::new(-SQRT_2 / 2.0, SQRT_2 / 2.0);
        assert!(close(mirror_vector(Vec2::new(-1.0, 0.0), n), Vec2::new(0.0, -1.0), 1e-15));
        // (-1, 0) moves away from y = x, so the checked form refuses it
        assert!(reflect(Vec2::new(-1.0, 0.0), n).is_err());
        assert!(close(reflect(Vec2::new(1.0, 0.0), n).unwrap(), Vec2::new(0.0, 1.0), 1e-15));
        assert!(matches!(
            reflect(Vec2::new(1.0, 1.0), up),
            Err(DynamicsError::NonIncident { .. })
        ));
    }

    #[test]
    fn focus_map_at_zero_angle_and_involution() {
        assert_eq!(reflect_focus(Vec2::new(1.0, 2.0), 0.0), Vec2::new(-1.0, 2.0));
        for alpha in [-1.1, -0.3, 0.2, 0.9] {
            let f = Vec2::new(0.7, -1.9);
            assert!(close(reflect_focus(reflect_focus(f, alpha), alpha), f, 1e-14));
        }
    }

    #[test]
    fn focus_map_matches_a_bounce_off_a_45_degree_line() {
        // matrix at 4a = pi: (1, 0) -> (1, 0)
        assert!(close(reflect_focus(Vec2::new(1.0, 0.0), FRAC_PI_4), Vec2::new(1.0, 0.0), 1e-15));

        // cross-check: incoming flight hitting the line y = x at the origin
        let mirror = Mirror::line(FRAC_PI_4).unwrap();
        let v_in = Vec2::new(-0.6, -1.3);
        let incoming = FlightParabola::new(State::new(Vec2::ZERO, v_in), 1.0).unwrap();
        let v_out = reflect(v_in, mirror.unit_normal(0.0).unwrap()).unwrap();
        let outgoing = FlightParabola::new(State::new(Vec2::ZERO, v_out), 1.0).unwrap();
        let mapped = reflect_focus(incoming.focus().point, FRAC_PI_4);
        assert!(close(mapped, outgoing.focus().point, 1e-14));
    }
}
