//! Foci curves, envelope curves and the confined domain.
//!
//! For a mirror `y = f(x)` and a parameter `L`, the foci curve is the envelope of
//! the circles centred at mirror points `(k, f(k))` with radius `L - f(k)`:
//!
//! ```text
//! x_F(k) = k + (L - f) 2f' / (1 + f'^2)
//! y_F(k) = f + (L - f) (f'^2 - 1) / (1 + f'^2)
//! ```
//!
//! Given also a directrix height `H`, each foci-curve point is the focus of one
//! flight parabola. The envelope of that family has two branches,
//!
//! ```text
//! x_E = x_F + (H - y_F) J
//! y_E = H/2 (1 - J^2) + y_F/2 (1 + J^2)
//! J+- = (x_F' +- sqrt(x_F'^2 + y_F'^2)) / y_F'
//! ```
//!
//! and together with the mirror and `y <= H` they bound the region an orbit with
//! those parameters can reach.

pub mod closed_form;
mod confine;
mod sampled;

pub use confine::{ConfinedDomain, EnvelopeSample, CONFINEMENT_SAMPLES, CONFINEMENT_TOL};
pub use sampled::{linspace, tan_grid, SampledCurve, Singularity};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::State;
use crate::mirror::{Mirror, MirrorError};
use crate::numerics::{refine_root, Bracket, Dual, Real, RootOptions};
use crate::par::{self, Execution};
use crate::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausticsError {
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error("flat foci tangent at k = {k}: J+- undefined, use the degenerate envelope branch")]
    FlatFociTangent { k: f64 },
    #[error("focus not reachable: no foci curve passes through {focus} within the mirror domain")]
    NotReachable { focus: Vec2 },
    #[error("directrix H = {directrix} lies below the focus (y_F = {focus_y}) at k = {k}")]
    AboveDirectrix { k: f64, directrix: f64, focus_y: f64 },
    #[error("{branch} envelope branch is undefined at k = {k}")]
    UndefinedBranch { k: f64, branch: Branch },
    #[error("non-finite curve value at k = {k}")]
    NonFinite { k: f64 },
    #[error("insufficient envelope sampling: x = {x} outside sampled range [{lo}, {hi}]")]
    InsufficientSampling { x: f64, lo: f64, hi: f64 },
    #[error("no closed form available: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Which sign of `J+-` an envelope point uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

/// Point `theta` on the circle about `(k, f(k))` with radius `L - f(k)`.
pub fn domain_point(m: &Mirror, level: f64, k: f64, theta: f64) -> Result<Vec2, MirrorError> {
    let f = m.height(k)?;
    let (s, c) = theta.sin_cos();
    Ok(Vec2::new(k + (level - f) * c, f + (level - f) * s))
}

/// Angle of the envelope point on the circle at `k`, `atan2(f'^2 - 1, 2f')`.
pub fn theta_star(m: &Mirror, k: f64) -> Result<f64, MirrorError> {
    let s = m.slope(k)?;
    Ok((s * s - 1.0).atan2(2.0 * s))
}

fn foci_formula<T: Real>(k: T, f: T, s: T, level: f64) -> (T, T) {
    let one = T::constant(1.0);
    let q = one + s * s;
    let r = T::constant(level) - f;
    (k + r * (T::constant(2.0) * s) / q, f + r * (s * s - one) / q)
}

/// The foci curve of `mirror` with parameter `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FociCurve {
    mirror: Mirror,
    level: f64,
}

impl FociCurve {
    pub fn new(mirror: Mirror, level: f64) -> Self {
        Self { mirror, level }
    }

    pub fn mirror(&self) -> &Mirror {
        &self.mirror
    }

    /// The parameter `L`.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn point(&self, k: f64) -> Result<Vec2, CausticsError> {
        let f = self.mirror.height(k)?;
        let s = self.mirror.slope(k)?;
        let (x, y) = foci_formula(k, f, s, self.level);
        finite(k, Vec2::new(x, y))
    }

    /// `(x_F'(k), y_F'(k))`, differentiated exactly through the curve formula.
    pub fn tangent(&self, k: f64) -> Result<Vec2, CausticsError> {
        let jet = self.mirror.jet(k)?;
        let (x, y) = foci_formula(
            Dual::variable(k),
            Dual::new(jet.height, jet.slope),
            Dual::new(jet.slope, jet.curvature),
            self.level,
        );
        finite(k, Vec2::new(x.deriv, y.deriv))
    }

    /// `(J+, J-)` at `k`. The pair always satisfies `J+ J- = -1`.
    pub fn j_pm(&self, k: f64) -> Result<(f64, f64), CausticsError> {
        let t = self.tangent(k)?;
        if t.y == 0.0 {
            return Err(CausticsError::FlatFociTangent { k });
        }
        Ok(j_pair(t))
    }

    pub fn sample(&self, ks: &[f64], exec: Execution) -> SampledCurve {
        SampledCurve::from_results(ks, par::map(exec, ks, |&k| self.point(k)))
    }
}

// both roots of y' J^2 - 2 x' J - y' = 0, each without cancellation
fn j_pair(t: Vec2) -> (f64, f64) {
    let r = t.x.hypot(t.y);
    if t.x >= 0.0 {
        ((t.x + r) / t.y, -t.y / (t.x + r))
    } else {
        (-t.y / (t.x - r), (t.x - r) / t.y)
    }
}

fn finite(k: f64, p: Vec2) -> Result<Vec2, CausticsError> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(CausticsError::NonFinite { k })
    }
}

/// The two envelopes of the flight parabolas with foci on `foci` and directrix `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub foci: FociCurve,
    pub directrix: f64,
}

impl EnvelopePair {
    pub fn new(foci: FociCurve, directrix: f64) -> Self {
        Self { foci, directrix }
    }

    /// Envelope point at `k` on `branch`.
    ///
    /// Where the foci tangent is horizontal, one branch collapses onto the vertex
    /// of the flight parabola and the other runs off to infinity; the latter is
    /// reported as [`CausticsError::UndefinedBranch`].
    pub fn point(&self, k: f64, branch: Branch) -> Result<Vec2, CausticsError> {
        let focus = self.foci.point(k)?;
        let h = self.directrix;
        if !(h >= focus.y) {
            return Err(CausticsError::AboveDirectrix { k, directrix: h, focus_y: focus.y });
        }
        let t = self.foci.tangent(k)?;
        let j = if t.y == 0.0 {
            let vertex_branch = if t.x > 0.0 {
                Branch::Minus
            } else if t.x < 0.0 {
                Branch::Plus
            } else {
                return Err(CausticsError::UndefinedBranch { k, branch });
            };
            if branch != vertex_branch {
                return Err(CausticsError::UndefinedBranch { k, branch });
            }
            0.0
        } else {
            let (plus, minus) = j_pair(t);
            match branch {
                Branch::Plus => plus,
                Branch::Minus => minus,
            }
        };
        finite(k, envelope_formula(focus, h, j))
    }

    pub fn sample(&self, ks: &[f64], branch: Branch, exec: Execution) -> SampledCurve {
        SampledCurve::from_results(ks, par::map(exec, ks, |&k| self.point(k, branch)))
    }

    /// Height of the flight parabola with focus `foci.point(k)` above `x`.
    pub fn flight_height(&self, k: f64, x: f64) -> Result<f64, CausticsError> {
        let focus = self.foci.point(k)?;
        let h = self.directrix;
        Ok(0.5 * (h + focus.y) - (x - focus.x).powi(2) / (2.0 * (h - focus.y)))
    }
}

fn envelope_formula(focus: Vec2, h: f64, j: f64) -> Vec2 {
    let jj = j * j;
    Vec2::new(
        focus.x + (h - focus.y) * j,
        0.5 * h * (1.0 - jj) + 0.5 * focus.y * (1.0 + jj),
    )
}

/// One solution of `foci_curve_point(L, k0) = F0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMatch {
    pub level: f64,
    pub k0: f64,
    /// `|foci_curve_point(L, k0) - F0|`
    pub residual: f64,
    /// True when `f(k0) > L`, i.e. the match lies on the analytic continuation.
    pub continuation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions {
    pub grid: usize,
    /// The scan covers `|k| <= span_factor (1 + |F0|)`, clipped to the mirror domain.
    pub span_factor: f64,
    pub tol: f64,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { grid: 2048, span_factor: 10.0, tol: 1e-9 }
    }
}

/// Best solution of [`match_level_all`]: on the physical part of the curve if
/// possible, then closest to `k = 0`.
pub fn match_level(m: &Mirror, focus: Vec2) -> Result<LevelMatch, CausticsError> {
    Ok(match_level_all(m, focus, &MatchOptions::default())?[0])
}

/// Finds every `(L, k0)` with `foci_curve_point(L, k0) = focus`.
///
/// Both coordinates are affine in `L` for fixed `k`, so `L` drops out of the
/// component perpendicular to the circle direction `(sin 2a, -cos 2a)`; that
/// residual is scanned for sign changes in `k` and each bracket refined.
pub fn match_level_all(
    m: &Mirror,
    focus: Vec2,
    opts: &MatchOptions,
) -> Result<Vec<LevelMatch>, CausticsError> {
    if !focus.is_finite() || opts.grid < 2 {
        return Err(CausticsError::Invalid(format!("cannot match focus {focus}")));
    }
    let span = opts.span_factor * (1.0 + focus.norm());
    let (dom_lo, dom_hi) = m.domain();
    let (lo, hi) = (dom_lo.max(-span), dom_hi.min(span));
    if !(lo < hi) {
        return Err(CausticsError::NotReachable { focus });
    }

    let residual = |k: f64| -> f64 {
        let (Ok(f), Ok(s)) = (m.height(k), m.slope(k)) else {
            return f64::NAN;
        };
        let q = 1.0 + s * s;
        (2.0 * s * (focus.y - f) + (1.0 - s * s) * (focus.x - k)) / q
    };

    let ks = linspace(lo, hi, opts.grid);
    let rs: Vec<f64> = ks.iter().map(|&k| residual(k)).collect();
    let mut roots = Vec::new();
    for i in 0..ks.len() {
        if rs[i] == 0.0 {
            roots.push(ks[i]);
            continue;
        }
        if i + 1 < ks.len() && rs[i].is_finite() && rs[i + 1].is_finite() && rs[i] * rs[i + 1] < 0.0 {
            let bracket = Bracket::from_values(ks[i], ks[i + 1], rs[i], rs[i + 1])
                .expect("sign change checked");
            let opts = RootOptions { tol_x: 1e-15, tol_f: 0.0, max_iter: 200 };
            let k = match refine_root(residual, bracket, &opts) {
                Ok(k) => k,
                Err(_) => continue,
            };
            roots.push(k);
        }
    }

    let mut found: Vec<LevelMatch> = Vec::new();
    for k in roots {
        let Some(sol) = level_at(m, focus, k) else { continue };
        if sol.residual > opts.tol {
            continue;
        }
        if found.iter().any(|o| (o.k0 - sol.k0).abs() <= 1e-9 * (1.0 + sol.k0.abs())) {
            continue;
        }
        found.push(sol);
    }
    if found.is_empty() {
        return Err(CausticsError::NotReachable { focus });
    }
    found.sort_by(|a, b| {
        a.continuation
            .cmp(&b.continuation)
            .then(a.k0.abs().total_cmp(&b.k0.abs()))
    });
    Ok(found)
}

fn level_at(m: &Mirror, focus: Vec2, k: f64) -> Option<LevelMatch> {
    let f = m.height(k).ok()?;
    let s = m.slope(k).ok()?;
    let q = 1.0 + s * s;
    let dir = Vec2::new(2.0 * s / q, (s * s - 1.0) / q);
    let level = f + (focus - Vec2::new(k, f)).dot(dir);
    let p = FociCurve::new(m.clone(), level).point(k).ok()?;
    Some(LevelMatch {
        level,
        k0: k,
        residual: p.distance(focus),
        continuation: f > level,
    })
}

/// Launch state whose flight has its focus at `foci.point(k0)` and directrix `H`:
/// starts at the apex moving horizontally in the `+x` direction.
pub fn launch_state(
    foci: &FociCurve,
    directrix: f64,
    k0: f64,
    gravity: f64,
) -> Result<State, CausticsError> {
    if !(gravity > 0.0 && gravity.is_finite()) {
        return Err(CausticsError::Invalid(format!("gravity must be positive, got {gravity}")));
    }
    let focus = foci.point(k0)?;
    let focal = 0.5 * (directrix - focus.y);
    if !(focal > 0.0) {
        return Err(CausticsError::AboveDirectrix { k: k0, directrix, focus_y: focus.y });
    }
    let apex = Vec2::new(focus.x, 0.5 * (directrix + focus.y));
    let floor = foci.mirror().height(apex.x)?;
    if apex.y < floor {
        return Err(CausticsError::Invalid(format!(
            "flight apex {apex} lies below the mirror (f = {floor})"
        )));
    }
    Ok(State::new(apex, Vec2::new((2.0 * gravity * focal).sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn flat() -> Mirror {
        Mirror::parse("0").unwrap()
    }

    fn para() -> Mirror {
        Mirror::parabolic(1.0).unwrap()
    }

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn domain_points() {
        assert!(close(domain_point(&flat(), 1.0, 0.0, FRAC_PI_2).unwrap(), Vec2::new(0.0, 1.0), 1e-15));
        assert!(close(domain_point(&flat(), 1.0, 2.0, 0.0).unwrap(), Vec2::new(3.0, 0.0), 1e-15));
        assert!(close(domain_point(&para(), 2.0, 2.0, PI).unwrap(), Vec2::new(1.0, 1.0), 1e-15));
    }

    #[test]
    fn foci_points() {
        for k in [-3.0, 0.0, 7.5] {
            assert_eq!(FociCurve::new(flat(), 1.0).point(k).unwrap(), Vec2::new(k, -1.0));
        }
        assert_eq!(FociCurve::new(para(), 2.0).point(0.0).unwrap(), Vec2::new(0.0, -2.0));
        let h = FociCurve::new(Mirror::hyperbolic(), 4.0).point(0.0).unwrap();
        assert!(close(h, Vec2::new(0.0, (2.0 - 4.0) / 1.0), 1e-15));
    }

    #[test]
    fn theta_star_quadrants() {
        let line = |deg: f64| Mirror::line(deg.to_radians()).unwrap();
        assert_eq!(theta_star(&flat(), 0.0).unwrap(), -FRAC_PI_2);
        assert!(theta_star(&line(45.0), 0.0).unwrap().abs() < 1e-15);
        let down = Mirror::parse("-x").unwrap();
        assert!((theta_star(&down, 0.0).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn foci_point_is_domain_point_at_theta_star() {
        for m in [para(), Mirror::hyperbolic(), Mirror::parse("sin(x) + x^2/5").unwrap()] {
            for level in [-1.0, 0.5, 4.0] {
                let c = FociCurve::new(m.clone(), level);
                for i in 0..50 {
                    let k = -5.0 + 0.2 * i as f64;
                    let via_theta = domain_point(&m, level, k, theta_star(&m, k).unwrap()).unwrap();
                    assert!(close(c.point(k).unwrap(), via_theta, 1e-12));
                }
            }
        }
    }

    #[test]
    fn tangents() {
        assert_eq!(FociCurve::new(flat(), 1.0).tangent(0.3).unwrap(), Vec2::new(1.0, 0.0));
        // circle about (0, 1): tangent orthogonal to the radius
        let c = FociCurve::new(para(), 2.0);
        for k in [-4.0, -0.5, 0.25, 3.0] {
            let radius = c.point(k).unwrap() - Vec2::new(0.0, 1.0);
            let t = c.tangent(k).unwrap();
            assert!(radius.dot(t).abs() <= 1e-8 * t.norm());
        }
        let alpha = 30f64.to_radians();
        let line = FociCurve::new(Mirror::line(alpha).unwrap(), 1.0);
        let t = line.tangent(2.0).unwrap();
        assert!(t.cross(Vec2::new(1.0, (2.0 * alpha).tan())).abs() < 1e-12);
    }

    #[test]
    fn tangent_matches_central_differences() {
        let m = Mirror::parse("cosh(x/2) + 0.1*x^3").unwrap();
        let c = FociCurve::new(m, 3.0);
        for k in [-1.5, 0.2, 1.1] {
            let h = 1e-5;
            let fd = (c.point(k + h).unwrap() - c.point(k - h).unwrap()) * (0.5 / h);
            assert!(close(c.tangent(k).unwrap(), fd, 1e-6));
        }
    }

    #[test]
    fn j_pairs() {
        assert_eq!(j_pair(Vec2::new(0.0, 1.0)), (1.0, -1.0));
        let c = FociCurve::new(Mirror::hyperbolic(), 4.0);
        for k in [-2.0, 0.3, 1.5, 9.0] {
            let (p, m) = c.j_pm(k).unwrap();
            assert!((p * m + 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            FociCurve::new(flat(), 1.0).j_pm(0.0),
            Err(CausticsError::FlatFociTangent { .. })
        ));
    }

    #[test]
    fn parabolic_envelope_at_axis() {
        // the upper envelope reaches x = 0 only as k -> +-inf (focus at the top of
        // the circle), the lower one at k = 0, so look at samples near the axis
        let e = EnvelopePair::new(FociCurve::new(para(), 2.0), 5.0);
        let grid = tan_grid(-1e6, 1e6, 4001);
        let ys: Vec<f64> = Branch::BOTH
            .iter()
            .flat_map(|&b| e.sample(&grid, b, Execution::Sequential).samples)
            .filter(|(_, p)| p.x.abs() < 1e-3)
            .map(|(_, p)| p.y)
            .collect();
        assert!(ys.iter().any(|y| (y - 4.5).abs() < 1e-6), "{ys:?}");
        assert!(ys.iter().any(|y| (y - 1.5).abs() < 1e-6), "{ys:?}");
    }

    #[test]
    fn line_envelope_slopes() {
        let alpha = 30f64.to_radians();
        let e = EnvelopePair::new(FociCurve::new(Mirror::line(alpha).unwrap(), 1.0), 20.0);
        let slope = |b| {
            let p = e.point(-1.0, b).unwrap();
            let q = e.point(2.0, b).unwrap();
            (q.y - p.y) / (q.x - p.x)
        };
        let (sp, sm) = (slope(Branch::Plus), slope(Branch::Minus));
        let (a, b) = (alpha.tan(), -1.0 / alpha.tan());
        assert!(((sp - a).abs() < 1e-8 && (sm - b).abs() < 1e-8) || ((sp - b).abs() < 1e-8 && (sm - a).abs() < 1e-8));
    }

    #[test]
    fn flat_mirror_envelope_is_the_vertex_line() {
        let e = EnvelopePair::new(FociCurve::new(flat(), 1.0), 5.0);
        for k in [-2.0, 0.0, 3.0] {
            assert_eq!(e.point(k, Branch::Minus).unwrap(), Vec2::new(k, 2.0));
            assert!(matches!(e.point(k, Branch::Plus), Err(CausticsError::UndefinedBranch { .. })));
        }
    }

    #[test]
    fn envelope_requires_focus_below_directrix() {
        let e = EnvelopePair::new(FociCurve::new(flat(), -3.0), 1.0);
        assert!(matches!(e.point(0.0, Branch::Minus), Err(CausticsError::AboveDirectrix { .. })));
    }

    #[test]
    fn envelope_points_satisfy_the_envelope_condition() {
        // family (k, u) -> (x_F(k) + u, y of the flight parabola at x_F(k) + u):
        // its Jacobian determinant vanishes on the envelope
        let mirrors = [para(), Mirror::hyperbolic(), Mirror::parse("x^2/3 + 0.2*sin(2*x)").unwrap()];
        for m in mirrors {
            let e = EnvelopePair::new(FociCurve::new(m, 1.5), 6.0);
            let family = |k: f64, u: f64| {
                let f = e.foci.point(k).unwrap();
                let x = f.x + u;
                Vec2::new(x, e.flight_height(k, x).unwrap())
            };
            for k in [-1.3, -0.4, 0.7, 1.9] {
                for b in Branch::BOTH {
                    let Ok(p) = e.point(k, b) else { continue };
                    if p.norm() > 100.0 {
                        continue; // far out, finite differences lose too many digits
                    }
                    let u = p.x - e.foci.point(k).unwrap().x;
                    assert!(family(k, u).distance(p) < 1e-9);
                    let h = 1e-5;
                    let dk = (family(k + h, u) - family(k - h, u)) * (0.5 / h);
                    let du = (family(k, u + h) - family(k, u - h)) * (0.5 / h);
                    let det = dk.x * du.y - dk.y * du.x;
                    assert!(det.abs() <= 1e-6, "k = {k} {b}: {det}");
                }
            }
        }
    }

    #[test]
    fn matching() {
        let flat_match = match_level(&flat(), Vec2::new(2.0, -1.5)).unwrap();
        assert!((flat_match.level - 1.5).abs() < 1e-12);
        assert!((flat_match.k0 - 2.0).abs() < 1e-9);

        let p = match_level(&para(), Vec2::new(0.0, -2.0)).unwrap();
        assert!((p.level - 2.0).abs() < 1e-9, "{p:?}");
        assert!(!p.continuation);

        let alpha = 30f64.to_radians();
        let y0 = -0.8;
        let l = match_level(&Mirror::line(alpha).unwrap(), Vec2::new(0.0, y0)).unwrap();
        assert!((l.level - (-y0 * 60f64.to_radians().cos())).abs() < 1e-9);
    }

    #[test]
    fn matching_inverts_the_curve() {
        for m in [para(), Mirror::hyperbolic(), Mirror::line(0.4).unwrap()] {
            for (level, k) in [(2.0, 1.0), (4.0, -0.7), (0.5, 0.3), (3.0, 2.5)] {
                let focus = FociCurve::new(m.clone(), level).point(k).unwrap();
                let all = match_level_all(&m, focus, &MatchOptions::default()).unwrap();
                assert!(all.iter().all(|s| s.residual <= 1e-9));
                assert!(
                    all.iter().any(|s| (s.level - level).abs() <= 1e-9),
                    "{m} L = {level} k = {k}: {all:?}"
                );
            }
        }
    }

    #[test]
    fn unreachable_focus() {
        // flat mirror restricted to [0, 1]: curve points have x = k
        let m = flat().with_domain(0.0, 1.0).unwrap();
        assert!(matches!(
            match_level(&m, Vec2::new(5.0, -1.0)),
            Err(CausticsError::NotReachable { .. })
        ));
    }

    #[test]
    fn launch_from_the_apex() {
        let c = FociCurve::new(para(), 2.0);
        let s = launch_state(&c, 5.0, 1.0, 1.0).unwrap();
        assert!(close(s.pos, Vec2::new(2.4, 2.1), 1e-12));
        assert!((s.vel.x - 5.8f64.sqrt()).abs() < 1e-12 && s.vel.y == 0.0);
        assert!(launch_state(&c, 2.0, 1.0, 1.0).is_err());
    }
}
