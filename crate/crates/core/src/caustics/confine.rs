use super::{tan_grid, Branch, CausticsError, EnvelopePair};
use crate::numerics::{refine_root, Bracket, RootOptions};
use crate::par::{self, Execution};
use crate::Vec2;

pub const CONFINEMENT_SAMPLES: usize = 4096;
pub const CONFINEMENT_TOL: f64 = 1e-6;

/// One envelope sample with the side of the flight family it bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub k: f64,
    pub point: Vec2,
    /// `+1`: the touching flight parabola lies below the envelope here, so the
    /// envelope is an upper bound. `-1`: a lower bound. `0`: undecided.
    pub side: i8,
}

/// Both envelope branches sampled on a `k` grid, ready for point queries.
///
/// An envelope only bounds the orbit from the side the flight parabolas lie on;
/// each sample records that side by comparing nearby envelope points with the
/// parabola touching at `k`. Segments whose ends disagree are not used.
#[derive(Debug, Clone)]
pub struct ConfinedDomain {
    pair: EnvelopePair,
    branches: [Vec<EnvelopeSample>; 2],
    x_range: (f64, f64),
}

impl ConfinedDomain {
    /// Samples `CONFINEMENT_SAMPLES` values `k = tan u` over the mirror domain.
    pub fn new(pair: EnvelopePair, exec: Execution) -> Self {
        let (lo, hi) = pair.foci.mirror().domain();
        let ks = tan_grid(lo, hi, CONFINEMENT_SAMPLES);
        Self::with_grid(pair, &ks, exec)
    }

    pub fn with_grid(pair: EnvelopePair, ks: &[f64], exec: Execution) -> Self {
        let rows = par::map(exec, ks, |&k| {
            Branch::BOTH.map(|b| {
                let point = pair.point(k, b).ok()?;
                Some(EnvelopeSample { k, point, side: side_of(&pair, k, point.x) })
            })
        });
        let mut branches = [Vec::new(), Vec::new()];
        for row in rows {
            for (i, s) in row.into_iter().enumerate() {
                if let Some(s) = s {
                    branches[i].push(s);
                }
            }
        }
        for b in &mut branches {
            fill_sides(b);
        }
        let x_range = branches
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.point.x), hi.max(s.point.x))
            });
        Self { pair, branches, x_range }
    }

    pub fn pair(&self) -> &EnvelopePair {
        &self.pair
    }

    pub fn samples(&self, branch: Branch) -> &[EnvelopeSample] {
        &self.branches[branch as usize]
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    /// How far `p` lies outside the domain (zero inside). Points beyond the mirror
    /// domain are infinitely far out.
    pub fn violation(&self, p: Vec2) -> Result<f64, CausticsError> {
        let (lo, hi) = self.x_range;
        if !(lo <= p.x && p.x <= hi) {
            return Err(CausticsError::InsufficientSampling { x: p.x, lo, hi });
        }
        let Ok(floor) = self.pair.foci.mirror().height(p.x) else {
            return Ok(f64::INFINITY);
        };
        let mut worst = (floor - p.y).max(p.y - self.pair.directrix).max(0.0);
        for (i, branch) in self.branches.iter().enumerate() {
            let wrap = closing_segment(branch).map(|(a, b)| [a, b]);
            let segments = branch.windows(2).map(|w| (w[0], w[1], true));
            for (a, b, exact) in segments.chain(wrap.map(|w| (w[0], w[1], false))) {
                if a.side == 0 || a.side != b.side {
                    continue;
                }
                let (x0, x1) = (a.point.x.min(b.point.x), a.point.x.max(b.point.x));
                if !(x0 <= p.x && p.x <= x1) {
                    continue;
                }
                let y = if exact {
                    self.height_between(Branch::BOTH[i], a, b, p.x)
                } else {
                    Some(chord(a.point, b.point, p.x))
                };
                let Some(y) = y else { continue };
                let outside = if a.side > 0 { p.y - y } else { y - p.y };
                worst = worst.max(outside);
            }
        }
        Ok(worst)
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> Result<bool, CausticsError> {
        Ok(self.violation(p)? <= tol)
    }

    // Envelope height at x between two samples, from x_E(k) = x. `None` when the
    // branch runs through infinity between them.
    fn height_between(&self, branch: Branch, a: EnvelopeSample, b: EnvelopeSample, x: f64) -> Option<f64> {
        if x == a.point.x {
            return Some(a.point.y);
        }
        if x == b.point.x {
            return Some(b.point.y);
        }
        let gap = |k: f64| self.pair.point(k, branch).map_or(f64::NAN, |p| p.x - x);
        let bracket = Bracket::from_values(a.k, b.k, a.point.x - x, b.point.x - x)?;
        let opts = RootOptions { tol_x: 1e-15 * (1.0 + a.k.abs()), tol_f: 0.0, max_iter: 200 };
        let k = refine_root(gap, bracket, &opts).ok()?;
        let p = self.pair.point(k, branch).ok()?;
        ((p.x - x).abs() <= 1e-9 * (1.0 + x.abs())).then_some(p.y)
    }
}

fn chord(a: Vec2, b: Vec2, x: f64) -> f64 {
    let dx = b.x - a.x;
    if dx == 0.0 {
        0.5 * (a.y + b.y)
    } else {
        a.y + (b.y - a.y) * (x - a.x) / dx
    }
}

// A branch whose two ends meet (the foci curve closes up as k -> +-inf, as for the
// parabolic mirror's circle) gets the short gap between its ends bridged.
fn closing_segment(branch: &[EnvelopeSample]) -> Option<(EnvelopeSample, EnvelopeSample)> {
    let (first, last) = (branch.first()?, branch.last()?);
    if branch.len() < 3 {
        return None;
    }
    let gap = first.point.distance(last.point);
    (gap <= 1e-4 * (1.0 + first.point.norm())).then_some((*last, *first))
}

// The envelope point at `k` is where `q -> height of flight q at x` is stationary
// for `x = x_E(k)`. A maximum there means the flights pass below: an upper bound.
fn side_of(pair: &EnvelopePair, k: f64, x: f64) -> i8 {
    let h = pair.directrix;
    let slope_in_k = |q: f64| -> Option<(f64, f64)> {
        let f = pair.foci.point(q).ok()?;
        let t = pair.foci.tangent(q).ok()?;
        let (dx, room) = (x - f.x, h - f.y);
        let terms = [0.5 * t.y, dx * t.x / room, -0.5 * dx * dx * t.y / (room * room)];
        let value: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        value.is_finite().then_some((value, scale))
    };
    let step = 1e-4 * (1.0 + k.abs());
    let (Some((lo, s_lo)), Some((hi, s_hi))) = (slope_in_k(k - step), slope_in_k(k + step)) else {
        return 0;
    };
    let change = hi - lo;
    if change.abs() <= 1e-9 * (s_lo + s_hi) {
        0
    } else if change < 0.0 {
        1
    } else {
        -1
    }
}

// undecided samples take the side of the nearest decided one
fn fill_sides(samples: &mut [EnvelopeSample]) {
    let decided: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].side != 0).collect();
    if decided.is_empty() {
        return;
    }
    let mut next = 0;
    for i in 0..samples.len() {
        while next + 1 < decided.len() && decided[next + 1] <= i {
            next += 1;
        }
        if samples[i].side == 0 {
            let a = decided[next];
            let nearest = match decided.get(next + 1) {
                Some(&b) if a < i && b - i < i - a => b,
                _ => a,
            };
            samples[i].side = samples[nearest].side;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caustics::FociCurve;
    use crate::mirror::Mirror;

    fn bowl_r3() -> ConfinedDomain {
        let pair = EnvelopePair::new(FociCurve::new(Mirror::parabolic(1.0).unwrap(), 2.0), 5.0);
        ConfinedDomain::new(pair, Execution::default())
    }

    #[test]
    fn parabolic_domain_membership() {
        let d = bowl_r3();
        assert!(d.contains(Vec2::new(0.0, 2.0), CONFINEMENT_TOL).unwrap());
        assert!(!d.contains(Vec2::new(0.0, 4.9), CONFINEMENT_TOL).unwrap());
        // below the lower envelope -x^2/2 + 3/2
        assert!(!d.contains(Vec2::new(0.0, 1.0), CONFINEMENT_TOL).unwrap());
        assert!(!d.contains(Vec2::new(1.0, 0.2), CONFINEMENT_TOL).unwrap());
        assert!((d.violation(Vec2::new(0.0, 4.9)).unwrap() - 0.4).abs() < 1e-9);
    }

    #[test]
    fn matches_closed_form_envelopes() {
        let d = bowl_r3();
        let up = |x: f64| -x * x / 14.0 + 4.5;
        let low = |x: f64| -x * x / 2.0 + 1.5;
        for i in 0..=40 {
            let x = -3.5 + 0.175 * i as f64;
            let floor = x * x / 4.0;
            let lo = low(x).max(floor);
            assert!(d.violation(Vec2::new(x, up(x))).unwrap() < 1e-9, "x = {x}");
            assert!(d.violation(Vec2::new(x, lo)).unwrap() < 1e-9, "x = {x}");
            if up(x) - lo > 1e-3 {
                assert!(d.violation(Vec2::new(x, up(x) + 1e-4)).unwrap() > 9e-5);
                assert!(d.violation(Vec2::new(x, lo - 1e-4)).unwrap() > 9e-5);
            }
        }
    }

    #[test]
    fn outside_the_sampled_range() {
        let pair = EnvelopePair::new(FociCurve::new(Mirror::parse("0").unwrap(), 1.0), 5.0);
        let d = ConfinedDomain::with_grid(pair, &[-1.0, 0.0, 1.0], Execution::Sequential);
        assert!(d.contains(Vec2::new(0.5, 1.0), 1e-6).unwrap());
        assert!(!d.contains(Vec2::new(0.5, 2.5), 1e-6).unwrap());
        assert!(matches!(
            d.contains(Vec2::new(3.0, 1.0), 1e-6),
            Err(CausticsError::InsufficientSampling { .. })
        ));
    }
}
