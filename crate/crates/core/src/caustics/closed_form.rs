//! Closed-form foci curves and envelopes for the three built-in mirrors.
//!
//! These are independent of the generic machinery in the parent module and exist
//! to check it. For the parabola `x^2/(4 fm)` the foci curve is the circle about
//! `(0, fm)` with radius `R = fm + L` and the envelopes are the parabolas
//! `y = -x^2 / (2(H - fm +- R)) + (H + fm +- R) / 2`. For the line through the
//! origin at angle `a` the foci lie on `y = x tan 2a - L sec 2a` and the envelopes
//! are two perpendicular lines.
//!
//! Envelope branch signs here follow the `+-` in these formulas, which is not
//! necessarily the sign of `J` used by [`EnvelopePair`](super::EnvelopePair).

use super::{Branch, CausticsError, SampledCurve};
use crate::mirror::{Mirror, MirrorKind};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Foci,
    Envelope(Branch),
}

fn sign(b: Branch) -> f64 {
    match b {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    }
}

/// Centre and radius of the parabolic mirror's foci circle.
pub fn parabolic_circle(fm: f64, level: f64) -> (Vec2, f64) {
    (Vec2::new(0.0, fm), fm + level)
}

/// Foci-circle point for mirror parameter `k`.
pub fn parabolic_foci(fm: f64, level: f64, k: f64) -> Vec2 {
    let r = fm + level;
    let q = k * k + 4.0 * fm * fm;
    Vec2::new(r * 4.0 * fm * k / q, fm + r * (k * k - 4.0 * fm * fm) / q)
}

pub fn parabolic_envelope(fm: f64, level: f64, h: f64, x: f64, branch: Branch) -> f64 {
    let r = sign(branch) * (fm + level);
    -x * x / (2.0 * (h - fm + r)) + 0.5 * (h + fm + r)
}

pub fn line_foci(alpha: f64, level: f64, x: f64) -> f64 {
    let two = 2.0 * alpha;
    x * two.tan() - level / two.cos()
}

/// `Plus` has slope `tan a`, `Minus` slope `-cot a` (for `|a| < pi/4`).
pub fn line_envelope(alpha: f64, level: f64, h: f64, x: f64, branch: Branch) -> f64 {
    let two = 2.0 * alpha;
    let sec = (1.0 / two.cos()).abs();
    let s = sign(branch) * sec;
    (x * two.tan() - level / two.cos() + h * s) / (1.0 + s)
}

pub fn hyperbolic_foci(level: f64, k: f64) -> Vec2 {
    let s = k.hypot(1.0);
    let q = 1.0 + 2.0 * k * k;
    Vec2::new(k * (2.0 * level * s - 1.0) / q, (2.0 * s * s * s - level) / q)
}

/// `(J+, J-)` for the hyperbolic mirror; singular at `k = 0`.
pub fn hyperbolic_j_pm(level: f64, k: f64) -> (f64, f64) {
    let k2 = k * k;
    let s = (k2 + 1.0).sqrt();
    let a = 2.0 * k2 + 1.0;
    let inner = (a * a
        * (4.0 * level * (level + s * (2.0 * k2 - 1.0)) + 4.0 * k2 * k2 * k2 - 3.0 * k2 + 1.0)
        / (k2 + 1.0))
        .sqrt();
    let den = 2.0 * k * (2.0 * level * s + 2.0 * k2 * k2 + k2 - 1.0);
    (
        (s * (2.0 * k2 - 1.0 + inner) + 2.0 * level) / den,
        (s * (2.0 * k2 - 1.0 - inner) + 2.0 * level) / den,
    )
}

/// Samples a closed form. `params` are mirror parameters `k` for the parabolic
/// and hyperbolic foci curves and abscissae `x` for everything else.
pub fn oracle(
    mirror: &Mirror,
    quantity: Quantity,
    level: f64,
    directrix: f64,
    params: &[f64],
) -> Result<SampledCurve, CausticsError> {
    let eval: Box<dyn Fn(f64) -> Vec2> = match (mirror.kind(), quantity) {
        (&MirrorKind::Parabolic { focal_length: fm }, Quantity::Foci) => {
            Box::new(move |k| parabolic_foci(fm, level, k))
        }
        (&MirrorKind::Parabolic { focal_length: fm }, Quantity::Envelope(b)) => {
            Box::new(move |x| Vec2::new(x, parabolic_envelope(fm, level, directrix, x, b)))
        }
        (&MirrorKind::Line { angle }, Quantity::Foci) => {
            Box::new(move |x| Vec2::new(x, line_foci(angle, level, x)))
        }
        (&MirrorKind::Line { angle }, Quantity::Envelope(b)) => {
            Box::new(move |x| Vec2::new(x, line_envelope(angle, level, directrix, x, b)))
        }
        (MirrorKind::Hyperbolic, Quantity::Foci) => Box::new(move |k| hyperbolic_foci(level, k)),
        (MirrorKind::Hyperbolic, Quantity::Envelope(_)) => {
            return Err(CausticsError::Unsupported(
                "hyperbolic envelopes have no closed form; compare J+- instead".into(),
            ))
        }
        (MirrorKind::Expression(_), _) => {
            return Err(CausticsError::Unsupported(format!("expression mirror `{mirror}`")))
        }
    };
    Ok(SampledCurve::from_results(params, params.iter().map(|&p| Ok(eval(p)))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_circle_points() {
        let (c, r) = parabolic_circle(1.0, 2.0);
        for k in [-50.0, -1.0, 0.0, 0.3, 8.0] {
            assert!((parabolic_foci(1.0, 2.0, k).distance(c) - r).abs() < 1e-14);
        }
        assert_eq!(parabolic_foci(1.0, 2.0, 0.0), Vec2::new(0.0, -2.0));
        assert_eq!(parabolic_envelope(1.0, 2.0, 5.0, 0.0, Branch::Plus), 4.5);
        assert_eq!(parabolic_envelope(1.0, 2.0, 5.0, 0.0, Branch::Minus), 1.5);
    }

    #[test]
    fn line_forms() {
        let a = 30f64.to_radians();
        let l = 1.0;
        assert!((line_foci(a, l, 0.0) + l * 2.0).abs() < 1e-14);
        let slope = |b| line_envelope(a, l, 5.0, 1.0, b) - line_envelope(a, l, 5.0, 0.0, b);
        assert!((slope(Branch::Plus) - a.tan()).abs() < 1e-14);
        assert!((slope(Branch::Minus) + 1.0 / a.tan()).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_forms() {
        assert_eq!(hyperbolic_foci(4.0, 0.0), Vec2::new(0.0, -2.0));
        assert!((hyperbolic_foci(4.0, 1e3).x - 4.0).abs() < 1e-2);
        let (p, m) = hyperbolic_j_pm(4.0, 1.5);
        assert!((p * m + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported() {
        let q = Quantity::Envelope(Branch::Plus);
        assert!(oracle(&Mirror::hyperbolic(), q, 1.0, 5.0, &[0.0]).is_err());
        let e = Mirror::parse("x^4").unwrap();
        assert!(oracle(&e, Quantity::Foci, 1.0, 5.0, &[0.0]).is_err());
        assert_eq!(oracle(&Mirror::hyperbolic(), Quantity::Foci, 1.0, 5.0, &[0.0, 1.0]).unwrap().len(), 2);
    }
}
