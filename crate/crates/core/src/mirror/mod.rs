//! The reflecting boundary `y = f(x)`.
//!
//! Three built-in shapes have closed-form height, slope and curvature. Any other
//! single-valued graph can be given as an infix expression in `x`; its slope and
//! curvature come from (nested) dual-number evaluation, so they are exact up to
//! rounding.
//!
//! Text syntax accepted by [`Mirror::parse`]:
//!
//! - `parabola:fm=<focal length>` for `f(x) = x^2 / (4 fm)`
//! - `line:alpha_deg=<inclination in degrees>` for `f(x) = tan(alpha) x`
//! - `hyperbola` for `f(x) = sqrt(1 + x^2)`
//! - any expression in `x` using `+ - * / ^`, parentheses and
//!   `sin cos tan sqrt abs exp ln sinh cosh tanh`

mod expr;

pub use expr::{parse_expr, BinOp, EvalError, Expr, ExprNode, Func, ParseError};

use std::fmt;

use thiserror::Error;

use crate::numerics::{Dual, Real};
use crate::Vec2;

pub const DEFAULT_DOMAIN: (f64, f64) = (-1e6, 1e6);

#[derive(Debug, Clone, PartialEq)]
pub enum MirrorKind {
    /// `f(x) = x^2 / (4 focal_length)`
    Parabolic { focal_length: f64 },
    /// `f(x) = tan(angle) x`, angle in radians.
    Line { angle: f64 },
    /// `f(x) = sqrt(1 + x^2)`
    Hyperbolic,
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MirrorError {
    #[error("x = {x} is outside the mirror domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("mirror evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid mirror: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Height and first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub height: f64,
    pub slope: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mirror {
    kind: MirrorKind,
    domain: (f64, f64),
}

impl Mirror {
    pub fn parabolic(focal_length: f64) -> Result<Self, MirrorError> {
        if !(focal_length > 0.0 && focal_length.is_finite()) {
            return Err(MirrorError::InvalidParameter(format!(
                "parabolic focal length must be positive, got {focal_length}"
            )));
        }
        Ok(Self::from_kind(MirrorKind::Parabolic { focal_length }))
    }

    /// Straight line through the origin inclined by `angle` radians.
    ///
    /// The angle must lie in (-pi/2, pi/2); a vertical line is not a graph.
    pub fn line(angle: f64) -> Result<Self, MirrorError> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(angle > -half_pi && angle < half_pi) {
            return Err(MirrorError::InvalidParameter(format!(
                "line inclination must be in (-90, 90) degrees, got {} degrees",
                angle.to_degrees()
            )));
        }
        Ok(Self::from_kind(MirrorKind::Line { angle }))
    }

    pub fn hyperbolic() -> Self {
        Self::from_kind(MirrorKind::Hyperbolic)
    }

    pub fn expression(expr: Expr) -> Self {
        Self::from_kind(MirrorKind::Expression(expr))
    }

    fn from_kind(kind: MirrorKind) -> Self {
        Self {
            kind,
            domain: DEFAULT_DOMAIN,
        }
    }

    /// Parses the keyword forms or an infix expression in `x`.
    pub fn parse(text: &str) -> Result<Self, MirrorError> {
        let trimmed = text.trim();
        if trimmed == "hyperbola" {
            return Ok(Self::hyperbolic());
        }
        if let Some(rest) = trimmed.strip_prefix("parabola:") {
            let fm = keyword_value(rest, "fm")?;
            return Self::parabolic(fm);
        }
        if let Some(rest) = trimmed.strip_prefix("line:") {
            let deg = keyword_value(rest, "alpha_deg")?;
            return Self::line(deg.to_radians());
        }
        Ok(Self::expression(parse_expr(trimmed)?))
    }

    /// Restricts the mirror to `[lo, hi]`.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self, MirrorError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(MirrorError::InvalidParameter(format!(
                "domain [{lo}, {hi}] is empty or unbounded"
            )));
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn kind(&self) -> &MirrorKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn in_domain(&self, x: f64) -> bool {
        self.domain.0 <= x && x <= self.domain.1
    }

    fn check_domain(&self, x: f64) -> Result<(), MirrorError> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(MirrorError::OutsideDomain {
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            })
        }
    }

    pub fn height(&self, x: f64) -> Result<f64, MirrorError> {
        self.check_domain(x)?;
        let h = match &self.kind {
            MirrorKind::Parabolic { focal_length } => x * x / (4.0 * focal_length),
            MirrorKind::Line { angle } => angle.tan() * x,
            MirrorKind::Hyperbolic => x.hypot(1.0),
            MirrorKind::Expression(e) => e.eval(x)?,
        };
        Ok(h)
    }

    pub fn slope(&self, x: f64) -> Result<f64, MirrorError> {
        self.check_domain(x)?;
        let s = match &self.kind {
            MirrorKind::Parabolic { focal_length } => x / (2.0 * focal_length),
            MirrorKind::Line { angle } => angle.tan(),
            MirrorKind::Hyperbolic => x / x.hypot(1.0),
            MirrorKind::Expression(e) => e.eval(Dual::variable(x))?.deriv,
        };
        Ok(s)
    }

    /// Height, slope and second derivative at `x`.
    pub fn jet(&self, x: f64) -> Result<Jet, MirrorError> {
        self.check_domain(x)?;
        let jet = match &self.kind {
            MirrorKind::Parabolic { focal_length } => Jet {
                height: x * x / (4.0 * focal_length),
                slope: x / (2.0 * focal_length),
                curvature: 1.0 / (2.0 * focal_length),
            },
            MirrorKind::Line { angle } => Jet {
                height: angle.tan() * x,
                slope: angle.tan(),
                curvature: 0.0,
            },
            MirrorKind::Hyperbolic => {
                let r = x.hypot(1.0);
                Jet {
                    height: r,
                    slope: x / r,
                    curvature: 1.0 / (r * r * r),
                }
            }
            MirrorKind::Expression(e) => {
                let seed: Dual<Dual> = Dual::new(Dual::variable(x), Dual::constant(1.0));
                let v = e.eval(seed)?;
                Jet {
                    height: v.value.value,
                    slope: v.deriv.value,
                    curvature: v.deriv.deriv,
                }
            }
        };
        Ok(jet)
    }

    /// Upward unit normal `(-f', 1) / sqrt(1 + f'^2)`.
    pub fn unit_normal(&self, x: f64) -> Result<Vec2, MirrorError> {
        Ok(unit_normal_from_slope(self.slope(x)?))
    }

    /// Tangent inclination `atan f'(x)`, in (-pi/2, pi/2).
    pub fn tangent_angle(&self, x: f64) -> Result<f64, MirrorError> {
        Ok(self.slope(x)?.atan())
    }
}

pub(crate) fn unit_normal_from_slope(s: f64) -> Vec2 {
    let n = s.hypot(1.0);
    Vec2::new(-s / n, 1.0 / n)
}

fn keyword_value(rest: &str, key: &str) -> Result<f64, MirrorError> {
    let bad = || {
        MirrorError::InvalidParameter(format!("expected `{key}=<number>`, got `{rest}`"))
    };
    let (k, v) = rest.split_once('=').ok_or_else(bad)?;
    if k.trim() != key {
        return Err(bad());
    }
    v.trim().parse::<f64>().map_err(|_| bad())
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MirrorKind::Parabolic { focal_length } => write!(f, "parabola:fm={focal_length}"),
            MirrorKind::Line { angle } => write!(f, "line:alpha_deg={}", angle.to_degrees()),
            MirrorKind::Hyperbolic => write!(f, "hyperbola"),
            MirrorKind::Expression(e) => write!(f, "{e}"),
        }
    }
}
