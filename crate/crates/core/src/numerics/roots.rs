use super::NumericsError;

/// Interval known to enclose a sign change of some function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `g` at both ends and returns the bracket if they enclose a sign change.
    pub fn new<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> Option<Self> {
        Self::from_values(lo, hi, g(lo), g(hi))
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Option<Self> {
        let valid = lo <= hi && f_lo.is_finite() && f_hi.is_finite() && f_lo * f_hi <= 0.0;
        valid.then_some(Self { lo, hi, f_lo, f_hi })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub tol_x: f64,
    pub tol_f: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_x: 1e-12,
            tol_f: 1e-12,
            max_iter: 200,
        }
    }
}

/// Polishes a root inside `b` with Brent's method (inverse quadratic and secant
/// steps, bisection whenever those misbehave). Iterates never leave the bracket.
pub fn refine_root<G: Fn(f64) -> f64>(
    g: G,
    b: Bracket,
    opts: &RootOptions,
) -> Result<f64, NumericsError> {
    if !(b.f_lo * b.f_hi <= 0.0) || b.lo > b.hi {
        return Err(NumericsError::InvalidBracket(b));
    }
    if b.f_lo == 0.0 {
        return Ok(b.lo);
    }
    if b.f_hi == 0.0 {
        return Ok(b.hi);
    }

    // `xb` is the current best estimate, `xa` the previous one and `xc` the
    // point keeping the sign change with `xb`.
    let (mut xa, mut fa) = (b.lo, b.f_lo);
    let (mut xb, mut fb) = (b.hi, b.f_hi);
    let (mut xc, mut fc) = (xa, fa);
    let mut step = xb - xa;
    let mut prev_step = step;

    for _ in 0..opts.max_iter {
        if fb.abs() <= opts.tol_f {
            return Ok(xb);
        }
        if fb * fc > 0.0 {
            xc = xa;
            fc = fa;
            step = xb - xa;
            prev_step = step;
        }
        if fc.abs() < fb.abs() {
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * xb.abs() + 0.5 * opts.tol_x;
        let half = 0.5 * (xc - xb);
        if half.abs() <= tol1 {
            return Ok(xb);
        }

        if prev_step.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if xa == xc {
                // secant
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (xb - xa) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            let bound_interp = 3.0 * half * q - (tol1 * q).abs();
            let bound_prev = (prev_step * q).abs();
            if 2.0 * p < bound_interp.min(bound_prev) {
                prev_step = step;
                step = p / q;
            } else {
                step = half;
                prev_step = step;
            }
        } else {
            step = half;
            prev_step = step;
        }

        xa = xb;
        fa = fb;
        if step.abs() > tol1 {
            xb += step;
        } else {
            xb += tol1.copysign(half);
        }
        fb = g(xb);
        if !fb.is_finite() {
            let (lo, hi) = (xb.min(xc), xb.max(xc));
            return Err(NumericsError::NonFinite { at: xb, last: Bracket { lo, hi, f_lo: fb, f_hi: fc } });
        }
    }

    if fb * fc > 0.0 {
        xc = xa;
        fc = fa;
    }
    let (lo, hi, f_lo, f_hi) = if xb <= xc { (xb, xc, fb, fc) } else { (xc, xb, fc, fb) };
    Err(NumericsError::NoConvergence {
        iterations: opts.max_iter,
        last: Bracket { lo, hi, f_lo, f_hi },
    })
}

/// Number of step halvings tried around a suspected grazing point.
pub const GRAZING_REFINEMENTS: u32 = 10;

/// Walks forward from `start` in steps of `initial_step` and returns the first
/// sign change of `g` on `(start, start + max_span]`.
///
/// A sample whose `|g|` is a discrete local minimum without a sign change may
/// hide a thin dip through zero. Such intervals are re-scanned with the step
/// halved repeatedly, down to `initial_step / 2^10`, before moving on. A
/// non-finite value of `g` stops the scan.
pub fn scan_first_bracket<G: Fn(f64) -> f64>(
    g: G,
    start: f64,
    initial_step: f64,
    max_span: f64,
) -> Option<Bracket> {
    if !(initial_step > 0.0) || !(max_span > 0.0) {
        return None;
    }
    let end = start + max_span;
    let n_steps = (max_span / initial_step).ceil() as usize;
    let at = |i: usize| if i >= n_steps { end } else { start + i as f64 * initial_step };

    let mut t_prev = start;
    let mut g_prev = g(start);
    if !g_prev.is_finite() {
        return None;
    }
    // (t, g) of the sample before `t_prev`, for local-minimum detection
    let mut before: Option<(f64, f64)> = None;

    for i in 1..=n_steps {
        let t = at(i);
        let gt = g(t);
        if !gt.is_finite() {
            return None;
        }
        if g_prev == 0.0 && t_prev > start {
            return Bracket::from_values(t_prev, t_prev, g_prev, g_prev);
        }
        if gt == 0.0 || (g_prev != 0.0 && g_prev.signum() != gt.signum()) {
            return Bracket::from_values(t_prev, t, g_prev, gt);
        }
        if let Some((t_before, g_before)) = before {
            let dip = g_prev.abs() <= g_before.abs() && g_prev.abs() <= gt.abs();
            if dip {
                if let Some(b) = rescan_dip(&g, t_before, g_before, t, initial_step) {
                    return Some(b);
                }
            }
        }
        before = Some((t_prev, g_prev));
        t_prev = t;
        g_prev = gt;
    }
    None
}

fn rescan_dip<G: Fn(f64) -> f64>(g: &G, lo: f64, g_lo: f64, hi: f64, step: f64) -> Option<Bracket> {
    let mut h = step;
    for _ in 0..GRAZING_REFINEMENTS {
        h *= 0.5;
        let n = ((hi - lo) / h).round().max(2.0) as usize;
        let dt = (hi - lo) / n as f64;
        let (mut tp, mut gp) = (lo, g_lo);
        for j in 1..=n {
            let t = if j == n { hi } else { lo + j as f64 * dt };
            let gt = g(t);
            if !gt.is_finite() {
                return None;
            }
            if gt == 0.0 || gp.signum() != gt.signum() {
                return Bracket::from_values(tp, t, gp, gt);
            }
            tp = t;
            gp = gt;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RootOptions {
        RootOptions::default()
    }

    #[test]
    fn quadratic_root() {
        let g = |x: f64| x * x - 4.0;
        let b = Bracket::new(g, 0.0, 3.0).unwrap();
        let r = refine_root(g, b, &opts()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_root() {
        let g = |x: f64| x;
        let r = refine_root(g, Bracket::new(g, -1.0, 1.0).unwrap(), &opts()).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn cosine_root_matches_scan_oracle() {
        // oracle: dense scan for the sign change, then plain bisection to 1e-15
        let g = |x: f64| x.cos();
        let n = 100_000;
        let (mut lo, mut hi) = (1.0, 2.0);
        for i in 0..n {
            let a = 1.0 + i as f64 / n as f64;
            let b = 1.0 + (i + 1) as f64 / n as f64;
            if g(a) * g(b) <= 0.0 {
                lo = a;
                hi = b;
                break;
            }
        }
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if g(lo) * g(m) <= 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let r = refine_root(g, Bracket::new(g, 1.0, 2.0).unwrap(), &opts()).unwrap();
        assert!((r - oracle).abs() < 1e-12, "{r} vs {oracle}");
    }

    #[test]
    fn invalid_bracket_is_rejected() {
        assert!(Bracket::new(|x: f64| x * x + 1.0, -1.0, 1.0).is_none());
        let bogus = Bracket { lo: 0.0, hi: 1.0, f_lo: 1.0, f_hi: 1.0 };
        assert!(matches!(
            refine_root(|x| x, bogus, &opts()),
            Err(NumericsError::InvalidBracket(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_last_bracket() {
        let g = |x: f64| x.powi(3) - 2.0 * x - 5.0;
        let b = Bracket::new(g, 2.0, 3.0).unwrap();
        let tight = RootOptions { tol_x: 0.0, tol_f: 0.0, max_iter: 2 };
        match refine_root(g, b, &tight) {
            Err(NumericsError::NoConvergence { last, .. }) => {
                assert!(last.contains(2.094_551_481_542_326_5));
                assert!(last.lo >= 2.0 && last.hi <= 3.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn scan_finds_simple_crossing() {
        let b = scan_first_bracket(|t| t - 1.0, 0.0, 0.1, 5.0).unwrap();
        assert!(b.contains(1.0));
    }

    #[test]
    fn scan_without_root() {
        assert!(scan_first_bracket(|_| 1.0, 0.0, 0.1, 5.0).is_none());
    }

    #[test]
    fn scan_returns_earliest_crossing() {
        // dense-scan oracle: first sign change of (t-0.5)(t-0.7) on a 1e-5 grid
        let g = |t: f64| (t - 0.5) * (t - 0.7);
        let oracle = (1..200_000)
            .map(|i| i as f64 * 1e-5)
            .find(|&t| g(t - 1e-5) * g(t) <= 0.0)
            .unwrap();
        assert!((oracle - 0.5).abs() < 2e-5);
        let b = scan_first_bracket(g, 0.0, 0.1, 2.0).unwrap();
        assert!(b.contains(0.5) && !b.contains(0.7));
    }

    #[test]
    fn scan_catches_thin_dip_between_samples() {
        // dips below zero on (0.949, 0.951) only; coarse samples at 0.9 and 1.0 are positive
        let g = |t: f64| (t - 0.95).powi(2) - 1e-6;
        let b = scan_first_bracket(g, 0.0, 0.1, 2.0).unwrap();
        assert!(b.contains(0.949));
    }

    #[test]
    fn scan_never_reports_before_start() {
        let g = |t: f64| (t - 0.3).sin();
        let b = scan_first_bracket(g, 1.0, 0.25, 10.0).unwrap();
        assert!(b.lo >= 1.0);
        assert!(b.contains(0.3 + std::f64::consts::PI));
    }
}
