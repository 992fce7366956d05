/// Golden-section search for a minimum of `g` on `[lo, hi]`.
///
/// Returns `(x_min, g(x_min))` once the bracket is narrower than `tol`. For a
/// multimodal `g` this is only a local minimum; callers wanting the global one
/// should grid first. Endpoints are candidates too, so monotone functions
/// return the boundary.
pub fn minimize_1d<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let tol = tol.max(f64::EPSILON * a.abs().max(b.abs()));

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a) > tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }

    let mid = 0.5 * (a + b);
    let mut best = (mid, g(mid));
    for x in [lo, hi] {
        let gx = g(x);
        if gx < best.1 {
            best = (x, gx);
        }
    }
    best
}
