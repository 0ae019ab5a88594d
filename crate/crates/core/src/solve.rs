//! One-dimensional root finding and maximization.

/// Root of a nondecreasing function on `[lo, hi]` by bisection.
///
/// Assumes `f(lo) ≤ 0 ≤ f(hi)`. Stops when the bracket is narrower than
/// `tol` or stops shrinking in floating point, and returns the endpoint
/// whose value is closer to zero.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    if f_lo >= 0.0 {
        return lo;
    }
    if f_hi <= 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if -f_lo <= f_hi {
        lo
    } else {
        hi
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Returns `(argmax, max)`. Correct for unimodal `f`; for other shapes it
/// still returns the best point it evaluated, endpoints included.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut best = [(a, f(a)), (b, f(b))]
        .into_iter()
        .fold(
            (a, f64::NEG_INFINITY),
            |acc, p| if p.1 > acc.1 { p } else { acc },
        );
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    for p in [(c, fc), (d, fd)] {
        if p.1 > best.1 {
            best = p;
        }
    }
    best
}
