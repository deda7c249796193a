//! Crate-internal scalar root bracketing and bisection.
//!
//! All transcendental equations in this crate are solved the same way:
//! bracket a sign change by scanning with a small fixed step, then bisect
//! the bracket down to absolute width `1e-12`. Bisection is slower than
//! Newton but has no divergence cases, which matters when these solvers run
//! unattended inside tuning sweeps.

/// Absolute interval width at which bisection stops.
pub(crate) const BISECT_TOL: f64 = 1e-12;

/// Default scan step (radians) used to bracket roots of the frequency
/// equations.
pub(crate) const SCAN_STEP: f64 = 0.01;

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change, down to an
/// interval of width `tol`; returns the midpoint of the final interval.
pub(crate) fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    debug_assert!(
        f_lo * f(hi) <= 0.0,
        "bisect requires a bracketing interval [{lo}, {hi}]"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans `[lo, hi]` with the given step and returns up to `max_roots` roots
/// of `f`, each refined by bisection. Roots closer together than `step` can
/// be missed; callers that need such roots rescan with a finer step.
pub(crate) fn scan_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    step: f64,
    max_roots: usize,
) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(x_prev);
    while x_prev < hi && roots.len() < max_roots {
        let x_next = (x_prev + step).min(hi);
        let f_next = f(x_next);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if f_prev * f_next < 0.0 {
            roots.push(bisect(&mut f, x_prev, x_next, BISECT_TOL));
        }
        x_prev = x_next;
        f_prev = f_next;
        if x_prev >= hi {
            break;
        }
    }
    roots
}
