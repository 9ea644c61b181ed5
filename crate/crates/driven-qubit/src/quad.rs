//! Adaptive Simpson quadrature used by the bath-correlation integrals.

/// Integration failed to reach the requested tolerance within the recursion
/// budget.
#[derive(Debug)]
pub struct QuadratureError {
    pub achieved: f64,
    pub requested: f64,
}

impl std::fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "quadrature did not converge: error estimate {:.3e} exceeds tolerance {:.3e}",
            self.achieved, self.requested
        )
    }
}

impl std::error::Error for QuadratureError {}

const MAX_DEPTH: u32 = 48;

/// ∫_a^b f dx by adaptive Simpson with absolute tolerance `tol`.
///
/// The usual 1/15 Richardson error estimate drives the refinement; an interval
/// that still misses its share of the tolerance at depth 48 aborts the whole
/// integration rather than returning a silently degraded value.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole) / 15.0;
    if err.abs() <= tol || (b - a) < f64::EPSILON * (a.abs() + b.abs()) {
        return Ok(left + right + err);
    }
    if depth == 0 {
        return Err(QuadratureError {
            achieved: err.abs(),
            requested: tol,
        });
    }
    let half_tol = 0.5 * tol;
    Ok(recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}
