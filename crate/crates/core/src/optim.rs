//! Golden-section search on a bracketing interval.
//!
//! Shared by the likelihood maximizer and the release-time optimizer. The
//! interval shrinks by the inverse golden ratio each evaluation, so the
//! number of function calls is logarithmic in the requested tolerance.

/// Inverse golden ratio, (sqrt(5) - 1) / 2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

const MAX_EVALS: u64 = 10_000;

/// Minimizes `f` on `[a, b]`, returning `(x, f(x), evaluations)` once the
/// bracket is narrower than `tol`.
///
/// Ties prefer the left candidate, so plateaus resolve toward smaller `x`.
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64, u64) {
    debug_assert!(a <= b, "bracket must be ordered");
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while b - a > tol && evals < MAX_EVALS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        // A quadratic is flat to machine precision within ~sqrt(eps) of its
        // minimum, so x resolves no tighter than ~1e-8 regardless of tol.
        let (x, fx, _) = golden_min(|x| (x - 3.25) * (x - 3.25) + 1.0, 0.0, 10.0, 1e-9);
        assert!((x - 3.25).abs() < 1e-7, "got {x}");
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn respects_the_bracket() {
        // Minimum of x^2 over [2, 5] sits on the left edge.
        let (x, _, _) = golden_min(|x| x * x, 2.0, 5.0, 1e-9);
        assert!((x - 2.0).abs() < 1e-7, "got {x}");
    }

    #[test]
    fn evaluation_count_is_logarithmic() {
        let (_, _, evals) = golden_min(|x| x.cos(), 0.0, 6.0, 1e-10);
        assert!(evals < 70, "got {evals} evaluations");
    }
}
