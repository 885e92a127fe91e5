//! Bracketed root finding: bisection to a safe width, one secant polish.
//! Bisection is robust to the non-differentiable profiles the scale module
//! admits; the secant step recovers the last digits on smooth ones.

use crate::error::{Error, Result};

/// Finds x in [lo, hi] with f(x) = target, assuming f is monotone on the
/// bracket.  Converges to `rel_tol` relative on the residual |f(x)-target|.
pub fn bisect_monotone<F: FnMut(f64) -> f64>(
    f: &mut F,
    lo: f64,
    hi: f64,
    target: f64,
    rel_tol: f64,
    what: &str,
) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let fa = f(a) - target;
    let fb = f(b) - target;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        let (flo, fhi) = if fa < fb {
            (fa + target, fb + target)
        } else {
            (fb + target, fa + target)
        };
        return Err(Error::RangeError {
            what: what.to_string(),
            value: target,
            lo: flo,
            hi: fhi,
        });
    }
    let mut va = fa;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let vm = f(mid) - target;
        if vm == 0.0 || (b - a) < 1e-15 * mid.abs().max(1e-12) {
            return Ok(mid);
        }
        if vm.signum() == va.signum() {
            a = mid;
            va = vm;
        } else {
            b = mid;
        }
        if vm.abs() <= rel_tol * target.abs().max(1e-300) && (b - a) < 1e-9 * mid.abs() {
            break;
        }
    }
    // secant polish from the bracket endpoints
    let mut x0 = a;
    let mut x1 = b;
    let mut f0 = f(x0) - target;
    for _ in 0..4 {
        let f1 = f(x1) - target;
        if (f1 - f0).abs() < 1e-300 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= lo && x2 <= hi) {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        if f1.abs() <= rel_tol * target.abs().max(1e-300) {
            break;
        }
    }
    Ok(x1.clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_root_of_decreasing_function() {
        let mut f = |x: f64| 2.0 / x;
        let r = bisect_monotone(&mut f, 1e-8, 1e8, 3.0, 1e-12, "h").unwrap();
        assert_relative_eq!(r, 2.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn reports_range_error_with_bounds() {
        let mut f = |x: f64| x;
        let e = bisect_monotone(&mut f, 1.0, 2.0, 5.0, 1e-12, "id").unwrap_err();
        match e {
            Error::RangeError { lo, hi, .. } => {
                assert_relative_eq!(lo, 1.0);
                assert_relative_eq!(hi, 2.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn handles_kinked_profile() {
        let mut f = |x: f64| if x < 1.0 { 2.0 - x } else { 1.0 / x };
        let r = bisect_monotone(&mut f, 1e-6, 1e6, 0.25, 1e-12, "kink").unwrap();
        assert_relative_eq!(r, 4.0, max_relative = 1e-9);
    }
}
