//! Bracketing root finder shared by the certainty-equivalent inversion and
//! the market equilibrium solver.

/// Outcome of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    /// `f(root)`.
    pub value: f64,
    pub iterations: u32,
}

/// Reasons a bisection can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BisectFailure {
    /// `f(lo)` and `f(hi)` have the same strict sign.
    NotBracketed { f_lo: f64, f_hi: f64 },
    /// A function evaluation was NaN.
    NonFinite { at: f64 },
}

/// Finds `x` in `[lo, hi]` with `|f(x)| <= f_tol` or an interval narrower
/// than `x_tol`, whichever comes first, within `max_iter` halvings.
///
/// An endpoint that already satisfies `f_tol` is returned immediately, `lo`
/// first. The returned point is always the best (smallest `|f|`) evaluated
/// midpoint or endpoint.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, f_tol: f64, x_tol: f64, max_iter: u32) -> Result<Bisection, BisectFailure>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    if f_lo.is_nan() {
        return Err(BisectFailure::NonFinite { at: lo });
    }
    if f_lo.abs() <= f_tol {
        return Ok(Bisection { root: lo, value: f_lo, iterations: 0 });
    }
    let f_hi = f(hi);
    if f_hi.is_nan() {
        return Err(BisectFailure::NonFinite { at: hi });
    }
    if f_hi.abs() <= f_tol {
        return Ok(Bisection { root: hi, value: f_hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(BisectFailure::NotBracketed { f_lo, f_hi });
    }

    let mut best = if f_lo.abs() <= f_hi.abs() {
        Bisection { root: lo, value: f_lo, iterations: 0 }
    } else {
        Bisection { root: hi, value: f_hi, iterations: 0 }
    };
    for iter in 1..=max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(BisectFailure::NonFinite { at: mid });
        }
        if f_mid.abs() < best.value.abs() {
            best = Bisection { root: mid, value: f_mid, iterations: iter };
        }
        best.iterations = iter;
        if f_mid.abs() <= f_tol || (hi - lo) <= x_tol {
            return Ok(best);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 0.0, 200).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_root_returned_first() {
        let r = bisect(|_| 0.0, 1.0, 3.0, 1e-12, 0.0, 10).unwrap();
        assert_eq!(r.root, 1.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn rejects_unbracketed() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 50).unwrap_err();
        assert!(matches!(err, BisectFailure::NotBracketed { .. }));
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| 3.0 - x, 0.0, 10.0, 1e-12, 0.0, 200).unwrap();
        assert!((r.root - 3.0).abs() < 1e-10);
    }
}
