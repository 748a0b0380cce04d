//! Bracketed scalar root finding: bisection with a safeguarded secant step.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once `|f(x)| <= f_abs`.
    pub f_abs: f64,
    /// Stop once the bracket is narrower than `x_abs + x_rel * |x|`.
    pub x_abs: f64,
    pub x_rel: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            f_abs: 0.0,
            x_abs: 0.0,
            x_rel: 4.0 * f64::EPSILON,
            max_iter: 400,
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs (or one of them is zero).
///
/// Each iteration tries the secant point of the current bracket and falls
/// back to the midpoint whenever the secant point lands in the outer quarters
/// of the bracket or fails to shrink it by half over two steps.
pub fn find_root<F>(mut f: F, mut lo: f64, mut hi: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) {
        return Err(Error::Numerical(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Numerical("objective is NaN at a bracket end".into()));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }

    let mut width_before = hi - lo;
    for iter in 0..tol.max_iter {
        let width = hi - lo;
        let quarter = 0.25 * width;
        let secant = lo - f_lo * width / (f_hi - f_lo);
        let use_secant = secant.is_finite()
            && secant > lo + quarter
            && secant < hi - quarter
            && (iter < 2 || width <= 0.5 * width_before);
        let x = if use_secant { secant } else { lo + 0.5 * width };
        if x <= lo || x >= hi {
            // lo and hi are adjacent floats
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        if iter % 2 == 1 {
            width_before = width;
        }

        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Numerical(format!("objective is NaN at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }

        let best = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
        let f_best = f_lo.abs().min(f_hi.abs());
        if f_best <= tol.f_abs || hi - lo <= tol.x_abs + tol.x_rel * best.abs() {
            return Ok(best);
        }
    }
    Err(Error::Numerical(format!(
        "root not isolated after {} iterations; bracket [{lo}, {hi}]",
        tol.max_iter
    )))
}
