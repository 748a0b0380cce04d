//! Standard Gaussian special functions.
//!
//! Every function here uses the **upper-tail** convention `Φ(z) = P(Z ≥ z)`.
//! The lower-tail c.d.f. is never exposed. Under this convention the
//! derivative of `Φ` is `-density(z)`; the module only ever hands out the
//! positive density.
//!
//! The `upper_tail*`/`density` functions are the raw kernels used in hot
//! loops. `phi_upper`, `phi_upper_inv` and `std_normal_density` are the
//! checked entry points that reject inputs outside their domain.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// `(2π)^{-1/2}`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Upper-tail probability `P(Z ≥ z)`.
///
/// Infinite arguments map to the limits 0 and 1; NaN propagates.
#[inline]
pub fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn density(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Inverse of [`upper_tail`]: the `z` with `P(Z ≥ z) = t`.
///
/// Returns `+∞` at `t = 0`, `-∞` at `t = 1` and NaN outside `[0, 1]`.
pub fn upper_tail_inv(t: f64) -> f64 {
    if t.is_nan() || !(0.0..=1.0).contains(&t) {
        return f64::NAN;
    }
    if t == 0.0 {
        return f64::INFINITY;
    }
    if t == 1.0 {
        return f64::NEG_INFINITY;
    }
    if t > 0.5 {
        // 1 - t is exact on [0.5, 1].
        return -upper_tail_inv(1.0 - t);
    }
    if t == 0.5 {
        return 0.0;
    }

    // Here t < 0.5, so z > 0 and the tail is evaluated on its accurate side.
    let mut z = -lower_quantile_approx(t);
    for _ in 0..3 {
        let phi = density(z);
        if phi == 0.0 {
            break;
        }
        let err = upper_tail(z) - t;
        let u = err / phi;
        // Halley step for f(z) = Φ(z) - t with f' = -φ, f'' = zφ.
        let step = u / (1.0 - 0.5 * z * u);
        z += step;
        if step.abs() <= 1e-16 * z.abs() {
            break;
        }
    }
    z
}

// Rational approximation of the lower-tail quantile (relative error ~1e-9),
// used only to seed the Halley refinement above.
fn lower_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -lower_quantile_approx(1.0 - p)
    }
}

/// Checked `P(Z ≥ z)`.
pub fn phi_upper(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("phi_upper: non-finite argument {z}")));
    }
    Ok(upper_tail(z))
}

/// Checked inverse of `phi_upper`; requires `t ∈ (0, 1)`.
pub fn phi_upper_inv(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!(
            "phi_upper_inv: probability {t} outside (0, 1)"
        )));
    }
    Ok(upper_tail_inv(t))
}

/// Checked standard normal density.
pub fn std_normal_density(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!(
            "std_normal_density: non-finite argument {z}"
        )));
    }
    Ok(density(z))
}

/// Lower-tail c.d.f. of `N(0, variance)` at `x`, for comparisons against
/// empirical distributions. Expressed through the upper tail.
pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    upper_tail(-x / variance.sqrt())
}
