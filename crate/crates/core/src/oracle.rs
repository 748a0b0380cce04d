//! Oracle re-standardization for a fixed correlation `ρ ∈ (0, 1)`.
//!
//! With `π₀`, `μ` and `ρ` known, the statistics
//! `X̃_i = √(m/((m-1)(1-ρ))) (X_i - X̄ + (1-π₀)μ)` have unit variances and
//! equi-correlation `-1/(m-1)`, which puts BH back on the `√m` regime with
//! `θ = -1` and alternative shift `μ̃ = μ(1-ρ)^{-1/2}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{law_for_regime, t_star_bh, AsymptoticLaw, MixtureCdf, Regime};
use crate::error::{Error, Result};
use crate::gauss::upper_tail_inv;
use crate::model::{rho_floor, ModelParams, Sample};
use crate::procedures::ThresholdProcedure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub base: ModelParams,
}

impl OracleParams {
    pub fn new(base: ModelParams) -> Result<Self> {
        base.validate()?;
        if !(base.rho > 0.0 && base.rho < 1.0) {
            return Err(Error::Parameter(format!(
                "oracle transform needs rho in (0, 1), got {}",
                base.rho
            )));
        }
        Ok(Self { base })
    }

    /// Limiting alternative shift `μ(1-ρ)^{-1/2}`.
    pub fn mu_tilde(&self) -> f64 {
        self.base.mu / (1.0 - self.base.rho).sqrt()
    }

    pub fn rho_tilde(&self) -> f64 {
        rho_floor(self.base.m)
    }

    /// `√(m/((m-1)(1-ρ)))`.
    pub fn scale(&self) -> f64 {
        let m = self.base.m as f64;
        (m / ((m - 1.0) * (1.0 - self.base.rho))).sqrt()
    }

    /// Model followed exactly by the transformed statistics at this `m`:
    /// shift `scale·μ` and correlation `-1/(m-1)`.
    pub fn transformed_params(&self) -> ModelParams {
        ModelParams {
            mu: self.scale() * self.base.mu,
            rho: self.rho_tilde(),
            ..self.base
        }
    }

    /// Mixture c.d.f. used by the limit law (limiting shift `μ̃`).
    pub fn limit_cdf(&self) -> MixtureCdf {
        MixtureCdf {
            pi0: self.base.pi0,
            mu: self.mu_tilde(),
        }
    }
}

/// Applies the oracle transform; truth labels are carried over unchanged.
pub fn transform(sample: &Sample, params: &OracleParams) -> Result<Sample> {
    let m = sample.m();
    if m != params.base.m {
        return Err(Error::Parameter(format!(
            "sample has m = {m} but oracle parameters have m = {}",
            params.base.m
        )));
    }
    let x_bar = sample.x.iter().sum::<f64>() / m as f64;
    let shift = (1.0 - params.base.pi0) * params.base.mu - x_bar;
    let scale = params.scale();
    let x = sample.x.iter().map(|&x| scale * (x + shift)).collect();
    Sample::from_statistics(sample.tau.clone(), x)
}

/// Fixed point of `π₀t + (1-π₀)Φ(Φ⁻¹(t) - μ̃) = t/α`.
pub fn t_star_rho(base: &ModelParams, alpha: f64) -> Result<f64> {
    let params = OracleParams::new(*base)?;
    t_star_bh(&params.limit_cdf(), alpha)
}

/// `π₀α²(1-t)/t - π₀²α²/(2πt²) e^{-(Φ⁻¹(t))²}` at `t = t*_ρ`.
pub fn oracle_closed_form_variance(pi0: f64, alpha: f64, t_star: f64) -> f64 {
    let z = upper_tail_inv(t_star);
    let a2 = alpha * alpha;
    pi0 * a2 * (1.0 - t_star) / t_star
        - pi0 * pi0 * a2 / (2.0 * PI * t_star * t_star) * (-z * z).exp()
}

/// Limit law of `√m(FDP̃ - π₀α)`: the generic pipeline at `θ = -1` on the
/// `μ̃`-mixture, cross-checked against the direct formula.
pub fn oracle_law(base: &ModelParams, alpha: f64) -> Result<AsymptoticLaw> {
    let params = OracleParams::new(*base)?;
    let law = law_for_regime(
        &params.limit_cdf(),
        &ThresholdProcedure::Bh { alpha },
        Regime::CaseI { theta: -1.0 },
    )?;
    let direct = oracle_closed_form_variance(base.pi0, alpha, law.t_star);
    if ((law.variance - direct) / direct).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "oracle variance mismatch: pipeline {} vs direct {direct}",
            law.variance
        )));
    }
    Ok(law)
}
