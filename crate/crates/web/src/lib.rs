//! Browser bindings for the demo page in `www/`. Each export is a thin
//! wrapper over a plain function in [`ops`] so the logic is testable natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

pub mod ops {
    use fdp_equicorr::asymptotics::{law_for_regime, MixtureCdf, Regime};
    use fdp_equicorr::experiment::{run, ExperimentConfig, Mode};
    use fdp_equicorr::model::{ModelParams, RhoSequence};
    use fdp_equicorr::oracle::oracle_law;
    use fdp_equicorr::procedures::ThresholdProcedure;

    /// Upper bound on `m * replicates` per call, to keep the page responsive.
    pub const MAX_WORK: usize = 20_000_000;

    type Result<T> = std::result::Result<T, String>;

    fn cdf(pi0: f64, mu: f64) -> Result<MixtureCdf> {
        MixtureCdf::new(pi0, mu).map_err(|e| e.to_string())
    }

    /// `[t*, q(t*), c(T), σ²(T)]` for BH at level `alpha`.
    pub fn fixed_point(pi0: f64, mu: f64, alpha: f64) -> Result<Vec<f64>> {
        let law = law_for_regime(
            &cdf(pi0, mu)?,
            &ThresholdProcedure::Bh { alpha },
            Regime::CaseI { theta: 0.0 },
        )
        .map_err(|e| e.to_string())?;
        Ok(vec![law.t_star, law.center, law.c_t, law.sigma2_t])
    }

    /// `G(t)` at each `t`.
    pub fn g_curve(pi0: f64, mu: f64, ts: &[f64]) -> Result<Vec<f64>> {
        let cdf = cdf(pi0, mu)?;
        Ok(ts.iter().map(|&t| cdf.g(t)).collect())
    }

    /// Case (i) variance `σ²(T) + θc(T)²` at each `θ`.
    pub fn variance_vs_theta(pi0: f64, mu: f64, alpha: f64, thetas: &[f64]) -> Result<Vec<f64>> {
        let fp = fixed_point(pi0, mu, alpha)?;
        let (c, sigma2) = (fp[2], fp[3]);
        thetas
            .iter()
            .map(|&theta| {
                if theta < -1.0 {
                    Err(format!("theta = {theta} is below -1"))
                } else {
                    Ok(sigma2 + theta * c * c)
                }
            })
            .collect()
    }

    /// Limit variance of `√m(FDP - π₀α)` after the oracle transform at
    /// fixed `rho`.
    pub fn oracle_variance(pi0: f64, mu: f64, alpha: f64, rho: f64) -> Result<f64> {
        let base = ModelParams::new(2, pi0, mu, rho).map_err(|e| e.to_string())?;
        oracle_law(&base, alpha)
            .map(|law| law.variance)
            .map_err(|e| e.to_string())
    }

    /// Per-replicate FDP of BH. `rho = 0` is independence; `rho` in (0, 1)
    /// is fixed correlation, optionally through the oracle transform.
    #[allow(clippy::too_many_arguments)]
    pub fn simulate_fdp(
        m: usize,
        pi0: f64,
        mu: f64,
        alpha: f64,
        rho: f64,
        oracle: bool,
        replicates: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        if m.saturating_mul(replicates) > MAX_WORK {
            return Err(format!("m * replicates must stay below {MAX_WORK}"));
        }
        let rho_seq = if rho == 0.0 {
            RhoSequence::ThetaOverM { theta: 0.0 }
        } else {
            RhoSequence::Fixed { rho }
        };
        let config = ExperimentConfig {
            m,
            pi0,
            mu,
            rho_seq,
            mode: if oracle { Mode::Oracle } else { Mode::Plain },
            procedure: ThresholdProcedure::Bh { alpha },
            replicates,
            seed,
            m_grid: None,
        };
        run(&config)
            .map(|s| s.per_replicate_fdp)
            .map_err(|e| e.to_string())
    }

    /// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; values
    /// outside are clamped into the end bins.
    pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u32> {
        let mut counts = vec![0u32; bins];
        if bins == 0 || !(hi > lo) {
            return counts;
        }
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let i = ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
            counts[i] += 1;
        }
        counts
    }
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn version() -> String {
    fdp_equicorr::VERSION.to_string()
}

#[wasm_bindgen]
pub fn fixed_point(pi0: f64, mu: f64, alpha: f64) -> Result<Vec<f64>, JsError> {
    js(ops::fixed_point(pi0, mu, alpha))
}

#[wasm_bindgen]
pub fn g_curve(pi0: f64, mu: f64, ts: Vec<f64>) -> Result<Vec<f64>, JsError> {
    js(ops::g_curve(pi0, mu, &ts))
}

#[wasm_bindgen]
pub fn variance_vs_theta(
    pi0: f64,
    mu: f64,
    alpha: f64,
    thetas: Vec<f64>,
) -> Result<Vec<f64>, JsError> {
    js(ops::variance_vs_theta(pi0, mu, alpha, &thetas))
}

#[wasm_bindgen]
pub fn oracle_variance(pi0: f64, mu: f64, alpha: f64, rho: f64) -> Result<f64, JsError> {
    js(ops::oracle_variance(pi0, mu, alpha, rho))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_fdp(
    m: usize,
    pi0: f64,
    mu: f64,
    alpha: f64,
    rho: f64,
    oracle: bool,
    replicates: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    js(ops::simulate_fdp(
        m,
        pi0,
        mu,
        alpha,
        rho,
        oracle,
        replicates,
        seed as u64,
    ))
}

#[wasm_bindgen]
pub fn histogram(values: Vec<f64>, lo: f64, hi: f64, bins: usize) -> Vec<u32> {
    ops::histogram(&values, lo, hi, bins)
}
