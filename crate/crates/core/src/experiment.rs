//! Replicated Monte Carlo runs of sample → threshold → FDP, compared with
//! the asymptotic law.
//!
//! Replicate `r` always draws from stream `r` of the configured seed and the
//! results are folded in replicate order, so a summary depends only on its
//! configuration and never on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{asymptotic_law, law_for_regime, AsymptoticLaw, MixtureCdf, Regime};
use crate::error::{Error, Result};
use crate::gauss::normal_cdf;
use crate::model::{ecdf_triple, sample, ModelParams, RhoSequence, RngStream};
use crate::oracle::{oracle_law, transform, OracleParams};
use crate::procedures::{apply, RejectionResult, ThresholdProcedure};
use crate::stats;

/// Below this many replicates no diagnostic (ratio, KS, SE) is reported.
pub const MIN_REPLICATES_FOR_DIAGNOSTICS: usize = 100;

/// Floor of the relative variance tolerance.
pub const VARIANCE_TOL_FLOOR: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Plain,
    /// Apply the oracle transform before thresholding (needs fixed `ρ`).
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub pi0: f64,
    pub mu: f64,
    pub rho_seq: RhoSequence,
    pub mode: Mode,
    pub procedure: ThresholdProcedure,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<usize>>,
}

impl ExperimentConfig {
    /// Model parameters at the configured `m`.
    pub fn model_params(&self) -> Result<ModelParams> {
        self.params_at(self.m)
    }

    pub fn params_at(&self, m: usize) -> Result<ModelParams> {
        self.rho_seq.validate()?;
        ModelParams::new(m, self.pi0, self.mu, self.rho_seq.rho_at(m))
    }

    pub fn with_m(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.procedure.validate()?;
        if self.replicates == 0 {
            return Err(Error::Parameter("replicates must be positive".into()));
        }
        let params = self.model_params()?;
        if self.mode == Mode::Oracle {
            OracleParams::new(params)?;
        }
        Ok(())
    }

    /// The law the scaled FDP is compared against, or the reason there is
    /// none.
    pub fn law(&self) -> Result<AsymptoticLaw> {
        let params = self.model_params()?;
        match self.mode {
            Mode::Plain => {
                let cdf = MixtureCdf::new(self.pi0, self.mu)?;
                asymptotic_law(&cdf, &self.procedure, &self.rho_seq)
            }
            Mode::Oracle => {
                let oracle = OracleParams::new(params)?;
                match self.procedure {
                    ThresholdProcedure::Bh { alpha } => oracle_law(&params, alpha),
                    _ => law_for_regime(
                        &oracle.limit_cdf(),
                        &self.procedure,
                        Regime::CaseI { theta: -1.0 },
                    ),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub fdp: f64,
    pub scaled_deviation: Option<f64>,
    pub threshold: f64,
    pub rejected: usize,
    pub false_rejections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub m: usize,
    pub rho_m: f64,
    pub replicates: usize,
    pub per_replicate_fdp: Vec<f64>,
    pub scaled_deviations: Option<Vec<f64>>,
    /// `a_m`.
    pub rate: Option<f64>,
    pub center: Option<f64>,
    pub mean_fdp: f64,
    pub var_fdp: Option<f64>,
    pub var_scaled: Option<f64>,
    pub theory_variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub mc_se_variance: Option<f64>,
    pub theory: Option<AsymptoticLaw>,
    /// Why `theory` is absent, when it is.
    pub theory_note: Option<String>,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

/// One tolerance check of a summary against its law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl ExperimentSummary {
    /// Mean, variance and KS checks. Empty when there is no law or too few
    /// replicates.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let r = self.replicates as f64;
        if let (Some(center), Some(var_fdp)) = (self.center, self.var_fdp) {
            if self.replicates >= MIN_REPLICATES_FOR_DIAGNOSTICS {
                let value = (self.mean_fdp - center).abs();
                let bound = 4.0 * (var_fdp / r).sqrt();
                out.push(Check {
                    name: "center".into(),
                    value,
                    bound,
                    passed: value <= bound,
                });
            }
        }
        if let (Some(ratio), Some(se), Some(theory)) = (
            self.variance_ratio,
            self.mc_se_variance,
            self.theory_variance,
        ) {
            let bound = VARIANCE_TOL_FLOOR.max(4.0 * se / theory);
            let value = (ratio - 1.0).abs();
            out.push(Check {
                name: "variance_ratio".into(),
                value,
                bound,
                passed: value <= bound,
            });
        }
        if let Some(ks) = self.ks_statistic {
            let bound = stats::ks_critical_1pct(self.replicates);
            out.push(Check {
                name: "ks".into(),
                value: ks,
                bound,
                passed: ks <= bound,
            });
        }
        out
    }
}

/// Runs one replicate: draw, optionally transform, threshold.
pub fn run_replicate(
    params: &ModelParams,
    mode: Mode,
    procedure: &ThresholdProcedure,
    stream: RngStream,
) -> Result<RejectionResult> {
    let s = sample(params, stream)?;
    match mode {
        Mode::Plain => apply(procedure, &s),
        Mode::Oracle => apply(procedure, &transform(&s, &OracleParams::new(*params)?)?),
    }
}

/// Runs the experiment on the default worker pool.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_with_workers(config, None)
}

/// Runs the experiment with at most `workers` threads (`None`: all cores).
pub fn run_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<ExperimentSummary> {
    config.validate()?;
    let params = config.model_params()?;
    let results = par_map(config.replicates, workers, |r| {
        run_replicate(
            &params,
            config.mode,
            &config.procedure,
            RngStream::new(config.seed, r as u64),
        )
    })?;
    let (law, note) = match config.law() {
        Ok(law) => (Some(law), None),
        Err(e @ Error::Regime(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(summarize(&params, &results, law, note))
}

fn summarize(
    params: &ModelParams,
    results: &[RejectionResult],
    law: Option<AsymptoticLaw>,
    theory_note: Option<String>,
) -> ExperimentSummary {
    let replicates = results.len();
    let fdp: Vec<f64> = results.iter().map(|r| r.fdp).collect();
    let mean_fdp = stats::mean(&fdp);
    let var_fdp = stats::sample_variance(&fdp);

    let rate = law.as_ref().map(|l| l.rate(params.m, params.rho));
    let center = law.as_ref().map(|l| l.center);
    let scaled: Option<Vec<f64>> = rate
        .zip(center)
        .map(|(a, c)| fdp.iter().map(|&f| a * (f - c)).collect());
    let var_scaled = scaled.as_deref().and_then(stats::sample_variance);
    let theory_variance = law.as_ref().map(|l| l.variance);

    let diagnostics = replicates >= MIN_REPLICATES_FOR_DIAGNOSTICS;
    let variance_ratio = var_scaled
        .zip(theory_variance)
        .filter(|_| diagnostics)
        .map(|(v, t)| v / t);
    let mc_se_variance = var_scaled
        .filter(|_| diagnostics)
        .map(|v| v * (2.0 / (replicates as f64 - 1.0)).sqrt());
    let ks_statistic = scaled
        .as_deref()
        .zip(theory_variance)
        .filter(|&(_, v)| diagnostics && v > 0.0)
        .map(|(xs, v)| stats::ks_statistic(xs, |x| normal_cdf(x, v)));

    let records = results
        .iter()
        .enumerate()
        .map(|(i, r)| ReplicateRecord {
            replicate: i,
            fdp: r.fdp,
            scaled_deviation: scaled.as_ref().map(|s| s[i]),
            threshold: r.threshold,
            rejected: r.rejected,
            false_rejections: r.false_rejections,
        })
        .collect();

    ExperimentSummary {
        m: params.m,
        rho_m: params.rho,
        replicates,
        per_replicate_fdp: fdp,
        scaled_deviations: scaled,
        rate,
        center,
        mean_fdp,
        var_fdp,
        var_scaled,
        theory_variance,
        variance_ratio,
        ks_statistic,
        mc_se_variance,
        theory: law,
        theory_note,
        records,
    }
}

/// One row of a rate study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub m: usize,
    pub rho_m: f64,
    pub mean_fdp: f64,
    pub var_fdp: Option<f64>,
    /// `m · var(FDP)`, the `√m`-scaled variance.
    pub var_sqrtm: Option<f64>,
    pub var_scaled: Option<f64>,
    pub theory_variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub ks_statistic: Option<f64>,
}

impl RateRow {
    fn from_summary(s: &ExperimentSummary) -> Self {
        Self {
            m: s.m,
            rho_m: s.rho_m,
            mean_fdp: s.mean_fdp,
            var_fdp: s.var_fdp,
            var_sqrtm: s.var_fdp.map(|v| v * s.m as f64),
            var_scaled: s.var_scaled,
            theory_variance: s.theory_variance,
            variance_ratio: s.variance_ratio,
            ks_statistic: s.ks_statistic,
        }
    }
}

/// Runs the configuration at every `m` of `m_grid`. Grid point `i` uses seed
/// `seed + i` so rows are independent.
pub fn rate_study(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<(RateRow, ExperimentSummary)>> {
    let grid = config
        .m_grid
        .as_deref()
        .ok_or_else(|| Error::Parameter("rate study needs an m grid".into()))?;
    if grid.len() < 3 {
        return Err(Error::Parameter(format!(
            "m grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "m grid must be strictly increasing".into(),
        ));
    }
    grid.iter()
        .enumerate()
        .map(|(i, &m)| {
            let cfg = ExperimentConfig {
                m,
                seed: config.seed.wrapping_add(i as u64),
                m_grid: None,
                ..config.clone()
            };
            let summary = run_with_workers(&cfg, workers)?;
            Ok((RateRow::from_summary(&summary), summary))
        })
        .collect()
}

/// Empirical covariance of `√m(Ĝ₀,m(t) - t)` and `√m(Ĝ₁,m(t) - G₁(t))` over a
/// grid, with bootstrap standard errors. Coordinates are ordered as the
/// null block then the alternative block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCovarianceProbe {
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub covariance: Vec<Vec<f64>>,
    pub bootstrap_se: Vec<Vec<f64>>,
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub fn ecdf_covariance_probe(
    params: &ModelParams,
    grid: &[f64],
    replicates: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<EcdfCovarianceProbe> {
    params.validate()?;
    if grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::Parameter("probe grid must lie in (0, 1)".into()));
    }
    if replicates < 2 {
        return Err(Error::Parameter("probe needs at least 2 replicates".into()));
    }
    let cdf = MixtureCdf::new(params.pi0, params.mu)?;
    let root_m = (params.m as f64).sqrt();
    let rows = par_map(replicates, workers, |r| {
        let s = sample(params, RngStream::new(seed, r as u64))?;
        let e = ecdf_triple(&s);
        let null = grid.iter().map(|&t| root_m * (e.null.eval(t) - t));
        let alt = grid.iter().map(|&t| root_m * (e.alt.eval(t) - cdf.g1(t)));
        Ok(null.chain(alt).collect::<Vec<f64>>())
    })?;
    let covariance = stats::covariance_matrix(&rows);
    // the bootstrap gets its own stream, past every replicate id
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let bootstrap_se = stats::bootstrap_covariance_se(&rows, BOOTSTRAP_RESAMPLES, &mut rng);
    Ok(EcdfCovarianceProbe {
        grid: grid.to_vec(),
        replicates,
        covariance,
        bootstrap_se,
    })
}

/// Maps `f` over `0..n` in index order, in parallel when available.
pub fn par_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let job = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
                .install(job),
            None => job(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        (0..n).map(f).collect()
    }
}
