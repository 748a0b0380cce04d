//! The equi-correlated Gaussian testing model and its O(m) sampler.
//!
//! Statistics are `X_i = τ_i + Y_i` where `Y` is an exchangeable Gaussian
//! vector with unit variances and pairwise covariance `ρ`. The sampler uses
//! the factor form
//!
//! ```text
//! X_i = √(1-ρ)(ξ_i - ξ̄) + √((1+(m-1)ρ)/m) U + μ 1{i is an alternative}
//! ```
//!
//! with `ξ_1..ξ_m, U` i.i.d. standard normal, which is exact on the whole
//! admissible range `ρ ∈ [-1/(m-1), 1]`.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::upper_tail;

/// Smallest admissible correlation for `m` exchangeable unit-variance
/// variables.
pub fn rho_floor(m: usize) -> f64 {
    -1.0 / (m as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: usize,
    pub pi0: f64,
    pub mu: f64,
    pub rho: f64,
}

impl ModelParams {
    pub fn new(m: usize, pi0: f64, mu: f64, rho: f64) -> Result<Self> {
        let params = Self { m, pi0, mu, rho };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Parameter(format!(
                "m = {} must be at least 2",
                self.m
            )));
        }
        if !(self.pi0 > 0.0 && self.pi0 < 1.0) {
            return Err(Error::Parameter(format!(
                "pi0 = {} outside (0, 1)",
                self.pi0
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Parameter(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        let floor = rho_floor(self.m);
        // θ/m style inputs can land an ulp below the floor.
        if !(self.rho >= floor * (1.0 + 4.0 * f64::EPSILON) && self.rho <= 1.0) {
            return Err(Error::Parameter(format!(
                "rho = {} outside [{floor}, 1] for m = {}",
                self.rho, self.m
            )));
        }
        let m0 = self.m0();
        if m0 == 0 || m0 >= self.m {
            return Err(Error::Parameter(format!(
                "floor(m * pi0) = {m0} leaves a hypothesis group empty (m = {})",
                self.m
            )));
        }
        Ok(())
    }

    /// Number of true nulls, `⌊m π₀⌋`.
    pub fn m0(&self) -> usize {
        (self.m as f64 * self.pi0).floor() as usize
    }

    pub fn with_m(&self, m: usize) -> Self {
        Self { m, ..*self }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..*self }
    }
}

/// How `ρ_m` depends on `m`. The variant fixes the asymptotic regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoSequence {
    /// `ρ_m = θ/m`, so `mρ_m = θ` exactly.
    ThetaOverM { theta: f64 },
    /// `ρ_m = c m^{-γ}` with `0 < γ < 1`.
    PowerLaw { c: f64, gamma: f64 },
    /// `ρ_m = ρ` for every `m`.
    Fixed { rho: f64 },
}

impl RhoSequence {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RhoSequence::ThetaOverM { theta } if !(theta >= -1.0 && theta.is_finite()) => Err(
                Error::Parameter(format!("theta = {theta} must be finite and >= -1")),
            ),
            RhoSequence::PowerLaw { c, gamma }
                if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma < 1.0) =>
            {
                Err(Error::Parameter(format!(
                    "power law needs c > 0 and gamma in (0, 1); got c = {c}, gamma = {gamma}"
                )))
            }
            RhoSequence::Fixed { rho } if !(rho > 0.0 && rho < 1.0) => Err(Error::Parameter(
                format!("fixed rho = {rho} outside (0, 1)"),
            )),
            _ => Ok(()),
        }
    }

    pub fn rho_at(&self, m: usize) -> f64 {
        let mf = m as f64;
        match *self {
            RhoSequence::ThetaOverM { theta } => theta / mf,
            RhoSequence::PowerLaw { c, gamma } => c * mf.powf(-gamma),
            RhoSequence::Fixed { rho } => rho,
        }
    }
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// ChaCha8 keyed by `seed` on stream `stream_id`. The output is
    /// platform independent.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Clamps a p-value that rounded onto an endpoint back into `(0, 1)`.
#[inline]
pub(crate) fn clamp_open_unit(p: f64) -> f64 {
    const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
    if p <= 0.0 {
        f64::MIN_POSITIVE
    } else if p >= 1.0 {
        BELOW_ONE
    } else {
        p
    }
}

/// One realization of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `true` for an alternative (`τ_i = μ`).
    pub tau: Vec<bool>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl Sample {
    /// Builds a sample from statistics, computing `p_i = Φ(x_i)`.
    pub fn from_statistics(tau: Vec<bool>, x: Vec<f64>) -> Result<Self> {
        if tau.len() != x.len() {
            return Err(Error::Parameter("tau and x lengths differ".into()));
        }
        let p = x
            .iter()
            .map(|&xi| clamp_open_unit(upper_tail(xi)))
            .collect();
        Ok(Self { tau, x, p })
    }

    /// Builds a sample from p-values directly; `x` is recovered by inversion.
    pub fn from_p_values(tau: Vec<bool>, p: Vec<f64>) -> Result<Self> {
        if tau.len() != p.len() {
            return Err(Error::Parameter("tau and p lengths differ".into()));
        }
        if let Some(bad) = p.iter().find(|&&pi| !(pi > 0.0 && pi < 1.0)) {
            return Err(Error::Parameter(format!("p-value {bad} outside (0, 1)")));
        }
        let x = p
            .iter()
            .map(|&pi| crate::gauss::upper_tail_inv(pi))
            .collect();
        Ok(Self { tau, x, p })
    }

    pub fn m(&self) -> usize {
        self.tau.len()
    }

    pub fn m0(&self) -> usize {
        self.tau.iter().filter(|&&alt| !alt).count()
    }

    /// Writes the debugging dump `index,tau,x,p` (tau is 1 for alternatives).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,tau,x,p")?;
        for (i, ((&alt, &x), &p)) in self.tau.iter().zip(&self.x).zip(&self.p).enumerate() {
            writeln!(out, "{i},{},{x:e},{p:e}", u8::from(alt))?;
        }
        Ok(())
    }
}

/// Draws one sample. Nulls occupy indices `0..m0`.
pub fn sample(params: &ModelParams, stream: RngStream) -> Result<Sample> {
    params.validate()?;
    let mut rng = stream.rng();
    Ok(sample_with(params, &mut rng))
}

pub(crate) fn sample_with<R: rand::Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Sample {
    let m = params.m;
    let m0 = params.m0();
    let rho = params.rho;

    let mut xi: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let u: f64 = StandardNormal.sample(rng);
    let xi_bar = xi.iter().sum::<f64>() / m as f64;

    let idio = (1.0 - rho).max(0.0).sqrt();
    // 1 + (m-1)ρ is pure rounding noise at the floor ρ = -1/(m-1)
    let spread = 1.0 + (m as f64 - 1.0) * rho;
    let spread = if spread < 4.0 * f64::EPSILON {
        0.0
    } else {
        spread
    };
    let common = (spread / m as f64).sqrt() * u;

    let tau: Vec<bool> = (0..m).map(|i| i >= m0).collect();
    for (xi_i, &alt) in xi.iter_mut().zip(&tau) {
        let shift = if alt { params.mu } else { 0.0 };
        *xi_i = idio * (*xi_i - xi_bar) + common + shift;
    }
    let p = xi.iter().map(|&x| clamp_open_unit(upper_tail(x))).collect();
    Sample { tau, x: xi, p }
}

/// Right-continuous empirical c.d.f. stored as its sorted jump locations.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jumps: Vec<f64>,
}

impl StepFunction {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_unstable_by(f64::total_cmp);
        Self { jumps: values }
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// `#{v ≤ t}`.
    pub fn count_le(&self, t: f64) -> usize {
        self.jumps.partition_point(|&v| v <= t)
    }

    /// Value at `t`; an empty function evaluates to 0.
    pub fn eval(&self, t: f64) -> f64 {
        if self.jumps.is_empty() {
            return 0.0;
        }
        self.count_le(t) as f64 / self.jumps.len() as f64
    }
}

/// The null, alternative and pooled e.c.d.f.s of a sample's p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfTriple {
    pub null: StepFunction,
    pub alt: StepFunction,
    pub all: StepFunction,
}

impl EcdfTriple {
    /// Pooled value rebuilt from the group functions,
    /// `(m0/m) Ĝ₀ + ((m-m0)/m) Ĝ₁`, via integer counts.
    pub fn mixture_eval(&self, t: f64) -> f64 {
        let m = self.null.len() + self.alt.len();
        (self.null.count_le(t) + self.alt.count_le(t)) as f64 / m as f64
    }
}

pub fn ecdf_triple(sample: &Sample) -> EcdfTriple {
    let (null, alt): (Vec<_>, Vec<_>) = sample
        .tau
        .iter()
        .zip(&sample.p)
        .partition(|(&is_alt, _)| !is_alt);
    EcdfTriple {
        null: StepFunction::new(null.into_iter().map(|(_, &p)| p).collect()),
        alt: StepFunction::new(alt.into_iter().map(|(_, &p)| p).collect()),
        all: StepFunction::new(sample.p.clone()),
    }
}
