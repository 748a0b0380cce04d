//! Closed-form asymptotic theory for the FDP of a threshold procedure.
//!
//! For a threshold functional `T` with `t* = T(G)` and derivative measure
//! `Ṫ_G`, the scaled FDP is asymptotically normal around `q(t*) = π₀t*/G(t*)`
//! with variance built from two signed measures `ζ₀` and `ζ₁`:
//!
//! * `c(T) = ∫ φ(Φ⁻¹(t)) ζ₀(dt) + ∫ φ(Φ⁻¹(t) - μ) ζ₁(dt)`
//! * `σ²(T) = π₀⁻¹ ∬ K₀ dζ₀dζ₀ + (1-π₀)⁻¹ ∬ K₁ dζ₁dζ₁`
//!
//! with bridge kernels `K₀(s,t) = s∧t - st` and
//! `K₁(s,t) = G₁(s∧t) - G₁(s)G₁(t)`. When `mρ_m → θ` the variance is
//! `σ²(T) + θc(T)²` at rate `√m`; when `mρ_m → ∞` and `ρ_m → 0` it is
//! `c(T)²` at rate `ρ_m^{-1/2}`.
//!
//! All derivative measures in scope are finite sums of point masses, so
//! every integral above is an exact finite sum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{density, upper_tail, upper_tail_inv};
use crate::model::RhoSequence;
use crate::procedures::ThresholdProcedure;
use crate::root::{find_root, Tolerance};

/// Largest accepted fixed-point residual `|G(t*) - t*/α|`.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-12;

/// Atoms closer than this are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// The p-value mixture c.d.f. `G(t) = π₀t + (1-π₀)G₁(t)` with
/// `G₁(t) = Φ(Φ⁻¹(t) - μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureCdf {
    pub pi0: f64,
    pub mu: f64,
}

impl MixtureCdf {
    pub fn new(pi0: f64, mu: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::Parameter(format!("pi0 = {pi0} outside (0, 1)")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Parameter(format!("mu = {mu} must be positive")));
        }
        Ok(Self { pi0, mu })
    }

    pub fn g1(&self, t: f64) -> f64 {
        upper_tail(upper_tail_inv(t) - self.mu)
    }

    pub fn g(&self, t: f64) -> f64 {
        self.pi0 * t + (1.0 - self.pi0) * self.g1(t)
    }

    /// `G₁'(t) = exp(μΦ⁻¹(t) - μ²/2)`.
    pub fn g1_density(&self, t: f64) -> f64 {
        (self.mu * upper_tail_inv(t) - 0.5 * self.mu * self.mu).exp()
    }

    pub fn g_density(&self, t: f64) -> f64 {
        self.pi0 + (1.0 - self.pi0) * self.g1_density(t)
    }

    /// `q(t) = π₀t/G(t)`, the asymptotic FDP at a fixed threshold.
    pub fn q(&self, t: f64) -> f64 {
        self.pi0 * t / self.g(t)
    }

    /// `q'(t) = π₀(G(t) - tG'(t))/G(t)²`.
    pub fn q_dot(&self, t: f64) -> f64 {
        let g = self.g(t);
        self.pi0 * (g - t * self.g_density(t)) / (g * g)
    }
}

/// `G(t)` for free-standing use.
pub fn g_mixture(cdf: &MixtureCdf, t: f64) -> f64 {
    cdf.g(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// A finite signed measure `Σ w_j δ_{t_j}` on `(0, 1)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiracMixtureMeasure {
    atoms: Vec<Atom>,
}

impl DiracMixtureMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point(location: f64, weight: f64) -> Self {
        let mut m = Self::empty();
        m.add(location, weight);
        m
    }

    /// Adds `weight·δ_location`, merging into an existing atom within
    /// [`ATOM_MERGE_TOL`].
    pub fn add(&mut self, location: f64, weight: f64) {
        debug_assert!(location > 0.0 && location < 1.0, "atom at {location}");
        match self
            .atoms
            .iter_mut()
            .find(|a| (a.location - location).abs() < ATOM_MERGE_TOL)
        {
            Some(atom) => atom.weight += weight,
            None => self.atoms.push(Atom { location, weight }),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut out = Self::empty();
        for atom in &self.atoms {
            out.add(atom.location, a * atom.weight);
        }
        for atom in &other.atoms {
            out.add(atom.location, b * atom.weight);
        }
        out
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(a.location)).sum()
    }

    /// `∬ k(s, t) self(ds) self(dt)`.
    pub fn integrate_kernel<K: Fn(f64, f64) -> f64>(&self, k: K) -> f64 {
        self.atoms
            .iter()
            .flat_map(|a| self.atoms.iter().map(move |b| (a, b)))
            .map(|(a, b)| a.weight * b.weight * k(a.location, b.location))
            .sum()
    }
}

/// The unique `t* ∈ (0,1)` with `G(t*) = t*/α`.
///
/// `t ↦ G(t)/t` is decreasing (G is concave) and blows up at 0, so the
/// crossing is bracketed and solved in `log t`; `t*` can sit far below
/// `1e-14` when `μ` is small and `α` is strict.
pub fn t_star_bh(cdf: &MixtureCdf, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    let inv_alpha = 1.0 / alpha;
    let excess = |t: f64| cdf.g(t) / t - inv_alpha;

    let mut lo = 1e-14f64;
    while excess(lo) <= 0.0 {
        lo *= 1e-10;
        if lo < 1e-300 {
            return Err(Error::Numerical(format!(
                "G(t)/t never exceeds 1/alpha above 1e-300 (pi0 = {}, mu = {}, alpha = {alpha})",
                cdf.pi0, cdf.mu
            )));
        }
    }
    let hi: f64 = 1.0 - 1e-14;
    let tol = Tolerance {
        f_abs: 0.0,
        x_abs: 1e-16,
        x_rel: 2.0 * f64::EPSILON,
        max_iter: 600,
    };
    let log_t = find_root(|u| excess(u.exp()), lo.ln(), hi.ln(), tol)?;
    let t_star = log_t.exp();

    let residual = (cdf.g(t_star) - t_star * inv_alpha).abs();
    if residual > FIXED_POINT_RESIDUAL {
        return Err(Error::Numerical(format!(
            "fixed point residual {residual:e} at t* = {t_star:e}"
        )));
    }
    check_single_crossing(cdf, inv_alpha, lo, t_star)?;
    Ok(t_star)
}

// h(t) = G(t) - t/α must be positive on a grid left of t* and negative right
// of it.
fn check_single_crossing(cdf: &MixtureCdf, inv_alpha: f64, lo: f64, t_star: f64) -> Result<()> {
    const POINTS: usize = 32;
    let h = |t: f64| cdf.g(t) / t - inv_alpha;
    let left_hi = t_star * (1.0 - 1e-6);
    let right_lo = t_star + 1e-6 * (1.0 - t_star);
    for i in 0..POINTS {
        let frac = i as f64 / (POINTS - 1) as f64;
        if left_hi > lo {
            let t = (lo.ln() + frac * (left_hi.ln() - lo.ln())).exp();
            if h(t) <= 0.0 {
                return Err(Error::Numerical(format!(
                    "second crossing left of t* at {t:e}"
                )));
            }
        }
        let t = right_lo + frac * (1.0 - 1e-9 - right_lo);
        if h(t) >= 0.0 {
            return Err(Error::Numerical(format!(
                "second crossing right of t* at {t:e}"
            )));
        }
    }
    Ok(())
}

/// Threshold derivative of BH at `G`: `(1/α - G'(t*))⁻¹ δ_{t*}`.
pub fn bh_derivative_measure(cdf: &MixtureCdf, alpha: f64) -> Result<DiracMixtureMeasure> {
    let t_star = t_star_bh(cdf, alpha)?;
    bh_derivative_at(cdf, alpha, t_star)
}

fn bh_derivative_at(cdf: &MixtureCdf, alpha: f64, t_star: f64) -> Result<DiracMixtureMeasure> {
    let slack = 1.0 / alpha - cdf.g_density(t_star);
    if !(slack > 0.0) {
        return Err(Error::DegenerateCrossing { t_star, slack });
    }
    Ok(DiracMixtureMeasure::point(t_star, 1.0 / slack))
}

/// `T(G)` and `Ṫ_G` for a procedure.
pub fn threshold_at_g(
    cdf: &MixtureCdf,
    procedure: &ThresholdProcedure,
) -> Result<(f64, DiracMixtureMeasure)> {
    procedure.validate()?;
    match *procedure {
        ThresholdProcedure::Bh { alpha } => {
            let t_star = t_star_bh(cdf, alpha)?;
            Ok((t_star, bh_derivative_at(cdf, alpha, t_star)?))
        }
        ThresholdProcedure::FixedThreshold { t } => Ok((t, DiracMixtureMeasure::empty())),
    }
}

/// `ζ₀ = (q(1-q)/t*)δ_{t*} + q'(t*)π₀Ṫ_G` and
/// `ζ₁ = -(q(1-q)/G₁(t*))δ_{t*} + q'(t*)(1-π₀)Ṫ_G`.
pub fn zeta_measures(
    cdf: &MixtureCdf,
    t_star: f64,
    t_deriv: &DiracMixtureMeasure,
) -> Result<(DiracMixtureMeasure, DiracMixtureMeasure)> {
    if !(t_star > 0.0 && t_star < 1.0) {
        return Err(Error::Parameter(format!("t* = {t_star} outside (0, 1)")));
    }
    let q = cdf.q(t_star);
    let q_dot = cdf.q_dot(t_star);
    let spread = q * (1.0 - q);
    let pi0 = cdf.pi0;

    let zeta0 =
        DiracMixtureMeasure::point(t_star, spread / t_star).combine(1.0, t_deriv, q_dot * pi0);
    let zeta1 = DiracMixtureMeasure::point(t_star, -spread / cdf.g1(t_star)).combine(
        1.0,
        t_deriv,
        q_dot * (1.0 - pi0),
    );
    Ok((zeta0, zeta1))
}

/// `c(T)`: pairing of the `ζ`s with the Gaussian densities at `Φ⁻¹(t)` and
/// `Φ⁻¹(t) - μ`.
pub fn c_of_t(zeta0: &DiracMixtureMeasure, zeta1: &DiracMixtureMeasure, mu: f64) -> f64 {
    zeta0.integrate(|t| density(upper_tail_inv(t)))
        + zeta1.integrate(|t| density(upper_tail_inv(t) - mu))
}

/// `σ²(T)` from the bridge kernels (taken with `min(s, t)`).
pub fn sigma2_of_t(
    zeta0: &DiracMixtureMeasure,
    zeta1: &DiracMixtureMeasure,
    cdf: &MixtureCdf,
) -> Result<f64> {
    let k0 = |s: f64, t: f64| s.min(t) - s * t;
    let k1 = |s: f64, t: f64| cdf.g1(s.min(t)) - cdf.g1(s) * cdf.g1(t);
    let value = zeta0.integrate_kernel(k0) / cdf.pi0 + zeta1.integrate_kernel(k1) / (1.0 - cdf.pi0);
    if value < -1e-10 {
        return Err(Error::Numerical(format!(
            "sigma^2(T) = {value:e} is negative; kernel not PSD"
        )));
    }
    Ok(value.max(0.0))
}

/// Asymptotic regime of `ρ_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Regime {
    /// `mρ_m → θ ∈ [-1, ∞)`; rate `√m`.
    CaseI { theta: f64 },
    /// `mρ_m → ∞`, `ρ_m → 0`; rate `ρ_m^{-1/2}`.
    #[serde(rename = "case_ii")]
    CaseII,
}

impl Regime {
    pub fn from_sequence(seq: &RhoSequence) -> Result<Self> {
        seq.validate()?;
        match *seq {
            RhoSequence::ThetaOverM { theta } => Ok(Regime::CaseI { theta }),
            RhoSequence::PowerLaw { .. } => Ok(Regime::CaseII),
            RhoSequence::Fixed { rho } => Err(Error::Regime(format!(
                "fixed rho = {rho}: the FDP does not concentrate around the FDR; \
                 use the oracle transform for fixed correlation"
            ))),
        }
    }

    /// Scaling `a_m` applied to `FDP - center`.
    pub fn rate(&self, m: usize, rho_m: f64) -> f64 {
        match self {
            Regime::CaseI { .. } => (m as f64).sqrt(),
            Regime::CaseII => rho_m.powf(-0.5),
        }
    }

    pub fn rate_description(&self) -> &'static str {
        match self {
            Regime::CaseI { .. } => "a_m = sqrt(m)",
            Regime::CaseII => "a_m = rho_m^(-1/2)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub regime: Regime,
    pub t_star: f64,
    /// `q(t*)`; equals `π₀α` for BH.
    pub center: f64,
    pub c_t: f64,
    pub sigma2_t: f64,
    pub variance: f64,
    pub rate_exponent_description: String,
}

impl AsymptoticLaw {
    pub fn rate(&self, m: usize, rho_m: f64) -> f64 {
        self.regime.rate(m, rho_m)
    }
}

/// Assembles the law from a threshold and its derivative.
pub fn law_from_threshold(
    cdf: &MixtureCdf,
    t_star: f64,
    t_deriv: &DiracMixtureMeasure,
    regime: Regime,
) -> Result<AsymptoticLaw> {
    let (zeta0, zeta1) = zeta_measures(cdf, t_star, t_deriv)?;
    let c_t = c_of_t(&zeta0, &zeta1, cdf.mu);
    let sigma2_t = sigma2_of_t(&zeta0, &zeta1, cdf)?;
    let variance = match regime {
        Regime::CaseI { theta } => sigma2_t + theta * c_t * c_t,
        Regime::CaseII => c_t * c_t,
    };
    if variance < 0.0 {
        return Err(Error::Numerical(format!(
            "negative asymptotic variance {variance:e}"
        )));
    }
    Ok(AsymptoticLaw {
        regime,
        t_star,
        center: cdf.q(t_star),
        c_t,
        sigma2_t,
        variance,
        rate_exponent_description: regime.rate_description().to_string(),
    })
}

pub fn asymptotic_law(
    cdf: &MixtureCdf,
    procedure: &ThresholdProcedure,
    rho_seq: &RhoSequence,
) -> Result<AsymptoticLaw> {
    let regime = Regime::from_sequence(rho_seq)?;
    law_for_regime(cdf, procedure, regime)
}

pub fn law_for_regime(
    cdf: &MixtureCdf,
    procedure: &ThresholdProcedure,
    regime: Regime,
) -> Result<AsymptoticLaw> {
    let (t_star, t_deriv) = threshold_at_g(cdf, procedure)?;
    law_from_threshold(cdf, t_star, &t_deriv, regime)
}

/// Direct BH variance constants at a given `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhClosedForm {
    /// `π₀α²(1-t*)/t*`.
    pub sigma2: f64,
    /// `π₀²α²/(2π t*²) e^{-(Φ⁻¹(t*))²}`.
    pub c2: f64,
}

pub fn bh_closed_form(pi0: f64, alpha: f64, t_star: f64) -> BhClosedForm {
    let z = upper_tail_inv(t_star);
    let a2 = alpha * alpha;
    BhClosedForm {
        sigma2: pi0 * a2 * (1.0 - t_star) / t_star,
        c2: pi0 * pi0 * a2 / (2.0 * PI * t_star * t_star) * (-z * z).exp(),
    }
}

/// Covariance kernels of the limit objects `Z₀`, `Z₁`, `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitProcessSpec {
    pub pi0: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovKind {
    /// `cov(Z₀(s), Z₀(t)) = π₀⁻¹(s∧t - st)`.
    Z0Z0,
    /// `cov(Z₁(s), Z₁(t)) = (1-π₀)⁻¹(G₁(s∧t) - G₁(s)G₁(t))`.
    Z1Z1,
    /// `cov(Z, Z₀(t)) = φ(Φ⁻¹(t))`; `s` is ignored.
    ZZ0,
    /// `cov(Z, Z₁(t)) = φ(Φ⁻¹(t) - μ)`; `s` is ignored.
    ZZ1,
}

impl LimitProcessSpec {
    fn g1(&self, t: f64) -> f64 {
        upper_tail(upper_tail_inv(t) - self.mu)
    }
}

pub fn limit_cov(spec: &LimitProcessSpec, which: CovKind, s: f64, t: f64) -> f64 {
    match which {
        CovKind::Z0Z0 => (s.min(t) - s * t) / spec.pi0,
        CovKind::Z1Z1 => (spec.g1(s.min(t)) - spec.g1(s) * spec.g1(t)) / (1.0 - spec.pi0),
        CovKind::ZZ0 => density(upper_tail_inv(t)),
        CovKind::ZZ1 => density(upper_tail_inv(t) - spec.mu),
    }
}

/// Limit covariance of `√m(Ĝ₀,m - G₀, Ĝ₁,m - G₁)` on `grid` when `mρ_m → θ`.
///
/// The limit is `Z_g + (Z - √(1+θ)U) Φ'∘(Φ⁻¹ - μ_g)` for group `g`, with
/// `Φ' = -φ`, `μ₀ = 0`, `μ₁ = μ` and `var(Z - √(1+θ)U) = 2 + θ`. The result
/// is a `2K × 2K` matrix: null rows/columns first, then alternatives.
pub fn ecdf_limit_covariance(spec: &LimitProcessSpec, theta: f64, grid: &[f64]) -> Vec<Vec<f64>> {
    let k = grid.len();
    // (group, t) for each coordinate; group 1 is the alternative.
    let coord = |i: usize| (i / k, grid[i % k]);
    let slope = |group: usize, t: f64| {
        let shift = if group == 0 { 0.0 } else { spec.mu };
        -density(upper_tail_inv(t) - shift)
    };
    let z_cov = |group: usize, t: f64| {
        let kind = if group == 0 {
            CovKind::ZZ0
        } else {
            CovKind::ZZ1
        };
        limit_cov(spec, kind, t, t)
    };
    let var_w = 2.0 + theta;

    (0..2 * k)
        .map(|i| {
            (0..2 * k)
                .map(|j| {
                    let (a, s) = coord(i);
                    let (b, t) = coord(j);
                    let bridge = match (a, b) {
                        (0, 0) => limit_cov(spec, CovKind::Z0Z0, s, t),
                        (1, 1) => limit_cov(spec, CovKind::Z1Z1, s, t),
                        _ => 0.0,
                    };
                    bridge
                        + slope(b, t) * z_cov(a, s)
                        + slope(a, s) * z_cov(b, t)
                        + slope(a, s) * slope(b, t) * var_w
                })
                .collect()
        })
        .collect()
}
