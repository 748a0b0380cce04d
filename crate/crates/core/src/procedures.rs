//! Threshold procedures, rejection sets and the false discovery proportion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdProcedure {
    /// Benjamini–Hochberg step-up at level `alpha`.
    Bh { alpha: f64 },
    /// Reject every p-value `≤ t`.
    FixedThreshold { t: f64 },
}

impl ThresholdProcedure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdProcedure::Bh { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1)")))
            }
            ThresholdProcedure::FixedThreshold { t } if !(t > 0.0 && t < 1.0) => Err(
                Error::Parameter(format!("threshold t = {t} outside (0, 1)")),
            ),
            _ => Ok(()),
        }
    }

    /// Data-driven threshold on the given p-values.
    pub fn threshold(&self, p: &[f64]) -> Result<f64> {
        match *self {
            ThresholdProcedure::Bh { alpha } => bh_threshold(p, alpha),
            ThresholdProcedure::FixedThreshold { t } => Ok(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionResult {
    pub threshold: f64,
    pub rejected: usize,
    pub false_rejections: usize,
    pub fdp: f64,
}

/// The BH threshold `α k / m` with `k = max{i : p_(i) ≤ iα/m}` (0 if no such
/// `i`). This is `max{t : Ĝ_m(t) ≥ t/α}` for the pooled e.c.d.f.
pub fn bh_threshold(p: &[f64], alpha: f64) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Parameter("empty p-value vector".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    let k = bh_rank(p, alpha);
    Ok(bh_cutoff(k, alpha, p.len()))
}

#[inline]
fn bh_cutoff(i: usize, alpha: f64, m: usize) -> f64 {
    // m·α/m can round an ulp away from α
    if i == m {
        alpha
    } else {
        i as f64 * alpha / m as f64
    }
}

// Only p-values ≤ α can satisfy p_(i) ≤ iα/m, and their ranks among all
// p-values equal their ranks among themselves.
fn bh_rank(p: &[f64], alpha: f64) -> usize {
    let m = p.len();
    let mut small: Vec<f64> = p.iter().copied().filter(|&pi| pi <= alpha).collect();
    small.sort_unstable_by(f64::total_cmp);
    small
        .iter()
        .enumerate()
        .rev()
        .find(|&(i, &pi)| pi <= bh_cutoff(i + 1, alpha, m))
        .map_or(0, |(i, _)| i + 1)
}

/// Thresholds `sample` with `procedure` and tallies the outcome. Ties with
/// the threshold are rejected.
pub fn apply(procedure: &ThresholdProcedure, sample: &Sample) -> Result<RejectionResult> {
    let threshold = procedure.threshold(&sample.p)?;
    Ok(tally(sample, threshold))
}

fn tally(sample: &Sample, threshold: f64) -> RejectionResult {
    let (rejected, false_rejections) = sample
        .p
        .iter()
        .zip(&sample.tau)
        .filter(|(&p, _)| p <= threshold)
        .fold((0usize, 0usize), |(r, v), (_, &alt)| {
            (r + 1, v + usize::from(!alt))
        });
    RejectionResult {
        threshold,
        rejected,
        false_rejections,
        fdp: false_rejections as f64 / rejected.max(1) as f64,
    }
}

/// `FDP_m(t)`: the share of nulls among p-values `≤ t`, 0 when there are none.
pub fn fdp_at(sample: &Sample, t: f64) -> f64 {
    tally(sample, t).fdp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_of(p: &[f64], tau: &[bool]) -> Sample {
        Sample::from_p_values(tau.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn four_point_example() {
        let p = [0.01, 0.02, 0.9, 0.95];
        let t = bh_threshold(&p, 0.05).unwrap();
        assert_eq!(t, 2.0 * 0.05 / 4.0);
        assert!((t - 0.025).abs() < 1e-17);
        let s = sample_of(&p, &[false, true, false, true]);
        let r = apply(&ThresholdProcedure::Bh { alpha: 0.05 }, &s).unwrap();
        assert_eq!(r.rejected, 2);
        assert_eq!(r.false_rejections, 1);
        assert_eq!(r.fdp, 0.5);
    }

    #[test]
    fn full_and_empty_rejection() {
        let alpha = 0.1;
        let p = [0.01, 0.05, 0.099, 0.1];
        assert_eq!(bh_threshold(&p, alpha).unwrap(), alpha);
        let p = [0.5, 0.6, 0.7];
        assert_eq!(bh_threshold(&p, alpha).unwrap(), 0.0);
        let s = sample_of(&p, &[false, true, true]);
        let r = apply(&ThresholdProcedure::Bh { alpha }, &s).unwrap();
        assert_eq!((r.rejected, r.false_rejections, r.fdp), (0, 0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(bh_threshold(&[], 0.1).is_err());
        assert!(bh_threshold(&[0.5], 1.0).is_err());
        assert!(ThresholdProcedure::FixedThreshold { t: 0.0 }
            .validate()
            .is_err());
        assert!(ThresholdProcedure::Bh { alpha: 0.3 }.validate().is_ok());
    }

    #[test]
    fn fixed_threshold_edges() {
        let s = sample_of(&[0.4, 0.6, 0.7], &[false, false, true]);
        let none = apply(&ThresholdProcedure::FixedThreshold { t: 0.1 }, &s).unwrap();
        assert_eq!(none.fdp, 0.0);
        let nulls_only = apply(&ThresholdProcedure::FixedThreshold { t: 0.6 }, &s).unwrap();
        assert_eq!(nulls_only.fdp, 1.0);
        // tie at the threshold is a rejection
        assert_eq!(nulls_only.rejected, 2);
    }

    #[test]
    fn fdp_endpoints() {
        let s = sample_of(
            &[0.1, 0.2, 0.3, 0.4, 0.5],
            &[false, false, false, true, true],
        );
        assert_eq!(fdp_at(&s, 0.0), 0.0);
        assert_eq!(fdp_at(&s, 1.0), 3.0 / 5.0);
    }
}
