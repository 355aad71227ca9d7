//! Weighted Gaussian kernel density estimation over a bounded time domain,
//! with Silverman bandwidth selection and reflection boundary correction,
//! plus the exponential recency prior.
//!
//! Density work happens in fractional days; epoch-second inputs are converted
//! at the module boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signals::TemporalSignal;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_HOUR: f64 = 3_600.0;

/// Epoch seconds to fractional days.
pub fn epoch_days(t: i64) -> f64 {
    t as f64 / SECONDS_PER_DAY
}

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("degenerate signal: {0}")]
    DegenerateSignal(&'static str),
    #[error("empty signal")]
    EmptySignal,
    #[error("invalid domain: lower bound must be below upper bound")]
    InvalidDomain,
    #[error("point {point} outside domain [{lo}, {hi}]")]
    PointOutsideDomain { point: f64, lo: f64, hi: f64 },
    #[error("bandwidth must be positive")]
    InvalidBandwidth,
    #[error("document is newer than the reference time")]
    FutureDocument,
}

/// Boundary correction applied at the domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correction {
    /// Mirror probability mass at both edges so the density is not
    /// underestimated near the collection start or the query time.
    Reflection,
    None,
}

/// Standard normal density.
fn gaussian(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Silverman's rule-of-thumb bandwidth, h = 1.06 * sigma * n^(-1/5), with
/// sigma the weight-weighted standard deviation of the points and n the raw
/// point count. Rescaling all weights by a positive constant leaves the
/// result unchanged.
pub fn silverman_bandwidth(points: &[(f64, f64)]) -> Result<f64, DensityError> {
    if points.len() < 2 {
        return Err(DensityError::DegenerateSignal("fewer than two points"));
    }
    let total: f64 = points.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return Err(DensityError::DegenerateSignal("no positive weight"));
    }
    let mean = points.iter().map(|&(t, w)| w * t).sum::<f64>() / total;
    let variance = points
        .iter()
        .map(|&(t, w)| w * (t - mean) * (t - mean))
        .sum::<f64>()
        / total;
    let sigma = variance.sqrt();
    if sigma == 0.0 {
        return Err(DensityError::DegenerateSignal("zero spread"));
    }
    Ok(1.06 * sigma * (points.len() as f64).powf(-0.2))
}

/// Fallback bandwidth for degenerate signals (single spike or zero spread):
/// one hundredth of the domain span, floored at one hour.
pub fn fallback_bandwidth(domain: (f64, f64)) -> f64 {
    ((domain.1 - domain.0) / 100.0).max(1.0 / 24.0)
}

/// A boundary-corrected weighted KDE over a closed time domain, in fractional
/// days. Immutable after construction; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    points: Vec<(f64, f64)>,
    bandwidth: f64,
    domain: (f64, f64),
    correction: Correction,
}

impl DensityEstimate {
    /// Builds an estimate from points in domain units. Weights are rescaled
    /// to sum to the point count, preserving the density (only the weight
    /// profile matters, not its scale).
    pub fn new(
        points: Vec<(f64, f64)>,
        bandwidth: f64,
        domain: (f64, f64),
        correction: Correction,
    ) -> Result<Self, DensityError> {
        if points.is_empty() {
            return Err(DensityError::EmptySignal);
        }
        if !(bandwidth > 0.0) {
            return Err(DensityError::InvalidBandwidth);
        }
        if !(domain.0 < domain.1) {
            return Err(DensityError::InvalidDomain);
        }
        for &(t, _) in &points {
            if t < domain.0 || t > domain.1 {
                return Err(DensityError::PointOutsideDomain {
                    point: t,
                    lo: domain.0,
                    hi: domain.1,
                });
            }
        }
        let total: f64 = points.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(DensityError::DegenerateSignal("no positive weight"));
        }
        let n = points.len() as f64;
        let scale = n / total;
        let points = points.into_iter().map(|(t, w)| (t, w * scale)).collect();
        Ok(Self {
            points,
            bandwidth,
            domain,
            correction,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn correction(&self) -> Correction {
        self.correction
    }

    /// Uncorrected kernel sum, defined on the whole real line.
    fn base(&self, t: f64) -> f64 {
        let n = self.points.len() as f64;
        let h = self.bandwidth;
        let sum: f64 = self
            .points
            .iter()
            .map(|&(ti, w)| w * gaussian((t - ti) / h))
            .sum();
        sum / (n * h)
    }

    /// Density at `t` (domain units). Zero outside the domain. With
    /// reflection, mass escaping past each edge is folded back in:
    /// f(t) + f(2a-t) + f(2b-t).
    pub fn evaluate(&self, t: f64) -> f64 {
        let (a, b) = self.domain;
        if t < a || t > b {
            return 0.0;
        }
        match self.correction {
            Correction::None => self.base(t),
            Correction::Reflection => {
                self.base(t) + self.base(2.0 * a - t) + self.base(2.0 * b - t)
            }
        }
    }

    /// Density at an epoch-seconds instant.
    pub fn evaluate_epoch(&self, t: i64) -> f64 {
        self.evaluate(epoch_days(t))
    }

    /// Samples the density at `nodes` uniformly spaced instants spanning the
    /// domain, for plotting. Returned abscissae are in epoch seconds.
    pub fn sample_curve(&self, nodes: usize) -> Vec<(f64, f64)> {
        assert!(nodes >= 2, "need at least two sample nodes");
        let (a, b) = self.domain;
        let step = (b - a) / (nodes - 1) as f64;
        (0..nodes)
            .map(|i| {
                let t = a + step * i as f64;
                (t * SECONDS_PER_DAY, self.evaluate(t))
            })
            .collect()
    }
}

/// Builds the density for a signal over an epoch-seconds domain. Bandwidth
/// comes from Silverman's rule, falling back to [`fallback_bandwidth`] for
/// degenerate signals. Empty signals are an error; callers map that to a
/// zero temporal feature.
pub fn build_density(
    signal: &TemporalSignal,
    domain: (i64, i64),
    correction: Correction,
) -> Result<DensityEstimate, DensityError> {
    if signal.is_empty() {
        return Err(DensityError::EmptySignal);
    }
    let domain = (epoch_days(domain.0), epoch_days(domain.1));
    let points: Vec<(f64, f64)> = signal
        .points()
        .iter()
        .map(|&(t, w)| (epoch_days(t), w))
        .collect();
    let bandwidth = match silverman_bandwidth(&points) {
        Ok(h) => h,
        Err(DensityError::DegenerateSignal(_)) => fallback_bandwidth(domain),
        Err(e) => return Err(e),
    };
    DensityEstimate::new(points, bandwidth, domain, correction)
}

/// Relevance of a document's timestamp under one source's density, scaled so
/// the best-placed candidate scores exactly 1. A missing source (`None`)
/// scores 0 for every document.
pub fn temporal_feature(est: Option<&DensityEstimate>, doc_times: &[i64], t_d: i64) -> f64 {
    let Some(est) = est else { return 0.0 };
    let max = doc_times
        .iter()
        .map(|&t| est.evaluate_epoch(t))
        .fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0.0;
    }
    est.evaluate_epoch(t_d) / max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    Days,
    Hours,
}

/// Exponential recency prior configuration: decay rate per time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecencyConfig {
    pub lambda: f64,
    pub time_unit: TimeUnit,
}

impl Default for RecencyConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            time_unit: TimeUnit::Days,
        }
    }
}

/// Recency prior lambda * exp(-lambda * delta), with delta the age of the
/// document relative to `t_ref` in the configured unit. Documents newer than
/// the reference time violate the precondition.
pub fn recency_prior(cfg: &RecencyConfig, t_ref: i64, t_d: i64) -> Result<f64, DensityError> {
    if t_d > t_ref {
        return Err(DensityError::FutureDocument);
    }
    let delta = match cfg.time_unit {
        TimeUnit::Days => (t_ref - t_d) as f64 / SECONDS_PER_DAY,
        TimeUnit::Hours => (t_ref - t_d) as f64 / SECONDS_PER_HOUR,
    };
    Ok(cfg.lambda * (-cfg.lambda * delta).exp())
}
