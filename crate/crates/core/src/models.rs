//! Continuous distributions on the real line and Gaussian Markov kernels.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use libm::erfc;

use crate::error::{Error, Result};

/// A probability distribution on ℝ, evaluated through its CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure1D {
    Normal { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 − Φ(z)`, accurate in the upper tail.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

impl Measure1D {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "normal needs a finite mean and a positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self::Normal { mean, variance })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("uniform needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            Self::Normal { mean, variance } => std_normal_cdf((t - mean) / variance.sqrt()),
            Self::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// `1 − cdf(t)`, computed without cancellation in the upper tail.
    pub fn sf(&self, t: f64) -> f64 {
        match *self {
            Self::Normal { mean, variance } => std_normal_sf((t - mean) / variance.sqrt()),
            Self::Uniform { lo, hi } => ((hi - t) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match *self {
            Self::Normal { mean, variance } => {
                let sd = variance.sqrt();
                std_normal_pdf((t - mean) / sd) / sd
            }
            Self::Uniform { lo, hi } => {
                if t >= lo && t <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Mass of the right-closed interval `(a, b]`; either end may be infinite.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // difference of survival functions on the right of the median avoids 1 − 1 cancellation
        if a >= self.median() {
            (self.sf(a) - self.sf(b)).max(0.0)
        } else {
            (self.cdf(b) - self.cdf(a)).max(0.0)
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. } => mean,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Normal { variance, .. } => variance,
            Self::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
        }
    }

    pub fn median(&self) -> f64 {
        self.mean()
    }

    /// Smallest closed interval carrying all of the mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Uniform { lo, hi } => (lo, hi),
        }
    }

    /// Mass outside `[-cutoff, cutoff]`.
    pub fn tail_mass(&self, cutoff: f64) -> f64 {
        self.cdf(-cutoff) + self.sf(cutoff)
    }
}

impl fmt::Display for Measure1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal { mean, variance } => write!(f, "normal:{mean}:{variance}"),
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

impl FromStr for Measure1D {
    type Err = Error;

    /// Parses `normal:<mean>:<variance>` or `uniform:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse model descriptor {s:?}"));
        let mut parts = s.split(':');
        let tag = parts.next().ok_or_else(bad)?;
        let a: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let b: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match tag {
            "normal" => Self::normal(a, b),
            "uniform" => Self::uniform(a, b),
            _ => Err(bad()),
        }
    }
}

/// A Markov kernel ℝ ⇸ ℝ, `x ↦ N(x, variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelModel1D {
    variance: f64,
}

impl KernelModel1D {
    pub fn at(&self, x: f64) -> Measure1D {
        Measure1D::Normal {
            mean: x,
            variance: self.variance,
        }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// The image of `prior` under the kernel when it has a closed form.
    pub fn pushforward(&self, prior: &Measure1D) -> Option<Measure1D> {
        match *prior {
            Measure1D::Normal { mean, variance } => Some(Measure1D::Normal {
                mean,
                variance: variance + self.variance,
            }),
            Measure1D::Uniform { .. } => None,
        }
    }
}

impl fmt::Display for KernelModel1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gaussian:{}", self.variance)
    }
}

pub fn normal(mean: f64, variance: f64) -> Result<Measure1D> {
    Measure1D::normal(mean, variance)
}

pub fn gaussian_kernel(variance: f64) -> Result<KernelModel1D> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kernel variance must be positive, got {variance}"
        )));
    }
    Ok(KernelModel1D { variance })
}

/// Conjugate posterior of a normal prior under one normal observation.
pub fn exact_gaussian_posterior(prior_mean: f64, prior_var: f64, like_var: f64, obs: f64) -> Result<Measure1D> {
    if !(prior_var > 0.0 && like_var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variances must be positive, got prior {prior_var} and likelihood {like_var}"
        )));
    }
    let variance = 1.0 / (1.0 / prior_var + 1.0 / like_var);
    let mean = variance * (prior_mean / prior_var + obs / like_var);
    Measure1D::normal(mean, variance)
}

/// `P(X > threshold)` under the posterior.
pub fn posterior_tail_query(posterior: &Measure1D, threshold: f64) -> f64 {
    posterior.sf(threshold)
}
