//! Mean-one weight laws `W`, their analytic moment functionals and per-node
//! sampling.
//!
//! Two families are supported: log-normal `W = exp(X)` with
//! `X ~ N(-σ²/2, σ²)` and the symmetric two-point law `W ∈ {1-ξ, 1+ξ}`.
//! All functionals are closed forms.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Regime, Result};
use crate::path::DyadicPath;
use crate::rng::{inverse_normal_cdf, node_hash, unit_open};

/// Tolerance used to decide the critical regime.
pub const CRITICAL_TOL: f64 = 1e-12;

/// A mean-one weight law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightModel {
    /// `log W ~ N(-sigma2/2, sigma2)`.
    LogNormal { sigma2: f64 },
    /// `P(W = 1 - xi) = P(W = 1 + xi) = 1/2`.
    TwoPoint { xi: f64 },
}

/// How a log-normal parameter given on the command line is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaConvention {
    /// The number is the standard deviation `σ`; the variance is its square.
    Sigma,
    /// The number is the variance `σ²`.
    #[default]
    Sigma2,
}

/// Value of `E(W log2 W)` together with the resulting regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub w_logw: f64,
    pub gamma: f64,
}

impl WeightModel {
    pub fn log_normal(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Domain(format!(
                "log-normal variance must be positive, got {sigma2}"
            )));
        }
        Ok(WeightModel::LogNormal { sigma2 })
    }

    pub fn two_point(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Domain(format!(
                "two-point offset must lie in (0, 1), got {xi}"
            )));
        }
        Ok(WeightModel::TwoPoint { xi })
    }

    /// Parses `lognormal:sigma2=<float>` or `twopoint:xi=<float>`.
    ///
    /// Under [`SigmaConvention::Sigma`] the log-normal number is squared.
    /// The key `sigma=` is also accepted and always means the standard
    /// deviation.
    pub fn parse_with(spec: &str, convention: SigmaConvention) -> Result<Self> {
        let (family, param) = spec
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model spec `{spec}` lacks `:`")))?;
        let (key, value) = param
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("model spec `{spec}` lacks `=`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in model spec `{spec}`")))?;
        match (family.trim(), key.trim()) {
            ("lognormal", "sigma2") => match convention {
                SigmaConvention::Sigma2 => Self::log_normal(value),
                SigmaConvention::Sigma => Self::log_normal(value * value),
            },
            ("lognormal", "sigma") => Self::log_normal(value * value),
            ("twopoint", "xi") => Self::two_point(value),
            _ => Err(Error::Parse(format!(
                "unknown model spec `{spec}` (expected lognormal:sigma2=<v> or twopoint:xi=<v>)"
            ))),
        }
    }

    /// `log2 E(W^t)` for `t ≥ 0`.
    pub fn log2_moment(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.log2_moment_unchecked(t))
    }

    pub(crate) fn log2_moment_unchecked(&self, t: f64) -> f64 {
        match *self {
            WeightModel::LogNormal { sigma2 } => sigma2 * t * (t - 1.0) / (2.0 * LN_2),
            WeightModel::TwoPoint { xi } => {
                // log2(((1-ξ)^t + (1+ξ)^t)/2) factored around the larger atom
                let ratio = (t * ((1.0 - xi) / (1.0 + xi)).ln()).exp();
                t * (1.0 + xi).log2() + ((1.0 + ratio) / 2.0).log2()
            }
        }
    }

    /// `d/dt log2 E(W^t)`, strictly increasing in `t`.
    pub fn log2_moment_slope(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.log2_moment_slope_unchecked(t))
    }

    pub(crate) fn log2_moment_slope_unchecked(&self, t: f64) -> f64 {
        match *self {
            WeightModel::LogNormal { sigma2 } => sigma2 * (2.0 * t - 1.0) / (2.0 * LN_2),
            WeightModel::TwoPoint { xi } => {
                let (lo, hi) = ((1.0 - xi).ln(), (1.0 + xi).ln());
                // share of the upper atom in E(W^t)
                let upper = 1.0 / (1.0 + (t * (lo - hi)).exp());
                ((1.0 - upper) * lo + upper * hi) / LN_2
            }
        }
    }

    /// `γ = -E(log2 W)`.
    pub fn gamma(&self) -> f64 {
        match *self {
            WeightModel::LogNormal { sigma2 } => sigma2 / 4f64.ln(),
            WeightModel::TwoPoint { xi } => -(1.0 - xi * xi).sqrt().log2(),
        }
    }

    /// `E(W log2 W)`.
    pub fn w_log2_w(&self) -> f64 {
        match *self {
            WeightModel::LogNormal { sigma2 } => sigma2 / (2.0 * LN_2),
            WeightModel::TwoPoint { xi } => {
                ((1.0 - xi) * (1.0 - xi).log2() + (1.0 + xi) * (1.0 + xi).log2()) / 2.0
            }
        }
    }

    pub fn classify_regime(&self) -> RegimeReport {
        let w_logw = self.w_log2_w();
        let regime = if (w_logw - 1.0).abs() <= CRITICAL_TOL {
            Regime::Critical
        } else if w_logw < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        };
        RegimeReport {
            regime,
            w_logw,
            gamma: self.gamma(),
        }
    }

    /// Fails with [`Error::Regime`] unless the model is subcritical.
    pub fn require_subcritical(&self) -> Result<()> {
        let report = self.classify_regime();
        match report.regime {
            Regime::Subcritical => Ok(()),
            regime => Err(Error::Regime {
                regime,
                w_logw: report.w_logw,
            }),
        }
    }

    /// Standard deviation of `log2 W`.
    pub fn log2_std(&self) -> f64 {
        match *self {
            WeightModel::LogNormal { sigma2 } => sigma2.sqrt() / LN_2,
            WeightModel::TwoPoint { xi } => ((1.0 + xi) / (1.0 - xi)).log2() / 2.0,
        }
    }

    pub fn sampler(&self) -> WeightSampler {
        match *self {
            WeightModel::LogNormal { sigma2 } => WeightSampler::LogNormal {
                mean_log2: -sigma2 / (2.0 * LN_2),
                std_log2: sigma2.sqrt() / LN_2,
            },
            WeightModel::TwoPoint { xi } => WeightSampler::TwoPoint {
                low_log2: (1.0 - xi).log2(),
                high_log2: (1.0 + xi).log2(),
                low: 1.0 - xi,
                high: 1.0 + xi,
            },
        }
    }

    /// The weight `W_𝐢` of node `path` in the tree generated by `seed`.
    pub fn sample_weight(&self, seed: u64, path: DyadicPath) -> Result<f64> {
        if path.is_empty() {
            return Err(Error::Domain("the root carries no weight".into()));
        }
        Ok(self.sampler().weight(seed, path))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("moment order must be ≥ 0, got {t}")))
    }
}

impl FromStr for WeightModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, SigmaConvention::Sigma2)
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightModel::LogNormal { sigma2 } => write!(f, "lognormal:sigma2={sigma2}"),
            WeightModel::TwoPoint { xi } => write!(f, "twopoint:xi={xi}"),
        }
    }
}

/// Precomputed per-model constants for fast node sampling.
#[derive(Debug, Clone, Copy)]
pub enum WeightSampler {
    LogNormal {
        mean_log2: f64,
        std_log2: f64,
    },
    TwoPoint {
        low_log2: f64,
        high_log2: f64,
        low: f64,
        high: f64,
    },
}

impl WeightSampler {
    /// `log2 W_𝐢`.
    #[inline]
    pub fn log2_weight(&self, seed: u64, path: DyadicPath) -> f64 {
        let h = node_hash(seed, path);
        match *self {
            WeightSampler::LogNormal {
                mean_log2,
                std_log2,
            } => mean_log2 + std_log2 * inverse_normal_cdf(unit_open(h)),
            WeightSampler::TwoPoint {
                low_log2,
                high_log2,
                ..
            } => {
                if h >> 63 == 0 {
                    low_log2
                } else {
                    high_log2
                }
            }
        }
    }

    #[inline]
    pub fn weight(&self, seed: u64, path: DyadicPath) -> f64 {
        match *self {
            WeightSampler::TwoPoint { low, high, .. } => {
                if node_hash(seed, path) >> 63 == 0 {
                    low
                } else {
                    high
                }
            }
            WeightSampler::LogNormal { .. } => self.log2_weight(seed, path).exp2(),
        }
    }
}
