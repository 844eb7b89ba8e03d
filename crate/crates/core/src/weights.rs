//! Site-weight laws with closed-form moments and log-moment-generating
//! functions.
//!
//! Every family has an MGF that is finite on a neighbourhood of the origin.
//! The geometric law lives on `{0, 1, 2, ...}` with `P(X = k) = (1 − q)·qᵏ`.

use std::fmt;

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{Bernoulli, Exp, Geometric, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Parameterized family. Construct through [`WeightDistribution::new`] so the
/// parameters are validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Exponential {
        rate: f64,
    },
    Gaussian {
        mean: f64,
        stddev: f64,
    },
    Bernoulli {
        q: f64,
    },
    Geometric {
        q: f64,
    },
    #[serde(alias = "uniform")]
    UniformContinuous {
        lo: f64,
        hi: f64,
    },
}

/// A validated weight law for the i.i.d. site variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct WeightDistribution {
    family: Family,
}

impl TryFrom<Family> for WeightDistribution {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        Self::new(family)
    }
}

impl From<WeightDistribution> for Family {
    fn from(d: WeightDistribution) -> Self {
        d.family
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(msg()))
    }
}

impl WeightDistribution {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Exponential { rate } => check(rate.is_finite() && rate > 0.0, || {
                format!("exponential rate must be > 0, got {rate}")
            })?,
            Family::Gaussian { mean, stddev } => {
                check(mean.is_finite(), || {
                    format!("gaussian mean must be finite, got {mean}")
                })?;
                check(stddev.is_finite() && stddev > 0.0, || {
                    format!("gaussian stddev must be > 0, got {stddev}")
                })?
            }
            Family::Bernoulli { q } => check(q > 0.0 && q < 1.0, || {
                format!("bernoulli q must lie in (0, 1), got {q}")
            })?,
            Family::Geometric { q } => check(q > 0.0 && q < 1.0, || {
                format!("geometric q must lie in (0, 1), got {q}")
            })?,
            Family::UniformContinuous { lo, hi } => {
                check(lo.is_finite() && hi.is_finite() && lo < hi, || {
                    format!("uniform bounds must satisfy lo < hi, got lo={lo}, hi={hi}")
                })?
            }
        }
        Ok(Self { family })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        Self::new(Family::Gaussian { mean, stddev })
    }

    pub fn bernoulli(q: f64) -> Result<Self> {
        Self::new(Family::Bernoulli { q })
    }

    pub fn geometric(q: f64) -> Result<Self> {
        Self::new(Family::Geometric { q })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::UniformContinuous { lo, hi })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Exponential { rate } => 1.0 / rate,
            Family::Gaussian { mean, .. } => mean,
            Family::Bernoulli { q } => q,
            Family::Geometric { q } => q / (1.0 - q),
            Family::UniformContinuous { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::Gaussian { stddev, .. } => stddev * stddev,
            Family::Bernoulli { q } => q * (1.0 - q),
            Family::Geometric { q } => q / ((1.0 - q) * (1.0 - q)),
            Family::UniformContinuous { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
        }
    }

    /// Supremum of the ν for which `E[exp(νX)]` is finite.
    pub fn mgf_domain_sup(&self) -> f64 {
        match self.family {
            Family::Exponential { rate } => rate,
            Family::Geometric { q } => -q.ln(),
            Family::Gaussian { .. }
            | Family::Bernoulli { .. }
            | Family::UniformContinuous { .. } => f64::INFINITY,
        }
    }

    /// Smallest `b` with `P[X ≤ b] = 1`, or `+∞`.
    pub fn essential_sup(&self) -> f64 {
        match self.family {
            Family::Bernoulli { .. } => 1.0,
            Family::UniformContinuous { hi, .. } => hi,
            _ => f64::INFINITY,
        }
    }

    /// `P[X = ess sup X]`; zero when the supremum is infinite or carries no atom.
    pub fn upper_atom_mass(&self) -> f64 {
        match self.family {
            Family::Bernoulli { q } => q,
            _ => 0.0,
        }
    }

    /// `Λ(ν) = log E[exp(νX)]`.
    pub fn log_mgf(&self, nu: f64) -> Result<f64> {
        let sup = self.mgf_domain_sup();
        if nu.is_nan() || nu >= sup {
            return Err(Error::MgfDomain { nu, sup });
        }
        Ok(self.log_mgf_unchecked(nu))
    }

    pub(crate) fn log_mgf_unchecked(&self, nu: f64) -> f64 {
        if nu == 0.0 {
            return 0.0;
        }
        match self.family {
            Family::Exponential { rate } => -(-nu / rate).ln_1p(),
            Family::Gaussian { mean, stddev } => mean * nu + 0.5 * stddev * stddev * nu * nu,
            Family::Bernoulli { q } => {
                if nu > 0.0 {
                    nu + (q + (1.0 - q) * (-nu).exp()).ln()
                } else {
                    (q * nu.exp_m1()).ln_1p()
                }
            }
            Family::Geometric { q } => -(-q * nu.exp_m1() / (1.0 - q)).ln_1p(),
            Family::UniformContinuous { lo, hi } => {
                let t = nu * (hi - lo);
                if t.abs() < 1e-8 {
                    nu * 0.5 * (lo + hi) + t * t / 24.0
                } else if t > 0.0 {
                    nu * hi + (-(-t).exp_m1() / t).ln()
                } else {
                    nu * lo + (t.exp_m1() / t).ln()
                }
            }
        }
    }

    /// `Λ′(ν)`, the mean of the exponentially tilted law. Caller keeps ν in
    /// the domain.
    pub fn log_mgf_derivative(&self, nu: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => 1.0 / (rate - nu),
            Family::Gaussian { mean, stddev } => mean + stddev * stddev * nu,
            Family::Bernoulli { q } => {
                if nu >= 0.0 {
                    q / (q + (1.0 - q) * (-nu).exp())
                } else {
                    let e = nu.exp();
                    q * e / (1.0 - q + q * e)
                }
            }
            Family::Geometric { q } => {
                let qe = q * nu.exp();
                qe / ((1.0 - q) - q * nu.exp_m1())
            }
            Family::UniformContinuous { lo, hi } => {
                let w = hi - lo;
                let t = nu * w;
                // 1/(1 − e^{−t}) − 1/t
                let g = if t.abs() < 1e-4 {
                    0.5 + t / 12.0 - t * t * t / 720.0
                } else {
                    1.0 / (-(-t).exp_m1()) - 1.0 / t
                };
                lo + w * g
            }
        }
    }

    /// Fills `out` with i.i.d. draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.family {
            Family::Exponential { rate } => {
                let d = Exp::new(rate).expect("validated");
                out.iter_mut().for_each(|v| *v = d.sample(rng));
            }
            Family::Gaussian { mean, stddev } => {
                let d = Normal::new(mean, stddev).expect("validated");
                out.iter_mut().for_each(|v| *v = d.sample(rng));
            }
            Family::Bernoulli { q } => {
                let d = Bernoulli::new(q).expect("validated");
                out.iter_mut()
                    .for_each(|v| *v = if d.sample(rng) { 1.0 } else { 0.0 });
            }
            Family::Geometric { q } => {
                // rand_distr counts failures before the first success.
                let d = Geometric::new(1.0 - q).expect("validated");
                out.iter_mut().for_each(|v| *v = d.sample(rng) as f64);
            }
            Family::UniformContinuous { lo, hi } => {
                let d = Uniform::new(lo, hi).expect("validated");
                out.iter_mut().for_each(|v| *v = d.sample(rng));
            }
        }
    }

    pub fn sample(&self, stream: &mut RandomStream, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.fill(stream, &mut out);
        out
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Exponential { rate } => write!(f, "exponential:{rate}"),
            Family::Gaussian { mean, stddev } => write!(f, "gaussian:{mean},{stddev}"),
            Family::Bernoulli { q } => write!(f, "bernoulli:{q}"),
            Family::Geometric { q } => write!(f, "geometric:{q}"),
            Family::UniformContinuous { lo, hi } => write!(f, "uniform:{lo},{hi}"),
        }
    }
}
