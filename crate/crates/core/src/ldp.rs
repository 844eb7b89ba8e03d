//! Upper-tail rate function and the inverse of its increasing branch.
//!
//! The rate function is the one-sided transform
//! `I(x) = sup_{ν > 0} (xν − Λ(ν))`, which is identically zero for `x ≤ μ`
//! and increasing above the mean. The objective is concave in ν, so the
//! maximizer is the root of `x − Λ′(ν)`, found by bisection on a doubling
//! bracket.

use crate::error::{Error, Result};
use crate::weights::{Family, WeightDistribution};

/// Doubling limit for both the ν bracket and the θ bracket.
const MAX_DOUBLINGS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute bracket width on the maximizing ν.
    pub opt_tol: f64,
    /// Relative bracket width on θ when inverting.
    pub inv_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            opt_tol: 1e-10,
            inv_tol: 1e-12,
        }
    }
}

/// Result of inverting the rate function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub theta: f64,
    /// True when β reached the supremum of `I` below the essential
    /// supremum and `theta` is that support edge.
    pub saturated: bool,
}

/// `I(·)` and `I₊⁻¹(·)` for one weight law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunction {
    dist: WeightDistribution,
    mean: f64,
    nu_sup: f64,
    x_max: f64,
    tol: Tolerances,
}

impl RateFunction {
    pub fn new(dist: WeightDistribution) -> Self {
        Self::with_tolerances(dist, Tolerances::default())
    }

    pub fn with_tolerances(dist: WeightDistribution, tol: Tolerances) -> Self {
        Self {
            dist,
            mean: dist.mean(),
            nu_sup: dist.mgf_domain_sup(),
            x_max: dist.essential_sup(),
            tol,
        }
    }

    pub fn distribution(&self) -> &WeightDistribution {
        &self.dist
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn essential_sup(&self) -> f64 {
        self.x_max
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Maximizing ν for `x` in `(μ, x_max)`.
    pub fn maximizer(&self, x: f64) -> f64 {
        let slope = |nu: f64| x - self.dist.log_mgf_derivative(nu);
        let cap = if self.nu_sup.is_finite() {
            self.nu_sup * (1.0 - 1e-9)
        } else {
            f64::INFINITY
        };
        let mut lo = 0.0;
        let mut hi = 1.0f64.min(cap);
        let mut doublings = 0;
        loop {
            let s = slope(hi);
            if s.is_nan() || s <= 0.0 {
                break;
            }
            if hi >= cap || doublings >= MAX_DOUBLINGS {
                // No sign change inside the domain: the sup sits at the edge.
                return hi;
            }
            lo = hi;
            hi = (2.0 * hi).min(cap);
            doublings += 1;
        }
        while hi - lo > self.tol.opt_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `I(x)`; zero for `x ≤ μ`, `+∞` above the essential supremum.
    pub fn rate(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= self.mean {
            return 0.0;
        }
        if x > self.x_max {
            return f64::INFINITY;
        }
        if x == self.x_max {
            // Limit ν → ∞: xν − Λ(ν) → −log P[X = x_max].
            return -self.dist.upper_atom_mass().ln();
        }
        let nu = self.maximizer(x);
        (x * nu - self.dist.log_mgf_unchecked(nu)).max(0.0)
    }

    /// `sup_{θ < x_max} I(θ)`: `−log P[X = x_max]` for bounded laws,
    /// `+∞` otherwise.
    pub fn rate_sup(&self) -> f64 {
        if self.x_max.is_finite() {
            -self.dist.upper_atom_mass().ln()
        } else {
            f64::INFINITY
        }
    }

    /// `I₊⁻¹(β) = inf {θ > μ : I(θ) > β}`.
    pub fn inverse_plus(&self, beta: f64) -> Result<Inverse> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rate level must be ≥ 0, got {beta}"
            )));
        }
        if beta == 0.0 {
            return Ok(Inverse {
                theta: self.mean,
                saturated: false,
            });
        }
        if beta >= self.rate_sup() {
            return Ok(Inverse {
                theta: self.x_max,
                saturated: true,
            });
        }
        let mut step = self.dist.variance().sqrt();
        let mut lo = self.mean;
        let mut hi = (self.mean + step).min(self.x_max);
        let mut doublings = 0;
        while self.rate(hi) <= beta {
            if doublings >= MAX_DOUBLINGS {
                return Err(Error::Internal(format!(
                    "no upper bracket for I(θ) > {beta} after {MAX_DOUBLINGS} doublings"
                )));
            }
            lo = hi;
            step *= 2.0;
            hi = (self.mean + step).min(self.x_max);
            doublings += 1;
        }
        // Invariant: I(lo) ≤ β < I(hi).
        loop {
            let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
            if hi - lo <= self.tol.inv_tol * scale {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.rate(mid) > beta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Inverse {
            theta: 0.5 * (lo + hi),
            saturated: false,
        })
    }
}

/// Closed-form `I(x)` (same one-sided convention) for the exponential,
/// gaussian and bernoulli families; `None` for the others.
pub fn rate_closed_form(dist: &WeightDistribution, x: f64) -> Option<f64> {
    let mu = dist.mean();
    let below = x <= mu;
    match dist.family() {
        Family::Exponential { rate } => Some(if below {
            0.0
        } else {
            rate * x - 1.0 - (rate * x).ln()
        }),
        Family::Gaussian { mean, stddev } => Some(if below {
            0.0
        } else {
            (x - mean) * (x - mean) / (2.0 * stddev * stddev)
        }),
        Family::Bernoulli { q } => Some(if below {
            0.0
        } else if x > 1.0 {
            f64::INFINITY
        } else if x == 1.0 {
            -q.ln()
        } else {
            x * (x / q).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - q)).ln()
        }),
        Family::Geometric { .. } | Family::UniformContinuous { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn exp1() -> RateFunction {
        RateFunction::new(WeightDistribution::exponential(1.0).unwrap())
    }
    fn gauss() -> RateFunction {
        RateFunction::new(WeightDistribution::gaussian(0.0, 1.0).unwrap())
    }
    fn bern() -> RateFunction {
        RateFunction::new(WeightDistribution::bernoulli(0.5).unwrap())
    }

    /// Golden-section maximization of xν − Λ(ν) on [0, b]; independent of the
    /// derivative-based search.
    fn golden_rate(dist: &WeightDistribution, x: f64, b: f64) -> f64 {
        let f = |nu: f64| x * nu - dist.log_mgf(nu).unwrap();
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, b);
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b)).max(0.0)
    }

    #[test]
    fn rate_examples() {
        assert_abs_diff_eq!(exp1().rate(2.0), 1.0 - LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(gauss().rate(1.5), 1.125, epsilon = 1e-12);
        assert_abs_diff_eq!(bern().rate(1.0), LN_2, epsilon = 1e-15);
        for r in [exp1(), gauss(), bern()] {
            assert_eq!(r.rate(r.mean()), 0.0);
            assert_eq!(r.rate(r.mean() - 3.0), 0.0);
        }
        assert_eq!(bern().rate(1.01), f64::INFINITY);
        let u = RateFunction::new(WeightDistribution::uniform(0.0, 1.0).unwrap());
        assert_eq!(u.rate(1.0), f64::INFINITY);
    }

    #[test]
    fn closed_form_examples() {
        let e = WeightDistribution::exponential(1.0).unwrap();
        assert_abs_diff_eq!(
            rate_closed_form(&e, 2.0).unwrap(),
            0.306852819440055,
            epsilon = 1e-14
        );
        let g = WeightDistribution::gaussian(0.0, 1.0).unwrap();
        assert_eq!(rate_closed_form(&g, 0.0), Some(0.0));
        let u = WeightDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(rate_closed_form(&u, 0.9), None);
    }

    #[test]
    fn numerical_rate_matches_golden_section_for_families_without_closed_form() {
        for dist in [
            WeightDistribution::geometric(0.5).unwrap(),
            WeightDistribution::geometric(0.2).unwrap(),
            WeightDistribution::uniform(0.0, 2.0).unwrap(),
            WeightDistribution::uniform(-1.0, 3.0).unwrap(),
        ] {
            let r = RateFunction::new(dist);
            let top = dist
                .essential_sup()
                .min(dist.mean() + 6.0 * dist.variance().sqrt());
            for i in 1..40 {
                let x = r.mean() + (top - r.mean()) * i as f64 / 40.0;
                let nu_edge = dist.mgf_domain_sup().min(200.0) * (1.0 - 1e-9);
                let want = golden_rate(&dist, x, nu_edge);
                assert!(
                    (r.rate(x) - want).abs() < 1e-7,
                    "{dist} x={x}: {} vs {want}",
                    r.rate(x)
                );
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let inv = exp1().inverse_plus(LN_2).unwrap();
        assert_abs_diff_eq!(inv.theta, 2.67834699001666, epsilon = 1e-9);
        assert!(!inv.saturated);
        assert_abs_diff_eq!(
            gauss().inverse_plus(LN_2).unwrap().theta,
            (2.0 * LN_2).sqrt(),
            epsilon = 1e-10
        );
        let b = bern().inverse_plus(LN_2).unwrap();
        assert_eq!((b.theta, b.saturated), (1.0, true));
        for r in [exp1(), gauss(), bern()] {
            assert_eq!(r.inverse_plus(0.0).unwrap().theta, r.mean());
        }
        assert!(exp1().inverse_plus(-0.1).is_err());
        assert!(exp1().inverse_plus(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trip_all_families() {
        for dist in [
            WeightDistribution::exponential(1.0).unwrap(),
            WeightDistribution::exponential(3.0).unwrap(),
            WeightDistribution::gaussian(0.0, 1.0).unwrap(),
            WeightDistribution::gaussian(2.0, 0.5).unwrap(),
            WeightDistribution::bernoulli(0.5).unwrap(),
            WeightDistribution::bernoulli(0.1).unwrap(),
            WeightDistribution::geometric(0.4).unwrap(),
            WeightDistribution::uniform(-1.0, 1.0).unwrap(),
        ] {
            let r = RateFunction::new(dist);
            let top = if r.rate_sup().is_finite() {
                0.9 * r.rate_sup()
            } else {
                5.0
            };
            for i in 1..=25 {
                let beta = top * i as f64 / 25.0;
                let inv = r.inverse_plus(beta).unwrap();
                assert!(!inv.saturated);
                assert!(inv.theta > r.mean() && inv.theta < r.essential_sup());
                let back = r.rate(inv.theta);
                assert!((back - beta).abs() < 1e-9, "{dist} β={beta}: {back}");
            }
        }
    }

    #[test]
    fn monotone_and_convex_above_mean() {
        for r in [exp1(), gauss(), bern()] {
            let top = r.essential_sup().min(r.mean() + 8.0);
            let xs: Vec<f64> = (0..=300)
                .map(|i| r.mean() + (top - r.mean()) * i as f64 / 300.0)
                .collect();
            let is: Vec<f64> = xs.iter().map(|&x| r.rate(x)).collect();
            for w in is.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
            for w in xs.windows(3) {
                let mid = r.rate(w[1]);
                let chord = 0.5 * (r.rate(w[0]) + r.rate(w[2]));
                assert!(mid <= chord + 1e-9, "convexity at {}", w[1]);
            }
        }
    }

    #[test]
    fn maximizer_hits_closed_form_for_exponential() {
        let r = exp1();
        for x in [1.1, 2.0, 5.0, 40.0] {
            assert!((r.maximizer(x) - (1.0 - 1.0 / x)).abs() < 1e-9);
        }
    }

    #[test]
    fn bracket_reaches_far_tail() {
        // Large x needs several doublings of the ν bracket.
        let g = gauss();
        assert!((g.rate(50.0) - 1250.0).abs() < 1e-6);
        assert!((g.inverse_plus(1250.0).unwrap().theta - 50.0).abs() < 1e-9);
    }
}
