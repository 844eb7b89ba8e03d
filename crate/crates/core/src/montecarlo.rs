//! Monte Carlo estimates of the growth rate and of the upper-tail
//! probability `P[T(l·p)/l > α]`.
//!
//! Replicate `r` of an experiment draws its weights from the stream
//! addressed by `(master_seed, [tag, ..., r])` (see [`crate::rng`]), and
//! replicate results are reduced in index order. Output is therefore a pure
//! function of the inputs, independent of the rayon pool size.

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{evaluate_bound_with, BoundReport};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, RationalDirection};
use crate::ldp::RateFunction;
use crate::lpp::{box_cells, last_passage_time, WeightField, DEFAULT_CELL_CAP};
use crate::rng::RandomStream;
use crate::simplex::ProbabilityVector;
use crate::weights::WeightDistribution;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

const TAG_GROWTH: u64 = 1;
const TAG_TAIL: u64 = 2;
const TAG_COMPARE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Largest weight field, in lattice sites, a replicate may allocate.
    pub cell_cap: u128,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

/// `(1/n)·T(⌊n x⌋)` averaged over replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub replicates: usize,
    pub n: u64,
    pub target: Vec<usize>,
}

impl Estimate {
    pub fn ci95(&self) -> (f64, f64) {
        (
            self.value - Z95 * self.stderr,
            self.value + Z95 * self.stderr,
        )
    }
}

/// Pairwise summation; the split points depend only on the length.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error (zero for a single sample).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 1);
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Wilson score interval at 95%, clamped so `low ≤ k/n ≤ high`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = (center - half).max(0.0).min(p);
    let high = (center + half).min(1.0).max(p);
    (low, high)
}

fn check_direction(x: &[f64]) -> Result<()> {
    ProbabilityVector::from_direction(x).map(|_| ())
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < 1 {
        return Err(Error::InvalidArgument("replicates must be ≥ 1".into()));
    }
    Ok(())
}

fn growth_at(
    dist: &WeightDistribution,
    x: &[f64],
    n: u64,
    replicates: usize,
    master_seed: u64,
    address: &[u64],
    opts: &McOptions,
) -> Result<Estimate> {
    let target = LatticePoint::floor_scaled(x, n)?;
    let cells = box_cells(&target, u128::MAX)? as u128;
    if cells > opts.cell_cap {
        return Err(Error::ScaleTooLarge {
            n,
            cells,
            cap: opts.cell_cap,
        });
    }
    let samples: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut addr = address.to_vec();
            addr.push(r);
            let mut stream = RandomStream::derive(master_seed, &addr);
            let field = WeightField::sample(dist, target.clone(), &mut stream, opts.cell_cap)?;
            Ok(last_passage_time(&field, &target)? / n as f64)
        })
        .collect::<Result<_>>()?;
    let (value, stderr) = mean_and_stderr(&samples);
    Ok(Estimate {
        value,
        stderr,
        replicates,
        n,
        target: target.coords().to_vec(),
    })
}

/// The weight field replicate `replicate` at scale `n` of
/// [`estimate_growth_rate`] would use.
pub fn growth_field(
    dist: &WeightDistribution,
    x: &[f64],
    n: u64,
    replicate: u64,
    master_seed: u64,
    opts: &McOptions,
) -> Result<WeightField> {
    let target = LatticePoint::floor_scaled(x, n)?;
    let mut stream = RandomStream::derive(master_seed, &[TAG_GROWTH, n, replicate]);
    WeightField::sample(dist, target, &mut stream, opts.cell_cap)
}

pub fn estimate_growth_rate(
    dist: &WeightDistribution,
    x: &[f64],
    n_schedule: &[u64],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<Estimate>> {
    estimate_growth_rate_with(
        dist,
        x,
        n_schedule,
        replicates,
        master_seed,
        &McOptions::default(),
    )
}

/// Estimates `(1/n) E[T(⌊n x⌋)]` for each `n` of a strictly increasing
/// schedule.
pub fn estimate_growth_rate_with(
    dist: &WeightDistribution,
    x: &[f64],
    n_schedule: &[u64],
    replicates: usize,
    master_seed: u64,
    opts: &McOptions,
) -> Result<Vec<Estimate>> {
    check_direction(x)?;
    check_replicates(replicates)?;
    if n_schedule.is_empty() || n_schedule[0] < 1 || n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n schedule must be non-empty, strictly increasing, with every n ≥ 1".into(),
        ));
    }
    // Size check for the whole schedule before any work starts.
    for &n in n_schedule {
        let cells = box_cells(&LatticePoint::floor_scaled(x, n)?, u128::MAX)? as u128;
        if cells > opts.cell_cap {
            return Err(Error::ScaleTooLarge {
                n,
                cells,
                cap: opts.cell_cap,
            });
        }
    }
    n_schedule
        .iter()
        .map(|&n| growth_at(dist, x, n, replicates, master_seed, &[TAG_GROWTH, n], opts))
        .collect()
}

/// True when the last two estimates of a schedule agree within two pooled
/// standard errors.
pub fn schedule_converged(estimates: &[Estimate]) -> bool {
    match estimates {
        [.., a, b] => (b.value - a.value).abs() <= 2.0 * a.stderr.hypot(b.stderr),
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailExperimentResult {
    pub l: u64,
    pub alpha: f64,
    pub exceedances: u64,
    pub empirical_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `exp(−l (I(α) − H(p)))` when `I(α) > H(p)`, else 1.
    pub chernoff_bound: f64,
    pub replicates: usize,
    /// A single replicate carries no interval information; the CI is `[0, 1]`.
    pub degenerate_ci: bool,
    /// `α > I₊⁻¹(H(p))`, the regime in which decay is predicted.
    pub above_threshold: bool,
}

/// Exceedance frequency of `T(l·p̂)/l > α` for each `l`, where `p̂ = x/m` is
/// the rational direction. Every `l` must be a multiple of `m`.
pub fn tail_probability_experiment(
    dist: &WeightDistribution,
    direction: &RationalDirection,
    alpha: f64,
    l_schedule: &[u64],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<TailExperimentResult>> {
    tail_probability_experiment_with(
        dist,
        direction,
        alpha,
        l_schedule,
        replicates,
        master_seed,
        &McOptions::default(),
    )
}

pub fn tail_probability_experiment_with(
    dist: &WeightDistribution,
    direction: &RationalDirection,
    alpha: f64,
    l_schedule: &[u64],
    replicates: usize,
    master_seed: u64,
    opts: &McOptions,
) -> Result<Vec<TailExperimentResult>> {
    check_replicates(replicates)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    let m = direction.m;
    if let Some(&l) = l_schedule.iter().find(|&&l| l == 0 || l % m != 0) {
        return Err(Error::NotMultipleOfScale { l, m });
    }
    let rate = RateFunction::new(*dist);
    let entropy = direction.rational_p().entropy();
    let threshold = rate.inverse_plus(entropy)?.theta;
    let excess = rate.rate(alpha) - entropy;

    l_schedule
        .iter()
        .map(|&l| {
            let target = direction.x.scaled((l / m) as usize);
            let cells = box_cells(&target, u128::MAX)? as u128;
            if cells > opts.cell_cap {
                return Err(Error::ScaleTooLarge {
                    n: l,
                    cells,
                    cap: opts.cell_cap,
                });
            }
            let hits: Vec<bool> = (0..replicates as u64)
                .into_par_iter()
                .map(|r| {
                    let mut stream = RandomStream::derive(master_seed, &[TAG_TAIL, l, r]);
                    let field =
                        WeightField::sample(dist, target.clone(), &mut stream, opts.cell_cap)?;
                    Ok(last_passage_time(&field, &target)? / l as f64 > alpha)
                })
                .collect::<Result<_>>()?;
            let exceedances = hits.iter().filter(|&&h| h).count() as u64;
            let empirical_prob = exceedances as f64 / replicates as f64;
            let degenerate_ci = replicates == 1;
            let (ci_low, ci_high) = if degenerate_ci {
                (0.0, 1.0)
            } else {
                wilson_interval(exceedances, replicates as u64)
            };
            let chernoff_bound = if excess > 0.0 {
                (-(l as f64) * excess).exp()
            } else {
                1.0
            };
            Ok(TailExperimentResult {
                l,
                alpha,
                exceedances,
                empirical_prob,
                ci_low,
                ci_high,
                chernoff_bound,
                replicates,
                degenerate_ci,
                above_threshold: alpha > threshold,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub direction: Vec<f64>,
    pub estimate: Estimate,
    pub bound: BoundReport,
    /// `bound − estimate`
    pub gap: f64,
}

/// Growth-rate estimate at scale `n` next to the entropy bound, per
/// direction. Each direction draws from its own family of streams.
pub fn compare_bound_to_simulation(
    dist: &WeightDistribution,
    directions: &[Vec<f64>],
    n: u64,
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<ComparisonRow>> {
    compare_bound_to_simulation_with(
        dist,
        directions,
        n,
        replicates,
        master_seed,
        &McOptions::default(),
    )
}

pub fn compare_bound_to_simulation_with(
    dist: &WeightDistribution,
    directions: &[Vec<f64>],
    n: u64,
    replicates: usize,
    master_seed: u64,
    opts: &McOptions,
) -> Result<Vec<ComparisonRow>> {
    check_replicates(replicates)?;
    if n < 1 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let rate = RateFunction::new(*dist);
    directions
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let bound = evaluate_bound_with(&rate, x)?;
            let estimate = growth_at(
                dist,
                x,
                n,
                replicates,
                master_seed,
                &[TAG_COMPARE, i as u64, n],
                opts,
            )?;
            Ok(ComparisonRow {
                direction: x.clone(),
                gap: bound.bound_on_g - estimate.value,
                estimate,
                bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rationalize;

    fn exp1() -> WeightDistribution {
        WeightDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn wilson_properties() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.95 && hi == 1.0);
    }

    #[test]
    fn moments() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn axis_direction_estimates_the_mean() {
        let est = estimate_growth_rate(&exp1(), &[1.0, 0.0], &[50, 200], 100, 5).unwrap();
        for e in &est {
            assert!((e.value - 1.0).abs() < 4.0 * e.stderr, "{e:?}");
        }
        assert_eq!(est[1].target, vec![200, 0]);
    }

    #[test]
    fn floor_is_elementwise() {
        let est = estimate_growth_rate(&exp1(), &[0.5, 0.25], &[7], 2, 0).unwrap();
        assert_eq!(est[0].target, vec![3, 1]);
    }

    #[test]
    fn schedule_validation() {
        assert!(estimate_growth_rate(&exp1(), &[1.0, 1.0], &[10, 10], 2, 0).is_err());
        assert!(estimate_growth_rate(&exp1(), &[1.0, 1.0], &[0, 10], 2, 0).is_err());
        assert!(estimate_growth_rate(&exp1(), &[1.0, 1.0], &[], 2, 0).is_err());
        assert!(estimate_growth_rate(&exp1(), &[1.0, 1.0], &[10], 0, 0).is_err());
        assert!(estimate_growth_rate(&exp1(), &[0.0, 0.0], &[10], 2, 0).is_err());
        let opts = McOptions { cell_cap: 10_000 };
        let err =
            estimate_growth_rate_with(&exp1(), &[1.0, 1.0], &[10, 200], 2, 0, &opts).unwrap_err();
        assert!(matches!(err, Error::ScaleTooLarge { n: 200, .. }));
    }

    #[test]
    fn deterministic_across_pool_sizes() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_growth_rate(&exp1(), &[1.0, 1.0], &[20, 40], 64, 99).unwrap())
        };
        let a = run(1);
        let b = run(7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
            assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
        }
    }

    #[test]
    fn growth_field_matches_replicate() {
        let f = growth_field(&exp1(), &[1.0, 1.0], 6, 0, 3, &McOptions::default()).unwrap();
        let t = last_passage_time(&f, &LatticePoint::new(vec![6, 6]).unwrap()).unwrap() / 6.0;
        let est = estimate_growth_rate(&exp1(), &[1.0, 1.0], &[6], 1, 3).unwrap();
        assert_eq!(est[0].value, t);
    }

    #[test]
    fn tail_requires_multiples_of_m() {
        let p = ProbabilityVector::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let r = rationalize(&p, 10).unwrap();
        let err = tail_probability_experiment(&exp1(), &r, 3.0, &[6, 7], 10, 0).unwrap_err();
        assert_eq!(err, Error::NotMultipleOfScale { l: 7, m: 3 });
        assert!(tail_probability_experiment(&exp1(), &r, 3.0, &[6], 0, 0).is_err());
    }

    #[test]
    fn tail_below_mean_has_no_decay_claim() {
        let r = rationalize(&ProbabilityVector::uniform(2), 10).unwrap();
        let res = tail_probability_experiment(&exp1(), &r, 0.5, &[8, 32], 500, 1).unwrap();
        for t in &res {
            assert_eq!(t.chernoff_bound, 1.0);
            assert!(!t.above_threshold);
        }
        assert!(res[1].empirical_prob > 0.99);
    }

    #[test]
    fn single_replicate_ci_is_degenerate() {
        let r = rationalize(&ProbabilityVector::uniform(2), 10).unwrap();
        let res = tail_probability_experiment(&exp1(), &r, 3.0, &[8], 1, 1).unwrap();
        assert!(res[0].degenerate_ci);
        assert_eq!((res[0].ci_low, res[0].ci_high), (0.0, 1.0));
    }

    #[test]
    fn tail_ci_brackets_estimate() {
        let r = rationalize(&ProbabilityVector::uniform(2), 10).unwrap();
        for t in tail_probability_experiment(&exp1(), &r, 2.2, &[4, 8, 16], 2000, 4).unwrap() {
            assert!(0.0 <= t.ci_low && t.ci_low <= t.empirical_prob);
            assert!(t.empirical_prob <= t.ci_high && t.ci_high <= 1.0);
        }
    }

    #[test]
    fn compare_rows() {
        let rows =
            compare_bound_to_simulation(&exp1(), &[vec![1.0, 0.0], vec![1.0, 1.0]], 60, 40, 8)
                .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bound.bound_on_g, 1.0);
        assert!(rows[0].gap.abs() < 4.0 * rows[0].estimate.stderr);
        assert!(rows[1].gap > 0.0);
    }
}
