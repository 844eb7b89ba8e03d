//! The entropy bound `g(p) ≤ I₊⁻¹(H(p))`, extended to arbitrary non-negative
//! directions through `g(αx) = α g(x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ldp::RateFunction;
use crate::simplex::ProbabilityVector;
use crate::weights::WeightDistribution;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub direction: Vec<f64>,
    pub p: Vec<f64>,
    /// ℓ¹ norm of `direction`.
    pub scale: f64,
    pub entropy_nats: f64,
    pub bound_on_g: f64,
    /// The inverse saturated at the essential supremum.
    pub degenerate: bool,
}

pub fn evaluate_bound(dist: &WeightDistribution, direction: &[f64]) -> Result<BoundReport> {
    evaluate_bound_with(&RateFunction::new(*dist), direction)
}

/// Same as [`evaluate_bound`], reusing a rate-function handle.
pub fn evaluate_bound_with(rate: &RateFunction, direction: &[f64]) -> Result<BoundReport> {
    let (p, scale) = ProbabilityVector::from_direction(direction)?;
    let entropy = p.entropy();
    let inv = rate.inverse_plus(entropy)?;
    Ok(BoundReport {
        direction: direction.to_vec(),
        p: p.as_slice().to_vec(),
        scale,
        entropy_nats: entropy,
        bound_on_g: scale * inv.theta,
        degenerate: inv.saturated,
    })
}

/// Points `k/resolution` on the `d`-simplex in ascending lexicographic order.
pub fn simplex_grid(d: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(d: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(d - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut ks = Vec::new();
    rec(d, resolution, &mut Vec::new(), &mut ks);
    ks.into_iter()
        .map(|k| {
            k.into_iter()
                .map(|c| c as f64 / resolution as f64)
                .collect()
        })
        .collect()
}

/// The bound at every point of the resolution grid on the `d`-simplex.
pub fn bound_on_simplex_grid(
    dist: &WeightDistribution,
    d: usize,
    resolution: usize,
) -> Result<Vec<BoundReport>> {
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "grid dimension must be 2 or 3, got {d}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be ≥ 2, got {resolution}"
        )));
    }
    let rate = RateFunction::new(*dist);
    simplex_grid(d, resolution)
        .par_iter()
        .map(|p| evaluate_bound_with(&rate, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::simplex::random_majorization_pair;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn exp1() -> WeightDistribution {
        WeightDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn exponential_diagonal() {
        let r = evaluate_bound(&exp1(), &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(r.bound_on_g, 5.35669398003332, epsilon = 1e-9);
        assert_eq!(r.scale, 2.0);
        assert!(!r.degenerate);
        // Known limit shape (√x + √y)² gives g(1,1) = 4.
        assert!(r.bound_on_g > 4.0);
    }

    #[test]
    fn vertices_are_exact() {
        for dist in [
            exp1(),
            WeightDistribution::gaussian(-0.3, 2.0).unwrap(),
            WeightDistribution::bernoulli(0.3).unwrap(),
            WeightDistribution::geometric(0.6).unwrap(),
            WeightDistribution::uniform(1.0, 4.0).unwrap(),
        ] {
            for axis in 0..3 {
                let mut e = vec![0.0; 3];
                e[axis] = 1.0;
                let r = evaluate_bound(&dist, &e).unwrap();
                assert_eq!(r.bound_on_g, dist.mean());
                assert_eq!(r.entropy_nats, 0.0);
            }
            let r = evaluate_bound(&dist, &[0.0, 3.0]).unwrap();
            assert_eq!(r.bound_on_g, 3.0 * dist.mean());
        }
    }

    #[test]
    fn bernoulli_saturates() {
        let r = evaluate_bound(&WeightDistribution::bernoulli(0.5).unwrap(), &[1.0, 1.0]).unwrap();
        assert_eq!(r.bound_on_g, 2.0);
        assert!(r.degenerate);
    }

    #[test]
    fn rejects_bad_directions() {
        assert!(evaluate_bound(&exp1(), &[0.0, 0.0]).is_err());
        assert!(evaluate_bound(&exp1(), &[1.0, -0.5]).is_err());
        assert!(evaluate_bound(&exp1(), &[]).is_err());
    }

    #[test]
    fn grid_rows() {
        let rows = bound_on_simplex_grid(&exp1(), 2, 2).unwrap();
        let ps: Vec<Vec<f64>> = rows.iter().map(|r| r.p.clone()).collect();
        assert_eq!(ps, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert_eq!(rows[0].bound_on_g, 1.0);
        assert_abs_diff_eq!(rows[1].bound_on_g, 2.67834699001666, epsilon = 1e-9);
        assert_eq!(rows[2].bound_on_g, 1.0);
        assert_eq!(bound_on_simplex_grid(&exp1(), 3, 4).unwrap().len(), 15);
        assert!(bound_on_simplex_grid(&exp1(), 2, 1).is_err());
        assert!(bound_on_simplex_grid(&exp1(), 4, 4).is_err());
    }

    #[test]
    fn grid_symmetry_and_peak() {
        let g = WeightDistribution::gaussian(0.0, 1.0).unwrap();
        let rows = bound_on_simplex_grid(&g, 2, 4).unwrap();
        let n = rows.len();
        for i in 0..n {
            assert_eq!(rows[i].bound_on_g, rows[n - 1 - i].bound_on_g);
        }
        let argmax = (0..n)
            .max_by(|&a, &b| rows[a].bound_on_g.total_cmp(&rows[b].bound_on_g))
            .unwrap();
        assert_eq!(rows[argmax].p, vec![0.5, 0.5]);
    }

    #[test]
    fn floor_dominance() {
        let mut s = RandomStream::new(17, 0);
        for dist in [exp1(), WeightDistribution::gaussian(1.0, 0.5).unwrap()] {
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| s.random::<f64>() * 5.0).collect();
                let r = evaluate_bound(&dist, &x).unwrap();
                assert!(r.bound_on_g > r.scale * dist.mean());
            }
        }
    }

    #[test]
    fn schur_concave_on_generated_pairs() {
        let mut s = RandomStream::new(3, 3);
        let dist = WeightDistribution::geometric(0.5).unwrap();
        for d in [2, 4] {
            for _ in 0..200 {
                let (x, y) = random_majorization_pair(d, &mut s).unwrap();
                let bx = evaluate_bound(&dist, x.as_slice()).unwrap().bound_on_g;
                let by = evaluate_bound(&dist, y.as_slice()).unwrap().bound_on_g;
                assert!(by <= bx + 1e-9);
            }
        }
    }
}
