//! Probability vectors, entropy and the majorization order.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Input vectors whose total deviates from one by more than this are rejected.
pub const SUM_INPUT_TOLERANCE: f64 = 1e-6;
/// Slack used in majorization partial-sum comparisons.
pub const MAJORIZATION_SLACK: f64 = 1e-12;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
    adjustment: f64,
}

/// Sum of the entries in descending order, so the result does not depend on
/// coordinate order.
pub(crate) fn sorted_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter().sum()
}

impl ProbabilityVector {
    /// Validates and renormalizes `p`. Entries must be finite and
    /// non-negative and sum to one within [`SUM_INPUT_TOLERANCE`].
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::NotOnSimplex("empty vector".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::NotOnSimplex(format!(
                "entry {x} is not a finite non-negative number"
            )));
        }
        let total = sorted_sum(&p);
        if (total - 1.0).abs() > SUM_INPUT_TOLERANCE {
            return Err(Error::NotOnSimplex(format!("entries sum to {total}")));
        }
        let p = p.into_iter().map(|x| x / total).collect();
        Ok(Self {
            p,
            adjustment: total - 1.0,
        })
    }

    /// Normalizes a non-negative, nonzero direction to the simplex. Returns
    /// the vector and the ℓ¹ norm of the input.
    pub fn from_direction(direction: &[f64]) -> Result<(Self, f64)> {
        if direction.is_empty() {
            return Err(Error::InvalidArgument(
                "direction must have at least one entry".into(),
            ));
        }
        if direction.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument(
                "direction entries must be finite and non-negative".into(),
            ));
        }
        let scale = sorted_sum(direction);
        if scale <= 0.0 {
            return Err(Error::InvalidArgument("direction must be nonzero".into()));
        }
        let p = direction.iter().map(|x| x / scale).collect();
        Ok((Self { p, adjustment: 0.0 }, scale))
    }

    /// Unit vector along `axis`.
    pub fn vertex(d: usize, axis: usize) -> Self {
        assert!(axis < d);
        let mut p = vec![0.0; d];
        p[axis] = 1.0;
        Self { p, adjustment: 0.0 }
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            p: vec![1.0 / d as f64; d],
            adjustment: 0.0,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// Deviation of the raw input total from one, removed at construction.
    pub fn normalization_adjustment(&self) -> f64 {
        self.adjustment
    }

    /// Shannon entropy in nats with `0·log 0 = 0`. Terms are summed in
    /// sorted order so permuted vectors give bit-identical results.
    pub fn entropy(&self) -> f64 {
        let mut v = self.p.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        let h: f64 = v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
        h.max(0.0)
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy() / std::f64::consts::LN_2
    }

    fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.p.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Robin Hood transfer: moves `delta` from entry `from` to entry `to`.
    /// Requires `p[from] ≥ p[to]` and `0 ≤ delta ≤ (p[from] − p[to]) / 2`
    /// so the two entries do not cross; the result is majorized by `self`.
    pub fn robin_hood_transfer(&self, from: usize, to: usize, delta: f64) -> Result<Self> {
        let d = self.dim();
        if from >= d || to >= d || from == to {
            return Err(Error::InvalidArgument(format!(
                "bad transfer indices {from} -> {to}"
            )));
        }
        let gap = self.p[from] - self.p[to];
        if gap < 0.0 || !(0.0..=gap / 2.0 + 1e-15).contains(&delta) {
            return Err(Error::InvalidArgument(format!(
                "transfer of {delta} from {} to {} would cross",
                self.p[from], self.p[to]
            )));
        }
        let mut p = self.p.clone();
        p[from] -= delta;
        p[to] += delta;
        Ok(Self { p, adjustment: 0.0 })
    }
}

/// True iff `x ≺ y`, i.e. `y` majorizes `x`: descending partial sums of `x`
/// are dominated by those of `y` for `k < d`, with equal totals.
pub fn majorizes(x: &ProbabilityVector, y: &ProbabilityVector) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let (xs, ys) = (x.sorted_desc(), y.sorted_desc());
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..xs.len() {
        sx += xs[k];
        sy += ys[k];
        if k + 1 < xs.len() && sx > sy + MAJORIZATION_SLACK {
            return Ok(false);
        }
    }
    Ok((sx - sy).abs() <= MAJORIZATION_SLACK)
}

/// Flat-Dirichlet point on the `d`-simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProbabilityVector {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    ProbabilityVector::from_direction(&e)
        .map(|(p, _)| p)
        .unwrap_or_else(|_| ProbabilityVector::uniform(d))
}

/// Draws `y` uniformly on the simplex and derives `x` from it by a random
/// number (possibly zero) of Robin Hood transfers, so `x ≺ y` by
/// construction.
pub fn random_majorization_pair<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> Result<(ProbabilityVector, ProbabilityVector)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "majorization pairs need d ≥ 2, got {d}"
        )));
    }
    let y = random_simplex_point(d, rng);
    let transfers = rng.random_range(0..=2 * d);
    let mut x = y.clone();
    for _ in 0..transfers {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let (from, to) = if x.p[i] >= x.p[j] { (i, j) } else { (j, i) };
        let gap = x.p[from] - x.p[to];
        let delta = rng.random::<f64>() * gap / 2.0;
        x = x.robin_hood_transfer(from, to, delta)?;
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(pv(&[0.5, 0.5]).entropy(), LN_2, epsilon = 1e-15);
        assert_eq!(pv(&[1.0, 0.0]).entropy(), 0.0);
        assert_abs_diff_eq!(
            pv(&[0.5, 0.25, 0.25]).entropy(),
            1.5 * LN_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(pv(&[0.5, 0.25, 0.25]).entropy_bits(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_off_simplex_input() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        let p = ProbabilityVector::new(vec![0.5, 0.5 + 1e-9]).unwrap();
        assert_abs_diff_eq!(p.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(p.normalization_adjustment() > 0.0);
    }

    #[test]
    fn from_direction_rejects_zero_and_negative() {
        assert!(ProbabilityVector::from_direction(&[0.0, 0.0]).is_err());
        assert!(ProbabilityVector::from_direction(&[1.0, -1.0]).is_err());
        let (p, s) = ProbabilityVector::from_direction(&[3.0, 1.0]).unwrap();
        assert_eq!(s, 4.0);
        assert_eq!(p.as_slice(), &[0.75, 0.25]);
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap());
        assert!(majorizes(
            &pv(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
            &pv(&[0.4, 0.3, 0.3])
        )
        .unwrap());
        assert!(!majorizes(&pv(&[0.6, 0.4]), &pv(&[0.5, 0.5])).unwrap());
        assert!(majorizes(&pv(&[0.5, 0.5]), &pv(&[1.0])).is_err());
    }

    #[test]
    fn single_transfer_example() {
        let y = pv(&[0.9, 0.1]);
        let x = y.robin_hood_transfer(0, 1, 0.2).unwrap();
        assert_abs_diff_eq!(x.as_slice()[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(x.as_slice()[1], 0.3, epsilon = 1e-15);
        assert!(majorizes(&x, &y).unwrap());
        assert!(y.robin_hood_transfer(0, 1, 0.5).is_err());
        assert!(y.robin_hood_transfer(1, 0, 0.1).is_err());
    }

    #[test]
    fn zero_transfers_is_reflexive() {
        let y = pv(&[0.2, 0.3, 0.5]);
        assert!(majorizes(&y, &y).unwrap());
    }

    #[test]
    fn generated_pairs_are_ordered_and_entropy_is_schur_concave() {
        for &d in &[2usize, 3, 5] {
            let mut s = RandomStream::new(2024, d as u64);
            for _ in 0..1000 {
                let (x, y) = random_majorization_pair(d, &mut s).unwrap();
                assert!(majorizes(&x, &y).unwrap());
                assert!(y.entropy() <= x.entropy() + 1e-12);
            }
        }
    }

    #[test]
    fn pair_generation_needs_two_dims() {
        let mut s = RandomStream::new(0, 0);
        assert!(random_majorization_pair(1, &mut s).is_err());
    }

    proptest! {
        #[test]
        fn entropy_range_and_permutation_invariance(raw in prop::collection::vec(0.0f64..1.0, 1..7), seed in any::<u64>()) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let (p, _) = ProbabilityVector::from_direction(&raw).unwrap();
            let h = p.entropy();
            prop_assert!(h >= 0.0 && h <= (p.dim() as f64).ln() + 1e-12);
            let mut perm = raw.clone();
            let k = (seed as usize) % perm.len();
            perm.rotate_left(k);
            perm.reverse();
            let (q, _) = ProbabilityVector::from_direction(&perm).unwrap();
            prop_assert_eq!(q.entropy().to_bits(), h.to_bits());
        }

        #[test]
        fn majorization_is_transitive(seed in any::<u64>(), d in 2usize..6) {
            let mut s = RandomStream::new(seed, 0);
            let (y, z) = random_majorization_pair(d, &mut s).unwrap();
            // Push y further toward uniform to get x ≺ y ≺ z.
            let mut x = y.clone();
            for _ in 0..3 {
                let v = x.as_slice();
                let (mut hi, mut lo) = (0, 0);
                for i in 0..d {
                    if v[i] > v[hi] { hi = i; }
                    if v[i] < v[lo] { lo = i; }
                }
                if hi == lo { break; }
                let gap = v[hi] - v[lo];
                x = x.robin_hood_transfer(hi, lo, gap / 4.0).unwrap();
            }
            prop_assert!(majorizes(&x, &y).unwrap());
            prop_assert!(majorizes(&y, &z).unwrap());
            prop_assert!(majorizes(&x, &z).unwrap());
        }
    }
}
