//! Directed-path combinatorics on `Z₊^d`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

pub const DEFAULT_ENUMERATION_CAP: u64 = 16;

/// A non-negative integer lattice point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<usize>);

impl LatticePoint {
    pub fn new(coords: Vec<usize>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("lattice point needs d ≥ 1".into()));
        }
        Ok(Self(coords))
    }

    pub fn origin(d: usize) -> Self {
        assert!(d >= 1);
        Self(vec![0; d])
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// ℓ¹ norm, the number of unit steps from the origin.
    pub fn total_steps(&self) -> u64 {
        self.0.iter().map(|&c| c as u64).sum()
    }

    /// Componentwise `⌊n·x⌋`.
    pub fn floor_scaled(x: &[f64], n: u64) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "direction entries must be finite and non-negative".into(),
            ));
        }
        Self::new(x.iter().map(|v| (v * n as f64).floor() as usize).collect())
    }

    pub fn scaled(&self, k: usize) -> Self {
        Self(self.0.iter().map(|c| c * k).collect())
    }

    pub fn dominated_by(&self, other: &LatticePoint) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A directed path from the origin, stored as the sequence of axes (0-based)
/// along which each unit step is taken. Vertices are the prefix sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedPath {
    pub steps: Vec<usize>,
}

impl DirectedPath {
    pub fn endpoint(&self, d: usize) -> LatticePoint {
        let mut c = vec![0; d];
        for &s in &self.steps {
            c[s] += 1;
        }
        LatticePoint(c)
    }

    /// Lattice points visited after leaving the origin.
    pub fn vertices(&self, d: usize) -> Vec<LatticePoint> {
        let mut c = vec![0; d];
        self.steps
            .iter()
            .map(|&s| {
                c[s] += 1;
                LatticePoint(c.clone())
            })
            .collect()
    }
}

/// Exact multinomial `‖z‖₁! / Π zᵢ!`.
pub fn count_paths(z: &LatticePoint) -> BigUint {
    // Product of binomials C(z₁+…+zₖ, zₖ), each built incrementally.
    let mut count = BigUint::one();
    let mut total: u64 = 0;
    for &c in z.coords() {
        for j in 1..=c as u64 {
            total += 1;
            count *= total;
            count /= j;
        }
    }
    count
}

/// `ln |Π(z)|` as a float, for comparisons at sizes where the count itself
/// overflows `f64`.
pub fn log_count_paths(z: &LatticePoint) -> f64 {
    fn ln_factorial(n: u64) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }
    ln_factorial(z.total_steps())
        - z.coords()
            .iter()
            .map(|&c| ln_factorial(c as u64))
            .sum::<f64>()
}

/// `exp(‖z‖₁ · H(z/‖z‖₁))` in nats.
pub fn entropy_count_bound(z: &LatticePoint) -> Result<f64> {
    Ok(entropy_count_exponent(z)?.exp())
}

/// `‖z‖₁ · H(z/‖z‖₁)`.
pub fn entropy_count_exponent(z: &LatticePoint) -> Result<f64> {
    let n = z.total_steps();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "entropy bound needs ‖z‖₁ ≥ 1".into(),
        ));
    }
    let dir: Vec<f64> = z.coords().iter().map(|&c| c as f64).collect();
    let (p, _) = ProbabilityVector::from_direction(&dir)?;
    Ok(n as f64 * p.entropy())
}

/// Calls `visit` once per directed path to `z`, in lexicographic order of
/// the step sequence. The slice is reused between calls.
pub fn for_each_path<F: FnMut(&[usize])>(z: &LatticePoint, mut visit: F) {
    let mut steps: Vec<usize> = z
        .coords()
        .iter()
        .enumerate()
        .flat_map(|(axis, &c)| std::iter::repeat_n(axis, c))
        .collect();
    loop {
        visit(&steps);
        if !next_permutation(&mut steps) {
            break;
        }
    }
}

/// Lexicographic successor of a multiset permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All directed paths from the origin to `z`, refusing when `‖z‖₁ > cap`.
pub fn enumerate_paths_capped(z: &LatticePoint, cap: u64) -> Result<Vec<DirectedPath>> {
    let steps = z.total_steps();
    if steps > cap {
        return Err(Error::EnumerationCap {
            steps,
            cap,
            count: count_paths(z),
        });
    }
    let mut out = Vec::new();
    for_each_path(z, |s| out.push(DirectedPath { steps: s.to_vec() }));
    Ok(out)
}

pub fn enumerate_paths(z: &LatticePoint) -> Result<Vec<DirectedPath>> {
    enumerate_paths_capped(z, DEFAULT_ENUMERATION_CAP)
}

/// A lattice point `x = m·p̂` approximating a probability vector `p` by `p̂ = x/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalDirection {
    pub p: ProbabilityVector,
    pub m: u64,
    pub x: LatticePoint,
    /// `max |xᵢ/m − pᵢ|`
    pub error: f64,
}

impl RationalDirection {
    /// The rational probability vector `x/m` actually represented.
    pub fn rational_p(&self) -> ProbabilityVector {
        let v: Vec<f64> = self
            .x
            .coords()
            .iter()
            .map(|&c| c as f64 / self.m as f64)
            .collect();
        ProbabilityVector::from_direction(&v)
            .map(|(p, _)| p)
            .expect("x has ‖x‖₁ = m ≥ 1")
    }
}

/// Errors within this distance of each other count as ties when scanning
/// denominators, so exactly representable vectors land on their smallest `m`.
const RATIONALIZE_TIE: f64 = 1e-12;

/// Largest-remainder rounding of `m·p` to integers summing to `m`.
fn apportion(p: &[f64], m: u64) -> Vec<usize> {
    let scaled: Vec<f64> = p.iter().map(|&v| v * m as f64).collect();
    let mut x: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
    let assigned: u64 = x.iter().map(|&c| c as u64).sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let remaining = m.saturating_sub(assigned) as usize;
    for &i in order.iter().cycle().take(remaining) {
        x[i] += 1;
    }
    x
}

/// Scans `m = 1..=max_denominator` and returns the smallest `m` whose
/// largest-remainder rounding `x` minimizes `max |xᵢ/m − pᵢ|`.
pub fn rationalize(p: &ProbabilityVector, max_denominator: u64) -> Result<RationalDirection> {
    if max_denominator == 0 {
        return Err(Error::InvalidArgument("max_denominator must be ≥ 1".into()));
    }
    let pv = p.as_slice();
    let mut best: Option<(u64, Vec<usize>, f64)> = None;
    for m in 1..=max_denominator {
        let x = apportion(pv, m);
        let err = x
            .iter()
            .zip(pv)
            .map(|(&c, &q)| (c as f64 / m as f64 - q).abs())
            .fold(0.0, f64::max);
        let better = match &best {
            None => true,
            Some((_, _, e)) => err < e - RATIONALIZE_TIE,
        };
        if better {
            let exact = err <= RATIONALIZE_TIE;
            best = Some((m, x, err));
            if exact {
                break;
            }
        }
    }
    let (m, x, error) = best.expect("at least one denominator scanned");
    Ok(RationalDirection {
        p: p.clone(),
        m,
        x: LatticePoint(x),
        error,
    })
}
