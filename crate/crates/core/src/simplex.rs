//! Points of the probability simplex and their s-uniform (integer-count) subset.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Entries may dip below zero by this much before being rejected.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Entry sums within this distance of 1 are renormalized; beyond it, rejected.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Default ceiling on the number of enumerated candidates.
pub const DEFAULT_CAP: u128 = 2_000_000;

/// A point of the simplex: a prior, posterior, lottery or mixed strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSimplex("empty vector".into()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSimplex(format!("non-finite entry {bad}")));
        }
        if let Some(bad) = entries.iter().find(|&&v| v < -NEGATIVE_TOLERANCE) {
            return Err(Error::InvalidSimplex(format!("negative entry {bad}")));
        }
        let mut entries: Vec<f64> = entries.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSimplex(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        if sum != 1.0 {
            for v in &mut entries {
                *v /= sum;
            }
        }
        Ok(Self(entries))
    }

    /// Standard basis vector `e_j` in dimension `m`.
    pub fn vertex(m: usize, j: usize) -> Self {
        assert!(j < m, "vertex index out of range");
        let mut v = vec![0.0; m];
        v[j] = 1.0;
        Self(v)
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0);
        Self(vec![1.0 / m as f64; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index of the unique nonzero entry, if this is a vertex.
    pub fn vertex_index(&self) -> Option<usize> {
        let mut nz = self.0.iter().enumerate().filter(|(_, &v)| v > 0.0);
        match (nz.next(), nz.next()) {
            (Some((j, _)), None) => Some(j),
            _ => None,
        }
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexVector::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(v: SimplexVector) -> Self {
        v.0
    }
}

/// An s-uniform distribution stored as integer counts summing to `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SUniformVector {
    counts: Vec<usize>,
    s: usize,
}

impl SUniformVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let s: usize = counts.iter().sum();
        if counts.is_empty() || s == 0 {
            return Err(Error::InvalidParam(
                "s-uniform counts must be nonempty with positive sum".into(),
            ));
        }
        Ok(Self { counts, s })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn entries(&self) -> Vec<f64> {
        let s = self.s as f64;
        self.counts.iter().map(|&c| c as f64 / s).collect()
    }

    pub fn to_simplex(&self) -> SimplexVector {
        SimplexVector(self.entries())
    }
}

/// Number of size-`s` multisets over `m` atoms, `C(m+s-1, s)`, saturating at `u128::MAX`.
pub fn multiset_count(m: usize, s: usize) -> u128 {
    if m == 0 {
        return if s == 0 { 1 } else { 0 };
    }
    binomial((m + s - 1) as u128, s.min(m - 1) as u128)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n-k+i) is divisible by i at every step.
        let Some(next) = acc.checked_mul(n - k + i) else {
            return u128::MAX;
        };
        acc = next / i;
    }
    acc
}

/// All size-`s` multisets over `[m]`, as count vectors.
///
/// Order starts at `(s, 0, ..., 0)` and ends at `(0, ..., 0, s)`: count
/// vectors are visited from lexicographically largest to smallest. The stream
/// can be split into contiguous rank ranges for parallel consumers.
#[derive(Clone, Debug)]
pub struct SUniformEnumeration {
    m: usize,
    s: usize,
    total: u128,
}

pub fn enumerate_s_uniform(m: usize, s: usize, cap: u128) -> Result<SUniformEnumeration> {
    if m == 0 || s == 0 {
        return Err(Error::InvalidParam(format!(
            "m and s must be positive (m={m}, s={s})"
        )));
    }
    let total = multiset_count(m, s);
    if total > cap {
        return Err(Error::CapExceeded { count: total, cap });
    }
    Ok(SUniformEnumeration { m, s, total })
}

impl SUniformEnumeration {
    pub fn len(&self) -> u128 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn iter(&self) -> CountIter {
        self.range(0, self.total)
    }

    /// `len` consecutive count vectors starting at position `start`.
    pub fn range(&self, start: u128, len: u128) -> CountIter {
        let len = len.min(self.total.saturating_sub(start));
        let current = if len > 0 {
            Some(unrank(self.m, self.s, start))
        } else {
            None
        };
        CountIter {
            current,
            remaining: len,
        }
    }

    pub fn vectors(&self) -> impl Iterator<Item = SUniformVector> + '_ {
        let s = self.s;
        self.iter().map(move |counts| SUniformVector { counts, s })
    }
}

/// Count vector at position `rank` of the enumeration order.
pub fn unrank(m: usize, s: usize, mut rank: u128) -> Vec<usize> {
    let mut counts = vec![0usize; m];
    let mut left = s;
    for i in 0..m {
        let parts_after = m - i - 1;
        if parts_after == 0 {
            counts[i] = left;
            break;
        }
        let mut v = left;
        loop {
            let completions = multiset_count(parts_after, left - v);
            if rank < completions {
                break;
            }
            rank -= completions;
            v -= 1;
        }
        counts[i] = v;
        left -= v;
    }
    counts
}

/// Advance `c` to its successor in enumeration order. Returns false at the end.
fn advance(c: &mut [usize]) -> bool {
    let m = c.len();
    if m < 2 {
        return false;
    }
    let Some(i) = (0..m - 1).rev().find(|&i| c[i] > 0) else {
        return false;
    };
    let tail: usize = c[i + 1..].iter().sum();
    c[i] -= 1;
    c[i + 1] = tail + 1;
    for v in &mut c[i + 2..] {
        *v = 0;
    }
    true
}

#[derive(Clone, Debug)]
pub struct CountIter {
    current: Option<Vec<usize>>,
    remaining: u128,
}

impl Iterator for CountIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current.clone()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            let cur = self.current.as_mut().expect("checked above");
            if !advance(cur) {
                self.remaining = 0;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

/// Empirical distribution of `s` i.i.d. draws from `x`.
pub fn empirical_distribution(x: &SimplexVector, s: usize, rng: &mut SeededRng) -> SUniformVector {
    assert!(s >= 1, "empirical_distribution needs s >= 1");
    let mut counts = vec![0usize; x.dim()];
    if let Some(j) = x.vertex_index() {
        counts[j] = s;
        return SUniformVector { counts, s };
    }
    let dist = WeightedIndex::new(x.as_slice()).expect("simplex vector has positive mass");
    for _ in 0..s {
        counts[dist.sample(rng)] += 1;
    }
    SUniformVector { counts, s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn two_atoms_two_samples() {
        let e = enumerate_s_uniform(2, 2, DEFAULT_CAP).unwrap();
        let all: Vec<_> = e.iter().collect();
        assert_eq!(all, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn three_atoms_two_samples() {
        let e = enumerate_s_uniform(3, 2, DEFAULT_CAP).unwrap();
        assert_eq!(e.len(), 6);
        assert_eq!(e.iter().count(), 6);
    }

    #[test]
    fn single_atom() {
        let e = enumerate_s_uniform(1, 5, DEFAULT_CAP).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![vec![5]]);
    }

    #[test]
    fn cap_exceeded_reports_count() {
        match enumerate_s_uniform(10, 30, DEFAULT_CAP) {
            Err(Error::CapExceeded { count, .. }) => assert_eq!(count, binomial(39, 9)),
            other => panic!("expected CapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn exact_count_no_duplicates() {
        for m in 1..=5 {
            for s in 1..=7 {
                let e = enumerate_s_uniform(m, s, DEFAULT_CAP).unwrap();
                let seen: HashSet<Vec<usize>> = e.iter().collect();
                assert_eq!(seen.len() as u128, multiset_count(m, s));
                assert_eq!(e.iter().count() as u128, multiset_count(m, s));
                assert!(seen.iter().all(|c| c.iter().sum::<usize>() == s));
            }
        }
    }

    #[test]
    fn order_is_strictly_decreasing_lexicographically() {
        let e = enumerate_s_uniform(4, 5, DEFAULT_CAP).unwrap();
        let all: Vec<_> = e.iter().collect();
        assert!(all.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn ranges_match_full_stream() {
        let e = enumerate_s_uniform(4, 6, DEFAULT_CAP).unwrap();
        let full: Vec<_> = e.iter().collect();
        for (r, c) in full.iter().enumerate() {
            assert_eq!(&unrank(4, 6, r as u128), c);
        }
        let mut stitched = Vec::new();
        let mut start = 0;
        while start < e.len() {
            stitched.extend(e.range(start, 7));
            start += 7;
        }
        assert_eq!(stitched, full);
    }

    #[test]
    fn simplex_normalization_policy() {
        let v = SimplexVector::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(SimplexVector::new(vec![0.5, 0.49]).is_err());
        assert!(SimplexVector::new(vec![1.0 + 1e-13, -1e-13]).is_ok());
        assert!(SimplexVector::new(vec![1.1, -0.1]).is_err());
        assert!(SimplexVector::new(vec![]).is_err());
    }

    #[test]
    fn point_mass_sampling() {
        let x = SimplexVector::vertex(3, 0);
        let mut rng = SeededRng::new(5);
        for s in [1, 4, 17] {
            assert_eq!(empirical_distribution(&x, s, &mut rng).counts(), &[s, 0, 0]);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let x = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        let a = empirical_distribution(&x, 10, &mut SeededRng::new(9));
        let b = empirical_distribution(&x, 10, &mut SeededRng::new(9));
        assert_eq!(a, b);
        assert_eq!(a.counts().iter().sum::<usize>(), 10);
    }

    #[test]
    fn empirical_mean_matches_binomial_mean() {
        // Mean of counts[0]/s over 1e5 trials; stderr ~ 0.0005, band 0.005.
        let x = SimplexVector::new(vec![0.3, 0.7]).unwrap();
        let mut rng = SeededRng::new(2024);
        let trials = 100_000;
        let s = 10;
        let total: f64 = (0..trials)
            .map(|_| empirical_distribution(&x, s, &mut rng).counts()[0] as f64 / s as f64)
            .sum();
        let mean = total / trials as f64;
        assert!((mean - 0.3).abs() < 0.005, "mean {mean}");
    }
}
