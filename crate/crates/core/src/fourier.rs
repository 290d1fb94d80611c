//! Boolean extensions of objectives, the Walsh-Hadamard transform, and
//! checkers for extension validity and algebraic stability.
//!
//! Tables are indexed by `z ∈ {−1, 1}ⁿ` with bit `i` set iff `z_i = 1`, so
//! index `2ⁿ − 1` is the all-ones vector. Spectra are indexed by subset masks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{
    lottery_optimal_price, obj_lottery, obj_revenue, obj_vote_sum, worst_corruption_for, Objective,
};
use crate::rng::SeededRng;
use crate::simplex::SimplexVector;

pub const MAX_ARITY: usize = 20;
/// Tolerance for the spectrum sign and degree checks.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Tolerance for the extension equality and dominance checks.
pub const EXTENSION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<f64>,
}

fn check_arity(n: usize) -> Result<()> {
    if n > MAX_ARITY {
        return Err(Error::InvalidParam(format!(
            "arity {n} exceeds {MAX_ARITY}"
        )));
    }
    Ok(())
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        check_arity(n)?;
        if table.len() != 1 << n {
            return Err(Error::InvalidShape(format!(
                "arity {n} needs {} values, got {}",
                1 << n,
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParam(format!("value {v} outside [-1, 1]")));
        }
        Ok(Self { n, table })
    }

    /// Tabulate `f` on every `z`.
    pub fn from_fn(n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_arity(n)?;
        let mut z = vec![0.0; n];
        let table = (0..1usize << n)
            .map(|mask| {
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                f(&z)
            })
            .collect();
        Self::new(n, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn at(&self, mask: usize) -> f64 {
        self.table[mask]
    }

    pub fn at_ones(&self) -> f64 {
        self.table[self.table.len() - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, subset: usize) -> f64 {
        self.coeffs[subset]
    }

    /// Table `Σ_S ĥ(S) χ_S`; values are not range-checked.
    pub fn inverse(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        for i in 0..self.n {
            let bit = 1 << i;
            for m in 0..v.len() {
                if m & bit == 0 {
                    let (a, b) = (v[m], v[m | bit]);
                    v[m] = a - b;
                    v[m | bit] = a + b;
                }
            }
        }
        v
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Largest `|S|` with `|ĥ(S)| > tol`.
    pub fn degree(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(s, _)| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// `ĥ(S) = 2⁻ⁿ Σ_z h(z) Π_{i∈S} z_i`.
pub fn fourier_transform(h: &BooleanFunction) -> FourierSpectrum {
    let mut v = h.table.clone();
    for i in 0..h.n {
        let bit = 1 << i;
        for m in 0..v.len() {
            if m & bit == 0 {
                let (lo, hi) = (v[m], v[m | bit]);
                v[m] = lo + hi;
                v[m | bit] = hi - lo;
            }
        }
    }
    let scale = 1.0 / v.len() as f64;
    for c in &mut v {
        *c *= scale;
    }
    FourierSpectrum { n: h.n, coeffs: v }
}

fn indicator(z: f64) -> f64 {
    (z + 1.0) / 2.0
}

/// `h(z) = p Σ_i w_i (z_i + 1)/2 · [t_i ≥ p]`.
pub fn extension_lottery(t: &[f64], w: &[f64], p: f64) -> Result<BooleanFunction> {
    if t.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values but {} weights",
            t.len(),
            w.len()
        )));
    }
    BooleanFunction::from_fn(t.len(), |z| {
        p * z
            .iter()
            .zip(t.iter().zip(w))
            .filter(|(_, (&ti, _))| ti >= p)
            .map(|(&zi, (_, &wi))| wi * indicator(zi))
            .sum::<f64>()
    })
}

/// `h(z) = Σ_i [t_i ≥ 0]/n · (z_i + 1)/2`.
pub fn extension_vote_sum(t: &[f64]) -> Result<BooleanFunction> {
    let n = t.len() as f64;
    BooleanFunction::from_fn(t.len(), |z| {
        z.iter()
            .zip(t)
            .filter(|(_, &ti)| ti >= 0.0)
            .map(|(&zi, _)| indicator(zi) / n)
            .sum()
    })
}

/// Indices of the largest and second-largest entries, lowest index on ties.
fn top_two(t: &[f64]) -> (usize, usize) {
    let i = (0..t.len()).fold(0, |b, k| if t[k] > t[b] { k } else { b });
    let j = (0..t.len())
        .filter(|&k| k != i)
        .fold(None, |b: Option<usize>, k| match b {
            Some(b) if t[k] <= t[b] => Some(b),
            _ => Some(k),
        })
        .expect("n >= 2");
    (i, j)
}

/// `h(z) = t_j (z_i + 1)/2 · (z_j + 1)/2` for the top two indices `i`, `j`.
pub fn extension_max2(t: &[f64]) -> Result<BooleanFunction> {
    if t.len() < 2 {
        return Err(Error::InvalidParam("max2 extension needs n >= 2".into()));
    }
    let (i, j) = top_two(t);
    BooleanFunction::from_fn(t.len(), |z| t[j] * indicator(z[i]) * indicator(z[j]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub valid: bool,
    /// `|h(𝟙) − g(t)|`.
    pub equality_gap: f64,
    /// `min_z (worst corrupted value − h(z))`; negative means a violation.
    pub worst_slack: f64,
    /// Masks of `z` where dominance fails beyond tolerance.
    pub violations: Vec<usize>,
}

/// Check `h(𝟙) = g(t)` and `h(z) ≤ min{g(t′) : t′ corrupts t on {i : z_i = −1}}`.
pub fn check_extension(g: &Objective, t: &[f64], h: &BooleanFunction) -> Result<ExtensionReport> {
    let wc = worst_corruption_for(g)?;
    if t.len() != g.n() || h.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "objective takes {} inputs; t has {}, extension has arity {}",
            g.n(),
            t.len(),
            h.n()
        )));
    }
    let n = t.len();
    let equality_gap = (h.at_ones() - g.evaluate(t)).abs();
    let mut worst_slack = f64::INFINITY;
    let mut violations = Vec::new();
    let mut corrupted = Vec::with_capacity(n);
    for mask in 0..1usize << n {
        corrupted.clear();
        corrupted.extend((0..n).filter(|&i| mask >> i & 1 == 0));
        let slack = wc.evaluate(t, &corrupted) - h.at(mask);
        worst_slack = worst_slack.min(slack);
        if slack < -EXTENSION_TOL {
            violations.push(mask);
        }
    }
    Ok(ExtensionReport {
        valid: equality_gap <= EXTENSION_TOL && violations.is_empty(),
        equality_gap,
        worst_slack,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// `(S, ĥ(S))` with `ĥ(S) < −tol`.
    pub negative: Vec<(usize, f64)>,
    /// `(S, ĥ(S))` with `|S| > k` and `|ĥ(S)| > tol`.
    pub high_degree: Vec<(usize, f64)>,
}

/// Nonnegative spectrum supported on sets of size at most `k`.
pub fn check_algebraic_stability(spec: &FourierSpectrum, k: usize) -> StabilityReport {
    let mut negative = Vec::new();
    let mut high_degree = Vec::new();
    for (s, &c) in spec.coeffs.iter().enumerate() {
        if c < -SPECTRUM_TOL {
            negative.push((s, c));
        }
        if s.count_ones() as usize > k && c.abs() > SPECTRUM_TOL {
            high_degree.push((s, c));
        }
    }
    StabilityReport {
        stable: negative.is_empty() && high_degree.is_empty(),
        negative,
        high_degree,
    }
}

/// Smallest integer `s > ln(2k/ε) / δ²` (at least 1).
pub fn sample_size_algebraic(k: usize, epsilon: f64, delta: f64) -> Result<usize> {
    if k == 0 || !(epsilon > 0.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "need k >= 1, epsilon > 0, delta in (0, 1] (got {k}, {epsilon}, {delta})"
        )));
    }
    let v = (2.0 * k as f64 / epsilon).ln() / (delta * delta);
    if v < 0.0 {
        return Ok(1);
    }
    let r = v.round();
    let floor = if (v - r).abs() <= 1e-9 { r } else { v.floor() };
    Ok(floor as usize + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    Lottery,
    VoteSum,
    Max2,
}

impl ExtensionKind {
    /// Degree bound the extension is expected to meet.
    pub fn degree(self) -> usize {
        match self {
            ExtensionKind::Lottery | ExtensionKind::VoteSum => 1,
            ExtensionKind::Max2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtensionKind::Lottery => "lottery",
            ExtensionKind::VoteSum => "vote_sum",
            ExtensionKind::Max2 => "max2",
        }
    }
}

impl std::str::FromStr for ExtensionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lottery" => Ok(ExtensionKind::Lottery),
            "vote_sum" | "vote-sum" => Ok(ExtensionKind::VoteSum),
            "max2" | "revenue" => Ok(ExtensionKind::Max2),
            _ => Err(Error::InvalidParam(format!(
                "unknown extension `{s}` (lottery, vote_sum, max2)"
            ))),
        }
    }
}

/// Objective, point and extension for one random trial.
pub fn random_extension(
    kind: ExtensionKind,
    n: usize,
    rng: &mut SeededRng,
) -> Result<(Objective, Vec<f64>, BooleanFunction)> {
    match kind {
        ExtensionKind::Lottery => {
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            let w = SimplexVector::new(raw.iter().map(|v| v / s).collect())?;
            let t: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let (_, p) = lottery_optimal_price(w.as_slice(), &t);
            let h = extension_lottery(&t, w.as_slice(), p)?;
            Ok((obj_lottery(&w), t, h))
        }
        ExtensionKind::VoteSum => {
            let t: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let h = extension_vote_sum(&t)?;
            Ok((obj_vote_sum(n), t, h))
        }
        ExtensionKind::Max2 => {
            let t: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let h = extension_max2(&t)?;
            Ok((obj_revenue(n, &SimplexVector::vertex(1, 0))?, t, h))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCheckReport {
    pub objective: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub degree: usize,
    pub extension_failures: usize,
    pub stability_failures: usize,
    pub max_equality_gap: f64,
    pub min_slack: f64,
    pub min_coefficient: f64,
    pub max_round_trip_error: f64,
    pub max_parseval_error: f64,
    pub max_sum_identity_error: f64,
}

impl FourierCheckReport {
    pub fn passed(&self) -> bool {
        self.extension_failures == 0
            && self.stability_failures == 0
            && self.max_round_trip_error <= SPECTRUM_TOL
            && self.max_parseval_error <= SPECTRUM_TOL
    }
}

struct Trial {
    ext_ok: bool,
    stable: bool,
    gap: f64,
    slack: f64,
    min_coeff: f64,
    round_trip: f64,
    parseval: f64,
    sum_identity: f64,
}

/// Check validity, stability, round-trip and Parseval at `trials` random points.
/// Trial `i` draws from the `i`-th child of `seed`, so results do not depend
/// on the thread count.
pub fn check_random_extensions(
    kind: ExtensionKind,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<FourierCheckReport> {
    let root = SeededRng::new(seed);
    let rows: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Trial> {
            let mut rng = root.child(i as u64);
            let (g, t, h) = random_extension(kind, n, &mut rng)?;
            let ext = check_extension(&g, &t, &h)?;
            let spec = fourier_transform(&h);
            let stab = check_algebraic_stability(&spec, kind.degree());
            let back = spec.inverse();
            let round_trip = back
                .iter()
                .zip(h.table())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let mean_sq = h.table().iter().map(|v| v * v).sum::<f64>() / h.table().len() as f64;
            Ok(Trial {
                ext_ok: ext.valid,
                stable: stab.stable,
                gap: ext.equality_gap,
                slack: ext.worst_slack,
                min_coeff: spec.coeffs().iter().copied().fold(f64::INFINITY, f64::min),
                round_trip,
                parseval: (spec.energy() - mean_sq).abs(),
                sum_identity: (spec.sum() - h.at_ones()).abs(),
            })
        })
        .collect::<Result<_>>()?;
    let fold = |f: fn(&Trial) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        rows.iter().map(f).fold(init, op)
    };
    Ok(FourierCheckReport {
        objective: kind.name().into(),
        n,
        trials,
        seed,
        degree: kind.degree(),
        extension_failures: rows.iter().filter(|r| !r.ext_ok).count(),
        stability_failures: rows.iter().filter(|r| !r.stable).count(),
        max_equality_gap: fold(|r| r.gap, 0.0, f64::max),
        min_slack: fold(|r| r.slack, f64::INFINITY, f64::min),
        min_coefficient: fold(|r| r.min_coeff, f64::INFINITY, f64::min),
        max_round_trip_error: fold(|r| r.round_trip, 0.0, f64::max),
        max_parseval_error: fold(|r| r.parseval, 0.0, f64::max),
        max_sum_identity_error: fold(|r| r.sum_identity, 0.0, f64::max),
    })
}
