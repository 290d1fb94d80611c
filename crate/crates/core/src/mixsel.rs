//! Mixture selection: maximize `g(Ax)` over the simplex by exhaustive search
//! over sparse (s-uniform) candidates.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BoundedMatrix;
use crate::objectives::{Lipschitz, Objective};
use crate::rng::SeededRng;
use crate::simplex::{
    empirical_distribution, enumerate_s_uniform, SUniformVector, SimplexVector, DEFAULT_CAP,
};

/// Environment variable overriding the default enumeration cap.
pub const CAP_ENV: &str = "MIXSEL_CAP";

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub cap: u128,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Combine signals that share a posterior when building schemes.
    pub merge_signals: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let cap = std::env::var(CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_CAP);
        Self {
            cap,
            threads: None,
            merge_signals: true,
        }
    }
}

impl SolveOptions {
    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    /// Run `f` on a pool of the configured size.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSolution {
    pub x: SUniformVector,
    pub value: f64,
    pub s: usize,
    pub candidates: u128,
    pub alpha: f64,
    pub delta: f64,
    /// Additive gap to the unrestricted optimum promised by the analysis.
    pub guarantee: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must lie in (0, 1], got {v}"
        )))
    }
}

/// Ceiling that treats values within 1e-9 of an integer as that integer, so
/// round-off in `ln` cannot bump an exact bound up by one.
pub(crate) fn robust_ceil(v: f64) -> usize {
    let r = v.round();
    if (v - r).abs() <= 1e-9 {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// `s = ⌈2 ln(2/α) / δ²⌉`.
pub fn sample_size(alpha: f64, delta: f64) -> Result<usize> {
    check_unit("alpha", alpha)?;
    check_unit("delta", delta)?;
    Ok(robust_ceil(2.0 * (2.0 / alpha).ln() / (delta * delta)).max(1))
}

/// Even split of an accuracy budget: `α = ε/(2β)`, `δ = ε/(2c)`, each capped at 1.
pub fn split_epsilon(epsilon: f64, beta: f64, c: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) || !(beta > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParam(format!(
            "need positive epsilon, beta, c (got {epsilon}, {beta}, {c})"
        )));
    }
    Ok((
        (epsilon / (2.0 * beta)).min(1.0),
        (epsilon / (2.0 * c)).min(1.0),
    ))
}

/// `(value, counts)` ordering: larger value wins, then the lexicographically
/// smaller count vector.
fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

/// Maximize `f(counts)` over all s-uniform count vectors in dimension `m`.
///
/// `f` receives a scratch buffer it may reuse between calls. Returns the best
/// count vector, its `f` value and the number of candidates visited. The
/// result does not depend on the thread count.
pub fn maximize_s_uniform<S, F>(
    m: usize,
    s: usize,
    opts: &SolveOptions,
    init: impl Fn() -> S + Sync + Send,
    f: F,
) -> Result<(Vec<usize>, f64, u128)>
where
    F: Fn(&[usize], &mut S) -> f64 + Sync + Send,
{
    let e = enumerate_s_uniform(m, s, opts.cap)?;
    let total = e.len();
    let chunk: u128 = 4096;
    let chunks = total.div_ceil(chunk) as u64;
    let best = opts.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut scratch = init();
                let mut best: Option<(f64, Vec<usize>)> = None;
                for c in e.range(ci as u128 * chunk, chunk) {
                    let v = f(&c, &mut scratch);
                    let cand = (v, c);
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
                best
            })
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
                    (a, None) => a,
                    (None, b) => b,
                },
            )
    })?;
    let (v, c) = best.ok_or_else(|| Error::Internal("empty enumeration".into()))?;
    Ok((c, v, total))
}

fn check_dims(a: &BoundedMatrix, g: &Objective) -> Result<()> {
    if a.rows() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "objective `{}` takes {} inputs, matrix has {} rows",
            g.name(),
            g.n(),
            a.rows()
        )));
    }
    Ok(())
}

fn search(
    a: &BoundedMatrix,
    g: &Objective,
    s: usize,
    opts: &SolveOptions,
) -> Result<(SUniformVector, f64, u128)> {
    check_dims(a, g)?;
    let (counts, _, total) = maximize_s_uniform(
        a.cols(),
        s,
        opts,
        || vec![0.0; a.rows()],
        |c, t| {
            a.mat_vec_counts_into(c, t).expect("dimensions checked");
            g.evaluate(t)
        },
    )?;
    let x = SUniformVector::new(counts)?;
    // Report the value through the dense path so it can be reproduced exactly.
    let value = g.evaluate(&a.mat_vec(&x.to_simplex())?);
    Ok((x, value, total))
}

/// Best s-uniform mixture for a Lipschitz objective; within `αβ + cδ` of the optimum.
pub fn solve_mixture(
    a: &BoundedMatrix,
    g: &Objective,
    alpha: f64,
    delta: f64,
    opts: &SolveOptions,
) -> Result<MixtureSolution> {
    let Lipschitz::Finite(c) = g.lipschitz() else {
        return Err(Error::UnboundedLipschitz(g.name().to_string()));
    };
    let s = sample_size(alpha, delta)?;
    let (x, value, candidates) = search(a, g, s, opts)?;
    Ok(MixtureSolution {
        x,
        value,
        s,
        candidates,
        alpha,
        delta,
        guarantee: alpha * g.beta() + c * delta,
    })
}

/// Maximize a relaxation `h` of `g` over s-uniform mixtures. The returned
/// `h`-value is within `αβ + ρ` of the best `g`-value, where `beta_g` is the
/// stability constant of `g`.
pub fn solve_mixture_bicriteria(
    a: &BoundedMatrix,
    beta_g: f64,
    h: &Objective,
    alpha: f64,
    delta: f64,
    rho: f64,
    opts: &SolveOptions,
) -> Result<MixtureSolution> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidParam(format!("rho must be >= 0, got {rho}")));
    }
    let s = sample_size(alpha, delta)?;
    let (x, value, candidates) = search(a, h, s, opts)?;
    Ok(MixtureSolution {
        x,
        value,
        s,
        candidates,
        alpha,
        delta,
        guarantee: alpha * beta_g + rho,
    })
}

/// Monte Carlo mean and standard error of `g(A x̃)` for `x̃` the empirical
/// distribution of `sample_size(α, δ)` draws from `x`.
pub fn estimate_sampled_value(
    a: &BoundedMatrix,
    g: &Objective,
    x: &SimplexVector,
    alpha: f64,
    delta: f64,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    check_dims(a, g)?;
    let s = sample_size(alpha, delta)?;
    let vals: Vec<f64> = (0..trials)
        .map(|_| {
            let e = empirical_distribution(x, s, rng);
            g.evaluate(&a.mat_vec_slice(&e.entries()).expect("dimensions checked"))
        })
        .collect();
    // Shift by the first draw so a constant sample has an exact mean.
    let v0 = vals[0];
    let mean = v0 + vals.iter().map(|v| v - v0).sum::<f64>() / trials as f64;
    if trials == 1 {
        return Ok((mean, 0.0));
    }
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials - 1) as f64;
    Ok((mean, (var / trials as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Domain;
    use crate::objectives::{obj_lottery, obj_mid, obj_vote_sum, obj_vote_sum_relaxed};

    fn random_matrix(n: usize, m: usize, domain: Domain, rng: &mut SeededRng) -> BoundedMatrix {
        let lo = domain.lower();
        let data = (0..n * m)
            .map(|_| lo + (1.0 - lo) * rng.uniform())
            .collect();
        BoundedMatrix::new(n, m, domain, data).unwrap()
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size(0.25, 0.5).unwrap(), 17);
        let e = std::f64::consts::E;
        assert_eq!(sample_size(2.0 / e, 1.0).unwrap(), 2);
        assert_eq!(sample_size(2.0 / (e * e), 1.0).unwrap(), 4);
        assert!(sample_size(0.0, 0.5).is_err());
        assert!(sample_size(0.5, 1.5).is_err());
    }

    #[test]
    fn sample_size_is_monotone() {
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                assert!(sample_size(a, w[0]).unwrap() >= sample_size(a, w[1]).unwrap());
                assert!(sample_size(w[0], a).unwrap() >= sample_size(w[1], a).unwrap());
            }
        }
    }

    #[test]
    fn split_epsilon_halves() {
        assert_eq!(split_epsilon(0.4, 2.0, 1.0).unwrap(), (0.1, 0.2));
        assert_eq!(split_epsilon(4.0, 1.0, 1.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn single_column() {
        let a = BoundedMatrix::new(3, 1, Domain::Unsigned, vec![0.2, 0.9, 0.5]).unwrap();
        let g = obj_lottery(&SimplexVector::uniform(3));
        let sol = solve_mixture(&a, &g, 0.5, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(sol.x.counts(), &[sol.s]);
        assert_eq!(sol.candidates, 1);
    }

    #[test]
    fn dominant_column_wins() {
        let a = BoundedMatrix::from_rows(
            Domain::Unsigned,
            &[
                vec![0.1, 0.8, 0.3],
                vec![0.2, 0.9, 0.1],
                vec![0.0, 0.5, 0.4],
            ],
        )
        .unwrap();
        let g = obj_lottery(&SimplexVector::uniform(3));
        let sol = solve_mixture(&a, &g, 0.5, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(sol.x.counts(), &[0, sol.s, 0]);
        assert_eq!(sol.guarantee, 0.5 + 0.5);
    }

    #[test]
    fn unbounded_lipschitz_rejected() {
        let a = BoundedMatrix::identity(2);
        let a = BoundedMatrix::new(2, 2, Domain::Signed, a.data().to_vec()).unwrap();
        assert!(matches!(
            solve_mixture(&a, &obj_vote_sum(2), 0.5, 0.5, &SolveOptions::default()),
            Err(Error::UnboundedLipschitz(_))
        ));
    }

    #[test]
    fn cap_is_propagated() {
        let mut rng = SeededRng::new(1);
        let a = random_matrix(4, 8, Domain::Signed, &mut rng);
        let opts = SolveOptions::default().with_cap(10);
        assert!(matches!(
            solve_mixture(&a, &obj_mid(4).unwrap(), 0.5, 0.5, &opts),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn value_is_reproducible_bit_exact() {
        let mut rng = SeededRng::new(2);
        let a = random_matrix(6, 4, Domain::Signed, &mut rng);
        let g = obj_mid(6).unwrap();
        let sol = solve_mixture(&a, &g, 0.4, 0.5, &SolveOptions::default()).unwrap();
        let again = g.evaluate(&a.mat_vec(&sol.x.to_simplex()).unwrap());
        assert_eq!(sol.value.to_bits(), again.to_bits());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let mut rng = SeededRng::new(3);
        let a = random_matrix(5, 5, Domain::Signed, &mut rng);
        let g = obj_mid(5).unwrap();
        let base = SolveOptions::default();
        let one = solve_mixture(&a, &g, 0.3, 0.5, &base.clone().with_threads(Some(1))).unwrap();
        for t in [2, 3, 8] {
            let other =
                solve_mixture(&a, &g, 0.3, 0.5, &base.clone().with_threads(Some(t))).unwrap();
            assert_eq!(one, other);
        }
    }

    #[test]
    fn ties_go_to_smallest_counts() {
        // Constant objective: every candidate ties, so (0, ..., s) wins.
        let a = BoundedMatrix::identity(3);
        let g = Objective::custom(
            "zero",
            3,
            1.0,
            Lipschitz::Finite(1.0),
            Domain::Unsigned,
            |_| 0.0,
        );
        let sol = solve_mixture(&a, &g, 1.0, 1.0, &SolveOptions::default()).unwrap();
        assert_eq!(sol.x.counts(), &[0, 0, sol.s]);
    }

    #[test]
    fn bicriteria_matches_uni_when_h_is_g() {
        let mut rng = SeededRng::new(4);
        let a = random_matrix(4, 3, Domain::Signed, &mut rng);
        let g = obj_mid(4).unwrap();
        let opts = SolveOptions::default();
        let uni = solve_mixture(&a, &g, 0.3, 0.4, &opts).unwrap();
        let bi = solve_mixture_bicriteria(&a, g.beta(), &g, 0.3, 0.4, 0.4, &opts).unwrap();
        assert_eq!(uni.x, bi.x);
        assert!((uni.guarantee - bi.guarantee).abs() < 1e-15);
    }

    #[test]
    fn bicriteria_single_column() {
        let a = BoundedMatrix::new(2, 1, Domain::Signed, vec![-0.05, 0.3]).unwrap();
        let g = obj_vote_sum(2);
        let h = obj_vote_sum_relaxed(2, 0.1).unwrap();
        let sol =
            solve_mixture_bicriteria(&a, g.beta(), &h, 0.5, 0.1, 0.0, &SolveOptions::default())
                .unwrap();
        assert_eq!(sol.value, 1.0);
        assert_eq!(g.evaluate(&a.column(0)), 0.5);
    }

    #[test]
    fn sampling_a_vertex_is_exact() {
        let mut rng = SeededRng::new(5);
        let a = random_matrix(4, 3, Domain::Signed, &mut rng);
        let g = obj_mid(4).unwrap();
        let x = SimplexVector::vertex(3, 1);
        let (mean, se) = estimate_sampled_value(&a, &g, &x, 0.5, 0.5, 200, &mut rng).unwrap();
        assert_eq!(mean, g.evaluate(&a.mat_vec(&x).unwrap()));
        assert_eq!(se, 0.0);
    }

    #[test]
    fn sampling_a_linear_objective_is_unbiased() {
        let mut rng = SeededRng::new(6);
        let a = random_matrix(5, 4, Domain::Signed, &mut rng);
        let g = Objective::custom(
            "mean",
            5,
            1.0,
            Lipschitz::Finite(1.0),
            Domain::Signed,
            |t| t.iter().sum::<f64>() / t.len() as f64,
        );
        let x = SimplexVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (mean, se) = estimate_sampled_value(&a, &g, &x, 0.5, 0.5, 20_000, &mut rng).unwrap();
        let exact = g.evaluate(&a.mat_vec(&x).unwrap());
        assert!(
            (mean - exact).abs() <= 3.0 * se + 1e-12,
            "{mean} vs {exact} (se {se})"
        );
    }

    #[test]
    fn sampling_respects_the_stability_bound() {
        let mut rng = SeededRng::new(7);
        for _ in 0..5 {
            let a = random_matrix(8, 4, Domain::Signed, &mut rng);
            let g = obj_mid(8).unwrap();
            let w: Vec<f64> = (0..4).map(|_| 0.05 + rng.uniform()).collect();
            let tot: f64 = w.iter().sum();
            let x = SimplexVector::new(w.iter().map(|v| v / tot).collect()).unwrap();
            let (alpha, delta) = (0.1, 0.3);
            let (mean, se) =
                estimate_sampled_value(&a, &g, &x, alpha, delta, 5000, &mut rng).unwrap();
            let gx = g.evaluate(&a.mat_vec(&x).unwrap());
            assert!(mean >= gx - alpha * g.beta() - delta - 3.0 * se);
        }
    }
}
