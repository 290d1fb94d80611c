//! Signaling schemes as convex decompositions of a prior, and the LP that
//! picks the best decomposition over sparse posteriors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpStatus, StandardFormLP};
use crate::matrix::BoundedMatrix;
use crate::mixsel::{sample_size, SolveOptions};
use crate::objectives::{Lipschitz, Objective};
use crate::simplex::{enumerate_s_uniform, SUniformVector, SimplexVector};

/// Signals with probability below this are dropped from LP solutions.
pub const PRUNE_TOL: f64 = 1e-12;
/// Tolerance used by [`validate_scheme`].
pub const SCHEME_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub prob: f64,
    pub posterior: SimplexVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingScheme {
    pub signals: Vec<Signal>,
}

impl SignalingScheme {
    /// The scheme that reveals nothing.
    pub fn no_information(prior: &SimplexVector) -> Self {
        Self {
            signals: vec![Signal {
                prob: 1.0,
                posterior: prior.clone(),
            }],
        }
    }

    /// The scheme that reveals the state.
    pub fn full_revelation(prior: &SimplexVector) -> Self {
        let m = prior.dim();
        Self {
            signals: (0..m)
                .filter(|&j| prior.as_slice()[j] > 0.0)
                .map(|j| Signal {
                    prob: prior.as_slice()[j],
                    posterior: SimplexVector::vertex(m, j),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// `Σ_σ ν_σ f(μ_σ)`, summed in signal order.
    pub fn value_with(&self, f: impl Fn(&SimplexVector) -> f64) -> SchemeValue {
        let contributions: Vec<f64> = self
            .signals
            .iter()
            .map(|s| s.prob * f(&s.posterior))
            .collect();
        SchemeValue {
            value: contributions.iter().sum(),
            contributions,
        }
    }

    /// `Σ_σ ν_σ g(A μ_σ)`.
    pub fn value(&self, a: &BoundedMatrix, g: &Objective) -> Result<SchemeValue> {
        for s in &self.signals {
            if s.posterior.dim() != a.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "posterior of dimension {} for a matrix with {} columns",
                    s.posterior.dim(),
                    a.cols()
                )));
            }
        }
        Ok(self.value_with(|mu| g.evaluate(&a.mat_vec(mu).expect("checked"))))
    }

    /// Combine signals with identical posteriors.
    pub fn merge_duplicates(&mut self) {
        let mut merged: Vec<Signal> = Vec::with_capacity(self.signals.len());
        for s in self.signals.drain(..) {
            match merged.iter_mut().find(|m| m.posterior == s.posterior) {
                Some(m) => m.prob += s.prob,
                None => merged.push(s),
            }
        }
        self.signals = merged;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeValue {
    pub value: f64,
    pub contributions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingResult {
    pub scheme: SignalingScheme,
    /// Scheme value recomputed from the signals.
    pub value: f64,
    /// Optimum reported by the LP.
    pub lp_value: f64,
    pub guarantee: f64,
    pub s: usize,
    pub candidates: u128,
}

/// Scheme JSON: `{"signals": [{"prob", "posterior"}], "value", "guarantee"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub signals: Vec<Signal>,
    pub value: f64,
    pub guarantee: f64,
}

impl SignalingResult {
    pub fn to_json(&self) -> SchemeJson {
        SchemeJson {
            signals: self.scheme.signals.clone(),
            value: self.value,
            guarantee: self.guarantee,
        }
    }
}

/// Best convex decomposition of `prior` into s-uniform posteriors, for an
/// arbitrary per-posterior payoff `f` evaluated on count vectors.
///
/// Returns the scheme, the LP optimum and the number of candidate posteriors.
pub fn optimize_decomposition<F>(
    prior: &SimplexVector,
    s: usize,
    opts: &SolveOptions,
    f: F,
) -> Result<(SignalingScheme, f64, u128)>
where
    F: Fn(&[usize]) -> f64 + Sync + Send,
{
    try_optimize_decomposition(prior, s, opts, |c| Ok(f(c)))
}

/// [`optimize_decomposition`] with a fallible payoff; the first error in
/// enumeration order is returned.
pub fn try_optimize_decomposition<F>(
    prior: &SimplexVector,
    s: usize,
    opts: &SolveOptions,
    f: F,
) -> Result<(SignalingScheme, f64, u128)>
where
    F: Fn(&[usize]) -> Result<f64> + Sync + Send,
{
    let m = prior.dim();
    let e = enumerate_s_uniform(m, s, opts.cap)?;
    let posts: Vec<Vec<usize>> = e.iter().collect();
    let values: Vec<f64> =
        opts.install(|| posts.par_iter().map(|c| f(c)).collect::<Result<Vec<f64>>>())??;
    let cols = posts.len();

    // Rows: one per state (Σ ν_j μ_j = λ), plus Σ ν_j = 1.
    let mut rows = vec![0.0; (m + 1) * cols];
    for (j, c) in posts.iter().enumerate() {
        for (i, &k) in c.iter().enumerate() {
            rows[i * cols + j] = k as f64 / s as f64;
        }
        rows[m * cols + j] = 1.0;
    }
    let mut b = prior.as_slice().to_vec();
    b.push(1.0);
    let lp = StandardFormLP::from_dense(values, rows, m + 1, b)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "signaling LP reported {:?}; it is always feasible and bounded",
            sol.status
        )));
    }
    let mut signals: Vec<Signal> = Vec::new();
    for (j, &nu) in sol.x.iter().enumerate() {
        if nu >= PRUNE_TOL {
            let post = SUniformVector::new(posts[j].clone())?.to_simplex();
            signals.push(Signal {
                prob: nu,
                posterior: post,
            });
        }
    }
    let total: f64 = signals.iter().map(|s| s.prob).sum();
    for s in &mut signals {
        s.prob /= total;
    }
    let mut scheme = SignalingScheme { signals };
    if opts.merge_signals {
        scheme.merge_duplicates();
    }
    Ok((scheme, sol.value, e.len()))
}

fn check_inputs(a: &BoundedMatrix, g: &Objective, prior: &SimplexVector) -> Result<()> {
    if a.rows() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "objective `{}` takes {} inputs, matrix has {} rows",
            g.name(),
            g.n(),
            a.rows()
        )));
    }
    if a.cols() != prior.dim() {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} states, matrix has {} columns",
            prior.dim(),
            a.cols()
        )));
    }
    Ok(())
}

fn solve_matrix_lp(
    a: &BoundedMatrix,
    g: &Objective,
    prior: &SimplexVector,
    s: usize,
    guarantee: f64,
    opts: &SolveOptions,
) -> Result<SignalingResult> {
    check_inputs(a, g, prior)?;
    let (scheme, lp_value, candidates) = optimize_decomposition(prior, s, opts, |c| {
        let mut t = vec![0.0; a.rows()];
        a.mat_vec_counts_into(c, &mut t)
            .expect("dimensions checked");
        g.evaluate(&t)
    })?;
    let value = scheme.value(a, g)?.value;
    Ok(SignalingResult {
        scheme,
        value,
        lp_value,
        guarantee,
        s,
        candidates,
    })
}

/// Scheme within `αβ + cδ` of the best signaling value for a Lipschitz `g`.
pub fn solve_signaling(
    a: &BoundedMatrix,
    g: &Objective,
    prior: &SimplexVector,
    alpha: f64,
    delta: f64,
    opts: &SolveOptions,
) -> Result<SignalingResult> {
    let Lipschitz::Finite(c) = g.lipschitz() else {
        return Err(Error::UnboundedLipschitz(g.name().to_string()));
    };
    let s = sample_size(alpha, delta)?;
    solve_matrix_lp(a, g, prior, s, alpha * g.beta() + c * delta, opts)
}

/// Scheme whose value under the relaxation `h` is within `αβ + ρ` of the best
/// achievable value of `g` (stability `beta_g`).
#[allow(clippy::too_many_arguments)]
pub fn solve_signaling_bicriteria(
    a: &BoundedMatrix,
    beta_g: f64,
    h: &Objective,
    prior: &SimplexVector,
    alpha: f64,
    delta: f64,
    rho: f64,
    opts: &SolveOptions,
) -> Result<SignalingResult> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidParam(format!("rho must be >= 0, got {rho}")));
    }
    let s = sample_size(alpha, delta)?;
    solve_matrix_lp(a, h, prior, s, alpha * beta_g + rho, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub valid: bool,
    /// Largest amount by which a probability is negative.
    pub negative_prob: f64,
    /// `|Σ ν − 1|`.
    pub prob_sum_error: f64,
    /// `‖Σ ν μ − λ‖∞`.
    pub decomposition_residual: f64,
    pub duplicate_posteriors: usize,
}

pub fn validate_scheme(scheme: &SignalingScheme, prior: &SimplexVector) -> SchemeReport {
    let m = prior.dim();
    let negative_prob = scheme
        .signals
        .iter()
        .map(|s| (-s.prob).max(0.0))
        .fold(0.0, f64::max);
    let prob_sum_error = (scheme.signals.iter().map(|s| s.prob).sum::<f64>() - 1.0).abs();
    let mut mix = vec![0.0; m];
    let mut dim_ok = true;
    for s in &scheme.signals {
        if s.posterior.dim() != m {
            dim_ok = false;
            continue;
        }
        for (acc, p) in mix.iter_mut().zip(s.posterior.as_slice()) {
            *acc += s.prob * p;
        }
    }
    let decomposition_residual = if dim_ok {
        mix.iter()
            .zip(prior.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut duplicate_posteriors = 0;
    for (i, s) in scheme.signals.iter().enumerate() {
        if scheme.signals[..i]
            .iter()
            .any(|t| t.posterior == s.posterior)
        {
            duplicate_posteriors += 1;
        }
    }
    SchemeReport {
        valid: negative_prob <= SCHEME_TOL
            && prob_sum_error <= SCHEME_TOL
            && decomposition_residual <= SCHEME_TOL
            && duplicate_posteriors == 0,
        negative_prob,
        prob_sum_error,
        decomposition_residual,
        duplicate_posteriors,
    }
}
