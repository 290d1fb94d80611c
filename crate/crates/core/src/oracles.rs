//! Brute-force ground truth: simplex grid search, exhaustive few-signal
//! decompositions, support enumeration for bimatrix games, and vertex
//! enumeration for small LPs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::Tensor;
use crate::linalg::solve_dense;
use crate::lp::StandardFormLP;
use crate::matrix::BoundedMatrix;
use crate::mixsel::{maximize_s_uniform, SolveOptions};
use crate::objectives::Objective;
use crate::signaling::{Signal, SignalingScheme};
use crate::simplex::{enumerate_s_uniform, SUniformVector, SimplexVector};

/// Largest signal budget accepted by [`signaling_grid_opt`].
pub const MAX_GRID_SIGNALS: usize = 3;
const WEIGHT_TOL: f64 = 1e-12;
const NE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub value: f64,
    pub x: SUniformVector,
    pub candidates: u128,
}

/// Exhaustive maximum of `g(Ax)` over the `N`-uniform grid.
pub fn grid_optimum(
    a: &BoundedMatrix,
    g: &Objective,
    n_grid: usize,
    opts: &SolveOptions,
) -> Result<GridOptimum> {
    if a.rows() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "objective takes {} inputs, matrix has {} rows",
            g.n(),
            a.rows()
        )));
    }
    let nf = n_grid as f64;
    let (counts, value, candidates) = maximize_s_uniform(
        a.cols(),
        n_grid,
        opts,
        || (vec![0.0; a.cols()], vec![0.0; a.rows()]),
        |c, (x, t)| {
            for (xi, &ci) in x.iter_mut().zip(c) {
                *xi = ci as f64 / nf;
            }
            for (i, ti) in t.iter_mut().enumerate() {
                *ti = a
                    .row(i)
                    .iter()
                    .zip(x.iter())
                    .map(|(p, q)| p * q)
                    .sum::<f64>();
            }
            g.evaluate(t)
        },
    )?;
    Ok(GridOptimum {
        value,
        x: SUniformVector::new(counts)?,
        candidates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSignalingOpt {
    pub value: f64,
    pub scheme: SignalingScheme,
    pub decompositions: u128,
}

/// Weights `ν ≥ 0` with `Σ ν_j μ_j = λ`, `Σ ν_j = 1` for the given posteriors,
/// chosen to maximize `Σ ν_j v_j` when not unique.
fn decomposition_weights(prior: &[f64], posts: &[&[f64]], vals: &[f64]) -> Option<Vec<f64>> {
    let m = prior.len();
    let k = posts.len();
    if k == 1 {
        let ok = posts[0]
            .iter()
            .zip(prior)
            .all(|(a, b)| (a - b).abs() <= WEIGHT_TOL);
        return ok.then(|| vec![1.0]);
    }
    if m == 2 && k == 2 {
        let (a, b) = (posts[0][0], posts[1][0]);
        if a == b {
            return None;
        }
        let nu0 = (b - prior[0]) / (b - a);
        if !(-WEIGHT_TOL..=1.0 + WEIGHT_TOL).contains(&nu0) {
            return None;
        }
        let nu0 = nu0.clamp(0.0, 1.0);
        return Some(vec![nu0, 1.0 - nu0]);
    }
    let mut rows = vec![vec![0.0; k]; m + 1];
    for (j, p) in posts.iter().enumerate() {
        for i in 0..m {
            rows[i][j] = p[i];
        }
        rows[m][j] = 1.0;
    }
    let mut b = prior.to_vec();
    b.push(1.0);
    let lp = StandardFormLP::new(vals.to_vec(), rows, b).ok()?;
    let sol = crate::lp::solve_lp(&lp).ok()?;
    (sol.status == crate::lp::LpStatus::Optimal).then_some(sol.x)
}

/// Best decomposition of `prior` into at most `k_sig` posteriors on the
/// `N`-grid, with per-posterior payoff `f`. A lower bound on the optimum.
pub fn signaling_grid_opt_with(
    prior: &SimplexVector,
    n_grid: usize,
    k_sig: usize,
    opts: &SolveOptions,
    f: impl Fn(&SimplexVector) -> f64 + Sync + Send,
) -> Result<GridSignalingOpt> {
    if k_sig == 0 || k_sig > MAX_GRID_SIGNALS {
        return Err(Error::InvalidParam(format!(
            "signal budget must lie in 1..={MAX_GRID_SIGNALS}, got {k_sig}"
        )));
    }
    let e = enumerate_s_uniform(prior.dim(), n_grid, opts.cap)?;
    let posts: Vec<SimplexVector> = e.vectors().map(|v| v.to_simplex()).collect();
    let g = posts.len();
    let mut combos: u128 = 0;
    for k in 1..=k_sig {
        combos = combos.saturating_add(crate::simplex::multiset_count(g, k));
    }
    if combos > opts.cap {
        return Err(Error::CapExceeded {
            count: combos,
            cap: opts.cap,
        });
    }
    let vals: Vec<f64> = opts.install(|| posts.par_iter().map(&f).collect())?;
    let lam = prior.as_slice();
    // Candidate posterior index tuples in lexicographic order, best value wins,
    // first tuple on ties.
    let eval = |idx: &[usize]| -> Option<(f64, Vec<f64>)> {
        let ps: Vec<&[f64]> = idx.iter().map(|&j| posts[j].as_slice()).collect();
        let vs: Vec<f64> = idx.iter().map(|&j| vals[j]).collect();
        let nu = decomposition_weights(lam, &ps, &vs)?;
        Some((nu.iter().zip(&vs).map(|(a, b)| a * b).sum(), nu))
    };
    type Best = Option<(f64, Vec<usize>, Vec<f64>)>;
    let pick = |a: Best, b: Best| -> Best {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }),
            (a, None) => a,
            (None, b) => b,
        }
    };
    let best: Best = opts.install(|| {
        (0..g)
            .into_par_iter()
            .map(|i| {
                let mut best: Best = None;
                let mut consider = |idx: Vec<usize>| {
                    if let Some((v, nu)) = eval(&idx) {
                        best = pick(best.take(), Some((v, idx, nu)));
                    }
                };
                consider(vec![i]);
                if k_sig >= 2 {
                    for j in i + 1..g {
                        consider(vec![i, j]);
                        if k_sig >= 3 {
                            for l in j + 1..g {
                                consider(vec![i, j, l]);
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| None, pick)
    })?;
    let (value, idx, nu) =
        best.ok_or_else(|| Error::Internal("no grid decomposition reproduces the prior".into()))?;
    let signals = idx
        .iter()
        .zip(&nu)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&j, &p)| Signal {
            prob: p,
            posterior: posts[j].clone(),
        })
        .collect();
    Ok(GridSignalingOpt {
        value,
        scheme: SignalingScheme { signals },
        decompositions: combos,
    })
}

/// [`signaling_grid_opt_with`] for the payoff `g(A μ)`.
pub fn signaling_grid_opt(
    a: &BoundedMatrix,
    g: &Objective,
    prior: &SimplexVector,
    n_grid: usize,
    k_sig: usize,
    opts: &SolveOptions,
) -> Result<GridSignalingOpt> {
    if a.rows() != g.n() || a.cols() != prior.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, objective takes {} inputs, prior has {} states",
            a.rows(),
            a.cols(),
            g.n(),
            prior.dim()
        )));
    }
    signaling_grid_opt_with(prior, n_grid, k_sig, opts, |mu| {
        g.evaluate(&a.mat_vec(mu).expect("dimensions checked"))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BimatrixEquilibrium {
    pub x: SimplexVector,
    pub y: SimplexVector,
    /// Expected payoff of each player.
    pub payoffs: [f64; 2],
}

/// Mixture on `support` (of `dim` strategies) making the opponent indifferent
/// across `other`: `Σ_{j∈support} M[i][j] y_j = v` for every `i ∈ other`.
fn indifference(
    m: impl Fn(usize, usize) -> f64,
    support: &[usize],
    other: &[usize],
    dim: usize,
) -> Option<(Vec<f64>, f64)> {
    let k = support.len();
    // Unknowns: y_support (k) and v. Equations: |other| indifference rows + Σ y = 1.
    let n = k + 1;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for (r, &i) in other.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[r * n + c] = m(i, j);
        }
        a[r * n + k] = -1.0;
    }
    for c in 0..k {
        a[k * n + c] = 1.0;
    }
    b[k] = 1.0;
    let sol = solve_dense(a, b, n, 1e-12)?;
    if sol[..k].iter().any(|&p| p < -NE_TOL) {
        return None;
    }
    let mut y = vec![0.0; dim];
    for (c, &j) in support.iter().enumerate() {
        y[j] = sol[c].max(0.0);
    }
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= s);
    Some((y, sol[k]))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// All Nash equilibria with equal-size supports of size at most `max_support`,
/// found by solving the indifference systems; each one is re-validated.
/// Complete for nondegenerate games.
pub fn support_enum_ne(
    a: &Tensor,
    b: &Tensor,
    max_support: usize,
) -> Result<Vec<BimatrixEquilibrium>> {
    if a.shape().len() != 2 || a.shape() != b.shape() {
        return Err(Error::InvalidShape(
            "support enumeration needs two equal-shape matrices".into(),
        ));
    }
    let (n, m) = (a.shape()[0], a.shape()[1]);
    let ae = |i: usize, j: usize| a.get(&[i, j]);
    let be = |i: usize, j: usize| b.get(&[i, j]);
    let mut found: Vec<BimatrixEquilibrium> = Vec::new();
    for k in 1..=max_support.min(n).min(m) {
        for si in subsets(n, k) {
            for sj in subsets(m, k) {
                // y makes the row player indifferent on si; x does the same for columns on sj.
                let Some((y, v)) = indifference(ae, &sj, &si, m) else {
                    continue;
                };
                let Some((x, u)) = indifference(|j, i| be(i, j), &si, &sj, n) else {
                    continue;
                };
                let row_best = (0..n)
                    .map(|i| (0..m).map(|j| ae(i, j) * y[j]).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                let col_best = (0..m)
                    .map(|j| (0..n).map(|i| x[i] * be(i, j)).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                if row_best > v + NE_TOL || col_best > u + NE_TOL {
                    continue;
                }
                let dup = found.iter().any(|e| {
                    e.x.as_slice()
                        .iter()
                        .zip(&x)
                        .all(|(p, q)| (p - q).abs() <= 1e-9)
                        && e.y
                            .as_slice()
                            .iter()
                            .zip(&y)
                            .all(|(p, q)| (p - q).abs() <= 1e-9)
                });
                if !dup {
                    found.push(BimatrixEquilibrium {
                        x: SimplexVector::new(x)?,
                        y: SimplexVector::new(y)?,
                        payoffs: [v, u],
                    });
                }
            }
        }
    }
    Ok(found)
}

/// Optimum of a bounded standard-form LP by enumerating basic feasible
/// solutions; `None` when infeasible.
pub fn lp_vertex_enumeration(p: &StandardFormLP) -> Option<(f64, Vec<f64>)> {
    let (rows, cols) = (p.rows(), p.cols());
    // Keep a maximal independent set of rows; drop rows that are combinations.
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..rows {
        let mut trial = keep.clone();
        trial.push(i);
        let data: Vec<f64> = trial
            .iter()
            .flat_map(|&r| (0..cols).map(move |j| p.entry(r, j)))
            .collect();
        if crate::linalg::rank(data, trial.len(), cols, 1e-10) == trial.len() {
            keep = trial;
        }
    }
    let r = keep.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let eval = |x: &[f64]| p.objective().iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
    if r == 0 {
        let x = vec![0.0; cols];
        return (p.residual(&x) <= 1e-8).then_some((0.0, x));
    }
    for basis in subsets(cols, r) {
        let mut a = vec![0.0; r * r];
        for (ri, &row) in keep.iter().enumerate() {
            for (ci, &col) in basis.iter().enumerate() {
                a[ri * r + ci] = p.entry(row, col);
            }
        }
        let b: Vec<f64> = keep.iter().map(|&row| p.rhs()[row]).collect();
        let Some(xb) = solve_dense(a, b, r, 1e-10) else {
            continue;
        };
        if xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; cols];
        for (&c, &v) in basis.iter().zip(&xb) {
            x[c] = v.max(0.0);
        }
        if p.residual(&x) > 1e-8 {
            continue;
        }
        let v = eval(&x);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x));
        }
    }
    best
}
