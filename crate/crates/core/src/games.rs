//! Bayesian normal-form games: posterior games, approximate equilibria, and
//! signaling to steer play toward good equilibria.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpStatus, StandardFormLP};
use crate::mixsel::{sample_size, SolveOptions};
use crate::rng::SeededRng;
use crate::signaling::{try_optimize_decomposition, SignalingResult};
use crate::simplex::{enumerate_s_uniform, SUniformVector, SimplexVector};

/// Largest supported number of players.
pub const MAX_PLAYERS: usize = 3;
/// Slack allowed when certifying a regret bound.
pub const REGRET_TOL: f64 = 1e-9;

/// Dense row-major tensor with entries in `[-1, 1]`, one axis per player.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidShape(format!("bad tensor shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::InvalidShape(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParam(format!(
                "tensor entry {v} outside [-1, 1]"
            )));
        }
        Ok(Self { shape, data })
    }

    /// Two-player tensor from a row-major matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(vec![n, m], rows.concat())
    }

    pub fn filled(shape: Vec<usize>, v: f64) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![v; len])
    }

    pub fn random(shape: Vec<usize>, rng: &mut SeededRng) -> Self {
        let len = shape.iter().product();
        let data = (0..len).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            flat = flat * n + i;
        }
        self.data[flat]
    }

    pub fn negate(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    /// `Σ_θ μ_θ T_θ`.
    pub fn mix(tensors: &[&Tensor], weights: &[f64]) -> Self {
        let shape = tensors[0].shape.clone();
        let mut data = vec![0.0; tensors[0].data.len()];
        for (t, &w) in tensors.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (d, v) in data.iter_mut().zip(&t.data) {
                *d += w * v;
            }
        }
        for d in &mut data {
            *d = d.clamp(-1.0, 1.0);
        }
        Self { shape, data }
    }

    /// Nested row-major arrays under a shape header.
    pub fn to_json(&self) -> Value {
        fn nest(shape: &[usize], data: &[f64]) -> Value {
            if shape.len() == 1 {
                return Value::from(data.to_vec());
            }
            let stride = data.len() / shape[0];
            Value::Array(data.chunks(stride).map(|c| nest(&shape[1..], c)).collect())
        }
        serde_json::json!({ "shape": self.shape, "data": nest(&self.shape, &self.data) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let shape: Vec<usize> = serde_json::from_value(
            v.get("shape")
                .cloned()
                .ok_or_else(|| Error::InvalidShape("tensor missing `shape`".into()))?,
        )?;
        fn flatten(v: &Value, depth: usize, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::InvalidShape("tensor data must be nested arrays".into()))?;
            if arr.len() != shape[depth] {
                return Err(Error::InvalidShape(format!(
                    "axis {depth} has {} entries, shape says {}",
                    arr.len(),
                    shape[depth]
                )));
            }
            for x in arr {
                if depth + 1 == shape.len() {
                    out.push(
                        x.as_f64().ok_or_else(|| {
                            Error::InvalidShape("non-numeric tensor entry".into())
                        })?,
                    );
                } else {
                    flatten(x, depth + 1, shape, out)?;
                }
            }
            Ok(())
        }
        if shape.is_empty() {
            return Err(Error::InvalidShape("empty tensor shape".into()));
        }
        let mut data = Vec::new();
        flatten(
            v.get("data")
                .ok_or_else(|| Error::InvalidShape("tensor missing `data`".into()))?,
            0,
            &shape,
            &mut data,
        )?;
        Tensor::new(shape, data)
    }
}

impl Serialize for Tensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Tensor::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// One mixed strategy per player.
pub type MixedProfile = Vec<SimplexVector>;

fn check_profile(t: &Tensor, profile: &[SimplexVector]) -> Result<()> {
    if profile.len() != t.shape.len() || profile.iter().zip(&t.shape).any(|(x, &n)| x.dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "profile dimensions {:?} do not match tensor shape {:?}",
            profile.iter().map(SimplexVector::dim).collect::<Vec<_>>(),
            t.shape
        )));
    }
    Ok(())
}

fn contract(t: &Tensor, profile: &[&[f64]], skip: Option<usize>) -> Vec<f64> {
    let k = t.shape.len();
    let out_len = skip.map_or(1, |i| t.shape[i]);
    let mut out = vec![0.0; out_len];
    let mut idx = vec![0usize; k];
    for &v in &t.data {
        let mut w = 1.0;
        for p in 0..k {
            if Some(p) != skip {
                w *= profile[p][idx[p]];
            }
        }
        if w != 0.0 {
            out[skip.map_or(0, |i| idx[i])] += w * v;
        }
        for p in (0..k).rev() {
            idx[p] += 1;
            if idx[p] < t.shape[p] {
                break;
            }
            idx[p] = 0;
        }
    }
    out
}

/// Multilinear value `T(x_1, ..., x_k)`.
pub fn eval_tensor(t: &Tensor, profile: &[SimplexVector]) -> Result<f64> {
    check_profile(t, profile)?;
    let p: Vec<&[f64]> = profile.iter().map(SimplexVector::as_slice).collect();
    Ok(contract(t, &p, None)[0])
}

/// Payoff to player `i` of each pure strategy against the others' mixtures.
pub fn deviation_payoffs(t: &Tensor, profile: &[SimplexVector], i: usize) -> Result<Vec<f64>> {
    check_profile(t, profile)?;
    let p: Vec<&[f64]> = profile.iter().map(SimplexVector::as_slice).collect();
    Ok(contract(t, &p, Some(i)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    /// No player gains more than ε by deviating.
    Ne,
    /// Every pure strategy in a player's support is within ε of a best response.
    Wsne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub profile: MixedProfile,
    pub epsilon: f64,
    pub kind: EquilibriumKind,
    pub regrets: Vec<f64>,
    /// Support size used to find the profile, when it came from enumeration.
    pub s: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EquilibriumVerdict {
    Certified(EquilibriumCertificate),
    Violation {
        player: usize,
        action: usize,
        regret: f64,
        regrets: Vec<f64>,
    },
}

impl EquilibriumVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, EquilibriumVerdict::Certified(_))
    }
}

/// Per-player regret and the deviation witnessing it.
fn regrets_of(
    payoffs: &[Vec<f64>],
    profile: &[&[f64]],
    kind: EquilibriumKind,
) -> Vec<(f64, usize)> {
    payoffs
        .iter()
        .zip(profile)
        .map(|(u, x)| {
            let (best_a, best) =
                u.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, (a, &v)| if v > acc.1 { (a, v) } else { acc },
                    );
            let regret = match kind {
                EquilibriumKind::Ne => {
                    best - u.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>()
                }
                EquilibriumKind::Wsne => u
                    .iter()
                    .zip(x.iter())
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(&v, _)| best - v)
                    .fold(0.0, f64::max),
            };
            (regret.max(0.0), best_a)
        })
        .collect()
}

/// Certify `profile` as an ε-equilibrium of the game with payoff tensors
/// `tensors` (one per player), or report the most profitable deviation.
pub fn check_equilibrium(
    tensors: &[Tensor],
    profile: &[SimplexVector],
    epsilon: f64,
    kind: EquilibriumKind,
) -> Result<EquilibriumVerdict> {
    if tensors.len() != profile.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} payoff tensors for {} players",
            tensors.len(),
            profile.len()
        )));
    }
    let payoffs: Vec<Vec<f64>> = tensors
        .iter()
        .enumerate()
        .map(|(i, t)| deviation_payoffs(t, profile, i))
        .collect::<Result<_>>()?;
    let p: Vec<&[f64]> = profile.iter().map(SimplexVector::as_slice).collect();
    let reg = regrets_of(&payoffs, &p, kind);
    let regrets: Vec<f64> = reg.iter().map(|r| r.0).collect();
    let (player, &(regret, action)) =
        reg.iter().enumerate().fold(
            (0, &reg[0]),
            |acc, (i, r)| if r.0 > acc.1 .0 { (i, r) } else { acc },
        );
    if regret <= epsilon + REGRET_TOL {
        Ok(EquilibriumVerdict::Certified(EquilibriumCertificate {
            profile: profile.to_vec(),
            epsilon,
            kind,
            regrets,
            s: None,
        }))
    } else {
        Ok(EquilibriumVerdict::Violation {
            player,
            action,
            regret,
            regrets,
        })
    }
}

/// A complete-information game: payoff tensors plus an objective tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteGame {
    pub payoffs: Vec<Tensor>,
    pub objective: Tensor,
}

/// Bayesian game with `k` players, `n` actions each and `m` states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesianNFG {
    /// `payoffs[θ][i]` is player `i`'s tensor in state `θ`.
    pub payoffs: Vec<Vec<Tensor>>,
    /// `objective[θ]` is the designer's tensor in state `θ`.
    pub objective: Vec<Tensor>,
    pub prior: SimplexVector,
}

impl BayesianNFG {
    pub fn new(
        payoffs: Vec<Vec<Tensor>>,
        objective: Vec<Tensor>,
        prior: SimplexVector,
    ) -> Result<Self> {
        let g = Self {
            payoffs,
            objective,
            prior,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.prior.dim();
        if self.payoffs.len() != m || self.objective.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "prior has {m} states; got {} payoff sets and {} objective tensors",
                self.payoffs.len(),
                self.objective.len()
            )));
        }
        let k = self.payoffs[0].len();
        if k == 0 || k > MAX_PLAYERS {
            return Err(Error::InvalidShape(format!(
                "need 1..={MAX_PLAYERS} players, got {k}"
            )));
        }
        let n = self.objective[0].shape()[0];
        let shape = vec![n; k];
        let ok = self
            .payoffs
            .iter()
            .all(|ps| ps.len() == k && ps.iter().all(|t| t.shape == shape))
            && self.objective.iter().all(|t| t.shape == shape);
        if !ok {
            return Err(Error::InvalidShape(format!(
                "every tensor must have shape {shape:?}"
            )));
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn actions(&self) -> usize {
        self.objective[0].shape()[0]
    }

    pub fn states(&self) -> usize {
        self.prior.dim()
    }

    /// Random game with entries uniform in `[-1, 1]` and a uniform prior.
    pub fn random(k: usize, n: usize, m: usize, rng: &mut SeededRng) -> Self {
        let shape = vec![n; k];
        let payoffs = (0..m)
            .map(|_| (0..k).map(|_| Tensor::random(shape.clone(), rng)).collect())
            .collect();
        let objective = (0..m).map(|_| Tensor::random(shape.clone(), rng)).collect();
        Self {
            payoffs,
            objective,
            prior: SimplexVector::uniform(m),
        }
    }

    /// Two-player zero-sum game: player 2 receives `-A`, the objective is `A`.
    pub fn zero_sum(a: Vec<Tensor>, prior: SimplexVector) -> Result<Self> {
        let payoffs = a.iter().map(|t| vec![t.clone(), t.negate()]).collect();
        Self::new(payoffs, a, prior)
    }

    pub fn is_zero_sum(&self) -> bool {
        self.players() == 2
            && self.payoffs.iter().zip(&self.objective).all(|(ps, f)| {
                ps[1].data.iter().zip(&ps[0].data).all(|(b, a)| *b == -*a) && f.data == ps[0].data
            })
    }
}

/// Complete-information game played at posterior `μ`.
pub fn posterior_game(game: &BayesianNFG, mu: &SimplexVector) -> Result<CompleteGame> {
    if mu.dim() != game.states() {
        return Err(Error::DimensionMismatch(format!(
            "posterior has {} states, game has {}",
            mu.dim(),
            game.states()
        )));
    }
    let w = mu.as_slice();
    let payoffs = (0..game.players())
        .map(|i| {
            let ts: Vec<&Tensor> = game.payoffs.iter().map(|ps| &ps[i]).collect();
            Tensor::mix(&ts, w)
        })
        .collect();
    let objs: Vec<&Tensor> = game.objective.iter().collect();
    Ok(CompleteGame {
        payoffs,
        objective: Tensor::mix(&objs, w),
    })
}

/// `r(ε) = 3 (k+1)² ln((k+1)² n) / ε²`.
pub fn support_radius(epsilon: f64, n: usize, k: usize) -> f64 {
    let kk = ((k + 1) * (k + 1)) as f64;
    3.0 * kk * (kk * n as f64).ln() / (epsilon * epsilon)
}

/// `⌈r(ε/4)⌉`, the support size guaranteeing that ε-equilibria exist among
/// uniform-on-multiset profiles.
pub fn support_bound(epsilon: f64, n: usize, k: usize) -> Result<usize> {
    if !(epsilon > 0.0) || n == 0 || k == 0 {
        return Err(Error::InvalidParam(format!(
            "need epsilon > 0, n >= 1, k >= 1 (got {epsilon}, {n}, {k})"
        )));
    }
    Ok(crate::mixsel::robust_ceil(support_radius(
        epsilon / 4.0,
        n,
        k,
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEpsResult {
    pub value: f64,
    pub profile: MixedProfile,
    pub s: usize,
    pub candidates: u128,
    pub equilibria: u128,
}

/// Best designer objective over s-uniform ε-equilibria of `game`.
pub fn g_eps(
    game: &CompleteGame,
    epsilon: f64,
    s: usize,
    kind: EquilibriumKind,
    opts: &SolveOptions,
) -> Result<GEpsResult> {
    let k = game.payoffs.len();
    let shape = game.objective.shape().to_vec();
    if k != shape.len() || game.payoffs.iter().any(|t| t.shape != shape) {
        return Err(Error::InvalidShape(
            "payoff and objective tensors disagree in shape".into(),
        ));
    }
    // Strategy lists per player; the cap applies to the number of profiles.
    let mut per_player: Vec<Vec<Vec<f64>>> = Vec::with_capacity(k);
    let mut total: u128 = 1;
    for &n in &shape {
        let e = enumerate_s_uniform(n, s, u128::MAX)?;
        total = total.saturating_mul(e.len());
        if total > opts.cap {
            let mut exact: u128 = 1;
            for &n2 in &shape {
                exact = exact.saturating_mul(crate::simplex::multiset_count(n2, s));
            }
            return Err(Error::CapExceeded {
                count: exact,
                cap: opts.cap,
            });
        }
        per_player.push(e.vectors().map(|v| v.entries()).collect());
    }
    let sizes: Vec<u128> = per_player.iter().map(|l| l.len() as u128).collect();
    let decode = |mut r: u128| -> Vec<usize> {
        let mut idx = vec![0usize; k];
        for p in (0..k).rev() {
            idx[p] = (r % sizes[p]) as usize;
            r /= sizes[p];
        }
        idx
    };
    let chunk: u128 = 1024;
    let chunks = total.div_ceil(chunk) as u64;
    type Best = Option<(f64, Vec<usize>)>;
    let (best, count): (Best, u128) = opts.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut best: Best = None;
                let mut count = 0u128;
                let start = ci as u128 * chunk;
                for r in start..(start + chunk).min(total) {
                    let idx = decode(r);
                    let prof: Vec<&[f64]> = idx
                        .iter()
                        .enumerate()
                        .map(|(p, &j)| per_player[p][j].as_slice())
                        .collect();
                    let payoffs: Vec<Vec<f64>> = (0..k)
                        .map(|i| contract(&game.payoffs[i], &prof, Some(i)))
                        .collect();
                    let worst = regrets_of(&payoffs, &prof, kind)
                        .iter()
                        .map(|r| r.0)
                        .fold(0.0, f64::max);
                    if worst > epsilon + REGRET_TOL {
                        continue;
                    }
                    count += 1;
                    let v = contract(&game.objective, &prof, None)[0];
                    // Larger value wins; ties go to the earlier profile.
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, idx));
                    }
                }
                (best, count)
            })
            .reduce(
                || (None, 0),
                |(a, ca), (b, cb)| {
                    let best = match (a, b) {
                        (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                            b
                        } else {
                            a
                        }),
                        (a, None) => a,
                        (None, b) => b,
                    };
                    (best, ca + cb)
                },
            )
    })?;
    let Some((value, idx)) = best else {
        return Err(Error::NoEquilibriumFound {
            candidates: total,
            s,
        });
    };
    let profile = idx
        .iter()
        .enumerate()
        .map(|(p, &j)| SimplexVector::new(per_player[p][j].clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GEpsResult {
        value,
        profile,
        s,
        candidates: total,
        equilibria: count,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSignalingResult {
    pub result: SignalingResult,
    /// Equilibrium recommended at each signal, in signal order.
    pub certificates: Vec<EquilibriumCertificate>,
    /// Expected designer objective of the recommended equilibria.
    pub value: f64,
    /// Support size used inside each posterior game.
    pub profile_s: usize,
}

/// Signaling scheme plus an ε-equilibrium per signal, within `ε` of the best
/// designer value when `profile_s` is at least [`support_bound`].
pub fn game_signaling(
    game: &BayesianNFG,
    epsilon: f64,
    kind: EquilibriumKind,
    profile_s: Option<usize>,
    opts: &SolveOptions,
) -> Result<GameSignalingResult> {
    game.validate()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let (k, n) = (game.players(), game.actions());
    let nk = (n as f64).powi(k as i32);
    let beta = 2.0 * (k + 1) as f64 * nk;
    let alpha = epsilon / (4.0 * (k + 1) as f64 * nk);
    let delta = epsilon / 4.0;
    let ps = match profile_s {
        Some(s) => s,
        None => support_bound(epsilon, n, k)?,
    };
    let s = sample_size(alpha, delta)?;
    let eval = |mu: &SimplexVector| -> Result<GEpsResult> {
        let pg = posterior_game(game, mu)?;
        g_eps(
            &pg,
            epsilon,
            ps,
            kind,
            &SolveOptions {
                threads: Some(1),
                ..opts.clone()
            },
        )
    };
    let (scheme, lp_value, candidates) = try_optimize_decomposition(&game.prior, s, opts, |c| {
        Ok(eval(&SUniformVector::new(c.to_vec())?.to_simplex())?.value)
    })?;
    let mut certificates = Vec::with_capacity(scheme.len());
    let mut value = 0.0;
    for sig in &scheme.signals {
        let r = eval(&sig.posterior)?;
        let pg = posterior_game(game, &sig.posterior)?;
        match check_equilibrium(&pg.payoffs, &r.profile, epsilon, kind)? {
            EquilibriumVerdict::Certified(mut c) => {
                c.s = Some(ps);
                certificates.push(c);
            }
            EquilibriumVerdict::Violation { regret, .. } => {
                return Err(Error::Internal(format!(
                    "enumerated profile failed re-validation (regret {regret})"
                )));
            }
        }
        value += sig.prob * r.value;
    }
    Ok(GameSignalingResult {
        result: SignalingResult {
            value,
            lp_value,
            guarantee: alpha * beta + epsilon / 2.0,
            s,
            candidates,
            scheme,
        },
        certificates,
        value,
        profile_s: ps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumValue {
    pub value: f64,
    /// Maximin strategy of the row player.
    pub x: SimplexVector,
    /// Minimax strategy of the column player.
    pub y: SimplexVector,
}

fn maximin(
    rows: usize,
    cols: usize,
    entry: impl Fn(usize, usize) -> f64,
) -> Result<(f64, Vec<f64>)> {
    // Variables: x (rows), v' >= 0, slacks σ (cols). Payoffs are shifted by +1
    // so the game value is nonnegative: Σ_i x_i (B_ij + 1) − v' − σ_j = 0.
    let nv = rows + 1 + cols;
    let mut c = vec![0.0; nv];
    c[rows] = 1.0;
    let mut e = Vec::with_capacity(cols + 1);
    for j in 0..cols {
        let mut r = vec![0.0; nv];
        for (i, ri) in r.iter_mut().enumerate().take(rows) {
            *ri = entry(i, j) + 1.0;
        }
        r[rows] = -1.0;
        r[rows + 1 + j] = -1.0;
        e.push(r);
    }
    let mut sum = vec![0.0; nv];
    sum[..rows].iter_mut().for_each(|v| *v = 1.0);
    e.push(sum);
    let mut b = vec![0.0; cols];
    b.push(1.0);
    let sol = solve_lp(&StandardFormLP::new(c, e, b)?)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "maximin LP reported {:?}",
            sol.status
        )));
    }
    Ok((sol.value - 1.0, sol.x[..rows].to_vec()))
}

fn normalized(v: Vec<f64>) -> Result<SimplexVector> {
    let s: f64 = v.iter().sum();
    SimplexVector::new(v.into_iter().map(|x| x / s).collect())
}

/// Value and optimal strategies of the zero-sum game with row-player payoffs `b`.
pub fn zero_sum_value(b: &Tensor) -> Result<ZeroSumValue> {
    if b.shape.len() != 2 {
        return Err(Error::InvalidShape(
            "zero-sum value needs a two-player matrix".into(),
        ));
    }
    let (r, c) = (b.shape[0], b.shape[1]);
    let (value, x) = maximin(r, c, |i, j| b.data[i * c + j])?;
    // Column player maximizes −Bᵀ.
    let (neg, y) = maximin(c, r, |j, i| -b.data[i * c + j])?;
    let value = 0.5 * (value - neg);
    Ok(ZeroSumValue {
        value,
        x: normalized(x)?,
        y: normalized(y)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumSignalingResult {
    pub result: SignalingResult,
    /// Exact equilibrium of each posterior game, in signal order.
    pub equilibria: Vec<ZeroSumValue>,
}

/// Signaling in a zero-sum game whose designer objective is the row player's
/// payoff; within `ε` of optimal.
pub fn zero_sum_signaling(
    game: &BayesianNFG,
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<ZeroSumSignalingResult> {
    game.validate()?;
    if !game.is_zero_sum() {
        return Err(Error::InvalidParam(
            "zero-sum signaling needs A_2 = -A_1 and objective A_1".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let n = game.actions();
    let n2 = (n * n) as f64;
    let (alpha, delta) = ((epsilon / (4.0 * n2)).min(1.0), epsilon / 4.0);
    let s = sample_size(alpha, delta)?;
    let value_at = |mu: &SimplexVector| -> Result<ZeroSumValue> {
        let ts: Vec<&Tensor> = game.objective.iter().collect();
        zero_sum_value(&Tensor::mix(&ts, mu.as_slice()))
    };
    let (scheme, lp_value, candidates) = try_optimize_decomposition(&game.prior, s, opts, |c| {
        Ok(value_at(&SUniformVector::new(c.to_vec())?.to_simplex())?.value)
    })?;
    let equilibria = scheme
        .signals
        .iter()
        .map(|sig| value_at(&sig.posterior))
        .collect::<Result<Vec<_>>>()?;
    let value = scheme
        .signals
        .iter()
        .zip(&equilibria)
        .map(|(sig, eq)| sig.prob * eq.value)
        .sum();
    Ok(ZeroSumSignalingResult {
        result: SignalingResult {
            scheme,
            value,
            lp_value,
            guarantee: alpha * n2 + 2.0 * delta,
            s,
            candidates,
        },
        equilibria,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies() -> Vec<Tensor> {
        let a = Tensor::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        vec![a.clone(), a.negate()]
    }

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pure_profile_lookup_and_means() {
        let mut rng = SeededRng::new(1);
        let t = Tensor::random(vec![2, 3, 2], &mut rng);
        let p = vec![
            SimplexVector::vertex(2, 1),
            SimplexVector::vertex(3, 2),
            SimplexVector::vertex(2, 0),
        ];
        assert_eq!(eval_tensor(&t, &p).unwrap(), t.get(&[1, 2, 0]));
        let u = vec![
            SimplexVector::uniform(2),
            SimplexVector::uniform(3),
            SimplexVector::uniform(2),
        ];
        let mean = t.data().iter().sum::<f64>() / 12.0;
        assert!((eval_tensor(&t, &u).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn two_player_is_bilinear() {
        let mut rng = SeededRng::new(2);
        for _ in 0..50 {
            let t = Tensor::random(vec![3, 4], &mut rng);
            let x = normalized((0..3).map(|_| rng.uniform()).collect()).unwrap();
            let y = normalized((0..4).map(|_| rng.uniform()).collect()).unwrap();
            let mut direct = 0.0;
            for i in 0..3 {
                for j in 0..4 {
                    direct += x.as_slice()[i] * t.get(&[i, j]) * y.as_slice()[j];
                }
            }
            assert!((eval_tensor(&t, &[x, y]).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn matching_pennies_equilibria() {
        let u = vec![SimplexVector::uniform(2), SimplexVector::uniform(2)];
        let v = check_equilibrium(&pennies(), &u, 0.0, EquilibriumKind::Ne).unwrap();
        match v {
            EquilibriumVerdict::Certified(c) => assert!(c.regrets.iter().all(|&r| r.abs() < 1e-12)),
            other => panic!("{other:?}"),
        }
        let pure = vec![SimplexVector::vertex(2, 0), SimplexVector::vertex(2, 0)];
        match check_equilibrium(&pennies(), &pure, 0.5, EquilibriumKind::Ne).unwrap() {
            EquilibriumVerdict::Violation {
                player,
                action,
                regret,
                ..
            } => {
                assert_eq!((player, action), (1, 1));
                assert!((regret - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    /// Prisoner's dilemma scaled into [-1, 1]: defecting (action 1) dominates.
    fn dilemma() -> Vec<Tensor> {
        let a = Tensor::from_rows(&[vec![0.5, -1.0], vec![1.0, -0.5]]).unwrap();
        let b = Tensor::from_rows(&[vec![0.5, 1.0], vec![-1.0, -0.5]]).unwrap();
        vec![a, b]
    }

    #[test]
    fn dominant_profile_is_certified_and_found() {
        let d = vec![SimplexVector::vertex(2, 1), SimplexVector::vertex(2, 1)];
        assert!(check_equilibrium(&dilemma(), &d, 0.0, EquilibriumKind::Ne)
            .unwrap()
            .is_certified());
        let g = CompleteGame {
            payoffs: dilemma(),
            objective: Tensor::filled(vec![2, 2], 0.3).unwrap(),
        };
        let r = g_eps(&g, 0.0, 1, EquilibriumKind::Ne, &SolveOptions::default()).unwrap();
        assert_eq!(r.profile, d);
        assert_eq!(r.equilibria, 1);
    }

    #[test]
    fn pennies_uniform_profile_in_g_eps() {
        let g = CompleteGame {
            payoffs: pennies(),
            objective: pennies()[0].clone(),
        };
        let r = g_eps(&g, 0.01, 4, EquilibriumKind::Ne, &SolveOptions::default()).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(
            r.profile,
            vec![SimplexVector::uniform(2), SimplexVector::uniform(2)]
        );
    }

    #[test]
    fn g_eps_reports_missing_equilibria_and_caps() {
        let g = CompleteGame {
            payoffs: pennies(),
            objective: pennies()[0].clone(),
        };
        assert!(matches!(
            g_eps(&g, 0.1, 1, EquilibriumKind::Ne, &SolveOptions::default()),
            Err(Error::NoEquilibriumFound {
                candidates: 4,
                s: 1
            })
        ));
        let opts = SolveOptions::default().with_cap(100);
        assert!(matches!(
            g_eps(&g, 0.1, 20, EquilibriumKind::Ne, &opts),
            Err(Error::CapExceeded {
                count: 441,
                cap: 100
            })
        ));
    }

    #[test]
    fn g_eps_is_monotone_in_epsilon() {
        let mut rng = SeededRng::new(3);
        for _ in 0..10 {
            let g = BayesianNFG::random(2, 2, 1, &mut rng);
            let pg = posterior_game(&g, &g.prior).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for eps in [0.2, 0.4, 0.8, 2.0] {
                if let Ok(r) = g_eps(&pg, eps, 6, EquilibriumKind::Ne, &SolveOptions::default()) {
                    assert!(r.value >= prev);
                    prev = r.value;
                }
            }
        }
    }

    #[test]
    fn wsne_is_stricter_than_ne() {
        let mut rng = SeededRng::new(4);
        for _ in 0..20 {
            let g = BayesianNFG::random(2, 3, 1, &mut rng);
            let pg = posterior_game(&g, &g.prior).unwrap();
            let x = normalized((0..3).map(|_| rng.uniform()).collect()).unwrap();
            let y = normalized((0..3).map(|_| rng.uniform()).collect()).unwrap();
            let p = [x, y];
            let regret = |kind| match check_equilibrium(&pg.payoffs, &p, 0.0, kind).unwrap() {
                EquilibriumVerdict::Certified(c) => c.regrets,
                EquilibriumVerdict::Violation { regrets, .. } => regrets,
            };
            let ne = regret(EquilibriumKind::Ne);
            let ws = regret(EquilibriumKind::Wsne);
            assert!(ne.iter().zip(&ws).all(|(a, b)| a <= &(b + 1e-12)));
        }
    }

    #[test]
    fn posterior_game_basics() {
        let mut rng = SeededRng::new(5);
        let mut g = BayesianNFG::random(2, 2, 2, &mut rng);
        let v = posterior_game(&g, &SimplexVector::vertex(2, 1)).unwrap();
        assert_eq!(v.payoffs[0], g.payoffs[1][0]);
        assert_eq!(v.objective, g.objective[1]);
        g.payoffs[1] = g.payoffs[0].clone();
        g.objective[1] = g.objective[0].clone();
        let u = posterior_game(&g, &SimplexVector::uniform(2)).unwrap();
        for (a, b) in u.payoffs[0].data().iter().zip(g.payoffs[0][0].data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn posterior_game_is_linear() {
        let mut rng = SeededRng::new(6);
        let g = BayesianNFG::random(2, 3, 3, &mut rng);
        for _ in 0..20 {
            let mu = normalized((0..3).map(|_| rng.uniform()).collect()).unwrap();
            let nu = normalized((0..3).map(|_| rng.uniform()).collect()).unwrap();
            let th = rng.uniform();
            let mix = sv(&mu
                .as_slice()
                .iter()
                .zip(nu.as_slice())
                .map(|(a, b)| th * a + (1.0 - th) * b)
                .collect::<Vec<_>>());
            let (pm, pa, pb) = (
                posterior_game(&g, &mix).unwrap(),
                posterior_game(&g, &mu).unwrap(),
                posterior_game(&g, &nu).unwrap(),
            );
            for i in 0..pm.objective.data().len() {
                let lin = th * pa.objective.data()[i] + (1.0 - th) * pb.objective.data()[i];
                assert!((pm.objective.data()[i] - lin).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn support_bound_examples() {
        assert_eq!(support_bound(4.0, 4, 2).unwrap(), 97);
        let r = support_radius(0.5, 4, 2);
        assert_eq!(support_bound(2.0, 4, 2).unwrap(), r.ceil() as usize);
        assert!((support_radius(4.0, 4, 2) * 16.0 - support_radius(1.0, 4, 2)).abs() < 1e-9);
        let mut prev = usize::MAX;
        for e in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let b = support_bound(e, 3, 2).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn zero_sum_examples() {
        let z = zero_sum_value(&pennies()[0]).unwrap();
        assert!(z.value.abs() < 1e-10);
        assert!((z.x.as_slice()[0] - 0.5).abs() < 1e-10 && (z.y.as_slice()[0] - 0.5).abs() < 1e-10);
        let saddle = Tensor::from_rows(&[vec![0.3, 0.6], vec![-0.2, 0.9]]).unwrap();
        assert!((zero_sum_value(&saddle).unwrap().value - 0.3).abs() < 1e-10);
    }

    #[test]
    fn zero_sum_duality() {
        let mut rng = SeededRng::new(7);
        for _ in 0..50 {
            let n = 1 + rng.below(4);
            let b = Tensor::random(vec![n, n], &mut rng);
            let z = zero_sum_value(&b).unwrap();
            let col_worst = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| z.x.as_slice()[i] * b.get(&[i, j]))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            let row_best = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| b.get(&[i, j]) * z.y.as_slice()[j])
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(col_worst >= z.value - 1e-8 && row_best <= z.value + 1e-8);
        }
    }

    #[test]
    fn zero_sum_signaling_single_state() {
        let a = Tensor::from_rows(&[vec![0.4, -0.3], vec![-0.5, 0.6]]).unwrap();
        let g = BayesianNFG::zero_sum(vec![a.clone()], SimplexVector::vertex(1, 0)).unwrap();
        let r = zero_sum_signaling(&g, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.scheme.len(), 1);
        assert!((r.result.value - zero_sum_value(&a).unwrap().value).abs() < 1e-10);
    }

    #[test]
    fn state_independent_zero_sum_needs_no_signal() {
        let a = Tensor::from_rows(&[vec![0.4, -0.3], vec![-0.5, 0.6]]).unwrap();
        let g = BayesianNFG::zero_sum(vec![a.clone(), a.clone()], sv(&[0.3, 0.7])).unwrap();
        let r = zero_sum_signaling(&g, 0.5, &SolveOptions::default()).unwrap();
        assert!((r.result.value - zero_sum_value(&a).unwrap().value).abs() < 1e-8);
    }

    #[test]
    fn game_signaling_single_state_is_g_eps() {
        let mut rng = SeededRng::new(8);
        let g = BayesianNFG::random(2, 2, 1, &mut rng);
        let r = game_signaling(
            &g,
            0.5,
            EquilibriumKind::Ne,
            Some(6),
            &SolveOptions::default(),
        )
        .unwrap();
        let pg = posterior_game(&g, &g.prior).unwrap();
        let direct = g_eps(&pg, 0.5, 6, EquilibriumKind::Ne, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.scheme.len(), 1);
        assert!((r.value - direct.value).abs() < 1e-12);
        assert_eq!(r.certificates[0].profile, direct.profile);
    }

    #[test]
    fn tensor_json_round_trip() {
        let mut rng = SeededRng::new(9);
        let t = Tensor::random(vec![2, 3, 2], &mut rng);
        let j = serde_json::to_string(&t).unwrap();
        let back: Tensor = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"shape":[2,2],"data":[[0.1,0.2],[0.3]]}"#;
        assert!(serde_json::from_str::<Tensor>(bad).is_err());
    }
}
