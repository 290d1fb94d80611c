//! Objective functions `g` on bounded vectors, with their declared stability
//! and Lipschitz constants.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Domain;
use crate::simplex::SimplexVector;

/// Counts are integers, so comparing `count >= frac * n` with this slack
/// only absorbs round-off in `frac * n`.
const FRACTION_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Lipschitz {
    Finite(f64),
    Unbounded,
}

impl Lipschitz {
    pub fn finite(self) -> Option<f64> {
        match self {
            Lipschitz::Finite(c) => Some(c),
            Lipschitz::Unbounded => None,
        }
    }

    fn max(self, other: Lipschitz) -> Lipschitz {
        match (self, other) {
            (Lipschitz::Finite(a), Lipschitz::Finite(b)) => Lipschitz::Finite(a.max(b)),
            _ => Lipschitz::Unbounded,
        }
    }
}

pub type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Mid,
    Lottery {
        w: Vec<f64>,
    },
    Revenue {
        block: usize,
        probs: Vec<f64>,
    },
    VoteSum {
        delta: f64,
    },
    VoteThresh {
        q: f64,
    },
    SmoothThresh {
        q: f64,
        delta: f64,
    },
    ThreshRelaxed {
        q: f64,
        delta: f64,
    },
    Slope,
    Clique {
        k: usize,
    },
    Convex {
        parts: Vec<Objective>,
        weights: Vec<f64>,
    },
    Max {
        parts: Vec<Objective>,
    },
    Custom {
        f: CustomFn,
        monotone_floor: Option<f64>,
    },
}

/// An evaluator `t -> g(t)` plus the metadata the solvers need.
#[derive(Clone)]
pub struct Objective {
    name: String,
    n: usize,
    beta: f64,
    lipschitz: Lipschitz,
    lipschitz_l1: Option<f64>,
    domain: Domain,
    kind: Kind,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("beta", &self.beta)
            .field("lipschitz", &self.lipschitz)
            .field("domain", &self.domain)
            .finish()
    }
}

fn desc(a: &f64, b: &f64) -> Ordering {
    b.total_cmp(a)
}

fn count_at_least(t: &[f64], threshold: f64) -> usize {
    t.iter().filter(|&&v| v >= threshold).count()
}

fn fraction_reaches(count: usize, n: usize, frac: f64) -> bool {
    count as f64 >= frac * n as f64 - FRACTION_SLACK
}

/// Best lottery revenue `max_p p * sum_i w_i I[t_i >= p]` and a maximizing price.
///
/// Revenue is nondecreasing in `p` between consecutive sorted entries, so it
/// suffices to try each distinct `t_i`. Ties in revenue go to the lower price.
pub fn lottery_optimal_price(w: &[f64], t: &[f64]) -> (f64, f64) {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| desc(&t[a], &t[b]));
    let mut best = (0.0, 0.0);
    let mut weight = 0.0;
    for (pos, &i) in idx.iter().enumerate() {
        weight += w[i];
        let p = t[i];
        let group_ends = idx.get(pos + 1).is_none_or(|&j| t[j] != p);
        if group_ends && p > 0.0 {
            let rev = p * weight;
            if rev >= best.0 {
                best = (rev, p);
            }
        }
    }
    best
}

fn max2(block: &[f64]) -> f64 {
    let (mut a, mut b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &v in block {
        if v > a {
            b = a;
            a = v;
        } else if v > b {
            b = v;
        }
    }
    b
}

impl Objective {
    fn base(
        name: &str,
        n: usize,
        beta: f64,
        lipschitz: Lipschitz,
        domain: Domain,
        kind: Kind,
    ) -> Self {
        Self {
            name: name.to_string(),
            n,
            beta,
            lipschitz,
            lipschitz_l1: None,
            domain,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Input dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lipschitz(&self) -> Lipschitz {
        self.lipschitz
    }

    pub fn lipschitz_l1(&self) -> Option<f64> {
        self.lipschitz_l1
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Evaluate without input validation; `t.len()` must equal `n()`.
    pub fn evaluate(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.n, "objective `{}` input length", self.name);
        let n = t.len();
        match &self.kind {
            Kind::Mid => {
                let mut v = t.to_vec();
                v.sort_by(desc);
                let lo = n / 4;
                let hi = (3 * n).div_ceil(4);
                v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            }
            Kind::Lottery { w } => lottery_optimal_price(w, t).0,
            Kind::Revenue { block, probs } => {
                t.chunks(*block).zip(probs).map(|(b, p)| p * max2(b)).sum()
            }
            Kind::VoteSum { delta } => count_at_least(t, -delta) as f64 / n as f64,
            Kind::VoteThresh { q } => {
                if fraction_reaches(count_at_least(t, 0.0), n, *q) {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::SmoothThresh { q, delta } => {
                let c = count_at_least(t, 0.0);
                if fraction_reaches(c, n, *q) {
                    1.0
                } else if !fraction_reaches(c, n, q - delta) {
                    0.0
                } else {
                    let vs = c as f64 / n as f64;
                    ((vs - q + delta) / delta).clamp(0.0, 1.0)
                }
            }
            Kind::ThreshRelaxed { q, delta } => {
                if fraction_reaches(count_at_least(t, -delta), n, q - delta) {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Slope => {
                let cap = 1.0 / n as f64;
                t.iter().map(|&v| (4.0 * v.max(0.0)).min(cap)).sum()
            }
            Kind::Clique { k } => {
                let mut v = t.to_vec();
                let (_, kth, rest) = v.select_nth_unstable_by(k - 1, desc);
                let kth = *kth;
                let next = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let last = rest.iter().copied().fold(kth, f64::min);
                kth - next + last
            }
            Kind::Convex { parts, weights } => parts
                .iter()
                .zip(weights)
                .map(|(g, w)| w * g.evaluate(t))
                .sum(),
            Kind::Max { parts } => parts
                .iter()
                .map(|g| g.evaluate(t))
                .fold(f64::NEG_INFINITY, f64::max),
            Kind::Custom { f, .. } => f(t),
        }
    }

    /// Evaluate with dimension, domain and output-range checks.
    pub fn try_evaluate(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "objective `{}` takes {} inputs, got {}",
                self.name,
                self.n,
                t.len()
            )));
        }
        if let Some(v) = t.iter().find(|&&v| !self.domain.contains(v)) {
            return Err(Error::InvalidParam(format!(
                "input {v} outside {:?} domain of `{}`",
                self.domain, self.name
            )));
        }
        let g = self.evaluate(t);
        if !(self.domain.lower() - 1e-12..=1.0 + 1e-12).contains(&g) {
            return Err(Error::Internal(format!(
                "objective `{}` produced {g}, outside its range",
                self.name
            )));
        }
        Ok(g)
    }

    /// Optimal price for lottery objectives.
    pub fn lottery_price(&self, t: &[f64]) -> Option<f64> {
        match &self.kind {
            Kind::Lottery { w } => Some(lottery_optimal_price(w, t).1),
            _ => None,
        }
    }

    /// Wrap an arbitrary function with caller-declared constants.
    pub fn custom(
        name: &str,
        n: usize,
        beta: f64,
        lipschitz: Lipschitz,
        domain: Domain,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::base(
            name,
            n,
            beta,
            lipschitz,
            domain,
            Kind::Custom {
                f: Arc::new(f),
                monotone_floor: None,
            },
        )
    }

    /// As [`Objective::custom`], for functions nondecreasing in every input:
    /// the worst corruption sets corrupted entries to `floor`.
    pub fn custom_monotone(
        name: &str,
        n: usize,
        beta: f64,
        lipschitz: Lipschitz,
        domain: Domain,
        floor: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::base(
            name,
            n,
            beta,
            lipschitz,
            domain,
            Kind::Custom {
                f: Arc::new(f),
                monotone_floor: Some(floor),
            },
        )
    }
}

/// Mean of the middle half of the entries.
pub fn obj_mid(n: usize) -> Result<Objective> {
    if n == 0 {
        return Err(Error::InvalidParam("mid needs n >= 1".into()));
    }
    Ok(Objective::base(
        "mid",
        n,
        4.0,
        Lipschitz::Finite(1.0),
        Domain::Signed,
        Kind::Mid,
    ))
}

/// Revenue of the best single lottery price for buyer weights `w`.
pub fn obj_lottery(w: &SimplexVector) -> Objective {
    Objective::base(
        "lottery",
        w.dim(),
        1.0,
        Lipschitz::Finite(1.0),
        Domain::Unsigned,
        Kind::Lottery {
            w: w.as_slice().to_vec(),
        },
    )
}

/// Expected second-highest value over blocks of `block` bidders, block `c`
/// weighted by `probs[c]`.
pub fn obj_revenue(block: usize, probs: &SimplexVector) -> Result<Objective> {
    if block < 2 {
        return Err(Error::InvalidShape(format!(
            "revenue needs at least 2 bidders per block, got {block}"
        )));
    }
    Ok(Objective::base(
        "revenue",
        block * probs.dim(),
        2.0,
        Lipschitz::Finite(1.0),
        Domain::Unsigned,
        Kind::Revenue {
            block,
            probs: probs.as_slice().to_vec(),
        },
    ))
}

/// Fraction of voters with nonnegative utility.
pub fn obj_vote_sum(n: usize) -> Objective {
    Objective::base(
        "vote_sum",
        n,
        1.0,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::VoteSum { delta: 0.0 },
    )
}

/// Fraction of voters with utility at least `-delta`.
pub fn obj_vote_sum_relaxed(n: usize, delta: f64) -> Result<Objective> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    Ok(Objective::base(
        "vote_sum_relaxed",
        n,
        1.0,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::VoteSum { delta },
    ))
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "threshold q must lie in (0, 1], got {q}"
        )))
    }
}

fn check_q_delta(q: f64, delta: f64) -> Result<()> {
    check_q(q)?;
    if delta > 0.0 && delta < q {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "need 0 < delta < q, got delta={delta}, q={q}"
        )))
    }
}

/// 1 if at least a `q` fraction vote Yes.
pub fn obj_vote_thresh(n: usize, q: f64) -> Result<Objective> {
    check_q(q)?;
    Ok(Objective::base(
        "vote_thresh",
        n,
        2.0 * n as f64,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::VoteThresh { q },
    ))
}

/// Threshold with a linear ramp on `[q - delta, q]`.
pub fn obj_vote_smooth_thresh(n: usize, q: f64, delta: f64) -> Result<Objective> {
    check_q_delta(q, delta)?;
    Ok(Objective::base(
        "vote_smooth_thresh",
        n,
        1.0 / delta,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::SmoothThresh { q, delta },
    ))
}

/// 1 if at least a `q - delta` fraction have utility at least `-delta`.
pub fn obj_vote_thresh_relaxed(n: usize, q: f64, delta: f64) -> Result<Objective> {
    check_q_delta(q, delta)?;
    Ok(Objective::base(
        "vote_thresh_relaxed",
        n,
        2.0 * n as f64,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::ThreshRelaxed { q, delta },
    ))
}

pub fn obj_slope(n: usize) -> Result<Objective> {
    if n == 0 {
        return Err(Error::InvalidParam("slope needs n >= 1".into()));
    }
    let mut g = Objective::base(
        "slope",
        n,
        1.0,
        Lipschitz::Unbounded,
        Domain::Signed,
        Kind::Slope,
    );
    g.lipschitz_l1 = Some(4.0);
    Ok(g)
}

/// `t_[k] - t_[k+1] + t_[n]` over the descending order statistics.
pub fn obj_clique(n: usize, k: usize) -> Result<Objective> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParam(format!(
            "clique needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    Ok(Objective::base(
        "clique",
        n,
        2.0 * n as f64,
        Lipschitz::Finite(3.0),
        Domain::Unsigned,
        Kind::Clique { k },
    ))
}

fn combined_domain(objs: &[Objective]) -> Domain {
    if objs.iter().all(|g| g.domain == Domain::Unsigned) {
        Domain::Unsigned
    } else {
        Domain::Signed
    }
}

fn check_parts(objs: &[Objective]) -> Result<usize> {
    let n = objs
        .first()
        .ok_or_else(|| Error::InvalidParam("nothing to combine".into()))?
        .n;
    if objs.iter().any(|g| g.n != n) {
        return Err(Error::DimensionMismatch(
            "combined objectives differ in input dimension".into(),
        ));
    }
    Ok(n)
}

pub fn combine_convex(objs: &[Objective], weights: &SimplexVector) -> Result<Objective> {
    let n = check_parts(objs)?;
    if weights.dim() != objs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} objectives, {} weights",
            objs.len(),
            weights.dim()
        )));
    }
    Ok(Objective::base(
        "convex",
        n,
        objs.iter().map(|g| g.beta).fold(0.0, f64::max),
        objs.iter()
            .skip(1)
            .fold(objs[0].lipschitz, |c, g| c.max(g.lipschitz)),
        combined_domain(objs),
        Kind::Convex {
            parts: objs.to_vec(),
            weights: weights.as_slice().to_vec(),
        },
    ))
}

pub fn combine_max(objs: &[Objective]) -> Result<Objective> {
    let n = check_parts(objs)?;
    Ok(Objective::base(
        "max",
        n,
        objs.iter().map(|g| g.beta).fold(0.0, f64::max),
        objs.iter()
            .skip(1)
            .fold(objs[0].lipschitz, |c, g| c.max(g.lipschitz)),
        combined_domain(objs),
        Kind::Max {
            parts: objs.to_vec(),
        },
    ))
}

/// Exact minimum of `g` over corruptions of the entries in `R`.
#[derive(Clone, Debug)]
pub struct WorstCorruption {
    g: Objective,
    floor: f64,
}

impl WorstCorruption {
    pub fn evaluate(&self, t: &[f64], corrupted: &[usize]) -> f64 {
        let mut t2 = t.to_vec();
        for &i in corrupted {
            t2[i] = self.floor;
        }
        self.g.evaluate(&t2)
    }
}

/// Value every corrupted entry is pushed to, for objectives nondecreasing in
/// each input.
fn monotone_floor(g: &Objective) -> Option<f64> {
    match &g.kind {
        Kind::Lottery { .. } | Kind::Revenue { .. } | Kind::Slope => Some(0.0),
        Kind::Mid
        | Kind::VoteSum { .. }
        | Kind::VoteThresh { .. }
        | Kind::SmoothThresh { .. }
        | Kind::ThreshRelaxed { .. } => Some(-1.0),
        Kind::Clique { .. } => None,
        Kind::Custom { monotone_floor, .. } => *monotone_floor,
        Kind::Convex { parts, .. } | Kind::Max { parts } => {
            // Lowering an entry never helps any monotone part, so the most
            // negative floor works for all of them at once.
            parts
                .iter()
                .map(monotone_floor)
                .try_fold(f64::INFINITY, |acc, f| f.map(|f| acc.min(f)))
        }
    }
}

pub fn worst_corruption_for(g: &Objective) -> Result<WorstCorruption> {
    match monotone_floor(g) {
        Some(floor) => Ok(WorstCorruption {
            g: g.clone(),
            floor,
        }),
        None => Err(Error::Unavailable(g.name.clone())),
    }
}

/// Objective selection as it appears in JSON configs, e.g.
/// `{"objective": "lottery", "weights": [0.5, 0.5]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "objective", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Mid {
        #[serde(default)]
        n: Option<usize>,
    },
    Lottery {
        weights: Vec<f64>,
    },
    Revenue {
        block: usize,
        probs: Vec<f64>,
    },
    VoteSum {
        #[serde(default)]
        n: Option<usize>,
    },
    VoteSumRelaxed {
        #[serde(default)]
        n: Option<usize>,
        delta: f64,
    },
    VoteThresh {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "default_q")]
        q: f64,
    },
    VoteSmoothThresh {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "default_q")]
        q: f64,
        delta: f64,
    },
    VoteThreshRelaxed {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "default_q")]
        q: f64,
        delta: f64,
    },
    Slope {
        #[serde(default)]
        n: Option<usize>,
    },
    Clique {
        #[serde(default)]
        n: Option<usize>,
        k: usize,
    },
}

fn default_q() -> f64 {
    0.5
}

impl ObjectiveSpec {
    /// Build the objective; `rows` supplies `n` when the config leaves it out.
    pub fn build(&self, rows: usize) -> Result<Objective> {
        let pick = |n: &Option<usize>| n.unwrap_or(rows);
        let g = match self {
            ObjectiveSpec::Mid { n } => obj_mid(pick(n))?,
            ObjectiveSpec::Lottery { weights } => {
                obj_lottery(&SimplexVector::new(weights.clone())?)
            }
            ObjectiveSpec::Revenue { block, probs } => {
                obj_revenue(*block, &SimplexVector::new(probs.clone())?)?
            }
            ObjectiveSpec::VoteSum { n } => obj_vote_sum(pick(n)),
            ObjectiveSpec::VoteSumRelaxed { n, delta } => obj_vote_sum_relaxed(pick(n), *delta)?,
            ObjectiveSpec::VoteThresh { n, q } => obj_vote_thresh(pick(n), *q)?,
            ObjectiveSpec::VoteSmoothThresh { n, q, delta } => {
                obj_vote_smooth_thresh(pick(n), *q, *delta)?
            }
            ObjectiveSpec::VoteThreshRelaxed { n, q, delta } => {
                obj_vote_thresh_relaxed(pick(n), *q, *delta)?
            }
            ObjectiveSpec::Slope { n } => obj_slope(pick(n))?,
            ObjectiveSpec::Clique { n, k } => obj_clique(pick(n), *k)?,
        };
        if g.n != rows {
            return Err(Error::DimensionMismatch(format!(
                "objective `{}` takes {} inputs but the matrix has {rows} rows",
                g.name, g.n
            )));
        }
        Ok(g)
    }
}
