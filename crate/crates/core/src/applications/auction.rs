//! Revealing information about an item to bidders in a second-price auction.
//!
//! A state `θ ∈ [m]` is drawn from the prior; independently, a valuation
//! matrix `V` (bidders by states) is drawn from a finite distribution. Bidders
//! bid their posterior expected value and the auctioneer earns the second
//! highest bid.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{oracle_sample_count, DEFAULT_C0};
use crate::error::{Error, Result};
use crate::matrix::{BoundedMatrix, Domain};
use crate::mixsel::{sample_size, SolveOptions};
use crate::objectives::{obj_revenue, Objective};
use crate::rng::SeededRng;
use crate::signaling::{solve_signaling, SignalingResult};
use crate::simplex::SimplexVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionInstance {
    pub supports: Vec<BoundedMatrix>,
    pub probs: SimplexVector,
    pub prior: SimplexVector,
}

impl AuctionInstance {
    pub fn new(
        supports: Vec<BoundedMatrix>,
        probs: SimplexVector,
        prior: SimplexVector,
    ) -> Result<Self> {
        let first = supports.first().ok_or_else(|| {
            Error::InvalidParam("auction needs at least one valuation matrix".into())
        })?;
        let (n, m) = (first.rows(), first.cols());
        if supports.iter().any(|v| v.rows() != n || v.cols() != m) {
            return Err(Error::InvalidShape(
                "valuation matrices differ in shape".into(),
            ));
        }
        if supports.iter().any(|v| v.domain() != Domain::Unsigned) {
            return Err(Error::InvalidMatrix("valuations must be unsigned".into()));
        }
        if n < 2 {
            return Err(Error::InvalidShape(format!(
                "auction needs at least 2 bidders, got {n}"
            )));
        }
        if probs.dim() != supports.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} valuation matrices but {} probabilities",
                supports.len(),
                probs.dim()
            )));
        }
        if prior.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "prior has {} states, matrices have {m}",
                prior.dim()
            )));
        }
        Ok(Self {
            supports,
            probs,
            prior,
        })
    }

    pub fn bidders(&self) -> usize {
        self.supports[0].rows()
    }

    pub fn states(&self) -> usize {
        self.supports[0].cols()
    }

    /// The matrices stacked vertically, and the matching revenue objective.
    pub fn stacked(&self) -> Result<(BoundedMatrix, Objective)> {
        Ok((
            BoundedMatrix::vstack(&self.supports)?,
            obj_revenue(self.bidders(), &self.probs)?,
        ))
    }
}

/// Scheme within `ε` of the revenue-optimal disclosure policy.
pub fn auction_signaling_explicit(
    inst: &AuctionInstance,
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<SignalingResult> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let (w, g) = inst.stacked()?;
    solve_signaling(&w, &g, &inst.prior, epsilon / 4.0, epsilon / 2.0, opts)
}

/// Source of i.i.d. valuation matrices.
pub trait ValuationOracle {
    fn sample(&self, rng: &mut SeededRng) -> BoundedMatrix;
}

#[derive(Clone, Debug)]
pub struct FiniteValuationOracle {
    supports: Vec<BoundedMatrix>,
    dist: WeightedIndex<f64>,
}

impl FiniteValuationOracle {
    pub fn new(supports: Vec<BoundedMatrix>, probs: &SimplexVector) -> Result<Self> {
        if supports.len() != probs.dim() {
            return Err(Error::DimensionMismatch(
                "supports and probabilities differ in length".into(),
            ));
        }
        let dist = WeightedIndex::new(probs.as_slice())
            .map_err(|e| Error::InvalidParam(format!("valuation probabilities: {e}")))?;
        Ok(Self { supports, dist })
    }
}

impl ValuationOracle for FiniteValuationOracle {
    fn sample(&self, rng: &mut SeededRng) -> BoundedMatrix {
        self.supports[self.dist.sample(rng)].clone()
    }
}

#[derive(Clone, Debug)]
pub struct AuctionSampledParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub c0: f64,
    /// Overrides the formula-derived number of sampled matrices.
    pub samples: Option<usize>,
}

impl AuctionSampledParams {
    pub fn new(epsilon: f64, gamma: f64) -> Self {
        Self {
            epsilon,
            gamma,
            c0: DEFAULT_C0,
            samples: None,
        }
    }
}

/// Number of valuation matrices drawn by [`auction_signaling_sampled`].
pub fn auction_sample_count(m: usize, params: &AuctionSampledParams) -> Result<usize> {
    let s = sample_size(params.epsilon / 4.0, params.epsilon / 2.0)?;
    oracle_sample_count(s, m, params.epsilon, params.gamma, params.c0)
}

/// Draw valuation matrices, then solve the empirical instance explicitly.
pub fn auction_signaling_sampled(
    oracle: &dyn ValuationOracle,
    prior: &SimplexVector,
    params: &AuctionSampledParams,
    rng: &mut SeededRng,
    opts: &SolveOptions,
) -> Result<(SignalingResult, AuctionInstance)> {
    let c = match params.samples {
        Some(c) => c,
        None => auction_sample_count(prior.dim(), params)?,
    };
    if c == 0 {
        return Err(Error::InvalidParam(
            "need at least one sampled matrix".into(),
        ));
    }
    let mut uniq: Vec<BoundedMatrix> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for _ in 0..c {
        let v = oracle.sample(rng);
        match uniq.iter().position(|u| *u == v) {
            Some(i) => counts[i] += 1.0,
            None => {
                uniq.push(v);
                counts.push(1.0);
            }
        }
    }
    let probs = SimplexVector::new(counts.into_iter().map(|k| k / c as f64).collect())?;
    let inst = AuctionInstance::new(uniq, probs, prior.clone())?;
    let res = auction_signaling_explicit(&inst, params.epsilon, opts)?;
    Ok((res, inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signaling::{validate_scheme, SignalingScheme};

    fn m(rows: &[Vec<f64>]) -> BoundedMatrix {
        BoundedMatrix::from_rows(Domain::Unsigned, rows).unwrap()
    }

    fn pooling_instance() -> AuctionInstance {
        AuctionInstance::new(
            vec![m(&[vec![1.0, 0.0], vec![0.0, 1.0]])],
            SimplexVector::vertex(1, 0),
            SimplexVector::uniform(2),
        )
        .unwrap()
    }

    #[test]
    fn pooling_beats_revelation() {
        let inst = pooling_instance();
        let (w, g) = inst.stacked().unwrap();
        let pooled = SignalingScheme::no_information(&inst.prior)
            .value(&w, &g)
            .unwrap()
            .value;
        let full = SignalingScheme::full_revelation(&inst.prior)
            .value(&w, &g)
            .unwrap()
            .value;
        assert_eq!(pooled, 0.5);
        assert_eq!(full, 0.0);
        let r = auction_signaling_explicit(&inst, 0.2, &SolveOptions::default()).unwrap();
        assert!(r.value >= 0.5 - 0.2);
        assert!(validate_scheme(&r.scheme, &inst.prior).valid);
    }

    #[test]
    fn identical_bidders_make_signaling_irrelevant() {
        let row = vec![0.2, 0.9, 0.5];
        let inst = AuctionInstance::new(
            vec![m(&[row.clone(), row.clone(), row])],
            SimplexVector::vertex(1, 0),
            SimplexVector::new(vec![0.3, 0.3, 0.4]).unwrap(),
        )
        .unwrap();
        let r = auction_signaling_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
        let expected = 0.2 * 0.3 + 0.9 * 0.3 + 0.5 * 0.4;
        assert!((r.value - expected).abs() < 1e-9);
    }

    #[test]
    fn single_state_is_single_signal() {
        let inst = AuctionInstance::new(
            vec![m(&[vec![0.7], vec![0.4], vec![0.9]])],
            SimplexVector::vertex(1, 0),
            SimplexVector::vertex(1, 0),
        )
        .unwrap();
        let r = auction_signaling_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(r.scheme.len(), 1);
        assert_eq!(r.value, 0.7);
    }

    #[test]
    fn revenue_never_exceeds_top_bid() {
        let mut rng = SeededRng::new(31);
        for _ in 0..5 {
            let supports: Vec<BoundedMatrix> = (0..2)
                .map(|_| {
                    let rows: Vec<Vec<f64>> = (0..3)
                        .map(|_| (0..2).map(|_| rng.uniform()).collect())
                        .collect();
                    m(&rows)
                })
                .collect();
            let inst = AuctionInstance::new(
                supports,
                SimplexVector::uniform(2),
                SimplexVector::uniform(2),
            )
            .unwrap();
            let r = auction_signaling_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
            let (w, g) = inst.stacked().unwrap();
            for sig in &r.scheme.signals {
                let t = w.mat_vec(&sig.posterior).unwrap();
                let top = t.iter().copied().fold(0.0, f64::max);
                assert!(g.evaluate(&t) <= top);
            }
        }
    }

    #[test]
    fn point_mass_oracle_reduces_to_explicit() {
        let inst = pooling_instance();
        let oracle = FiniteValuationOracle::new(inst.supports.clone(), &inst.probs).unwrap();
        let mut params = AuctionSampledParams::new(0.5, 0.1);
        params.samples = Some(20);
        let (r, emp) = auction_signaling_sampled(
            &oracle,
            &inst.prior,
            &params,
            &mut SeededRng::new(2),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(emp, inst);
        assert_eq!(
            r,
            auction_signaling_explicit(&inst, 0.5, &SolveOptions::default()).unwrap()
        );
    }

    #[test]
    fn sample_count_formula() {
        let params = AuctionSampledParams::new(0.4, 0.2);
        let s = sample_size(0.1, 0.2).unwrap() as f64;
        let expect = (8.0 * (s * 3f64.ln() + 10f64.ln()) / 0.16).ceil() as usize;
        assert_eq!(auction_sample_count(3, &params).unwrap(), expect);
    }

    #[test]
    fn rejects_single_bidder() {
        assert!(matches!(
            AuctionInstance::new(
                vec![m(&[vec![0.5, 0.5]])],
                SimplexVector::vertex(1, 0),
                SimplexVector::uniform(2)
            ),
            Err(Error::InvalidShape(_))
        ));
    }
}
