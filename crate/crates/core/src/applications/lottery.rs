//! Pricing a single lottery over items for a population of unit-demand buyers.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{oracle_sample_count, DEFAULT_C0};
use crate::error::{Error, Result};
use crate::matrix::{BoundedMatrix, Domain};
use crate::mixsel::{sample_size, solve_mixture, SolveOptions};
use crate::objectives::{lottery_optimal_price, obj_lottery};
use crate::rng::SeededRng;
use crate::simplex::{SUniformVector, SimplexVector};

/// Buyer types (rows of `a`, values for each item in `[0, 1]`) with weights `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LotteryInstance {
    pub a: BoundedMatrix,
    pub w: SimplexVector,
}

impl LotteryInstance {
    pub fn new(a: BoundedMatrix, w: SimplexVector) -> Result<Self> {
        if a.domain() != Domain::Unsigned {
            return Err(Error::InvalidMatrix(
                "lottery values must be unsigned".into(),
            ));
        }
        if a.rows() != w.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} buyer types but {} weights",
                a.rows(),
                w.dim()
            )));
        }
        Ok(Self { a, w })
    }

    /// Revenue of offering lottery `x` at price `p`.
    pub fn revenue(&self, x: &SimplexVector, p: f64) -> Result<f64> {
        let t = self.a.mat_vec(x)?;
        Ok(p * t
            .iter()
            .zip(self.w.as_slice())
            .filter(|(&ti, _)| ti >= p)
            .map(|(_, &wi)| wi)
            .sum::<f64>())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LotteryOffer {
    pub x: SimplexVector,
    pub counts: SUniformVector,
    pub price: f64,
    pub revenue: f64,
    pub guarantee: f64,
}

/// Offer within `ε` of the best lottery-price pair.
pub fn lottery_design_explicit(
    inst: &LotteryInstance,
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<LotteryOffer> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let g = obj_lottery(&inst.w);
    let sol = solve_mixture(&inst.a, &g, epsilon / 2.0, epsilon / 2.0, opts)?;
    let x = sol.x.to_simplex();
    let t = inst.a.mat_vec(&x)?;
    let (_, price) = lottery_optimal_price(inst.w.as_slice(), &t);
    let revenue = inst.revenue(&x, price)?;
    Ok(LotteryOffer {
        x,
        counts: sol.x,
        price,
        revenue,
        guarantee: sol.guarantee,
    })
}

/// Source of i.i.d. buyer types.
pub trait TypeOracle {
    fn items(&self) -> usize;
    fn sample(&self, rng: &mut SeededRng) -> Vec<f64>;
}

/// Finite type distribution: row `i` of `a` with probability `probs[i]`.
#[derive(Clone, Debug)]
pub struct FiniteTypeOracle {
    inst: LotteryInstance,
    dist: WeightedIndex<f64>,
}

impl FiniteTypeOracle {
    pub fn new(inst: LotteryInstance) -> Result<Self> {
        let dist = WeightedIndex::new(inst.w.as_slice())
            .map_err(|e| Error::InvalidParam(format!("type weights: {e}")))?;
        Ok(Self { inst, dist })
    }

    pub fn instance(&self) -> &LotteryInstance {
        &self.inst
    }
}

impl TypeOracle for FiniteTypeOracle {
    fn items(&self) -> usize {
        self.inst.a.cols()
    }

    fn sample(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.inst.a.row(self.dist.sample(rng)).to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct SampledParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub c0: f64,
    /// Overrides the formula-derived number of sampled types.
    pub samples: Option<usize>,
}

impl SampledParams {
    pub fn new(epsilon: f64, gamma: f64) -> Self {
        Self {
            epsilon,
            gamma,
            c0: DEFAULT_C0,
            samples: None,
        }
    }
}

/// Number of types drawn by [`lottery_design_sampled`].
pub fn lottery_sample_count(m: usize, params: &SampledParams) -> Result<usize> {
    let s = sample_size(params.epsilon / 2.0, params.epsilon / 2.0)?;
    oracle_sample_count(s, m, params.epsilon, params.gamma, params.c0)
}

/// Draw types from `oracle` and solve the empirical instance.
///
/// Returns the offer (revenue measured on the empirical instance) and the
/// empirical instance itself.
pub fn lottery_design_sampled(
    oracle: &dyn TypeOracle,
    params: &SampledParams,
    rng: &mut SeededRng,
    opts: &SolveOptions,
) -> Result<(LotteryOffer, LotteryInstance)> {
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1), got {}",
            params.epsilon
        )));
    }
    let m = oracle.items();
    let n = match params.samples {
        Some(n) => n,
        None => lottery_sample_count(m, params)?,
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| oracle.sample(rng)).collect();
    let inst = empirical_instance(rows)?;
    let offer = lottery_design_explicit(&inst, params.epsilon, opts)?;
    Ok((offer, inst))
}

/// Uniform-weight instance over sampled rows, with repeated rows merged.
fn empirical_instance(rows: Vec<Vec<f64>>) -> Result<LotteryInstance> {
    let n = rows.len() as f64;
    let mut uniq: Vec<Vec<f64>> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    for r in rows {
        match uniq.iter().position(|u| *u == r) {
            Some(i) => weight[i] += 1.0,
            None => {
                uniq.push(r);
                weight.push(1.0);
            }
        }
    }
    let a = BoundedMatrix::from_rows(Domain::Unsigned, &uniq)?;
    let w = SimplexVector::new(weight.into_iter().map(|c| c / n).collect())?;
    LotteryInstance::new(a, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_instance(rows: &[Vec<f64>]) -> LotteryInstance {
        let a = BoundedMatrix::from_rows(Domain::Unsigned, rows).unwrap();
        let n = a.rows();
        LotteryInstance::new(a, SimplexVector::uniform(n)).unwrap()
    }

    #[test]
    fn single_item_matches_price_search() {
        let inst = uniform_instance(&[vec![0.3], vec![0.9], vec![0.6], vec![0.2]]);
        let offer = lottery_design_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
        let col = inst.a.column(0);
        let best = col
            .iter()
            .map(|&p| inst.revenue(&SimplexVector::vertex(1, 0), p).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(offer.revenue, best);
        assert!(col.contains(&offer.price));
    }

    #[test]
    fn dominant_item_is_offered_outright() {
        let inst = uniform_instance(&[vec![0.1, 0.9], vec![0.4, 0.5], vec![0.0, 0.7]]);
        let offer = lottery_design_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(offer.x, SimplexVector::vertex(2, 1));
    }

    #[test]
    fn even_lottery_sells_to_everyone() {
        let inst = uniform_instance(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
        let offer = lottery_design_explicit(&inst, 0.2, &SolveOptions::default()).unwrap();
        assert!((offer.revenue - 0.5).abs() < 1e-12, "{offer:?}");
        assert!(offer.revenue >= 0.5 - 0.2);
    }

    #[test]
    fn revenue_recomputes_exactly_and_price_is_locally_optimal() {
        let mut rng = SeededRng::new(12);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..3).map(|_| rng.uniform()).collect())
                .collect();
            let inst = uniform_instance(&rows);
            let offer = lottery_design_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
            assert_eq!(offer.revenue, inst.revenue(&offer.x, offer.price).unwrap());
            let t = inst.a.mat_vec(&offer.x).unwrap();
            for &p in t.iter().filter(|&&p| p > offer.price) {
                assert!(inst.revenue(&offer.x, p).unwrap() <= offer.revenue + 1e-15);
            }
        }
    }

    #[test]
    fn point_mass_oracle_reduces_to_explicit() {
        let a = BoundedMatrix::from_rows(Domain::Unsigned, &[vec![0.3, 0.8, 0.5]]).unwrap();
        let inst = LotteryInstance::new(a, SimplexVector::vertex(1, 0)).unwrap();
        let oracle = FiniteTypeOracle::new(inst.clone()).unwrap();
        let mut params = SampledParams::new(0.5, 0.1);
        params.samples = Some(50);
        let (offer, emp) = lottery_design_sampled(
            &oracle,
            &params,
            &mut SeededRng::new(1),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(emp, inst);
        let explicit = lottery_design_explicit(&inst, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(offer, explicit);
    }

    #[test]
    fn sampled_is_deterministic_under_seed() {
        let inst = uniform_instance(&[vec![1.0, 0.2], vec![0.1, 0.8]]);
        let oracle = FiniteTypeOracle::new(inst).unwrap();
        let params = SampledParams::new(0.5, 0.1);
        let run = |seed| {
            lottery_design_sampled(
                &oracle,
                &params,
                &mut SeededRng::new(seed),
                &SolveOptions::default(),
            )
            .unwrap()
            .0
        };
        assert_eq!(run(7), run(7));
    }

    #[test]
    fn sample_count_formula() {
        let params = SampledParams::new(0.5, 0.1);
        let s = sample_size(0.25, 0.25).unwrap();
        let expect = (8.0 * (s as f64 * 2f64.ln() + 20f64.ln()) / 0.25).ceil() as usize;
        assert_eq!(lottery_sample_count(2, &params).unwrap(), expect);
    }
}
