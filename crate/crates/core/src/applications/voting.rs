//! Persuading voters who vote Yes when their posterior expected utility is
//! nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{BoundedMatrix, Domain};
use crate::mixsel::SolveOptions;
use crate::objectives::{
    obj_vote_smooth_thresh, obj_vote_sum, obj_vote_sum_relaxed, obj_vote_thresh,
    obj_vote_thresh_relaxed,
};
use crate::signaling::{solve_signaling_bicriteria, SignalingResult};
use crate::simplex::SimplexVector;

/// Voter utilities `u` (voters by states, in `[-1, 1]`), prior over states,
/// passing threshold `q` and voter slack `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VotingInstance {
    pub u: BoundedMatrix,
    pub prior: SimplexVector,
    #[serde(default = "default_q")]
    pub q: f64,
    pub delta: f64,
}

fn default_q() -> f64 {
    0.5
}

impl VotingInstance {
    pub fn new(u: BoundedMatrix, prior: SimplexVector, q: f64, delta: f64) -> Result<Self> {
        let inst = Self { u, prior, q, delta };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.domain() != Domain::Signed {
            return Err(Error::InvalidMatrix(
                "voter utilities must use the signed domain".into(),
            ));
        }
        if self.u.cols() != self.prior.dim() {
            return Err(Error::DimensionMismatch(format!(
                "prior has {} states, utility matrix has {} columns",
                self.prior.dim(),
                self.u.cols()
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "q must lie in (0, 1], got {}",
                self.q
            )));
        }
        Ok(())
    }

    pub fn voters(&self) -> usize {
        self.u.rows()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VotingResult {
    pub result: SignalingResult,
    /// Value of the scheme when voters need nonnegative utility exactly.
    pub strict_value: f64,
    /// Value of the scheme under the smooth threshold surrogate (threshold rule only).
    pub surrogate_value: Option<f64>,
}

/// Maximize the expected fraction of Yes votes; the relaxed value returned
/// is at least the strict optimum minus `ε`.
pub fn voting_sum_signaling(
    inst: &VotingInstance,
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<VotingResult> {
    inst.validate()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let n = inst.voters();
    let g = obj_vote_sum(n);
    let h = obj_vote_sum_relaxed(n, inst.delta)?;
    let result = solve_signaling_bicriteria(
        &inst.u,
        g.beta(),
        &h,
        &inst.prior,
        epsilon,
        inst.delta,
        0.0,
        opts,
    )?;
    let strict_value = result.scheme.value(&inst.u, &g)?.value;
    Ok(VotingResult {
        result,
        strict_value,
        surrogate_value: None,
    })
}

/// Maximize the probability that at least a `q` fraction vote Yes.
///
/// The LP maximizes the relaxed threshold rule; the guarantee is measured
/// against the smooth surrogate, which upper-bounds the strict rule.
pub fn voting_thresh_signaling(
    inst: &VotingInstance,
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<VotingResult> {
    inst.validate()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let n = inst.voters();
    let (q, delta) = (inst.q, inst.delta);
    let smooth = obj_vote_smooth_thresh(n, q, delta)?;
    let h = obj_vote_thresh_relaxed(n, q, delta)?;
    let result = solve_signaling_bicriteria(
        &inst.u,
        smooth.beta(),
        &h,
        &inst.prior,
        epsilon * delta,
        delta,
        0.0,
        opts,
    )?;
    let strict_value = result.scheme.value(&inst.u, &obj_vote_thresh(n, q)?)?.value;
    let surrogate_value = Some(result.scheme.value(&inst.u, &smooth)?.value);
    Ok(VotingResult {
        result,
        strict_value,
        surrogate_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[Vec<f64>], prior: &[f64], delta: f64) -> VotingInstance {
        VotingInstance::new(
            BoundedMatrix::from_rows(Domain::Signed, rows).unwrap(),
            SimplexVector::new(prior.to_vec()).unwrap(),
            0.5,
            delta,
        )
        .unwrap()
    }

    #[test]
    fn pooling_already_wins() {
        let i = inst(&[vec![1.0, -1.0]], &[0.5, 0.5], 0.1);
        let r = voting_sum_signaling(&i, 0.5, &SolveOptions::default()).unwrap();
        assert!((r.result.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_voter_persuasion() {
        let i = inst(&[vec![1.0, -1.0]], &[0.3, 0.7], 0.1);
        let r = voting_sum_signaling(&i, 0.2, &SolveOptions::default()).unwrap();
        assert!(r.result.value >= 0.6 - 0.2);
    }

    #[test]
    fn unanimous_support() {
        let i = inst(&[vec![0.5, 0.1], vec![1.0, 0.0]], &[0.2, 0.8], 0.1);
        let r = voting_sum_signaling(&i, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.value, 1.0);
        assert_eq!(r.strict_value, 1.0);
    }

    #[test]
    fn single_voter_threshold_matches_sum() {
        let i = inst(&[vec![1.0, -1.0]], &[0.3, 0.7], 0.1);
        let sum = voting_sum_signaling(&i, 0.5, &SolveOptions::default()).unwrap();
        let th = voting_thresh_signaling(&i, 0.5, &SolveOptions::default()).unwrap();
        assert!(th.result.value >= 0.6 - 0.5);
        assert!(sum.result.value >= 0.6 - 0.5);
        assert!(th.surrogate_value.unwrap() >= th.strict_value);
    }

    #[test]
    fn vertex_prior_is_deterministic() {
        let i = inst(
            &[vec![0.3, -0.5], vec![-0.2, 0.4], vec![0.6, 0.1]],
            &[1.0, 0.0],
            0.1,
        );
        let r = voting_thresh_signaling(&i, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.scheme.len(), 1);
        assert_eq!(r.strict_value, 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let u = BoundedMatrix::from_rows(Domain::Signed, &[vec![1.0, -1.0]]).unwrap();
        let p = SimplexVector::uniform(2);
        assert!(VotingInstance::new(u.clone(), p.clone(), 0.5, 0.0).is_err());
        assert!(VotingInstance::new(u.clone(), SimplexVector::uniform(3), 0.5, 0.1).is_err());
        let i = VotingInstance::new(u, p, 0.5, 0.6).unwrap();
        assert!(voting_thresh_signaling(&i, 0.5, &SolveOptions::default()).is_err());
    }
}
