//! Application solvers: single-lottery pricing, information disclosure in
//! second-price auctions, and persuading voters.

pub mod auction;
pub mod lottery;
pub mod voting;

use crate::error::{Error, Result};
use crate::mixsel::robust_ceil;

/// Default constant in the sample-count formulas of the sampled input models.
pub const DEFAULT_C0: f64 = 8.0;

/// `⌈c0 (s ln m + ln(2/γ)) / ε²⌉`, the number of i.i.d. draws the sampled
/// solvers take from their input oracle.
pub fn oracle_sample_count(s: usize, m: usize, epsilon: f64, gamma: f64, c0: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParam(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    if !(epsilon > 0.0) || !(c0 > 0.0) || m == 0 {
        return Err(Error::InvalidParam(
            "need epsilon > 0, c0 > 0 and m >= 1".into(),
        ));
    }
    let raw = c0 * (s as f64 * (m as f64).ln() + (2.0 / gamma).ln()) / (epsilon * epsilon);
    Ok(robust_ceil(raw).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_gamma_adds_ln2() {
        let a = 8.0 * (10.0 * 3f64.ln() + 20f64.ln()) / 0.25;
        assert_eq!(
            oracle_sample_count(10, 3, 0.5, 0.1, 8.0).unwrap(),
            a.ceil() as usize
        );
        let b = 8.0 * (10.0 * 3f64.ln() + 40f64.ln()) / 0.25;
        assert_eq!(
            oracle_sample_count(10, 3, 0.5, 0.05, 8.0).unwrap(),
            b.ceil() as usize
        );
        assert!((b - a - 8.0 * 2f64.ln() / 0.25).abs() < 1e-9);
        assert!(oracle_sample_count(10, 3, 0.5, 1.0, 8.0).is_err());
    }
}
