//! Field size versus code length across a list of primes.
//!
//! The table is indicative only: the asymptotic relation between `q` and
//! `n` cannot be pinned down at these sizes, so rows are reported without
//! asserting any limit.

use serde::{Deserialize, Serialize};

use crate::code::{VerifyMode, SAMPLED_SUBSETS};
use crate::pipeline::{construct, PipelineError};

pub const SCALING_NOTE: &str =
    "indicative: the asymptotic field-size claim is not testable at desk scale";

/// How `r` is picked for each `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalityRule {
    Fixed(u32),
    /// `r ~ n^alpha`; with `q ~ n^(1+3 alpha)` this is
    /// `r = max(2, round(q^(alpha / (1 + 3 alpha))))`.
    Alpha(f64),
}

impl LocalityRule {
    pub fn locality_for(&self, q: u64) -> u32 {
        match *self {
            LocalityRule::Fixed(r) => r,
            LocalityRule::Alpha(alpha) => {
                let r = (q as f64).powf(alpha / (1.0 + 3.0 * alpha)).round();
                (r as u32).max(2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub q: u64,
    pub r: u32,
    pub n: usize,
    /// `ln q / ln n`.
    pub log_ratio: f64,
    /// `ln q - 3 ln r - 5 sqrt(ln(q / r^4) ln r)`; absent when `q < r^4`.
    pub length_bound_log: Option<f64>,
    pub sampled: bool,
}

pub fn length_bound_log(q: u64, r: u32) -> Option<f64> {
    let (lq, lr) = ((q as f64).ln(), (r as f64).ln());
    let inner = lq - 4.0 * lr;
    (inner >= 0.0).then(|| lq - 3.0 * lr - 5.0 * (inner * lr).sqrt())
}

pub fn scaling_table(rule: LocalityRule, primes: &[u64]) -> Result<Vec<ScalingRow>, PipelineError> {
    primes
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let r = rule.locality_for(q);
            let mode = VerifyMode::Sampled {
                samples: SAMPLED_SUBSETS / 10,
                seed: i as u64,
            };
            let built = construct(r, q, None, mode)?;
            let n = built.code.len();
            Ok(ScalingRow {
                q,
                r,
                n,
                log_ratio: (q as f64).ln() / (n as f64).ln(),
                length_bound_log: length_bound_log(q, r),
                sampled: built.report.sampled,
            })
        })
        .collect()
}
