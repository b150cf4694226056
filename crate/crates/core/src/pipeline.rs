//! Parameter selection and the end-to-end construction pipeline.

use num_rational::Ratio;
use thiserror::Error;

use crate::code::{CodeError, MrCode, MrReport, VerifyMode};
use crate::family::{FamilyError, FamilyParams, ZeroSumFamily};
use crate::field::{is_prime, Field, FieldError};
use crate::progfree::{best_for_range, ProgFreeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("locality r = {0} is below 2")]
    InvalidLocality(u32),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {q} is too small for r = {r}: d = floor((q-1) / (2 r^3 (r+1))) is 0")]
    FieldTooSmall { r: u32, q: u64 },
    #[error("target length {target} is not a positive multiple of r + 1 = {width}")]
    BadTarget { target: usize, width: usize },
    #[error("target length {target} exceeds the available length {available}")]
    TargetUnreachable { target: usize, available: usize },
    #[error("constructed code failed verification ({0} violations)")]
    VerificationFailed(u64),
    #[error("field size q = {q} is below k + 1 = {min}")]
    FieldBelowDimension { q: u64, min: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    ProgFree(#[from] ProgFreeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// `lambda = 1/(2 r^3)` and `delta = lambda/(r+1)`, with `N = q - 1`.
pub fn choose_params(r: u32, q: u64) -> Result<FamilyParams, PipelineError> {
    if r < 2 {
        return Err(PipelineError::InvalidLocality(r));
    }
    if !is_prime(q) {
        return Err(PipelineError::NotPrime(q));
    }
    let r3 = (r as u64).pow(3);
    let lambda = Ratio::new(1, 2 * r3);
    let delta = Ratio::new(1, 2 * r3 * (r as u64 + 1));
    match FamilyParams::new(q - 1, r, lambda, delta) {
        Err(FamilyError::Degenerate { .. }) | Err(FamilyError::InvalidOrder(_)) => {
            Err(PipelineError::FieldTooSmall { r, q })
        }
        other => Ok(other?),
    }
}

/// A constructed and verified code.
#[derive(Debug, Clone)]
pub struct Construction {
    pub code: MrCode,
    pub report: MrReport,
}

/// Parameters → progression-free set → family → optional trim → code →
/// verification. Any failed check aborts the pipeline.
pub fn construct(
    r: u32,
    q: u64,
    target_n: Option<usize>,
    mode: VerifyMode,
) -> Result<Construction, PipelineError> {
    let params = choose_params(r, q)?;
    let field = Field::new(q)?;
    let set = best_for_range(params.set_range(), r)?;
    let mut family = ZeroSumFamily::build(params, set)?;

    if let Some(target) = target_n {
        let width = r as usize + 1;
        if target == 0 || target % width != 0 {
            return Err(PipelineError::BadTarget { target, width });
        }
        if target > family.len() {
            return Err(PipelineError::TargetUnreachable {
                target,
                available: family.len(),
            });
        }
        family = family.trim(target / width)?;
    }

    let code = MrCode::build(field, family)?;
    let k = code.dimension() as u64;
    if q < k + 1 {
        return Err(PipelineError::FieldBelowDimension { q, min: k + 1 });
    }
    let report = code.verify_mr(mode);
    if !report.passed() {
        return Err(PipelineError::VerificationFailed(report.violation_count));
    }
    Ok(Construction { code, report })
}
