//! Maximally recoverable codes with locality `r` and dimension `r + 1` over
//! prime fields.
//!
//! The pieces, bottom up:
//!
//! - [`field`]: GF(q) arithmetic and a primitive element.
//! - [`progfree`]: sets with no nontrivial solution of
//!   `d_0 + ... + d_{r-1} = r d_r`.
//! - [`family`]: the zero-sum transversal family built from such a set.
//! - [`code`]: the generator matrix, MR verification, encoding and erasure
//!   decoding.
//! - [`pipeline`], [`spec`], [`sim`], [`scaling`], [`stream`]: parameter
//!   choice, JSON persistence, simulation and text codecs.

pub mod code;
pub mod family;
pub mod field;
pub mod linalg;
pub mod pipeline;
pub mod progfree;
pub mod scaling;
pub mod sim;
pub mod spec;
pub mod stream;

pub use code::{CodeError, ErasurePattern, MrCode, MrReport, VerifyMode};
pub use family::{FamilyError, FamilyParams, ZeroSumFamily};
pub use field::{Field, FieldElement, FieldError};
pub use pipeline::{choose_params, construct, Construction, PipelineError};
pub use progfree::{ProgFreeError, ProgressionFreeSet};
pub use spec::{CodeSpec, SpecError};
