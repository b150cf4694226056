//! `CodeSpec`: the JSON form of a constructed code.
//!
//! Columns follow the canonical family order (transversals by `b`
//! ascending, each listed `a_{0,b}, ..., a_{r,b}`) and group indices are
//! zero-based. Scalars above `2^53` are written as decimal strings; both
//! forms are accepted on input.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{generator_matrix, CodeError, MrCode};
use crate::family::{FamilyError, FamilyParams, ZeroSumFamily};
use crate::field::{Field, FieldError};
use crate::linalg::Matrix;
use crate::progfree::{Method, ProgFreeError, ProgressionFreeSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("stored {what} does not match the value re-derived from the parameters")]
    Mismatch { what: &'static str },
    #[error("stored generator differs from the re-derived one at row {row}, column {col}")]
    GeneratorMismatch { row: usize, col: usize },
    #[error("stored generator is ragged")]
    RaggedGenerator,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    ProgFree(#[from] ProgFreeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

mod wide {
    //! u64 scalars as JSON numbers, or decimal strings above 2^53.
    use serde::{de, Deserialize, Deserializer, Serializer};

    const SAFE: u64 = 1 << 53;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        if *v > SAFE {
            s.serialize_str(&v.to_string())
        } else {
            s.serialize_u64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    #[serde(with = "wide")]
    pub num: u64,
    #[serde(with = "wide")]
    pub den: u64,
}

impl From<Ratio<u64>> for Fraction {
    fn from(r: Ratio<u64>) -> Self {
        Fraction {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    pub n: usize,
    pub k: usize,
    /// `n r / (r+1) - k`.
    pub h: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub schema_version: u32,
    #[serde(with = "wide")]
    pub q: u64,
    #[serde(with = "wide")]
    pub gamma: u64,
    pub r: u32,
    #[serde(rename = "N", with = "wide")]
    pub group_order: u64,
    pub lambda: Fraction,
    pub delta: Fraction,
    #[serde(with = "wide")]
    pub l: u64,
    #[serde(with = "wide")]
    pub d: u64,
    #[serde(rename = "D")]
    pub set: Vec<u64>,
    pub set_method: Method,
    pub blocks: Vec<Vec<u64>>,
    pub transversals: Vec<Vec<u64>>,
    pub exponents: Vec<u64>,
    #[serde(rename = "G")]
    pub generator: Vec<Vec<u64>>,
    pub repair_groups: Vec<Vec<usize>>,
    pub derived: Derived,
}

impl CodeSpec {
    pub fn from_code(code: &MrCode) -> Self {
        let family = code.family();
        let params = family.params();
        CodeSpec {
            schema_version: SCHEMA_VERSION,
            q: code.field().modulus(),
            gamma: code.field().gamma(),
            r: code.locality(),
            group_order: params.group_order(),
            lambda: params.lambda().into(),
            delta: params.delta().into(),
            l: params.spacing(),
            d: params.set_range(),
            set: family.set().elements().to_vec(),
            set_method: family.set().method(),
            blocks: family.blocks().to_vec(),
            transversals: family
                .transversals()
                .iter()
                .map(|t| t.elements.clone())
                .collect(),
            exponents: family.exponents(),
            generator: code.generator().to_rows(),
            repair_groups: code.repair_groups(),
            derived: Derived {
                n: code.len(),
                k: code.dimension(),
                h: code.global_erasures(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("CodeSpec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let spec: CodeSpec = serde_json::from_str(text)?;
        if spec.schema_version != SCHEMA_VERSION {
            return Err(SpecError::SchemaVersion(spec.schema_version));
        }
        Ok(spec)
    }

    /// Rebuilds field and family from the stored parameters and checks every
    /// stored derived value against them. The generator is not compared.
    fn rebuild(&self) -> Result<(Field, ZeroSumFamily), SpecError> {
        let field = Field::with_generator(self.q, self.gamma)?;
        if self.group_order != field.group_order() {
            return Err(SpecError::Mismatch { what: "N" });
        }
        let params = FamilyParams::new(
            self.group_order,
            self.r,
            Ratio::new(self.lambda.num, self.lambda.den),
            Ratio::new(self.delta.num, self.delta.den),
        )?;
        if params.spacing() != self.l {
            return Err(SpecError::Mismatch { what: "l" });
        }
        if params.set_range() != self.d {
            return Err(SpecError::Mismatch { what: "d" });
        }
        let set = ProgressionFreeSet::user_supplied(self.d, self.r, &self.set)?;
        if set.elements() != self.set.as_slice() {
            return Err(SpecError::Mismatch { what: "D" });
        }
        let family = ZeroSumFamily::build(params, set)?;
        if family.blocks() != self.blocks.as_slice() {
            return Err(SpecError::Mismatch { what: "blocks" });
        }
        let transversals: Vec<Vec<u64>> =
            family.transversals().iter().map(|t| t.elements.clone()).collect();
        if transversals != self.transversals {
            return Err(SpecError::Mismatch {
                what: "transversals",
            });
        }
        if family.exponents() != self.exponents {
            return Err(SpecError::Mismatch { what: "exponents" });
        }
        Ok((field, family))
    }

    fn stored_generator(&self) -> Result<Matrix, SpecError> {
        Matrix::from_rows(&self.generator).ok_or(SpecError::RaggedGenerator)
    }

    /// Position of the first entry where the stored generator differs from
    /// the one re-derived from `(q, gamma, exponents)`.
    pub fn generator_mismatch(&self) -> Result<Option<(usize, usize)>, SpecError> {
        let field = Field::with_generator(self.q, self.gamma)?;
        let derived = generator_matrix(&field, &self.exponents, self.r);
        let stored = self.stored_generator()?;
        if stored.rows() != derived.rows() || stored.cols() != derived.cols() {
            return Ok(Some((stored.rows().min(derived.rows()), 0)));
        }
        for i in 0..derived.rows() {
            for j in 0..derived.cols() {
                if stored.get(i, j) != derived.get(i, j) {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// Loads the code, requiring the stored generator to match the
    /// re-derived one bit for bit.
    pub fn to_code(&self) -> Result<MrCode, SpecError> {
        let code = self.to_code_with_stored_generator()?;
        if let Some((row, col)) = self.generator_mismatch()? {
            return Err(SpecError::GeneratorMismatch { row, col });
        }
        if code.repair_groups() != self.repair_groups {
            return Err(SpecError::Mismatch {
                what: "repair_groups",
            });
        }
        let derived = Derived {
            n: code.len(),
            k: code.dimension(),
            h: code.global_erasures(),
        };
        if derived != self.derived {
            return Err(SpecError::Mismatch { what: "derived" });
        }
        Ok(code)
    }

    /// Loads the code around the stored generator as-is, so that a tampered
    /// matrix can still be inspected by the verifier.
    pub fn to_code_with_stored_generator(&self) -> Result<MrCode, SpecError> {
        let (field, family) = self.rebuild()?;
        Ok(MrCode::with_generator(field, family, self.stored_generator()?)?)
    }
}
