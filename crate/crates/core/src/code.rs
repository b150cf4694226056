//! The `(n, r+1, r)` code spanned by the generator matrix built from a
//! zero-sum family.
//!
//! Column `j` is built from the exponent `a = A[j]` (canonical family order):
//! rows `1..=r` hold `gamma^(l*a)` and row `r+1` holds
//! `gamma^((r+1)*a) + (-1)^(r+1)`. Repair group `g` is the contiguous block of
//! columns `[g(r+1), (g+1)(r+1))`, one per transversal. Message coordinate
//! `i` multiplies row `i`.

use std::collections::BTreeSet;
use std::ops::Range;

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::family::{binomial, ZeroSumFamily};
use crate::field::Field;
use crate::linalg::{greedy_independent_columns, rank, solve_unique, Matrix};

/// Largest code length accepted by [`MrCode::build`].
pub const MAX_LENGTH: usize = 1000;
/// Above this many `(r+1)`-subsets [`VerifyMode::Auto`] samples instead.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 10_000_000;
/// Number of random subsets drawn in sampled verification.
pub const SAMPLED_SUBSETS: u64 = 100_000;
/// Seed used by [`VerifyMode::Auto`] when it falls back to sampling.
pub const DEFAULT_SAMPLE_SEED: u64 = 0x6d72_636f_6465;

const MAX_REPORTED_VIOLATIONS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("field group order {field} differs from family group order {family}")]
    Mismatch { field: u64, family: u64 },
    #[error("code length {0} exceeds the limit of {MAX_LENGTH}")]
    TooLong(usize),
    #[error("family is empty")]
    EmptyFamily,
    #[error("generator has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    GeneratorShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("symbol {value} at position {position} is not below q = {q}")]
    SymbolOutOfRange { position: usize, value: u64, q: u64 },
    #[error("erasure index {index} is out of range for length {n}")]
    ErasureOutOfRange { index: usize, n: usize },
    #[error("erasure index {0} listed twice")]
    DuplicateErasure(usize),
    #[error("repair group {0} does not exist")]
    NoSuchGroup(usize),
    #[error("position {position} is not in repair group {group}")]
    NotInGroup { position: usize, group: usize },
    #[error("repair group {group} has more than one erasure")]
    MultipleErasuresInGroup { group: usize },
    #[error("column {0} is not in the span of the rest of its group")]
    RepairUnavailable(usize),
    #[error("erasure pattern is not correctable")]
    NotCorrectable,
    #[error("received symbol at position {position} contradicts the decoded message")]
    Inconsistent { position: usize },
}

/// A set of erased coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    n: usize,
    erased: BTreeSet<usize>,
}

impl ErasurePattern {
    pub fn none(n: usize) -> Self {
        ErasurePattern {
            n,
            erased: BTreeSet::new(),
        }
    }

    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self, CodeError> {
        let mut erased = BTreeSet::new();
        for index in indices {
            if index >= n {
                return Err(CodeError::ErasureOutOfRange { index, n });
            }
            if !erased.insert(index) {
                return Err(CodeError::DuplicateErasure(index));
            }
        }
        Ok(ErasurePattern { n, erased })
    }

    /// Builds a pattern from `(group, position within group)` pairs.
    pub fn from_groups(
        n: usize,
        r: u32,
        slots: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CodeError> {
        let width = r as usize + 1;
        let mut indices = Vec::new();
        for (group, pos) in slots {
            if pos >= width {
                return Err(CodeError::NotInGroup {
                    position: group * width + pos,
                    group,
                });
            }
            indices.push(group * width + pos);
        }
        Self::new(n, indices)
    }

    /// Positions holding `None`.
    pub fn from_received(received: &[Option<u64>]) -> Self {
        ErasurePattern {
            n: received.len(),
            erased: received
                .iter()
                .enumerate()
                .filter(|(_, s)| s.is_none())
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.erased.contains(&index)
    }

    pub fn erased(&self) -> impl Iterator<Item = usize> + '_ {
        self.erased.iter().copied()
    }

    pub fn survivors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|i| !self.erased.contains(i))
    }

    /// `(group, position within group)` for each erasure.
    pub fn group_addressed(&self, r: u32) -> Vec<(usize, usize)> {
        let width = r as usize + 1;
        self.erased.iter().map(|&i| (i / width, i % width)).collect()
    }

    /// Marks erased positions of a codeword as `None`.
    pub fn apply(&self, codeword: &[u64]) -> Vec<Option<u64>> {
        codeword
            .iter()
            .enumerate()
            .map(|(i, &s)| (!self.erased.contains(&i)).then_some(s))
            .collect()
    }
}

/// Which subsets [`MrCode::verify_mr`] scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exhaustive when `C(n, r+1)` is within [`EXHAUSTIVE_SUBSET_LIMIT`],
    /// sampled otherwise.
    Auto,
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// An `(r+1)`-subset that is not a repair group but has rank `<= r`.
    DeficientNonGroup { columns: Vec<usize>, rank: usize },
    /// A repair group whose rank is not exactly `r`.
    GroupRank { group: usize, rank: usize },
    /// An `r`-subset of a repair group with rank below `r`.
    LocalSubset { group: usize, columns: Vec<usize>, rank: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MrReport {
    pub sampled: bool,
    pub mds_subsets_checked: u64,
    /// Every scanned `(r+1)`-subset with rank below `r+1`.
    pub deficient_subsets: Vec<Vec<usize>>,
    pub local_subsets_checked: u64,
    pub local_distance_ok: bool,
    pub violation_count: u64,
    /// The first few violations found.
    pub violations: Vec<Violation>,
}

impl MrReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(v);
        }
    }
}

/// Result of a local repair: the value and the positions that were read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub value: u64,
    pub read: Vec<usize>,
}

/// Detailed decoder output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: Vec<u64>,
    pub codeword: Vec<u64>,
    /// Positions filled in by local repair.
    pub locally_repaired: Vec<usize>,
    /// Whether erasures remained after local repair.
    pub global_solve: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrCode {
    field: Field,
    family: ZeroSumFamily,
    generator: Matrix,
    // For column j: coefficients over the other group members (in column
    // order) that reproduce column j, if they exist.
    repair_coeffs: Vec<Option<Vec<u64>>>,
}

/// Generator matrix for the given exponents.
pub fn generator_matrix(field: &Field, exponents: &[u64], r: u32) -> Matrix {
    let k = r as usize + 1;
    let mut g = Matrix::zeros(k, exponents.len());
    let sign = if (r + 1) % 2 == 0 { 1 } else { field.neg(1) };
    let n_order = field.group_order();
    for (j, &a) in exponents.iter().enumerate() {
        for row in 1..=k as u64 {
            let e = (row as u128 * a as u128 % n_order as u128) as u64;
            let mut v = field.gamma_pow(e);
            if row == k as u64 {
                v = field.add(v, sign);
            }
            g.set(row as usize - 1, j, v);
        }
    }
    g
}

impl MrCode {
    pub fn build(field: Field, family: ZeroSumFamily) -> Result<Self, CodeError> {
        let r = family.locality();
        let generator = generator_matrix(&field, &family.exponents(), r);
        Self::with_generator(field, family, generator)
    }

    /// Pairs a field and family with an arbitrary generator of the right
    /// shape. Used for loading stored specs and for mutation testing;
    /// [`MrCode::verify_mr`] is what decides whether the result is any good.
    pub fn with_generator(
        field: Field,
        family: ZeroSumFamily,
        generator: Matrix,
    ) -> Result<Self, CodeError> {
        if family.params().group_order() != field.group_order() {
            return Err(CodeError::Mismatch {
                field: field.group_order(),
                family: family.params().group_order(),
            });
        }
        let n = family.len();
        if n == 0 {
            return Err(CodeError::EmptyFamily);
        }
        if n > MAX_LENGTH {
            return Err(CodeError::TooLong(n));
        }
        let k = family.locality() as usize + 1;
        if generator.rows() != k || generator.cols() != n {
            return Err(CodeError::GeneratorShape {
                rows: generator.rows(),
                cols: generator.cols(),
                expected_rows: k,
                expected_cols: n,
            });
        }
        if let Some(v) = (0..k)
            .flat_map(|i| generator.row(i).iter().copied())
            .find(|&v| v >= field.modulus())
        {
            return Err(CodeError::SymbolOutOfRange {
                position: 0,
                value: v,
                q: field.modulus(),
            });
        }
        let mut code = MrCode {
            field,
            family,
            generator,
            repair_coeffs: Vec::new(),
        };
        code.repair_coeffs = (0..n).map(|j| code.solve_repair(j)).collect();
        Ok(code)
    }

    fn solve_repair(&self, column: usize) -> Option<Vec<u64>> {
        let others: Vec<usize> = self
            .group_columns(self.group_of(column))
            .filter(|&c| c != column)
            .collect();
        let a = self.generator.select_columns(&others);
        solve_unique(&self.field, &a, &self.generator.column(column))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn family(&self) -> &ZeroSumFamily {
        &self.family
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn locality(&self) -> u32 {
        self.family.locality()
    }

    /// Code length.
    pub fn len(&self) -> usize {
        self.generator.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension `k = r + 1`.
    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn group_count(&self) -> usize {
        self.len() / self.dimension()
    }

    /// Global erasures beyond the local ones: `n r / (r+1) - k`.
    pub fn global_erasures(&self) -> i64 {
        (self.group_count() * self.locality() as usize) as i64 - self.dimension() as i64
    }

    pub fn group_of(&self, column: usize) -> usize {
        column / self.dimension()
    }

    pub fn group_columns(&self, group: usize) -> Range<usize> {
        let w = self.dimension();
        group * w..(group + 1) * w
    }

    pub fn repair_groups(&self) -> Vec<Vec<usize>> {
        (0..self.group_count())
            .map(|g| self.group_columns(g).collect())
            .collect()
    }

    fn is_repair_group(&self, columns: &[usize]) -> bool {
        let w = self.dimension();
        columns.len() == w && columns[0] % w == 0 && columns[w - 1] == columns[0] + w - 1
    }

    /// `message * G`.
    pub fn encode(&self, message: &[u64]) -> Result<Vec<u64>, CodeError> {
        let k = self.dimension();
        if message.len() != k {
            return Err(CodeError::LengthMismatch {
                expected: k,
                got: message.len(),
            });
        }
        self.check_symbols(message.iter().map(|&s| Some(s)))?;
        let f = &self.field;
        Ok((0..self.len())
            .map(|j| {
                message.iter().enumerate().fold(0, |acc, (i, &m)| {
                    f.add(acc, f.mul(m, self.generator.get(i, j)))
                })
            })
            .collect())
    }

    fn check_symbols(&self, symbols: impl Iterator<Item = Option<u64>>) -> Result<(), CodeError> {
        let q = self.field.modulus();
        for (position, s) in symbols.enumerate() {
            if let Some(value) = s.filter(|&v| v >= q) {
                return Err(CodeError::SymbolOutOfRange { position, value, q });
            }
        }
        Ok(())
    }

    /// Recovers the symbol at `position` from the other `r` symbols of its
    /// group, fetched through `read`. Only those `r` positions are requested.
    pub fn local_repair_with(
        &self,
        group: usize,
        position: usize,
        mut read: impl FnMut(usize) -> Option<u64>,
    ) -> Result<u64, CodeError> {
        if group >= self.group_count() {
            return Err(CodeError::NoSuchGroup(group));
        }
        if !self.group_columns(group).contains(&position) {
            return Err(CodeError::NotInGroup { position, group });
        }
        let coeffs = self.repair_coeffs[position]
            .as_ref()
            .ok_or(CodeError::RepairUnavailable(position))?;
        let f = &self.field;
        let mut acc = 0;
        for (c, col) in coeffs
            .iter()
            .zip(self.group_columns(group).filter(|&c| c != position))
        {
            let symbol = read(col).ok_or(CodeError::MultipleErasuresInGroup { group })?;
            acc = f.add(acc, f.mul(*c, symbol % f.modulus()));
        }
        Ok(acc)
    }

    /// Local repair against a received word; reports which positions were
    /// read.
    pub fn local_repair(
        &self,
        received: &[Option<u64>],
        group: usize,
        position: usize,
    ) -> Result<Repair, CodeError> {
        if received.len() != self.len() {
            return Err(CodeError::LengthMismatch {
                expected: self.len(),
                got: received.len(),
            });
        }
        let mut read = Vec::with_capacity(self.locality() as usize);
        let value = self.local_repair_with(group, position, |i| {
            read.push(i);
            received[i]
        })?;
        Ok(Repair { value, read })
    }

    /// True when the surviving columns have rank `k`.
    pub fn is_correctable(&self, pattern: &ErasurePattern) -> bool {
        let k = self.dimension();
        greedy_independent_columns(&self.field, &self.generator, pattern.survivors(), k).len() == k
    }

    pub fn decode(&self, received: &[Option<u64>]) -> Result<Vec<u64>, CodeError> {
        self.decode_detailed(received).map(|d| d.message)
    }

    /// Repairs singly-erased groups locally, then solves for the message on
    /// the first `k` independent known columns and re-encodes to check every
    /// received symbol.
    pub fn decode_detailed(&self, received: &[Option<u64>]) -> Result<Decoded, CodeError> {
        let n = self.len();
        if received.len() != n {
            return Err(CodeError::LengthMismatch {
                expected: n,
                got: received.len(),
            });
        }
        self.check_symbols(received.iter().copied())?;

        let mut known = received.to_vec();
        let mut locally_repaired = Vec::new();
        for g in 0..self.group_count() {
            let missing: Vec<usize> = self.group_columns(g).filter(|&i| known[i].is_none()).collect();
            if let [position] = missing[..] {
                if let Ok(v) = self.local_repair_with(g, position, |i| received[i]) {
                    known[position] = Some(v);
                    locally_repaired.push(position);
                }
            }
        }
        let global_solve = known.iter().any(Option::is_none);

        let k = self.dimension();
        let available = (0..n).filter(|&i| known[i].is_some());
        let pivots = greedy_independent_columns(&self.field, &self.generator, available, k);
        if pivots.len() < k {
            return Err(CodeError::NotCorrectable);
        }
        // message * G_P = y_P  <=>  G_P^T message^T = y_P^T
        let system = self.generator.select_columns(&pivots).transpose();
        let rhs: Vec<u64> = pivots.iter().map(|&j| known[j].expect("pivot is known")).collect();
        let message = solve_unique(&self.field, &system, &rhs).ok_or(CodeError::NotCorrectable)?;

        let codeword = self.encode(&message)?;
        if let Some(position) = (0..n).find(|&i| received[i].is_some_and(|s| s != codeword[i])) {
            return Err(CodeError::Inconsistent { position });
        }
        Ok(Decoded {
            message,
            codeword,
            locally_repaired,
            global_solve,
        })
    }

    /// Checks the rank dichotomy on `(r+1)`-column subsets (rank `r` exactly
    /// for repair groups, `r+1` otherwise) and that every `r` columns of a
    /// repair group are independent.
    pub fn verify_mr(&self, mode: VerifyMode) -> MrReport {
        let n = self.len();
        let k = self.dimension();
        let r = k - 1;
        let mode = match mode {
            VerifyMode::Auto if binomial(n as u128, k as u128) > EXHAUSTIVE_SUBSET_LIMIT => {
                VerifyMode::Sampled {
                    samples: SAMPLED_SUBSETS,
                    seed: DEFAULT_SAMPLE_SEED,
                }
            }
            VerifyMode::Auto => VerifyMode::Exhaustive,
            m => m,
        };
        let mut report = MrReport {
            sampled: matches!(mode, VerifyMode::Sampled { .. }),
            mds_subsets_checked: 0,
            deficient_subsets: Vec::new(),
            local_subsets_checked: 0,
            local_distance_ok: true,
            violation_count: 0,
            violations: Vec::new(),
        };

        let check = |report: &mut MrReport, columns: Vec<usize>| {
            report.mds_subsets_checked += 1;
            let rk = rank(&self.field, &self.generator.select_columns(&columns));
            if self.is_repair_group(&columns) {
                if rk != r {
                    report.record(Violation::GroupRank {
                        group: columns[0] / k,
                        rank: rk,
                    });
                }
            } else if rk != k {
                report.record(Violation::DeficientNonGroup {
                    columns: columns.clone(),
                    rank: rk,
                });
            }
            if rk < k {
                report.deficient_subsets.push(columns);
            }
        };

        match mode {
            VerifyMode::Sampled { samples, seed } => {
                for g in 0..self.group_count() {
                    check(&mut report, self.group_columns(g).collect());
                }
                if n >= k {
                    let mut rng = ChaCha20Rng::seed_from_u64(seed);
                    for _ in 0..samples {
                        let mut cols = index::sample(&mut rng, n, k).into_vec();
                        cols.sort_unstable();
                        if !self.is_repair_group(&cols) {
                            check(&mut report, cols);
                        }
                    }
                }
            }
            _ => {
                for cols in (0..n).combinations(k) {
                    check(&mut report, cols);
                }
            }
        }

        for g in 0..self.group_count() {
            for cols in self.group_columns(g).combinations(r) {
                report.local_subsets_checked += 1;
                let rk = rank(&self.field, &self.generator.select_columns(&cols));
                if rk != r {
                    report.local_distance_ok = false;
                    report.record(Violation::LocalSubset {
                        group: g,
                        columns: cols,
                        rank: rk,
                    });
                }
            }
        }
        report
    }
}
