//! Integer sets on which `d_0 + ... + d_{r-1} = r * d_r` has only the
//! all-equal solutions.
//!
//! Two constructors are provided: Alon's digit construction, which picks the
//! integers whose base-`h` digits are all below `h / r` and whose digit
//! squares sum to a common value `B`, and an exhaustive branch-and-bound
//! search that is optimal but only feasible for `m <= 24`.
//!
//! Two independent checkers back them: [`verify_progression_free`] walks
//! every multiset of `r` elements and returns a witness, and
//! [`has_nontrivial_solution`] counts multisets per sum with a knapsack
//! table, which scales to sets the enumeration guard rejects.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest range `exhaustive_best` accepts.
pub const EXHAUSTIVE_MAX_RANGE: u64 = 24;
/// Enumeration guard: `|D|^r` must not exceed this.
pub const ENUMERATION_GUARD: u128 = 100_000_000;
/// Cell budget for the counting table in [`has_nontrivial_solution`].
const COUNTING_CELL_BUDGET: u128 = 200_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgFreeError {
    #[error("locality r = {0} is below 2")]
    InvalidLocality(u32),
    #[error("range bound m = {0} is empty")]
    EmptyRange(u64),
    #[error("range m = {0} exceeds the exhaustive search limit of {EXHAUSTIVE_MAX_RANGE}")]
    RangeTooLarge(u64),
    #[error("digit construction degenerates for m = {m}, r = {r} (base h <= r) and m is too large for exhaustive search")]
    ParamsTooSmall { m: u64, r: u32 },
    #[error("verification of {size} elements at r = {r} exceeds the work guard")]
    TooLarge { size: usize, r: u32 },
    #[error("candidate set is empty")]
    EmptySet,
    #[error("element {value} lies outside [1, {m}]")]
    OutOfRange { value: u64, m: u64 },
    #[error("set is not progression-free: witness {witness:?}")]
    NotProgressionFree { witness: Option<Vec<u64>> },
}

/// How a [`ProgressionFreeSet`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Alon,
    Exhaustive,
    UserSupplied,
}

/// Parameters of a digit construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlonMeta {
    /// Base `h`.
    pub base: u64,
    /// Number of digits, `t + 1`.
    pub digits: u32,
    /// Common digit square sum `B`.
    pub square_sum: u64,
    /// Range the digit construction was run on (may be below `m` when the
    /// set came from [`best_for_range`]).
    pub source_range: u64,
    /// `m * exp(-5 sqrt(ln m ln r))` for the set's `m`.
    pub size_bound: f64,
}

/// Verdict of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// `witness` holds `(d_0, ..., d_{r-1}, d_r)`.
    Fail { witness: Vec<u64> },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressionFreeSet {
    m: u64,
    r: u32,
    elements: Vec<u64>,
    method: Method,
    alon: Option<AlonMeta>,
}

impl ProgressionFreeSet {
    /// Wraps a caller-provided set after range and oracle checks.
    pub fn user_supplied(m: u64, r: u32, elements: &[u64]) -> Result<Self, ProgFreeError> {
        check_locality(r)?;
        let elements: Vec<u64> = elements.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if elements.is_empty() {
            return Err(ProgFreeError::EmptySet);
        }
        if let Some(&value) = elements.iter().find(|&&v| v == 0 || v > m) {
            return Err(ProgFreeError::OutOfRange { value, m });
        }
        ensure_progression_free(&elements, r)?;
        Ok(ProgressionFreeSet {
            m,
            r,
            elements,
            method: Method::UserSupplied,
            alon: None,
        })
    }

    pub fn range(&self) -> u64 {
        self.m
    }

    pub fn locality(&self) -> u32 {
        self.r
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn alon_meta(&self) -> Option<&AlonMeta> {
        self.alon.as_ref()
    }

    /// Keeps the `count` smallest elements. Subsets of a progression-free
    /// set are progression-free, so no re-check is needed.
    pub fn prefix(&self, count: usize) -> Self {
        let mut out = self.clone();
        out.elements.truncate(count);
        out
    }
}

fn check_locality(r: u32) -> Result<(), ProgFreeError> {
    if r < 2 {
        return Err(ProgFreeError::InvalidLocality(r));
    }
    Ok(())
}

/// `m * exp(-5 sqrt(ln m * ln r))`.
pub fn size_bound(m: u64, r: u32) -> f64 {
    let (lm, lr) = ((m as f64).ln(), (r as f64).ln());
    m as f64 * (-5.0 * (lm * lr).sqrt()).exp()
}

/// Base `h = floor(exp(sqrt(ln m ln r)))`, at least 2.
///
/// The small epsilon keeps exact cases such as `m = 16, r = 2`, where the
/// exponent is `ln 4`, from rounding down.
pub fn digit_base(m: u64, r: u32) -> u64 {
    let x = ((m as f64).ln() * (r as f64).ln()).sqrt().exp();
    ((x + 1e-9).floor() as u64).max(2)
}

/// `t = floor(log_h m) - 1`, at least 0, computed in integers.
pub fn digit_exponent(m: u64, h: u64) -> u32 {
    let mut k = 0u32;
    let mut p: u128 = 1;
    while p * h as u128 <= m as u128 {
        p *= h as u128;
        k += 1;
    }
    k.saturating_sub(1)
}

/// Alon's digit construction on `{1, ..., m}`.
///
/// When the base does not exceed `r` the only admissible digit is 0; the
/// construction then falls back to [`exhaustive_best`] for `m <= 24` and
/// fails with [`ProgFreeError::ParamsTooSmall`] otherwise.
pub fn alon_construct(m: u64, r: u32) -> Result<ProgressionFreeSet, ProgFreeError> {
    check_locality(r)?;
    if m == 0 {
        return Err(ProgFreeError::EmptyRange(m));
    }
    let h = digit_base(m, r);
    // Digits x satisfy x < h / r, i.e. x * r < h.
    let max_digit = (h - 1) / r as u64;
    if max_digit == 0 {
        return if m <= EXHAUSTIVE_MAX_RANGE {
            exhaustive_best(m, r)
        } else {
            Err(ProgFreeError::ParamsTooSmall { m, r })
        };
    }
    let t = digit_exponent(m, h);
    let digits = t + 1;

    let mut buckets: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut digit_vec = vec![0u64; digits as usize];
    loop {
        let (mut value, mut place, mut squares) = (0u64, 1u64, 0u64);
        for &x in &digit_vec {
            value += x * place;
            squares += x * x;
            place = place.saturating_mul(h);
        }
        if value >= 1 && value <= m {
            buckets.entry(squares).or_default().push(value);
        }
        // Odometer increment over digits in [0, max_digit].
        let Some(pos) = digit_vec.iter().position(|&x| x < max_digit) else {
            break;
        };
        digit_vec[pos] += 1;
        digit_vec[..pos].iter_mut().for_each(|x| *x = 0);
    }

    // Largest bucket, smallest B on ties (BTreeMap iterates B ascending).
    let (square_sum, mut elements) = buckets
        .into_iter()
        .fold(None::<(u64, Vec<u64>)>, |best, (b, v)| match best {
            Some((_, ref bv)) if bv.len() >= v.len() => best,
            _ => Some((b, v)),
        })
        .expect("digit 1 in position 0 always yields the element 1");
    elements.sort_unstable();

    ensure_progression_free(&elements, r)?;
    Ok(ProgressionFreeSet {
        m,
        r,
        elements,
        method: Method::Alon,
        alon: Some(AlonMeta {
            base: h,
            digits,
            square_sum,
            source_range: m,
            size_bound: size_bound(m, r),
        }),
    })
}

/// Maximum-cardinality progression-free subset of `{1, ..., m}`, ties broken
/// by the lexicographically smallest sorted element list.
pub fn exhaustive_best(m: u64, r: u32) -> Result<ProgressionFreeSet, ProgFreeError> {
    check_locality(r)?;
    if m == 0 {
        return Err(ProgFreeError::EmptyRange(m));
    }
    if m > EXHAUSTIVE_MAX_RANGE {
        return Err(ProgFreeError::RangeTooLarge(m));
    }
    let mut search = Search {
        m,
        width: r as usize * m as usize + 1,
        current: Vec::new(),
        best: Vec::new(),
    };
    let table = MultisetCounts::empty(r as usize, search.width);
    search.descend(1, &table);
    let elements = search.best;
    debug_assert!(verify_progression_free(&elements, r).map_or(true, |v| v.passed()));
    Ok(ProgressionFreeSet {
        m,
        r,
        elements,
        method: Method::Exhaustive,
        alon: None,
    })
}

struct Search {
    m: u64,
    width: usize,
    current: Vec<u64>,
    best: Vec<u64>,
}

impl Search {
    // Visits sorted candidate lists in lexicographic order, so the first
    // list of maximum size found is the lexicographically smallest one.
    fn descend(&mut self, start: u64, table: &MultisetCounts) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        for x in start..=self.m {
            if self.current.len() as u64 + (self.m - x + 1) <= self.best.len() as u64 {
                break;
            }
            let mut next = table.clone();
            next.add_element(x as usize);
            self.current.push(x);
            if !next.violated_by(&self.current) {
                self.descend(x + 1, &next);
            }
            self.current.pop();
        }
    }
}

/// `counts[j][s]` is the number of size-`j` multisets with sum `s`,
/// saturated at 2.
#[derive(Clone)]
struct MultisetCounts {
    r: usize,
    width: usize,
    counts: Vec<u8>,
}

impl MultisetCounts {
    fn empty(r: usize, width: usize) -> Self {
        let mut counts = vec![0u8; (r + 1) * width];
        counts[0] = 1;
        MultisetCounts { r, width, counts }
    }

    fn add_element(&mut self, e: usize) {
        let w = self.width;
        for j in 1..=self.r {
            for s in e..w {
                let from = self.counts[(j - 1) * w + s - e];
                if from > 0 {
                    let cell = &mut self.counts[j * w + s];
                    *cell = (*cell + from).min(2);
                }
            }
        }
    }

    // Besides the all-equal multiset, any other size-r multiset summing to
    // r * d is a violation.
    fn violated_by(&self, elements: &[u64]) -> bool {
        elements
            .iter()
            .any(|&d| self.counts[self.r * self.width + self.r * d as usize] >= 2)
    }
}

/// Counting-based check: true when some `d` in the set admits a size-`r`
/// multiset other than `{d, ..., d}` summing to `r * d`.
pub fn has_nontrivial_solution(candidate: &[u64], r: u32) -> Result<bool, ProgFreeError> {
    check_locality(r)?;
    let elements = normalize(candidate)?;
    let max = *elements.last().expect("nonempty") as u128;
    let width = r as u128 * max + 1;
    if (r as u128 + 1) * width > COUNTING_CELL_BUDGET {
        return Err(ProgFreeError::TooLarge {
            size: elements.len(),
            r,
        });
    }
    let mut table = MultisetCounts::empty(r as usize, width as usize);
    for &e in &elements {
        table.add_element(e as usize);
    }
    Ok(table.violated_by(&elements))
}

fn normalize(candidate: &[u64]) -> Result<Vec<u64>, ProgFreeError> {
    let set: BTreeSet<u64> = candidate.iter().copied().collect();
    if set.is_empty() {
        return Err(ProgFreeError::EmptySet);
    }
    if set.contains(&0) {
        return Err(ProgFreeError::OutOfRange { value: 0, m: u64::MAX });
    }
    Ok(set.into_iter().collect())
}

/// Exhaustive check over all multisets `{d_0, ..., d_{r-1}}` drawn from the
/// candidate, returning the first violating tuple `(d_0, ..., d_{r-1}, d_r)`
/// in lexicographic multiset order.
pub fn verify_progression_free(candidate: &[u64], r: u32) -> Result<Verdict, ProgFreeError> {
    check_locality(r)?;
    let elements = normalize(candidate)?;
    let work = (elements.len() as u128).checked_pow(r).unwrap_or(u128::MAX);
    if work > ENUMERATION_GUARD {
        return Err(ProgFreeError::TooLarge {
            size: elements.len(),
            r,
        });
    }
    let members: BTreeSet<u64> = elements.iter().copied().collect();
    for tuple in elements.iter().copied().combinations_with_replacement(r as usize) {
        let sum: u64 = tuple.iter().sum();
        if sum % r as u64 != 0 {
            continue;
        }
        let d = sum / r as u64;
        if members.contains(&d) && tuple.iter().any(|&x| x != d) {
            let mut witness = tuple;
            witness.push(d);
            return Ok(Verdict::Fail { witness });
        }
    }
    Ok(Verdict::Pass)
}

/// Runs the enumeration oracle when within its guard and the counting check
/// otherwise.
pub fn ensure_progression_free(candidate: &[u64], r: u32) -> Result<(), ProgFreeError> {
    match verify_progression_free(candidate, r) {
        Ok(Verdict::Pass) => Ok(()),
        Ok(Verdict::Fail { witness }) => Err(ProgFreeError::NotProgressionFree {
            witness: Some(witness),
        }),
        Err(ProgFreeError::TooLarge { .. }) => {
            if has_nontrivial_solution(candidate, r)? {
                Err(ProgFreeError::NotProgressionFree { witness: None })
            } else {
                Ok(())
            }
        }
        Err(e) => Err(e),
    }
}

/// Largest `m'` in `[1, m]` whose digit base is at most `h`.
fn last_range_with_base(m: u64, r: u32, h: u64) -> u64 {
    let (mut lo, mut hi) = (1u64, m);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if digit_base(mid, r) <= h {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// The largest progression-free subset of `{1, ..., m}` available from the
/// constructors in this module.
///
/// For `m <= 24` this is the exhaustive optimum. Above that it is the best of
/// the exhaustive optimum on `{1, ..., 24}` and the digit construction run at
/// the top of every base range below `m`. Every candidate is a valid subset
/// of `{1, ..., m}`, and the result size is nondecreasing in `m`.
pub fn best_for_range(m: u64, r: u32) -> Result<ProgressionFreeSet, ProgFreeError> {
    check_locality(r)?;
    if m == 0 {
        return Err(ProgFreeError::EmptyRange(m));
    }
    if m <= EXHAUSTIVE_MAX_RANGE {
        return exhaustive_best(m, r);
    }
    let mut best = exhaustive_best(EXHAUSTIVE_MAX_RANGE, r)?;
    let top = digit_base(m, r);
    for h in (r as u64 + 1)..=top {
        let source = if h == top {
            m
        } else {
            last_range_with_base(m, r, h)
        };
        if digit_base(source, r) != h {
            continue;
        }
        let candidate = alon_construct(source, r)?;
        if candidate.len() > best.len() {
            best = candidate;
        }
    }
    best.m = m;
    if let Some(meta) = best.alon.as_mut() {
        meta.size_bound = size_bound(m, r);
    }
    Ok(best)
}
