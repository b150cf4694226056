//! Zero-sum transversal families in `Z_N`.
//!
//! From a progression-free set `D` and offsets `l = floor(lambda N)`,
//! `d = floor(delta N)` the family consists of `r + 1` shifted copies of `D`:
//!
//! ```text
//! D_i = i*l + D                 for 0 <= i < r
//! D_r = N - C(r,2)*l - r*D
//! ```
//!
//! and the transversal for `b` in `D` is `A_b = { i*l + b : i < r } ∪
//! { N - C(r,2)*l - r*b }`. The family is useful because the only
//! `(r+1)`-subsets of the union summing to `0 mod N` are the transversals
//! themselves. Construction checks that claim by enumeration whenever the
//! number of subsets is within [`ZERO_SUM_GUARD`].

use std::collections::HashSet;

use itertools::Itertools;
use num_rational::Ratio;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::progfree::{ensure_progression_free, ProgFreeError, ProgressionFreeSet};

/// Maximum number of `(r+1)`-subsets enumerated by the zero-sum verifier.
pub const ZERO_SUM_GUARD: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("locality r = {0} is below 2")]
    InvalidLocality(u32),
    #[error("group order N = {0} is too small")]
    InvalidOrder(u64),
    #[error("lambda = {0} must satisfy 0 < lambda < 1/r^3 (r = {1})")]
    BadLambda(Ratio<u64>, u32),
    #[error("delta = {0} must satisfy 0 < delta < lambda/r (lambda = {1}, r = {2})")]
    BadDelta(Ratio<u64>, Ratio<u64>, u32),
    #[error("parameters give l = {l}, d = {d}; both must be at least 1")]
    Degenerate { l: u64, d: u64 },
    #[error("set range m = {m} exceeds d = {d}")]
    SetOutOfRange { m: u64, d: u64 },
    #[error("set was built for r = {set} but the family uses r = {family}")]
    LocalityMismatch { set: u32, family: u32 },
    #[error("progression-free check failed: {0}")]
    BadSet(#[from] ProgFreeError),
    #[error("residue {0} appears more than once in the family")]
    Collision(u64),
    #[error("transversal {0:?} does not sum to 0 mod N")]
    TransversalSum(Vec<u64>),
    #[error("zero-sum characterization violated by {0:?}")]
    PropertyViolated(Vec<u64>),
    #[error("{subsets} subsets exceed the enumeration guard")]
    TooLarge { subsets: u128 },
    #[error("transversal {index} has {len} elements, expected {expected}")]
    BadTransversal { index: usize, len: usize, expected: usize },
    #[error("cannot keep {target} groups out of {available}")]
    InvalidTarget { target: usize, available: usize },
}

fn ratio_lt(a: &Ratio<u64>, b: &Ratio<u64>) -> bool {
    (*a.numer() as u128) * (*b.denom() as u128) < (*b.numer() as u128) * (*a.denom() as u128)
}

/// `n choose k` in `u128`, saturating.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Spacing parameters of the family. `lambda` and `delta` are exact
/// rationals and every bound is checked without floating point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    group_order: u64,
    r: u32,
    lambda: Ratio<u64>,
    delta: Ratio<u64>,
    l: u64,
    d: u64,
}

impl FamilyParams {
    pub fn new(
        group_order: u64,
        r: u32,
        lambda: Ratio<u64>,
        delta: Ratio<u64>,
    ) -> Result<Self, FamilyError> {
        if r < 2 {
            return Err(FamilyError::InvalidLocality(r));
        }
        if group_order < 2 {
            return Err(FamilyError::InvalidOrder(group_order));
        }
        let r3 = (r as u64).pow(3);
        if *lambda.numer() == 0 || !ratio_lt(&lambda, &Ratio::new(1, r3)) {
            return Err(FamilyError::BadLambda(lambda, r));
        }
        // delta < lambda / r  <=>  delta * r < lambda
        let delta_r = *delta.numer() as u128 * r as u128 * *lambda.denom() as u128;
        if *delta.numer() == 0 || delta_r >= *lambda.numer() as u128 * *delta.denom() as u128 {
            return Err(FamilyError::BadDelta(delta, lambda, r));
        }
        let floor_mul = |x: &Ratio<u64>| {
            (*x.numer() as u128 * group_order as u128 / *x.denom() as u128) as u64
        };
        let (l, d) = (floor_mul(&lambda), floor_mul(&delta));
        if l < 1 || d < 1 {
            return Err(FamilyError::Degenerate { l, d });
        }
        Ok(FamilyParams {
            group_order,
            r,
            lambda,
            delta,
            l,
            d,
        })
    }

    /// `N`.
    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    pub fn locality(&self) -> u32 {
        self.r
    }

    pub fn lambda(&self) -> Ratio<u64> {
        self.lambda
    }

    pub fn delta(&self) -> Ratio<u64> {
        self.delta
    }

    /// Block spacing `l = floor(lambda N)`.
    pub fn spacing(&self) -> u64 {
        self.l
    }

    /// Set range `d = floor(delta N)`.
    pub fn set_range(&self) -> u64 {
        self.d
    }

    /// `a_{i,b}` reduced into `[0, N)`.
    pub fn residue(&self, i: u32, b: u64) -> u64 {
        let n = self.group_order as i128;
        let (l, b) = (self.l as i128, b as i128);
        let v = if i < self.r {
            i as i128 * l + b
        } else {
            let r = self.r as i128;
            n - r * (r - 1) / 2 * l - r * b
        };
        v.rem_euclid(n) as u64
    }
}

/// One transversal `A_b`: the residues `a_{0,b}, ..., a_{r,b}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    pub b: u64,
    pub elements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumFamily {
    params: FamilyParams,
    set: ProgressionFreeSet,
    blocks: Vec<Vec<u64>>,
    transversals: Vec<Transversal>,
}

/// Outcome of a zero-sum scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSumReport {
    pub subsets_checked: u64,
    pub sampled: bool,
    /// First `(r+1)`-subset whose zero-sum status disagrees with being a
    /// transversal.
    pub witness: Option<Vec<u64>>,
}

impl ZeroSumReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

impl ZeroSumFamily {
    /// Builds the family and checks it: `D` against the progression-free
    /// oracle, residues for distinctness, every transversal sum, and the
    /// full zero-sum characterization when within [`ZERO_SUM_GUARD`].
    pub fn build(params: FamilyParams, set: ProgressionFreeSet) -> Result<Self, FamilyError> {
        let r = params.r;
        if set.locality() != r {
            return Err(FamilyError::LocalityMismatch {
                set: set.locality(),
                family: r,
            });
        }
        if set.range() > params.d {
            return Err(FamilyError::SetOutOfRange {
                m: set.range(),
                d: params.d,
            });
        }
        ensure_progression_free(set.elements(), r)?;

        let blocks: Vec<Vec<u64>> = (0..=r)
            .map(|i| set.elements().iter().map(|&b| params.residue(i, b)).collect())
            .collect();
        let transversals: Vec<Transversal> = set
            .elements()
            .iter()
            .map(|&b| Transversal {
                b,
                elements: (0..=r).map(|i| params.residue(i, b)).collect(),
            })
            .collect();

        let family = ZeroSumFamily {
            params,
            set,
            blocks,
            transversals,
        };
        let report = match family.verify_zero_sum() {
            Err(FamilyError::TooLarge { .. }) => {
                // Distinctness and per-transversal sums are still checked.
                check_structure(&family.transversal_lists(), family.params.group_order, r)?;
                return Ok(family);
            }
            other => other?,
        };
        if let Some(w) = report.witness {
            return Err(FamilyError::PropertyViolated(w));
        }
        Ok(family)
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn set(&self) -> &ProgressionFreeSet {
        &self.set
    }

    pub fn locality(&self) -> u32 {
        self.params.r
    }

    /// `D_0, ..., D_r`, each ordered by `b` ascending.
    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    pub fn transversals(&self) -> &[Transversal] {
        &self.transversals
    }

    fn transversal_lists(&self) -> Vec<Vec<u64>> {
        self.transversals.iter().map(|t| t.elements.clone()).collect()
    }

    /// Number of transversals, `|D|`.
    pub fn group_count(&self) -> usize {
        self.transversals.len()
    }

    /// `n = |D| (r + 1)`.
    pub fn len(&self) -> usize {
        self.transversals.len() * (self.params.r as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.transversals.is_empty()
    }

    /// All residues in canonical order: transversals by `b` ascending, each
    /// listed `a_{0,b}, ..., a_{r,b}`.
    pub fn exponents(&self) -> Vec<u64> {
        self.transversals
            .iter()
            .flat_map(|t| t.elements.iter().copied())
            .collect()
    }

    /// Exhaustive zero-sum scan of this family.
    pub fn verify_zero_sum(&self) -> Result<ZeroSumReport, FamilyError> {
        verify_zero_sum_property(&self.transversal_lists(), self.params.group_order, self.params.r)
    }

    /// Keeps the `target_groups` smallest `b` and rebuilds, which re-runs
    /// every check on the smaller family.
    pub fn trim(&self, target_groups: usize) -> Result<Self, FamilyError> {
        if target_groups == 0 || target_groups > self.group_count() {
            return Err(FamilyError::InvalidTarget {
                target: target_groups,
                available: self.group_count(),
            });
        }
        Self::build(self.params.clone(), self.set.prefix(target_groups))
    }
}

/// Distinctness and per-transversal zero sums.
fn check_structure(transversals: &[Vec<u64>], modulus: u64, r: u32) -> Result<(), FamilyError> {
    let mut seen = HashSet::new();
    for (index, t) in transversals.iter().enumerate() {
        if t.len() != r as usize + 1 {
            return Err(FamilyError::BadTransversal {
                index,
                len: t.len(),
                expected: r as usize + 1,
            });
        }
        for &a in t {
            if !seen.insert(a % modulus) {
                return Err(FamilyError::Collision(a % modulus));
            }
        }
        let sum: u128 = t.iter().map(|&a| a as u128).sum();
        if sum % modulus as u128 != 0 {
            return Err(FamilyError::TransversalSum(t.clone()));
        }
    }
    Ok(())
}

/// Checks that an `(r+1)`-subset of the union sums to `0 mod N` exactly when
/// it is one of the given transversals.
///
/// Residues must be distinct; duplicates are reported as
/// [`FamilyError::Collision`]. A transversal with a nonzero sum is returned as
/// the witness. Otherwise every `(r+1)`-subset is enumerated in lexicographic
/// index order over the concatenated transversals.
pub fn verify_zero_sum_property(
    transversals: &[Vec<u64>],
    modulus: u64,
    r: u32,
) -> Result<ZeroSumReport, FamilyError> {
    if r < 2 {
        return Err(FamilyError::InvalidLocality(r));
    }
    let k = r as usize + 1;
    let flat: Vec<u64> = transversals.iter().flatten().map(|&a| a % modulus).collect();
    let subsets = binomial(flat.len() as u128, k as u128);
    if subsets > ZERO_SUM_GUARD {
        return Err(FamilyError::TooLarge { subsets });
    }
    if let Err(e) = check_structure(transversals, modulus, r) {
        return match e {
            FamilyError::TransversalSum(t) => Ok(ZeroSumReport {
                subsets_checked: 0,
                sampled: false,
                witness: Some(t),
            }),
            e => Err(e),
        };
    }
    let mut checked = 0u64;
    for idx in (0..flat.len()).combinations(k) {
        checked += 1;
        let sum: u128 = idx.iter().map(|&i| flat[i] as u128).sum();
        let zero = sum % modulus as u128 == 0;
        // Transversals occupy aligned contiguous index blocks.
        let is_transversal = idx[0] % k == 0 && idx[k - 1] == idx[0] + k - 1;
        if zero != is_transversal {
            return Ok(ZeroSumReport {
                subsets_checked: checked,
                sampled: false,
                witness: Some(idx.iter().map(|&i| flat[i]).collect()),
            });
        }
    }
    Ok(ZeroSumReport {
        subsets_checked: checked,
        sampled: false,
        witness: None,
    })
}

/// Randomized variant for families beyond the enumeration guard: checks every
/// transversal plus `samples` uniformly drawn `(r+1)`-subsets.
pub fn sample_zero_sum_property(
    transversals: &[Vec<u64>],
    modulus: u64,
    r: u32,
    samples: u64,
    seed: u64,
) -> Result<ZeroSumReport, FamilyError> {
    if r < 2 {
        return Err(FamilyError::InvalidLocality(r));
    }
    let k = r as usize + 1;
    if let Err(e) = check_structure(transversals, modulus, r) {
        return match e {
            FamilyError::TransversalSum(t) => Ok(ZeroSumReport {
                subsets_checked: 0,
                sampled: true,
                witness: Some(t),
            }),
            e => Err(e),
        };
    }
    let flat: Vec<u64> = transversals.iter().flatten().copied().collect();
    if flat.len() < k {
        return Ok(ZeroSumReport {
            subsets_checked: 0,
            sampled: true,
            witness: None,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut checked = transversals.len() as u64;
    for _ in 0..samples {
        let mut idx = index::sample(&mut rng, flat.len(), k).into_vec();
        idx.sort_unstable();
        checked += 1;
        let sum: u128 = idx.iter().map(|&i| flat[i] as u128).sum();
        let zero = sum % modulus as u128 == 0;
        let is_transversal = idx[0] % k == 0 && idx[k - 1] == idx[0] + k - 1;
        if zero != is_transversal {
            return Ok(ZeroSumReport {
                subsets_checked: checked,
                sampled: true,
                witness: Some(idx.iter().map(|&i| flat[i]).collect()),
            });
        }
    }
    Ok(ZeroSumReport {
        subsets_checked: checked,
        sampled: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progfree::exhaustive_best;
    use proptest::prelude::*;

    fn params_r2() -> FamilyParams {
        FamilyParams::new(100, 2, Ratio::new(1, 16), Ratio::new(1, 48)).unwrap()
    }

    fn params_r3() -> FamilyParams {
        FamilyParams::new(652, 3, Ratio::new(1, 54), Ratio::new(1, 216)).unwrap()
    }

    fn family_r2() -> ZeroSumFamily {
        let set = ProgressionFreeSet::user_supplied(2, 2, &[1, 2]).unwrap();
        ZeroSumFamily::build(params_r2(), set).unwrap()
    }

    /// Zero-sum characterization by brute force over value sets, without the
    /// index-block shortcut used by the verifier.
    fn brute_zero_sum(exps: &[u64], transversals: &[Vec<u64>], n: u64, r: usize) -> bool {
        let ts: HashSet<Vec<u64>> = transversals
            .iter()
            .map(|t| t.iter().copied().sorted().collect())
            .collect();
        exps.iter().copied().combinations(r + 1).all(|c| {
            let zero = c.iter().sum::<u64>() % n == 0;
            zero == ts.contains(&c.iter().copied().sorted().collect::<Vec<_>>())
        })
    }

    #[test]
    fn params_from_rule() {
        let p = params_r2();
        assert_eq!((p.spacing(), p.set_range()), (6, 2));
        let p = params_r3();
        assert_eq!((p.spacing(), p.set_range()), (12, 3));
    }

    #[test]
    fn params_bounds_are_strict() {
        // lambda = 1/8 = 1/r^3 is not allowed.
        assert!(matches!(
            FamilyParams::new(1000, 2, Ratio::new(1, 8), Ratio::new(1, 48)),
            Err(FamilyError::BadLambda(..))
        ));
        // delta = lambda / r exactly.
        assert!(matches!(
            FamilyParams::new(1000, 2, Ratio::new(1, 16), Ratio::new(1, 32)),
            Err(FamilyError::BadDelta(..))
        ));
        assert!(matches!(
            FamilyParams::new(1000, 2, Ratio::new(0, 1), Ratio::new(1, 48)),
            Err(FamilyError::BadLambda(..))
        ));
        assert_eq!(
            FamilyParams::new(40, 2, Ratio::new(1, 16), Ratio::new(1, 48)),
            Err(FamilyError::Degenerate { l: 2, d: 0 })
        );
        assert_eq!(
            FamilyParams::new(100, 1, Ratio::new(1, 16), Ratio::new(1, 48)),
            Err(FamilyError::InvalidLocality(1))
        );
    }

    #[test]
    fn worked_family_r2() {
        let f = family_r2();
        assert_eq!(f.blocks(), &[vec![1, 2], vec![7, 8], vec![92, 90]]);
        assert_eq!(f.transversals()[0].elements, vec![1, 7, 92]);
        assert_eq!(f.transversals()[1].elements, vec![2, 8, 90]);
        assert_eq!(f.len(), 6);
        assert_eq!(f.exponents(), vec![1, 7, 92, 2, 8, 90]);
        assert_eq!((1 + 7 + 92) % 100, 0);
        let report = f.verify_zero_sum().unwrap();
        assert!(report.passed());
        assert_eq!(report.subsets_checked, 20);
    }

    #[test]
    fn worked_family_r3() {
        let set = ProgressionFreeSet::user_supplied(3, 3, &[1, 2]).unwrap();
        let f = ZeroSumFamily::build(params_r3(), set).unwrap();
        assert_eq!(f.transversals()[0].elements, vec![1, 13, 25, 613]);
        assert_eq!(f.transversals()[1].elements, vec![2, 14, 26, 610]);
        assert_eq!(f.len(), 8);
        assert_eq!(f.verify_zero_sum().unwrap().subsets_checked, 70);
    }

    #[test]
    fn rejects_non_progression_free_sets() {
        // {1, 2, 3} fails for r = 3 since 1 + 2 + 3 = 3 * 2; the raw check
        // must happen inside the builder too.
        let bad = ProgressionFreeSet::user_supplied(3, 3, &[1, 2, 3]);
        assert!(matches!(bad, Err(ProgFreeError::NotProgressionFree { .. })));
    }

    #[test]
    fn rejects_out_of_range_sets() {
        let set = exhaustive_best(8, 2).unwrap();
        assert_eq!(
            ZeroSumFamily::build(params_r2(), set),
            Err(FamilyError::SetOutOfRange { m: 8, d: 2 })
        );
        let set = ProgressionFreeSet::user_supplied(2, 3, &[1, 2]).unwrap();
        assert_eq!(
            ZeroSumFamily::build(params_r2(), set),
            Err(FamilyError::LocalityMismatch { set: 3, family: 2 })
        );
    }

    #[test]
    fn planted_violation_is_found() {
        let ts = vec![vec![10, 40, 50], vec![20, 35, 45], vec![70, 12, 18]];
        let report = verify_zero_sum_property(&ts, 100, 2).unwrap();
        assert_eq!(report.witness, Some(vec![10, 20, 70]));
    }

    #[test]
    fn single_transversal_passes() {
        let report = verify_zero_sum_property(&[vec![1, 7, 92]], 100, 2).unwrap();
        assert!(report.passed());
        assert_eq!(report.subsets_checked, 1);
    }

    #[test]
    fn trimming() {
        let f = family_r2();
        let one = f.trim(1).unwrap();
        assert_eq!(one.transversals().len(), 1);
        assert_eq!(one.transversals()[0].elements, vec![1, 7, 92]);
        assert_eq!(one.len(), 3);
        assert!(one.verify_zero_sum().unwrap().passed());
        assert_eq!(f.trim(2).unwrap(), f);
        assert!(matches!(f.trim(0), Err(FamilyError::InvalidTarget { .. })));
        assert!(matches!(f.trim(3), Err(FamilyError::InvalidTarget { .. })));
    }

    #[test]
    fn block_ranges() {
        // A larger instance: N = 20000, r = 2, D from the exhaustive search.
        let params =
            FamilyParams::new(20_000, 2, Ratio::new(1, 16), Ratio::new(1, 48)).unwrap();
        let set = exhaustive_best(24, 2).unwrap();
        assert!(params.set_range() >= 24);
        let f = ZeroSumFamily::build(params.clone(), set).unwrap();
        let (l, d, n) = (params.spacing(), params.set_range(), params.group_order());
        for (i, block) in f.blocks().iter().enumerate().take(2) {
            let i = i as u64;
            assert!(block.iter().all(|&a| a >= i * l + 1 && a <= i * l + d));
        }
        assert!(f.blocks()[2].iter().all(|&a| a >= n - l - 2 * d && a <= n - l - 2));
        assert!(brute_zero_sum(
            &f.exponents(),
            &f.transversal_lists(),
            n,
            2
        ));
    }

    #[test]
    fn exhaustive_instances_satisfy_characterization() {
        for r in 2u32..=4 {
            let r3 = (r as u64).pow(3);
            let lambda = Ratio::new(1, 2 * r3);
            let delta = Ratio::new(1, 2 * r3 * (r as u64 + 1));
            let n = 2 * r3 * (r as u64 + 1) * 24;
            let params = FamilyParams::new(n, r, lambda, delta).unwrap();
            let set = exhaustive_best(24, r).unwrap();
            let groups = (24 / (r as usize + 1)).min(set.len());
            let f = ZeroSumFamily::build(params, set.prefix(groups)).unwrap();
            assert!(f.len() <= 24);
            assert!(f.verify_zero_sum().unwrap().passed());
            assert!(brute_zero_sum(&f.exponents(), &f.transversal_lists(), n, r as usize));
        }
    }

    #[test]
    fn sampling_finds_nothing_on_valid_families() {
        let f = family_r2();
        let report =
            sample_zero_sum_property(&f.transversal_lists(), 100, 2, 1000, 7).unwrap();
        assert!(report.passed());
        assert!(report.sampled);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    proptest! {
        #[test]
        fn perturbing_an_exponent_is_detected(pos in 0usize..6, delta in 1u64..100) {
            let f = family_r2();
            let mut ts = f.transversal_lists();
            let (t, i) = (pos / 3, pos % 3);
            ts[t][i] = (ts[t][i] + delta) % 100;
            let outcome = verify_zero_sum_property(&ts, 100, 2);
            let detected = match outcome {
                Ok(report) => !report.passed(),
                Err(FamilyError::Collision(_)) => true,
                Err(e) => panic!("unexpected error {e}"),
            };
            prop_assert!(detected);
        }
    }
}
