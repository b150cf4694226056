//! Prime field arithmetic.
//!
//! A [`Field`] is GF(q) for a prime `q < 2^32`, so that the product of two
//! residues always fits in a `u64`. Construction finds the least primitive
//! element `gamma >= 2` and keeps the factorization of `N = q - 1` around so
//! that primitivity can be re-checked cheaply.
//!
//! Linear algebra in this crate works on raw `u64` residues through the
//! methods on [`Field`]; [`FieldElement`] is the checked, self-describing
//! wrapper used at API boundaries.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible modulus (exclusive): `q^2` must fit in a `u64`.
pub const MAX_MODULUS: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is below the minimum of 3")]
    ModulusTooSmall(u64),
    #[error("modulus {0} is too large: q^2 must fit in 64 bits")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{gamma} is not a primitive element of GF({q})")]
    NotPrimitive { q: u64, gamma: u64 },
}

/// Deterministic primality test by trial division. Adequate for `q < 2^32`.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut d = 3;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// GF(q) for prime q together with a primitive element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    q: u64,
    gamma: u64,
    factors: Vec<u64>,
}

impl Field {
    /// Builds GF(q) with the least primitive element `>= 2`.
    pub fn new(q: u64) -> Result<Self, FieldError> {
        Self::check_modulus(q)?;
        let factors = distinct_prime_factors(q - 1);
        let gamma = (2..q)
            .find(|&g| is_generator(q, g, &factors))
            .expect("every prime field has a primitive element");
        Ok(Field { q, gamma, factors })
    }

    /// Builds GF(q) with a caller-supplied primitive element, verifying it.
    pub fn with_generator(q: u64, gamma: u64) -> Result<Self, FieldError> {
        Self::check_modulus(q)?;
        let factors = distinct_prime_factors(q - 1);
        if gamma == 0 || gamma >= q || !is_generator(q, gamma, &factors) {
            return Err(FieldError::NotPrimitive { q, gamma });
        }
        Ok(Field { q, gamma, factors })
    }

    fn check_modulus(q: u64) -> Result<(), FieldError> {
        if q < 3 {
            return Err(FieldError::ModulusTooSmall(q));
        }
        if q >= MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(())
    }

    /// The modulus q.
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Order of the multiplicative group, `N = q - 1`.
    pub fn group_order(&self) -> u64 {
        self.q - 1
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    /// Distinct prime factors of `N`.
    pub fn group_order_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            q: self.q,
        }
    }

    pub fn generator(&self) -> FieldElement {
        self.elem(self.gamma)
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    /// `base^e` for a non-negative exponent by square-and-multiply.
    pub fn pow(&self, base: u64, e: u64) -> u64 {
        pow_mod(base, e, self.q)
    }

    /// `base^e` for a possibly negative exponent; nonzero bases have their
    /// exponent reduced mod N first.
    pub fn pow_signed(&self, base: u64, e: i64) -> Result<u64, FieldError> {
        let base = base % self.q;
        if base == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(FieldError::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Greater => Ok(0),
            };
        }
        let n = self.group_order() as i64;
        Ok(self.pow(base, e.rem_euclid(n) as u64))
    }

    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        let a = a % self.q;
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// `gamma^e` with `e` taken mod N.
    pub fn gamma_pow(&self, e: u64) -> u64 {
        self.pow(self.gamma, e % self.group_order())
    }
}

fn pow_mod(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    acc
}

fn is_generator(q: u64, g: u64, factors: &[u64]) -> bool {
    let n = q - 1;
    pow_mod(g, n, q) == 1 && factors.iter().all(|&f| pow_mod(g, n / f, q) != 1)
}

/// A residue tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.q
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<(), FieldError> {
        if self.q != other.q {
            return Err(FieldError::FieldMismatch(self.q, other.q));
        }
        Ok(())
    }

    fn with(self, value: u64) -> Self {
        FieldElement { value, q: self.q }
    }

    pub fn add(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with((self.value + other.value) % self.q))
    }

    pub fn sub(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with((self.value + self.q - other.value) % self.q))
    }

    pub fn mul(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.value * other.value % self.q))
    }

    pub fn neg(self) -> Self {
        self.with((self.q - self.value) % self.q)
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.with(pow_mod(self.value, self.q - 2, self.q)))
    }

    /// Exponentiation with a signed exponent. Exponents of nonzero bases are
    /// reduced mod `q - 1`.
    pub fn pow(self, e: i64) -> Result<Self, FieldError> {
        if self.value == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(FieldError::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(self.with(1)),
                std::cmp::Ordering::Greater => Ok(self),
            };
        }
        let n = (self.q - 1) as i64;
        Ok(self.with(pow_mod(self.value, e.rem_euclid(n) as u64, self.q)))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_primitive_elements() {
        let f13 = Field::new(13).unwrap();
        assert_eq!(f13.group_order(), 12);
        assert_eq!(f13.gamma(), 2);
        // 2 is primitive mod 13: 2^6 = 12 and 2^4 = 3, neither is 1.
        assert_eq!(f13.pow(2, 6), 12);
        assert_eq!(f13.pow(2, 4), 3);

        let f101 = Field::new(101).unwrap();
        assert_eq!(f101.gamma(), 2);
        assert_eq!(f101.pow(2, 50), 100);
        assert_eq!(f101.pow(2, 20), 95);

        // 2^3 = 1 mod 7, so the least primitive element is 3.
        assert_eq!(Field::new(7).unwrap().gamma(), 3);
        assert_eq!(Field::new(653).unwrap().gamma(), 2);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(Field::new(12), Err(FieldError::NotPrime(12)));
        assert_eq!(Field::new(2), Err(FieldError::ModulusTooSmall(2)));
        assert_eq!(
            Field::new(4_294_967_311),
            Err(FieldError::ModulusTooLarge(4_294_967_311))
        );
        assert!(Field::new(4_294_967_291).is_ok());
    }

    #[test]
    fn with_generator_checks_primitivity() {
        assert!(Field::with_generator(101, 2).is_ok());
        // 4 = 2^2 has order 50.
        assert_eq!(
            Field::with_generator(101, 4),
            Err(FieldError::NotPrimitive { q: 101, gamma: 4 })
        );
    }

    #[test]
    fn element_arithmetic() {
        let f13 = Field::new(13).unwrap();
        assert_eq!(f13.elem(7).add(f13.elem(9)).unwrap().value(), 3);
        let f101 = Field::new(101).unwrap();
        assert_eq!(f101.elem(100).mul(f101.elem(95)).unwrap().value(), 6);
        assert!(f101.elem(0).mul(f101.elem(57)).unwrap().is_zero());
        assert_eq!(f101.elem(3).sub(f101.elem(5)).unwrap().value(), 99);
        assert_eq!(f101.elem(3).neg().value(), 98);
        assert_eq!(f101.elem(0).neg().value(), 0);
        assert_eq!(
            f13.elem(1).add(f101.elem(1)),
            Err(FieldError::FieldMismatch(13, 101))
        );
    }

    #[test]
    fn inverses() {
        let f = Field::new(101).unwrap();
        assert_eq!(f.elem(1).inv().unwrap().value(), 1);
        assert_eq!(f.elem(14).inv().unwrap().value(), 65);
        assert_eq!(f.elem(0).inv(), Err(FieldError::DivisionByZero));
        assert_eq!(f.inv(0), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn powers() {
        let f = Field::new(101).unwrap();
        let two = f.elem(2);
        assert_eq!(two.pow(10).unwrap().value(), 14);
        assert_eq!(two.pow(90).unwrap().value(), 65);
        assert_eq!(two.pow(-10).unwrap().value(), 65);
        assert_eq!(f.elem(57).pow(0).unwrap().value(), 1);
        assert_eq!(f.elem(0).pow(-1), Err(FieldError::DivisionByZero));
        assert_eq!(f.pow_signed(0, 3), Ok(0));
        assert_eq!(f.pow_signed(2, -10), Ok(65));
    }

    #[test]
    fn generator_spans_group() {
        for q in [3u64, 5, 7, 13, 101, 653, 1009, 7919, 9973] {
            let f = Field::new(q).unwrap();
            let mut seen = vec![false; q as usize];
            let mut x = 1;
            for _ in 0..f.group_order() {
                assert!(!seen[x as usize], "gamma repeats early in GF({q})");
                seen[x as usize] = true;
                x = f.mul(x, f.gamma());
            }
            assert_eq!(x, 1);
            assert_eq!(seen.iter().filter(|&&s| s).count() as u64, f.group_order());
        }
    }

    #[test]
    fn factorization() {
        assert_eq!(distinct_prime_factors(100), vec![2, 5]);
        assert_eq!(distinct_prime_factors(652), vec![2, 163]);
        assert_eq!(distinct_prime_factors(1), Vec::<u64>::new());
        assert_eq!(distinct_prime_factors(97), vec![97]);
    }

    proptest! {
        #[test]
        fn pow_is_additive_in_exponent(a in 0u64..10_000, b in 0u64..10_000) {
            let f = Field::new(7919).unwrap();
            let g = f.gamma();
            let n = f.group_order();
            prop_assert_eq!(f.mul(f.pow(g, a), f.pow(g, b)), f.pow(g, (a + b) % n));
        }

        #[test]
        fn inverse_is_multiplicative(a in 1u64..101, b in 1u64..101) {
            let f = Field::new(101).unwrap();
            let lhs = f.inv(f.mul(a, b)).unwrap();
            let rhs = f.mul(f.inv(a).unwrap(), f.inv(b).unwrap());
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }

        #[test]
        fn raw_ops_match_integer_arithmetic(a in 0u64..653, b in 0u64..653) {
            let f = Field::new(653).unwrap();
            prop_assert_eq!(f.add(a, b), (a + b) % 653);
            prop_assert_eq!(f.sub(a, b), (a + 653 - b) % 653);
            prop_assert_eq!(f.mul(a, b), a * b % 653);
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
        }
    }
}
