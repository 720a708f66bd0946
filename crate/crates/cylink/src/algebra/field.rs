//! Exact coefficient arithmetic.
//!
//! Two fields back every polynomial computation: a prime field GF(p) as the
//! fast path and arbitrary-precision rationals as the exactness authority.
//! No floating point enters any ring operation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::AlgebraError;

/// Runtime tag for a coefficient field. Stored in serialized polynomials and
/// compared before any mixed-operand arithmetic.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDescriptor {
    Gf { p: u64 },
    Rationals,
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Gf { p } => write!(f, "gf({p})"),
            FieldDescriptor::Rationals => write!(f, "rationals"),
        }
    }
}

/// Field operations over an exact coefficient type.
///
/// Implementations carry whatever runtime context they need (the modulus for
/// GF(p)); elements themselves stay plain data.
pub trait CoefficientField: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn descriptor(&self) -> FieldDescriptor;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Multiplicative inverse. Panics on zero; callers guard.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    fn from_i64(&self, n: i64) -> Self::Elem;

    /// Scalar that brings a nonzero coefficient run into the field's
    /// preferred intermediate form when every coefficient is multiplied by
    /// it. GF(p) normalizes to a monic leading coefficient. The rationals
    /// clear denominators and divide out content, which keeps Buchberger
    /// reductions from ballooning.
    ///
    /// `coeffs` is ordered leading coefficient first and must be nonempty.
    fn canonical_scale(&self, coeffs: &[Self::Elem]) -> Self::Elem;

    fn elem_to_string(&self, a: &Self::Elem) -> String;
    fn elem_from_str(&self, s: &str) -> Result<Self::Elem, AlgebraError>;
}

/// GF(p) for an odd prime p. Elements are `u64` residues in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Accepts odd primes below 2^31 so products fit comfortably in `u128`
    /// and trial division stays cheap.
    pub fn new(p: u64) -> Result<Self, AlgebraError> {
        if p < 3 || p >= (1 << 31) || !is_prime_u64(p) {
            return Err(AlgebraError::InvalidModulus(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn reduce_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl CoefficientField for PrimeField {
    type Elem = u64;

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::Gf { p: self.p }
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero in GF({})", self.p);
        // Extended Euclid on (a, p); p prime so gcd is 1.
        let (mut r0, mut r1) = (*a as i64, self.p as i64);
        let (mut s0, mut s1) = (1i64, 0i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        s0.rem_euclid(self.p as i64) as u64
    }

    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }

    fn canonical_scale(&self, coeffs: &[u64]) -> u64 {
        self.inv(&coeffs[0])
    }

    fn elem_to_string(&self, a: &u64) -> String {
        a.to_string()
    }

    fn elem_from_str(&self, s: &str) -> Result<u64, AlgebraError> {
        let n: i64 = s
            .trim()
            .parse()
            .map_err(|_| AlgebraError::CoefficientParse(s.to_string()))?;
        Ok(self.reduce_i64(n))
    }
}

/// The field of rationals with arbitrary-precision representation.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Rationals;

impl CoefficientField for Rationals {
    type Elem = BigRational;

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::Rationals
    }

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero rational");
        a.recip()
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn canonical_scale(&self, coeffs: &[BigRational]) -> BigRational {
        let mut denom_lcm = BigInt::one();
        let mut numer_gcd = BigInt::zero();
        for c in coeffs {
            denom_lcm = denom_lcm.lcm(c.denom());
            numer_gcd = numer_gcd.gcd(c.numer());
        }
        debug_assert!(!numer_gcd.is_zero());
        let mut scale = BigRational::new(denom_lcm, numer_gcd);
        if (coeffs[0].clone() * &scale).is_negative() {
            scale = -scale;
        }
        scale
    }

    fn elem_to_string(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn elem_from_str(&self, s: &str) -> Result<BigRational, AlgebraError> {
        let s = s.trim();
        let parse_int = |t: &str| {
            t.parse::<BigInt>()
                .map_err(|_| AlgebraError::CoefficientParse(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(BigRational::from_integer(parse_int(s)?)),
            Some((n, d)) => {
                let denom = parse_int(d)?;
                if denom.is_zero() {
                    return Err(AlgebraError::CoefficientParse(s.to_string()));
                }
                Ok(BigRational::new(parse_int(n)?, denom))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_rejects_composites_and_evens() {
        assert!(PrimeField::new(32003).is_ok());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(91).is_err());
        assert!(PrimeField::new(1 << 32).is_err());
    }

    #[test]
    fn gf_arithmetic_round_trips() {
        let f = PrimeField::new(101).unwrap();
        assert_eq!(f.add(&100, &1), 0);
        assert_eq!(f.sub(&0, &1), 100);
        assert_eq!(f.mul(&50, &50), 2500 % 101);
        for a in 1..101 {
            assert_eq!(f.mul(&a, &f.inv(&a)), 1);
        }
        assert_eq!(f.from_i64(-1), 100);
    }

    #[test]
    fn rational_canonical_scale_gives_primitive_positive_lead() {
        let q = Rationals;
        let half = BigRational::new(BigInt::from(-1), BigInt::from(2));
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let coeffs = vec![half, third];
        let s = q.canonical_scale(&coeffs);
        let scaled: Vec<BigRational> = coeffs.iter().map(|c| c * &s).collect();
        assert!(scaled.iter().all(|c| c.denom().is_one()));
        assert!(scaled[0].is_positive());
    }

    #[test]
    fn coefficient_strings_round_trip() {
        let f = PrimeField::new(32003).unwrap();
        assert_eq!(f.elem_from_str("-1").unwrap(), 32002);
        assert_eq!(f.elem_to_string(&7), "7");
        let q = Rationals;
        let c = q.elem_from_str("-22/7").unwrap();
        assert_eq!(q.elem_to_string(&c), "-22/7");
        assert!(q.elem_from_str("1/0").is_err());
        assert!(q.elem_from_str("abc").is_err());
    }
}
