//! Exact arithmetic: rationals, prime fields, polynomials and prime utilities.

mod fp;
mod fp2;
mod poly;
mod primes;

pub use fp::{legendre, mod_sqrt, FpElem};
pub use fp2::Fp2Elem;
pub use poly::{FpPoly, Poly, PolyError, QPoly};
pub use primes::{factor_bigint, int_factor, is_prime, primes_up_to, FactorError};

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational in lowest terms with positive denominator.
pub type BigRat = BigRational;

/// Minimal field interface shared by the rationals and the prime fields.
///
/// Elements carry enough context (the modulus, for prime fields) to build
/// the constants of their own field, hence the `_like` constructors.
pub trait Field:
    Clone
    + PartialEq
    + Eq
    + Hash
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn inverse(&self) -> Option<Self>;
}

impl Field for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// Removes every factor `p` from `n`, returning `(v_p(n), n / p^v)`.
pub fn split_valuation(n: &BigInt, p: u64) -> Option<(u32, BigInt)> {
    let v = valuation(n, p)?;
    Some((v, n / BigInt::from(p).pow(v)))
}

/// Exact integer square root of a nonnegative perfect square.
pub fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    // residues mod 64 reject most non-squares cheaply
    let low = (n & BigInt::from(63u8)).to_u8().unwrap_or(0);
    if !matches!(low, 0 | 1 | 4 | 9 | 16 | 17 | 25 | 33 | 36 | 41 | 49 | 57) {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Nonnegative square root of a rational square.
pub fn rat_sqrt(q: &BigRat) -> Option<BigRat> {
    let n = int_sqrt_exact(q.numer())?;
    let d = int_sqrt_exact(q.denom())?;
    Some(BigRat::new(n, d))
}

/// Reduction of a rational modulo `p`; `None` when `p` divides the denominator.
pub fn reduce_rat(q: &BigRat, p: u32) -> Option<FpElem> {
    let pb = BigInt::from(p);
    let den = q.denom().mod_floor(&pb).to_u32()?;
    if den == 0 {
        return None;
    }
    let num = q.numer().mod_floor(&pb).to_u32()?;
    let d = FpElem::new(den, p).inverse()?;
    Some(FpElem::new(num, p) * d)
}

pub fn reduce_int(n: &BigInt, p: u32) -> FpElem {
    let r = n.mod_floor(&BigInt::from(p)).to_u32().expect("residue fits");
    FpElem::new(r, p)
}

/// Parses "num/den" or "num".
pub fn parse_rat(s: &str) -> Result<BigRat, String> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| format!("invalid rational {s:?}: {e}"))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRat::new(parse(n)?, d))
        }
        None => Ok(BigRat::from_integer(parse(s)?)),
    }
}

pub fn format_rat(q: &BigRat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod rat_str {
    use super::{format_rat, parse_rat, BigRat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for coefficient lists of rationals.
pub mod rat_vec {
    use super::{format_rat, parse_rat, BigRat};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format_rat(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
