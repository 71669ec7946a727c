use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GroupLaw, JacobianError};
use crate::arith::{self, mod_sqrt, reduce_rat, BigRat, Field, FpElem};

/// y² = x³ + a2·x² + a4·x + a6 over a field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EllipticCurve<F> {
    pub a2: F,
    pub a4: F,
    pub a6: F,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EcPoint<F> {
    Identity,
    Affine { x: F, y: F },
}

impl<F: Field> EcPoint<F> {
    pub fn affine(x: F, y: F) -> Self {
        EcPoint::Affine { x, y }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, EcPoint::Identity)
    }
}

impl<F: Field> fmt::Debug for EllipticCurve<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "y^2 = x^3 + ({:?})x^2 + ({:?})x + ({:?})",
            self.a2, self.a4, self.a6
        )
    }
}

impl<F: Field> EllipticCurve<F> {
    pub fn new(a2: F, a4: F, a6: F) -> Self {
        EllipticCurve { a2, a4, a6 }
    }

    pub fn rhs(&self, x: &F) -> F {
        ((x.clone() + self.a2.clone()) * x.clone() + self.a4.clone()) * x.clone() + self.a6.clone()
    }

    pub fn contains(&self, p: &EcPoint<F>) -> bool {
        match p {
            EcPoint::Identity => true,
            EcPoint::Affine { x, y } => y.clone() * y.clone() == self.rhs(x),
        }
    }

    /// Discriminant of the cubic x³ + a2x² + a4x + a6.
    pub fn cubic_discriminant(&self) -> F {
        let (a, b, c) = (&self.a2, &self.a4, &self.a6);
        let k = |n: i64| a.from_i64_like(n);
        let a3 = a.clone() * a.clone() * a.clone();
        let b3 = b.clone() * b.clone() * b.clone();
        k(-4) * a3 * c.clone() + a.clone() * a.clone() * b.clone() * b.clone()
            + k(18) * a.clone() * b.clone() * c.clone()
            + k(-4) * b3
            + k(-27) * c.clone() * c.clone()
    }

    pub fn add(&self, p: &EcPoint<F>, q: &EcPoint<F>) -> EcPoint<F> {
        let (EcPoint::Affine { x: x1, y: y1 }, EcPoint::Affine { x: x2, y: y2 }) = (p, q) else {
            return if p.is_identity() { q.clone() } else { p.clone() };
        };
        let lambda = if x1 == x2 {
            if (y1.clone() + y2.clone()).is_zero_elem() {
                return EcPoint::Identity;
            }
            let num = x1.from_i64_like(3) * x1.clone() * x1.clone()
                + x1.from_i64_like(2) * self.a2.clone() * x1.clone()
                + self.a4.clone();
            num * (x1.from_i64_like(2) * y1.clone()).inverse().expect("y ≠ 0")
        } else {
            (y2.clone() - y1.clone()) * (x2.clone() - x1.clone()).inverse().expect("x1 ≠ x2")
        };
        let x3 = lambda.clone() * lambda.clone() - self.a2.clone() - x1.clone() - x2.clone();
        let y3 = lambda * (x1.clone() - x3.clone()) - y1.clone();
        EcPoint::Affine { x: x3, y: y3 }
    }

    pub fn neg(&self, p: &EcPoint<F>) -> EcPoint<F> {
        match p {
            EcPoint::Identity => EcPoint::Identity,
            EcPoint::Affine { x, y } => EcPoint::Affine {
                x: x.clone(),
                y: -y.clone(),
            },
        }
    }

    /// Group law with membership checks on both inputs.
    pub fn ec_add(&self, p: &EcPoint<F>, q: &EcPoint<F>) -> Result<EcPoint<F>, JacobianError> {
        if !self.contains(p) || !self.contains(q) {
            return Err(JacobianError::PointNotOnCurve);
        }
        Ok(self.add(p, q))
    }
}

impl<F: Field> GroupLaw for EllipticCurve<F> {
    type Elem = EcPoint<F>;
    fn identity(&self) -> EcPoint<F> {
        EcPoint::Identity
    }
    fn combine(&self, a: &EcPoint<F>, b: &EcPoint<F>) -> EcPoint<F> {
        self.add(a, b)
    }
    fn negate(&self, a: &EcPoint<F>) -> EcPoint<F> {
        self.neg(a)
    }
}

impl EllipticCurve<BigRat> {
    pub fn from_ints(a2: i64, a4: i64, a6: i64) -> Self {
        EllipticCurve::new(arith::rat_int(a2), arith::rat_int(a4), arith::rat_int(a6))
    }

    /// Odd p with p-integral coefficients and nonzero discriminant mod p.
    pub fn is_good_prime(&self, p: u64) -> bool {
        if p == 2 || !arith::is_prime(p) {
            return false;
        }
        self.reduce(p as u32)
            .is_some_and(|e| !e.cubic_discriminant().is_zero())
    }

    pub fn reduce(&self, p: u32) -> Option<EllipticCurve<FpElem>> {
        Some(EllipticCurve::new(
            reduce_rat(&self.a2, p)?,
            reduce_rat(&self.a4, p)?,
            reduce_rat(&self.a6, p)?,
        ))
    }

    /// Reduction of a rational point; a p-power in the denominator of x sends
    /// the point to the identity.
    pub fn reduce_point(&self, pt: &EcPoint<BigRat>, p: u32) -> EcPoint<FpElem> {
        match pt {
            EcPoint::Identity => EcPoint::Identity,
            EcPoint::Affine { x, y } => match (reduce_rat(x, p), reduce_rat(y, p)) {
                (Some(x), Some(y)) => EcPoint::Affine { x, y },
                _ => EcPoint::Identity,
            },
        }
    }
}

impl EllipticCurve<FpElem> {
    pub fn modulus(&self) -> u32 {
        self.a6.modulus()
    }

    /// All points, identity first then affine points by (x, y).
    pub fn points(&self) -> Vec<EcPoint<FpElem>> {
        let p = self.modulus();
        let mut out = vec![EcPoint::Identity];
        for a in 0..p {
            let x = FpElem::new(a, p);
            if let Some(r) = mod_sqrt(self.rhs(&x)) {
                out.push(EcPoint::Affine { x, y: r });
                if !r.is_zero() {
                    out.push(EcPoint::Affine { x, y: -r });
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Serialize, Deserialize)]
struct EcJson {
    #[serde(with = "arith::rat_str", default = "zero_rat")]
    a2: BigRat,
    #[serde(with = "arith::rat_str", default = "zero_rat")]
    a4: BigRat,
    #[serde(with = "arith::rat_str", default = "zero_rat")]
    a6: BigRat,
}

fn zero_rat() -> BigRat {
    BigRat::zero()
}

impl Serialize for EllipticCurve<BigRat> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EcJson {
            a2: self.a2.clone(),
            a4: self.a4.clone(),
            a6: self.a6.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EllipticCurve<BigRat> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = EcJson::deserialize(d)?;
        let e = EllipticCurve::new(j.a2, j.a4, j.a6);
        if e.cubic_discriminant().is_zero() {
            return Err(serde::de::Error::custom("singular elliptic curve"));
        }
        Ok(e)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EcPointJson {
    Tag(String),
    Affine {
        #[serde(with = "arith::rat_str")]
        x: BigRat,
        #[serde(with = "arith::rat_str")]
        y: BigRat,
    },
}

impl Serialize for EcPoint<BigRat> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EcPoint::Identity => EcPointJson::Tag("identity".into()),
            EcPoint::Affine { x, y } => EcPointJson::Affine {
                x: x.clone(),
                y: y.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EcPoint<BigRat> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match EcPointJson::deserialize(d)? {
            EcPointJson::Tag(t) if t == "identity" => Ok(EcPoint::Identity),
            EcPointJson::Tag(t) => Err(serde::de::Error::custom(format!("unknown point tag {t:?}"))),
            EcPointJson::Affine { x, y } => Ok(EcPoint::Affine { x, y }),
        }
    }
}

impl Serialize for EcPoint<FpElem> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EcPoint::Identity => s.serialize_str("identity"),
            EcPoint::Affine { x, y } => [x.value(), y.value()].serialize(s),
        }
    }
}

/// Convenience for integer points in tests and fixtures.
pub fn int_point(x: i64, y: i64) -> EcPoint<BigRat> {
    EcPoint::Affine {
        x: BigRat::from_integer(BigInt::from(x)),
        y: BigRat::from_integer(BigInt::from(y)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_and_tripling_over_q() {
        let e = EllipticCurve::from_ints(0, 0, 1);
        let p = int_point(2, 3);
        assert_eq!(e.ec_add(&p, &p).unwrap(), int_point(0, 1));
        assert_eq!(e.scalar(&p, 3), int_point(-1, 0));
        assert_eq!(e.scalar(&p, 6), EcPoint::Identity);
        assert_eq!(e.ec_add(&p, &EcPoint::Identity).unwrap(), p);
        assert_eq!(e.ec_add(&p, &int_point(2, -3)).unwrap(), EcPoint::Identity);
        assert_eq!(
            e.ec_add(&p, &int_point(1, 1)),
            Err(JacobianError::PointNotOnCurve)
        );
    }

    #[test]
    fn reduction_examples() {
        let e = EllipticCurve::from_ints(0, 0, 2);
        assert_eq!(
            e.reduce_point(&int_point(-1, 1), 5),
            EcPoint::Affine { x: FpElem::new(4, 5), y: FpElem::new(1, 5) }
        );
        let q = EcPoint::Affine { x: arith::rat(1, 25), y: arith::rat(7, 125) };
        assert_eq!(e.reduce_point(&q, 5), EcPoint::Identity);
        assert!(!e.is_good_prime(3));
        assert!(e.is_good_prime(5));
    }

    #[test]
    fn point_json() {
        let p = int_point(-1, 1);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":"-1","y":"1"}"#);
        assert_eq!(serde_json::from_str::<EcPoint<BigRat>>(&s).unwrap(), p);
        assert_eq!(
            serde_json::from_str::<EcPoint<BigRat>>("\"identity\"").unwrap(),
            EcPoint::Identity
        );
    }
}
