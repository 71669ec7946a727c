use std::fmt;

use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GroupLaw, JacobianError};
use crate::arith::{self, reduce_rat, BigRat, Field, FpElem, Poly};
use crate::curve::{HyperellipticCurve, ModelParity};

/// Reduced divisor class (u, v) with u monic, deg v < deg u, u | v² − f.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MumfordDivisor<F: Field> {
    u: Poly<F>,
    v: Poly<F>,
}

impl<F: Field> MumfordDivisor<F> {
    /// Unchecked constructor; callers guarantee the Mumford conditions.
    pub(crate) fn from_parts(u: Poly<F>, v: Poly<F>) -> Self {
        MumfordDivisor { u, v }
    }

    pub fn u(&self) -> &Poly<F> {
        &self.u
    }

    pub fn v(&self) -> &Poly<F> {
        &self.v
    }

    pub fn degree(&self) -> usize {
        self.u.degree().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.degree() == 0
    }
}

impl<F: Field> fmt::Debug for MumfordDivisor<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.u, self.v)
    }
}

/// Jacobian of y² = f(x) with deg f = 5, arithmetic by Cantor's algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jacobian<F: Field> {
    f: Poly<F>,
}

impl<F: Field> Jacobian<F> {
    pub fn from_poly(f: Poly<F>) -> Result<Self, JacobianError> {
        match f.degree() {
            Some(5) => Ok(Jacobian { f }),
            Some(6) => Err(JacobianError::EvenModelUnsupported),
            d => Err(JacobianError::UnsupportedDegree(d)),
        }
    }

    pub fn f(&self) -> &Poly<F> {
        &self.f
    }

    pub fn genus(&self) -> usize {
        2
    }

    fn one(&self) -> F {
        self.f.lead().expect("nonzero f").one_like()
    }

    pub fn identity(&self) -> MumfordDivisor<F> {
        MumfordDivisor {
            u: Poly::constant(self.one()),
            v: Poly::zero(),
        }
    }

    pub fn is_valid(&self, d: &MumfordDivisor<F>) -> bool {
        let Some(du) = d.u.degree() else { return false };
        if du > 2 || !d.u.is_monic() {
            return false;
        }
        if d.v.degree().is_some_and(|dv| dv >= du) {
            return false;
        }
        let w = &(&d.v * &d.v) - &self.f;
        w.rem(&d.u).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Validated constructor.
    pub fn divisor(&self, u: Poly<F>, v: Poly<F>) -> Result<MumfordDivisor<F>, JacobianError> {
        let d = MumfordDivisor { u, v };
        if self.is_valid(&d) {
            Ok(d)
        } else {
            Err(JacobianError::InvalidMumford)
        }
    }

    /// Class of [P − ∞] for an affine point P = (x0, y0).
    pub fn abel_jacobi_affine(&self, x0: F, y0: F) -> Result<MumfordDivisor<F>, JacobianError> {
        let u = Poly::x_minus(&x0);
        self.divisor(u, Poly::constant(y0))
    }

    pub fn neg(&self, d: &MumfordDivisor<F>) -> MumfordDivisor<F> {
        MumfordDivisor {
            u: d.u.clone(),
            v: (-&d.v).rem(&d.u).expect("u is nonzero"),
        }
    }

    /// Cantor composition followed by reduction.
    pub fn add(&self, d1: &MumfordDivisor<F>, d2: &MumfordDivisor<F>) -> MumfordDivisor<F> {
        if d1.is_identity() {
            return d2.clone();
        }
        if d2.is_identity() {
            return d1.clone();
        }
        let (e1, s1, s2) = d1.u.xgcd(&d2.u).expect("nonzero u");
        let vsum = &d1.v + &d2.v;
        let (d, c1, c2) = e1.xgcd(&vsum).expect("nonzero e1");
        let h1 = &c1 * &s1;
        let h2 = &c1 * &s2;
        let h3 = c2;
        let dsq = &d * &d;
        let u = (&d1.u * &d2.u).divrem(&dsq).expect("d ≠ 0").0;
        let num = &(&(&(&h1 * &d1.u) * &d2.v) + &(&(&h2 * &d2.u) * &d1.v))
            + &(&h3 * &(&(&d1.v * &d2.v) + &self.f));
        let v = num.divrem(&d).expect("d ≠ 0").0.rem(&u).expect("u ≠ 0");
        self.reduce(u, v)
    }

    fn reduce(&self, mut u: Poly<F>, mut v: Poly<F>) -> MumfordDivisor<F> {
        while u.degree().unwrap_or(0) > 2 {
            let w = &self.f - &(&v * &v);
            let u2 = w.divrem(&u).expect("u ≠ 0").0;
            u = u2.monic();
            v = (-&v).rem(&u).expect("u ≠ 0");
        }
        let u = u.monic();
        let v = v.rem(&u).expect("u ≠ 0");
        MumfordDivisor { u, v }
    }

    /// Checked addition.
    pub fn cantor_add(
        &self,
        d1: &MumfordDivisor<F>,
        d2: &MumfordDivisor<F>,
    ) -> Result<MumfordDivisor<F>, JacobianError> {
        if !self.is_valid(d1) || !self.is_valid(d2) {
            return Err(JacobianError::InvalidMumford);
        }
        Ok(self.add(d1, d2))
    }
}

impl<F: Field> GroupLaw for Jacobian<F> {
    type Elem = MumfordDivisor<F>;
    fn identity(&self) -> MumfordDivisor<F> {
        Jacobian::identity(self)
    }
    fn combine(&self, a: &MumfordDivisor<F>, b: &MumfordDivisor<F>) -> MumfordDivisor<F> {
        self.add(a, b)
    }
    fn negate(&self, a: &MumfordDivisor<F>) -> MumfordDivisor<F> {
        self.neg(a)
    }
}

impl Jacobian<BigRat> {
    pub fn of_curve(c: &HyperellipticCurve) -> Result<Self, JacobianError> {
        if c.parity() == ModelParity::Even {
            return Err(JacobianError::EvenModelUnsupported);
        }
        Jacobian::from_poly(c.f().clone())
    }

    pub fn reduce_mod(&self, p: u32) -> Result<Jacobian<FpElem>, JacobianError> {
        let f = reduce_poly(&self.f, p).ok_or(JacobianError::BadReductionPrime(p as u64))?;
        Jacobian::from_poly(f).map_err(|_| JacobianError::BadReductionPrime(p as u64))
    }

    pub fn reduce_divisor(
        &self,
        d: &MumfordDivisor<BigRat>,
        p: u32,
    ) -> Result<MumfordDivisor<FpElem>, JacobianError> {
        let u = reduce_poly(&d.u, p).ok_or(JacobianError::BadReductionDenominator(p as u64))?;
        let v = reduce_poly(&d.v, p).ok_or(JacobianError::BadReductionDenominator(p as u64))?;
        Ok(MumfordDivisor { u, v })
    }
}

fn reduce_poly(f: &Poly<BigRat>, p: u32) -> Option<Poly<FpElem>> {
    let cs: Option<Vec<FpElem>> = f.coeffs().iter().map(|c| reduce_rat(c, p)).collect();
    let cs = cs?;
    Some(if cs.is_empty() {
        Poly::zero()
    } else {
        Poly::new(cs)
    })
}

/// Canonical sort key: (deg u, u, v) with coefficients compared from the top.
pub fn divisor_key(d: &MumfordDivisor<FpElem>) -> (usize, Vec<u32>, Vec<u32>) {
    let top_down = |p: &Poly<FpElem>, len: usize| -> Vec<u32> {
        (0..len).rev().map(|i| p.coeff(i).map_or(0, |c| c.value())).collect()
    };
    let du = d.degree();
    (du, top_down(&d.u, du + 1), top_down(&d.v, du.max(1)))
}

#[derive(Serialize, Deserialize)]
struct MumfordJson {
    #[serde(with = "arith::rat_vec")]
    u: Vec<BigRat>,
    #[serde(with = "arith::rat_vec")]
    v: Vec<BigRat>,
}

impl Serialize for MumfordDivisor<BigRat> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MumfordJson {
            u: self.u.coeffs().to_vec(),
            v: self.v.coeffs().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MumfordDivisor<BigRat> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MumfordJson::deserialize(d)?;
        let u = Poly::new(j.u);
        if !u.lead().is_some_and(|c| c.is_one()) {
            return Err(serde::de::Error::custom("u must be monic"));
        }
        Ok(MumfordDivisor { u, v: Poly::new(j.v) })
    }
}

impl Serialize for MumfordDivisor<FpElem> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct J<'a> {
            u: &'a [FpElem],
            v: &'a [FpElem],
        }
        J { u: self.u.coeffs(), v: self.v.coeffs() }.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp_poly(cs: &[i64], p: u32) -> Poly<FpElem> {
        Poly::new(cs.iter().map(|&c| FpElem::from_i64(c, p)).collect())
    }

    #[test]
    fn doubling_example_over_f7() {
        let j = Jacobian::from_poly(fp_poly(&[1, -1, 0, 0, 0, 1], 7)).unwrap();
        let d = j.divisor(fp_poly(&[0, 1], 7), fp_poly(&[1], 7)).unwrap();
        let dd = j.cantor_add(&d, &d).unwrap();
        assert_eq!(dd.u(), &fp_poly(&[0, 0, 1], 7));
        assert_eq!(dd.v(), &fp_poly(&[1, 3], 7));
        assert!(j.is_valid(&dd));
        assert_eq!(j.add(&d, &j.identity()), d);
        assert!(j.add(&d, &j.neg(&d)).is_identity());
    }

    #[test]
    fn rejects_invalid_and_even() {
        let j = Jacobian::from_poly(fp_poly(&[1, -1, 0, 0, 0, 1], 7)).unwrap();
        assert_eq!(
            j.divisor(fp_poly(&[0, 1], 7), fp_poly(&[2], 7)),
            Err(JacobianError::InvalidMumford)
        );
        assert_eq!(
            Jacobian::from_poly(fp_poly(&[1, 0, 0, 0, 0, 0, 1], 7)),
            Err(JacobianError::EvenModelUnsupported)
        );
    }

    #[test]
    fn abel_jacobi_over_q() {
        let c = HyperellipticCurve::from_ints(&[1, -1, 0, 0, 0, 1]).unwrap();
        let j = Jacobian::of_curve(&c).unwrap();
        let d = j.abel_jacobi_affine(arith::rat_int(1), arith::rat_int(1)).unwrap();
        assert_eq!(d.u(), &Poly::new(vec![arith::rat_int(-1), arith::rat_int(1)]));
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"u":["-1","1"],"v":["1"]}"#);
        let back: MumfordDivisor<BigRat> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let red = j.reduce_divisor(&d, 7).unwrap();
        assert_eq!(red.u(), &fp_poly(&[-1, 1], 7));
    }
}
