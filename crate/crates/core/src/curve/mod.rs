//! Hyperelliptic models y² = f(x) of genus 1 and 2 over the rationals.

mod real;

pub use real::{isolate_real_roots, rational_roots, sturm_sequence, Endpoint, RealInterval, RealLocusReport, RootBracket};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    self, factor_bigint, mod_sqrt, primes_up_to, rat_sqrt, reduce_rat, BigRat, FpElem, FpPoly,
    Poly, QPoly,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("f is not squarefree; the model y^2 = f(x) is singular")]
    NotSquarefree,
    #[error("degree of f must lie in 3..=6, got {0:?}")]
    DegreeOutOfRange(Option<usize>),
    #[error("p = {0} is a prime of bad reduction for this model")]
    BadReductionPrime(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParity {
    Odd,
    Even,
}

/// A nonsingular model y² = f(x) with 3 ≤ deg f ≤ 6.
///
/// `integral_f = y_scale² · f` has integer coefficients and defines an
/// isomorphic curve via y ↦ y_scale·y. Local and discriminant computations
/// use the integral model; everything mod p uses f directly, which is why
/// primes dividing `y_scale` count as bad.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct HyperellipticCurve {
    f: QPoly,
    genus: u32,
    parity: ModelParity,
    integral_f: Vec<BigInt>,
    y_scale: BigInt,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    #[serde(with = "arith::rat_vec")]
    f: Vec<BigRat>,
}

impl TryFrom<CurveJson> for HyperellipticCurve {
    type Error = CurveError;
    fn try_from(j: CurveJson) -> Result<Self, CurveError> {
        HyperellipticCurve::new(j.f)
    }
}

impl From<HyperellipticCurve> for CurveJson {
    fn from(c: HyperellipticCurve) -> Self {
        CurveJson {
            f: c.f.into_coeffs(),
        }
    }
}

impl fmt::Debug for HyperellipticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = {:?}", self.f)
    }
}

/// A point of the smooth projective model over F_p.
///
/// On even models the two points at infinity are told apart by the limit
/// of y/x^{g+1}: `InfinityPlus` has limit σ, `InfinityMinus` has −σ, where σ
/// is [`HyperellipticCurve::infinity_root_mod`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvePointFp {
    Affine { x: FpElem, y: FpElem },
    InfinityPlus,
    InfinityMinus,
    InfinityOdd,
}

impl CurvePointFp {
    pub fn is_affine(&self) -> bool {
        matches!(self, CurvePointFp::Affine { .. })
    }

    pub fn x(&self) -> Option<FpElem> {
        match self {
            CurvePointFp::Affine { x, .. } => Some(*x),
            _ => None,
        }
    }
}

impl HyperellipticCurve {
    pub fn new(coeffs: Vec<BigRat>) -> Result<Self, CurveError> {
        let f = Poly::new(coeffs);
        let deg = f.degree();
        if !matches!(deg, Some(3..=6)) {
            return Err(CurveError::DegreeOutOfRange(deg));
        }
        let deg = deg.unwrap();
        let g = f.gcd(&f.derivative()).expect("f is nonzero");
        if g.degree() != Some(0) {
            return Err(CurveError::NotSquarefree);
        }
        let y_scale = f
            .coeffs()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let sq = BigRat::from_integer(&y_scale * &y_scale);
        let integral_f = f
            .coeffs()
            .iter()
            .map(|c| {
                let v = c * &sq;
                debug_assert!(v.is_integer());
                v.to_integer()
            })
            .collect();
        Ok(HyperellipticCurve {
            genus: ((deg - 1) / 2) as u32,
            parity: if deg % 2 == 1 {
                ModelParity::Odd
            } else {
                ModelParity::Even
            },
            f,
            integral_f,
            y_scale,
        })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self, CurveError> {
        HyperellipticCurve::new(coeffs.iter().map(|&c| arith::rat_int(c)).collect())
    }

    pub fn f(&self) -> &QPoly {
        &self.f
    }

    pub fn degree(&self) -> usize {
        self.f.degree().expect("validated curve")
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn parity(&self) -> ModelParity {
        self.parity
    }

    pub fn leading_coeff(&self) -> &BigRat {
        self.f.lead().expect("validated curve")
    }

    pub fn integral_f(&self) -> &[BigInt] {
        &self.integral_f
    }

    pub fn y_scale(&self) -> &BigInt {
        &self.y_scale
    }

    /// Coefficients as machine integers when f is integral and small.
    pub fn int_coeffs(&self) -> Option<Vec<i64>> {
        if !self.y_scale.is_one() {
            return None;
        }
        self.integral_f.iter().map(|c| c.to_i64()).collect()
    }

    pub fn eval(&self, x: &BigRat) -> BigRat {
        self.f.eval(x)
    }

    /// The integral model reversed as a polynomial of degree exactly 2g+2
    /// (zero-padded): t^{2g+2}·F(1/t).
    pub fn reversed_integral(&self) -> Vec<BigInt> {
        let n = 2 * self.genus as usize + 3;
        let mut c = self.integral_f.clone();
        c.resize(n, BigInt::zero());
        c.reverse();
        c
    }

    /// Discriminant of the integral model: (−1)^{n(n−1)/2} Res(F, F′) / lc(F).
    pub fn discriminant(&self) -> BigInt {
        let fcoef = &self.integral_f;
        let n = fcoef.len() - 1;
        let deriv: Vec<BigInt> = fcoef
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        let res = resultant(fcoef, &deriv);
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
        let lc = fcoef.last().unwrap();
        debug_assert!((&res % lc).is_zero());
        res / lc * sign
    }

    /// True for odd primes p not dividing lc·disc of the integral model nor
    /// the denominators of f.
    pub fn is_good_prime(&self, p: u64) -> bool {
        if p == 2 || !arith::is_prime(p) {
            return false;
        }
        let pb = BigInt::from(p);
        let lc = self.integral_f.last().unwrap();
        !(lc * self.discriminant() * &self.y_scale).is_multiple_of(&pb)
    }

    pub fn good_primes(&self, bound: u64) -> Vec<u64> {
        let bad = lc_disc_support(self);
        primes_up_to(bound)
            .into_iter()
            .filter(|&p| p != 2 && !bad.contains(&p))
            .collect()
    }

    /// Primes dividing 2·lc·disc of the integral model, ascending.
    pub fn bad_primes(&self) -> Vec<u64> {
        let mut v = lc_disc_support(self);
        if !v.contains(&2) {
            v.insert(0, 2);
        }
        v
    }

    /// f reduced mod p; `None` when p divides a denominator.
    pub fn f_mod_p(&self, p: u32) -> Option<FpPoly> {
        let c: Option<Vec<FpElem>> = self.f.coeffs().iter().map(|q| reduce_rat(q, p)).collect();
        Some(Poly::new(c?))
    }

    /// Positive rational square root of the leading coefficient, if any.
    pub fn rational_infinity_root(&self) -> Option<BigRat> {
        if self.parity == ModelParity::Odd {
            return None;
        }
        rat_sqrt(self.leading_coeff())
    }

    /// σ with σ² = lc mod p; fixes which point at infinity is "plus".
    pub fn infinity_root_mod(&self, p: u32) -> Option<FpElem> {
        if self.parity == ModelParity::Odd {
            return None;
        }
        if let Some(s) = self.rational_infinity_root() {
            return reduce_rat(&s, p);
        }
        let lc = reduce_rat(self.leading_coeff(), p)?;
        if lc.is_zero() {
            return None;
        }
        mod_sqrt(lc)
    }

    pub fn points_over_fp(&self, p: u64) -> Result<Vec<CurvePointFp>, CurveError> {
        if !self.is_good_prime(p) {
            return Err(CurveError::BadReductionPrime(p));
        }
        let p32 = p as u32;
        let fp = self.f_mod_p(p32).expect("good prime");
        let mut pts = Vec::new();
        for a in 0..p32 {
            let x = FpElem::new(a, p32);
            let v = fp.eval(&x);
            if let Some(r) = mod_sqrt(v) {
                if r.is_zero() {
                    pts.push(CurvePointFp::Affine { x, y: r });
                } else {
                    pts.push(CurvePointFp::Affine { x, y: r });
                    pts.push(CurvePointFp::Affine { x, y: -r });
                }
            }
        }
        match self.parity {
            ModelParity::Odd => pts.push(CurvePointFp::InfinityOdd),
            ModelParity::Even => {
                if self.infinity_root_mod(p32).is_some() {
                    pts.push(CurvePointFp::InfinityPlus);
                    pts.push(CurvePointFp::InfinityMinus);
                }
            }
        }
        Ok(pts)
    }

    pub fn real_locus(&self) -> RealLocusReport {
        real::real_locus(self)
    }
}

fn lc_disc_support(c: &HyperellipticCurve) -> Vec<u64> {
    let lc = c.integral_f.last().unwrap();
    let n = lc * c.discriminant() * &c.y_scale;
    factor_bigint(&n)
        .expect("discriminant factors for desk-scale curves")
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// Resultant of two integer polynomials (lowest degree first) via the
/// Sylvester determinant, evaluated fraction-free (Bareiss).
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let n = a.len() - 1;
    let m = b.len() - 1;
    let size = n + m;
    if size == 0 {
        return BigInt::one();
    }
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for r in 0..m {
        for (j, c) in a.iter().rev().enumerate() {
            mat[r][r + j] = c.clone();
        }
    }
    for r in 0..n {
        for (j, c) in b.iter().rev().enumerate() {
            mat[m + r][r + j] = c.clone();
        }
    }
    bareiss_det(mat)
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Sign of a rational as -1, 0, 1.
pub(crate) fn rat_sign(q: &BigRat) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}
