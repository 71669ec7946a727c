//! Naive rational point search by height of the x-coordinate.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, int_sqrt_exact, reduce_rat, BigRat};
use crate::curve::{CurvePointFp, HyperellipticCurve, ModelParity};
use crate::sieve::LocalConditions;

/// A point of C(Q) on the smooth model. `InfinityPlus` is the point where
/// y/x^{g+1} tends to the positive square root of the leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RationalPoint {
    Affine {
        #[serde(with = "arith::rat_str")]
        x: BigRat,
        #[serde(with = "arith::rat_str")]
        y: BigRat,
    },
    InfinityPlus,
    InfinityMinus,
    InfinityOdd,
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Affine { x, y } => {
                write!(f, "({}, {})", arith::format_rat(x), arith::format_rat(y))
            }
            RationalPoint::InfinityPlus => f.write_str("inf+"),
            RationalPoint::InfinityMinus => f.write_str("inf-"),
            RationalPoint::InfinityOdd => f.write_str("inf"),
        }
    }
}

impl RationalPoint {
    pub fn affine(x: BigRat, y: BigRat) -> Self {
        RationalPoint::Affine { x, y }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, RationalPoint::Affine { .. })
    }

    pub fn x(&self) -> Option<&BigRat> {
        match self {
            RationalPoint::Affine { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn on_curve(&self, c: &HyperellipticCurve) -> bool {
        match self {
            RationalPoint::Affine { x, y } => y * y == c.eval(x),
            RationalPoint::InfinityOdd => c.parity() == ModelParity::Odd,
            _ => c.rational_infinity_root().is_some(),
        }
    }

    /// Reduction to C(F_p) for a good prime p. Affine points with x not
    /// p-integral land on a point at infinity, chosen by the sign of
    /// y/x^{g+1} mod p.
    pub fn reduce(&self, c: &HyperellipticCurve, p: u64) -> Option<CurvePointFp> {
        if !c.is_good_prime(p) {
            return None;
        }
        let p32 = p as u32;
        match self {
            RationalPoint::InfinityPlus => Some(CurvePointFp::InfinityPlus),
            RationalPoint::InfinityMinus => Some(CurvePointFp::InfinityMinus),
            RationalPoint::InfinityOdd => Some(CurvePointFp::InfinityOdd),
            RationalPoint::Affine { x, y } => {
                if let Some(xr) = reduce_rat(x, p32) {
                    let yr = reduce_rat(y, p32)?;
                    return Some(CurvePointFp::Affine { x: xr, y: yr });
                }
                if c.parity() == ModelParity::Odd {
                    return Some(CurvePointFp::InfinityOdd);
                }
                let w = y / num_traits::pow(x.clone(), c.genus() as usize + 1);
                let sigma = c.infinity_root_mod(p32)?;
                if reduce_rat(&w, p32)? == sigma {
                    Some(CurvePointFp::InfinityPlus)
                } else {
                    Some(CurvePointFp::InfinityMinus)
                }
            }
        }
    }

    /// max(|num x|, den x); points at infinity have height 0.
    pub fn height(&self) -> BigInt {
        match self {
            RationalPoint::Affine { x, .. } => x.numer().abs().max(x.denom().clone()),
            _ => BigInt::zero(),
        }
    }

    fn sort_key(&self) -> (u8, BigInt, BigRat, bool) {
        match self {
            RationalPoint::Affine { x, y } => (0, self.height(), x.clone(), y.is_negative()),
            RationalPoint::InfinityPlus => (1, BigInt::zero(), BigRat::zero(), false),
            RationalPoint::InfinityMinus => (2, BigInt::zero(), BigRat::zero(), false),
            RationalPoint::InfinityOdd => (3, BigInt::zero(), BigRat::zero(), false),
        }
    }
}

impl PartialOrd for RationalPoint {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Affine points by (height, x, y ≥ 0 first), then points at infinity.
impl Ord for RationalPoint {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sort_key().cmp(&o.sort_key())
    }
}

/// The rational points at infinity of the smooth model.
pub fn rational_infinity_points(c: &HyperellipticCurve) -> Vec<RationalPoint> {
    match c.parity() {
        ModelParity::Odd => vec![RationalPoint::InfinityOdd],
        ModelParity::Even if c.rational_infinity_root().is_some() => {
            vec![RationalPoint::InfinityPlus, RationalPoint::InfinityMinus]
        }
        ModelParity::Even => Vec::new(),
    }
}

/// Optional restrictions on returned points.
#[derive(Clone, Debug, Default)]
pub struct SearchFilter {
    pub conditions: Option<LocalConditions>,
    /// Indices into [`HyperellipticCurve::real_locus`] components.
    pub real_components: Option<Vec<usize>>,
}

impl SearchFilter {
    fn keeps(&self, c: &HyperellipticCurve, pt: &RationalPoint) -> bool {
        if let Some(lc) = &self.conditions {
            for p in lc.primes() {
                match pt.reduce(c, p) {
                    Some(r) if lc.allows(p, &r) => {}
                    _ => return false,
                }
            }
        }
        if let Some(comps) = &self.real_components {
            let locus = c.real_locus();
            let comp = match pt {
                RationalPoint::Affine { x, .. } => locus.component_of_x(x),
                _ => locus.infinity_component(),
            };
            if !comp.is_some_and(|i| comps.contains(&i)) {
                return false;
            }
        }
        true
    }
}

pub fn point_search(c: &HyperellipticCurve, h: u64) -> Vec<RationalPoint> {
    point_search_filtered(c, h, &SearchFilter::default())
}

/// All points with x = a/b, |a| ≤ H, 1 ≤ b ≤ H, plus rational points at
/// infinity, sorted canonically.
pub fn point_search_filtered(c: &HyperellipticCurve, h: u64, filter: &SearchFilter) -> Vec<RationalPoint> {
    let coeffs = c.integral_f();
    let k = c.genus() as usize + 1;
    let big_d = 2 * k;
    let small: Option<Vec<i128>> = coeffs.iter().map(|b| b.to_i128()).collect();
    let hi = h as i64;
    let mut pts: Vec<RationalPoint> = (-hi..=hi)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut found = Vec::new();
            for b in 1..=hi {
                if a.gcd(&b) != 1 {
                    continue;
                }
                let g = small
                    .as_ref()
                    .and_then(|cs| homogenize_i128(cs, a as i128, b as i128, big_d))
                    .map(BigInt::from)
                    .unwrap_or_else(|| homogenize_big(coeffs, a, b, big_d));
                let Some(r) = square_root(&g) else { continue };
                let x = BigRat::new(a.into(), b.into());
                let den = num_traits::pow(BigInt::from(b), k) * c.y_scale();
                let y = BigRat::new(r, den);
                if y.is_zero() {
                    found.push(RationalPoint::affine(x, y));
                } else {
                    found.push(RationalPoint::affine(x.clone(), y.clone()));
                    found.push(RationalPoint::affine(x, -y));
                }
            }
            found
        })
        .collect();
    pts.extend(rational_infinity_points(c));
    pts.retain(|pt| filter.keeps(c, pt));
    pts.sort();
    pts.dedup();
    debug_assert!(pts.iter().all(|p| p.on_curve(c)));
    pts
}

/// Σ c_j a^j b^{D−j}, or None on overflow.
fn homogenize_i128(cs: &[i128], a: i128, b: i128, d: usize) -> Option<i128> {
    let mut acc: i128 = 0;
    let mut apow: i128 = 1;
    for (j, &cj) in cs.iter().enumerate() {
        let bpow = b.checked_pow((d - j) as u32)?;
        acc = acc.checked_add(cj.checked_mul(apow)?.checked_mul(bpow)?)?;
        if j + 1 < cs.len() {
            apow = apow.checked_mul(a)?;
        }
    }
    Some(acc)
}

fn homogenize_big(cs: &[BigInt], a: i64, b: i64, d: usize) -> BigInt {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    cs.iter()
        .enumerate()
        .map(|(j, cj)| cj * num_traits::pow(a.clone(), j) * num_traits::pow(b.clone(), d - j))
        .sum()
}

fn square_root(g: &BigInt) -> Option<BigInt> {
    if g.is_negative() {
        return None;
    }
    if let Some(u) = g.to_u128() {
        let r = u.isqrt();
        return (r * r == u).then(|| BigInt::from(r));
    }
    int_sqrt_exact(g)
}

/// Checks exact membership; used by callers holding externally supplied points.
pub fn verify_points(c: &HyperellipticCurve, pts: &[RationalPoint]) -> bool {
    pts.iter().all(|p| p.on_curve(c))
}
