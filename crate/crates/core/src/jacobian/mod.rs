//! Group arithmetic on elliptic curves and odd genus-2 Jacobians, over Q and F_p.

mod ec;
mod group;
mod mumford;

use std::collections::HashSet;

use thiserror::Error;

pub use ec::{int_point, EcPoint, EllipticCurve};
pub use group::{recover_structure, AbelianGroupStructure, GroupDigest, GroupLaw};
pub use mumford::{divisor_key, Jacobian, MumfordDivisor};

use crate::arith::{is_prime, legendre, mod_sqrt, BigRat, Fp2Elem, FpElem, FpPoly, Poly};
use crate::curve::{CurvePointFp, HyperellipticCurve};

/// Largest p for which J(F_p) is enumerated unless the caller says otherwise.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JacobianError {
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("genus-2 arithmetic needs an odd (quintic) model")]
    EvenModelUnsupported,
    #[error("unsupported model degree {0:?}")]
    UnsupportedDegree(Option<usize>),
    #[error("not a reduced Mumford pair on this curve")]
    InvalidMumford,
    #[error("{0} is not a prime of good reduction")]
    BadReductionPrime(u64),
    #[error("denominator divisible by {0}")]
    BadReductionDenominator(u64),
    #[error("p = {p} exceeds the enumeration budget {budget}")]
    EnumerationBudgetExceeded { p: u64, budget: u64 },
}

/// A finite group law together with its enumerated structure.
#[derive(Clone, Debug)]
pub struct FiniteGroup<L: GroupLaw> {
    pub law: L,
    pub structure: AbelianGroupStructure<L::Elem>,
}

pub fn ec_group_structure(
    e: &EllipticCurve<BigRat>,
    p: u64,
) -> Result<FiniteGroup<EllipticCurve<FpElem>>, JacobianError> {
    if !e.is_good_prime(p) {
        return Err(JacobianError::BadReductionPrime(p));
    }
    let law = e.reduce(p as u32).expect("good prime");
    let structure = recover_structure(&law, law.points());
    Ok(FiniteGroup { law, structure })
}

pub fn jac_group_structure(
    c: &HyperellipticCurve,
    p: u64,
) -> Result<FiniteGroup<Jacobian<FpElem>>, JacobianError> {
    jac_group_structure_with_budget(c, p, DEFAULT_ENUMERATION_BUDGET)
}

pub fn jac_group_structure_with_budget(
    c: &HyperellipticCurve,
    p: u64,
    budget: u64,
) -> Result<FiniteGroup<Jacobian<FpElem>>, JacobianError> {
    let jq = Jacobian::of_curve(c)?;
    if !c.is_good_prime(p) {
        return Err(JacobianError::BadReductionPrime(p));
    }
    if p > budget {
        return Err(JacobianError::EnumerationBudgetExceeded { p, budget });
    }
    let law = jq.reduce_mod(p as u32)?;
    let elems = jacobian_elements(&law);
    let structure = recover_structure(&law, elems);
    Ok(FiniteGroup { law, structure })
}

/// Every reduced divisor class of J(F_p), sorted by [`divisor_key`].
pub fn jacobian_elements(jac: &Jacobian<FpElem>) -> Vec<MumfordDivisor<FpElem>> {
    let f = jac.f();
    let p = f.lead().expect("nonzero f").modulus();
    let one = FpElem::one(p);
    let mut out = vec![jac.identity()];

    let mut pts: Vec<(FpElem, Vec<FpElem>)> = Vec::new();
    for a in 0..p {
        let x = FpElem::new(a, p);
        if let Some(r) = mod_sqrt(f.eval(&x)) {
            let ys = if r.is_zero() { vec![r] } else { vec![r, -r] };
            pts.push((x, ys));
        }
    }
    for (x, ys) in &pts {
        for y in ys {
            out.push(MumfordDivisor::from_parts(Poly::x_minus(x), Poly::constant(*y)));
        }
    }
    // u = (x − a1)(x − a2) with a1 ≠ a2 rational.
    for (i, (a1, ys1)) in pts.iter().enumerate() {
        for (a2, ys2) in &pts[i + 1..] {
            let u = &Poly::x_minus(a1) * &Poly::x_minus(a2);
            let inv = (*a2 - *a1).inv().expect("distinct");
            for &b1 in ys1 {
                for &b2 in ys2 {
                    let slope = (b2 - b1) * inv;
                    let v = Poly::new(vec![b1 - slope * *a1, slope]);
                    out.push(MumfordDivisor::from_parts(u.clone(), v));
                }
            }
        }
    }
    // u = (x − a)², doubling a non-Weierstrass point.
    let df = f.derivative();
    for (a, ys) in &pts {
        for &b in ys {
            if b.is_zero() {
                continue;
            }
            let slope = df.eval(a) * (b + b).inv().expect("b ≠ 0");
            let v = Poly::new(vec![b - slope * *a, slope]);
            let u = &Poly::x_minus(a) * &Poly::x_minus(a);
            out.push(MumfordDivisor::from_parts(u, v));
        }
    }
    // u irreducible: a conjugate pair {α, ᾱ} in F_{p²} \ F_p.
    let r = Fp2Elem::nonresidue_for(p);
    for bb in 1..=(p - 1) / 2 {
        for aa in 0..p {
            let alpha = Fp2Elem::new(FpElem::new(aa, p), FpElem::new(bb, p), r);
            let fa = eval_fp2(f, alpha);
            let Some(beta) = fa.sqrt() else { continue };
            let u = Poly::new(vec![alpha.norm(), -(alpha.a + alpha.a), one]);
            let betas = if beta.is_zero() { vec![beta] } else { vec![beta, -beta] };
            for be in betas {
                let c1 = be.b * alpha.b.inv().expect("b ≠ 0");
                let c0 = be.a - c1 * alpha.a;
                out.push(MumfordDivisor::from_parts(u.clone(), Poly::new(vec![c0, c1])));
            }
        }
    }
    out.sort_by_key(divisor_key);
    out
}

fn eval_fp2(f: &FpPoly, x: Fp2Elem) -> Fp2Elem {
    let r = x.nonresidue();
    let mut acc = Fp2Elem::from_base(FpElem::zero(x.modulus()), r);
    for c in f.coeffs().iter().rev() {
        acc = acc * x + Fp2Elem::from_base(*c, r);
    }
    acc
}

/// (#C(F_p), #C(F_{p²})) for the odd model y² = f over F_p (one point at infinity).
pub fn point_counts_odd(f: &FpPoly) -> (u64, u64) {
    let p = f.lead().expect("nonzero f").modulus();
    let chi1 = |z: FpElem| 1 + legendre(z) as i64;
    let n1: i64 = 1 + (0..p).map(|a| chi1(f.eval(&FpElem::new(a, p)))).sum::<i64>();
    let n2: i64 = 1 + Fp2Elem::all(p)
        .map(|a| {
            let z = eval_fp2(f, a);
            if z.is_zero() {
                1
            } else {
                1 + legendre(z.norm()) as i64
            }
        })
        .sum::<i64>();
    (n1 as u64, n2 as u64)
}

/// #J(F_p) = ½(N₁² + N₂) − p for genus 2.
pub fn jacobian_order_from_counts(p: u64, n1: u64, n2: u64) -> u64 {
    (n1 * n1 + n2) / 2 - p
}

/// Class of [P − ∞] on an odd model.
pub fn abel_jacobi(
    jac: &Jacobian<FpElem>,
    pt: &CurvePointFp,
) -> Result<MumfordDivisor<FpElem>, JacobianError> {
    match pt {
        CurvePointFp::Affine { x, y } => jac.abel_jacobi_affine(*x, *y),
        CurvePointFp::InfinityOdd => Ok(jac.identity()),
        _ => Err(JacobianError::EvenModelUnsupported),
    }
}

/// Checks that the combined reduction E(Q) → ∏ E(F_p) separates `points`.
pub fn reduction_injective(
    e: &EllipticCurve<BigRat>,
    points: &[EcPoint<BigRat>],
    primes: &[u64],
) -> Result<bool, JacobianError> {
    let mut seen = HashSet::new();
    for pt in points {
        if !e.contains(pt) {
            return Err(JacobianError::PointNotOnCurve);
        }
        let mut image = Vec::with_capacity(primes.len());
        for &p in primes {
            if !e.is_good_prime(p) || !is_prime(p) {
                return Err(JacobianError::BadReductionPrime(p));
            }
            image.push(e.reduce_point(pt, p as u32));
        }
        if !seen.insert(image) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_structures() {
        let e = EllipticCurve::from_ints(0, 0, 1);
        let g5 = ec_group_structure(&e, 5).unwrap();
        assert_eq!(g5.structure.invariants(), &[6]);
        let p = EcPoint::affine(FpElem::new(2, 5), FpElem::new(2, 5));
        assert_eq!(g5.law.order_of(&p, 100), Some(6));
        let g7 = ec_group_structure(&e, 7).unwrap();
        assert_eq!(g7.structure.invariants(), &[2, 6]);
        for x in g7.structure.elements() {
            assert!(g7.law.scalar(x, 12).is_identity());
        }
        assert_eq!(ec_group_structure(&e, 3).unwrap_err(), JacobianError::BadReductionPrime(3));
    }

    #[test]
    fn torsion_injects() {
        let e = EllipticCurve::from_ints(0, 0, 1);
        let tors = [
            EcPoint::Identity,
            int_point(2, 3),
            int_point(2, -3),
            int_point(0, 1),
            int_point(0, -1),
            int_point(-1, 0),
        ];
        assert!(reduction_injective(&e, &tors, &[5, 7]).unwrap());
    }

    #[test]
    fn order_formula_x5_minus_x_mod_3() {
        let c = HyperellipticCurve::from_ints(&[0, -1, 0, 0, 0, 1]).unwrap();
        // disc = −256, so 3 is good.
        let g = jac_group_structure(&c, 3).unwrap();
        let (n1, n2) = point_counts_odd(g.law.f());
        assert_eq!(n1, 4);
        assert_eq!(g.structure.order(), jacobian_order_from_counts(3, n1, n2));
    }

    #[test]
    fn abel_jacobi_examples() {
        let c = HyperellipticCurve::from_ints(&[1, -1, 0, 0, 0, 1]).unwrap();
        let j = Jacobian::of_curve(&c).unwrap().reduce_mod(7).unwrap();
        let one = FpElem::one(7);
        let d = abel_jacobi(&j, &CurvePointFp::Affine { x: FpElem::zero(7), y: one }).unwrap();
        assert_eq!(d.u(), &Poly::new(vec![FpElem::zero(7), one]));
        assert!(abel_jacobi(&j, &CurvePointFp::InfinityOdd).unwrap().is_identity());
    }

    #[test]
    fn budget_and_parity_errors() {
        let c = HyperellipticCurve::from_ints(&[1, -1, 0, 0, 0, 1]).unwrap();
        assert_eq!(
            jac_group_structure_with_budget(&c, 23, 20).unwrap_err(),
            JacobianError::EnumerationBudgetExceeded { p: 23, budget: 20 }
        );
        let even = HyperellipticCurve::from_ints(&[2, 0, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(
            jac_group_structure(&even, 5).unwrap_err(),
            JacobianError::EvenModelUnsupported
        );
    }
}
