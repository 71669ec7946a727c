use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::SieveError;
use crate::arith::{self, rat_sqrt, reduce_rat, BigRat, FpElem, FpPoly, Poly, QPoly};
use crate::curve::{rational_roots, CurvePointFp, HyperellipticCurve};
use crate::jacobian::{EcPoint, EllipticCurve, GroupLaw};
use crate::search::{rational_infinity_points, RationalPoint};

/// (num0(x) + num1(x)·y) / den(x), coefficient lists lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalFunction {
    #[serde(with = "arith::rat_vec", default)]
    pub num0: Vec<BigRat>,
    #[serde(with = "arith::rat_vec", default)]
    pub num1: Vec<BigRat>,
    #[serde(with = "arith::rat_vec")]
    pub den: Vec<BigRat>,
}

impl RationalFunction {
    pub fn new(num0: &[i64], num1: &[i64], den: &[i64]) -> Self {
        let v = |c: &[i64]| c.iter().map(|&n| arith::rat_int(n)).collect();
        RationalFunction { num0: v(num0), num1: v(num1), den: v(den) }
    }

    fn polys(&self) -> (QPoly, QPoly, QPoly) {
        (
            Poly::new(self.num0.clone()),
            Poly::new(self.num1.clone()),
            Poly::new(self.den.clone()),
        )
    }

    fn reduce(&self, p: u32) -> Option<[FpPoly; 3]> {
        let r = |cs: &[BigRat]| -> Option<FpPoly> {
            let v: Option<Vec<FpElem>> = cs.iter().map(|c| reduce_rat(c, p)).collect();
            Some(Poly::new(v?))
        };
        Some([r(&self.num0)?, r(&self.num1)?, r(&self.den)?])
    }
}

/// Where an exceptional image applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExceptionalKey {
    InfinityPlus,
    InfinityMinus,
    InfinityOdd,
    /// A single rational affine point.
    Affine {
        #[serde(with = "arith::rat_str")]
        x: BigRat,
        #[serde(with = "arith::rat_str")]
        y: BigRat,
    },
    /// Every point with this x-coordinate.
    AffineX {
        #[serde(with = "arith::rat_str")]
        x: BigRat,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalImage {
    pub at: ExceptionalKey,
    pub image: EcPoint<BigRat>,
}

/// A morphism C → E, (x, y) ↦ (X(x,y), Y(x,y)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismSpec {
    #[serde(rename = "X")]
    pub x_map: RationalFunction,
    #[serde(rename = "Y")]
    pub y_map: RationalFunction,
    #[serde(default)]
    pub exceptional: Vec<ExceptionalImage>,
}

impl MorphismSpec {
    /// (x, y) ↦ (x², y), the map y² = x⁶ + a → y² = x³ + a.
    pub fn square_x() -> Self {
        MorphismSpec {
            x_map: RationalFunction::new(&[0, 0, 1], &[], &[1]),
            y_map: RationalFunction::new(&[], &[1], &[1]),
            exceptional: vec![
                ExceptionalImage { at: ExceptionalKey::InfinityPlus, image: EcPoint::Identity },
                ExceptionalImage { at: ExceptionalKey::InfinityMinus, image: EcPoint::Identity },
            ],
        }
    }
}

/// The morphism reduced mod p, ready for repeated evaluation.
pub struct ReducedMorphism<'a> {
    p: u64,
    c: &'a HyperellipticCurve,
    target: EllipticCurve<FpElem>,
    x_map: [FpPoly; 3],
    y_map: [FpPoly; 3],
    table: Vec<(ReducedKey, EcPoint<FpElem>)>,
}

enum ReducedKey {
    Point(CurvePointFp),
    X(FpElem),
}

impl<'a> ReducedMorphism<'a> {
    pub fn new(
        spec: &MorphismSpec,
        c: &'a HyperellipticCurve,
        e: &EllipticCurve<BigRat>,
        p: u64,
    ) -> Result<Self, SieveError> {
        let p32 = p as u32;
        if !c.is_good_prime(p) || !e.is_good_prime(p) {
            return Err(SieveError::BadPrimeInS(p));
        }
        let target = e.reduce(p32).expect("good prime");
        let bad = || SieveError::BadPrimeInS(p);
        let x_map = spec.x_map.reduce(p32).ok_or_else(bad)?;
        let y_map = spec.y_map.reduce(p32).ok_or_else(bad)?;
        let mut table = Vec::new();
        for ex in &spec.exceptional {
            let image = e.reduce_point(&ex.image, p32);
            let key = match &ex.at {
                ExceptionalKey::InfinityPlus => ReducedKey::Point(CurvePointFp::InfinityPlus),
                ExceptionalKey::InfinityMinus => ReducedKey::Point(CurvePointFp::InfinityMinus),
                ExceptionalKey::InfinityOdd => ReducedKey::Point(CurvePointFp::InfinityOdd),
                ExceptionalKey::Affine { x, y } => {
                    let rp = RationalPoint::affine(x.clone(), y.clone());
                    match rp.reduce(c, p) {
                        Some(pt) => ReducedKey::Point(pt),
                        None => continue,
                    }
                }
                ExceptionalKey::AffineX { x } => match reduce_rat(x, p32) {
                    Some(xr) => ReducedKey::X(xr),
                    None => continue,
                },
            };
            table.push((key, image));
        }
        Ok(ReducedMorphism { p, c, target, x_map, y_map, table })
    }

    pub fn target(&self) -> &EllipticCurve<FpElem> {
        &self.target
    }

    pub fn eval(&self, pt: &CurvePointFp) -> Result<EcPoint<FpElem>, SieveError> {
        for (k, img) in &self.table {
            let hit = match k {
                ReducedKey::Point(q) => q == pt,
                ReducedKey::X(x) => pt.x() == Some(*x),
            };
            if hit {
                return self.checked(pt, img.clone());
            }
        }
        let unassigned = || SieveError::UnassignedExceptionalPoint {
            p: self.p,
            point: serde_json::to_string(pt).expect("serializable"),
        };
        let CurvePointFp::Affine { x, y } = *pt else {
            return Err(unassigned());
        };
        let ev = |m: &[FpPoly; 3]| -> Option<FpElem> {
            let d = m[2].eval(&x);
            let n = m[0].eval(&x) + m[1].eval(&x) * y;
            Some(n * d.inv()?)
        };
        let (Some(xx), Some(yy)) = (ev(&self.x_map), ev(&self.y_map)) else {
            return Err(unassigned());
        };
        self.checked(pt, EcPoint::Affine { x: xx, y: yy })
    }

    fn checked(&self, pt: &CurvePointFp, img: EcPoint<FpElem>) -> Result<EcPoint<FpElem>, SieveError> {
        if self.target.contains(&img) {
            Ok(img)
        } else {
            Err(SieveError::MorphismInvalid(format!(
                "image of {pt:?} mod {} is not on the target curve (curve {:?})",
                self.p, self.c
            )))
        }
    }
}

/// { φ(P) : P ∈ C(F_p) }, sorted.
pub fn morphism_image(
    c: &HyperellipticCurve,
    phi: &MorphismSpec,
    e: &EllipticCurve<BigRat>,
    p: u64,
) -> Result<Vec<EcPoint<FpElem>>, SieveError> {
    let m = ReducedMorphism::new(phi, c, e, p)?;
    let pts = c.points_over_fp(p).map_err(|_| SieveError::BadPrimeInS(p))?;
    let mut out = BTreeSet::new();
    for pt in &pts {
        out.insert(m.eval(pt)?);
    }
    Ok(out.into_iter().collect())
}

/// Evaluates φ at a rational point, consulting the exceptional table first.
pub fn eval_rational(
    phi: &MorphismSpec,
    pt: &RationalPoint,
) -> Result<EcPoint<BigRat>, SieveError> {
    for ex in &phi.exceptional {
        let hit = match (&ex.at, pt) {
            (ExceptionalKey::InfinityPlus, RationalPoint::InfinityPlus)
            | (ExceptionalKey::InfinityMinus, RationalPoint::InfinityMinus)
            | (ExceptionalKey::InfinityOdd, RationalPoint::InfinityOdd) => true,
            (ExceptionalKey::Affine { x, y }, RationalPoint::Affine { x: px, y: py }) => x == px && y == py,
            (ExceptionalKey::AffineX { x }, RationalPoint::Affine { x: px, .. }) => x == px,
            _ => false,
        };
        if hit {
            return Ok(ex.image.clone());
        }
    }
    let unassigned = || SieveError::UnassignedExceptionalPoint { p: 0, point: pt.to_string() };
    let RationalPoint::Affine { x, y } = pt else {
        return Err(unassigned());
    };
    let ev = |m: &RationalFunction| -> Option<BigRat> {
        let (n0, n1, d) = m.polys();
        let dv = d.eval(x);
        if dv.is_zero() {
            return None;
        }
        Some((n0.eval(x) + n1.eval(x) * y) / dv)
    };
    match (ev(&phi.x_map), ev(&phi.y_map)) {
        (Some(xx), Some(yy)) => Ok(EcPoint::Affine { x: xx, y: yy }),
        _ => Err(unassigned()),
    }
}

/// C(Q) from the full finite group E(Q), for maps (x, y) ↦ (r(x), s(x)·y).
///
/// Each affine fiber reduces to rational roots of num_X − X₀·den_X; the
/// identity's fiber is read from the exceptional table and the poles of X.
pub fn finite_mw_pullback(
    c: &HyperellipticCurve,
    phi: &MorphismSpec,
    e: &EllipticCurve<BigRat>,
    mw: &[EcPoint<BigRat>],
) -> Result<Vec<RationalPoint>, SieveError> {
    let (xn0, xn1, xd) = phi.x_map.polys();
    let (yn0, _, yd) = phi.y_map.polys();
    if !xn1.is_zero() || !yn0.is_zero() || xd.is_zero() || yd.is_zero() {
        return Err(SieveError::UnsupportedMorphismShape);
    }
    for q in mw {
        if !e.contains(q) {
            return Err(SieveError::MorphismInvalid("mw point not on target".into()));
        }
        // Mazur: rational torsion has order ≤ 12.
        if e.order_of(q, 12).is_none() {
            return Err(SieveError::RequiresFiniteMW);
        }
    }
    if xn0.degree().unwrap_or(0) == 0 && xd.degree().unwrap_or(0) == 0 {
        return Err(SieveError::UnsupportedMorphismShape);
    }

    let mut found: BTreeSet<RationalPoint> = BTreeSet::new();
    let mut candidates: Vec<RationalPoint> = rational_infinity_points(c);
    for ex in &phi.exceptional {
        match &ex.at {
            ExceptionalKey::Affine { x, y } => candidates.push(RationalPoint::affine(x.clone(), y.clone())),
            ExceptionalKey::AffineX { x } => candidates.extend(points_above(c, x)),
            _ => {}
        }
    }
    // Poles of X are affine preimages of the identity.
    for x0 in rational_roots(&xd) {
        candidates.extend(points_above(c, &x0));
    }
    for q in mw {
        let EcPoint::Affine { x: qx, .. } = q else { continue };
        let fiber = &xn0 - &xd.scale(qx);
        if fiber.is_zero() {
            return Err(SieveError::UnsupportedMorphismShape);
        }
        for x0 in rational_roots(&fiber) {
            candidates.extend(points_above(c, &x0));
        }
    }
    for pt in candidates {
        if !pt.on_curve(c) {
            continue;
        }
        let img = eval_rational(phi, &pt)?;
        if mw.contains(&img) {
            found.insert(pt);
        }
    }
    Ok(found.into_iter().collect())
}

fn points_above(c: &HyperellipticCurve, x: &BigRat) -> Vec<RationalPoint> {
    match rat_sqrt(&c.eval(x)) {
        None => Vec::new(),
        Some(y) if y.is_zero() => vec![RationalPoint::affine(x.clone(), y)],
        Some(y) => vec![
            RationalPoint::affine(x.clone(), y.clone()),
            RationalPoint::affine(x.clone(), -y),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::int_point;

    fn fp(v: u32) -> FpElem {
        FpElem::new(v, 5)
    }

    #[test]
    fn image_of_c1_mod_5() {
        let c = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap();
        let e = EllipticCurve::from_ints(0, 0, 1);
        let img = morphism_image(&c, &MorphismSpec::square_x(), &e, 5).unwrap();
        assert_eq!(
            img,
            vec![
                EcPoint::Identity,
                EcPoint::affine(fp(0), fp(1)),
                EcPoint::affine(fp(0), fp(4)),
                EcPoint::affine(fp(4), fp(0)),
            ]
        );
        let ered = e.reduce(5).unwrap();
        assert!(img.iter().all(|q| ered.contains(q)));
    }

    #[test]
    fn unassigned_exceptional_point() {
        let c = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap();
        let e = EllipticCurve::from_ints(0, 0, 1);
        // (x, y) ↦ (1/x², y/x³) has a pole at x = 0 with no assigned image.
        let mut phi = MorphismSpec {
            x_map: RationalFunction::new(&[1], &[], &[0, 0, 1]),
            y_map: RationalFunction::new(&[], &[1], &[0, 0, 0, 1]),
            exceptional: MorphismSpec::square_x().exceptional,
        };
        assert!(matches!(
            morphism_image(&c, &phi, &e, 5),
            Err(SieveError::UnassignedExceptionalPoint { p: 5, .. })
        ));
        phi.exceptional = vec![
            ExceptionalImage { at: ExceptionalKey::AffineX { x: arith::rat_int(0) }, image: EcPoint::Identity },
            ExceptionalImage { at: ExceptionalKey::InfinityPlus, image: int_point(0, 1) },
            ExceptionalImage { at: ExceptionalKey::InfinityMinus, image: int_point(0, -1) },
        ];
        assert!(morphism_image(&c, &phi, &e, 5).is_ok());
    }

    #[test]
    fn pullbacks() {
        let c1 = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap();
        let e1 = EllipticCurve::from_ints(0, 0, 1);
        let mw1 = [
            EcPoint::Identity,
            int_point(2, 3),
            int_point(2, -3),
            int_point(0, 1),
            int_point(0, -1),
            int_point(-1, 0),
        ];
        let pts = finite_mw_pullback(&c1, &MorphismSpec::square_x(), &e1, &mw1).unwrap();
        let aff = |x, y| RationalPoint::affine(arith::rat_int(x), arith::rat_int(y));
        assert_eq!(
            pts,
            vec![aff(0, 1), aff(0, -1), RationalPoint::InfinityPlus, RationalPoint::InfinityMinus]
        );

        let c = HyperellipticCurve::from_ints(&[-1, 0, 0, 0, 0, 0, 1]).unwrap();
        let e = EllipticCurve::from_ints(0, 0, -1);
        let pts = finite_mw_pullback(&c, &MorphismSpec::square_x(), &e, &[EcPoint::Identity, int_point(1, 0)]).unwrap();
        assert_eq!(
            pts,
            vec![aff(-1, 0), aff(1, 0), RationalPoint::InfinityPlus, RationalPoint::InfinityMinus]
        );

        let e2 = EllipticCurve::from_ints(0, 0, 2);
        let c2 = HyperellipticCurve::from_ints(&[2, 0, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(
            finite_mw_pullback(&c2, &MorphismSpec::square_x(), &e2, &[int_point(-1, 1)]),
            Err(SieveError::RequiresFiniteMW)
        );
    }
}
