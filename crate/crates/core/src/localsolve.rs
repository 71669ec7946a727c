//! Local solvability of y² = f(x) over R and over Q_p.
//!
//! The p-adic test splits residue classes of x (direct chart, x ∈ Z_p) and of
//! t = 1/x (reciprocal chart, t ∈ pZ_p) until each class is decided by the
//! valuation and unit part of f, or a simple root of f is reached by Hensel.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{self, legendre, reduce_int, split_valuation, valuation};
use crate::curve::{HyperellipticCurve, RealInterval};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("class splitting at p = {p} passed depth {depth} undecided")]
    DepthExceeded { p: u64, depth: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Place::Real => s.serialize_str("real"),
            Place::Prime(p) => s.serialize_u64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Place::Prime(p)),
            Raw::Str(s) if s == "real" => Ok(Place::Real),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unknown place {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// y² = F(x), x ∈ Z_p
    Direct,
    /// s² = F*(t) with F* the reversed polynomial of degree 2g+2, t ∈ pZ_p
    Reciprocal,
}

/// A residue class x ≡ residue (mod p^precision) on one chart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassLeaf {
    pub chart: Chart,
    #[serde(serialize_with = "ser_display")]
    pub residue: BigInt,
    pub precision: u32,
}

fn ser_display<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Real {
        interval: RealInterval,
    },
    Padic {
        #[serde(flatten)]
        class: ClassLeaf,
        /// The class contains (or Hensel-lifts to) a root of f, giving y = 0.
        hensel_root: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalVerdict {
    pub place: Place,
    pub solvable: bool,
    pub witness: Option<Witness>,
    /// For an unsolvable prime: every decided leaf of the splitting tree.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub leaves: Vec<ClassLeaf>,
}

impl fmt::Display for LocalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.place, self.solvable)?;
        match &self.witness {
            Some(Witness::Real { interval }) => write!(f, "\t{}", serde_json::to_string(interval).unwrap_or_default()),
            Some(Witness::Padic { class, hensel_root }) => write!(
                f,
                "\t{:?} {} mod {}^{}{}",
                class.chart,
                class.residue,
                self.place,
                class.precision,
                if *hensel_root { " (hensel root)" } else { "" }
            ),
            None => write!(f, "\t-"),
        }
    }
}

pub fn has_real_points(c: &HyperellipticCurve) -> LocalVerdict {
    let locus = c.real_locus();
    let witness = locus
        .intervals
        .first()
        .map(|iv| Witness::Real { interval: iv.clone() });
    LocalVerdict {
        place: Place::Real,
        solvable: witness.is_some() || locus.has_real_infinity,
        witness,
        leaves: Vec::new(),
    }
}

/// Depth bound v_p(disc) + 2·v_p(2) + 4 on the splitting tree.
pub fn depth_cap(c: &HyperellipticCurve, p: u64) -> u32 {
    let vd = valuation(&c.discriminant(), p).unwrap_or(0);
    vd + if p == 2 { 2 } else { 0 } + 4
}

fn eval(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn derivative(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

/// Unit-square test: a Legendre symbol for odd p, u ≡ 1 (mod 8) for p = 2.
fn unit_is_square(u: &BigInt, p: u64) -> bool {
    if p == 2 {
        u.mod_floor(&BigInt::from(8)) == BigInt::from(1)
    } else {
        legendre(reduce_int(u, p as u32)) == 1
    }
}

enum NodeOutcome {
    Solvable { hensel_root: bool },
    Unsolvable,
    Split,
}

fn classify_node(fc: &[BigInt], dfc: &[BigInt], a: &BigInt, k: u32, p: u64) -> NodeOutcome {
    let val = eval(fc, a);
    let Some((w, unit)) = split_valuation(&val, p) else {
        return NodeOutcome::Solvable { hensel_root: true };
    };
    let decided = if p == 2 { w + 3 <= k } else { w < k };
    if decided {
        return if w % 2 == 0 && unit_is_square(&unit, p) {
            NodeOutcome::Solvable { hensel_root: false }
        } else {
            NodeOutcome::Unsolvable
        };
    }
    if let Some(d) = valuation(&eval(dfc, a), p) {
        if w > 2 * d {
            return NodeOutcome::Solvable { hensel_root: true };
        }
    }
    NodeOutcome::Split
}

pub fn has_qp_points(c: &HyperellipticCurve, p: u64) -> Result<LocalVerdict, LocalError> {
    assert!(arith::is_prime(p), "has_qp_points needs a prime");
    let cap = depth_cap(c, p);
    let pb = BigInt::from(p);
    let mut leaves = Vec::new();
    for chart in [Chart::Direct, Chart::Reciprocal] {
        let fc = match chart {
            Chart::Direct => c.integral_f().to_vec(),
            Chart::Reciprocal => c.reversed_integral(),
        };
        let dfc = derivative(&fc);
        let mut stack: Vec<(BigInt, u32)> = match chart {
            Chart::Direct => (0..p).rev().map(|a| (BigInt::from(a), 1)).collect(),
            Chart::Reciprocal => vec![(BigInt::zero(), 1)],
        };
        while let Some((a, k)) = stack.pop() {
            match classify_node(&fc, &dfc, &a, k, p) {
                NodeOutcome::Solvable { hensel_root } => {
                    return Ok(LocalVerdict {
                        place: Place::Prime(p),
                        solvable: true,
                        witness: Some(Witness::Padic {
                            class: ClassLeaf {
                                chart,
                                residue: a,
                                precision: k,
                            },
                            hensel_root,
                        }),
                        leaves: Vec::new(),
                    });
                }
                NodeOutcome::Unsolvable => leaves.push(ClassLeaf {
                    chart,
                    residue: a,
                    precision: k,
                }),
                NodeOutcome::Split => {
                    if k >= cap {
                        return Err(LocalError::DepthExceeded { p, depth: cap });
                    }
                    let step = pb.pow(k);
                    for i in (0..p).rev() {
                        stack.push((&a + &step * BigInt::from(i), k + 1));
                    }
                }
            }
        }
    }
    Ok(LocalVerdict {
        place: Place::Prime(p),
        solvable: false,
        witness: None,
        leaves,
    })
}

/// Re-checks a p-adic witness: y² ≡ F(a) must be solvable modulo p^precision,
/// and for non-Hensel witnesses F(a) must itself be a p-adic square.
pub fn verify_witness(c: &HyperellipticCurve, p: u64, w: &Witness) -> bool {
    let Witness::Padic { class, hensel_root } = w else {
        return false;
    };
    let fc = match class.chart {
        Chart::Direct => c.integral_f().to_vec(),
        Chart::Reciprocal => {
            if !class.residue.is_multiple_of(&BigInt::from(p)) {
                return false;
            }
            c.reversed_integral()
        }
    };
    let val = eval(&fc, &class.residue);
    let Some((w, unit)) = split_valuation(&val, p) else {
        return true;
    };
    if *hensel_root {
        let d = valuation(&eval(&derivative(&fc), &class.residue), p);
        return d.is_some_and(|d| w > 2 * d);
    }
    w % 2 == 0 && unit_is_square(&unit, p)
}

/// Places checked by [`is_els`]: real, primes dividing 2·lc·disc, and good
/// primes too small for the Weil bound to force a smooth F_p-point.
pub fn critical_primes(c: &HyperellipticCurve) -> Vec<u64> {
    let g = c.genus() as u64;
    let mut ps = c.bad_primes();
    for p in arith::primes_up_to(4 * g * g + 2) {
        // p + 1 − 2g√p ≤ 0  ⇔  (p + 1)² ≤ 4g²p
        if (p + 1).pow(2) <= 4 * g * g * p && !ps.contains(&p) {
            ps.push(p);
        }
    }
    ps.sort_unstable();
    ps
}

#[derive(Clone, Debug, Serialize)]
pub struct ElsReport {
    pub els: bool,
    pub verdicts: Vec<LocalVerdict>,
}

impl ElsReport {
    pub fn failures(&self) -> Vec<Place> {
        self.verdicts.iter().filter(|v| !v.solvable).map(|v| v.place).collect()
    }

    pub fn first_failure(&self) -> Option<Place> {
        self.verdicts.iter().find(|v| !v.solvable).map(|v| v.place)
    }
}

pub fn is_els(c: &HyperellipticCurve) -> Result<ElsReport, LocalError> {
    let mut verdicts = vec![has_real_points(c)];
    for p in critical_primes(c) {
        verdicts.push(has_qp_points(c, p)?);
    }
    Ok(ElsReport {
        els: verdicts.iter().all(|v| v.solvable),
        verdicts,
    })
}

/// Total Haar measure of a leaf set, as p^{-k} summed in exact rationals;
/// a complete unsolvable tree covers measure 1 (direct) plus 1/p (reciprocal).
pub fn leaf_measure(leaves: &[ClassLeaf], p: u64) -> crate::arith::BigRat {
    leaves.iter().fold(crate::arith::BigRat::zero(), |acc, l| {
        acc + crate::arith::BigRat::new(1.into(), BigInt::from(p).pow(l.precision))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn c(v: &[i64]) -> HyperellipticCurve {
        HyperellipticCurve::from_ints(v).unwrap()
    }

    #[test]
    fn real_place_examples() {
        assert!(!has_real_points(&c(&[-1, 0, 0, 0, 0, 0, -1])).solvable);
        assert!(has_real_points(&c(&[1, 0, 0, 0, 0, 0, 1])).solvable);
        assert!(has_real_points(&c(&[-1, 0, 0, 0, 0, -1])).solvable);
        assert!(has_real_points(&c(&[-5, 0, 0, -1])).solvable);
    }

    #[test]
    fn two_adic_direct_chart_witness() {
        let v = has_qp_points(&c(&[1, 0, 0, 0, 0, 0, 1]), 2).unwrap();
        assert!(v.solvable);
        let Some(Witness::Padic { class, hensel_root }) = &v.witness else {
            panic!("expected p-adic witness");
        };
        assert_eq!(class.chart, Chart::Direct);
        assert_eq!(class.residue, BigInt::zero());
        assert!(!hensel_root);
        assert!(verify_witness(&c(&[1, 0, 0, 0, 0, 0, 1]), 2, v.witness.as_ref().unwrap()));
    }

    #[test]
    fn two_adic_reciprocal_chart_witness() {
        let curve = c(&[2, 0, 0, 0, 0, 0, 1]);
        let v = has_qp_points(&curve, 2).unwrap();
        assert!(v.solvable);
        let w = v.witness.as_ref().unwrap();
        let Witness::Padic { class, .. } = w else { panic!() };
        assert_eq!(class.chart, Chart::Reciprocal);
        assert!(verify_witness(&curve, 2, w));
        // x = 1/2 ↔ t = 2: 2⁶·f(1/2) = 129 ≡ 1 (mod 8) is a 2-adic unit square
        assert_eq!(curve.eval(&rat(1, 2)) * crate::arith::rat_int(64), crate::arith::rat_int(129));
        let t2 = Witness::Padic {
            class: ClassLeaf { chart: Chart::Reciprocal, residue: BigInt::from(2), precision: 3 },
            hensel_root: false,
        };
        assert!(verify_witness(&curve, 2, &t2));
    }

    #[test]
    fn three_adic_obstruction() {
        let curve = c(&[3, 0, 0, 0, 0, 0, 3]);
        let v = has_qp_points(&curve, 3).unwrap();
        assert!(!v.solvable);
        assert!(v.witness.is_none());
        // leaves tile Z_3 ⊔ 3Z_3 exactly
        assert_eq!(leaf_measure(&v.leaves, 3), rat(4, 3));
    }

    #[test]
    fn els_examples() {
        let r = is_els(&c(&[1, 0, 0, 0, 0, 0, 1])).unwrap();
        assert!(r.els);
        assert_eq!(
            r.verdicts.iter().map(|v| v.place).collect::<Vec<_>>(),
            vec![
                Place::Real,
                Place::Prime(2),
                Place::Prime(3),
                Place::Prime(5),
                Place::Prime(7),
                Place::Prime(11),
                Place::Prime(13)
            ]
        );
        let r = is_els(&c(&[3, 0, 0, 0, 0, 0, 3])).unwrap();
        assert!(!r.els);
        // 3(x⁶ + 1) is also never a 2-adic square (v₂ = 1 for odd x, unit ≡ 3 mod 8
        // otherwise), and C(F_7) is empty since 3·{1, 2} are nonresidues mod 7
        assert_eq!(r.failures(), vec![Place::Prime(2), Place::Prime(3), Place::Prime(7)]);
        assert_eq!(r.first_failure(), Some(Place::Prime(2)));
        let r = is_els(&c(&[-1, 0, 0, 0, 0, 0, -1])).unwrap();
        assert_eq!(r.first_failure(), Some(Place::Real));
    }

    #[test]
    fn genus_one_has_no_weil_gap_primes() {
        assert_eq!(critical_primes(&c(&[1, 0, 0, 1])), vec![2, 3]);
    }

    #[test]
    fn place_json() {
        assert_eq!(serde_json::to_string(&Place::Real).unwrap(), "\"real\"");
        assert_eq!(serde_json::to_string(&Place::Prime(3)).unwrap(), "3");
        assert_eq!(serde_json::from_str::<Place>("7").unwrap(), Place::Prime(7));
        assert_eq!(serde_json::from_str::<Place>("\"real\"").unwrap(), Place::Real);
    }
}
