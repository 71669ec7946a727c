use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SieveError;
use crate::arith::FpElem;
use crate::curve::{CurvePointFp, HyperellipticCurve};

/// Allowed residue classes of points at finitely many primes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalConditions {
    by_prime: BTreeMap<u64, Condition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// Points whose x-coordinate is p-integral (reduction is affine).
    Affine,
    /// Affine points with x mod p in the list.
    XResidues { residues: Vec<u64> },
    /// An explicit subset of C(F_p).
    Points { points: Vec<ConditionPoint> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionPoint {
    Affine { x: u64, y: u64 },
    InfinityPlus,
    InfinityMinus,
    InfinityOdd,
}

impl ConditionPoint {
    fn at(self, p: u32) -> CurvePointFp {
        match self {
            ConditionPoint::Affine { x, y } => CurvePointFp::Affine {
                x: FpElem::new((x % p as u64) as u32, p),
                y: FpElem::new((y % p as u64) as u32, p),
            },
            ConditionPoint::InfinityPlus => CurvePointFp::InfinityPlus,
            ConditionPoint::InfinityMinus => CurvePointFp::InfinityMinus,
            ConditionPoint::InfinityOdd => CurvePointFp::InfinityOdd,
        }
    }
}

impl LocalConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: u64, c: Condition) -> Self {
        self.by_prime.insert(p, c);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.by_prime.is_empty()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_prime.keys().copied()
    }

    pub fn get(&self, p: u64) -> Option<&Condition> {
        self.by_prime.get(&p)
    }

    /// True when `pt` (a point of C(F_p)) meets the condition at p, or when p
    /// carries no condition.
    pub fn allows(&self, p: u64, pt: &CurvePointFp) -> bool {
        match self.by_prime.get(&p) {
            None => true,
            Some(Condition::Affine) => pt.is_affine(),
            Some(Condition::XResidues { residues }) => {
                pt.x().is_some_and(|x| residues.iter().any(|&r| r % p == x.value() as u64))
            }
            Some(Condition::Points { points }) => points.iter().any(|q| q.at(p as u32) == *pt),
        }
    }

    pub fn allowed_points(&self, c: &HyperellipticCurve, p: u64) -> Result<Vec<CurvePointFp>, SieveError> {
        let pts = c.points_over_fp(p).map_err(|_| SieveError::BadPrimeInS(p))?;
        Ok(pts.into_iter().filter(|pt| self.allows(p, pt)).collect())
    }

    /// Conditions may only sit at primes of S, and listed points must lie on C(F_p).
    pub fn validate(&self, c: &HyperellipticCurve, s: &[u64]) -> Result<(), SieveError> {
        for (&p, cond) in &self.by_prime {
            if !s.contains(&p) {
                return Err(SieveError::ConditionOutsideS(p));
            }
            if let Condition::Points { points } = cond {
                let on = c.points_over_fp(p).map_err(|_| SieveError::BadPrimeInS(p))?;
                if let Some(bad) = points.iter().find(|q| !on.contains(&q.at(p as u32))) {
                    return Err(SieveError::InvalidCondition(format!(
                        "{bad:?} is not a point of C(F_{p})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let lc = LocalConditions::new()
            .with(5, Condition::Affine)
            .with(7, Condition::XResidues { residues: vec![0, 3] });
        let s = serde_json::to_string(&lc).unwrap();
        assert_eq!(s, r#"{"5":{"kind":"affine"},"7":{"kind":"x_residues","residues":[0,3]}}"#);
        assert_eq!(serde_json::from_str::<LocalConditions>(&s).unwrap(), lc);
    }

    #[test]
    fn filters_and_validates() {
        let c = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap();
        let lc = LocalConditions::new().with(5, Condition::Affine);
        assert_eq!(lc.allowed_points(&c, 5).unwrap().len(), 4);
        assert!(lc.validate(&c, &[5, 7]).is_ok());
        assert_eq!(lc.validate(&c, &[7]), Err(SieveError::ConditionOutsideS(5)));
        let bad = LocalConditions::new().with(
            5,
            Condition::Points { points: vec![ConditionPoint::Affine { x: 1, y: 1 }] },
        );
        assert!(matches!(bad.validate(&c, &[5]), Err(SieveError::InvalidCondition(_))));
    }
}
