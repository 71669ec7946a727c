//! Zero-dimensional schemes: a permutation-group lemma and quadratic étale algebras.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor_bigint, int_sqrt_exact, legendre, split_valuation, FpElem};

pub const DEFAULT_CLOSURE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZeroDimError {
    #[error("generated group exceeds {0} elements")]
    ClosureBudgetExceeded(usize),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("{0}")]
    InvalidInput(String),
}

/// Permutations of {1..n} given by their image lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermGroupSpec {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverVerdict {
    Holds,
    HypothesisFails,
    DegreeNotOneCounterexample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub verdict: CoverVerdict,
    pub group_order: usize,
    pub transitive: bool,
    /// A fixed-point-free element (1-based images), if any.
    pub derangement: Option<Vec<usize>>,
}

type Perm = Vec<u8>;

fn compose(a: &Perm, b: &Perm) -> Perm {
    // (a ∘ b)(i) = a(b(i))
    b.iter().map(|&i| a[i as usize]).collect()
}

impl PermGroupSpec {
    fn perms(&self) -> Result<Vec<Perm>, ZeroDimError> {
        if self.degree == 0 || self.degree > 255 {
            return Err(ZeroDimError::InvalidInput(format!("degree {} out of range", self.degree)));
        }
        self.generators
            .iter()
            .map(|g| {
                let mut seen = vec![false; self.degree];
                if g.len() != self.degree {
                    return Err(ZeroDimError::InvalidPermutation(format!("{g:?}")));
                }
                for &x in g {
                    if x == 0 || x > self.degree || seen[x - 1] {
                        return Err(ZeroDimError::InvalidPermutation(format!("{g:?}")));
                    }
                    seen[x - 1] = true;
                }
                Ok(g.iter().map(|&x| (x - 1) as u8).collect())
            })
            .collect()
    }

    /// All elements of the generated group.
    pub fn closure(&self, budget: usize) -> Result<Vec<Vec<usize>>, ZeroDimError> {
        Ok(closure(&self.perms()?, self.degree, budget)?
            .into_iter()
            .map(|p| p.into_iter().map(|x| x as usize + 1).collect())
            .collect())
    }
}

fn closure(gens: &[Perm], n: usize, budget: usize) -> Result<Vec<Perm>, ZeroDimError> {
    let id: Perm = (0..n as u8).collect();
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id.clone()]);
    let mut out = vec![id];
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(g, &x);
            if seen.insert(y.clone()) {
                if seen.len() > budget {
                    return Err(ZeroDimError::ClosureBudgetExceeded(budget));
                }
                queue.push_back(y.clone());
                out.push(y);
            }
        }
    }
    Ok(out)
}

/// A transitive group in which every element fixes a point acts on one point.
pub fn fixed_point_cover_check(g: &PermGroupSpec) -> Result<CoverReport, ZeroDimError> {
    fixed_point_cover_check_with_budget(g, DEFAULT_CLOSURE_BUDGET)
}

pub fn fixed_point_cover_check_with_budget(g: &PermGroupSpec, budget: usize) -> Result<CoverReport, ZeroDimError> {
    let gens = g.perms()?;
    let n = g.degree;
    let elems = closure(&gens, n, budget)?;
    let mut orbit = vec![false; n];
    orbit[0] = true;
    for e in &elems {
        orbit[e[0] as usize] = true;
    }
    let transitive = orbit.iter().all(|&b| b);
    let derangement = elems
        .iter()
        .find(|e| e.iter().enumerate().all(|(i, &x)| i != x as usize))
        .map(|e| e.iter().map(|&x| x as usize + 1).collect());
    let verdict = if !transitive || derangement.is_some() {
        CoverVerdict::HypothesisFails
    } else if n == 1 {
        CoverVerdict::Holds
    } else {
        CoverVerdict::DegreeNotOneCounterexample
    };
    Ok(CoverReport { verdict, group_order: elems.len(), transitive, derangement })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub checked: usize,
    pub holds: usize,
    pub hypothesis_fails: usize,
    pub counterexamples: Vec<PermGroupSpec>,
}

/// Runs the check on ⟨a, b⟩ for every ordered pair a, b ∈ S_n.
pub fn exhaustive_pair_sweep(n: usize) -> Result<SweepSummary, ZeroDimError> {
    let all = all_perms(n);
    let mut s = SweepSummary::default();
    for a in &all {
        for b in &all {
            let elems = closure(&[a.clone(), b.clone()], n, DEFAULT_CLOSURE_BUDGET)?;
            let mut orbit = vec![false; n];
            for e in &elems {
                orbit[e[0] as usize] = true;
            }
            let transitive = orbit.iter().all(|&x| x);
            let has_derangement = elems.iter().any(|e| e.iter().enumerate().all(|(i, &x)| i != x as usize));
            s.checked += 1;
            if !transitive || has_derangement {
                s.hypothesis_fails += 1;
            } else if n == 1 {
                s.holds += 1;
            } else {
                s.counterexamples.push(PermGroupSpec {
                    degree: n,
                    generators: [a, b]
                        .iter()
                        .map(|p| p.iter().map(|&x| x as usize + 1).collect())
                        .collect(),
                });
            }
        }
    }
    Ok(s)
}

fn all_perms(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Perm = (0..n as u8).collect();
    permute(&mut cur, 0, &mut out);
    out.sort();
    out
}

fn permute(cur: &mut Perm, k: usize, out: &mut Vec<Perm>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permute(cur, k + 1, out);
        cur.swap(k, i);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

/// Behaviour of x² − d at an odd prime p.
pub fn splitting_type(d: i64, p: u64) -> SplittingType {
    assert!(p > 2, "odd prime expected");
    let r = d.rem_euclid(p as i64) as u32;
    if r == 0 {
        return SplittingType::Ramified;
    }
    match legendre(FpElem::new(r, p as u32)) {
        1 => SplittingType::Split,
        _ => SplittingType::Inert,
    }
}

/// Whether d ≠ 0 is a square in Q_p (p prime) or in R (p = None).
pub fn is_local_square(d: &BigInt, p: Option<u64>) -> bool {
    let Some(p) = p else { return d.is_positive() };
    let Some((v, u)) = split_valuation(d, p) else { return true };
    if v % 2 == 1 {
        return false;
    }
    if p == 2 {
        return u.mod_floor_u64(8) == 1;
    }
    let r = u.mod_floor_u64(p);
    legendre(FpElem::new(r as u32, p as u32)) == 1
}

trait ModFloor {
    fn mod_floor_u64(&self, m: u64) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_u64(&self, m: u64) -> u64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(m)).to_u64().expect("small residue")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HasseReport {
    pub everywhere_local: bool,
    pub global: bool,
    /// Places (`"real"` or a prime) where no component has a local point.
    pub failing_places: Vec<String>,
}

/// Local-global check for Spec Q(√d₁) ⊔ Spec Q(√d₂) ⊔ Spec Q(√(d₁d₂)).
pub fn quad_etale_hasse_check(d1: i64, d2: i64) -> Result<HasseReport, ZeroDimError> {
    if d1 == 0 || d2 == 0 {
        return Err(ZeroDimError::InvalidInput("d1, d2 must be nonzero".into()));
    }
    let ds = [BigInt::from(d1), BigInt::from(d2), BigInt::from(d1) * BigInt::from(d2)];
    let global = ds.iter().any(|d| !d.is_negative() && int_sqrt_exact(d).is_some());
    let mut places: Vec<Option<u64>> = vec![None, Some(2)];
    let prod = &ds[2];
    for (q, _) in factor_bigint(prod).map_err(|e| ZeroDimError::InvalidInput(e.to_string()))? {
        if q != 2 {
            places.push(Some(q));
        }
    }
    let failing_places: Vec<String> = places
        .into_iter()
        .filter(|pl| !ds.iter().any(|d| is_local_square(d, *pl)))
        .map(|pl| pl.map_or("real".to_string(), |p| p.to_string()))
        .collect();
    Ok(HasseReport { everywhere_local: failing_places.is_empty(), global, failing_places })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_examples() {
        let triv = PermGroupSpec { degree: 1, generators: vec![vec![1]] };
        assert_eq!(fixed_point_cover_check(&triv).unwrap().verdict, CoverVerdict::Holds);
        let t = PermGroupSpec { degree: 2, generators: vec![vec![2, 1]] };
        let r = fixed_point_cover_check(&t).unwrap();
        assert_eq!(r.verdict, CoverVerdict::HypothesisFails);
        assert_eq!(r.derangement, Some(vec![2, 1]));
        let bad = PermGroupSpec { degree: 2, generators: vec![vec![1, 1]] };
        assert!(fixed_point_cover_check(&bad).is_err());
        let s4 = PermGroupSpec { degree: 4, generators: vec![vec![2, 1, 3, 4], vec![2, 3, 4, 1]] };
        assert_eq!(fixed_point_cover_check(&s4).unwrap().group_order, 24);
        assert_eq!(
            fixed_point_cover_check_with_budget(&s4, 10),
            Err(ZeroDimError::ClosureBudgetExceeded(10))
        );
    }

    #[test]
    fn sweep_small() {
        for n in 1..=4 {
            let s = exhaustive_pair_sweep(n).unwrap();
            assert!(s.counterexamples.is_empty());
            assert_eq!(s.checked, (1..=n).product::<usize>().pow(2));
        }
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_type(13, 3), SplittingType::Split);
        assert_eq!(splitting_type(13, 5), SplittingType::Inert);
        assert_eq!(splitting_type(13, 13), SplittingType::Ramified);
    }

    #[test]
    fn hasse_examples() {
        let r = quad_etale_hasse_check(13, 17).unwrap();
        assert_eq!((r.everywhere_local, r.global), (true, false));
        let r = quad_etale_hasse_check(5, 7).unwrap();
        assert_eq!((r.everywhere_local, r.global), (false, false));
        assert_eq!(r.failing_places, vec!["2", "5", "7"]);
        let r = quad_etale_hasse_check(4, 17).unwrap();
        assert_eq!((r.everywhere_local, r.global), (true, true));
        for d1 in -30..=30i64 {
            for d2 in -30..=30i64 {
                if d1 != 0 && d2 != 0 {
                    let r = quad_etale_hasse_check(d1, d2).unwrap();
                    assert!(!r.global || r.everywhere_local, "{d1} {d2}");
                }
            }
        }
    }
}
