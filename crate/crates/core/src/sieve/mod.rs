//! Mordell–Weil sieve and Poonen-style image intersection over finitely many primes.

mod conditions;
mod morphism;

pub use conditions::{Condition, ConditionPoint, LocalConditions};
pub use morphism::{
    eval_rational, finite_mw_pullback, morphism_image, ExceptionalImage, ExceptionalKey,
    MorphismSpec, RationalFunction, ReducedMorphism,
};

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{BigRat, FpElem};
use crate::curve::HyperellipticCurve;
use crate::jacobian::{
    abel_jacobi, ec_group_structure, jac_group_structure, EcPoint, EllipticCurve, GroupDigest,
    GroupLaw, Jacobian, JacobianError, MumfordDivisor,
};

pub const DEFAULT_COSET_BUDGET: u64 = 1_000_000;
pub const DEFAULT_IMAGE_BUDGET: u64 = 10_000_000;
/// Survivor lists in certificates are truncated beyond this many labels.
pub const MAX_LISTED_SURVIVORS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("{0} is not a good prime for the problem")]
    BadPrimeInS(u64),
    #[error("condition at {0}, which is not in S")]
    ConditionOutsideS(u64),
    #[error("invalid condition: {0}")]
    InvalidCondition(String),
    #[error("{count} cosets exceed the budget {budget}")]
    CosetBudgetExceeded { count: u128, budget: u64 },
    #[error("image subgroup exceeds the budget {budget}")]
    ImageBudgetExceeded { budget: u64 },
    #[error("no image assigned for {point} (p = {p})")]
    UnassignedExceptionalPoint { p: u64, point: String },
    #[error("morphism check failed: {0}")]
    MorphismInvalid(String),
    #[error("pullback needs a finite Mordell-Weil group")]
    RequiresFiniteMW,
    #[error("fibers of this morphism do not reduce to univariate root finding")]
    UnsupportedMorphismShape,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Jacobian(#[from] JacobianError),
}

/// The group receiving C: its own Jacobian (odd genus 2) or an elliptic curve via φ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    SelfJacobian,
    Elliptic {
        curve: EllipticCurve<BigRat>,
        morphism: MorphismSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupElement {
    Ec(EcPoint<BigRat>),
    Mumford(MumfordDivisor<BigRat>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionGenerator {
    pub element: GroupElement,
    pub order: u64,
}

/// G = Z·P_1 ⊕ … ⊕ Z·P_r ⊕ ⊕ Z/o_j·T_j, taken on trust as containing the
/// images of all relevant rational points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupPresentation {
    #[serde(default)]
    pub free: Vec<GroupElement>,
    #[serde(default)]
    pub torsion: Vec<TorsionGenerator>,
    #[serde(default)]
    pub assumption: String,
}

impl SubgroupPresentation {
    fn generators(&self) -> impl Iterator<Item = &GroupElement> {
        self.free.iter().chain(self.torsion.iter().map(|t| &t.element))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveProblem {
    pub curve: HyperellipticCurve,
    pub target: TargetSpec,
    pub subgroup: SubgroupPresentation,
    #[serde(default = "one")]
    pub modulus: u64,
    pub primes: Vec<u64>,
    #[serde(default)]
    pub conditions: LocalConditions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_budget: Option<u64>,
}

fn one() -> u64 {
    1
}

impl SieveProblem {
    /// Checks generators, torsion orders, primes and conditions. Returns S ascending.
    pub fn validate(&self) -> Result<Vec<u64>, SieveError> {
        if self.modulus == 0 {
            return Err(SieveError::InvalidProblem("modulus must be positive".into()));
        }
        let mut s = self.primes.clone();
        s.sort_unstable();
        s.dedup();
        for &p in &s {
            let ok = self.curve.is_good_prime(p)
                && match &self.target {
                    TargetSpec::SelfJacobian => true,
                    TargetSpec::Elliptic { curve, .. } => curve.is_good_prime(p),
                };
            if !ok {
                return Err(SieveError::BadPrimeInS(p));
            }
        }
        self.conditions.validate(&self.curve, &s)?;
        match &self.target {
            TargetSpec::SelfJacobian => {
                let j = Jacobian::of_curve(&self.curve)?;
                for g in self.subgroup.generators() {
                    let GroupElement::Mumford(d) = g else {
                        return Err(SieveError::InvalidProblem("expected Mumford divisors".into()));
                    };
                    if !j.is_valid(d) {
                        return Err(JacobianError::InvalidMumford.into());
                    }
                }
                for t in &self.subgroup.torsion {
                    let GroupElement::Mumford(d) = &t.element else { unreachable!() };
                    check_order(&j, d, t.order)?;
                }
            }
            TargetSpec::Elliptic { curve, .. } => {
                for g in self.subgroup.generators() {
                    let GroupElement::Ec(pt) = g else {
                        return Err(SieveError::InvalidProblem("expected elliptic curve points".into()));
                    };
                    if !curve.contains(pt) {
                        return Err(JacobianError::PointNotOnCurve.into());
                    }
                }
                for t in &self.subgroup.torsion {
                    let GroupElement::Ec(pt) = &t.element else { unreachable!() };
                    check_order(curve, pt, t.order)?;
                }
            }
        }
        Ok(s)
    }

    /// Moduli of the coset labels: N for each free generator, gcd(o_j, N) for torsion.
    pub fn label_moduli(&self) -> Vec<u64> {
        let n = self.modulus;
        self.subgroup
            .free
            .iter()
            .map(|_| n)
            .chain(self.subgroup.torsion.iter().map(|t| t.order.gcd(&n)))
            .collect()
    }
}

fn check_order<G: GroupLaw>(law: &G, x: &G::Elem, order: u64) -> Result<(), SieveError> {
    if order == 0 || law.order_of(x, order) != Some(order) {
        return Err(SieveError::InvalidProblem(format!(
            "torsion generator {x:?} does not have order {order}"
        )));
    }
    Ok(())
}

/// Everything the sieve needs from one prime, in dlog coordinates.
#[derive(Clone, Debug)]
pub struct PrimeData {
    pub p: u64,
    pub group: GroupDigest,
    pub curve_points: usize,
    pub allowed_points: usize,
    /// Coordinates of each subgroup generator (free first, then torsion).
    pub generator_coords: Vec<Vec<u64>>,
    /// Coordinates of the images of allowed points.
    pub targets: BTreeSet<Vec<u64>>,
}

/// Reduced subgroup generators with their coordinates at p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedGenerator {
    pub element: serde_json::Value,
    pub coords: Vec<u64>,
}

pub fn subgroup_reduction(problem: &SieveProblem, p: u64) -> Result<Vec<ReducedGenerator>, SieveError> {
    let (data, reduced) = prime_data_inner(problem, p)?;
    Ok(reduced
        .into_iter()
        .zip(data.generator_coords)
        .map(|(element, coords)| ReducedGenerator { element, coords })
        .collect())
}

pub fn prime_data(problem: &SieveProblem, p: u64) -> Result<PrimeData, SieveError> {
    Ok(prime_data_inner(problem, p)?.0)
}

fn prime_data_inner(problem: &SieveProblem, p: u64) -> Result<(PrimeData, Vec<serde_json::Value>), SieveError> {
    let c = &problem.curve;
    let p32 = p as u32;
    let pts = c.points_over_fp(p).map_err(|_| SieveError::BadPrimeInS(p))?;
    let allowed: Vec<_> = pts.iter().filter(|pt| problem.conditions.allows(p, pt)).collect();
    match &problem.target {
        TargetSpec::SelfJacobian => {
            let jq = Jacobian::of_curve(c)?;
            let g = jac_group_structure(c, p)?;
            let s = &g.structure;
            let mut coords = Vec::new();
            let mut reduced = Vec::new();
            for gen in problem.subgroup.generators() {
                let GroupElement::Mumford(d) = gen else { unreachable!("validated") };
                let r = jq.reduce_divisor(d, p32)?;
                coords.push(s.dlog(&r).expect("reduced divisor lies in J(F_p)").to_vec());
                reduced.push(serde_json::to_value(&r).expect("serializable"));
            }
            let mut targets = BTreeSet::new();
            for pt in &allowed {
                let d = abel_jacobi(&g.law, pt)?;
                targets.insert(s.dlog(&d).expect("in J(F_p)").to_vec());
            }
            let data = PrimeData {
                p,
                group: s.digest(|e| serde_json::to_string(e).expect("serializable")),
                curve_points: pts.len(),
                allowed_points: allowed.len(),
                generator_coords: coords,
                targets,
            };
            Ok((data, reduced))
        }
        TargetSpec::Elliptic { curve, morphism } => {
            let g = ec_group_structure(curve, p)?;
            let s = &g.structure;
            let m = ReducedMorphism::new(morphism, c, curve, p)?;
            let mut coords = Vec::new();
            let mut reduced = Vec::new();
            for gen in problem.subgroup.generators() {
                let GroupElement::Ec(pt) = gen else { unreachable!("validated") };
                let r = curve.reduce_point(pt, p32);
                coords.push(s.dlog(&r).expect("in E(F_p)").to_vec());
                reduced.push(serde_json::to_value(&r).expect("serializable"));
            }
            let mut targets = BTreeSet::new();
            for pt in &allowed {
                let img = m.eval(pt)?;
                targets.insert(s.dlog(&img).expect("in E(F_p)").to_vec());
            }
            let data = PrimeData {
                p,
                group: s.digest(|e| serde_json::to_string(e).expect("serializable")),
                curve_points: pts.len(),
                allowed_points: allowed.len(),
                generator_coords: coords,
                targets,
            };
            Ok((data, reduced))
        }
    }
}

fn all_prime_data(problem: &SieveProblem, s: &[u64]) -> Result<Vec<PrimeData>, SieveError> {
    s.par_iter().map(|&p| prime_data(problem, p)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Empty,
    Survivors,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub survivor_count: u64,
    /// Surviving coset labels (sieve) or surviving image elements (Poonen),
    /// truncated to the first few thousand.
    pub survivors: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub p: u64,
    pub group: GroupDigest,
    pub curve_points: usize,
    pub allowed_points: usize,
    /// Invariants of J(F_p)/N (sieve) or of J(F_p) (Poonen).
    pub quotient: Vec<u64>,
    pub generator_images: Vec<Vec<u64>>,
    pub target_set: Vec<Vec<u64>>,
    pub survivors_after: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sieve,
    Poonen,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub mode: Mode,
    pub modulus: u64,
    pub primes: Vec<u64>,
    pub label_moduli: Vec<u64>,
    pub search_space: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveCertificate {
    pub outcome: Outcome,
    pub per_prime: Vec<PrimeRecord>,
    pub assumptions: String,
    pub parameters: Parameters,
    pub interpretation: String,
    pub problem: SieveProblem,
}

impl SieveCertificate {
    pub fn is_empty(&self) -> bool {
        self.outcome.status == Status::Empty
    }

    /// sha256 of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        let s = serde_json::to_string(self).expect("serializable");
        hex::encode(Sha256::digest(s.as_bytes()))
    }
}

const EMPTY_TEXT: &str = "EMPTY: no rational point satisfying the local conditions maps into the \
recorded subgroup. This is a proof of nonexistence provided the subgroup assumption holds; for \
curves it is equivalently a Brauer-Manin obstruction to points in the conditioned set.";
const SURVIVORS_TEXT: &str = "SURVIVORS: some classes are compatible with every prime in S. This \
proves nothing about the existence of rational points; larger N or S may still eliminate them.";

fn interpretation(status: Status) -> String {
    match status {
        Status::Empty => EMPTY_TEXT.into(),
        Status::Survivors => SURVIVORS_TEXT.into(),
    }
}

/// Per-step survivor sets, for soundness checks.
#[derive(Clone, Debug)]
pub struct SieveTrace {
    pub certificate: SieveCertificate,
    /// Surviving labels after each prime of S, ascending.
    pub steps: Vec<Vec<Vec<u64>>>,
}

pub fn sieve_run(problem: &SieveProblem) -> Result<SieveCertificate, SieveError> {
    Ok(sieve_run_traced(problem)?.certificate)
}

pub fn sieve_run_traced(problem: &SieveProblem) -> Result<SieveTrace, SieveError> {
    let s = problem.validate()?;
    let moduli = problem.label_moduli();
    let count: u128 = moduli.iter().map(|&m| m as u128).product();
    let budget = problem.coset_budget.unwrap_or(DEFAULT_COSET_BUDGET);
    if count > budget as u128 {
        return Err(SieveError::CosetBudgetExceeded { count, budget });
    }
    let data = all_prime_data(problem, &s)?;
    let n = problem.modulus;

    let mut alive: Vec<Vec<u64>> = labels(&moduli);
    let mut records = Vec::new();
    let mut steps = Vec::new();
    for d in &data {
        let quotient: Vec<u64> = d.group.invariants.iter().map(|&di| di.gcd(&n)).collect();
        let project = |v: &[u64]| -> Vec<u64> { v.iter().zip(&quotient).map(|(&x, &q)| x % q).collect() };
        let gens: Vec<Vec<u64>> = d.generator_coords.iter().map(|g| project(g)).collect();
        let targets: BTreeSet<Vec<u64>> = d.targets.iter().map(|t| project(t)).collect();
        alive.retain(|label| targets.contains(&combine(label, &gens, &quotient)));
        records.push(PrimeRecord {
            p: d.p,
            group: d.group.clone(),
            curve_points: d.curve_points,
            allowed_points: d.allowed_points,
            quotient,
            generator_images: gens,
            target_set: targets.into_iter().collect(),
            survivors_after: alive.len() as u64,
        });
        steps.push(alive.clone());
    }
    let status = if alive.is_empty() { Status::Empty } else { Status::Survivors };
    let certificate = SieveCertificate {
        outcome: Outcome {
            status,
            survivor_count: alive.len() as u64,
            survivors: alive.iter().take(MAX_LISTED_SURVIVORS).cloned().collect(),
        },
        per_prime: records,
        assumptions: problem.subgroup.assumption.clone(),
        parameters: Parameters {
            mode: Mode::Sieve,
            modulus: n,
            primes: s,
            label_moduli: moduli,
            search_space: count as u64,
        },
        interpretation: interpretation(status),
        problem: problem.clone(),
    };
    Ok(SieveTrace { certificate, steps })
}

/// All labels in lexicographic order.
fn labels(moduli: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &m in moduli {
        out = out
            .into_iter()
            .flat_map(|l| {
                (0..m).map(move |a| {
                    let mut l = l.clone();
                    l.push(a);
                    l
                })
            })
            .collect();
    }
    out
}

fn combine(label: &[u64], gens: &[Vec<u64>], moduli: &[u64]) -> Vec<u64> {
    let mut acc = vec![0u64; moduli.len()];
    for (a, g) in label.iter().zip(gens) {
        for i in 0..moduli.len() {
            acc[i] = (acc[i] + a * g[i]) % moduli[i];
        }
    }
    acc
}

/// Intersects the image of G in ∏_{p∈S} J(F_p) with ∏ ι(allowed points).
pub fn poonen_run(problem: &SieveProblem) -> Result<SieveCertificate, SieveError> {
    let s = problem.validate()?;
    let budget = problem.image_budget.unwrap_or(DEFAULT_IMAGE_BUDGET);
    let data = all_prime_data(problem, &s)?;
    let moduli: Vec<u64> = data.iter().flat_map(|d| d.group.invariants.clone()).collect();
    let ngen = problem.subgroup.free.len() + problem.subgroup.torsion.len();
    let gens: Vec<Vec<u64>> = (0..ngen)
        .map(|k| data.iter().flat_map(|d| d.generator_coords[k].clone()).collect())
        .collect();
    let blocks: Vec<(usize, usize)> = {
        let mut off = 0;
        data.iter()
            .map(|d| {
                let len = d.group.invariants.len();
                off += len;
                (off - len, off)
            })
            .collect()
    };

    // Breadth-first closure of the generators' images.
    let zero = vec![0u64; moduli.len()];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero.clone()]);
    let mut order = vec![zero];
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y: Vec<u64> = x.iter().zip(g).zip(&moduli).map(|((a, b), m)| (a + b) % m).collect();
            if seen.insert(y.clone()) {
                if seen.len() as u64 > budget {
                    return Err(SieveError::ImageBudgetExceeded { budget });
                }
                queue.push_back(y.clone());
                order.push(y);
            }
        }
    }
    order.sort();

    let mut alive = order;
    let mut records = Vec::new();
    for (d, &(lo, hi)) in data.iter().zip(&blocks) {
        alive.retain(|x| d.targets.contains(&x[lo..hi]));
        records.push(PrimeRecord {
            p: d.p,
            group: d.group.clone(),
            curve_points: d.curve_points,
            allowed_points: d.allowed_points,
            quotient: d.group.invariants.clone(),
            generator_images: d.generator_coords.clone(),
            target_set: d.targets.iter().cloned().collect(),
            survivors_after: alive.len() as u64,
        });
    }
    let status = if alive.is_empty() { Status::Empty } else { Status::Survivors };
    Ok(SieveCertificate {
        outcome: Outcome {
            status,
            survivor_count: alive.len() as u64,
            survivors: alive.into_iter().take(MAX_LISTED_SURVIVORS).collect(),
        },
        per_prime: records,
        assumptions: problem.subgroup.assumption.clone(),
        parameters: Parameters {
            mode: Mode::Poonen,
            modulus: problem.modulus,
            primes: s,
            label_moduli: moduli,
            search_space: seen.len() as u64,
        },
        interpretation: interpretation(status),
        problem: problem.clone(),
    })
}

/// Recomputes the certificate from its embedded problem; true iff identical.
pub fn rerun_matches(cert: &SieveCertificate) -> Result<bool, SieveError> {
    let fresh = match cert.parameters.mode {
        Mode::Sieve => sieve_run(&cert.problem)?,
        Mode::Poonen => poonen_run(&cert.problem)?,
    };
    Ok(serde_json::to_string(&fresh).expect("serializable") == serde_json::to_string(cert).expect("serializable"))
}

/// Refolds a sieve certificate's recorded per-prime data without any group
/// computation and returns the resulting survivor counts per step.
pub fn replay_recorded(cert: &SieveCertificate) -> Vec<u64> {
    let mut alive = labels(&cert.parameters.label_moduli);
    let mut counts = Vec::new();
    for r in &cert.per_prime {
        let targets: HashSet<&Vec<u64>> = r.target_set.iter().collect();
        alive.retain(|l| targets.contains(&combine(l, &r.generator_images, &r.quotient)));
        counts.push(alive.len() as u64);
    }
    counts
}

/// Elements g of a finite group G ⊆ E(Q) whose reduction lies in the
/// reduction of Z at every prime given.
pub fn zero_dim_shadow(
    e: &EllipticCurve<BigRat>,
    group: &[EcPoint<BigRat>],
    z: &[EcPoint<BigRat>],
    primes: &[u64],
) -> Result<Vec<EcPoint<BigRat>>, SieveError> {
    for &p in primes {
        if !e.is_good_prime(p) {
            return Err(SieveError::BadPrimeInS(p));
        }
    }
    let reduced_z: Vec<HashSet<EcPoint<FpElem>>> = primes
        .iter()
        .map(|&p| z.iter().map(|q| e.reduce_point(q, p as u32)).collect())
        .collect();
    Ok(group
        .iter()
        .filter(|g| {
            primes
                .iter()
                .zip(&reduced_z)
                .all(|(&p, zp)| zp.contains(&e.reduce_point(g, p as u32)))
        })
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests;
