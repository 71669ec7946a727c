use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{rat_sign, HyperellipticCurve, ModelParity};
use crate::arith::{self, BigRat, QPoly};

/// Root brackets are refined until narrower than 2^-32.
const BRACKET_BITS: u32 = 32;

/// Isolating interval [lo, hi] around a single real root (lo = hi when exact).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootBracket {
    #[serde(with = "arith::rat_str")]
    pub lo: BigRat,
    #[serde(with = "arith::rat_str")]
    pub hi: BigRat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Endpoint {
    NegInfinity,
    PosInfinity,
    Root(RootBracket),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealInterval {
    pub left: Endpoint,
    pub right: Endpoint,
}

impl RealInterval {
    /// Membership test for a rational with f(x) ≥ 0; brackets are disjoint so
    /// any overlap with a bracket decides the interval.
    pub fn contains(&self, x: &BigRat) -> bool {
        let left_ok = match &self.left {
            Endpoint::NegInfinity => true,
            Endpoint::Root(b) => x >= &b.lo,
            Endpoint::PosInfinity => false,
        };
        let right_ok = match &self.right {
            Endpoint::PosInfinity => true,
            Endpoint::Root(b) => x <= &b.hi,
            Endpoint::NegInfinity => false,
        };
        left_ok && right_ok
    }

    fn is_unbounded(&self) -> bool {
        matches!(self.left, Endpoint::NegInfinity) || matches!(self.right, Endpoint::PosInfinity)
    }
}

/// Maximal closed intervals where f ≥ 0, plus whether C has real points at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealLocusReport {
    pub intervals: Vec<RealInterval>,
    pub has_real_infinity: bool,
    #[serde(skip)]
    parity: Option<ModelParity>,
}

impl RealLocusReport {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && !self.has_real_infinity
    }

    /// Connected components of C(R), numbered by their x-intervals. On even
    /// models the two unbounded intervals are joined through the points at
    /// infinity and share an index.
    pub fn component_count(&self) -> usize {
        let unbounded = self.intervals.iter().filter(|i| i.is_unbounded()).count();
        if self.parity == Some(ModelParity::Even) && unbounded == 2 {
            self.intervals.len() - 1
        } else {
            self.intervals.len()
        }
    }

    pub fn component_of_x(&self, x: &BigRat) -> Option<usize> {
        let i = self.intervals.iter().position(|iv| iv.contains(x))?;
        Some(self.normalize_index(i))
    }

    pub fn infinity_component(&self) -> Option<usize> {
        if !self.has_real_infinity {
            return None;
        }
        let i = self.intervals.iter().position(|iv| iv.is_unbounded())?;
        Some(self.normalize_index(i))
    }

    fn normalize_index(&self, i: usize) -> usize {
        let n = self.intervals.len();
        let merged = self.parity == Some(ModelParity::Even)
            && n >= 2
            && self.intervals[0].is_unbounded()
            && self.intervals[n - 1].is_unbounded();
        if merged && i == n - 1 {
            0
        } else {
            i
        }
    }
}

pub fn sturm_sequence(f: &QPoly) -> Vec<QPoly> {
    let mut seq = vec![f.clone(), f.derivative()];
    while let Some(last) = seq.last() {
        if last.degree().unwrap_or(0) == 0 {
            break;
        }
        let prev = &seq[seq.len() - 2];
        let r = prev.rem(last).expect("nonzero divisor");
        if r.is_zero() {
            break;
        }
        seq.push(-&r);
    }
    seq
}

fn sign_changes(seq: &[QPoly], x: &BigRat) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| rat_sign(&p.eval(x)))
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Isolates the real roots of a squarefree polynomial, ascending.
pub fn isolate_real_roots(f: &QPoly) -> Vec<RootBracket> {
    let Some(deg) = f.degree() else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let seq = sturm_sequence(f);
    let lead = f.lead().unwrap().abs();
    let bound = f.coeffs()[..deg]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(BigRat::zero(), |m, c| if c > m { c } else { m })
        + BigRat::from_integer(2.into());
    let width = BigRat::new(1.into(), BigInt::one() << BRACKET_BITS);
    let count = |a: &BigRat, b: &BigRat| sign_changes(&seq, a) - sign_changes(&seq, b);

    let mut out = Vec::new();
    // stack of half-open intervals (lo, hi] whose endpoints are not roots
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((lo, hi)) = stack.pop() {
        let n = count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 && &hi - &lo <= width {
            out.push(RootBracket { lo, hi });
            continue;
        }
        let mid = (&lo + &hi) / BigRat::from_integer(2.into());
        if f.eval(&mid).is_zero() {
            out.push(RootBracket {
                lo: mid.clone(),
                hi: mid.clone(),
            });
            let mut delta = (&hi - &lo) / BigRat::from_integer(4.into());
            loop {
                let a = &mid - &delta;
                let b = &mid + &delta;
                if !f.eval(&a).is_zero() && !f.eval(&b).is_zero() && count(&a, &b) == 1 {
                    stack.push((lo, a));
                    stack.push((b, hi));
                    break;
                }
                delta = delta / BigRat::from_integer(2.into());
            }
        } else {
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    for b in out.iter_mut() {
        if b.lo != b.hi {
            if let Some(r) = rational_root_in(f, b) {
                b.lo = r.clone();
                b.hi = r;
            }
        }
    }
    out
}

/// All rational roots, ascending. A rational root a/b in lowest terms of the
/// integer-cleared polynomial has b dividing the leading coefficient, so each
/// isolating bracket holds only a few candidates per divisor.
pub fn rational_roots(f: &QPoly) -> Vec<BigRat> {
    isolate_real_roots(f)
        .into_iter()
        .filter(|b| b.lo == b.hi)
        .map(|b| b.lo)
        .collect()
}

fn rational_root_in(f: &QPoly, bracket: &RootBracket) -> Option<BigRat> {
    let den_lcm = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let lead = (f.lead()? * BigRat::from_integer(den_lcm)).to_integer().abs();
    let divisors = divisors_of(&lead)?;
    for d in divisors {
        let db = BigRat::from_integer(d.clone());
        let lo = (&bracket.lo * &db).ceil().to_integer();
        let hi = (&bracket.hi * &db).floor().to_integer();
        let mut a = lo;
        while a <= hi {
            let cand = BigRat::new(a.clone(), d.clone());
            if f.eval(&cand).is_zero() {
                return Some(cand);
            }
            a += 1;
        }
    }
    None
}

fn divisors_of(n: &BigInt) -> Option<Vec<BigInt>> {
    let fac = arith::factor_bigint(n).ok()?;
    let mut divs = vec![BigInt::one()];
    for (p, e) in fac {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= p;
            }
        }
        divs = next;
    }
    divs.sort();
    Some(divs)
}

pub(super) fn real_locus(c: &HyperellipticCurve) -> RealLocusReport {
    let f = c.f();
    let roots = isolate_real_roots(f);
    let one = BigRat::one();
    let two = BigRat::from_integer(2.into());
    let mut samples = Vec::with_capacity(roots.len() + 1);
    if roots.is_empty() {
        samples.push(BigRat::zero());
    } else {
        samples.push(&roots[0].lo - &one);
        for w in roots.windows(2) {
            samples.push((&w[0].hi + &w[1].lo) / &two);
        }
        samples.push(&roots[roots.len() - 1].hi + &one);
    }
    let mut intervals = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if rat_sign(&f.eval(s)) <= 0 {
            continue;
        }
        let left = if i == 0 {
            Endpoint::NegInfinity
        } else {
            Endpoint::Root(roots[i - 1].clone())
        };
        let right = if i == roots.len() {
            Endpoint::PosInfinity
        } else {
            Endpoint::Root(roots[i].clone())
        };
        intervals.push(RealInterval { left, right });
    }
    let has_real_infinity =
        c.parity() == ModelParity::Odd || c.leading_coeff().is_positive();
    RealLocusReport {
        intervals,
        has_real_infinity,
        parity: Some(c.parity()),
    }
}
