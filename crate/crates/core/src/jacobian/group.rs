use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A finite or infinite abelian group given by its law on concrete elements.
pub trait GroupLaw {
    type Elem: Clone + Eq + Hash + Debug;

    fn identity(&self) -> Self::Elem;
    fn combine(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn negate(&self, a: &Self::Elem) -> Self::Elem;

    fn scalar(&self, a: &Self::Elem, n: i64) -> Self::Elem {
        let mut base = if n < 0 { self.negate(a) } else { a.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.combine(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.combine(&base, &base);
            }
        }
        acc
    }

    fn order_of(&self, a: &Self::Elem, bound: u64) -> Option<u64> {
        let id = self.identity();
        let mut cur = a.clone();
        for k in 1..=bound {
            if cur == id {
                return Some(k);
            }
            cur = self.combine(&cur, a);
        }
        None
    }
}

/// Serializable summary of a finite abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDigest {
    pub order: u64,
    pub invariants: Vec<u64>,
    /// sha256 over the canonical element table with coordinates.
    pub table_sha256: String,
}

/// Invariant-factor decomposition of an enumerated finite abelian group.
#[derive(Clone, Debug)]
pub struct AbelianGroupStructure<E> {
    invariants: Vec<u64>,
    generators: Vec<E>,
    elements: Vec<E>,
    coords: HashMap<E, Vec<u64>>,
}

impl<E: Clone + Eq + Hash + Debug> AbelianGroupStructure<E> {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    /// d_1 | d_2 | … | d_k, all > 1.
    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn generators(&self) -> &[E] {
        &self.generators
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn dlog(&self, e: &E) -> Option<&[u64]> {
        self.coords.get(e).map(|v| v.as_slice())
    }

    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    pub fn digest(&self, render: impl Fn(&E) -> String) -> GroupDigest {
        let mut h = Sha256::new();
        for e in &self.elements {
            h.update(render(e).as_bytes());
            h.update(b"=");
            for c in &self.coords[e] {
                h.update(c.to_string().as_bytes());
                h.update(b",");
            }
            h.update(b"\n");
        }
        GroupDigest {
            order: self.order(),
            invariants: self.invariants.clone(),
            table_sha256: hex::encode(h.finalize()),
        }
    }
}

/// Recovers the structure of the group whose full element list is `elements`.
///
/// Builds the group as an iterated extension of cyclic layers (each new
/// generator's order modulo the span so far gives one relation), then diagonalises
/// the relation matrix by Smith normal form to read off invariant factors and
/// new coordinates. The listing order of `elements` is kept, so a canonical
/// listing yields canonical generators.
pub fn recover_structure<G: GroupLaw>(law: &G, elements: Vec<G::Elem>) -> AbelianGroupStructure<G::Elem> {
    let n = elements.len();
    let id = law.identity();
    // Mixed-radix coordinates over the layer generators g_1..g_m.
    let mut span: HashMap<G::Elem, Vec<i64>> = HashMap::with_capacity(n);
    span.insert(id.clone(), Vec::new());
    let mut layer_gens: Vec<G::Elem> = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();

    for x in &elements {
        if span.len() == n {
            break;
        }
        if span.contains_key(x) {
            continue;
        }
        let m = layer_gens.len();
        // Smallest k with k·x already in the span.
        let mut k = 1i64;
        let mut kx = x.clone();
        while !span.contains_key(&kx) {
            kx = law.combine(&kx, x);
            k += 1;
        }
        let mut rel = span[&kx].clone();
        for r in rel.iter_mut() {
            *r = -*r;
        }
        rel.resize(m, 0);
        rel.push(k);
        relations.push(rel);

        let old: Vec<(G::Elem, Vec<i64>)> = span.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        for c in span.values_mut() {
            c.push(0);
        }
        let mut shifted = old;
        for j in 1..k {
            for (e, c) in shifted.iter_mut() {
                *e = law.combine(e, x);
                let mut cc = c.clone();
                cc.resize(m, 0);
                cc.push(j);
                span.insert(e.clone(), cc);
            }
        }
        layer_gens.push(x.clone());
    }
    assert_eq!(span.len(), n, "element list is not a group");

    let m = layer_gens.len();
    let mut rel = vec![vec![0i128; m]; m];
    for (i, r) in relations.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            rel[i][j] = v as i128;
        }
    }
    let (diag, v) = smith(rel);
    let keep: Vec<usize> = (0..m).filter(|&i| diag[i] > 1).collect();
    let invariants: Vec<u64> = keep.iter().map(|&i| diag[i] as u64).collect();

    let mut coords: HashMap<G::Elem, Vec<u64>> = HashMap::with_capacity(n);
    let mut generators: Vec<Option<G::Elem>> = vec![None; keep.len()];
    for e in &elements {
        let x = &span[e];
        let y: Vec<u64> = keep
            .iter()
            .map(|&i| {
                let s: i128 = (0..m).map(|j| x.get(j).copied().unwrap_or(0) as i128 * v[j][i]).sum();
                s.rem_euclid(diag[i]) as u64
            })
            .collect();
        let nonzero: Vec<usize> = (0..y.len()).filter(|&i| y[i] != 0).collect();
        if let [i] = nonzero[..] {
            if y[i] == 1 {
                generators[i] = Some(e.clone());
            }
        }
        coords.insert(e.clone(), y);
    }
    assert_eq!(coords.len(), n);
    AbelianGroupStructure {
        invariants,
        generators: generators.into_iter().map(|g| g.expect("unit vector present")).collect(),
        elements,
        coords,
    }
}

/// Smith normal form D = U·A·V of a nonsingular square matrix; returns the
/// diagonal (positive, each dividing the next) and V.
pub(crate) fn smith(mut a: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>) {
    let m = a.len();
    let mut v: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect();
    for t in 0..m {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..m {
                    if a[i][j] != 0
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let piv = a[t][t];
            let mut dirty = false;
            for i in t + 1..m {
                let q = a[i][t].div_euclid(piv);
                if q != 0 {
                    for j in t..m {
                        a[i][j] -= q * a[t][j];
                    }
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..m {
                let q = a[t][j].div_euclid(piv);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                dirty |= a[t][j] != 0;
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..m).any(|j| a[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    for j in t..m {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for j in t..m {
                a[t][j] = -a[t][j];
            }
        }
    }
    ((0..m).map(|i| a[i][i]).collect(), v)
}
