use std::collections::HashSet;
use std::time::Instant;

use descent_core::arith::{rat_int, BigRat};
use descent_core::curve::HyperellipticCurve;
use descent_core::jacobian::{
    jac_group_structure, jacobian_order_from_counts, point_counts_odd, GroupLaw, Jacobian,
    MumfordDivisor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quintics() -> Vec<HyperellipticCurve> {
    [
        vec![1, -1, 0, 0, 0, 1],
        vec![0, -1, 0, 0, 0, 1],
        vec![1, 0, 0, 0, 0, 1],
        vec![-2, 3, 1, 0, -1, 1],
        vec![3, 0, 1, 0, 0, 2],
    ]
    .into_iter()
    .map(|c| HyperellipticCurve::from_ints(&c).unwrap())
    .collect()
}

#[test]
fn order_matches_point_counts_and_weil_window() {
    for c in quintics() {
        for p in c.good_primes(31) {
            let g = jac_group_structure(&c, p).unwrap();
            let (n1, n2) = point_counts_odd(g.law.f());
            let order = g.structure.order();
            assert_eq!(order, jacobian_order_from_counts(p, n1, n2), "{c:?} p={p}");
            let s = (p as f64).sqrt();
            assert!((s - 1.0).powi(4) <= order as f64 && order as f64 <= (s + 1.0).powi(4));
            assert!(g.structure.invariants().len() <= 4);
            assert_eq!(g.structure.invariants().iter().product::<u64>(), order);
            let uniq: HashSet<_> = g.structure.elements().iter().collect();
            assert_eq!(uniq.len() as u64, order);
        }
    }
}

#[test]
fn elements_valid_and_annihilated() {
    let c = &quintics()[0];
    for p in [7, 13, 29] {
        let g = jac_group_structure(c, p).unwrap();
        let exp = g.structure.exponent() as i64;
        for d in g.structure.elements() {
            assert!(g.law.is_valid(d));
            assert!(g.law.scalar(d, exp).is_identity());
        }
        for (gen, &d) in g.structure.generators().iter().zip(g.structure.invariants()) {
            assert_eq!(g.law.order_of(gen, d + 1), Some(d));
        }
    }
}

#[test]
fn group_axioms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for c in quintics().iter().take(3) {
        for p in c.good_primes(23).into_iter().filter(|&p| p > 5).take(2) {
            let g = jac_group_structure(c, p).unwrap();
            let el = g.structure.elements();
            let j = &g.law;
            for _ in 0..200 {
                let a = &el[rng.gen_range(0..el.len())];
                let b = &el[rng.gen_range(0..el.len())];
                let d = &el[rng.gen_range(0..el.len())];
                assert_eq!(j.add(&j.add(a, b), d), j.add(a, &j.add(b, d)));
                assert_eq!(j.add(a, b), j.add(b, a));
                assert!(j.add(a, &j.neg(a)).is_identity());
                // dlog is additive.
                let inv = g.structure.invariants();
                let (x, y, z) = (
                    g.structure.dlog(a).unwrap(),
                    g.structure.dlog(b).unwrap(),
                    g.structure.dlog(&j.add(a, b)).unwrap(),
                );
                for i in 0..inv.len() {
                    assert_eq!((x[i] + y[i]) % inv[i], z[i]);
                }
            }
        }
    }
}

#[test]
fn reduction_is_a_homomorphism() {
    let c = &quintics()[0];
    let jq = Jacobian::of_curve(c).unwrap();
    // Rational points of y² = x⁵ − x + 1 with small x.
    let pts = [(0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    let ds: Vec<MumfordDivisor<BigRat>> = pts
        .iter()
        .map(|&(x, y)| jq.abel_jacobi_affine(rat_int(x), rat_int(y)).unwrap())
        .collect();
    let mut sums = ds.clone();
    for a in &ds {
        for b in &ds {
            sums.push(jq.add(a, b));
        }
    }
    for p in [7u32, 11, 13] {
        let jp = jq.reduce_mod(p).unwrap();
        for a in &sums {
            for b in ds.iter().take(3) {
                let Ok(lhs) = jq.reduce_divisor(&jq.add(a, b), p) else { continue };
                let (Ok(ra), Ok(rb)) = (jq.reduce_divisor(a, p), jq.reduce_divisor(b, p)) else {
                    continue;
                };
                assert_eq!(lhs, jp.add(&ra, &rb));
            }
        }
    }
}

#[test]
fn enumeration_near_budget_is_fast() {
    let c = &quintics()[0];
    let t = Instant::now();
    let g = jac_group_structure(c, 199).unwrap();
    let (n1, n2) = point_counts_odd(g.law.f());
    assert_eq!(g.structure.order(), jacobian_order_from_counts(199, n1, n2));
    assert!(t.elapsed().as_secs() < 30, "took {:?}", t.elapsed());
}
