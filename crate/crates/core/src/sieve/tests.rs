use super::*;
use crate::jacobian::int_point;

pub(crate) fn c1_problem(n: u64, primes: Vec<u64>) -> SieveProblem {
    SieveProblem {
        curve: HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap(),
        target: TargetSpec::Elliptic {
            curve: EllipticCurve::from_ints(0, 0, 1),
            morphism: MorphismSpec::square_x(),
        },
        subgroup: SubgroupPresentation {
            free: vec![],
            torsion: vec![TorsionGenerator { element: GroupElement::Ec(int_point(2, 3)), order: 6 }],
            assumption: "E(Q) = Z/6 generated by (2,3)".into(),
        },
        modulus: n,
        primes,
        conditions: LocalConditions::new(),
        coset_budget: None,
        image_budget: None,
    }
}

fn c2_problem(n: u64, primes: Vec<u64>) -> SieveProblem {
    SieveProblem {
        curve: HyperellipticCurve::from_ints(&[2, 0, 0, 0, 0, 0, 1]).unwrap(),
        target: TargetSpec::Elliptic {
            curve: EllipticCurve::from_ints(0, 0, 2),
            morphism: MorphismSpec::square_x(),
        },
        subgroup: SubgroupPresentation {
            free: vec![GroupElement::Ec(int_point(-1, 1))],
            torsion: vec![],
            assumption: "E(Q) = Z generated by (-1,1)".into(),
        },
        modulus: n,
        primes,
        conditions: LocalConditions::new(),
        coset_budget: None,
        image_budget: None,
    }
}

#[test]
fn degenerate_modulus_single_coset() {
    let cert = sieve_run(&c1_problem(1, vec![5, 7, 11])).unwrap();
    assert_eq!(cert.parameters.search_space, 1);
    assert_eq!(cert.outcome.status, Status::Survivors);
    assert_eq!(cert.outcome.survivors, vec![vec![0]]);
}

#[test]
fn c1_soundness() {
    let primes: Vec<u64> = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1])
        .unwrap()
        .good_primes(50)
        .into_iter()
        .filter(|&p| EllipticCurve::from_ints(0, 0, 1).is_good_prime(p))
        .collect();
    for n in [2, 3, 4, 6, 12] {
        let tr = sieve_run_traced(&c1_problem(n, primes.clone())).unwrap();
        assert_eq!(tr.certificate.outcome.status, Status::Survivors);
        // ∞± ↦ O (label 0), (0,±1) ↦ ±2·(2,3).
        for known in [0u64, 2, 4] {
            let label = vec![known % 6u64.gcd(&n)];
            assert!(tr.steps.iter().all(|s| s.contains(&label)), "N={n} label {label:?}");
        }
        assert_eq!(replay_recorded(&tr.certificate).last(), Some(&tr.certificate.outcome.survivor_count));
        assert!(rerun_matches(&tr.certificate).unwrap());
    }
}

#[test]
fn reduction_of_generator() {
    let pr = c2_problem(24, vec![5]);
    let red = subgroup_reduction(&pr, 5).unwrap();
    assert_eq!(red[0].element, serde_json::json!([4, 1]));
    let e = EllipticCurve::from_ints(0, 0, 2);
    let g = crate::jacobian::ec_group_structure(&e, 5).unwrap();
    let two = e.scalar(&int_point(-1, 1), 2);
    let lhs = e.reduce_point(&two, 5);
    let r = e.reduce_point(&int_point(-1, 1), 5);
    assert_eq!(lhs, g.law.scalar(&r, 2));
    let inv = g.structure.invariants();
    let want: Vec<u64> = red[0].coords.iter().zip(inv).map(|(c, d)| 2 * c % d).collect();
    assert_eq!(g.structure.dlog(&lhs).unwrap(), want.as_slice());
}

#[test]
fn poonen_c1() {
    let cert = poonen_run(&c1_problem(1, vec![5])).unwrap();
    assert_eq!(cert.outcome.status, Status::Survivors);
    let cert = poonen_run(&c1_problem(1, vec![])).unwrap();
    assert_eq!(cert.outcome.status, Status::Survivors);
    assert_eq!(cert.outcome.survivors, vec![Vec::<u64>::new()]);
}

#[test]
fn zero_dim_shadow_is_z() {
    let e = EllipticCurve::from_ints(0, 0, 1);
    let g = [
        EcPoint::Identity,
        int_point(2, 3),
        int_point(0, 1),
        int_point(-1, 0),
        int_point(0, -1),
        int_point(2, -3),
    ];
    let z = [EcPoint::Identity, int_point(0, 1), int_point(0, -1)];
    let out = zero_dim_shadow(&e, &g, &z, &[5, 7, 11, 13]).unwrap();
    assert_eq!(out, vec![EcPoint::Identity, int_point(0, 1), int_point(0, -1)]);
}

#[test]
fn errors() {
    assert_eq!(sieve_run(&c1_problem(2, vec![3])).unwrap_err(), SieveError::BadPrimeInS(3));
    let mut pr = c1_problem(2, vec![5]);
    pr.conditions = LocalConditions::new().with(7, Condition::Affine);
    assert_eq!(sieve_run(&pr).unwrap_err(), SieveError::ConditionOutsideS(7));
    let mut pr = c2_problem(120, vec![5]);
    pr.coset_budget = Some(100);
    assert!(matches!(sieve_run(&pr), Err(SieveError::CosetBudgetExceeded { count: 120, budget: 100 })));
    let mut pr = c1_problem(2, vec![5]);
    pr.subgroup.torsion[0].order = 3;
    assert!(matches!(sieve_run(&pr), Err(SieveError::InvalidProblem(_))));
}

#[test]
fn problem_json_round_trip() {
    let pr = c2_problem(24, vec![5, 7]);
    let s = serde_json::to_string(&pr).unwrap();
    let back: SieveProblem = serde_json::from_str(&s).unwrap();
    assert_eq!(back, pr);
}

