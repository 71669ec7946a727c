use std::collections::HashSet;
use std::fs;
use std::io::Write;

use descent_core::census::{
    attach_sieve_result, census_run, classify_one, read_log, summary, CensusError, Classification,
    FamilySpec, RunOptions,
};
use descent_core::curve::HyperellipticCurve;
use descent_core::jacobian::{int_point, EllipticCurve};
use descent_core::localsolve::is_els;
use descent_core::search::point_search;
use descent_core::sieve::{
    sieve_run, Condition, GroupElement, LocalConditions, MorphismSpec, SieveProblem,
    SubgroupPresentation, TargetSpec,
};

fn small_family() -> FamilySpec {
    FamilySpec { degrees: vec![6], lo: -1, hi: 1, genus: None, dedupe: true }
}

fn content(path: &std::path::Path) -> HashSet<String> {
    read_log(path)
        .unwrap()
        .iter()
        .map(|r| serde_json::to_string(&r.content()).unwrap())
        .collect()
}

#[test]
fn partition_consistency_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.jsonl");
    let s = census_run(&small_family(), 12, &full, &RunOptions::default()).unwrap();
    let members = small_family().members();
    assert_eq!(s.total, members.len());
    assert_eq!(s.counts.values().sum::<usize>(), s.total);

    let recs = read_log(&full).unwrap();
    let ids: HashSet<_> = recs.iter().map(|r| r.id.clone()).collect();
    assert_eq!(ids.len(), recs.len());
    for r in &recs {
        if let Classification::HasPoint { point } = &r.classification {
            let c = HyperellipticCurve::from_ints(&r.coeffs).unwrap();
            assert!(point.on_curve(&c));
            assert!(is_els(&c).unwrap().els, "{}", r.id);
        }
    }

    // Interrupt after 100 records, resume, compare as sets.
    let part = dir.path().join("part.jsonl");
    let opts = RunOptions { resume: false, max_new_records: Some(100) };
    let s1 = census_run(&small_family(), 12, &part, &opts).unwrap();
    assert_eq!(s1.total, 100);
    // A torn final line is dropped on resume.
    let mut f = fs::OpenOptions::new().append(true).open(&part).unwrap();
    f.write_all(br#"{"id":"1,0,"#).unwrap();
    drop(f);
    let s2 = census_run(&small_family(), 12, &part, &RunOptions { resume: true, max_new_records: None }).unwrap();
    assert_eq!(s2.counts, s.counts);
    assert_eq!(content(&part), content(&full));

    // Resuming a complete log appends nothing.
    let before = fs::read(&full).unwrap();
    census_run(&small_family(), 12, &full, &RunOptions { resume: true, max_new_records: None }).unwrap();
    assert_eq!(fs::read(&full).unwrap(), before);

    // Refuses to overwrite without resume.
    assert!(matches!(
        census_run(&small_family(), 12, &full, &RunOptions::default()),
        Err(CensusError::LogExists(_))
    ));
}

#[test]
fn mid_file_corruption_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let a = serde_json::to_string(&classify_one(&[1, 0, 0, 0, 0, 0, 1], 5)).unwrap();
    let b = serde_json::to_string(&classify_one(&[-1, 0, 0, 0, 0, 0, -1], 5)).unwrap();
    fs::write(&log, format!("{a}\nnot json\n{b}\n")).unwrap();
    assert!(matches!(summary(&log), Err(CensusError::LogCorruption { line: 2, .. })));
}

fn c2_affine_empty() -> SieveProblem {
    let c = HyperellipticCurve::from_ints(&[2, 0, 0, 0, 0, 0, 1]).unwrap();
    let primes = vec![5, 7];
    let mut conditions = LocalConditions::new();
    for &p in &primes {
        conditions = conditions.with(p, Condition::Affine);
    }
    SieveProblem {
        curve: c,
        target: TargetSpec::Elliptic { curve: EllipticCurve::from_ints(0, 0, 2), morphism: MorphismSpec::square_x() },
        subgroup: SubgroupPresentation {
            free: vec![GroupElement::Ec(int_point(-1, 1))],
            torsion: vec![],
            assumption: "E(Q) = Z generated by (-1,1)".into(),
        },
        modulus: 24,
        primes,
        conditions,
        coset_budget: None,
        image_budget: None,
    }
}

#[test]
fn attach_state_machine() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    // Hand-built log: the sieve-able curve marked unresolved, plus x⁶ + 1.
    let mut unresolved = classify_one(&[2, 0, 0, 0, 0, 0, 1], 0);
    unresolved.classification = Classification::ElsUnresolved;
    let has_point = classify_one(&[1, 0, 0, 0, 0, 0, 1], 12);
    fs::write(
        &log,
        format!("{}\n{}\n", serde_json::to_string(&unresolved).unwrap(), serde_json::to_string(&has_point).unwrap()),
    )
    .unwrap();

    let cert = sieve_run(&c2_affine_empty()).unwrap();
    assert!(cert.is_empty());
    let up = attach_sieve_result(&log, None, &cert, Some("c2.json".into())).unwrap();
    assert!(matches!(up.classification, Classification::SieveEmpty { .. }));
    let len = fs::metadata(&log).unwrap().len();
    let again = attach_sieve_result(&log, None, &cert, None).unwrap();
    assert_eq!(again.classification, up.classification);
    assert_eq!(fs::metadata(&log).unwrap().len(), len);
    assert_eq!(summary(&log).unwrap().count("SIEVE_EMPTY"), 1);

    let mut other = c2_affine_empty();
    other.curve = HyperellipticCurve::from_ints(&[1, 0, 0, 0, 0, 0, 1]).unwrap();
    other.target = TargetSpec::Elliptic { curve: EllipticCurve::from_ints(0, 0, 1), morphism: MorphismSpec::square_x() };
    other.subgroup.free = vec![GroupElement::Ec(int_point(2, 3))];
    let cert1 = sieve_run(&other).unwrap();
    assert!(matches!(
        attach_sieve_result(&log, None, &cert1, None),
        Err(CensusError::ClassificationConflict { .. })
    ));
    assert!(matches!(
        attach_sieve_result(&log, Some("1,0,0,0,0,0,1"), &cert, None),
        Err(CensusError::CurveMismatch(_))
    ));
}

#[test]
fn search_nonempty_implies_els_on_corpus() {
    for f in small_family().members().iter().step_by(7) {
        let Ok(c) = HyperellipticCurve::from_ints(f) else { continue };
        if !point_search(&c, 12).is_empty() {
            assert!(is_els(&c).unwrap().els, "{f:?}");
        }
    }
}
