//! Spread constructions against direct subspace computations.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spreadlab::closure::{admissible_pairs, subplane_membership, verify_subplane_in_spread};
use spreadlab::fieldreduction::{desarguesian_spread, subplane_v};
use spreadlab::gf::FieldTower;
use spreadlab::projgeom::{standard_element, Subspace};
use spreadlab::spreads::{construct_s_r, construct_t3, construct_u_r, t3_designated, u_r_designated, Desarguesian, Spread};
use spreadlab::spreadsets::{dickson_spread_set, random_spread_set, SpreadSet, DEFAULT_SEARCH_BUDGET};
use spreadlab::Error;

/// Every nonzero vector lies in exactly one element.
fn partitions(s: &Spread) -> bool {
    let f = s.field();
    let total = (s.q() as usize).pow(s.dim() as u32);
    let mut hits = vec![0u32; total];
    for e in s.elements() {
        for v in e.vectors(f) {
            let idx = v.iter().rev().fold(0usize, |acc, &c| acc * s.q() as usize + c as usize);
            hits[idx] += 1;
        }
    }
    hits[0] as usize == s.len() && hits[1..].iter().all(|&h| h == 1)
}

/// `E` is normal iff every `<E, F>` contains exactly `q^n + 1` elements.
fn normal_by_spans(s: &Spread, e: &Subspace) -> bool {
    let f = s.field();
    let want = (s.q() as usize).pow(s.n() as u32) + 1;
    s.elements()
        .iter()
        .filter(|x| *x != e)
        .all(|x| {
            let span = e.span(x, f);
            s.elements().iter().filter(|g| span.contains(g, f)).count() == want
        })
}

#[test]
fn desarguesian_pg5_3() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let s = desarguesian_spread(&t, 3).unwrap();
    assert_eq!(s.len(), 91);
    assert!(partitions(&s));
    assert!(s.validate().valid);
    let normals = s.normal_indices();
    assert_eq!(normals.len(), 91);
    for i in [0, 17, 45, 90] {
        assert!(normal_by_spans(&s, &s.elements()[i]));
    }
    assert_eq!(s.max_normal_general_position().size, 4);
    assert_eq!(s.is_desarguesian(), Desarguesian::Yes);
}

#[test]
fn dickson_s3_normals_match_span_counts() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let f = t.base();
    let s = construct_s_r(f, &dickson_spread_set(&t).unwrap(), 3).unwrap();
    assert!(partitions(&s));
    let by_spans: Vec<usize> = (0..s.len()).filter(|&i| normal_by_spans(&s, &s.elements()[i])).collect();
    assert_eq!(s.normal_indices(), by_spans);
    let standard: Vec<usize> = (0..3).map(|i| s.position(&standard_element(f, 3, 2, i)).unwrap()).collect();
    let mut sorted = standard.clone();
    sorted.sort();
    assert_eq!(by_spans, sorted);
    assert_eq!(s.max_normal_general_position().size, 3);
    assert_eq!(s.is_desarguesian(), Desarguesian::No);
}

#[test]
fn t3_and_u3_designated_elements_are_normal() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let f = t.base();
    let field = SpreadSet::field(&t);
    let d = dickson_spread_set(&t).unwrap();
    let t3 = construct_t3(f, &field, &d).unwrap();
    assert!(partitions(&t3));
    for e in t3_designated(f, 2) {
        assert!(normal_by_spans(&t3, &e));
    }
    let u3 = construct_u_r(f, &field, &[d.clone(), d]).unwrap();
    assert!(partitions(&u3));
    for e in u_r_designated(f, 3, 2) {
        assert!(normal_by_spans(&u3, &e));
    }
}

#[test]
fn json_round_trip() {
    let t = FieldTower::for_q(2, 2).unwrap();
    let s = desarguesian_spread(&t, 3).unwrap();
    let text = serde_json::to_string(&s.to_json()).unwrap();
    let back = Spread::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, s);
    assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
}

#[test]
fn damaged_spread_is_caught() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let s = desarguesian_spread(&t, 3).unwrap();
    let mut els = s.elements().to_vec();
    let gone = els.remove(10);
    let damaged = Spread::new(s.field(), 3, 2, els, "damaged");
    let check = damaged.validate();
    assert!(!check.valid);
    assert!(check.uncovered_point.is_some());
    assert!(!partitions(&damaged));
    let _ = gone;
}

#[test]
fn subplane_membership_reports_a_missing_element() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let f = t.base();
    let s = desarguesian_spread(&t, 3).unwrap();
    let [s1, s2, s3] = t3_designated(f, 2);
    let &(a, b) = admissible_pairs(&s, &s1, &s2, &s3).first().unwrap();
    let (r1, r2) = (s.elements()[a].clone(), s.elements()[b].clone());
    let full = verify_subplane_in_spread(&s, [&s1, &s2, &s3], &r1, &r2).unwrap();
    assert!(full.holds);
    assert_eq!(full.checked, 9);

    let pi0 = s1.span(&s2, f);
    let v = subplane_v(f, &s1, &s2, &r1, &r2, 3).unwrap();
    let victim = v.iter().find(|x| !pi0.contains(x, f) && **x != r1 && **x != r2).unwrap().clone();
    let els: Vec<Subspace> = s.elements().iter().filter(|x| **x != victim).cloned().collect();
    let damaged = Spread::new(f, 3, 2, els, "damaged");
    let rep = subplane_membership(&damaged, &s1, &s2, &r1, &r2).unwrap();
    assert!(!rep.holds);
    assert_eq!(rep.witness, Some(victim.to_json(3)));
}

#[test]
fn subplane_hypotheses_are_enforced() {
    let t = FieldTower::for_q(3, 2).unwrap();
    let f = t.base();
    let s = construct_s_r(f, &dickson_spread_set(&t).unwrap(), 3).unwrap();
    let [s1, s2, s3] = t3_designated(f, 2);
    // (I, I, 0) is not normal in S_3 of a proper nearfield
    let r = s.elements()[0].clone();
    let err = verify_subplane_in_spread(&s, [&s1, &s2, &s3], &r, &r).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn u3_with_random_sets_is_a_spread(seed in any::<u64>()) {
        let t = FieldTower::for_q(3, 2).unwrap();
        let f = t.base();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m1 = random_spread_set(f, 2, false, &mut rng, DEFAULT_SEARCH_BUDGET).unwrap();
        let m2 = random_spread_set(f, 2, false, &mut rng, DEFAULT_SEARCH_BUDGET).unwrap();
        let s = construct_u_r(f, &SpreadSet::field(&t), &[m1, m2]).unwrap();
        prop_assert!(partitions(&s));
        for e in u_r_designated(f, 3, 2) {
            prop_assert!(s.is_normal_element(&e).unwrap());
        }
    }

    #[test]
    fn s3_of_random_quasifield_sets_is_a_spread(seed in any::<u64>()) {
        let t = FieldTower::for_q(3, 2).unwrap();
        let f = t.base();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_spread_set(f, 2, true, &mut rng, DEFAULT_SEARCH_BUDGET).unwrap();
        let s = construct_s_r(f, &m, 3).unwrap();
        prop_assert!(partitions(&s));
        prop_assert_eq!(s.len(), 91);
    }
}
