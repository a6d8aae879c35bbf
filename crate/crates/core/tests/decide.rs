//! Decision procedures against brute-force oracles.

mod common;

use std::collections::HashSet;

use common::{act, move_word, order_at_depth, two_state_ir, words};
use mealy::connectivity::{connection_degree, ConnectionDegree, DEFAULT_MAX_POWER};
use mealy::decide::{
    check_certificate, decide, decide_finite_group_2letter, decide_finite_group_2state,
    decide_free_semigroup_2state, free_relation_search, verify_prime_class_sizes, RelationSearch,
    Verdict,
};
use mealy::{zoo, MealyMachine};

/// All nonempty state words up to `max_len` act differently on `Σ^depth`.
fn words_pairwise_distinct(m: &MealyMachine, max_len: usize, depth: usize) -> bool {
    let inputs = words(m.n_letters(), depth);
    let mut seen = HashSet::new();
    (1..=max_len)
        .flat_map(|len| words(m.n_states(), len))
        .all(|u| seen.insert(inputs.iter().map(|s| act(m, &u, s)).collect::<Vec<_>>()))
}

#[test]
fn finite_group_decision_matches_enumeration_growth() {
    for m in two_state_ir(2) {
        let v = decide_finite_group_2state(&m).unwrap();
        check_certificate(&m, &v).unwrap();
        let (o6, o9) = (
            order_at_depth(&m, 6, 1 << 20),
            order_at_depth(&m, 9, 1 << 20),
        );
        match v {
            Verdict::FiniteGroup { .. } => assert_eq!(o6, o9, "{m:?}"),
            Verdict::InfiniteGroup { .. } => assert!(o9 > o6, "{m:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn cyc_freeness_matches_relation_search() {
    let cyc = zoo::cyc();
    let v = decide_free_semigroup_2state(&cyc).unwrap();
    let search = free_relation_search(&cyc, 8, 10).unwrap();
    let no_relation = words_pairwise_distinct(&cyc, 8, 10);
    match v {
        Verdict::FreeRank2 { .. } => {
            assert_eq!(search, RelationSearch::NoRelationUpTo(8));
            assert!(no_relation);
        }
        Verdict::FiniteSemigroup { .. } => assert!(matches!(search, RelationSearch::Relation(..))),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn relations_found_are_real() {
    let swap = zoo::swap();
    let RelationSearch::Relation(u, v) = free_relation_search(&swap, 2, 4).unwrap() else {
        panic!("swap satisfies relations");
    };
    for s in (1..=5).flat_map(|len| words(2, len)) {
        assert_eq!(act(&swap, &u.0, &s), act(&swap, &v.0, &s));
    }
    assert!(words_pairwise_distinct(&zoo::dual_aleshin(), 6, 8));
}

/// In a machine of finite connection degree `n`, two letter words that
/// agree on one state word of length `n` agree on all state words.
#[test]
fn agreement_on_one_word_spreads() {
    for m in two_state_ir(2).into_iter().chain(two_state_ir(3)) {
        let ConnectionDegree::Finite(n) = connection_degree(&m, DEFAULT_MAX_POWER).unwrap() else {
            continue;
        };
        if n == 0 {
            continue;
        }
        let letter_words: Vec<Vec<u32>> =
            (1..=3).flat_map(|len| words(m.n_letters(), len)).collect();
        let witnesses = words(2, n);
        let probes: Vec<Vec<u32>> = (1..=n + 2).flat_map(|len| words(2, len)).collect();
        for (a, s) in letter_words.iter().enumerate() {
            for t in &letter_words[a + 1..] {
                let Some(u) = witnesses
                    .iter()
                    .find(|u| move_word(&m, u, s) == move_word(&m, u, t))
                else {
                    continue;
                };
                for w in &probes {
                    assert_eq!(
                        move_word(&m, w, s),
                        move_word(&m, w, t),
                        "{m:?}: {s:?} {t:?} agree on {u:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn two_letter_group_verdicts() {
    for (m, finite) in [
        (zoo::aleshin(), false),
        (zoo::six(), false),
        (zoo::swap().dual(), true),
    ] {
        let v = decide_finite_group_2letter(&m).unwrap();
        check_certificate(&m, &v).unwrap();
        assert_eq!(v.is_finite(), Some(finite), "{m:?}");
        assert_eq!(
            decide(&m, DEFAULT_MAX_POWER).unwrap().is_finite(),
            Some(finite)
        );
    }
}

#[test]
fn six_grows_without_bound() {
    let six = zoo::six();
    let orders: Vec<usize> = (1..=4)
        .map(|d| order_at_depth(&six, d, 1 << 20).unwrap())
        .collect();
    assert!(orders.windows(2).all(|w| w[0] < w[1]), "{orders:?}");
}

#[test]
fn dual_aleshin_power_classes_are_singletons() {
    let m = zoo::dual_aleshin();
    let r = verify_prime_class_sizes(&m, 3).unwrap();
    assert_eq!(r.histogram, vec![(1, 8)]);
    // Oracle: the eight words act differently on Σ^4.
    assert_eq!(
        words(2, 3)
            .iter()
            .map(|u| words(3, 4)
                .iter()
                .map(|s| act(&m, u, s))
                .collect::<Vec<_>>())
            .collect::<HashSet<_>>()
            .len(),
        8
    );
}

#[test]
fn outside_decidable_shapes() {
    let constant = MealyMachine::from_tables(3, 3, vec![0; 9], vec![0; 9]).unwrap();
    for m in [zoo::triv(), constant] {
        assert!(decide(&m, DEFAULT_MAX_POWER).is_err(), "{m:?}");
    }
}
