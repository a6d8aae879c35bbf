//! Exhaustive checks over all two-state invertible reversible machines
//! with two and three letters.

mod common;

use common::{first_disconnected_power, order_at_depth, power_component_sizes, two_state_ir};
use mealy::connectivity::{
    connection_degree, verify_component_growth, ConnectionDegree, DEFAULT_MAX_POWER,
};
use mealy::decide::{
    check_certificate, decide_two_state_reversible, free_relation_search, RelationSearch, Verdict,
};
use mealy::minimize::nerode_partition;
use mealy::semigroup::{
    enumerate_semigroup, is_tensor_closed, tensor_closure, verify_complete_components,
    SemigroupBudget,
};
use mealy::{is_md_trivial, MealyMachine, PowerBudget};

struct Row {
    machine: MealyMachine,
    md_trivial: bool,
    degree: ConnectionDegree,
    finite: bool,
}

fn census(l: usize) -> Vec<Row> {
    two_state_ir(l)
        .into_iter()
        .map(|machine| {
            let md_trivial = is_md_trivial(&machine);
            let degree = connection_degree(&machine, DEFAULT_MAX_POWER).unwrap();
            let finite = enumerate_semigroup(&machine, &SemigroupBudget::default()).is_finite();
            Row {
                machine,
                md_trivial,
                degree,
                finite,
            }
        })
        .collect()
}

#[test]
fn three_procedures_agree() {
    for l in [2, 3] {
        let rows = census(l);
        assert_eq!(rows.len(), if l == 2 { 16 } else { 288 });
        for r in &rows {
            let disconnected = matches!(r.degree, ConnectionDegree::Finite(_));
            assert_eq!(r.md_trivial, disconnected, "{:?}", r.machine);
            assert_eq!(r.md_trivial, r.finite, "{:?}", r.machine);
        }
    }
}

#[test]
fn verdicts_are_certified() {
    for m in two_state_ir(2).into_iter().chain(two_state_ir(3)) {
        let v = decide_two_state_reversible(&m, DEFAULT_MAX_POWER).unwrap();
        check_certificate(&m, &v).unwrap();
        match v {
            Verdict::FiniteSemigroup { evidence, .. } => {
                if let mealy::decide::Evidence::DisconnectedPower { exponent } = evidence {
                    assert_eq!(first_disconnected_power(&m, exponent), Some(exponent));
                }
            }
            Verdict::FreeRank2 { .. } => {
                assert_eq!(
                    free_relation_search(&m, 6, 8).unwrap(),
                    RelationSearch::NoRelationUpTo(6)
                );
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }
}

#[test]
fn finite_orders_match_brute_force() {
    for m in two_state_ir(2).into_iter().chain(two_state_ir(3)) {
        let t = enumerate_semigroup(&m, &SemigroupBudget::default());
        if !t.is_finite() {
            continue;
        }
        let d = t.certificate_depth.unwrap();
        assert_eq!(order_at_depth(&m, d, 100_000), Some(t.order()), "{m:?}");
        assert_eq!(order_at_depth(&m, d + 2, 100_000), Some(t.order()), "{m:?}");
    }
}

#[test]
fn components_have_size_two_to_the_degree() {
    let budget = PowerBudget::default();
    for l in [2, 3] {
        for r in census(l) {
            let ConnectionDegree::Finite(n) = r.degree else {
                continue;
            };
            for m in n.max(1)..=n + 3 {
                let sizes = power_component_sizes(&r.machine, m);
                assert!(
                    sizes.iter().all(|&s| s == 1 << n),
                    "{:?} at power {m}: {sizes:?}",
                    r.machine
                );
                let hist = verify_component_growth(&r.machine, m, &budget).unwrap();
                assert_eq!(hist, vec![(1 << n, (1 << m) >> n)]);
            }
        }
    }
}

#[test]
fn tensor_closure_laws() {
    let b = SemigroupBudget::default();
    for r in census(2) {
        if !r.finite {
            continue;
        }
        let m = &r.machine;
        let c = tensor_closure(m, &b).unwrap();
        assert!(is_tensor_closed(&c, &b).unwrap());
        assert!(nerode_partition(&c.dual()).is_discrete());
        // Both duals generate the same semigroup.
        let order = |x: &MealyMachine| enumerate_semigroup(&x.dual(), &b).order();
        assert_eq!(order(m), order(&c));
        assert!(enumerate_semigroup(&c, &b).is_finite());
        if c.is_invertible() && c.is_reversible() {
            for e in 1..=3 {
                verify_complete_components(&c, e, &b).unwrap();
            }
            if let ConnectionDegree::Finite(_) = connection_degree(&c, DEFAULT_MAX_POWER).unwrap() {
                assert_eq!(nerode_partition(&c).n_blocks(), 1, "{c:?}");
            }
        }
        // md-triviality passes from the closure back to the machine.
        if is_md_trivial(&c) {
            assert!(is_md_trivial(m));
        }
    }
}
