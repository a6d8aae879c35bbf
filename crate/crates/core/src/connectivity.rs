//! Connected components of power automata and the connection degree.
//!
//! The underlying graph of `Aᵐ` has an edge `u → δ_i(u)` for every word `u`
//! and letter `i`. Components are weak components, found by union-find over
//! packed words. Small powers are materialized incrementally; larger ones are
//! stepped on the fly.

use serde::Serialize;
use thiserror::Error;

use crate::machine::{MealyMachine, StateWord};
use crate::power::{checked_size, step_packed, unpack, PowerBudget, PowerTable};
use crate::unionfind::UnionFind;
use crate::BudgetExceeded;

/// Default exponent cap for [`connection_degree`].
pub const DEFAULT_MAX_POWER: usize = 16;

/// Component decomposition of `Aᵐ`. Components are numbered by their
/// lexicographically smallest word, which is also their representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub exponent: usize,
    pub components: usize,
    pub sizes: Vec<usize>,
    pub representatives: Vec<StateWord>,
    pub connected: bool,
}

impl ComponentReport {
    fn from_labels(base: usize, exponent: usize, labels: &[u32]) -> Self {
        let count = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; count];
        let mut representatives = vec![None; count];
        for (w, &c) in labels.iter().enumerate() {
            sizes[c as usize] += 1;
            if representatives[c as usize].is_none() {
                representatives[c as usize] = Some(StateWord(unpack(base, exponent, w as u64)));
            }
        }
        ComponentReport {
            exponent,
            components: count,
            sizes,
            representatives: representatives.into_iter().map(Option::unwrap).collect(),
            connected: count == 1,
        }
    }

    /// Distinct component sizes with their multiplicities, ascending.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for s in sizes {
            match out.last_mut() {
                Some((v, c)) if *v == s => *c += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }
}

fn table_labels(table: &PowerTable) -> Vec<u32> {
    let l = table.n_letters();
    let mut uf = UnionFind::new(table.n_words());
    for (k, &d) in table.delta().iter().enumerate() {
        uf.union((k / l) as u32, d);
    }
    uf.labels()
}

fn implicit_labels(machine: &MealyMachine, m: usize, words: usize) -> Vec<u32> {
    let mut uf = UnionFind::new(words);
    for w in 0..words as u64 {
        for i in 0..machine.n_letters() as u32 {
            let (d, _) = step_packed(machine, m, w, i);
            uf.union(w as u32, d as u32);
        }
    }
    uf.labels()
}

fn require_traversal(
    machine: &MealyMachine,
    m: usize,
    budget: &PowerBudget,
) -> Result<usize, BudgetExceeded> {
    let limit = budget.max_traversal.min(u32::MAX as usize);
    match checked_size(machine.n_states(), m) {
        Some(n) if n <= limit => Ok(n),
        other => Err(BudgetExceeded {
            required: other.map_or(u128::MAX, |n| n as u128),
            budget: limit,
        }),
    }
}

/// Component id of every packed word of `Aᵐ`.
pub fn component_labels(
    machine: &MealyMachine,
    m: usize,
    budget: &PowerBudget,
) -> Result<Vec<u32>, BudgetExceeded> {
    assert!(m >= 1, "power exponent must be positive");
    let words = require_traversal(machine, m, budget)?;
    if words <= budget.max_states {
        Ok(table_labels(&PowerTable::build(machine, m, budget)?))
    } else {
        Ok(implicit_labels(machine, m, words))
    }
}

/// Weak components of the machine itself.
pub fn components(machine: &MealyMachine) -> ComponentReport {
    let labels = table_labels(&PowerTable::first(machine));
    ComponentReport::from_labels(machine.n_states(), 1, &labels)
}

/// Weak components of `Aᵐ`.
pub fn power_components(
    machine: &MealyMachine,
    m: usize,
    budget: &PowerBudget,
) -> Result<ComponentReport, BudgetExceeded> {
    let labels = component_labels(machine, m, budget)?;
    Ok(ComponentReport::from_labels(machine.n_states(), m, &labels))
}

/// Strongly connected components of the machine's transition graph,
/// numbered by smallest state.
pub fn strong_components(machine: &MealyMachine) -> (Vec<u32>, usize) {
    let n = machine.n_states();
    let mut reverse = vec![Vec::new(); n];
    for x in 0..n as u32 {
        for &y in machine.successors(x) {
            reverse[y as usize].push(x);
        }
    }
    // Kosaraju: finishing order on the graph, then sweeps on the reverse.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n as u32 {
        if seen[root as usize] {
            continue;
        }
        seen[root as usize] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (x, ref mut next)) = stack.last_mut() {
            let succ = machine.successors(x);
            if *next < succ.len() {
                let y = succ[*next];
                *next += 1;
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push((y, 0));
                }
            } else {
                order.push(x);
                stack.pop();
            }
        }
    }
    let mut comp = vec![u32::MAX; n];
    let mut count = 0u32;
    for &root in order.iter().rev() {
        if comp[root as usize] != u32::MAX {
            continue;
        }
        comp[root as usize] = count;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &y in &reverse[x as usize] {
                if comp[y as usize] == u32::MAX {
                    comp[y as usize] = count;
                    stack.push(y);
                }
            }
        }
        count += 1;
    }
    let (labels, count) = crate::refine::canonical_numbering(&comp);
    (labels, count)
}

/// Whether every weak component is strongly connected.
pub fn components_strongly_connected(machine: &MealyMachine) -> bool {
    strong_components(machine).1 == components(machine).components
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConnectionDegree {
    Finite(usize),
    /// Every power up to this exponent is connected.
    AtLeast(usize),
}

/// A connection degree with the reports that certify it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub degree: ConnectionDegree,
    /// Report for the last connected power tested, if any.
    pub connected: Option<ComponentReport>,
    /// Report for the first disconnected power, if any.
    pub disconnected: Option<ComponentReport>,
}

/// Scans `A¹, A², …, A^max_power` for the first disconnected power.
pub fn degree_report(
    machine: &MealyMachine,
    max_power: usize,
    budget: &PowerBudget,
) -> Result<DegreeReport, BudgetExceeded> {
    assert!(max_power >= 1, "max_power must be positive");
    let base = machine.n_states();
    let mut table = Some(PowerTable::first(machine));
    let mut last_connected = None;
    for m in 1..=max_power {
        let labels = match table.take() {
            Some(t) if t.exponent() == m => {
                let labels = table_labels(&t);
                let next_fits = checked_size(base, m + 1).is_some_and(|s| s <= budget.max_states);
                if next_fits && m < max_power {
                    table = Some(t.extend(machine));
                }
                labels
            }
            _ => {
                let words = require_traversal(machine, m, budget)?;
                implicit_labels(machine, m, words)
            }
        };
        let report = ComponentReport::from_labels(base, m, &labels);
        if !report.connected {
            return Ok(DegreeReport {
                degree: ConnectionDegree::Finite(m - 1),
                connected: last_connected,
                disconnected: Some(report),
            });
        }
        last_connected = Some(report);
    }
    Ok(DegreeReport {
        degree: ConnectionDegree::AtLeast(max_power),
        connected: last_connected,
        disconnected: None,
    })
}

pub fn connection_degree(
    machine: &MealyMachine,
    max_power: usize,
) -> Result<ConnectionDegree, BudgetExceeded> {
    degree_report(machine, max_power, &PowerBudget::default()).map(|r| r.degree)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrowthError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{} components of power {exponent} do not have size {expected}", offending.len())]
    Violations {
        exponent: usize,
        expected: usize,
        offending: Vec<(StateWord, usize)>,
    },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

fn require_two_state_reversible(machine: &MealyMachine) -> Result<(), GrowthError> {
    if machine.n_states() != 2 {
        return Err(GrowthError::Precondition(format!(
            "expected 2 states, got {}",
            machine.n_states()
        )));
    }
    if !machine.is_reversible() {
        return Err(GrowthError::Precondition(
            "machine is not reversible".into(),
        ));
    }
    Ok(())
}

/// For a two-state reversible machine of finite connection degree `n ≤ m`,
/// checks that every component of `Aᵐ` has exactly `2ⁿ` words. Returns the
/// size histogram.
pub fn verify_component_growth(
    machine: &MealyMachine,
    m: usize,
    budget: &PowerBudget,
) -> Result<Vec<(usize, usize)>, GrowthError> {
    require_two_state_reversible(machine)?;
    let n = match degree_report(machine, m + 1, budget)?.degree {
        ConnectionDegree::Finite(n) => n,
        ConnectionDegree::AtLeast(_) => {
            return Err(GrowthError::Precondition(format!(
                "connection degree exceeds {m}"
            )))
        }
    };
    let report = power_components(machine, m, budget)?;
    let expected = 1usize << n;
    let offending: Vec<(StateWord, usize)> = report
        .sizes
        .iter()
        .zip(&report.representatives)
        .filter(|(&s, _)| s != expected)
        .map(|(&s, r)| (r.clone(), s))
        .collect();
    if !offending.is_empty() {
        return Err(GrowthError::Violations {
            exponent: m,
            expected,
            offending,
        });
    }
    Ok(report.size_histogram())
}

/// For a two-state reversible machine, checks for every `u ∈ Aᵐ` and state
/// `x` that the component of `ux` in `Aᵐ⁺¹` has the size of the component
/// `C` of `u`, or twice that, the latter exactly when it also contains `uy`
/// for the other state `y`.
pub fn verify_component_doubling(
    machine: &MealyMachine,
    m: usize,
    budget: &PowerBudget,
) -> Result<(), GrowthError> {
    require_two_state_reversible(machine)?;
    let small = component_labels(machine, m, budget)?;
    let large = component_labels(machine, m + 1, budget)?;
    let count = |labels: &[u32]| {
        let mut sizes = vec![0usize; labels.len()];
        for &c in labels {
            sizes[c as usize] += 1;
        }
        sizes
    };
    let (small_sizes, large_sizes) = (count(&small), count(&large));
    for u in 0..small.len() {
        let c = small_sizes[small[u] as usize];
        for x in 0..2 {
            let w = 2 * u + x;
            let size = large_sizes[large[w] as usize];
            let joined = large[w] == large[2 * u + 1 - x];
            let expected = if joined { 2 * c } else { c };
            if size != expected {
                return Err(GrowthError::Violations {
                    exponent: m + 1,
                    expected,
                    offending: vec![(StateWord(unpack(2, m + 1, w as u64)), size)],
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn fixtures_are_connected() {
        let r = components(&zoo::aleshin());
        assert_eq!((r.components, r.sizes.clone()), (1, vec![3]));
        assert!(components(&zoo::triv()).connected);
        let two = zoo::triv().disjoint_union(&zoo::triv());
        assert_eq!(components(&two).components, 2);
    }

    #[test]
    fn baby_aleshin_square_splits() {
        let b = PowerBudget::default();
        let m = zoo::baby_aleshin();
        assert!(components(&m).connected);
        // {xx, yy, zz} is closed under both letters.
        let r2 = power_components(&m, 2, &b).unwrap();
        assert_eq!(r2.sizes, vec![3, 6]);
        assert_eq!(power_components(&m, 3, &b).unwrap().components, 4);
        assert_eq!(
            connection_degree(&m, 5).unwrap(),
            ConnectionDegree::Finite(1)
        );
    }

    #[test]
    fn swap_square_splits_in_two() {
        let r = power_components(&zoo::swap(), 2, &PowerBudget::default()).unwrap();
        assert_eq!(r.sizes, vec![2, 2]);
        let reps: Vec<Vec<u32>> = r.representatives.iter().map(|w| w.0.clone()).collect();
        // {xx, yy} and {xy, yx}
        assert_eq!(reps, vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(
            connection_degree(&zoo::swap(), 5).unwrap(),
            ConnectionDegree::Finite(1)
        );
    }

    #[test]
    fn disconnected_machine_has_degree_zero() {
        let two = zoo::swap().disjoint_union(&zoo::swap());
        assert_eq!(
            connection_degree(&two, 4).unwrap(),
            ConnectionDegree::Finite(0)
        );
    }

    #[test]
    fn dual_aleshin_stays_connected() {
        assert_eq!(
            connection_degree(&zoo::dual_aleshin(), 12).unwrap(),
            ConnectionDegree::AtLeast(12)
        );
    }

    #[test]
    fn implicit_path_agrees_with_tables() {
        let tight = PowerBudget {
            max_states: 4,
            max_traversal: 1 << 20,
        };
        let m = zoo::dual_aleshin();
        for e in 1..=6 {
            let a = component_labels(&m, e, &tight).unwrap();
            let b = component_labels(&m, e, &PowerBudget::default()).unwrap();
            assert_eq!(a, b);
        }
        let r = degree_report(&zoo::dual_aleshin(), 7, &tight).unwrap();
        assert_eq!(r.degree, ConnectionDegree::AtLeast(7));
        let r = degree_report(&zoo::baby_aleshin(), 5, &tight).unwrap();
        assert_eq!(r.degree, ConnectionDegree::Finite(1));
        assert_eq!(r.disconnected.unwrap().exponent, 2);
    }

    #[test]
    fn swap_component_growth() {
        let b = PowerBudget::default();
        assert_eq!(
            verify_component_growth(&zoo::swap(), 3, &b).unwrap(),
            vec![(2, 4)]
        );
        assert_eq!(
            verify_component_growth(&zoo::swap(), 1, &b).unwrap(),
            vec![(2, 1)]
        );
        assert!(matches!(
            verify_component_growth(&zoo::baby_aleshin(), 3, &b),
            Err(GrowthError::Precondition(_))
        ));
        for m in 1..5 {
            verify_component_doubling(&zoo::swap(), m, &b).unwrap();
            verify_component_doubling(&zoo::dual_aleshin(), m, &b).unwrap();
        }
    }

    #[test]
    fn reversible_components_are_strong() {
        for m in [zoo::aleshin(), zoo::six(), zoo::swap(), zoo::baby_aleshin()] {
            assert!(components_strongly_connected(&m));
        }
        let chain = MealyMachine::from_tables(2, 1, vec![1, 1], vec![0, 0]).unwrap();
        assert!(!components_strongly_connected(&chain));
    }
}
