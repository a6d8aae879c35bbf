//! md-reduction: minimize the machine and its dual alternately until both
//! are minimal.

use serde::Serialize;
use thiserror::Error;

use crate::machine::MealyMachine;
use crate::minimize::{is_minimal, minimize};

/// Which side of the dual pair a step minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// Minimize the machine itself.
    Primal,
    /// Minimize the dual, then dualize back.
    Dual,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

/// One productive reduction step. Sizes are `(|A|, |Σ|)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub side: Side,
    pub before: (usize, usize),
    pub after: (usize, usize),
    pub machine: MealyMachine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub initial: (usize, usize),
    pub steps: Vec<ReductionStep>,
    pub result: MealyMachine,
}

impl ReductionTrace {
    /// Whether the reduction ended at the one-state one-letter machine.
    pub fn is_trivial(&self) -> bool {
        self.result.n_states() == 1 && self.result.n_letters() == 1
    }

    /// Whether the final machine and its dual are both minimal.
    pub fn is_reduced(&self) -> bool {
        is_minimal(&self.result) && is_minimal(&self.result.dual())
    }
}

fn size(m: &MealyMachine) -> (usize, usize) {
    (m.n_states(), m.n_letters())
}

fn reduce_side(m: &MealyMachine, side: Side) -> MealyMachine {
    match side {
        Side::Primal => minimize(m),
        Side::Dual => minimize(&m.dual()).dual(),
    }
}

/// Runs the given schedule of sides; returns the trace of productive steps.
fn run(machine: &MealyMachine, mut next_side: impl FnMut(bool) -> Option<Side>) -> ReductionTrace {
    let mut current = machine.clone();
    let mut steps = Vec::new();
    let mut productive = false;
    while let Some(side) = next_side(productive) {
        let reduced = reduce_side(&current, side);
        productive = size(&reduced) != size(&current);
        if productive {
            steps.push(ReductionStep {
                side,
                before: size(&current),
                after: size(&reduced),
                machine: reduced.clone(),
            });
            current = reduced;
        }
    }
    ReductionTrace {
        initial: size(machine),
        steps,
        result: current,
    }
}

/// md-reduction starting with the primal side.
pub fn md_reduce(machine: &MealyMachine) -> ReductionTrace {
    md_reduce_with(machine, Side::Primal)
}

/// md-reduction starting with the given side. The loop stops once both
/// sides have been minimized without change in a row.
pub fn md_reduce_with(machine: &MealyMachine, first: Side) -> ReductionTrace {
    let mut side = first.other();
    let mut idle = 0;
    let mut started = false;
    run(machine, move |productive| {
        if started {
            // A productive step leaves its own side minimal.
            idle = if productive { 1 } else { idle + 1 };
            if idle >= 2 {
                return None;
            }
        }
        started = true;
        side = side.other();
        Some(side)
    })
}

pub fn is_md_trivial(machine: &MealyMachine) -> bool {
    md_reduce(machine).is_trivial()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("expected a machine with 2 states, got {0}")]
pub struct NotTwoState(pub usize);

/// The fixed schedule primal, dual, primal, dual for two-state machines.
pub fn md_reduce_two_state(machine: &MealyMachine) -> Result<ReductionTrace, NotTwoState> {
    if machine.n_states() != 2 {
        return Err(NotTwoState(machine.n_states()));
    }
    let mut schedule = [Side::Primal, Side::Dual, Side::Primal, Side::Dual].into_iter();
    Ok(run(machine, move |_| schedule.next()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn triv_is_already_reduced() {
        let t = md_reduce(&zoo::triv());
        assert!(t.steps.is_empty());
        assert!(t.is_trivial());
    }

    #[test]
    fn swap_reduces_in_two_steps() {
        let t = md_reduce(&zoo::swap());
        assert!(t.is_trivial());
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.steps[0].side, Side::Primal);
        assert_eq!(t.steps[0].after, (1, 2));
        assert_eq!(t.steps[1].after, (1, 1));
        assert!(md_reduce_two_state(&zoo::swap()).unwrap().is_trivial());
    }

    #[test]
    fn six_and_dual_aleshin_are_not_trivial() {
        let t = md_reduce(&zoo::six());
        assert!(!t.is_trivial());
        assert!(t.is_reduced());
        assert!(!is_md_trivial(&zoo::dual_aleshin()));
    }

    #[test]
    fn two_state_schedule_matches_general_loop() {
        let m = zoo::cyc();
        let a = md_reduce(&m).result;
        let b = md_reduce_two_state(&m).unwrap().result;
        assert!(a.same_tables(&b));
        assert!(matches!(
            md_reduce_two_state(&zoo::aleshin()),
            Err(NotTwoState(3))
        ));
    }

    #[test]
    fn steps_shrink() {
        for m in [zoo::six(), zoo::aleshin(), zoo::cyc(), zoo::swap()] {
            let t = md_reduce(&m);
            let mut prev = t.initial.0 * t.initial.1;
            for s in &t.steps {
                assert!(s.after.0 * s.after.1 < prev);
                prev = s.after.0 * s.after.1;
            }
        }
    }
}
