//! Mealy automata and the semigroups they generate.
//!
//! The crate covers the machine model ([`MealyMachine`]), Nerode
//! minimization, md-reduction, connectivity of power automata, portraits,
//! bounded semigroup enumeration with tensor closure, decision procedures for
//! two-state and two-letter machines, and an enumeration harness for whole
//! families of machines.

pub mod connectivity;
pub mod decide;
pub mod dot;
pub mod format;
pub mod harness;
pub mod machine;
pub mod mdreduce;
pub mod minimize;
pub mod portrait;
pub mod power;
mod refine;
pub mod semigroup;
mod unionfind;
pub mod zoo;

use thiserror::Error;

pub use connectivity::{
    components, connection_degree, power_components, ComponentReport, ConnectionDegree,
};
pub use decide::Verdict;
pub use format::{parse_document, parse_machine, FormatError, MachineDocument};
pub use machine::{LetterWord, MachineError, MachineParts, MealyMachine, StateWord};
pub use mdreduce::{is_md_trivial, md_reduce, md_reduce_two_state, ReductionTrace};
pub use minimize::{
    k_classes, minimize, nerode_partition, words_equivalent, EquivalenceVerdict, Partition,
};
pub use portrait::{Perm, Portrait};
pub use power::PowerBudget;
pub use semigroup::{
    enumerate_semigroup, semigroup_order, tensor_closure, SemigroupBudget, SemigroupTable,
};

/// A construction would exceed its size budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("budget exceeded: {required} required, budget is {budget}")]
pub struct BudgetExceeded {
    /// Required size, saturated at `u128::MAX` on overflow.
    pub required: u128,
    pub budget: usize,
}
