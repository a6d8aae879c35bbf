//! Named example machines, parsed from the files in `fixtures/`.

use crate::format::parse_machine;
use crate::machine::MealyMachine;

fn load(text: &str) -> MealyMachine {
    parse_machine(text).expect("bundled fixture parses")
}

/// One state, one letter, identity.
pub fn triv() -> MealyMachine {
    load(include_str!("../../../fixtures/triv.mealy"))
}

/// The Aleshin machine: 3 states, 2 letters.
pub fn aleshin() -> MealyMachine {
    load(include_str!("../../../fixtures/aleshin.mealy"))
}

/// The dual of [`aleshin`]: 2 states `a, b` over the letters `x, y, z`.
pub fn dual_aleshin() -> MealyMachine {
    load(include_str!("../../../fixtures/dual_aleshin.mealy"))
}

/// The Baby-Aleshin machine: 3 states, 2 letters, connection degree 2.
pub fn baby_aleshin() -> MealyMachine {
    load(include_str!("../../../fixtures/baby_aleshin.mealy"))
}

/// A bireversible machine with 6 states over the letters `i, j`.
pub fn six() -> MealyMachine {
    load(include_str!("../../../fixtures/six.mealy"))
}

/// Two states swapped by every letter, identity outputs.
pub fn swap() -> MealyMachine {
    load(include_str!("../../../fixtures/swap.mealy"))
}

/// `δ_a` swaps the states, `δ_b` fixes them; `ρ_x` swaps the letters, `ρ_y`
/// fixes them.
pub fn cyc() -> MealyMachine {
    load(include_str!("../../../fixtures/cyc.mealy"))
}
