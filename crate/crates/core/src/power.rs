//! Power automata with state-words packed into integers.
//!
//! A word `u₁⋯uₘ` over a `p`-state machine is packed as the base-`p` number
//! with `u₁` as its most significant digit, so packed order is lexicographic
//! order.

use crate::machine::{MealyMachine, StateWord};
use crate::BudgetExceeded;

/// Size limits for power constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerBudget {
    /// Largest power whose transition table is materialized.
    pub max_states: usize,
    /// Largest number of words a traversal may visit without a table.
    pub max_traversal: usize,
}

impl Default for PowerBudget {
    fn default() -> Self {
        PowerBudget {
            max_states: 1 << 20,
            max_traversal: 1 << 26,
        }
    }
}

/// `base^exp`, or `None` on overflow.
pub fn checked_size(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub(crate) fn require(base: usize, exp: usize, budget: usize) -> Result<usize, BudgetExceeded> {
    match checked_size(base, exp) {
        Some(n) if n <= budget => Ok(n),
        other => Err(BudgetExceeded {
            required: other.map_or(u128::MAX, |n| n as u128),
            budget,
        }),
    }
}

/// Materialized transition and output tables of `Aᵐ`, word-major.
#[derive(Clone, Debug)]
pub struct PowerTable {
    base: usize,
    exponent: usize,
    letters: usize,
    delta: Vec<u32>,
    out: Vec<u32>,
}

impl PowerTable {
    /// The first power, which is the machine itself.
    pub fn first(machine: &MealyMachine) -> Self {
        PowerTable {
            base: machine.n_states(),
            exponent: 1,
            letters: machine.n_letters(),
            delta: machine.delta_table().to_vec(),
            out: machine.rho_table().to_vec(),
        }
    }

    /// Builds `Aᵐ` by repeated extension.
    pub fn build(
        machine: &MealyMachine,
        m: usize,
        budget: &PowerBudget,
    ) -> Result<Self, BudgetExceeded> {
        assert!(m >= 1);
        require(machine.n_states(), m, budget.max_states)?;
        let mut table = Self::first(machine);
        while table.exponent < m {
            table = table.extend(machine);
        }
        Ok(table)
    }

    /// `Aᵐ⁺¹` from `Aᵐ`, using `δ_i(u·z) = δ_i(u)·δ_{ρ_u(i)}(z)` and
    /// `ρ_{u·z}(i) = ρ_z(ρ_u(i))`.
    pub fn extend(&self, machine: &MealyMachine) -> Self {
        let p = self.base;
        let l = self.letters;
        let words = self.n_words();
        let mut delta = vec![0u32; words * p * l];
        let mut out = vec![0u32; words * p * l];
        for u in 0..words {
            for z in 0..p as u32 {
                let w = u * p + z as usize;
                for i in 0..l {
                    let k = u * l + i;
                    let (du, o) = (self.delta[k], self.out[k]);
                    let (dz, o2) = machine.step(z, o);
                    delta[w * l + i] = du * p as u32 + dz;
                    out[w * l + i] = o2;
                }
            }
        }
        PowerTable {
            base: p,
            exponent: self.exponent + 1,
            letters: l,
            delta,
            out,
        }
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn n_words(&self) -> usize {
        self.delta.len() / self.letters
    }

    pub fn n_letters(&self) -> usize {
        self.letters
    }

    /// `(δ_i(w), ρ_w(i))` for the packed word `w`.
    #[inline]
    pub fn step(&self, w: usize, i: usize) -> (u32, u32) {
        let k = w * self.letters + i;
        (self.delta[k], self.out[k])
    }

    pub fn delta(&self) -> &[u32] {
        &self.delta
    }

    pub fn out(&self) -> &[u32] {
        &self.out
    }

    pub fn pack(&self, word: &[u32]) -> u64 {
        pack(self.base, word)
    }

    pub fn unpack(&self, w: u64) -> Vec<u32> {
        unpack(self.base, self.exponent, w)
    }

    pub(crate) fn into_tables(self) -> (Vec<u32>, Vec<u32>) {
        (self.delta, self.out)
    }
}

pub fn pack(base: usize, word: &[u32]) -> u64 {
    word.iter()
        .fold(0u64, |acc, &x| acc * base as u64 + x as u64)
}

pub fn unpack(base: usize, len: usize, mut w: u64) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (w % base as u64) as u32;
        w /= base as u64;
    }
    out
}

/// `(δ_i(w), ρ_w(i))` for a packed word of length `len`, computed without a
/// table. Digits are processed most significant first.
pub fn step_packed(machine: &MealyMachine, len: usize, w: u64, i: u32) -> (u64, u32) {
    let p = machine.n_states() as u64;
    let mut place = 1u64;
    for _ in 1..len {
        place *= p;
    }
    let mut rest = w;
    let mut letter = i;
    let mut next = 0u64;
    for _ in 0..len {
        let digit = (rest / place) as u32;
        rest %= place;
        let (d, o) = machine.step(digit, letter);
        next = next * p + d as u64;
        letter = o;
        place = (place / p).max(1);
    }
    (next, letter)
}

/// All words of a given length in lexicographic order.
pub fn words_of_length(alphabet: usize, len: usize) -> impl Iterator<Item = StateWord> {
    let total = checked_size(alphabet, len).expect("word count overflows");
    (0..total as u64).map(move |w| StateWord(unpack(alphabet, len, w)))
}
