//! Nerode equivalence and minimization.
//!
//! Two states are equivalent when they have the same production function
//! `ρ_x` on all of `Σ*`. The classes are computed by partition refinement
//! seeded with the output rows.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{LetterWord, MealyMachine};
use crate::power::{PowerBudget, PowerTable};
use crate::refine::{canonical_numbering, labels_from_keys, refine};
use crate::BudgetExceeded;

/// A partition of a stateset, blocks numbered by their smallest state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    block: Vec<u32>,
    blocks: usize,
    /// Refinement depth `k` for `≡_k`, `None` for the fixed point.
    depth: Option<usize>,
}

impl Partition {
    pub(crate) fn from_labels(labels: &[u32], depth: Option<usize>) -> Self {
        let (block, blocks) = canonical_numbering(labels);
        Partition {
            block,
            blocks,
            depth,
        }
    }

    pub fn block_of(&self, x: u32) -> u32 {
        self.block[x as usize]
    }

    pub fn blocks(&self) -> &[u32] {
        &self.block
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks
    }

    pub fn n_elements(&self) -> usize {
        self.block.len()
    }

    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    /// Whether every block is a singleton.
    pub fn is_discrete(&self) -> bool {
        self.blocks == self.block.len()
    }

    /// Members of each block, in increasing order.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.block.iter().enumerate() {
            out[b as usize].push(x as u32);
        }
        out
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut image = vec![u32::MAX; self.blocks];
        for (x, &b) in self.block.iter().enumerate() {
            let c = coarser.block[x];
            let slot = &mut image[b as usize];
            if *slot == u32::MAX {
                *slot = c;
            } else if *slot != c {
                return false;
            }
        }
        true
    }

    /// Same blocks, ignoring the recorded depth.
    pub fn same_blocks(&self, other: &Partition) -> bool {
        self.block == other.block
    }
}

fn rho_labels(machine: &MealyMachine) -> Vec<u32> {
    labels_from_keys((0..machine.n_states() as u32).map(|x| machine.rho_row(x)))
}

/// The partition `≡_k`: `≡₀` groups equal output rows and `≡_{k+1}` further
/// splits by the `≡_k` blocks of the successors.
pub fn k_classes(machine: &MealyMachine, k: usize) -> Partition {
    let n = machine.n_states();
    let mut labels = rho_labels(machine);
    let mut count = Partition::from_labels(&labels, None).n_blocks();
    for _ in 0..k {
        let next = labels_from_keys((0..n as u32).map(|x| {
            let mut key = Vec::with_capacity(machine.n_letters() + 1);
            key.push(labels[x as usize]);
            key.extend(machine.successors(x).iter().map(|&y| labels[y as usize]));
            key
        }));
        let next_count = Partition::from_labels(&next, None).n_blocks();
        labels = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    Partition::from_labels(&labels, Some(k))
}

/// The Nerode partition, by Hopcroft refinement.
pub fn nerode_partition(machine: &MealyMachine) -> Partition {
    let (block, blocks) = refine(
        machine.n_states(),
        machine.n_letters(),
        machine.delta_table(),
        &rho_labels(machine),
    );
    Partition {
        block,
        blocks,
        depth: None,
    }
}

pub fn is_minimal(machine: &MealyMachine) -> bool {
    nerode_partition(machine).is_discrete()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("states {first} and {second} share a block but disagree on letter {letter}")]
pub struct QuotientError {
    pub first: u32,
    pub second: u32,
    pub letter: u32,
}

/// Quotient of `machine` by a congruence. Every block member must agree on
/// outputs and on the blocks of its successors. Each block keeps the name of
/// its smallest state.
pub fn quotient(
    machine: &MealyMachine,
    partition: &Partition,
) -> Result<MealyMachine, QuotientError> {
    let l = machine.n_letters();
    let k = partition.n_blocks();
    let mut rep = vec![u32::MAX; k];
    let mut delta = vec![0u32; k * l];
    let mut rho = vec![0u32; k * l];
    for x in 0..machine.n_states() as u32 {
        let b = partition.block_of(x) as usize;
        if rep[b] == u32::MAX {
            rep[b] = x;
            for i in 0..l as u32 {
                let (y, o) = machine.step(x, i);
                delta[b * l + i as usize] = partition.block_of(y);
                rho[b * l + i as usize] = o;
            }
            continue;
        }
        for i in 0..l as u32 {
            let (y, o) = machine.step(x, i);
            if delta[b * l + i as usize] != partition.block_of(y) || rho[b * l + i as usize] != o {
                return Err(QuotientError {
                    first: rep[b],
                    second: x,
                    letter: i,
                });
            }
        }
    }
    let names = rep
        .iter()
        .map(|&x| machine.state_name(x).to_string())
        .collect();
    Ok(MealyMachine::from_raw(
        names,
        machine.letter_names().to_vec(),
        delta,
        rho,
    ))
}

/// The minimization: the quotient by Nerode equivalence.
pub fn minimize(machine: &MealyMachine) -> MealyMachine {
    let partition = nerode_partition(machine);
    if partition.is_discrete() {
        return machine.clone();
    }
    quotient(machine, &partition).expect("the Nerode partition is a congruence")
}

/// Outcome of [`words_equivalent`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EquivalenceVerdict {
    /// Both words land in this block of the minimized union of powers.
    Equivalent { block: u32 },
    /// `ρ_u(word) ≠ ρ_v(word)`, and no shorter word separates them.
    Separated { word: LetterWord },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent { .. })
    }
}

/// Decides whether `ρ_u = ρ_v` on all of `Σ*`.
///
/// Both powers are placed side by side as one machine and refined together;
/// a separating word is the shortest one found by search over state pairs.
pub fn words_equivalent(
    machine: &MealyMachine,
    u: &[u32],
    v: &[u32],
    budget: &PowerBudget,
) -> Result<EquivalenceVerdict, BudgetExceeded> {
    assert!(!u.is_empty() && !v.is_empty(), "words must be nonempty");
    let l = machine.n_letters();
    let tu = PowerTable::build(machine, u.len(), budget)?;
    let tv = if v.len() == u.len() {
        None
    } else {
        Some(PowerTable::build(machine, v.len(), budget)?)
    };
    let nu = tu.n_words();
    let total = nu + tv.as_ref().map_or(0, PowerTable::n_words);
    if total > budget.max_states {
        return Err(BudgetExceeded {
            required: total as u128,
            budget: budget.max_states,
        });
    }

    let mut succ = Vec::with_capacity(total * l);
    let mut out = Vec::with_capacity(total * l);
    succ.extend_from_slice(tu.delta());
    out.extend_from_slice(tu.out());
    if let Some(tv) = &tv {
        succ.extend(tv.delta().iter().map(|&w| w + nu as u32));
        out.extend_from_slice(tv.out());
    }
    let labels = labels_from_keys(out.chunks(l));
    let (blocks, _) = refine(total, l, &succ, &labels);

    let pu = tu.pack(u) as usize;
    let pv = match &tv {
        Some(tv) => nu + tv.pack(v) as usize,
        None => tu.pack(v) as usize,
    };
    if blocks[pu] == blocks[pv] {
        return Ok(EquivalenceVerdict::Equivalent { block: blocks[pu] });
    }
    let word = separating_word(l, &succ, &out, pu, pv).expect("inequivalent states are separated");
    Ok(EquivalenceVerdict::Separated { word })
}

/// Shortest input on which nodes `p` and `q` of a node-major table produce
/// different outputs, ties broken by letter order.
pub(crate) fn separating_word(
    l: usize,
    succ: &[u32],
    out: &[u32],
    p: usize,
    q: usize,
) -> Option<LetterWord> {
    let mut parent: std::collections::HashMap<(usize, usize), (usize, usize, u32)> =
        Default::default();
    let mut queue = VecDeque::from([(p, q)]);
    parent.insert((p, q), (usize::MAX, usize::MAX, 0));
    while let Some((a, b)) = queue.pop_front() {
        for i in 0..l {
            if out[a * l + i] != out[b * l + i] {
                let mut word = vec![i as u32];
                let mut cur = (a, b);
                while cur != (p, q) {
                    let (pa, pb, letter) = parent[&cur];
                    word.push(letter);
                    cur = (pa, pb);
                }
                word.reverse();
                return Some(LetterWord(word));
            }
            let next = (succ[a * l + i] as usize, succ[b * l + i] as usize);
            if !parent.contains_key(&next) {
                parent.insert(next, (a, b, i as u32));
                queue.push_back(next);
            }
        }
    }
    None
}
