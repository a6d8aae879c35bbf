//! The Mealy machine data model.
//!
//! A machine is a quadruple `(A, Σ, δ, ρ)`: a finite stateset `A`, an alphabet
//! `Σ`, transition functions `δ_i: A → A` for each letter `i` and output
//! functions `ρ_x: Σ → Σ` for each state `x`. States and letters are dense
//! indices; names live in a sidecar table and are only used for display and
//! serialization.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::{PowerBudget, PowerTable};
use crate::BudgetExceeded;

/// A word over the stateset, `u = u₁⋯uₙ`, with `u₁` acting first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateWord(pub Vec<u32>);

/// A word over the alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LetterWord(pub Vec<u32>);

macro_rules! word_impls {
    ($name:ident) => {
        impl Deref for $name {
            type Target = [u32];
            fn deref(&self) -> &[u32] {
                &self.0
            }
        }

        impl From<Vec<u32>> for $name {
            fn from(v: Vec<u32>) -> Self {
                $name(v)
            }
        }

        impl From<&[u32]> for $name {
            fn from(v: &[u32]) -> Self {
                $name(v.to_vec())
            }
        }

        impl<const N: usize> From<[u32; N]> for $name {
            fn from(v: [u32; N]) -> Self {
                $name(v.to_vec())
            }
        }

        impl FromIterator<u32> for $name {
            fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
                $name(iter.into_iter().collect())
            }
        }
    };
}

word_impls!(StateWord);
word_impls!(LetterWord);

/// Violations reported by [`validate`], and by the name-based helpers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("a machine needs at least one state")]
    NoStates,
    #[error("a machine needs at least one letter")]
    NoLetters,
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("duplicate letter name {0:?}")]
    DuplicateLetter(String),
    #[error("delta has {found} columns, expected one per letter ({expected})")]
    DeltaColumns { expected: usize, found: usize },
    #[error("delta column of letter {letter} has {found} entries, expected {expected}")]
    DeltaColumnLength {
        letter: usize,
        expected: usize,
        found: usize,
    },
    #[error("rho has {found} rows, expected one per state ({expected})")]
    RhoRows { expected: usize, found: usize },
    #[error("rho row of state {state} has {found} entries, expected {expected}")]
    RhoRowLength {
        state: usize,
        expected: usize,
        found: usize,
    },
    #[error("delta[{letter}][{state}] = {value} is out of range: the machine has {bound} states")]
    DeltaOutOfRange {
        letter: usize,
        state: usize,
        value: u32,
        bound: usize,
    },
    #[error("rho[{state}][{letter}] = {value} is out of range: the machine has {bound} letters")]
    RhoOutOfRange {
        state: usize,
        letter: usize,
        value: u32,
        bound: usize,
    },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
}

/// Unvalidated machine tables, as produced by parsers and generators.
///
/// `delta[i][x]` is `δ_i(x)` and `rho[x][i]` is `ρ_x(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineParts {
    pub states: Vec<String>,
    pub letters: Vec<String>,
    pub delta: Vec<Vec<u32>>,
    pub rho: Vec<Vec<u32>>,
}

/// Checks every structural invariant of a machine and reports the first one
/// that fails, with its table coordinate.
pub fn validate(parts: &MachineParts) -> Result<(), MachineError> {
    let n = parts.states.len();
    let l = parts.letters.len();
    if n == 0 {
        return Err(MachineError::NoStates);
    }
    if l == 0 {
        return Err(MachineError::NoLetters);
    }
    let mut seen = HashSet::new();
    for s in &parts.states {
        if !seen.insert(s.as_str()) {
            return Err(MachineError::DuplicateState(s.clone()));
        }
    }
    seen.clear();
    for a in &parts.letters {
        if !seen.insert(a.as_str()) {
            return Err(MachineError::DuplicateLetter(a.clone()));
        }
    }
    if parts.delta.len() != l {
        return Err(MachineError::DeltaColumns {
            expected: l,
            found: parts.delta.len(),
        });
    }
    for (letter, column) in parts.delta.iter().enumerate() {
        if column.len() != n {
            return Err(MachineError::DeltaColumnLength {
                letter,
                expected: n,
                found: column.len(),
            });
        }
        if let Some((state, &value)) = column.iter().enumerate().find(|(_, &v)| v as usize >= n) {
            return Err(MachineError::DeltaOutOfRange {
                letter,
                state,
                value,
                bound: n,
            });
        }
    }
    if parts.rho.len() != n {
        return Err(MachineError::RhoRows {
            expected: n,
            found: parts.rho.len(),
        });
    }
    for (state, row) in parts.rho.iter().enumerate() {
        if row.len() != l {
            return Err(MachineError::RhoRowLength {
                state,
                expected: l,
                found: row.len(),
            });
        }
        if let Some((letter, &value)) = row.iter().enumerate().find(|(_, &v)| v as usize >= l) {
            return Err(MachineError::RhoOutOfRange {
                state,
                letter,
                value,
                bound: l,
            });
        }
    }
    Ok(())
}

/// A validated, immutable Mealy machine.
///
/// Both tables are stored state-major: entry `x * |Σ| + i` holds `δ_i(x)` in
/// `delta` and `ρ_x(i)` in `rho`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MealyMachine {
    states: Vec<String>,
    letters: Vec<String>,
    delta: Vec<u32>,
    rho: Vec<u32>,
}

const STATE_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
const LETTER_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Default state names: `x, y, z, u, v, w`, then `s6, s7, …`.
pub fn default_state_names(n: usize) -> Vec<String> {
    if n <= STATE_NAMES.len() {
        STATE_NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|i| format!("s{i}")).collect()
    }
}

/// Default letter names: `a` through `h`, then `l8, l9, …`.
pub fn default_letter_names(n: usize) -> Vec<String> {
    if n <= LETTER_NAMES.len() {
        LETTER_NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|i| format!("l{i}")).collect()
    }
}

/// Joins names into a single word name: plain concatenation when every name
/// is one character long, dot-separated otherwise.
pub(crate) fn join_names<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let names: Vec<&str> = names.into_iter().collect();
    if names.iter().all(|n| n.chars().count() == 1) {
        names.concat()
    } else {
        names.join(".")
    }
}

fn is_permutation(values: impl Iterator<Item = u32>, size: usize) -> bool {
    let mut seen = vec![false; size];
    for v in values {
        let v = v as usize;
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

impl MealyMachine {
    /// Validates `parts` and builds a machine from them.
    pub fn new(parts: MachineParts) -> Result<Self, MachineError> {
        validate(&parts)?;
        let n = parts.states.len();
        let l = parts.letters.len();
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for x in 0..n {
            for i in 0..l {
                delta[x * l + i] = parts.delta[i][x];
                rho[x * l + i] = parts.rho[x][i];
            }
        }
        Ok(MealyMachine {
            states: parts.states,
            letters: parts.letters,
            delta,
            rho,
        })
    }

    /// Builds a machine with default names from state-major tables.
    pub fn from_tables(
        n_states: usize,
        n_letters: usize,
        delta: Vec<u32>,
        rho: Vec<u32>,
    ) -> Result<Self, MachineError> {
        Self::with_names(
            default_state_names(n_states),
            default_letter_names(n_letters),
            delta,
            rho,
        )
    }

    /// Builds a machine from state-major tables and explicit names.
    pub fn with_names(
        states: Vec<String>,
        letters: Vec<String>,
        delta: Vec<u32>,
        rho: Vec<u32>,
    ) -> Result<Self, MachineError> {
        let n = states.len();
        let l = letters.len();
        if n > 0 && l > 0 {
            if delta.len() != n * l {
                return Err(MachineError::DeltaColumnLength {
                    letter: 0,
                    expected: n,
                    found: delta.len() / l,
                });
            }
            if rho.len() != n * l {
                return Err(MachineError::RhoRows {
                    expected: n,
                    found: rho.len() / l,
                });
            }
        }
        validate(&MachineParts {
            states: states.clone(),
            letters: letters.clone(),
            delta: (0..l)
                .map(|i| (0..n).map(|x| delta[x * l + i]).collect())
                .collect(),
            rho: rho.chunks(l.max(1)).map(<[u32]>::to_vec).collect(),
        })?;
        Ok(MealyMachine {
            states,
            letters,
            delta,
            rho,
        })
    }

    /// Internal constructor for tables produced by trusted transforms.
    pub(crate) fn from_raw(
        states: Vec<String>,
        letters: Vec<String>,
        delta: Vec<u32>,
        rho: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(delta.len(), states.len() * letters.len());
        debug_assert_eq!(rho.len(), states.len() * letters.len());
        debug_assert!(delta.iter().all(|&v| (v as usize) < states.len()));
        debug_assert!(rho.iter().all(|&v| (v as usize) < letters.len()));
        MealyMachine {
            states,
            letters,
            delta,
            rho,
        }
    }

    /// The one-state one-letter machine.
    pub fn trivial() -> Self {
        Self::from_raw(vec!["x".into()], vec!["a".into()], vec![0], vec![0])
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_letters(&self) -> usize {
        self.letters.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn letter_names(&self) -> &[String] {
        &self.letters
    }

    pub fn state_name(&self, x: u32) -> &str {
        &self.states[x as usize]
    }

    pub fn letter_name(&self, i: u32) -> &str {
        &self.letters[i as usize]
    }

    pub fn state_index(&self, name: &str) -> Option<u32> {
        self.states.iter().position(|s| s == name).map(|p| p as u32)
    }

    pub fn letter_index(&self, name: &str) -> Option<u32> {
        self.letters
            .iter()
            .position(|s| s == name)
            .map(|p| p as u32)
    }

    /// `δ_letter(state)`.
    #[inline]
    pub fn delta(&self, letter: u32, state: u32) -> u32 {
        self.delta[state as usize * self.letters.len() + letter as usize]
    }

    /// `ρ_state(letter)`.
    #[inline]
    pub fn rho(&self, state: u32, letter: u32) -> u32 {
        self.rho[state as usize * self.letters.len() + letter as usize]
    }

    /// Successor states of `state`, one per letter.
    pub fn successors(&self, state: u32) -> &[u32] {
        let l = self.letters.len();
        &self.delta[state as usize * l..(state as usize + 1) * l]
    }

    /// The output row `ρ_state` as a map on letters.
    pub fn rho_row(&self, state: u32) -> &[u32] {
        let l = self.letters.len();
        &self.rho[state as usize * l..(state as usize + 1) * l]
    }

    /// State-major transition table.
    pub fn delta_table(&self) -> &[u32] {
        &self.delta
    }

    /// State-major output table.
    pub fn rho_table(&self) -> &[u32] {
        &self.rho
    }

    /// Whether every output row `ρ_x` is a permutation of the alphabet.
    pub fn is_invertible(&self) -> bool {
        let l = self.n_letters();
        (0..self.n_states() as u32).all(|x| is_permutation(self.rho_row(x).iter().copied(), l))
    }

    /// Whether every transition column `δ_i` is a permutation of the states.
    pub fn is_reversible(&self) -> bool {
        let n = self.n_states();
        (0..self.n_letters() as u32)
            .all(|i| is_permutation((0..n as u32).map(|x| self.delta(i, x)), n))
    }

    /// The inverse machine: same states, transitions `x --ρ_x(i)|i--> δ_i(x)`.
    /// `None` when the machine is not invertible.
    pub fn inverse(&self) -> Option<MealyMachine> {
        if !self.is_invertible() {
            return None;
        }
        let n = self.n_states();
        let l = self.n_letters();
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for x in 0..n {
            for i in 0..l {
                let o = self.rho[x * l + i] as usize;
                delta[x * l + o] = self.delta[x * l + i];
                rho[x * l + o] = i as u32;
            }
        }
        Some(Self::from_raw(
            self.states.clone(),
            self.letters.clone(),
            delta,
            rho,
        ))
    }

    /// Invertible, reversible, and with a reversible inverse.
    pub fn is_bireversible(&self) -> bool {
        self.is_reversible() && self.inverse().is_some_and(|inv| inv.is_reversible())
    }

    /// The dual machine `(Σ, A, ρ, δ)`: letters become states and vice versa.
    pub fn dual(&self) -> MealyMachine {
        let n = self.n_states();
        let l = self.n_letters();
        // dual state i, dual letter x: δ'_x(i) = ρ_x(i), ρ'_i(x) = δ_i(x)
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for x in 0..n {
            for i in 0..l {
                delta[i * n + x] = self.rho[x * l + i];
                rho[i * n + x] = self.delta[x * l + i];
            }
        }
        Self::from_raw(self.letters.clone(), self.states.clone(), delta, rho)
    }

    /// The `n`-th power: states are the words of `Aⁿ` in lexicographic order,
    /// the alphabet is unchanged.
    pub fn power(&self, n: usize, budget: &PowerBudget) -> Result<MealyMachine, BudgetExceeded> {
        assert!(n >= 1, "power exponent must be positive");
        if n == 1 {
            return Ok(self.clone());
        }
        let table = PowerTable::build(self, n, budget)?;
        let names = (0..table.n_words())
            .map(|w| {
                let word = table.unpack(w as u64);
                join_names(word.iter().map(|&x| self.state_name(x)))
            })
            .collect();
        let (delta, rho) = table.into_tables();
        Ok(Self::from_raw(names, self.letters.clone(), delta, rho))
    }

    /// One step of the production: state `x` reads `i`, returns `(δ_i(x), ρ_x(i))`.
    #[inline]
    pub fn step(&self, x: u32, i: u32) -> (u32, u32) {
        let k = x as usize * self.letters.len() + i as usize;
        (self.delta[k], self.rho[k])
    }

    /// `ρ_u(s)` where `ρ_u = ρ_{uₙ} ∘ ⋯ ∘ ρ_{u₁}`.
    pub fn rho_apply(&self, u: &[u32], s: &[u32]) -> LetterWord {
        let mut out = s.to_vec();
        for &x in u {
            let mut state = x;
            for letter in out.iter_mut() {
                let (next, o) = self.step(state, *letter);
                *letter = o;
                state = next;
            }
        }
        LetterWord(out)
    }

    /// `δ_s(u)` where `δ_s = δ_{sₙ} ∘ ⋯ ∘ δ_{s₁}`, the dual production.
    pub fn delta_apply(&self, s: &[u32], u: &[u32]) -> StateWord {
        let mut out = u.to_vec();
        for &i in s {
            let mut letter = i;
            for state in out.iter_mut() {
                let (next, o) = self.step(*state, letter);
                *state = next;
                letter = o;
            }
        }
        StateWord(out)
    }

    /// Disjoint union: the states of `other` follow those of `self`.
    /// Both machines must share the same alphabet size; letter names come
    /// from `self`.
    pub fn disjoint_union(&self, other: &MealyMachine) -> MealyMachine {
        assert_eq!(
            self.n_letters(),
            other.n_letters(),
            "alphabet size mismatch"
        );
        let offset = self.n_states() as u32;
        let mut states = self.states.clone();
        let taken: HashSet<String> = states.iter().cloned().collect();
        for s in &other.states {
            let mut name = s.clone();
            while taken.contains(&name) || states.contains(&name) {
                name.push('\'');
            }
            states.push(name);
        }
        let mut delta = self.delta.clone();
        delta.extend(other.delta.iter().map(|&x| x + offset));
        let mut rho = self.rho.clone();
        rho.extend_from_slice(&other.rho);
        Self::from_raw(states, self.letters.clone(), delta, rho)
    }

    /// Renames states and letters: state `x` becomes `state_perm[x]` and
    /// letter `i` becomes `letter_perm[i]`. Names follow their owners.
    pub fn rename(&self, state_perm: &[u32], letter_perm: &[u32]) -> MealyMachine {
        let n = self.n_states();
        let l = self.n_letters();
        assert_eq!(state_perm.len(), n);
        assert_eq!(letter_perm.len(), l);
        let mut states = vec![String::new(); n];
        let mut letters = vec![String::new(); l];
        for x in 0..n {
            states[state_perm[x] as usize] = self.states[x].clone();
        }
        for i in 0..l {
            letters[letter_perm[i] as usize] = self.letters[i].clone();
        }
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for x in 0..n {
            for i in 0..l {
                let nx = state_perm[x] as usize;
                let ni = letter_perm[i] as usize;
                delta[nx * l + ni] = state_perm[self.delta[x * l + i] as usize];
                rho[nx * l + ni] = letter_perm[self.rho[x * l + i] as usize];
            }
        }
        Self::from_raw(states, letters, delta, rho)
    }

    /// Same machine with default names.
    pub fn with_default_names(&self) -> MealyMachine {
        Self::from_raw(
            default_state_names(self.n_states()),
            default_letter_names(self.n_letters()),
            self.delta.clone(),
            self.rho.clone(),
        )
    }

    /// Same tables, given names.
    pub fn renamed_labels(
        &self,
        states: Vec<String>,
        letters: Vec<String>,
    ) -> Result<MealyMachine, MachineError> {
        Self::with_names(states, letters, self.delta.clone(), self.rho.clone())
    }

    /// Whether both machines have identical tables, ignoring names.
    pub fn same_tables(&self, other: &MealyMachine) -> bool {
        self.n_states() == other.n_states()
            && self.n_letters() == other.n_letters()
            && self.delta == other.delta
            && self.rho == other.rho
    }

    /// Parses a word of state names. Names are separated by whitespace,
    /// dots or commas; an unseparated token is split greedily into the
    /// longest matching names.
    pub fn parse_state_word(&self, text: &str) -> Result<StateWord, MachineError> {
        tokenize(text, &self.states)
            .map(StateWord)
            .map_err(MachineError::UnknownState)
    }

    /// Parses a word of letter names, with the same rules as
    /// [`parse_state_word`](Self::parse_state_word).
    pub fn parse_letter_word(&self, text: &str) -> Result<LetterWord, MachineError> {
        tokenize(text, &self.letters)
            .map(LetterWord)
            .map_err(MachineError::UnknownLetter)
    }

    pub fn format_state_word(&self, word: &[u32]) -> String {
        join_names(word.iter().map(|&x| self.state_name(x)))
    }

    pub fn format_letter_word(&self, word: &[u32]) -> String {
        join_names(word.iter().map(|&i| self.letter_name(i)))
    }
}

fn tokenize(text: &str, names: &[String]) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for token in text.split(|c: char| c.is_whitespace() || c == '.' || c == ',') {
        if token.is_empty() {
            continue;
        }
        if let Some(p) = names.iter().position(|n| n == token) {
            out.push(p as u32);
            continue;
        }
        let mut rest = token;
        while !rest.is_empty() {
            let best = names
                .iter()
                .enumerate()
                .filter(|(_, n)| !n.is_empty() && rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((p, n)) => {
                    out.push(p as u32);
                    rest = &rest[n.len()..];
                }
                None => return Err(rest.to_string()),
            }
        }
    }
    Ok(out)
}

impl fmt::Debug for MealyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MealyMachine {{ states: {:?}, letters: {:?}, transitions: [",
            self.states, self.letters
        )?;
        let l = self.n_letters();
        for x in 0..self.n_states() {
            for i in 0..l {
                if x + i > 0 {
                    write!(f, ", ")?;
                }
                write!(
                    f,
                    "{} {} -> {} {}",
                    self.states[x],
                    self.letters[i],
                    self.states[self.delta[x * l + i] as usize],
                    self.letters[self.rho[x * l + i] as usize]
                )?;
            }
        }
        write!(f, "] }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn sw(m: &MealyMachine, s: &str) -> StateWord {
        m.parse_state_word(s).unwrap()
    }

    fn lw(m: &MealyMachine, s: &str) -> LetterWord {
        m.parse_letter_word(s).unwrap()
    }

    #[test]
    fn validate_accepts_fixtures() {
        for m in [
            zoo::triv(),
            zoo::aleshin(),
            zoo::baby_aleshin(),
            zoo::six(),
            zoo::swap(),
            zoo::cyc(),
        ] {
            let parts = MachineParts {
                states: m.state_names().to_vec(),
                letters: m.letter_names().to_vec(),
                delta: (0..m.n_letters() as u32)
                    .map(|i| (0..m.n_states() as u32).map(|x| m.delta(i, x)).collect())
                    .collect(),
                rho: (0..m.n_states() as u32)
                    .map(|x| m.rho_row(x).to_vec())
                    .collect(),
            };
            assert_eq!(validate(&parts), Ok(()));
        }
    }

    #[test]
    fn validate_reports_out_of_range_delta() {
        let parts = MachineParts {
            states: vec!["x".into(), "y".into(), "z".into()],
            letters: vec!["a".into()],
            delta: vec![vec![0, 3, 1]],
            rho: vec![vec![0], vec![0], vec![0]],
        };
        assert_eq!(
            validate(&parts),
            Err(MachineError::DeltaOutOfRange {
                letter: 0,
                state: 1,
                value: 3,
                bound: 3
            })
        );
    }

    #[test]
    fn validate_reports_shape_and_names() {
        let mut parts = MachineParts {
            states: vec!["x".into(), "x".into()],
            letters: vec!["a".into()],
            delta: vec![vec![0, 1]],
            rho: vec![vec![0], vec![0]],
        };
        assert_eq!(
            validate(&parts),
            Err(MachineError::DuplicateState("x".into()))
        );
        parts.states[1] = "y".into();
        parts.rho.pop();
        assert!(matches!(
            validate(&parts),
            Err(MachineError::RhoRows { .. })
        ));
        parts.states.clear();
        assert_eq!(validate(&parts), Err(MachineError::NoStates));
    }

    #[test]
    fn invertibility() {
        assert!(zoo::aleshin().is_invertible());
        assert!(zoo::baby_aleshin().is_invertible());
        let m = MealyMachine::from_tables(1, 2, vec![0, 0], vec![0, 0]).unwrap();
        assert!(!m.is_invertible());
    }

    #[test]
    fn reversibility() {
        let a = zoo::aleshin();
        assert!(a.is_reversible());
        let (x, y, z) = (0, 1, 2);
        assert_eq!([a.delta(0, x), a.delta(0, y), a.delta(0, z)], [z, y, x]);
        assert_eq!([a.delta(1, x), a.delta(1, y), a.delta(1, z)], [y, z, x]);
        assert!(zoo::six().is_reversible());
        let m = MealyMachine::from_tables(2, 1, vec![0, 0], vec![0, 0]).unwrap();
        assert!(!m.is_reversible());
    }

    #[test]
    fn bireversibility() {
        assert!(zoo::six().is_bireversible());
        assert!(zoo::triv().is_bireversible());
        let m = MealyMachine::from_tables(1, 2, vec![0, 0], vec![0, 0]).unwrap();
        assert!(!m.is_bireversible());
    }

    #[test]
    fn dual_of_aleshin() {
        let d = zoo::aleshin().dual();
        assert_eq!(d.state_names(), ["a", "b"]);
        assert_eq!(d.letter_names(), ["x", "y", "z"]);
        // a --x|z--> b
        assert_eq!(d.step(0, 0), (1, 2));
        assert!(zoo::triv().dual().same_tables(&zoo::triv()));
        assert!(d.is_invertible() && d.is_reversible());
    }

    #[test]
    fn power_of_aleshin() {
        let a = zoo::aleshin();
        let p = a.power(2, &PowerBudget::default()).unwrap();
        assert_eq!(p.n_states(), 9);
        let xz = p.state_index("xz").unwrap();
        let (next, out) = p.step(xz, 0);
        assert_eq!(p.state_name(next), "zx");
        assert_eq!(p.letter_name(out), "b");
        assert_eq!(a.power(1, &PowerBudget::default()).unwrap(), a);
        let t = zoo::triv().power(3, &PowerBudget::default()).unwrap();
        assert_eq!(t.n_states(), 1);
    }

    #[test]
    fn power_budget_is_enforced() {
        let budget = PowerBudget {
            max_states: 8,
            ..PowerBudget::default()
        };
        let err = zoo::aleshin().power(2, &budget).unwrap_err();
        assert_eq!(err.required, 9);
    }

    #[test]
    fn rho_apply_examples() {
        let a = zoo::aleshin();
        assert_eq!(a.rho_apply(&sw(&a, "x"), &lw(&a, "ab")), lw(&a, "bb"));
        assert_eq!(a.rho_apply(&[], &lw(&a, "abba")), lw(&a, "abba"));
        assert_eq!(a.rho_apply(&sw(&a, "xy"), &lw(&a, "a")), lw(&a, "a"));
        assert_eq!(a.rho_apply(&sw(&a, "x"), &[]), LetterWord::default());
    }

    #[test]
    fn delta_apply_examples() {
        let a = zoo::aleshin();
        assert_eq!(a.delta_apply(&lw(&a, "a"), &sw(&a, "xyz")), sw(&a, "zzx"));
        assert_eq!(a.delta_apply(&[], &sw(&a, "xyz")), sw(&a, "xyz"));
        let d = a.dual();
        let u = sw(&a, "xzy");
        let s = lw(&a, "abba");
        assert_eq!(d.delta_apply(&u, &s).0, a.rho_apply(&u, &s).0);
    }

    #[test]
    fn inverse_undoes_production() {
        let m = zoo::six();
        let inv = m.inverse().unwrap();
        let s = m.parse_letter_word("ijjiij").unwrap();
        for x in 0..m.n_states() as u32 {
            let t = m.rho_apply(&[x], &s);
            assert_eq!(inv.rho_apply(&[x], &t), s);
        }
    }

    #[test]
    fn word_parsing() {
        let s = zoo::six();
        assert_eq!(s.parse_state_word("1").unwrap().0, vec![0]);
        assert_eq!(s.parse_state_word("12 3").unwrap().0, vec![0, 1, 2]);
        assert!(s.parse_state_word("7").is_err());
        let m = MealyMachine::with_names(
            vec!["q1".into(), "q10".into()],
            vec!["a".into()],
            vec![0, 1],
            vec![0, 0],
        )
        .unwrap();
        assert_eq!(m.parse_state_word("q10q1").unwrap().0, vec![1, 0]);
        assert_eq!(m.parse_state_word("q1.q10").unwrap().0, vec![0, 1]);
        assert_eq!(m.format_state_word(&[0, 1]), "q1.q10");
    }

    #[test]
    fn rename_roundtrip() {
        let m = zoo::baby_aleshin();
        let r = m.rename(&[2, 0, 1], &[1, 0]);
        let back = r.rename(&[1, 2, 0], &[1, 0]);
        assert_eq!(back, m);
    }
}
