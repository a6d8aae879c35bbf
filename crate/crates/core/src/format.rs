//! Line-based text format and its JSON mirror.
//!
//! ```text
//! # comment
//! name: aleshin
//! states: x y z
//! letters: a b
//! x a -> z b
//! ```
//!
//! Lists may be separated by whitespace or commas. A `;` ends a statement
//! like a newline does, so `states: x; letters: a; x a -> x a` is a complete
//! document.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{MachineError, MachineParts, MealyMachine};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: duplicate transition for state {state:?} on letter {letter:?}")]
    DuplicateTransition {
        line: usize,
        state: String,
        letter: String,
    },
    #[error("incomplete machine, missing transitions for {}", format_missing(.missing))]
    Incomplete { missing: Vec<(String, String)> },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("invalid JSON machine: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_missing(missing: &[(String, String)]) -> String {
    missing
        .iter()
        .map(|(s, l)| format!("({s}, {l})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A parsed machine file: an optional name plus the machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineDocument {
    pub name: Option<String>,
    pub machine: MealyMachine,
}

/// JSON mirror of the text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub letters: Vec<String>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: String,
    pub input: String,
    pub to: String,
    pub output: String,
}

impl From<&MealyMachine> for MachineJson {
    fn from(m: &MealyMachine) -> Self {
        let mut transitions = Vec::with_capacity(m.n_states() * m.n_letters());
        for x in 0..m.n_states() as u32 {
            for i in 0..m.n_letters() as u32 {
                let (to, out) = m.step(x, i);
                transitions.push(TransitionJson {
                    from: m.state_name(x).to_string(),
                    input: m.letter_name(i).to_string(),
                    to: m.state_name(to).to_string(),
                    output: m.letter_name(out).to_string(),
                });
            }
        }
        MachineJson {
            name: None,
            states: m.state_names().to_vec(),
            letters: m.letter_names().to_vec(),
            transitions,
        }
    }
}

impl TryFrom<MachineJson> for MealyMachine {
    type Error = FormatError;

    fn try_from(doc: MachineJson) -> Result<Self, FormatError> {
        let mut builder = Builder::new(doc.states, doc.letters)?;
        for (k, t) in doc.transitions.iter().enumerate() {
            builder.add(k + 1, &t.from, &t.input, &t.to, &t.output)?;
        }
        builder.finish()
    }
}

impl Serialize for MealyMachine {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MachineJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MealyMachine {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MachineJson::deserialize(deserializer)?;
        MealyMachine::try_from(doc).map_err(serde::de::Error::custom)
    }
}

struct Builder {
    states: Vec<String>,
    letters: Vec<String>,
    state_ix: HashMap<String, u32>,
    letter_ix: HashMap<String, u32>,
    delta: Vec<Option<u32>>,
    rho: Vec<Option<u32>>,
}

impl Builder {
    fn new(states: Vec<String>, letters: Vec<String>) -> Result<Self, FormatError> {
        let mut state_ix = HashMap::new();
        for (k, s) in states.iter().enumerate() {
            if state_ix.insert(s.clone(), k as u32).is_some() {
                return Err(MachineError::DuplicateState(s.clone()).into());
            }
        }
        let mut letter_ix = HashMap::new();
        for (k, s) in letters.iter().enumerate() {
            if letter_ix.insert(s.clone(), k as u32).is_some() {
                return Err(MachineError::DuplicateLetter(s.clone()).into());
            }
        }
        let size = states.len() * letters.len();
        Ok(Builder {
            states,
            letters,
            state_ix,
            letter_ix,
            delta: vec![None; size],
            rho: vec![None; size],
        })
    }

    fn add(
        &mut self,
        line: usize,
        from: &str,
        input: &str,
        to: &str,
        output: &str,
    ) -> Result<(), FormatError> {
        let state = |name: &str| {
            self.state_ix
                .get(name)
                .copied()
                .ok_or_else(|| FormatError::Machine(MachineError::UnknownState(name.to_string())))
        };
        let letter = |name: &str| {
            self.letter_ix
                .get(name)
                .copied()
                .ok_or_else(|| FormatError::Machine(MachineError::UnknownLetter(name.to_string())))
        };
        let (x, i, y, o) = (state(from)?, letter(input)?, state(to)?, letter(output)?);
        let k = x as usize * self.letters.len() + i as usize;
        if self.delta[k].is_some() {
            return Err(FormatError::DuplicateTransition {
                line,
                state: from.to_string(),
                letter: input.to_string(),
            });
        }
        self.delta[k] = Some(y);
        self.rho[k] = Some(o);
        Ok(())
    }

    fn finish(self) -> Result<MealyMachine, FormatError> {
        let l = self.letters.len();
        let missing: Vec<(String, String)> = self
            .delta
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_none())
            .map(|(k, _)| (self.states[k / l].clone(), self.letters[k % l].clone()))
            .collect();
        if !missing.is_empty() {
            return Err(FormatError::Incomplete { missing });
        }
        let n = self.states.len();
        let delta: Vec<u32> = self.delta.into_iter().map(Option::unwrap).collect();
        let rho: Vec<u32> = self.rho.into_iter().map(Option::unwrap).collect();
        let parts = MachineParts {
            states: self.states,
            letters: self.letters,
            delta: (0..l)
                .map(|i| (0..n).map(|x| delta[x * l + i]).collect())
                .collect(),
            rho: rho.chunks(l).map(<[u32]>::to_vec).collect(),
        };
        Ok(MealyMachine::new(parts)?)
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a statement into tokens with their 1-based columns.
fn tokens(text: &str, base_col: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, c) in text.char_indices() {
        let sep = c.is_whitespace() || c == ',';
        match (sep, start) {
            (true, Some(s)) => {
                out.push((base_col + s, &text[s..k]));
                start = None;
            }
            (false, None) => start = Some(k),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((base_col + s, &text[s..]));
    }
    out
}

/// Parses a text or JSON machine document. JSON is recognized by a leading `{`.
pub fn parse_document(text: &str) -> Result<MachineDocument, FormatError> {
    if text.trim_start().starts_with('{') {
        let doc: MachineJson = serde_json::from_str(text)?;
        let name = doc.name.clone();
        return Ok(MachineDocument {
            name,
            machine: MealyMachine::try_from(doc)?,
        });
    }

    let mut name = None;
    let mut states: Option<Vec<String>> = None;
    let mut letters: Option<Vec<String>> = None;
    let mut builder: Option<Builder> = None;

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        let mut offset = 0;
        for stmt in line.split(';') {
            let col = offset + 1;
            offset += stmt.len() + 1;
            let trimmed = stmt.trim();
            if trimmed.is_empty() {
                continue;
            }
            let lead = stmt.len() - stmt.trim_start().len();
            let col = col + lead;
            if let Some((key, rest)) = trimmed.split_once(':') {
                let key = key.trim();
                let rest_col = col + key.len() + 1;
                let values: Vec<String> = tokens(rest, rest_col)
                    .into_iter()
                    .map(|(_, t)| t.to_string())
                    .collect();
                match key {
                    "name" => {
                        if values.len() != 1 {
                            return Err(syntax(line_no, rest_col, "expected a single name"));
                        }
                        name = Some(values[0].clone());
                    }
                    "states" | "letters" => {
                        if builder.is_some() {
                            return Err(syntax(
                                line_no,
                                col,
                                format!("`{key}:` must precede the transitions"),
                            ));
                        }
                        if values.is_empty() {
                            return Err(syntax(line_no, rest_col, format!("empty `{key}:` list")));
                        }
                        let slot = if key == "states" {
                            &mut states
                        } else {
                            &mut letters
                        };
                        if slot.is_some() {
                            return Err(syntax(line_no, col, format!("repeated `{key}:` header")));
                        }
                        *slot = Some(values);
                    }
                    other => {
                        return Err(syntax(line_no, col, format!("unknown header `{other}`")));
                    }
                }
                continue;
            }

            let toks = tokens(stmt, col - lead);
            if toks.len() != 5 || toks[2].1 != "->" {
                return Err(syntax(
                    line_no,
                    col,
                    "expected a transition `STATE LETTER -> STATE LETTER`",
                ));
            }
            if builder.is_none() {
                let s = states.clone().ok_or_else(|| {
                    syntax(line_no, col, "missing `states:` header before transitions")
                })?;
                let l = letters.clone().ok_or_else(|| {
                    syntax(line_no, col, "missing `letters:` header before transitions")
                })?;
                builder = Some(Builder::new(s, l)?);
            }
            let b = builder.as_mut().unwrap();
            let check = |(c, t): (usize, &str), known: &HashMap<String, u32>, what: &str| {
                if known.contains_key(t) {
                    Ok(())
                } else {
                    Err(syntax(line_no, c, format!("unknown {what} `{t}`")))
                }
            };
            check(toks[0], &b.state_ix, "state")?;
            check(toks[1], &b.letter_ix, "letter")?;
            check(toks[3], &b.state_ix, "state")?;
            check(toks[4], &b.letter_ix, "letter")?;
            b.add(line_no, toks[0].1, toks[1].1, toks[3].1, toks[4].1)?;
        }
    }

    let builder = match builder {
        Some(b) => b,
        None => {
            let s = states.ok_or_else(|| syntax(1, 1, "missing `states:` header"))?;
            let l = letters.ok_or_else(|| syntax(1, 1, "missing `letters:` header"))?;
            Builder::new(s, l)?
        }
    };
    Ok(MachineDocument {
        name,
        machine: builder.finish()?,
    })
}

pub fn parse_machine(text: &str) -> Result<MealyMachine, FormatError> {
    parse_document(text).map(|d| d.machine)
}

/// Normalized text form: optional name, headers, then one transition per
/// (state, letter) pair in table order.
pub fn to_text(machine: &MealyMachine, name: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(n) = name {
        let _ = writeln!(out, "name: {n}");
    }
    let _ = writeln!(out, "states: {}", machine.state_names().join(" "));
    let _ = writeln!(out, "letters: {}", machine.letter_names().join(" "));
    for x in 0..machine.n_states() as u32 {
        for i in 0..machine.n_letters() as u32 {
            let (y, o) = machine.step(x, i);
            let _ = writeln!(
                out,
                "{} {} -> {} {}",
                machine.state_name(x),
                machine.letter_name(i),
                machine.state_name(y),
                machine.letter_name(o)
            );
        }
    }
    out
}

pub fn to_json(machine: &MealyMachine, name: Option<&str>) -> String {
    let mut doc = MachineJson::from(machine);
    doc.name = name.map(str::to_string);
    serde_json::to_string_pretty(&doc).expect("machine documents always serialize")
}

impl MachineDocument {
    pub fn to_text(&self) -> String {
        to_text(&self.machine, self.name.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn inline_document_is_triv() {
        let m = parse_machine("states: x; letters: a; x a -> x a").unwrap();
        assert_eq!(m, zoo::triv());
    }

    #[test]
    fn missing_transition_is_reported() {
        let text = "states: x y\nletters: a b\nx a -> x a\nx b -> y b\ny a -> x a\n";
        match parse_machine(text) {
            Err(FormatError::Incomplete { missing }) => {
                assert_eq!(missing, vec![("y".to_string(), "b".to_string())]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_transition_is_rejected() {
        let text = "states: x\nletters: a\nx a -> x a\nx a -> x a\n";
        assert!(matches!(
            parse_machine(text),
            Err(FormatError::DuplicateTransition { line: 4, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = "states: x\nletters: a\n  x a => x a\n";
        match parse_machine(text) {
            Err(FormatError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "states: x\nletters: a\nx a -> q a\n";
        match parse_machine(text) {
            Err(FormatError::Syntax {
                line,
                column,
                message,
            }) => {
                assert_eq!((line, column), (3, 8));
                assert!(message.contains("unknown state"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn normalized_text_roundtrips() {
        let text = to_text(&zoo::aleshin(), Some("aleshin"));
        let doc = parse_document(&text).unwrap();
        assert_eq!(doc.name.as_deref(), Some("aleshin"));
        assert_eq!(doc.to_text(), text);
    }

    #[test]
    fn json_mirror_roundtrips() {
        let m = zoo::six();
        let json = to_json(&m, Some("six"));
        let doc = parse_document(&json).unwrap();
        assert_eq!(doc.machine, m);
        assert_eq!(doc.name.as_deref(), Some("six"));
        let via_serde: MealyMachine =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(via_serde, m);
    }
}
