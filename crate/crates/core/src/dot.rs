//! Graphviz export. Parallel transitions share one edge whose label lists
//! every `input|output` pair, e.g. `a|a, b|b`.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::machine::MealyMachine;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Labels of the merged edges, keyed by `(source, target)`.
pub fn merged_edges(machine: &MealyMachine) -> BTreeMap<(u32, u32), Vec<String>> {
    let mut edges: BTreeMap<(u32, u32), Vec<String>> = BTreeMap::new();
    for x in 0..machine.n_states() as u32 {
        for i in 0..machine.n_letters() as u32 {
            let (y, o) = machine.step(x, i);
            edges.entry((x, y)).or_default().push(format!(
                "{}|{}",
                machine.letter_name(i),
                machine.letter_name(o)
            ));
        }
    }
    edges
}

pub fn to_dot(machine: &MealyMachine, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for x in 0..machine.n_states() as u32 {
        writeln!(out, "  {};", quote(machine.state_name(x))).unwrap();
    }
    for ((x, y), labels) in merged_edges(machine) {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(machine.state_name(x)),
            quote(machine.state_name(y)),
            quote(&labels.join(", "))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
