//! Bounded enumeration of the semigroup `⟨A⟩₊` and the tensor closure.
//!
//! Elements are kept as the states of a growing machine `M` that is minimal
//! and closed under sections: every state of `M` is a distinct production
//! function and its sections are states of `M` again. `M` starts as the
//! minimization of `A`. The product "`m` then generator `g`" is the pair
//! `(m, g)` with output row `i ↦ ρ_g(ρ_m(i))` and sections
//! `(section_m(i), δ_{ρ_m(i)}(g))`. Unresolved pairs are resolved one strongly
//! connected region at a time: refinement merges pairs that provably agree,
//! signature lookup proposes existing states, and a bisimulation against `M`
//! confirms them exactly. Whatever is left becomes new states of `M`.
//!
//! Elements are discovered breadth-first by word length with generators in
//! index order, so witnesses are shortlex-minimal.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::harness::canonical_form;
use crate::machine::{LetterWord, MealyMachine, StateWord};
use crate::minimize::{k_classes, minimize, nerode_partition, Partition};
use crate::refine::{labels_from_keys, refine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SemigroupBudget {
    pub max_elements: usize,
    /// Longest witness word explored.
    pub max_depth: usize,
}

impl Default for SemigroupBudget {
    fn default() -> Self {
        SemigroupBudget {
            max_elements: 10_000,
            max_depth: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EnumerationStatus {
    Finite,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Element {
    pub witness: StateWord,
    /// The witness rendered with the machine's state names.
    pub word: String,
    /// Hash of the element's action on `Σ^d`, `d` the certificate depth.
    pub signature: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemigroupTable {
    pub status: EnumerationStatus,
    pub elements: Vec<Element>,
    /// `right[e][x]`: the element of `witness(e)·x`, if discovered.
    pub right: Vec<Vec<Option<u32>>>,
    /// Smallest `d` such that the elements are pairwise distinct on `Σ^d`.
    pub certificate_depth: Option<usize>,
    /// Element of each generator.
    pub generators: Vec<u32>,
    #[serde(skip)]
    representatives: Vec<Vec<StateWord>>,
    #[serde(skip)]
    machine: Option<MealyMachine>,
}

const EXTRA_REPRESENTATIVES: usize = 3;

impl SemigroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_finite(&self) -> bool {
        self.status == EnumerationStatus::Finite
    }

    /// A few words known to represent element `e`, witness first.
    pub fn representatives(&self, e: usize) -> &[StateWord] {
        &self.representatives[e]
    }

    /// The element machine: one state per element, named by its witness,
    /// over the original alphabet. Only available for finite tables.
    pub fn element_machine(&self) -> Option<&MealyMachine> {
        self.machine.as_ref()
    }

    /// The element represented by a nonempty word, via the multiplication
    /// table.
    pub fn element_of(&self, word: &[u32]) -> Option<u32> {
        let (&first, rest) = word.split_first()?;
        let mut e = *self.generators.get(first as usize)?;
        for &x in rest {
            e = self.right[e as usize][x as usize]?;
        }
        Some(e)
    }
}

fn mix(h: u64, v: u64) -> u64 {
    let mut z = h ^ v
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(h << 6)
        .wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn row_hash(row: &[u32]) -> u64 {
    row.iter()
        .fold(0x51_7cc1_b727_220a, |h, &v| mix(h, v as u64))
}

const MAX_BUCKET: usize = 8;
const MAX_SIG_DEPTH: usize = 48;

/// The minimal, section-closed machine of known elements.
struct ElementMachine {
    l: usize,
    gen: MealyMachine,
    rows: Vec<u32>,
    sects: Vec<u32>,
    /// `mult[m * |gen| + g]`, `u32::MAX` when unresolved.
    mult: Vec<u32>,
    /// `sigs[d][m]`: recursive signature of depth `d`.
    sigs: Vec<Vec<u64>>,
    index: HashMap<u64, Vec<u32>>,
    /// Regions whose candidate count exceeds this multiple of `|M|` plus
    /// the region size are matched by refinement instead.
    refine_factor: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Target {
    M(u32),
    S(u32),
}

struct Region {
    rows: Vec<u32>,
    targets: Vec<Target>,
}

impl ElementMachine {
    fn new(gen: MealyMachine) -> Self {
        let l = gen.n_letters();
        let n = gen.n_states();
        let mut em = ElementMachine {
            l,
            rows: gen.rho_table().to_vec(),
            sects: gen.delta_table().to_vec(),
            mult: vec![u32::MAX; n * n],
            sigs: Vec::new(),
            index: HashMap::new(),
            refine_factor: 0,
            gen,
        };
        em.sigs
            .push((0..n).map(|m| row_hash(em.row(m as u32))).collect());
        em.rebuild_index();
        em
    }

    fn len(&self) -> usize {
        self.rows.len() / self.l
    }

    fn n_gen(&self) -> usize {
        self.gen.n_states()
    }

    fn row(&self, m: u32) -> &[u32] {
        &self.rows[m as usize * self.l..(m as usize + 1) * self.l]
    }

    fn sect(&self, m: u32, i: usize) -> u32 {
        self.sects[m as usize * self.l + i]
    }

    fn depth(&self) -> usize {
        self.sigs.len() - 1
    }

    fn rebuild_index(&mut self) {
        self.index.clear();
        let d = self.depth();
        for m in 0..self.len() as u32 {
            self.index
                .entry(self.sigs[d][m as usize])
                .or_default()
                .push(m);
        }
    }

    fn deepen(&mut self) {
        let d = self.depth();
        let next: Vec<u64> = (0..self.len())
            .map(|m| {
                let mut h = self.sigs[0][m];
                for i in 0..self.l {
                    h = mix(h, self.sigs[d][self.sects[m * self.l + i] as usize]);
                }
                h
            })
            .collect();
        self.sigs.push(next);
        self.rebuild_index();
    }

    /// Appends states whose sections are already present (possibly among
    /// the appended ones).
    fn push_states(&mut self, rows: &[u32], sects: &[u32]) {
        let first = self.len();
        self.rows.extend_from_slice(rows);
        self.sects.extend_from_slice(sects);
        self.mult.resize(self.len() * self.n_gen(), u32::MAX);
        let added = rows.len() / self.l;
        for m in first..first + added {
            let h = row_hash(self.row(m as u32));
            self.sigs[0].push(h);
        }
        for d in 1..self.sigs.len() {
            for m in first..first + added {
                let mut h = self.sigs[0][m];
                for i in 0..self.l {
                    h = mix(h, self.sigs[d - 1][self.sects[m * self.l + i] as usize]);
                }
                self.sigs[d].push(h);
            }
        }
        let d = self.depth();
        for m in first..first + added {
            self.index
                .entry(self.sigs[d][m])
                .or_default()
                .push(m as u32);
        }
        while self.depth() < MAX_SIG_DEPTH && self.index.values().any(|b| b.len() > MAX_BUCKET) {
            self.deepen();
        }
    }

    fn pair_row_and_sections(&self, m: u32, g: u32) -> (Vec<u32>, Vec<(u32, u32)>) {
        let mut row = Vec::with_capacity(self.l);
        let mut sections = Vec::with_capacity(self.l);
        for i in 0..self.l {
            let j = self.row(m)[i];
            let (g2, o) = self.gen.step(g, j);
            row.push(o);
            sections.push((self.sect(m, i), g2));
        }
        (row, sections)
    }

    fn resolved(&self, m: u32, g: u32) -> Option<u32> {
        let v = self.mult[m as usize * self.n_gen() + g as usize];
        (v != u32::MAX).then_some(v)
    }

    /// The state of `M` equal to "`m` then `g`", extending `M` if needed.
    /// Returns `None` once `M` exceeds `cap` states.
    fn multiply(&mut self, m: u32, g: u32, cap: usize) -> Option<u32> {
        if let Some(v) = self.resolved(m, g) {
            return Some(v);
        }
        // Iterative Tarjan over unresolved pairs.
        let mut index_of: HashMap<(u32, u32), u32> = HashMap::new();
        let mut nodes: Vec<(u32, u32)> = Vec::new();
        let mut info: Vec<(Vec<u32>, Vec<(u32, u32)>)> = Vec::new();
        let mut low: Vec<u32> = Vec::new();
        let mut on_stack: Vec<bool> = Vec::new();
        let mut stack: Vec<u32> = Vec::new();
        let mut call: Vec<(u32, usize)> = Vec::new();

        let open = |p: (u32, u32),
                    nodes: &mut Vec<(u32, u32)>,
                    info: &mut Vec<(Vec<u32>, Vec<(u32, u32)>)>,
                    low: &mut Vec<u32>,
                    on_stack: &mut Vec<bool>,
                    stack: &mut Vec<u32>,
                    index_of: &mut HashMap<(u32, u32), u32>,
                    em: &ElementMachine| {
            let id = nodes.len() as u32;
            index_of.insert(p, id);
            nodes.push(p);
            info.push(em.pair_row_and_sections(p.0, p.1));
            low.push(id);
            on_stack.push(true);
            stack.push(id);
            id
        };

        let root = open(
            (m, g),
            &mut nodes,
            &mut info,
            &mut low,
            &mut on_stack,
            &mut stack,
            &mut index_of,
            self,
        );
        call.push((root, 0));
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < self.l {
                let p = info[v as usize].1[*next];
                *next += 1;
                if self.resolved(p.0, p.1).is_some() {
                    continue;
                }
                match index_of.get(&p) {
                    Some(&w) => {
                        if on_stack[w as usize] {
                            low[v as usize] = low[v as usize].min(w);
                        }
                    }
                    None => {
                        let w = open(
                            p,
                            &mut nodes,
                            &mut info,
                            &mut low,
                            &mut on_stack,
                            &mut stack,
                            &mut index_of,
                            self,
                        );
                        call.push((w, 0));
                    }
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == v {
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.reverse();
                let local: HashMap<u32, u32> = members
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| (w, k as u32))
                    .collect();
                let mut region = Region {
                    rows: Vec::with_capacity(members.len() * self.l),
                    targets: Vec::with_capacity(members.len() * self.l),
                };
                for &w in &members {
                    let (row, secs) = &info[w as usize];
                    region.rows.extend_from_slice(row);
                    for &p in secs {
                        let t = match self.resolved(p.0, p.1) {
                            Some(r) => Target::M(r),
                            None => Target::S(local[&index_of[&p]]),
                        };
                        region.targets.push(t);
                    }
                }
                let ids = self.resolve_region(&region);
                for (k, &w) in members.iter().enumerate() {
                    let (pm, pg) = nodes[w as usize];
                    let n_gen = self.n_gen();
                    self.mult[pm as usize * n_gen + pg as usize] = ids[k];
                }
                if self.len() > cap {
                    return None;
                }
            }
        }
        self.resolved(m, g)
    }

    /// Maps every node of a strongly connected region to a state of `M`.
    fn resolve_region(&mut self, region: &Region) -> Vec<u32> {
        let l = self.l;
        let s = region.rows.len() / l;
        let matched = self.match_region(region);
        let open: Vec<u32> = (0..s as u32)
            .filter(|&v| matched[v as usize].is_none())
            .collect();
        let (class_of, classes) = self.refine_region(region, &matched, &open);

        let first = self.len() as u32;
        let mut new_id = vec![u32::MAX; classes];
        let mut reps = Vec::new();
        for v in 0..s {
            if matched[v].is_none() {
                let c = class_of[v] as usize;
                if new_id[c] == u32::MAX {
                    new_id[c] = first + reps.len() as u32;
                    reps.push(v);
                }
            }
        }
        let id_of = |v: usize| matched[v].unwrap_or_else(|| new_id[class_of[v] as usize]);
        let mut rows = Vec::with_capacity(reps.len() * l);
        let mut sects = Vec::with_capacity(reps.len() * l);
        for &v in &reps {
            rows.extend_from_slice(&region.rows[v * l..(v + 1) * l]);
            for i in 0..l {
                sects.push(match region.targets[v * l + i] {
                    Target::M(p) => p,
                    Target::S(w) => id_of(w as usize),
                });
            }
        }
        if !reps.is_empty() {
            self.push_states(&rows, &sects);
        }
        (0..s).map(id_of).collect()
    }

    /// Coarsest stable partition of the open region nodes, with states of
    /// `M` (and matched nodes) as distinct atoms.
    fn refine_region(
        &self,
        region: &Region,
        matched: &[Option<u32>],
        open: &[u32],
    ) -> (Vec<u32>, usize) {
        let l = self.l;
        let mut local = vec![u32::MAX; matched.len()];
        for (k, &v) in open.iter().enumerate() {
            local[v as usize] = k as u32;
        }
        let mut atoms: HashMap<u32, u32> = HashMap::new();
        let mut succ = Vec::with_capacity(open.len() * l);
        for &v in open {
            for i in 0..l {
                let target = match region.targets[v as usize * l + i] {
                    Target::S(w) if matched[w as usize].is_none() => {
                        succ.push(local[w as usize]);
                        continue;
                    }
                    Target::S(w) => matched[w as usize].unwrap(),
                    Target::M(p) => p,
                };
                let next = open.len() as u32 + atoms.len() as u32;
                succ.push(*atoms.entry(target).or_insert(next));
            }
        }
        let total = open.len() + atoms.len();
        succ.resize(total * l, 0);
        let mut atom_list: Vec<(u32, u32)> = atoms.into_iter().collect();
        atom_list.sort_unstable_by_key(|&(_, node)| node);
        for &(_, node) in &atom_list {
            for i in 0..l {
                succ[node as usize * l + i] = node;
            }
        }
        #[derive(Hash, PartialEq, Eq)]
        enum Key<'a> {
            Row(&'a [u32]),
            Atom(u32),
        }
        let keys = open
            .iter()
            .map(|&v| Key::Row(&region.rows[v as usize * l..(v as usize + 1) * l]))
            .chain(atom_list.iter().map(|&(p, _)| Key::Atom(p)));
        let labels = labels_from_keys(keys);
        let (blocks, _) = refine(total, l, &succ, &labels);
        // Class ids for open nodes only, indexed by region node.
        let mut class_of = vec![u32::MAX; matched.len()];
        let mut renumber: HashMap<u32, u32> = HashMap::new();
        for (k, &v) in open.iter().enumerate() {
            let next = renumber.len() as u32;
            class_of[v as usize] = *renumber.entry(blocks[k]).or_insert(next);
        }
        let count = renumber.len();
        (class_of, count)
    }

    /// Depth-`d` signatures of the region nodes, comparable with `sigs[d]`.
    fn region_signatures(&self, region: &Region) -> Vec<u64> {
        let l = self.l;
        let s = region.rows.len() / l;
        let base: Vec<u64> = (0..s)
            .map(|v| row_hash(&region.rows[v * l..(v + 1) * l]))
            .collect();
        let mut cur = base.clone();
        for d in 1..=self.depth() {
            let prev_m = &self.sigs[d - 1];
            cur = (0..s)
                .map(|v| {
                    (0..l).fold(base[v], |h, i| {
                        mix(
                            h,
                            match region.targets[v * l + i] {
                                Target::M(p) => prev_m[p as usize],
                                Target::S(w) => cur[w as usize],
                            },
                        )
                    })
                })
                .collect();
        }
        cur
    }

    /// Same result as `match_region`, by refining the region together with
    /// the part of `M` reachable from its exits and its candidates.
    fn match_by_refinement(&self, region: &Region, sigs: &[u64]) -> Vec<Option<u32>> {
        let l = self.l;
        let s = region.rows.len() / l;
        let mut local = vec![u32::MAX; self.len()];
        let mut reached: Vec<u32> = Vec::new();
        let visit = |p: u32, local: &mut Vec<u32>, reached: &mut Vec<u32>| {
            if local[p as usize] == u32::MAX {
                local[p as usize] = (s + reached.len()) as u32;
                reached.push(p);
            }
        };
        for t in &region.targets {
            if let Target::M(p) = *t {
                visit(p, &mut local, &mut reached);
            }
        }
        let sigs: HashSet<u64> = sigs.iter().copied().collect();
        for h in &sigs {
            for &p in self.index.get(h).into_iter().flatten() {
                visit(p, &mut local, &mut reached);
            }
        }
        let mut k = 0;
        while k < reached.len() {
            let p = reached[k];
            for i in 0..l {
                visit(self.sect(p, i), &mut local, &mut reached);
            }
            k += 1;
        }
        let total = s + reached.len();
        let mut succ = Vec::with_capacity(total * l);
        for t in &region.targets {
            succ.push(match *t {
                Target::M(p) => local[p as usize],
                Target::S(w) => w,
            });
        }
        for &p in &reached {
            succ.extend((0..l).map(|i| local[self.sect(p, i) as usize]));
        }
        let rows = (0..s)
            .map(|v| &region.rows[v * l..(v + 1) * l])
            .chain(reached.iter().map(|&p| self.row(p)));
        let (blocks, _) = refine(total, l, &succ, &labels_from_keys(rows));
        let mut state_of_block: HashMap<u32, u32> = HashMap::new();
        for (k, &p) in reached.iter().enumerate() {
            let previous = state_of_block.insert(blocks[s + k], p);
            debug_assert!(previous.is_none(), "element machine is not minimal");
        }
        (0..s)
            .map(|v| state_of_block.get(&blocks[v]).copied())
            .collect()
    }

    /// The state of `M` equal to each region node, if any. Candidates with
    /// equal signatures are pruned to the greatest bisimulation between the
    /// region and `M`; since `M` is minimal at most one survives per node.
    fn match_region(&self, region: &Region) -> Vec<Option<u32>> {
        let l = self.l;
        let s = region.rows.len() / l;
        let sigs = self.region_signatures(region);
        let estimate: usize = sigs
            .iter()
            .map(|h| self.index.get(h).map_or(0, Vec::len))
            .sum();
        if estimate > self.refine_factor.saturating_mul(self.len() + s) {
            return self.match_by_refinement(region, &sigs);
        }
        let mut alive: Vec<HashSet<u32>> = (0..s)
            .map(|v| {
                let row = &region.rows[v * l..(v + 1) * l];
                let fits = |p: u32| {
                    self.row(p) == row
                        && (0..l).all(|i| match region.targets[v * l + i] {
                            Target::M(r) => self.sect(p, i) == r,
                            Target::S(_) => true,
                        })
                };
                self.index
                    .get(&sigs[v])
                    .into_iter()
                    .flatten()
                    .copied()
                    .filter(|&p| fits(p))
                    .collect()
            })
            .collect();
        // For each open edge `(v, i) -> w`: predecessors of `w`, and the
        // candidates of `v` grouped by their `i`-section.
        let mut preds: Vec<Vec<(u32, usize)>> = vec![Vec::new(); s];
        let mut by_sect: HashMap<(u32, usize), HashMap<u32, Vec<u32>>> = HashMap::new();
        for v in 0..s {
            for i in 0..l {
                if let Target::S(w) = region.targets[v * l + i] {
                    preds[w as usize].push((v as u32, i));
                    let groups = by_sect.entry((v as u32, i)).or_default();
                    for &p in &alive[v] {
                        groups.entry(self.sect(p, i)).or_default().push(p);
                    }
                }
            }
        }
        let mut dead = Vec::new();
        for v in 0..s {
            for &p in &alive[v] {
                let broken = (0..l).any(|i| match region.targets[v * l + i] {
                    Target::S(w) => !alive[w as usize].contains(&self.sect(p, i)),
                    Target::M(_) => false,
                });
                if broken {
                    dead.push((v as u32, p));
                }
            }
        }
        for &(v, p) in &dead {
            alive[v as usize].remove(&p);
        }
        while let Some((w, q)) = dead.pop() {
            for &(v, i) in &preds[w as usize] {
                let Some(ps) = by_sect[&(v, i)].get(&q) else {
                    continue;
                };
                for &p in ps {
                    if alive[v as usize].remove(&p) {
                        dead.push((v, p));
                    }
                }
            }
        }
        alive
            .iter()
            .map(|c| {
                debug_assert!(c.len() <= 1, "element machine is not minimal");
                c.iter().next().copied()
            })
            .collect()
    }
}

/// Elements discovered so far, in discovery order.
struct Found {
    elements: Vec<Element>,
    m_of: Vec<u32>,
    elem_of: HashMap<u32, u32>,
    reps: Vec<Vec<StateWord>>,
}

impl Found {
    /// Records `word` as a representative of state `m`; returns the element
    /// index if `m` is new.
    fn visit(&mut self, machine: &MealyMachine, m: u32, word: StateWord) -> Option<u32> {
        if let Some(&e) = self.elem_of.get(&m) {
            let reps = &mut self.reps[e as usize];
            if reps.len() < EXTRA_REPRESENTATIVES {
                reps.push(word);
            }
            return None;
        }
        let e = self.elements.len() as u32;
        self.elem_of.insert(m, e);
        self.m_of.push(m);
        self.elements.push(Element {
            word: machine.format_state_word(&word),
            witness: word.clone(),
            signature: 0,
        });
        self.reps.push(vec![word]);
        Some(e)
    }
}

/// Enumerates `⟨A⟩₊` breadth-first by word length.
pub fn enumerate_semigroup(machine: &MealyMachine, budget: &SemigroupBudget) -> SemigroupTable {
    enumerate_with(machine, budget, 4)
}

fn enumerate_with(
    machine: &MealyMachine,
    budget: &SemigroupBudget,
    refine_factor: usize,
) -> SemigroupTable {
    let partition = nerode_partition(machine);
    let n = machine.n_states();
    let mut em = ElementMachine::new(minimize(machine));
    em.refine_factor = refine_factor;
    let cap = budget.max_elements;
    let mut found = Found {
        elements: Vec::new(),
        m_of: Vec::new(),
        elem_of: HashMap::new(),
        reps: Vec::new(),
    };

    let mut frontier = Vec::new();
    for x in 0..n as u32 {
        if let Some(e) = found.visit(machine, partition.block_of(x), StateWord(vec![x])) {
            frontier.push(e);
        }
    }
    let mut length = 1;
    let mut exceeded = false;
    'levels: while !frontier.is_empty() {
        if found.elements.len() > cap {
            exceeded = true;
            break;
        }
        // At the depth limit the products are only checked for closure.
        let closure_only = length >= budget.max_depth;
        let mut next = Vec::new();
        for &e in &frontier {
            let m = found.m_of[e as usize];
            for x in 0..n as u32 {
                let Some(t) = em.multiply(m, partition.block_of(x), cap) else {
                    exceeded = true;
                    break 'levels;
                };
                if closure_only {
                    if !found.elem_of.contains_key(&t) {
                        exceeded = true;
                        break 'levels;
                    }
                    continue;
                }
                let mut word = found.elements[e as usize].witness.0.clone();
                word.push(x);
                if let Some(new) = found.visit(machine, t, StateWord(word)) {
                    next.push(new);
                }
            }
        }
        if closure_only {
            break;
        }
        frontier = next;
        length += 1;
    }
    let status = if exceeded {
        EnumerationStatus::BudgetExceeded
    } else {
        EnumerationStatus::Finite
    };
    finish(machine, &partition, &em, found, status)
}

fn finish(
    machine: &MealyMachine,
    partition: &Partition,
    em: &ElementMachine,
    found: Found,
    status: EnumerationStatus,
) -> SemigroupTable {
    let n = machine.n_states();
    let l = em.l;
    let Found {
        mut elements,
        m_of,
        elem_of,
        reps,
    } = found;
    let right = m_of
        .iter()
        .map(|&m| {
            (0..n as u32)
                .map(|x| {
                    let t = em.resolved(m, partition.block_of(x))?;
                    elem_of.get(&t).copied()
                })
                .collect()
        })
        .collect();
    let generators = (0..n as u32)
        .map(|x| elem_of[&partition.block_of(x)])
        .collect();

    let mut element_machine = None;
    let mut certificate_depth = None;
    if status == EnumerationStatus::Finite {
        let mut rows = Vec::with_capacity(m_of.len() * l);
        let mut sects = Vec::with_capacity(m_of.len() * l);
        for &m in &m_of {
            rows.extend_from_slice(em.row(m));
            for i in 0..l {
                sects.push(elem_of[&em.sect(m, i)]);
            }
        }
        let names = elements.iter().map(|el| el.word.clone()).collect();
        let em_machine =
            MealyMachine::from_raw(names, machine.letter_names().to_vec(), sects, rows);
        let mut k = 0;
        while !k_classes(&em_machine, k).is_discrete() {
            k += 1;
        }
        let d = k + 1;
        for (el, s) in elements.iter_mut().zip(action_signatures(&em_machine, d)) {
            el.signature = s;
        }
        certificate_depth = Some(d);
        element_machine = Some(em_machine);
    }
    SemigroupTable {
        status,
        elements,
        right,
        generators,
        certificate_depth,
        representatives: reps,
        machine: element_machine,
    }
}

/// Hash of each state's action on `Σ^d`, computed recursively: the depth-`d`
/// action is determined by the output row and the depth-`(d-1)` actions of
/// the sections.
fn action_signatures(m: &MealyMachine, d: usize) -> Vec<u64> {
    let n = m.n_states();
    let base: Vec<u64> = (0..n as u32).map(|x| row_hash(m.rho_row(x))).collect();
    let mut cur = base.clone();
    for _ in 1..d {
        cur = (0..n as u32)
            .map(|x| {
                m.successors(x)
                    .iter()
                    .fold(base[x as usize], |h, &y| mix(h, cur[y as usize]))
            })
            .collect();
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SemigroupOrder {
    Finite(usize),
    AtLeast(usize),
}

pub fn semigroup_order(machine: &MealyMachine, budget: &SemigroupBudget) -> SemigroupOrder {
    let t = enumerate_semigroup(machine, budget);
    match t.status {
        EnumerationStatus::Finite => SemigroupOrder::Finite(t.order()),
        EnumerationStatus::BudgetExceeded => SemigroupOrder::AtLeast(t.order()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("the dual semigroup is infinite or exceeds the budget ({0} elements found)")]
    DualNotFinite(usize),
    #[error("tensor closure is not well defined: {0}")]
    IllDefined(String),
}

/// The letters of a tensor closure: the elements of the dual semigroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureAlphabet {
    /// Witness letter word of each new letter, in discovery order.
    pub letters: Vec<LetterWord>,
    /// New letter of each original letter.
    pub class_map: Vec<u32>,
}

/// Tensor closure: same states, one letter per element of the dual
/// semigroup, `δ̄_ξ(x) = δ_s(x)` and `ρ̄_x(ξ) = ⟨⟨ρ_x(s)⟩⟩` for `ξ = ⟨⟨s⟩⟩`.
pub fn tensor_closure_with_alphabet(
    machine: &MealyMachine,
    budget: &SemigroupBudget,
) -> Result<(MealyMachine, ClosureAlphabet), ClosureError> {
    let dual = machine.dual();
    let table = enumerate_semigroup(&dual, budget);
    let em = match table.element_machine() {
        Some(m) => m,
        None => return Err(ClosureError::DualNotFinite(table.order())),
    };
    let closure = em.dual();
    let class_map = (0..machine.n_letters() as u32)
        .map(|i| table.element_of(&[i]).expect("generators are elements"))
        .collect();
    let alphabet = ClosureAlphabet {
        letters: table
            .elements
            .iter()
            .map(|el| LetterWord(el.witness.0.clone()))
            .collect(),
        class_map,
    };
    if cfg!(debug_assertions) {
        check_closure(machine, &closure, &table)?;
    }
    Ok((closure, alphabet))
}

/// Checks the closure against every stored representative of every letter.
fn check_closure(
    machine: &MealyMachine,
    closure: &MealyMachine,
    table: &SemigroupTable,
) -> Result<(), ClosureError> {
    for xi in 0..table.order() {
        for s in table.representatives(xi) {
            for x in 0..machine.n_states() as u32 {
                let (y, out) = closure.step(x, xi as u32);
                let moved = machine.delta_apply(s, &[x]);
                if moved.0 != [y] {
                    return Err(ClosureError::IllDefined(format!(
                        "representatives of letter {xi} move state {x} differently"
                    )));
                }
                let image = machine.rho_apply(&[x], s);
                if table.element_of(&image) != Some(out) {
                    return Err(ClosureError::IllDefined(format!(
                        "representatives of letter {xi} have different images under state {x}"
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn tensor_closure(
    machine: &MealyMachine,
    budget: &SemigroupBudget,
) -> Result<MealyMachine, ClosureError> {
    tensor_closure_with_alphabet(machine, budget).map(|(m, _)| m)
}

/// Whether the machine is isomorphic to its tensor closure.
pub fn is_tensor_closed(
    machine: &MealyMachine,
    budget: &SemigroupBudget,
) -> Result<bool, ClosureError> {
    let closure = tensor_closure(machine, budget)?;
    Ok(closure.n_letters() == machine.n_letters()
        && canonical_form(&closure) == canonical_form(machine))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompletenessError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no edge from {from:?} to {to:?} inside their component of power {exponent}")]
    MissingEdge {
        exponent: usize,
        from: StateWord,
        to: StateWord,
    },
    #[error(transparent)]
    Budget(#[from] crate::BudgetExceeded),
}

/// For a two-state invertible reversible tensor-closed machine, checks
/// that in `Aᵐ` every ordered pair of words of one component, including
/// a word with itself, is joined by an edge.
pub fn verify_complete_components(
    machine: &MealyMachine,
    m: usize,
    budget: &SemigroupBudget,
) -> Result<(), CompletenessError> {
    if machine.n_states() != 2 {
        return Err(CompletenessError::Precondition(format!(
            "expected 2 states, got {}",
            machine.n_states()
        )));
    }
    if !(machine.is_invertible() && machine.is_reversible()) {
        return Err(CompletenessError::Precondition(
            "machine must be invertible and reversible".into(),
        ));
    }
    match is_tensor_closed(machine, budget) {
        Ok(true) => {}
        Ok(false) => {
            return Err(CompletenessError::Precondition(
                "machine is not tensor closed".into(),
            ))
        }
        Err(e) => return Err(CompletenessError::Precondition(e.to_string())),
    }
    let pb = crate::power::PowerBudget::default();
    let table = crate::power::PowerTable::build(machine, m, &pb)?;
    let labels = crate::connectivity::component_labels(machine, m, &pb)?;
    let words = table.n_words();
    let mut edges = vec![false; words * words];
    for u in 0..words {
        for i in 0..machine.n_letters() {
            let (v, _) = table.step(u, i);
            edges[u * words + v as usize] = true;
        }
    }
    for u in 0..words {
        for v in 0..words {
            if labels[u] == labels[v] && !edges[u * words + v] {
                return Err(CompletenessError::MissingEdge {
                    exponent: m,
                    from: StateWord(table.unpack(u as u64)),
                    to: StateWord(table.unpack(v as u64)),
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
    fn matching_strategies_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6d61);
        let budget = SemigroupBudget {
            max_elements: 300,
            max_depth: 10,
        };
        for _ in 0..150 {
            let n = rng.gen_range(1..=3);
            let l = rng.gen_range(1..=3);
            let m =
                crate::harness::random_machine(&mut rng, n, l, crate::harness::Filters::default());
            let a = enumerate_with(&m, &budget, 0);
            let b = enumerate_with(&m, &budget, usize::MAX);
            assert_eq!(a.status, b.status, "{m:?}");
            let words = |t: &SemigroupTable| {
                t.elements
                    .iter()
                    .map(|e| e.word.clone())
                    .collect::<Vec<_>>()
            };
            assert_eq!(words(&a), words(&b), "{m:?}");
            assert_eq!(a.right, b.right, "{m:?}");
        }
    }

    #[test]
    fn small_orders() {
        let b = SemigroupBudget::default();
        assert_eq!(semigroup_order(&zoo::triv(), &b), SemigroupOrder::Finite(1));
        assert_eq!(semigroup_order(&zoo::swap(), &b), SemigroupOrder::Finite(1));
    }

    #[test]
    fn dual_aleshin_exceeds_budget() {
        let b = SemigroupBudget {
            max_elements: 1000,
            max_depth: 10,
        };
        let t = enumerate_semigroup(&zoo::dual_aleshin(), &b);
        assert_eq!(t.status, EnumerationStatus::BudgetExceeded);
        assert!(matches!(
            semigroup_order(&zoo::dual_aleshin(), &b),
            SemigroupOrder::AtLeast(_)
        ));
    }

    #[test]
    fn cyclic_group_of_one_state() {
        // One state cycling three letters generates Z/3.
        let m = MealyMachine::from_tables(1, 3, vec![0, 0, 0], vec![1, 2, 0]).unwrap();
        let t = enumerate_semigroup(&m, &SemigroupBudget::default());
        assert!(t.is_finite());
        assert_eq!(t.order(), 3);
        let words: Vec<&str> = t.elements.iter().map(|e| e.word.as_str()).collect();
        assert_eq!(words, vec!["x", "xx", "xxx"]);
        assert_eq!(t.certificate_depth, Some(1));
        assert_eq!(t.right[2][0], Some(0));
    }

    #[test]
    fn swap_closure() {
        let b = SemigroupBudget::default();
        let (c, alphabet) = tensor_closure_with_alphabet(&zoo::swap(), &b).unwrap();
        assert_eq!(c.letter_names(), ["a", "aa"]);
        assert_eq!(alphabet.class_map, vec![0, 0]);
        // x --s|s--> y, x --e|e--> x
        assert_eq!(c.step(0, 0), (1, 0));
        assert_eq!(c.step(0, 1), (0, 1));
        assert_eq!(c.step(1, 0), (0, 0));
        assert_eq!(c.step(1, 1), (1, 1));
        assert!(!is_tensor_closed(&zoo::swap(), &b).unwrap());
        assert!(is_tensor_closed(&c, &b).unwrap());
        verify_complete_components(&c, 1, &b).unwrap();
        verify_complete_components(&c, 2, &b).unwrap();
        assert!(matches!(
            verify_complete_components(&zoo::baby_aleshin(), 2, &b),
            Err(CompletenessError::Precondition(_))
        ));
    }

    #[test]
    fn triv_closure_is_triv() {
        let c = tensor_closure(&zoo::triv(), &SemigroupBudget::default()).unwrap();
        assert!(c.same_tables(&zoo::triv()));
        assert!(is_tensor_closed(&zoo::triv(), &SemigroupBudget::default()).unwrap());
    }

    #[test]
    fn infinite_dual_has_no_closure() {
        let b = SemigroupBudget {
            max_elements: 200,
            max_depth: 8,
        };
        assert!(matches!(
            tensor_closure(&zoo::aleshin(), &b),
            Err(ClosureError::DualNotFinite(_))
        ));
    }
}
