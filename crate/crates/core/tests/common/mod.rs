//! Brute-force oracles shared by the integration tests. They only use the
//! machine's raw `step`, never the library's algorithms.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use mealy::MealyMachine;

/// All words of length `len` over `0..base`, lexicographic.
pub fn words(base: usize, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..base as u32).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// `ρ_u(s)` by direct simulation.
pub fn act(m: &MealyMachine, u: &[u32], s: &[u32]) -> Vec<u32> {
    let mut out = s.to_vec();
    for &x in u {
        let mut state = x;
        for c in out.iter_mut() {
            let (next, o) = m.step(state, *c);
            *c = o;
            state = next;
        }
    }
    out
}

/// `δ_s(u)` on state words by direct simulation.
pub fn move_word(m: &MealyMachine, u: &[u32], s: &[u32]) -> Vec<u32> {
    let mut out = u.to_vec();
    for &i in s {
        let mut letter = i;
        for x in out.iter_mut() {
            let (next, o) = m.step(*x, letter);
            *x = next;
            letter = o;
        }
    }
    out
}

/// Classes of states by their action on every word of length `|A|`.
pub fn naive_state_classes(m: &MealyMachine) -> Vec<u32> {
    let ws = words(m.n_letters(), m.n_states().max(1));
    let mut ids: HashMap<Vec<Vec<u32>>, u32> = HashMap::new();
    (0..m.n_states() as u32)
        .map(|x| {
            let table: Vec<Vec<u32>> = ws.iter().map(|w| act(m, &[x], w)).collect();
            let next = ids.len() as u32;
            *ids.entry(table).or_insert(next)
        })
        .collect()
}

/// Whether two labelings induce the same partition.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
}

/// Component sizes of the undirected graph of `Aᵐ`, by BFS.
pub fn power_component_sizes(m: &MealyMachine, exp: usize) -> Vec<usize> {
    let all = words(m.n_states(), exp);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut adjacent: HashMap<Vec<u32>, Vec<Vec<u32>>> = HashMap::new();
    for u in &all {
        for i in 0..m.n_letters() as u32 {
            let v = move_word(m, u, &[i]);
            adjacent.entry(u.clone()).or_default().push(v.clone());
            adjacent.entry(v).or_default().push(u.clone());
        }
    }
    let mut sizes = Vec::new();
    for u in &all {
        if !seen.insert(u.clone()) {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([u.clone()]);
        while let Some(w) = queue.pop_front() {
            size += 1;
            for v in &adjacent[&w] {
                if seen.insert(v.clone()) {
                    queue.push_back(v.clone());
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Smallest exponent `≤ max` with a disconnected power, by BFS.
pub fn first_disconnected_power(m: &MealyMachine, max: usize) -> Option<usize> {
    (1..=max).find(|&e| power_component_sizes(m, e).len() > 1)
}

/// Order of the semigroup of actions on `Σ^depth`, capped at `cap`.
pub fn order_at_depth(m: &MealyMachine, depth: usize, cap: usize) -> Option<usize> {
    let ws = words(m.n_letters(), depth);
    let index: HashMap<&Vec<u32>, u32> =
        ws.iter().enumerate().map(|(k, w)| (w, k as u32)).collect();
    let gens: Vec<Vec<u32>> = (0..m.n_states() as u32)
        .map(|x| ws.iter().map(|w| index[&act(m, &[x], w)]).collect())
        .collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut queue = VecDeque::new();
    for g in &gens {
        if seen.insert(g.clone()) {
            queue.push_back(g.clone());
        }
    }
    while let Some(f) = queue.pop_front() {
        for g in &gens {
            let h: Vec<u32> = f.iter().map(|&w| g[w as usize]).collect();
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(h);
            }
        }
    }
    Some(seen.len())
}

/// A machine's tables with states renamed, as plain vectors.
pub fn renamed_tables(m: &MealyMachine, sp: &[u32], lp: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let r = m.rename(sp, lp);
    (r.delta_table().to_vec(), r.rho_table().to_vec())
}

/// All permutations of `0..n`.
pub fn perms(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, (n - 1) as u32);
            out.push(q);
        }
    }
    out
}

/// Isomorphism by trying every renaming.
pub fn brute_isomorphic(a: &MealyMachine, b: &MealyMachine) -> bool {
    if a.n_states() != b.n_states() || a.n_letters() != b.n_letters() {
        return false;
    }
    let target = (b.delta_table().to_vec(), b.rho_table().to_vec());
    perms(a.n_states()).iter().any(|sp| {
        perms(a.n_letters())
            .iter()
            .any(|lp| renamed_tables(a, sp, lp) == target)
    })
}

/// Every two-state invertible reversible machine over `l` letters.
pub fn two_state_ir(l: usize) -> Vec<MealyMachine> {
    let letter_perms = perms(l);
    let mut out = Vec::new();
    let swaps = 1usize << l;
    for cols in 0..swaps {
        for r0 in &letter_perms {
            for r1 in &letter_perms {
                let mut delta = vec![0; 2 * l];
                let mut rho = vec![0; 2 * l];
                for i in 0..l {
                    let swap = (cols >> i) & 1 == 1;
                    delta[i] = swap as u32;
                    delta[l + i] = (!swap) as u32;
                    rho[i] = r0[i];
                    rho[l + i] = r1[i];
                }
                out.push(MealyMachine::from_tables(2, l, delta, rho).unwrap());
            }
        }
    }
    out
}
