//! Portraits: the action of a word of states on the rooted tree `Σ*`,
//! recorded as one alphabet permutation per vertex.
//!
//! A depth-`k` portrait labels every vertex `s` with `|s| < k`. Vertices are
//! stored in level order, so the children of vertex `v` are
//! `v·|Σ| + 1 + i` in letter order.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{LetterWord, MealyMachine, StateWord};
use crate::power::checked_size;

/// A permutation of the alphabet in image form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    /// The transposition of the two letters of a 2-letter alphabet.
    pub fn sigma() -> Self {
        Perm(vec![1, 0])
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: u32) -> u32 {
        self.0[i as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        self.0.iter().all(|&v| {
            let fresh = (v as usize) < seen.len() && !seen[v as usize];
            if fresh {
                seen[v as usize] = true;
            }
            fresh
        })
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&i| other.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            out[v as usize] = i as u32;
        }
        Perm(out)
    }

    /// `id`/`σ` for two letters, cycle notation over `names` otherwise.
    pub fn render(&self, names: &[String]) -> String {
        if self.0.len() == 2 {
            return if self.is_identity() {
                "id".into()
            } else {
                "σ".into()
            };
        }
        if self.is_identity() {
            return "id".into();
        }
        let mut seen = vec![false; self.0.len()];
        let mut out = String::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] as usize == start {
                continue;
            }
            out.push('(');
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    out.push(' ');
                }
                out.push_str(&names[i]);
                first = false;
                i = self.0[i] as usize;
            }
            out.push(')');
        }
        out
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.0.len()).map(|i| i.to_string()).collect();
        f.write_str(&self.render(&names))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PortraitError {
    #[error("portraits need an invertible machine")]
    NotInvertible,
    #[error("a depth-{depth} portrait over {arity} letters exceeds the vertex budget {budget}")]
    TooLarge {
        depth: usize,
        arity: usize,
        budget: usize,
    },
    #[error("portrait shapes differ: depth {0} over {1} letters vs depth {2} over {3} letters")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("expected a homogeneous portrait")]
    NotHomogeneous,
    #[error("expected {expected} permutations of {arity} letters")]
    BadLabels { expected: usize, arity: usize },
}

/// Default limit on portrait vertices.
pub const DEFAULT_MAX_VERTICES: usize = 1 << 20;

/// A depth-`k` portrait over an alphabet of `arity` letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Portrait {
    depth: usize,
    arity: usize,
    /// Label images, `arity` entries per vertex.
    images: Vec<u32>,
}

/// Number of vertices `s` with `|s| < depth`.
pub fn vertex_count(depth: usize, arity: usize) -> Option<usize> {
    if arity == 1 {
        return Some(depth);
    }
    let top = checked_size(arity, depth)?;
    Some((top - 1) / (arity - 1))
}

impl Portrait {
    fn check_size(depth: usize, arity: usize, budget: usize) -> Result<usize, PortraitError> {
        match vertex_count(depth, arity) {
            Some(n) if n <= budget => Ok(n),
            _ => Err(PortraitError::TooLarge {
                depth,
                arity,
                budget,
            }),
        }
    }

    /// Builds a portrait from level-order labels.
    pub fn from_labels(
        depth: usize,
        arity: usize,
        labels: &[Perm],
    ) -> Result<Portrait, PortraitError> {
        assert!(depth >= 1 && arity >= 1);
        let expected = Self::check_size(depth, arity, usize::MAX)?;
        if labels.len() != expected
            || labels
                .iter()
                .any(|p| p.size() != arity || !p.is_bijection())
        {
            return Err(PortraitError::BadLabels { expected, arity });
        }
        Ok(Portrait {
            depth,
            arity,
            images: labels.iter().flat_map(|p| p.0.iter().copied()).collect(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n_vertices(&self) -> usize {
        self.images.len() / self.arity
    }

    pub fn child(&self, v: usize, i: u32) -> usize {
        v * self.arity + 1 + i as usize
    }

    pub fn label(&self, v: usize) -> Perm {
        Perm(self.label_slice(v).to_vec())
    }

    fn label_slice(&self, v: usize) -> &[u32] {
        &self.images[v * self.arity..(v + 1) * self.arity]
    }

    pub fn labels(&self) -> Vec<Perm> {
        (0..self.n_vertices()).map(|v| self.label(v)).collect()
    }

    /// Vertex index of the word `s`, `|s| < depth`.
    pub fn vertex(&self, s: &[u32]) -> usize {
        assert!(s.len() < self.depth);
        s.iter().fold(0, |v, &i| self.child(v, i))
    }

    /// Range of vertex indices at level `l`.
    pub fn level_range(&self, l: usize) -> std::ops::Range<usize> {
        let start = vertex_count(l, self.arity).expect("level within portrait");
        let end = vertex_count(l + 1, self.arity).expect("level within portrait");
        start..end
    }

    pub fn level(&self, l: usize) -> Vec<Perm> {
        self.level_range(l).map(|v| self.label(v)).collect()
    }

    /// Applies the portrait to a word of length at most the depth.
    pub fn apply(&self, s: &[u32]) -> LetterWord {
        assert!(s.len() <= self.depth);
        let mut v = 0;
        let mut out = Vec::with_capacity(s.len());
        for (k, &i) in s.iter().enumerate() {
            out.push(self.label_slice(v)[i as usize]);
            if k + 1 < self.depth {
                v = self.child(v, i);
            }
        }
        LetterWord(out)
    }

    /// The portrait of the section below the root child `i`, one level
    /// shallower.
    pub fn section(&self, i: u32) -> Option<Portrait> {
        if self.depth < 2 {
            return None;
        }
        let mut images = Vec::with_capacity(vertex_count(self.depth - 1, self.arity)? * self.arity);
        let mut frontier = vec![self.child(0, i)];
        for _ in 1..self.depth {
            let mut next = Vec::with_capacity(frontier.len() * self.arity);
            for &v in &frontier {
                images.extend_from_slice(self.label_slice(v));
                next.extend((0..self.arity as u32).map(|j| self.child(v, j)));
            }
            frontier = next;
        }
        Some(Portrait {
            depth: self.depth - 1,
            arity: self.arity,
            images,
        })
    }

    /// Indented tree, one vertex per line, labels rendered over `names`.
    pub fn render_tree(&self, names: &[String]) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize, String::from("ε"))];
        while let Some((v, level, word)) = stack.pop() {
            let _ = writeln!(
                out,
                "{}{}: {}",
                "  ".repeat(level),
                word,
                self.label(v).render(names)
            );
            if level + 1 < self.depth {
                for i in (0..self.arity as u32).rev() {
                    let w = if level == 0 {
                        names[i as usize].clone()
                    } else {
                        format!("{word}{}", names[i as usize])
                    };
                    stack.push((self.child(v, i), level + 1, w));
                }
            }
        }
        out
    }

    /// One line per level: `level l: (label, label, …)`.
    pub fn render_levels(&self, names: &[String]) -> String {
        let mut out = String::new();
        for l in 0..self.depth {
            let labels: Vec<String> = self.level(l).iter().map(|p| p.render(names)).collect();
            let _ = writeln!(out, "level {l}: ({})", labels.join(", "));
        }
        out
    }

    /// DOT digraph of the tree; edges are labeled by letters.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph portrait {\n  node [shape=circle];\n");
        for v in 0..self.n_vertices() {
            let _ = writeln!(out, "  v{v} [label=\"{}\"];", self.label(v).render(names));
        }
        for v in 0..self.n_vertices() {
            let c = self.child(v, 0);
            if c >= self.n_vertices() {
                continue;
            }
            for i in 0..self.arity as u32 {
                let _ = writeln!(
                    out,
                    "  v{v} -> v{} [label=\"{}\"];",
                    self.child(v, i),
                    names[i as usize]
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

/// The depth-`k` portrait of `ρ_u` for an invertible machine.
pub fn portrait_of(machine: &MealyMachine, u: &[u32], k: usize) -> Result<Portrait, PortraitError> {
    portrait_of_with(machine, u, k, DEFAULT_MAX_VERTICES)
}

pub fn portrait_of_with(
    machine: &MealyMachine,
    u: &[u32],
    k: usize,
    max_vertices: usize,
) -> Result<Portrait, PortraitError> {
    assert!(k >= 1, "portrait depth must be positive");
    if !machine.is_invertible() {
        return Err(PortraitError::NotInvertible);
    }
    let arity = machine.n_letters();
    let count = Portrait::check_size(k, arity, max_vertices)?;
    let mut images = Vec::with_capacity(count * arity);
    // Section words of the current level, in vertex order.
    let mut frontier = vec![u.to_vec()];
    for level in 0..k {
        let mut next = Vec::new();
        for word in &frontier {
            for i in 0..arity as u32 {
                let mut letter = i;
                let mut section = word.clone();
                for x in section.iter_mut() {
                    let (y, o) = machine.step(*x, letter);
                    *x = y;
                    letter = o;
                }
                images.push(letter);
                if level + 1 < k {
                    next.push(section);
                }
            }
        }
        frontier = next;
    }
    Ok(Portrait {
        depth: k,
        arity,
        images,
    })
}

/// The label of the infinite portrait of `ρ_u` at vertex `s`: `ρ` of the
/// section `δ_s(u)`, restricted to one letter.
pub fn portrait_label(machine: &MealyMachine, u: &[u32], s: &[u32]) -> Perm {
    let section = section_word(machine, u, s);
    Perm(
        (0..machine.n_letters() as u32)
            .map(|i| machine.rho_apply(&section, &[i]).0[0])
            .collect(),
    )
}

/// The section of `ρ_u` below the vertex `s`, as a word: `δ_s(u)`.
pub fn section_word(machine: &MealyMachine, u: &[u32], s: &[u32]) -> StateWord {
    machine.delta_apply(s, u)
}

/// Portrait of `p` followed by `q`: `label(s) = q.label(p(s)) ∘ p.label(s)`.
pub fn portrait_product(p: &Portrait, q: &Portrait) -> Result<Portrait, PortraitError> {
    if p.depth != q.depth || p.arity != q.arity {
        return Err(PortraitError::ShapeMismatch(
            p.depth, p.arity, q.depth, q.arity,
        ));
    }
    let n = p.n_vertices();
    let mut image = vec![0usize; n];
    let mut images = vec![0u32; p.images.len()];
    for v in 0..n {
        let w = image[v];
        let (pl, ql) = (p.label_slice(v), q.label_slice(w));
        for i in 0..p.arity {
            let j = pl[i];
            images[v * p.arity + i] = ql[j as usize];
            let c = p.child(v, i as u32);
            if c < n {
                image[c] = q.child(w, j);
            }
        }
    }
    Ok(Portrait {
        depth: p.depth,
        arity: p.arity,
        images,
    })
}

pub fn identity_portrait(k: usize, arity: usize) -> Portrait {
    assert!(k >= 1 && arity >= 1);
    let count = vertex_count(k, arity).expect("portrait size overflows");
    Portrait {
        depth: k,
        arity,
        images: (0..count).flat_map(|_| 0..arity as u32).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Homogeneity {
    Homogeneous,
    AlmostHomogeneous,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneityReport {
    pub class: Homogeneity,
    /// The common label of each level, `None` where a level is mixed.
    pub levels: Vec<Option<Perm>>,
}

fn constant_label(p: &Portrait, mut vertices: impl Iterator<Item = usize>) -> Option<Perm> {
    let first = vertices.next()?;
    let label = p.label_slice(first);
    vertices
        .all(|v| p.label_slice(v) == label)
        .then(|| Perm(label.to_vec()))
}

pub fn classify_homogeneity(p: &Portrait) -> HomogeneityReport {
    let levels: Vec<Option<Perm>> = (0..p.depth)
        .map(|l| constant_label(p, p.level_range(l)))
        .collect();
    let class = if levels.iter().all(Option::is_some) {
        Homogeneity::Homogeneous
    } else if levels[..p.depth - 1].iter().all(Option::is_some)
        && deepest_level_constant_per_child(p)
    {
        Homogeneity::AlmostHomogeneous
    } else {
        Homogeneity::Neither
    };
    HomogeneityReport { class, levels }
}

fn deepest_level_constant_per_child(p: &Portrait) -> bool {
    if p.depth < 2 {
        return true;
    }
    let range = p.level_range(p.depth - 1);
    let per_child = range.len() / p.arity;
    (0..p.arity).all(|i| {
        let start = range.start + i * per_child;
        constant_label(p, start..start + per_child).is_some()
    })
}

/// The `(k+1)`-portrait with prefix `j` whose deepest level is labeled
/// `tau[i]` below the root child `i`.
pub fn build_j_tau(j: &Portrait, tau: &[Perm]) -> Result<Portrait, PortraitError> {
    if classify_homogeneity(j).class != Homogeneity::Homogeneous {
        return Err(PortraitError::NotHomogeneous);
    }
    if tau.len() != j.arity || tau.iter().any(|t| t.size() != j.arity || !t.is_bijection()) {
        return Err(PortraitError::BadLabels {
            expected: j.arity,
            arity: j.arity,
        });
    }
    let depth = j.depth + 1;
    let leaves = checked_size(j.arity, j.depth).expect("portrait size overflows");
    let per_child = leaves / j.arity;
    let mut images = j.images.clone();
    for t in tau {
        for _ in 0..per_child {
            images.extend_from_slice(&t.0);
        }
    }
    Ok(Portrait {
        depth,
        arity: j.arity,
        images,
    })
}
