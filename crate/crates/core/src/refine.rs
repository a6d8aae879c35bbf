//! Hopcroft partition refinement over a complete deterministic transition
//! table.
//!
//! Nodes are `0..n`, `succ[x * l + i]` is the successor of `x` on letter
//! `i`, and `init[x]` is an initial label. The result is the coarsest
//! partition that refines the labels and is stable under every letter, with
//! blocks numbered by their smallest node.

use std::collections::HashMap;

struct Blocks {
    elems: Vec<u32>,
    pos: Vec<u32>,
    block: Vec<u32>,
    start: Vec<u32>,
    end: Vec<u32>,
    // Number of marked elements, stored at the front of each block.
    marked: Vec<u32>,
}

impl Blocks {
    fn mark(&mut self, x: u32, touched: &mut Vec<u32>) {
        let b = self.block[x as usize] as usize;
        let p = self.pos[x as usize];
        let front = self.start[b] + self.marked[b];
        if p < front {
            return;
        }
        if self.marked[b] == 0 {
            touched.push(b as u32);
        }
        let other = self.elems[front as usize];
        self.elems.swap(p as usize, front as usize);
        self.pos[x as usize] = front;
        self.pos[other as usize] = p;
        self.marked[b] += 1;
    }

    /// Splits `b` into its marked front and unmarked rest. Returns the new
    /// block id, if any.
    fn split(&mut self, b: usize) -> Option<usize> {
        let m = self.marked[b];
        self.marked[b] = 0;
        let size = self.end[b] - self.start[b];
        if m == size {
            return None;
        }
        let id = self.start.len();
        let mid = self.start[b] + m;
        // The smaller part becomes the new block, so relabeling is cheap.
        let (new_start, new_end) = if m <= size - m {
            let r = (self.start[b], mid);
            self.start[b] = mid;
            r
        } else {
            let r = (mid, self.end[b]);
            self.end[b] = mid;
            r
        };
        self.start.push(new_start);
        self.end.push(new_end);
        self.marked.push(0);
        for k in new_start..new_end {
            self.block[self.elems[k as usize] as usize] = id as u32;
        }
        Some(id)
    }
}

/// Groups nodes by equal keys, ids in order of first appearance.
pub(crate) fn labels_from_keys<K: std::hash::Hash + Eq>(
    keys: impl IntoIterator<Item = K>,
) -> Vec<u32> {
    let mut ids = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = ids.len() as u32;
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

/// Renumbers labels so that blocks are numbered by their smallest node.
/// Returns the labels and the block count.
pub(crate) fn canonical_numbering(labels: &[u32]) -> (Vec<u32>, usize) {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let out = labels
        .iter()
        .map(|&b| {
            let next = map.len() as u32;
            *map.entry(b).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Coarsest stable refinement of `init`. Returns per-node block ids and the
/// number of blocks.
pub(crate) fn refine(n: usize, l: usize, succ: &[u32], init: &[u32]) -> (Vec<u32>, usize) {
    debug_assert_eq!(succ.len(), n * l);
    debug_assert_eq!(init.len(), n);
    if n == 0 {
        return (Vec::new(), 0);
    }

    // Predecessor lists per letter, CSR layout: preds of y on letter i are
    // pred[off[i * (n + 1) + y]..off[i * (n + 1) + y + 1]].
    let mut off = vec![0u32; l * (n + 1)];
    for x in 0..n {
        for i in 0..l {
            off[i * (n + 1) + succ[x * l + i] as usize + 1] += 1;
        }
    }
    for i in 0..l {
        for y in 0..n {
            off[i * (n + 1) + y + 1] += off[i * (n + 1) + y];
        }
    }
    let mut fill = vec![0u32; n * l];
    for i in 0..l {
        fill[i * n..(i + 1) * n].copy_from_slice(&off[i * (n + 1)..i * (n + 1) + n]);
    }
    let mut pred = vec![0u32; n * l];
    for x in 0..n {
        for i in 0..l {
            let y = succ[x * l + i] as usize;
            let slot = &mut fill[i * n + y];
            pred[i * n + *slot as usize] = x as u32;
            *slot += 1;
        }
    }

    let (init, count) = canonical_numbering(init);
    let mut sizes = vec![0u32; count];
    for &b in &init {
        sizes[b as usize] += 1;
    }
    let mut start = vec![0u32; count];
    for b in 1..count {
        start[b] = start[b - 1] + sizes[b - 1];
    }
    let end: Vec<u32> = (0..count).map(|b| start[b] + sizes[b]).collect();
    let mut cursor = start.clone();
    let mut elems = vec![0u32; n];
    let mut pos = vec![0u32; n];
    for x in 0..n {
        let b = init[x] as usize;
        elems[cursor[b] as usize] = x as u32;
        pos[x] = cursor[b];
        cursor[b] += 1;
    }
    let mut blocks = Blocks {
        elems,
        pos,
        block: init,
        start,
        end,
        marked: vec![0; count],
    };

    let mut in_work = vec![true; count];
    let mut work: Vec<u32> = (0..count as u32).collect();
    let mut touched = Vec::new();
    let mut splitter = Vec::new();

    while let Some(b) = work.pop() {
        in_work[b as usize] = false;
        splitter.clear();
        splitter.extend_from_slice(
            &blocks.elems[blocks.start[b as usize] as usize..blocks.end[b as usize] as usize],
        );
        for i in 0..l {
            for &y in &splitter {
                let lo = off[i * (n + 1) + y as usize] as usize;
                let hi = off[i * (n + 1) + y as usize + 1] as usize;
                for &x in &pred[i * n + lo..i * n + hi] {
                    blocks.mark(x, &mut touched);
                }
            }
            for c in touched.drain(..) {
                if let Some(new) = blocks.split(c as usize) {
                    // If `c` is still queued both halves get processed.
                    // Otherwise Hopcroft's rule needs only the smaller
                    // half, which `split` always puts in the new block.
                    in_work.push(true);
                    work.push(new as u32);
                }
            }
        }
    }

    canonical_numbering(&blocks.block)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_by_successor_labels() {
        // Chain 0 -> 1 -> 2 -> 2 with only node 2 labeled differently.
        let succ = [1, 2, 2];
        let (blocks, count) = refine(3, 1, &succ, &[0, 0, 1]);
        assert_eq!(count, 3);
        assert_eq!(blocks, vec![0, 1, 2]);
    }

    #[test]
    fn merges_symmetric_nodes() {
        let succ = [1, 0, 3, 2];
        let (blocks, count) = refine(4, 1, &succ, &[0, 0, 0, 0]);
        assert_eq!((blocks, count), (vec![0, 0, 0, 0], 1));
    }
}
