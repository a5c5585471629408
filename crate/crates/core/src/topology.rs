//! Covalent bond tree and 1-2 / 1-3 / 1-4 pair classification.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};

pub const NO_PARENT: usize = usize::MAX;
/// Residue index given to hetero atoms; they always interact in full.
pub const NO_RESIDUE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionClass {
    Bonded12,
    Pair13,
    Pair14,
    Full,
}

/// Weights (elec, vdW) per interaction class. 1-2 pairs are always 0; `full`
/// is 1 except when gating a term off entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub w13: (f64, f64),
    pub w14: (f64, f64),
    pub full: (f64, f64),
}

impl WeightTable {
    pub fn new(w13_elec: f64, w13_vdw: f64, w14_elec: f64, w14_vdw: f64) -> Self {
        WeightTable {
            w13: (w13_elec, w13_vdw),
            w14: (w14_elec, w14_vdw),
            full: (1.0, 1.0),
        }
    }

    pub fn zero() -> Self {
        WeightTable {
            w13: (0.0, 0.0),
            w14: (0.0, 0.0),
            full: (0.0, 0.0),
        }
    }

    pub fn elec(&self, c: InteractionClass) -> f64 {
        match c {
            InteractionClass::Bonded12 => 0.0,
            InteractionClass::Pair13 => self.w13.0,
            InteractionClass::Pair14 => self.w14.0,
            InteractionClass::Full => self.full.0,
        }
    }

    pub fn vdw(&self, c: InteractionClass) -> f64 {
        match c {
            InteractionClass::Bonded12 => 0.0,
            InteractionClass::Pair13 => self.w13.1,
            InteractionClass::Pair14 => self.w14.1,
            InteractionClass::Full => self.full.1,
        }
    }
}

impl Default for WeightTable {
    fn default() -> Self {
        Self::new(0.0, 0.0, 1.0 / 1.2, 0.5)
    }
}

/// Spanning tree of the bond graph. Atoms outside the tree (hetero atoms) have
/// no parent and residue [`NO_RESIDUE`].
#[derive(Debug, Clone, PartialEq)]
pub struct BondTree {
    pub parent: Vec<usize>,
    pub residue_of: Vec<usize>,
    pub root: usize,
    pub ring_exclusions: Vec<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Tree over `n` atoms from a bond list. Edges that close a cycle, in list
/// order, are dropped and recorded. Atoms with `residue_of == NO_RESIDUE` are
/// left out of the tree; every other atom must be reachable from `root`.
pub fn build_tree_from(n: usize, bonds: &[(usize, usize)], root: usize, residue_of: Vec<usize>) -> Result<BondTree> {
    let mut uf = UnionFind::new(n);
    let mut adj_start = vec![0usize; n + 1];
    let mut kept = Vec::with_capacity(bonds.len());
    let mut ring_exclusions = Vec::new();
    for &(a, b) in bonds {
        if uf.union(a, b) {
            kept.push((a, b));
            adj_start[a + 1] += 1;
            adj_start[b + 1] += 1;
        } else {
            ring_exclusions.push((a, b));
        }
    }
    for i in 0..n {
        adj_start[i + 1] += adj_start[i];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0usize; 2 * kept.len()];
    for &(a, b) in &kept {
        adj[fill[a]] = b;
        fill[a] += 1;
        adj[fill[b]] = a;
        fill[b] += 1;
    }
    let mut parent = vec![NO_PARENT; n];
    let mut visited = vec![false; n];
    let mut queue = VecDeque::new();
    visited[root] = true;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[adj_start[v]..adj_start[v + 1]] {
            if !visited[w] {
                visited[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    for i in 0..n {
        if residue_of[i] != NO_RESIDUE && !visited[i] {
            return Err(Error::Disconnected(i));
        }
    }
    Ok(BondTree {
        parent,
        residue_of,
        root,
        ring_exclusions,
    })
}

/// Bond tree of a chain rooted at the N-terminal N.
pub fn build_tree(chain: &Chain) -> Result<BondTree> {
    let residue_of: Vec<usize> = chain.atoms.iter().map(|a| a.residue.unwrap_or(NO_RESIDUE)).collect();
    let root = chain
        .find_atom(0, "N")
        .ok_or(Error::EmptyStructure)?;
    build_tree_from(chain.atoms.len(), &chain.bonds, root, residue_of)
}

impl BondTree {
    fn p(&self, i: usize) -> usize {
        if i == NO_PARENT {
            NO_PARENT
        } else {
            self.parent[i]
        }
    }

    /// O(1) classification from parent, grandparent and great-grandparent links.
    pub fn classify(&self, i: usize, j: usize) -> Result<InteractionClass> {
        if i == j {
            return Err(Error::SameAtom(i));
        }
        Ok(self.classify_unchecked(i, j))
    }

    #[inline]
    pub fn classify_unchecked(&self, i: usize, j: usize) -> InteractionClass {
        let (ri, rj) = (self.residue_of[i], self.residue_of[j]);
        if ri == NO_RESIDUE || rj == NO_RESIDUE || ri.abs_diff(rj) >= 2 {
            return InteractionClass::Full;
        }
        let (pi, pj) = (self.p(i), self.p(j));
        if pi == j || pj == i {
            return InteractionClass::Bonded12;
        }
        let (gi, gj) = (self.p(pi), self.p(pj));
        if gi == j || gj == i || (pi == pj && pi != NO_PARENT) {
            return InteractionClass::Pair13;
        }
        let (ggi, ggj) = (self.p(gi), self.p(gj));
        if ggi == j || ggj == i || (gi == pj && gi != NO_PARENT) || (gj == pi && gj != NO_PARENT) {
            return InteractionClass::Pair14;
        }
        InteractionClass::Full
    }

    /// Path length in the tree between two atoms, by breadth-first search.
    pub fn path_length(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.parent.len();
        let mut adj = vec![Vec::new(); n];
        for (c, &p) in self.parent.iter().enumerate() {
            if p != NO_PARENT {
                adj[c].push(p);
                adj[p].push(c);
            }
        }
        let mut dist = vec![usize::MAX; n];
        dist[i] = 0;
        let mut q = VecDeque::from([i]);
        while let Some(v) = q.pop_front() {
            if v == j {
                return Some(dist[v]);
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        None
    }

    pub fn depth(&self, mut i: usize) -> usize {
        let mut d = 0;
        while self.parent[i] != NO_PARENT {
            i = self.parent[i];
            d += 1;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_ring_has_one_exclusion() {
        // 0-1-2-3-4-0 ring with a tail 4-5.
        let bonds = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (4, 5)];
        let t = build_tree_from(6, &bonds, 0, vec![0; 6]).unwrap();
        assert_eq!(t.ring_exclusions, vec![(4, 0)]);
        assert_eq!(t.classify(0, 4).unwrap(), InteractionClass::Full);
        assert_eq!(t.path_length(0, 4), Some(4));
    }

    #[test]
    fn disconnected_is_error() {
        let r = build_tree_from(3, &[(0, 1)], 0, vec![0; 3]);
        assert!(matches!(r, Err(Error::Disconnected(2))));
    }

    #[test]
    fn same_atom_is_error() {
        let t = build_tree_from(2, &[(0, 1)], 0, vec![0; 2]).unwrap();
        assert!(matches!(t.classify(1, 1), Err(Error::SameAtom(1))));
    }

    #[test]
    fn linear_classes() {
        let bonds: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
        let t = build_tree_from(7, &bonds, 0, vec![0; 7]).unwrap();
        assert_eq!(t.classify(2, 3).unwrap(), InteractionClass::Bonded12);
        assert_eq!(t.classify(2, 4).unwrap(), InteractionClass::Pair13);
        assert_eq!(t.classify(2, 5).unwrap(), InteractionClass::Pair14);
        assert_eq!(t.classify(2, 6).unwrap(), InteractionClass::Full);
        assert_eq!(t.classify(5, 2).unwrap(), InteractionClass::Pair14);
    }

    #[test]
    fn branch_classes() {
        // 0 - 1 - 2, with 3 and 4 hanging off 1, and 5 off 3.
        let bonds = [(0, 1), (1, 2), (1, 3), (1, 4), (3, 5)];
        let t = build_tree_from(6, &bonds, 0, vec![0; 6]).unwrap();
        assert_eq!(t.classify(3, 4).unwrap(), InteractionClass::Pair13);
        assert_eq!(t.classify(5, 4).unwrap(), InteractionClass::Pair14);
        assert_eq!(t.classify(5, 0).unwrap(), InteractionClass::Pair14);
        assert_eq!(t.classify(5, 2).unwrap(), InteractionClass::Pair14);
    }

    #[test]
    fn residue_gap_is_full() {
        let bonds = [(0, 1), (1, 2)];
        let t = build_tree_from(3, &bonds, 0, vec![0, 1, 2]).unwrap();
        assert_eq!(t.classify(0, 2).unwrap(), InteractionClass::Full);
    }
}
