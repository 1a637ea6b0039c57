//! Undirected graphs and connected components of the vulnerable graph.
//!
//! Nodes are dense integers `0..n`. The vulnerable graph of an inoculation set
//! `I` is the input graph with the nodes of `I` and their incident edges
//! removed; all component queries in the crate go through [`ComponentStructure`]
//! or, for exhaustive sweeps on at most 64 nodes, the bitmask kernel
//! [`BitGraph`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    connected: bool,
}

impl Graph {
    /// Validates the edge list and builds adjacency lists.
    ///
    /// Disconnected graphs are accepted; check [`Graph::is_connected`].
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            list.push((u, v));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let mut graph = Graph {
            n,
            edges: list,
            adjacency,
            connected: false,
        };
        graph.connected = n == 0
            || vulnerable_components(&graph, &InoculationSet::empty(n)).sizes().len() == 1;
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    /// The games assume a connected graph; this flag is surfaced, not enforced.
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }
}

/// On-disk graph layout: `{"n": 3, "edges": [[0, 1], [1, 2]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::new(file.n, file.edges)
    }
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.clone(),
        }
    }
}

/// A pure classic profile: the set of inoculated nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InoculationSet {
    mask: Vec<bool>,
    count: usize,
}

impl InoculationSet {
    pub fn empty(n: usize) -> Self {
        InoculationSet {
            mask: vec![false; n],
            count: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        InoculationSet {
            mask: vec![true; n],
            count: n,
        }
    }

    pub fn from_members(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(n);
        for node in members {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
            set.insert(node);
        }
        Ok(set)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let count = mask.iter().filter(|&&b| b).count();
        InoculationSet { mask, count }
    }

    /// Bit `u` of `bits` set means node `u` is inoculated. Requires `n <= 64`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64, "bit representation needs n <= 64");
        Self::from_mask((0..n).map(|u| bits >> u & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> Option<u64> {
        (self.mask.len() <= 64).then(|| {
            self.mask
                .iter()
                .enumerate()
                .fold(0u64, |acc, (u, &b)| acc | (u64::from(b) << u))
        })
    }

    pub fn node_count(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, u: usize) -> bool {
        self.mask.get(u).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, u: usize) {
        if !self.mask[u] {
            self.mask[u] = true;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, u: usize) {
        if self.mask[u] {
            self.mask[u] = false;
            self.count -= 1;
        }
    }

    pub fn without(&self, u: usize) -> Self {
        let mut set = self.clone();
        set.remove(u);
        set
    }

    pub fn with(&self, u: usize) -> Self {
        let mut set = self.clone();
        set.insert(u);
        set
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(u, &b)| b.then_some(u))
    }

    pub fn as_mask(&self) -> &[bool] {
        &self.mask
    }

    pub(crate) fn check_size(&self, g: &Graph) -> Result<()> {
        if self.mask.len() != g.node_count() {
            return Err(Error::SizeMismatch {
                expected: g.node_count(),
                actual: self.mask.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for InoculationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, u) in self.members().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "}}")
    }
}

/// Connected components of the vulnerable graph `G_I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentStructure {
    component_of: Vec<Option<usize>>,
    sizes: Vec<usize>,
}

impl ComponentStructure {
    /// Component index of `u`, or `None` when `u` is inoculated.
    pub fn component_of(&self, u: usize) -> Option<usize> {
        self.component_of[u]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `k_u`: size of `u`'s component, 0 for inoculated nodes.
    pub fn k(&self, u: usize) -> usize {
        self.component_of[u].map_or(0, |c| self.sizes[c])
    }

    /// `Σ_u k_u`, which equals the sum of squared component sizes.
    pub fn sum_of_squares(&self) -> usize {
        self.sizes.iter().map(|s| s * s).sum()
    }

    pub fn vulnerable_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Distinct components adjacent to `u` (which is normally inoculated),
    /// in order of first appearance among `u`'s sorted neighbors.
    pub fn adjacent_components(&self, g: &Graph, u: usize) -> Vec<usize> {
        let mut found: Vec<usize> = Vec::new();
        for &v in g.neighbors(u) {
            if let Some(c) = self.component_of[v] {
                if !found.contains(&c) {
                    found.push(c);
                }
            }
        }
        found
    }

    /// Size of the component `u` would belong to if it alone were vulnerable
    /// in addition to the current vulnerable nodes.
    pub(crate) fn merged_size(&self, g: &Graph, u: usize) -> usize {
        match self.component_of[u] {
            Some(c) => self.sizes[c],
            None => {
                1 + self
                    .adjacent_components(g, u)
                    .into_iter()
                    .map(|c| self.sizes[c])
                    .sum::<usize>()
            }
        }
    }
}

/// Components of `g` after removing the nodes of `inoculated`.
pub fn vulnerable_components(g: &Graph, inoculated: &InoculationSet) -> ComponentStructure {
    vulnerable_components_masked(g, inoculated.as_mask())
}

pub(crate) fn vulnerable_components_masked(g: &Graph, blocked: &[bool]) -> ComponentStructure {
    let n = g.node_count();
    let mut component_of = vec![None; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if blocked[start] || component_of[start].is_some() {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        component_of[start] = Some(id);
        stack.push(start);
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbors(u) {
                if !blocked[v] && component_of[v].is_none() {
                    component_of[v] = Some(id);
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    ComponentStructure {
        component_of,
        sizes,
    }
}

/// Size of the component containing `j` once `j` is returned to the
/// vulnerable graph: one plus the sizes of the distinct components of `G_I`
/// adjacent to `j`.
pub fn deinoculation_component(g: &Graph, inoculated: &InoculationSet, j: usize) -> Result<usize> {
    if !inoculated.contains(j) {
        return Err(Error::NotInoculated(j));
    }
    Ok(vulnerable_components(g, inoculated).merged_size(g, j))
}

/// Neighbor bitmasks for graphs on at most 64 nodes.
///
/// Used by the exhaustive sweeps, where building adjacency-list components for
/// each of `2^n` subsets would dominate the runtime.
#[derive(Debug, Clone)]
pub struct BitGraph {
    n: usize,
    neighbors: Vec<u64>,
}

impl BitGraph {
    pub fn new(g: &Graph) -> Option<Self> {
        let n = g.node_count();
        if n > 64 {
            return None;
        }
        let neighbors = (0..n)
            .map(|u| g.neighbors(u).iter().fold(0u64, |m, &v| m | 1 << v))
            .collect();
        Some(BitGraph { n, neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn all(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Component of `start` within the node set `allowed` (which must contain it).
    pub fn component(&self, start: usize, allowed: u64) -> u64 {
        let mut reached = 1u64 << start;
        let mut frontier = reached;
        while frontier != 0 {
            let mut next = 0u64;
            let mut bits = frontier;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                next |= self.neighbors[u];
            }
            next &= allowed & !reached;
            reached |= next;
            frontier = next;
        }
        reached
    }

    /// Calls `visit` with the bitmask of each component of `allowed`.
    pub fn for_each_component(&self, allowed: u64, mut visit: impl FnMut(u64)) {
        let mut rest = allowed;
        while rest != 0 {
            let start = rest.trailing_zeros() as usize;
            let comp = self.component(start, allowed);
            visit(comp);
            rest &= !comp;
        }
    }

    /// `Σ_components size²` of the vulnerable set `allowed`.
    pub fn sum_of_squares(&self, allowed: u64) -> u64 {
        let mut total = 0u64;
        self.for_each_component(allowed, |c| {
            let s = u64::from(c.count_ones());
            total += s * s;
        });
        total
    }

    pub fn neighbors(&self, u: usize) -> u64 {
        self.neighbors[u]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn path_is_connected() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn disjoint_edges_are_flagged() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Graph::new(3, [(0, 0)]), Err(Error::SelfLoop(0))));
        assert!(matches!(
            Graph::new(3, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            Graph::new(3, [(0, 3)]),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
    }

    #[test]
    fn cycle_split_into_four() {
        let g = cycle(16);
        let set = InoculationSet::from_members(16, [0, 4, 8, 12]).unwrap();
        let comps = vulnerable_components(&g, &set);
        assert_eq!(comps.sizes(), &[3, 3, 3, 3]);
        assert_eq!(comps.k(0), 0);
        assert_eq!(comps.k(5), 3);
        assert_eq!(deinoculation_component(&g, &set, 0).unwrap(), 7);
    }

    #[test]
    fn everything_inoculated() {
        let g = cycle(5);
        let comps = vulnerable_components(&g, &InoculationSet::full(5));
        assert!(comps.sizes().is_empty());
        assert!((0..5).all(|u| comps.k(u) == 0));
        let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            deinoculation_component(&k3, &InoculationSet::full(3), 0).unwrap(),
            1
        );
    }

    #[test]
    fn path_middle() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let set = InoculationSet::from_members(3, [1]).unwrap();
        let comps = vulnerable_components(&g, &set);
        assert_eq!(comps.sizes(), &[1, 1]);
        assert_eq!((comps.k(0), comps.k(2)), (1, 1));
        assert_eq!(deinoculation_component(&g, &set, 1).unwrap(), 3);
        assert!(matches!(
            deinoculation_component(&g, &set, 0),
            Err(Error::NotInoculated(0))
        ));
    }

    #[test]
    fn bit_kernel_matches_lists() {
        let g = cycle(10);
        let bits = BitGraph::new(&g).unwrap();
        for mask in 0..(1u64 << 10) {
            let set = InoculationSet::from_bits(10, mask);
            let comps = vulnerable_components(&g, &set);
            assert_eq!(
                bits.sum_of_squares(bits.all() & !mask),
                comps.sum_of_squares() as u64
            );
        }
    }

    #[test]
    fn display_lists_members() {
        let set = InoculationSet::from_members(6, [4, 1]).unwrap();
        assert_eq!(set.to_string(), "{1,4}");
        assert_eq!(set.to_bits(), Some(0b10010));
    }
}
