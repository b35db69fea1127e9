//! Oriented graphs on dense integer vertices with bitset adjacency.
//!
//! An oriented graph has no loops and no digons: for any pair {u, v} at
//! most one of the arcs (u, v), (v, u) is present. Pairs with neither arc
//! are the graph's missing edges.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Immutable oriented graph. Both adjacency directions are stored so
/// in-neighborhood queries are as cheap as out-neighborhood ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    n: usize,
    out: Vec<FixedBitSet>,
    inn: Vec<FixedBitSet>,
}

impl OrientedGraph {
    /// Builds a graph from an arc list. Rejects out-of-range endpoints,
    /// loops, and digons. Duplicate arcs are collapsed.
    pub fn from_arcs(n: usize, arcs: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut out = vec![FixedBitSet::with_capacity(n); n];
        let mut inn = vec![FixedBitSet::with_capacity(n); n];
        for &(u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::Input(format!(
                    "arc ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Input(format!("loop at vertex {u}")));
            }
            if out[v].contains(u) {
                return Err(Error::Input(format!(
                    "digon between {v} and {u}: both arcs present"
                )));
            }
            out[u].insert(v);
            inn[v].insert(u);
        }
        Ok(OrientedGraph { n, out, inn })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|row| row.count_ones(..)).sum()
    }

    /// All arcs in (tail, head) lexicographic order.
    pub fn arcs(&self) -> Vec<(VertexId, VertexId)> {
        let mut all = Vec::with_capacity(self.arc_count());
        for u in 0..self.n {
            for v in self.out[u].ones() {
                all.push((u, v));
            }
        }
        all
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n && v < self.n && self.out[u].contains(v)
    }

    pub fn out_set(&self, v: VertexId) -> &FixedBitSet {
        &self.out[v]
    }

    pub fn in_set(&self, v: VertexId) -> &FixedBitSet {
        &self.inn[v]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out[v].count_ones(..)
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.inn[v].count_ones(..)
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.n {
            return Err(Error::Input(format!(
                "vertex {v} out of range for {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    /// Vertices at directed distance exactly two from `v`: reachable by a
    /// two-arc walk but not out-neighbors and not `v` itself.
    pub fn second_out_set(&self, v: VertexId) -> FixedBitSet {
        let mut reach = FixedBitSet::with_capacity(self.n);
        for w in self.out[v].ones() {
            reach.union_with(&self.out[w]);
        }
        reach.difference_with(&self.out[v]);
        reach.remove(v);
        reach
    }

    pub fn second_out_neighborhood(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(self.second_out_set(v).ones().collect())
    }

    /// Whether the second out-neighborhood is at least as large as the first.
    pub fn is_witness(&self, v: VertexId) -> bool {
        self.second_out_set(v).count_ones(..) >= self.out_degree(v)
    }

    pub fn neighborhood_report(&self, v: VertexId) -> Result<NeighborhoodReport> {
        self.check_vertex(v)?;
        let out: Vec<VertexId> = self.out[v].ones().collect();
        let second: Vec<VertexId> = self.second_out_set(v).ones().collect();
        Ok(NeighborhoodReport {
            vertex: v,
            is_witness: second.len() >= out.len(),
            out,
            second,
        })
    }

    /// Vertices with no out-neighbors, ascending.
    pub fn find_sinks(&self) -> Vec<VertexId> {
        (0..self.n).filter(|&v| self.out_degree(v) == 0).collect()
    }

    /// Unordered non-adjacent pairs {u, v}, as (u, v) with u < v, ascending.
    pub fn missing_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut missing = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.out[u].contains(v) && !self.out[v].contains(u) {
                    missing.push((u, v));
                }
            }
        }
        missing
    }

    pub fn is_tournament(&self) -> bool {
        self.missing_edges().is_empty()
    }

    /// Non-neighbors of `v` (no arc either way), ascending.
    pub fn non_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        (0..self.n)
            .filter(|&u| u != v && !self.out[v].contains(u) && !self.out[u].contains(v))
            .collect()
    }

    /// A set S is a module when all members have identical out- and
    /// in-neighborhoods outside S.
    pub fn is_module(&self, set: &[VertexId]) -> bool {
        if set.iter().any(|&v| v >= self.n) {
            return false;
        }
        let mut mask = FixedBitSet::with_capacity(self.n);
        for &v in set {
            mask.insert(v);
        }
        let Some(&first) = set.first() else {
            return true;
        };
        let outside_row = |rows: &[FixedBitSet], v: VertexId| {
            let mut row = rows[v].clone();
            row.difference_with(&mask);
            row
        };
        let out0 = outside_row(&self.out, first);
        let in0 = outside_row(&self.inn, first);
        set.iter().all(|&v| {
            outside_row(&self.out, v) == out0 && outside_row(&self.inn, v) == in0
        })
    }

    /// Classifies the missing-edge set as a matching, a matching plus a
    /// star, or neither. The star center is the vertex of maximum missing
    /// degree, ties broken by smallest index.
    pub fn classify_missing_structure(&self) -> MissingStructure {
        let missing = self.missing_edges();
        let mut degree = vec![0usize; self.n];
        for &(u, v) in &missing {
            degree[u] += 1;
            degree[v] += 1;
        }
        let max_degree = degree.iter().copied().max().unwrap_or(0);
        if max_degree <= 1 {
            return MissingStructure::PureMatching { pairs: missing };
        }
        let center = degree.iter().position(|&d| d == max_degree).unwrap();
        let mut pairs = Vec::new();
        let mut leaves = Vec::new();
        for &(u, v) in &missing {
            if u == center {
                leaves.push(v);
            } else if v == center {
                leaves.push(u);
            } else {
                pairs.push((u, v));
            }
        }
        let mut rest_degree = vec![0usize; self.n];
        for &(u, v) in &pairs {
            rest_degree[u] += 1;
            rest_degree[v] += 1;
        }
        if rest_degree.iter().any(|&d| d > 1) {
            return MissingStructure::Other;
        }
        leaves.sort_unstable();
        MissingStructure::MatchingPlusStar { pairs, center, leaves }
    }

    /// The graph induced on all vertices except `z`. Surviving vertices
    /// are renumbered: old index i maps to i when i < z, else i - 1.
    pub fn remove_vertex(&self, z: VertexId) -> Result<OrientedGraph> {
        self.check_vertex(z)?;
        let map = |v: VertexId| if v < z { v } else { v - 1 };
        let arcs: Vec<_> = self
            .arcs()
            .into_iter()
            .filter(|&(u, v)| u != z && v != z)
            .map(|(u, v)| (map(u), map(v)))
            .collect();
        OrientedGraph::from_arcs(self.n - 1, &arcs)
    }

    /// A copy with the arc (u, v) replaced by (v, u).
    pub fn reverse_arc(&self, u: VertexId, v: VertexId) -> Result<OrientedGraph> {
        if !self.has_arc(u, v) {
            return Err(Error::Input(format!("arc ({u}, {v}) not present")));
        }
        let arcs: Vec<_> = self
            .arcs()
            .into_iter()
            .map(|a| if a == (u, v) { (v, u) } else { a })
            .collect();
        OrientedGraph::from_arcs(self.n, &arcs)
    }
}

/// How the missing-edge set decomposes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MissingStructure {
    PureMatching {
        pairs: Vec<(VertexId, VertexId)>,
    },
    MatchingPlusStar {
        pairs: Vec<(VertexId, VertexId)>,
        center: VertexId,
        leaves: Vec<VertexId>,
    },
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighborhoodReport {
    pub vertex: VertexId,
    pub out: Vec<VertexId>,
    pub second: Vec<VertexId>,
    pub is_witness: bool,
}

/// An oriented graph with no missing edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament(OrientedGraph);

impl Tournament {
    pub fn new(graph: OrientedGraph) -> Result<Self> {
        let missing = graph.missing_edges();
        if let Some(&(u, v)) = missing.first() {
            return Err(Error::Input(format!(
                "not a tournament: {} missing edges (first is {{{u}, {v}}})",
                missing.len()
            )));
        }
        Ok(Tournament(graph))
    }

    pub fn from_arcs(n: usize, arcs: &[(VertexId, VertexId)]) -> Result<Self> {
        Tournament::new(OrientedGraph::from_arcs(n, arcs)?)
    }

    pub fn graph(&self) -> &OrientedGraph {
        &self.0
    }

    pub fn into_graph(self) -> OrientedGraph {
        self.0
    }

    pub fn reverse_arc(&self, u: VertexId, v: VertexId) -> Result<Tournament> {
        Ok(Tournament(self.0.reverse_arc(u, v)?))
    }
}

impl std::ops::Deref for Tournament {
    type Target = OrientedGraph;

    fn deref(&self) -> &OrientedGraph {
        &self.0
    }
}
