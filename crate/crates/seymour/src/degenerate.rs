//! Vertex partitions into a 2-degenerate part and an independent part,
//! with greedy elimination certificates.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{OrientedGraph, VertexId};

/// Exhaustive partition search is capped at this many vertices by default.
pub const DEFAULT_PARTITION_LIMIT: usize = 20;

/// Result of greedy low-degree elimination: either every vertex was
/// removed while its remaining degree was at most two, or the process
/// stalled on a core where every degree is at least three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elimination {
    Ordered(Vec<VertexId>),
    Stuck { core: Vec<VertexId> },
}

fn underlying(g: &OrientedGraph) -> Vec<FixedBitSet> {
    (0..g.vertex_count())
        .map(|v| {
            let mut row = g.out_set(v).clone();
            row.union_with(g.in_set(v));
            row
        })
        .collect()
}

/// Greedy elimination, always removing the smallest-index vertex whose
/// remaining underlying degree is at most two. The stuck core, if any, is
/// independent of removal order.
pub fn eliminate(g: &OrientedGraph) -> Elimination {
    let n = g.vertex_count();
    let und = underlying(g);
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = alive.ones().find(|&v| {
            let mut row = und[v].clone();
            row.intersect_with(&alive);
            row.count_ones(..) <= 2
        });
        match next {
            Some(v) => {
                alive.remove(v);
                order.push(v);
            }
            None => return Elimination::Stuck { core: alive.ones().collect() },
        }
    }
    Elimination::Ordered(order)
}

pub fn is_two_degenerate(g: &OrientedGraph) -> bool {
    matches!(eliminate(g), Elimination::Ordered(_))
}

/// Checks an elimination order: it must visit every vertex once, each
/// vertex must have at most two neighbors among those not yet removed,
/// and the arc count must respect the bound such orders imply
/// (2n - 3 for n >= 2).
pub fn verify_elimination(g: &OrientedGraph, order: &[VertexId]) -> Result<()> {
    let n = g.vertex_count();
    if order.len() != n {
        return Err(Error::Input(format!(
            "order has {} entries for {n} vertices",
            order.len()
        )));
    }
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let und = underlying(g);
    for &v in order {
        if v >= n || !alive.contains(v) {
            return Err(Error::Input(format!("order repeats or exceeds vertex {v}")));
        }
        let mut row = und[v].clone();
        row.intersect_with(&alive);
        let deg = row.count_ones(..);
        if deg > 2 {
            return Err(Error::Input(format!(
                "vertex {v} has remaining degree {deg} at its elimination step"
            )));
        }
        alive.remove(v);
    }
    let bound = if n >= 2 { 2 * n - 3 } else { 0 };
    if g.arc_count() > bound {
        return Err(Error::InvariantViolation(format!(
            "{} arcs exceed the bound {bound} for an eliminable graph on {n} vertices",
            g.arc_count()
        )));
    }
    Ok(())
}

/// A vertex partition whose first part induces a 2-degenerate graph and
/// whose second part is independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub two_degenerate: Vec<VertexId>,
    pub independent: Vec<VertexId>,
}

/// Validates a proposed partition: the parts must be disjoint and cover
/// every vertex, the second part must span no arcs, and the first must
/// induce a 2-degenerate graph.
pub fn validate_partition(
    g: &OrientedGraph,
    two_degenerate: &[VertexId],
    independent: &[VertexId],
) -> Result<()> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    for &v in two_degenerate.iter().chain(independent) {
        if v >= n {
            return Err(Error::Input(format!("vertex {v} out of range")));
        }
        if seen[v] {
            return Err(Error::Input(format!("vertex {v} appears twice")));
        }
        seen[v] = true;
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::Input(format!("vertex {v} is in neither part")));
    }
    for (i, &u) in independent.iter().enumerate() {
        for &v in &independent[i + 1..] {
            if g.has_arc(u, v) || g.has_arc(v, u) {
                return Err(Error::Input(format!(
                    "independent part spans the arc between {u} and {v}"
                )));
            }
        }
    }
    let induced = induced_subgraph(g, two_degenerate);
    if !is_two_degenerate(&induced) {
        return Err(Error::Input(
            "first part does not induce a 2-degenerate graph".into(),
        ));
    }
    Ok(())
}

fn induced_subgraph(g: &OrientedGraph, vertices: &[VertexId]) -> OrientedGraph {
    let index: std::collections::HashMap<VertexId, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut arcs = Vec::new();
    for (u, v) in g.arcs() {
        if let (Some(&iu), Some(&iv)) = (index.get(&u), index.get(&v)) {
            arcs.push((iu, iv));
        }
    }
    OrientedGraph::from_arcs(vertices.len(), &arcs).expect("induced arcs are valid")
}

/// Searches all ways to split the vertices, trying candidate independent
/// parts in ascending bitmask order, and returns the first valid
/// partition if one exists.
pub fn find_partition(g: &OrientedGraph) -> Result<Option<Partition>> {
    find_partition_limited(g, DEFAULT_PARTITION_LIMIT)
}

pub fn find_partition_limited(g: &OrientedGraph, limit: usize) -> Result<Option<Partition>> {
    let n = g.vertex_count();
    if n > limit || limit > 63 {
        return Err(Error::Capability(format!(
            "partition search covers 2^{n} subsets, limit is {}",
            limit.min(63)
        )));
    }
    let und: Vec<u64> = (0..n)
        .map(|v| {
            let mut row = 0u64;
            for w in g.out_set(v).ones() {
                row |= 1 << w;
            }
            for w in g.in_set(v).ones() {
                row |= 1 << w;
            }
            row
        })
        .collect();
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    'masks: for bmask in 0..=full {
        let mut m = bmask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if und[v] & bmask != 0 {
                continue 'masks;
            }
        }
        if mask_two_degenerate(&und, full & !bmask) {
            let two_degenerate = (0..n).filter(|&v| bmask & (1 << v) == 0).collect();
            let independent = (0..n).filter(|&v| bmask & (1 << v) != 0).collect();
            return Ok(Some(Partition { two_degenerate, independent }));
        }
    }
    Ok(None)
}

fn mask_two_degenerate(und: &[u64], mut alive: u64) -> bool {
    while alive != 0 {
        let mut m = alive;
        let mut removed = false;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if (und[v] & alive).count_ones() <= 2 {
                alive &= !(1 << v);
                removed = true;
                break;
            }
        }
        if !removed {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transitive(n: usize) -> OrientedGraph {
        let mut arcs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                arcs.push((u, v));
            }
        }
        OrientedGraph::from_arcs(n, &arcs).unwrap()
    }

    fn directed_cycle(n: usize) -> OrientedGraph {
        let arcs: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        OrientedGraph::from_arcs(n, &arcs).unwrap()
    }

    #[test]
    fn paths_and_cycles_eliminate_in_index_order() {
        let path = OrientedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(eliminate(&path), Elimination::Ordered(vec![0, 1, 2, 3]));
        assert_eq!(
            eliminate(&directed_cycle(5)),
            Elimination::Ordered(vec![0, 1, 2, 3, 4])
        );
    }

    #[test]
    fn complete_graphs_stall_on_their_core() {
        assert_eq!(
            eliminate(&transitive(4)),
            Elimination::Stuck { core: vec![0, 1, 2, 3] }
        );
        assert!(!is_two_degenerate(&transitive(8)));
        assert!(is_two_degenerate(&transitive(3)));
    }

    #[test]
    fn elimination_orders_verify() {
        let path = OrientedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        verify_elimination(&path, &[0, 1, 2, 3]).unwrap();
        verify_elimination(&path, &[3, 2, 1, 0]).unwrap();
        assert!(verify_elimination(&path, &[0, 1, 2]).is_err());
        assert!(verify_elimination(&path, &[0, 0, 2, 3]).is_err());
        // Every vertex of a 4-clique starts at degree three.
        assert!(verify_elimination(&transitive(4), &[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn partition_of_a_clique_peels_one_vertex() {
        let p = find_partition(&transitive(4)).unwrap().unwrap();
        assert_eq!(p.independent, vec![0]);
        assert_eq!(p.two_degenerate, vec![1, 2, 3]);
        validate_partition(&transitive(4), &p.two_degenerate, &p.independent).unwrap();
    }

    #[test]
    fn sparse_graphs_need_no_independent_part() {
        let p = find_partition(&directed_cycle(5)).unwrap().unwrap();
        assert!(p.independent.is_empty());
        assert_eq!(p.two_degenerate, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn dense_graphs_have_no_partition() {
        assert_eq!(find_partition(&transitive(8)).unwrap(), None);
    }

    #[test]
    fn empty_graph_partitions_trivially() {
        let g = OrientedGraph::from_arcs(0, &[]).unwrap();
        let p = find_partition(&g).unwrap().unwrap();
        assert!(p.two_degenerate.is_empty() && p.independent.is_empty());
    }

    #[test]
    fn partition_search_respects_the_limit() {
        assert!(matches!(
            find_partition_limited(&transitive(4), 3),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn partition_validation_rejects_bad_splits() {
        let g = transitive(4);
        // Arc spanned by the independent part.
        assert!(validate_partition(&g, &[0, 1], &[2, 3]).is_err());
        // First part too dense.
        assert!(validate_partition(&g, &[0, 1, 2, 3], &[]).is_err());
        // Coverage and duplication.
        assert!(validate_partition(&g, &[0, 1], &[2]).is_err());
        assert!(validate_partition(&g, &[0, 1, 2], &[2, 3]).is_err());
        assert!(validate_partition(&g, &[0, 1, 2], &[4]).is_err());
    }
}
