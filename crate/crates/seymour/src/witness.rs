//! End-to-end witness pipelines. Every report is re-verified by the
//! independent oracle before it is returned.

use std::collections::HashMap;

use serde::Serialize;

use crate::degenerate;
use crate::error::{Error, Result};
use crate::graph::{MissingStructure, OrientedGraph, VertexId};
use crate::io;
use crate::matching;
use crate::median::{self, ModulePartition};
use crate::oracle;

/// Sedimentation steps allowed before the star pipeline gives up.
pub const SEDIMENT_STEP_BUDGET: usize = 10_000;

/// Which argument closed the case for a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofPath {
    /// A sink: its second neighborhood is trivially large.
    Sink,
    /// Feed vertex of a good median order, home block of size one.
    MatchingPrime,
    /// Feed vertex of a good median order inside a cycle block.
    MatchingBlock,
    /// Sedimentation reached a fixed point.
    StarStable,
    /// Sedimentation met the tracked out-neighbor of the removed center.
    StarPeriodic,
    /// Exhaustive scan over a partitioned instance.
    BruteForce,
}

impl ProofPath {
    pub fn tag(self) -> &'static str {
        match self {
            ProofPath::Sink => "sink",
            ProofPath::MatchingPrime => "matching-prime",
            ProofPath::MatchingBlock => "matching-block",
            ProofPath::StarStable => "star-stable",
            ProofPath::StarPeriodic => "star-periodic",
            ProofPath::BruteForce => "brute-force",
        }
    }
}

/// A verified witness: a vertex whose second out-neighborhood is at least
/// as large as its first.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub witness: VertexId,
    /// Every vertex certified by the same argument (the feed's whole home
    /// block for the matching pipeline).
    pub witnesses: Vec<VertexId>,
    pub proof_path: ProofPath,
    pub out_neighbors: Vec<VertexId>,
    pub second_out_neighbors: Vec<VertexId>,
}

impl WitnessReport {
    fn verified(
        h: &OrientedGraph,
        witness: VertexId,
        witnesses: Vec<VertexId>,
        proof_path: ProofPath,
    ) -> Result<Self> {
        debug_assert!(witnesses.contains(&witness));
        for &w in &witnesses {
            oracle::verify_witness(h, w)?;
        }
        Ok(WitnessReport {
            witness,
            out_neighbors: h.out_set(witness).ones().collect(),
            second_out_neighbors: h.second_out_neighborhood(witness)?,
            witnesses,
            proof_path,
        })
    }
}

/// Finds witnesses in a graph whose missing edges form a matching: the
/// feed vertex of a good median order of a maximum-value safe completion,
/// together with its whole home block.
pub fn witness_matching(h: &OrientedGraph) -> Result<WitnessReport> {
    matching::require_matching(h)?;
    if h.vertex_count() == 0 {
        return Err(Error::Input("the graph has no vertices".into()));
    }
    let max = matching::max_value_safe_completion(h)?;
    let t = max.completion.tournament();
    let delta = matching::build_delta(h)?;
    let partition = ModulePartition::new(t.graph(), matching::home_partition(h, &delta))?;
    let good = median::good_median_order(t, &partition, &max.median)?;
    median::feed_vertex_property(t, &partition, &good)?;
    let d = good.feed_vertex();
    let home = partition.block_of(d).to_vec();
    let proof_path = if home.len() == 1 {
        let sins = matching::special_in_neighbors(&max.completion, d)?;
        if sins.iter().all(|s| !s.type_one) {
            // Without a type-one special in-neighbor the feed is a witness
            // directly, before any block bookkeeping.
            oracle::verify_witness(h, d)?;
        }
        ProofPath::MatchingPrime
    } else {
        ProofPath::MatchingBlock
    };
    WitnessReport::verified(h, d, home, proof_path)
}

/// Finds a witness in a graph missing a matching plus a star, removing
/// the star center and sedimenting a good median order of the rest.
pub fn witness_matching_plus_star(h: &OrientedGraph) -> Result<WitnessReport> {
    match h.classify_missing_structure() {
        MissingStructure::MatchingPlusStar { center, .. } => witness_star_with_center(h, center),
        MissingStructure::PureMatching { .. } => witness_star_with_center(h, 0),
        other => Err(Error::Precondition(format!(
            "missing edges must form a matching plus at most one star, \
             classified as {other:?}"
        ))),
    }
}

/// The star pipeline with an explicit center `z`: the graph minus `z`
/// must be missing only a matching. Tracks the lowest-index out-neighbor
/// u of z; sedimentation exits when u becomes the feed vertex, when u is
/// an in-neighbor of the feed outside its tournament second
/// neighborhood, or at a fixed point.
pub fn witness_star_with_center(h: &OrientedGraph, z: VertexId) -> Result<WitnessReport> {
    if z >= h.vertex_count() {
        return Err(Error::Input(format!("center {z} out of range")));
    }
    if let Some(&sink) = h.find_sinks().first() {
        return WitnessReport::verified(h, sink, vec![sink], ProofPath::Sink);
    }
    let g = h.remove_vertex(z)?;
    matching::require_matching(&g)?;
    if g.vertex_count() == 0 {
        return Err(Error::Input("no vertices remain beside the center".into()));
    }
    // h is sinkless here, so z has an out-neighbor.
    let u_h = h.out_set(z).ones().next().expect("center has an out-neighbor");
    let u = if u_h < z { u_h } else { u_h - 1 };
    let back = |v: VertexId| if v < z { v } else { v + 1 };
    let max = matching::max_value_safe_completion(&g)?;
    let t = max.completion.tournament();
    let delta = matching::build_delta(&g)?;
    let partition = ModulePartition::new(t.graph(), matching::home_partition(&g, &delta))?;
    let mut current = median::good_median_order(t, &partition, &max.median)?;
    let mut seen: HashMap<Vec<VertexId>, usize> = HashMap::new();
    for step in 0..SEDIMENT_STEP_BUDGET {
        if seen.insert(current.order().to_vec(), step).is_some() {
            return Err(Error::InvariantViolation(
                "sedimentation revisited an ordering without meeting an \
                 exit condition"
                    .into(),
            ));
        }
        median::feed_vertex_property(t, &partition, &current)?;
        let d = current.feed_vertex();
        // Each intermediate order is a good median order, so its feed is
        // already a witness in the reduced graph.
        oracle::verify_witness(&g, d)?;
        if d == u {
            return WitnessReport::verified(h, back(u), vec![back(u)], ProofPath::StarPeriodic);
        }
        if t.has_arc(u, d) && !t.second_out_set(d).contains(u) {
            return WitnessReport::verified(h, back(d), vec![back(d)], ProofPath::StarPeriodic);
        }
        let next = median::sediment(t, &partition, &current)?;
        if next.order() == current.order() {
            return WitnessReport::verified(h, back(d), vec![back(d)], ProofPath::StarStable);
        }
        current = next;
    }
    Err(Error::Resource(format!(
        "sedimentation did not settle within {SEDIMENT_STEP_BUDGET} steps"
    )))
}

/// Two distinct witnesses in a sinkless graph missing a matching: the
/// matching pipeline's feed, then the star pipeline run with that feed
/// as the removed center.
pub fn two_witnesses_matching(h: &OrientedGraph) -> Result<(WitnessReport, WitnessReport)> {
    matching::require_matching(h)?;
    if let Some(sink) = h.find_sinks().first() {
        return Err(Error::Precondition(format!(
            "vertex {sink} is a sink; two witnesses are only guaranteed \
             without one"
        )));
    }
    let first = witness_matching(h)?;
    let second = witness_star_with_center(h, first.witness)?;
    if second.witness == first.witness {
        return Err(Error::InvariantViolation(
            "both pipelines returned the same witness".into(),
        ));
    }
    Ok((first, second))
}

/// A witness in a graph split into a 2-degenerate part and an
/// independent part: existence is guaranteed, so an index-order scan
/// must find one.
pub fn witness_degenerate(
    h: &OrientedGraph,
    two_degenerate: &[VertexId],
    independent: &[VertexId],
) -> Result<WitnessReport> {
    degenerate::validate_partition(h, two_degenerate, independent)?;
    if h.vertex_count() == 0 {
        return Err(Error::Input("the graph has no vertices".into()));
    }
    for v in 0..h.vertex_count() {
        if h.is_witness(v) {
            return WitnessReport::verified(h, v, vec![v], ProofPath::BruteForce);
        }
    }
    Err(Error::Refutation(format!(
        "no vertex has a large second neighborhood despite a valid \
         partition; instance:\n{}",
        io::format_edge_list(h)
    )))
}

/// Routes a graph to the pipeline its missing structure calls for; graphs
/// outside the matching and star classes fall back to the partition
/// search.
pub fn find_witness(h: &OrientedGraph) -> Result<WitnessReport> {
    match h.classify_missing_structure() {
        MissingStructure::PureMatching { .. } => witness_matching(h),
        MissingStructure::MatchingPlusStar { .. } => witness_matching_plus_star(h),
        MissingStructure::Other => match degenerate::find_partition(h)? {
            Some(p) => witness_degenerate(h, &p.two_degenerate, &p.independent),
            None => Err(Error::Input(
                "missing edges form neither a matching nor a matching plus \
                 a star, and no 2-degenerate/independent partition exists"
                    .into(),
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::figure2_instance;

    fn four_cycle() -> OrientedGraph {
        OrientedGraph::from_arcs(4, &[(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn matching_pipeline_on_figure_instance() {
        let (h, _) = figure2_instance();
        let report = witness_matching(&h).unwrap();
        assert!(report.witness == 0 || report.witness == 2);
        assert_eq!(report.witnesses, vec![report.witness]);
        assert_eq!(report.proof_path, ProofPath::MatchingPrime);
    }

    #[test]
    fn matching_pipeline_certifies_whole_blocks() {
        let report = witness_matching(&four_cycle()).unwrap();
        assert_eq!(report.witness, 3);
        assert_eq!(report.witnesses, vec![0, 1, 2, 3]);
        assert_eq!(report.proof_path, ProofPath::MatchingBlock);
    }

    #[test]
    fn matching_pipeline_handles_tournaments() {
        let t = OrientedGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let report = witness_matching(&t).unwrap();
        assert_eq!(report.witness, 2);
        assert_eq!(report.proof_path, ProofPath::MatchingPrime);
    }

    #[test]
    fn star_pipeline_reaches_the_tracked_vertex() {
        // 3-cycle 0 -> 1 -> 2 -> 0 plus a center 3 -> 2 missing {3,0},{3,1}.
        let h = OrientedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 0), (3, 2)]).unwrap();
        assert!(matches!(
            h.classify_missing_structure(),
            MissingStructure::MatchingPlusStar { center: 3, .. }
        ));
        let report = witness_matching_plus_star(&h).unwrap();
        assert_eq!(report.witness, 2);
        assert_eq!(report.proof_path, ProofPath::StarPeriodic);
    }

    #[test]
    fn star_pipeline_returns_sinks_immediately() {
        let h = OrientedGraph::from_arcs(2, &[(0, 1)]).unwrap();
        let report = witness_matching_plus_star(&h).unwrap();
        assert_eq!(report.witness, 1);
        assert_eq!(report.proof_path, ProofPath::Sink);
    }

    #[test]
    fn star_pipeline_rejects_other_structures() {
        // Two missing stars: {0-1, 0-2} and {3-4, 3-5}.
        let mut arcs = Vec::new();
        for u in 0..6 {
            for v in u + 1..6 {
                arcs.push((u, v));
            }
        }
        arcs.retain(|a| {
            ![(0, 1), (0, 2), (3, 4), (3, 5)].contains(a)
        });
        let h = OrientedGraph::from_arcs(6, &arcs).unwrap();
        assert!(matches!(
            witness_matching_plus_star(&h),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn two_witnesses_on_figure_instance() {
        let (h, _) = figure2_instance();
        let (first, second) = two_witnesses_matching(&h).unwrap();
        let mut pair = vec![first.witness, second.witness];
        pair.sort_unstable();
        assert_eq!(pair, vec![0, 2]);
    }

    #[test]
    fn two_witnesses_on_the_four_cycle() {
        let (first, second) = two_witnesses_matching(&four_cycle()).unwrap();
        assert_eq!(first.witness, 3);
        assert_eq!(second.witness, 1);
        assert_eq!(second.proof_path, ProofPath::StarPeriodic);
    }

    #[test]
    fn two_witnesses_requires_no_sink() {
        let t = OrientedGraph::from_arcs(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert!(matches!(
            two_witnesses_matching(&t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn degenerate_scan_finds_low_index_witnesses() {
        let cycle = OrientedGraph::from_arcs(5, &(0..5).map(|v| (v, (v + 1) % 5)).collect::<Vec<_>>())
            .unwrap();
        let report = witness_degenerate(&cycle, &[0, 1, 2, 3, 4], &[]).unwrap();
        assert_eq!(report.witness, 0);
        assert_eq!(report.proof_path, ProofPath::BruteForce);
        let star = OrientedGraph::from_arcs(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let report = witness_degenerate(&star, &[0], &[1, 2, 3]).unwrap();
        assert_eq!(report.witness, 1);
    }

    #[test]
    fn degenerate_scan_rejects_bad_partitions() {
        let cycle = OrientedGraph::from_arcs(5, &(0..5).map(|v| (v, (v + 1) % 5)).collect::<Vec<_>>())
            .unwrap();
        assert!(matches!(
            witness_degenerate(&cycle, &[0, 1, 2], &[3, 4]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn dispatch_covers_all_three_classes() {
        let (h, _) = figure2_instance();
        assert_eq!(find_witness(&h).unwrap().proof_path, ProofPath::MatchingPrime);
        let star = OrientedGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 0), (3, 2)]).unwrap();
        assert_eq!(
            find_witness(&star).unwrap().proof_path,
            ProofPath::StarPeriodic
        );
        let mut arcs = Vec::new();
        for u in 0..6 {
            for v in u + 1..6 {
                arcs.push((u, v));
            }
        }
        arcs.retain(|a| ![(0, 1), (0, 2), (3, 4), (3, 5)].contains(a));
        let other = OrientedGraph::from_arcs(6, &arcs).unwrap();
        assert_eq!(
            find_witness(&other).unwrap().proof_path,
            ProofPath::BruteForce
        );
    }

    #[test]
    fn proof_path_tags_are_stable() {
        assert_eq!(ProofPath::Sink.tag(), "sink");
        assert_eq!(ProofPath::MatchingPrime.tag(), "matching-prime");
        assert_eq!(ProofPath::MatchingBlock.tag(), "matching-block");
        assert_eq!(ProofPath::StarStable.tag(), "star-stable");
        assert_eq!(ProofPath::StarPeriodic.tag(), "star-periodic");
        assert_eq!(ProofPath::BruteForce.tag(), "brute-force");
        assert_eq!(
            serde_json::to_string(&ProofPath::StarStable).unwrap(),
            "\"star-stable\""
        );
    }
}
