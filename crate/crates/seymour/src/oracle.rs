//! Independent recomputation of neighborhoods, instance generators, and
//! the property fuzzing harness.
//!
//! The oracle side recomputes first and second neighborhoods with a
//! boolean adjacency-matrix composition, deliberately sharing no code
//! with the bitset implementation it cross-checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::degenerate::{self, Partition};
use crate::error::{Error, Result};
use crate::graph::{MissingStructure, OrientedGraph, Tournament, VertexId};
use crate::matching::{self, ForcedStatus};
use crate::median::{self, ModulePartition, SedimentOutcome};
use crate::witness;

/// Largest instance size the fuzz harness will generate.
pub const FUZZ_MAX_N: usize = 14;

fn adjacency(g: &OrientedGraph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in g.arcs() {
        adj[u][v] = true;
    }
    adj
}

/// Second out-neighborhood by boolean matrix composition with
/// first-neighborhood masking.
pub fn matrix_second_out(g: &OrientedGraph, v: VertexId) -> Result<Vec<VertexId>> {
    let n = g.vertex_count();
    if v >= n {
        return Err(Error::Input(format!("vertex {v} out of range")));
    }
    let adj = adjacency(g);
    let mut second = Vec::new();
    for w in 0..n {
        if w == v || adj[v][w] {
            continue;
        }
        if (0..n).any(|m| adj[v][m] && adj[m][w]) {
            second.push(w);
        }
    }
    Ok(second)
}

/// Cross-checks the bitset and matrix implementations of both
/// neighborhoods on every vertex.
pub fn check_neighborhood_agreement(g: &OrientedGraph) -> Result<()> {
    let adj = adjacency(g);
    for v in 0..g.vertex_count() {
        let firsts: Vec<VertexId> = g.out_set(v).ones().collect();
        let matrix_firsts: Vec<VertexId> =
            (0..g.vertex_count()).filter(|&w| adj[v][w]).collect();
        if firsts != matrix_firsts {
            return Err(Error::InvariantViolation(format!(
                "first neighborhoods of {v} disagree: {firsts:?} vs {matrix_firsts:?}"
            )));
        }
        let seconds: Vec<VertexId> = g.second_out_set(v).ones().collect();
        let matrix_seconds = matrix_second_out(g, v)?;
        if seconds != matrix_seconds {
            return Err(Error::InvariantViolation(format!(
                "second neighborhoods of {v} disagree: {seconds:?} vs {matrix_seconds:?}"
            )));
        }
    }
    Ok(())
}

/// All vertices with a large second neighborhood, computed by the matrix
/// implementation after cross-checking it against the bitset one.
pub fn oracle_all_witnesses(g: &OrientedGraph) -> Result<Vec<VertexId>> {
    check_neighborhood_agreement(g)?;
    let mut witnesses = Vec::new();
    for v in 0..g.vertex_count() {
        if matrix_second_out(g, v)?.len() >= g.out_degree(v) {
            witnesses.push(v);
        }
    }
    Ok(witnesses)
}

/// Confirms that both implementations agree `v` has a large second
/// neighborhood.
pub fn verify_witness(g: &OrientedGraph, v: VertexId) -> Result<()> {
    if v >= g.vertex_count() {
        return Err(Error::Input(format!("vertex {v} out of range")));
    }
    let bitset_says = g.is_witness(v);
    let matrix_says = matrix_second_out(g, v)?.len() >= g.out_degree(v);
    if bitset_says != matrix_says {
        return Err(Error::InvariantViolation(format!(
            "witness implementations disagree on vertex {v}"
        )));
    }
    if !bitset_says {
        return Err(Error::InvariantViolation(format!(
            "vertex {v} fails recomputation: {} out-neighbors, {} second",
            g.out_degree(v),
            matrix_second_out(g, v)?.len()
        )));
    }
    Ok(())
}

/// The six-vertex instance with no sink and exactly two vertices with
/// large second neighborhoods, plus its conventional labels.
pub fn figure2_instance() -> (OrientedGraph, Vec<&'static str>) {
    // a=0, b=1, c=2, d=3, x=4, z=5; missing {a,c} and {b,d}.
    let arcs = [
        (1, 0),
        (3, 0),
        (4, 0),
        (0, 5),
        (1, 2),
        (4, 1),
        (5, 1),
        (3, 2),
        (4, 2),
        (2, 5),
        (4, 3),
        (5, 3),
        (5, 4),
    ];
    let g = OrientedGraph::from_arcs(6, &arcs).expect("reference instance is valid");
    (g, vec!["a", "b", "c", "d", "x", "z"])
}

/// Splitmix-style derivation of one stream seed from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exhaustive maximum ordering value by plain recursion over all
/// permutations; structurally unrelated to the subset solver it checks.
pub fn brute_force_median_value(t: &Tournament) -> Result<u64> {
    let n = t.vertex_count();
    if n > 9 {
        return Err(Error::Capability(format!(
            "brute-force enumeration of {n}! orderings is out of reach"
        )));
    }
    fn go(t: &Tournament, remaining: &mut Vec<VertexId>, acc: u64, best: &mut u64) {
        if remaining.is_empty() {
            *best = (*best).max(acc);
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.swap_remove(i);
            let forward = remaining.iter().filter(|&&w| t.has_arc(v, w)).count() as u64;
            go(t, remaining, acc + forward, best);
            remaining.push(v);
            let last = remaining.len() - 1;
            remaining.swap(i, last);
        }
    }
    let mut remaining: Vec<VertexId> = (0..n).collect();
    let mut best = 0;
    go(t, &mut remaining, 0, &mut best);
    Ok(best)
}

/// Instance families the generators and the fuzz harness understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceClass {
    Tournament,
    TournamentMinusMatching,
    TournamentMinusStar,
    TournamentMinusMatchingPlusStar,
    DegeneratePartition,
}

impl InstanceClass {
    pub const ALL: [InstanceClass; 5] = [
        InstanceClass::Tournament,
        InstanceClass::TournamentMinusMatching,
        InstanceClass::TournamentMinusStar,
        InstanceClass::TournamentMinusMatchingPlusStar,
        InstanceClass::DegeneratePartition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceClass::Tournament => "tournament",
            InstanceClass::TournamentMinusMatching => "tournament-minus-matching",
            InstanceClass::TournamentMinusStar => "tournament-minus-star",
            InstanceClass::TournamentMinusMatchingPlusStar => {
                "tournament-minus-matching-plus-star"
            }
            InstanceClass::DegeneratePartition => "degenerate-partition",
        }
    }

    pub fn parse(s: &str) -> Result<InstanceClass> {
        InstanceClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                Error::Input(format!(
                    "unknown class {s:?}; expected one of {}",
                    InstanceClass::ALL.map(|c| c.name()).join(", ")
                ))
            })
    }

    /// Membership predicate used when shrinking failures.
    fn contains(self, g: &OrientedGraph) -> bool {
        match self {
            InstanceClass::Tournament => g.is_tournament(),
            InstanceClass::TournamentMinusMatching => {
                matches!(g.classify_missing_structure(), MissingStructure::PureMatching { .. })
            }
            InstanceClass::TournamentMinusStar => match g.classify_missing_structure() {
                MissingStructure::PureMatching { pairs } => pairs.len() <= 1,
                MissingStructure::MatchingPlusStar { pairs, .. } => pairs.is_empty(),
                MissingStructure::Other => false,
            },
            InstanceClass::TournamentMinusMatchingPlusStar => {
                !matches!(g.classify_missing_structure(), MissingStructure::Other)
            }
            InstanceClass::DegeneratePartition => {
                matches!(degenerate::find_partition_limited(g, FUZZ_MAX_N), Ok(Some(_)))
            }
        }
    }
}

/// A generated graph together with the planted partition when the class
/// carries one.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub class: InstanceClass,
    pub graph: OrientedGraph,
    pub partition: Option<Partition>,
}

/// Deterministic instance generation: the same (class, n, seed) always
/// yields the same graph.
pub fn generate(class: InstanceClass, n: usize, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(class, n, &mut rng)
}

fn generate_with(
    class: InstanceClass,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GeneratedInstance> {
    if n == 0 {
        return Err(Error::Input("instances need at least one vertex".into()));
    }
    let min_n = match class {
        InstanceClass::TournamentMinusStar | InstanceClass::TournamentMinusMatchingPlusStar => 2,
        _ => 1,
    };
    if n < min_n {
        return Err(Error::Input(format!(
            "class {} needs at least {min_n} vertices",
            class.name()
        )));
    }
    let (graph, partition) = match class {
        InstanceClass::Tournament => (tournament_arcs(n, rng), None),
        InstanceClass::TournamentMinusMatching => {
            // A quarter of the instances plant a four-vertex cycle block so
            // block structure shows up far more often than random
            // orientation would allow.
            let g = if n >= 5 && rng.gen_ratio(1, 4) {
                planted_block(n - 3, rng)
            } else {
                minus_matching(n, rng)
            };
            (g, None)
        }
        InstanceClass::TournamentMinusStar => (minus_star(n, rng, false), None),
        InstanceClass::TournamentMinusMatchingPlusStar => (minus_star(n, rng, true), None),
        InstanceClass::DegeneratePartition => {
            let n_b = rng.gen_range(0..=n / 3);
            let (g, p) = degenerate_instance(n - n_b, n_b, rng);
            (g, Some(p))
        }
    };
    debug_assert!(class.contains(&graph));
    Ok(GeneratedInstance { class, graph, partition })
}

fn tournament_arcs(n: usize, rng: &mut ChaCha8Rng) -> OrientedGraph {
    let mut arcs = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                arcs.push((u, v));
            } else {
                arcs.push((v, u));
            }
        }
    }
    OrientedGraph::from_arcs(n, &arcs).expect("generated tournament is valid")
}

/// Seeded random tournament.
pub fn random_tournament(n: usize, seed: u64) -> Result<Tournament> {
    if n == 0 {
        return Err(Error::Input("instances need at least one vertex".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tournament::new(tournament_arcs(n, &mut rng))
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let mut v: Vec<VertexId> = (0..n).collect();
    for i in (1..n).rev() {
        v.swap(i, rng.gen_range(0..=i));
    }
    v
}

fn minus_matching(n: usize, rng: &mut ChaCha8Rng) -> OrientedGraph {
    let g = tournament_arcs(n, rng);
    let pairs = rng.gen_range(0..=(n / 2).min(4));
    let order = shuffled(n, rng);
    delete_edges(
        &g,
        &(0..pairs).map(|i| (order[2 * i], order[2 * i + 1])).collect::<Vec<_>>(),
    )
}

fn minus_star(n: usize, rng: &mut ChaCha8Rng, with_matching: bool) -> OrientedGraph {
    let g = tournament_arcs(n, rng);
    let order = shuffled(n, rng);
    let center = order[0];
    let leaf_count = rng.gen_range(1..=(n - 1).min(5));
    let mut gone: Vec<(VertexId, VertexId)> =
        (1..=leaf_count).map(|i| (center, order[i])).collect();
    if with_matching {
        let rest = &order[1 + leaf_count..];
        let pairs = rng.gen_range(0..=(rest.len() / 2).min(3));
        gone.extend((0..pairs).map(|i| (rest[2 * i], rest[2 * i + 1])));
    }
    delete_edges(&g, &gone)
}

fn delete_edges(g: &OrientedGraph, gone: &[(VertexId, VertexId)]) -> OrientedGraph {
    let arcs: Vec<(VertexId, VertexId)> = g
        .arcs()
        .into_iter()
        .filter(|&(u, v)| {
            !gone.iter().any(|&(a, b)| (u, v) == (a, b) || (u, v) == (b, a))
        })
        .collect();
    OrientedGraph::from_arcs(g.vertex_count(), &arcs).expect("deletion keeps the graph valid")
}

/// A random tournament on `m` vertices with its first vertex blown up
/// into the four-vertex cycle block, giving a matching instance whose
/// missing-edge digraph has a cycle.
fn planted_block(m: usize, rng: &mut ChaCha8Rng) -> OrientedGraph {
    let base = tournament_arcs(m, rng);
    let mut arcs: Vec<(VertexId, VertexId)> = vec![(0, 2), (2, 1), (1, 3), (3, 0)];
    for (u, v) in base.arcs() {
        match (u, v) {
            (0, w) => arcs.extend((0..4).map(|b| (b, w + 3))),
            (w, 0) => arcs.extend((0..4).map(|b| (w + 3, b))),
            (a, b) => arcs.push((a + 3, b + 3)),
        }
    }
    OrientedGraph::from_arcs(m + 3, &arcs).expect("block substitution is valid")
}

fn degenerate_instance(
    n_a: usize,
    n_b: usize,
    rng: &mut ChaCha8Rng,
) -> (OrientedGraph, Partition) {
    let n = n_a + n_b;
    let labels = shuffled(n, rng);
    let a: Vec<VertexId> = labels[..n_a].to_vec();
    let b: Vec<VertexId> = labels[n_a..].to_vec();
    let mut arcs = Vec::new();
    // Grow the first part by attaching each vertex to at most two
    // predecessors, keeping it 2-degenerate by construction.
    for i in 1..n_a {
        let picks = rng.gen_range(0..=i.min(2));
        let prev = shuffled(i, rng);
        for &j in &prev[..picks] {
            if rng.gen_bool(0.5) {
                arcs.push((a[i], a[j]));
            } else {
                arcs.push((a[j], a[i]));
            }
        }
    }
    for &bv in &b {
        for &av in &a {
            if rng.gen_bool(0.5) {
                if rng.gen_bool(0.5) {
                    arcs.push((bv, av));
                } else {
                    arcs.push((av, bv));
                }
            }
        }
    }
    let g = OrientedGraph::from_arcs(n, &arcs).expect("grown graph is valid");
    let mut two_degenerate = a;
    let mut independent = b;
    two_degenerate.sort_unstable();
    independent.sort_unstable();
    degenerate::validate_partition(&g, &two_degenerate, &independent)
        .expect("construction satisfies its own partition");
    (g, Partition { two_degenerate, independent })
}

/// Fuzzing run description.
#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub class: InstanceClass,
    pub trials: usize,
    pub n_range: (usize, usize),
    pub master_seed: u64,
    pub jobs: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            class: InstanceClass::TournamentMinusMatching,
            trials: 100,
            n_range: (4, 10),
            master_seed: 0x5EED,
            jobs: 1,
        }
    }
}

/// A property that failed on a generated instance, with its shrunken
/// form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub seed: u64,
    pub class: String,
    pub property: String,
    pub message: String,
    pub instance: String,
    pub shrunk: String,
}

/// A conjecture probe that fired. Never treated as a bug: the instance is
/// preserved verbatim alongside its shrunken form for inspection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefutationFlag {
    pub trial: usize,
    pub seed: u64,
    pub class: String,
    pub probe: String,
    pub message: String,
    pub instance: String,
    pub shrunk: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
    pub refutation_flags: Vec<RefutationFlag>,
    /// Count of witness proof paths exercised across the run.
    pub branch_coverage: BTreeMap<String, usize>,
}

type Property = (&'static str, fn(&GeneratedInstance) -> Result<()>);

fn properties_for(class: InstanceClass) -> Vec<Property> {
    let mut props: Vec<Property> =
        vec![("first and second neighborhoods agree across implementations", |i| {
            check_neighborhood_agreement(&i.graph)
        })];
    match class {
        InstanceClass::Tournament => {
            props.push(("median-order feed vertex has a large second neighborhood", |i| {
                let t = Tournament::new(i.graph.clone())?;
                let l = median::compute_median_order(&t)?;
                verify_witness(&i.graph, l.feed_vertex())
            }));
            props.push(("matching pipeline verifies on tournaments", |i| {
                witness::witness_matching(&i.graph).map(|_| ())
            }));
        }
        InstanceClass::TournamentMinusMatching => {
            props.extend(structural_suite());
            props.push(("matching witness pipeline verifies its whole block", |i| {
                witness::witness_matching(&i.graph).map(|_| ())
            }));
            props.push(("sinkless instances yield two distinct witnesses", |i| {
                if i.graph.find_sinks().is_empty() {
                    witness::two_witnesses_matching(&i.graph).map(|_| ())
                } else {
                    Ok(())
                }
            }));
            props.push(("sedimentation terminates preserving value and goodness", |i| {
                let max = matching::max_value_safe_completion(&i.graph)?;
                let t = max.completion.tournament();
                let delta = matching::build_delta(&i.graph)?;
                let partition =
                    ModulePartition::new(t.graph(), matching::home_partition(&i.graph, &delta))?;
                let good = median::good_median_order(t, &partition, &max.median)?;
                median::feed_vertex_property(t, &partition, &good)?;
                match median::sediment_iterate(t, &partition, &good, 1000)? {
                    SedimentOutcome::Stable { .. } | SedimentOutcome::Periodic { .. } => Ok(()),
                }
            }));
        }
        InstanceClass::TournamentMinusStar | InstanceClass::TournamentMinusMatchingPlusStar => {
            props.push(("star witness pipeline verifies in both graphs", |i| {
                witness::witness_matching_plus_star(&i.graph).map(|_| ())
            }));
        }
        InstanceClass::DegeneratePartition => {
            props.push(("planted partition yields a verified witness", |i| {
                let p = i.partition.as_ref().expect("partition class carries one");
                witness::witness_degenerate(&i.graph, &p.two_degenerate, &p.independent)
                    .map(|_| ())
            }));
            props.push(("eliminable graphs stay sparse with a low out-degree vertex", |i| {
                let p = i.partition.as_ref().expect("partition class carries one");
                let sub = induced(&i.graph, &p.two_degenerate);
                match degenerate::eliminate(&sub) {
                    degenerate::Elimination::Ordered(order) => {
                        degenerate::verify_elimination(&sub, &order)?;
                        if sub.vertex_count() > 0
                            && (0..sub.vertex_count()).all(|v| sub.out_degree(v) > 1)
                        {
                            return Err(Error::InvariantViolation(
                                "no vertex of out-degree at most one".into(),
                            ));
                        }
                        Ok(())
                    }
                    degenerate::Elimination::Stuck { core } => Err(Error::InvariantViolation(
                        format!("designed 2-degenerate part stalls on {core:?}"),
                    )),
                }
            }));
        }
    }
    // The open-conjecture probes run on every class.
    props.push(("a lone witness must be a sink", |i| {
        let ws = oracle_all_witnesses(&i.graph)?;
        if let [w] = ws[..] {
            if i.graph.out_degree(w) > 0 {
                return Err(Error::Refutation(format!(
                    "single witness {w} has out-degree {}; instance:\n{}",
                    i.graph.out_degree(w),
                    crate::io::format_edge_list(&i.graph)
                )));
            }
        }
        Ok(())
    }));
    props.push(("sinkless graphs need two witnesses", |i| {
        if i.graph.find_sinks().is_empty() {
            let ws = oracle_all_witnesses(&i.graph)?;
            if ws.len() < 2 {
                return Err(Error::Refutation(format!(
                    "sinkless instance has witnesses {ws:?}; instance:\n{}",
                    crate::io::format_edge_list(&i.graph)
                )));
            }
        }
        Ok(())
    }));
    props
}

fn structural_suite() -> Vec<Property> {
    vec![
        ("missing-edge digraph stays within degree one", |i| {
            matching::build_delta(&i.graph).map(|_| ())
        }),
        ("cycle blocks are even special-cycle modules", |i| {
            let delta = matching::build_delta(&i.graph)?;
            for q in 0..delta.cycles.len() {
                matching::cycle_block(&i.graph, &delta, q)?;
            }
            Ok(())
        }),
        ("cycle blocks balance first and second neighborhoods", |i| {
            let delta = matching::build_delta(&i.graph)?;
            for q in 0..delta.cycles.len() {
                matching::block_neighborhood_balance(&i.graph, &delta, q)?;
            }
            Ok(())
        }),
        ("dual-forced edges have a digraph in-neighbor", |i| {
            let delta = matching::build_delta(&i.graph)?;
            for (e, &(a, b)) in delta.nodes.iter().enumerate() {
                if matching::forced_status(&i.graph, a, b)? == ForcedStatus::DualForced
                    && delta.predecessor(e).is_none()
                {
                    return Err(Error::InvariantViolation(format!(
                        "dual-forced edge {{{a}, {b}}} has no in-neighbor"
                    )));
                }
            }
            Ok(())
        }),
        ("singly-forced edges start paths", |i| {
            let delta = matching::build_delta(&i.graph)?;
            for (e, &(a, b)) in delta.nodes.iter().enumerate() {
                if matches!(
                    matching::forced_status(&i.graph, a, b)?,
                    ForcedStatus::SinglyForced { .. }
                ) && !delta.paths.iter().any(|p| p[0] == e)
                {
                    return Err(Error::InvariantViolation(format!(
                        "singly-forced edge {{{a}, {b}}} does not start a path"
                    )));
                }
            }
            Ok(())
        }),
        ("every choice vector builds a safe completion", |i| {
            for completion in enumerate_completions(&i.graph, 4)? {
                if !matching::is_safe_completion(&i.graph, &completion)? {
                    return Err(Error::InvariantViolation(
                        "constructed completion is unsafe".into(),
                    ));
                }
            }
            Ok(())
        }),
        ("completion-only second neighbors are special in-neighbors", |i| {
            for completion in enumerate_completions(&i.graph, 4)? {
                let t = completion.tournament();
                for v in 0..i.graph.vertex_count() {
                    let base_second = i.graph.second_out_set(v);
                    for x in t.second_out_set(v).ones() {
                        if !base_second.contains(x) && !matching::is_special_arc(&i.graph, x, v) {
                            return Err(Error::InvariantViolation(format!(
                                "{x} joins the second neighborhood of {v} without \
                                 a special arc"
                            )));
                        }
                    }
                }
            }
            Ok(())
        }),
        ("safe completions allow at most one type-one special in-neighbor", |i| {
            for completion in enumerate_completions(&i.graph, 4)? {
                for v in 0..i.graph.vertex_count() {
                    let sins = matching::special_in_neighbors(&completion, v)?;
                    if sins.iter().filter(|s| s.type_one).count() > 1 {
                        return Err(Error::InvariantViolation(format!(
                            "vertex {v} has two type-one special in-neighbors"
                        )));
                    }
                }
            }
            Ok(())
        }),
        ("module-external second neighbors come from the base graph", |i| {
            let modules = nontrivial_modules(&i.graph);
            for completion in enumerate_completions(&i.graph, 4)? {
                let t = completion.tournament();
                for module in &modules {
                    let mask: std::collections::HashSet<VertexId> =
                        module.iter().copied().collect();
                    for &v in module {
                        let base_second = i.graph.second_out_set(v);
                        for x in t.second_out_set(v).ones() {
                            if !mask.contains(&x) && !base_second.contains(x) {
                                return Err(Error::InvariantViolation(format!(
                                    "completion gives {v} the external second \
                                     neighbor {x}"
                                )));
                            }
                        }
                    }
                }
            }
            Ok(())
        }),
        ("forcing relation is acyclic", |i| {
            let delta = matching::build_delta(&i.graph)?;
            matching::forcing_relation_acyclic(&i.graph, &delta)
        }),
    ]
}

/// All safe completions when few enough choices exist, otherwise just the
/// all-low one.
fn enumerate_completions(
    g: &OrientedGraph,
    bit_cap: usize,
) -> Result<Vec<matching::Completion>> {
    let delta = matching::build_delta(g)?;
    let free = matching::free_choice_edges(g, &delta)?;
    let k = free.len();
    if k > bit_cap {
        return Ok(vec![matching::safe_completion(g, &vec![false; k])?]);
    }
    (0..1u64 << k)
        .map(|mask| {
            let choices: Vec<bool> = (0..k).map(|i| (mask >> i) & 1 == 1).collect();
            matching::safe_completion(g, &choices)
        })
        .collect()
}

/// Modules of size at least two: exhaustive for small graphs, the home
/// blocks otherwise.
fn nontrivial_modules(g: &OrientedGraph) -> Vec<Vec<VertexId>> {
    let n = g.vertex_count();
    if n <= 10 {
        let mut found = Vec::new();
        for mask in 1u64..1 << n {
            if mask.count_ones() < 2 {
                continue;
            }
            let set: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            if g.is_module(&set) {
                found.push(set);
            }
        }
        found
    } else {
        matching::build_delta(g)
            .map(|delta| {
                matching::home_partition(g, &delta)
                    .into_iter()
                    .filter(|b| b.len() >= 2)
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn induced(g: &OrientedGraph, vertices: &[VertexId]) -> OrientedGraph {
    let index: std::collections::HashMap<VertexId, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let arcs: Vec<(usize, usize)> = g
        .arcs()
        .into_iter()
        .filter_map(|(u, v)| Some((*index.get(&u)?, *index.get(&v)?)))
        .collect();
    OrientedGraph::from_arcs(vertices.len(), &arcs).expect("induced arcs are valid")
}

fn is_violation_error(e: &Error) -> bool {
    matches!(e, Error::InvariantViolation(_) | Error::Refutation(_))
}

fn remove_arc(g: &OrientedGraph, a: VertexId, b: VertexId) -> OrientedGraph {
    let arcs: Vec<(VertexId, VertexId)> =
        g.arcs().into_iter().filter(|&arc| arc != (a, b)).collect();
    OrientedGraph::from_arcs(g.vertex_count(), &arcs).expect("arc removal keeps the graph valid")
}

/// Greedy minimization: drop vertices, then arcs, as long as the class
/// still holds and the property still fails the same way.
fn shrink(
    class: InstanceClass,
    graph: &OrientedGraph,
    prop: fn(&GeneratedInstance) -> Result<()>,
    want_refutation: bool,
) -> OrientedGraph {
    let still_failing = |g: &OrientedGraph| -> bool {
        if !class.contains(g) {
            return false;
        }
        let partition = match class {
            InstanceClass::DegeneratePartition => {
                match degenerate::find_partition_limited(g, FUZZ_MAX_N) {
                    Ok(Some(p)) => Some(p),
                    _ => return false,
                }
            }
            _ => None,
        };
        let inst = GeneratedInstance { class, graph: g.clone(), partition };
        match prop(&inst) {
            Err(Error::Refutation(_)) => true,
            Err(ref e) if is_violation_error(e) => !want_refutation,
            _ => false,
        }
    };
    let mut current = graph.clone();
    loop {
        let mut improved = false;
        for v in 0..current.vertex_count() {
            if let Ok(candidate) = current.remove_vertex(v) {
                if still_failing(&candidate) {
                    current = candidate;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            continue;
        }
        for (a, b) in current.arcs() {
            let candidate = remove_arc(&current, a, b);
            if still_failing(&candidate) {
                current = candidate;
                improved = true;
                break;
            }
        }
        if !improved {
            return current;
        }
    }
}

struct TrialOutcome {
    violations: Vec<Violation>,
    flags: Vec<RefutationFlag>,
    tags: Vec<&'static str>,
}

fn run_trial(config: &FuzzConfig, trial: usize) -> TrialOutcome {
    let seed = derive_seed(config.master_seed, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(config.n_range.0..=config.n_range.1);
    let mut outcome = TrialOutcome { violations: Vec::new(), flags: Vec::new(), tags: Vec::new() };
    let instance = match generate_with(config.class, n, &mut rng) {
        Ok(i) => i,
        Err(e) => {
            outcome.violations.push(Violation {
                trial,
                seed,
                class: config.class.name().into(),
                property: "instance generation".into(),
                message: e.to_string(),
                instance: String::new(),
                shrunk: String::new(),
            });
            return outcome;
        }
    };
    let edges = crate::io::format_edge_list(&instance.graph);
    for (name, prop) in properties_for(config.class) {
        match prop(&instance) {
            Ok(()) => {}
            Err(Error::Capability(_)) | Err(Error::Resource(_)) => {}
            Err(Error::Refutation(message)) => {
                let shrunk = shrink(config.class, &instance.graph, prop, true);
                outcome.flags.push(RefutationFlag {
                    trial,
                    seed,
                    class: config.class.name().into(),
                    probe: name.into(),
                    message,
                    instance: edges.clone(),
                    shrunk: crate::io::format_edge_list(&shrunk),
                });
            }
            Err(e) => {
                let shrunk = shrink(config.class, &instance.graph, prop, false);
                outcome.violations.push(Violation {
                    trial,
                    seed,
                    class: config.class.name().into(),
                    property: name.into(),
                    message: e.to_string(),
                    instance: edges.clone(),
                    shrunk: crate::io::format_edge_list(&shrunk),
                });
            }
        }
    }
    outcome.tags = coverage_tags(&instance);
    outcome
}

fn coverage_tags(instance: &GeneratedInstance) -> Vec<&'static str> {
    let g = &instance.graph;
    let mut tags = Vec::new();
    match instance.class {
        InstanceClass::Tournament | InstanceClass::TournamentMinusMatching => {
            if let Ok(report) = witness::witness_matching(g) {
                tags.push(report.proof_path.tag());
            }
            if g.find_sinks().is_empty() {
                if let Ok((_, second)) = witness::two_witnesses_matching(g) {
                    tags.push(second.proof_path.tag());
                }
            }
        }
        InstanceClass::TournamentMinusStar | InstanceClass::TournamentMinusMatchingPlusStar => {
            if let Ok(report) = witness::witness_matching_plus_star(g) {
                tags.push(report.proof_path.tag());
            }
        }
        InstanceClass::DegeneratePartition => {
            if let Some(p) = &instance.partition {
                if let Ok(report) =
                    witness::witness_degenerate(g, &p.two_degenerate, &p.independent)
                {
                    tags.push(report.proof_path.tag());
                }
            }
        }
    }
    tags
}

/// Runs the configured number of trials, each on its own derived seed,
/// and merges results in trial order. Identical configs give identical
/// reports regardless of `jobs`.
pub fn fuzz(config: &FuzzConfig) -> Result<FuzzReport> {
    let (lo, hi) = config.n_range;
    if lo == 0 || lo > hi {
        return Err(Error::Input(format!("invalid size range {lo}..={hi}")));
    }
    if hi > FUZZ_MAX_N {
        return Err(Error::Capability(format!(
            "fuzzing is limited to {FUZZ_MAX_N} vertices, asked for {hi}"
        )));
    }
    let outcomes: Vec<TrialOutcome> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, t))
                .collect()
        })
    } else {
        (0..config.trials).map(|t| run_trial(config, t)).collect()
    };
    let mut report = FuzzReport {
        trials: config.trials,
        violations: Vec::new(),
        refutation_flags: Vec::new(),
        branch_coverage: BTreeMap::new(),
    };
    for outcome in outcomes {
        report.violations.extend(outcome.violations);
        report.refutation_flags.extend(outcome.flags);
        for tag in outcome.tags {
            *report.branch_coverage.entry(tag.to_string()).or_insert(0) += 1;
        }
    }
    Ok(report)
}
