//! Structure of oriented graphs whose missing edges form a matching:
//! special arcs and cycles, the digraph on missing edges, forced
//! orientations, and safe completions into tournaments.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{MissingStructure, OrientedGraph, Tournament, VertexId};
use crate::median::{self, MedianOrder};

/// Enumeration cap for the safe-completion search: at most 2^16 choice
/// vectors are tried.
pub const DEFAULT_CHOICE_LIMIT: usize = 16;

fn edge_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

/// Requires the missing edges to form a matching (possibly empty) and
/// returns them.
pub fn require_matching(g: &OrientedGraph) -> Result<Vec<(VertexId, VertexId)>> {
    match g.classify_missing_structure() {
        MissingStructure::PureMatching { pairs } => Ok(pairs),
        other => Err(Error::Precondition(format!(
            "missing edges must form a matching, classified as {other:?}"
        ))),
    }
}

/// An arc (x, y) is special when x is not in the second out-neighborhood
/// of y. No directed triangle contains a special arc.
pub fn is_special_arc(g: &OrientedGraph, x: VertexId, y: VertexId) -> bool {
    g.has_arc(x, y) && !g.second_out_set(y).contains(x)
}

/// All special arcs, in arc order. Verifies the triangle-freeness that
/// specialness guarantees.
pub fn special_arcs(g: &OrientedGraph) -> Result<Vec<(VertexId, VertexId)>> {
    require_matching(g)?;
    let mut arcs = Vec::new();
    for (x, y) in g.arcs() {
        if is_special_arc(g, x, y) {
            for w in g.out_set(y).ones() {
                if g.has_arc(w, x) {
                    return Err(Error::InvariantViolation(format!(
                        "special arc ({x}, {y}) lies on directed triangle \
                         {x} -> {y} -> {w} -> {x}"
                    )));
                }
            }
            arcs.push((x, y));
        }
    }
    Ok(arcs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialCycleReport {
    pub vertices: Vec<VertexId>,
    pub length: usize,
    /// Pairs at distance length/2 along the cycle; each is a missing edge.
    pub antipodal: Vec<(VertexId, VertexId)>,
}

/// Checks that `cycle` is a directed cycle of special arcs with at least
/// four vertices, then asserts its structure: even length, antipodal
/// non-neighbors, and the vertex set being a module.
pub fn verify_special_cycle(g: &OrientedGraph, cycle: &[VertexId]) -> Result<SpecialCycleReport> {
    require_matching(g)?;
    let k = cycle.len();
    if k < 4 {
        return Err(Error::Precondition(format!(
            "special cycles have at least 4 vertices, got {k}"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for &v in cycle {
        if v >= g.vertex_count() {
            return Err(Error::Input(format!("cycle vertex {v} out of range")));
        }
        if !seen.insert(v) {
            return Err(Error::Precondition(format!("cycle repeats vertex {v}")));
        }
    }
    for i in 0..k {
        let (x, y) = (cycle[i], cycle[(i + 1) % k]);
        if !is_special_arc(g, x, y) {
            return Err(Error::Precondition(format!(
                "({x}, {y}) is not a special arc"
            )));
        }
    }
    if k % 2 != 0 {
        return Err(Error::InvariantViolation(format!(
            "special cycle has odd length {k}"
        )));
    }
    let mut antipodal = Vec::new();
    for i in 0..k / 2 {
        let (u, v) = (cycle[i], cycle[i + k / 2]);
        if g.has_arc(u, v) || g.has_arc(v, u) {
            return Err(Error::InvariantViolation(format!(
                "antipodal pair ({u}, {v}) is not a missing edge"
            )));
        }
        antipodal.push(edge_key(u, v));
    }
    if !g.is_module(cycle) {
        return Err(Error::InvariantViolation(
            "special cycle vertices do not form a module".into(),
        ));
    }
    Ok(SpecialCycleReport { vertices: cycle.to_vec(), length: k, antipodal })
}

fn r_holds(g: &OrientedGraph, (a, b): (VertexId, VertexId), (c, d): (VertexId, VertexId)) -> bool {
    g.has_arc(a, c) && is_special_arc(g, c, b) && g.has_arc(b, d) && is_special_arc(g, d, a)
}

/// Whether the ordered missing-edge pair (a, b), (c, d) is related: a -> c,
/// c -> b special, b -> d, d -> a special form a four-cycle.
pub fn relation_r(
    g: &OrientedGraph,
    (a, b): (VertexId, VertexId),
    (c, d): (VertexId, VertexId),
) -> Result<bool> {
    let missing = require_matching(g)?;
    for (u, v) in [(a, b), (c, d)] {
        if !missing.contains(&edge_key(u, v)) {
            return Err(Error::Precondition(format!(
                "{{{u}, {v}}} is not a missing edge"
            )));
        }
    }
    if edge_key(a, b) == edge_key(c, d) {
        return Err(Error::Precondition("missing edges must be distinct".into()));
    }
    Ok(r_holds(g, (a, b), (c, d)))
}

/// An arc of the missing-edge digraph, recording the orientation fact that
/// created it: first related to second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaArc {
    pub from: usize,
    pub to: usize,
    pub first: (VertexId, VertexId),
    pub second: (VertexId, VertexId),
}

/// The digraph on missing edges together with its decomposition into
/// paths and cycles. Every node has in- and out-degree at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaDecomposition {
    pub nodes: Vec<(VertexId, VertexId)>,
    pub arcs: Vec<DeltaArc>,
    /// Maximal chains, as node indices; isolated nodes are length-1 paths.
    pub paths: Vec<Vec<usize>>,
    /// Cycles, each rotated to start at its smallest node index.
    pub cycles: Vec<Vec<usize>>,
}

impl DeltaDecomposition {
    pub fn node_index(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.nodes.iter().position(|&e| e == edge_key(u, v))
    }

    pub fn successor(&self, node: usize) -> Option<&DeltaArc> {
        self.arcs.iter().find(|a| a.from == node)
    }

    pub fn predecessor(&self, node: usize) -> Option<&DeltaArc> {
        self.arcs.iter().find(|a| a.to == node)
    }

    /// Index into `cycles` of the cycle containing `node`, if any.
    pub fn cycle_of(&self, node: usize) -> Option<usize> {
        self.cycles.iter().position(|c| c.contains(&node))
    }

    pub fn is_isolated(&self, node: usize) -> bool {
        self.successor(node).is_none() && self.predecessor(node).is_none()
    }

    /// Vertices covered by the given cycle's missing edges, ascending.
    pub fn cycle_vertices(&self, cycle: usize) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.cycles[cycle]
            .iter()
            .flat_map(|&e| [self.nodes[e].0, self.nodes[e].1])
            .collect();
        vs.sort_unstable();
        vs
    }
}

/// Builds the missing-edge digraph and decomposes it.
pub fn build_delta(g: &OrientedGraph) -> Result<DeltaDecomposition> {
    let nodes = require_matching(g)?;
    let mut arcs = Vec::new();
    for (i, &(a, b)) in nodes.iter().enumerate() {
        for (j, &(c, d)) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let straight = r_holds(g, (a, b), (c, d));
            let crossed = r_holds(g, (a, b), (d, c));
            if straight && crossed {
                return Err(Error::InvariantViolation(format!(
                    "({a}, {b}) relates to both orientations of ({c}, {d})"
                )));
            }
            if straight {
                arcs.push(DeltaArc { from: i, to: j, first: (a, b), second: (c, d) });
            } else if crossed {
                arcs.push(DeltaArc { from: i, to: j, first: (a, b), second: (d, c) });
            }
        }
    }
    let mut out_deg = vec![0usize; nodes.len()];
    let mut in_deg = vec![0usize; nodes.len()];
    for arc in &arcs {
        out_deg[arc.from] += 1;
        in_deg[arc.to] += 1;
    }
    if let Some(e) = (0..nodes.len()).find(|&e| out_deg[e] > 1 || in_deg[e] > 1) {
        return Err(Error::InvariantViolation(format!(
            "missing edge {:?} has out-degree {} and in-degree {}",
            nodes[e], out_deg[e], in_deg[e]
        )));
    }
    let successor: Vec<Option<usize>> = (0..nodes.len())
        .map(|e| arcs.iter().find(|a| a.from == e).map(|a| a.to))
        .collect();
    let mut on_path = vec![false; nodes.len()];
    let mut paths = Vec::new();
    for start in 0..nodes.len() {
        if in_deg[start] > 0 || on_path[start] {
            continue;
        }
        let mut path = vec![start];
        on_path[start] = true;
        let mut cur = start;
        while let Some(next) = successor[cur] {
            path.push(next);
            on_path[next] = true;
            cur = next;
        }
        paths.push(path);
    }
    let mut cycles = Vec::new();
    let mut on_cycle = vec![false; nodes.len()];
    for start in 0..nodes.len() {
        if on_path[start] || on_cycle[start] {
            continue;
        }
        // Remaining nodes have in- and out-degree exactly one: a cycle.
        let mut cycle = vec![start];
        on_cycle[start] = true;
        let mut cur = successor[start].expect("cycle node has a successor");
        while cur != start {
            cycle.push(cur);
            on_cycle[cur] = true;
            cur = successor[cur].expect("cycle node has a successor");
        }
        cycles.push(cycle);
    }
    Ok(DeltaDecomposition { nodes, arcs, paths, cycles })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReport {
    /// Union of the cycle's missing-edge endpoints, ascending.
    pub vertices: Vec<VertexId>,
    /// A special cycle visiting exactly those vertices.
    pub special_cycle: SpecialCycleReport,
}

/// The vertex block carried by one cycle of the missing-edge digraph,
/// together with a special cycle witnessing it.
pub fn cycle_block(g: &OrientedGraph, delta: &DeltaDecomposition, cycle: usize) -> Result<BlockReport> {
    if cycle >= delta.cycles.len() {
        return Err(Error::Input(format!(
            "cycle index {cycle} out of range ({} cycles)",
            delta.cycles.len()
        )));
    }
    let vertices = delta.cycle_vertices(cycle);
    let found = find_special_cycle(g, &vertices).ok_or_else(|| {
        Error::InvariantViolation(format!(
            "no special cycle spans block {vertices:?}"
        ))
    })?;
    let special_cycle = verify_special_cycle(g, &found)?;
    if !g.is_module(&vertices) {
        return Err(Error::InvariantViolation(format!(
            "block {vertices:?} is not a module"
        )));
    }
    Ok(BlockReport { vertices, special_cycle })
}

/// Deterministic search for a directed cycle of special arcs visiting all
/// of `vertices`: backtracking from the smallest vertex, neighbors tried
/// ascending.
fn find_special_cycle(g: &OrientedGraph, vertices: &[VertexId]) -> Option<Vec<VertexId>> {
    let k = vertices.len();
    if k == 0 {
        return None;
    }
    let start = vertices[0];
    let mut path = vec![start];
    let mut used: std::collections::HashSet<VertexId> = [start].into();
    fn extend(
        g: &OrientedGraph,
        vertices: &[VertexId],
        path: &mut Vec<VertexId>,
        used: &mut std::collections::HashSet<VertexId>,
    ) -> bool {
        let cur = *path.last().unwrap();
        if path.len() == vertices.len() {
            return is_special_arc(g, cur, path[0]);
        }
        for &next in vertices {
            if !used.contains(&next) && is_special_arc(g, cur, next) {
                path.push(next);
                used.insert(next);
                if extend(g, vertices, path, used) {
                    return true;
                }
                path.pop();
                used.remove(&next);
            }
        }
        false
    }
    if extend(g, vertices, &mut path, &mut used) {
        Some(path)
    } else {
        None
    }
}

/// Asserts that every vertex of a cycle block has exactly as many first
/// as second out-neighbors inside the block, and returns that common
/// count (half the block size minus one).
pub fn block_neighborhood_balance(
    g: &OrientedGraph,
    delta: &DeltaDecomposition,
    cycle: usize,
) -> Result<usize> {
    if cycle >= delta.cycles.len() {
        return Err(Error::Input(format!(
            "cycle index {cycle} out of range ({} cycles)",
            delta.cycles.len()
        )));
    }
    let vertices = delta.cycle_vertices(cycle);
    let mut mask = FixedBitSet::with_capacity(g.vertex_count());
    for &v in &vertices {
        mask.insert(v);
    }
    let expected = vertices.len() / 2 - 1;
    for &u in &vertices {
        let mut out = g.out_set(u).clone();
        out.intersect_with(&mask);
        let mut second = g.second_out_set(u);
        second.intersect_with(&mask);
        let (o, s) = (out.count_ones(..), second.count_ones(..));
        if o != expected || s != expected {
            return Err(Error::InvariantViolation(format!(
                "block vertex {u}: {o} first and {s} second out-neighbors \
                 inside the block, expected {expected} each"
            )));
        }
    }
    Ok(expected)
}

/// How a missing edge's orientation is constrained by special-arc patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedStatus {
    Unforced,
    SinglyForced { from: VertexId, to: VertexId },
    DualForced,
}

/// Status of the missing edge {a, b}: a special arc b -> v with v -> a
/// forces b to a; a special arc a -> u with u -> b forces a to b; both
/// patterns together make the edge dual-forced.
pub fn forced_status(g: &OrientedGraph, a: VertexId, b: VertexId) -> Result<ForcedStatus> {
    let missing = require_matching(g)?;
    if !missing.contains(&edge_key(a, b)) {
        return Err(Error::Precondition(format!(
            "{{{a}, {b}}} is not a missing edge"
        )));
    }
    let toward_a = (0..g.vertex_count())
        .any(|v| is_special_arc(g, b, v) && g.has_arc(v, a));
    let toward_b = (0..g.vertex_count())
        .any(|u| is_special_arc(g, a, u) && g.has_arc(u, b));
    Ok(match (toward_a, toward_b) {
        (true, true) => ForcedStatus::DualForced,
        (true, false) => ForcedStatus::SinglyForced { from: b, to: a },
        (false, true) => ForcedStatus::SinglyForced { from: a, to: b },
        (false, false) => ForcedStatus::Unforced,
    })
}

/// A tournament obtained from an oriented graph by orienting every
/// missing edge. Oriented missing edges are called dashed arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    base: OrientedGraph,
    tournament: Tournament,
    dashed: BTreeMap<(VertexId, VertexId), (VertexId, VertexId)>,
}

impl Completion {
    /// Builds a completion from explicit orientations, one per missing
    /// edge of `base`.
    pub fn new(base: OrientedGraph, orientations: &[(VertexId, VertexId)]) -> Result<Self> {
        let missing = base.missing_edges();
        let mut dashed = BTreeMap::new();
        for &(u, v) in orientations {
            let key = edge_key(u, v);
            if !missing.contains(&key) {
                return Err(Error::Input(format!(
                    "({u}, {v}) does not orient a missing edge"
                )));
            }
            if dashed.insert(key, (u, v)).is_some() {
                return Err(Error::Input(format!(
                    "missing edge {{{}, {}}} oriented twice",
                    key.0, key.1
                )));
            }
        }
        if dashed.len() != missing.len() {
            return Err(Error::Input(format!(
                "{} of {} missing edges oriented",
                dashed.len(),
                missing.len()
            )));
        }
        let mut arcs = base.arcs();
        arcs.extend(dashed.values().copied());
        let tournament = Tournament::from_arcs(base.vertex_count(), &arcs)?;
        Ok(Completion { base, tournament, dashed })
    }

    pub fn base(&self) -> &OrientedGraph {
        &self.base
    }

    pub fn tournament(&self) -> &Tournament {
        &self.tournament
    }

    /// Orientations keyed by missing edge (min, max) -> (from, to).
    pub fn dashed(&self) -> &BTreeMap<(VertexId, VertexId), (VertexId, VertexId)> {
        &self.dashed
    }

    /// Whether the dashed arc u -> v is present.
    pub fn is_dashed(&self, u: VertexId, v: VertexId) -> bool {
        self.dashed.get(&edge_key(u, v)) == Some(&(u, v))
    }
}

/// Missing edges whose orientation is a free choice when building a safe
/// completion: unforced path starts first (in node order), then cycle
/// members (cycle by cycle, in cycle order).
pub fn free_choice_edges(
    g: &OrientedGraph,
    delta: &DeltaDecomposition,
) -> Result<Vec<(VertexId, VertexId)>> {
    let mut free = Vec::new();
    for path in &delta.paths {
        let start = path[0];
        let (a, b) = delta.nodes[start];
        match forced_status(g, a, b)? {
            ForcedStatus::Unforced => free.push(delta.nodes[start]),
            ForcedStatus::SinglyForced { .. } => {}
            ForcedStatus::DualForced => {
                return Err(Error::InvariantViolation(format!(
                    "path start {{{a}, {b}}} is dual-forced"
                )));
            }
        }
    }
    let mut path_starts: Vec<usize> = free
        .iter()
        .map(|&(a, b)| delta.node_index(a, b).unwrap())
        .collect();
    path_starts.sort_unstable();
    let mut ordered: Vec<(VertexId, VertexId)> =
        path_starts.into_iter().map(|e| delta.nodes[e]).collect();
    for cycle in &delta.cycles {
        for &e in cycle {
            ordered.push(delta.nodes[e]);
        }
    }
    Ok(ordered)
}

/// Builds a safe completion. `choices` supplies one bit per free edge, in
/// the order of `free_choice_edges`: false orients (min, max) low to
/// high, true the other way. Forced path starts take their forced
/// direction and propagate along their paths; cycle edges follow the
/// choice bits.
pub fn safe_completion(g: &OrientedGraph, choices: &[bool]) -> Result<Completion> {
    let delta = build_delta(g)?;
    let free = free_choice_edges(g, &delta)?;
    if choices.len() != free.len() {
        return Err(Error::Input(format!(
            "{} choice bits supplied, {} free edges",
            choices.len(),
            free.len()
        )));
    }
    let orient = |edge: (VertexId, VertexId), flip: bool| {
        if flip {
            (edge.1, edge.0)
        } else {
            edge
        }
    };
    let mut orientation: BTreeMap<(VertexId, VertexId), (VertexId, VertexId)> = BTreeMap::new();
    for (&edge, &bit) in free.iter().zip(choices) {
        orientation.insert(edge, orient(edge, bit));
    }
    for path in &delta.paths {
        let start_edge = delta.nodes[path[0]];
        if let ForcedStatus::SinglyForced { from, to } = forced_status(g, start_edge.0, start_edge.1)? {
            orientation.insert(start_edge, (from, to));
        }
        for window in path.windows(2) {
            let arc = delta
                .arcs
                .iter()
                .find(|a| a.from == window[0] && a.to == window[1])
                .expect("consecutive path nodes are linked");
            let prev = orientation[&delta.nodes[window[0]]];
            let next = if prev == arc.first {
                arc.second
            } else {
                debug_assert_eq!(prev, (arc.first.1, arc.first.0));
                (arc.second.1, arc.second.0)
            };
            orientation.insert(delta.nodes[window[1]], next);
        }
    }
    let oriented: Vec<(VertexId, VertexId)> = orientation.into_values().collect();
    let completion = Completion::new(g.clone(), &oriented)?;
    if !is_safe_completion(g, &completion)? {
        return Err(Error::InvariantViolation(
            "constructed completion failed the safety check".into(),
        ));
    }
    Ok(completion)
}

/// A completion is safe when every singly-forced edge takes its forced
/// direction, and orientation facts propagate: whenever (c, d) relates to
/// (a, b), the edge {a, b} is not on a cycle of the missing-edge digraph,
/// and c -> d is dashed, then a -> b is dashed too.
pub fn is_safe_completion(g: &OrientedGraph, completion: &Completion) -> Result<bool> {
    let delta = build_delta(g)?;
    for &(a, b) in &delta.nodes {
        if let ForcedStatus::SinglyForced { from, to } = forced_status(g, a, b)? {
            if !completion.is_dashed(from, to) {
                return Ok(false);
            }
        }
    }
    for (i, &(a, b)) in delta.nodes.iter().enumerate() {
        if delta.cycle_of(i).is_some() {
            continue;
        }
        for (j, &(c, d)) in delta.nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            for (from, to) in [(c, d), (d, c)] {
                if !completion.is_dashed(from, to) {
                    continue;
                }
                for (x, y) in [(a, b), (b, a)] {
                    if r_holds(g, (from, to), (x, y)) && !completion.is_dashed(x, y) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// A safe completion of maximum median-order value, its choice vector,
/// and a median order certifying the value.
#[derive(Debug, Clone)]
pub struct MaxCompletion {
    pub completion: Completion,
    pub choices: Vec<bool>,
    pub median: MedianOrder,
}

/// Enumerates all safe completions (2^k for k free edges, capped) and
/// returns one maximizing the median-order value. Ties go to the
/// lexicographically smallest choice vector.
pub fn max_value_safe_completion(g: &OrientedGraph) -> Result<MaxCompletion> {
    max_value_safe_completion_limited(g, DEFAULT_CHOICE_LIMIT, median::DEFAULT_EXACT_LIMIT)
}

pub fn max_value_safe_completion_limited(
    g: &OrientedGraph,
    choice_limit: usize,
    exact_limit: usize,
) -> Result<MaxCompletion> {
    let delta = build_delta(g)?;
    let free = free_choice_edges(g, &delta)?;
    let k = free.len();
    if k > choice_limit {
        return Err(Error::Capability(format!(
            "{k} free edges exceed the enumeration limit {choice_limit}"
        )));
    }
    let mut best: Option<MaxCompletion> = None;
    for mask in 0u64..1 << k {
        // Bit 0 of the vector is the most significant bit of the mask, so
        // ascending masks enumerate choice vectors in lexicographic order.
        let choices: Vec<bool> = (0..k).map(|i| (mask >> (k - 1 - i)) & 1 == 1).collect();
        let completion = safe_completion(g, &choices)?;
        let median = median::compute_median_order_limited(completion.tournament(), exact_limit)?;
        if best.as_ref().is_none_or(|b| median.value() > b.median.value()) {
            best = Some(MaxCompletion { completion, choices, median });
        }
    }
    best.ok_or_else(|| Error::InvariantViolation("no completion enumerated".into()))
}

/// A special in-neighbor of v in a completion: a solid special arc b -> v
/// whose tail lies in v's second out-neighborhood of the tournament. Each
/// is reached through v's dashed out-arc (type two) or through another
/// vertex's dashed arc into b's non-neighbor (type one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialInNeighbor {
    pub vertex: VertexId,
    pub type_one: bool,
    pub type_two: bool,
}

/// Special in-neighbors of `v`, ascending. Type one: some solid arc
/// v -> a continues by a dashed a -> b. Type two: some dashed v -> a
/// continues by a solid a -> b.
pub fn special_in_neighbors(completion: &Completion, v: VertexId) -> Result<Vec<SpecialInNeighbor>> {
    let g = completion.base();
    if v >= g.vertex_count() {
        return Err(Error::Input(format!("vertex {v} out of range")));
    }
    let t_second = completion.tournament().second_out_set(v);
    let mut result = Vec::new();
    for b in g.in_set(v).ones() {
        if !is_special_arc(g, b, v) || !t_second.contains(b) {
            continue;
        }
        let type_one = g
            .out_set(v)
            .ones()
            .any(|a| completion.is_dashed(a, b));
        let type_two = (0..g.vertex_count())
            .any(|a| completion.is_dashed(v, a) && g.has_arc(a, b));
        if !type_one && !type_two {
            return Err(Error::InvariantViolation(format!(
                "special in-neighbor {b} of {v} reached by neither arc pattern"
            )));
        }
        result.push(SpecialInNeighbor { vertex: b, type_one, type_two });
    }
    Ok(result)
}

/// Whether `u` is prime: not covered by any cycle of the missing-edge
/// digraph.
pub fn is_prime(delta: &DeltaDecomposition, u: VertexId) -> bool {
    !delta
        .cycles
        .iter()
        .enumerate()
        .any(|(q, _)| delta.cycle_vertices(q).contains(&u))
}

/// The home block of `u`: the cycle block containing it, or {u} when u is
/// prime. Asserts the first/second neighborhood balance inside the block.
pub fn vertex_home(
    g: &OrientedGraph,
    delta: &DeltaDecomposition,
    u: VertexId,
) -> Result<Vec<VertexId>> {
    if u >= g.vertex_count() {
        return Err(Error::Input(format!("vertex {u} out of range")));
    }
    for q in 0..delta.cycles.len() {
        let vs = delta.cycle_vertices(q);
        if vs.contains(&u) {
            block_neighborhood_balance(g, delta, q)?;
            return Ok(vs);
        }
    }
    Ok(vec![u])
}

/// Partition of the vertices into cycle blocks and prime singletons.
pub fn home_partition(g: &OrientedGraph, delta: &DeltaDecomposition) -> Vec<Vec<VertexId>> {
    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    let mut covered = vec![false; g.vertex_count()];
    for q in 0..delta.cycles.len() {
        let vs = delta.cycle_vertices(q);
        for &v in &vs {
            covered[v] = true;
        }
        blocks.push(vs);
    }
    for v in 0..g.vertex_count() {
        if !covered[v] {
            blocks.push(vec![v]);
        }
    }
    blocks
}

/// The forcing relation between vertices: x (prime) relates to y when
/// x -> y is special and some arc y -> x' closes onto x's non-neighbor
/// x', with {x, x'} singly forced from x to x'.
pub fn relation_f(
    g: &OrientedGraph,
    delta: &DeltaDecomposition,
    x: VertexId,
    y: VertexId,
) -> Result<bool> {
    if x >= g.vertex_count() || y >= g.vertex_count() {
        return Err(Error::Input("vertex out of range".into()));
    }
    if !is_prime(delta, x) || !is_special_arc(g, x, y) {
        return Ok(false);
    }
    for xp in g.non_neighbors(x) {
        if g.has_arc(y, xp)
            && forced_status(g, x, xp)? == (ForcedStatus::SinglyForced { from: x, to: xp })
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Asserts that the forcing relation has no directed cycle.
pub fn forcing_relation_acyclic(g: &OrientedGraph, delta: &DeltaDecomposition) -> Result<()> {
    let n = g.vertex_count();
    let mut succ: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for x in 0..n {
        for y in 0..n {
            if x != y && relation_f(g, delta, x, y)? {
                succ[x].push(y);
            }
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done.
    let mut state = vec![0u8; n];
    fn dfs(v: usize, succ: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[v] = 1;
        for &w in &succ[v] {
            if state[w] == 1 || (state[w] == 0 && dfs(w, succ, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    for v in 0..n {
        if state[v] == 0 && dfs(v, &succ, &mut state) {
            return Err(Error::InvariantViolation(
                "forcing relation contains a directed cycle".into(),
            ));
        }
    }
    Ok(())
}

/// Why a special arc can sit backward in a median order of a completion.
#[derive(Debug, Clone)]
pub struct ReverseArcReport {
    /// Witness k strictly between head and tail: head dashed to k, k solid
    /// to tail.
    pub head_dashed_witness: Option<VertexId>,
    /// Witness l strictly between: head solid to l, l dashed to tail.
    pub tail_dashed_witness: Option<VertexId>,
    /// When exactly one pattern is present, the head moves just past the
    /// tail and the result is again a median order.
    pub rearranged: Option<MedianOrder>,
}

/// Analyzes a special arc of the base graph that is backward in a median
/// order of the completion: at least one dashed detour around it exists
/// strictly inside the interval, and with exactly one detour the interval
/// endpoints may be rotated without losing optimality.
pub fn analyze_reverse_special_arc(
    completion: &Completion,
    l: &MedianOrder,
    from: VertexId,
    to: VertexId,
) -> Result<ReverseArcReport> {
    let g = completion.base();
    if !is_special_arc(g, from, to) {
        return Err(Error::Precondition(format!(
            "({from}, {to}) is not a special arc of the base graph"
        )));
    }
    let pos_from = l
        .position(from)
        .ok_or_else(|| Error::Input(format!("vertex {from} not in ordering")))?;
    let pos_to = l
        .position(to)
        .ok_or_else(|| Error::Input(format!("vertex {to} not in ordering")))?;
    if pos_from < pos_to {
        return Err(Error::Precondition(format!(
            "arc ({from}, {to}) is forward in the ordering"
        )));
    }
    let (i, j) = (pos_to, pos_from);
    let between = &l.order()[i + 1..j];
    let head_dashed_witness = between
        .iter()
        .copied()
        .find(|&k| completion.is_dashed(to, k) && g.has_arc(k, from));
    let tail_dashed_witness = between
        .iter()
        .copied()
        .find(|&x| g.has_arc(to, x) && completion.is_dashed(x, from));
    if head_dashed_witness.is_none() && tail_dashed_witness.is_none() {
        return Err(Error::InvariantViolation(format!(
            "backward special arc ({from}, {to}) has no dashed detour in \
             the interval"
        )));
    }
    let rearranged = if head_dashed_witness.is_some() != tail_dashed_witness.is_some() {
        let mut order = l.order().to_vec();
        let v = order.remove(i);
        order.insert(j, v);
        let value = median::order_value(completion.tournament(), &order)?;
        if value != l.value() {
            return Err(Error::InvariantViolation(format!(
                "endpoint rotation changed the value from {} to {value}",
                l.value()
            )));
        }
        Some(MedianOrder::certify(completion.tournament(), order)?)
    } else {
        None
    };
    Ok(ReverseArcReport { head_dashed_witness, tail_dashed_witness, rearranged })
}

/// Whether no dashed arc of an unforced isolated missing edge sits
/// backward in the given median order. Maximum-value safe completions
/// always satisfy this.
pub fn no_backward_unforced_isolated(
    completion: &Completion,
    l: &MedianOrder,
) -> Result<bool> {
    let g = completion.base();
    let delta = build_delta(g)?;
    for (&key, &(u, v)) in completion.dashed() {
        let node = delta.node_index(key.0, key.1).expect("dashed edge is a node");
        if !delta.is_isolated(node) {
            continue;
        }
        if forced_status(g, key.0, key.1)? != ForcedStatus::Unforced {
            continue;
        }
        let (pu, pv) = (l.position(u).unwrap(), l.position(v).unwrap());
        if pu > pv {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Four-cycle 0 -> 2 -> 1 -> 3 -> 0 with missing matching {0,1}, {2,3}.
    fn four_cycle() -> OrientedGraph {
        OrientedGraph::from_arcs(4, &[(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap()
    }

    /// Missing edge {0, 2} forced low-to-high through the middle vertex 1.
    fn forced_triple() -> OrientedGraph {
        OrientedGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap()
    }

    /// Missing edges {0,1} (unforced) and {2,3} (dual-forced), linked by a
    /// one-way relation: a length-2 path in the missing-edge digraph.
    fn forced_path_instance() -> OrientedGraph {
        OrientedGraph::from_arcs(
            5,
            &[(0, 2), (2, 1), (1, 3), (3, 0), (2, 4), (3, 4), (4, 0), (4, 1)],
        )
        .unwrap()
    }

    fn transitive(n: usize) -> OrientedGraph {
        let mut arcs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                arcs.push((u, v));
            }
        }
        OrientedGraph::from_arcs(n, &arcs).unwrap()
    }

    #[test]
    fn transitive_tournament_all_arcs_special() {
        let g = transitive(4);
        assert_eq!(special_arcs(&g).unwrap().len(), 6);
    }

    #[test]
    fn three_cycle_has_no_special_arcs() {
        let g = OrientedGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(special_arcs(&g).unwrap().is_empty());
    }

    #[test]
    fn four_cycle_arcs_all_special() {
        let g = four_cycle();
        assert_eq!(
            special_arcs(&g).unwrap(),
            vec![(0, 2), (1, 3), (2, 1), (3, 0)]
        );
    }

    #[test]
    fn special_arcs_requires_matching() {
        // Star-shaped missing structure is rejected.
        let g = OrientedGraph::from_arcs(3, &[(1, 2)]).unwrap();
        assert!(matches!(special_arcs(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn special_cycle_on_four_cycle() {
        let g = four_cycle();
        let report = verify_special_cycle(&g, &[0, 2, 1, 3]).unwrap();
        assert_eq!(report.length, 4);
        assert_eq!(report.antipodal, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn special_cycle_rejects_short_and_nonspecial() {
        let g = four_cycle();
        assert!(matches!(
            verify_special_cycle(&g, &[0, 2, 1]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            verify_special_cycle(&g, &[0, 2, 2, 1]),
            Err(Error::Precondition(_))
        ));
        let t = transitive(4);
        assert!(matches!(
            verify_special_cycle(&t, &[0, 1, 2, 3]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn relation_between_the_two_missing_edges() {
        let g = four_cycle();
        assert!(relation_r(&g, (0, 1), (2, 3)).unwrap());
        assert!(!relation_r(&g, (2, 3), (0, 1)).unwrap());
        assert!(relation_r(&g, (2, 3), (1, 0)).unwrap());
        assert!(matches!(
            relation_r(&g, (0, 1), (0, 1)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            relation_r(&g, (0, 2), (2, 3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn delta_of_four_cycle_is_a_two_cycle() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        assert_eq!(delta.nodes, vec![(0, 1), (2, 3)]);
        assert_eq!(delta.arcs.len(), 2);
        assert!(delta.paths.is_empty());
        assert_eq!(delta.cycles, vec![vec![0, 1]]);
        assert_eq!(delta.cycle_of(0), Some(0));
        assert!(!delta.is_isolated(0));
    }

    #[test]
    fn delta_of_forced_path_instance_is_a_path() {
        let g = forced_path_instance();
        let delta = build_delta(&g).unwrap();
        assert_eq!(delta.nodes, vec![(0, 1), (2, 3)]);
        assert_eq!(delta.arcs.len(), 1);
        assert_eq!(delta.paths, vec![vec![0, 1]]);
        assert!(delta.cycles.is_empty());
        let arc = &delta.arcs[0];
        assert_eq!((arc.first, arc.second), ((0, 1), (2, 3)));
    }

    #[test]
    fn tournament_has_empty_delta() {
        let delta = build_delta(&transitive(4)).unwrap();
        assert!(delta.nodes.is_empty());
        assert!(delta.paths.is_empty() && delta.cycles.is_empty());
    }

    #[test]
    fn cycle_block_finds_the_special_cycle() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        let block = cycle_block(&g, &delta, 0).unwrap();
        assert_eq!(block.vertices, vec![0, 1, 2, 3]);
        assert_eq!(block.special_cycle.vertices, vec![0, 2, 1, 3]);
        assert!(matches!(cycle_block(&g, &delta, 1), Err(Error::Input(_))));
    }

    #[test]
    fn block_balance_is_half_size_minus_one() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        assert_eq!(block_neighborhood_balance(&g, &delta, 0).unwrap(), 1);
    }

    #[test]
    fn forced_statuses() {
        assert_eq!(
            forced_status(&forced_triple(), 0, 2).unwrap(),
            ForcedStatus::SinglyForced { from: 0, to: 2 }
        );
        let g = four_cycle();
        assert_eq!(forced_status(&g, 0, 1).unwrap(), ForcedStatus::DualForced);
        assert_eq!(forced_status(&g, 2, 3).unwrap(), ForcedStatus::DualForced);
        let p = forced_path_instance();
        assert_eq!(forced_status(&p, 0, 1).unwrap(), ForcedStatus::Unforced);
        assert_eq!(forced_status(&p, 2, 3).unwrap(), ForcedStatus::DualForced);
        assert!(matches!(forced_status(&g, 0, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn completion_validates_orientations() {
        let g = four_cycle();
        let c = Completion::new(g.clone(), &[(0, 1), (2, 3)]).unwrap();
        assert!(c.is_dashed(0, 1));
        assert!(!c.is_dashed(1, 0));
        assert!(c.tournament().is_tournament());
        assert!(Completion::new(g.clone(), &[(0, 1)]).is_err());
        assert!(Completion::new(g.clone(), &[(0, 1), (1, 0)]).is_err());
        assert!(Completion::new(g, &[(0, 1), (0, 2)]).is_err());
    }

    #[test]
    fn free_choices_on_cycles_and_paths() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        // Both missing edges sit on the cycle: two free bits.
        assert_eq!(free_choice_edges(&g, &delta).unwrap(), vec![(0, 1), (2, 3)]);
        let p = forced_path_instance();
        let dp = build_delta(&p).unwrap();
        // Only the unforced path start is free.
        assert_eq!(free_choice_edges(&p, &dp).unwrap(), vec![(0, 1)]);
        let f = forced_triple();
        let df = build_delta(&f).unwrap();
        assert!(free_choice_edges(&f, &df).unwrap().is_empty());
    }

    #[test]
    fn safe_completion_propagates_along_paths() {
        let p = forced_path_instance();
        let c = safe_completion(&p, &[false]).unwrap();
        assert!(c.is_dashed(0, 1) && c.is_dashed(2, 3));
        let c = safe_completion(&p, &[true]).unwrap();
        assert!(c.is_dashed(1, 0) && c.is_dashed(3, 2));
        assert!(safe_completion(&p, &[]).is_err());
    }

    #[test]
    fn safe_completion_orients_forced_starts() {
        let f = forced_triple();
        let c = safe_completion(&f, &[]).unwrap();
        assert!(c.is_dashed(0, 2));
    }

    #[test]
    fn safety_check_rejects_broken_propagation() {
        let p = forced_path_instance();
        let good = Completion::new(p.clone(), &[(0, 1), (2, 3)]).unwrap();
        assert!(is_safe_completion(&p, &good).unwrap());
        let bad = Completion::new(p.clone(), &[(0, 1), (3, 2)]).unwrap();
        assert!(!is_safe_completion(&p, &bad).unwrap());
        let f = forced_triple();
        let wrong_way = Completion::new(f.clone(), &[(2, 0)]).unwrap();
        assert!(!is_safe_completion(&f, &wrong_way).unwrap());
    }

    #[test]
    fn cycle_edges_are_free_in_the_safety_check() {
        let g = four_cycle();
        for orientations in [
            [(0, 1), (2, 3)],
            [(0, 1), (3, 2)],
            [(1, 0), (2, 3)],
            [(1, 0), (3, 2)],
        ] {
            let c = Completion::new(g.clone(), &orientations).unwrap();
            assert!(is_safe_completion(&g, &c).unwrap());
        }
    }

    #[test]
    fn max_completion_of_four_cycle() {
        let g = four_cycle();
        let max = max_value_safe_completion(&g).unwrap();
        assert_eq!(max.median.value(), 5);
        // All four completions tie at value 5; lexicographically smallest
        // choice vector wins.
        assert_eq!(max.choices, vec![false, false]);
        assert!(max.completion.is_dashed(0, 1) && max.completion.is_dashed(2, 3));
        assert_eq!(max.median.order(), &[0, 2, 1, 3]);
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let g = four_cycle();
        assert!(matches!(
            max_value_safe_completion_limited(&g, 1, 18),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn special_in_neighbors_on_completion() {
        let g = four_cycle();
        let c = Completion::new(g, &[(0, 1), (2, 3)]).unwrap();
        // 3 -> 0 is special and 3 enters 0's tournament second
        // neighborhood two ways: 0 -> 2 then dashed 2 -> 3, and dashed
        // 0 -> 1 then 1 -> 3.
        let s = special_in_neighbors(&c, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].vertex, 3);
        assert!(s[0].type_one);
        assert!(s[0].type_two);
        // A pure tournament has none.
        let t = Completion::new(transitive(4), &[]).unwrap();
        for v in 0..4 {
            assert!(special_in_neighbors(&t, v).unwrap().is_empty());
        }
    }

    #[test]
    fn homes_and_primeness() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        assert!(!is_prime(&delta, 0));
        assert_eq!(vertex_home(&g, &delta, 0).unwrap(), vec![0, 1, 2, 3]);
        let p = forced_path_instance();
        let dp = build_delta(&p).unwrap();
        assert!((0..5).all(|v| is_prime(&dp, v)));
        assert_eq!(vertex_home(&p, &dp, 0).unwrap(), vec![0]);
        assert_eq!(home_partition(&p, &dp).len(), 5);
        assert_eq!(home_partition(&g, &delta), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn forcing_relation_on_forced_triple() {
        let f = forced_triple();
        let delta = build_delta(&f).unwrap();
        assert!(relation_f(&f, &delta, 0, 1).unwrap());
        assert!(!relation_f(&f, &delta, 1, 0).unwrap());
        assert!(!relation_f(&f, &delta, 1, 2).unwrap());
        forcing_relation_acyclic(&f, &delta).unwrap();
    }

    #[test]
    fn forcing_relation_ignores_block_vertices() {
        let g = four_cycle();
        let delta = build_delta(&g).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                if x != y {
                    assert!(!relation_f(&g, &delta, x, y).unwrap());
                }
            }
        }
        forcing_relation_acyclic(&g, &delta).unwrap();
    }

    #[test]
    fn backward_special_arc_has_both_detours_on_four_cycle() {
        let g = four_cycle();
        let c = Completion::new(g, &[(0, 1), (2, 3)]).unwrap();
        let l = MedianOrder::certify(c.tournament(), vec![0, 2, 1, 3]).unwrap();
        // The special arc 3 -> 0 is backward; both detours exist, so no
        // rearrangement is offered.
        let report = analyze_reverse_special_arc(&c, &l, 3, 0).unwrap();
        assert_eq!(report.head_dashed_witness, Some(1));
        assert_eq!(report.tail_dashed_witness, Some(2));
        assert!(report.rearranged.is_none());
    }

    #[test]
    fn forward_special_arc_is_rejected() {
        let g = four_cycle();
        let c = Completion::new(g, &[(0, 1), (2, 3)]).unwrap();
        let l = MedianOrder::certify(c.tournament(), vec![0, 2, 1, 3]).unwrap();
        assert!(matches!(
            analyze_reverse_special_arc(&c, &l, 0, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn backward_dashed_check_accepts_max_completion() {
        let g = four_cycle();
        let max = max_value_safe_completion(&g).unwrap();
        assert!(no_backward_unforced_isolated(&max.completion, &max.median).unwrap());
    }
}
