//! Median orders of tournaments: exact computation by subset DP, value
//! preserving transformations, module-respecting (good) orders, and the
//! sedimentation iteration.
//!
//! A median order maximizes the number of forward arcs. Every `MedianOrder`
//! value in this module is certified: it is produced either by the exact
//! solver or by a transformation that re-checks the value it claims.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{Tournament, VertexId};

/// Largest n solved exactly by default. The solver walks all 2^n prefix
/// subsets, so this bounds both time and the DP table.
pub const DEFAULT_EXACT_LIMIT: usize = 18;

/// Hard ceiling on the exact solver; the DP table alone is 4 * 2^n bytes.
pub const MAX_EXACT_LIMIT: usize = 24;

fn check_permutation(n: usize, order: &[VertexId]) -> Result<()> {
    if order.len() != n {
        return Err(Error::Input(format!(
            "ordering has {} entries for {n} vertices",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n {
            return Err(Error::Input(format!("ordering entry {v} out of range")));
        }
        if seen[v] {
            return Err(Error::Input(format!("ordering repeats vertex {v}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Number of forward arcs of `order` in `t`.
pub fn order_value(t: &Tournament, order: &[VertexId]) -> Result<u64> {
    check_permutation(t.vertex_count(), order)?;
    let mut suffix = FixedBitSet::with_capacity(t.vertex_count());
    let mut value = 0u64;
    for &v in order.iter().rev() {
        let mut fwd = t.out_set(v).clone();
        fwd.intersect_with(&suffix);
        value += fwd.count_ones(..) as u64;
        suffix.insert(v);
    }
    Ok(value)
}

/// An ordering certified to attain the maximum forward-arc count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianOrder {
    order: Vec<VertexId>,
    value: u64,
}

impl MedianOrder {
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Last vertex of the order.
    pub fn feed_vertex(&self) -> VertexId {
        *self.order.last().expect("empty ordering has no feed vertex")
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.order.iter().position(|&u| u == v)
    }

    /// Certifies an externally produced ordering by solving the instance
    /// and comparing values. Subject to the exact-solver limit.
    pub fn certify(t: &Tournament, order: Vec<VertexId>) -> Result<MedianOrder> {
        let value = order_value(t, &order)?;
        let best = compute_median_order(t)?;
        if value != best.value {
            return Err(Error::Input(format!(
                "ordering has value {value}, median value is {}",
                best.value
            )));
        }
        Ok(MedianOrder { order, value })
    }

    fn recheck(self, t: &Tournament) -> Result<MedianOrder> {
        let actual = order_value(t, &self.order)?;
        if actual != self.value {
            return Err(Error::InvariantViolation(format!(
                "transformation claimed value {} but ordering has value {actual}",
                self.value
            )));
        }
        Ok(self)
    }
}

fn out_masks(t: &Tournament) -> Vec<u64> {
    (0..t.vertex_count())
        .map(|v| t.out_set(v).ones().fold(0u64, |m, w| m | 1 << w))
        .collect()
}

/// Exact median order with the default size limit.
pub fn compute_median_order(t: &Tournament) -> Result<MedianOrder> {
    compute_median_order_limited(t, DEFAULT_EXACT_LIMIT)
}

/// Exact median order for n <= limit, by DP over prefix subsets. Among all
/// optimal orderings the lexicographically smallest is returned.
pub fn compute_median_order_limited(t: &Tournament, limit: usize) -> Result<MedianOrder> {
    let n = t.vertex_count();
    if limit > MAX_EXACT_LIMIT {
        return Err(Error::Capability(format!(
            "exact solver limit {limit} exceeds the hard ceiling {MAX_EXACT_LIMIT}"
        )));
    }
    if n > limit {
        return Err(Error::Capability(format!(
            "exact median order needs n <= {limit}, instance has {n}; \
             raise the limit or use the heuristic"
        )));
    }
    let masks = out_masks(t);
    // dp[s] = best forward-arc count ordering the members of s contiguously;
    // the first element contributes its out-arcs into the rest of s.
    let mut dp = vec![0u32; 1usize << n];
    for s in 1usize..1 << n {
        let mut best = 0u32;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = s & !(1 << v);
            let gain = (masks[v] & without as u64).count_ones();
            best = best.max(dp[without] + gain);
        }
        dp[s] = best;
    }

    let mut order = Vec::with_capacity(n);
    let mut s = (1usize << n) - 1;
    while s != 0 {
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = s & !(1 << v);
            let gain = (masks[v] & without as u64).count_ones();
            if dp[s] == dp[without] + gain {
                order.push(v);
                s = without;
                break;
            }
        }
    }
    let value = dp[(1usize << n) - 1] as u64;
    debug_assert_eq!(order_value(t, &order)?, value);
    Ok(MedianOrder { order, value })
}

/// Insertion construction plus single-vertex moves to a local optimum.
/// The result carries no optimality certificate.
pub fn heuristic_ordering(t: &Tournament) -> (Vec<VertexId>, u64) {
    let n = t.vertex_count();
    let mut order: Vec<VertexId> = Vec::with_capacity(n);
    for v in 0..n {
        let mut best_pos = 0;
        let mut best_gain = i64::MIN;
        for pos in 0..=order.len() {
            let mut gain = 0i64;
            for (i, &u) in order.iter().enumerate() {
                let forward = if i < pos { t.has_arc(u, v) } else { t.has_arc(v, u) };
                if forward {
                    gain += 1;
                }
            }
            if gain > best_gain {
                best_gain = gain;
                best_pos = pos;
            }
        }
        order.insert(best_pos, v);
    }
    // Local search: move one vertex at a time while the value improves.
    let mut value = order_value(t, &order).expect("permutation by construction");
    loop {
        let mut improved = false;
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                let mut candidate = order.clone();
                let v = candidate.remove(from);
                candidate.insert(to, v);
                let cv = order_value(t, &candidate).expect("permutation");
                if cv > value {
                    order = candidate;
                    value = cv;
                    improved = true;
                }
            }
        }
        if !improved {
            return (order, value);
        }
    }
}

/// Interval degree test for positions i <= j of a median order: the left
/// endpoint sends at least as many arcs into the interval as it receives,
/// and symmetrically the right endpoint receives at least as many.
pub fn check_feedback_property(
    t: &Tournament,
    l: &MedianOrder,
    i: usize,
    j: usize,
) -> Result<bool> {
    let n = t.vertex_count();
    if i > j || j >= n {
        return Err(Error::Input(format!(
            "positions ({i}, {j}) invalid for n = {n}"
        )));
    }
    let xi = l.order[i];
    let xj = l.order[j];
    let (mut out_i, mut in_i, mut out_j, mut in_j) = (0usize, 0usize, 0usize, 0usize);
    for &x in &l.order[i + 1..=j] {
        if t.has_arc(xi, x) {
            out_i += 1;
        } else if t.has_arc(x, xi) {
            in_i += 1;
        }
    }
    for &x in &l.order[i..j] {
        if t.has_arc(xj, x) {
            out_j += 1;
        } else if t.has_arc(x, xj) {
            in_j += 1;
        }
    }
    Ok(out_i >= in_i && out_j <= in_j)
}

/// Which endpoint of the interval an equality move displaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

/// Moves one interval endpoint across the interval, which preserves the
/// value exactly when that endpoint's in/out arc counts over the interval
/// are equal. Left moves x_i to just after x_j; Right moves x_j to just
/// before x_i. i == j is the degenerate identity.
pub fn move_endpoint(
    t: &Tournament,
    l: &MedianOrder,
    i: usize,
    j: usize,
    which: Endpoint,
) -> Result<MedianOrder> {
    let n = t.vertex_count();
    if i > j || j >= n {
        return Err(Error::Input(format!(
            "positions ({i}, {j}) invalid for n = {n}"
        )));
    }
    if i == j {
        return Ok(l.clone());
    }
    let (moved, interval): (VertexId, &[VertexId]) = match which {
        Endpoint::Left => (l.order[i], &l.order[i + 1..=j]),
        Endpoint::Right => (l.order[j], &l.order[i..j]),
    };
    let out = interval.iter().filter(|&&x| t.has_arc(moved, x)).count();
    let inn = interval.iter().filter(|&&x| t.has_arc(x, moved)).count();
    if out != inn {
        return Err(Error::Precondition(format!(
            "endpoint {moved} has {out} out- vs {inn} in-arcs over the interval; \
             equality is required to move it"
        )));
    }
    let mut order = l.order.clone();
    match which {
        Endpoint::Left => {
            let v = order.remove(i);
            order.insert(j, v);
        }
        Endpoint::Right => {
            let v = order.remove(j);
            order.insert(i, v);
        }
    }
    MedianOrder { order, value: l.value }.recheck(t)
}

/// Reverses an arc that is backward in `l`. The same ordering is a median
/// order of the modified tournament, with value one higher.
pub fn reverse_backward_arc(
    t: &Tournament,
    l: &MedianOrder,
    u: VertexId,
    v: VertexId,
) -> Result<(Tournament, MedianOrder)> {
    if !t.has_arc(u, v) {
        return Err(Error::Input(format!("arc ({u}, {v}) not present")));
    }
    let pu = l.position(u).ok_or_else(|| Error::Input("ordering misses u".into()))?;
    let pv = l.position(v).ok_or_else(|| Error::Input("ordering misses v".into()))?;
    if pu < pv {
        return Err(Error::Precondition(format!(
            "arc ({u}, {v}) is forward in the ordering; only backward arcs reverse"
        )));
    }
    let reversed = t.reverse_arc(u, v)?;
    let mo = MedianOrder { order: l.order.clone(), value: l.value + 1 }.recheck(&reversed)?;
    Ok((reversed, mo))
}

/// A partition of the vertices into modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulePartition {
    blocks: Vec<Vec<VertexId>>,
    block_of: Vec<usize>,
}

impl ModulePartition {
    /// Validates disjointness, coverage, and that every block is a module
    /// of `graph`.
    pub fn new(graph: &crate::graph::OrientedGraph, blocks: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = graph.vertex_count();
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Input("empty partition block".into()));
            }
            for &v in block {
                if v >= n {
                    return Err(Error::Input(format!("block vertex {v} out of range")));
                }
                if block_of[v] != usize::MAX {
                    return Err(Error::Input(format!("vertex {v} in two blocks")));
                }
                block_of[v] = b;
            }
            if !graph.is_module(block) {
                return Err(Error::Input(format!("block {block:?} is not a module")));
            }
        }
        if let Some(v) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Input(format!("vertex {v} not covered by any block")));
        }
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        Ok(ModulePartition { blocks, block_of })
    }

    pub fn singletons(n: usize) -> Self {
        ModulePartition {
            blocks: (0..n).map(|v| vec![v]).collect(),
            block_of: (0..n).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn block_index(&self, v: VertexId) -> usize {
        self.block_of[v]
    }

    pub fn block_of(&self, v: VertexId) -> &[VertexId] {
        &self.blocks[self.block_of[v]]
    }

    pub fn vertex_count(&self) -> usize {
        self.block_of.len()
    }

    /// Whether every block occupies consecutive positions of `order`.
    pub fn is_good(&self, order: &[VertexId]) -> bool {
        let mut seen_complete = vec![false; self.blocks.len()];
        let mut current = usize::MAX;
        let mut run = 0usize;
        for &v in order {
            let b = self.block_of[v];
            if b != current {
                if current != usize::MAX {
                    if run != self.blocks[current].len() {
                        return false;
                    }
                    seen_complete[current] = true;
                }
                if b != usize::MAX && seen_complete[b] {
                    return false;
                }
                current = b;
                run = 0;
            }
            run += 1;
        }
        current == usize::MAX || run == self.blocks[current].len()
    }
}

/// Which way a split block fragment is compacted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactSide {
    Left,
    Right,
}

/// Compacts two fragments of one block: positions i and j hold vertices of
/// the same block with no block member strictly between them. Right moves
/// x_i to just before x_j; Left moves x_j to just after x_i. Both preserve
/// the value on a genuine median order of a module partition.
pub fn compact_block_fragment(
    t: &Tournament,
    l: &MedianOrder,
    partition: &ModulePartition,
    i: usize,
    j: usize,
    side: CompactSide,
) -> Result<MedianOrder> {
    let n = t.vertex_count();
    if partition.vertex_count() != n {
        return Err(Error::Input("partition size does not match graph".into()));
    }
    if i >= j || j >= n {
        return Err(Error::Input(format!(
            "positions ({i}, {j}) invalid for n = {n}"
        )));
    }
    if i + 1 == j {
        return Err(Error::Precondition(
            "fragments are adjacent; nothing to compact".into(),
        ));
    }
    let xi = l.order[i];
    let xj = l.order[j];
    let block = partition.block_index(xi);
    if partition.block_index(xj) != block {
        return Err(Error::Precondition(format!(
            "{xi} and {xj} are in different blocks"
        )));
    }
    if let Some(&mid) = l.order[i + 1..j]
        .iter()
        .find(|&&x| partition.block_index(x) == block)
    {
        return Err(Error::Precondition(format!(
            "block member {mid} lies strictly between positions {i} and {j}"
        )));
    }
    if !t.graph().is_module(partition.block_of(xi)) {
        return Err(Error::Precondition(format!(
            "block of {xi} is not a module of this tournament"
        )));
    }
    let mut order = l.order.clone();
    match side {
        CompactSide::Right => {
            let v = order.remove(i);
            order.insert(j - 1, v);
        }
        CompactSide::Left => {
            let v = order.remove(j);
            order.insert(i + 1, v);
        }
    }
    MedianOrder { order, value: l.value }.recheck(t)
}

/// Repairs a median order into a good one (every block consecutive) by
/// repeatedly compacting the first split block. Value and feed vertex are
/// preserved.
pub fn good_median_order(
    t: &Tournament,
    partition: &ModulePartition,
    l: &MedianOrder,
) -> Result<MedianOrder> {
    if partition.vertex_count() != t.vertex_count() {
        return Err(Error::Input("partition size does not match graph".into()));
    }
    let feed = if l.order.is_empty() { None } else { Some(l.feed_vertex()) };
    let mut current = l.clone();
    // Each compaction strictly shrinks some block's span, so the total span
    // bounds the number of rounds.
    let mut budget = t.vertex_count() * t.vertex_count() + 1;
    loop {
        let gap = first_block_gap(&current.order, partition);
        let Some((i, j)) = gap else {
            debug_assert!(partition.is_good(&current.order));
            if let Some(f) = feed {
                debug_assert_eq!(current.feed_vertex(), f);
            }
            return Ok(current);
        };
        if budget == 0 {
            return Err(Error::InvariantViolation(
                "compaction failed to terminate".into(),
            ));
        }
        budget -= 1;
        current = compact_block_fragment(t, &current, partition, i, j, CompactSide::Right)?;
    }
}

/// First pair of positions (i, j) holding same-block vertices with a
/// nonempty foreign gap between them, if any block is split.
fn first_block_gap(order: &[VertexId], partition: &ModulePartition) -> Option<(usize, usize)> {
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); partition.blocks().len()];
    for (p, &v) in order.iter().enumerate() {
        positions[partition.block_index(v)].push(p);
    }
    let mut best: Option<(usize, usize)> = None;
    for ps in &positions {
        for w in ps.windows(2) {
            if w[1] > w[0] + 1 {
                let candidate = (w[0], w[1]);
                if best.is_none_or(|b| candidate.0 < b.0) {
                    best = Some(candidate);
                }
                break;
            }
        }
    }
    best
}

/// One sedimentation step of a good median order. When the feed vertex's
/// external first and second out-neighborhoods have equal size, in-
/// neighbors outside the second neighborhood float to the front, the feed
/// block follows, and the rest sink to the end; otherwise the order is
/// returned unchanged.
pub fn sediment(
    t: &Tournament,
    partition: &ModulePartition,
    l: &MedianOrder,
) -> Result<MedianOrder> {
    let n = t.vertex_count();
    if n == 0 {
        return Err(Error::Input("empty tournament has no feed vertex".into()));
    }
    if partition.vertex_count() != n {
        return Err(Error::Input("partition size does not match graph".into()));
    }
    if !partition.is_good(&l.order) {
        return Err(Error::Precondition(
            "ordering is not good: some block is not consecutive".into(),
        ));
    }
    let d = l.feed_vertex();
    let block = partition.block_of(d);
    let mut block_mask = FixedBitSet::with_capacity(n);
    for &v in block {
        block_mask.insert(v);
    }
    let second = t.second_out_set(d);
    let mut ext_out = t.out_set(d).clone();
    ext_out.difference_with(&block_mask);
    let mut ext_second = second.clone();
    ext_second.difference_with(&block_mask);
    let out_size = ext_out.count_ones(..);
    let second_size = ext_second.count_ones(..);
    if out_size > second_size {
        return Err(Error::InvariantViolation(format!(
            "feed vertex {d} has external out-degree {out_size} exceeding \
             external second-degree {second_size} in a good median order"
        )));
    }
    if out_size < second_size {
        return Ok(l.clone());
    }
    let mut floats = Vec::new();
    let mut block_run = Vec::new();
    let mut sinks = Vec::new();
    for &x in &l.order {
        if block_mask.contains(x) {
            block_run.push(x);
        } else if t.has_arc(x, d) && !second.contains(x) {
            floats.push(x);
        } else {
            debug_assert!(t.has_arc(d, x) || second.contains(x));
            sinks.push(x);
        }
    }
    let mut order = floats;
    order.append(&mut block_run);
    order.append(&mut sinks);
    let result = MedianOrder { order, value: l.value }.recheck(t)?;
    if !partition.is_good(&result.order) {
        return Err(Error::InvariantViolation(
            "sedimentation split a block".into(),
        ));
    }
    Ok(result)
}

/// Where repeated sedimentation settles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SedimentOutcome {
    /// A fixed point, reached after `steps` applications.
    Stable { fixpoint: MedianOrder, steps: usize },
    /// The orbit revisits `history[period_start]` without fixing; history
    /// ends with that repeated ordering.
    Periodic { history: Vec<Vec<VertexId>>, period_start: usize },
}

/// Applies sedimentation until a fixed point or a repeated ordering, up to
/// `max_steps` applications.
pub fn sediment_iterate(
    t: &Tournament,
    partition: &ModulePartition,
    l: &MedianOrder,
    max_steps: usize,
) -> Result<SedimentOutcome> {
    let mut seen: HashMap<Vec<VertexId>, usize> = HashMap::new();
    seen.insert(l.order.clone(), 0);
    let mut history = vec![l.order.clone()];
    let mut current = l.clone();
    for step in 0..max_steps {
        let next = sediment(t, partition, &current)?;
        if next.order == current.order {
            return Ok(SedimentOutcome::Stable { fixpoint: current, steps: step });
        }
        history.push(next.order.clone());
        if let Some(&start) = seen.get(&next.order) {
            return Ok(SedimentOutcome::Periodic { history, period_start: start });
        }
        seen.insert(next.order.clone(), history.len() - 1);
        current = next;
    }
    Err(Error::Resource(format!(
        "no fixed point or repetition within {max_steps} sedimentation steps \
         ({} orderings visited)",
        history.len()
    )))
}

/// Checks on one block member of the feed block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMemberCheck {
    pub vertex: VertexId,
    pub external_out: usize,
    pub external_second: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedReport {
    pub feed: VertexId,
    pub out_degree: usize,
    pub second_degree: usize,
    pub block: Vec<VertexId>,
    pub members: Vec<BlockMemberCheck>,
}

/// Asserts the two feed-vertex guarantees of a good median order: the feed
/// vertex has a large second neighborhood, and every member of its block
/// has external second neighborhood at least as large as its external out
/// neighborhood.
pub fn feed_vertex_property(
    t: &Tournament,
    partition: &ModulePartition,
    l: &MedianOrder,
) -> Result<FeedReport> {
    if t.vertex_count() == 0 {
        return Err(Error::Input("empty tournament has no feed vertex".into()));
    }
    if !partition.is_good(&l.order) {
        return Err(Error::Precondition(
            "ordering is not good: some block is not consecutive".into(),
        ));
    }
    let d = l.feed_vertex();
    let out_degree = t.out_degree(d);
    let second_degree = t.second_out_set(d).count_ones(..);
    if out_degree > second_degree {
        return Err(Error::InvariantViolation(format!(
            "feed vertex {d}: out-degree {out_degree} exceeds second-degree {second_degree}"
        )));
    }
    let block = partition.block_of(d).to_vec();
    let mut block_mask = FixedBitSet::with_capacity(t.vertex_count());
    for &v in &block {
        block_mask.insert(v);
    }
    let mut members = Vec::new();
    for &v in &block {
        let mut ext_out = t.out_set(v).clone();
        ext_out.difference_with(&block_mask);
        let mut ext_second = t.second_out_set(v);
        ext_second.difference_with(&block_mask);
        let check = BlockMemberCheck {
            vertex: v,
            external_out: ext_out.count_ones(..),
            external_second: ext_second.count_ones(..),
        };
        if check.external_out > check.external_second {
            return Err(Error::InvariantViolation(format!(
                "block member {v}: external out-degree {} exceeds external \
                 second-degree {}",
                check.external_out, check.external_second
            )));
        }
        members.push(check);
    }
    Ok(FeedReport { feed: d, out_degree, second_degree, block, members })
}
