//! The five top-K algorithms: naive, Fagin, threshold, partial
//! threshold and halted threshold. All exact variants return identical
//! entry sets under canonical tie-breaking (score descending, target id
//! ascending).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::index::{frontier, peek_frontier, Direction, ListCursor, SortedIndex};
use crate::model::{QueryVector, TargetFactors};

/// One returned entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopKEntry {
    pub target: u32,
    pub score: f64,
}

/// Ranked result plus exactness flag, bounds at termination and
/// instrumentation counters.
#[derive(Debug, Clone)]
pub struct TopKResult {
    /// Sorted by score descending, ties by target id ascending.
    pub entries: Vec<TopKEntry>,
    pub exact: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub stats: QueryStats,
}

/// Per-query instrumentation.
#[derive(Debug, Clone, Default)]
pub struct QueryStats {
    /// Completed score computations.
    pub full_scores_computed: u64,
    /// u_r * t_r terms evaluated by partial scoring.
    pub partial_terms_computed: u64,
    pub sorted_accesses: u64,
    pub depth_reached: u64,
    pub heap_updates: u64,
    pub wall_time_ns: u64,
    /// Targets whose scoring was attempted (completed or aborted), in
    /// attempt order.
    pub scored_targets: Vec<u32>,
    /// (lowerBound, upperBound) recorded after each depth step.
    pub bounds_history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    score: f64,
    target: u32,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Max-heap root is the canonical worst entry: lowest score, ties
    // broken towards the highest target id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .partial_cmp(&self.score)
            .unwrap()
            .then(self.target.cmp(&other.target))
    }
}

/// Bounded heap holding the best K entries seen so far under the
/// canonical order.
#[derive(Debug, Clone)]
pub struct TopKHeap {
    capacity: usize,
    heap: BinaryHeap<HeapEntry>,
}

impl TopKHeap {
    pub fn new(capacity: usize) -> Self {
        TopKHeap {
            capacity,
            heap: BinaryHeap::with_capacity(capacity + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.capacity
    }

    /// Canonical worst retained entry, if any: (score, target).
    pub fn worst(&self) -> Option<(f64, u32)> {
        self.heap.peek().map(|e| (e.score, e.target))
    }

    /// K-th best score so far, -inf while fewer than K entries exist.
    pub fn lower_bound(&self) -> f64 {
        if self.is_full() {
            self.heap.peek().map(|e| e.score).unwrap_or(f64::NEG_INFINITY)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Insert if the entry belongs to the current top K. Returns true
    /// on a heap update.
    pub fn offer(&mut self, target: u32, score: f64) -> bool {
        let entry = HeapEntry { score, target };
        if self.heap.len() < self.capacity {
            self.heap.push(entry);
            return true;
        }
        let worst = *self.heap.peek().unwrap();
        let beats = score > worst.score || (score == worst.score && target < worst.target);
        if beats {
            self.heap.pop();
            self.heap.push(entry);
            return true;
        }
        false
    }

    pub fn into_sorted_entries(self) -> Vec<TopKEntry> {
        let mut v: Vec<TopKEntry> = self
            .heap
            .into_iter()
            .map(|e| TopKEntry {
                target: e.target,
                score: e.score,
            })
            .collect();
        v.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap()
                .then(a.target.cmp(&b.target))
        });
        v
    }
}

fn validate(u: &QueryVector, t: &TargetFactors, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    if u.num_dims() != t.num_dims() {
        return Err(Error::DimensionMismatch {
            expected: t.num_dims(),
            got: u.num_dims(),
        });
    }
    Ok(())
}

fn validate_index(idx: &SortedIndex, t: &TargetFactors) -> Result<()> {
    if idx.num_dims() != t.num_dims() {
        return Err(Error::DimensionMismatch {
            expected: t.num_dims(),
            got: idx.num_dims(),
        });
    }
    if idx.num_targets() != t.num_targets() {
        return Err(Error::DimensionMismatch {
            expected: t.num_targets(),
            got: idx.num_targets(),
        });
    }
    Ok(())
}

fn finish(
    heap: TopKHeap,
    exact: bool,
    upper: f64,
    mut stats: QueryStats,
    started: Instant,
) -> TopKResult {
    let entries = heap.into_sorted_entries();
    let lower = entries
        .last()
        .map(|e| e.score)
        .unwrap_or(f64::NEG_INFINITY);
    stats.wall_time_ns = started.elapsed().as_nanos() as u64;
    TopKResult {
        entries,
        exact,
        lower_bound: lower,
        upper_bound: if exact { lower } else { upper },
        stats,
    }
}

/// Score every target and keep the best K.
pub fn naive_topk(u: &QueryVector, t: &TargetFactors, k: usize) -> Result<TopKResult> {
    validate(u, t, k)?;
    let started = Instant::now();
    let mut stats = QueryStats::default();
    let mut heap = TopKHeap::new(k);
    for y in 0..t.num_targets() as u32 {
        let s = t.score_unchecked(u, y);
        stats.full_scores_computed += 1;
        stats.scored_targets.push(y);
        if heap.offer(y, s) {
            stats.heap_updates += 1;
        }
    }
    Ok(finish(heap, true, f64::INFINITY, stats, started))
}

/// Fagin's algorithm: a random-access phase that pops every effective
/// list per depth until K targets have been seen in all of them,
/// followed by scoring every encountered target. Dense indices only.
pub fn fagin_topk(
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
) -> Result<TopKResult> {
    validate(u, t, k)?;
    validate_index(idx, t)?;
    if idx.is_sparse() {
        return Err(Error::FaginSparseIndex);
    }
    let started = Instant::now();
    let mut stats = QueryStats::default();
    let m = t.num_targets();
    let r = t.num_dims();

    let mut cursor = ListCursor::new(idx, u)?;
    let effective: Vec<usize> = (0..r)
        .filter(|&dim| cursor.direction(dim) != Direction::Skipped)
        .collect();

    let mut seen = vec![false; m];
    let mut counts = vec![0u32; m];
    let mut in_all_lists = 0usize;

    if effective.is_empty() {
        // Zero query: every score is 0, fall back to scoring everything.
        seen.fill(true);
    } else {
        while in_all_lists < k {
            let mut any = false;
            for &dim in &effective {
                if let Some((y, _)) = frontier(idx, &mut cursor, u, dim) {
                    any = true;
                    stats.sorted_accesses += 1;
                    seen[y as usize] = true;
                    counts[y as usize] += 1;
                    if counts[y as usize] == effective.len() as u32 {
                        in_all_lists += 1;
                    }
                }
            }
            if !any {
                break;
            }
            stats.depth_reached += 1;
        }
    }

    let mut heap = TopKHeap::new(k);
    for y in 0..m as u32 {
        if seen[y as usize] {
            let s = t.score_unchecked(u, y);
            stats.full_scores_computed += 1;
            stats.scored_targets.push(y);
            if heap.offer(y, s) {
                stats.heap_updates += 1;
            }
        }
    }
    Ok(finish(heap, true, f64::INFINITY, stats, started))
}

/// The threshold algorithm: depth-synchronized sorted access with an
/// upper bound from the per-list frontier contributions.
pub fn threshold_topk(
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
) -> Result<TopKResult> {
    threshold_core(u, idx, t, k, None, false)
}

/// Threshold algorithm with partial scoring: each attempted score
/// starts from the depth's upper bound, swaps in true terms one
/// dimension at a time and aborts once the running value provably
/// cannot enter the top K.
pub fn partial_threshold_topk(
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
) -> Result<TopKResult> {
    threshold_core(u, idx, t, k, None, true)
}

/// Threshold algorithm stopped after `budget` depth steps. `exact` is
/// true only if the bound criterion was met within budget; otherwise
/// the returned bounds report the remaining gap.
pub fn halted_threshold_topk(
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
    budget: usize,
) -> Result<TopKResult> {
    if budget == 0 {
        return Err(Error::InvalidBudget);
    }
    threshold_core(u, idx, t, k, Some(budget), false)
}

fn threshold_core(
    u: &QueryVector,
    idx: &SortedIndex,
    t: &TargetFactors,
    k: usize,
    budget: Option<usize>,
    partial: bool,
) -> Result<TopKResult> {
    validate(u, t, k)?;
    validate_index(idx, t)?;
    let started = Instant::now();
    let mut stats = QueryStats::default();
    let m = t.num_targets();
    let r = t.num_dims();
    let mut heap = TopKHeap::new(k);

    if m == 0 {
        return Ok(finish(heap, true, f64::NEG_INFINITY, stats, started));
    }

    let mut cursor = ListCursor::new(idx, u)?;
    let mut attempted = vec![false; m];
    // Per-dimension term of the unseen-score bound. A skipped list (and an
    // exhausted sparse list) contributes 0; an exhausted dense list
    // freezes at its last popped contribution.
    let mut bound_contrib = vec![0.0f64; r];
    let exact;
    let mut upper;
    let mut depth = 0usize;

    loop {
        let exhausted =
            (0..r).all(|dim| peek_frontier(idx, &cursor, u, dim).is_none());
        if exhausted {
            // Sparse fallback (a no-op on fully traversed dense lists):
            // score whatever was never seen so exactness is preserved.
            for y in 0..m as u32 {
                if !attempted[y as usize] {
                    attempted[y as usize] = true;
                    let s = t.score_unchecked(u, y);
                    stats.full_scores_computed += 1;
                    if partial {
                        stats.partial_terms_computed += r as u64;
                    }
                    stats.scored_targets.push(y);
                    if heap.offer(y, s) {
                        stats.heap_updates += 1;
                    }
                }
            }
            exact = true;
            upper = bound_contrib.iter().sum();
            break;
        }

        depth += 1;
        // Frontier values at this depth, fixed before any of the
        // depth's pops so partial-evaluation swaps see a consistent bound.
        for dim in 0..r {
            if let Some((_, contrib)) = peek_frontier(idx, &cursor, u, dim) {
                bound_contrib[dim] = contrib;
            } else if cursor.direction(dim) == Direction::Descending && idx.is_sparse() {
                bound_contrib[dim] = 0.0;
            }
            // skipped stays 0, exhausted dense stays frozen
        }
        let mut upper_d = 0.0;
        for &c in &bound_contrib {
            upper_d += c;
        }
        upper = upper_d;

        for dim in 0..r {
            let Some((y, _)) = frontier(idx, &mut cursor, u, dim) else {
                continue;
            };
            stats.sorted_accesses += 1;
            if attempted[y as usize] {
                continue;
            }
            attempted[y as usize] = true;
            stats.scored_targets.push(y);
            if !partial || !heap.is_full() {
                let s = t.score_unchecked(u, y);
                stats.full_scores_computed += 1;
                if partial {
                    stats.partial_terms_computed += r as u64;
                }
                if heap.offer(y, s) {
                    stats.heap_updates += 1;
                }
            } else {
                let (worst_score, worst_id) = heap.worst().unwrap();
                let mut running = upper_d;
                let mut completed = true;
                for rr in 0..r {
                    running -= bound_contrib[rr];
                    running += u.values()[rr] * t.value(y, rr);
                    stats.partial_terms_computed += 1;
                    let loses = running < worst_score
                        || (running == worst_score && y > worst_id);
                    if loses {
                        completed = false;
                        break;
                    }
                }
                if completed {
                    // Recompute in the canonical accumulation order so the
                    // stored score is bit-identical to the other algorithms.
                    let s = t.score_unchecked(u, y);
                    stats.full_scores_computed += 1;
                    if heap.offer(y, s) {
                        stats.heap_updates += 1;
                    }
                }
            }
        }

        stats.depth_reached = depth as u64;
        let lower = heap.lower_bound();
        stats.bounds_history.push((lower, upper_d));
        if lower > upper_d {
            exact = true;
            break;
        }
        if lower == upper_d {
            // An unseen target could still tie the K-th score exactly
            // and win on id under canonical tie-breaking. Such a target
            // must match the bound term in every dimension, so it sits
            // in the run of equal contributions right behind some live
            // frontier; sweep one such run and score the candidates.
            // On tie-free data the run is empty and this costs nothing.
            if let Some(scan) =
                (0..r).find(|&d| peek_frontier(idx, &cursor, u, d).is_some())
            {
                let list = idx.list(scan);
                let len = list.len();
                let mut off = cursor.depth(scan);
                while off < len {
                    let (v, y) = match cursor.direction(scan) {
                        Direction::Descending => list[off],
                        Direction::Ascending => list[len - 1 - off],
                        Direction::Skipped => break,
                    };
                    if u.values()[scan] * v != bound_contrib[scan] {
                        break;
                    }
                    if !attempted[y as usize] {
                        attempted[y as usize] = true;
                        let s = t.score_unchecked(u, y);
                        stats.full_scores_computed += 1;
                        if partial {
                            stats.partial_terms_computed += r as u64;
                        }
                        stats.scored_targets.push(y);
                        if heap.offer(y, s) {
                            stats.heap_updates += 1;
                        }
                    }
                    off += 1;
                }
                exact = true;
                break;
            }
            // No live frontier is left; the next iteration takes the
            // exhausted branch and scores whatever remains.
        }
        if budget == Some(depth) {
            exact = false;
            break;
        }
    }

    stats.depth_reached = depth as u64;
    let entries_ready = finish(heap, exact, upper, stats, started);
    Ok(entries_ready)
}
