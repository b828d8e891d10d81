// SPDX-License-Identifier: Apache-2.0

//! Area-balanced min-cut bi-partitioning of a clustered hypergraph:
//! multi-restart Fiduccia–Mattheyses plus an exhaustive oracle used for
//! validation at small sizes.

use crate::error::{Error, Result};
use crate::model::{Design, Hypergraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Relative slack for balance comparisons on summed real-valued areas.
const AREA_EPS: f64 = 1e-9;

/// Whether `area` fits within `capacity`, allowing 1e-9 relative slack for
/// floating-point accumulation.
pub fn fits_capacity(area: f64, capacity: f64) -> bool {
    area <= capacity * (1.0 + AREA_EPS)
}

/// Maximum area fraction either side of the bipartition may hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSpec {
    pub max_fraction: f64,
}

impl BalanceSpec {
    pub fn new(max_fraction: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&max_fraction) {
            return Err(Error::Domain(format!(
                "partition: balance max_fraction must be in [0.5, 1), got {max_fraction}"
            )));
        }
        Ok(BalanceSpec { max_fraction })
    }

    /// Per-side capacity for a given total vertex weight.
    pub fn capacity(&self, total: f64) -> f64 {
        self.max_fraction * total
    }
}

impl Default for BalanceSpec {
    /// The 49/51 unbalance target.
    fn default() -> Self {
        BalanceSpec { max_fraction: 0.51 }
    }
}

/// A two-way partition of hypergraph vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Side (0 or 1) per vertex id.
    pub side: Vec<u8>,
    /// Ids of hyperedges with members on both sides, ascending.
    pub cut_edges: Vec<usize>,
    /// Summed weight of the cut hyperedges.
    pub cut_weight: u64,
    /// Summed vertex weight per side.
    pub side_areas: [f64; 2],
    pub restarts_used: usize,
    pub rng_seed: u64,
}

/// Recounts the cut from scratch: ids and summed weight of every hyperedge
/// with members on both sides.
pub fn recount_cut(hg: &Hypergraph, side: &[u8]) -> (Vec<usize>, u64) {
    let mut ids = Vec::new();
    let mut weight = 0u64;
    for (i, e) in hg.edges.iter().enumerate() {
        let any0 = e.members.iter().any(|&v| side[v] == 0);
        let any1 = e.members.iter().any(|&v| side[v] == 1);
        if any0 && any1 {
            ids.push(i);
            weight += e.weight;
        }
    }
    (ids, weight)
}

fn side_areas(hg: &Hypergraph, side: &[u8]) -> [f64; 2] {
    let mut areas = [0.0; 2];
    for (v, &s) in side.iter().enumerate() {
        areas[s as usize] += hg.vertex_weights[v];
    }
    areas
}

/// Greedy feasibility check: vertices in descending weight order, first-fit
/// into the sides. Errors name the first vertex that fits nowhere.
fn check_feasible(hg: &Hypergraph, capacity: f64) -> Result<()> {
    let mut order: Vec<usize> = (0..hg.vertex_count()).collect();
    order.sort_by(|&a, &b| {
        hg.vertex_weights[b]
            .partial_cmp(&hg.vertex_weights[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut areas = [0.0f64; 2];
    for v in order {
        let w = hg.vertex_weights[v];
        if fits_capacity(areas[0] + w, capacity) {
            areas[0] += w;
        } else if fits_capacity(areas[1] + w, capacity) {
            areas[1] += w;
        } else {
            return Err(Error::Infeasible(format!(
                "partition: vertex {v} of weight {w} fits on neither side (capacity {capacity})"
            )));
        }
    }
    Ok(())
}

/// Multi-restart Fiduccia–Mattheyses bi-partitioning.
///
/// Each restart draws a random balanced initial assignment from its own RNG
/// stream and refines it with FM passes (gain buckets, prefix-best rollback)
/// until a pass brings no improvement. The best cut across restarts wins,
/// ties broken by the lowest restart index, so the result is deterministic
/// for a given `rng_seed` regardless of how restarts are scheduled.
pub fn fm_bipartition(
    hg: &Hypergraph,
    balance: &BalanceSpec,
    restarts: usize,
    rng_seed: u64,
) -> Result<Partition> {
    if restarts < 1 {
        return Err(Error::Domain(format!(
            "partition: restarts must be >= 1, got {restarts}"
        )));
    }
    let n = hg.vertex_count();
    if n == 0 {
        return Ok(Partition {
            side: Vec::new(),
            cut_edges: Vec::new(),
            cut_weight: 0,
            side_areas: [0.0, 0.0],
            restarts_used: restarts,
            rng_seed,
        });
    }
    let capacity = balance.capacity(hg.total_weight());
    check_feasible(hg, capacity)?;
    let incidence = build_incidence(hg);

    let best = (0..restarts)
        .into_par_iter()
        .filter_map(|idx| {
            let stream = rng_seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            // alternate seeding styles: scattered starts explore, frontier-grown
            // starts give coordinated region cuts on structured netlists
            let kind = if idx % 2 == 1 {
                StartKind::Grow
            } else {
                StartKind::Shuffle
            };
            run_restart(hg, &incidence, capacity, &mut rng, kind)
                .map(|(cut, side)| (cut, idx, side))
        })
        .min_by_key(|&(cut, idx, _)| (cut, idx));

    let (cut_weight, _, side) = best.ok_or_else(|| {
        Error::Infeasible(
            "partition: no balanced initial assignment found within the retry budget".into(),
        )
    })?;
    let (cut_edges, recount) = recount_cut(hg, &side);
    debug_assert_eq!(recount, cut_weight, "tracked cut diverged from recount");
    Ok(Partition {
        side_areas: side_areas(hg, &side),
        side,
        cut_edges,
        cut_weight: recount,
        restarts_used: restarts,
        rng_seed,
    })
}

fn build_incidence(hg: &Hypergraph) -> Vec<Vec<u32>> {
    let mut inc = vec![Vec::new(); hg.vertex_count()];
    for (i, e) in hg.edges.iter().enumerate() {
        for &v in &e.members {
            inc[v].push(i as u32);
        }
    }
    inc
}

#[derive(Clone, Copy)]
enum StartKind {
    /// Random shuffle, greedy first-fit to the lighter side.
    Shuffle,
    /// Breadth-first region growth from a random seed vertex.
    Grow,
}

/// One restart: balanced start, FM passes to a local minimum.
/// Returns None when no balanced start is found within the retry budget.
fn run_restart(
    hg: &Hypergraph,
    incidence: &[Vec<u32>],
    capacity: f64,
    rng: &mut ChaCha8Rng,
    kind: StartKind,
) -> Option<(u64, Vec<u8>)> {
    let n = hg.vertex_count();
    let mut side = vec![0u8; n];
    let mut areas = [0.0f64; 2];
    let seeded = match kind {
        StartKind::Shuffle => shuffle_start(hg, capacity, rng, &mut side, &mut areas),
        // a grown start can end up unbalanceable; fall back to shuffling
        StartKind::Grow => {
            grow_start(hg, incidence, capacity, rng, &mut side, &mut areas)
                || shuffle_start(hg, capacity, rng, &mut side, &mut areas)
        }
    };
    if !seeded {
        return None;
    }

    let mut counts: Vec<[u32; 2]> = hg
        .edges
        .iter()
        .map(|e| {
            let ones = e.members.iter().filter(|&&v| side[v] == 1).count() as u32;
            [e.members.len() as u32 - ones, ones]
        })
        .collect();
    let mut cut: i64 = hg
        .edges
        .iter()
        .zip(&counts)
        .filter(|(_, c)| c[0] > 0 && c[1] > 0)
        .map(|(e, _)| e.weight as i64)
        .sum();

    loop {
        let pass_start = cut;
        cut = fm_pass(
            hg,
            incidence,
            capacity,
            &mut side,
            &mut areas,
            &mut counts,
            cut,
        );
        if cut >= pass_start {
            break;
        }
    }
    Some((cut as u64, side))
}

/// Random shuffle, greedy first-fit to the lighter side, up to 50 retries.
fn shuffle_start(
    hg: &Hypergraph,
    capacity: f64,
    rng: &mut ChaCha8Rng,
    side: &mut [u8],
    areas: &mut [f64; 2],
) -> bool {
    let n = hg.vertex_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    for _ in 0..50 {
        order.shuffle(rng);
        *areas = [0.0, 0.0];
        let mut ok = true;
        for &v in &order {
            let w = hg.vertex_weights[v as usize];
            // lighter side first, then the other
            let first = usize::from(areas[0] > areas[1]);
            let second = 1 - first;
            if fits_capacity(areas[first] + w, capacity) {
                side[v as usize] = first as u8;
                areas[first] += w;
            } else if fits_capacity(areas[second] + w, capacity) {
                side[v as usize] = second as u8;
                areas[second] += w;
            } else {
                ok = false;
                break;
            }
        }
        if ok {
            return true;
        }
    }
    false
}

/// Breadth-first growth over hyperedge connectivity from a random seed:
/// side 0 takes a connected region of about half the area, which puts the
/// initial cut near a region boundary instead of scattering it everywhere.
fn grow_start(
    hg: &Hypergraph,
    incidence: &[Vec<u32>],
    capacity: f64,
    rng: &mut ChaCha8Rng,
    side: &mut [u8],
    areas: &mut [f64; 2],
) -> bool {
    let n = hg.vertex_count();
    let total = hg.total_weight();
    let half = 0.5 * total;
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(rng);
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut next_seed = 0usize;
    while order.len() < n {
        if queue.is_empty() {
            // previous component exhausted; seed the next one
            while seen[perm[next_seed] as usize] {
                next_seed += 1;
            }
            seen[perm[next_seed] as usize] = true;
            queue.push_back(perm[next_seed]);
        }
        let v = queue.pop_front().expect("queue was just refilled");
        order.push(v);
        for &ei in &incidence[v as usize] {
            for &u in &hg.edges[ei as usize].members {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u as u32);
                }
            }
        }
    }
    *areas = [0.0, 0.0];
    for &v in &order {
        let w = hg.vertex_weights[v as usize];
        if areas[0] < half && fits_capacity(areas[0] + w, capacity) {
            side[v as usize] = 0;
            areas[0] += w;
        } else {
            side[v as usize] = 1;
            areas[1] += w;
        }
    }
    fits_capacity(areas[0], capacity) && fits_capacity(areas[1], capacity)
}

/// Gain buckets: vertices indexed by gain + offset with O(1) removal.
struct Buckets {
    lists: Vec<Vec<u32>>,
    /// Per vertex: bucket index and slot within it (valid while in a bucket).
    place: Vec<(u32, u32)>,
    in_bucket: Vec<bool>,
    offset: i64,
    cur_max: i64,
}

impl Buckets {
    fn new(offset: i64, n: usize) -> Self {
        Buckets {
            lists: vec![Vec::new(); (2 * offset + 1) as usize],
            place: vec![(0, 0); n],
            in_bucket: vec![false; n],
            offset,
            cur_max: -1,
        }
    }

    fn insert(&mut self, v: u32, gain: i64) {
        let idx = (gain + self.offset) as usize;
        self.place[v as usize] = (idx as u32, self.lists[idx].len() as u32);
        self.lists[idx].push(v);
        self.in_bucket[v as usize] = true;
        self.cur_max = self.cur_max.max(idx as i64);
    }

    fn remove(&mut self, v: u32) {
        let (idx, slot) = self.place[v as usize];
        let list = &mut self.lists[idx as usize];
        list.swap_remove(slot as usize);
        if let Some(&moved) = list.get(slot as usize) {
            self.place[moved as usize].1 = slot;
        }
        self.in_bucket[v as usize] = false;
    }

    fn reposition(&mut self, v: u32, gain: i64) {
        if self.in_bucket[v as usize] {
            self.remove(v);
            self.insert(v, gain);
        }
    }
}

/// One FM pass. Moves the highest-gain legal vertex until none remains,
/// tracking the best prefix, then rolls back to it. Returns the cut after
/// rollback.
#[allow(clippy::too_many_arguments)]
fn fm_pass(
    hg: &Hypergraph,
    incidence: &[Vec<u32>],
    capacity: f64,
    side: &mut [u8],
    areas: &mut [f64; 2],
    counts: &mut [[u32; 2]],
    start_cut: i64,
) -> i64 {
    let n = side.len();
    let mut gain = vec![0i64; n];
    for (ei, e) in hg.edges.iter().enumerate() {
        let w = e.weight as i64;
        for &v in &e.members {
            let s = side[v] as usize;
            if counts[ei][s] == 1 {
                gain[v] += w;
            }
            if counts[ei][1 - s] == 0 {
                gain[v] -= w;
            }
        }
    }
    let offset = incidence
        .iter()
        .map(|edges| {
            edges
                .iter()
                .map(|&e| hg.edges[e as usize].weight as i64)
                .sum()
        })
        .max()
        .unwrap_or(0);
    let mut buckets = Buckets::new(offset, n);
    for (v, &g) in gain.iter().enumerate() {
        buckets.insert(v as u32, g);
    }

    // passes may wander one max-weight vertex past capacity; only feasible
    // prefixes can become the rollback target
    let slack = hg.vertex_weights.iter().copied().fold(0.0, f64::max);
    let mut moves: Vec<u32> = Vec::new();
    let mut running = start_cut;
    let mut best = start_cut;
    let mut best_len = 0usize;

    while let Some(v) = select_move(&mut buckets, side, areas, capacity + slack, hg) {
        let vu = v as usize;
        buckets.remove(v);
        let from = side[vu] as usize;
        let to = 1 - from;
        let w_v = hg.vertex_weights[vu];
        for &ei in &incidence[vu] {
            let e = &hg.edges[ei as usize];
            let w = e.weight as i64;
            // standard FM neighbor-gain updates around moving v from->to
            if counts[ei as usize][to] == 0 {
                for &u in &e.members {
                    if buckets.in_bucket[u] {
                        gain[u] += w;
                        buckets.reposition(u as u32, gain[u]);
                    }
                }
            } else if counts[ei as usize][to] == 1 {
                for &u in &e.members {
                    if buckets.in_bucket[u] && side[u] as usize == to {
                        gain[u] -= w;
                        buckets.reposition(u as u32, gain[u]);
                    }
                }
            }
            counts[ei as usize][from] -= 1;
            counts[ei as usize][to] += 1;
            if counts[ei as usize][from] == 0 {
                for &u in &e.members {
                    if buckets.in_bucket[u] {
                        gain[u] -= w;
                        buckets.reposition(u as u32, gain[u]);
                    }
                }
            } else if counts[ei as usize][from] == 1 {
                for &u in &e.members {
                    if buckets.in_bucket[u] && side[u] as usize == from {
                        gain[u] += w;
                        buckets.reposition(u as u32, gain[u]);
                    }
                }
            }
        }
        running -= gain[vu];
        areas[from] -= w_v;
        areas[to] += w_v;
        side[vu] = to as u8;
        moves.push(v);
        if running < best && fits_capacity(areas[0], capacity) && fits_capacity(areas[1], capacity)
        {
            best = running;
            best_len = moves.len();
        }
    }

    // roll back everything after the best prefix
    for &v in moves[best_len..].iter().rev() {
        let vu = v as usize;
        let cur = side[vu] as usize;
        let back = 1 - cur;
        let w_v = hg.vertex_weights[vu];
        areas[cur] -= w_v;
        areas[back] += w_v;
        side[vu] = back as u8;
        for &ei in &incidence[vu] {
            counts[ei as usize][cur] -= 1;
            counts[ei as usize][back] += 1;
        }
    }
    best
}

/// Highest-gain vertex whose move keeps the destination side within the
/// working bound (capacity plus one max-weight vertex of slack); moves off
/// an overfull side are always legal.
fn select_move(
    buckets: &mut Buckets,
    side: &[u8],
    areas: &[f64; 2],
    bound: f64,
    hg: &Hypergraph,
) -> Option<u32> {
    let mut g = buckets.cur_max;
    while g >= 0 {
        if buckets.lists[g as usize].is_empty() {
            if g == buckets.cur_max {
                buckets.cur_max -= 1;
            }
            g -= 1;
            continue;
        }
        // LIFO within a gain level: most recently repositioned first
        for &v in buckets.lists[g as usize].iter().rev() {
            let from = side[v as usize] as usize;
            let to = 1 - from;
            let legal = fits_capacity(areas[to] + hg.vertex_weights[v as usize], bound)
                || !fits_capacity(areas[from], bound);
            if legal {
                return Some(v);
            }
        }
        g -= 1;
    }
    None
}

/// Exhaustive oracle: tries every assignment with vertex 0 pinned to side 0
/// (cuts are symmetric under side swap) and keeps the best feasible one.
/// Ties resolve to the lexicographically smallest side vector.
pub fn brute_force_bipartition(hg: &Hypergraph, balance: &BalanceSpec) -> Result<Partition> {
    let n = hg.vertex_count();
    if n > 24 {
        return Err(Error::Domain(format!(
            "partition: exhaustive search capped at 24 vertices, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Partition {
            side: Vec::new(),
            cut_edges: Vec::new(),
            cut_weight: 0,
            side_areas: [0.0, 0.0],
            restarts_used: 0,
            rng_seed: 0,
        });
    }
    let capacity = balance.capacity(hg.total_weight());
    let mut best: Option<(u64, Vec<u8>)> = None;
    // lexicographic order: vertex 0 is the most significant bit and stays 0
    for mask in 0u64..(1u64 << (n - 1)) {
        let side: Vec<u8> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
        let areas = side_areas(hg, &side);
        if !fits_capacity(areas[0], capacity) || !fits_capacity(areas[1], capacity) {
            continue;
        }
        let (_, weight) = recount_cut(hg, &side);
        if best.as_ref().is_none_or(|(b, _)| weight < *b) {
            best = Some((weight, side));
        }
    }
    let (cut_weight, side) = best.ok_or_else(|| {
        Error::Infeasible("partition: no balance-feasible assignment exists".into())
    })?;
    let (cut_edges, _) = recount_cut(hg, &side);
    Ok(Partition {
        side_areas: side_areas(hg, &side),
        side,
        cut_edges,
        cut_weight,
        restarts_used: 0,
        rng_seed: 0,
    })
}

/// Target die of a cell. Side 0 maps to the bottom die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Die {
    Bottom,
    Top,
}

impl Die {
    pub fn as_str(&self) -> &'static str {
        match self {
            Die::Bottom => "bottom",
            Die::Top => "top",
        }
    }
}

impl fmt::Display for Die {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Expands a vertex partition into per-cell die directives via each vertex's
/// member cells. Buffers are excluded; rows are ordered by cell id.
pub fn gate_directives(
    partition: &Partition,
    hg: &Hypergraph,
    design: &Design,
) -> Result<Vec<(String, Die)>> {
    if partition.side.len() != hg.vertex_count() {
        return Err(Error::Integrity(format!(
            "partition: side vector covers {} vertices but the hypergraph has {}",
            partition.side.len(),
            hg.vertex_count()
        )));
    }
    let mut rows: Vec<(usize, Die)> = Vec::new();
    for (v, &s) in partition.side.iter().enumerate() {
        let die = if s == 0 { Die::Bottom } else { Die::Top };
        for &cell in &hg.vertex_origin[v] {
            if !design.cells[cell].is_buffer {
                rows.push((cell, die));
            }
        }
    }
    rows.sort_by_key(|&(cell, _)| cell);
    Ok(rows
        .into_iter()
        .map(|(cell, die)| (design.cells[cell].name.clone(), die))
        .collect())
}

/// CSV rendering of die directives, one `cell_name,die` row per cell.
pub fn directives_to_csv(directives: &[(String, Die)]) -> String {
    let mut out = String::from("cell_name,die\n");
    for (name, die) in directives {
        out.push_str(name);
        out.push(',');
        out.push_str(die.as_str());
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct DirectiveRow<'a> {
    name: &'a str,
    die: Die,
}

/// Structured rendering of die directives, mirroring the native netlist
/// format's cell naming.
pub fn directives_to_json(directives: &[(String, Die)]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        directives: Vec<DirectiveRow<'a>>,
    }
    let doc = Doc {
        directives: directives
            .iter()
            .map(|(name, die)| DirectiveRow { name, die: *die })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("directive serialization is infallible");
    s.push('\n');
    s
}
