// SPDX-License-Identifier: Apache-2.0

//! Gate clustering methods: none, hierarchical geometric, k-means, and
//! progressive wire-length absorption. Every method yields a [`Clustering`]
//! that `build_hypergraph` can consume.

use crate::error::{Error, Result};
use crate::model::{Design, Point};
use crate::partition::fits_capacity;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Clustering method tag, carried through reports and output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// No clustering: one cell per cluster.
    Nc,
    /// Hierarchical geometric: alternating vertical/horizontal median splits.
    Hg,
    /// K-means over cell centers with Manhattan distance.
    Km,
    /// Progressive wire-length: absorb every net shorter than a threshold.
    Pwl,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Nc => "nc",
            Method::Hg => "hg",
            Method::Km => "km",
            Method::Pwl => "pwl",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "nc" => Ok(Method::Nc),
            "hg" => Ok(Method::Hg),
            "km" => Ok(Method::Km),
            "pwl" => Ok(Method::Pwl),
            other => Err(Error::Domain(format!(
                "cluster: unknown method '{other}' (expected nc, hg, km, or pwl)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A total, single-valued cell-to-cluster assignment with dense cluster ids
/// and no empty cluster.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Cluster id per cell id.
    pub assignment: Vec<usize>,
    /// Summed member cell area per cluster.
    pub cluster_areas: Vec<f64>,
    /// Arithmetic mean of member cell centers per cluster.
    pub cluster_centroids: Vec<Point>,
    pub method: Method,
    /// Method parameters actually used, `key=value` separated by spaces.
    pub params: String,
}

impl Clustering {
    /// Builds a clustering from an arbitrary (possibly sparse) raw labeling:
    /// labels are re-densified in order of first appearance, areas and
    /// centroids are derived from the design.
    pub fn from_assignment(design: &Design, raw: Vec<usize>, method: Method) -> Result<Self> {
        if raw.len() != design.cells.len() {
            return Err(Error::Integrity(format!(
                "cluster: assignment covers {} cells but the design has {}",
                raw.len(),
                design.cells.len()
            )));
        }
        let mut dense_of = std::collections::HashMap::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &label in &raw {
            let next = dense_of.len();
            let dense = *dense_of.entry(label).or_insert(next);
            assignment.push(dense);
        }
        let k = dense_of.len();
        let mut cluster_areas = vec![0.0; k];
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
        for (cell, &cluster) in assignment.iter().enumerate() {
            let c = &design.cells[cell];
            cluster_areas[cluster] += c.area();
            let center = c.center();
            sums[cluster].0 += center.x;
            sums[cluster].1 += center.y;
            sums[cluster].2 += 1;
        }
        let cluster_centroids = sums
            .iter()
            .map(|&(sx, sy, n)| Point::new(sx / n as f64, sy / n as f64))
            .collect();
        Ok(Clustering {
            assignment,
            cluster_areas,
            cluster_centroids,
            method,
            params: String::new(),
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_areas.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cluster_areas.iter().sum()
    }

    /// CSV dump of `(cell name, cluster id)` for inspection.
    pub fn to_csv(&self, design: &Design) -> String {
        let mut out = String::from("cell_name,cluster_id\n");
        for (cell, &cluster) in self.assignment.iter().enumerate() {
            out.push_str(&design.cells[cell].name);
            out.push(',');
            out.push_str(&cluster.to_string());
            out.push('\n');
        }
        out
    }
}

/// Identity clustering: one cell per cluster. The partitioning baseline.
pub fn cluster_none(design: &Design) -> Clustering {
    let raw: Vec<usize> = (0..design.cells.len()).collect();
    let mut c = Clustering::from_assignment(design, raw, Method::Nc)
        .expect("identity assignment always covers the design");
    c.params = String::new();
    c
}

/// Hierarchical geometric clustering: split the design with alternating
/// vertical and horizontal cuts at the area-median origin coordinate until
/// the leaf count is the smallest power of two at or above `target_k`. Cells
/// are assigned to the side containing their origin; empty leaves are
/// dropped.
pub fn cluster_hg(design: &Design, target_k: usize) -> Result<Clustering> {
    if target_k < 1 {
        return Err(Error::Domain(format!(
            "cluster: hg target_k must be >= 1, got {target_k}"
        )));
    }
    let leaves = target_k.next_power_of_two();
    let depth = leaves.trailing_zeros();
    let mut raw = vec![0usize; design.cells.len()];
    let idxs: Vec<usize> = (0..design.cells.len()).collect();
    split_region(design, idxs, depth, true, 0, &mut raw);
    let mut c = Clustering::from_assignment(design, raw, Method::Hg)?;
    c.params = format!("target_k={target_k} leaves={leaves}");
    Ok(c)
}

fn split_region(
    design: &Design,
    idxs: Vec<usize>,
    depth: u32,
    vertical: bool,
    leaf_base: usize,
    raw: &mut [usize],
) {
    if depth == 0 {
        for i in idxs {
            raw[i] = leaf_base;
        }
        return;
    }
    let coord = |i: usize| {
        let o = design.cells[i].origin;
        if vertical {
            o.x
        } else {
            o.y
        }
    };
    let mut sorted = idxs;
    sorted.sort_by(|&a, &b| coord(a).partial_cmp(&coord(b)).unwrap().then(a.cmp(&b)));
    let total: f64 = sorted.iter().map(|&i| design.cells[i].area()).sum();
    // smallest origin coordinate whose <=-prefix holds at least half the area
    let mut cut = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for &i in &sorted {
        acc += design.cells[i].area();
        if acc >= total / 2.0 {
            cut = coord(i);
            break;
        }
    }
    let split_at = sorted.partition_point(|&i| coord(i) <= cut);
    let right = sorted.split_off(split_at);
    let half = 1usize << (depth - 1);
    split_region(design, sorted, depth - 1, !vertical, leaf_base, raw);
    split_region(design, right, depth - 1, !vertical, leaf_base + half, raw);
}

/// Per-iteration k-means bookkeeping: seed positions after the latest update
/// plus each seed's displacement during that update.
#[derive(Debug, Clone)]
pub struct KmState {
    pub seeds: Vec<Point>,
    pub iteration: usize,
    pub last_deltas: Vec<f64>,
}

/// K-means over cell centers. Seeds start on a regular grid, assignment uses
/// Manhattan distance (ties to the lowest seed index), and iteration stops
/// once the 95th-percentile seed displacement drops below one average gate
/// width, or after `max_iters`. Empty clusters are dropped at the end.
pub fn cluster_kmeans(design: &Design, k: usize, max_iters: usize) -> Result<Clustering> {
    cluster_kmeans_detailed(design, k, max_iters).map(|(c, _, _)| c)
}

/// [`cluster_kmeans`] exposing the final [`KmState`] and whether the
/// percentile criterion (rather than the iteration cap) ended the run.
pub fn cluster_kmeans_detailed(
    design: &Design,
    k: usize,
    max_iters: usize,
) -> Result<(Clustering, KmState, bool)> {
    if k < 1 {
        return Err(Error::Domain(format!(
            "cluster: k-means k must be >= 1, got {k}"
        )));
    }
    if k > design.cells.len() {
        return Err(Error::Domain(format!(
            "cluster: k-means k={k} exceeds the cell count {}",
            design.cells.len()
        )));
    }
    let centers: Vec<Point> = design.cells.iter().map(|c| c.center()).collect();
    let mut seeds = initial_seeds(design, k);
    let mut assignment = vec![0usize; centers.len()];
    let mut last_deltas = vec![0.0; k];
    let mut iteration = 0;
    let mut converged = false;
    while iteration < max_iters {
        iteration += 1;
        assignment = assign_to_seeds(&centers, &seeds);
        let updated = update_seeds(&centers, &assignment, &seeds);
        last_deltas = seeds
            .iter()
            .zip(&updated)
            .map(|(old, new)| old.manhattan(new))
            .collect();
        seeds = updated;
        if p95(&last_deltas) < design.agw {
            converged = true;
            break;
        }
    }
    let mut clustering = Clustering::from_assignment(design, assignment, Method::Km)?;
    let dropped = k - clustering.cluster_count();
    clustering.params = format!(
        "k={k} max_iters={max_iters} iterations={iteration} converged={converged} empty_dropped={dropped}"
    );
    let state = KmState {
        seeds,
        iteration,
        last_deltas,
    };
    Ok((clustering, state, converged))
}

/// Seeds spread regularly: a ceil(sqrt(k)) x ceil(k / cols) grid of tile
/// centers, truncated to k in row-major order.
fn initial_seeds(design: &Design, k: usize) -> Vec<Point> {
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    let fp = design.floorplan;
    (0..k)
        .map(|i| {
            let col = i % cols;
            let row = i / cols;
            Point::new(
                fp.origin.x + (col as f64 + 0.5) * fp.width / cols as f64,
                fp.origin.y + (row as f64 + 0.5) * fp.height / rows as f64,
            )
        })
        .collect()
}

pub(crate) fn assign_to_seeds(centers: &[Point], seeds: &[Point]) -> Vec<usize> {
    centers
        .iter()
        .map(|c| {
            let mut best = 0;
            let mut best_d = c.manhattan(&seeds[0]);
            for (i, s) in seeds.iter().enumerate().skip(1) {
                let d = c.manhattan(s);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// New seed = arithmetic mean of member centers; seeds of empty clusters
/// stay put.
pub(crate) fn update_seeds(centers: &[Point], assignment: &[usize], seeds: &[Point]) -> Vec<Point> {
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); seeds.len()];
    for (cell, &s) in assignment.iter().enumerate() {
        sums[s].0 += centers[cell].x;
        sums[s].1 += centers[cell].y;
        sums[s].2 += 1;
    }
    sums.iter()
        .zip(seeds)
        .map(|(&(sx, sy, n), old)| {
            if n == 0 {
                *old
            } else {
                Point::new(sx / n as f64, sy / n as f64)
            }
        })
        .collect()
}

/// Smallest value v such that at least 95% of the samples are <= v.
pub(crate) fn p95(deltas: &[f64]) -> f64 {
    if deltas.is_empty() {
        return 0.0;
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank - 1]
}

/// Progressive wire-length clustering: union the endpoint clusters of every
/// net strictly shorter than `threshold`. The result is the connected
/// components of the sub-threshold net graph, so no net under the threshold
/// can span two clusters.
pub fn cluster_pwl(design: &Design, threshold: f64) -> Result<Clustering> {
    let mut uf = UnionFind::new(design.cells.len());
    for net in &design.nets {
        if net.length < threshold {
            for pair in net.pins.windows(2) {
                uf.union(pair[0], pair[1]);
            }
        }
    }
    let raw: Vec<usize> = (0..design.cells.len()).map(|i| uf.find(i)).collect();
    let mut c = Clustering::from_assignment(design, raw, Method::Pwl)?;
    c.params = format!("threshold={threshold}");
    Ok(c)
}

/// Feasibility of a balanced bi-partition over a clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feasibility {
    Feasible,
    /// A single cluster exceeds one side's capacity, so no balanced
    /// bi-partition exists.
    Infeasible {
        cluster: usize,
        area_fraction: f64,
    },
}

/// Infeasible iff the largest cluster's area fraction exceeds the side
/// capacity implied by `max_fraction` (inclusive at the boundary).
pub fn pwl_feasibility(clustering: &Clustering, max_fraction: f64) -> Feasibility {
    let total = clustering.total_area();
    if total <= 0.0 {
        return Feasibility::Feasible;
    }
    let capacity = max_fraction * total;
    let mut worst = 0usize;
    let mut worst_area = f64::NEG_INFINITY;
    for (i, &a) in clustering.cluster_areas.iter().enumerate() {
        if a > worst_area {
            worst_area = a;
            worst = i;
        }
    }
    if fits_capacity(worst_area, capacity) {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible {
            cluster: worst,
            area_fraction: worst_area / total,
        }
    }
}

/// The default absorption threshold: 100 average gate widths.
pub fn default_pwl_threshold(design: &Design) -> Result<f64> {
    if design.cells.is_empty() {
        return Err(Error::Domain(
            "cluster: default threshold undefined for an empty design (no agw)".into(),
        ));
    }
    Ok(100.0 * design.agw)
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}
