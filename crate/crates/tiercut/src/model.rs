// SPDX-License-Identifier: Apache-2.0

//! Geometric and netlist domain model shared by the whole flow: cells, nets,
//! floorplan, half-perimeter wire-length, and the clustered hypergraph.

use crate::cluster::Clustering;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A position in design units (µm). Coordinates are finite, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// L1 (Manhattan) distance to another point.
    pub fn manhattan(&self, other: &Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Axis-aligned rectangle given by its lower-left corner and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub origin: Point,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Rect {
            origin: Point::new(x, y),
            width,
            height,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.origin.x
            && p.x <= self.origin.x + self.width
            && p.y >= self.origin.y
            && p.y <= self.origin.y + self.height
    }

    /// Floorplan width + height, the normalization divisor for cut-length
    /// distributions.
    pub fn half_perimeter(&self) -> f64 {
        self.width + self.height
    }
}

/// A placed standard cell. `origin` is the lower-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub name: String,
    pub origin: Point,
    pub width: f64,
    pub height: f64,
    pub is_buffer: bool,
}

impl Cell {
    pub fn center(&self) -> Point {
        Point::new(
            self.origin.x + self.width / 2.0,
            self.origin.y + self.height / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A net over cell ids. The first pin is the driver by convention. `length`
/// holds the approximated wire-length once [`annotate_lengths`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub id: usize,
    pub pins: Vec<usize>,
    pub length: f64,
}

/// A placed netlist: cells, nets, and the floorplan they live in.
///
/// Immutable after construction by convention; all pipeline stages share it
/// read-only.
#[derive(Debug, Clone)]
pub struct Design {
    pub cells: Vec<Cell>,
    pub nets: Vec<Net>,
    pub floorplan: Rect,
    /// Average gate width, the design-relative length unit. 0.0 for an empty
    /// design (query paths that need it reject empty designs).
    pub agw: f64,
}

impl Design {
    /// Validates ids, pin references, and cell placement, then caches the
    /// average gate width. Net lengths are not computed here; run
    /// [`annotate_lengths`] (the ingest and generator paths do).
    pub fn new(cells: Vec<Cell>, nets: Vec<Net>, floorplan: Rect) -> Result<Self> {
        if floorplan.width <= 0.0 || floorplan.height <= 0.0 {
            return Err(Error::Domain(format!(
                "core: floorplan extent must be positive, got {}x{}",
                floorplan.width, floorplan.height
            )));
        }
        for (i, cell) in cells.iter().enumerate() {
            if cell.id != i {
                return Err(Error::Integrity(format!(
                    "core: cell {} has id {}, expected dense id {}",
                    cell.name, cell.id, i
                )));
            }
            if !(cell.width > 0.0 && cell.height > 0.0) {
                return Err(Error::Domain(format!(
                    "core: cell {} has non-positive extent {}x{}",
                    cell.name, cell.width, cell.height
                )));
            }
            if !floorplan.contains(&cell.center()) {
                return Err(Error::Integrity(format!(
                    "core: cell {} center ({}, {}) lies outside the floorplan",
                    cell.name,
                    cell.center().x,
                    cell.center().y
                )));
            }
        }
        for (i, net) in nets.iter().enumerate() {
            if net.id != i {
                return Err(Error::Integrity(format!(
                    "core: net {} has id {}, expected dense id {}",
                    net.id, net.id, i
                )));
            }
            if net.pins.is_empty() {
                return Err(Error::Integrity(format!("core: net {} has no pins", i)));
            }
            let mut seen = vec![false; cells.len()];
            for &pin in &net.pins {
                if pin >= cells.len() {
                    return Err(Error::Integrity(format!(
                        "core: net {} references missing cell id {}",
                        i, pin
                    )));
                }
                if seen[pin] {
                    return Err(Error::Integrity(format!(
                        "core: net {} lists cell {} twice",
                        i, cells[pin].name
                    )));
                }
                seen[pin] = true;
            }
        }
        let agw = if cells.is_empty() {
            0.0
        } else {
            cells.iter().map(|c| c.width).sum::<f64>() / cells.len() as f64
        };
        Ok(Design {
            cells,
            nets,
            floorplan,
            agw,
        })
    }

    pub fn total_cell_area(&self) -> f64 {
        self.cells.iter().map(Cell::area).sum()
    }

    /// Sum of all annotated net lengths, the "total system WL" denominator.
    pub fn total_wirelength(&self) -> f64 {
        self.nets.iter().map(|n| n.length).sum()
    }
}

/// Half-perimeter wire-length: the semi-perimeter of the bounding box of the
/// given points.
pub fn hpwl(points: &[Point]) -> Result<f64> {
    let first = points
        .first()
        .ok_or_else(|| Error::Domain("core: hpwl of an empty point list".into()))?;
    let mut min_x = first.x;
    let mut max_x = first.x;
    let mut min_y = first.y;
    let mut max_y = first.y;
    for p in &points[1..] {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    Ok((max_x - min_x) + (max_y - min_y))
}

/// Recomputes every net's length as the HPWL over its member cell centers.
/// Idempotent.
pub fn annotate_lengths(mut design: Design) -> Result<Design> {
    let centers: Vec<Point> = design.cells.iter().map(Cell::center).collect();
    for net in &mut design.nets {
        let mut pts = Vec::with_capacity(net.pins.len());
        for &pin in &net.pins {
            let center = centers.get(pin).ok_or_else(|| {
                Error::Integrity(format!(
                    "core: net {} references missing cell id {}",
                    net.id, pin
                ))
            })?;
            pts.push(*center);
        }
        net.length = hpwl(&pts)?;
    }
    Ok(design)
}

/// A hyperedge over cluster vertices. `weight` drives the min-cut objective;
/// unit weights minimize the 3D net count. `source_net` and `length` point
/// back at the design net the edge came from.
#[derive(Debug, Clone)]
pub struct Hyperedge {
    pub members: Vec<usize>,
    pub weight: u64,
    pub source_net: usize,
    pub length: f64,
}

/// The clustered connectivity hypergraph the partitioner works on: one vertex
/// per cluster, one hyperedge per net spanning at least two clusters.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    /// Vertex weight = summed member cell area.
    pub vertex_weights: Vec<f64>,
    pub edges: Vec<Hyperedge>,
    /// Member cell ids per vertex, sorted ascending.
    pub vertex_origin: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.vertex_weights.iter().sum()
    }
}

/// Collapses a design under a clustering: clusters become weighted vertices,
/// nets spanning two or more clusters become unit-weight hyperedges. Nets
/// internal to one cluster vanish from the hypergraph.
pub fn build_hypergraph(design: &Design, clustering: &Clustering) -> Result<Hypergraph> {
    build_hypergraph_with(design, clustering, |_| 1)
}

/// [`build_hypergraph`] with a per-net hyperedge weight override.
pub fn build_hypergraph_with<F>(
    design: &Design,
    clustering: &Clustering,
    edge_weight: F,
) -> Result<Hypergraph>
where
    F: Fn(&Net) -> u64,
{
    if clustering.assignment.len() != design.cells.len() {
        return Err(Error::Integrity(format!(
            "core: clustering covers {} cells but the design has {}",
            clustering.assignment.len(),
            design.cells.len()
        )));
    }
    let k = clustering.cluster_count();
    let mut vertex_weights = vec![0.0; k];
    let mut vertex_origin = vec![Vec::new(); k];
    for (cell_id, &cluster) in clustering.assignment.iter().enumerate() {
        if cluster >= k {
            return Err(Error::Integrity(format!(
                "core: cell {} assigned to cluster {} out of {}",
                cell_id, cluster, k
            )));
        }
        vertex_weights[cluster] += design.cells[cell_id].area();
        vertex_origin[cluster].push(cell_id);
    }
    let mut edges = Vec::new();
    let mut mark = vec![usize::MAX; k];
    for net in &design.nets {
        let mut members = Vec::new();
        for &pin in &net.pins {
            let cluster = clustering.assignment[pin];
            if mark[cluster] != net.id {
                mark[cluster] = net.id;
                members.push(cluster);
            }
        }
        if members.len() >= 2 {
            let weight = edge_weight(net);
            if weight == 0 {
                return Err(Error::Domain(format!(
                    "core: hyperedge weight for net {} must be positive",
                    net.id
                )));
            }
            edges.push(Hyperedge {
                members,
                weight,
                source_net: net.id,
                length: net.length,
            });
        }
    }
    Ok(Hypergraph {
        vertex_weights,
        edges,
        vertex_origin,
    })
}
