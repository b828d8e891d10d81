// SPDX-License-Identifier: Apache-2.0

//! Tier partitioning toolkit for two-die 3D-IC stacks.
//!
//! The flow takes a placed 2D netlist and produces per-gate die directives in
//! four steps: connectivity extraction (buffer-tree stripping plus wire-length
//! annotation), gate clustering, area-balanced min-cut bi-partitioning of the
//! clustered hypergraph, and cut-quality reporting. Clustering is pluggable —
//! no clustering, hierarchical geometric, k-means, or progressive wire-length
//! absorption — so the method can be chosen per design.

pub mod cluster;
pub mod designgen;
pub mod error;
pub mod ingest;
pub mod model;
pub mod partition;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
