//! Overlap-aware scheduling for hierarchical multi-robot map fusion.
//!
//! Robots build local occupancy maps, edge servers fuse the maps of the
//! robots assigned to them, and a cloud server fuses the edge maps into a
//! global map. Because fusion deduplicates overlapping area, grouping
//! robots whose coverage overlaps shrinks what each edge uploads. This
//! crate builds the overlap graph from robot coverage, partitions it into
//! balanced groups, places groups onto heterogeneous edge servers and
//! evaluates the end-to-end latency of the resulting schedule.
//!
//! ```
//! use edgefuse::graph::OverlapGraph;
//! use edgefuse::grouping::initial_grouping;
//! use edgefuse::tabu::{optimize, TabuConfig};
//!
//! // two triangles joined by a weak bridge
//! let g = OverlapGraph::from_edges(6, [
//!     (0, 1, 0.4), (1, 2, 0.4), (0, 2, 0.4),
//!     (3, 4, 0.4), (4, 5, 0.4), (3, 5, 0.4),
//!     (2, 3, 0.01),
//! ]).unwrap();
//! let p0 = initial_grouping(&g, 2).unwrap();
//! let best = optimize(&g, &p0, &TabuConfig::default()).unwrap();
//! assert!((g.fitness(&best).unwrap() - 0.01).abs() < 1e-12);
//! ```

pub mod cost;
pub mod error;
pub mod generate;
pub mod graph;
pub mod gridmap;
pub mod grouping;
pub mod offload;
pub mod pipeline;
pub mod profile;
pub mod report;
pub mod scenario;
pub mod scene;
pub mod tabu;

pub use error::{Error, Result};
