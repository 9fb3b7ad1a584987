//! Seeded Bernoulli bond percolation on finite windows.

pub mod config;
pub mod estimate;
pub mod events;
pub mod rng;
pub mod saw;
pub mod threshold;
pub mod union_find;
pub mod window;

pub use config::{sample, PercConfig};
pub use estimate::{estimate, wilson, Estimate, Z95};
pub use events::{connected_in, reaches_boundary, unique_crossing, Clusters};
pub use rng::{SeedRecord, StreamKey};
pub use saw::{enumerate_saw, enumerate_saw_capped, SawSet, DEFAULT_SAW_CAP};
pub use union_find::UnionFind;
pub use window::{BoundaryRule, EdgeWindow, VertexSet};
