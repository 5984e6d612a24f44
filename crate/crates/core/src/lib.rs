//! Scalable heterogeneous graph learning by pre-computation.
//!
//! The pipeline has two stages. Pre-computation runs propagate-then-update
//! iterations over a typed graph: every relation ending at a vertex type is
//! collected separately ([`propagation`]), then squashed back to the type's
//! own dimension with seeded random projections ([`squashing`]). The target
//! type's per-relation collections are archived as [`GroupTensor`]s. Training
//! fits a small Conv1D + MLP [`encoder`] on those groups with mini-batches
//! ([`trainer`]).

pub mod cli;
pub mod encoder;
pub mod error;
pub mod hetgraph;
pub mod precompute;
pub mod propagation;
pub mod relations;
mod seed;
pub mod squashing;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use hetgraph::{build_graph, EdgeSpec, HeteroGraph};
pub use precompute::{run_precompute, GroupTensor, PrecomputeConfig};
pub use relations::{Relation, Scheme};
pub use seed::{derive_seed, hex_digest};
