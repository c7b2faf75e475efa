//! Influence maximization by a phased hybrid of evolutionary search and
//! adaptive simulated annealing, with Independent Cascade simulation,
//! greedy baselines and an experiment harness.
//!
//! Real-valued computations are generic over [`Real`] (`f32` or `f64`);
//! the `*64` aliases below fix the scalar to `f64`.

pub mod baselines;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod pipeline;
pub mod ranking;
pub mod rde;
pub mod saa;
pub mod scalar;
pub mod seeds;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{DeletionOverlay, DirectionMode, Graph, VertexId};
pub use scalar::Real;
pub use seeds::SeedSet;

pub type DiffusionParams64 = diffusion::DiffusionParams<f64>;
pub type SpreadEstimate64 = diffusion::SpreadEstimate<f64>;
pub type VertexOrdering64 = ranking::VertexOrdering<f64>;
pub type RdeParams64 = rde::RdeParams<f64>;
pub type SaaParams64 = saa::SaaParams<f64>;
pub type PheeParams64 = pipeline::PheeParams<f64>;

pub type DiffusionParams32 = diffusion::DiffusionParams<f32>;
pub type SpreadEstimate32 = diffusion::SpreadEstimate<f32>;
pub type VertexOrdering32 = ranking::VertexOrdering<f32>;
pub type RdeParams32 = rde::RdeParams<f32>;
pub type SaaParams32 = saa::SaaParams<f32>;
pub type PheeParams32 = pipeline::PheeParams<f32>;
