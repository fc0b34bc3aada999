//! Random polygonal knots, Vietoris-Rips persistence of their point clouds,
//! Betti-curve features and their correlation with geometric observables.

pub mod classify;
pub mod error;
pub mod geometry;
pub mod io;
pub mod features;
pub mod model;
pub mod persistence;
pub mod pipeline;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod vec3;

pub use classify::{classify, KnotType};
pub use error::{Error, Result};
pub use model::{interpolate, KnotEmbedding, PointCloud};
pub use vec3::{RigidMotion, Vec3};
