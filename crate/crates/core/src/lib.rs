//! Semi-supervised single-image 3D shape reconstruction through linear
//! subspaces.
//!
//! Images and shapes each get a PCA subspace fitted on unlabeled data; a
//! mapping between the two code spaces (closed-form least squares or a small
//! feed-forward network) is then fitted on paired samples. A direct
//! pixel-to-shape least-squares map is provided as a baseline.

pub mod error;
pub mod linalg;
pub mod mapping;
pub mod pipeline;
pub mod render;
pub mod shapes;
pub mod subspace;

pub use error::{Error, Result};
