//! Subspace clustering of image sets and video clips on the Grassmann
//! manifold.
//!
//! Each image set is represented as a point on 𝒢(p, d) — a p-dimensional
//! subspace of ℝᵈ — through the left singular vectors of its stacked frames.
//! The sample set is clustered by solving a low-rank self-representation
//! problem over the trace-kernel matrix of the set, with a
//! partial-sum-of-singular-values penalty in place of the nuclear norm, an
//! optional graph-Laplacian term that keeps coefficients of nearby points
//! similar, and normalized-cuts spectral clustering of the learned affinity.
//!
//! Modules, roughly bottom-up:
//!
//! - [`grassmann`]: points, the projector embedding, the projection distance
//! - [`delta`]: the m×m trace-kernel (Gram) matrix of a sample set
//! - [`pssv`]: partial sum of singular values and its proximal operator
//! - [`graph`]: k-nearest-neighbor weights and the graph Laplacian
//! - [`solver`]: the ADMM solver with KKT diagnostics
//! - [`spectral`]: affinity, normalized cuts, clustering accuracy
//! - [`synth`]: seeded synthetic sample-set generation
//! - [`io`]: matrix persistence, netpbm frames, dataset layout
pub mod delta;
pub mod error;
pub mod graph;
pub mod grassmann;
pub mod io;
mod linalg;
pub mod pssv;
pub mod seed;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use delta::{delta_matrix, DeltaMatrix};
pub use error::{Error, Result};
pub use graph::{build_laplacian, GraphLaplacian, WeightKernel};
pub use io::{ingest_frames, load_set, save_set, IngestOptions, LabeledGrassmannSet};
pub use grassmann::{distance_sq, embed, orthonormalize, GrassmannPoint, SymmetricEmbedding};
pub use pssv::{pssv_norm, pssv_prox, pssv_prox_partial, SingularSpectrum};
pub use solver::{objective_value, solve, KktReport, SolverConfig, SolverState};
pub use spectral::{accuracy, affinity, cluster_coefficients, ncut, ncut_with, ClusterResult, NcutOptions};
pub use synth::{synth, SynthesisSpec};

pub use nalgebra::{DMatrix, DVector};
