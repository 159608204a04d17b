//! Shared input generation for the criterion benchmarks.

use gclust_core::{delta_matrix, synth, DeltaMatrix, GrassmannPoint, SynthesisSpec};

/// A synthetic sample set of m points on 𝒢(4, 24), five clusters.
pub fn sample_points(m: usize) -> Vec<GrassmannPoint> {
    assert!(m >= 5 && m % 5 == 0, "m must be a positive multiple of 5");
    synth(&SynthesisSpec {
        clusters: 5,
        per_cluster: m / 5,
        ambient_dim: 24,
        subspace_dim: 4,
        noise_sigma: 0.1,
        seed: 7,
        orthogonal_prototypes: false,
    })
    .expect("valid synthesis spec")
    .points
}

pub fn sample_delta(m: usize) -> DeltaMatrix {
    delta_matrix(&sample_points(m)).expect("homogeneous set")
}
