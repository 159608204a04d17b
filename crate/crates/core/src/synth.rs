//! Seeded generation of labeled synthetic Grassmann sample sets.
//!
//! Each cluster gets a random orthonormal prototype; samples are the
//! prototype plus ambient Gaussian noise, re-orthonormalized. Everything is
//! a pure function of the spec, including the seed handling: a single
//! Xoshiro256++ stream is consumed in a fixed order (prototypes first, then
//! samples cluster by cluster).

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::orthonormalize;
use crate::io::dataset::{LabeledGrassmannSet, SetMeta};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisSpec {
    /// Number of clusters k.
    pub clusters: usize,
    /// Samples per cluster.
    pub per_cluster: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    /// Scale of the ambient Gaussian perturbation added to the prototype.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Force pairwise-orthogonal prototypes (requires k·p ≤ d).
    pub orthogonal_prototypes: bool,
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.per_cluster == 0 || self.clusters * self.per_cluster < 2 {
            return Err(Error::parameter(
                "need at least two samples overall".to_string(),
            ));
        }
        if self.subspace_dim == 0 || self.subspace_dim > self.ambient_dim {
            return Err(Error::parameter(format!(
                "need 1 ≤ p ≤ d, got p = {}, d = {}",
                self.subspace_dim, self.ambient_dim
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::parameter(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        if self.orthogonal_prototypes && self.clusters * self.subspace_dim > self.ambient_dim {
            return Err(Error::parameter(format!(
                "orthogonal prototypes need k·p ≤ d, got {}·{} > {}",
                self.clusters, self.subspace_dim, self.ambient_dim
            )));
        }
        Ok(())
    }
}

/// Draws the sample set described by `spec`.
pub fn synth(spec: &SynthesisSpec) -> Result<LabeledGrassmannSet> {
    spec.validate()?;
    let (k, mc, d, p) = (
        spec.clusters,
        spec.per_cluster,
        spec.ambient_dim,
        spec.subspace_dim,
    );
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);

    let prototypes: Vec<DMatrix<f64>> = if spec.orthogonal_prototypes {
        // One wide orthonormal frame, sliced into disjoint column blocks.
        let wide = gaussian(&mut rng, d, k * p);
        let q = signed_qr(&wide);
        (0..k).map(|c| q.columns(c * p, p).into_owned()).collect()
    } else {
        (0..k)
            .map(|_| {
                let g = gaussian(&mut rng, d, p);
                signed_qr(&g)
            })
            .collect()
    };

    let mut points = Vec::with_capacity(k * mc);
    let mut labels = Vec::with_capacity(k * mc);
    for (c, proto) in prototypes.iter().enumerate() {
        for _ in 0..mc {
            let noise = gaussian(&mut rng, d, p) * spec.noise_sigma;
            let perturbed = proto + noise;
            points.push(orthonormalize(&perturbed, p)?);
            labels.push(c);
        }
    }

    let meta = SetMeta {
        ambient_dim: d,
        subspace_dim: p,
        sample_count: k * mc,
        source: format!(
            "synth k={k} m_c={mc} d={d} p={p} sigma={} seed={} orthogonal={}",
            spec.noise_sigma, spec.seed, spec.orthogonal_prototypes
        ),
    };
    Ok(LabeledGrassmannSet {
        points,
        labels: Some(labels),
        meta,
    })
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Thin QR with the R diagonal forced nonnegative, making the Q factor a
/// deterministic function of the input.
fn signed_qr(a: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = a.ncols();
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q.columns(0, cols).into_owned()
}
