//! Points on the Grassmann manifold and their symmetric-space embedding.
//!
//! A point is a `d × p` matrix with orthonormal columns, standing for the
//! p-dimensional subspace it spans. All downstream quantities depend only on
//! the projector `X Xᵀ`, so the representative basis is never canonicalized:
//! any right rotation of the columns names the same point.
//!
//! Distances and Gram entries are evaluated through `p × p` products
//! (`XᵀY`), never by materializing `d × d` projectors; with image data the
//! ambient dimension is the pixel count and can reach 10⁴ or more. The dense
//! embedding exists ([`embed`]) but is intended for small problems and test
//! oracles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Max-entry tolerance for `XᵀX = I` on construction.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Relative singular-value cutoff below which input is treated as rank-deficient.
pub const RANK_RATIO_TOL: f64 = 1e-12;

/// An orthonormal-basis representative of a p-dimensional subspace of ℝᵈ.
#[derive(Debug, Clone)]
pub struct GrassmannPoint {
    basis: DMatrix<f64>,
}

impl GrassmannPoint {
    /// Wraps a basis matrix, enforcing orthonormal columns within
    /// [`ORTHONORMALITY_TOL`] and `1 ≤ p ≤ d`.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (d, p) = basis.shape();
        if p == 0 || d == 0 {
            return Err(Error::dimension("basis must be non-empty"));
        }
        if p > d {
            return Err(Error::dimension(format!(
                "subspace dimension {p} exceeds ambient dimension {d}"
            )));
        }
        let gram = basis.tr_mul(&basis);
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        if worst > ORTHONORMALITY_TOL {
            return Err(Error::parameter(format!(
                "columns are not orthonormal: max |XᵀX - I| = {worst:.3e}"
            )));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Ambient dimension d.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension p.
    pub fn subspace_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn into_basis(self) -> DMatrix<f64> {
        self.basis
    }
}

/// The projector `X Xᵀ` of a Grassmann point: a symmetric idempotent
/// `d × d` matrix with trace p.
#[derive(Debug, Clone)]
pub struct SymmetricEmbedding {
    matrix: DMatrix<f64>,
    source_dims: (usize, usize),
}

impl SymmetricEmbedding {
    /// Validates symmetry (1e-12), trace = p (1e-10) and idempotency (1e-8).
    pub fn new(matrix: DMatrix<f64>, source_dims: (usize, usize)) -> Result<Self> {
        let (d, p) = source_dims;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::dimension(format!(
                "embedding must be {d}×{d}, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut asym = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(Error::parameter(format!(
                "embedding is not symmetric: max asymmetry {asym:.3e}"
            )));
        }
        let trace_err = (matrix.trace() - p as f64).abs();
        if trace_err > 1e-10 {
            return Err(Error::parameter(format!(
                "embedding trace differs from p by {trace_err:.3e}"
            )));
        }
        let idem = (&matrix * &matrix - &matrix).abs().max();
        if idem > 1e-8 {
            return Err(Error::parameter(format!(
                "embedding is not idempotent: max |M² - M| = {idem:.3e}"
            )));
        }
        Ok(Self {
            matrix,
            source_dims,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }
}

/// Builds a Grassmann point from raw frame data by thin SVD: the basis is the
/// first p left singular vectors of `frames`, ordered by descending singular
/// value.
///
/// Rejects inputs whose p-th singular value falls below
/// `RANK_RATIO_TOL · σ₁`; silently zero-padding a degenerate basis would
/// violate the orthonormality invariant downstream.
pub fn orthonormalize(frames: &DMatrix<f64>, p: usize) -> Result<GrassmannPoint> {
    let (d, m) = frames.shape();
    if p == 0 {
        return Err(Error::dimension("subspace dimension p must be at least 1"));
    }
    if p > m {
        return Err(Error::dimension(format!(
            "requested p = {p} exceeds the number of frames {m}"
        )));
    }
    if p > d {
        return Err(Error::dimension(format!(
            "requested p = {p} exceeds the ambient dimension {d}"
        )));
    }
    let (u, sigma, _) = crate::linalg::verified_svd(frames);
    let sigma_1 = sigma[0];
    if !sigma_1.is_finite() || sigma_1 <= 0.0 {
        return Err(Error::RankDeficient {
            effective_rank: 0,
            requested: p,
        });
    }
    let effective_rank = sigma.iter().filter(|&&s| s >= RANK_RATIO_TOL * sigma_1).count();
    if effective_rank < p {
        return Err(Error::RankDeficient {
            effective_rank,
            requested: p,
        });
    }
    let basis = u.columns(0, p).into_owned();
    GrassmannPoint::new(basis)
}

/// Maps a point to its projector `X Xᵀ` in the space of symmetric matrices.
///
/// Materializes a `d × d` matrix; keep to small d.
pub fn embed(x: &GrassmannPoint) -> SymmetricEmbedding {
    let m = x.basis() * x.basis().transpose();
    let dims = (x.ambient_dim(), x.subspace_dim());
    SymmetricEmbedding::new(m, dims).expect("projector of a valid point satisfies the invariants")
}

/// Squared projection distance `½‖XXᵀ − YYᵀ‖²_F = p − ‖XᵀY‖²_F`.
///
/// Evaluated through the p×p product; cost O(dp²).
pub fn distance_sq(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<f64> {
    let (d, p) = (x.ambient_dim(), x.subspace_dim());
    if y.ambient_dim() != d || y.subspace_dim() != p {
        return Err(Error::dimension(format!(
            "points live on different manifolds: ({d},{p}) vs ({},{})",
            y.ambient_dim(),
            y.subspace_dim()
        )));
    }
    let overlap = cross_gram(x, y);
    Ok((p as f64 - overlap).max(0.0))
}

/// `‖XᵀY‖²_F` for two points with matching shapes.
pub(crate) fn cross_gram(x: &GrassmannPoint, y: &GrassmannPoint) -> f64 {
    let xty = x.basis().tr_mul(y.basis());
    xty.iter().map(|v| v * v).sum()
}
