//! Neighborhood weights and the graph Laplacian for the local-structure
//! penalty.
//!
//! The weight between two sample points is a function of their projection
//! distance, restricted to C-nearest-neighbor pairs. The default kernel uses
//! the raw distance `d_g(Xᵢ, Xⱼ)` itself as the weight; a heat kernel
//! `exp(−d_g²/σ²)` is available as well, since the weight definition is a
//! free choice. Neighborhoods are asymmetric, so the weight matrix is
//! symmetrized by taking a pair whenever either endpoint names the other as
//! a neighbor.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grassmann::{distance_sq, GrassmannPoint};

/// Edge-weight kernel applied to neighbor pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKernel {
    /// `w = d_g(Xᵢ, Xⱼ)`. Farther neighbors get larger weights; this is the
    /// fidelity default even though it inverts the usual smoothness prior.
    Distance,
    /// `w = exp(−d_g² / σ²)`.
    Heat { sigma: f64 },
}

#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
    laplacian: DMatrix<f64>,
    neighbor_count: usize,
}

impl GraphLaplacian {
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn neighbor_count(&self) -> usize {
        self.neighbor_count
    }

    /// Full invariant check: W symmetric, zero diagonal, nonnegative;
    /// L rows sum to zero; L positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        let m = self.weights.nrows();
        for i in 0..m {
            if self.weights[(i, i)] != 0.0 {
                return Err(Error::parameter(format!("W[{i},{i}] must be zero")));
            }
            for j in 0..m {
                if self.weights[(i, j)] < 0.0 {
                    return Err(Error::parameter(format!("W[{i},{j}] is negative")));
                }
                if self.weights[(i, j)] != self.weights[(j, i)] {
                    return Err(Error::parameter(format!("W asymmetric at ({i},{j})")));
                }
            }
            let row_sum: f64 = self.laplacian.row(i).iter().sum();
            if row_sum.abs() > 1e-10 {
                return Err(Error::numerical(
                    format!("L row {i} sums to {row_sum:.3e}"),
                    None,
                ));
            }
        }
        let (eigenvalues, _) = crate::linalg::verified_symmetric_eigen(&self.laplacian);
        let min = eigenvalues[0];
        if min < -1e-8 {
            return Err(Error::numerical(
                format!("L is not positive semidefinite: λ_min = {min:.3e}"),
                None,
            ));
        }
        Ok(())
    }
}

/// Builds the C-nearest-neighbor weight matrix and its Laplacian `L = D − W`.
///
/// Requires `1 ≤ c < m`. Ties at rank C break toward the smaller index. When
/// every pairwise distance is zero in distance mode the graph degenerates to
/// `W = 0`; that is returned with a warning rather than an error, since a
/// zero Laplacian is valid solver input.
pub fn build_laplacian(
    points: &[GrassmannPoint],
    c: usize,
    kernel: WeightKernel,
) -> Result<GraphLaplacian> {
    let m = points.len();
    if m == 0 {
        return Err(Error::dimension("sample set is empty"));
    }
    if c == 0 || c >= m {
        return Err(Error::parameter(format!(
            "neighbor count must satisfy 1 ≤ C < m, got C = {c}, m = {m}"
        )));
    }
    if let WeightKernel::Heat { sigma } = kernel {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::parameter(format!(
                "heat kernel width must be positive, got {sigma}"
            )));
        }
    }

    let mut dist_sq = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let d = distance_sq(&points[i], &points[j])?;
            dist_sq[(i, j)] = d;
            dist_sq[(j, i)] = d;
        }
    }

    // Neighbor adjacency: j's C nearest, ties by smaller index.
    let mut adjacency = vec![vec![false; m]; m];
    for j in 0..m {
        let mut order: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        order.sort_by(|&a, &b| dist_sq[(a, j)].total_cmp(&dist_sq[(b, j)]).then(a.cmp(&b)));
        for &i in order.iter().take(c) {
            adjacency[j][i] = true;
        }
    }

    let mut weights = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            if adjacency[i][j] || adjacency[j][i] {
                let w = match kernel {
                    WeightKernel::Distance => dist_sq[(i, j)].sqrt(),
                    WeightKernel::Heat { sigma } => (-dist_sq[(i, j)] / (sigma * sigma)).exp(),
                };
                weights[(i, j)] = w;
                weights[(j, i)] = w;
            }
        }
    }

    if weights.max() == 0.0 {
        log::warn!("degenerate neighborhood graph: all weights are zero");
    }

    let degrees = DVector::from_fn(m, |i, _| weights.row(i).iter().sum());
    let mut laplacian = -&weights;
    for i in 0..m {
        laplacian[(i, i)] += degrees[i];
    }

    Ok(GraphLaplacian {
        weights,
        degrees,
        laplacian,
        neighbor_count: c,
    })
}
