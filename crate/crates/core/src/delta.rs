//! The m×m trace-kernel matrix of a Grassmann sample set.
//!
//! Entry (i, j) is `tr[(XⱼᵀXᵢ)(XᵢᵀXⱼ)] = ‖XᵢᵀXⱼ‖²_F`, the Frobenius inner
//! product of the projectors of points i and j. The matrix is the Gram matrix
//! of the embedded sample set, so it is symmetric positive semidefinite with
//! diagonal p and entries in [0, p].

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{cross_gram, GrassmannPoint};

/// Smallest eigenvalue allowed before the PSD invariant is declared violated.
pub const PSD_TOL: f64 = -1e-8;

#[derive(Debug, Clone)]
pub struct DeltaMatrix {
    entries: DMatrix<f64>,
    subspace_dim: usize,
}

impl DeltaMatrix {
    /// Wraps a precomputed matrix, checking symmetry, the diagonal, and the
    /// entry bounds. The PSD check is deferred to [`DeltaMatrix::validate`]
    /// (it costs a full eigendecomposition).
    pub fn from_entries(entries: DMatrix<f64>, subspace_dim: usize) -> Result<Self> {
        let m = entries.nrows();
        if entries.ncols() != m || m == 0 {
            return Err(Error::dimension(format!(
                "Δ must be square and non-empty, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let p = subspace_dim as f64;
        for i in 0..m {
            if (entries[(i, i)] - p).abs() > 1e-10 {
                return Err(Error::parameter(format!(
                    "Δ[{i},{i}] = {} but the diagonal must equal p = {p}",
                    entries[(i, i)]
                )));
            }
            for j in 0..m {
                let v = entries[(i, j)];
                if (entries[(j, i)] - v).abs() > 1e-12 {
                    return Err(Error::parameter(format!(
                        "Δ is not symmetric at ({i},{j})"
                    )));
                }
                if !(-1e-10..=p + 1e-10).contains(&v) {
                    return Err(Error::parameter(format!(
                        "Δ[{i},{j}] = {v} outside [0, p]"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            subspace_dim,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Number of samples m.
    pub fn sample_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }

    /// Full invariant check including positive semidefiniteness
    /// (smallest eigenvalue ≥ −1e-8).
    pub fn validate(&self) -> Result<()> {
        let (eigenvalues, _) = crate::linalg::verified_symmetric_eigen(&self.entries);
        let min = eigenvalues[0];
        if min < PSD_TOL {
            return Err(Error::numerical(
                format!("Δ is not positive semidefinite: λ_min = {min:.3e}"),
                None,
            ));
        }
        Ok(())
    }
}

/// Computes the Δ matrix of a sample set through p×p products.
///
/// Only the upper triangle is evaluated; the lower triangle mirrors it
/// exactly, so symmetry holds bitwise. Rows are filled in parallel; every
/// entry is an independent pure computation, so the result does not depend
/// on the thread count.
pub fn delta_matrix(points: &[GrassmannPoint]) -> Result<DeltaMatrix> {
    let m = points.len();
    if m == 0 {
        return Err(Error::dimension("sample set is empty"));
    }
    let d = points[0].ambient_dim();
    let p = points[0].subspace_dim();
    for (idx, pt) in points.iter().enumerate() {
        if pt.ambient_dim() != d || pt.subspace_dim() != p {
            return Err(Error::dimension(format!(
                "point {idx} has shape ({},{}) but the set is ({d},{p})",
                pt.ambient_dim(),
                pt.subspace_dim()
            )));
        }
    }

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| cross_gram(&points[i], &points[j])).collect())
        .collect();

    let mut entries = DMatrix::<f64>::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let j = i + offset;
            entries[(i, j)] = value;
            entries[(j, i)] = value;
        }
    }
    DeltaMatrix::from_entries(entries, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::testutil::random_point;
    use crate::grassmann::{embed, GrassmannPoint};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    /// Dense oracle: Gram matrix of embeddings under the Frobenius inner product.
    fn dense_gram(points: &[GrassmannPoint]) -> DMatrix<f64> {
        let m = points.len();
        let embeddings: Vec<_> = points.iter().map(embed).collect();
        DMatrix::from_fn(m, m, |i, j| {
            embeddings[i]
                .matrix()
                .iter()
                .zip(embeddings[j].matrix().iter())
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    #[test]
    fn identical_points_give_all_p() {
        let x = random_point(1, 10, 3);
        let pts = vec![x.clone(), x.clone(), x];
        let delta = delta_matrix(&pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(delta.entries()[(i, j)], 3.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn orthogonal_spans_give_zero_off_diagonal() {
        let mut bx = DMatrix::<f64>::zeros(8, 2);
        bx[(0, 0)] = 1.0;
        bx[(1, 1)] = 1.0;
        let mut by = DMatrix::<f64>::zeros(8, 2);
        by[(4, 0)] = 1.0;
        by[(5, 1)] = 1.0;
        let pts = vec![GrassmannPoint::new(bx).unwrap(), GrassmannPoint::new(by).unwrap()];
        let delta = delta_matrix(&pts).unwrap();
        assert_eq!(delta.entries()[(0, 1)], 0.0);
        assert_abs_diff_eq!(delta.entries()[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_dense_gram_oracle() {
        let pts: Vec<_> = (0..5).map(|s| random_point(40 + s, 10, 3)).collect();
        let delta = delta_matrix(&pts).unwrap();
        let oracle = dense_gram(&pts);
        assert_abs_diff_eq!(delta.entries(), &oracle, epsilon = 1e-10);
        delta.validate().unwrap();
    }

    #[test]
    fn rejects_heterogeneous_sets() {
        let pts = vec![random_point(1, 10, 3), random_point(2, 10, 2)];
        assert!(matches!(delta_matrix(&pts), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_point_set() {
        let delta = delta_matrix(&[random_point(3, 6, 2)]).unwrap();
        assert_eq!(delta.sample_count(), 1);
        assert_abs_diff_eq!(delta.entries()[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn from_entries_validates() {
        let good = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(DeltaMatrix::from_entries(good, 2).is_ok());

        let bad_diag = DMatrix::from_row_slice(2, 2, &[1.5, 1.0, 1.0, 2.0]);
        assert!(DeltaMatrix::from_entries(bad_diag, 2).is_err());

        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 2.0]);
        assert!(DeltaMatrix::from_entries(asym, 2).is_err());

        let oob = DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 3.0, 2.0]);
        assert!(DeltaMatrix::from_entries(oob, 2).is_err());
    }
}
