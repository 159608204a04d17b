//! Affinity construction, normalized-cuts spectral clustering, and the
//! matched-labels accuracy score.

mod assignment;
mod kmeans;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use assignment::min_cost_assignment;

/// How the spectral embedding is normalized before k-means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EmbeddingVariant {
    /// Symmetric normalized Laplacian eigenvectors with row normalization.
    RowNormalized,
    /// Rescale eigenvectors by D^{-1/2} (random-walk style) instead of row
    /// normalization.
    RandomWalk,
}

/// Knobs for [`ncut_with`]. [`ncut`] uses the defaults: 100 k-means restarts
/// on the row-normalized embedding.
#[derive(Debug, Clone, Copy)]
pub struct NcutOptions {
    pub restarts: usize,
    pub embedding: EmbeddingVariant,
}

impl Default for NcutOptions {
    fn default() -> Self {
        Self {
            restarts: 100,
            embedding: EmbeddingVariant::RowNormalized,
        }
    }
}

/// Clustering output with its inputs' fingerprint.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub affinity: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub k: usize,
    /// Present when ground truth was supplied.
    pub accuracy: Option<f64>,
    pub seed: u64,
}

/// Symmetrized absolute affinity `(|z_ij| + |z_ji|)/2`.
pub fn affinity(z: &DMatrix<f64>) -> DMatrix<f64> {
    let m = z.nrows();
    debug_assert_eq!(m, z.ncols(), "affinity input must be square");
    DMatrix::from_fn(m, m, |i, j| (z[(i, j)].abs() + z[(j, i)].abs()) / 2.0)
}

/// The post-solver half of the pipeline: affinity from the coefficient
/// matrix, normalized cuts, and (when ground truth is supplied) accuracy.
pub fn cluster_coefficients(
    z: &DMatrix<f64>,
    k: usize,
    seed: u64,
    truth: Option<&[usize]>,
) -> Result<ClusterResult> {
    let w = affinity(z);
    let labels = ncut(&w, k, seed)?;
    let acc = match truth {
        Some(t) => Some(accuracy(&labels, t)?),
        None => None,
    };
    Ok(ClusterResult {
        affinity: w,
        labels,
        k,
        accuracy: acc,
        seed,
    })
}

/// Normalized-cuts spectral clustering with default options.
pub fn ncut(affinity: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    ncut_with(affinity, k, seed, &NcutOptions::default())
}

/// Normalized-cuts spectral clustering.
///
/// Builds `L_sym = I − D^{−1/2} W D^{−1/2}`, takes the k eigenvectors of
/// smallest eigenvalue, normalizes the embedding per
/// [`NcutOptions::embedding`], and runs seeded k-means. Rows with zero
/// degree get a zero `D^{−1/2}` entry; after clustering, such isolated
/// nodes are moved onto spare labels as singleton clusters while spare
/// labels remain (they have no affinity to any other node, so no cluster
/// can claim them).
pub fn ncut_with(
    affinity: &DMatrix<f64>,
    k: usize,
    seed: u64,
    options: &NcutOptions,
) -> Result<Vec<usize>> {
    let m = affinity.nrows();
    if affinity.ncols() != m || m == 0 {
        return Err(Error::dimension(format!(
            "affinity must be square and non-empty, got {}×{}",
            affinity.nrows(),
            affinity.ncols()
        )));
    }
    if k == 0 || k > m {
        return Err(Error::parameter(format!(
            "cluster count must satisfy 1 ≤ k ≤ m, got k = {k}, m = {m}"
        )));
    }
    for i in 0..m {
        for j in 0..m {
            let w = affinity[(i, j)];
            if w < 0.0 {
                return Err(Error::parameter(format!("affinity[{i},{j}] is negative")));
            }
            if (w - affinity[(j, i)]).abs() > 1e-10 {
                return Err(Error::parameter(format!("affinity asymmetric at ({i},{j})")));
            }
            if !w.is_finite() {
                return Err(Error::numerical("affinity contains non-finite entries", None));
            }
        }
    }
    if k == 1 {
        return Ok(vec![0; m]);
    }

    let degrees = DVector::from_fn(m, |i, _| affinity.row(i).iter().sum::<f64>());
    let isolated: Vec<usize> = (0..m).filter(|&i| degrees[i] <= 0.0).collect();
    if isolated.len() == m {
        // Zero affinity everywhere: a trivial deterministic clustering.
        return Ok((0..m).map(|i| i.min(k - 1)).collect());
    }

    let d_inv_sqrt = DVector::from_fn(m, |i, _| {
        if degrees[i] > 0.0 {
            1.0 / degrees[i].sqrt()
        } else {
            0.0
        }
    });

    let mut l_sym = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            l_sym[(i, j)] -= d_inv_sqrt[i] * affinity[(i, j)] * d_inv_sqrt[j];
        }
    }
    // Guard symmetry against accumulation asymmetries before eigensolving.
    let l_sym = (&l_sym + l_sym.transpose()) * 0.5;

    let (eigenvalues, eigenvectors) = crate::linalg::verified_symmetric_eigen(&l_sym);
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("eigendecomposition failed", None));
    }
    // Ascending order: the k leading columns are the smallest eigenvalues.
    let mut embedding = DMatrix::<f64>::zeros(m, k);
    for col in 0..k {
        embedding.set_column(col, &eigenvectors.column(col));
    }

    match options.embedding {
        EmbeddingVariant::RowNormalized => {
            for i in 0..m {
                let norm = embedding.row(i).norm();
                if norm > 0.0 {
                    for j in 0..k {
                        embedding[(i, j)] /= norm;
                    }
                }
            }
        }
        EmbeddingVariant::RandomWalk => {
            for i in 0..m {
                for j in 0..k {
                    embedding[(i, j)] *= d_inv_sqrt[i];
                }
            }
        }
    }

    let mut labels = kmeans::kmeans(&embedding, k, seed, options.restarts);

    // Isolated nodes: no affinity ties them to any cluster. Give each its
    // own spare label while unused labels exist; past that they keep the
    // k-means label of the zero embedding row.
    if !isolated.is_empty() {
        let mut used = vec![false; k];
        for (i, &label) in labels.iter().enumerate() {
            if !isolated.contains(&i) {
                used[label] = true;
            }
        }
        let mut spare: Vec<usize> = (0..k).filter(|&c| !used[c]).collect();
        for &i in &isolated {
            if let Some(label) = spare.pop() {
                labels[i] = label;
            }
        }
    }

    Ok(labels)
}

/// Clustering accuracy: the fraction of points whose predicted label agrees
/// with ground truth under the best bijective matching of label sets.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::dimension(format!(
            "label vectors differ in length: {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::dimension("label vectors are empty"));
    }
    let m = predicted.len();
    let kp = predicted.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let n = kp.max(kt);

    // Contingency counts, padded square.
    let mut counts = vec![vec![0i64; n]; n];
    for (&a, &b) in predicted.iter().zip(truth.iter()) {
        counts[a][b] += 1;
    }

    // Maximize agreement = minimize (max_count − count).
    let max_count = m as i64;
    let cost: Vec<Vec<i64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| max_count - c).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let agreement: i64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| counts[i][j])
        .sum();
    Ok(agreement as f64 / m as f64)
}
