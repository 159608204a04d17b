//! Partial sum of singular values: the norm `‖A‖_{>r} = Σ_{i>r} σ_i(A)` and
//! its proximal operator.
//!
//! The norm leaves the r dominant singular values unpenalized, so minimizing
//! it drives the tail of the spectrum to zero without shrinking the energy
//! that carries the cluster structure. With r = 0 it reduces to the nuclear
//! norm.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// A full singular value decomposition with descending values.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub values: DVector<f64>,
    pub left_vectors: DMatrix<f64>,
    pub right_vectors: DMatrix<f64>,
}

impl SingularSpectrum {
    /// Computes the thin SVD of `a`. Values come out sorted descending.
    pub fn compute(a: &DMatrix<f64>) -> Result<Self> {
        let (left_vectors, values, right_vectors) = crate::linalg::verified_svd(a);
        Ok(Self {
            values,
            left_vectors,
            right_vectors,
        })
    }

    /// `U diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = scale_columns(&self.left_vectors, &self.values);
        scaled * self.right_vectors.transpose()
    }
}

fn scale_columns(u: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = u.clone();
    for j in 0..out.ncols() {
        out.column_mut(j).scale_mut(s[j]);
    }
    out
}

/// `Σ_{i=r+1}^{min(rows,cols)} σ_i(a)`; zero when `r ≥ min(rows, cols)`.
pub fn pssv_norm(a: &DMatrix<f64>, r: usize) -> f64 {
    let n = a.nrows().min(a.ncols());
    if r >= n {
        return 0.0;
    }
    let sigma = crate::linalg::verified_singular_values(a);
    sigma.iter().skip(r).sum()
}

/// Proximal operator of `‖·‖_{>r}` with step `tau`: the minimizer of
/// `‖J‖_{>r} + (1/(2·tau)) ‖J − a‖²_F`.
///
/// The r largest singular values pass through unchanged; the rest are
/// soft-thresholded. The thresholding operator of the source theorem is
/// `S_tau[x] = sign(x)·max(|x|−tau, 0)`; singular values are nonnegative, so
/// the sign factor is vacuous and this applies `max(σ−tau, 0)`.
pub fn pssv_prox(a: &DMatrix<f64>, r: usize, tau: f64) -> Result<DMatrix<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::parameter(format!("tau must be positive, got {tau}")));
    }
    let spectrum = SingularSpectrum::compute(a)?;
    let shrunk = shrink_values(&spectrum.values, r, tau);
    Ok(reconstruct_with(&spectrum, &shrunk))
}

fn shrink_values(sigma: &DVector<f64>, r: usize, tau: f64) -> DVector<f64> {
    DVector::from_fn(sigma.len(), |i, _| {
        if i < r {
            sigma[i]
        } else {
            (sigma[i] - tau).max(0.0)
        }
    })
}

fn reconstruct_with(spectrum: &SingularSpectrum, values: &DVector<f64>) -> DMatrix<f64> {
    let scaled = scale_columns(&spectrum.left_vectors, values);
    scaled * spectrum.right_vectors.transpose()
}

/// Partial-SVD variant of [`pssv_prox`]: computes only the leading
/// `4r + 1` singular triplets by subspace iteration. Valid whenever the
/// (4r+1)-th singular value is at most `tau` (everything beyond it is
/// annihilated by the threshold); otherwise, or when the iteration fails to
/// converge, falls back to the full decomposition.
pub fn pssv_prox_partial(a: &DMatrix<f64>, r: usize, tau: f64) -> Result<DMatrix<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::parameter(format!("tau must be positive, got {tau}")));
    }
    let n = a.nrows().min(a.ncols());
    let q = (4 * r + 1).min(n);
    if q == n {
        return pssv_prox(a, r, tau);
    }
    match leading_triplets(a, q) {
        Some(partial) => {
            // The tail beyond position q is bounded by σ_q; it must vanish
            // under the threshold for the truncated reconstruction to be the
            // exact prox.
            let sigma_q = partial.values[q - 1];
            if sigma_q > tau {
                return pssv_prox(a, r, tau);
            }
            let shrunk = shrink_values(&partial.values, r, tau);
            Ok(reconstruct_with(&partial, &shrunk))
        }
        None => pssv_prox(a, r, tau),
    }
}

const SUBSPACE_ITER_SEED: u64 = 0x5eed_0bad_cafe_0001;
const SUBSPACE_MAX_ITERS: usize = 200;
const SUBSPACE_RESIDUAL_TOL: f64 = 1e-10;

/// Leading q singular triplets of `a` by block subspace iteration on `AᵀA`,
/// with Rayleigh–Ritz extraction and a residual check. Returns `None` when
/// the residual test fails within the iteration budget.
fn leading_triplets(a: &DMatrix<f64>, q: usize) -> Option<SingularSpectrum> {
    let n = a.ncols();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SUBSPACE_ITER_SEED);
    // Working block a little wider than requested improves separation of the
    // q-th value from the tail.
    let block = (q + 2).min(n);
    let mut v = DMatrix::from_fn(n, block, |_, _| rng.sample::<f64, _>(StandardNormal));
    orthonormalize_columns(&mut v)?;

    let at_a = a.tr_mul(a);
    let mut prev_ritz = DVector::<f64>::zeros(block);
    for _ in 0..SUBSPACE_MAX_ITERS {
        let mut w = &at_a * &v;
        orthonormalize_columns(&mut w)?;
        v = w;

        // Rayleigh–Ritz on the current subspace.
        let projected = v.tr_mul(&at_a) * &v;
        let sym = (&projected + projected.transpose()) * 0.5;
        let (eigenvalues, eigenvectors) = crate::linalg::verified_symmetric_eigen(&sym);
        // Ascending from the eigensolver; we want descending.
        let ritz: DVector<f64> =
            DVector::from_fn(block, |i, _| eigenvalues[block - 1 - i].max(0.0));

        let drift = (&ritz - &prev_ritz).abs().max();
        let scale = ritz[0].max(1e-300);
        if drift <= 1e-14 * scale {
            // Rotate the block onto the Ritz directions and verify.
            let rot = DMatrix::from_fn(block, block, |i, j| eigenvectors[(i, block - 1 - j)]);
            let v_ritz = &v * rot;
            return finalize_triplets(a, &v_ritz, &ritz, q);
        }
        prev_ritz = ritz;
    }
    None
}

fn finalize_triplets(
    a: &DMatrix<f64>,
    v: &DMatrix<f64>,
    ritz: &DVector<f64>,
    q: usize,
) -> Option<SingularSpectrum> {
    let m = a.nrows();
    let sigma = DVector::from_fn(q, |i, _| ritz[i].sqrt());
    let sigma_1 = sigma[0].max(1e-300);
    let mut u = DMatrix::<f64>::zeros(m, q);
    let v_lead = v.columns(0, q).into_owned();
    for i in 0..q {
        let av = a * v_lead.column(i);
        if sigma[i] > 1e-14 * sigma_1 {
            u.set_column(i, &(av.clone() / sigma[i]));
            let residual = (&av - sigma[i] * u.column(i)).norm();
            if residual > SUBSPACE_RESIDUAL_TOL * sigma_1 {
                return None;
            }
            let back = (a.tr_mul(&u.column(i).into_owned()) - sigma[i] * v_lead.column(i)).norm();
            if back > SUBSPACE_RESIDUAL_TOL * sigma_1 {
                return None;
            }
        } else {
            // Direction annihilated by any positive threshold; a zero left
            // vector contributes nothing to the reconstruction.
            if av.norm() > SUBSPACE_RESIDUAL_TOL * sigma_1 {
                return None;
            }
        }
    }
    Some(SingularSpectrum {
        values: sigma,
        left_vectors: u,
        right_vectors: v_lead,
    })
}

/// Modified Gram–Schmidt in place; `None` if a column collapses.
fn orthonormalize_columns(m: &mut DMatrix<f64>) -> Option<()> {
    let cols = m.ncols();
    for j in 0..cols {
        for i in 0..j {
            let dot = m.column(i).dot(&m.column(j));
            let prev = m.column(i).into_owned();
            let mut col = m.column_mut(j);
            col.axpy(-dot, &prev, 1.0);
        }
        let norm = m.column(j).norm();
        if norm < 1e-300 {
            return None;
        }
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    Some(())
}
