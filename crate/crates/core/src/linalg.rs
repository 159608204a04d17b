//! Verified dense decompositions.
//!
//! The fast Golub–Kahan SVD silently mis-factorizes certain degenerate
//! inputs (exactly repeated columns are enough to trigger it). Everything in
//! this crate that touches a spectrum goes through the wrappers here: the
//! fast path is checked against its defining equations, and on failure the
//! computation falls back to a one-sided Jacobi SVD (or a cyclic Jacobi
//! eigensolver), which is slower but unconditionally reliable.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Thin SVD with descending singular values, verified.
///
/// Returns `(u, sigma, v)` with `a = u · diag(sigma) · vᵀ`, `u` of shape
/// m×min and `v` of shape n×min, both with orthonormal columns.
pub fn verified_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    if let (Some(u), Some(v_t)) = (svd.u, svd.v_t) {
        let v = v_t.transpose();
        if svd_is_valid(a, &u, &svd.singular_values, &v) {
            return (u, svd.singular_values, v);
        }
    }
    log::debug!(
        "fast SVD failed verification on a {}×{} matrix; using Jacobi",
        a.nrows(),
        a.ncols()
    );
    jacobi_svd(a)
}

/// Singular values only, descending, verified.
pub fn verified_singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    verified_svd(a).1
}

fn svd_is_valid(a: &DMatrix<f64>, u: &DMatrix<f64>, s: &DVector<f64>, v: &DMatrix<f64>) -> bool {
    let n = s.len();
    if n == 0 {
        return true;
    }
    for i in 1..n {
        if s[i] > s[i - 1] || s[i] < 0.0 {
            return false;
        }
    }
    let a_max = if a.is_empty() { 0.0 } else { a.abs().max() };
    let scale = s[0].max(a_max).max(1e-300);

    let eye_u = u.tr_mul(u);
    let eye_v = v.tr_mul(v);
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            if (eye_u[(i, j)] - target).abs() > 1e-8 || (eye_v[(i, j)] - target).abs() > 1e-8 {
                return false;
            }
        }
    }

    let mut scaled = u.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(s[j]);
    }
    let recon = scaled * v.transpose();
    (recon - a).abs().max() <= 1e-10 * scale
}

/// One-sided Jacobi SVD: orthogonalizes the columns of A by plane rotations.
/// Unconditionally convergent; used as the fallback path.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    if m >= n {
        jacobi_svd_tall(a)
    } else {
        let (u, s, v) = jacobi_svd_tall(&a.transpose());
        (v, s, u)
    }
}

fn jacobi_svd_tall(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut b = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);

    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dot(&b.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = c * bip - s * biq;
                    b[(i, q)] = s * bip + c * biq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma = DVector::<f64>::zeros(n);
    for j in 0..n {
        sigma[j] = b.column(j).norm();
    }
    let smax = sigma.max();

    // Sort descending, carrying the columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let sigma_sorted = DVector::from_fn(n, |i, _| sigma[order[i]]);
    let mut u = DMatrix::<f64>::zeros(m, n);
    let mut v_sorted = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
        if sigma[src] > smax * 1e-14 * (m as f64) {
            u.set_column(dst, &(b.column(src) / sigma[src]));
        }
        // Columns below the cutoff are completed below; using the noise
        // direction would not be reliably orthogonal.
    }
    for j in 0..n {
        if u.column(j).norm() == 0.0 {
            complete_column(&mut u, j);
        }
    }
    (u, sigma_sorted, v_sorted)
}

/// Fills column `j` of `u` with a unit vector orthogonal to all other
/// columns, chosen deterministically from the standard basis.
fn complete_column(u: &mut DMatrix<f64>, j: usize) {
    let m = u.nrows();
    let n = u.ncols();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for k in 0..m {
        let mut w = DVector::<f64>::zeros(m);
        w[k] = 1.0;
        for c in 0..n {
            if c == j {
                continue;
            }
            let dot = u.column(c).dot(&w);
            w -= u.column(c) * dot;
        }
        let norm = w.norm();
        if norm > best.as_ref().map_or(0.0, |(b, _)| *b) {
            let unit = w / norm;
            best = Some((norm, unit));
        }
        if best.as_ref().is_some_and(|(b, _)| *b > 0.9) {
            break;
        }
    }
    let (_, w) = best.expect("m >= n guarantees an orthogonal complement");
    u.set_column(j, &w);
}

/// Symmetric eigendecomposition with ascending eigenvalues, verified.
pub fn verified_symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let eig = SymmetricEigen::new(a.clone());
    if eigen_is_valid(a, &eig.eigenvalues, &eig.eigenvectors) {
        return sort_eigen_ascending(eig.eigenvalues, eig.eigenvectors);
    }
    log::debug!("fast symmetric eigen failed verification on {n}×{n}; using Jacobi");
    let (values, vectors) = jacobi_eigh(a);
    sort_eigen_ascending(values, vectors)
}

fn eigen_is_valid(a: &DMatrix<f64>, values: &DVector<f64>, vectors: &DMatrix<f64>) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let n = a.nrows();
    let scale = values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(if a.is_empty() { 0.0 } else { a.abs().max() })
        .max(1e-300);
    let eye = vectors.tr_mul(vectors);
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            if (eye[(i, j)] - target).abs() > 1e-8 {
                return false;
            }
        }
    }
    let mut scaled = vectors.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(values[j]);
    }
    let recon = scaled * vectors.transpose();
    (recon - a).abs().max() <= 1e-10 * scale
}

fn sort_eigen_ascending(
    values: DVector<f64>,
    vectors: DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = DVector::from_fn(n, |i, _| values[order[i]]);
    let mut sorted_vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    (sorted_values, sorted_vectors)
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
fn jacobi_eigh(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut d = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(d[(i, j)].abs());
            }
        }
        let scale = (0..n).fold(0.0f64, |acc, i| acc.max(d[(i, i)].abs())).max(1e-300);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = d[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = d[(p, p)];
                let aqq = d[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    if i != p && i != q {
                        let dip = d[(i, p)];
                        let diq = d[(i, q)];
                        d[(i, p)] = c * dip - s * diq;
                        d[(p, i)] = d[(i, p)];
                        d[(i, q)] = s * dip + c * diq;
                        d[(q, i)] = d[(i, q)];
                    }
                }
                d[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                d[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                d[(p, q)] = 0.0;
                d[(q, p)] = 0.0;

                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }

    let values = DVector::from_fn(n, |i, _| d[(i, i)]);
    (values, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_xoshiro::rand_core::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn check_svd(a: &DMatrix<f64>) {
        let (u, s, v) = verified_svd(a);
        assert!(
            svd_is_valid(a, &u, &s, &v),
            "verified_svd returned an invalid factorization for {:?}",
            a.shape()
        );
    }

    #[test]
    fn random_matrices() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        for &(m, n) in &[(5usize, 5usize), (8, 3), (3, 8), (1, 1), (10, 10)] {
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            check_svd(&a);
        }
    }

    #[test]
    fn repeated_columns_trigger_fallback_and_stay_correct() {
        // The case that breaks the fast path: identical columns.
        let frame: Vec<f64> = (0..20).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let mut a = DMatrix::<f64>::zeros(20, 8);
        for j in 0..8 {
            for i in 0..20 {
                a[(i, j)] = frame[i];
            }
        }
        let (u, s, v) = verified_svd(&a);
        assert!(svd_is_valid(&a, &u, &s, &v));
        // Rank-1: σ₁ = ‖A‖_F, the rest ~ 0.
        assert!((s[0] - a.norm()).abs() < 1e-10 * a.norm());
        assert!(s[1] < 1e-10 * s[0]);
    }

    #[test]
    fn orthonormal_input_with_tied_singular_values() {
        // All singular values equal 1; ties are the classic trouble spot.
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let g = DMatrix::from_fn(10, 4, |_, _| rng.gen_range(-1.0..1.0));
        let q = g.qr().q();
        check_svd(&q);
        let (_, s, _) = verified_svd(&q);
        for i in 0..4 {
            assert!((s[i] - 1.0).abs() < 1e-10, "σ_{i} = {}", s[i]);
        }
    }

    #[test]
    fn zero_matrix() {
        let a = DMatrix::<f64>::zeros(4, 3);
        let (u, s, _v) = verified_svd(&a);
        assert!(s.iter().all(|&x| x == 0.0));
        // U still orthonormal thanks to completion.
        let g = u.tr_mul(&u);
        assert!((g - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
    }

    #[test]
    fn jacobi_path_directly() {
        let frame: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let mut a = DMatrix::<f64>::zeros(12, 5);
        for j in 0..5 {
            for i in 0..12 {
                a[(i, j)] = frame[i] * (j + 1) as f64; // rank 1, scaled columns
            }
        }
        let (u, s, v) = jacobi_svd(&a);
        assert!(svd_is_valid(&a, &u, &s, &v));
    }

    #[test]
    fn wide_matrices_transpose_correctly() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let a = DMatrix::from_fn(3, 9, |_, _| rng.gen_range(-1.0..1.0));
        let (u, s, v) = jacobi_svd(&a);
        assert!(svd_is_valid(&a, &u, &s, &v));
    }

    #[test]
    fn symmetric_eigen_random_and_degenerate() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        let g = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let sym = (&g + g.transpose()) * 0.5;
        let (values, vectors) = verified_symmetric_eigen(&sym);
        for i in 1..6 {
            assert!(values[i] >= values[i - 1]);
        }
        assert!(eigen_is_valid(&sym, &values, &vectors));

        // Rank-1 Gram matrix of identical embeddings.
        let ones = DMatrix::<f64>::from_element(8, 8, 3.0);
        let (values, vectors) = verified_symmetric_eigen(&ones);
        assert!(eigen_is_valid(&ones, &values, &vectors));
        assert!((values[7] - 24.0).abs() < 1e-9);
    }
}
