//! Seeded k-means used on the spectral embedding.
//!
//! Initialization is greedy furthest-point: the first center is drawn from
//! the restart's RNG, each further center is the point farthest from the
//! centers chosen so far (ties toward the lower index). Restarts run
//! independently and the winner is chosen by (objective, restart index), so
//! the outcome is a pure function of the seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::seed::derive_seed2;

const LLOYD_MAX_ITERS: usize = 100;

/// Runs `restarts` seeded k-means restarts over the rows of `data` and
/// returns the best label vector.
pub fn kmeans(data: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Vec<usize> {
    let m = data.nrows();
    assert!(k >= 1 && k <= m, "k must lie in [1, m]");
    if k == 1 {
        return vec![0; m];
    }

    let runs: Vec<(f64, usize, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|t| {
            let restart_seed = derive_seed2(seed, 0x6b6d65616e73, t as u64);
            let (labels, objective) = lloyd_run(data, k, restart_seed);
            (objective, t, labels)
        })
        .collect();

    let best = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    best.2
}

fn lloyd_run(data: &DMatrix<f64>, k: usize, seed: u64) -> (Vec<usize>, f64) {
    let m = data.nrows();
    let dim = data.ncols();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);

    // Greedy furthest-point initialization.
    let mut center_rows = Vec::with_capacity(k);
    center_rows.push(rng.gen_range(0..m));
    while center_rows.len() < k {
        let mut best_idx = 0;
        let mut best_dist = -1.0;
        for i in 0..m {
            let nearest = center_rows
                .iter()
                .map(|&c| row_dist_sq(data, i, c))
                .fold(f64::INFINITY, f64::min);
            if nearest > best_dist {
                best_dist = nearest;
                best_idx = i;
            }
        }
        center_rows.push(best_idx);
    }

    let mut centers = DMatrix::<f64>::zeros(k, dim);
    for (c, &row) in center_rows.iter().enumerate() {
        centers.set_row(c, &data.row(row));
    }

    let mut labels = vec![0usize; m];
    for _ in 0..LLOYD_MAX_ITERS {
        // Assignment, ties toward the lower cluster index.
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = point_center_dist_sq(data, i, &centers, c);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if *label != best_c {
                *label = best_c;
                changed = true;
            }
        }

        // Update step.
        let mut counts = vec![0usize; k];
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        for i in 0..m {
            counts[labels[i]] += 1;
            for j in 0..dim {
                sums[(labels[i], j)] += data[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    centers[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            } else {
                // Re-seat an empty cluster on the point farthest from its
                // current center; deterministic via the lower-index tie rule.
                let mut far_i = 0;
                let mut far_d = -1.0;
                for (i, &label) in labels.iter().enumerate() {
                    let d = point_center_dist_sq(data, i, &centers, label);
                    if d > far_d {
                        far_d = d;
                        far_i = i;
                    }
                }
                centers.set_row(c, &data.row(far_i));
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }

    let objective: f64 = (0..m)
        .map(|i| point_center_dist_sq(data, i, &centers, labels[i]))
        .sum();
    (labels, objective)
}

fn row_dist_sq(data: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..data.ncols() {
        let diff = data[(a, j)] - data[(b, j)];
        total += diff * diff;
    }
    total
}

fn point_center_dist_sq(data: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..data.ncols() {
        let diff = data[(i, j)] - centers[(c, j)];
        total += diff * diff;
    }
    total
}
