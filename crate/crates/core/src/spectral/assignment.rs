//! Exact minimum-cost assignment (Hungarian algorithm, potentials form).
//!
//! Used to match predicted cluster labels against ground truth: the k×k
//! contingency matrix is turned into a cost matrix and the optimal bijection
//! maximizes total agreement. O(n³), fine for the k ≤ 10 regimes this crate
//! targets.

/// Solves min-cost perfect assignment on a square cost matrix given in
/// row-major order. Returns, for each row, the assigned column.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    const INF: i64 = i64::MAX / 4;
    // 1-indexed potentials over rows (u) and columns (v); way[j] is the
    // column preceding j on the shortest augmenting path.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(cost: &[Vec<i64>]) -> i64 {
        let n = cost.len();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = i64::MAX;
        permute(&mut cols, 0, &mut |perm| {
            let total: i64 = (0..n).map(|i| cost[i][perm[i]]).sum();
            best = best.min(total);
        });
        best
    }

    fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
        if start == items.len() {
            visit(items);
            return;
        }
        for i in start..items.len() {
            items.swap(start, i);
            permute(items, start + 1, visit);
            items.swap(start, i);
        }
    }

    fn total_cost(cost: &[Vec<i64>], assignment: &[usize]) -> i64 {
        assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn matches_brute_force_on_small_matrices() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]],
            vec![vec![1, 2], vec![2, 1]],
            vec![vec![7]],
            vec![
                vec![10, 10, 10, 1],
                vec![10, 10, 1, 10],
                vec![10, 1, 10, 10],
                vec![1, 10, 10, 10],
            ],
        ];
        for cost in cases {
            let assignment = min_cost_assignment(&cost);
            // Valid permutation.
            let mut seen = vec![false; cost.len()];
            for &j in &assignment {
                assert!(!seen[j]);
                seen[j] = true;
            }
            assert_eq!(total_cost(&cost, &assignment), brute_force(&cost));
        }
    }

    #[test]
    fn pseudorandom_matrices_match_brute_force() {
        // Small LCG keeps this dependency-free.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 100) as i64
        };
        for n in 1..=5usize {
            for _ in 0..20 {
                let cost: Vec<Vec<i64>> =
                    (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let assignment = min_cost_assignment(&cost);
                assert_eq!(total_cost(&cost, &assignment), brute_force(&cost));
            }
        }
    }
}
