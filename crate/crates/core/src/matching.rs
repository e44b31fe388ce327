//! Maximum-weight bipartite matching (Hungarian method, potentials form).

/// Maximum total weight of a matching between rows and columns where
/// `weights[row][col]` is `None` for forbidden pairs. Rows may stay
/// unmatched; weights are expected to be nonnegative.
pub(crate) fn max_weight_matching(weights: &[Vec<Option<f64>>]) -> f64 {
    let n = weights.len();
    if n == 0 {
        return 0.0;
    }
    let m = weights[0].len();
    // One private zero-weight "unmatched" column per row keeps the problem
    // feasible and rows <= columns.
    let cols = m + n;
    let cost = |i: usize, j: usize| -> f64 {
        if j < m {
            weights[i][j].map_or(f64::INFINITY, |w| -w)
        } else if j - m == i {
            0.0
        } else {
            f64::INFINITY
        }
    };

    // 1-based arrays; index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| weights[owner[j] - 1][j - 1].unwrap_or(0.0))
        .sum()
}
