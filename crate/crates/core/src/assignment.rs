//! Minimum-cost perfect matching on small dense cost matrices.

/// Hungarian algorithm (shortest augmenting paths with potentials).
/// `cost` is row-major `n x n`; returns `perm` with row `i` assigned to
/// column `perm[i]`, and the total cost.
pub fn hungarian(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    if n == 0 {
        return (vec![], 0.0);
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[i * n + perm[i]]).sum();
    (perm, total)
}

/// Optimal assignment; among assignments whose cost is within a relative
/// `1e-12` of the optimum, the lexicographically smallest permutation.
pub fn lexicographic_assignment(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    let (perm, best) = hungarian(cost, n);
    let slack = 1e-12 * (1.0 + best.abs());
    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut fixed_cost = 0.0;
    for i in 0..n {
        // fast path: the optimum's own column is the smallest feasible one
        // unless a smaller unused column also attains the optimum
        let mut chosen = None;
        for j in 0..n {
            if fixed.contains(&j) {
                continue;
            }
            if j == perm[i] && fixed.iter().enumerate().all(|(r, &c)| c == perm[r]) {
                // remaining rows can still use the optimal completion
                chosen = Some(j);
                break;
            }
            let c0 = fixed_cost + cost[i * n + j];
            let rest = reduced_cost(cost, n, &fixed, i, j);
            if c0 + rest <= best + slack {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.unwrap_or(perm[i]);
        fixed_cost += cost[i * n + j];
        fixed.push(j);
    }
    (fixed, fixed_cost)
}

fn reduced_cost(cost: &[f64], n: usize, fixed: &[usize], row: usize, col: usize) -> f64 {
    let rows: Vec<usize> = (row + 1..n).collect();
    let cols: Vec<usize> = (0..n).filter(|c| *c != col && !fixed.contains(c)).collect();
    let m = rows.len();
    let mut sub = Vec::with_capacity(m * m);
    for &r in &rows {
        for &c in &cols {
            sub.push(cost[r * n + c]);
        }
    }
    hungarian(&sub, m).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(cost: &[f64], n: usize) -> f64 {
        fn rec(cost: &[f64], n: usize, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(cost, n, row + 1, used, acc + cost[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn ties_pick_identity() {
        let cost = vec![1.0; 4];
        assert_eq!(lexicographic_assignment(&cost, 2).0, vec![0, 1]);
    }

    #[test]
    fn simple_swap() {
        let cost = vec![5.0, 1.0, 1.0, 5.0];
        assert_eq!(lexicographic_assignment(&cost, 2).0, vec![1, 0]);
    }

    proptest! {
        #[test]
        fn hungarian_matches_brute_force(vals in prop::collection::vec(0.0f64..10.0, 16)) {
            let (perm, c) = lexicographic_assignment(&vals, 4);
            let b = brute(&vals, 4);
            prop_assert!((c - b).abs() < 1e-9);
            let mut seen = perm.clone();
            seen.sort();
            prop_assert_eq!(seen, vec![0, 1, 2, 3]);
        }
    }
}
