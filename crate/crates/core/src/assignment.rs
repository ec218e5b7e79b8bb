//! Optimal assignment on small square integer matrices (Hungarian method
//! with potentials, O(k³)).

/// Maximum-weight perfect matching. Returns the total weight and `map` with
/// `map[row] = column`.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let k = weights.len();
    if k == 0 {
        return (0, Vec::new());
    }
    debug_assert!(weights.iter().all(|r| r.len() == k));
    let cost = |i: usize, j: usize| -weights[i][j];

    // 1-based potentials; column 0 is a virtual start.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for row in 1..=k {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_v = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let reduced = cost(r - 1, j - 1) - u[r] - v[j];
                if reduced < min_v[j] {
                    min_v[j] = reduced;
                    way[j] = col0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    col1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut map = vec![0; k];
    for j in 1..=k {
        map[owner[j] - 1] = j - 1;
    }
    let total = map.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
    (total, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(weights: &[Vec<i64>]) -> i64 {
        fn go(row: usize, used: &mut Vec<bool>, w: &[Vec<i64>]) -> i64 {
            if row == w.len() {
                return 0;
            }
            let mut best = i64::MIN;
            for j in 0..w.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(w[row][j] + go(row + 1, used, w));
                    used[j] = false;
                }
            }
            best
        }
        go(0, &mut vec![false; weights.len()], weights)
    }

    #[test]
    fn small_cases() {
        assert_eq!(max_weight_assignment(&[vec![5]]), (5, vec![0]));
        let w = vec![vec![1, 9], vec![8, 2]];
        assert_eq!(max_weight_assignment(&w), (17, vec![1, 0]));
    }

    proptest! {
        #[test]
        fn matches_enumeration(k in 1usize..=6, seed in any::<u64>()) {
            let mut s = seed;
            let w: Vec<Vec<i64>> = (0..k)
                .map(|_| (0..k).map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((s >> 33) % 50) as i64
                }).collect())
                .collect();
            let (total, map) = max_weight_assignment(&w);
            prop_assert_eq!(total, brute_force(&w));
            let mut seen = map.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..k).collect::<Vec<_>>());
        }
    }
}
