//! Test-only oracles, independent of the library's implementation path.

use ncd_core::TiePolicy;

/// All k-element index subsets of 0..n.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// The unique stable k-nearest set: every member precedes every
/// non-member in (distance, index) lexicographic order.
fn stable_nearest_set(row: &[f64], k: usize) -> Vec<usize> {
    let n = row.len();
    let precedes = |a: usize, b: usize| (row[a], a) < (row[b], b);
    let mut valid: Vec<Vec<usize>> = k_subsets(n, k)
        .into_iter()
        .filter(|s| {
            s.iter().all(|&i| {
                (0..n)
                    .filter(|j| !s.contains(j))
                    .all(|j| precedes(i, j))
            })
        })
        .collect();
    assert_eq!(valid.len(), 1, "stable nearest set must be unique");
    valid.pop().unwrap()
}

/// Labels holding the maximum vote count within the stable k-nearest
/// set, ascending.
pub fn oracle_vote_leaders(row: &[f64], labels: &[u32], k: usize) -> Vec<u32> {
    let set = stable_nearest_set(row, k);
    let mut distinct: Vec<u32> = set.iter().map(|&i| labels[i]).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let count = |label: u32| set.iter().filter(|&&i| labels[i] == label).count();
    let max = distinct.iter().map(|&l| count(l)).max().unwrap();
    distinct.into_iter().filter(|&l| count(l) == max).collect()
}

/// Exhaustive-enumeration kNN prediction applying the documented tie
/// rules, for cross-checking `knn_predict`.
pub fn oracle_knn_predict(row: &[f64], labels: &[u32], k: usize, policy: TiePolicy) -> u32 {
    let leaders = oracle_vote_leaders(row, labels, k);
    match policy {
        TiePolicy::LowestLabelId => leaders[0],
        TiePolicy::NearestAmongTied => {
            let set = stable_nearest_set(row, k);
            let closest = |label: u32| {
                set.iter()
                    .filter(|&&i| labels[i] == label)
                    .map(|&i| row[i])
                    .fold(f64::INFINITY, f64::min)
            };
            // Leaders are ascending, so < keeps the lowest label on ties.
            let mut best = leaders[0];
            for &l in &leaders[1..] {
                if closest(l) < closest(best) {
                    best = l;
                }
            }
            best
        }
    }
}

pub fn oracle_max_possible(row: &[f64], labels: &[u32], k: usize, gold: u32) -> bool {
    oracle_vote_leaders(row, labels, k).contains(&gold)
}
