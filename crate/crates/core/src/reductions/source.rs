//! Brute-force deciders for the source problems of the reductions.
//!
//! Each returns a witness when the answer is yes. All of them are
//! exponential and meant for micro instances only.

use crate::instance::Vertex;

/// A simple directed path on exactly `k` vertices, if one exists.
pub fn k_path(n: usize, arcs: &[(Vertex, Vertex)], k: usize) -> Option<Vec<Vertex>> {
    if k == 0 {
        return Some(Vec::new());
    }
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in arcs {
        if u < n && v < n && u != v {
            succ[u].push(v);
        }
    }
    fn extend(succ: &[Vec<Vertex>], path: &mut Vec<Vertex>, used: &mut [bool], k: usize) -> bool {
        if path.len() == k {
            return true;
        }
        let last = *path.last().unwrap();
        for &w in &succ[last] {
            if !used[w] {
                used[w] = true;
                path.push(w);
                if extend(succ, path, used, k) {
                    return true;
                }
                path.pop();
                used[w] = false;
            }
        }
        false
    }
    let mut used = vec![false; n];
    for start in 0..n {
        let mut path = vec![start];
        used[start] = true;
        if extend(&succ, &mut path, &mut used, k) {
            return Some(path);
        }
        used[start] = false;
    }
    None
}

/// Assigns items to `bins` groups so that every group sums to exactly
/// `capacity`. Returns the bin of each item.
pub fn exact_packing(weights: &[u64], bins: usize, capacity: u64) -> Option<Vec<usize>> {
    if bins == 0 {
        return weights.is_empty().then(Vec::new);
    }
    if weights.iter().sum::<u64>() != capacity * bins as u64 {
        return None;
    }
    // Heaviest items first prunes faster; the result is mapped back.
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(weights[i]));
    let mut load = vec![0u64; bins];
    let mut assign = vec![0usize; weights.len()];
    fn place(
        pos: usize,
        order: &[usize],
        weights: &[u64],
        capacity: u64,
        load: &mut [u64],
        assign: &mut [usize],
    ) -> bool {
        let Some(&item) = order.get(pos) else {
            return true;
        };
        for b in 0..load.len() {
            // Empty bins are interchangeable; trying the first one suffices.
            if b > 0 && load[..b].contains(&0) && load[b] == 0 {
                break;
            }
            if load[b] + weights[item] <= capacity {
                load[b] += weights[item];
                assign[item] = b;
                if place(pos + 1, order, weights, capacity, load, assign) {
                    return true;
                }
                load[b] -= weights[item];
            }
        }
        false
    }
    place(0, &order, weights, capacity, &mut load, &mut assign).then_some(assign)
}

/// Bin packing with `bins` bins of capacity `sum / bins`.
pub fn bin_packing(weights: &[u64], bins: usize) -> Option<Vec<usize>> {
    let total: u64 = weights.iter().sum();
    if bins == 0 || !total.is_multiple_of(bins as u64) {
        return None;
    }
    exact_packing(weights, bins, total / bins as u64)
}

/// Splits `a` into triples each summing to `b`. Returns the triple index of
/// every element.
pub fn three_partition(a: &[u64], b: u64) -> Option<Vec<usize>> {
    if !a.len().is_multiple_of(3) {
        return None;
    }
    let m = a.len() / 3;
    let mut group = vec![usize::MAX; a.len()];
    fn fill(a: &[u64], b: u64, group: &mut [usize], next: usize) -> bool {
        let Some(first) = group.iter().position(|&g| g == usize::MAX) else {
            return true;
        };
        group[first] = next;
        for j in first + 1..a.len() {
            if group[j] != usize::MAX {
                continue;
            }
            group[j] = next;
            for l in j + 1..a.len() {
                if group[l] == usize::MAX && a[first] + a[j] + a[l] == b {
                    group[l] = next;
                    if fill(a, b, group, next + 1) {
                        return true;
                    }
                    group[l] = usize::MAX;
                }
            }
            group[j] = usize::MAX;
        }
        group[first] = usize::MAX;
        false
    }
    (m == 0 || fill(a, b, &mut group, 0)).then_some(group)
}
