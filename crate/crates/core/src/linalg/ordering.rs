use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Minimum-degree ordering on an explicit elimination graph.
///
/// `adj` must be symmetric without self loops. Returns `perm` with `perm[k]`
/// the original index eliminated at step `k`. Ties go to the lowest index, so
/// the result is deterministic.
pub fn minimum_degree(mut adj: Vec<Vec<usize>>) -> Vec<usize> {
    let n = adj.len();
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut perm = Vec::with_capacity(n);
    let mut merged = Vec::new();
    while let Some(Reverse((deg, p))) = heap.pop() {
        if eliminated[p] || deg != adj[p].len() {
            continue;
        }
        eliminated[p] = true;
        perm.push(p);
        let nb = std::mem::take(&mut adj[p]);
        for &u in &nb {
            merged.clear();
            let (a, b) = (&adj[u], &nb);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != p && next != u {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[u], &mut merged);
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    debug_assert_eq!(perm.len(), n);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_eliminates_leaves_first() {
        // Hub 0 connected to 1..5: eliminating the hub first would create a clique.
        let mut adj = vec![Vec::new(); 6];
        for i in 1..6 {
            adj[0].push(i);
            adj[i].push(0);
        }
        let perm = minimum_degree(adj);
        assert_eq!(perm[..4], [1, 2, 3, 4]);
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }
}
