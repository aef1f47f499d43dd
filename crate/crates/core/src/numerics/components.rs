use petgraph::unionfind::UnionFind;

/// Connected-component labels of the graph on `0..n` with the given edges.
/// Labels are dense and assigned in order of first appearance.
pub fn union_find_components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut uf = UnionFind::<usize>::new(n);
    for &(a, b) in edges {
        assert!(a < n && b < n, "edge ({a}, {b}) out of range for n = {n}");
        uf.union(a, b);
    }
    let roots = uf.into_labeling();
    let mut relabel = std::collections::HashMap::new();
    roots
        .into_iter()
        .map(|r| {
            let next = relabel.len();
            *relabel.entry(r).or_insert(next)
        })
        .collect()
}

pub fn component_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::VecDeque;

    fn bfs_count(n: usize, edges: &[(usize, usize)]) -> usize {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        q.push_back(v);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn small_cases() {
        let l = union_find_components(3, &[(0, 1)]);
        assert_eq!(l, vec![0, 0, 1]);
        let l = union_find_components(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(component_count(&l), 1);
    }

    #[test]
    fn agrees_with_bfs_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = rng.random_range(1..=200);
            let m = rng.random_range(0..=n);
            let edges: Vec<(usize, usize)> = (0..m)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
                .collect();
            let labels = union_find_components(n, &edges);
            assert_eq!(component_count(&labels), bfs_count(n, &edges));
            for &(a, b) in &edges {
                assert_eq!(labels[a], labels[b]);
            }
        }
    }
}
