use std::collections::BTreeSet;

use crate::Real;

use super::CscMatrix;

/// Minimum-degree fill-reducing ordering of a symmetric matrix given by its upper triangle.
///
/// Works on the explicit elimination graph: the node of smallest current degree is
/// eliminated next (ties broken by lowest index) and its neighbours become a clique.
/// Returns `perm` with `perm[k]` = original index eliminated at step `k`.
pub fn minimum_degree<T: Real>(upper: &CscMatrix<T>) -> Vec<usize> {
    let n = upper.ncols();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 0..n {
        for (i, _) in upper.col(j) {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut perm = Vec::with_capacity(n);

    while let Some((_, v)) = queue.pop_first() {
        perm.push(v);
        let neighbours: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &neighbours {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
            for &w in &neighbours {
                if w != u {
                    adj[u].insert(w);
                }
            }
            queue.insert((adj[u].len(), u));
        }
    }
    perm
}
