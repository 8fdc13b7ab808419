//! Slow, obviously-correct reference implementations that the test suites
//! compare the real code against.

pub mod dot;
pub mod kinds;

use std::collections::BTreeSet;

/// Nodes that lie on some directed cycle, found by enumerating every simple
/// path from every start node. Exponential; keep graphs small.
pub fn nodes_on_cycles(n: usize, edges: &[(usize, usize)]) -> BTreeSet<usize> {
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a].push(b);
    }
    let mut on_cycle = BTreeSet::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut visited = vec![false; n];
        visited[start] = true;
        walk(start, start, &adjacency, &mut path, &mut visited, &mut on_cycle);
    }
    on_cycle
}

fn walk(
    start: usize,
    at: usize,
    adjacency: &[Vec<usize>],
    path: &mut Vec<usize>,
    visited: &mut [bool],
    on_cycle: &mut BTreeSet<usize>,
) {
    for &next in &adjacency[at] {
        if next == start {
            on_cycle.extend(path.iter().copied());
        } else if !visited[next] {
            visited[next] = true;
            path.push(next);
            walk(start, next, adjacency, path, visited, on_cycle);
            path.pop();
            visited[next] = false;
        }
    }
}

pub fn has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    !nodes_on_cycles(n, edges).is_empty()
}

/// Reflexive-transitive closure of the undirected graph, by Warshall's
/// algorithm over a boolean matrix.
pub fn undirected_reachability(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
        reach[b][a] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (j, &hop) in via.iter().enumerate() {
                    if hop {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// True when every pair of the `n` nodes is mutually reachable ignoring
/// direction. The empty graph counts as connected.
pub fn all_pairs_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    undirected_reachability(n, edges).iter().all(|row| row.iter().all(|&r| r))
}

/// Number of undirected components.
pub fn component_count(n: usize, edges: &[(usize, usize)]) -> usize {
    let reach = undirected_reachability(n, edges);
    (0..n).filter(|&i| (0..i).all(|j| !reach[i][j])).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        assert!(!has_cycle(3, &[(0, 1), (1, 2)]));
        assert_eq!(nodes_on_cycles(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]), BTreeSet::from([0, 1, 2]));
        assert_eq!(nodes_on_cycles(2, &[(1, 1)]), BTreeSet::from([1]));
    }

    #[test]
    fn reachability() {
        assert!(all_pairs_connected(3, &[(0, 1), (2, 1)]));
        assert!(!all_pairs_connected(3, &[(0, 1)]));
        assert_eq!(component_count(4, &[(0, 1)]), 3);
        assert!(all_pairs_connected(0, &[]));
    }
}
