//! Small directed-graph helpers over string-keyed edge lists.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Finds one directed cycle, returned as the list of nodes along it.
/// Deterministic: nodes are visited in lexicographic order.
pub(crate) fn find_cycle(edges: &[(&str, &str)]) -> Option<Vec<String>> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default();
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();

    for &start in adj.keys() {
        if marks.contains_key(start) {
            continue;
        }
        // Iterative DFS; `path` mirrors the recursion stack.
        let mut path: Vec<&str> = vec![start];
        let mut iters: Vec<std::collections::btree_set::Iter<'_, &str>> = vec![adj[start].iter()];
        marks.insert(start, Mark::Open);
        while let Some(it) = iters.last_mut() {
            match it.next() {
                Some(&next) => match marks.get(next) {
                    Some(Mark::Open) => {
                        let pos = path.iter().position(|n| *n == next).unwrap_or(0);
                        return Some(path[pos..].iter().map(|s| s.to_string()).collect());
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        path.push(next);
                        iters.push(adj[next].iter());
                    }
                },
                None => {
                    iters.pop();
                    if let Some(done) = path.pop() {
                        marks.insert(done, Mark::Done);
                    }
                }
            }
        }
    }
    None
}

/// Breadth-first distances from `start` following `neighbors`.
pub(crate) fn bfs_distances<'a, F, I>(start: &'a str, mut neighbors: F) -> BTreeMap<&'a str, usize>
where
    F: FnMut(&'a str) -> I,
    I: IntoIterator<Item = &'a str>,
{
    let mut dist = BTreeMap::new();
    dist.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let d = dist[node];
        for n in neighbors(node) {
            if !dist.contains_key(n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_two_cycle() {
        let cycle = find_cycle(&[("A", "B"), ("B", "A")]).unwrap();
        assert_eq!(cycle, vec!["A", "B"]);
    }

    #[test]
    fn dag_has_no_cycle() {
        assert!(find_cycle(&[("A", "B"), ("B", "C"), ("A", "C")]).is_none());
        assert_eq!(find_cycle(&[("A", "A")]).unwrap(), vec!["A"]);
    }

    #[test]
    fn bfs_on_path() {
        let edges = [("a", "b"), ("b", "c")];
        let d = bfs_distances("a", |n| {
            edges.iter().filter(move |(x, _)| *x == n).map(|(_, y)| *y)
        });
        assert_eq!(d["c"], 2);
    }
}
