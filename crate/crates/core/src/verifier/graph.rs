//! Breadth-first closure of the rewriting graph around seed strings.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::rewriting::{RewriteError, RewritingSystem, StringLabel, Symbol};

/// The subgraph induced on all strings within `depth` rewrites of the
/// seeds. Seeds come first, in the order given.
#[derive(Debug, Clone)]
pub struct ReachableGraph {
    pub vertices: Vec<StringLabel>,
    index: FxHashMap<StringLabel, u32>,
    /// 0/1 adjacency, sorted.
    pub adjacency: Vec<Vec<u32>>,
    /// Number of derivations per edge, sorted by target.
    pub weighted: Vec<Vec<(u32, u32)>>,
    /// BFS distance from the nearest seed.
    pub distance: Vec<usize>,
    /// True when no vertex has a neighbor outside the graph, so the
    /// graph is a union of whole components.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub max_multiplicity: u32,
    pub complete: bool,
}

impl ReachableGraph {
    /// Expands up to `depth` levels (unbounded when `None`), failing
    /// once more than `budget` vertices are discovered.
    pub fn build(
        system: &RewritingSystem,
        seeds: &[&[Symbol]],
        depth: Option<usize>,
        budget: usize,
    ) -> Result<Self, RewriteError> {
        let mut g = Self {
            vertices: Vec::new(),
            index: FxHashMap::default(),
            adjacency: Vec::new(),
            weighted: Vec::new(),
            distance: Vec::new(),
            complete: true,
        };
        for s in seeds {
            g.insert(StringLabel::from(*s), 0, budget)?;
        }
        // Raw neighbor lists, including targets beyond the depth limit.
        let mut raw: Vec<Vec<(StringLabel, u32)>> = Vec::new();
        let mut next = 0;
        while next < g.vertices.len() {
            let d = g.distance[next];
            let nb = system.neighbors_with_multiplicity(&g.vertices[next])?;
            if depth.map_or(true, |limit| d < limit) {
                for (t, _) in &nb {
                    if !g.index.contains_key(t) {
                        g.insert(t.clone(), d + 1, budget)?;
                    }
                }
            }
            raw.push(nb);
            next += 1;
        }
        for nb in raw {
            let mut adj = Vec::with_capacity(nb.len());
            let mut weighted = Vec::with_capacity(nb.len());
            for (t, k) in nb {
                match g.index.get(&t) {
                    Some(&j) => {
                        adj.push(j);
                        weighted.push((j, k));
                    }
                    None => g.complete = false,
                }
            }
            let mut order: Vec<usize> = (0..adj.len()).collect();
            order.sort_by_key(|&i| adj[i]);
            g.adjacency.push(order.iter().map(|&i| adj[i]).collect());
            g.weighted.push(order.iter().map(|&i| weighted[i]).collect());
        }
        Ok(g)
    }

    fn insert(&mut self, s: StringLabel, d: usize, budget: usize) -> Result<(), RewriteError> {
        if self.index.contains_key(&s) {
            return Ok(());
        }
        if self.vertices.len() >= budget {
            return Err(RewriteError::VertexBudget(budget));
        }
        self.index.insert(s.clone(), self.vertices.len() as u32);
        self.vertices.push(s);
        self.distance.push(d);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self, s: &[Symbol]) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            vertices: self.len(),
            edges: self.adjacency.iter().map(Vec::len).sum::<usize>() / 2,
            max_degree: self.adjacency.iter().map(Vec::len).max().unwrap_or(0),
            max_multiplicity: self
                .weighted
                .iter()
                .flatten()
                .map(|&(_, k)| k)
                .max()
                .unwrap_or(0),
            complete: self.complete,
        }
    }

    /// Whether every edge appears in both directions with equal weight.
    pub fn is_symmetric(&self) -> bool {
        self.weighted.iter().enumerate().all(|(u, nb)| {
            nb.iter().all(|&(v, k)| {
                self.weighted[v as usize]
                    .binary_search_by_key(&(u as u32), |&(x, _)| x)
                    .is_ok_and(|i| self.weighted[v as usize][i].1 == k)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::{Alphabet, Rule};

    fn cycle() -> RewritingSystem {
        // a ↔ b, b ↔ c on single letters generates a path a - b - c.
        let alphabet = Alphabet::new(["a", "b", "c"]).unwrap();
        RewritingSystem::new(
            alphabet,
            1,
            [Rule::new(vec![0], vec![1]).unwrap(), Rule::new(vec![1], vec![2]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn seeds_first_and_symmetric() {
        let sys = cycle();
        let g = ReachableGraph::build(&sys, &[&[0, 0]], None, 100).unwrap();
        assert_eq!(g.vertices[0].symbols(), &[0, 0]);
        assert_eq!(g.len(), 9);
        assert!(g.complete);
        assert!(g.is_symmetric());
        assert_eq!(g.stats().max_multiplicity, 1);
        for (adj, w) in g.adjacency.iter().zip(&g.weighted) {
            assert_eq!(adj.len(), w.len());
            assert!(w.iter().all(|&(_, k)| k >= 1));
        }
    }

    #[test]
    fn depth_limit_and_budget() {
        let sys = cycle();
        let g = ReachableGraph::build(&sys, &[&[0, 0]], Some(1), 100).unwrap();
        assert_eq!(g.len(), 3);
        assert!(!g.complete);
        assert!(matches!(
            ReachableGraph::build(&sys, &[&[0, 0]], None, 4),
            Err(RewriteError::VertexBudget(4))
        ));
    }
}
