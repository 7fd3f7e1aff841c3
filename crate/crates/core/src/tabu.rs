//! Tabu-search refinement of a balanced grouping by cross-group swaps.
//!
//! Every iteration evaluates all swaps of two vertices in different groups
//! and moves to the lowest-fitness admissible one, even when it is worse
//! than the current grouping. A swap is admissible when its vertex pair is
//! not on the tabu list, or when it beats the best grouping found so far
//! (aspiration). Swaps keep group sizes fixed, so balance is preserved.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Grouping, OverlapGraph};

/// Fitness differences below this are ties.
const FITNESS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabuConfig {
    pub max_iterations: usize,
    pub tabu_capacity: usize,
    /// Reserved for randomized restarts; the search itself is deterministic.
    pub rng_seed: u64,
}

impl Default for TabuConfig {
    fn default() -> Self {
        TabuConfig {
            max_iterations: 100,
            tabu_capacity: 10,
            rng_seed: 0,
        }
    }
}

/// FIFO of recently used swap pairs, stored as `(min, max)`.
#[derive(Debug, Clone)]
pub struct TabuList {
    entries: VecDeque<(usize, usize)>,
    capacity: usize,
}

impl TabuList {
    pub fn new(capacity: usize) -> Self {
        TabuList {
            entries: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    fn key(u: usize, v: usize) -> (usize, usize) {
        (u.min(v), u.max(v))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.entries.contains(&Self::key(u, v))
    }

    /// Appends a pair, evicting the oldest entry when full.
    pub fn push(&mut self, u: usize, v: usize) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(Self::key(u, v));
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        let k = Self::key(u, v);
        self.entries.retain(|&e| e != k);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone)]
pub struct TabuOutcome {
    pub best: Grouping,
    pub best_fitness: f64,
    pub initial_fitness: f64,
    pub iterations: usize,
    /// Iterations that lowered the best-so-far fitness.
    pub improvements: usize,
    /// Largest tabu list length observed during the run.
    pub max_tabu_len: usize,
}

pub fn optimize(g: &OverlapGraph, p0: &Grouping, cfg: &TabuConfig) -> Result<Grouping> {
    optimize_detailed(g, p0, cfg).map(|o| o.best)
}

pub fn optimize_detailed(g: &OverlapGraph, p0: &Grouping, cfg: &TabuConfig) -> Result<TabuOutcome> {
    if cfg.tabu_capacity == 0 {
        return Err(Error::invalid("tabu capacity must be at least 1"));
    }
    if p0.vertex_count() != g.vertex_count() {
        return Err(Error::invalid(format!(
            "grouping covers {} vertices, graph has {}",
            p0.vertex_count(),
            g.vertex_count()
        )));
    }
    if !p0.is_balanced() {
        return Err(Error::invalid(format!("initial grouping is unbalanced: sizes {:?}", p0.sizes())));
    }

    let n = g.vertex_count();
    let groups = p0.group_count();
    let mut current = p0.clone();
    let initial_fitness = g.fitness_unchecked(p0);
    let mut best = p0.clone();
    let mut best_fitness = initial_fitness;
    let mut tabu = TabuList::new(cfg.tabu_capacity);
    let mut improvements = 0;
    let mut max_tabu_len = 0;

    // link weight from each vertex into each group
    let mut to_group = vec![0.0; n * groups];
    for u in 0..n {
        for &(v, w) in g.links(u) {
            to_group[u * groups + current.group_of(v)] += w;
        }
    }
    let mut row = vec![0.0; n];

    for _ in 0..cfg.max_iterations {
        let fitness = g.fitness_unchecked(&current);
        let mut chosen: Option<(f64, usize, usize)> = None;
        let mut any_candidate = false;
        for u in 0..n {
            for &(v, w) in g.links(u) {
                row[v] = w;
            }
            let a = current.group_of(u);
            for v in (u + 1)..n {
                let b = current.group_of(v);
                if a == b {
                    continue;
                }
                any_candidate = true;
                let delta = to_group[u * groups + a] - to_group[u * groups + b] + to_group[v * groups + b]
                    - to_group[v * groups + a]
                    + 2.0 * row[v];
                let value = fitness + delta;
                let admissible = !tabu.contains(u, v) || value < best_fitness - FITNESS_EPS;
                if admissible && chosen.is_none_or(|(best_value, _, _)| value < best_value - FITNESS_EPS) {
                    chosen = Some((value, u, v));
                }
            }
            for &(v, _) in g.links(u) {
                row[v] = 0.0;
            }
        }
        if !any_candidate {
            continue;
        }
        let (u, v) = match chosen {
            Some((_, u, v)) => (u, v),
            // every swap is tabu: take the least recently tabooed one
            None => *tabu
                .iter()
                .find(|&&(x, y)| current.group_of(x) != current.group_of(y))
                .ok_or_else(|| Error::Internal("no admissible swap and no tabu candidate".into()))?,
        };

        let (a, b) = (current.group_of(u), current.group_of(v));
        for &(x, w) in g.links(u) {
            to_group[x * groups + a] -= w;
            to_group[x * groups + b] += w;
        }
        for &(x, w) in g.links(v) {
            to_group[x * groups + b] -= w;
            to_group[x * groups + a] += w;
        }
        current.swap(u, v);

        let new_fitness = g.fitness_unchecked(&current);
        if new_fitness < best_fitness - FITNESS_EPS {
            tabu.remove(u, v);
            best = current.clone();
            best_fitness = new_fitness;
            improvements += 1;
        }
        if !tabu.contains(u, v) {
            tabu.push(u, v);
        }
        max_tabu_len = max_tabu_len.max(tabu.len());
    }

    Ok(TabuOutcome {
        best,
        best_fitness,
        initial_fitness,
        iterations: cfg.max_iterations,
        improvements,
        max_tabu_len,
    })
}
