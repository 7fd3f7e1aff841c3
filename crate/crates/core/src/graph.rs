//! The overlapping graph: robot maps as vertices, overlap degrees as link
//! weights, plus groupings of its vertices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scene::OverlapMatrix;

/// Weighted undirected graph with sparse storage. Zero-weight pairs are
/// not links.
#[derive(Debug, Clone)]
pub struct OverlapGraph {
    vertex_count: usize,
    weights: HashMap<(usize, usize), f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    total_weight: f64,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl OverlapGraph {
    /// Builds a graph from `(u, v, w)` triples. Repeated pairs are an error,
    /// as are self loops, negative or non-finite weights.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut weights = HashMap::new();
        for (u, v, w) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::invalid(format!("link ({u}, {v}) out of range for {vertex_count} vertices")));
            }
            if u == v {
                return Err(Error::invalid(format!("self loop on vertex {u}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("link ({u}, {v}) has weight {w}")));
            }
            if weights.insert(key(u, v), w).is_some() {
                return Err(Error::invalid(format!("duplicate link ({u}, {v})")));
            }
        }
        weights.retain(|_, w| *w > 0.0);
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut pairs: Vec<_> = weights.iter().map(|(&k, &w)| (k, w)).collect();
        pairs.sort_by_key(|p| p.0);
        let mut total_weight = 0.0;
        for ((u, v), w) in pairs {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
            total_weight += w;
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(v, _)| v);
        }
        Ok(OverlapGraph {
            vertex_count,
            weights,
            adjacency,
            total_weight,
        })
    }

    pub fn from_matrix(m: &OverlapMatrix) -> Self {
        let n = m.len();
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).map(|(u, v)| (u, v, m.get(u, v)));
        OverlapGraph::from_edges(n, edges).expect("validated overlap matrix")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of vertex pairs joined by a positive-weight link.
    pub fn link_count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights.get(&key(u, v)).copied().unwrap_or(0.0)
    }

    /// Links incident to `v` as `(neighbor, weight)`, sorted by neighbor.
    pub fn links(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> Result<Vec<usize>> {
        if v >= self.vertex_count {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        Ok(self.adjacency[v].iter().map(|&(u, _)| u).collect())
    }

    /// Total weight of links crossing group boundaries. Lower is better.
    pub fn fitness(&self, p: &Grouping) -> Result<f64> {
        self.check(p)?;
        Ok(self.fitness_unchecked(p))
    }

    pub(crate) fn fitness_unchecked(&self, p: &Grouping) -> f64 {
        let mut sum = 0.0;
        for (u, links) in self.adjacency.iter().enumerate() {
            for &(v, w) in links {
                if u < v && p.group_of(u) != p.group_of(v) {
                    sum += w;
                }
            }
        }
        sum
    }

    /// Total weight of links with both ends in group `i`.
    pub fn in_group_weight(&self, p: &Grouping, i: usize) -> Result<f64> {
        self.check(p)?;
        if i >= p.group_count() {
            return Err(Error::invalid(format!("group {i} out of range for {} groups", p.group_count())));
        }
        let mut sum = 0.0;
        for u in p.members(i) {
            for &(v, w) in &self.adjacency[u] {
                if u < v && p.group_of(v) == i {
                    sum += w;
                }
            }
        }
        Ok(sum)
    }

    fn check(&self, p: &Grouping) -> Result<()> {
        if p.vertex_count() != self.vertex_count {
            return Err(Error::invalid(format!(
                "grouping covers {} vertices, graph has {}",
                p.vertex_count(),
                self.vertex_count
            )));
        }
        Ok(())
    }
}

/// Partition of vertices `0..V` into groups `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grouping {
    assignment: Vec<usize>,
    group_count: usize,
}

impl Grouping {
    pub fn new(assignment: Vec<usize>, group_count: usize) -> Result<Self> {
        if group_count == 0 {
            return Err(Error::invalid("a grouping needs at least one group"));
        }
        if let Some((v, &g)) = assignment.iter().enumerate().find(|(_, &g)| g >= group_count) {
            return Err(Error::invalid(format!("vertex {v} assigned to group {g} of {group_count}")));
        }
        Ok(Grouping {
            assignment,
            group_count,
        })
    }

    /// Builds a grouping from explicit member lists. Every vertex in
    /// `0..vertex_count` must appear exactly once.
    pub fn from_groups(groups: &[Vec<usize>], vertex_count: usize) -> Result<Self> {
        let mut assignment = vec![usize::MAX; vertex_count];
        for (g, members) in groups.iter().enumerate() {
            for &v in members {
                if v >= vertex_count {
                    return Err(Error::invalid(format!("vertex {v} out of range")));
                }
                if assignment[v] != usize::MAX {
                    return Err(Error::invalid(format!("vertex {v} appears in two groups")));
                }
                assignment[v] = g;
            }
        }
        if let Some(v) = assignment.iter().position(|&g| g == usize::MAX) {
            return Err(Error::invalid(format!("vertex {v} is not in any group")));
        }
        Grouping::new(assignment, groups.len())
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn group_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &x)| x == g)
            .map(|(v, _)| v)
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.group_count];
        for (v, &g) in self.assignment.iter().enumerate() {
            out[g].push(v);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.group_count];
        for &g in &self.assignment {
            out[g] += 1;
        }
        out
    }

    /// Group sizes differ by at most one.
    pub fn is_balanced(&self) -> bool {
        let sizes = self.sizes();
        let max = sizes.iter().max().copied().unwrap_or(0);
        let min = sizes.iter().min().copied().unwrap_or(0);
        max - min <= 1
    }

    /// Exchanges the groups of `u` and `v`.
    pub fn swap(&mut self, u: usize, v: usize) {
        self.assignment.swap(u, v);
    }

    /// Relabels groups in order of first appearance, so two groupings that
    /// differ only by group names compare equal.
    pub fn canonical(&self) -> Grouping {
        let mut map = vec![usize::MAX; self.group_count];
        let mut next = 0;
        let assignment = self
            .assignment
            .iter()
            .map(|&g| {
                if map[g] == usize::MAX {
                    map[g] = next;
                    next += 1;
                }
                map[g]
            })
            .collect();
        Grouping {
            assignment,
            group_count: self.group_count,
        }
    }
}
