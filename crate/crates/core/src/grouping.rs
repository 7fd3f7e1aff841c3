//! Balanced initial grouping of robot maps.
//!
//! Groups `0..N-1` are filled round-robin, one vertex per group per round.
//! When the buffer of frontier vertices is empty the candidate with the
//! fewest remaining neighbors seeds the group; otherwise the frontier vertex
//! with the largest [`gain`] joins it. The loop stops as soon as at most
//! `V / N` candidates remain, and those form the last group. The resulting
//! group sizes never differ by more than one.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Grouping, OverlapGraph};

/// Gains closer than this are treated as ties (lowest vertex index wins).
pub(crate) const GAIN_TIE_EPS: f64 = 1e-12;

/// Where the max-gain vertex is drawn from when the buffer is non-empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidatePool {
    /// Only buffered frontier vertices, i.e. neighbors of already grouped
    /// vertices that are still unassigned.
    #[default]
    Buffer,
    /// Every unassigned vertex.
    AllCandidates,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GroupingConfig {
    pub pool: CandidatePool,
}

/// Net weight change of moving candidate `v` into `current_group`:
/// its weight to the group minus its weight to the other candidates.
pub fn gain(g: &OverlapGraph, v: usize, current_group: &[usize], candidates: &[usize]) -> Result<f64> {
    if !candidates.contains(&v) {
        return Err(Error::invalid(format!("vertex {v} is not a candidate")));
    }
    let inside: f64 = current_group.iter().map(|&u| g.weight(u, v)).sum();
    let outside: f64 = candidates.iter().filter(|&&u| u != v).map(|&u| g.weight(u, v)).sum();
    Ok(inside - outside)
}

pub fn initial_grouping(g: &OverlapGraph, groups: usize) -> Result<Grouping> {
    initial_grouping_with(g, groups, GroupingConfig::default())
}

pub fn initial_grouping_with(g: &OverlapGraph, groups: usize, cfg: GroupingConfig) -> Result<Grouping> {
    let n_vertices = g.vertex_count();
    if groups == 0 {
        return Err(Error::invalid("group count must be at least 1"));
    }
    if groups > n_vertices {
        return Err(Error::invalid(format!("{groups} groups for {n_vertices} vertices")));
    }
    let last = groups - 1;
    if groups == 1 {
        return Grouping::new(vec![0; n_vertices], 1);
    }

    let threshold = n_vertices as f64 / groups as f64;
    let mut assignment = vec![last; n_vertices];
    let mut in_candidates = vec![true; n_vertices];
    let mut remaining = n_vertices;
    let mut buffer = BTreeSet::new();
    // (neighbors still in C, vertex), so the first entry is the min-neighbor vertex
    let mut candidate_degree: Vec<usize> = (0..n_vertices).map(|v| g.degree(v)).collect();
    let mut by_degree: BTreeSet<(usize, usize)> = (0..n_vertices).map(|v| (candidate_degree[v], v)).collect();
    let mut weight_to_candidates: Vec<f64> = (0..n_vertices)
        .map(|v| g.links(v).iter().map(|&(_, w)| w).sum())
        .collect();
    let mut weight_to_group = vec![vec![0.0; n_vertices]; last];

    'rounds: loop {
        for group in 0..last {
            let chosen = if buffer.is_empty() {
                by_degree.first().expect("candidates remain while looping").1
            } else {
                let score = |v: usize| weight_to_group[group][v] - weight_to_candidates[v];
                let pick = |it: &mut dyn Iterator<Item = usize>| {
                    let mut best: Option<(usize, f64)> = None;
                    for v in it {
                        let s = score(v);
                        if best.is_none_or(|(_, b)| s > b + GAIN_TIE_EPS) {
                            best = Some((v, s));
                        }
                    }
                    best.expect("non-empty pool").0
                };
                match cfg.pool {
                    CandidatePool::Buffer => pick(&mut buffer.iter().copied()),
                    CandidatePool::AllCandidates => pick(&mut (0..n_vertices).filter(|&v| in_candidates[v])),
                }
            };

            assignment[chosen] = group;
            in_candidates[chosen] = false;
            remaining -= 1;
            by_degree.remove(&(candidate_degree[chosen], chosen));
            buffer.remove(&chosen);
            for &(u, w) in g.links(chosen) {
                weight_to_group[group][u] += w;
                if in_candidates[u] {
                    by_degree.remove(&(candidate_degree[u], u));
                    candidate_degree[u] -= 1;
                    by_degree.insert((candidate_degree[u], u));
                    weight_to_candidates[u] -= w;
                    buffer.insert(u);
                }
            }
            if remaining as f64 <= threshold {
                break 'rounds;
            }
        }
    }
    Grouping::new(assignment, groups)
}
