//! Resource-aware placement of robot groups onto edge servers.
//!
//! Groups are placed in index order; each takes the still-free server that
//! minimizes its computing latency plus the time to upload its edge map,
//! `L_j(P_i) + D(P_i) / B_j`. [`oracle_optimal_assignment`] enumerates every
//! injective placement to measure how far the greedy result is from the
//! best end-to-end latency.

use serde::Serialize;

use crate::cost::Evaluator;
use crate::error::{Error, Result};

/// Largest server count the exhaustive oracle accepts.
pub const ORACLE_MAX_SERVERS: usize = 8;

/// `servers[i]` is the index of the edge server that hosts group `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub servers: Vec<usize>,
}

/// Greedy placement. `latency(i, j)` is the computing latency of group `i`
/// on server `j`, `size(i)` the group's output bytes and `bandwidth[j]` the
/// server's edge → cloud rate. Ties go to the lowest server index.
pub fn assign(
    group_count: usize,
    bandwidth: &[f64],
    mut latency: impl FnMut(usize, usize) -> Result<f64>,
    mut size: impl FnMut(usize) -> Result<f64>,
) -> Result<Assignment> {
    if group_count > bandwidth.len() {
        return Err(Error::invalid(format!(
            "{group_count} groups but only {} edge servers",
            bandwidth.len()
        )));
    }
    let mut free = vec![true; bandwidth.len()];
    let mut servers = Vec::with_capacity(group_count);
    for i in 0..group_count {
        let d = size(i)?;
        let mut best: Option<(usize, f64)> = None;
        for (j, &b) in bandwidth.iter().enumerate() {
            if !free[j] {
                continue;
            }
            let cost = latency(i, j)? + d / b;
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((j, cost));
            }
        }
        let (j, _) = best.expect("a free server remains for every group");
        free[j] = false;
        servers.push(j);
    }
    Ok(Assignment { servers })
}

/// Greedy placement of `groups` using the evaluator's cost terms.
pub fn assign_groups(eval: &Evaluator, groups: &[Vec<usize>]) -> Result<Assignment> {
    let bandwidth: Vec<f64> = eval.scene().edges.iter().map(|e| e.uplink_bw_cloud).collect();
    assign(
        groups.len(),
        &bandwidth,
        |i, j| eval.group_latency(&groups[i], j),
        |i| eval.group_output_size(&groups[i]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub assignment: Assignment,
    pub total_latency: f64,
}

/// Exhaustive search over all injective placements, minimizing `cost`.
/// Among equal costs the lexicographically smallest placement wins.
pub fn oracle_optimal_assignment(
    group_count: usize,
    server_count: usize,
    mut cost: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<OracleResult> {
    if server_count > ORACLE_MAX_SERVERS {
        return Err(Error::Budget(format!(
            "{server_count} servers exceed the oracle limit of {ORACLE_MAX_SERVERS}; reduce the instance"
        )));
    }
    if group_count > server_count {
        return Err(Error::invalid(format!(
            "{group_count} groups but only {server_count} edge servers"
        )));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut current = Vec::with_capacity(group_count);
    let mut used = vec![false; server_count];
    fn walk(
        depth: usize,
        group_count: usize,
        current: &mut Vec<usize>,
        used: &mut [bool],
        cost: &mut dyn FnMut(&[usize]) -> Result<f64>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) -> Result<()> {
        if depth == group_count {
            let c = cost(current)?;
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                *best = Some((current.clone(), c));
            }
            return Ok(());
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                current.push(j);
                walk(depth + 1, group_count, current, used, cost, best)?;
                current.pop();
                used[j] = false;
            }
        }
        Ok(())
    }
    walk(0, group_count, &mut current, &mut used, &mut cost, &mut best)?;
    let (servers, total_latency) = best.ok_or_else(|| Error::invalid("no groups to place"))?;
    Ok(OracleResult {
        assignment: Assignment { servers },
        total_latency,
    })
}

/// Oracle over the evaluator's end-to-end latency.
pub fn oracle_for_groups(eval: &Evaluator, groups: &[Vec<usize>]) -> Result<OracleResult> {
    oracle_optimal_assignment(groups.len(), eval.scene().edges.len(), |servers| {
        Ok(eval.total_latency(groups, servers)?.total)
    })
}
