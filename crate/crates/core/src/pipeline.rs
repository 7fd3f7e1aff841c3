//! End-to-end scheduling policies evaluated under one shared cost model.
//!
//! * `recslam`: overlap graph, balanced grouping, tabu refinement and
//!   resource-aware offloading.
//! * `greedy`: random balanced grouping improved by one ordered pass of
//!   overlap-increasing swaps, then the same offloading step.
//! * `random`: random balanced grouping on a random set of servers.
//! * `cloud`: no edge tier; every robot runs SLAM locally and uploads its
//!   map to the cloud.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::{Evaluator, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::graph::{Grouping, OverlapGraph};
use crate::grouping::{initial_grouping_with, GroupingConfig};
use crate::offload::{assign_groups, Assignment};
use crate::tabu::{optimize, TabuConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    RecSlam,
    Greedy,
    Random,
    Cloud,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::RecSlam, Policy::Greedy, Policy::Random, Policy::Cloud];

    pub fn name(self) -> &'static str {
        match self {
            Policy::RecSlam => "recslam",
            Policy::Greedy => "greedy",
            Policy::Random => "random",
            Policy::Cloud => "cloud",
        }
    }

    /// Whether the result depends on the seed. Unseeded policies run once.
    pub fn is_seeded(self) -> bool {
        !matches!(self, Policy::Cloud)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::field("policy", format!("unknown policy `{s}` (expected recslam, greedy, random or cloud)")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub tabu: TabuConfig,
    /// Skip tabu refinement and keep the initial grouping.
    pub use_tabu: bool,
    pub grouping: GroupingConfig,
    /// Ordered passes of the greedy baseline.
    pub greedy_passes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tabu: TabuConfig::default(),
            use_tabu: true,
            grouping: GroupingConfig::default(),
            greedy_passes: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleResult {
    pub policy: Policy,
    /// `None` for policies that ignore the seed.
    pub seed: Option<u64>,
    /// Robot indices per group; one singleton per robot for `cloud`.
    pub groups: Vec<Vec<usize>>,
    /// Server per group; empty for `cloud`.
    pub assignment: Vec<usize>,
    pub breakdown: LatencyBreakdown,
    pub total_latency: f64,
    /// Weight of overlap links cut by the grouping; `None` for `cloud`.
    pub fitness: Option<f64>,
    /// Seconds spent in grouping and offloading, excluding evaluation.
    pub sched_wall: f64,
}

/// Groups formed: one per edge server, or one per robot when servers
/// outnumber robots.
pub fn group_count(eval: &Evaluator) -> usize {
    eval.scene().edges.len().min(eval.scene().robots.len())
}

fn finish(
    eval: &Evaluator,
    graph: &OverlapGraph,
    policy: Policy,
    seed: Option<u64>,
    grouping: &Grouping,
    assignment: Assignment,
    sched_wall: f64,
) -> Result<ScheduleResult> {
    let groups = grouping.groups();
    let breakdown = eval.total_latency(&groups, &assignment.servers)?;
    Ok(ScheduleResult {
        policy,
        seed,
        total_latency: breakdown.total,
        fitness: Some(graph.fitness(grouping)?),
        groups,
        assignment: assignment.servers,
        breakdown,
        sched_wall,
    })
}

pub fn run_recslam(eval: &Evaluator, cfg: &PipelineConfig, seed: u64) -> Result<ScheduleResult> {
    let start = Instant::now();
    let graph = OverlapGraph::from_matrix(eval.overlap());
    let p0 = initial_grouping_with(&graph, group_count(eval), cfg.grouping)?;
    let grouping = if cfg.use_tabu {
        let tabu = TabuConfig { rng_seed: seed, ..cfg.tabu };
        optimize(&graph, &p0, &tabu)?
    } else {
        p0
    };
    let assignment = assign_groups(eval, &grouping.groups())?;
    let wall = start.elapsed().as_secs_f64();
    finish(eval, &graph, Policy::RecSlam, Some(seed), &grouping, assignment, wall)
}

/// Shuffled robots dealt round-robin into `n` groups.
fn random_balanced(robots: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Grouping> {
    let mut order: Vec<usize> = (0..robots).collect();
    order.shuffle(rng);
    let mut assignment = vec![0; robots];
    for (k, &v) in order.iter().enumerate() {
        assignment[v] = k % n;
    }
    Grouping::new(assignment, n)
}

pub fn run_random_baseline(eval: &Evaluator, seed: u64) -> Result<ScheduleResult> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group_count(eval);
    let grouping = random_balanced(eval.scene().robots.len(), n, &mut rng)?;
    let mut servers: Vec<usize> = (0..eval.scene().edges.len()).collect();
    servers.shuffle(&mut rng);
    servers.truncate(n);
    let wall = start.elapsed().as_secs_f64();
    let graph = OverlapGraph::from_matrix(eval.overlap());
    finish(eval, &graph, Policy::Random, Some(seed), &grouping, Assignment { servers }, wall)
}

/// Ordered swap passes: each robot `v` in turn looks for the robot `u` in
/// another group whose place would give `v` the most overlap with its new
/// group-mates, and swaps when that beats `v`'s overlap in its own group.
pub fn greedy_swaps(graph: &OverlapGraph, p: &mut Grouping, passes: usize) {
    let n = graph.vertex_count();
    let groups = p.group_count();
    for _ in 0..passes {
        for v in 0..n {
            let mut to_group = vec![0.0; groups];
            for &(x, w) in graph.links(v) {
                to_group[p.group_of(x)] += w;
            }
            let home = p.group_of(v);
            let mut best: Option<(f64, usize)> = None;
            for u in 0..n {
                let b = p.group_of(u);
                if b == home {
                    continue;
                }
                let score = to_group[b] - graph.weight(u, v);
                if best.is_none_or(|(s, _)| score > s + 1e-12) {
                    best = Some((score, u));
                }
            }
            if let Some((score, u)) = best {
                if score > to_group[home] + 1e-12 {
                    p.swap(u, v);
                }
            }
        }
    }
}

pub fn run_greedy_baseline(eval: &Evaluator, cfg: &PipelineConfig, seed: u64) -> Result<ScheduleResult> {
    let start = Instant::now();
    let graph = OverlapGraph::from_matrix(eval.overlap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grouping = random_balanced(eval.scene().robots.len(), group_count(eval), &mut rng)?;
    greedy_swaps(&graph, &mut grouping, cfg.greedy_passes);
    let assignment = assign_groups(eval, &grouping.groups())?;
    let wall = start.elapsed().as_secs_f64();
    finish(eval, &graph, Policy::Greedy, Some(seed), &grouping, assignment, wall)
}

pub fn run_cloud_baseline(eval: &Evaluator) -> Result<ScheduleResult> {
    let breakdown = eval.cloud_baseline()?;
    Ok(ScheduleResult {
        policy: Policy::Cloud,
        seed: None,
        groups: (0..eval.scene().robots.len()).map(|r| vec![r]).collect(),
        assignment: Vec::new(),
        total_latency: breakdown.total,
        breakdown,
        fitness: None,
        sched_wall: 0.0,
    })
}

pub fn run_policy(eval: &Evaluator, policy: Policy, cfg: &PipelineConfig, seed: u64) -> Result<ScheduleResult> {
    match policy {
        Policy::RecSlam => run_recslam(eval, cfg, seed),
        Policy::Greedy => run_greedy_baseline(eval, cfg, seed),
        Policy::Random => run_random_baseline(eval, seed),
        Policy::Cloud => run_cloud_baseline(eval),
    }
}

/// Recomputes the total latency from the stored grouping and assignment.
pub fn verify(eval: &Evaluator, r: &ScheduleResult) -> Result<()> {
    let again = match r.policy {
        Policy::Cloud => eval.cloud_baseline()?,
        _ => eval.total_latency(&r.groups, &r.assignment)?,
    };
    if again.total != r.total_latency || again != r.breakdown {
        return Err(Error::Internal(format!(
            "{} seed {:?}: reported {} but recomputed {}",
            r.policy, r.seed, r.total_latency, again.total
        )));
    }
    Ok(())
}
