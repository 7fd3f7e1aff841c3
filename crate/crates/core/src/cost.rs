//! Latency and size terms of the robot → edge → cloud pipeline.
//!
//! A robot's map is ready on its edge server after packing, transfer and
//! frame transformation. An edge map is ready once its slowest robot map has
//! arrived and the group has been fused. The global map is ready once the
//! slowest edge map has been uploaded and the cloud has fused all of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{build_overlap_matrix, EdgeServerSpec, OverlapMatrix, RobotSpec, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Seconds to pack one robot's sensory payload.
    pub t_pack: f64,
    /// Seconds of frame transformation on the edge per robot.
    pub t_frame: f64,
    /// Robot → edge link rate, bytes/sec.
    pub robot_uplink_bw: f64,
    /// On-robot SLAM time in the cloud-only pipeline.
    pub local_slam_latency: f64,
    /// Robot → cloud link rate in the cloud-only pipeline, bytes/sec.
    pub cloud_uplink_bw_robot: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_pack", self.t_pack),
            ("t_frame", self.t_frame),
            ("local_slam_latency", self.local_slam_latency),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::field(name, "must be a finite time >= 0"));
            }
        }
        for (name, v) in [
            ("robot_uplink_bw", self.robot_uplink_bw),
            ("cloud_uplink_bw_robot", self.cloud_uplink_bw_robot),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::field(name, "bandwidth must be > 0"));
            }
        }
        Ok(())
    }
}

/// Fusion time for `k` input maps: `alpha*k^2 + beta*k + gamma` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionLatencyModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FusionLatencyModel {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let m = FusionLatencyModel { alpha, beta, gamma };
        m.validate()?;
        Ok(m)
    }

    fn raw(&self, k: f64) -> f64 {
        self.alpha * k * k + self.beta * k + self.gamma
    }

    /// Requires `alpha >= 0` and a non-negative prediction for every `k >= 1`.
    pub fn validate(&self) -> Result<()> {
        if ![self.alpha, self.beta, self.gamma].iter().all(|c| c.is_finite()) {
            return Err(Error::field("fusion", "coefficients must be finite"));
        }
        if self.alpha < 0.0 {
            return Err(Error::field("fusion.alpha", "quadratic coefficient must be >= 0"));
        }
        let min = if self.alpha > 0.0 {
            let vertex = (-self.beta / (2.0 * self.alpha)).max(1.0);
            self.raw(vertex.floor().max(1.0)).min(self.raw(vertex.ceil()))
        } else if self.beta < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.raw(1.0)
        };
        if min < 0.0 {
            return Err(Error::field("fusion", "predicted latency is negative for some map count"));
        }
        Ok(())
    }

    /// Same polynomial family with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FusionLatencyModel {
            alpha: self.alpha * factor,
            beta: self.beta * factor,
            gamma: self.gamma * factor,
        }
    }
}

/// Pairwise map comparisons performed when fusing `k` maps.
pub fn pairwise_checks(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

pub fn predict_fusion_latency(m: &FusionLatencyModel, k: usize, compute_scale: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("fusion of zero maps"));
    }
    Ok(compute_scale * m.raw(k as f64))
}

/// Named bundle of link/compute parameters with edge and cloud fusion models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostProfile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(flatten)]
    pub params: CostParams,
    pub edge_fusion: FusionLatencyModel,
    pub cloud_fusion: FusionLatencyModel,
}

impl CostProfile {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.edge_fusion.validate()?;
        self.cloud_fusion.validate()
    }
}

/// Seconds for one robot's payload to become a map input on server `e`.
pub fn robot_map_latency(r: &RobotSpec, e: &EdgeServerSpec, p: &CostParams) -> f64 {
    let bw = p.robot_uplink_bw.min(e.uplink_bw_robot);
    p.t_pack + r.raw_frame_bytes as f64 / bw + p.t_frame
}

/// Fused size of a group's maps by inclusion–exclusion truncated after the
/// pairwise terms. Each pair's shared bytes follow from the overlap degree,
/// `w(i,j) * (size_i + size_j)`. The result is clamped to
/// `[max single size, sum of sizes]`.
pub fn estimate_group_output_size(group: &[usize], sizes: &[f64], w: &OverlapMatrix) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::invalid("output size of an empty group"));
    }
    if let Some(&r) = group.iter().find(|&&r| r >= sizes.len() || r >= w.len()) {
        return Err(Error::invalid(format!("robot {r} has no size or overlap entry")));
    }
    let total: f64 = group.iter().map(|&r| sizes[r]).sum();
    let largest = group.iter().map(|&r| sizes[r]).fold(f64::MIN, f64::max);
    let mut shared = 0.0;
    for (a, &i) in group.iter().enumerate() {
        for &j in &group[a + 1..] {
            shared += w.get(i, j) * (sizes[i] + sizes[j]);
        }
    }
    Ok((total - shared).clamp(largest, total))
}

/// Edge-map completion time for `robots` fused on server `e`.
pub fn edge_latency(robots: &[&RobotSpec], e: &EdgeServerSpec, p: &CostParams, m: &FusionLatencyModel) -> Result<f64> {
    if robots.is_empty() {
        return Err(Error::invalid("edge latency of an empty group"));
    }
    let ready = robots.iter().map(|r| robot_map_latency(r, e, p)).fold(f64::MIN, f64::max);
    Ok(ready + predict_fusion_latency(m, robots.len(), e.compute_scale)?)
}

/// One parallel branch feeding the cloud: an edge group, or a single robot
/// in the cloud-only pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLatency {
    pub robots: Vec<usize>,
    /// Index of the edge server, absent for the cloud-only pipeline.
    pub server: Option<usize>,
    /// Time until the last input map is available for fusion.
    pub ready: f64,
    pub fusion: f64,
    pub upload_bytes: f64,
    pub upload: f64,
}

impl PathLatency {
    pub fn arrival(&self) -> f64 {
        self.ready + self.fusion + self.upload
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyBreakdown {
    pub paths: Vec<PathLatency>,
    pub cloud_fusion: f64,
    pub total: f64,
}

impl LatencyBreakdown {
    fn compose(paths: Vec<PathLatency>, cloud_fusion: f64) -> Self {
        let slowest = paths.iter().map(PathLatency::arrival).fold(0.0, f64::max);
        LatencyBreakdown {
            paths,
            cloud_fusion,
            total: slowest + cloud_fusion,
        }
    }

    fn stage_max(&self, f: impl Fn(&PathLatency) -> f64) -> f64 {
        self.paths.iter().map(f).fold(0.0, f64::max)
    }

    pub fn max_ready(&self) -> f64 {
        self.stage_max(|p| p.ready)
    }

    pub fn max_fusion(&self) -> f64 {
        self.stage_max(|p| p.fusion)
    }

    pub fn max_upload(&self) -> f64 {
        self.stage_max(|p| p.upload)
    }

    pub fn total_upload_bytes(&self) -> f64 {
        self.paths.iter().map(|p| p.upload_bytes).sum()
    }
}

/// Scene plus cost profile with the derived overlap matrix and map sizes,
/// evaluating every latency term for candidate schedules.
#[derive(Debug, Clone)]
pub struct Evaluator {
    scene: Scene,
    profile: CostProfile,
    overlap: OverlapMatrix,
    map_sizes: Vec<f64>,
}

impl Evaluator {
    pub fn new(scene: &Scene, profile: &CostProfile) -> Result<Self> {
        scene.validate()?;
        profile.validate()?;
        let overlap = build_overlap_matrix(scene)?;
        Self::with_overlap(scene, profile, overlap)
    }

    /// Uses a precomputed overlap matrix instead of rasterizing the scene.
    pub fn with_overlap(scene: &Scene, profile: &CostProfile, overlap: OverlapMatrix) -> Result<Self> {
        if overlap.len() != scene.robots.len() {
            return Err(Error::invalid("overlap matrix does not match robot count"));
        }
        Ok(Evaluator {
            map_sizes: scene.map_sizes()?,
            scene: scene.clone(),
            profile: profile.clone(),
            overlap,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn profile(&self) -> &CostProfile {
        &self.profile
    }

    pub fn overlap(&self) -> &OverlapMatrix {
        &self.overlap
    }

    pub fn map_sizes(&self) -> &[f64] {
        &self.map_sizes
    }

    fn robots(&self, group: &[usize]) -> Result<Vec<&RobotSpec>> {
        group
            .iter()
            .map(|&r| {
                self.scene
                    .robots
                    .get(r)
                    .ok_or_else(|| Error::invalid(format!("robot index {r} out of range")))
            })
            .collect()
    }

    fn server(&self, server: usize) -> Result<&EdgeServerSpec> {
        self.scene
            .edges
            .get(server)
            .ok_or_else(|| Error::invalid(format!("server index {server} out of range")))
    }

    /// Computing latency of a group on a server, `L_j(P_i)`.
    pub fn group_latency(&self, group: &[usize], server: usize) -> Result<f64> {
        edge_latency(
            &self.robots(group)?,
            self.server(server)?,
            &self.profile.params,
            &self.profile.edge_fusion,
        )
    }

    /// Estimated edge-map size of a group, `D(P_i)`.
    pub fn group_output_size(&self, group: &[usize]) -> Result<f64> {
        estimate_group_output_size(group, &self.map_sizes, &self.overlap)
    }

    pub fn edge_to_cloud_bw(&self, server: usize) -> Result<f64> {
        Ok(self.server(server)?.uplink_bw_cloud)
    }

    fn path(&self, group: &[usize], server: usize) -> Result<PathLatency> {
        let e = self.server(server)?;
        let robots = self.robots(group)?;
        if robots.is_empty() {
            return Err(Error::invalid("empty group"));
        }
        let ready = robots
            .iter()
            .map(|r| robot_map_latency(r, e, &self.profile.params))
            .fold(f64::MIN, f64::max);
        let fusion = predict_fusion_latency(&self.profile.edge_fusion, group.len(), e.compute_scale)?;
        let upload_bytes = self.group_output_size(group)?;
        Ok(PathLatency {
            robots: group.to_vec(),
            server: Some(server),
            ready,
            fusion,
            upload_bytes,
            upload: upload_bytes / e.uplink_bw_cloud,
        })
    }

    /// End-to-end latency of placing `groups[i]` on server `servers[i]`.
    pub fn total_latency(&self, groups: &[Vec<usize>], servers: &[usize]) -> Result<LatencyBreakdown> {
        if groups.is_empty() {
            return Err(Error::invalid("no groups to evaluate"));
        }
        if servers.len() != groups.len() {
            return Err(Error::invalid(format!(
                "{} groups but {} server assignments",
                groups.len(),
                servers.len()
            )));
        }
        let mut used = vec![false; self.scene.edges.len()];
        for &s in servers {
            self.server(s)?;
            if std::mem::replace(&mut used[s], true) {
                return Err(Error::invalid(format!("server {s} assigned to two groups")));
            }
        }
        let paths = groups
            .iter()
            .zip(servers)
            .map(|(g, &s)| self.path(g, s))
            .collect::<Result<Vec<_>>>()?;
        let cloud = predict_fusion_latency(&self.scene.cloud_fusion_model, groups.len(), 1.0)?;
        Ok(LatencyBreakdown::compose(paths, cloud))
    }

    /// Cloud-only pipeline: every robot runs SLAM locally, uploads its map
    /// and the cloud fuses all of them at once.
    pub fn cloud_baseline(&self) -> Result<LatencyBreakdown> {
        let p = &self.profile.params;
        let paths = self
            .map_sizes
            .iter()
            .enumerate()
            .map(|(r, &bytes)| PathLatency {
                robots: vec![r],
                server: None,
                ready: p.local_slam_latency,
                fusion: 0.0,
                upload_bytes: bytes,
                upload: bytes / p.cloud_uplink_bw_robot,
            })
            .collect();
        let cloud = predict_fusion_latency(&self.scene.cloud_fusion_model, self.map_sizes.len(), 1.0)?;
        Ok(LatencyBreakdown::compose(paths, cloud))
    }
}
