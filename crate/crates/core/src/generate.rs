//! Scenario generators for experiments.
//!
//! * [`random_matrix_scenario`] draws a sparse random overlap matrix, for
//!   sweeps over robot counts where geometry does not matter.
//! * [`apartment_scenario`] places robots in zones of a 13 m x 18 m
//!   apartment so that robots sharing a zone overlap heavily and robots in
//!   different zones barely overlap.
//! * [`prototype_scenario`] is the three-robot single-room setup used to
//!   sanity-check the cloud-only pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::CostProfile;
use crate::error::{Error, Result};
use crate::scene::{build_overlap_matrix, coverage_region, EdgeServerSpec, OverlapMatrix, RobotSpec};
use crate::scenario::Scenario;

/// Bytes of serialized local map per square meter of explored area. A
/// 6 m x 5.5 m room then weighs about 1.69 MB.
pub const MAP_BYTES_PER_SQUARE_METER: f64 = 51_200.0;

/// Bytes of one packed sensory frame (one laser scan plus odometry).
pub const FRAME_BYTES: u64 = 2914;

/// Heterogeneous edge servers: a fast server on a fast uplink, a middle
/// one, and a slow server on a slow uplink, repeated with small drift.
pub fn default_edges(count: usize) -> Vec<EdgeServerSpec> {
    const BASE: [(f64, f64); 3] = [(0.8, 2.0e6), (1.0, 1.5e6), (1.3, 1.0e6)];
    (0..count)
        .map(|i| {
            let (scale, cloud) = BASE[i % 3];
            let drift = 1.0 + 0.05 * (i / 3) as f64;
            EdgeServerSpec {
                id: i as u32,
                compute_scale: scale * drift,
                uplink_bw_robot: 2.0e6,
                uplink_bw_cloud: cloud / drift,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixParams {
    /// Probability that a robot pair overlaps at all.
    pub density: f64,
    /// Overlap degrees are uniform in `(low, high]`.
    pub weight_low: f64,
    pub weight_high: f64,
}

impl Default for MatrixParams {
    fn default() -> Self {
        MatrixParams {
            density: 0.3,
            weight_low: 0.0,
            weight_high: 0.5,
        }
    }
}

impl MatrixParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::field("density", "must be in [0, 1]"));
        }
        if !(0.0 <= self.weight_low && self.weight_low < self.weight_high && self.weight_high <= 0.5) {
            return Err(Error::field("weight_range", "need 0 <= low < high <= 0.5"));
        }
        Ok(())
    }
}

pub fn random_overlap_matrix(n: usize, params: &MatrixParams, rng: &mut impl Rng) -> Result<OverlapMatrix> {
    params.validate()?;
    let mut m = OverlapMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(params.density) {
                // mirror [low, high) onto (low, high]
                let w = params.weight_high - rng.random_range(0.0..params.weight_high - params.weight_low);
                m.set(i, j, w);
            }
        }
    }
    Ok(m)
}

/// `robots` copies of `template` (ids renumbered) with a random overlap
/// matrix drawn from `seed`.
pub fn random_matrix_scenario(
    robots: usize,
    edges: Vec<EdgeServerSpec>,
    template: &RobotSpec,
    profile: CostProfile,
    params: &MatrixParams,
    seed: u64,
) -> Result<Scenario> {
    if robots == 0 {
        return Err(Error::field("robots", "robot count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = random_overlap_matrix(robots, params, &mut rng)?;
    let specs = (0..robots)
        .map(|i| RobotSpec {
            id: i as u32,
            ..template.clone()
        })
        .collect();
    let mut s = Scenario::new(specs, edges, profile)?;
    s.scene.overlap_override = Some(matrix);
    s.scene.validate()?;
    Ok(s)
}

/// Robot used as the template for matrix-only scenes.
pub fn template_robot() -> RobotSpec {
    RobotSpec {
        id: 0,
        route: vec![[0.0, 0.0]],
        scan_radius: 2.0,
        raw_frame_bytes: FRAME_BYTES,
        map_bytes: Some(1_690_000),
    }
}

fn explored_bytes(robot: &RobotSpec, resolution: f64) -> Result<u64> {
    let cells = coverage_region(robot, resolution)?.len() as f64;
    Ok((cells * resolution * resolution * MAP_BYTES_PER_SQUARE_METER).round() as u64)
}

/// Freezes rasterized overlaps and map sizes into the scenario so that
/// evaluation no longer depends on geometry.
fn freeze(mut s: Scenario) -> Result<Scenario> {
    let res = s.scene.raster_resolution;
    for r in &mut s.scene.robots {
        r.map_bytes = Some(explored_bytes(r, res)?);
    }
    let m = build_overlap_matrix(&s.scene)?;
    s.scene.overlap_override = Some(m);
    Ok(s)
}

/// Robots spread over `edges` zones of a 13 m x 18 m apartment; robot `i`
/// patrols zone `i mod edges` along three jittered waypoints with a 2 m
/// scan radius. Map sizes follow explored area and the overlap matrix is
/// rasterized at 0.1 m, then stored in the scenario.
pub fn apartment_scenario(robots: usize, edges: usize, profile: CostProfile, seed: u64) -> Result<Scenario> {
    if robots == 0 || edges == 0 {
        return Err(Error::invalid("apartment needs at least one robot and one edge server"));
    }
    const WIDTH: f64 = 13.0;
    const LENGTH: f64 = 18.0;
    const MARGIN: f64 = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zone_len = LENGTH / edges as f64;
    let specs = (0..robots)
        .map(|i| {
            let zone = (i % edges) as f64;
            let y_lo = zone * zone_len + MARGIN.min(zone_len / 4.0);
            let y_hi = (zone + 1.0) * zone_len - MARGIN.min(zone_len / 4.0);
            let route = (0..3)
                .map(|_| {
                    [
                        rng.random_range(MARGIN..WIDTH - MARGIN),
                        rng.random_range(y_lo..y_hi),
                    ]
                })
                .collect();
            RobotSpec {
                id: i as u32,
                route,
                scan_radius: 2.0,
                raw_frame_bytes: FRAME_BYTES,
                map_bytes: None,
            }
        })
        .collect();
    let mut s = Scenario::new(specs, default_edges(edges), profile)?;
    s.scene.raster_resolution = 0.1;
    freeze(s)
}

/// Three robots exploring the same 6 m x 5.5 m room and uploading to one
/// cloud, matching the single-room prototype.
pub fn prototype_scenario(profile: CostProfile) -> Result<Scenario> {
    let route = |y: f64| vec![[1.0, y], [5.0, y]];
    let specs = [1.5, 2.75, 4.0]
        .into_iter()
        .enumerate()
        .map(|(i, y)| RobotSpec {
            id: i as u32,
            route: route(y),
            scan_radius: 3.0,
            raw_frame_bytes: FRAME_BYTES,
            map_bytes: Some(1_690_000),
        })
        .collect();
    let mut s = Scenario::new(specs, default_edges(3), profile)?;
    s.scene.raster_resolution = 0.1;
    let m = build_overlap_matrix(&s.scene)?;
    s.scene.overlap_override = Some(m);
    Ok(s)
}
