//! Physical scenario: robots sweeping circular scan footprints along routes,
//! heterogeneous edge servers, and the pairwise overlap degrees derived from
//! rasterized coverage.

use serde::{Deserialize, Serialize};

use crate::cost::FusionLatencyModel;
use crate::error::{Error, Result};

/// A planar point in meters.
pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub id: u32,
    /// Waypoints of the robot's route. A single point is a stationary robot.
    pub route: Vec<Point>,
    /// Radius of the 360 degree scan footprint, in meters.
    pub scan_radius: f64,
    /// Size of one packed sensory payload sent to an edge server.
    pub raw_frame_bytes: u64,
    /// Size of the robot's local map. When absent, the known-cell count of
    /// the rasterized coverage region is used (one byte per cell).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeServerSpec {
    pub id: u32,
    /// Multiplier applied to the fusion latency model on this server.
    pub compute_scale: f64,
    /// Robot to edge link rate, bytes/sec.
    pub uplink_bw_robot: f64,
    /// Edge to cloud link rate, bytes/sec.
    pub uplink_bw_cloud: f64,
}

/// Symmetric matrix of pairwise overlap degrees with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    n: usize,
    data: Vec<f64>,
}

impl OverlapMatrix {
    pub fn zeros(n: usize) -> Self {
        OverlapMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from row-major rows, checking shape, symmetry, zero
    /// diagonal and the `[0, 0.5]` range of overlap degrees.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = OverlapMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::field(
                    format!("overlap_matrix[{i}]"),
                    format!("expected {n} columns, found {}", row.len()),
                ));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                let at = || format!("overlap_matrix[{i}][{j}]");
                if !w.is_finite() || !(0.0..=0.5).contains(&w) {
                    return Err(Error::field(at(), format!("degree {w} outside [0, 0.5]")));
                }
                if i == j && w != 0.0 {
                    return Err(Error::field(at(), "diagonal must be 0"));
                }
                if (w - rows[j][i]).abs() > 1e-9 {
                    return Err(Error::field(at(), "matrix is not symmetric"));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    /// Sets both `(u, v)` and `(v, u)`.
    pub fn set(&mut self, u: usize, v: usize, w: f64) {
        self.data[u * self.n + v] = w;
        self.data[v * self.n + u] = w;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// The world being scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub robots: Vec<RobotSpec>,
    pub edges: Vec<EdgeServerSpec>,
    pub cloud_fusion_model: FusionLatencyModel,
    /// Meters per raster cell used for coverage rasterization.
    pub raster_resolution: f64,
    /// Directly supplied overlap degrees; bypasses geometry when present.
    pub overlap_override: Option<OverlapMatrix>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.robots.is_empty() {
            return Err(Error::field("robots", "at least one robot is required"));
        }
        if self.edges.is_empty() {
            return Err(Error::field("edges", "at least one edge server is required"));
        }
        if !(self.raster_resolution > 0.0 && self.raster_resolution.is_finite()) {
            return Err(Error::field("raster_resolution", "must be > 0"));
        }
        for (i, r) in self.robots.iter().enumerate() {
            let at = |f: &str| format!("robots[{i}].{f}");
            if r.route.is_empty() {
                return Err(Error::field(at("route"), "route must contain at least one point"));
            }
            if r.route.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::field(at("route"), "coordinates must be finite"));
            }
            if !(r.scan_radius > 0.0 && r.scan_radius.is_finite()) {
                return Err(Error::field(at("scan_radius"), "must be > 0"));
            }
            if r.raw_frame_bytes == 0 {
                return Err(Error::field(at("raw_frame_bytes"), "must be > 0"));
            }
            if r.map_bytes == Some(0) {
                return Err(Error::field(at("map_bytes"), "must be > 0"));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let at = |f: &str| format!("edges[{i}].{f}");
            let positive = |v: f64| v > 0.0 && v.is_finite();
            if !positive(e.compute_scale) {
                return Err(Error::field(at("compute_scale"), "must be > 0"));
            }
            if !positive(e.uplink_bw_robot) {
                return Err(Error::field(at("uplink_bw_robot"), "must be > 0"));
            }
            if !positive(e.uplink_bw_cloud) {
                return Err(Error::field(at("uplink_bw_cloud"), "must be > 0"));
            }
        }
        if let Some(m) = &self.overlap_override {
            if m.len() != self.robots.len() {
                return Err(Error::field(
                    "overlap_matrix",
                    format!("{}x{} matrix for {} robots", m.len(), m.len(), self.robots.len()),
                ));
            }
        }
        self.cloud_fusion_model.validate()?;
        Ok(())
    }

    /// Local map size per robot, in bytes.
    pub fn map_sizes(&self) -> Result<Vec<f64>> {
        self.robots
            .iter()
            .map(|r| match r.map_bytes {
                Some(b) => Ok(b as f64),
                None => Ok(coverage_region(r, self.raster_resolution)?.len() as f64),
            })
            .collect()
    }
}

/// Sorted, duplicate-free set of integer raster cells `(ix, iy)`; cell
/// `(ix, iy)` spans `[ix*res, (ix+1)*res) x [iy*res, (iy+1)*res)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSet {
    cells: Vec<(i64, i64)>,
}

impl CellSet {
    pub fn from_cells(mut cells: Vec<(i64, i64)>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        CellSet { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: (i64, i64)) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(i64, i64)> {
        self.cells.iter()
    }

    /// Size of the intersection, by a linear merge of the sorted cell lists.
    pub fn intersection_len(&self, other: &CellSet) -> usize {
        let (a, b) = (&self.cells, &other.cells);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Points along the route spaced no further apart than `step`, including
/// every waypoint.
fn sample_route(route: &[Point], step: f64) -> Vec<Point> {
    let mut out = vec![route[0]];
    for pair in route.windows(2) {
        let ([x0, y0], [x1, y1]) = (pair[0], pair[1]);
        let len = (x1 - x0).hypot(y1 - y0);
        let n = (len / step).ceil().max(1.0) as usize;
        for k in 1..=n {
            let t = k as f64 / n as f64;
            out.push([x0 + t * (x1 - x0), y0 + t * (y1 - y0)]);
        }
    }
    out
}

/// Raster cells whose centers lie within the scan radius of the route,
/// with the route sampled every `scan_radius / 2`.
pub fn coverage_region(robot: &RobotSpec, resolution: f64) -> Result<CellSet> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("raster resolution must be > 0"));
    }
    let r = robot.scan_radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("robot {}: scan radius must be > 0", robot.id)));
    }
    if robot.route.is_empty() {
        return Err(Error::invalid(format!("robot {}: empty route", robot.id)));
    }
    let r2 = r * r;
    let mut cells = Vec::new();
    for [cx, cy] in sample_route(&robot.route, r / 2.0) {
        let ix0 = ((cx - r) / resolution).floor() as i64 - 1;
        let ix1 = ((cx + r) / resolution).ceil() as i64 + 1;
        let iy0 = ((cy - r) / resolution).floor() as i64 - 1;
        let iy1 = ((cy + r) / resolution).ceil() as i64 + 1;
        for ix in ix0..=ix1 {
            let dx = (ix as f64 + 0.5) * resolution - cx;
            for iy in iy0..=iy1 {
                let dy = (iy as f64 + 0.5) * resolution - cy;
                if dx * dx + dy * dy <= r2 {
                    cells.push((ix, iy));
                }
            }
        }
    }
    Ok(CellSet::from_cells(cells))
}

/// `|a ∩ b| / (|a| + |b|)`, in `[0, 0.5]`.
pub fn overlap_degree(a: &CellSet, b: &CellSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("overlap degree of an empty region is undefined"));
    }
    Ok(a.intersection_len(b) as f64 / (a.len() + b.len()) as f64)
}

/// Pairwise overlap degrees for every robot pair. Uses the scene's supplied
/// matrix when present, otherwise rasterizes each robot's coverage.
pub fn build_overlap_matrix(scene: &Scene) -> Result<OverlapMatrix> {
    if let Some(m) = &scene.overlap_override {
        return Ok(m.clone());
    }
    let regions = scene
        .robots
        .iter()
        .map(|r| coverage_region(r, scene.raster_resolution))
        .collect::<Result<Vec<_>>>()?;
    let n = regions.len();
    let mut m = OverlapMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            m.set(i, j, overlap_degree(&regions[i], &regions[j])?);
        }
    }
    Ok(m)
}
