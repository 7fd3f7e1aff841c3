//! Tri-state occupancy grids and pose-aligned map fusion.
//!
//! Maps carry world-frame origins, so fusion needs no alignment search:
//! every pair is checked for shared known cells, overlapping maps are
//! joined into connected components, and all maps are composed into the
//! union bounding box with OCCUPIED > FREE > UNKNOWN precedence. Maps that
//! overlap nothing are still placed in the shared frame.

mod pgm;
mod profiling;
pub mod synthetic;

pub use pgm::{read_map, read_pgm, write_map, write_pgm, MapMetadata};
pub use profiling::{fit_quadratic, profile_fusion, FusionProfile, QuadraticFit};

use serde::Serialize;

use crate::error::{Error, Result};

/// Cell state, ordered by fusion precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Cell {
    Unknown,
    Free,
    Occupied,
}

impl Cell {
    pub fn is_known(self) -> bool {
        self != Cell::Unknown
    }
}

/// Row-major grid; cell `(x, y)` is at index `y * width + x` and covers
/// world `[origin + (x, y) * resolution, origin + (x + 1, y + 1) * resolution)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: [f64; 2],
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: [f64; 2], cells: Vec<Cell>) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::invalid("grid resolution must be > 0"));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        if width.checked_mul(height) != Some(cells.len()) {
            return Err(Error::invalid(format!(
                "{width}x{height} grid with {} cells",
                cells.len()
            )));
        }
        Ok(OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, resolution: f64, origin: [f64; 2], cell: Cell) -> Result<Self> {
        Self::new(width, height, resolution, origin, vec![cell; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        self.cells[y * self.width + x] = cell;
    }

    pub fn known_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.is_known()).count()
    }
}

/// Size metric for maps: one byte per known cell.
pub fn known_size_bytes(m: &OccupancyGrid) -> u64 {
    m.known_cells() as u64
}

/// Integer cell offsets of each grid relative to the first, after checking
/// that all grids share a resolution and a cell lattice.
fn lattice_offsets(maps: &[&OccupancyGrid]) -> Result<Vec<(i64, i64)>> {
    let first = maps.first().ok_or_else(|| Error::invalid("no maps given"))?;
    let res = first.resolution;
    maps.iter()
        .enumerate()
        .map(|(i, m)| {
            if (m.resolution - res).abs() > 1e-9 * res {
                return Err(Error::invalid(format!(
                    "map {i} has resolution {} but map 0 has {res}",
                    m.resolution
                )));
            }
            let mut off = [0i64; 2];
            for axis in 0..2 {
                let f = (m.origin[axis] - first.origin[axis]) / res;
                let r = f.round();
                if (f - r).abs() > 1e-6 {
                    return Err(Error::invalid(format!("map {i} origin is not on the shared cell lattice")));
                }
                off[axis] = r as i64;
            }
            Ok((off[0], off[1]))
        })
        .collect()
}

/// Counts cells known in both grids, given `b`'s offset relative to `a`.
fn shared_known(a: &OccupancyGrid, b: &OccupancyGrid, (dx, dy): (i64, i64)) -> usize {
    let x0 = dx.max(0);
    let y0 = dy.max(0);
    let x1 = (a.width as i64).min(dx + b.width as i64);
    let y1 = (a.height as i64).min(dy + b.height as i64);
    if x0 >= x1 || y0 >= y1 {
        return 0;
    }
    let mut n = 0;
    for y in y0..y1 {
        let ra = &a.cells[(y as usize) * a.width..][..a.width];
        let rb = &b.cells[((y - dy) as usize) * b.width..][..b.width];
        for x in x0..x1 {
            if ra[x as usize].is_known() && rb[(x - dx) as usize].is_known() {
                n += 1;
            }
        }
    }
    n
}

/// Number of world cells known in both maps.
pub fn intersection_known(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<usize> {
    let off = lattice_offsets(&[a, b])?;
    Ok(shared_known(a, b, off[1]))
}

/// Shared known cells over the sum of both maps' known cells.
pub fn measured_overlap_degree(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<f64> {
    let shared = intersection_known(a, b)?;
    let total = a.known_cells() + b.known_cells();
    if total == 0 {
        return Err(Error::invalid("overlap degree of two maps without known cells"));
    }
    Ok(shared as f64 / total as f64)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub grid: OccupancyGrid,
    /// Pairwise overlap checks performed, `k(k-1)/2` for `k` maps.
    pub pairwise_checks: usize,
    /// Groups of input indices connected by shared known cells.
    pub components: Vec<Vec<usize>>,
}

pub fn compose(maps: &[OccupancyGrid]) -> Result<OccupancyGrid> {
    compose_detailed(maps).map(|c| c.grid)
}

pub fn compose_detailed(maps: &[OccupancyGrid]) -> Result<Composition> {
    let refs: Vec<&OccupancyGrid> = maps.iter().collect();
    let offsets = lattice_offsets(&refs)?;
    let k = maps.len();

    let mut pairwise_checks = 0;
    let mut sets = DisjointSet::new(k);
    for i in 0..k {
        for j in (i + 1)..k {
            pairwise_checks += 1;
            let rel = (offsets[j].0 - offsets[i].0, offsets[j].1 - offsets[i].1);
            if shared_known(&maps[i], &maps[j], rel) > 0 {
                sets.union(i, j);
            }
        }
    }
    let mut roots: Vec<(usize, usize)> = (0..k).map(|i| (sets.find(i), i)).collect();
    roots.sort();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for (idx, &(root, i)) in roots.iter().enumerate() {
        if idx == 0 || roots[idx - 1].0 != root {
            components.push(Vec::new());
        }
        components.last_mut().expect("pushed above").push(i);
    }
    components.sort();

    let min_x = offsets.iter().map(|o| o.0).min().expect("non-empty");
    let min_y = offsets.iter().map(|o| o.1).min().expect("non-empty");
    let max_x = offsets.iter().zip(maps).map(|(o, m)| o.0 + m.width as i64).max().expect("non-empty");
    let max_y = offsets.iter().zip(maps).map(|(o, m)| o.1 + m.height as i64).max().expect("non-empty");
    // reuse an input's exact origin coordinate so identity composition is bit-exact
    let pick = |axis: usize, target: i64| {
        maps.iter()
            .zip(&offsets)
            .filter(|(_, o)| if axis == 0 { o.0 == target } else { o.1 == target })
            .map(|(m, _)| m.origin[axis])
            .fold(f64::INFINITY, f64::min)
    };
    let origin = [pick(0, min_x), pick(1, min_y)];
    let width = (max_x - min_x) as usize;
    let height = (max_y - min_y) as usize;
    let mut cells = vec![Cell::Unknown; width * height];
    for (m, &(ox, oy)) in maps.iter().zip(&offsets) {
        let (bx, by) = ((ox - min_x) as usize, (oy - min_y) as usize);
        for y in 0..m.height {
            let src = &m.cells[y * m.width..][..m.width];
            let dst = &mut cells[(by + y) * width + bx..][..m.width];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = (*d).max(s);
            }
        }
    }
    Ok(Composition {
        grid: OccupancyGrid::new(width, height, maps[0].resolution, origin, cells)?,
        pairwise_checks,
        components,
    })
}
