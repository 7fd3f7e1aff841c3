//! Deterministic map fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cell, OccupancyGrid};
use crate::error::Result;

/// A fully known rectangular room: occupied border, free interior.
pub fn room(width: usize, height: usize, resolution: f64, origin: [f64; 2]) -> Result<OccupancyGrid> {
    let mut g = OccupancyGrid::filled(width, height, resolution, origin, Cell::Free)?;
    for x in 0..width {
        g.set(x, 0, Cell::Occupied);
        g.set(x, height - 1, Cell::Occupied);
    }
    for y in 0..height {
        g.set(0, y, Cell::Occupied);
        g.set(width - 1, y, Cell::Occupied);
    }
    Ok(g)
}

/// Two equal rooms shifted along x so that their overlap degree is
/// `(width - shift) / (2 * width)`.
pub fn shifted_pair(width: usize, height: usize, shift: usize, resolution: f64) -> Result<(OccupancyGrid, OccupancyGrid)> {
    let a = room(width, height, resolution, [0.0, 0.0])?;
    let b = room(width, height, resolution, [shift as f64 * resolution, 0.0])?;
    Ok((a, b))
}

/// `k` heavily overlapping `side x side` robot maps with scattered
/// obstacles and unexplored corners, as produced by robots sweeping one area.
pub fn robot_maps(k: usize, side: usize, seed: u64) -> Result<Vec<OccupancyGrid>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = 0.05;
    (0..k)
        .map(|_| {
            let ox = rng.random_range(0..side / 8 + 1) as f64 * res;
            let oy = rng.random_range(0..side / 8 + 1) as f64 * res;
            let mut g = room(side, side, res, [ox, oy])?;
            for _ in 0..side {
                let (x, y) = (rng.random_range(1..side - 1), rng.random_range(1..side - 1));
                g.set(x, y, Cell::Occupied);
            }
            let corner = rng.random_range(0..side / 4 + 1);
            for y in 0..corner {
                for x in 0..corner {
                    g.set(side - 1 - x, side - 1 - y, Cell::Unknown);
                }
            }
            Ok(g)
        })
        .collect()
}
