//! Binary PGM (P5) map images with a key/value sidecar, following the
//! usual occupancy-map convention: 0 occupied, 254/255 free, 205 unknown.
//! The first image row is the top of the map (highest y).

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Cell, OccupancyGrid};
use crate::error::{Error, Result};

const OCCUPIED: u8 = 0;
const UNKNOWN: u8 = 205;
const FREE: u8 = 254;

fn encode(c: Cell) -> u8 {
    match c {
        Cell::Occupied => OCCUPIED,
        Cell::Free => FREE,
        Cell::Unknown => UNKNOWN,
    }
}

fn decode(v: u8) -> Result<Cell> {
    match v {
        OCCUPIED => Ok(Cell::Occupied),
        UNKNOWN => Ok(Cell::Unknown),
        254 | 255 => Ok(Cell::Free),
        other => Err(Error::Format(format!("pixel value {other} is not 0, 205, 254 or 255"))),
    }
}

pub fn write_pgm(grid: &OccupancyGrid, mut out: impl Write) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", grid.width(), grid.height())?;
    let mut row = vec![0u8; grid.width()];
    for y in (0..grid.height()).rev() {
        for (x, px) in row.iter_mut().enumerate() {
            *px = encode(grid.get(x, y));
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// Parses a P5 image into `(width, height, cells)` with cells in grid order.
pub fn read_pgm(mut input: impl Read) -> Result<(usize, usize, Vec<Cell>)> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Format(format!("reading image: {e}")))?;
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Format("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::Format("not a binary PGM (missing P5 magic)".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| Error::Format(format!("bad {what} in header")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("maxval {maxval}, expected 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != expected {
        return Err(Error::Format(format!(
            "raster has {} bytes, expected {expected}",
            data.len()
        )));
    }
    let mut cells = vec![Cell::Unknown; expected];
    for (row, chunk) in data.chunks(width.max(1)).enumerate().take(height) {
        let y = height - 1 - row;
        for (x, &v) in chunk.iter().enumerate() {
            cells[y * width + x] = decode(v)?;
        }
    }
    Ok((width, height, cells))
}

/// Sidecar metadata stored next to a map image.
#[derive(Debug, Clone, PartialEq)]
pub struct MapMetadata {
    pub image: String,
    pub resolution: f64,
    pub origin: [f64; 2],
}

impl MapMetadata {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "image: {}", self.image);
        let _ = writeln!(s, "resolution: {}", self.resolution);
        let _ = writeln!(s, "origin: [{}, {}, 0.0]", self.origin[0], self.origin[1]);
        s.push_str("negate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut image = None;
        let mut resolution = None;
        let mut origin = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("metadata line {}: expected `key: value`", n + 1)))?;
            let value = value.trim();
            let bad = |what: &str| Error::Format(format!("metadata line {}: bad {what}", n + 1));
            match key.trim() {
                "image" => image = Some(value.trim_matches(|c| c == '"' || c == '\'').to_string()),
                "resolution" => resolution = Some(value.parse::<f64>().map_err(|_| bad("resolution"))?),
                "origin" => {
                    let inner = value
                        .strip_prefix('[')
                        .and_then(|v| v.strip_suffix(']'))
                        .ok_or_else(|| bad("origin"))?;
                    let parts = inner
                        .split(',')
                        .map(|p| p.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad("origin"))?;
                    if parts.len() < 2 {
                        return Err(bad("origin"));
                    }
                    origin = Some([parts[0], parts[1]]);
                }
                _ => {}
            }
        }
        let missing = |k: &str| Error::Format(format!("metadata is missing `{k}`"));
        Ok(MapMetadata {
            image: image.ok_or_else(|| missing("image"))?,
            resolution: resolution.ok_or_else(|| missing("resolution"))?,
            origin: origin.ok_or_else(|| missing("origin"))?,
        })
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("yaml")
}

/// Reads a map given either its image or its sidecar path.
pub fn read_map(path: &Path) -> Result<OccupancyGrid> {
    let is_meta = path.extension().is_some_and(|e| e == "yaml" || e == "yml");
    let meta_path = if is_meta { path.to_path_buf() } else { sidecar_path(path) };
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta = MapMetadata::parse(&text)?;
    let image_path = if is_meta {
        meta_path.parent().unwrap_or(Path::new(".")).join(&meta.image)
    } else {
        path.to_path_buf()
    };
    let file = std::fs::File::open(&image_path).map_err(|e| Error::io(&image_path, e))?;
    let (w, h, cells) = read_pgm(std::io::BufReader::new(file))?;
    OccupancyGrid::new(w, h, meta.resolution, meta.origin, cells).map_err(|e| Error::Format(e.to_string()))
}

/// Renders the image bytes and sidecar text for a map stored as `<stem>.pgm`.
pub fn write_map(grid: &OccupancyGrid, image_name: &str) -> (Vec<u8>, String) {
    let mut image = Vec::new();
    write_pgm(grid, &mut image).expect("writing to memory");
    let meta = MapMetadata {
        image: image_name.to_string(),
        resolution: grid.resolution(),
        origin: grid.origin(),
    };
    (image, meta.render())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::synthetic::robot_maps;
    use proptest::prelude::*;

    #[test]
    fn header_and_coding() {
        let mut g = OccupancyGrid::filled(2, 2, 0.05, [0.0, 0.0], Cell::Unknown).unwrap();
        g.set(0, 1, Cell::Occupied);
        g.set(1, 0, Cell::Free);
        let mut out = Vec::new();
        write_pgm(&g, &mut out).unwrap();
        assert_eq!(out, b"P5\n2 2\n255\n\x00\xcd\xcd\xfe");
    }

    #[test]
    fn reads_comments_and_255() {
        let bytes = b"P5\n# made by hand\n2 1\n255\n\xff\x00";
        let (w, h, cells) = read_pgm(&bytes[..]).unwrap();
        assert_eq!((w, h), (2, 1));
        assert_eq!(cells, vec![Cell::Free, Cell::Occupied]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_pgm(&b"P2\n1 1\n255\n0"[..]).is_err());
        assert!(read_pgm(&b"P5\n2 2\n255\n\x00"[..]).is_err());
        assert!(read_pgm(&b"P5\n1 1\n15\n\x00"[..]).is_err());
        assert!(read_pgm(&b"P5\n1 1\n255\n\x80"[..]).is_err());
        assert!(read_pgm(&b"P5\n1"[..]).is_err());
    }

    #[test]
    fn metadata_parse() {
        let m = MapMetadata::parse("image: a.pgm\nresolution: 0.05\norigin: [-1.5, 2.0, 0.0]\nnegate: 0\n").unwrap();
        assert_eq!(m.origin, [-1.5, 2.0]);
        assert_eq!(MapMetadata::parse(&m.render()).unwrap(), m);
        assert!(MapMetadata::parse("image: a.pgm\n").is_err());
        assert!(MapMetadata::parse("resolution 0.05").is_err());
    }

    proptest! {
        #[test]
        fn pgm_round_trip_is_bit_exact(seed in 0u64..1000, side in 3usize..30) {
            let g = &robot_maps(1, side, seed).unwrap()[0];
            let mut first = Vec::new();
            write_pgm(g, &mut first).unwrap();
            let (w, h, cells) = read_pgm(&first[..]).unwrap();
            let back = OccupancyGrid::new(w, h, g.resolution(), g.origin(), cells).unwrap();
            prop_assert_eq!(&back, g);
            let mut second = Vec::new();
            write_pgm(&back, &mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
