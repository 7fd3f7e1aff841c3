use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "edgefuse", version, about = "Overlap-aware robot grouping and edge offloading experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run scheduling policies on one scenario file.
    Schedule(ScheduleArgs),
    /// Run policies over random-matrix scenes of several robot counts.
    Sweep(SweepArgs),
    /// Fuse pose-aligned PGM maps and report overlap statistics.
    Mapmerge(MapmergeArgs),
    /// Time synthetic map fusion and fit the quadratic latency model.
    Profile(ProfileArgs),
    /// Write a generated scenario or map fixture.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Comma-separated policies: recslam, greedy, random, cloud.
    #[arg(long, default_value = "recslam,greedy,random,cloud")]
    pub policy: String,
    /// A count `N` (seeds 0..N), a range `a..b` / `a..=b`, or a list `1,5,9`.
    #[arg(long, default_value = "1")]
    pub seeds: String,
    /// Cost profile: preset name or profile file path. Overrides the scenario's.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub tabu_iters: usize,
    #[arg(long, default_value_t = 10)]
    pub tabu_capacity: usize,
    /// Keep the initial grouping without tabu refinement.
    #[arg(long)]
    pub no_tabu: bool,
    /// Report the best server placement of each grouping and the gap to it.
    #[arg(long)]
    pub oracle: bool,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory receiving one JSON report per run.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Omit the timestamp line and wall-time column so reruns are byte-identical.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    pub scenario: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario whose edges, profile and first robot serve as the template.
    pub template: PathBuf,
    /// Comma-separated robot counts, or `a..=b:step`.
    #[arg(long)]
    pub robots: String,
    /// Probability that two robots overlap.
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Overlap degrees are uniform in `(low, high]`.
    #[arg(long, default_value = "0,0.5")]
    pub weight_range: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct MapmergeArgs {
    /// Map images (`.pgm`) or their metadata files (`.yaml`).
    #[arg(required = true)]
    pub maps: Vec<PathBuf>,
    /// Output image path; metadata is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Map counts to time, as a list or `a..=b`.
    #[arg(long, default_value = "2..=12")]
    pub k: String,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Side length of each synthetic map, in cells.
    #[arg(long, default_value_t = 320)]
    pub side: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output file with samples and fit.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    /// Zoned apartment scene with rasterized overlaps.
    Apartment,
    /// Three robots in one room.
    Prototype,
    /// Random overlap matrix.
    Random,
    /// Overlapping PGM robot maps.
    Maps,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: Fixture,
    #[arg(long, default_value_t = 10)]
    pub robots: usize,
    #[arg(long, default_value_t = 3)]
    pub edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "wifi")]
    pub profile: String,
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    #[arg(long, default_value = "0,0.5")]
    pub weight_range: String,
    /// Map side in cells, for `maps`.
    #[arg(long, default_value_t = 60)]
    pub side: usize,
    /// Output file, or output directory for `maps`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Seeds from a count, range or list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range `{s}`"))?;
        let (b, inclusive) = match b.strip_prefix('=') {
            Some(b) => (b, true),
            None => (b, false),
        };
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range `{s}`"))?;
        if inclusive {
            (a..=b).collect()
        } else {
            (a..b).collect()
        }
    } else if s.contains(',') {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| format!("bad seed `{x}`")))
            .collect::<Result<_, _>>()?
    } else {
        let n: u64 = s.parse().map_err(|_| format!("bad seed count `{s}`"))?;
        (0..n).collect()
    };
    if seeds.is_empty() {
        return Err(format!("seed spec `{s}` selects no seeds"));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(format!("seed spec `{s}` repeats a seed"));
    }
    Ok(sorted)
}

/// Positive counts from a list `6,8,10` or a range `10..=50:10`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, st.trim().parse::<usize>().map_err(|_| format!("bad step in `{s}`"))?),
        None => (s, 1),
    };
    let counts: Vec<usize> = if let Some((a, b)) = range.split_once("..") {
        if step == 0 {
            return Err("step must be >= 1".into());
        }
        let a: usize = a.trim().parse().map_err(|_| format!("bad count range `{s}`"))?;
        let b: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| format!("bad count range `{s}`"))?;
        let end = if b > a && !range.contains("..=") { b - 1 } else { b };
        (a..=end).step_by(step).collect()
    } else {
        range
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| format!("bad count `{x}`")))
            .collect::<Result<_, _>>()?
    };
    if counts.is_empty() {
        return Err(format!("count list `{s}` is empty"));
    }
    if counts.contains(&0) {
        return Err("counts must be >= 1".into());
    }
    Ok(counts)
}

/// `(low, high)` from `low,high` or `low..high`.
pub fn parse_weight_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("weight range `{s}` is not `low,high`"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad weight `{x}`"));
    Ok((parse(a)?, parse(b)?))
}
