//! CSV and JSON experiment records.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `policy` | `recslam`, `greedy`, `random` or `cloud` |
//! | `seed` | seed of the run, empty for unseeded policies |
//! | `robots`, `edges` | scene size |
//! | `fitness` | overlap weight cut by the grouping, empty for `cloud` |
//! | `total_latency_s` | end-to-end latency in seconds |
//! | `sched_wall_ms` | scheduler wall time, empty when timing is suppressed |
//! | `robot_stage_s` | slowest robot map arrival (or local SLAM for `cloud`) |
//! | `edge_fusion_s` | slowest edge fusion |
//! | `upload_s` | slowest upload to the cloud |
//! | `cloud_fusion_s` | cloud fusion time |
//! | `upload_bytes` | bytes uploaded to the cloud over all paths |
//! | `oracle_latency_s` | best latency over all server placements of the same groups |
//! | `oracle_gap` | `(total - oracle) / oracle` |
//! | `profile_digest` | fingerprint of the cost model used |
//!
//! The oracle columns are always present and empty unless requested.

use std::io::Write;

use serde::Serialize;

use crate::cost::Evaluator;
use crate::error::Result;
use crate::offload::oracle_for_groups;
use crate::pipeline::{Policy, ScheduleResult};
use crate::profile::digest;

pub const CSV_COLUMNS: [&str; 15] = [
    "policy",
    "seed",
    "robots",
    "edges",
    "fitness",
    "total_latency_s",
    "sched_wall_ms",
    "robot_stage_s",
    "edge_fusion_s",
    "upload_s",
    "cloud_fusion_s",
    "upload_bytes",
    "oracle_latency_s",
    "oracle_gap",
    "profile_digest",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub policy: Policy,
    pub seed: Option<u64>,
    pub robots: usize,
    pub edges: usize,
    pub fitness: Option<f64>,
    pub total_latency_s: f64,
    pub sched_wall_ms: Option<f64>,
    pub robot_stage_s: f64,
    pub edge_fusion_s: f64,
    pub upload_s: f64,
    pub cloud_fusion_s: f64,
    pub upload_bytes: f64,
    pub oracle_latency_s: Option<f64>,
    pub oracle_gap: Option<f64>,
    pub profile_digest: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RowOptions {
    /// Fill `sched_wall_ms`. Wall time varies run to run, so it is left
    /// empty when output must be reproducible byte for byte.
    pub wall_time: bool,
    /// Fill the oracle columns for edge policies.
    pub oracle: bool,
}

impl ResultRow {
    pub fn new(eval: &Evaluator, r: &ScheduleResult, opts: RowOptions) -> Result<Self> {
        let (oracle_latency_s, oracle_gap) = if opts.oracle && r.policy != Policy::Cloud {
            let best = oracle_for_groups(eval, &r.groups)?.total_latency;
            (Some(best), Some((r.total_latency - best) / best))
        } else {
            (None, None)
        };
        let b = &r.breakdown;
        Ok(ResultRow {
            policy: r.policy,
            seed: r.seed,
            robots: eval.scene().robots.len(),
            edges: eval.scene().edges.len(),
            fitness: r.fitness,
            total_latency_s: r.total_latency,
            sched_wall_ms: opts.wall_time.then_some(r.sched_wall * 1e3),
            robot_stage_s: b.max_ready(),
            edge_fusion_s: b.max_fusion(),
            upload_s: b.max_upload(),
            cloud_fusion_s: b.cloud_fusion,
            upload_bytes: b.total_upload_bytes(),
            oracle_latency_s,
            oracle_gap,
            profile_digest: digest(eval.profile()),
        })
    }

    fn sort_key(&self) -> (usize, usize, Policy, Option<u64>) {
        (self.robots, self.edges, self.policy, self.seed)
    }
}

/// Canonical row order: scene size, then policy, then seed.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by_key(ResultRow::sort_key);
}

/// Writes the header and rows, preceded by `# generated <stamp>` when a
/// timestamp is given.
pub fn write_csv(rows: &[ResultRow], timestamp: Option<&str>, out: impl Write) -> Result<()> {
    let mut out = out;
    if let Some(ts) = timestamp {
        writeln!(out, "# generated {ts}").map_err(|e| crate::Error::Internal(e.to_string()))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::Error::Internal(e.to_string()))?;
    Ok(())
}

/// Per-run JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub profile: &'a str,
    pub profile_digest: String,
    pub robots: usize,
    pub edges: usize,
    pub result: &'a ScheduleResult,
}

impl<'a> RunReport<'a> {
    pub fn new(eval: &'a Evaluator, result: &'a ScheduleResult) -> Self {
        RunReport {
            profile: &eval.profile().name,
            profile_digest: digest(eval.profile()),
            robots: eval.scene().robots.len(),
            edges: eval.scene().edges.len(),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::prototype_scenario;
    use crate::pipeline::{run_cloud_baseline, run_recslam, PipelineConfig};
    use crate::profile::preset;

    fn eval() -> Evaluator {
        let s = prototype_scenario(preset("wifi").unwrap()).unwrap();
        Evaluator::new(&s.scene, &s.profile).unwrap()
    }

    #[test]
    fn header_and_empty_columns() {
        let e = eval();
        let r = run_cloud_baseline(&e).unwrap();
        let row = ResultRow::new(&e, &r, RowOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&[row], None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 15);
        assert_eq!(fields[0], "cloud");
        assert_eq!(fields[1], "");
        assert_eq!(fields[4], "");
        assert_eq!(fields[6], "");
        assert_eq!(fields[12], "");
    }

    #[test]
    fn oracle_columns_when_requested() {
        let e = eval();
        let r = run_recslam(&e, &PipelineConfig::default(), 0).unwrap();
        let row = ResultRow::new(&e, &r, RowOptions { wall_time: true, oracle: true }).unwrap();
        let gap = row.oracle_gap.unwrap();
        assert!(gap >= 0.0);
        assert!(row.sched_wall_ms.is_some());
    }

    #[test]
    fn timestamp_line() {
        let mut buf = Vec::new();
        write_csv(&[], Some("2026-01-01T00:00:00Z"), &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("# generated 2026-01-01T00:00:00Z\npolicy,"));
    }

    #[test]
    fn rows_sort_canonically() {
        let e = eval();
        let mut rows: Vec<ResultRow> = [3u64, 1, 2]
            .iter()
            .map(|&s| ResultRow::new(&e, &run_recslam(&e, &PipelineConfig::default(), s).unwrap(), RowOptions::default()).unwrap())
            .collect();
        rows.push(ResultRow::new(&e, &run_cloud_baseline(&e).unwrap(), RowOptions::default()).unwrap());
        rows.reverse();
        sort_rows(&mut rows);
        let keys: Vec<(Policy, Option<u64>)> = rows.iter().map(|r| (r.policy, r.seed)).collect();
        assert_eq!(
            keys,
            vec![(Policy::RecSlam, Some(1)), (Policy::RecSlam, Some(2)), (Policy::RecSlam, Some(3)), (Policy::Cloud, None)]
        );
    }
}
