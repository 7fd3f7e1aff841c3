//! Scenario files: the JSON form of a [`Scene`] plus its cost profile.
//!
//! ```json
//! {
//!   "robots": [{"id": 0, "route": [[1.0, 1.0], [3.0, 1.0]], "scan_radius": 1.5,
//!               "raw_frame_bytes": 2914, "map_bytes": 1690000}],
//!   "edges":  [{"id": 0, "compute_scale": 1.0, "uplink_bw_robot": 2000000.0,
//!               "uplink_bw_cloud": 1500000.0}],
//!   "cost_params": "wifi",
//!   "overlap_matrix": [[0.0]],
//!   "raster_resolution": 0.05
//! }
//! ```
//!
//! `cost_params` is either a preset name (or profile file path, relative to
//! the scenario) or an inline profile object. `overlap_matrix` and
//! `raster_resolution` are optional; without a matrix the overlap degrees
//! are rasterized from the robots' routes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::CostProfile;
use crate::error::{Error, Result};
use crate::profile;
use crate::scene::{EdgeServerSpec, OverlapMatrix, RobotSpec, Scene};

pub const DEFAULT_RASTER_RESOLUTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSource {
    Named(String),
    Inline(CostProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub robots: Vec<RobotSpec>,
    pub edges: Vec<EdgeServerSpec>,
    pub cost_params: CostSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster_resolution: Option<f64>,
}

/// A validated scene together with the profile it is evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scene: Scene,
    pub profile: CostProfile,
}

impl Scenario {
    pub fn new(robots: Vec<RobotSpec>, edges: Vec<EdgeServerSpec>, profile: CostProfile) -> Result<Self> {
        let scene = Scene {
            robots,
            edges,
            cloud_fusion_model: profile.cloud_fusion,
            raster_resolution: DEFAULT_RASTER_RESOLUTION,
            overlap_override: None,
        };
        scene.validate()?;
        profile.validate()?;
        Ok(Scenario { scene, profile })
    }

    /// Parses and validates scenario text. `base_dir` anchors relative
    /// profile paths; `profile_dir` is searched for named profiles.
    pub fn parse(text: &str, base_dir: Option<&Path>, profile_dir: Option<&Path>) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::json("scenario", &e))?;
        let profile = match file.cost_params {
            CostSource::Inline(p) => {
                p.validate().map_err(|e| prefix("cost_params", e))?;
                p
            }
            CostSource::Named(name) => {
                let relative = base_dir.map(|d| d.join(&name)).filter(|p| p.is_file());
                match relative {
                    Some(path) => profile::load_profile_file(&path),
                    None => profile::resolve(&name, profile_dir),
                }
                .map_err(|e| match e {
                    Error::UnknownProfile(n) => Error::field("cost_params", format!("unknown cost profile `{n}`")),
                    other => prefix("cost_params", other),
                })?
            }
        };
        let overlap_override = file
            .overlap_matrix
            .as_deref()
            .map(OverlapMatrix::from_rows)
            .transpose()?;
        let scene = Scene {
            robots: file.robots,
            edges: file.edges,
            cloud_fusion_model: profile.cloud_fusion,
            raster_resolution: file.raster_resolution.unwrap_or(DEFAULT_RASTER_RESOLUTION),
            overlap_override,
        };
        scene.validate()?;
        Ok(Scenario { scene, profile })
    }

    pub fn load(path: &Path, profile_dir: Option<&Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent(), profile_dir)
    }

    /// Replaces the cost profile, including the scene's cloud fusion model.
    pub fn with_profile(mut self, profile: CostProfile) -> Self {
        self.scene.cloud_fusion_model = profile.cloud_fusion;
        self.profile = profile;
        self
    }

    /// File form of the scenario. Unmodified bundled presets are referred
    /// to by name, anything else is written inline.
    pub fn to_file(&self) -> ScenarioFile {
        let bundled = profile::preset(&self.profile.name).is_ok_and(|p| p == self.profile);
        ScenarioFile {
            robots: self.scene.robots.clone(),
            edges: self.scene.edges.clone(),
            cost_params: if bundled {
                CostSource::Named(self.profile.name.clone())
            } else {
                CostSource::Inline(self.profile.clone())
            },
            overlap_matrix: self.scene.overlap_override.as_ref().map(OverlapMatrix::rows),
            raster_resolution: Some(self.scene.raster_resolution),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenarios serialize")
    }
}

fn prefix(at: &str, e: Error) -> Error {
    match e {
        Error::Validation { field, message } => Error::Validation {
            field: format!("{at}.{field}"),
            message,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "robots": [
            {"id": 0, "route": [[0, 0]], "scan_radius": 1.0, "raw_frame_bytes": 1000},
            {"id": 1, "route": [[1, 0]], "scan_radius": 1.0, "raw_frame_bytes": 1000}
        ],
        "edges": [{"id": 0, "compute_scale": 1.0, "uplink_bw_robot": 1e6, "uplink_bw_cloud": 1e6}],
        "cost_params": "wifi"
    }"#;

    #[test]
    fn parses_minimal() {
        let s = Scenario::parse(MINIMAL, None, None).unwrap();
        assert_eq!(s.scene.robots.len(), 2);
        assert_eq!(s.profile.name, "wifi");
        assert_eq!(s.scene.cloud_fusion_model, s.profile.cloud_fusion);
        assert_eq!(s.scene.raster_resolution, DEFAULT_RASTER_RESOLUTION);
    }

    #[test]
    fn round_trips_through_inline_profile() {
        let s = Scenario::parse(MINIMAL, None, None).unwrap();
        let again = Scenario::parse(&s.to_json(), None, None).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = Scenario::parse("{\n  \"robots\": [,\n}", None, None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_diagnostics() {
        let bad = MINIMAL.replace("\"scan_radius\": 1.0, \"raw_frame_bytes\": 1000},", "\"scan_radius\": 0.0, \"raw_frame_bytes\": 1000},");
        let err = Scenario::parse(&bad, None, None).unwrap_err();
        assert_eq!(err.to_string(), "robots[0].scan_radius: must be > 0");

        let bad = MINIMAL.replace("\"wifi\"", "\"3g\"");
        let err = Scenario::parse(&bad, None, None).unwrap_err();
        assert!(err.to_string().starts_with("cost_params"), "{err}");

        let bad = MINIMAL.replace("\"cost_params\"", "\"overlap_matrix\": [[0, 0.6], [0.6, 0]], \"cost_params\"");
        let err = Scenario::parse(&bad, None, None).unwrap_err();
        assert!(err.to_string().starts_with("overlap_matrix[0][1]"), "{err}");

        let bad = MINIMAL.replace("\"cost_params\"", "\"overlap_matrix\": [[0]], \"cost_params\"");
        assert!(Scenario::parse(&bad, None, None).is_err());

        let bad = MINIMAL.replace("\"cost_params\"", "\"robot_count\": 3, \"cost_params\"");
        assert!(matches!(Scenario::parse(&bad, None, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn presets_are_written_by_name() {
        let s = Scenario::parse(MINIMAL, None, None).unwrap();
        assert!(s.to_json().contains("\"cost_params\": \"wifi\""));
        let mut p = s.profile.clone();
        p.params.t_pack = 0.5;
        let s = s.with_profile(p);
        assert!(s.to_json().contains("\"t_pack\": 0.5"));
    }

    #[test]
    fn with_profile_updates_cloud_model() {
        let s = Scenario::parse(MINIMAL, None, None).unwrap();
        let mut p = s.profile.clone();
        p.cloud_fusion.gamma = 9.0;
        let s = s.with_profile(p);
        assert_eq!(s.scene.cloud_fusion_model.gamma, 9.0);
    }
}
