//! Cost profiles: bundled network presets and profile files.
//!
//! The bundled presets carry link rates for WiFi, 5G and 4G uplinks. Robot
//! links are sized so that one 2914-byte sensory frame takes 1.88 ms,
//! 2.35 ms and 3.13 ms respectively; the robot → cloud rates are sized so
//! that a 1.69 MB local map takes 1.88 s, 2.35 s and 3.13 s. Fusion
//! coefficients are shared across presets, with the cloud fusing at a
//! quarter of the edge cost.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::cost::CostProfile;
use crate::error::{Error, Result};

/// Environment variable naming a directory searched for `<name>.json`.
pub const PROFILE_DIR_ENV: &str = "EDGEFUSE_PROFILE_DIR";

/// Preset used when nothing else is requested.
pub const DEFAULT_PRESET: &str = "wifi";

const BUNDLED: &str = include_str!("../profiles/default.json");

/// Parses a preset collection: a JSON object mapping names to profiles.
pub fn parse_presets(text: &str) -> Result<BTreeMap<String, CostProfile>> {
    let raw: BTreeMap<String, CostProfile> =
        serde_json::from_str(text).map_err(|e| Error::json("profile collection", &e))?;
    raw.into_iter()
        .map(|(name, mut p)| {
            p.name = name.clone();
            p.validate().map_err(|e| match e {
                Error::Validation { field, message } => Error::Validation {
                    field: format!("{name}.{field}"),
                    message,
                },
                other => other,
            })?;
            Ok((name, p))
        })
        .collect()
}

pub fn bundled_presets() -> BTreeMap<String, CostProfile> {
    parse_presets(BUNDLED).expect("bundled presets are valid")
}

pub fn preset(name: &str) -> Result<CostProfile> {
    bundled_presets()
        .remove(&name.to_ascii_lowercase())
        .ok_or_else(|| Error::UnknownProfile(name.to_string()))
}

/// Reads a file holding either one profile or a collection with exactly
/// one entry.
pub fn load_profile_file(path: &Path) -> Result<CostProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if let Ok(mut p) = serde_json::from_str::<CostProfile>(&text) {
        if p.name.is_empty() {
            p.name = stem;
        }
        p.validate()?;
        return Ok(p);
    }
    let mut all = parse_presets(&text)?;
    if all.len() == 1 {
        return Ok(all.pop_first().expect("one entry").1);
    }
    Err(Error::field(
        path.display().to_string(),
        format!("file holds {} profiles; name one of {:?} instead", all.len(), all.keys().collect::<Vec<_>>()),
    ))
}

/// Resolves `--profile` style input. An existing file path wins; otherwise
/// `<dir>/<name>.json` is tried when `search_dir` is given, then the
/// bundled presets.
pub fn resolve(spec: &str, search_dir: Option<&Path>) -> Result<CostProfile> {
    let as_path = Path::new(spec);
    if as_path.is_file() {
        return load_profile_file(as_path);
    }
    if let Some(dir) = search_dir {
        let candidate = dir.join(format!("{spec}.json"));
        if candidate.is_file() {
            return load_profile_file(&candidate);
        }
    }
    preset(spec)
}

/// [`resolve`] with the search directory taken from [`PROFILE_DIR_ENV`].
pub fn resolve_from_env(spec: &str) -> Result<CostProfile> {
    let dir = std::env::var_os(PROFILE_DIR_ENV);
    resolve(spec, dir.as_deref().map(Path::new))
}

/// Short fingerprint of every numeric parameter of a profile. Two runs
/// report the same digest exactly when they used the same cost model.
pub fn digest(p: &CostProfile) -> String {
    let mut unnamed = p.clone();
    unnamed.name.clear();
    let bytes = serde_json::to_vec(&unnamed).expect("profiles serialize");
    Sha256::digest(&bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_presets_load() {
        let all = bundled_presets();
        assert_eq!(all.keys().collect::<Vec<_>>(), ["4g", "5g", "wifi"]);
        let wifi = &all["wifi"];
        assert_eq!(wifi.name, "wifi");
        assert_eq!(wifi.params.local_slam_latency, 1.51);
        assert_eq!(wifi.cloud_fusion, wifi.edge_fusion.scaled(0.25));
    }

    #[test]
    fn frame_upload_matches_measured_ordering() {
        // per-frame upload: WiFi < 5G < 4G, in the measured milliseconds
        let frame = 2914.0;
        let ms: Vec<f64> = ["wifi", "5g", "4g"]
            .iter()
            .map(|n| 1e3 * frame / preset(n).unwrap().params.robot_uplink_bw)
            .collect();
        for (got, want) in ms.iter().zip([1.88, 2.35, 3.13]) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
        // the map-upload reading of the same figures, in seconds
        let map = 1.69e6;
        let s: Vec<f64> = ["wifi", "5g", "4g"]
            .iter()
            .map(|n| map / preset(n).unwrap().params.cloud_uplink_bw_robot)
            .collect();
        for (got, want) in s.iter().zip([1.88, 2.35, 3.13]) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("3g"), Err(Error::UnknownProfile(_))));
        assert!(preset("WiFi").is_ok());
    }

    #[test]
    fn resolution_order() {
        let dir = std::env::temp_dir().join(format!("edgefuse-profile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut custom = preset("wifi").unwrap();
        custom.params.t_frame = 0.5;
        custom.name.clear();
        std::fs::write(dir.join("wifi.json"), serde_json::to_string(&custom).unwrap()).unwrap();

        let from_dir = resolve("wifi", Some(&dir)).unwrap();
        assert_eq!(from_dir.params.t_frame, 0.5);
        assert_eq!(from_dir.name, "wifi");
        let by_path = resolve(dir.join("wifi.json").to_str().unwrap(), None).unwrap();
        assert_eq!(by_path.params.t_frame, 0.5);
        assert_eq!(resolve("wifi", None).unwrap().params.t_frame, 0.05);
        assert_eq!(resolve("5g", Some(&dir)).unwrap().name, "5g");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn digest_tracks_parameters_not_names() {
        let a = preset("wifi").unwrap();
        let mut b = a.clone();
        b.name = "renamed".into();
        assert_eq!(digest(&a), digest(&b));
        b.params.t_pack += 1e-9;
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 16);
    }

    #[test]
    fn invalid_preset_names_field() {
        let text = r#"{"bad": {"t_pack": -1, "t_frame": 0, "robot_uplink_bw": 1, "local_slam_latency": 0,
            "cloud_uplink_bw_robot": 1, "edge_fusion": {"alpha":0,"beta":0,"gamma":0},
            "cloud_fusion": {"alpha":0,"beta":0,"gamma":0}}}"#;
        let err = parse_presets(text).unwrap_err();
        assert!(err.to_string().starts_with("bad.t_pack"), "{err}");
    }
}
