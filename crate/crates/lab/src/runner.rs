use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{LabError, LabResult};
use crate::experiments::find;
use crate::output::{sha256_hex, OutputSet};

/// A run request as read from a config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lab-output")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| LabError::Config(format!("{}: {}", e.path(), e.inner())))
    }

    /// Applies `key=value`; the value is parsed as JSON and taken as a plain
    /// string otherwise.
    pub fn set(&mut self, assignment: &str) -> LabResult<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("expected key=value, got {assignment:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        self.params.insert(key.trim().to_string(), value);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub resolved_config: Value,
    pub seed: u64,
    pub config_hash: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// First 16 hex digits of the SHA-256 of the canonical resolved config.
pub fn config_hash(resolved: &Value) -> String {
    let canonical = serde_json::to_string(resolved).expect("json value serializes");
    sha256_hex(canonical.as_bytes())[..16].to_string()
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Resolves, runs and records one experiment. Schema and size problems are
/// reported before anything is computed or written.
pub fn run_experiment(cfg: &ExperimentConfig) -> LabResult<RunManifest> {
    let info = find(&cfg.experiment)?;
    let prepared = (info.prepare)(&cfg.params)?;
    let resolved = json!({ "experiment": info.name, "params": prepared.resolved });
    let hash = config_hash(&resolved);
    let seed = prepared.seed;
    let mut meta = format!("experiment={} seed={seed}", info.name);
    if let Some(shots) = prepared.shots {
        meta.push_str(&format!(" shots={shots}"));
    }
    meta.push_str(&format!(" config_hash={hash}"));

    let dir: &Path = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let started = now();
    let resolved_path = dir.join("resolved_config.json");
    fs::write(&resolved_path, serde_json::to_string_pretty(&resolved)? + "\n")?;
    let mut out = OutputSet::new(dir, meta);
    prepared.run(&mut out)?;
    let mut outputs = vec![resolved_path];
    outputs.extend(out.files().iter().cloned());
    let manifest = RunManifest {
        experiment: info.name.to_string(),
        resolved_config: resolved,
        seed,
        config_hash: hash,
        started,
        finished: now(),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// SHA-256 of every data file listed in a manifest, keyed by file name.
pub fn output_digests(dir: &Path, manifest: &RunManifest) -> LabResult<Vec<(String, String)>> {
    manifest
        .outputs
        .iter()
        .map(|name| Ok((name.clone(), sha256_hex(&fs::read(dir.join(name))?))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_parses_json_then_falls_back_to_string() {
        let mut cfg = ExperimentConfig::from_json(r#"{"experiment": "bitflip-code"}"#).unwrap();
        cfg.set("shots=10").unwrap();
        cfg.set("t_list=[0.1, 0.2]").unwrap();
        cfg.set("noise=memory-only").unwrap();
        assert_eq!(cfg.params["shots"], json!(10));
        assert_eq!(cfg.params["t_list"], json!([0.1, 0.2]));
        assert_eq!(cfg.params["noise"], json!("memory-only"));
        assert!(cfg.set("no-equals-sign").is_err());
        assert_eq!(cfg.output_dir, PathBuf::from("lab-output"));
    }

    #[test]
    fn hash_depends_only_on_resolved_content() {
        let a = json!({"experiment": "x", "params": {"seed": 1, "n": 2}});
        let b = json!({"params": {"n": 2, "seed": 1}, "experiment": "x"});
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 16);
        assert_ne!(config_hash(&a), config_hash(&json!({"experiment": "x", "params": {"seed": 2, "n": 2}})));
    }

    #[test]
    fn defaults_are_filled_in() {
        let info = find("boson-noisy-decay").unwrap();
        let p = (info.prepare)(&Map::new()).unwrap();
        assert_eq!(p.resolved["mc_samples"], json!(20000));
        assert_eq!(p.seed, 7);
    }
}
