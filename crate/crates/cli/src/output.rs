//! Output sinks and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What a subcommand produced: the artifact text and the settings that made it.
pub struct Artifact {
    pub text: String,
    pub parameters: Value,
    pub quadrature: Value,
    pub solver: Value,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command_line: Vec<String>,
    parameters: &'a Value,
    quadrature: &'a Value,
    solver: &'a Value,
    wall_time_s: f64,
    artifacts: Vec<ArtifactHash>,
}

#[derive(Serialize)]
struct ArtifactHash {
    path: String,
    sha256: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the artifact to stdout, or to `out` plus `out.manifest.json`.
pub fn emit(artifact: &Artifact, out: Option<&Path>, elapsed: Duration) -> std::io::Result<()> {
    let Some(path) = out else {
        print!("{}", artifact.text);
        return Ok(());
    };
    fs::write(path, &artifact.text)?;
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        parameters: &artifact.parameters,
        quadrature: &artifact.quadrature,
        solver: &artifact.solver,
        wall_time_s: elapsed.as_secs_f64(),
        artifacts: vec![ArtifactHash {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(artifact.text.as_bytes())),
        }],
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(manifest_path(path), json)
}

/// Full-precision CSV field; empty for NaN.
pub fn csv_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}
