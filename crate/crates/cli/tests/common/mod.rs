#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn atre(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atre"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn atre")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

pub fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Validate `json` against `crates/cli/schemas/<name>.schema.json`.
pub fn assert_schema(name: &str, json: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.schema.json"));
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let instance: serde_json::Value = serde_json::from_str(json).unwrap();
    if let Err(e) = jsonschema::validate(&schema, &instance) {
        panic!("{name} schema violation: {e} at {}", e.instance_path);
    }
}
