//! Shared plumbing for driving the compiled binary in tests.

// Each test binary compiles this module separately and uses its own subset.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spikesat")
}

/// Fresh per-test scratch directory under the cargo-managed tmp root.
pub fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary failed to launch")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "spikesat {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Machine-readable error envelope from stderr.
pub fn error_code(out: &Output) -> String {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("bad error JSON {stderr:?}: {e}"));
    parsed["error"].as_str().expect("error field").to_string()
}

/// Every regular file in `dir`, keyed by name, as raw bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            map.insert(
                entry.file_name().to_string_lossy().into_owned(),
                std::fs::read(entry.path()).unwrap(),
            );
        }
    }
    map
}

/// Cut-down classification scenarios: same structure as the defaults but
/// sized to finish in well under a second.
pub const SMALL_RRM: &str = "samples = 120\nstages = 1\nepochs_per_stage = 15\nseed = 42\n";
pub const SMALL_ID: &str = "samples_per_class = 60\nepochs = 20\nseed = 7\n";

pub fn write_scenarios(dir: &Path) -> (PathBuf, PathBuf) {
    let rrm = dir.join("rrm_small.toml");
    let id = dir.join("id_small.toml");
    std::fs::write(&rrm, SMALL_RRM).unwrap();
    std::fs::write(&id, SMALL_ID).unwrap();
    (rrm, id)
}
