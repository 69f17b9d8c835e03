//! Helpers shared by the integration suites: fixture paths and a harness
//! for driving the compiled binary with hermetic settings.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const BIN: &str = env!("CARGO_BIN_EXE_kprofile");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn taxonomy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/taxonomy")
}

pub fn taxonomy_path(version: &str) -> PathBuf {
    taxonomy_dir().join(format!("{version}.tax"))
}

pub fn record_paths() -> Vec<PathBuf> {
    (1..=7)
        .map(|i| fixture(&format!("records/emp-0{i}.toml")))
        .collect()
}

pub struct Run {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn assert_status(&self, expected: i32) {
        assert_eq!(
            self.status, expected,
            "expected exit {expected}, got {}\nstdout:\n{}\nstderr:\n{}",
            self.status, self.stdout, self.stderr
        );
    }
}

/// Run the binary with the fixture taxonomy/reference and `out` as the
/// output directory. Extra args come after the shared flags.
pub fn kprofile(out: &Path, args: &[&str]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.env_remove("KPROFILE_CONFIG")
        .arg("--taxonomy-dir")
        .arg(taxonomy_dir())
        .arg("--reference")
        .arg(fixture("reference.csv"))
        .arg("--output-dir")
        .arg(out);
    run(cmd.args(args))
}

/// Run the binary with exactly the given args (no implicit flags).
pub fn kprofile_raw(args: &[&str]) -> Run {
    run(Command::new(BIN).env_remove("KPROFILE_CONFIG").args(args))
}

pub fn run(cmd: &mut Command) -> Run {
    let output = cmd.output().expect("spawn kprofile binary");
    Run {
        status: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}
