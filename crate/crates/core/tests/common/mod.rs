//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/wifi_setup")
}

pub fn mock_script() -> PathBuf {
    fixture_dir().join("mock_backend.jsonl")
}

/// Copies the fixture inputs (not the expected outputs) into `to`.
pub fn copy_inputs(from: &Path, to: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let name = entry.file_name();
        if name == "expected" {
            continue;
        }
        let target = to.join(&name);
        if entry.file_type()?.is_dir() {
            copy_inputs(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), target)?;
        }
    }
    Ok(())
}

/// Fresh copy of the fixture inputs in a temporary directory.
pub fn fixture_copy() -> tempfile::TempDir {
    let tmp = tempfile::tempdir().expect("temp dir");
    copy_inputs(&fixture_dir(), tmp.path()).expect("copy fixture");
    tmp
}

/// The CLI with no sidecar inherited from the environment.
pub fn navmine() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_navmine"));
    c.env_remove("NAVMINE_SIDECAR");
    c
}

pub fn run(args: &[&str]) -> Output {
    navmine().args(args).output().expect("spawn navmine")
}

pub fn expected(name: &str) -> Vec<u8> {
    std::fs::read(fixture_dir().join("expected").join(name)).expect("golden file")
}
