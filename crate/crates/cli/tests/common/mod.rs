#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

pub const GOLDEN_FILES: [(&str, &str); 3] = [
    ("moments", "moments.csv"),
    ("bootstrap", "conclusiveness.csv"),
    ("bootstrap", "bf_histogram.svg"),
];

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    manifest_dir().join("tests/golden")
}

pub fn bfvar(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_bfvar"));
    cmd.args(args).env_remove("BFVAR_THREADS");
    if let Some(t) = threads {
        cmd.env("BFVAR_THREADS", t);
    }
    cmd.output().expect("bfvar binary runs")
}

/// Runs the golden commands into `out` and returns the produced artifacts.
pub fn golden_run(out: &Path, threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let config = fixture("overconfident.toml");
    let mut files = Vec::new();
    for command in ["moments", "bootstrap"] {
        let o = bfvar(
            &[
                command,
                "--config",
                config.to_str().unwrap(),
                "--seed",
                "11",
                "--out",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ],
            None,
        );
        if !o.status.success() {
            return Err(format!("{command} failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
    }
    for (_, name) in GOLDEN_FILES {
        let bytes = std::fs::read(out.join(name)).map_err(|e| format!("{name}: {e}"))?;
        files.push((name.to_string(), bytes));
    }
    Ok(files)
}

/// Compares against the stored golden files, or rewrites them when `BFVAR_BLESS=1`.
pub fn check_golden(files: &[(String, Vec<u8>)]) -> Result<(), String> {
    let dir = golden_dir();
    if std::env::var("BFVAR_BLESS").as_deref() == Ok("1") {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        for (name, bytes) in files {
            std::fs::write(dir.join(name), bytes).map_err(|e| e.to_string())?;
        }
        return Ok(());
    }
    for (name, bytes) in files {
        let expected = std::fs::read(dir.join(name)).map_err(|e| format!("golden {name}: {e}"))?;
        if &expected != bytes {
            return Err(format!("{name} differs from the golden copy"));
        }
    }
    Ok(())
}
