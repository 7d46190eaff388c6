//! Shared helpers for running the `hbmat` binary against the shipped
//! configurations.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Shipped example configurations, sorted by name.
pub fn configs() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(crate_dir().join("configs"))
        .expect("configs directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

pub fn golden_dir(config: &Path) -> PathBuf {
    crate_dir().join("tests/golden").join(config.file_stem().unwrap())
}

/// Runs `hbmat` with `args` and returns its exit code.
pub fn hbmat(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hbmat"))
        .args(args)
        .env("RUST_LOG", "error")
        .status()
        .expect("spawn hbmat")
        .code()
        .unwrap_or(-1)
}

/// Every file in `dir`, by name.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries {
            let p = e.unwrap().path();
            out.insert(
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            );
        }
    }
    out
}

/// Runs `config` into `out` and lists differences from its golden files.
pub fn golden_mismatches(config: &Path, out: &Path, parallel: Option<usize>) -> Vec<String> {
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let threads = parallel.map(|n| n.to_string());
    if let Some(t) = &threads {
        args.extend(["--parallel", t.as_str()]);
    }
    let code = hbmat(&args);
    let name = config.file_stem().unwrap().to_string_lossy().into_owned();
    if code != 0 {
        return vec![format!("{name}: exit code {code}")];
    }
    let got = read_tree(out);
    let want = read_tree(&golden_dir(config));
    if want.is_empty() {
        return vec![format!("{name}: no golden files")];
    }
    let mut diffs = Vec::new();
    for (file, bytes) in &want {
        match got.get(file) {
            None => diffs.push(format!("{name}/{file}: missing")),
            Some(b) if b != bytes => diffs.push(format!("{name}/{file}: differs")),
            _ => {}
        }
    }
    for file in got.keys().filter(|f| !want.contains_key(*f)) {
        diffs.push(format!("{name}/{file}: not in golden set"));
    }
    diffs
}
