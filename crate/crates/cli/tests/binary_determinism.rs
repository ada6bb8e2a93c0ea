//! End-to-end runs of the built binary: byte-identical artifacts for equal
//! (config, seed) across repeated runs and thread counts, correct exit
//! codes, and no partial files on failure.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_emproc")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "emproc-bin-{}-{}-{tag}",
            std::process::id(),
            std::thread::current().name().unwrap_or("t").replace("::", "-")
        ));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run_once(config: &Path, out: &Path, seed: u64, threads: usize, format: &str) -> (i32, Vec<u8>) {
    let status = Command::new(bin())
        .arg("--config")
        .arg(config)
        .arg("--seed")
        .arg(seed.to_string())
        .arg("--out")
        .arg(out)
        .arg("--format")
        .arg(format)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .expect("binary runs");
    let code = status.status.code().unwrap_or(-1);
    let bytes = std::fs::read(out).unwrap_or_default();
    (code, bytes)
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let dir = TempDir::new("determinism");
    let configs = [
        (
            "converge.json",
            r#"{
                "command": "converge",
                "class": {"class": "half_lines"},
                "model": {"model": "uniform_box", "lo": [0.0], "hi": [1.0]},
                "n_grid": [60, 120],
                "trials": 8
            }"#,
        ),
        (
            "simulate-coord.json",
            r#"{
                "command": "simulate-coord",
                "problem": {
                    "source": [0.5, 0.5],
                    "kernel": [[0.89, 0.11], [0.11, 0.89]],
                    "class": {"class": "all_functions", "alphabet": 4},
                    "delta": 0.3
                },
                "rate": 0.3, "n": 80, "trials": 6
            }"#,
        ),
        (
            "simulate-wz.json",
            r#"{
                "command": "simulate-wz",
                "problem": {"nx": 2, "ny": 2, "cells": [0.445, 0.055, 0.055, 0.445],
                             "class": {"class": "all_functions", "alphabet": 4},
                             "delta": 0.1, "u_bound": 2},
                "g": [[0, 1], [0, 1]],
                "stage1": {"mode": "identity"},
                "r_bin": 0.8, "n1": 10, "n2": 10, "trials": 4
            }"#,
        ),
        (
            "scaling.json",
            r#"{
                "command": "scaling",
                "class": {"class": "half_lines"},
                "model": {"model": "uniform_box", "lo": [0.0], "hi": [1.0]},
                "n_grid": [40, 80],
                "trials": 6
            }"#,
        ),
    ];
    for (name, text) in configs {
        let cfg = dir.path(name);
        std::fs::write(&cfg, text).unwrap();
        for format in ["csv", "json"] {
            let out_a = dir.path(&format!("{name}.{format}.a"));
            let out_b = dir.path(&format!("{name}.{format}.b"));
            let out_c = dir.path(&format!("{name}.{format}.c"));
            let (code_a, bytes_a) = run_once(&cfg, &out_a, 12345, 1, format);
            let (code_b, bytes_b) = run_once(&cfg, &out_b, 12345, 1, format);
            let (code_c, bytes_c) = run_once(&cfg, &out_c, 12345, 4, format);
            assert_eq!(code_a, 0, "{name} ({format}) failed");
            assert_eq!(code_b, 0);
            assert_eq!(code_c, 0);
            assert!(!bytes_a.is_empty());
            assert_eq!(bytes_a, bytes_b, "{name} ({format}): reruns differ");
            assert_eq!(bytes_a, bytes_c, "{name} ({format}): threads changed bytes");
        }
    }
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let dir = TempDir::new("seeds");
    let cfg = dir.path("c.json");
    std::fs::write(
        &cfg,
        r#"{
            "command": "converge",
            "class": {"class": "half_lines"},
            "model": {"model": "uniform_box", "lo": [0.0], "hi": [1.0]},
            "n_grid": [50],
            "trials": 4
        }"#,
    )
    .unwrap();
    let (c1, b1) = run_once(&cfg, &dir.path("a.csv"), 1, 1, "csv");
    let (c2, b2) = run_once(&cfg, &dir.path("b.csv"), 2, 1, "csv");
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert_ne!(b1, b2);
}

#[test]
fn malformed_config_exits_two_and_writes_nothing() {
    let dir = TempDir::new("badcfg");
    let cfg = dir.path("bad.json");
    std::fs::write(&cfg, "{ this is not json").unwrap();
    let out = dir.path("never.csv");
    let (code, bytes) = run_once(&cfg, &out, 1, 1, "csv");
    assert_eq!(code, 2);
    assert!(bytes.is_empty());
    assert!(!out.exists(), "no artifact may exist after a config error");
}

#[test]
fn missing_config_file_exits_two() {
    let dir = TempDir::new("missing");
    let out = dir.path("x.csv");
    let status = Command::new(bin())
        .arg("--config")
        .arg(dir.path("does-not-exist.json"))
        .arg("--seed")
        .arg("1")
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn env_var_thread_fallback_keeps_bytes() {
    let dir = TempDir::new("envthreads");
    let cfg = dir.path("c.json");
    std::fs::write(
        &cfg,
        r#"{
            "command": "converge",
            "class": {"class": "half_lines"},
            "model": {"model": "uniform_box", "lo": [0.0], "hi": [1.0]},
            "n_grid": [30],
            "trials": 6
        }"#,
    )
    .unwrap();
    let out_flag = dir.path("flag.csv");
    let (code, via_flag) = run_once(&cfg, &out_flag, 7, 3, "csv");
    assert_eq!(code, 0);
    let out_env = dir.path("env.csv");
    let status = Command::new(bin())
        .arg("--config")
        .arg(&cfg)
        .arg("--seed")
        .arg("7")
        .arg("--out")
        .arg(&out_env)
        .env("GC_COORD_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let via_env = std::fs::read(&out_env).unwrap();
    assert_eq!(via_flag, via_env);
}
