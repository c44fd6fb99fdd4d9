//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_hannay-kit");

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn config(name: &str) -> PathBuf {
    manifest_dir().join("configs").join(format!("{name}.toml"))
}

pub fn golden(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("golden").join(format!("{name}.json"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn run_json(args: &[&str]) -> (i32, Value) {
    let r = run(args, &[]);
    let v = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}\n{}", r.stdout, r.stderr));
    (r.code, v)
}

fn detail_head(s: &str) -> &str {
    s.split('(').next().unwrap_or(s).trim_end()
}

/// Structural comparison: same keys and shapes, strings equal (refusal detail
/// only up to its first parenthesis), numbers within `rel` of the larger
/// magnitude or of one.
pub fn compare(path: &str, got: &Value, want: &Value, rel: f64, diffs: &mut Vec<String>) {
    match (got, want) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let p = format!("{path}.{k}");
                match (a.get(k), b.get(k)) {
                    (Some(x), Some(y)) => compare(&p, x, y, rel, diffs),
                    (None, _) => diffs.push(format!("{p}: missing")),
                    (_, None) => diffs.push(format!("{p}: unexpected")),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                compare(&format!("{path}[{i}]"), x, y, rel, diffs);
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if (x - y).abs() > rel * x.abs().max(y.abs()).max(1.0) {
                diffs.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::String(a), Value::String(b)) if path.ends_with(".detail") => {
            if detail_head(a) != detail_head(b) {
                diffs.push(format!("{path}: {a:?} vs {b:?}"));
            }
        }
        (a, b) if a == b => {}
        (a, b) => diffs.push(format!("{path}: {a} vs {b}")),
    }
}

/// Run `full` on the named config and compare with its golden report.
/// `UPDATE_GOLDEN=1` rewrites the golden file instead.
pub fn check_golden(name: &str) -> Result<(), String> {
    let cfg = config(name);
    let r = run(&["full", "--config", cfg.to_str().unwrap()], &[]);
    if r.code != 2 {
        return Err(format!("{name}: exit {} (expected 2)", r.code));
    }
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &r.stdout).map_err(|e| e.to_string())?;
    }
    let got: Value = serde_json::from_str(&r.stdout).map_err(|e| e.to_string())?;
    let want = read_json(&path)?;
    let mut diffs = Vec::new();
    compare("$", &got, &want, 1e-9, &mut diffs);
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(format!("{name}: {}", diffs.join("; ")))
    }
}

pub fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
