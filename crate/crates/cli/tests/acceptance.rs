//! Runs every acceptance criterion through the `carrier-lab` binary and
//! prints one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::process::Command;

const CRITERIA: &[(&str, &[&str])] = &[
    ("packing correctness", &["packing"]),
    ("goodness stable across depths", &["goodness-depth"]),
    ("adjacent angle bound", &["angle-bound"]),
    ("bi-Lipschitz cable metric", &["bilipschitz"]),
    ("volume doubling", &["doubling"]),
    ("Poincare inequality", &["poincare"]),
    ("exit arc probabilities", &["exit-arc"]),
    ("exit time scaling", &["exit-time"]),
    ("potential oracle equivalence", &["potential-oracle"]),
    ("resistance growth", &["resistance"]),
    ("non-atomicity probe", &["atom-probe"]),
    ("interior and boundary Harnack", &["harnack", "bhp"]),
    ("harmonic extension consistency", &["harmonic-measure"]),
    ("Martin kernel convergence", &["martin"]),
];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Exit code and the tail of stdout for one config.
fn run(config: &str) -> (Option<i32>, String) {
    let out_dir = std::env::temp_dir().join("carrier-lab-acceptance").join(config);
    let output = Command::new(env!("CARGO_BIN_EXE_carrier-lab"))
        .arg("measure")
        .arg("--config")
        .arg(root().join("configs").join(format!("{config}.toml")))
        .arg("--out")
        .arg(&out_dir)
        .output()
        .expect("failed to launch carrier-lab");
    let mut text = String::from_utf8_lossy(&output.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&output.stderr));
    (output.status.code(), text)
}

fn main() {
    let mut failed = Vec::new();
    for (name, configs) in CRITERIA {
        let mut details = Vec::new();
        let mut ok = true;
        for config in *configs {
            let (code, text) = run(config);
            if code != Some(0) {
                ok = false;
                for line in text.lines().filter(|l| l.starts_with("FAIL") || l.starts_with("error")) {
                    details.push(format!("    {config}: {line}"));
                }
            }
        }
        println!("{} {name} ({})", if ok { "PASS" } else { "FAIL" }, configs.join(", "));
        for d in &details {
            println!("{d}");
        }
        if !ok {
            failed.push(*name);
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed.len(), CRITERIA.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
