use std::process::Command;

use carrier_core::io::{GraphFile, PackingFile};
use carrier_lab::{generate, run, run_kind, ExperimentConfig, Kind, RunOptions, EXIT_PASSED};

fn out_dir(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join("carrier-lab-cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn validate_triangle_passes_and_writes_artifacts() {
    let cfg = ExperimentConfig::parse("kind = \"validate\"\ngraphs = [{ source = \"triangle\" }]\n", ".").unwrap();
    let dir = out_dir("validate");
    let s = run(&cfg, &RunOptions { out_dir: Some(dir.clone()), seed: None }).unwrap();
    assert_eq!(s.exit_code(), EXIT_PASSED);
    for f in ["validate.csv", "validate-report.json", "validate-summary.json", "validate-summary.txt"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.join("validate.csv")).unwrap();
    assert!(csv.starts_with("graph,center,xi,r,epsilon,quantity,value"));
}

#[test]
fn pack_small_hyperbolic_ball() {
    let cfg = ExperimentConfig::parse("kind = \"pack\"\ngraphs = [{ source = \"hyperbolic\", depth = 3 }]\n", ".").unwrap();
    let s = run_kind(&cfg, Kind::Pack, &RunOptions { out_dir: Some(out_dir("pack")), seed: None }).unwrap();
    assert!(s.passed, "{}", s.to_text());
}

#[test]
fn generated_files_reload() {
    let cfg = ExperimentConfig::parse("kind = \"validate\"\ngraphs = [{ source = \"hyperbolic\", depth = 2 }]\n", ".").unwrap();
    let dir = out_dir("generate");
    let files = generate(&cfg, &RunOptions { out_dir: Some(dir.clone()), seed: None }).unwrap();
    assert_eq!(files.len(), 3);
    let g = GraphFile::load(dir.join("hyperbolic-7-2.graph.json")).unwrap().to_graph().unwrap();
    let t = GraphFile::load(dir.join("hyperbolic-7-2.combinatorial.json")).unwrap();
    assert!(t.positions.is_none());
    assert_eq!(t.vertex_count, g.vertex_count());
    let p = PackingFile::load(dir.join("hyperbolic-7-2.packing.json")).unwrap();
    assert_eq!(p.radius.len(), g.vertex_count());
}

#[test]
fn seed_override_is_recorded() {
    let cfg = ExperimentConfig::parse(
        "kind = \"bilipschitz\"\nseed = 1\ngraphs = [{ source = \"hyperbolic\", depth = 2 }]\n[params]\nsample_counts = [200, 400]\nstability = 0.5\n",
        ".",
    )
    .unwrap();
    let s = run(&cfg, &RunOptions { out_dir: Some(out_dir("seed")), seed: Some(99) }).unwrap();
    assert_eq!(s.seed, 99);
}

#[test]
fn binary_reports_config_errors_with_exit_one() {
    let dir = out_dir("bad-config");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "kind = \"harnack\"\ngraphs = [{ source = \"triangle\" }]\n[params]\nepsilons = []\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_carrier-lab")).args(["measure", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn binary_renders_svg() {
    let dir = out_dir("render");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.toml");
    std::fs::write(&path, "kind = \"validate\"\ngraphs = [{ source = \"hyperbolic\", depth = 2 }]\n[render]\nheatmap = true\n").unwrap();
    let status =
        Command::new(env!("CARGO_BIN_EXE_carrier-lab")).args(["render", "--config"]).arg(&path).arg("--out").arg(&dir).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.join("hyperbolic-7-2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
