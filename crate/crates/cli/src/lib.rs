//! Experiment orchestration for `carrier-lab`: config files, corpus
//! construction, parameter sweeps, artifacts and rendering.

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod outcome;
pub mod params;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use carrier_core::io::{report_to_string, GraphFile, PackingFile};
use carrier_core::packing::PackingOptions;
use carrier_core::potential::{exhaust, green};
use carrier_core::render::{render, Scene};
use serde::Serialize;

pub use config::{ExperimentConfig, GraphSource, Kind};
pub use outcome::{Check, Outcome};

pub const EXIT_PASSED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
    pub out_dir: PathBuf,
}

impl Summary {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASSED
        } else {
            EXIT_FAILED
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} ({}), seed {}, {:.1} s\n", self.name, self.kind, self.seed, self.seconds);
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "{}", if self.passed { "all checks passed" } else { "some checks FAILED" });
        s
    }
}

pub fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    match (&opts.out_dir, &cfg.output.dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => cfg.resolve(d),
        (None, None) => PathBuf::from("out").join(&cfg.name),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Runs one sweep and writes `<kind>.csv`, `<kind>-report.json`,
/// `<kind>-summary.json`, `<kind>-summary.txt` and any extra artifacts.
pub fn run_kind(cfg: &ExperimentConfig, kind: Kind, opts: &RunOptions) -> Result<Summary> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    let dir = output_dir(cfg, opts);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let start = Instant::now();
    let outcome = experiments::dispatch(cfg, kind, seed).with_context(|| format!("running {} sweep", kind.as_str()))?;
    let summary = Summary {
        name: cfg.name.clone(),
        kind: kind.as_str().to_string(),
        seed,
        passed: outcome.passed(),
        seconds: start.elapsed().as_secs_f64(),
        checks: outcome.checks.clone(),
        out_dir: dir.clone(),
    };
    let k = kind.as_str();
    write(&dir, &format!("{k}.csv"), outcome.rows.as_str())?;
    write(&dir, &format!("{k}-report.json"), &report_to_string(&outcome.report)?)?;
    for (name, contents) in &outcome.files {
        write(&dir, name, contents)?;
    }
    write(&dir, &format!("{k}-summary.json"), &report_to_string(&summary)?)?;
    write(&dir, &format!("{k}-summary.txt"), &summary.to_text())?;
    Ok(summary)
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Summary> {
    run_kind(cfg, cfg.kind, opts)
}

/// Writes a `carrier-graph/1` file per corpus graph; triangulations also get
/// their combinatorial file (no positions) and their packing.
pub fn generate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let dir = output_dir(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for c in corpus::build_all(cfg, &PackingOptions::default())? {
        written.push(write(&dir, &format!("{}.graph.json", c.label), &GraphFile::from_graph(&c.graph).to_canonical_string())?);
        if let (Some(t), Some(p)) = (&c.triangulation, &c.packing) {
            written.push(write(
                &dir,
                &format!("{}.combinatorial.json", c.label),
                &GraphFile::from_triangulation(t).to_canonical_string(),
            )?);
            written.push(write(&dir, &format!("{}.packing.json", c.label), &PackingFile::from_packing(p).to_canonical_string())?);
        }
    }
    Ok(written)
}

/// One SVG per corpus graph, drawn with the config's `[render]` spec. When the
/// heatmap layer is on, vertices are coloured by `G(·, root)` at ε = 0.05.
pub fn render_corpus(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let dir = output_dir(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for c in corpus::build_all(cfg, &PackingOptions::default())? {
        let mut scene = match (&c.packing, &c.triangulation) {
            (Some(p), Some(t)) => Scene::from_packing(&PackingFile::from_packing(p), t),
            _ => Scene::from_graph(&c.graph),
        };
        if cfg.render.heatmap {
            if let Ok(col) = exhaust(&c.graph, 0.05).and_then(|ex| green(&ex, ex.nearest_live(c.graph.position(c.root)))) {
                scene = scene.with_heat(col.values);
            }
        }
        let svg = render(&scene, &cfg.render)?;
        written.push(write(&dir, &format!("{}.svg", c.label), &svg)?);
    }
    Ok(written)
}
