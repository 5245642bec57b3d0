//! Building the graphs named in a config.

use anyhow::{Context, Result};
use carrier_core::generate::{generate_delaunay, generate_hyperbolic, path, square_grid, triangular_lattice, unit_triangle};
use carrier_core::io::GraphFile;
use carrier_core::packing::{pack_maximal, to_embedded_graph, PackingOptions, PackingResult};
use carrier_core::{EmbeddedGraph, GraphError, Point, Triangulation, VertexId};

use crate::config::{ExperimentConfig, GraphSource};

#[derive(Debug, Clone)]
pub struct CorpusGraph {
    pub label: String,
    pub graph: EmbeddedGraph,
    pub triangulation: Option<Triangulation>,
    pub packing: Option<PackingResult>,
    /// Packing root, or the vertex nearest the centroid.
    pub root: VertexId,
    pub pack_seconds: f64,
}

impl CorpusGraph {
    /// Vertices off the outer face within `max_hop` hops of the root, in id order.
    pub fn interior_within(&self, max_hop: usize) -> Vec<VertexId> {
        let hop = self.graph.hop_distances(self.root);
        let outer = self.outer_mask();
        (0..self.graph.vertex_count()).filter(|&v| hop[v] <= max_hop && !outer[v]).collect()
    }

    pub fn outer_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.graph.vertex_count()];
        for v in self.graph.outer_vertices() {
            m[v] = true;
        }
        m
    }
}

pub fn wheel(spokes: usize) -> Result<Triangulation> {
    anyhow::ensure!(spokes >= 3, "a wheel needs at least 3 spokes");
    let tris = (1..=spokes).map(|i| [0, i, i % spokes + 1]).collect();
    Ok(Triangulation::new(spokes + 1, tris)?)
}

pub fn pack_triangulation(label: &str, t: Triangulation, opts: &PackingOptions) -> Result<CorpusGraph> {
    let start = std::time::Instant::now();
    let p = pack_maximal(&t, opts).with_context(|| format!("packing {label}"))?;
    let pack_seconds = start.elapsed().as_secs_f64();
    let graph = to_embedded_graph(&p, &t).with_context(|| format!("embedding the packing of {label}"))?;
    Ok(CorpusGraph { label: label.to_string(), graph, root: p.root, triangulation: Some(t), packing: Some(p), pack_seconds })
}

fn plain(label: String, graph: EmbeddedGraph) -> CorpusGraph {
    let n = graph.vertex_count() as f64;
    let c = graph.positions().iter().fold(Point::ORIGIN, |a, &p| a + p * (1.0 / n));
    let root = graph.nearest_vertex(c);
    CorpusGraph { label, graph, triangulation: None, packing: None, root, pack_seconds: 0.0 }
}

pub fn build(src: &GraphSource, cfg: &ExperimentConfig, opts: &PackingOptions) -> Result<CorpusGraph> {
    let label = src.label();
    log::info!("building {label}");
    Ok(match src {
        GraphSource::Hyperbolic { deg, depth } => pack_triangulation(&label, generate_hyperbolic(*deg, *depth)?, opts)?,
        GraphSource::Wheel { spokes } => pack_triangulation(&label, wheel(*spokes)?, opts)?,
        GraphSource::Lattice { radius } => plain(label, triangular_lattice(*radius)),
        GraphSource::Grid { nx, ny } => plain(label, square_grid(*nx, *ny)),
        GraphSource::Delaunay { n, seed } => plain(label, generate_delaunay(*n, *seed)?),
        GraphSource::Triangle => plain(label, unit_triangle()),
        GraphSource::Path { k } => plain(label, path(*k)),
        GraphSource::File { path } => {
            let full = cfg.resolve(path);
            let f = GraphFile::load(&full).with_context(|| format!("loading {}", full.display()))?;
            if f.positions.is_none() {
                return Err(GraphError::MissingPositions).with_context(|| format!("{} has no positions", full.display()));
            }
            plain(label, f.to_graph()?)
        }
    })
}

pub fn build_all(cfg: &ExperimentConfig, opts: &PackingOptions) -> Result<Vec<CorpusGraph>> {
    cfg.graphs.iter().map(|s| build(s, cfg, opts)).collect()
}

/// `k` entries spread evenly over `items`, keeping order.
pub fn spread<T: Copy>(items: &[T], k: usize) -> Vec<T> {
    if items.len() <= k {
        return items.to_vec();
    }
    (0..k).map(|i| items[i * items.len() / k]).collect()
}
