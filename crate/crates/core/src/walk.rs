//! Monte Carlo for the weighted random walk: exit laws from Euclidean balls,
//! exit-time functionals, cone hitting and convergence to the unit circle.
//!
//! Every sample draws from its own ChaCha stream selected by the sample
//! index, so results do not depend on how samples are spread over threads.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;
use crate::geom::{AngleInterval, Point};
use crate::graph::{EmbeddedGraph, VertexId};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const HISTOGRAM_BINS: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    Uniform,
    #[default]
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub samples: usize,
    pub weight_source: WeightSource,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { seed: 0, max_steps: DEFAULT_MAX_STEPS, samples: 10_000, weight_source: WeightSource::Graph }
    }
}

impl WalkConfig {
    fn check(&self) -> Result<(), WalkError> {
        if self.samples == 0 || self.max_steps == 0 {
            return Err(WalkError::InvalidConfig("samples and max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// The random stream of sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A proportion with its 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Estimate {
    pub fn proportion(hits: usize, n: usize) -> Self {
        let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let half_width = if n == 0 { f64::INFINITY } else { Z95 * (p * (1.0 - p) / n as f64).sqrt() };
        Estimate { value: p, half_width, n }
    }

    pub fn mean(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Estimate { value: f64::NAN, half_width: f64::INFINITY, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { value: mean, half_width: Z95 * (var / n as f64).sqrt(), n }
    }

    /// Standard error implied by the half-width.
    pub fn sigma(&self) -> f64 {
        self.half_width / Z95
    }

    pub fn excludes_zero(&self) -> bool {
        self.value - self.half_width > 0.0
    }
}

/// Neighbour tables with cumulative transition weights.
#[derive(Debug, Clone)]
pub struct WalkTables {
    neighbors: Vec<Vec<VertexId>>,
    cumulative: Vec<Vec<f64>>,
}

impl WalkTables {
    pub fn new(g: &EmbeddedGraph, source: WeightSource) -> Self {
        let mut neighbors = Vec::with_capacity(g.vertex_count());
        let mut cumulative = Vec::with_capacity(g.vertex_count());
        for v in 0..g.vertex_count() {
            let mut acc = 0.0;
            let (mut nb, mut cw) = (Vec::new(), Vec::new());
            for inc in g.rotation(v) {
                acc += match source {
                    WeightSource::Uniform => 1.0,
                    WeightSource::Graph => g.edge(inc.edge).weight,
                };
                nb.push(inc.to);
                cw.push(acc);
            }
            neighbors.push(nb);
            cumulative.push(cw);
        }
        WalkTables { neighbors, cumulative }
    }

    pub fn step(&self, v: VertexId, rng: &mut impl Rng) -> Result<VertexId, WalkError> {
        let cw = &self.cumulative[v];
        let total = *cw.last().ok_or(WalkError::IsolatedVertex(v))?;
        let u = rng.gen::<f64>() * total;
        let k = cw.partition_point(|&c| c <= u).min(cw.len() - 1);
        Ok(self.neighbors[v][k])
    }
}

/// One step of the walk from `v`, choosing a neighbour with probability proportional to edge weight.
pub fn step(g: &EmbeddedGraph, v: VertexId, rng: &mut impl Rng) -> Result<VertexId, WalkError> {
    let rot = g.rotation(v);
    let total: f64 = rot.iter().map(|i| g.edge(i.edge).weight).sum();
    if rot.is_empty() {
        return Err(WalkError::IsolatedVertex(v));
    }
    let mut u = rng.gen::<f64>() * total;
    for inc in rot {
        u -= g.edge(inc.edge).weight;
        if u < 0.0 {
            return Ok(inc.to);
        }
    }
    Ok(rot[rot.len() - 1].to)
}

/// Runs `cfg.samples` walks in parallel; `f` gets the sample's own stream.
fn simulate<T: Send>(cfg: &WalkConfig, f: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| f(&mut sample_rng(cfg.seed, i)))
        .collect()
}

/// Where and how a single walk stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopSample {
    pub vertex: VertexId,
    pub steps: u64,
    /// `Σ_{t=0}^{T} r²_{X_t}`, the stopping time included.
    pub functional: f64,
}

/// Walks from `start` until `stop(X_t)` holds (t = 0 included). `None` marks truncation.
pub fn walk_until(
    g: &EmbeddedGraph,
    tables: &WalkTables,
    start: VertexId,
    max_steps: u64,
    rng: &mut impl Rng,
    mut stop: impl FnMut(VertexId) -> bool,
) -> Result<Option<StopSample>, WalkError> {
    let iso = g.isolation_radii();
    let mut v = start;
    let mut functional = iso[v] * iso[v];
    let mut steps = 0;
    while !stop(v) {
        if steps == max_steps {
            return Ok(None);
        }
        v = tables.step(v, rng)?;
        steps += 1;
        functional += iso[v] * iso[v];
    }
    Ok(Some(StopSample { vertex: v, steps, functional }))
}

/// Empirical law of the stopping vertex of walks from `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitStats {
    pub n: usize,
    pub truncated: usize,
    pub counts: BTreeMap<VertexId, usize>,
}

impl HitStats {
    pub fn probability(&self, v: VertexId) -> Estimate {
        Estimate::proportion(self.counts.get(&v).copied().unwrap_or(0), self.n - self.truncated)
    }

    pub fn probability_of(&self, set: impl Fn(VertexId) -> bool) -> Estimate {
        let hits = self.counts.iter().filter(|(&v, _)| set(v)).map(|(_, &c)| c).sum();
        Estimate::proportion(hits, self.n - self.truncated)
    }
}

pub fn hitting_distribution(
    g: &EmbeddedGraph,
    start: VertexId,
    stop: impl Fn(VertexId) -> bool + Sync,
    cfg: &WalkConfig,
) -> Result<HitStats, WalkError> {
    cfg.check()?;
    let tables = WalkTables::new(g, cfg.weight_source);
    let samples = simulate(cfg, |rng| walk_until(g, &tables, start, cfg.max_steps, rng, &stop));
    let mut stats = HitStats { n: cfg.samples, truncated: 0, counts: BTreeMap::new() };
    for s in samples {
        match s? {
            Some(s) => *stats.counts.entry(s.vertex).or_default() += 1,
            None => stats.truncated += 1,
        }
    }
    if stats.truncated == stats.n {
        return Err(WalkError::AllWalksTruncated(stats.n));
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitStats {
    pub n: usize,
    /// Counts of `arg(X_{T_r} − u)` in equal bins of `[0, 2π)`.
    pub exit_arg_histogram: Vec<usize>,
    /// Present when an interval was supplied.
    pub arc_probability: Option<Estimate>,
    pub time_functional_mean: Estimate,
    pub truncated: usize,
    pub exit_counts: BTreeMap<VertexId, usize>,
}

impl ExitStats {
    pub fn completed(&self) -> usize {
        self.n - self.truncated
    }
}

fn check_carrier(g: &EmbeddedGraph, u: VertexId, radius: f64) -> Result<(), WalkError> {
    if g.disc_in_carrier(g.position(u), radius) {
        Ok(())
    } else {
        Err(WalkError::BallEscapesCarrier { center: u, radius })
    }
}

fn exit_stats(
    g: &EmbeddedGraph,
    u: VertexId,
    r: f64,
    arc: Option<AngleInterval>,
    cfg: &WalkConfig,
) -> Result<ExitStats, WalkError> {
    cfg.check()?;
    check_carrier(g, u, r)?;
    let c = g.position(u);
    if (0..g.vertex_count()).all(|v| g.position(v).dist(c) <= r) {
        return Err(WalkError::InvalidConfig("the Euclidean ball contains every vertex".into()));
    }
    let tables = WalkTables::new(g, cfg.weight_source);
    let samples = simulate(cfg, |rng| walk_until(g, &tables, u, cfg.max_steps, rng, |v| g.position(v).dist(c) > r));
    let mut hist = vec![0usize; HISTOGRAM_BINS];
    let mut counts = BTreeMap::new();
    let mut functional = Vec::with_capacity(cfg.samples);
    let mut truncated = 0;
    let mut in_arc = 0;
    for s in samples {
        let Some(s) = s? else {
            truncated += 1;
            continue;
        };
        let theta = (g.position(s.vertex) - c).arg();
        hist[((theta / TAU * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)] += 1;
        *counts.entry(s.vertex).or_default() += 1;
        functional.push(s.functional);
        if arc.is_some_and(|i| i.contains(theta)) {
            in_arc += 1;
        }
    }
    if truncated == cfg.samples {
        return Err(WalkError::AllWalksTruncated(truncated));
    }
    Ok(ExitStats {
        n: cfg.samples,
        exit_arg_histogram: hist,
        arc_probability: arc.map(|_| Estimate::proportion(in_arc, cfg.samples - truncated)),
        time_functional_mean: Estimate::mean(&functional),
        truncated,
        exit_counts: counts,
    })
}

/// Walks from `u` until the first exit from `V_euc(u, r)`.
pub fn run_to_exit(g: &EmbeddedGraph, u: VertexId, r: f64, cfg: &WalkConfig) -> Result<ExitStats, WalkError> {
    exit_stats(g, u, r, None, cfg)
}

/// Estimates `P_u(arg(X_{T_r} − u) ∈ I)`.
pub fn exit_arc_probability(
    g: &EmbeddedGraph,
    u: VertexId,
    r: f64,
    interval: AngleInterval,
    cfg: &WalkConfig,
) -> Result<ExitStats, WalkError> {
    exit_stats(g, u, r, Some(interval), cfg)
}

/// Estimates `E_u Σ_{t=0}^{T_r} r²_{X_t}`.
pub fn exit_time_functional(g: &EmbeddedGraph, u: VertexId, r: f64, cfg: &WalkConfig) -> Result<Estimate, WalkError> {
    Ok(exit_stats(g, u, r, None, cfg)?.time_functional_mean)
}

pub const DEFAULT_CONE_CLEARANCE: f64 = 0.125;

/// Probability of reaching `V ∩ Cone(u, r, I) ∖ B_euc(u, c·r)` before leaving `V_euc(u, 2r)`.
pub fn cone_hitting_probability(
    g: &EmbeddedGraph,
    u: VertexId,
    r: f64,
    interval: AngleInterval,
    clearance: f64,
    cfg: &WalkConfig,
) -> Result<Estimate, WalkError> {
    cfg.check()?;
    check_carrier(g, u, 2.0 * r)?;
    let c = g.position(u);
    let in_target = |v: VertexId| {
        let d = g.position(v) - c;
        let n = d.norm();
        n <= r && n > clearance * r && interval.contains(d.arg())
    };
    let stats = hitting_distribution(g, u, |v| in_target(v) || g.position(v).dist(c) > 2.0 * r, cfg)?;
    Ok(stats.probability_of(in_target))
}

/// Angular positions where walks first come within `stop_radius` of the unit
/// circle or reach the outer face of the truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryHits {
    pub angles: Vec<f64>,
    pub vertices: Vec<VertexId>,
    pub truncated: usize,
}

fn outer_mask(g: &EmbeddedGraph) -> Vec<bool> {
    let mut m = vec![false; g.vertex_count()];
    for v in g.outer_vertices() {
        m[v] = true;
    }
    m
}

pub fn walk_to_boundary(g: &EmbeddedGraph, u: VertexId, stop_radius: f64, cfg: &WalkConfig) -> Result<BoundaryHits, WalkError> {
    cfg.check()?;
    if !(stop_radius > 0.0 && stop_radius < 1.0) {
        return Err(WalkError::InvalidConfig(format!("stop radius {stop_radius} outside (0, 1)")));
    }
    let outer = outer_mask(g);
    let stats = {
        let tables = WalkTables::new(g, cfg.weight_source);
        let stop = |v: VertexId| outer[v] || 1.0 - g.position(v).norm() <= stop_radius;
        simulate(cfg, |rng| walk_until(g, &tables, u, cfg.max_steps, rng, stop))
    };
    let mut hits = BoundaryHits { angles: Vec::new(), vertices: Vec::new(), truncated: 0 };
    for s in stats {
        match s? {
            Some(s) => {
                hits.angles.push(g.position(s.vertex).arg());
                hits.vertices.push(s.vertex);
            }
            None => hits.truncated += 1,
        }
    }
    if hits.angles.is_empty() {
        return Err(WalkError::AllWalksTruncated(hits.truncated));
    }
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomProbe {
    pub radii: Vec<f64>,
    pub estimates: Vec<Estimate>,
    /// Smallest C with `p(r) ≤ C / |log r|` for every radius.
    pub fitted_c: f64,
    pub truncated: usize,
}

impl AtomProbe {
    pub fn nonincreasing(&self) -> bool {
        self.estimates.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

/// Probabilities that the walk from `u` visits `V_euc(e^{iξ}, r)` before the
/// stopping annulus, for each `r` in `radii` (decreasing). All radii share one
/// set of paths, so the estimates are exactly nested.
pub fn atom_probe(
    g: &EmbeddedGraph,
    u: VertexId,
    xi: f64,
    radii: &[f64],
    stop_radius: f64,
    cfg: &WalkConfig,
) -> Result<AtomProbe, WalkError> {
    cfg.check()?;
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(WalkError::InvalidConfig("radii must be strictly decreasing in (0, 1)".into()));
    }
    let target = Point::polar(1.0, xi);
    if radii.first().is_some_and(|&r| g.position(u).dist(target) <= r) {
        return Err(WalkError::InvalidConfig("start lies inside the largest probe ball".into()));
    }
    let outer = outer_mask(g);
    let tables = WalkTables::new(g, cfg.weight_source);
    let closest = simulate(cfg, |rng| {
        let mut best = f64::INFINITY;
        let stop = |v: VertexId| {
            best = best.min(g.position(v).dist(target));
            outer[v] || 1.0 - g.position(v).norm() <= stop_radius
        };
        walk_until(g, &tables, u, cfg.max_steps, rng, stop).map(|s| s.map(|_| best))
    });
    let mut dists = Vec::with_capacity(cfg.samples);
    let mut truncated = 0;
    for c in closest {
        match c? {
            Some(d) => dists.push(d),
            None => truncated += 1,
        }
    }
    if dists.is_empty() {
        return Err(WalkError::AllWalksTruncated(truncated));
    }
    let estimates: Vec<Estimate> = radii
        .iter()
        .map(|&r| Estimate::proportion(dists.iter().filter(|&&d| d <= r).count(), dists.len()))
        .collect();
    let fitted_c = radii.iter().zip(&estimates).map(|(r, e)| e.value * r.ln().abs()).fold(0.0, f64::max);
    Ok(AtomProbe { radii: radii.to_vec(), estimates, fitted_c, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::triangular_lattice;
    use std::f64::consts::PI;

    fn cfg(samples: usize, seed: u64) -> WalkConfig {
        WalkConfig { seed, samples, ..Default::default() }
    }

    #[test]
    fn weighted_step_frequencies() {
        let pos = vec![Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(-1.0, -1.0)];
        let g = EmbeddedGraph::build(pos, vec![(0, 1, 2.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let t = WalkTables::new(&g, WeightSource::Graph);
        let n = 200_000;
        let mut rng = sample_rng(7, 0);
        let mut c = [0usize; 4];
        for _ in 0..n {
            c[t.step(0, &mut rng).unwrap()] += 1;
        }
        for (v, p) in [(1, 0.5), (2, 0.25), (3, 0.25)] {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c[v] as f64 / n as f64 - p).abs() < 4.0 * sigma, "{v}: {}", c[v]);
        }
        let mut rng = sample_rng(7, 1);
        let mut c2 = [0usize; 4];
        for _ in 0..20_000 {
            c2[step(&g, 0, &mut rng).unwrap()] += 1;
        }
        assert!(c2[1] > c2[2] && c2[1] > c2[3]);
    }

    #[test]
    fn lattice_sectors_are_symmetric() {
        let g = triangular_lattice(8);
        let s = exit_arc_probability(&g, 0, 3.5, AngleInterval::new(0.0, PI), &cfg(20_000, 3)).unwrap();
        let p = s.arc_probability.unwrap();
        // sectors offset from the lattice axes are permuted by the π/3 rotation
        let q = exit_arc_probability(&g, 0, 3.5, AngleInterval::new(0.01, PI / 3.0), &cfg(20_000, 4))
            .unwrap()
            .arc_probability
            .unwrap();
        assert!((p.value - 0.5).abs() < 0.1);
        assert!((q.value - 1.0 / 6.0).abs() < 3.0 * q.sigma(), "{q:?}");
        let full = exit_arc_probability(&g, 0, 3.5, AngleInterval::full(), &cfg(500, 5)).unwrap();
        assert_eq!(full.arc_probability.unwrap().value, 1.0);
    }

    #[test]
    fn single_step_exit() {
        let g = triangular_lattice(3);
        let stats = run_to_exit(&g, 0, 0.5, &cfg(1000, 1)).unwrap();
        assert_eq!(stats.truncated, 0);
        // t = 0 and t = T_r = 1 both contribute r_x² = 1
        assert_eq!(stats.time_functional_mean.value, 2.0);
        let hits: usize = stats.exit_arg_histogram.iter().sum();
        assert_eq!(hits, 1000);
        assert_eq!(stats.exit_counts.len(), 6);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let g = triangular_lattice(6);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_to_exit(&g, 0, 3.0, &cfg(3000, 11)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn cone_monotone_in_interval() {
        let g = triangular_lattice(10);
        let narrow = cone_hitting_probability(&g, 0, 3.0, AngleInterval::centered(0.3, 2.0), 0.125, &cfg(4000, 9)).unwrap();
        let full = cone_hitting_probability(&g, 0, 3.0, AngleInterval::full(), 0.125, &cfg(4000, 9)).unwrap();
        assert!(full.value >= narrow.value);
        assert_eq!(full.value, 1.0);
    }

    #[test]
    fn atom_probe_is_nested() {
        let lat = triangular_lattice(6);
        let pos = lat.positions().iter().map(|&p| p * (0.95 / 6.0)).collect();
        let g = EmbeddedGraph::build(pos, lat.edges().iter().map(|e| (e.u, e.v, 1.0)).collect()).unwrap();
        let a = atom_probe(&g, 0, 0.0, &[0.5, 0.3, 0.2, 0.1], 0.05, &cfg(4000, 2)).unwrap();
        assert!(a.nonincreasing());
        assert!(a.fitted_c.is_finite());
        let b = walk_to_boundary(&g, 0, 0.05, &cfg(2000, 2)).unwrap();
        assert_eq!(b.angles.len() + b.truncated, 2000);
    }
}
