//! Sparse potential-theory solvers against dense brute force on small
//! weighted Delaunay graphs, and Monte Carlo hitting against exact values.

use carrier_core::generate::generate_delaunay;
use carrier_core::potential::{dirichlet_solve, effective_resistance, green, martin_kernel, Exhaustion};
use carrier_core::walk::{hitting_distribution, WalkConfig};
use carrier_core::{EmbeddedGraph, VertexId};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weighted_delaunay(n: usize, seed: u64) -> EmbeddedGraph {
    let g = generate_delaunay(n, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    let edges = g.edges().iter().map(|e| (e.u, e.v, rng.gen_range(0.5..2.0))).collect();
    EmbeddedGraph::build(g.positions().to_vec(), edges).unwrap()
}

fn interior(g: &EmbeddedGraph) -> Option<Exhaustion<'_>> {
    let outer = g.outer_vertices();
    let live = (0..g.vertex_count()).filter(|v| !outer.contains(v)).collect();
    Exhaustion::from_live(g, live, 0.0).ok()
}

/// Transition matrix of the walk restricted to the live set.
fn killed_transitions(g: &EmbeddedGraph, live: &[VertexId]) -> DMatrix<f64> {
    let n = live.len();
    let mut p = DMatrix::zeros(n, n);
    for (i, &u) in live.iter().enumerate() {
        let total: f64 = g.rotation(u).iter().map(|inc| g.edge(inc.edge).weight).sum();
        for inc in g.rotation(u) {
            if let Some(j) = live.iter().position(|&v| v == inc.to) {
                p[(i, j)] += g.edge(inc.edge).weight / total;
            }
        }
    }
    p
}

/// Expected visits to `live[j]` starting from `live[i]`.
fn dense_green(g: &EmbeddedGraph, live: &[VertexId]) -> DMatrix<f64> {
    let p = killed_transitions(g, live);
    (DMatrix::identity(live.len(), live.len()) - p).try_inverse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn green_and_martin_match_dense_inverse() {
    let mut cases = 0;
    for seed in 0..12 {
        let g = weighted_delaunay(40 + 12 * seed as usize, seed);
        let Some(ex) = interior(&g) else { continue };
        let live = ex.live().to_vec();
        let dense = dense_green(&g, &live);
        let x0 = live[0];
        for (j, &y) in live.iter().enumerate().step_by(5) {
            let col = green(&ex, y).unwrap();
            let m = martin_kernel(&ex, x0, y).unwrap();
            for (i, &x) in live.iter().enumerate() {
                assert!(rel(col.values[x], dense[(i, j)]) < 1e-8, "seed {seed}: G({x},{y})");
                assert!(rel(m.values[x], dense[(i, j)] / dense[(0, j)]) < 1e-8, "seed {seed}: M({x},{y})");
            }
        }
        cases += 1;
    }
    assert!(cases >= 8, "only {cases} graphs had a connected interior");
}

#[test]
fn green_is_weighted_reversible() {
    let g = weighted_delaunay(80, 3);
    let ex = interior(&g).unwrap();
    let live = ex.live();
    let cols: Vec<_> = live.iter().map(|&y| green(&ex, y).unwrap()).collect();
    for (a, &x) in live.iter().enumerate() {
        for (b, &y) in live.iter().enumerate() {
            let lhs = g.vertex_weight(x) * cols[b].values[x];
            let rhs = g.vertex_weight(y) * cols[a].values[y];
            assert!(rel(lhs, rhs) < 1e-10, "w(x)G(x,y) {lhs} vs w(y)G(y,x) {rhs} at {x},{y}");
        }
    }
}

#[test]
fn resistance_matches_grounded_laplacian() {
    for seed in 0..6 {
        let g = weighted_delaunay(60, 100 + seed);
        let n = g.vertex_count();
        let mut lap = DMatrix::zeros(n, n);
        for e in g.edges() {
            lap[(e.u, e.u)] += e.weight;
            lap[(e.v, e.v)] += e.weight;
            lap[(e.u, e.v)] -= e.weight;
            lap[(e.v, e.u)] -= e.weight;
        }
        let (a, z) = (0, n - 1);
        let keep: Vec<usize> = (0..n).filter(|&v| v != z).collect();
        let grounded = DMatrix::from_fn(n - 1, n - 1, |i, j| lap[(keep[i], keep[j])]);
        let mut rhs = DVector::zeros(n - 1);
        rhs[keep.iter().position(|&v| v == a).unwrap()] = 1.0;
        let phi = grounded.lu().solve(&rhs).unwrap();
        let exact = phi[keep.iter().position(|&v| v == a).unwrap()];
        let r = effective_resistance(&g, &[a], &[z]).unwrap().value;
        assert!(rel(r, exact) < 1e-8, "seed {seed}: {r} vs {exact}");
    }
}

#[test]
fn monte_carlo_hitting_within_four_sigma() {
    let g = weighted_delaunay(70, 9);
    let ex = interior(&g).unwrap();
    let live = ex.live().to_vec();
    let target = |v: VertexId| g.position(v).y > 0.0;
    let h = dirichlet_solve(&ex, |v| if target(v) { 1.0 } else { 0.0 }).unwrap();
    let cfg = WalkConfig { seed: 42, samples: 20_000, ..Default::default() };
    for &start in live.iter().step_by(7) {
        let stats = hitting_distribution(&g, start, |v| !ex.is_live(v), &cfg).unwrap();
        let est = stats.probability_of(target);
        let p = h[start];
        let sigma = (p * (1.0 - p) / cfg.samples as f64).sqrt().max(1e-12);
        assert!((est.value - p).abs() <= 4.0 * sigma, "start {start}: {} vs {p}", est.value);
    }
}
