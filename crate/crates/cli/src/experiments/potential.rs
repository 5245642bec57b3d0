//! resistance, martin, harnack, bhp and potential-oracle sweeps.

use std::f64::consts::TAU;

use anyhow::{ensure, Result};
use carrier_core::generate::generate_delaunay;
use carrier_core::metric::CablePoint;
use carrier_core::potential::{
    boundary_harnack_ratio, dirichlet_solve, effective_resistance, exhaust, green_columns, harnack_ratio,
    martin_convergence, martin_kernel, resistance_annulus_bound, resistance_log_growth, Exhaustion,
};
use carrier_core::walk::{hitting_distribution, WalkConfig};
use carrier_core::{EmbeddedGraph, Point, VertexId};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::corpus::CorpusGraph;
use crate::experiments::walks::sub_seed;
use crate::outcome::{Outcome, Row};
use crate::params::*;

pub fn run_resistance(corpus: &[CorpusGraph], p: &ResistanceParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let mut annuli = Vec::new();
    let mut fits = Vec::new();
    let mut below = 0;
    let mut series_above = 0;
    for &eps in &p.epsilons {
        let ex = exhaust(&c.graph, eps)?;
        for &xi in &p.xis {
            for &r in &p.annulus_radii {
                let b = resistance_annulus_bound(&ex, xi, r)?;
                let at = Row::on(&c.label).xi(xi).r(r).eps(eps);
                out.row(&at, "annulus_measured", b.measured);
                out.row(&at, "annulus_variational_lower", b.variational_lower);
                if b.measured < b.variational_lower {
                    below += 1;
                }
                annuli.push(json!({ "epsilon": eps, "xi": xi, "r": r, "measured": b.measured, "lower": b.variational_lower }));
            }
            let fit = resistance_log_growth(&ex, xi, p.r, &p.ratios, p.k)?;
            for ((ratio, res), lower) in fit.ratios.iter().zip(&fit.resistances).zip(&fit.series_lower) {
                let at = Row::on(&c.label).xi(xi).r(ratio * p.r).eps(eps);
                out.row(&at, "resistance", *res);
                out.row(&at, "series_lower", *lower);
                if lower > res {
                    series_above += 1;
                }
            }
            out.check(
                format!("epsilon {eps}, xi {xi}: positive log slope"),
                fit.slope > 0.0,
                format!("slope {:.4}, intercept {:.4}", fit.slope, fit.intercept),
            );
            fits.push(json!({ "epsilon": eps, "xi": xi, "fit": fit }));
        }
    }
    out.check(
        "annulus: measured >= variational lower bound",
        below == 0,
        format!("{below} of {} annuli below the bound", annuli.len()),
    );
    out.check("contracted series stays below the measured resistance", series_above == 0, format!("{series_above} violations"));
    out.report = json!({ "graph": c.label, "annuli": annuli, "log_growth": fits });
    Ok(out)
}

pub fn run_martin(corpus: &[CorpusGraph], p: &MartinParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let probe = c.interior_within(p.probe_hops);
    let reports: Vec<_> = p
        .xis
        .par_iter()
        .map(|&xi| martin_convergence(&c.graph, &p.epsilons, c.root, xi, &probe))
        .collect::<Result<_, _>>()?;
    for (&xi, rep) in p.xis.iter().zip(&reports) {
        for (eps, d) in rep.epsilons[1..].iter().zip(&rep.successive) {
            out.row(&Row::on(&c.label).xi(xi).eps(*eps), "successive_sup_difference", *d);
        }
        out.row(&Row::on(&c.label).xi(xi), "separation", rep.separation);
        out.row(&Row::on(&c.label).xi(xi), "same_xi_residual", rep.same_xi_residual);
        out.check(
            format!("xi {xi}: Cauchy over the last {} refinements", p.cauchy_tail),
            rep.decreasing_tail(p.cauchy_tail),
            format!("successive {:?}", rep.successive),
        );
        out.check(
            format!("xi {xi}: separation >= {} x residual", p.separation_factor),
            rep.separation >= p.separation_factor * rep.same_xi_residual,
            format!("separation {:.4}, residual {:.4e}", rep.separation, rep.same_xi_residual),
        );
    }
    out.report = json!({ "graph": c.label, "probe": probe, "convergence": reports });
    Ok(out)
}

pub fn run_harnack(corpus: &[CorpusGraph], p: &HarnackParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let g = &c.graph;
    let iso = g.isolation_radii();
    let centres = c.interior_within(p.max_hop);
    // grid[i][j]: epsilon i, radius factor j
    let mut grid = vec![vec![(0.0f64, 0usize); p.radius_factors.len()]; p.epsilons.len()];
    for (i, &eps) in p.epsilons.iter().enumerate() {
        let ex = exhaust(g, eps)?;
        let poles: Vec<VertexId> = (0..p.poles)
            .map(|k| ex.nearest_live(Point::polar(p.pole_radius, TAU * k as f64 / p.poles as f64 + 0.2)))
            .collect();
        let cols = green_columns(&ex, &poles)?;
        for (j, &f) in p.radius_factors.iter().enumerate() {
            let ex = &ex;
            let cols = &cols;
            let iso = &iso;
            let vals: Vec<f64> = centres
                .par_iter()
                .filter(|&&u| ex.is_live(u))
                .flat_map_iter(|&u| {
                    let x = CablePoint::at_vertex(g, u);
                    cols.iter().filter_map(move |col| harnack_ratio(ex, x, f * iso[u], p.a, &col.values, &[col.y]).ok())
                })
                .collect();
            let max = vals.iter().copied().fold(0.0, f64::max);
            grid[i][j] = (max, vals.len());
            out.row(&Row::on(&c.label).r(f).eps(eps), "harnack_max", max);
        }
    }
    let admissible = grid.iter().flatten().all(|x| x.1 > 0);
    out.check("every cell has admissible balls", admissible, format!("{grid:?}"));
    stability_checks(&mut out, &grid, &p.epsilons, &p.radius_factors, p.stability);
    out.report = json!({ "graph": c.label, "epsilons": p.epsilons, "radius_factors": p.radius_factors, "a": p.a,
        "maxima": grid.iter().map(|row| row.iter().map(|x| x.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "counts": grid.iter().map(|row| row.iter().map(|x| x.1).collect::<Vec<_>>()).collect::<Vec<_>>() });
    Ok(out)
}

/// Compares the base cell `[0][0]` with one ε halving `[1][0]` and one r halving `[0][1]`.
fn stability_checks(out: &mut Outcome, grid: &[Vec<(f64, usize)>], eps: &[f64], rs: &[f64], factor: f64) {
    let base = grid[0][0].0;
    let ratio = |a: f64, b: f64| a.max(b) / a.min(b);
    if grid.len() > 1 {
        let q = ratio(base, grid[1][0].0);
        out.check(
            format!("stable under epsilon {} -> {}", eps[0], eps[1]),
            base > 0.0 && q <= factor,
            format!("{base:.4} vs {:.4} (factor {q:.3})", grid[1][0].0),
        );
    }
    if grid[0].len() > 1 {
        let q = ratio(base, grid[0][1].0);
        out.check(
            format!("stable under r {} -> {}", rs[0], rs[1]),
            base > 0.0 && q <= factor,
            format!("{base:.4} vs {:.4} (factor {q:.3})", grid[0][1].0),
        );
    }
}

pub fn run_bhp(corpus: &[CorpusGraph], p: &BhpParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let mut grid = vec![vec![(0.0f64, 0usize); p.radii.len()]; p.epsilons.len()];
    for (i, &eps) in p.epsilons.iter().enumerate() {
        let ex = exhaust(&c.graph, eps)?;
        for (j, &r) in p.radii.iter().enumerate() {
            let vals: Vec<(f64, f64)> = p
                .xis
                .par_iter()
                .map(|&xi| {
                    let x1 = ex.nearest_live(Point::polar(p.x1_radius, xi + p.x1_offset));
                    boundary_harnack_ratio(&ex, xi, r, c.root, x1, p.a0).map(|v| (xi, v))
                })
                .collect::<Result<_, _>>()?;
            for &(xi, v) in &vals {
                out.row(&Row::on(&c.label).xi(xi).r(r).eps(eps), "double_ratio", v);
            }
            grid[i][j] = (vals.iter().map(|x| x.1).fold(0.0, f64::max), vals.len());
        }
    }
    out.check(
        "maxima finite",
        grid.iter().flatten().all(|x| x.0.is_finite() && x.0 >= 1.0),
        format!("{grid:?}"),
    );
    stability_checks(&mut out, &grid, &p.epsilons, &p.radii, p.stability);
    out.report = json!({ "graph": c.label, "epsilons": p.epsilons, "radii": p.radii, "a0": p.a0,
        "maxima": grid.iter().map(|row| row.iter().map(|x| x.0).collect::<Vec<_>>()).collect::<Vec<_>>() });
    Ok(out)
}

/// Green's function `(I − P)^{-1}` on the live set by dense LU, with `P = W^{-1}A`.
fn dense_green(ex: &Exhaustion) -> Result<DMatrix<f64>> {
    let g = ex.base;
    let live = ex.live();
    let n = live.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    for (i, &v) in live.iter().enumerate() {
        let w = g.vertex_weight(v);
        for inc in g.rotation(v) {
            if let Some(j) = ex.live_index(inc.to) {
                m[(i, j)] -= g.edge(inc.edge).weight / w;
            }
        }
    }
    m.lu().try_inverse().ok_or_else(|| anyhow::anyhow!("dense Green matrix is singular"))
}

/// Resistance between single vertices by grounding `z` in the dense Laplacian.
fn dense_resistance(g: &EmbeddedGraph, a: VertexId, z: VertexId) -> Result<f64> {
    let n = g.vertex_count();
    let keep: Vec<VertexId> = (0..n).filter(|&v| v != z).collect();
    let pos = |v: VertexId| if v < z { v } else { v - 1 };
    let mut l = DMatrix::<f64>::zeros(n - 1, n - 1);
    for e in g.edges() {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if x != z {
                l[(pos(x), pos(x))] += e.weight;
                if y != z {
                    l[(pos(x), pos(y))] -= e.weight;
                }
            }
        }
    }
    let mut b = DVector::zeros(keep.len());
    b[pos(a)] = 1.0;
    let x = l.lu().solve(&b).ok_or_else(|| anyhow::anyhow!("grounded Laplacian is singular"))?;
    Ok(x[pos(a)])
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// One random weighted Delaunay graph and its sparse-vs-dense comparison.
fn oracle_case(k: usize, p: &PotentialOracleParams, seed: u64) -> Result<serde_json::Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, k));
    let n = rng.gen_range(p.min_vertices..=p.max_vertices);
    let base = generate_delaunay(n, rng.gen())?;
    let edges = base.edges().iter().map(|e| (e.u, e.v, rng.gen_range(0.5..2.0))).collect();
    let g = EmbeddedGraph::build(base.positions().to_vec(), edges)?;
    let ex = exhaust(&g, p.epsilon)?;
    let live = ex.live();
    ensure!(live.len() >= 2, "graph {k} has fewer than two live vertices");
    let x0 = ex.nearest_live(Point::ORIGIN);
    let ys = [live[0], live[live.len() / 2], *live.last().expect("nonempty")];
    let dense = dense_green(&ex)?;
    let cols = green_columns(&ex, &ys)?;
    let mut green_err: f64 = 0.0;
    let mut martin_err: f64 = 0.0;
    for (col, &y) in cols.iter().zip(&ys) {
        let jy = ex.live_index(y).expect("live pole");
        let scale = (0..live.len()).map(|i| dense[(i, jy)].abs()).fold(0.0, f64::max);
        for (i, &v) in live.iter().enumerate() {
            green_err = green_err.max((col.values[v] - dense[(i, jy)]).abs() / scale);
        }
        let m = martin_kernel(&ex, x0, y)?;
        let j0 = ex.live_index(x0).expect("live root");
        for (i, &v) in live.iter().enumerate() {
            martin_err = martin_err.max(rel_err(m.values[v], dense[(i, jy)] / dense[(j0, jy)]));
        }
    }
    let mut rev_err: f64 = 0.0;
    for a in 0..ys.len() {
        for b in 0..ys.len() {
            let (x, y) = (ys[a], ys[b]);
            let lhs = g.vertex_weight(x) * cols[b].values[x];
            let rhs = g.vertex_weight(y) * cols[a].values[y];
            rev_err = rev_err.max(rel_err(lhs, rhs));
        }
    }
    let (ra, rz) = (x0, *g.outer_vertices().first().expect("outer face"));
    let sparse_r = effective_resistance(&g, &[ra], &[rz])?.value;
    let dense_r = dense_resistance(&g, ra, rz)?;
    let res_err = rel_err(sparse_r, dense_r);

    let half = |v: VertexId| g.position(v).y >= 0.0;
    let h = dirichlet_solve(&ex, |v| if half(v) { 1.0 } else { 0.0 })?;
    let cfg = WalkConfig { seed: sub_seed(seed, 1000 + k), samples: p.mc_samples, ..Default::default() };
    let hits = hitting_distribution(&g, x0, |v| !ex.is_live(v), &cfg)?;
    let est = hits.probability_of(half);
    let exact = h[x0];
    let sigma = (exact * (1.0 - exact) / est.n as f64).sqrt();
    let z = if sigma > 0.0 { (est.value - exact).abs() / sigma } else if est.value == exact { 0.0 } else { f64::INFINITY };
    Ok(json!({ "case": k, "vertices": n, "live": live.len(), "green": green_err, "martin": martin_err,
        "reversibility": rev_err, "resistance": res_err, "hitting_exact": exact, "hitting_mc": est.value, "z": z }))
}

pub fn run_potential_oracle(p: &PotentialOracleParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let cases: Vec<serde_json::Value> = (0..p.graphs).into_par_iter().map(|k| oracle_case(k, p, seed)).collect::<Result<_>>()?;
    let worst = |key: &str| cases.iter().map(|c| c[key].as_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    for c in &cases {
        let label = format!("delaunay-case-{}", c["case"]);
        for key in ["green", "martin", "reversibility", "resistance", "z"] {
            out.row(&Row::on(&label), key, c[key].as_f64().unwrap_or(f64::NAN));
        }
    }
    let (gr, ma, re, rs, z) = (worst("green"), worst("martin"), worst("reversibility"), worst("resistance"), worst("z"));
    out.check("Green columns match dense oracle", gr <= p.rel_tol, format!("max relative error {gr:.3e}"));
    out.check("Martin kernels match dense oracle", ma <= p.rel_tol, format!("max relative error {ma:.3e}"));
    out.check("resistances match dense oracle", rs <= p.rel_tol, format!("max relative error {rs:.3e}"));
    out.check("weighted reversibility", re <= p.reversibility_tol, format!("max relative error {re:.3e}"));
    out.check(
        format!("Monte Carlo hitting within {} sigma", p.mc_sigmas),
        z <= p.mc_sigmas,
        format!("largest deviation {z:.2} sigma"),
    );
    out.report = json!({ "cases": cases });
    Ok(out)
}
