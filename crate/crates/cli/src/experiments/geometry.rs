//! validate, pack, bilipschitz, doubling and poincare sweeps.

use std::f64::consts::PI;

use anyhow::Result;
use carrier_core::goodness::{tightest_parameters, tightest_parameters_within, validate};
use carrier_core::io::{report_to_string, PackingFile};
use carrier_core::metric::{bilipschitz_constant, doubling_ratio, poincare_with, CablePoint, PoincareOptions};
use carrier_core::packing::{k4_closed_form, ring_constant};
use carrier_core::{EmbeddedGraph, Point};
use rayon::prelude::*;
use serde_json::json;

use crate::corpus::{spread, CorpusGraph};
use crate::outcome::{Outcome, Row};
use crate::params::*;

pub fn run_validate(corpus: &[CorpusGraph], p: &ValidateParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for c in corpus {
        let (d, eta) = match (p.d, p.eta) {
            (Some(d), Some(eta)) => (d, eta),
            _ => tightest_parameters(&c.graph),
        };
        let rep = validate(&c.graph, d, eta);
        let at = Row::on(&c.label);
        out.row(&at, "d", d);
        out.row(&at, "eta", eta);
        out.row(&at, "min_adjacent_angle", rep.min_adjacent_angle);
        out.row(&at, "angle_lower_bound", rep.angle_lower_bound);
        out.row(&at, "violations", rep.violations.len() as f64);
        out.check(
            format!("{}: goodness", c.label),
            rep.passed,
            format!("D={d:.6} eta={eta:.6} violations={}", rep.violations.len()),
        );
        out.check(
            format!("{}: adjacent angle bound", c.label),
            rep.min_adjacent_angle >= rep.angle_lower_bound,
            format!("min angle {:.6} vs sin(eta/2)/D {:.6}", rep.min_adjacent_angle, rep.angle_lower_bound),
        );
        out.files.push((format!("validate-{}.json", c.label), report_to_string(&rep)?));
        reports.push(json!({ "graph": c.label, "d": d, "eta": eta, "passed": rep.passed,
            "min_adjacent_angle": rep.min_adjacent_angle, "angle_lower_bound": rep.angle_lower_bound }));
    }
    let mut shared = Vec::new();
    if let Some(hops) = p.shared_hops {
        for w in corpus.windows(2) {
            let inner = |c: &CorpusGraph| {
                let hop = c.graph.hop_distances(c.root);
                tightest_parameters_within(&c.graph, |v| hop[v] <= hops)
            };
            let (a, b) = (inner(&w[0]), inner(&w[1]));
            let rel_d = (a.0 - b.0).abs() / a.0.min(b.0);
            let rel_eta = (a.1 - b.1).abs() / a.1.min(b.1);
            let name = format!("{} vs {}", w[0].label, w[1].label);
            out.check(
                format!("{name}: shared interior (D, eta)"),
                rel_d <= p.compare_tol && rel_eta <= p.compare_tol,
                format!("D {:.5}/{:.5} ({:.2}%), eta {:.5}/{:.5} ({:.2}%)", a.0, b.0, 100.0 * rel_d, a.1, b.1, 100.0 * rel_eta),
            );
            shared.push(json!({ "pair": name, "hops": hops, "first": [a.0, a.1], "second": [b.0, b.1],
                "relative_d": rel_d, "relative_eta": rel_eta }));
        }
    }
    out.report = json!({ "graphs": reports, "shared_interior": shared });
    Ok(out)
}

/// Maximal packing radii of the `k`-wheel: centre `1 − 2ρ`, spokes `ρ = s/(1+s)`, `s = sin(π/k)`.
pub fn wheel_closed_form(k: usize) -> (f64, f64) {
    let s = (PI / k as f64).sin();
    let rho = s / (1.0 + s);
    (1.0 - 2.0 * rho, rho)
}

pub fn run_pack(corpus: &[CorpusGraph], p: &PackParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for c in corpus {
        let (Some(pk), Some(t)) = (&c.packing, &c.triangulation) else {
            out.check(format!("{}: packable", c.label), false, "source is not a triangulation".to_string());
            continue;
        };
        let at = Row::on(&c.label);
        out.row(&at, "angle_residual", pk.angle_residual);
        out.row(&at, "tangency_residual", pk.tangency_residual);
        out.row(&at, "iterations", pk.iterations as f64);
        out.row(&at, "seconds", c.pack_seconds);
        out.check(
            format!("{}: residuals", c.label),
            pk.angle_residual <= p.angle_limit && pk.tangency_residual <= p.tangency_limit,
            format!("angle {:.3e} tangency {:.3e}", pk.angle_residual, pk.tangency_residual),
        );
        out.check(
            format!("{}: runtime", c.label),
            c.pack_seconds < p.time_limit_s,
            format!("{:.3} s", c.pack_seconds),
        );
        let ring = ring_constant(pk, t);
        out.row(&at, "ring_interior_max", ring.interior_max);
        let mut closed = serde_json::Value::Null;
        if t.interior_vertices().count() == 1 {
            let k = t.boundary().len();
            let (rc, rb) = wheel_closed_form(k);
            if k == 3 {
                let (a, b) = k4_closed_form();
                debug_assert!((a - rc).abs() < 1e-15 && (b - rb).abs() < 1e-15);
            }
            let centre = t.interior_vertices().next().unwrap_or(0);
            let err = t
                .boundary()
                .iter()
                .map(|&v| (pk.radius[v] - rb).abs())
                .fold((pk.radius[centre] - rc).abs(), f64::max);
            out.row(&at, "closed_form_error", err);
            out.check(
                format!("{}: closed-form radii", c.label),
                err <= p.closed_form_tol,
                format!("centre {:.12} (exact {rc:.12}), max error {err:.3e}", pk.radius[centre]),
            );
            closed = json!({ "centre": rc, "spoke": rb, "max_error": err });
        }
        out.files.push((format!("packing-{}.json", c.label), PackingFile::from_packing(pk).to_canonical_string()));
        reports.push(json!({ "graph": c.label, "vertices": t.vertex_count(), "iterations": pk.iterations,
            "angle_residual": pk.angle_residual, "tangency_residual": pk.tangency_residual,
            "seconds": c.pack_seconds, "ring": ring, "closed_form": closed }));
    }
    out.report = json!({ "packings": reports });
    Ok(out)
}

pub fn run_bilipschitz(corpus: &[CorpusGraph], p: &BilipschitzParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for c in corpus {
        let values: Vec<f64> = p
            .sample_counts
            .par_iter()
            .map(|&n| bilipschitz_constant(&c.graph, n, seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
            .collect();
        for (&n, &v) in p.sample_counts.iter().zip(&values) {
            out.row(&Row::on(&c.label), &format!("bilipschitz_{n}"), v);
        }
        out.check(
            format!("{}: finite", c.label),
            values.iter().all(|v| v.is_finite()),
            format!("{values:?}"),
        );
        for (w, n) in values.windows(2).zip(p.sample_counts.windows(2)) {
            let rel = (w[1] - w[0]).abs() / w[0];
            out.check(
                format!("{}: stable {} -> {} samples", c.label, n[0], n[1]),
                rel <= p.stability,
                format!("{:.5} -> {:.5} ({:.2}%)", w[0], w[1], 100.0 * rel),
            );
        }
        reports.push(json!({ "graph": c.label, "samples": p.sample_counts, "values": values }));
    }
    out.report = json!({ "bilipschitz": reports });
    Ok(out)
}

fn carrier_centres(c: &CorpusGraph, radius: f64, k: usize) -> Vec<usize> {
    let outer = c.outer_mask();
    let ok: Vec<usize> = (0..c.graph.vertex_count())
        .filter(|&v| !outer[v] && c.graph.disc_in_carrier(c.graph.position(v), radius))
        .collect();
    spread(&ok, k)
}

pub fn run_doubling(corpus: &[CorpusGraph], p: &DoublingParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for c in corpus {
        let g = &c.graph;
        let mut per_radius = Vec::new();
        let mut pairs = 0;
        for &r in &p.radii {
            let centres = carrier_centres(c, 2.0 * r, p.centers_per_radius);
            let ratios: Vec<(usize, f64)> = centres
                .par_iter()
                .map(|&v| doubling_ratio(g, CablePoint::at_vertex(g, v), r).map(|x| (v, x)))
                .collect::<Result<_, _>>()?;
            for &(v, x) in &ratios {
                out.row(&Row::on(&c.label).center(v).r(r), "doubling", x);
            }
            pairs += ratios.len();
            let max = ratios.iter().map(|x| x.1).fold(0.0, f64::max);
            per_radius.push((r, ratios.len(), max));
        }
        let half = p.radii.len() / 2;
        let top = |s: &[(f64, usize, f64)]| s.iter().map(|x| x.2).fold(0.0, f64::max);
        let (big, small) = (top(&per_radius[..half]), top(&per_radius[half..]));
        out.check(format!("{}: pairs", c.label), pairs >= p.min_pairs, format!("{pairs} (x, r) pairs"));
        let finite = big.is_finite() && small.is_finite() && big > 0.0 && small > 0.0;
        let spread_factor = big.max(small) / big.min(small);
        out.check(
            format!("{}: halves agree", c.label),
            finite && spread_factor < p.halves_factor,
            format!("max over large radii {big:.4}, small radii {small:.4}, factor {spread_factor:.3}"),
        );
        reports.push(json!({ "graph": c.label, "pairs": pairs,
            "per_radius": per_radius.iter().map(|&(r, n, m)| json!({"r": r, "centres": n, "max": m})).collect::<Vec<_>>(),
            "max_large": big, "max_small": small }));
    }
    out.report = json!({ "doubling": reports });
    Ok(out)
}

/// κ·r² on a single straight edge of length `l`, with the ball centred at its midpoint.
pub fn single_edge_kappa(l: f64) -> Result<f64> {
    let g = EmbeddedGraph::build(vec![Point::ORIGIN, Point::new(l, 0.0)], vec![(0, 1, 1.0)])?;
    let r = l / 2.0;
    let opts = PoincareOptions { blowup: 1.0, h: Some(l / 64.0), check_carrier: false, ..Default::default() };
    Ok(poincare_with(&g, CablePoint::new(0, 0.5), r, &opts)?.kappa * r * r)
}

pub fn run_poincare(corpus: &[CorpusGraph], p: &PoincareParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let l = p.analytic_length;
    let measured = single_edge_kappa(l)?;
    let exact = l * l / (PI * PI);
    let rel = (measured / exact - 1.0).abs();
    out.row(&Row::on("single-edge").r(l / 2.0), "kappa_r2", measured);
    out.check(
        "single edge: L^2/pi^2",
        rel <= p.analytic_tol,
        format!("kappa r^2 = {measured:.6}, exact {exact:.6}, error {:.4}%", 100.0 * rel),
    );
    let opts = PoincareOptions { blowup: p.blowup, ..Default::default() };
    let mut reports = Vec::new();
    for c in corpus {
        let g = &c.graph;
        let mut kappas = Vec::new();
        let mut scales = 0;
        for &r in &p.radii {
            let centres = carrier_centres(c, p.blowup * r, p.centers_per_radius);
            let vals: Vec<(usize, f64)> = centres
                .par_iter()
                .map(|&v| poincare_with(g, CablePoint::at_vertex(g, v), r, &opts).map(|rep| (v, rep.kappa)))
                .collect::<Result<_, _>>()?;
            if !vals.is_empty() {
                scales += 1;
            }
            for &(v, k) in &vals {
                out.row(&Row::on(&c.label).center(v).r(r), "kappa", k);
            }
            kappas.extend(vals.into_iter().map(|x| (r, x.0, x.1)));
        }
        let lo = kappas.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
        let hi = kappas.iter().map(|x| x.2).fold(0.0, f64::max);
        out.check(
            format!("{}: balls and scales", c.label),
            kappas.len() >= p.min_balls && scales >= p.radii.len(),
            format!("{} balls over {scales} scales", kappas.len()),
        );
        out.check(
            format!("{}: kappa uniform", c.label),
            lo > 0.0 && hi / lo <= p.uniform_factor,
            format!("kappa in [{lo:.4}, {hi:.4}], factor {:.3}", hi / lo),
        );
        reports.push(json!({ "graph": c.label, "balls": kappas.len(), "min": lo, "max": hi }));
    }
    out.report = json!({ "single_edge": { "length": l, "kappa_r2": measured, "exact": exact }, "poincare": reports });
    Ok(out)
}
