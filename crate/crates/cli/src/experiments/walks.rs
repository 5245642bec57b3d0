//! exit-arc, exit-time, cone-hit, atom-probe and harmonic-measure sweeps.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use anyhow::{ensure, Result};
use carrier_core::generate::triangular_lattice;
use carrier_core::goodness::tightest_parameters;
use carrier_core::potential::{exhaust, harmonic_extension_check};
use carrier_core::walk::{atom_probe, cone_hitting_probability, run_to_exit, Estimate, WalkConfig};
use carrier_core::{AngleInterval, EmbeddedGraph, VertexId};
use serde_json::json;

use crate::corpus::{spread, CorpusGraph};
use crate::outcome::{Outcome, Row};
use crate::params::*;

/// Independent seed for sweep entry `k`.
pub fn sub_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn walk_cfg(seed: u64, k: usize, samples: usize) -> WalkConfig {
    WalkConfig { seed: sub_seed(seed, k), samples, ..Default::default() }
}

/// Probability that the exit vertex of `V_euc(u, r)` lies in direction `i` from `u`.
fn arc_share(g: &EmbeddedGraph, u: VertexId, counts: &std::collections::BTreeMap<VertexId, usize>, i: AngleInterval) -> Estimate {
    let c = g.position(u);
    let total: usize = counts.values().sum();
    let hits = counts.iter().filter(|(&v, _)| i.contains((g.position(v) - c).arg())).map(|(_, &n)| n).sum();
    Estimate::proportion(hits, total)
}

/// Centres in `pool` whose isolation radius admits every factor in `factors`
/// with `B_euc(u, carrier·f·r_u)` inside the carrier.
fn admissible(c: &CorpusGraph, pool: &[VertexId], factors: &[f64], carrier: f64) -> Vec<VertexId> {
    let iso = c.graph.isolation_radii();
    let fmax = factors.iter().copied().fold(0.0, f64::max);
    pool.iter()
        .copied()
        .filter(|&u| c.graph.disc_in_carrier(c.graph.position(u), carrier * fmax * iso[u]))
        .collect()
}

pub fn run_exit_arc(corpus: &[CorpusGraph], p: &ExitArcParams, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let mut out = Outcome::default();
    let c = &corpus[0];
    let g = &c.graph;
    let eta = p.eta.unwrap_or_else(|| tightest_parameters(g).1);
    let width = PI - eta;
    let iso = g.isolation_radii();
    let centres = spread(&admissible(c, &c.interior_within(p.max_hop), &p.radius_factors, 1.0), p.centers);
    ensure!(!centres.is_empty(), "no admissible centres on {}", c.label);
    let mut triples = 0;
    let mut worst: Option<(f64, f64)> = None;
    let mut failures = 0;
    let mut truncated = 0;
    let mut k = 0;
    for &u in &centres {
        for &f in &p.radius_factors {
            let r = f * iso[u];
            let stats = run_to_exit(g, u, r, &walk_cfg(seed, k, p.samples))?;
            k += 1;
            truncated += stats.truncated;
            for j in 0..p.rotations {
                let phase = TAU * (j as f64 + 0.5 * (u % 7) as f64 / 7.0) / p.rotations as f64;
                let est = arc_share(g, u, &stats.exit_counts, AngleInterval::new(phase, width));
                triples += 1;
                if !(est.value > 0.0 && est.excludes_zero()) {
                    failures += 1;
                }
                if worst.is_none_or(|w| est.value < w.0) {
                    worst = Some((est.value, est.half_width));
                }
                out.row(&Row::on(&c.label).center(u).xi(phase).r(r), "arc_probability", est.value);
                out.row(&Row::on(&c.label).center(u).xi(phase).r(r), "half_width", est.half_width);
            }
        }
    }
    let (wv, wh) = worst.unwrap_or((0.0, 0.0));
    out.check("hyperbolic: triples", triples >= p.min_triples, format!("{triples} (u, r, I) triples, |I| = {width:.5}"));
    out.check(
        "hyperbolic: every estimate positive with CI excluding 0",
        failures == 0,
        format!("{failures} failures; smallest estimate {wv:.4} ± {wh:.4}; {truncated} truncated walks"),
    );

    let lat = triangular_lattice(p.control_radius);
    let stats = run_to_exit(&lat, 0, p.control_r, &walk_cfg(seed, k, p.samples))?;
    let mut sectors = Vec::new();
    let mut worst_z: f64 = 0.0;
    for j in 0..6 {
        let i = AngleInterval::new(p.control_offset + j as f64 * PI / 3.0, PI / 3.0);
        let est = arc_share(&lat, 0, &stats.exit_counts, i);
        let z = (est.value - 1.0 / 6.0).abs() / est.sigma();
        worst_z = worst_z.max(z);
        out.row(&Row::on("lattice").center(0).xi(i.start).r(p.control_r), "sector_probability", est.value);
        sectors.push(json!({ "start": i.start, "value": est.value, "sigma": est.sigma(), "z": z }));
    }
    out.check(
        "lattice control: sectors reproduce 1/6",
        worst_z <= p.control_sigmas,
        format!("largest deviation {worst_z:.2} sigma"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    out.check("runtime", elapsed < p.time_limit_s, format!("{elapsed:.1} s"));
    out.report = json!({ "graph": c.label, "eta": eta, "arc_width": width, "centres": centres.len(),
        "triples": triples, "failures": failures, "smallest": { "value": wv, "half_width": wh },
        "truncated": truncated, "control": sectors, "seconds": elapsed });
    Ok(out)
}

pub fn run_exit_time(corpus: &[CorpusGraph], p: &ExitTimeParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut ratios: Vec<(String, f64, f64)> = Vec::new();
    let mut truncated = 0usize;
    let mut walks = 0usize;
    let mut k = 0;
    if !p.lattice_scales.is_empty() {
        let lat = triangular_lattice(p.lattice_radius);
        for &r in &p.lattice_scales {
            let stats = run_to_exit(&lat, 0, r, &walk_cfg(seed, k, p.samples))?;
            k += 1;
            truncated += stats.truncated;
            walks += stats.n;
            let ratio = stats.time_functional_mean.value / (r * r);
            out.row(&Row::on("lattice").center(0).r(r), "functional_ratio", ratio);
            ratios.push(("lattice".into(), r, ratio));
        }
    }
    let c = &corpus[0];
    let g = &c.graph;
    let iso = g.isolation_radii();
    let outer = c.outer_mask();
    let mut empty_scales = Vec::new();
    for &r in &p.scales {
        let pool: Vec<VertexId> = (0..g.vertex_count())
            .filter(|&u| {
                let q = r / iso[u];
                !outer[u] && q >= p.band[0] && q <= p.band[1] && g.disc_in_carrier(g.position(u), r)
            })
            .collect();
        let centres = spread(&pool, p.centers_per_scale);
        if centres.is_empty() {
            empty_scales.push(r);
        }
        for u in centres {
            let stats = run_to_exit(g, u, r, &walk_cfg(seed, k, p.samples))?;
            k += 1;
            truncated += stats.truncated;
            walks += stats.n;
            let ratio = stats.time_functional_mean.value / (r * r);
            out.row(&Row::on(&c.label).center(u).r(r), "functional_ratio", ratio);
            ratios.push((c.label.clone(), r, ratio));
        }
    }
    let lo = ratios.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().map(|x| x.2).fold(0.0, f64::max);
    out.check("every scale has centres", empty_scales.is_empty(), format!("scales without centres: {empty_scales:?}"));
    out.check(
        "one window",
        lo > 0.0 && hi / lo <= p.window,
        format!("ratios in [{lo:.4}, {hi:.4}], width factor {:.3}", hi / lo),
    );
    let frac = truncated as f64 / walks.max(1) as f64;
    out.check("truncation", frac < p.max_truncation, format!("{truncated} of {walks} walks truncated"));
    out.report = json!({ "ratios": ratios.iter().map(|(gname, r, v)| json!({"graph": gname, "r": r, "ratio": v})).collect::<Vec<_>>(),
        "min": lo, "max": hi, "truncated": truncated, "walks": walks });
    Ok(out)
}

pub fn run_cone_hit(corpus: &[CorpusGraph], p: &ConeHitParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    let mut k = 0;
    for c in corpus {
        let g = &c.graph;
        let width = p.width.unwrap_or_else(|| PI - tightest_parameters(g).1);
        let iso = g.isolation_radii();
        let centres = spread(&admissible(c, &c.interior_within(p.max_hop), &p.radius_factors, 2.0), p.centers);
        let mut smallest = f64::INFINITY;
        let mut failures = 0;
        let mut count = 0;
        for &u in &centres {
            for &f in &p.radius_factors {
                let r = f * iso[u];
                for j in 0..p.rotations {
                    let phase = TAU * j as f64 / p.rotations as f64 + 0.1;
                    let est = cone_hitting_probability(
                        g,
                        u,
                        r,
                        AngleInterval::new(phase, width),
                        p.clearance,
                        &walk_cfg(seed, k, p.samples),
                    )?;
                    k += 1;
                    count += 1;
                    smallest = smallest.min(est.value);
                    if !est.excludes_zero() {
                        failures += 1;
                    }
                    out.row(&Row::on(&c.label).center(u).xi(phase).r(r), "cone_probability", est.value);
                }
            }
        }
        out.check(
            format!("{}: cone hits bounded below", c.label),
            count > 0 && failures == 0,
            format!("{count} cones, {failures} with CI touching 0, smallest {smallest:.4}"),
        );
        reports.push(json!({ "graph": c.label, "width": width, "cones": count, "smallest": smallest }));
    }
    out.report = json!({ "cone_hit": reports });
    Ok(out)
}

pub fn run_atom_probe(corpus: &[CorpusGraph], p: &AtomProbeParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let starts = if p.starts.is_empty() { vec![c.root] } else { p.starts.clone() };
    let mut c_max: f64 = 0.0;
    let mut all_monotone = true;
    let mut probes = Vec::new();
    let mut k = 0;
    for &u in &starts {
        for &xi in &p.xis {
            let probe = atom_probe(&c.graph, u, xi, &p.radii, p.stop_radius, &walk_cfg(seed, k, p.samples))?;
            k += 1;
            all_monotone &= probe.nonincreasing();
            c_max = c_max.max(probe.fitted_c);
            for (r, e) in probe.radii.iter().zip(&probe.estimates) {
                out.row(&Row::on(&c.label).center(u).xi(xi).r(*r), "hit_probability", e.value);
            }
            probes.push(json!({ "start": u, "xi": xi, "estimates": probe.estimates, "c": probe.fitted_c, "truncated": probe.truncated }));
        }
    }
    let bound_ok = probes.iter().all(|pr| {
        pr["estimates"].as_array().is_some_and(|es| {
            es.iter().zip(&p.radii).all(|(e, r)| e["value"].as_f64().unwrap_or(f64::NAN) <= c_max / r.ln().abs() + 1e-15)
        })
    });
    out.check("nonincreasing", all_monotone, format!("{} sequences", probes.len()));
    out.check(
        "single C",
        c_max.is_finite() && bound_ok,
        format!("p(r) <= C/|log r| with C = {c_max:.4}"),
    );
    out.report = json!({ "graph": c.label, "radii": p.radii, "c": c_max, "probes": probes });
    Ok(out)
}

pub fn run_harmonic_measure(corpus: &[CorpusGraph], p: &HarmonicMeasureParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &corpus[0];
    let probes: Vec<VertexId> = c.interior_within(1).into_iter().take(p.probes).collect();
    let arc = AngleInterval::new(p.arc_start, p.arc_width);
    let indicator = |theta: f64| if arc.contains(theta) { 1.0 } else { 0.0 };
    let cfg = WalkConfig { seed, samples: p.samples, ..Default::default() };
    let mut reports = Vec::new();
    let mut discrepancies = Vec::new();
    for &eps in &p.epsilons {
        let ex = exhaust(&c.graph, eps)?;
        let rep = harmonic_extension_check(&ex, indicator, &probes, p.stop_radius, &cfg)?;
        for pc in &rep.probes {
            let at = Row::on(&c.label).center(pc.vertex).eps(eps);
            out.row(&at, "dirichlet", pc.solve);
            out.row(&at, "monte_carlo", pc.monte_carlo.value);
            out.row(&at, "half_width", pc.monte_carlo.half_width);
        }
        out.check(
            format!("epsilon {eps}: |solve - MC| <= {} CI", p.ci_factor),
            rep.within(p.ci_factor),
            format!("max discrepancy {:.5}, max half-width {:.5}", rep.max_discrepancy, rep.max_half_width),
        );
        discrepancies.push(rep.max_discrepancy);
        reports.push(rep);
    }
    let non_growing = discrepancies.windows(2).all(|w| w[1] <= w[0]);
    out.check("discrepancy does not grow as epsilon halves", non_growing, format!("{discrepancies:.5?}"));
    out.report = json!({ "graph": c.label, "probes": probes, "reports": reports });
    Ok(out)
}
