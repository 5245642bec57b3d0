//! Potential theory on finite exhaustions: Green functions, Martin kernels,
//! Dirichlet problems, effective resistance and Harnack ratios.
//!
//! With `L = W − A` restricted to the live set, the Green column of `y` solves
//! `L g = w_y e_y`, so `w_x G(x,y) = w_x w_y (L⁻¹)_{xy}` is symmetric.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, PotentialError};
use crate::geom::Point;
use crate::graph::{EmbeddedGraph, VertexId};
use crate::metric::{ball_from_field, CablePoint, DistanceField};
use crate::sparse::{conjugate_gradient, CsrMatrix};
use crate::walk::{walk_to_boundary, Estimate, WalkConfig};

pub const SOLVE_TOL: f64 = 1e-14;
/// Largest system handed to the dense fallback.
pub const DENSE_FALLBACK_LIMIT: usize = 4000;
pub const DEFAULT_A0: f64 = 4.0;

/// Solves `a x = b`, falling back to a dense Cholesky factorization when CG stalls.
pub fn spd_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, PotentialError> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let out = conjugate_gradient(a, b, &mut x, SOLVE_TOL, 20 * n + 1000);
    if out.converged {
        return Ok(x);
    }
    if n > DENSE_FALLBACK_LIMIT {
        return Err(PotentialError::SolverFailure(format!(
            "CG stopped at relative residual {:.3e} after {} iterations",
            out.relative_residual, out.iterations
        )));
    }
    let chol = a
        .to_dense()
        .cholesky()
        .ok_or_else(|| PotentialError::SolverFailure("matrix is not positive definite".into()))?;
    Ok(chol.solve(&nalgebra::DVector::from_column_slice(b)).iter().copied().collect())
}

fn connected_within(g: &EmbeddedGraph, set: &[VertexId], member: &[bool]) -> bool {
    let Some(&s) = set.first() else { return true };
    let mut seen = vec![false; g.vertex_count()];
    seen[s] = true;
    let mut q = VecDeque::from([s]);
    let mut count = 1;
    while let Some(v) = q.pop_front() {
        for w in g.neighbors(v) {
            if member[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                q.push_back(w);
            }
        }
    }
    count == set.len()
}

/// Live vertices with an absorbing external boundary.
#[derive(Debug, Clone)]
pub struct Exhaustion<'a> {
    pub base: &'a EmbeddedGraph,
    pub epsilon: f64,
    live: Vec<VertexId>,
    absorbing: Vec<VertexId>,
    index: Vec<Option<usize>>,
    laplacian: CsrMatrix,
}

/// Interior vertices of a packed graph within `1 − ε` of the origin.
pub fn exhaust(g: &EmbeddedGraph, epsilon: f64) -> Result<Exhaustion<'_>, PotentialError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PotentialError::DomainViolation(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let mut outer = vec![false; g.vertex_count()];
    for v in g.outer_vertices() {
        outer[v] = true;
    }
    let live = (0..g.vertex_count()).filter(|&v| !outer[v] && g.position(v).norm() <= 1.0 - epsilon).collect();
    Exhaustion::from_live(g, live, epsilon)
}

impl<'a> Exhaustion<'a> {
    /// Arbitrary live set; `epsilon` is recorded but not used.
    pub fn from_live(g: &'a EmbeddedGraph, mut live: Vec<VertexId>, epsilon: f64) -> Result<Self, PotentialError> {
        live.sort_unstable();
        live.dedup();
        if live.is_empty() {
            return Err(PotentialError::EmptyLiveSet);
        }
        let mut member = vec![false; g.vertex_count()];
        for &v in &live {
            member[v] = true;
        }
        if !connected_within(g, &live, &member) {
            return Err(PotentialError::DisconnectedLiveSet);
        }
        let absorbing = g.vertex_boundary(&live);
        if absorbing.is_empty() {
            return Err(PotentialError::DomainViolation("live set has no absorbing boundary".into()));
        }
        let mut index = vec![None; g.vertex_count()];
        for (i, &v) in live.iter().enumerate() {
            index[v] = Some(i);
        }
        let mut trip = Vec::new();
        for (i, &v) in live.iter().enumerate() {
            trip.push((i, i, g.vertex_weight(v)));
            for inc in g.rotation(v) {
                if let Some(j) = index[inc.to] {
                    trip.push((i, j, -g.edge(inc.edge).weight));
                }
            }
        }
        let laplacian = CsrMatrix::from_triplets(live.len(), trip);
        Ok(Exhaustion { base: g, epsilon, live, absorbing, index, laplacian })
    }

    pub fn live(&self) -> &[VertexId] {
        &self.live
    }

    pub fn absorbing(&self) -> &[VertexId] {
        &self.absorbing
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        self.index[v].is_some()
    }

    /// Position of `v` in [`Exhaustion::live`].
    pub fn live_index(&self, v: VertexId) -> Option<usize> {
        self.index[v]
    }

    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    fn require_live(&self, v: VertexId) -> Result<usize, PotentialError> {
        self.index.get(v).copied().flatten().ok_or(PotentialError::NotLive(v))
    }

    fn scatter(&self, x: Vec<f64>) -> Vec<f64> {
        let mut full = vec![0.0; self.base.vertex_count()];
        for (i, &v) in self.live.iter().enumerate() {
            full[v] = x[i];
        }
        full
    }

    /// Live vertex nearest to `p` (lowest id on ties).
    pub fn nearest_live(&self, p: Point) -> VertexId {
        let g = self.base;
        *self
            .live
            .iter()
            .min_by(|&&a, &&b| g.position(a).dist(p).total_cmp(&g.position(b).dist(p)).then(a.cmp(&b)))
            .expect("live set is nonempty")
    }
}

/// `G(·, y)` indexed by vertex id; zero off the live set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenColumn {
    pub y: VertexId,
    pub values: Vec<f64>,
}

pub fn green(ex: &Exhaustion, y: VertexId) -> Result<GreenColumn, PotentialError> {
    let i = ex.require_live(y)?;
    let mut b = vec![0.0; ex.live.len()];
    b[i] = ex.base.vertex_weight(y);
    Ok(GreenColumn { y, values: ex.scatter(spd_solve(&ex.laplacian, &b)?) })
}

/// Independent columns solved in parallel.
pub fn green_columns(ex: &Exhaustion, ys: &[VertexId]) -> Result<Vec<GreenColumn>, PotentialError> {
    ys.par_iter().map(|&y| green(ex, y)).collect()
}

/// `M(·, y) = G(·, y) / G(x0, y)` indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartinVector {
    pub y: VertexId,
    pub x0: VertexId,
    pub values: Vec<f64>,
}

pub fn martin_from_green(col: &GreenColumn, x0: VertexId) -> Result<MartinVector, PotentialError> {
    let d = col.values[x0];
    if !(d > 0.0) {
        return Err(PotentialError::ZeroDenominator);
    }
    let mut values: Vec<f64> = col.values.iter().map(|v| v / d).collect();
    values[x0] = 1.0;
    Ok(MartinVector { y: col.y, x0, values })
}

pub fn martin_kernel(ex: &Exhaustion, x0: VertexId, y: VertexId) -> Result<MartinVector, PotentialError> {
    ex.require_live(x0)?;
    martin_from_green(&green(ex, y)?, x0)
}

pub fn sup_difference(a: &[f64], b: &[f64], probe: &[VertexId]) -> f64 {
    probe.iter().map(|&v| (a[v] - b[v]).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartinConvergence {
    pub epsilons: Vec<f64>,
    /// Nearest live vertex to `e^{iξ}` at each stage.
    pub poles: Vec<VertexId>,
    /// Second-nearest live vertex to `e^{iξ}` at each stage.
    pub alternate_poles: Vec<VertexId>,
    /// `sup_probe |M(·,y_n) − M(·,y_{n+1})|`.
    pub successive: Vec<f64>,
    /// `sup_probe |M(·,y_n) − M(·,y'_n)|`.
    pub agreement: Vec<f64>,
    /// Final-stage sup difference between the sequences for `ξ` and `ξ + π`.
    pub separation: f64,
    /// Last successive difference or last agreement, whichever is larger.
    pub same_xi_residual: f64,
}

impl MartinConvergence {
    /// Successive differences strictly decrease over the last `k` refinements.
    pub fn decreasing_tail(&self, k: usize) -> bool {
        let s = &self.successive;
        s.len() >= k && s[s.len() - k..].windows(2).all(|w| w[1] < w[0])
    }
}

/// Martin kernels along poles tending to `e^{iξ}` as ε decreases, restricted to `probe`.
pub fn martin_convergence(
    g: &EmbeddedGraph,
    epsilons: &[f64],
    x0: VertexId,
    xi: f64,
    probe: &[VertexId],
) -> Result<MartinConvergence, PotentialError> {
    if epsilons.len() < 2 || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(PotentialError::DomainViolation("need at least two strictly decreasing epsilons".into()));
    }
    let target = Point::polar(1.0, xi);
    let opposite = Point::polar(1.0, xi + std::f64::consts::PI);
    let mut poles = Vec::new();
    let mut alternate_poles = Vec::new();
    let mut main = Vec::new();
    let mut alt = Vec::new();
    let mut separation = 0.0;
    for (k, &eps) in epsilons.iter().enumerate() {
        let ex = exhaust(g, eps)?;
        for &v in probe.iter().chain([&x0]) {
            ex.require_live(v)?;
        }
        let y = ex.nearest_live(target);
        let y2 = ex
            .live()
            .iter()
            .copied()
            .filter(|&v| v != y)
            .min_by(|&a, &b| g.position(a).dist(target).total_cmp(&g.position(b).dist(target)).then(a.cmp(&b)))
            .ok_or(PotentialError::EmptyLiveSet)?;
        let mut ys = vec![y, y2];
        let last = k + 1 == epsilons.len();
        if last {
            ys.push(ex.nearest_live(opposite));
        }
        let cols = green_columns(&ex, &ys)?;
        let m: Vec<MartinVector> = cols.iter().map(|c| martin_from_green(c, x0)).collect::<Result<_, _>>()?;
        if last {
            separation = sup_difference(&m[0].values, &m[2].values, probe);
        }
        poles.push(y);
        alternate_poles.push(y2);
        let mut it = m.into_iter();
        main.push(it.next().expect("main pole"));
        alt.push(it.next().expect("alternate pole"));
    }
    let successive: Vec<f64> = main.windows(2).map(|w| sup_difference(&w[0].values, &w[1].values, probe)).collect();
    let agreement: Vec<f64> = main.iter().zip(&alt).map(|(a, b)| sup_difference(&a.values, &b.values, probe)).collect();
    let same_xi_residual = successive.last().copied().unwrap_or(0.0).max(*agreement.last().expect("nonempty"));
    Ok(MartinConvergence {
        epsilons: epsilons.to_vec(),
        poles,
        alternate_poles,
        successive,
        agreement,
        separation,
        same_xi_residual,
    })
}

/// Function harmonic on the live set with prescribed absorbing values.
/// Indexed by vertex id; absorbing vertices carry their boundary value and
/// all other vertices zero.
pub fn dirichlet_solve(ex: &Exhaustion, boundary: impl Fn(VertexId) -> f64) -> Result<Vec<f64>, PotentialError> {
    let g = ex.base;
    let mut bval = vec![0.0; g.vertex_count()];
    for &a in &ex.absorbing {
        let b = boundary(a);
        if !b.is_finite() {
            return Err(PotentialError::DomainViolation(format!("boundary value at {a} is not finite")));
        }
        bval[a] = b;
    }
    let rhs: Vec<f64> = ex
        .live
        .iter()
        .map(|&v| {
            g.rotation(v)
                .iter()
                .filter(|inc| !ex.is_live(inc.to))
                .map(|inc| g.edge(inc.edge).weight * bval[inc.to])
                .sum()
        })
        .collect();
    let mut full = ex.scatter(spd_solve(&ex.laplacian, &rhs)?);
    for &a in &ex.absorbing {
        full[a] = bval[a];
    }
    Ok(full)
}

/// Largest `|h(v) − Σ (w_{vu}/w_v) h(u)|` over the live set.
pub fn harmonicity_residual(ex: &Exhaustion, h: &[f64], skip: &[VertexId]) -> f64 {
    let g = ex.base;
    ex.live
        .iter()
        .filter(|v| !skip.contains(v))
        .map(|&v| {
            let avg: f64 = g.rotation(v).iter().map(|inc| g.edge(inc.edge).weight * h[inc.to]).sum::<f64>() / g.vertex_weight(v);
            (h[v] - avg).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeComparison {
    pub vertex: VertexId,
    pub solve: f64,
    pub monte_carlo: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub epsilon: f64,
    pub probes: Vec<ProbeComparison>,
    pub max_discrepancy: f64,
    pub max_half_width: f64,
}

impl ExtensionReport {
    pub fn within(&self, k: f64) -> bool {
        self.probes.iter().all(|p| (p.solve - p.monte_carlo.value).abs() <= k * p.monte_carlo.half_width)
    }
}

/// Compares the Dirichlet solve with boundary data `g_angle(arg a)` against
/// Monte Carlo averages of `g_angle` at the angular stopping position of walks
/// on the full graph.
pub fn harmonic_extension_check(
    ex: &Exhaustion,
    g_angle: impl Fn(f64) -> f64 + Sync,
    probes: &[VertexId],
    stop_radius: f64,
    cfg: &WalkConfig,
) -> Result<ExtensionReport, Error> {
    let g = ex.base;
    let h = dirichlet_solve(ex, |a| g_angle(g.position(a).arg()))?;
    let mut out = Vec::new();
    for &v in probes {
        ex.require_live(v)?;
        let hits = walk_to_boundary(g, v, stop_radius, cfg)?;
        let values: Vec<f64> = hits.angles.iter().map(|&t| g_angle(t)).collect();
        out.push(ProbeComparison { vertex: v, solve: h[v], monte_carlo: Estimate::mean(&values) });
    }
    let max_discrepancy = out.iter().map(|p| (p.solve - p.monte_carlo.value).abs()).fold(0.0, f64::max);
    let max_half_width = out.iter().map(|p| p.monte_carlo.half_width).fold(0.0, f64::max);
    Ok(ExtensionReport { epsilon: ex.epsilon, probes: out, max_discrepancy, max_half_width })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceQuery {
    pub a: Vec<VertexId>,
    pub z: Vec<VertexId>,
    pub value: f64,
}

/// Resistance between `a` and `z` in the subnetwork induced by `allowed`, with
/// edge weights as conductances. Free vertices cut off from `a ∪ z` carry no current.
pub fn effective_resistance_within(
    g: &EmbeddedGraph,
    allowed: &[bool],
    a: &[VertexId],
    z: &[VertexId],
) -> Result<ResistanceQuery, PotentialError> {
    if a.is_empty() || z.is_empty() {
        return Err(PotentialError::DomainViolation("terminal sets must be nonempty".into()));
    }
    let n = g.vertex_count();
    let mut role = vec![0u8; n]; // 0 free, 1 in A, 2 in Z
    for &v in a {
        role[v] = 1;
    }
    for &v in z {
        if role[v] == 1 {
            return Ok(ResistanceQuery { a: a.to_vec(), z: z.to_vec(), value: 0.0 });
        }
        role[v] = 2;
    }
    if a.iter().chain(z).any(|&v| !allowed[v]) {
        return Err(PotentialError::DomainViolation("terminals must lie in the network".into()));
    }
    // free vertices reachable from the terminals
    let mut reach = vec![false; n];
    let mut q: VecDeque<VertexId> = a.iter().chain(z).copied().collect();
    for &v in &q {
        reach[v] = true;
    }
    while let Some(v) = q.pop_front() {
        for w in g.neighbors(v) {
            if allowed[w] && !reach[w] {
                reach[w] = true;
                if role[w] == 0 {
                    q.push_back(w);
                }
            }
        }
    }
    let free: Vec<VertexId> = (0..n).filter(|&v| reach[v] && role[v] == 0).collect();
    let mut idx = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        idx[v] = i;
    }
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for (i, &v) in free.iter().enumerate() {
        for inc in g.rotation(v) {
            if !allowed[inc.to] {
                continue;
            }
            let w = g.edge(inc.edge).weight;
            trip.push((i, i, w));
            match role[inc.to] {
                0 => trip.push((i, idx[inc.to], -w)),
                1 => rhs[i] += w,
                _ => {}
            }
        }
    }
    let phi_free = if free.is_empty() { Vec::new() } else { spd_solve(&CsrMatrix::from_triplets(free.len(), trip), &rhs)? };
    let phi = |v: VertexId| match role[v] {
        1 => 1.0,
        2 => 0.0,
        _ => phi_free[idx[v]],
    };
    let mut energy = 0.0;
    for e in g.edges() {
        if allowed[e.u] && allowed[e.v] && (reach[e.u] || reach[e.v]) {
            energy += e.weight * (phi(e.u) - phi(e.v)).powi(2);
        }
    }
    let value = if energy > 0.0 { 1.0 / energy } else { f64::INFINITY };
    Ok(ResistanceQuery { a: a.to_vec(), z: z.to_vec(), value })
}

pub fn effective_resistance(g: &EmbeddedGraph, a: &[VertexId], z: &[VertexId]) -> Result<ResistanceQuery, PotentialError> {
    effective_resistance_within(g, &vec![true; g.vertex_count()], a, z)
}

fn live_mask(ex: &Exhaustion) -> Vec<bool> {
    (0..ex.base.vertex_count()).map(|v| ex.is_live(v)).collect()
}

/// Dirichlet energy `Σ w_e (f(u) − f(v))²` over edges among `allowed` vertices.
pub fn dirichlet_energy(g: &EmbeddedGraph, allowed: &[bool], f: impl Fn(VertexId) -> f64) -> f64 {
    g.edges()
        .iter()
        .filter(|e| allowed[e.u] && allowed[e.v])
        .map(|e| e.weight * (f(e.u) - f(e.v)).powi(2))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusBound {
    pub measured: f64,
    pub variational_lower: f64,
}

fn annulus_sets(ex: &Exhaustion, center: Point, inner: f64, outer: f64) -> Result<(Vec<VertexId>, Vec<VertexId>), PotentialError> {
    let g = ex.base;
    let a: Vec<VertexId> = ex.live.iter().copied().filter(|&v| g.position(v).dist(center) <= inner).collect();
    let z: Vec<VertexId> = ex.live.iter().copied().filter(|&v| g.position(v).dist(center) > outer).collect();
    if a.is_empty() {
        return Err(PotentialError::EmptyAnnulusSide("inner"));
    }
    if z.is_empty() {
        return Err(PotentialError::EmptyAnnulusSide("outer"));
    }
    Ok((a, z))
}

/// Resistance across `{r ≤ |v − ξ| ≤ 2r}` in the live network, and the lower
/// bound from the piecewise-linear test function `clamp((|x−ξ| − r)/r, 0, 1)`.
pub fn resistance_annulus_bound(ex: &Exhaustion, xi: f64, r: f64) -> Result<AnnulusBound, PotentialError> {
    if ex.epsilon > r / 10.0 {
        return Err(PotentialError::DomainViolation(format!("epsilon {} exceeds r/10 = {}", ex.epsilon, r / 10.0)));
    }
    let c = Point::polar(1.0, xi);
    let (a, z) = annulus_sets(ex, c, r, 2.0 * r)?;
    let mask = live_mask(ex);
    let measured = effective_resistance_within(ex.base, &mask, &a, &z)?.value;
    let g = ex.base;
    let energy = dirichlet_energy(g, &mask, |v| ((g.position(v).dist(c) - r) / r).clamp(0.0, 1.0));
    Ok(AnnulusBound { measured, variational_lower: 1.0 / energy })
}

/// Groups vertices into contracted nodes (`usize::MAX` = excluded) and
/// returns the contracted network's resistance between nodes `s` and `t`.
pub fn contracted_resistance(g: &EmbeddedGraph, group: &[usize], s: usize, t: usize) -> Result<f64, PotentialError> {
    let k = group.iter().filter(|&&x| x != usize::MAX).max().map_or(0, |m| m + 1);
    let mut cond: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for e in g.edges() {
        let (a, b) = (group[e.u], group[e.v]);
        if a == usize::MAX || b == usize::MAX || a == b {
            continue;
        }
        *cond.entry((a.min(b), a.max(b))).or_default() += e.weight;
    }
    // solve the quotient Laplacian directly: unknowns are nodes other than s, t
    let free: Vec<usize> = (0..k).filter(|&x| x != s && x != t).collect();
    let mut idx = vec![usize::MAX; k];
    for (i, &x) in free.iter().enumerate() {
        idx[x] = i;
    }
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for (&(a, b), &w) in &cond {
        for (p, q) in [(a, b), (b, a)] {
            if idx[p] == usize::MAX {
                continue;
            }
            trip.push((idx[p], idx[p], w));
            if idx[q] != usize::MAX {
                trip.push((idx[p], idx[q], -w));
            } else if q == s {
                rhs[idx[p]] += w;
            }
        }
    }
    // nodes disconnected from {s, t} get an isolated unit row and stay at zero
    let mut touched = vec![false; free.len()];
    for &(i, _, _) in &trip {
        touched[i] = true;
    }
    for (i, t) in touched.iter().enumerate() {
        if !t {
            trip.push((i, i, 1.0));
        }
    }
    let phi_free = if free.is_empty() { Vec::new() } else { spd_solve(&CsrMatrix::from_triplets(free.len(), trip), &rhs)? };
    let phi = |x: usize| if x == s { 1.0 } else if x == t { 0.0 } else { phi_free[idx[x]] };
    let energy: f64 = cond.iter().map(|(&(a, b), &w)| w * (phi(a) - phi(b)).powi(2)).sum();
    Ok(if energy > 0.0 { 1.0 / energy } else { f64::INFINITY })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGrowthReport {
    pub ratios: Vec<f64>,
    pub resistances: Vec<f64>,
    /// Contracted-annuli lower bounds, one per ratio.
    pub series_lower: Vec<f64>,
    /// Least-squares slope of resistance against `log(R/r)`.
    pub slope: f64,
    pub intercept: f64,
    /// `min R(R/r) / log(R/r)` over the ladder.
    pub envelope: f64,
}

/// Resistance from `V_euc(ξ, r)` to `live ∖ V_euc(ξ, R)` for `R = ratio·r`.
pub fn resistance_log_growth(ex: &Exhaustion, xi: f64, r: f64, ratios: &[f64], k: f64) -> Result<LogGrowthReport, PotentialError> {
    if ex.epsilon > r / 10.0 {
        return Err(PotentialError::DomainViolation(format!("epsilon {} exceeds r/10 = {}", ex.epsilon, r / 10.0)));
    }
    if !(k > 1.0) {
        return Err(PotentialError::DomainViolation("annulus ratio K must exceed 1".into()));
    }
    let g = ex.base;
    let c = Point::polar(1.0, xi);
    let mask = live_mask(ex);
    let mut resistances = Vec::new();
    let mut series_lower = Vec::new();
    for &ratio in ratios {
        let big = ratio * r;
        let (a, z) = annulus_sets(ex, c, r, big)?;
        resistances.push(effective_resistance_within(g, &mask, &a, &z)?.value);
        // shell index: 0 inside r, i for K^{i−1} r < d ≤ K^i r, inside R only
        let shell = |d: f64| if d <= r { 0 } else { ((d / r).ln() / k.ln()).ceil() as usize };
        let top = shell(big);
        let mut group = vec![usize::MAX; g.vertex_count()];
        let mut next = 0;
        let mut even_node = std::collections::HashMap::new();
        let far = usize::MAX - 1;
        let mut far_node = None;
        for &v in ex.live() {
            let d = g.position(v).dist(c);
            let id = if d > big {
                *far_node.get_or_insert(far)
            } else {
                let s = shell(d).min(top);
                if s % 2 == 0 {
                    *even_node.entry(s).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                } else {
                    next += 1;
                    next - 1
                }
            };
            group[v] = id;
        }
        let far_id = next;
        for x in group.iter_mut() {
            if *x == far {
                *x = far_id;
            }
        }
        let s = even_node[&0];
        series_lower.push(contracted_resistance(g, &group, s, far_id)?);
    }
    let xs: Vec<f64> = ratios.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, resistances.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&resistances).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let envelope = xs.iter().zip(&resistances).map(|(x, y)| y / x).fold(f64::INFINITY, f64::min);
    Ok(LogGrowthReport { ratios: ratios.to_vec(), resistances, series_lower, slope, intercept: my - slope * mx, envelope })
}

/// `max h / min h` over the cable ball `B_d0(x, r)`, with `h` extended
/// linearly along edges. Every vertex of `B_d0(x, A·r)` must be live and not a pole.
pub fn harnack_ratio(ex: &Exhaustion, x: CablePoint, r: f64, a: f64, h: &[f64], poles: &[VertexId]) -> Result<f64, PotentialError> {
    if !(a > 1.0 && r > 0.0) {
        return Err(PotentialError::DomainViolation("need A > 1 and r > 0".into()));
    }
    let g = ex.base;
    let field = DistanceField::new(g, x);
    for v in 0..g.vertex_count() {
        let d = field.vertex[v];
        if d <= a * r && (!ex.is_live(v) || poles.contains(&v)) {
            return Err(PotentialError::DomainViolation(format!("vertex {v} at d0 {d:.4} is outside the harmonic domain")));
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &(e, t0, t1) in &ball_from_field(g, &field, r).pieces {
        let ed = g.edge(e);
        for t in [t0, t1] {
            let val = (1.0 - t) * h[ed.u] + t * h[ed.v];
            if !(val > 0.0) {
                return Err(PotentialError::DomainViolation(format!("h is not positive on edge {e}")));
            }
            lo = lo.min(val);
            hi = hi.max(val);
        }
    }
    if lo.is_infinite() {
        return Ok(1.0);
    }
    Ok(hi / lo)
}

/// `max_{x,y ∈ B(ξ,r)} (h1(x)/h2(x)) / (h1(y)/h2(y))` with `h1 = G(·,x0)`, `h2 = G(·,x1)`.
pub fn boundary_harnack_ratio(ex: &Exhaustion, xi: f64, r: f64, x0: VertexId, x1: VertexId, a0: f64) -> Result<f64, PotentialError> {
    let g = ex.base;
    let c = Point::polar(1.0, xi);
    if g.position(x0).dist(c) <= a0 * r || g.position(x1).dist(c) <= a0 * r {
        return Err(PotentialError::PolesTooClose);
    }
    let cols = green_columns(ex, &[x0, x1])?;
    double_ratio(ex, c, r, &cols[0].values, &cols[1].values)
}

pub fn double_ratio(ex: &Exhaustion, c: Point, r: f64, h1: &[f64], h2: &[f64]) -> Result<f64, PotentialError> {
    let g = ex.base;
    let q: Vec<f64> = ex.live.iter().filter(|&&v| g.position(v).dist(c) <= r).map(|&v| h1[v] / h2[v]).collect();
    if q.is_empty() {
        return Err(PotentialError::EmptyAnnulusSide("boundary ball"));
    }
    let (lo, hi) = q.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    Ok(hi / lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{path, triangular_lattice, unit_triangle};

    #[test]
    fn path_green_column() {
        let g = path(3);
        let ex = Exhaustion::from_live(&g, vec![1, 2], 0.0).unwrap();
        assert_eq!(ex.absorbing(), &[0, 3]);
        let col = green(&ex, 1).unwrap();
        assert!((col.values[1] - 4.0 / 3.0).abs() < 1e-12);
        assert!((col.values[2] - 2.0 / 3.0).abs() < 1e-12);
        let m = martin_kernel(&ex, 2, 1).unwrap();
        assert_eq!(m.values[2], 1.0);
        assert!((m.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_live_vertex() {
        let g = path(2);
        let ex = Exhaustion::from_live(&g, vec![1], 0.0).unwrap();
        assert!((green(&ex, 1).unwrap().values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resistances() {
        let t = unit_triangle();
        assert!((effective_resistance(&t, &[0], &[1]).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
        let p = path(7);
        assert!((effective_resistance(&p, &[0], &[7]).unwrap().value - 7.0).abs() < 1e-10);
        assert_eq!(effective_resistance(&p, &[0, 3], &[3]).unwrap().value, 0.0);
    }

    #[test]
    fn dirichlet_basics() {
        let g = triangular_lattice(5);
        let live: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| g.position(v).norm() < 3.5).collect();
        let ex = Exhaustion::from_live(&g, live, 0.0).unwrap();
        let ones = dirichlet_solve(&ex, |_| 1.0).unwrap();
        assert!(ex.live().iter().all(|&v| (ones[v] - 1.0).abs() < 1e-12));
        let f1 = |v: VertexId| g.position(v).x;
        let f2 = |v: VertexId| (v % 3) as f64;
        let a = dirichlet_solve(&ex, f1).unwrap();
        let b = dirichlet_solve(&ex, f2).unwrap();
        let ab = dirichlet_solve(&ex, |v| 2.0 * f1(v) - 0.5 * f2(v)).unwrap();
        for &v in ex.live() {
            assert!((ab[v] - (2.0 * a[v] - 0.5 * b[v])).abs() < 1e-11);
        }
        // linear functions are harmonic on the lattice interior
        assert!(ex.live().iter().all(|&v| (a[v] - g.position(v).x).abs() < 1e-10));
        assert!(harmonicity_residual(&ex, &b, &[]) < 1e-10);
    }

    #[test]
    fn double_ratio_symmetries() {
        let g = triangular_lattice(5);
        let live: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| g.position(v).norm() < 4.5).collect();
        let ex = Exhaustion::from_live(&g, live, 0.0).unwrap();
        let c = g.position(0);
        let y1 = ex.nearest_live(Point::new(3.0, 0.0));
        let y2 = ex.nearest_live(Point::new(-3.0, 0.0));
        let cols = green_columns(&ex, &[y1, y2]).unwrap();
        let same = double_ratio(&ex, c, 1.5, &cols[0].values, &cols[0].values).unwrap();
        assert!((same - 1.0).abs() < 1e-14);
        let fwd = double_ratio(&ex, c, 1.5, &cols[0].values, &cols[1].values).unwrap();
        let back = double_ratio(&ex, c, 1.5, &cols[1].values, &cols[0].values).unwrap();
        assert!((fwd - back).abs() < 1e-10 * fwd);
        let x = CablePoint::at_vertex(&g, 0);
        let ratio = harnack_ratio(&ex, x, 1.0, 2.0, &cols[0].values, &[y1]).unwrap();
        assert!(ratio > 1.0 && ratio < 10.0);
        let ones = vec![1.0; g.vertex_count()];
        assert_eq!(harnack_ratio(&ex, x, 1.0, 2.0, &ones, &[]).unwrap(), 1.0);
        // at small radii the ratio approaches 1 linearly
        let small = harnack_ratio(&ex, x, 0.1, 2.0, &cols[0].values, &[y1]).unwrap();
        assert!(small > 1.0 && small < ratio);
        assert!(matches!(harnack_ratio(&ex, x, 2.0, 2.0, &cols[0].values, &[y1]), Err(PotentialError::DomainViolation(_))));
    }
}
