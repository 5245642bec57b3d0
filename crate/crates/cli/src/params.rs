//! Per-kind parameter grids, decoded from the `[params]` table.

use std::f64::consts::PI;

use carrier_core::error::IoError;
use serde::{Deserialize, Serialize};

fn bad(msg: impl Into<String>) -> Result<(), IoError> {
    Err(IoError::ConfigParse(msg.into()))
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), IoError> {
    if v.is_empty() {
        return bad(format!("grid `{name}` is empty"));
    }
    Ok(())
}

fn positive(name: &str, v: &[f64]) -> Result<(), IoError> {
    nonempty(name, v)?;
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return bad(format!("grid `{name}` must hold positive numbers"));
    }
    Ok(())
}

fn decreasing(name: &str, v: &[f64]) -> Result<(), IoError> {
    positive(name, v)?;
    if v.windows(2).any(|w| w[1] >= w[0]) {
        return bad(format!("grid `{name}` must be strictly decreasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateParams {
    /// Explicit (D, η); the tightest parameters of each graph are used when absent.
    pub d: Option<f64>,
    pub eta: Option<f64>,
    /// Compare tightest parameters of consecutive graphs on vertices within this
    /// many hops of the packing root.
    pub shared_hops: Option<usize>,
    pub compare_tol: f64,
}

impl Default for ValidateParams {
    fn default() -> Self {
        ValidateParams { d: None, eta: None, shared_hops: None, compare_tol: 0.1 }
    }
}

impl ValidateParams {
    pub fn check(&self) -> Result<(), IoError> {
        if self.d.is_some() != self.eta.is_some() {
            return bad("give both `d` and `eta` or neither");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackParams {
    pub tol: f64,
    pub angle_limit: f64,
    pub tangency_limit: f64,
    pub closed_form_tol: f64,
    pub time_limit_s: f64,
}

impl Default for PackParams {
    fn default() -> Self {
        PackParams { tol: 1e-9, angle_limit: 1e-9, tangency_limit: 1e-8, closed_form_tol: 1e-8, time_limit_s: 60.0 }
    }
}

impl PackParams {
    pub fn check(&self) -> Result<(), IoError> {
        positive("tol", &[self.tol, self.angle_limit, self.tangency_limit, self.closed_form_tol, self.time_limit_s])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilipschitzParams {
    pub sample_counts: Vec<usize>,
    /// Allowed relative change between consecutive sample counts.
    pub stability: f64,
}

impl Default for BilipschitzParams {
    fn default() -> Self {
        BilipschitzParams { sample_counts: vec![10_000, 20_000], stability: 0.1 }
    }
}

impl BilipschitzParams {
    pub fn check(&self) -> Result<(), IoError> {
        nonempty("sample_counts", &self.sample_counts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoublingParams {
    /// Dyadic radius ladder, largest first.
    pub radii: Vec<f64>,
    pub centers_per_radius: usize,
    pub min_pairs: usize,
    /// Allowed ratio between the maxima over the two halves of the ladder.
    pub halves_factor: f64,
}

impl Default for DoublingParams {
    fn default() -> Self {
        DoublingParams { radii: vec![], centers_per_radius: 50, min_pairs: 200, halves_factor: 2.0 }
    }
}

impl DoublingParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("radii", &self.radii)?;
        if self.radii.len() < 2 {
            return bad("grid `radii` needs at least two entries");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareParams {
    pub radii: Vec<f64>,
    pub centers_per_radius: usize,
    pub blowup: f64,
    pub min_balls: usize,
    pub uniform_factor: f64,
    /// Single-edge check: κ·r² against L²/π² for an edge of this length.
    pub analytic_length: f64,
    pub analytic_tol: f64,
}

impl Default for PoincareParams {
    fn default() -> Self {
        PoincareParams {
            radii: vec![],
            centers_per_radius: 20,
            blowup: 4.0,
            min_balls: 50,
            uniform_factor: 2.0,
            analytic_length: 3.0,
            analytic_tol: 0.01,
        }
    }
}

impl PoincareParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("radii", &self.radii)?;
        if !(self.blowup > 1.0) {
            return bad("`blowup` must exceed 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitArcParams {
    /// Ball radii as multiples of the centre's isolation radius.
    pub radius_factors: Vec<f64>,
    pub max_hop: usize,
    pub centers: usize,
    pub rotations: usize,
    pub samples: usize,
    /// Arc width `π − η`; η defaults to the graph's tightest value.
    pub eta: Option<f64>,
    pub min_triples: usize,
    pub control_radius: usize,
    pub control_r: f64,
    pub control_offset: f64,
    pub control_sigmas: f64,
    pub time_limit_s: f64,
}

impl Default for ExitArcParams {
    fn default() -> Self {
        ExitArcParams {
            radius_factors: vec![1.0, 1.25],
            max_hop: 4,
            centers: 25,
            rotations: 4,
            samples: 10_000,
            eta: None,
            min_triples: 100,
            control_radius: 30,
            control_r: 10.0,
            control_offset: 0.01,
            control_sigmas: 3.0,
            time_limit_s: 600.0,
        }
    }
}

impl ExitArcParams {
    pub fn check(&self) -> Result<(), IoError> {
        positive("radius_factors", &self.radius_factors)?;
        if self.centers == 0 || self.rotations == 0 || self.samples == 0 {
            return bad("`centers`, `rotations` and `samples` must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitTimeParams {
    pub lattice_radius: usize,
    /// Ball radii in lattice units for the triangular-lattice control.
    pub lattice_scales: Vec<f64>,
    /// Absolute ball radii on the first graph.
    pub scales: Vec<f64>,
    /// Admissible `r / r_u` band for centres at each scale.
    pub band: [f64; 2],
    pub centers_per_scale: usize,
    pub samples: usize,
    pub window: f64,
    pub max_truncation: f64,
}

impl Default for ExitTimeParams {
    fn default() -> Self {
        ExitTimeParams {
            lattice_radius: 80,
            lattice_scales: vec![8.0, 16.0, 32.0],
            scales: vec![],
            band: [1.0, 1.4],
            centers_per_scale: 10,
            samples: 2_000,
            window: 4.0,
            max_truncation: 1e-3,
        }
    }
}

impl ExitTimeParams {
    pub fn check(&self) -> Result<(), IoError> {
        positive("scales", &self.scales)?;
        if !self.lattice_scales.is_empty() {
            positive("lattice_scales", &self.lattice_scales)?;
        }
        if !(self.band[0] > 0.0 && self.band[1] >= self.band[0]) {
            return bad("`band` must be an increasing pair of positive numbers");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeHitParams {
    pub radius_factors: Vec<f64>,
    pub max_hop: usize,
    pub centers: usize,
    pub rotations: usize,
    /// Cone aperture; `π − η` with the tightest η when absent.
    pub width: Option<f64>,
    pub clearance: f64,
    pub samples: usize,
}

impl Default for ConeHitParams {
    fn default() -> Self {
        ConeHitParams {
            radius_factors: vec![0.5, 0.7],
            max_hop: 3,
            centers: 10,
            rotations: 4,
            width: None,
            clearance: carrier_core::walk::DEFAULT_CONE_CLEARANCE,
            samples: 4_000,
        }
    }
}

impl ConeHitParams {
    pub fn check(&self) -> Result<(), IoError> {
        positive("radius_factors", &self.radius_factors)?;
        if self.centers == 0 || self.rotations == 0 || self.samples == 0 {
            return bad("`centers`, `rotations` and `samples` must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResistanceParams {
    pub epsilons: Vec<f64>,
    pub xis: Vec<f64>,
    /// Inner radius for the log-growth fit.
    pub r: f64,
    pub ratios: Vec<f64>,
    pub k: f64,
    /// Inner radii of the annuli `{r ≤ |v − ξ| ≤ 2r}`.
    pub annulus_radii: Vec<f64>,
}

impl Default for ResistanceParams {
    fn default() -> Self {
        ResistanceParams {
            epsilons: vec![],
            xis: vec![0.0],
            r: 0.05,
            ratios: vec![4.0, 8.0, 16.0],
            k: 2.0,
            annulus_radii: vec![0.05, 0.1, 0.2],
        }
    }
}

impl ResistanceParams {
    pub fn check(&self) -> Result<(), IoError> {
        positive("epsilons", &self.epsilons)?;
        nonempty("xis", &self.xis)?;
        positive("ratios", &self.ratios)?;
        positive("annulus_radii", &self.annulus_radii)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartinParams {
    pub epsilons: Vec<f64>,
    pub xis: Vec<f64>,
    /// Probe set: vertices within this many hops of the root.
    pub probe_hops: usize,
    pub cauchy_tail: usize,
    pub separation_factor: f64,
}

impl Default for MartinParams {
    fn default() -> Self {
        MartinParams { epsilons: vec![], xis: vec![0.0], probe_hops: 1, cauchy_tail: 3, separation_factor: 10.0 }
    }
}

impl MartinParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("epsilons", &self.epsilons)?;
        nonempty("xis", &self.xis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackParams {
    /// Exactly two: the base ε and its halving.
    pub epsilons: Vec<f64>,
    /// Ball radii as multiples of the centre's isolation radius; base and its halving.
    pub radius_factors: Vec<f64>,
    pub a: f64,
    /// Green-column poles sit at the live vertices nearest `pole_radius·e^{iθ}`.
    pub pole_radius: f64,
    pub poles: usize,
    pub max_hop: usize,
    pub stability: f64,
}

impl Default for HarnackParams {
    fn default() -> Self {
        HarnackParams {
            epsilons: vec![],
            radius_factors: vec![0.25, 0.125],
            a: 2.0,
            pole_radius: 0.8,
            poles: 8,
            max_hop: 4,
            stability: 2.0,
        }
    }
}

impl HarnackParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("epsilons", &self.epsilons)?;
        decreasing("radius_factors", &self.radius_factors)?;
        if !(self.a > 1.0) {
            return bad("`a` must exceed 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BhpParams {
    pub epsilons: Vec<f64>,
    pub radii: Vec<f64>,
    pub xis: Vec<f64>,
    pub a0: f64,
    /// Second pole near `x1_radius·e^{i(ξ + x1_offset)}`.
    pub x1_radius: f64,
    pub x1_offset: f64,
    pub stability: f64,
}

impl Default for BhpParams {
    fn default() -> Self {
        BhpParams {
            epsilons: vec![],
            radii: vec![],
            xis: vec![],
            a0: carrier_core::potential::DEFAULT_A0,
            x1_radius: 0.5,
            x1_offset: 2.0,
            stability: 2.0,
        }
    }
}

impl BhpParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("epsilons", &self.epsilons)?;
        decreasing("radii", &self.radii)?;
        nonempty("xis", &self.xis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicMeasureParams {
    pub epsilons: Vec<f64>,
    pub arc_start: f64,
    pub arc_width: f64,
    pub samples: usize,
    pub stop_radius: f64,
    /// Probes: the first vertices within one hop of the root.
    pub probes: usize,
    pub ci_factor: f64,
}

impl Default for HarmonicMeasureParams {
    fn default() -> Self {
        HarmonicMeasureParams {
            epsilons: vec![],
            arc_start: 0.2,
            arc_width: PI / 2.0,
            samples: 100_000,
            stop_radius: 0.003,
            probes: 3,
            ci_factor: 2.0,
        }
    }
}

impl HarmonicMeasureParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("epsilons", &self.epsilons)?;
        if self.samples == 0 || self.probes == 0 {
            return bad("`samples` and `probes` must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomProbeParams {
    pub radii: Vec<f64>,
    pub xis: Vec<f64>,
    /// Start vertices; the packing root when empty.
    pub starts: Vec<usize>,
    pub stop_radius: f64,
    pub samples: usize,
}

impl Default for AtomProbeParams {
    fn default() -> Self {
        AtomProbeParams {
            radii: vec![0.2, 0.1, 0.05, 0.025],
            xis: vec![0.0],
            starts: vec![],
            stop_radius: 0.002,
            samples: 10_000,
        }
    }
}

impl AtomProbeParams {
    pub fn check(&self) -> Result<(), IoError> {
        decreasing("radii", &self.radii)?;
        nonempty("xis", &self.xis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialOracleParams {
    pub graphs: usize,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub epsilon: f64,
    pub rel_tol: f64,
    pub reversibility_tol: f64,
    pub mc_samples: usize,
    pub mc_sigmas: f64,
}

impl Default for PotentialOracleParams {
    fn default() -> Self {
        PotentialOracleParams {
            graphs: 20,
            min_vertices: 30,
            max_vertices: 200,
            epsilon: 0.15,
            rel_tol: 1e-8,
            reversibility_tol: 1e-10,
            mc_samples: 4_000,
            mc_sigmas: 4.0,
        }
    }
}

impl PotentialOracleParams {
    pub fn check(&self) -> Result<(), IoError> {
        if self.graphs == 0 || self.min_vertices < 4 || self.max_vertices < self.min_vertices {
            return bad("need graphs ≥ 1 and 4 ≤ min_vertices ≤ max_vertices");
        }
        Ok(())
    }
}
