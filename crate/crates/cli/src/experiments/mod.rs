pub mod geometry;
pub mod potential;
pub mod walks;

use anyhow::Result;
use carrier_core::packing::PackingOptions;

use crate::config::{ExperimentConfig, Kind};
use crate::corpus::build_all;
use crate::outcome::Outcome;
use crate::params::*;

/// Runs the sweep selected by `kind` on the config's corpus.
pub fn dispatch(cfg: &ExperimentConfig, kind: Kind, seed: u64) -> Result<Outcome> {
    let pack_opts = match kind {
        Kind::Pack if cfg.kind == Kind::Pack => PackingOptions { tol: cfg.params::<PackParams>()?.tol, ..Default::default() },
        _ => PackingOptions::default(),
    };
    let corpus = if kind == Kind::PotentialOracle { Vec::new() } else { build_all(cfg, &pack_opts)? };
    // params belong to the config's own kind; other commands use defaults
    macro_rules! params {
        ($t:ty) => {
            if kind == cfg.kind {
                cfg.params::<$t>()?
            } else {
                <$t>::default()
            }
        };
    }
    match kind {
        Kind::Validate => geometry::run_validate(&corpus, &params!(ValidateParams)),
        Kind::Pack => geometry::run_pack(&corpus, &params!(PackParams)),
        Kind::Bilipschitz => geometry::run_bilipschitz(&corpus, &params!(BilipschitzParams), seed),
        Kind::Doubling => geometry::run_doubling(&corpus, &params!(DoublingParams)),
        Kind::Poincare => geometry::run_poincare(&corpus, &params!(PoincareParams)),
        Kind::ExitArc => walks::run_exit_arc(&corpus, &params!(ExitArcParams), seed),
        Kind::ExitTime => walks::run_exit_time(&corpus, &params!(ExitTimeParams), seed),
        Kind::ConeHit => walks::run_cone_hit(&corpus, &params!(ConeHitParams), seed),
        Kind::AtomProbe => walks::run_atom_probe(&corpus, &params!(AtomProbeParams), seed),
        Kind::HarmonicMeasure => walks::run_harmonic_measure(&corpus, &params!(HarmonicMeasureParams), seed),
        Kind::Resistance => potential::run_resistance(&corpus, &params!(ResistanceParams)),
        Kind::Martin => potential::run_martin(&corpus, &params!(MartinParams)),
        Kind::Harnack => potential::run_harnack(&corpus, &params!(HarnackParams)),
        Kind::Bhp => potential::run_bhp(&corpus, &params!(BhpParams)),
        Kind::PotentialOracle => potential::run_potential_oracle(&params!(PotentialOracleParams), seed),
    }
}
