//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use carrier_core::error::IoError;
use carrier_core::render::RenderSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Validate,
    Pack,
    Bilipschitz,
    Doubling,
    Poincare,
    ExitArc,
    ExitTime,
    ConeHit,
    Resistance,
    Martin,
    Harnack,
    Bhp,
    HarmonicMeasure,
    AtomProbe,
    PotentialOracle,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Validate => "validate",
            Kind::Pack => "pack",
            Kind::Bilipschitz => "bilipschitz",
            Kind::Doubling => "doubling",
            Kind::Poincare => "poincare",
            Kind::ExitArc => "exit-arc",
            Kind::ExitTime => "exit-time",
            Kind::ConeHit => "cone-hit",
            Kind::Resistance => "resistance",
            Kind::Martin => "martin",
            Kind::Harnack => "harnack",
            Kind::Bhp => "bhp",
            Kind::HarmonicMeasure => "harmonic-measure",
            Kind::AtomProbe => "atom-probe",
            Kind::PotentialOracle => "potential-oracle",
        }
    }
}

/// Where a corpus graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    /// Ball of the degree-`deg` triangulation, laid out by its maximal packing.
    Hyperbolic {
        #[serde(default = "default_deg")]
        deg: usize,
        depth: usize,
    },
    /// One interior vertex joined to a `spokes`-cycle; `spokes = 3` is K4.
    Wheel { spokes: usize },
    Lattice { radius: usize },
    Grid { nx: usize, ny: usize },
    Delaunay { n: usize, seed: u64 },
    Triangle,
    Path { k: usize },
    /// A `carrier-graph/1` file, relative to the config file.
    File { path: PathBuf },
}

fn default_deg() -> usize {
    7
}

impl GraphSource {
    pub fn label(&self) -> String {
        match self {
            GraphSource::Hyperbolic { deg, depth } => format!("hyperbolic-{deg}-{depth}"),
            GraphSource::Wheel { spokes } => format!("wheel-{spokes}"),
            GraphSource::Lattice { radius } => format!("lattice-{radius}"),
            GraphSource::Grid { nx, ny } => format!("grid-{nx}x{ny}"),
            GraphSource::Delaunay { n, seed } => format!("delaunay-{n}-{seed}"),
            GraphSource::Triangle => "tri3".into(),
            GraphSource::Path { k } => format!("path-{k}"),
            GraphSource::File { path } => path.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; the command line `--out` takes precedence.
    pub dir: Option<PathBuf>,
}

/// Raw file contents; `params` is decoded per kind by [`ExperimentConfig::params`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    kind: Kind,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    graphs: Vec<GraphSource>,
    #[serde(default)]
    params: Option<toml::Table>,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    render: Option<RenderSpec>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub graphs: Vec<GraphSource>,
    pub params: toml::Table,
    pub output: OutputSpec,
    pub render: RenderSpec,
    /// Directory that relative file paths are resolved against.
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, IoError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| IoError::ConfigParse(e.to_string()))?;
        let cfg = ExperimentConfig {
            name: raw.name.unwrap_or_else(|| raw.kind.as_str().to_string()),
            kind: raw.kind,
            seed: raw.seed,
            graphs: raw.graphs,
            params: raw.params.unwrap_or_default(),
            output: raw.output,
            render: raw.render.unwrap_or_default(),
            base_dir: base_dir.into(),
        };
        cfg.validate_params()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    /// Decodes `params` into the kind's parameter struct.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, IoError> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e: toml::de::Error| IoError::ConfigParse(format!("[params] for {}: {e}", self.kind.as_str())))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn validate_params(&self) -> Result<(), IoError> {
        use crate::params::*;
        let needs_graph = !matches!(self.kind, Kind::PotentialOracle);
        if needs_graph && self.graphs.is_empty() {
            return Err(IoError::ConfigParse("at least one [[graphs]] entry is required".into()));
        }
        match self.kind {
            Kind::Validate => self.params::<ValidateParams>()?.check(),
            Kind::Pack => self.params::<PackParams>()?.check(),
            Kind::Bilipschitz => self.params::<BilipschitzParams>()?.check(),
            Kind::Doubling => self.params::<DoublingParams>()?.check(),
            Kind::Poincare => self.params::<PoincareParams>()?.check(),
            Kind::ExitArc => self.params::<ExitArcParams>()?.check(),
            Kind::ExitTime => self.params::<ExitTimeParams>()?.check(),
            Kind::ConeHit => self.params::<ConeHitParams>()?.check(),
            Kind::Resistance => self.params::<ResistanceParams>()?.check(),
            Kind::Martin => self.params::<MartinParams>()?.check(),
            Kind::Harnack => self.params::<HarnackParams>()?.check(),
            Kind::Bhp => self.params::<BhpParams>()?.check(),
            Kind::HarmonicMeasure => self.params::<HarmonicMeasureParams>()?.check(),
            Kind::AtomProbe => self.params::<AtomProbeParams>()?.check(),
            Kind::PotentialOracle => self.params::<PotentialOracleParams>()?.check(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_radius_grid_is_rejected() {
        let text = r#"
kind = "exit-arc"
[[graphs]]
source = "lattice"
radius = 10
[params]
radius_factors = []
"#;
        let err = ExperimentConfig::parse(text, ".").unwrap_err();
        assert!(matches!(err, IoError::ConfigParse(_)), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "kind = \"validate\"\ncolour = 3\n[[graphs]]\nsource = \"triangle\"\n";
        assert!(matches!(ExperimentConfig::parse(text, "."), Err(IoError::ConfigParse(_))));
        let text = "kind = \"validate\"\n[[graphs]]\nsource = \"triangle\"\n[params]\nbogus = 1\n";
        assert!(matches!(ExperimentConfig::parse(text, "."), Err(IoError::ConfigParse(_))));
    }

    #[test]
    fn minimal_validate_config() {
        let cfg = ExperimentConfig::parse("kind = \"validate\"\n[[graphs]]\nsource = \"triangle\"\n", ".").unwrap();
        assert_eq!(cfg.kind, Kind::Validate);
        assert_eq!(cfg.graphs, vec![GraphSource::Triangle]);
        assert_eq!(cfg.name, "validate");
    }
}
