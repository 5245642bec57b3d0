use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {0} has a non-finite position")]
    NonFinitePosition(VertexId),
    #[error("vertices {0} and {1} share a position")]
    DuplicatePosition(VertexId, VertexId),
    #[error("edges {first:?} and {second:?} cross")]
    EdgeCrossing { first: (VertexId, VertexId), second: (VertexId, VertexId) },
    #[error("graph is disconnected ({reached} of {total} vertices reachable)")]
    Disconnected { reached: usize, total: usize },
    #[error("edge references unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("repeated edge {0}-{1}")]
    MultiEdge(VertexId, VertexId),
    #[error("edge {u}-{v} has non-positive weight {weight}")]
    NonPositiveWeight { u: VertexId, v: VertexId, weight: f64 },
    #[error("isolation radius needs at least two vertices")]
    SingletonGraph,
    #[error("generated graph would exceed the size cap of {cap} vertices")]
    SizeCapExceeded { cap: usize },
    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid generator argument: {0}")]
    InvalidArgument(String),
    #[error("vertex positions are missing")]
    MissingPositions,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackingError {
    #[error("not a triangulation of a disc: {0}")]
    NotATriangulation(String),
    #[error("triangulation has no interior vertex")]
    NoInteriorVertex,
    #[error("radius iteration stopped after {iterations} sweeps with angle residual {residual:e}")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("Euclidean ball of radius {radius} around ({x}, {y}) leaves the carrier")]
    BallEscapesCarrier { x: f64, y: f64, radius: f64 },
    #[error("eigen solver failed: {0}")]
    EigenSolverFailure(String),
    #[error("orthogonal arc misses the graph")]
    ArcMissesGraph,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(VertexId),
    #[error("Euclidean ball of radius {radius} around vertex {center} leaves the carrier")]
    BallEscapesCarrier { center: VertexId, radius: f64 },
    #[error("all {0} walks hit the step cap")]
    AllWalksTruncated(usize),
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("exhaustion has no live vertices")]
    EmptyLiveSet,
    #[error("live set is disconnected")]
    DisconnectedLiveSet,
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("G(x0, y) vanishes; live region is disconnected")]
    ZeroDenominator,
    #[error("annulus side is empty: {0}")]
    EmptyAnnulusSide(&'static str),
    #[error("poles are too close to the boundary ball")]
    PolesTooClose,
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("vertex {0} is not live")]
    NotLive(VertexId),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("expected format {expected:?}, found {found:?}")]
    FormatVersionMismatch { expected: &'static str, found: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Umbrella error for experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Io(#[from] IoError),
}
