use thiserror::Error;

use crate::grid::Coord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid side must be at least 2, got {0}")]
    GridTooSmall(u32),
    #[error("probability {0} outside (0, 1) or outside [p_min, p_max]")]
    InvalidProbability(f64),
    #[error("grid point {0} is not covered by any region")]
    UncoveredPoint(Coord),
    #[error("coordinate {0} lies outside the grid")]
    CoordOutOfRange(Coord),
    #[error("point index {0} out of range")]
    IndexOutOfRange(u64),
    #[error("duplicate node {0}")]
    DuplicateNode(Coord),
    #[error("{0} is not a node of the instance")]
    NotANode(Coord),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("range set must be strictly increasing positive reals")]
    InvalidRangeSet,
    #[error("assignment has {got} entries, instance has {expected} nodes")]
    AssignmentLength { expected: usize, got: usize },
    #[error("radius {radius} at node {node} is not an element of the range set")]
    RadiusNotInGamma { node: Coord, radius: f64 },
    #[error("radius {radius} exceeds the largest range {max}")]
    RadiusExceedsGamma { radius: f64, max: f64 },
    #[error("assignment is not a feasible broadcast from the source")]
    Infeasible,

    #[error("no node within {radius:.3} of ({x:.3}, {y:.3})")]
    NodeDesert { x: f64, y: f64, radius: f64 },
    #[error("instance has {0} nodes; the exhaustive search handles at most 8")]
    InstanceTooLarge(usize),

    #[error("cell {cell:?} exhausted its labels without electing a pivot in phase {phase}")]
    StalledCell { cell: (u32, u32), phase: u64 },
    #[error("pivot {node} in cell {cell:?} lacks battery in phase {phase}")]
    BatteryDead { node: Coord, cell: (u32, u32), phase: u64 },
    #[error("{0} non-empty cell(s) never receive the message")]
    EmptyCellUnreachable(usize),

    #[error("l = {l} is below the threshold {threshold}")]
    ThresholdViolated { l: f64, threshold: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
