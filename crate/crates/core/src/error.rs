use thiserror::Error;

use crate::tree::BallId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ball id {0} does not belong to this tree")]
    ForeignBallId(usize),
    #[error("diameter of ball {child} ({child_diam}) is not below its parent's ({parent_diam})")]
    NonMonotoneDiameter {
        child: usize,
        child_diam: f64,
        parent_diam: f64,
    },
    #[error("measure of ball {ball} ({measure}) differs from the sum over its children ({sum})")]
    NonAdditiveMeasure { ball: usize, measure: f64, sum: f64 },
    #[error("ball {0} has exactly one child")]
    SingleChildBall(usize),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("lambda is not strictly decreasing from ball {child} to its parent")]
    NonMonotoneLambda { child: usize },
    #[error("Whitney map is not strictly monotone at ball {child}")]
    NonMonotoneWhitney { child: usize },
    #[error("level {level} is outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition has no nondegenerate member")]
    NoNondegenerateMember,
    #[error("interior value {interior} of piece {piece} is not below its spine value {spine}")]
    SpineValueClash {
        piece: usize,
        interior: f64,
        spine: f64,
    },
    #[error("value set exhausted: {0}")]
    InsufficientValues(String),
    #[error("no value of M below {bound} for ball {ball}")]
    NoSmallValues { ball: usize, bound: f64 },
    #[error("bin M_{0} is empty or missing")]
    EmptyBin(usize),
    #[error("monotonicity fails at ball {0}")]
    MonotonicityFailure(usize),
    #[error("shape has too few balls: {0}")]
    InsufficientBalls(String),
    #[error("invalid target set: {0}")]
    InvalidTargetSet(String),
    #[error("tree is not a p-adic window for p = {0}")]
    NotPadicTree(u32),
    #[error("ball {0} is a singleton leaf and carries no eigenvalue")]
    LeafHasNoLambda(usize),
    #[error("ball {child} is not a child of ball {parent}")]
    NotParentChild { child: usize, parent: usize },
    #[error("function has nonzero mean {mean} in mean-zero tail mode")]
    NonZeroMeanInTailMode { mean: f64 },
    #[error("ball {0} has zero measure")]
    ZeroMeasureBall(usize),
    #[error("window has {leaves} leaves, above the cap {cap}")]
    WindowTooLarge { leaves: usize, cap: usize },
    #[error("cell function has {got} values, tree has {expected} leaves")]
    LengthMismatch { expected: usize, got: usize },
    #[error("singular integral diverges for alpha = {0}")]
    DivergentTail(f64),
    #[error("random perturbations are only defined for p = 2, alpha = 1")]
    WrongParameters,
    #[error("not enough separated balls: requested {requested}, available {available}")]
    NotEnoughBalls { requested: u64, available: u64 },
    #[error("window too shallow: {0}")]
    WindowTooShallow(String),
    #[error("Bernoulli parameter {0} gives zero variance")]
    DegenerateBernoulli(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn foreign(b: BallId) -> Self {
        Error::ForeignBallId(b.index())
    }
}
