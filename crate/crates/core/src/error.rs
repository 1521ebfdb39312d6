use thiserror::Error;

use crate::sts::Point;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("order {0} is not admissible (need v >= 3 and v = 1 or 3 mod 6)")]
    InadmissibleOrder(usize),
    #[error("order {0} is not 3 mod 6")]
    WrongOrderClass(usize),
    #[error("expected order {expected}, got {got}")]
    WrongOrder { expected: usize, got: usize },
    #[error("point {point} out of range for order {order}")]
    PointOutOfRange { point: usize, order: usize },
    #[error("triple has repeated point {0}")]
    RepeatedPoint(usize),
    #[error("pair {{{0}, {1}}} is already covered")]
    PairAlreadyCovered(Point, Point),
    #[error("block {0} is not present")]
    BlockAbsent(String),
    #[error("pair query with identical points {0}")]
    SamePoint(Point),
    #[error("switch graph is stale: the system changed after it was built")]
    StaleGraph,
    #[error("all selection weights are zero")]
    AllZeroWeights,
    #[error("system is not complete")]
    Incomplete,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration catalog mismatch: {0}")]
    CatalogMismatch(String),
    #[error("unknown configuration `{0}`")]
    UnknownTemplate(String),
    #[error("brute-force budget exceeded: {subsets} subsets > {budget}")]
    TooLarge { subsets: u128, budget: u128 },
    #[error("not an STS(13): Pasch count {0}")]
    NotAnSts13(u64),
    #[error("empty sample")]
    EmptySample,
    #[error("empty input")]
    EmptyInput,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate chain: class {0} never occurs as a transition source")]
    DegenerateChain(&'static str),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
