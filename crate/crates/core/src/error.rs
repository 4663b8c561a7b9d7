use thiserror::Error;

use crate::moves::NoValidRewiring;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("sequence entries must be >= 1")]
    ZeroEntry,
    #[error("sequence {0} is not in W2 (contains an entry 1)")]
    NotInW2(String),
    #[error("empty sequence not allowed here")]
    Empty,
    #[error("invalid fraction {n}/{q}: need n > q >= 1 and gcd 1")]
    BadFraction { n: i64, q: i64 },
    #[error("gap {gap} out of range for chain of length {len}")]
    GapOutOfRange { gap: usize, len: usize },
    #[error("position {pos} out of range for length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("node {pos} has weight {weight}, not 1")]
    NotMinusOne { pos: usize, weight: u32 },
    #[error("blowing down node {pos} would create a weight-0 node")]
    DegenerateBlowDown { pos: usize },
    #[error("chain contains a -1 node")]
    HasMinusOne,
    #[error("chain {0} is not of type T")]
    NotTypeT(String),
    #[error("invalid subdivision: {0}")]
    InvalidSubdivision(String),
    #[error("label count {labels} does not match {vertices} vertices")]
    LabelCount { labels: usize, vertices: usize },
    #[error("labels are not admissible for the subdivision")]
    Inadmissible,
    #[error("vertex set for height contains v0 or is empty")]
    BadHeightSet,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not a P-element: {0}")]
    NotInP(String),
    #[error("invalid GJ data: {0}")]
    InvalidGj(String),
    #[error(transparent)]
    NoValidRewiring(Box<NoValidRewiring>),
    #[error("iteration bound {0} exceeded")]
    IterationBound(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
