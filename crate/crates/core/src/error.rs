use crate::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveEdgeWeight { u: NodeId, v: NodeId, weight: i64 },
    #[error("node {0} has negative weight")]
    NegativeNodeWeight(NodeId),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid matching: {0}")]
    InvalidMatching(&'static str),
    #[error("block id {block} out of range for k = {k}")]
    BlockOutOfRange { block: u32, k: u32 },
    #[error("cannot split {n} nodes into {k} blocks")]
    TooManyBlocks { k: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
