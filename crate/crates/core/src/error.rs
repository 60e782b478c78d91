use crate::circuit::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(i64),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("digit {digit} is outside the digit range of base {q}")]
    InvalidDigit { digit: i64, q: i32 },
    #[error("markings belong to different circuits")]
    CircuitMismatch,
    #[error("marking handle is stale (already consumed or released)")]
    StaleMarking,
    #[error("edge {0} -> {1} would close a cycle")]
    Cycle(NodeId, NodeId),
    #[error("edge {0} -> {1} already exists")]
    MultiEdge(NodeId, NodeId),
    #[error("value exceeds {0} bits")]
    Overflow(u64),
    #[error("not a power circuit: node {0} has a negative successor value")]
    NotAPowerCircuit(NodeId),
    #[error("operation requires a reduced circuit")]
    NotReduced,
    #[error("edge from the reduced part {0} into pending node {1}")]
    InvalidEmbedding(NodeId, NodeId),
    #[error("rewriting rule {rule} is not applicable at position {at}")]
    RuleNotApplicable { rule: u8, at: usize },
    #[error("power sum or marking is not compact")]
    NotCompact,
    #[error("a node with the same value already exists ({0})")]
    DuplicateValue(NodeId),
    #[error("triples live in different factors ({0} vs {1})")]
    FactorMismatch(usize, usize),
    #[error("element is not in the required subgroup")]
    NotInSubgroup,
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid circuit: {0}")]
    Validation(String),
}
