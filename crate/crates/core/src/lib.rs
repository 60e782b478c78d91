//! Base-`q` power circuits: a compressed representation of integers up to
//! tower-function magnitude, with exact comparison on reduced circuits, and
//! word-problem solvers for the Baumslag–Gersten groups `BG(q)` and the
//! generalized Higman groups `H_f(1,q)` built on top of them.

pub mod bs;
pub mod circuit;
pub mod compact;
pub mod error;
pub mod higman;
pub mod io;
pub mod oracle;
pub mod reduce;
pub mod store;
pub mod treed;

pub use circuit::{tow, Base, Digit, Digits, Marking, NodeId, PowerCircuit, DEFAULT_MAX_BITS};
pub use compact::{compactify, PowerSum};
pub use error::{Error, Result};
pub use reduce::{is_power_circuit, Chain, ExtendReport, Ordering3, ReducedCircuit};
pub use bs::{bg_trivial, BgLetter, Triple};
pub use higman::{higman_trivial, higman_trivial_stats, HLetter, HigmanStats, Side};
pub use oracle::PairValue;
pub use store::{Accounting, Mode, Store};
pub use treed::{MarkTree, Owner, TreeReport, TreedCircuit};
