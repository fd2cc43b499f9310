//! Fuzz testing and testcase minimization for gate-level logic networks.
//!
//! The crate generates AIG, XAG and MIG testcases to exercise logic
//! synthesis applications, and shrinks failure-inducing testcases to a
//! 1-minimal core with structural reduction stages. An [`oracle::Oracle`]
//! wraps the application under test together with its verification.

pub mod generators;
pub mod io;
pub mod minimizer;
pub mod network;
pub mod oracle;

pub use io::{FileFormat, IoError};
pub use network::{GateType, Network, NetworkError, NetworkKind, NodeId, Signal};
