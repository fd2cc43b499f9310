use std::collections::HashMap;

use thiserror::Error;

use super::{strash_key, Network, NodeFunction, NodeId, Signal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("node 0 is not the constant")]
    MissingConstant,
    #[error("gate {gate} reads {fanin:?}, which does not precede it")]
    NotTopological { gate: NodeId, fanin: Signal },
    #[error("gate {gate} reads dead node {fanin:?}")]
    DeadFanin { gate: NodeId, fanin: Signal },
    #[error("gate {0} has a type not allowed by the network kind")]
    IllegalGate(NodeId),
    #[error("PO {index} references dead node {signal:?}")]
    DeadOutput { index: usize, signal: Signal },
    #[error("PI list entry {0} is not a live input")]
    BadInput(NodeId),
    #[error("input {0} appears in the PI list more than once")]
    DuplicateInput(NodeId),
    #[error("gates {0} and {1} have the same structural hash key")]
    DuplicateGate(NodeId, NodeId),
}

impl Network {
    /// Checks the structural invariants: topological storage, live
    /// references, legal gate types and, when structural hashing is on,
    /// uniqueness of gate keys.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.nodes.first().map(|n| n.function) != Some(NodeFunction::Constant) {
            return Err(ValidationError::MissingConstant);
        }
        let mut keys = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let NodeFunction::Gate(gate) = node.function else {
                continue;
            };
            if node.dead {
                continue;
            }
            let id = NodeId::new(i);
            if !self.kind().allows(gate) {
                return Err(ValidationError::IllegalGate(id));
            }
            for &fanin in node.fanins() {
                if fanin.node().index() >= i {
                    return Err(ValidationError::NotTopological { gate: id, fanin });
                }
                if self.nodes[fanin.node().index()].dead {
                    return Err(ValidationError::DeadFanin { gate: id, fanin });
                }
            }
            if self.structural_hashing() {
                if let Some(prev) = keys.insert(strash_key(gate, node.fanins()), id) {
                    return Err(ValidationError::DuplicateGate(prev, id));
                }
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        for &pi in &self.pis {
            if !self.is_pi(pi) {
                return Err(ValidationError::BadInput(pi));
            }
            if std::mem::replace(&mut seen[pi.index()], true) {
                return Err(ValidationError::DuplicateInput(pi));
            }
        }
        for (index, &signal) in self.pos.iter().enumerate() {
            if !self.is_live(signal.node()) {
                return Err(ValidationError::DeadOutput { index, signal });
            }
        }
        Ok(())
    }
}
