//! Logic networks over complementable edges.
//!
//! A [`Network`] stores AIGs, XAGs and MIGs in one representation: a constant
//! node at index 0, primary inputs, and gates whose fanins always refer to
//! nodes with a smaller index. Edges carry a complement bit, so a [`Signal`]
//! is a node plus a polarity, encoded like an AIGER literal.
//!
//! Gate creation applies trivial-case simplification and structural hashing.
//! Substitutions mark replaced logic dead lazily; [`Network::cleanup_dangling`]
//! produces a compacted copy.

mod query;
mod simulate;
mod substitute;
mod transform;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitXor, Not};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use simulate::{table_bit, TruthTable, EXHAUSTIVE_PI_LIMIT};
pub use validate::ValidationError;

/// Index of a node. Index 0 is the constant-zero node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub const CONSTANT: NodeId = NodeId(0);

    pub fn new(index: usize) -> NodeId {
        NodeId(u32::try_from(index).expect("node index overflow"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// A possibly complemented reference to a node.
///
/// The encoding is `2 * node + complemented`, identical to AIGER literals, so
/// the derived ordering sorts by node first and polarity second.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal(u32);

impl Signal {
    pub const FALSE: Signal = Signal(0);
    pub const TRUE: Signal = Signal(1);

    pub fn new(node: NodeId, complemented: bool) -> Signal {
        Signal(node.0 * 2 + complemented as u32)
    }

    pub fn from_literal(literal: u32) -> Signal {
        Signal(literal)
    }

    pub fn literal(self) -> u32 {
        self.0
    }

    pub fn node(self) -> NodeId {
        NodeId(self.0 >> 1)
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    /// The same signal with the complement bit cleared.
    pub fn regular(self) -> Signal {
        Signal(self.0 & !1)
    }

    pub fn is_constant(self) -> bool {
        self.0 < 2
    }
}

impl From<NodeId> for Signal {
    fn from(node: NodeId) -> Signal {
        Signal::new(node, false)
    }
}

impl Not for Signal {
    type Output = Signal;

    fn not(self) -> Signal {
        Signal(self.0 ^ 1)
    }
}

impl BitXor<bool> for Signal {
    type Output = Signal;

    fn bitxor(self, complement: bool) -> Signal {
        Signal(self.0 ^ complement as u32)
    }
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.node())
        } else {
            write!(f, "{}", self.node())
        }
    }
}

/// Gate function of an internal node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateType {
    And,
    Xor,
    Maj,
}

impl GateType {
    pub fn arity(self) -> usize {
        match self {
            GateType::And | GateType::Xor => 2,
            GateType::Maj => 3,
        }
    }

    pub fn evaluate(self, a: u64, b: u64, c: u64) -> u64 {
        match self {
            GateType::And => a & b,
            GateType::Xor => a ^ b,
            GateType::Maj => (a & b) | (a & c) | (b & c),
        }
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateType::And => "AND",
            GateType::Xor => "XOR",
            GateType::Maj => "MAJ",
        })
    }
}

/// Network kind; fixes the set of legal gate types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Aig,
    Xag,
    Mig,
}

impl NetworkKind {
    pub const ALL: [NetworkKind; 3] = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig];

    pub fn gate_types(self) -> &'static [GateType] {
        match self {
            NetworkKind::Aig => &[GateType::And],
            NetworkKind::Xag => &[GateType::And, GateType::Xor],
            NetworkKind::Mig => &[GateType::Maj],
        }
    }

    pub fn allows(self, gate: GateType) -> bool {
        self.gate_types().contains(&gate)
    }

    /// Fanin count shared by every gate type of this kind.
    pub fn arity(self) -> usize {
        self.gate_types()[0].arity()
    }

    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Aig => "aig",
            NetworkKind::Xag => "xag",
            NetworkKind::Mig => "mig",
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NetworkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aig" => Ok(NetworkKind::Aig),
            "xag" => Ok(NetworkKind::Xag),
            "mig" => Ok(NetworkKind::Mig),
            other => Err(format!("unknown network kind `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("gate type {gate} is not allowed in {kind} networks")]
    IllegalGateType { gate: GateType, kind: NetworkKind },
    #[error("{gate} expects {expected} fanins, got {actual}")]
    ArityMismatch {
        gate: GateType,
        expected: usize,
        actual: usize,
    },
    #[error("signal {0:?} does not reference a live node")]
    DeadSignal(Signal),
    #[error("{0} is not a gate")]
    NotAGate(NodeId),
    #[error("{0} is the constant node")]
    ConstantNode(NodeId),
    #[error("{0} is not a live node")]
    NotLive(NodeId),
    #[error("substituting {node} by {signal:?} would create a cycle")]
    WouldCreateCycle { node: NodeId, signal: Signal },
    #[error("assignment has {actual} bits but the network has {expected} inputs")]
    AssignmentLength { expected: usize, actual: usize },
    #[error("exhaustive simulation supports at most {limit} inputs, network has {actual}")]
    TooManyInputs { limit: usize, actual: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum NodeFunction {
    Constant,
    Input,
    Gate(GateType),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub(crate) function: NodeFunction,
    fanins: [Signal; 3],
    pub(crate) dead: bool,
}

impl Node {
    fn constant() -> Node {
        Node {
            function: NodeFunction::Constant,
            fanins: [Signal::FALSE; 3],
            dead: false,
        }
    }

    fn input() -> Node {
        Node {
            function: NodeFunction::Input,
            fanins: [Signal::FALSE; 3],
            dead: false,
        }
    }

    pub(crate) fn fanins(&self) -> &[Signal] {
        match self.function {
            NodeFunction::Gate(g) => &self.fanins[..g.arity()],
            _ => &[],
        }
    }

    fn is_gate(&self) -> bool {
        matches!(self.function, NodeFunction::Gate(_))
    }
}

/// Strash key: gate type plus canonically sorted fanin literals.
type StrashKey = (GateType, [u32; 3]);

fn strash_key(gate: GateType, fanins: &[Signal]) -> StrashKey {
    let mut key = [u32::MAX; 3];
    for (slot, s) in key.iter_mut().zip(fanins) {
        *slot = s.literal();
    }
    (gate, key)
}

/// Result of trivial-case simplification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Simplified {
    /// The gate reduces to an existing signal.
    Existing(Signal),
    /// A gate is required; fanins sorted, `complement` applies to its output.
    Gate {
        gate: GateType,
        fanins: [Signal; 3],
        complement: bool,
    },
}

pub(crate) fn simplify(gate: GateType, fanins: &[Signal]) -> Simplified {
    match gate {
        GateType::And => {
            let (a, b) = sorted2(fanins[0], fanins[1]);
            if a == b {
                Simplified::Existing(a)
            } else if a == !b || a == Signal::FALSE {
                Simplified::Existing(Signal::FALSE)
            } else if a == Signal::TRUE {
                Simplified::Existing(b)
            } else {
                Simplified::Gate {
                    gate,
                    fanins: [a, b, Signal::FALSE],
                    complement: false,
                }
            }
        }
        GateType::Xor => {
            let complement = fanins[0].is_complemented() ^ fanins[1].is_complemented();
            let (a, b) = sorted2(fanins[0].regular(), fanins[1].regular());
            if a == b {
                Simplified::Existing(Signal::FALSE ^ complement)
            } else if a == Signal::FALSE {
                Simplified::Existing(b ^ complement)
            } else {
                Simplified::Gate {
                    gate,
                    fanins: [a, b, Signal::FALSE],
                    complement,
                }
            }
        }
        GateType::Maj => {
            let (a, b, c) = (fanins[0], fanins[1], fanins[2]);
            if a == b || a == c {
                return Simplified::Existing(a);
            }
            if b == c {
                return Simplified::Existing(b);
            }
            if a == !b {
                return Simplified::Existing(c);
            }
            if a == !c {
                return Simplified::Existing(b);
            }
            if b == !c {
                return Simplified::Existing(a);
            }
            let mut sorted = [a, b, c];
            sorted.sort_unstable();
            Simplified::Gate {
                gate,
                fanins: sorted,
                complement: false,
            }
        }
    }
}

fn sorted2(a: Signal, b: Signal) -> (Signal, Signal) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A combinational logic network.
#[derive(Clone, Debug)]
pub struct Network {
    kind: NetworkKind,
    pub(crate) nodes: Vec<Node>,
    pub(crate) pis: Vec<NodeId>,
    pub(crate) pos: Vec<Signal>,
    strash: HashMap<StrashKey, NodeId>,
    structural_hashing: bool,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.nodes == other.nodes
            && self.pis == other.pis
            && self.pos == other.pos
    }
}

impl Eq for Network {}

impl Hash for Network {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.nodes.hash(state);
        self.pis.hash(state);
        self.pos.hash(state);
    }
}

impl Network {
    pub fn new(kind: NetworkKind) -> Network {
        Network {
            kind,
            nodes: vec![Node::constant()],
            pis: Vec::new(),
            pos: Vec::new(),
            strash: HashMap::new(),
            structural_hashing: true,
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn structural_hashing(&self) -> bool {
        self.structural_hashing
    }

    /// Turns structural hashing on or off. Enabling it indexes the live gates;
    /// when two gates share a key the one with the smaller index is kept in
    /// the table.
    pub fn set_structural_hashing(&mut self, enabled: bool) {
        self.structural_hashing = enabled;
        self.strash.clear();
        if enabled {
            for (i, node) in self.nodes.iter().enumerate() {
                if let (NodeFunction::Gate(g), false) = (node.function, node.dead) {
                    self.strash
                        .entry(strash_key(g, node.fanins()))
                        .or_insert(NodeId::new(i));
                }
            }
        }
    }

    pub fn constant(&self, value: bool) -> Signal {
        Signal::FALSE ^ value
    }

    /// Appends a fresh primary input.
    pub fn create_pi(&mut self) -> Signal {
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(Node::input());
        self.pis.push(id);
        Signal::from(id)
    }

    pub fn add_po(&mut self, signal: Signal) -> Result<(), NetworkError> {
        self.check_live_signal(signal)?;
        self.pos.push(signal);
        Ok(())
    }

    /// Creates a gate after trivial-case simplification and a strash lookup.
    /// Returns an existing signal whenever one computes the same function
    /// syntactically, so the gate count grows by at most one.
    pub fn create_gate(&mut self, gate: GateType, fanins: &[Signal]) -> Result<Signal, NetworkError> {
        self.check_gate_request(gate, fanins)?;
        Ok(self.create_gate_unchecked(gate, fanins))
    }

    pub(crate) fn create_gate_unchecked(&mut self, gate: GateType, fanins: &[Signal]) -> Signal {
        match simplify(gate, fanins) {
            Simplified::Existing(s) => s,
            Simplified::Gate {
                gate,
                fanins,
                complement,
            } => {
                let fanins = &fanins[..gate.arity()];
                if self.structural_hashing {
                    if let Some(&id) = self.strash.get(&strash_key(gate, fanins)) {
                        return Signal::new(id, complement);
                    }
                }
                self.push_gate(gate, fanins) ^ complement
            }
        }
    }

    /// Adds a gate exactly as given (fanins are only sorted), bypassing
    /// simplification and the strash lookup. Used by file readers.
    pub fn add_gate_raw(&mut self, gate: GateType, fanins: &[Signal]) -> Result<Signal, NetworkError> {
        self.check_gate_request(gate, fanins)?;
        let mut sorted = [Signal::FALSE; 3];
        sorted[..fanins.len()].copy_from_slice(fanins);
        sorted[..fanins.len()].sort_unstable();
        Ok(self.push_gate(gate, &sorted[..fanins.len()]))
    }

    fn push_gate(&mut self, gate: GateType, fanins: &[Signal]) -> Signal {
        let id = NodeId::new(self.nodes.len());
        let mut stored = [Signal::FALSE; 3];
        stored[..fanins.len()].copy_from_slice(fanins);
        self.nodes.push(Node {
            function: NodeFunction::Gate(gate),
            fanins: stored,
            dead: false,
        });
        if self.structural_hashing {
            self.strash.entry(strash_key(gate, fanins)).or_insert(id);
        }
        Signal::from(id)
    }

    fn check_gate_request(&self, gate: GateType, fanins: &[Signal]) -> Result<(), NetworkError> {
        if !self.kind.allows(gate) {
            return Err(NetworkError::IllegalGateType {
                gate,
                kind: self.kind,
            });
        }
        if fanins.len() != gate.arity() {
            return Err(NetworkError::ArityMismatch {
                gate,
                expected: gate.arity(),
                actual: fanins.len(),
            });
        }
        fanins.iter().try_for_each(|&s| self.check_live_signal(s))
    }

    pub(crate) fn check_live_signal(&self, signal: Signal) -> Result<(), NetworkError> {
        match self.nodes.get(signal.node().index()) {
            Some(node) if !node.dead => Ok(()),
            _ => Err(NetworkError::DeadSignal(signal)),
        }
    }

    pub fn create_and(&mut self, a: Signal, b: Signal) -> Signal {
        match self.kind {
            NetworkKind::Aig | NetworkKind::Xag => self.create_gate_unchecked(GateType::And, &[a, b]),
            NetworkKind::Mig => self.create_gate_unchecked(GateType::Maj, &[Signal::FALSE, a, b]),
        }
    }

    pub fn create_or(&mut self, a: Signal, b: Signal) -> Signal {
        match self.kind {
            NetworkKind::Mig => self.create_gate_unchecked(GateType::Maj, &[Signal::TRUE, a, b]),
            _ => !self.create_and(!a, !b),
        }
    }

    pub fn create_xor(&mut self, a: Signal, b: Signal) -> Signal {
        match self.kind {
            NetworkKind::Xag => self.create_gate_unchecked(GateType::Xor, &[a, b]),
            _ => {
                let left = self.create_and(a, !b);
                let right = self.create_and(!a, b);
                self.create_or(left, right)
            }
        }
    }

    pub fn create_maj(&mut self, a: Signal, b: Signal, c: Signal) -> Signal {
        match self.kind {
            NetworkKind::Mig => self.create_gate_unchecked(GateType::Maj, &[a, b, c]),
            _ => {
                let ab = self.create_and(a, b);
                let either = self.create_or(a, b);
                let c_either = self.create_and(c, either);
                self.create_or(ab, c_either)
            }
        }
    }

    /// Builds a gate of the given type in this network, decomposing it when
    /// the type is not native to the network kind.
    pub fn create_lowered(&mut self, gate: GateType, fanins: &[Signal]) -> Signal {
        match gate {
            GateType::And => self.create_and(fanins[0], fanins[1]),
            GateType::Xor => self.create_xor(fanins[0], fanins[1]),
            GateType::Maj => self.create_maj(fanins[0], fanins[1], fanins[2]),
        }
    }

    pub fn pis(&self) -> &[NodeId] {
        &self.pis
    }

    pub fn pos(&self) -> &[Signal] {
        &self.pos
    }

    pub fn num_pis(&self) -> usize {
        self.pis.len()
    }

    pub fn num_pos(&self) -> usize {
        self.pos.len()
    }

    /// Number of live internal gates.
    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_gate() && !n.dead).count()
    }

    /// Size of the node table, dead nodes included.
    pub fn node_capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_live(&self, node: NodeId) -> bool {
        self.nodes.get(node.index()).is_some_and(|n| !n.dead)
    }

    pub fn is_constant(&self, node: NodeId) -> bool {
        node == NodeId::CONSTANT
    }

    pub fn is_pi(&self, node: NodeId) -> bool {
        self.nodes
            .get(node.index())
            .is_some_and(|n| n.function == NodeFunction::Input && !n.dead)
    }

    pub fn is_gate(&self, node: NodeId) -> bool {
        self.nodes
            .get(node.index())
            .is_some_and(|n| n.is_gate() && !n.dead)
    }

    pub fn gate_type(&self, node: NodeId) -> Option<GateType> {
        match self.nodes.get(node.index())?.function {
            NodeFunction::Gate(g) => Some(g),
            _ => None,
        }
    }

    /// Fanins of a node; empty for the constant and inputs.
    pub fn fanins(&self, node: NodeId) -> &[Signal] {
        self.nodes[node.index()].fanins()
    }

    /// Live gates in index (topological) order.
    pub fn gates(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_gate() && !n.dead)
            .map(|(i, _)| NodeId::new(i))
    }

    /// Position of `node` in the PI list.
    pub fn pi_index(&self, node: NodeId) -> Option<usize> {
        self.pis.iter().position(|&p| p == node)
    }

    /// Removes the PO at `index`.
    pub fn remove_po(&mut self, index: usize) -> Signal {
        self.pos.remove(index)
    }

    pub(crate) fn kill(&mut self, id: NodeId) {
        let node = &mut self.nodes[id.index()];
        if node.dead {
            return;
        }
        node.dead = true;
        if let NodeFunction::Gate(g) = node.function {
            let key = strash_key(g, node.fanins());
            if self.strash.get(&key) == Some(&id) {
                self.strash.remove(&key);
            }
        }
    }

    pub(crate) fn strash_lookup(&self, gate: GateType, fanins: &[Signal]) -> Option<NodeId> {
        if !self.structural_hashing {
            return None;
        }
        self.strash
            .get(&strash_key(gate, fanins))
            .copied()
            .filter(|id| !self.nodes[id.index()].dead)
    }

    pub(crate) fn strash_remove(&mut self, id: NodeId) {
        let node = &self.nodes[id.index()];
        if let NodeFunction::Gate(g) = node.function {
            let key = strash_key(g, node.fanins());
            if self.strash.get(&key) == Some(&id) {
                self.strash.remove(&key);
            }
        }
    }

    pub(crate) fn strash_insert(&mut self, id: NodeId) {
        if !self.structural_hashing {
            return;
        }
        let node = &self.nodes[id.index()];
        if let NodeFunction::Gate(g) = node.function {
            self.strash.insert(strash_key(g, node.fanins()), id);
        }
    }

    pub(crate) fn set_fanins(&mut self, id: NodeId, fanins: &[Signal]) {
        let node = &mut self.nodes[id.index()];
        node.fanins = [Signal::FALSE; 3];
        node.fanins[..fanins.len()].copy_from_slice(fanins);
    }

    pub(crate) fn set_function(&mut self, id: NodeId, function: NodeFunction) {
        self.nodes[id.index()].function = function;
    }
}

#[cfg(test)]
mod tests;
