use std::collections::BTreeSet;

use super::{Network, NetworkError, NodeId};

impl Network {
    /// Number of references to each node from live gates and from POs.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let mut refs = vec![0u32; self.nodes.len()];
        for node in self.nodes.iter().filter(|n| !n.dead) {
            for s in node.fanins() {
                refs[s.node().index()] += 1;
            }
        }
        for po in &self.pos {
            refs[po.node().index()] += 1;
        }
        refs
    }

    /// Live gates reading `node` directly.
    pub fn fanouts(&self, node: NodeId) -> Vec<NodeId> {
        self.gates()
            .filter(|&g| self.fanins(g).iter().any(|s| s.node() == node))
            .collect()
    }

    /// All gates reachable from `node` through fanout edges, `node` excluded.
    pub fn compute_tfo(&self, node: NodeId) -> BTreeSet<NodeId> {
        let mut in_cone = vec![false; self.nodes.len()];
        in_cone[node.index()] = true;
        let mut cone = BTreeSet::new();
        for g in self.gates().filter(|&g| g > node) {
            if self.fanins(g).iter().any(|s| in_cone[s.node().index()]) {
                in_cone[g.index()] = true;
                cone.insert(g);
            }
        }
        cone
    }

    /// Nodes in the transitive fanin of `node`, `node` included.
    pub fn compute_tfi(&self, node: NodeId) -> BTreeSet<NodeId> {
        let mut cone = BTreeSet::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if cone.insert(n) {
                stack.extend(self.fanins(n).iter().map(|s| s.node()));
            }
        }
        cone
    }

    /// Maximum fanout-free cone of a gate: the gates that die when `node` is
    /// removed, `node` included.
    pub fn compute_mffc(&self, node: NodeId) -> Result<BTreeSet<NodeId>, NetworkError> {
        if node == NodeId::CONSTANT {
            return Err(NetworkError::ConstantNode(node));
        }
        if !self.is_gate(node) {
            return Err(NetworkError::NotAGate(node));
        }
        let mut refs = self.fanout_counts();
        let mut cone = BTreeSet::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            cone.insert(n);
            for s in self.fanins(n) {
                let f = s.node();
                refs[f.index()] -= 1;
                if refs[f.index()] == 0 && self.is_gate(f) {
                    stack.push(f);
                }
            }
        }
        Ok(cone)
    }

    /// Marks every node in the transitive fanin of some PO.
    pub(crate) fn po_support(&self) -> Vec<bool> {
        let mut reached = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self.pos.iter().map(|s| s.node()).collect();
        while let Some(n) = stack.pop() {
            if !std::mem::replace(&mut reached[n.index()], true) {
                stack.extend(self.fanins(n).iter().map(|s| s.node()));
            }
        }
        reached
    }
}
