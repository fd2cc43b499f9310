use super::{simplify, NetworkError, Network, NodeFunction, NodeId, Signal, Simplified};

/// Pending replacement of a node during propagation.
#[derive(Clone, Copy)]
struct Forward {
    signal: Signal,
    /// The node itself dies when the sweep reaches it.
    kill: bool,
}

impl Network {
    /// Replaces `node` by constant zero and propagates constants through its
    /// transitive fanout. A complemented edge to `node` becomes constant one.
    /// Gates that simplify away die, and so do cones left without fanout.
    ///
    /// A PI stays in the PI list, it just loses all its fanouts.
    pub fn substitute_constant_zero(&mut self, node: NodeId) -> Result<(), NetworkError> {
        if node == NodeId::CONSTANT {
            return Err(NetworkError::ConstantNode(node));
        }
        if !self.is_live(node) {
            return Err(NetworkError::NotLive(node));
        }
        self.replace(node, Signal::FALSE);
        Ok(())
    }

    /// Turns `node` into a fresh primary input. Fanouts and POs keep pointing
    /// at the same index, so there is no constant propagation; the fanin cone
    /// that only fed `node` dies.
    pub fn substitute_with_pi(&mut self, node: NodeId) -> Result<Signal, NetworkError> {
        if node == NodeId::CONSTANT {
            return Err(NetworkError::ConstantNode(node));
        }
        if !self.is_gate(node) {
            return Err(NetworkError::NotAGate(node));
        }
        self.strash_remove(node);
        let released: Vec<NodeId> = self.fanins(node).iter().map(|s| s.node()).collect();
        self.set_fanins(node, &[]);
        self.set_function(node, NodeFunction::Input);
        self.pis.push(node);
        self.release(released);
        Ok(Signal::from(node))
    }

    /// Redirects the fanouts and POs of `node` to `signal` and propagates
    /// trivial simplifications through the fanout cone.
    ///
    /// When `signal` lives at a larger index than `node` the network is
    /// renumbered into a fresh topological order first, so node ids held by
    /// the caller are only stable if `signal.node() < node`.
    pub fn substitute_with_signal(&mut self, node: NodeId, signal: Signal) -> Result<(), NetworkError> {
        if node == NodeId::CONSTANT {
            return Err(NetworkError::ConstantNode(node));
        }
        if !self.is_gate(node) {
            return Err(NetworkError::NotAGate(node));
        }
        self.check_live_signal(signal)?;
        if signal.node() == node || self.compute_tfo(node).contains(&signal.node()) {
            return Err(NetworkError::WouldCreateCycle { node, signal });
        }
        if signal.node() < node {
            self.replace(node, signal);
        } else {
            let mapping = self.relabel_with_dependency(node, signal.node());
            let new_node = mapping[node.index()].expect("live node keeps an id");
            let new_signal =
                Signal::new(mapping[signal.node().index()].expect("live"), signal.is_complemented());
            self.replace(new_node, new_signal);
        }
        Ok(())
    }

    /// Core propagation: `target` is replaced by `by` (which must precede every
    /// fanout of `target`). Walks the nodes after `target` in index order,
    /// re-simplifying every gate that reads a replaced node.
    fn replace(&mut self, target: NodeId, by: Signal) {
        let len = self.nodes.len();
        let mut forward: Vec<Option<Forward>> = vec![None; len];
        let mut released = Vec::new();

        forward[target.index()] = Some(Forward {
            signal: by,
            kill: false,
        });
        if self.is_gate(target) {
            released.extend(self.fanins(target).iter().map(|s| s.node()));
            self.kill(target);
        }

        for idx in target.index() + 1..len {
            let id = NodeId::new(idx);
            let node = &self.nodes[idx];
            let NodeFunction::Gate(gate) = node.function else {
                continue;
            };
            if node.dead {
                continue;
            }
            if let Some(Forward { kill: true, .. }) = forward[idx] {
                released.extend(node.fanins().iter().map(|s| s.node()));
                self.kill(id);
                continue;
            }
            let old: Vec<Signal> = node.fanins().to_vec();
            if !old.iter().any(|s| forward[s.node().index()].is_some()) {
                continue;
            }
            let resolved: Vec<Signal> = old
                .iter()
                .map(|&s| match forward[s.node().index()] {
                    Some(f) => f.signal ^ s.is_complemented(),
                    None => s,
                })
                .collect();
            released.extend(old.iter().map(|s| s.node()));
            self.strash_remove(id);

            match simplify(gate, &resolved) {
                Simplified::Existing(s) => {
                    self.nodes[idx].dead = true;
                    forward[idx] = Some(Forward {
                        signal: s,
                        kill: false,
                    });
                }
                Simplified::Gate {
                    gate: new_gate,
                    fanins,
                    complement,
                } => {
                    let fanins = &fanins[..new_gate.arity()];
                    // A later gate that reads a forwarded node still sits under its old key.
                    let existing = self.strash_lookup(new_gate, fanins).filter(|&other| {
                        other < id || !self.fanins(other).iter().any(|s| forward[s.node().index()].is_some())
                    });
                    match existing {
                        Some(other) if other < id => {
                            self.nodes[idx].dead = true;
                            forward[idx] = Some(Forward {
                                signal: Signal::new(other, complement),
                                kill: false,
                            });
                        }
                        existing => {
                            self.set_fanins(id, fanins);
                            self.set_function(id, NodeFunction::Gate(new_gate));
                            self.strash_insert(id);
                            if let Some(other) = existing {
                                forward[other.index()] = Some(Forward {
                                    signal: Signal::from(id),
                                    kill: true,
                                });
                            }
                            if complement {
                                forward[idx] = Some(Forward {
                                    signal: !Signal::from(id),
                                    kill: false,
                                });
                            }
                        }
                    }
                }
            }
        }

        for po in self.pos.iter_mut() {
            if let Some(f) = forward[po.node().index()] {
                *po = f.signal ^ po.is_complemented();
            }
        }
        self.release(released);
    }

    /// Kills gates among `candidates` (and recursively their fanins) that no
    /// longer have any live fanout.
    fn release(&mut self, mut candidates: Vec<NodeId>) {
        let mut refs = self.fanout_counts();
        while let Some(id) = candidates.pop() {
            if !self.is_gate(id) || refs[id.index()] > 0 {
                continue;
            }
            let fanins: Vec<NodeId> = self.fanins(id).iter().map(|s| s.node()).collect();
            self.kill(id);
            for f in fanins {
                refs[f.index()] -= 1;
                candidates.push(f);
            }
        }
    }

    /// Renumbers all live nodes in a topological order in which `before`
    /// precedes every fanout of `after`. Returns the old-to-new id mapping.
    fn relabel_with_dependency(&mut self, after: NodeId, before: NodeId) -> Vec<Option<NodeId>> {
        let len = self.nodes.len();
        let mut fanouts: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.dead {
                continue;
            }
            for s in node.fanins() {
                fanouts[s.node().index()].push(i);
            }
        }
        // Every fanout of `after` must also come after `before`.
        let mut indegree = vec![0usize; len];
        let mut extra: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.dead {
                continue;
            }
            indegree[i] = node.fanins().len();
            if node.fanins().iter().any(|s| s.node() == after) {
                extra[before.index()].push(i);
                indegree[i] += 1;
            }
        }
        let mut order = Vec::with_capacity(len);
        let mut ready: std::collections::BTreeSet<usize> = (0..len)
            .filter(|&i| !self.nodes[i].dead && indegree[i] == 0)
            .collect();
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &o in fanouts[i].iter().chain(extra[i].iter()) {
                indegree[o] -= 1;
                if indegree[o] == 0 {
                    ready.insert(o);
                }
            }
        }
        let mut mapping = vec![None; len];
        for (new, &old) in order.iter().enumerate() {
            mapping[old] = Some(NodeId::new(new));
        }
        let remap = |s: Signal| Signal::new(mapping[s.node().index()].expect("live"), s.is_complemented());
        let mut nodes = Vec::with_capacity(order.len());
        for &old in &order {
            let mut node = self.nodes[old].clone();
            let fanins: Vec<Signal> = node.fanins().iter().map(|&s| remap(s)).collect();
            let mut sorted = [Signal::FALSE; 3];
            sorted[..fanins.len()].copy_from_slice(&fanins);
            sorted[..fanins.len()].sort_unstable();
            node.fanins = sorted;
            nodes.push(node);
        }
        self.nodes = nodes;
        self.pis = self.pis.iter().map(|p| mapping[p.index()].expect("live pi")).collect();
        self.pos = self.pos.iter().map(|&s| remap(s)).collect();
        let hashing = self.structural_hashing();
        self.set_structural_hashing(hashing);
        mapping
    }
}
