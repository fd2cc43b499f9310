use super::{GateType, Network, NetworkKind, NodeFunction, NodeId, Signal};

impl Network {
    /// Compacted copy holding the constant, every live PI (in PI order) and
    /// the gates in the transitive fanin of some PO, renumbered in
    /// topological order. Gate structure is copied verbatim.
    pub fn cleanup_dangling(&self) -> Network {
        let support = self.po_support();
        let mut out = Network::new(self.kind);
        out.set_structural_hashing(false);
        let mut map: Vec<Option<Signal>> = vec![None; self.nodes.len()];
        map[0] = Some(Signal::FALSE);
        for &pi in &self.pis {
            map[pi.index()] = Some(out.create_pi());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let NodeFunction::Gate(gate) = node.function else {
                continue;
            };
            if node.dead || !support[i] {
                continue;
            }
            let fanins: Vec<Signal> = node
                .fanins()
                .iter()
                .map(|&s| map[s.node().index()].expect("fanin precedes gate") ^ s.is_complemented())
                .collect();
            map[i] = Some(out.add_gate_raw(gate, &fanins).expect("copied gate is legal"));
        }
        for &po in &self.pos {
            out.pos
                .push(map[po.node().index()].expect("PO drives a live node") ^ po.is_complemented());
        }
        out.set_structural_hashing(self.structural_hashing());
        out
    }

    /// Kills, in place, every gate outside the transitive fanin of the POs.
    pub fn sweep_dangling(&mut self) {
        let support = self.po_support();
        for i in 0..self.nodes.len() {
            if self.nodes[i].function != NodeFunction::Input && !support[i] && i != 0 {
                self.kill(NodeId::new(i));
            }
        }
    }

    /// Drops PIs that neither feed a live gate nor drive a PO.
    pub fn remove_dangling_pis(&mut self) -> usize {
        let refs = self.fanout_counts();
        let before = self.pis.len();
        let dangling: Vec<NodeId> = self
            .pis
            .iter()
            .copied()
            .filter(|p| refs[p.index()] == 0)
            .collect();
        for p in &dangling {
            self.kill(*p);
        }
        self.pis.retain(|p| refs[p.index()] > 0);
        before - self.pis.len()
    }

    /// Rebuilds all live gates into `dst`, reading the PIs of `self` from
    /// `inputs`. Gates not native to `dst` are decomposed. Returns the PO
    /// signals of `self` expressed in `dst`.
    pub fn copy_into(&self, dst: &mut Network, inputs: &[Signal]) -> Vec<Signal> {
        assert_eq!(inputs.len(), self.pis.len(), "one input signal per PI");
        let mut map: Vec<Option<Signal>> = vec![None; self.nodes.len()];
        map[0] = Some(Signal::FALSE);
        for (&pi, &s) in self.pis.iter().zip(inputs) {
            map[pi.index()] = Some(s);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let NodeFunction::Gate(gate) = node.function else {
                continue;
            };
            if node.dead {
                continue;
            }
            let fanins: Vec<Signal> = node
                .fanins()
                .iter()
                .map(|&s| map[s.node().index()].expect("fanin precedes gate") ^ s.is_complemented())
                .collect();
            map[i] = Some(dst.create_lowered(gate, &fanins));
        }
        self.pos
            .iter()
            .map(|&po| map[po.node().index()].expect("PO drives a live node") ^ po.is_complemented())
            .collect()
    }

    /// Functionally identical network of another kind, rebuilt with
    /// simplification and structural hashing, dangling logic removed.
    pub fn converted(&self, kind: NetworkKind) -> Network {
        let mut out = Network::new(kind);
        let inputs: Vec<Signal> = self.pis.iter().map(|_| out.create_pi()).collect();
        for po in self.copy_into(&mut out, &inputs) {
            out.pos.push(po);
        }
        out.cleanup_dangling()
    }

    /// Decomposes XOR and MAJ gates into ANDs.
    pub fn lower_to_aig(&self) -> Network {
        self.converted(NetworkKind::Aig)
    }

    pub fn count_gates_of(&self, gate: GateType) -> usize {
        self.gates().filter(|&g| self.gate_type(g) == Some(gate)).count()
    }
}
