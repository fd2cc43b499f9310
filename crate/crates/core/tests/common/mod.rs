#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use gatefuzz::{GateType, Network, NetworkKind, NodeId, Signal};
use rand::Rng;

/// Random network with `gates` attempted gate creations, random POs over
/// gates and PIs, some complemented.
pub fn random_network<R: Rng>(kind: NetworkKind, pis: usize, gates: usize, rng: &mut R) -> Network {
    let mut net = Network::new(kind);
    let mut nodes: Vec<Signal> = (0..pis).map(|_| net.create_pi()).collect();
    let types = kind.gate_types();
    for _ in 0..gates {
        let gate = types[rng.random_range(0..types.len())];
        let fanins: Vec<Signal> = (0..gate.arity())
            .map(|_| nodes[rng.random_range(0..nodes.len())] ^ rng.random_bool(0.5))
            .collect();
        let s = net.create_gate(gate, &fanins).unwrap();
        if !s.is_constant() {
            nodes.push(s.regular());
        }
    }
    let pos = rng.random_range(1..=4);
    for _ in 0..pos {
        let s = nodes[rng.random_range(0..nodes.len())] ^ rng.random_bool(0.3);
        net.add_po(s).unwrap();
    }
    // Every fanout-free gate observable.
    let refs = net.fanout_counts();
    let free: Vec<NodeId> = net.gates().filter(|g| refs[g.index()] == 0).collect();
    for g in free {
        net.add_po(Signal::from(g)).unwrap();
    }
    net
}

pub fn gate_value(gate: GateType, v: &[bool]) -> bool {
    match gate {
        GateType::And => v[0] && v[1],
        GateType::Xor => v[0] ^ v[1],
        GateType::Maj => (v[0] as u8 + v[1] as u8 + v[2] as u8) >= 2,
    }
}

/// Recursive evaluation of one node, independent of the library simulator.
/// `forced` overrides node values.
pub fn eval_node(
    net: &Network,
    node: NodeId,
    inputs: &HashMap<NodeId, bool>,
    forced: &HashMap<NodeId, bool>,
    memo: &mut HashMap<NodeId, bool>,
) -> bool {
    if let Some(&v) = forced.get(&node) {
        return v;
    }
    if let Some(&v) = memo.get(&node) {
        return v;
    }
    let v = if node == NodeId::CONSTANT {
        false
    } else if net.is_pi(node) {
        inputs[&node]
    } else {
        let vals: Vec<bool> = net
            .fanins(node)
            .iter()
            .map(|s| eval_node(net, s.node(), inputs, forced, memo) ^ s.is_complemented())
            .collect();
        gate_value(net.gate_type(node).unwrap(), &vals)
    };
    memo.insert(node, v);
    v
}

pub fn eval_signal(
    net: &Network,
    s: Signal,
    inputs: &HashMap<NodeId, bool>,
    forced: &HashMap<NodeId, bool>,
) -> bool {
    let mut memo = HashMap::new();
    eval_node(net, s.node(), inputs, forced, &mut memo) ^ s.is_complemented()
}

/// PI map for pattern `p`: bit `i` of `p` drives the `i`-th PI.
pub fn assignment(net: &Network, p: usize) -> HashMap<NodeId, bool> {
    net.pis()
        .iter()
        .enumerate()
        .map(|(i, &pi)| (pi, (p >> i) & 1 == 1))
        .collect()
}

pub fn eval_pos(net: &Network, p: usize, forced: &HashMap<NodeId, bool>) -> Vec<bool> {
    let inputs = assignment(net, p);
    net.pos()
        .iter()
        .map(|&po| eval_signal(net, po, &inputs, forced))
        .collect()
}

/// Gates that die when `node` is deleted: repeatedly drop gates that lost
/// every reference from live gates and POs. Gates that had no reference to
/// begin with stay.
pub fn mffc_by_trial_deletion(net: &Network, node: NodeId) -> BTreeSet<NodeId> {
    let original = net.fanout_counts();
    let mut alive: BTreeSet<NodeId> = net.gates().filter(|&g| g != node).collect();
    loop {
        let referenced: BTreeSet<NodeId> = alive
            .iter()
            .flat_map(|&g| net.fanins(g).iter().map(|s| s.node()))
            .chain(net.pos().iter().map(|s| s.node()))
            .collect();
        let next: BTreeSet<NodeId> = alive
            .iter()
            .copied()
            .filter(|g| referenced.contains(g) || original[g.index()] == 0)
            .collect();
        if next == alive {
            break;
        }
        alive = next;
    }
    net.gates().filter(|g| !alive.contains(g)).collect()
}

/// Transitive fanout by Warshall closure over the fanin relation.
pub fn tfo_by_closure(net: &Network, node: NodeId) -> BTreeSet<NodeId> {
    let n = net.node_capacity();
    let mut reach = vec![vec![false; n]; n];
    for g in net.gates() {
        for s in net.fanins(g) {
            reach[s.node().index()][g.index()] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .filter(|&j| reach[node.index()][j])
        .map(NodeId::new)
        .collect()
}

/// Validator written against the public graph API only.
pub fn independent_check(net: &Network) -> Result<(), String> {
    let mut seen = HashSet::new();
    let mut position = vec![usize::MAX; net.node_capacity()];
    position[0] = 0;
    for (i, &pi) in net.pis().iter().enumerate() {
        position[pi.index()] = i + 1;
    }
    let mut refs = vec![0usize; net.node_capacity()];
    for (i, g) in net.gates().enumerate() {
        let here = net.num_pis() + 1 + i;
        let mut key: Vec<_> = net.fanins(g).to_vec();
        for s in &key {
            let p = position[s.node().index()];
            if p == usize::MAX || p >= here {
                return Err(format!("gate {g} reads {} before it is defined", s.node()));
            }
            refs[s.node().index()] += 1;
        }
        key.sort();
        if !seen.insert((net.gate_type(g), key)) {
            return Err(format!("gate {g} duplicates an earlier gate"));
        }
        position[g.index()] = here;
    }
    let po_nodes: HashSet<NodeId> = net.pos().iter().map(|s| s.node()).collect();
    for g in net.gates() {
        if refs[g.index()] == 0 && !po_nodes.contains(&g) {
            return Err(format!("gate {g} has no fanout and is not a PO"));
        }
    }
    Ok(())
}
