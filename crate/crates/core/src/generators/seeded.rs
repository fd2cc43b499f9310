use rand::Rng;

use crate::network::{GateType, Network, NetworkKind, Signal};

/// Two AND-built XORs over a shared input `c`, whose other inputs are the
/// gates `AND(a, b)` and `AND(~a, b)`. Three PIs, eight gates, two POs.
pub fn conflicting_xor_core() -> Network {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let c = net.create_pi();
    let t1 = net.create_and(a, b);
    let r1 = and_xor(&mut net, c, t1);
    let t2 = net.create_and(!a, b);
    let r2 = and_xor(&mut net, c, t2);
    net.add_po(r1).expect("live");
    net.add_po(r2).expect("live");
    net
}

fn and_xor(net: &mut Network, p: Signal, q: Signal) -> Signal {
    let x = net.create_and(p, q);
    let y = net.create_and(!p, !q);
    net.create_and(!x, !y)
}

/// Embeds `core` in a random wrapper of the core's kind with `pis` PIs and
/// `gates` gates in total. Core PIs map to distinct wrapper PIs; wrapper
/// gates read PIs, earlier wrapper gates and core nodes. Fanout-free gates
/// and the core POs become POs.
pub fn embed_core<R: Rng + ?Sized>(core: &Network, pis: usize, gates: usize, rng: &mut R) -> Network {
    assert!(pis >= core.num_pis(), "wrapper needs at least as many PIs as the core");
    let kind = core.kind();
    let mut net = Network::new(kind);
    let inputs: Vec<Signal> = (0..pis).map(|_| net.create_pi()).collect();
    let mut order: Vec<usize> = (0..pis).collect();
    for i in 0..core.num_pis() {
        let j = rng.random_range(i..pis);
        order.swap(i, j);
    }
    let bound: Vec<Signal> = order[..core.num_pis()].iter().map(|&i| inputs[i]).collect();
    let core_pos = core.copy_into(&mut net, &bound);

    // Half the wrapper before the core nodes are visible, half after.
    let mut nodes: Vec<Signal> = inputs.clone();
    let first = net.gate_count() + gates.saturating_sub(net.gate_count()) / 2;
    grow(&mut net, &mut nodes, first, rng);
    nodes.extend(net.gates().map(Signal::from));
    nodes.sort();
    nodes.dedup();
    grow(&mut net, &mut nodes, gates, rng);

    for po in core_pos {
        net.add_po(po).expect("live");
    }
    let refs = net.fanout_counts();
    let free: Vec<Signal> = net
        .gates()
        .filter(|g| refs[g.index()] == 0)
        .map(Signal::from)
        .collect();
    for s in free {
        net.add_po(s).expect("live");
    }
    net.cleanup_dangling()
}

fn grow<R: Rng + ?Sized>(net: &mut Network, nodes: &mut Vec<Signal>, target: usize, rng: &mut R) {
    let types: Vec<GateType> = net.kind().gate_types().to_vec();
    let mut failures = 0;
    while net.gate_count() < target && failures < 100 * target.max(1) {
        let gate = types[rng.random_range(0..types.len())];
        let fanins: Vec<Signal> = (0..gate.arity())
            .map(|_| nodes[rng.random_range(0..nodes.len())] ^ rng.random_bool(0.5))
            .collect();
        let before = net.gate_count();
        let s = net.create_gate(gate, &fanins).expect("legal gate");
        if net.gate_count() > before {
            nodes.push(s.regular());
            failures = 0;
        } else {
            failures += 1;
        }
    }
}
