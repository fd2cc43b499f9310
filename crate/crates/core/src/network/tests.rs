use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

/// Random network built directly through `create_gate`; all fanout-free
/// gates become POs, plus one random extra PO.
pub(crate) fn random_network(kind: NetworkKind, pis: usize, gates: usize, rng: &mut ChaCha8Rng) -> Network {
    let mut net = Network::new(kind);
    let mut nodes: Vec<Signal> = (0..pis).map(|_| net.create_pi()).collect();
    let mut attempts = 0;
    while net.gate_count() < gates && attempts < gates * 100 {
        attempts += 1;
        let gate = kind.gate_types()[rng.random_range(0..kind.gate_types().len())];
        let fanins: Vec<Signal> = (0..gate.arity())
            .map(|_| nodes[rng.random_range(0..nodes.len())] ^ rng.random_bool(0.5))
            .collect();
        let before = net.gate_count();
        let s = net.create_gate(gate, &fanins).unwrap();
        if net.gate_count() > before {
            nodes.push(s.regular());
        }
    }
    let refs = net.fanout_counts();
    let fanout_free: Vec<NodeId> = net.gates().filter(|g| refs[g.index()] == 0).collect();
    for g in fanout_free {
        net.add_po(Signal::new(g, rng.random_bool(0.5))).unwrap();
    }
    let extra = nodes[rng.random_range(0..nodes.len())];
    net.add_po(extra ^ rng.random_bool(0.5)).unwrap();
    net
}

/// Per-assignment recursive evaluation, optionally forcing one node to the
/// value of a signal (or a constant).
fn eval_with_override(net: &Network, assignment: &[bool], forced: Option<(NodeId, Forced)>) -> Vec<bool> {
    fn value(
        net: &Network,
        node: NodeId,
        assignment: &[bool],
        forced: Option<(NodeId, Forced)>,
        memo: &mut HashMap<NodeId, bool>,
    ) -> bool {
        if let Some(&v) = memo.get(&node) {
            return v;
        }
        let v = match forced {
            Some((f, Forced::Const(c))) if f == node => c,
            Some((f, Forced::Signal(s))) if f == node => {
                value(net, s.node(), assignment, forced, memo) ^ s.is_complemented()
            }
            _ => {
                if node == NodeId::CONSTANT {
                    false
                } else if let Some(i) = net.pi_index(node) {
                    assignment[i]
                } else {
                    let ins: Vec<bool> = net
                        .fanins(node)
                        .iter()
                        .map(|s| value(net, s.node(), assignment, forced, memo) ^ s.is_complemented())
                        .collect();
                    match net.gate_type(node).unwrap() {
                        GateType::And => ins[0] && ins[1],
                        GateType::Xor => ins[0] ^ ins[1],
                        GateType::Maj => (ins[0] as u8 + ins[1] as u8 + ins[2] as u8) >= 2,
                    }
                }
            }
        };
        memo.insert(node, v);
        v
    }
    let mut memo = HashMap::new();
    net.pos()
        .iter()
        .map(|po| value(net, po.node(), assignment, forced, &mut memo) ^ po.is_complemented())
        .collect()
}

#[derive(Clone, Copy)]
enum Forced {
    Const(bool),
    Signal(Signal),
}

fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |k| (0..n).map(|i| (k >> i) & 1 == 1).collect())
}

fn tables_by_eval(net: &Network, pis: &[NodeId], forced: Option<(NodeId, Forced)>) -> Vec<Vec<bool>> {
    // Evaluate `net` with the PI ordering of an earlier snapshot.
    assignments(pis.len())
        .map(|a| {
            let mapped: Vec<bool> = net
                .pis()
                .iter()
                .map(|p| pis.iter().position(|q| q == p).map(|i| a[i]).unwrap_or(false))
                .collect();
            eval_with_override(net, &mapped, forced)
        })
        .collect()
}

fn po_count_live(net: &Network) -> usize {
    net.pos().len()
}

/// MFFC by trial deletion: gates in the cone of `n` that are no longer
/// reachable from any other anchor once `n` is cut out.
fn mffc_by_trial_deletion(net: &Network, n: NodeId) -> BTreeSet<NodeId> {
    let refs = net.fanout_counts();
    let mut anchors: Vec<NodeId> = net.pos().iter().map(|s| s.node()).collect();
    anchors.extend(net.gates().filter(|&g| g != n && refs[g.index()] == 0));
    let mut reached = BTreeSet::new();
    let mut stack: Vec<NodeId> = anchors.into_iter().filter(|&a| a != n).collect();
    while let Some(x) = stack.pop() {
        if x == n || !reached.insert(x) {
            continue;
        }
        stack.extend(net.fanins(x).iter().map(|s| s.node()));
    }
    net.compute_tfi(n)
        .into_iter()
        .filter(|&x| net.is_gate(x) && !reached.contains(&x))
        .collect()
}

/// TFO from the transitive closure of the fanout adjacency matrix.
fn tfo_by_closure(net: &Network, n: NodeId) -> BTreeSet<NodeId> {
    let len = net.node_capacity();
    let mut reach = vec![vec![false; len]; len];
    for g in net.gates() {
        for s in net.fanins(g) {
            reach[s.node().index()][g.index()] = true;
        }
    }
    for k in 0..len {
        for i in 0..len {
            if reach[i][k] {
                for j in 0..len {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..len)
        .filter(|&j| reach[n.index()][j])
        .map(NodeId::new)
        .collect()
}

#[test]
fn signal_complement_is_an_involution() {
    let s = Signal::new(NodeId::new(7), false);
    assert_eq!(!!s, s);
    assert_eq!((!s).node(), s.node());
    assert!((!s).is_complemented());
    assert_eq!(Signal::TRUE, !Signal::FALSE);
}

#[test]
fn create_pi_counts() {
    let mut net = Network::new(NetworkKind::Aig);
    net.create_pi();
    assert_eq!(net.num_pis(), 1);
    net.create_pi();
    net.create_pi();
    assert_eq!(net.num_pis(), 3);
    assert_eq!(net.gate_count(), 0);
}

#[test]
fn pi_signals_simulate_as_their_input_bit() {
    let mut net = Network::new(NetworkKind::Xag);
    let pis: Vec<Signal> = (0..4).map(|_| net.create_pi()).collect();
    for &p in &pis {
        net.add_po(p).unwrap();
    }
    for a in assignments(4) {
        assert_eq!(net.simulate(&a).unwrap(), a);
    }
}

#[test]
fn simulate_gate_truth_tables() {
    let mut net = Network::new(NetworkKind::Xag);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    let z = net.create_gate(GateType::Xor, &[a, b]).unwrap();
    net.add_po(y).unwrap();
    net.add_po(z).unwrap();
    assert_eq!(net.simulate(&[true, true]).unwrap(), vec![true, false]);
    assert_eq!(net.simulate(&[true, false]).unwrap(), vec![false, true]);

    let mut mig = Network::new(NetworkKind::Mig);
    let (a, b, c) = (mig.create_pi(), mig.create_pi(), mig.create_pi());
    let m = mig.create_gate(GateType::Maj, &[a, b, c]).unwrap();
    mig.add_po(m).unwrap();
    assert_eq!(mig.simulate(&[true, false, true]).unwrap(), vec![true]);
    assert_eq!(mig.simulate(&[true, false, false]).unwrap(), vec![false]);
    assert!(mig.simulate(&[true]).is_err());
}

#[test]
fn trivial_cases_do_not_create_gates() {
    let mut net = Network::new(NetworkKind::Xag);
    let x = net.create_pi();
    let y = net.create_pi();
    assert_eq!(net.create_gate(GateType::And, &[x, x]).unwrap(), x);
    assert_eq!(net.create_gate(GateType::And, &[x, !x]).unwrap(), Signal::FALSE);
    assert_eq!(net.create_gate(GateType::And, &[x, Signal::FALSE]).unwrap(), Signal::FALSE);
    assert_eq!(net.create_gate(GateType::And, &[Signal::TRUE, x]).unwrap(), x);
    assert_eq!(net.create_gate(GateType::Xor, &[x, x]).unwrap(), Signal::FALSE);
    assert_eq!(net.create_gate(GateType::Xor, &[x, !x]).unwrap(), Signal::TRUE);
    assert_eq!(net.create_gate(GateType::Xor, &[x, Signal::FALSE]).unwrap(), x);
    assert_eq!(net.create_gate(GateType::Xor, &[Signal::TRUE, x]).unwrap(), !x);
    assert_eq!(net.gate_count(), 0);

    let g = net.create_gate(GateType::Xor, &[x, y]).unwrap();
    let h = net.create_gate(GateType::Xor, &[!x, y]).unwrap();
    assert_eq!(h, !g, "complemented XOR input folds outward");
    assert_eq!(net.gate_count(), 1);
}

#[test]
fn majority_simplifications() {
    let mut net = Network::new(NetworkKind::Mig);
    let (a, b, c) = (net.create_pi(), net.create_pi(), net.create_pi());
    assert_eq!(net.create_gate(GateType::Maj, &[a, a, b]).unwrap(), a);
    assert_eq!(net.create_gate(GateType::Maj, &[b, a, b]).unwrap(), b);
    assert_eq!(net.create_gate(GateType::Maj, &[a, !a, c]).unwrap(), c);
    assert_eq!(net.create_gate(GateType::Maj, &[Signal::FALSE, Signal::TRUE, c]).unwrap(), c);
    assert_eq!(net.gate_count(), 0);
    // A single constant fanin is kept in MIGs.
    let and = net.create_gate(GateType::Maj, &[Signal::FALSE, a, b]).unwrap();
    assert_eq!(net.gate_count(), 1);
    assert_eq!(net.fanins(and.node())[0], Signal::FALSE);
}

#[test]
fn strash_returns_existing_node() {
    let mut net = Network::new(NetworkKind::Mig);
    let (a, b, c) = (net.create_pi(), net.create_pi(), net.create_pi());
    let first = net.create_gate(GateType::Maj, &[a, b, !c]).unwrap();
    let second = net.create_gate(GateType::Maj, &[!c, a, b]).unwrap();
    assert_eq!(first, second);
    assert_eq!(net.gate_count(), 1);
}

#[test]
fn strash_canonicity_over_all_fanin_orders() {
    let mut net = Network::new(NetworkKind::Xag);
    let pis: Vec<Signal> = (0..3).map(|_| net.create_pi()).collect();
    let mut created = HashMap::new();
    for gate in [GateType::And, GateType::Xor] {
        for x in 0..6 {
            for y in 0..6 {
                let a = pis[x / 2] ^ (x % 2 == 1);
                let b = pis[y / 2] ^ (y % 2 == 1);
                let before = net.gate_count();
                let s = net.create_gate(gate, &[a, b]).unwrap();
                let again = net.create_gate(gate, &[b, a]).unwrap();
                assert_eq!(s, again);
                assert!(net.gate_count() <= before + 1);
                created.insert((gate, a.min(b), a.max(b)), s);
            }
        }
    }
    // 3 unordered node pairs: AND has 4 polarities each, XOR one node each.
    assert_eq!(net.gate_count(), 3 * 4 + 3);
    net.validate().unwrap();
}

#[test]
fn create_gate_errors() {
    let mut aig = Network::new(NetworkKind::Aig);
    let a = aig.create_pi();
    let b = aig.create_pi();
    assert!(matches!(
        aig.create_gate(GateType::Xor, &[a, b]),
        Err(NetworkError::IllegalGateType { .. })
    ));
    assert!(matches!(
        aig.create_gate(GateType::And, &[a]),
        Err(NetworkError::ArityMismatch { .. })
    ));
    let bogus = Signal::new(NodeId::new(99), false);
    assert!(matches!(
        aig.create_gate(GateType::And, &[a, bogus]),
        Err(NetworkError::DeadSignal(_))
    ));
}

#[test]
fn constant_substitution_examples() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    net.add_po(y).unwrap();
    net.substitute_constant_zero(a.node()).unwrap();
    assert_eq!(net.pos()[0], Signal::FALSE);
    assert_eq!(net.gate_count(), 0);

    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[!a, b]).unwrap();
    net.add_po(y).unwrap();
    net.substitute_constant_zero(a.node()).unwrap();
    assert_eq!(net.pos()[0], b);
    assert_eq!(net.gate_count(), 0);

    assert!(matches!(
        net.substitute_constant_zero(NodeId::CONSTANT),
        Err(NetworkError::ConstantNode(_))
    ));
}

#[test]
fn constant_substitution_is_the_zero_cofactor() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..300 {
        let kind = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig][round % 3];
        let pis = rng.random_range(3..=8);
        let gates = rng.random_range(1..=30);
        let net = random_network(kind, pis, gates, &mut rng);
        let candidates: Vec<NodeId> = net.pis().iter().copied().chain(net.gates()).collect();
        let n = candidates[rng.random_range(0..candidates.len())];
        let expected = tables_by_eval(&net, net.pis(), Some((n, Forced::Const(false))));
        let snapshot_pis = net.pis().to_vec();
        let mut reduced = net.clone();
        reduced.substitute_constant_zero(n).unwrap();
        reduced.validate().unwrap();
        assert_eq!(po_count_live(&reduced), net.num_pos());
        assert_eq!(tables_by_eval(&reduced, &snapshot_pis, None), expected, "round {round}");
        // Word-parallel simulation agrees with the recursive evaluator.
        let tables = reduced.truth_tables().unwrap();
        for (k, row) in expected.iter().enumerate() {
            for (o, &bit) in row.iter().enumerate() {
                assert_eq!(table_bit(&tables[o], k), bit);
            }
        }
    }
}

#[test]
fn substitute_with_pi_examples() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    net.add_po(y).unwrap();
    let fresh = net.substitute_with_pi(y.node()).unwrap();
    assert_eq!(net.num_pis(), 3);
    assert_eq!(net.gate_count(), 0);
    assert_eq!(net.pos()[0], fresh);

    let mut net = Network::new(NetworkKind::Aig);
    let (a, b, c) = (net.create_pi(), net.create_pi(), net.create_pi());
    let g1 = net.create_gate(GateType::And, &[a, b]).unwrap();
    let g2 = net.create_gate(GateType::And, &[g1, c]).unwrap();
    net.add_po(g2).unwrap();
    net.substitute_with_pi(g1.node()).unwrap();
    assert_eq!(net.gate_count(), 1);
    assert!(net.is_pi(g1.node()));
    net.validate().unwrap();

    assert!(matches!(net.substitute_with_pi(a.node()), Err(NetworkError::NotAGate(_))));
    assert!(matches!(
        net.substitute_with_pi(NodeId::CONSTANT),
        Err(NetworkError::ConstantNode(_))
    ));
}

#[test]
fn substitute_with_pi_removes_exactly_the_mffc() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for round in 0..300 {
        let kind = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig][round % 3];
        let net = random_network(kind, rng.random_range(3..=8), rng.random_range(1..=30), &mut rng);
        let gates: Vec<NodeId> = net.gates().collect();
        let n = gates[rng.random_range(0..gates.len())];
        let mffc = mffc_by_trial_deletion(&net, n);
        let mut reduced = net.clone();
        reduced.substitute_with_pi(n).unwrap();
        assert_eq!(reduced.gate_count(), net.gate_count() - mffc.len(), "round {round}");
        assert_eq!(reduced.num_pis(), net.num_pis() + 1);
        reduced.validate().unwrap();
    }
}

#[test]
fn substitute_with_signal_examples() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    net.add_po(y).unwrap();
    net.substitute_with_signal(y.node(), a).unwrap();
    assert_eq!(net.pos()[0], a);
    assert_eq!(net.gate_count(), 0);

    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    let z = net.create_gate(GateType::And, &[y, a]).unwrap();
    net.add_po(z).unwrap();
    net.substitute_with_signal(y.node(), a).unwrap();
    assert_eq!(net.pos()[0], a);
    assert_eq!(net.gate_count(), 0);

    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let y = net.create_gate(GateType::And, &[a, b]).unwrap();
    let z = net.create_gate(GateType::And, &[y, !a]).unwrap();
    net.add_po(z).unwrap();
    assert!(matches!(
        net.substitute_with_signal(y.node(), z),
        Err(NetworkError::WouldCreateCycle { .. })
    ));
    assert!(matches!(
        net.substitute_with_signal(a.node(), b),
        Err(NetworkError::NotAGate(_))
    ));
}

#[test]
fn substitution_by_a_fanin_matches_forced_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for round in 0..300 {
        let kind = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig][round % 3];
        let net = random_network(kind, rng.random_range(3..=8), rng.random_range(1..=30), &mut rng);
        let gates: Vec<NodeId> = net.gates().collect();
        let n = gates[rng.random_range(0..gates.len())];
        let fanins = net.fanins(n).to_vec();
        let f = fanins[rng.random_range(0..fanins.len())] ^ rng.random_bool(0.5);
        let expected = tables_by_eval(&net, net.pis(), Some((n, Forced::Signal(f))));
        let mut reduced = net.clone();
        reduced.substitute_with_signal(n, f).unwrap();
        reduced.validate().unwrap();
        assert_eq!(tables_by_eval(&reduced, net.pis(), None), expected, "round {round}");
    }
}

#[test]
fn substitution_by_a_later_unrelated_node_renumbers() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut exercised = 0;
    for _ in 0..300 {
        let net = random_network(NetworkKind::Xag, 5, 20, &mut rng);
        let gates: Vec<NodeId> = net.gates().collect();
        let n = gates[rng.random_range(0..gates.len())];
        let tfo = net.compute_tfo(n);
        let Some(&s) = gates.iter().rev().find(|&&g| g > n && !tfo.contains(&g)) else {
            continue;
        };
        exercised += 1;
        let s = Signal::from(s);
        let expected = tables_by_eval(&net, net.pis(), Some((n, Forced::Signal(s))));
        let mut reduced = net.clone();
        reduced.substitute_with_signal(n, s).unwrap();
        reduced.validate().unwrap();
        let tables = reduced.truth_tables().unwrap();
        for (k, row) in expected.iter().enumerate() {
            for (o, &bit) in row.iter().enumerate() {
                assert_eq!(table_bit(&tables[o], k), bit);
            }
        }
    }
    assert!(exercised > 50);
}

#[test]
fn substituting_an_equivalent_node_preserves_function() {
    // Two structurally different but equivalent XORs in an AIG.
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let x1 = net.create_xor(a, b);
    let t = net.create_and(a, b);
    let u = net.create_or(a, b);
    let x2 = net.create_and(!t, u);
    let top = net.create_and(x2, a);
    net.add_po(x1).unwrap();
    net.add_po(top).unwrap();
    let before = net.truth_tables().unwrap();
    net.substitute_with_signal(x2.node(), x1 ^ x2.is_complemented()).unwrap();
    assert_eq!(net.truth_tables().unwrap(), before);
    net.validate().unwrap();
}

#[test]
fn add_po_semantics() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let g = net.create_gate(GateType::And, &[a, !b]).unwrap();
    net.add_po(g).unwrap();
    net.add_po(g).unwrap();
    assert_eq!(net.num_pos(), 2);
    for assignment in assignments(2) {
        let out = net.simulate(&assignment).unwrap();
        assert_eq!(out[1], assignment[0] && !assignment[1]);
    }
}

#[test]
fn mffc_examples() {
    let mut net = Network::new(NetworkKind::Aig);
    let pis: Vec<Signal> = (0..4).map(|_| net.create_pi()).collect();
    let l = net.create_gate(GateType::And, &[pis[0], pis[1]]).unwrap();
    let r = net.create_gate(GateType::And, &[pis[2], pis[3]]).unwrap();
    let y = net.create_gate(GateType::And, &[l, r]).unwrap();
    net.add_po(y).unwrap();
    assert_eq!(net.compute_mffc(y.node()).unwrap().len(), 3);

    let mut net = Network::new(NetworkKind::Aig);
    let pis: Vec<Signal> = (0..3).map(|_| net.create_pi()).collect();
    let g = net.create_gate(GateType::And, &[pis[0], pis[1]]).unwrap();
    let p = net.create_gate(GateType::And, &[g, pis[2]]).unwrap();
    let q = net.create_gate(GateType::And, &[g, !pis[2]]).unwrap();
    net.add_po(p).unwrap();
    net.add_po(q).unwrap();
    assert!(!net.compute_mffc(p.node()).unwrap().contains(&g.node()));
    assert!(!net.compute_mffc(q.node()).unwrap().contains(&g.node()));
    assert!(net.compute_mffc(pis[0].node()).is_err());
}

#[test]
fn mffc_matches_trial_deletion() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for round in 0..400 {
        let kind = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig][round % 3];
        let net = random_network(kind, rng.random_range(2..=8), rng.random_range(1..=30), &mut rng);
        for g in net.gates() {
            assert_eq!(net.compute_mffc(g).unwrap(), mffc_by_trial_deletion(&net, g), "round {round}");
        }
    }
}

#[test]
fn tfo_examples_and_closure() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let g1 = net.create_gate(GateType::And, &[a, b]).unwrap();
    let g2 = net.create_gate(GateType::And, &[g1, b]).unwrap();
    let g3 = net.create_gate(GateType::And, &[g2, !a]).unwrap();
    net.add_po(g3).unwrap();
    assert!(net.compute_tfo(g3.node()).is_empty());
    assert_eq!(
        net.compute_tfo(g1.node()),
        [g2.node(), g3.node()].into_iter().collect()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let net = random_network(NetworkKind::Xag, 4, rng.random_range(1..=30), &mut rng);
        for n in net.pis().iter().copied().chain(net.gates()) {
            assert_eq!(net.compute_tfo(n), tfo_by_closure(&net, n));
        }
    }
}

#[test]
fn cleanup_removes_dead_gates_and_is_idempotent() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let b = net.create_pi();
    let used = net.create_gate(GateType::And, &[a, b]).unwrap();
    let _unused = net.create_gate(GateType::And, &[a, !b]).unwrap();
    net.add_po(used).unwrap();
    let clean = net.cleanup_dangling();
    assert_eq!(clean.gate_count(), net.gate_count() - 1);
    assert_eq!(clean.truth_tables().unwrap(), net.truth_tables().unwrap());
    assert_eq!(clean.cleanup_dangling(), clean);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for round in 0..300 {
        let kind = [NetworkKind::Aig, NetworkKind::Xag, NetworkKind::Mig][round % 3];
        let mut net = random_network(kind, rng.random_range(1..=10), rng.random_range(1..=40), &mut rng);
        if net.gate_count() > 0 && round % 2 == 0 {
            let g = net.gates().next().unwrap();
            net.substitute_constant_zero(g).unwrap();
        }
        let clean = net.cleanup_dangling();
        clean.validate().unwrap();
        assert_eq!(clean.truth_tables().unwrap(), net.truth_tables().unwrap());
        assert_eq!(clean.cleanup_dangling(), clean);
    }
}

#[test]
fn cleanup_of_a_clean_network_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let net = random_network(NetworkKind::Xag, 6, 25, &mut rng);
    // Every gate of this network feeds a PO.
    assert_eq!(net.cleanup_dangling(), net);
}

#[test]
fn clone_is_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let net = random_network(NetworkKind::Aig, 5, 20, &mut rng);
    let mut copy = net.clone();
    assert_eq!(copy, net);
    assert_eq!(copy.truth_tables().unwrap(), net.truth_tables().unwrap());
    let g = copy.gates().last().unwrap();
    copy.substitute_with_pi(g).unwrap();
    assert_eq!(net.gate_count(), 20);
    assert_ne!(copy.gate_count(), net.gate_count());
}

#[test]
fn remove_dangling_pis_only_drops_unused_inputs() {
    let mut net = Network::new(NetworkKind::Aig);
    let a = net.create_pi();
    let _b = net.create_pi();
    let c = net.create_pi();
    let g = net.create_gate(GateType::And, &[a, c]).unwrap();
    net.add_po(g).unwrap();
    assert_eq!(net.remove_dangling_pis(), 1);
    assert_eq!(net.pis(), &[a.node(), c.node()]);
    net.validate().unwrap();
}

#[test]
fn lowering_preserves_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for kind in [NetworkKind::Xag, NetworkKind::Mig] {
        for _ in 0..50 {
            let net = random_network(kind, 6, 20, &mut rng);
            let aig = net.lower_to_aig();
            assert_eq!(aig.kind(), NetworkKind::Aig);
            aig.validate().unwrap();
            assert_eq!(aig.truth_tables().unwrap(), net.truth_tables().unwrap());
        }
    }
}

#[test]
fn rewritten_gate_does_not_merge_with_a_stale_key() {
    // n5 flips polarity after the substitution, so n6 and n7 swap keys.
    let mut net = Network::new(NetworkKind::Xag);
    let a = net.create_pi();
    let b = net.create_pi();
    let n3 = net.create_gate(GateType::And, &[!a, !b]).unwrap();
    let n4 = net.create_gate(GateType::And, &[!a, !n3]).unwrap();
    let n5 = net.create_gate(GateType::Xor, &[n3, n4]).unwrap();
    let n6 = net.create_gate(GateType::And, &[!a, n5]).unwrap();
    let n7 = net.create_gate(GateType::And, &[!a, !n5]).unwrap();
    let n8 = net.create_gate(GateType::And, &[!n6, n7]).unwrap();
    net.add_po(n8).unwrap();
    let expected = tables_by_eval(&net, net.pis(), Some((n4.node(), Forced::Signal(!a))));
    let mut reduced = net.clone();
    reduced.substitute_with_signal(n4.node(), !a).unwrap();
    reduced.validate().unwrap();
    assert_eq!(tables_by_eval(&reduced, net.pis(), None), expected);
    assert_ne!(reduced.pos()[0], Signal::FALSE);
}
