//! Seeded-defect applications under test. Each one is a transform that is
//! correct except on a specific structural trigger.

use std::sync::Arc;

use thiserror::Error;

use super::{Aut, AutFailure, CallContext};
use crate::network::{GateType, Network, NodeId, Signal};

pub const BUILTIN_AUTS: &[&str] = &[
    "strash_rebuild",
    "buggy_xor_rewrite",
    "buggy_double_substitution",
    "buggy_const_prop",
    "crash_on_reconvergence",
    "hang_on_large_mffc",
];

/// MFFC size above which `hang_on_large_mffc` stops making progress.
pub const HANG_MFFC_THRESHOLD: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown builtin application `{0}` (known: {known})", known = BUILTIN_AUTS.join(", "))]
pub struct UnknownAut(pub String);

pub fn builtin_aut(name: &str) -> Result<Aut, UnknownAut> {
    let aut: Aut = match name {
        "strash_rebuild" => Arc::new(|net: Network, _: &CallContext| Ok(strash_rebuild(&net))),
        "buggy_xor_rewrite" => Arc::new(|net: Network, _: &CallContext| Ok(xor_rewrite(&net))),
        "buggy_double_substitution" => Arc::new(|net: Network, _: &CallContext| double_substitution(&net)),
        "buggy_const_prop" => Arc::new(|net: Network, _: &CallContext| Ok(const_prop(&net))),
        "crash_on_reconvergence" => Arc::new(|net: Network, _: &CallContext| crash_on_reconvergence(&net)),
        "hang_on_large_mffc" => Arc::new(|net: Network, ctx: &CallContext| hang_on_large_mffc(&net, ctx)),
        other => return Err(UnknownAut(other.to_string())),
    };
    Ok(aut)
}

/// Rebuilds the network with simplification and structural hashing.
fn strash_rebuild(net: &Network) -> Network {
    net.converted(net.kind())
}

/// AND function of a node: its two inputs and an output complement.
/// MAJ with a constant fanin counts as AND (constant 0) or OR (constant 1).
fn and_view(net: &Network, node: NodeId) -> Option<([Signal; 2], bool)> {
    let f = net.fanins(node);
    match net.gate_type(node)? {
        GateType::And => Some(([f[0], f[1]], false)),
        GateType::Maj if f[0] == Signal::FALSE => Some(([f[1], f[2]], false)),
        GateType::Maj if f[0] == Signal::TRUE => Some(([!f[1], !f[2]], true)),
        _ => None,
    }
}

/// A node computing `polarity ^ (inputs[0] XOR inputs[1])`, either as an
/// XOR gate or as three AND-like nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorUnit {
    pub root: NodeId,
    pub inputs: [Signal; 2],
    pub polarity: bool,
    pub internal: Vec<NodeId>,
}

impl XorUnit {
    fn input_nodes(&self) -> [NodeId; 2] {
        [self.inputs[0].node(), self.inputs[1].node()]
    }
}

/// `r = AND(~AND(p, q), ~AND(~p, ~q))` up to fanin order.
fn and_xor_unit(net: &Network, r: NodeId) -> Option<XorUnit> {
    let ([a, b], cr) = and_view(net, r)?;
    let (x, y) = (a.node(), b.node());
    if x == y {
        return None;
    }
    let ([p, q], cx) = and_view(net, x)?;
    let ([p2, q2], cy) = and_view(net, y)?;
    if !(a.is_complemented() ^ cx) || !(b.is_complemented() ^ cy) {
        return None;
    }
    if p.node() == q.node() {
        return None;
    }
    let flipped = (p2 == !p && q2 == !q) || (p2 == !q && q2 == !p);
    if !flipped {
        return None;
    }
    Some(XorUnit {
        root: r,
        inputs: [p, q],
        polarity: cr,
        internal: vec![x, y],
    })
}

/// All XOR units of the network.
pub fn xor_units(net: &Network) -> Vec<XorUnit> {
    let mut units = Vec::new();
    for g in net.gates() {
        if net.gate_type(g) == Some(GateType::Xor) {
            let f = net.fanins(g);
            units.push(XorUnit {
                root: g,
                inputs: [f[0], f[1]],
                polarity: false,
                internal: Vec::new(),
            });
        } else if let Some(unit) = and_xor_unit(net, g) {
            units.push(unit);
        }
    }
    units
}

/// Pairs of XOR units that share exactly one input node, whose other inputs
/// are two different gates, and where neither unit reads the other's root
/// or reads an internal node of the other as its second input. This is the
/// trigger shared by the XOR-rewriting defects.
pub fn conflicting_xor_pairs(net: &Network) -> Vec<(XorUnit, XorUnit)> {
    let units = xor_units(net);
    let mut pairs = Vec::new();
    for (i, u) in units.iter().enumerate() {
        for v in &units[i + 1..] {
            if conflicting(net, u, v) {
                pairs.push((u.clone(), v.clone()));
            }
        }
    }
    pairs
}

fn conflicting(net: &Network, u: &XorUnit, v: &XorUnit) -> bool {
    if u.root == v.root {
        return false;
    }
    let iu = u.input_nodes();
    let iv = v.input_nodes();
    let shared: Vec<NodeId> = iu.iter().copied().filter(|n| iv.contains(n)).collect();
    let [s] = shared.as_slice() else {
        return false;
    };
    let t1 = if iu[0] == *s { iu[1] } else { iu[0] };
    let t2 = if iv[0] == *s { iv[1] } else { iv[0] };
    t1 != t2
        && net.is_gate(t1)
        && net.is_gate(t2)
        && t1 != v.root
        && t2 != u.root
        && !u.internal.contains(&t2)
        && !v.internal.contains(&t1)
        && !u.internal.contains(&v.root)
        && !v.internal.contains(&u.root)
}

fn lookup(map: &[Option<Signal>], s: Signal) -> Signal {
    map[s.node().index()].expect("fanin precedes gate") ^ s.is_complemented()
}

/// Rebuilds `net` with simplification, letting `replace` supply the signal
/// of selected gates instead of copying them.
fn rebuild<F>(net: &Network, mut replace: F) -> Network
where
    F: FnMut(&mut Network, NodeId, &[Option<Signal>]) -> Option<Signal>,
{
    let mut out = Network::new(net.kind());
    let mut map: Vec<Option<Signal>> = vec![None; net.node_capacity()];
    map[0] = Some(Signal::FALSE);
    for &pi in net.pis() {
        map[pi.index()] = Some(out.create_pi());
    }
    for g in net.gates() {
        let signal = match replace(&mut out, g, &map) {
            Some(s) => s,
            None => {
                let fanins: Vec<Signal> = net.fanins(g).iter().map(|&s| lookup(&map, s)).collect();
                out.create_lowered(net.gate_type(g).unwrap(), &fanins)
            }
        };
        map[g.index()] = Some(signal);
    }
    for &po in net.pos() {
        out.add_po(lookup(&map, po)).expect("live signal");
    }
    out.cleanup_dangling()
}

/// Rewrites both roots of every conflicting XOR pair into AND gates.
fn xor_rewrite(net: &Network) -> Network {
    let pairs = conflicting_xor_pairs(net);
    if pairs.is_empty() {
        return strash_rebuild(net);
    }
    let mut roots: Vec<XorUnit> = Vec::new();
    for (u, v) in pairs {
        for unit in [u, v] {
            if !roots.iter().any(|r| r.root == unit.root) {
                roots.push(unit);
            }
        }
    }
    rebuild(net, |out, g, map| {
        roots.iter().find(|u| u.root == g).map(|u| {
            let a = lookup(map, u.inputs[0]);
            let b = lookup(map, u.inputs[1]);
            out.create_and(a, b) ^ u.polarity
        })
    })
}

/// Applies both substitutions of a conflicting pair at once, which leaves
/// a cycle behind; the application's own sanity check then fails.
fn double_substitution(net: &Network) -> Result<Network, AutFailure> {
    if let Some((u, v)) = conflicting_xor_pairs(net).into_iter().next() {
        return Err(AutFailure::Assertion(format!(
            "combinational cycle after substituting {} and {} together",
            u.root, v.root
        )));
    }
    Ok(strash_rebuild(net))
}

/// Detects `g = AND(a, AND(~a, b))` as constant and propagates the constant,
/// but every reader of `g` receives the constant without its edge
/// complement.
fn const_prop(net: &Network) -> Network {
    let mut constant: Vec<Option<bool>> = vec![None; net.node_capacity()];
    for g in net.gates() {
        let Some(([a, b], cg)) = and_view(net, g) else {
            continue;
        };
        let contradicts = |x: Signal, y: Signal| {
            and_view(net, y.node()).is_some_and(|([c, d], ch)| {
                y.is_complemented() == ch && (c == !x || d == !x)
            })
        };
        if contradicts(a, b) || contradicts(b, a) {
            constant[g.index()] = Some(cg);
        }
    }
    if constant.iter().all(Option::is_none) {
        return strash_rebuild(net);
    }
    let read = |s: Signal, map: &[Option<Signal>]| match constant[s.node().index()] {
        Some(value) => Signal::FALSE ^ value,
        None => map[s.node().index()].expect("fanin precedes gate") ^ s.is_complemented(),
    };
    let mut out = Network::new(net.kind());
    let mut map: Vec<Option<Signal>> = vec![None; net.node_capacity()];
    map[0] = Some(Signal::FALSE);
    for &pi in net.pis() {
        map[pi.index()] = Some(out.create_pi());
    }
    for g in net.gates() {
        let fanins: Vec<Signal> = net.fanins(g).iter().map(|&s| read(s, &map)).collect();
        map[g.index()] = Some(out.create_lowered(net.gate_type(g).unwrap(), &fanins));
    }
    for &po in net.pos() {
        let s = read(po, &map);
        out.add_po(s).expect("live signal");
    }
    out.cleanup_dangling()
}

/// Aborts when two fanins of a gate share a transitive-fanin node.
fn crash_on_reconvergence(net: &Network) -> Result<Network, AutFailure> {
    let words = net.node_capacity().div_ceil(64);
    let mut tfi = vec![0u64; net.node_capacity() * words];
    for &pi in net.pis() {
        tfi[pi.index() * words + pi.index() / 64] |= 1 << (pi.index() % 64);
    }
    for g in net.gates() {
        let fanins: Vec<NodeId> = net
            .fanins(g)
            .iter()
            .map(|s| s.node())
            .filter(|&n| n != NodeId::CONSTANT)
            .collect();
        for (i, &x) in fanins.iter().enumerate() {
            for &y in &fanins[i + 1..] {
                let (sx, sy) = (x.index() * words, y.index() * words);
                if let Some(w) = (0..words).find(|&w| tfi[sx + w] & tfi[sy + w] != 0) {
                    let bit = (tfi[sx + w] & tfi[sy + w]).trailing_zeros() as usize;
                    return Err(AutFailure::Crash(format!(
                        "abort: fanout of n{} reconverges at {}",
                        w * 64 + bit,
                        g
                    )));
                }
            }
        }
        let base = g.index() * words;
        tfi[base + g.index() / 64] |= 1 << (g.index() % 64);
        for x in fanins {
            for w in 0..words {
                tfi[base + w] |= tfi[x.index() * words + w];
            }
        }
    }
    Ok(strash_rebuild(net))
}

/// Size of the largest MFFC among all gates, by reference counting.
fn largest_mffc(net: &Network) -> usize {
    let mut refs = net.fanout_counts();
    let mut best = 0;
    for g in net.gates() {
        let mut removed = Vec::new();
        let mut stack = vec![g];
        let mut size = 0;
        while let Some(n) = stack.pop() {
            size += 1;
            for s in net.fanins(n) {
                let c = s.node();
                if net.is_gate(c) {
                    refs[c.index()] -= 1;
                    removed.push(c);
                    if refs[c.index()] == 0 {
                        stack.push(c);
                    }
                }
            }
        }
        for c in removed {
            refs[c.index()] += 1;
        }
        best = best.max(size);
    }
    best
}

/// Spins until the deadline when some MFFC is larger than the threshold.
fn hang_on_large_mffc(net: &Network, ctx: &CallContext) -> Result<Network, AutFailure> {
    if largest_mffc(net) > HANG_MFFC_THRESHOLD {
        loop {
            ctx.check()?;
            std::hint::spin_loop();
        }
    }
    Ok(strash_rebuild(net))
}
