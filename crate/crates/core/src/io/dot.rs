use std::collections::BTreeMap;
use std::fmt::Write;

use crate::network::{GateType, Network, NodeId, Signal};

fn gate_label(gate: GateType) -> &'static str {
    match gate {
        GateType::And => "AND",
        GateType::Xor => "XOR",
        GateType::Maj => "MAJ",
    }
}

/// Graphviz rendering: one vertex per PI, gate and PO, complemented edges
/// dashed, and `rank=same` groups per logic level.
pub fn write_dot(net: &Network) -> String {
    let mut out = String::new();
    out.push_str("digraph network {\n  rankdir=BT;\n");

    let uses_constant = net
        .gates()
        .flat_map(|g| net.fanins(g).iter())
        .chain(net.pos())
        .any(|s| s.is_constant());
    if uses_constant {
        out.push_str("  n0 [label=\"0\", shape=box];\n");
    }
    for (i, &pi) in net.pis().iter().enumerate() {
        writeln!(out, "  n{} [label=\"x{i}\", shape=triangle];", pi.index()).unwrap();
    }

    let mut level = vec![0usize; net.node_capacity()];
    let mut by_level: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for g in net.gates() {
        let l = 1 + net
            .fanins(g)
            .iter()
            .map(|s| level[s.node().index()])
            .max()
            .unwrap_or(0);
        level[g.index()] = l;
        by_level.entry(l).or_default().push(g);
        writeln!(
            out,
            "  n{} [label=\"{}\\nn{}\", shape=ellipse];",
            g.index(),
            gate_label(net.gate_type(g).unwrap()),
            g.index()
        )
        .unwrap();
    }
    for o in 0..net.num_pos() {
        writeln!(out, "  po{o} [label=\"y{o}\", shape=invtriangle];").unwrap();
    }

    let edge = |out: &mut String, from: Signal, to: &str| {
        let style = if from.is_complemented() { " [style=dashed]" } else { "" };
        writeln!(out, "  n{} -> {to}{style};", from.node().index()).unwrap();
    };
    for g in net.gates() {
        for &f in net.fanins(g) {
            edge(&mut out, f, &format!("n{}", g.index()));
        }
    }
    for (o, &po) in net.pos().iter().enumerate() {
        edge(&mut out, po, &format!("po{o}"));
    }

    if !net.pis().is_empty() {
        let names: Vec<String> = net.pis().iter().map(|p| format!("n{};", p.index())).collect();
        writeln!(out, "  {{ rank=same; {} }}", names.join(" ")).unwrap();
    }
    for nodes in by_level.values() {
        let names: Vec<String> = nodes.iter().map(|n| format!("n{};", n.index())).collect();
        writeln!(out, "  {{ rank=same; {} }}", names.join(" ")).unwrap();
    }
    if net.num_pos() > 0 {
        let names: Vec<String> = (0..net.num_pos()).map(|o| format!("po{o};")).collect();
        writeln!(out, "  {{ rank=same; {} }}", names.join(" ")).unwrap();
    }
    out.push_str("}\n");
    out
}
