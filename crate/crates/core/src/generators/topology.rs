use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::network::{Network, NetworkKind, Signal};

/// One vertex of a topology: the distinct earlier vertices it reads, plus a
/// number of unlabeled hanging-input slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub children: Vec<usize>,
    pub hanging: usize,
}

/// Arity-regular DAG skeleton with hanging inputs. Vertices are stored in
/// topological order and the last one is the single output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    arity: usize,
    vertices: Vec<Vertex>,
}

impl Topology {
    /// Checks arity regularity, topological references and that every
    /// vertex but the last has a fanout.
    pub fn new(arity: usize, vertices: Vec<Vertex>) -> Option<Topology> {
        if vertices.is_empty() {
            return None;
        }
        let mut used = vec![false; vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            let distinct: BTreeSet<usize> = v.children.iter().copied().collect();
            if distinct.len() != v.children.len()
                || v.children.iter().any(|&c| c >= i)
                || v.children.len() + v.hanging != arity
            {
                return None;
            }
            for &c in &v.children {
                used[c] = true;
            }
        }
        if used[..vertices.len() - 1].iter().any(|u| !u) {
            return None;
        }
        Some(Topology { arity, vertices })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Number of hanging-input slots.
    pub fn input_count(&self) -> usize {
        self.vertices.iter().map(|v| v.hanging).sum()
    }

    /// Number of edges, hanging inputs included.
    pub fn edge_count(&self) -> usize {
        self.vertices.len() * self.arity
    }

    /// Smallest vertex encoding over all topological orders. Two
    /// topologies are isomorphic exactly when their canonical forms agree.
    pub fn canonical_form(&self) -> Vec<Vertex> {
        let m = self.vertices.len();
        let mut best: Option<Vec<Vertex>> = None;
        let mut position = vec![usize::MAX; m];
        let mut prefix = Vec::with_capacity(m);
        self.canonical_search(&mut position, &mut prefix, &mut best);
        best.expect("a DAG has a topological order")
    }

    fn canonical_search(
        &self,
        position: &mut [usize],
        prefix: &mut Vec<Vertex>,
        best: &mut Option<Vec<Vertex>>,
    ) {
        let placed = prefix.len();
        if placed == self.vertices.len() {
            if best.as_ref().is_none_or(|b| prefix.as_slice() < b.as_slice()) {
                *best = Some(prefix.clone());
            }
            return;
        }
        let mut candidates: Vec<(Vertex, usize)> = Vec::new();
        for (v, vertex) in self.vertices.iter().enumerate() {
            if position[v] != usize::MAX || vertex.children.iter().any(|&c| position[c] == usize::MAX) {
                continue;
            }
            let mut children: Vec<usize> = vertex.children.iter().map(|&c| position[c]).collect();
            children.sort_unstable();
            candidates.push((
                Vertex {
                    children,
                    hanging: vertex.hanging,
                },
                v,
            ));
        }
        let smallest = candidates.iter().map(|c| &c.0).min().expect("some vertex is ready").clone();
        if let Some(b) = best.as_ref() {
            // Prune when the prefix can no longer beat the best encoding.
            let mut partial = prefix.clone();
            partial.push(smallest.clone());
            if partial.as_slice() > &b[..=placed] {
                return;
            }
        }
        for (encoded, v) in candidates {
            if encoded != smallest {
                continue;
            }
            position[v] = placed;
            prefix.push(encoded);
            self.canonical_search(position, prefix, best);
            prefix.pop();
            position[v] = usize::MAX;
        }
    }

    /// The representative of this topology's isomorphism class.
    pub fn canonicalized(&self) -> Topology {
        Topology {
            arity: self.arity,
            vertices: self.canonical_form(),
        }
    }
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for x in 0..n {
        let extended: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.extend(extended);
    }
    out
}

/// All pairwise non-isomorphic topologies with `m` vertices of the given
/// arity, each in canonical form, sorted by their encoding.
pub fn enumerate_topologies(m: usize, arity: usize) -> Vec<Topology> {
    assert!(m >= 1, "a topology has at least one vertex");
    assert!(arity >= 1, "arity must be positive");
    let choices: Vec<Vec<Vec<usize>>> = (0..m).map(|i| subsets_up_to(i, arity)).collect();
    let mut found: BTreeSet<Vec<Vertex>> = BTreeSet::new();
    let mut current: Vec<Vertex> = Vec::with_capacity(m);
    let mut fanouts = vec![0usize; m];
    extend(&choices, arity, &mut current, &mut fanouts, &mut found);
    found
        .into_iter()
        .map(|vertices| Topology { arity, vertices })
        .collect()
}

fn extend(
    choices: &[Vec<Vec<usize>>],
    arity: usize,
    current: &mut Vec<Vertex>,
    fanouts: &mut [usize],
    found: &mut BTreeSet<Vec<Vertex>>,
) {
    let i = current.len();
    let m = choices.len();
    if i == m {
        if fanouts[..m - 1].contains(&0) {
            return;
        }
        let topology = Topology {
            arity,
            vertices: current.clone(),
        };
        found.insert(topology.canonical_form());
        return;
    }
    // Vertices still without fanout must be read by the remaining ones.
    let unread = fanouts[..i].iter().filter(|&&f| f == 0).count();
    if unread > (m - i) * arity {
        return;
    }
    for children in &choices[i] {
        for &c in children {
            fanouts[c] += 1;
        }
        current.push(Vertex {
            children: children.clone(),
            hanging: arity - children.len(),
        });
        extend(choices, arity, current, fanouts, found);
        current.pop();
        for &c in children {
            fanouts[c] -= 1;
        }
    }
}

/// Integer PI-count range for a topology with `inputs` hanging inputs.
pub fn pi_count_range(inputs: usize, r_l: f64, r_h: f64) -> (usize, usize) {
    let lo = ((r_l * inputs as f64).ceil() as usize).max(1);
    let hi = ((r_h * inputs as f64).floor() as usize).max(1);
    (lo, hi.max(lo))
}

/// Binds a topology to PIs, gate types and edge polarities. The last vertex
/// drives the only PO.
pub fn concretize_topology<R: Rng + ?Sized>(
    topology: &Topology,
    kind: NetworkKind,
    r_l: f64,
    r_h: f64,
    rng: &mut R,
) -> Network {
    assert_eq!(topology.arity(), kind.arity(), "topology arity must match the network kind");
    let (lo, hi) = pi_count_range(topology.input_count(), r_l, r_h);
    let n = rng.random_range(lo..=hi);
    let mut net = Network::new(kind);
    let pis: Vec<Signal> = (0..n).map(|_| net.create_pi()).collect();
    let output = instantiate(&mut net, topology, &pis, rng);
    net.add_po(output).expect("instantiated vertex is live");
    // Simplified vertices can leave earlier ones without a reader.
    net.cleanup_dangling()
}

/// Builds one copy of `topology` in `net`, binding each hanging input to a
/// uniformly chosen signal of `sources`. Returns the last vertex's signal.
pub(crate) fn instantiate<R: Rng + ?Sized>(
    net: &mut Network,
    topology: &Topology,
    sources: &[Signal],
    rng: &mut R,
) -> Signal {
    let types = net.kind().gate_types();
    let mut realized: Vec<Signal> = Vec::with_capacity(topology.len());
    for vertex in topology.vertices() {
        let mut fanins: Vec<Signal> = vertex.children.iter().map(|&c| realized[c]).collect();
        for _ in 0..vertex.hanging {
            fanins.push(sources[rng.random_range(0..sources.len())]);
        }
        for f in fanins.iter_mut() {
            *f = *f ^ rng.random_bool(0.5);
        }
        let gate = types[rng.random_range(0..types.len())];
        let s = net.create_gate(gate, &fanins).expect("legal gate over live fanins");
        realized.push(s);
    }
    *realized.last().expect("topology is non-empty")
}

/// Number of distinct choice tuples when every slot `j` picks from
/// `slot_domains[j]` options, each vertex picks one of `type_choices` gate
/// types and each edge a polarity.
pub fn concretization_count(slot_domains: &[u64], vertices: usize, type_choices: u64, edges: usize) -> u128 {
    let bindings: u128 = slot_domains.iter().map(|&d| u128::from(d)).product();
    bindings * u128::from(type_choices).pow(vertices as u32) * (1u128 << edges)
}

/// Choice tuples of [`concretize_topology`] for a fixed PI count `n`.
pub fn topology_concretizations(topology: &Topology, kind: NetworkKind, n: u64) -> u128 {
    let domains = vec![n; topology.input_count()];
    concretization_count(
        &domains,
        topology.len(),
        kind.gate_types().len() as u64,
        topology.edge_count(),
    )
}
