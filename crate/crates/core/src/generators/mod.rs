//! Random testcase generation and fuzz campaigns.
//!
//! Three methods: `Random` grows networks gate by gate, `Topology`
//! concretizes enumerated DAG skeletons, and `Composed` chains several small
//! skeletons into one network.

mod campaign;
mod seeded;
mod topology;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, NetworkKind, NodeId, Signal};

pub use campaign::{
    composed_config_at, random_config_at, run_campaign, run_campaign_concurrent, CampaignConfig,
    CampaignError, CampaignReport, ConfigCounter, FailureRecord, StopReason,
};
pub use seeded::{conflicting_xor_core, embed_core};
pub use topology::{
    concretization_count, concretize_topology, enumerate_topologies, pi_count_range,
    topology_concretizations, Topology, Vertex,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("{attempts} consecutive attempts created no new gate ({gates} of {target} gates built)")]
    AttemptBudgetExceeded {
        attempts: usize,
        gates: usize,
        target: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n0: usize,
    pub m0: usize,
    pub k: u64,
    pub delta_n: usize,
    pub delta_m: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            n0: 4,
            m0: 10,
            k: 100,
            delta_n: 1,
            delta_m: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub m0: usize,
    pub r_l: f64,
    pub r_h: f64,
    pub k: u64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            m0: 1,
            r_l: 0.5,
            r_h: 1.0,
            k: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedParams {
    pub m_l: usize,
    pub m_h: usize,
    pub c0: usize,
    pub n0: usize,
    pub k: u64,
    pub delta_n: usize,
    pub delta_c: usize,
}

impl Default for ComposedParams {
    fn default() -> Self {
        ComposedParams {
            m_l: 1,
            m_h: 3,
            c0: 2,
            n0: 4,
            k: 100,
            delta_n: 1,
            delta_c: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Random(RandomParams),
    Topology(TopologyParams),
    Composed(ComposedParams),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Random(_) => "random",
            Method::Topology(_) => "topology",
            Method::Composed(_) => "composed",
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let bad = |msg: &str| Err(GenerateError::InvalidParams(msg.to_string()));
        match self {
            Method::Random(p) => {
                if p.m0 == 0 || p.k == 0 {
                    return bad("random needs m0 >= 1 and k >= 1");
                }
                if p.n0 == 0 {
                    return bad("random needs n0 >= 1");
                }
            }
            Method::Topology(p) => {
                if p.m0 == 0 || p.k == 0 {
                    return bad("topology needs m0 >= 1 and k >= 1");
                }
                if !(p.r_l > 0.0 && p.r_l <= p.r_h && p.r_h <= 1.0) {
                    return bad("topology needs 0 < r_l <= r_h <= 1");
                }
            }
            Method::Composed(p) => {
                if p.m_l == 0 || p.m_l > p.m_h {
                    return bad("composed needs 1 <= m_l <= m_h");
                }
                if p.c0 == 0 || p.n0 == 0 || p.k == 0 {
                    return bad("composed needs c0, n0, k >= 1");
                }
            }
        }
        Ok(())
    }
}

/// Grows a network of exactly `m` gates over `n` PIs. Each attempt picks a
/// gate type and fanins uniformly among all created nodes, with random
/// polarities; attempts that simplify to an existing signal are repeated.
/// Gates without fanout become POs.
pub fn generate_random<R: Rng + ?Sized>(
    kind: NetworkKind,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Network, GenerateError> {
    if m == 0 {
        return Err(GenerateError::InvalidParams("m must be at least 1".into()));
    }
    let mut net = Network::new(kind);
    let mut nodes: Vec<Signal> = (0..n).map(|_| net.create_pi()).collect();
    if nodes.is_empty() {
        return Err(GenerateError::AttemptBudgetExceeded {
            attempts: 0,
            gates: 0,
            target: m,
        });
    }
    let types = kind.gate_types();
    let budget = 100 * m;
    let mut failures = 0;
    while net.gate_count() < m {
        let gate = types[rng.random_range(0..types.len())];
        let fanins: Vec<Signal> = (0..gate.arity())
            .map(|_| nodes[rng.random_range(0..nodes.len())] ^ rng.random_bool(0.5))
            .collect();
        let before = net.gate_count();
        let s = net.create_gate(gate, &fanins).expect("legal gate over live fanins");
        if net.gate_count() > before {
            nodes.push(s.regular());
            failures = 0;
        } else {
            failures += 1;
            if failures >= budget {
                return Err(GenerateError::AttemptBudgetExceeded {
                    attempts: failures,
                    gates: net.gate_count(),
                    target: m,
                });
            }
        }
    }
    add_fanout_free_pos(&mut net);
    Ok(net)
}

/// Makes every fanout-free gate a PO. A network whose gates all have
/// fanout (possible only without gates) gets its last node as PO.
fn add_fanout_free_pos(net: &mut Network) {
    let refs = net.fanout_counts();
    let free: Vec<NodeId> = net.gates().filter(|g| refs[g.index()] == 0).collect();
    for g in &free {
        net.add_po(Signal::from(*g)).expect("live gate");
    }
    if net.num_pos() == 0 {
        let last = net
            .gates()
            .last()
            .or_else(|| net.pis().last().copied())
            .unwrap_or(NodeId::CONSTANT);
        net.add_po(Signal::from(last)).expect("live node");
    }
}

/// Instantiates `c` topologies drawn from `pool` over `n` PIs. Hanging
/// inputs read PIs or nodes of earlier components; fanout-free gates become
/// POs.
pub fn generate_composed<R: Rng + ?Sized>(
    kind: NetworkKind,
    n: usize,
    c: usize,
    pool: &[Topology],
    rng: &mut R,
) -> Result<Network, GenerateError> {
    if pool.is_empty() || n == 0 || c == 0 {
        return Err(GenerateError::InvalidParams(
            "composed needs a non-empty pool, n >= 1 and c >= 1".into(),
        ));
    }
    if pool.iter().any(|t| t.arity() != kind.arity()) {
        return Err(GenerateError::InvalidParams("topology arity does not match the kind".into()));
    }
    let mut net = Network::new(kind);
    let mut sources: Vec<Signal> = (0..n).map(|_| net.create_pi()).collect();
    for _ in 0..c {
        let topology = &pool[rng.random_range(0..pool.len())];
        let before = net.node_capacity();
        topology::instantiate(&mut net, topology, &sources, rng);
        // Nodes created by this component become sources for later ones.
        sources.extend((before..net.node_capacity()).map(|i| Signal::from(NodeId::new(i))));
    }
    add_fanout_free_pos(&mut net);
    Ok(net)
}

/// Structural expectations checked by [`check_generated`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Expectation {
    pub pis: Option<usize>,
    pub gates: Option<usize>,
    pub fanout_free_are_pos: bool,
    pub single_po: bool,
}

/// Structural validator for generated networks: topological storage, live
/// references, strash canonicity, no dangling gates, plus the given
/// expectations.
pub fn check_generated(net: &Network, expect: &Expectation) -> Result<(), String> {
    net.validate().map_err(|e| e.to_string())?;
    if let Some(pis) = expect.pis {
        if net.num_pis() != pis {
            return Err(format!("expected {pis} PIs, found {}", net.num_pis()));
        }
    }
    if let Some(gates) = expect.gates {
        if net.gate_count() != gates {
            return Err(format!("expected {gates} gates, found {}", net.gate_count()));
        }
    }
    if expect.single_po && net.num_pos() != 1 {
        return Err(format!("expected a single PO, found {}", net.num_pos()));
    }
    let cleaned = net.cleanup_dangling();
    if cleaned.gate_count() != net.gate_count() {
        return Err(format!(
            "{} dangling gates",
            net.gate_count() - cleaned.gate_count()
        ));
    }
    if expect.fanout_free_are_pos {
        let po_nodes: std::collections::HashSet<NodeId> = net.pos().iter().map(|s| s.node()).collect();
        let mut has_fanout = vec![false; net.node_capacity()];
        for g in net.gates() {
            for s in net.fanins(g) {
                has_fanout[s.node().index()] = true;
            }
        }
        if let Some(g) = net
            .gates()
            .find(|g| !has_fanout[g.index()] && !po_nodes.contains(g))
        {
            return Err(format!("fanout-free gate {g} is not a PO"));
        }
    }
    Ok(())
}

/// Stateful testcase source following a method's parameter schedule.
pub struct Generator {
    kind: NetworkKind,
    method: Method,
    rng: ChaCha8Rng,
    produced: u64,
    topo: Option<TopologyCursor>,
    pool: Vec<Topology>,
}

struct TopologyCursor {
    m: usize,
    list: Vec<Topology>,
    index: usize,
    used: u64,
}

/// Active schedule entry, for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(pub String);

impl Generator {
    pub fn new(kind: NetworkKind, method: Method, seed: u64) -> Result<Generator, GenerateError> {
        method.validate()?;
        let pool = match &method {
            Method::Composed(p) => (p.m_l..=p.m_h)
                .flat_map(|m| enumerate_topologies(m, kind.arity()))
                .collect(),
            _ => Vec::new(),
        };
        Ok(Generator {
            kind,
            method,
            rng: ChaCha8Rng::seed_from_u64(seed),
            produced: 0,
            topo: None,
            pool,
        })
    }

    pub fn produced(&self) -> u64 {
        self.produced
    }

    /// Configuration that the next call to [`Generator::next_network`] uses.
    pub fn current_configuration(&self) -> Configuration {
        match &self.method {
            Method::Random(p) => {
                let (n, m) = random_config_at(p, self.produced);
                Configuration(format!("n={n} m={m}"))
            }
            Method::Composed(p) => {
                let (n, c) = composed_config_at(p, self.produced);
                Configuration(format!("n={n} c={c}"))
            }
            Method::Topology(p) => match &self.topo {
                Some(cur) if cur.used < p.k || cur.index + 1 < cur.list.len() => {
                    let index = if cur.used < p.k { cur.index } else { cur.index + 1 };
                    Configuration(format!("m={} topology={}", cur.m, index))
                }
                Some(cur) => Configuration(format!("m={} topology=0", cur.m + 1)),
                None => Configuration(format!("m={} topology=0", p.m0)),
            },
        }
    }

    /// Produces the next testcase of the schedule.
    pub fn next_network(&mut self) -> Result<(Network, Configuration), GenerateError> {
        let config = self.current_configuration();
        let net = match self.method.clone() {
            Method::Random(p) => {
                let (n, m) = random_config_at(&p, self.produced);
                generate_random(self.kind, n, m, &mut self.rng)?
            }
            Method::Composed(p) => {
                let (n, c) = composed_config_at(&p, self.produced);
                generate_composed(self.kind, n, c, &self.pool, &mut self.rng)?
            }
            Method::Topology(p) => {
                self.advance_topology(&p);
                let cur = self.topo.as_mut().expect("cursor initialized");
                cur.used += 1;
                concretize_topology(&cur.list[cur.index], self.kind, p.r_l, p.r_h, &mut self.rng)
            }
        };
        self.produced += 1;
        Ok((net, config))
    }

    fn advance_topology(&mut self, p: &TopologyParams) {
        let arity = self.kind.arity();
        let needs_new_size = match &mut self.topo {
            None => Some(p.m0),
            Some(cur) if cur.used < p.k => None,
            Some(cur) if cur.index + 1 < cur.list.len() => {
                cur.index += 1;
                cur.used = 0;
                None
            }
            Some(cur) => Some(cur.m + 1),
        };
        if let Some(m) = needs_new_size {
            let mut list = enumerate_topologies(m, arity);
            use rand::seq::SliceRandom;
            list.shuffle(&mut self.rng);
            self.topo = Some(TopologyCursor {
                m,
                list,
                index: 0,
                used: 0,
            });
        }
    }
}
