use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::{table_bit, Network, NetworkKind, Signal, EXHAUSTIVE_PI_LIMIT};

/// Random-simulation budget used above the exhaustive limit.
pub const RANDOM_PATTERNS: u64 = 64 * 1024;

/// Outcome of comparing two networks PO by PO.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CecResult {
    Equivalent,
    NotEquivalent { assignment: Vec<bool>, output: usize },
    /// No difference found by random simulation.
    Inconclusive { patterns: u64 },
    InterfaceMismatch { reason: String },
}

impl CecResult {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, CecResult::Equivalent)
    }
}

fn interface_mismatch(a: &Network, b: &Network) -> Option<String> {
    if a.num_pis() != b.num_pis() {
        Some(format!("PI counts differ ({} vs {})", a.num_pis(), b.num_pis()))
    } else if a.num_pos() != b.num_pos() {
        Some(format!("PO counts differ ({} vs {})", a.num_pos(), b.num_pos()))
    } else {
        None
    }
}

fn miter_kind(a: &Network, b: &Network) -> NetworkKind {
    if a.kind() == b.kind() {
        a.kind()
    } else {
        NetworkKind::Xag
    }
}

/// Single-output network that is constant 0 exactly when `a` and `b`
/// agree on every PO: pairwise XORs of corresponding outputs, OR-reduced.
/// Returns `None` when the PI or PO counts differ.
pub fn miter(a: &Network, b: &Network) -> Option<Network> {
    if interface_mismatch(a, b).is_some() {
        return None;
    }
    let mut m = Network::new(miter_kind(a, b));
    let inputs: Vec<Signal> = (0..a.num_pis()).map(|_| m.create_pi()).collect();
    let outs_a = a.copy_into(&mut m, &inputs);
    let outs_b = b.copy_into(&mut m, &inputs);
    let mut any = Signal::FALSE;
    for (x, y) in outs_a.into_iter().zip(outs_b) {
        let diff = m.create_xor(x, y);
        any = m.create_or(any, diff);
    }
    m.add_po(any).expect("live signal");
    Some(m)
}

fn first_difference(a: &Network, b: &Network, assignment: &[bool]) -> usize {
    let va = a.simulate(assignment).expect("assignment length matches");
    let vb = b.simulate(assignment).expect("assignment length matches");
    va.iter().zip(&vb).position(|(x, y)| x != y).unwrap_or(0)
}

/// Equivalence check by simulation of the miter: exhaustive up to
/// `sim_limit` PIs (capped at the exhaustive limit), random otherwise.
pub fn check_equivalence(a: &Network, b: &Network, sim_limit: usize, seed: u64) -> CecResult {
    if let Some(reason) = interface_mismatch(a, b) {
        return CecResult::InterfaceMismatch { reason };
    }
    let m = miter(a, b).expect("interfaces match");
    // Structurally identical outputs hash the miter down to constant 0.
    if m.pos()[0] == Signal::FALSE {
        return CecResult::Equivalent;
    }
    let n = m.num_pis();
    if n <= sim_limit.min(EXHAUSTIVE_PI_LIMIT) {
        let table = &m.truth_tables().expect("within the exhaustive limit")[0];
        let Some(word) = table.iter().position(|&w| w != 0) else {
            return CecResult::Equivalent;
        };
        let pattern = word * 64 + table[word].trailing_zeros() as usize;
        debug_assert!(table_bit(table, pattern));
        let assignment: Vec<bool> = (0..n).map(|i| (pattern >> i) & 1 == 1).collect();
        let output = first_difference(a, b, &assignment);
        return CecResult::NotEquivalent { assignment, output };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = vec![0u64; n];
    for _ in 0..RANDOM_PATTERNS / 64 {
        for w in words.iter_mut() {
            *w = rng.random();
        }
        let out = m.simulate_words(&words).expect("one word per PI")[0];
        if out != 0 {
            let bit = out.trailing_zeros();
            let assignment: Vec<bool> = words.iter().map(|w| (w >> bit) & 1 == 1).collect();
            let output = first_difference(a, b, &assignment);
            return CecResult::NotEquivalent { assignment, output };
        }
    }
    CecResult::Inconclusive {
        patterns: RANDOM_PATTERNS,
    }
}
