use super::{Network, NetworkError, NodeFunction};

/// Largest PI count accepted by exhaustive simulation (2^20 patterns).
pub const EXHAUSTIVE_PI_LIMIT: usize = 20;

/// Truth table of one output over all input assignments. Bit `k` of the
/// table is the value under the assignment whose PI `i` equals bit `i` of `k`.
pub type TruthTable = Vec<u64>;

fn projection_word(var: usize) -> u64 {
    const MASKS: [u64; 6] = [
        0xaaaa_aaaa_aaaa_aaaa,
        0xcccc_cccc_cccc_cccc,
        0xf0f0_f0f0_f0f0_f0f0,
        0xff00_ff00_ff00_ff00,
        0xffff_0000_ffff_0000,
        0xffff_ffff_0000_0000,
    ];
    MASKS[var]
}

impl Network {
    /// Bit-parallel simulation: `pi_words[i]` holds 64 values of PI `i`.
    /// Returns one word per PO.
    pub fn simulate_words(&self, pi_words: &[u64]) -> Result<Vec<u64>, NetworkError> {
        if pi_words.len() != self.pis.len() {
            return Err(NetworkError::AssignmentLength {
                expected: self.pis.len(),
                actual: pi_words.len(),
            });
        }
        let mut values = vec![0u64; self.nodes.len()];
        self.simulate_into(pi_words, &mut values);
        Ok(self.po_words(&values))
    }

    /// Fills `values` with one word per node.
    pub(crate) fn simulate_into(&self, pi_words: &[u64], values: &mut [u64]) {
        for (&pi, &w) in self.pis.iter().zip(pi_words) {
            values[pi.index()] = w;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let NodeFunction::Gate(gate) = node.function else {
                continue;
            };
            if node.dead {
                continue;
            }
            let f = node.fanins();
            let get = |k: usize| -> u64 {
                f.get(k).map_or(0, |s| {
                    let v = values[s.node().index()];
                    if s.is_complemented() {
                        !v
                    } else {
                        v
                    }
                })
            };
            values[i] = gate.evaluate(get(0), get(1), get(2));
        }
    }

    fn po_words(&self, values: &[u64]) -> Vec<u64> {
        self.pos
            .iter()
            .map(|po| {
                let v = values[po.node().index()];
                if po.is_complemented() {
                    !v
                } else {
                    v
                }
            })
            .collect()
    }

    /// Evaluates the POs under one assignment of the PIs (in PI order).
    pub fn simulate(&self, assignment: &[bool]) -> Result<Vec<bool>, NetworkError> {
        let words: Vec<u64> = assignment.iter().map(|&b| if b { !0 } else { 0 }).collect();
        Ok(self
            .simulate_words(&words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }

    /// Exhaustive truth tables of all POs.
    pub fn truth_tables(&self) -> Result<Vec<TruthTable>, NetworkError> {
        let n = self.pis.len();
        if n > EXHAUSTIVE_PI_LIMIT {
            return Err(NetworkError::TooManyInputs {
                limit: EXHAUSTIVE_PI_LIMIT,
                actual: n,
            });
        }
        let words = if n <= 6 { 1 } else { 1usize << (n - 6) };
        let mask = if n >= 6 { !0u64 } else { (1u64 << (1u32 << n)) - 1 };
        let mut tables = vec![vec![0u64; words]; self.pos.len()];
        let mut values = vec![0u64; self.nodes.len()];
        let mut pi_words = vec![0u64; n];
        for chunk in 0..words {
            for (i, w) in pi_words.iter_mut().enumerate() {
                *w = if i < 6 {
                    projection_word(i)
                } else if (chunk >> (i - 6)) & 1 == 1 {
                    !0
                } else {
                    0
                };
            }
            self.simulate_into(&pi_words, &mut values);
            for (table, w) in tables.iter_mut().zip(self.po_words(&values)) {
                table[chunk] = w & mask;
            }
        }
        Ok(tables)
    }
}

/// Reads bit `pattern` of a truth table.
pub fn table_bit(table: &[u64], pattern: usize) -> bool {
    (table[pattern / 64] >> (pattern % 64)) & 1 == 1
}
