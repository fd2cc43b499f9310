//! Testcase minimization.
//!
//! [`minimize`] shrinks a failure-inducing network with six reduction
//! stages of increasing granularity. Every attempt is checked with the
//! oracle; attempts that lose the defect are undone from a full backup.
//! With `repeat_to_fixpoint` the result is a 1-minimal core: no single gate
//! can be removed, under any of the tried reconnections, without losing the
//! defect.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{write_network, FileFormat};
use crate::network::{Network, NetworkError, NodeId, Signal};
use crate::oracle::{Oracle, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RemovePi,
    RemovePo,
    SubstituteGate,
    SimplifyTfo,
    RemoveMffc,
    RemoveGate,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::RemovePi,
        Stage::RemovePo,
        Stage::SubstituteGate,
        Stage::SimplifyTfo,
        Stage::RemoveMffc,
        Stage::RemoveGate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::RemovePi => "remove PI",
            Stage::RemovePo => "remove PO",
            Stage::SubstituteGate => "substitute gate",
            Stage::SimplifyTfo => "simplify TFO",
            Stage::RemoveMffc => "remove MFFC",
            Stage::RemoveGate => "remove gate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What replaces the gate in a [`Operation::RemoveGate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    FreshPi,
    Signal(Signal),
}

/// One reduction operation, addressed by node id (or PO index) in the
/// network it is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    RemovePi(NodeId),
    RemovePo(usize),
    SubstituteGate(NodeId),
    SimplifyTfo(NodeId),
    RemoveMffc(NodeId),
    RemoveGate(NodeId, Replacement),
}

impl Operation {
    pub fn stage(&self) -> Stage {
        match self {
            Operation::RemovePi(_) => Stage::RemovePi,
            Operation::RemovePo(_) => Stage::RemovePo,
            Operation::SubstituteGate(_) => Stage::SubstituteGate,
            Operation::SimplifyTfo(_) => Stage::SimplifyTfo,
            Operation::RemoveMffc(_) => Stage::RemoveMffc,
            Operation::RemoveGate(..) => Stage::RemoveGate,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::RemovePi(n) => write!(f, "remove PI {n}"),
            Operation::RemovePo(i) => write!(f, "remove PO {i}"),
            Operation::SubstituteGate(n) => write!(f, "substitute gate {n}"),
            Operation::SimplifyTfo(n) => write!(f, "simplify TFO of {n}"),
            Operation::RemoveMffc(n) => write!(f, "remove MFFC of {n}"),
            Operation::RemoveGate(n, Replacement::FreshPi) => write!(f, "remove gate {n} (fresh PI)"),
            Operation::RemoveGate(n, Replacement::Signal(s)) => write!(f, "remove gate {n} (by {s:?})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("{op} does not apply: {reason}")]
    InvalidTarget { op: Operation, reason: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Adds the gate fanins of `node` as POs, skipping signals already driving
/// a PO.
fn promote_fanins(net: &mut Network, node: NodeId) {
    let fanins: Vec<Signal> = net.fanins(node).to_vec();
    for f in fanins {
        if net.is_gate(f.node()) && !net.pos().contains(&f) {
            net.add_po(f).expect("fanin of a live gate is live");
        }
    }
}

/// Applies `op` in place. Dead logic is only marked; see [`tidy`].
pub fn apply_stage_op(net: &mut Network, op: Operation) -> Result<(), ReduceError> {
    let invalid = |reason: &str| ReduceError::InvalidTarget {
        op,
        reason: reason.to_string(),
    };
    match op {
        Operation::RemovePi(n) => {
            if !net.is_pi(n) {
                return Err(invalid("not a primary input"));
            }
            net.substitute_constant_zero(n)?;
        }
        Operation::RemovePo(i) => {
            if i >= net.num_pos() {
                return Err(invalid("no such output"));
            }
            net.remove_po(i);
        }
        Operation::SubstituteGate(n) | Operation::SimplifyTfo(n) | Operation::RemoveMffc(n) | Operation::RemoveGate(n, _) => {
            if !net.is_gate(n) {
                return Err(invalid("not a gate"));
            }
            match op {
                Operation::SubstituteGate(_) => net.substitute_constant_zero(n)?,
                Operation::SimplifyTfo(_) => {
                    promote_fanins(net, n);
                    net.substitute_constant_zero(n)?;
                }
                Operation::RemoveMffc(_) => {
                    net.substitute_with_pi(n)?;
                }
                Operation::RemoveGate(_, replacement) => {
                    if let Replacement::Signal(s) = replacement {
                        if s.node() >= n {
                            return Err(invalid("replacement must precede the gate"));
                        }
                    }
                    promote_fanins(net, n);
                    match replacement {
                        Replacement::FreshPi => {
                            net.substitute_with_pi(n)?;
                        }
                        Replacement::Signal(s) => net.substitute_with_signal(n, s)?,
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(())
}

/// Replacements tried for removing `gate`: a fresh PI, then every distinct
/// fanin signal, then their complements.
pub fn remove_gate_variants(net: &Network, gate: NodeId) -> Vec<Replacement> {
    let mut out = vec![Replacement::FreshPi];
    let mut seen: Vec<Signal> = Vec::new();
    let fanins = net.fanins(gate);
    for s in fanins.iter().copied().chain(fanins.iter().map(|&s| !s)) {
        if !seen.contains(&s) {
            seen.push(s);
            out.push(Replacement::Signal(s));
        }
    }
    out
}

/// Drops dangling gates and PIs, returning a compacted copy. `net` keeps
/// its node ids.
pub fn tidy(net: &mut Network) -> Network {
    net.sweep_dangling();
    net.remove_dangling_pis();
    net.cleanup_dangling()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeParams {
    /// Targets sampled per stage pass at most.
    pub max_ops_per_stage: usize,
    pub seed: u64,
    /// Rerun the stage sequence until a full remove-gate pass keeps nothing.
    pub repeat_to_fixpoint: bool,
    /// Overwrite this file with the current testcase after each kept step.
    pub keep_intermediates: Option<PathBuf>,
}

impl Default for MinimizeParams {
    fn default() -> Self {
        MinimizeParams {
            max_ops_per_stage: 1_000_000,
            seed: 1,
            repeat_to_fixpoint: true,
            keep_intermediates: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Size {
    pub gates: usize,
    pub pis: usize,
    pub pos: usize,
}

impl Size {
    pub fn of(net: &Network) -> Size {
        Size {
            gates: net.gate_count(),
            pis: net.num_pis(),
            pos: net.num_pos(),
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} gates, {} PIs, {} POs", self.gates, self.pis, self.pos)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub operation: Operation,
    /// `None` when the result repeated a known candidate and the oracle was
    /// not called.
    pub verdict: Option<Verdict>,
    pub kept: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeTrace {
    pub attempts: Vec<Attempt>,
    pub oracle_call_count: u64,
    /// Size before minimization, then after every kept step.
    pub trajectory: Vec<Size>,
    pub passes: usize,
    /// Set when the last remove-gate pass tried every gate and kept nothing.
    pub minimality_guaranteed: bool,
}

impl MinimizeTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug, Error)]
pub enum MinimizeError {
    #[error("the initial testcase does not exhibit the defect ({0})")]
    InitialNotFailing(Verdict),
    #[error("oracle error: {message}")]
    Oracle { message: String, testcase: Box<Network> },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot write intermediate testcase: {0}")]
    Io(String),
}

fn digest(net: &Network) -> u64 {
    let mut h = DefaultHasher::new();
    net.hash(&mut h);
    h.finish()
}

struct Run<'a, O: Oracle + ?Sized> {
    oracle: &'a mut O,
    params: &'a MinimizeParams,
    rng: ChaCha8Rng,
    /// Working copy; node ids stay stable until the end of a stage.
    work: Network,
    /// Compacted form of `work`.
    current: Network,
    /// Candidates that lost the defect since the last kept step.
    rejected: HashSet<u64>,
    trace: MinimizeTrace,
}

struct StageOutcome {
    kept: usize,
    complete: bool,
}

impl<O: Oracle + ?Sized> Run<'_, O> {
    fn call(&mut self, net: &Network) -> Result<Verdict, MinimizeError> {
        self.trace.oracle_call_count += 1;
        let verdict = self.oracle.call(net);
        if let Verdict::OracleError(message) = &verdict {
            return Err(MinimizeError::Oracle {
                message: message.clone(),
                testcase: Box::new(net.clone()),
            });
        }
        Ok(verdict)
    }

    /// Tries `op`; keeps it when the defect survives.
    fn attempt(&mut self, op: Operation) -> Result<bool, MinimizeError> {
        let backup = self.work.clone();
        if apply_stage_op(&mut self.work, op).is_err() {
            self.work = backup;
            return Ok(false);
        }
        let candidate = tidy(&mut self.work);
        if candidate == self.current {
            self.work = backup;
            return Ok(false);
        }
        let key = digest(&candidate);
        if self.rejected.contains(&key) {
            self.work = backup;
            self.trace.attempts.push(Attempt {
                operation: op,
                verdict: None,
                kept: false,
            });
            return Ok(false);
        }
        let verdict = self.call(&candidate)?;
        let kept = verdict.is_defect();
        self.trace.attempts.push(Attempt {
            operation: op,
            verdict: Some(verdict),
            kept,
        });
        if kept {
            self.current = candidate;
            self.rejected.clear();
            self.trace.trajectory.push(Size::of(&self.current));
            if let Some(path) = &self.params.keep_intermediates {
                let format = FileFormat::from_path(path).unwrap_or_else(|| FileFormat::default_for(self.current.kind()));
                let bytes = write_network(&self.current, format).map_err(|e| MinimizeError::Io(e.to_string()))?;
                std::fs::write(path, bytes).map_err(|e| MinimizeError::Io(e.to_string()))?;
            }
        } else {
            self.rejected.insert(key);
            self.work = backup;
        }
        Ok(kept)
    }

    fn run_stage(&mut self, stage: Stage) -> Result<StageOutcome, MinimizeError> {
        // Start every stage from the compacted network.
        self.work = self.current.clone();
        let mut remaining: Vec<usize> = match stage {
            Stage::RemovePi => self.work.pis().iter().map(|p| p.index()).collect(),
            Stage::RemovePo => (0..self.work.num_pos()).collect(),
            _ => self.work.gates().map(|g| g.index()).collect(),
        };
        let mut outcome = StageOutcome {
            kept: 0,
            complete: true,
        };
        let mut sampled = 0;
        while !remaining.is_empty() {
            if sampled >= self.params.max_ops_per_stage {
                outcome.complete = false;
                break;
            }
            let target = remaining.swap_remove(self.rng.random_range(0..remaining.len()));
            let node = NodeId::new(target);
            let ops: Vec<Operation> = match stage {
                Stage::RemovePi if self.work.is_pi(node) => vec![Operation::RemovePi(node)],
                Stage::RemovePo => vec![Operation::RemovePo(target)],
                Stage::SubstituteGate if self.work.is_gate(node) => vec![Operation::SubstituteGate(node)],
                Stage::SimplifyTfo if self.work.is_gate(node) => vec![Operation::SimplifyTfo(node)],
                Stage::RemoveMffc if self.work.is_gate(node) => vec![Operation::RemoveMffc(node)],
                Stage::RemoveGate if self.work.is_gate(node) => remove_gate_variants(&self.work, node)
                    .into_iter()
                    .map(|r| Operation::RemoveGate(node, r))
                    .collect(),
                _ => Vec::new(),
            };
            if ops.is_empty() {
                continue;
            }
            sampled += 1;
            for op in ops {
                if self.attempt(op)? {
                    outcome.kept += 1;
                    if let Operation::RemovePo(i) = op {
                        for r in remaining.iter_mut().filter(|r| **r > i) {
                            *r -= 1;
                        }
                    }
                    break;
                }
            }
        }
        Ok(outcome)
    }
}

/// Reduces a failure-inducing testcase. The first oracle call checks that
/// `testcase` exhibits the defect.
pub fn minimize<O: Oracle + ?Sized>(
    testcase: &Network,
    oracle: &mut O,
    params: &MinimizeParams,
) -> Result<(Network, MinimizeTrace), MinimizeError> {
    if params.max_ops_per_stage == 0 {
        return Err(MinimizeError::InvalidParams("max_ops_per_stage must be at least 1".into()));
    }
    let mut run = Run {
        oracle,
        params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        work: testcase.clone(),
        current: testcase.clone(),
        rejected: HashSet::new(),
        trace: MinimizeTrace {
            attempts: Vec::new(),
            oracle_call_count: 0,
            trajectory: vec![Size::of(testcase)],
            passes: 0,
            minimality_guaranteed: false,
        },
    };
    let verdict = run.call(testcase)?;
    if !verdict.is_defect() {
        return Err(MinimizeError::InitialNotFailing(verdict));
    }
    // Start from the compacted testcase when that keeps the defect.
    let compact = tidy(&mut testcase.clone());
    if compact != *testcase {
        let verdict = run.call(&compact)?;
        if verdict.is_defect() {
            run.current = compact;
            run.trace.trajectory.push(Size::of(&run.current));
        }
    }
    loop {
        run.trace.passes += 1;
        let head = if run.current.num_pis() > run.current.num_pos() {
            [Stage::RemovePo, Stage::RemovePi]
        } else {
            [Stage::RemovePi, Stage::RemovePo]
        };
        let mut kept = 0;
        let mut last = StageOutcome {
            kept: 0,
            complete: true,
        };
        for stage in head.into_iter().chain(Stage::ALL[2..].iter().copied()) {
            last = run.run_stage(stage)?;
            kept += last.kept;
        }
        if last.complete && last.kept == 0 {
            run.trace.minimality_guaranteed = true;
            break;
        }
        if !params.repeat_to_fixpoint || kept == 0 {
            break;
        }
    }
    Ok((run.current, run.trace))
}

/// Result of [`verify_minimal`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCheck {
    pub minimal: bool,
    /// A remove-gate operation that keeps the defect, if any.
    pub witness: Option<Operation>,
    pub oracle_calls: u64,
}

/// Tries every remove-gate variant on every gate of `core`.
pub fn verify_minimal<O: Oracle + ?Sized>(core: &Network, oracle: &mut O) -> Result<MinimalityCheck, MinimizeError> {
    let mut calls = 0u64;
    let mut call = |net: &Network, calls: &mut u64| -> Result<Verdict, MinimizeError> {
        *calls += 1;
        match oracle.call(net) {
            Verdict::OracleError(message) => Err(MinimizeError::Oracle {
                message,
                testcase: Box::new(net.clone()),
            }),
            v => Ok(v),
        }
    };
    let verdict = call(core, &mut calls)?;
    if !verdict.is_defect() {
        return Err(MinimizeError::InitialNotFailing(verdict));
    }
    let mut seen: HashSet<u64> = HashSet::new();
    let gates: Vec<NodeId> = core.gates().collect();
    for gate in gates {
        for replacement in remove_gate_variants(core, gate) {
            let op = Operation::RemoveGate(gate, replacement);
            let mut work = core.clone();
            if apply_stage_op(&mut work, op).is_err() {
                continue;
            }
            let candidate = tidy(&mut work);
            if !seen.insert(digest(&candidate)) {
                continue;
            }
            if call(&candidate, &mut calls)?.is_defect() {
                return Ok(MinimalityCheck {
                    minimal: false,
                    witness: Some(op),
                    oracle_calls: calls,
                });
            }
        }
    }
    Ok(MinimalityCheck {
        minimal: true,
        witness: None,
        oracle_calls: calls,
    })
}
