//! Oracles map a testcase to a verdict. They wrap either an in-process
//! transform checked by equivalence checking, an arbitrary predicate, or an
//! external command.

mod builtin;
mod cec;
mod external;

use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::io::FileFormat;
use crate::network::Network;

pub use builtin::{builtin_aut, conflicting_xor_pairs, xor_units, UnknownAut, XorUnit, BUILTIN_AUTS};
pub use cec::{check_equivalence, miter, CecResult, RANDOM_PATTERNS};
pub use external::{classify, ExternalOracle, FailurePolicy, ProcessOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Crash,
    Nonequivalent,
    Assertion,
    Hang,
    Custom,
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DefectKind::Crash => "crash",
            DefectKind::Nonequivalent => "nonequivalent",
            DefectKind::Assertion => "assertion",
            DefectKind::Hang => "hang",
            DefectKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    /// No defect observed. `note` flags incomplete verification.
    Pass { note: Option<String> },
    DefectObserved(Defect),
    /// Harness failure; never counted as a defect.
    OracleError(String),
}

impl Verdict {
    pub fn pass() -> Verdict {
        Verdict::Pass { note: None }
    }

    pub fn defect(kind: DefectKind, detail: impl Into<String>) -> Verdict {
        Verdict::DefectObserved(Defect {
            kind,
            detail: detail.into(),
        })
    }

    pub fn is_defect(&self) -> bool {
        matches!(self, Verdict::DefectObserved(_))
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Verdict::OracleError(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass { note: None } => f.write_str("pass"),
            Verdict::Pass { note: Some(n) } => write!(f, "pass ({n})"),
            Verdict::DefectObserved(d) => write!(f, "defect [{}]: {}", d.kind, d.detail),
            Verdict::OracleError(e) => write!(f, "oracle error: {e}"),
        }
    }
}

/// A testcase-to-verdict callable. One call is one oracle call.
pub trait Oracle {
    fn call(&mut self, net: &Network) -> Verdict;

    /// Like [`Oracle::call`] for a testcase already serialized at `path`.
    fn call_file(&mut self, net: &Network, _path: &Path) -> Verdict {
        self.call(net)
    }

    /// Format the oracle wants testcases written in, if it reads files.
    fn preferred_format(&self) -> Option<FileFormat> {
        None
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn call(&mut self, net: &Network) -> Verdict {
        (**self).call(net)
    }

    fn call_file(&mut self, net: &Network, path: &Path) -> Verdict {
        (**self).call_file(net, path)
    }

    fn preferred_format(&self) -> Option<FileFormat> {
        (**self).preferred_format()
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn call(&mut self, net: &Network) -> Verdict {
        (**self).call(net)
    }

    fn call_file(&mut self, net: &Network, path: &Path) -> Verdict {
        (**self).call_file(net, path)
    }

    fn preferred_format(&self) -> Option<FileFormat> {
        (**self).preferred_format()
    }
}

/// Oracle that may be called from several threads at once.
pub trait SharedOracle: Send + Sync {
    fn call_shared(&self, net: &Network, path: &Path) -> Verdict;

    fn preferred_format(&self) -> Option<FileFormat> {
        None
    }
}

/// Oracle backed by a closure.
pub struct FnOracle<F>(pub F);

impl<F: FnMut(&Network) -> Verdict> Oracle for FnOracle<F> {
    fn call(&mut self, net: &Network) -> Verdict {
        (self.0)(net)
    }
}

/// Reports a custom defect whenever `predicate` holds.
pub fn defect_if<F>(predicate: F) -> FnOracle<impl FnMut(&Network) -> Verdict>
where
    F: FnMut(&Network) -> bool,
{
    let mut predicate = predicate;
    FnOracle(move |net: &Network| {
        if predicate(net) {
            Verdict::defect(DefectKind::Custom, "predicate holds")
        } else {
            Verdict::pass()
        }
    })
}

/// Failure modes an in-process application can report besides panicking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutFailure {
    Crash(String),
    Assertion(String),
    /// The call ran past its deadline.
    Hang,
}

/// Per-call context handed to in-process applications.
#[derive(Clone, Debug)]
pub struct CallContext {
    deadline: Instant,
}

impl CallContext {
    pub fn new(timeout: Duration) -> CallContext {
        CallContext {
            deadline: Instant::now() + timeout,
        }
    }

    /// Fails with [`AutFailure::Hang`] once the deadline has passed.
    pub fn check(&self) -> Result<(), AutFailure> {
        if Instant::now() >= self.deadline {
            Err(AutFailure::Hang)
        } else {
            Ok(())
        }
    }
}

/// An application under test that runs in-process.
pub type Aut = Arc<dyn Fn(Network, &CallContext) -> Result<Network, AutFailure> + Send + Sync>;

/// Runs an in-process application on a clone of the testcase and checks the
/// result against the input by simulation-based equivalence checking.
#[derive(Clone)]
pub struct CecOracle {
    aut: Aut,
    pub sim_limit: usize,
    pub timeout: Duration,
    pub hang_as_defect: bool,
    pub seed: u64,
}

pub const DEFAULT_SIM_LIMIT: usize = 16;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// CEC-based oracle around `aut`; exhaustive simulation up to `sim_limit`
/// PIs.
pub fn make_cec_oracle(aut: Aut, sim_limit: usize) -> CecOracle {
    CecOracle {
        aut,
        sim_limit,
        timeout: DEFAULT_TIMEOUT,
        hang_as_defect: false,
        seed: 0,
    }
}

impl CecOracle {
    pub fn with_timeout(mut self, timeout: Duration, hang_as_defect: bool) -> CecOracle {
        self.timeout = timeout;
        self.hang_as_defect = hang_as_defect;
        self
    }

    fn run(&self, net: &Network) -> Verdict {
        let ctx = CallContext::new(self.timeout);
        let input = net.clone();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| (self.aut)(input, &ctx)));
        let output = match outcome {
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "panic".to_string());
                return Verdict::defect(DefectKind::Crash, msg);
            }
            Ok(Err(AutFailure::Crash(msg))) => return Verdict::defect(DefectKind::Crash, msg),
            Ok(Err(AutFailure::Assertion(msg))) => return Verdict::defect(DefectKind::Assertion, msg),
            Ok(Err(AutFailure::Hang)) => {
                let msg = format!("no result within {:?}", self.timeout);
                return if self.hang_as_defect {
                    Verdict::defect(DefectKind::Hang, msg)
                } else {
                    Verdict::OracleError(format!("timeout: {msg}"))
                };
            }
            Ok(Ok(out)) => out,
        };
        if let Err(e) = output.validate() {
            return Verdict::defect(DefectKind::Assertion, format!("invalid result network: {e}"));
        }
        match check_equivalence(net, &output, self.sim_limit, self.seed) {
            CecResult::Equivalent => Verdict::pass(),
            CecResult::Inconclusive { patterns } => Verdict::Pass {
                note: Some(format!("inconclusive: no difference in {patterns} random patterns")),
            },
            CecResult::NotEquivalent { assignment, output } => {
                let bits: String = assignment.iter().map(|&b| if b { '1' } else { '0' }).collect();
                Verdict::defect(
                    DefectKind::Nonequivalent,
                    format!("PO {output} differs under PI assignment {bits}"),
                )
            }
            CecResult::InterfaceMismatch { reason } => Verdict::defect(DefectKind::Nonequivalent, reason),
        }
    }
}

impl Oracle for CecOracle {
    fn call(&mut self, net: &Network) -> Verdict {
        self.run(net)
    }
}

impl SharedOracle for CecOracle {
    fn call_shared(&self, net: &Network, _path: &Path) -> Verdict {
        self.run(net)
    }
}
