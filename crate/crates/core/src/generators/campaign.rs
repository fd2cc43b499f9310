use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ComposedParams, Configuration, GenerateError, Generator, Method, RandomParams};
use crate::io::{write_network, FileFormat, IoError};
use crate::network::{Network, NetworkKind};
use crate::oracle::{Oracle, SharedOracle, Verdict};

/// PI and gate counts of the Random schedule after `t` tests.
pub fn random_config_at(p: &RandomParams, t: u64) -> (usize, usize) {
    let step = (t / p.k) as usize;
    (p.n0 + step * p.delta_n, p.m0 + step * p.delta_m)
}

/// PI and component counts of the Composed schedule after `t` tests.
pub fn composed_config_at(p: &ComposedParams, t: u64) -> (usize, usize) {
    let step = (t / p.k) as usize;
    (p.n0 + step * p.delta_n, p.c0 + step * p.delta_c)
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub kind: NetworkKind,
    pub method: Method,
    pub seed: u64,
    pub max_tests: Option<u64>,
    pub timeout: Option<Duration>,
    pub stop_on_first: bool,
    pub out_dir: PathBuf,
    /// Testcase format; defaults to the oracle's preference, then to the
    /// kind's default format.
    pub format: Option<FileFormat>,
    /// Keep passing testcases too.
    pub keep_all: bool,
    /// Decompose XAG/MIG testcases into AIGs before testing.
    pub lower_to_aig: bool,
}

impl CampaignConfig {
    pub fn new(kind: NetworkKind, method: Method, seed: u64, out_dir: impl Into<PathBuf>) -> CampaignConfig {
        CampaignConfig {
            kind,
            method,
            seed,
            max_tests: Some(1000),
            timeout: None,
            stop_on_first: true,
            out_dir: out_dir.into(),
            format: None,
            keep_all: false,
            lower_to_aig: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] IoError),
    #[error("campaign needs a test budget or a timeout")]
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxTests,
    Timeout,
    FirstFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub seq: u64,
    pub path: PathBuf,
    pub configuration: String,
    pub verdict: Verdict,
    pub pis: usize,
    pub pos: usize,
    pub gates: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigCounter {
    pub tests: u64,
    pub failures: u64,
    pub oracle_errors: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub method: Method,
    pub kind: NetworkKind,
    pub seed: u64,
    pub tests_run: u64,
    pub failures: Vec<FailureRecord>,
    pub oracle_errors: Vec<FailureRecord>,
    pub configurations: BTreeMap<String, ConfigCounter>,
    pub wall_time_secs: f64,
    pub generation_secs: f64,
    pub oracle_secs: f64,
    pub stop_reason: StopReason,
}

impl CampaignReport {
    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(path, text)
    }
}

struct Pending {
    seq: u64,
    path: PathBuf,
    configuration: Configuration,
    net: Network,
}

struct State {
    generator: Generator,
    config: CampaignConfig,
    report: CampaignReport,
    start: Instant,
}

impl State {
    fn new(config: &CampaignConfig) -> Result<State, CampaignError> {
        if config.max_tests.is_none() && config.timeout.is_none() {
            return Err(CampaignError::Unbounded);
        }
        fs::create_dir_all(&config.out_dir)?;
        Ok(State {
            generator: Generator::new(config.kind, config.method.clone(), config.seed)?,
            config: config.clone(),
            report: CampaignReport {
                method: config.method.clone(),
                kind: config.kind,
                seed: config.seed,
                tests_run: 0,
                failures: Vec::new(),
                oracle_errors: Vec::new(),
                configurations: BTreeMap::new(),
                wall_time_secs: 0.0,
                generation_secs: 0.0,
                oracle_secs: 0.0,
                stop_reason: StopReason::MaxTests,
            },
            start: Instant::now(),
        })
    }

    /// Remaining test budget, or the reason to stop.
    fn remaining(&self) -> Result<u64, StopReason> {
        if self.config.stop_on_first && !self.report.failures.is_empty() {
            return Err(StopReason::FirstFailure);
        }
        if let Some(limit) = self.config.timeout {
            if self.start.elapsed() >= limit {
                return Err(StopReason::Timeout);
            }
        }
        match self.config.max_tests {
            Some(max) if self.report.tests_run >= max => Err(StopReason::MaxTests),
            Some(max) => Ok(max - self.report.tests_run),
            None => Ok(u64::MAX),
        }
    }

    /// Generates and writes the next testcase.
    fn prepare(&mut self, preferred: Option<FileFormat>) -> Result<Pending, CampaignError> {
        let t = Instant::now();
        let seq = self.generator.produced();
        let (mut net, configuration) = self.generator.next_network()?;
        if self.config.lower_to_aig {
            net = net.lower_to_aig();
        }
        let format = self
            .config
            .format
            .or(preferred)
            .unwrap_or_else(|| FileFormat::default_for(net.kind()));
        let path = self
            .config
            .out_dir
            .join(format!("case_{seq}.{}", format.extension()));
        // Written before the call so a crashing application cannot lose it.
        fs::write(&path, write_network(&net, format)?)?;
        self.report.generation_secs += t.elapsed().as_secs_f64();
        Ok(Pending {
            seq,
            path,
            configuration,
            net,
        })
    }

    fn record(&mut self, case: Pending, verdict: Verdict) {
        self.report.tests_run += 1;
        let counter = self
            .report
            .configurations
            .entry(case.configuration.0.clone())
            .or_default();
        counter.tests += 1;
        let record = |verdict: Verdict| FailureRecord {
            seq: case.seq,
            path: case.path.clone(),
            configuration: case.configuration.0.clone(),
            verdict,
            pis: case.net.num_pis(),
            pos: case.net.num_pos(),
            gates: case.net.gate_count(),
        };
        match verdict {
            Verdict::DefectObserved(_) => {
                counter.failures += 1;
                self.report.failures.push(record(verdict));
            }
            Verdict::OracleError(_) => {
                counter.oracle_errors += 1;
                self.report.oracle_errors.push(record(verdict));
            }
            Verdict::Pass { .. } => {
                if !self.config.keep_all {
                    let _ = fs::remove_file(&case.path);
                    let _ = fs::remove_file(case.path.with_extension("stdout"));
                    let _ = fs::remove_file(case.path.with_extension("stderr"));
                }
            }
        }
    }

    fn finish(mut self, reason: StopReason) -> Result<CampaignReport, CampaignError> {
        self.report.stop_reason = reason;
        self.report.wall_time_secs = self.start.elapsed().as_secs_f64();
        self.report.write_json(&self.config.out_dir.join("report.json"))?;
        Ok(self.report)
    }
}

/// Runs a fuzz campaign with the oracle called on the campaign thread.
/// Failure-inducing and oracle-error testcases stay in `out_dir`, together
/// with `report.json`.
pub fn run_campaign(config: &CampaignConfig, oracle: &mut dyn Oracle) -> Result<CampaignReport, CampaignError> {
    let mut state = State::new(config)?;
    let reason = loop {
        if let Err(reason) = state.remaining() {
            break reason;
        }
        let case = state.prepare(oracle.preferred_format())?;
        let t = Instant::now();
        let verdict = oracle.call_file(&case.net, &case.path);
        state.report.oracle_secs += t.elapsed().as_secs_f64();
        state.record(case, verdict);
    };
    state.finish(reason)
}

/// Like [`run_campaign`], with up to `jobs` oracle calls in flight.
/// Generation stays sequential, so the testcase sequence matches the
/// single-threaded run.
pub fn run_campaign_concurrent(
    config: &CampaignConfig,
    oracle: &dyn SharedOracle,
    jobs: usize,
) -> Result<CampaignReport, CampaignError> {
    let jobs = jobs.max(1);
    let mut state = State::new(config)?;
    let reason = loop {
        let remaining = match state.remaining() {
            Ok(r) => r,
            Err(reason) => break reason,
        };
        let batch = (jobs as u64).min(remaining) as usize;
        let mut cases = Vec::with_capacity(batch);
        for _ in 0..batch {
            cases.push(state.prepare(oracle.preferred_format())?);
        }
        let t = Instant::now();
        let verdicts: Vec<Verdict> = thread::scope(|scope| {
            let handles: Vec<_> = cases
                .iter()
                .map(|case| scope.spawn(move || oracle.call_shared(&case.net, &case.path)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Verdict::OracleError("oracle thread panicked".into())))
                .collect()
        });
        state.report.oracle_secs += t.elapsed().as_secs_f64();
        for (case, verdict) in cases.into_iter().zip(verdicts) {
            state.record(case, verdict);
        }
    };
    state.finish(reason)
}
