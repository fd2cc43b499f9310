use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gatefuzz::generators::{
    conflicting_xor_core, embed_core, enumerate_topologies, run_campaign, run_campaign_concurrent, CampaignConfig,
    CampaignReport, ComposedParams, Generator, Method, RandomParams, TopologyParams,
};
use gatefuzz::io::{read_file, write_dot, write_file};
use gatefuzz::minimizer::{minimize, verify_minimal, MinimizeError, MinimizeParams, Size};
use gatefuzz::oracle::{
    builtin_aut, check_equivalence, make_cec_oracle, CecOracle, CecResult, DefectKind, ExternalOracle,
    FailurePolicy, Oracle, SharedOracle, Verdict, DEFAULT_SIM_LIMIT,
};
use gatefuzz::{FileFormat, Network, NetworkKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_PASS: u8 = 0;
const EXIT_DEFECT: u8 = 1;
const EXIT_INFRA: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser)]
#[command(name = "gatefuzz", version, about = "Fuzz testing and testcase minimization for logic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate testcases and run them through an oracle.
    Fuzz(FuzzArgs),
    /// Reduce a failure-inducing testcase.
    Minimize(MinimizeArgs),
    /// Enumerate DAG topologies.
    Topo(TopoArgs),
    /// Check two networks for equivalence by simulation.
    Cec(CecArgs),
    /// Write a network as Graphviz DOT.
    Dot(DotArgs),
    /// Write generated networks to files.
    Gen(GenArgs),
    /// Run a builtin application on a file (for use as an external command).
    #[command(hide = true)]
    Aut(AutArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Random,
    Topology,
    Composed,
}

#[derive(Args)]
struct OracleArgs {
    /// Builtin application under test, wrapped in an equivalence check.
    #[arg(long, conflicts_with = "oracle_cmd")]
    builtin: Option<String>,
    /// External command; `{}` is replaced by the testcase path.
    #[arg(long, visible_alias = "cmd")]
    oracle_cmd: Option<String>,
    /// Only crashes (signals) count as defects, not nonzero exits.
    #[arg(long, requires = "oracle_cmd")]
    strict: bool,
    /// Regex on command output that marks a defect.
    #[arg(long, requires = "oracle_cmd")]
    pattern: Option<String>,
    /// Report a timed-out call as a defect instead of an oracle error.
    #[arg(long)]
    hang_as_defect: bool,
    /// Per-call timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    call_timeout: f64,
    /// Largest PI count checked exhaustively by the builtin oracle.
    #[arg(long, default_value_t = DEFAULT_SIM_LIMIT)]
    sim_limit: usize,
}

enum OracleChoice {
    Cec(CecOracle),
    External(ExternalOracle),
}

impl OracleChoice {
    fn build(args: &OracleArgs, format: Option<FileFormat>, kind: NetworkKind, workdir: &Path) -> Result<OracleChoice> {
        let timeout = Duration::try_from_secs_f64(args.call_timeout).context("invalid --call-timeout")?;
        if let Some(name) = &args.builtin {
            let aut = builtin_aut(name)?;
            return Ok(OracleChoice::Cec(
                make_cec_oracle(aut, args.sim_limit).with_timeout(timeout, args.hang_as_defect),
            ));
        }
        let Some(template) = &args.oracle_cmd else {
            bail!("an oracle is required: pass --builtin NAME or --oracle-cmd TEMPLATE");
        };
        let pattern = args
            .pattern
            .as_deref()
            .map(regex::Regex::new)
            .transpose()
            .context("invalid --pattern")?;
        let policy = FailurePolicy {
            strict: args.strict,
            pattern,
            hang_as_defect: args.hang_as_defect,
        };
        let format = format.unwrap_or_else(|| FileFormat::default_for(kind));
        Ok(OracleChoice::External(
            ExternalOracle::new(template.clone(), format, workdir)
                .with_policy(policy)
                .with_timeout(timeout),
        ))
    }

    fn oracle(&mut self) -> &mut dyn Oracle {
        match self {
            OracleChoice::Cec(o) => o,
            OracleChoice::External(o) => o,
        }
    }

    fn shared(&self) -> &dyn SharedOracle {
        match self {
            OracleChoice::Cec(o) => o,
            OracleChoice::External(o) => o,
        }
    }
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "random")]
    method: MethodName,
    /// Initial PI count (random, composed).
    #[arg(long)]
    n0: Option<usize>,
    /// Initial gate count (random) or vertex count (topology).
    #[arg(long)]
    m0: Option<usize>,
    /// Tests per configuration (per topology for the topology method).
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    delta_n: Option<usize>,
    #[arg(long)]
    delta_m: Option<usize>,
    #[arg(long)]
    r_l: Option<f64>,
    #[arg(long)]
    r_h: Option<f64>,
    #[arg(long)]
    m_l: Option<usize>,
    #[arg(long)]
    m_h: Option<usize>,
    #[arg(long)]
    c0: Option<usize>,
    #[arg(long)]
    delta_c: Option<usize>,
}

impl MethodArgs {
    fn method(&self) -> Method {
        match self.method {
            MethodName::Random => {
                let d = RandomParams::default();
                Method::Random(RandomParams {
                    n0: self.n0.unwrap_or(d.n0),
                    m0: self.m0.unwrap_or(d.m0),
                    k: self.k.unwrap_or(d.k),
                    delta_n: self.delta_n.unwrap_or(d.delta_n),
                    delta_m: self.delta_m.unwrap_or(d.delta_m),
                })
            }
            MethodName::Topology => {
                let d = TopologyParams::default();
                Method::Topology(TopologyParams {
                    m0: self.m0.unwrap_or(d.m0),
                    r_l: self.r_l.unwrap_or(d.r_l),
                    r_h: self.r_h.unwrap_or(d.r_h),
                    k: self.k.unwrap_or(d.k),
                })
            }
            MethodName::Composed => {
                let d = ComposedParams::default();
                Method::Composed(ComposedParams {
                    m_l: self.m_l.unwrap_or(d.m_l),
                    m_h: self.m_h.unwrap_or(d.m_h),
                    c0: self.c0.unwrap_or(d.c0),
                    n0: self.n0.unwrap_or(d.n0),
                    k: self.k.unwrap_or(d.k),
                    delta_n: self.delta_n.unwrap_or(d.delta_n),
                    delta_c: self.delta_c.unwrap_or(d.delta_c),
                })
            }
        }
    }
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value = "aig")]
    kind: NetworkKind,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test budget.
    #[arg(long)]
    max_tests: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Keep going after the first failure.
    #[arg(long)]
    keep_going: bool,
    /// Keep passing testcases as well.
    #[arg(long)]
    keep_all: bool,
    /// Testcase file format.
    #[arg(long)]
    format: Option<FileFormat>,
    /// Decompose XAG/MIG testcases into AIGs before testing.
    #[arg(long)]
    lower_to_aig: bool,
    /// Oracle calls in flight.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Minimize every failure-inducing testcase after the campaign.
    #[arg(long)]
    minimize_failures: bool,
    /// Output directory.
    #[arg(long, short, env = "GATEFUZZ_WORKDIR", default_value = "gatefuzz-out")]
    out: PathBuf,
}

#[derive(Args)]
struct MinimizeArgs {
    input: PathBuf,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Minimized testcase; defaults to `<input>.min.<ext>`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// JSON trace; defaults to the output path with `.trace.json`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Check 1-minimality of the result.
    #[arg(long)]
    verify: bool,
    /// Stop after one pass of the reduction stages.
    #[arg(long)]
    single_pass: bool,
    /// Overwrite this file with the current testcase after each kept step.
    #[arg(long)]
    keep_intermediates: Option<PathBuf>,
    /// Format of the input and output files.
    #[arg(long)]
    format: Option<FileFormat>,
    /// Scratch directory for external oracle calls.
    #[arg(long, env = "GATEFUZZ_WORKDIR")]
    workdir: Option<PathBuf>,
}

#[derive(Args)]
struct TopoArgs {
    /// Vertex count.
    #[arg(short)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    arity: usize,
    /// Print only the number of topologies.
    #[arg(long)]
    count: bool,
    /// One JSON document per line.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CecArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SIM_LIMIT)]
    sim_limit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DotArgs {
    input: PathBuf,
    /// Output file; stdout when omitted.
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "aig")]
    kind: NetworkKind,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    format: Option<FileFormat>,
    /// Write one seeded testcase: a known three-input core inside a random
    /// wrapper of `--pis` inputs and `--gates` gates.
    #[arg(long)]
    embed_core: bool,
    #[arg(long, default_value_t = 49)]
    pis: usize,
    #[arg(long, default_value_t = 272)]
    gates: usize,
    #[arg(long, short, env = "GATEFUZZ_WORKDIR", default_value = "gatefuzz-out")]
    out: PathBuf,
}

#[derive(Args)]
struct AutArgs {
    name: String,
    input: PathBuf,
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Minimize(a) => cmd_minimize(a),
        Command::Topo(a) => cmd_topo(a),
        Command::Cec(a) => cmd_cec(a),
        Command::Dot(a) => cmd_dot(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Aut(a) => cmd_aut(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INFRA)
        }
    }
}

fn check_format(format: Option<FileFormat>, kind: NetworkKind) -> Result<()> {
    if let Some(f) = format {
        if !f.is_readable() {
            bail!("{f} cannot be used for testcases");
        }
        if !f.supports(kind) {
            bail!("{f} cannot hold {kind} networks (use --lower-to-aig or another format)");
        }
    }
    Ok(())
}

fn print_campaign(report: &CampaignReport) {
    for (name, c) in &report.configurations {
        println!(
            "  {name:<24} tests {:>8}  failures {:>5}  oracle errors {:>5}",
            c.tests, c.failures, c.oracle_errors
        );
    }
    println!();
    println!("{:<10} {:<5} {:>10} {:>7} {:>10}", "Method", "Kind", "#Tests", "#FITs", "Time (s)");
    println!(
        "{:<10} {:<5} {:>10} {:>7} {:>10.2}",
        report.method.name(),
        report.kind.to_string(),
        report.tests_run,
        report.failures.len(),
        report.wall_time_secs
    );
    for f in &report.failures {
        println!("failure #{} ({}): {} -> {}", f.seq, f.configuration, f.verdict, f.path.display());
    }
    for e in report.oracle_errors.iter().take(5) {
        eprintln!("oracle error #{}: {}", e.seq, e.verdict);
    }
}

fn cmd_fuzz(args: FuzzArgs) -> Result<u8> {
    let tested_kind = if args.lower_to_aig { NetworkKind::Aig } else { args.kind };
    check_format(args.format, tested_kind)?;
    let method = args.method.method();
    let mut config = CampaignConfig::new(args.kind, method, args.seed, &args.out);
    config.max_tests = args.max_tests;
    config.timeout = args
        .timeout
        .map(Duration::try_from_secs_f64)
        .transpose()
        .context("invalid --timeout")?;
    if config.max_tests.is_none() && config.timeout.is_none() {
        config.max_tests = Some(1000);
    }
    config.stop_on_first = !args.keep_going;
    config.keep_all = args.keep_all;
    config.format = args.format;
    config.lower_to_aig = args.lower_to_aig;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut oracle = OracleChoice::build(&args.oracle, args.format, tested_kind, &args.out)?;

    let report = if args.jobs > 1 {
        run_campaign_concurrent(&config, oracle.shared(), args.jobs)?
    } else {
        run_campaign(&config, oracle.oracle())?
    };
    print_campaign(&report);

    if args.minimize_failures {
        for f in &report.failures {
            let net = read_file(&f.path, None)?;
            let params = MinimizeParams {
                seed: args.seed,
                ..MinimizeParams::default()
            };
            match minimize(&net, oracle.oracle(), &params) {
                Ok((core, trace)) => {
                    let out = sibling(&f.path, "min");
                    write_file(&core, &out, None)?;
                    fs::write(out.with_extension("trace.json"), trace.to_json())?;
                    println!(
                        "minimized #{}: {} -> {} in {} calls -> {}",
                        f.seq,
                        Size::of(&net),
                        Size::of(&core),
                        trace.oracle_call_count,
                        out.display()
                    );
                }
                Err(e) => eprintln!("minimizing #{} failed: {e}", f.seq),
            }
        }
    }
    println!("report: {}", args.out.join("report.json").display());

    Ok(if !report.failures.is_empty() {
        EXIT_DEFECT
    } else if !report.oracle_errors.is_empty() {
        eprintln!("{} oracle call(s) failed", report.oracle_errors.len());
        EXIT_INFRA
    } else {
        EXIT_PASS
    })
}

/// `dir/name.ext` -> `dir/name.<tag>.ext`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match path.extension() {
        Some(ext) => path.with_file_name(format!("{stem}.{tag}.{}", ext.to_string_lossy())),
        None => path.with_file_name(format!("{stem}.{tag}")),
    }
}

fn cmd_minimize(args: MinimizeArgs) -> Result<u8> {
    let input = read_file(&args.input, args.format).with_context(|| format!("cannot read {}", args.input.display()))?;
    let format = args
        .format
        .or_else(|| FileFormat::from_path(&args.input))
        .unwrap_or_else(|| FileFormat::default_for(input.kind()));
    let workdir = match &args.workdir {
        Some(d) => d.clone(),
        None => std::env::temp_dir(),
    };
    fs::create_dir_all(&workdir)?;
    let mut oracle = OracleChoice::build(&args.oracle, Some(format), input.kind(), &workdir)?;
    let output = args.output.clone().unwrap_or_else(|| sibling(&args.input, "min"));
    let trace_path = args.trace.clone().unwrap_or_else(|| output.with_extension("trace.json"));
    let params = MinimizeParams {
        seed: args.seed,
        repeat_to_fixpoint: !args.single_pass,
        keep_intermediates: args.keep_intermediates.clone(),
        ..MinimizeParams::default()
    };

    let start = Instant::now();
    let (core, trace) = match minimize(&input, oracle.oracle(), &params) {
        Ok(r) => r,
        Err(MinimizeError::InitialNotFailing(v)) => {
            eprintln!("the input does not exhibit a defect under this oracle ({v}); nothing to minimize");
            return Ok(EXIT_PRECONDITION);
        }
        Err(e) => return Err(e.into()),
    };
    let secs = start.elapsed().as_secs_f64();
    write_file(&core, &output, Some(format))?;
    fs::write(&trace_path, trace.to_json())?;

    let before = Size::of(&input);
    let after = Size::of(&core);
    println!(
        "{:>8} {:>6} {:>6} | {:>8} {:>6} {:>6} | {:>8} {:>9}",
        "Gates", "PIs", "POs", "Gates", "PIs", "POs", "#Calls", "Time (s)"
    );
    println!(
        "{:>8} {:>6} {:>6} | {:>8} {:>6} {:>6} | {:>8} {:>9.3}",
        before.gates, before.pis, before.pos, after.gates, after.pis, after.pos, trace.oracle_call_count, secs
    );
    println!("minimized: {}", output.display());
    println!("trace: {}", trace_path.display());

    if args.verify {
        let check = verify_minimal(&core, oracle.oracle())?;
        if check.minimal {
            println!("1-minimal: yes ({} calls)", check.oracle_calls);
        } else {
            let witness = check.witness.map(|op| op.to_string()).unwrap_or_default();
            println!("1-minimal: no (still failing after {witness})");
        }
    }
    Ok(EXIT_PASS)
}

fn cmd_topo(args: TopoArgs) -> Result<u8> {
    if args.m == 0 || args.arity < 2 {
        bail!("topologies need -m >= 1 and --arity >= 2");
    }
    let list = enumerate_topologies(args.m, args.arity);
    if args.count {
        println!("{}", list.len());
        return Ok(EXIT_PASS);
    }
    let mut out = std::io::stdout().lock();
    for (i, t) in list.iter().enumerate() {
        if args.json {
            writeln!(out, "{}", serde_json::to_string(t)?)?;
            continue;
        }
        let vertices: Vec<String> = t
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, x)| {
                let mut parts: Vec<String> = x.children.iter().map(|c| format!("v{c}")).collect();
                parts.extend(std::iter::repeat_n("_".to_string(), x.hanging));
                format!("v{v}({})", parts.join(","))
            })
            .collect();
        writeln!(out, "{i}: {}", vertices.join(" "))?;
    }
    Ok(EXIT_PASS)
}

fn read_net(path: &Path) -> Result<Network> {
    read_file(path, None).with_context(|| format!("cannot read {}", path.display()))
}

fn cmd_cec(args: CecArgs) -> Result<u8> {
    let a = read_net(&args.a)?;
    let b = read_net(&args.b)?;
    match check_equivalence(&a, &b, args.sim_limit, args.seed) {
        CecResult::Equivalent => {
            println!("EQUIVALENT");
            Ok(EXIT_PASS)
        }
        CecResult::NotEquivalent { assignment, output } => {
            let bits: String = assignment.iter().map(|&b| if b { '1' } else { '0' }).collect();
            println!("NOT EQUIVALENT");
            println!("counterexample: {bits} (PI 0 first), output {output} differs");
            Ok(EXIT_DEFECT)
        }
        CecResult::Inconclusive { patterns } => {
            println!("INCONCLUSIVE (no difference in {patterns} random patterns)");
            Ok(EXIT_PASS)
        }
        CecResult::InterfaceMismatch { reason } => Err(anyhow!("interfaces differ: {reason}")),
    }
}

fn cmd_dot(args: DotArgs) -> Result<u8> {
    let net = read_net(&args.input)?;
    let text = write_dot(&net);
    match args.output {
        Some(path) => fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(EXIT_PASS)
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    if args.embed_core {
        let core = conflicting_xor_core().converted(args.kind);
        if args.pis < core.num_pis() {
            bail!("--pis must be at least {}", core.num_pis());
        }
        let net = embed_core(&core, args.pis, args.gates, &mut ChaCha8Rng::seed_from_u64(args.seed));
        check_format(args.format, net.kind())?;
        let format = args.format.unwrap_or_else(|| FileFormat::default_for(net.kind()));
        let path = args.out.join(format!("seeded_{}.{}", args.seed, format.extension()));
        write_file(&net, &path, Some(format))?;
        println!("{} ({})", path.display(), Size::of(&net));
        return Ok(EXIT_PASS);
    }
    check_format(args.format, args.kind)?;
    let format = args.format.unwrap_or_else(|| FileFormat::default_for(args.kind));
    let mut generator = Generator::new(args.kind, args.method.method(), args.seed)?;
    for i in 0..args.count {
        let (net, configuration) = generator.next_network()?;
        let path = args.out.join(format!("gen_{i}.{}", format.extension()));
        write_file(&net, &path, Some(format))?;
        println!("{} [{}] {}", path.display(), configuration.0, Size::of(&net));
    }
    Ok(EXIT_PASS)
}

/// Behaves like an external tool with the builtin's defect: a crash aborts
/// the process, other defects exit with status 1.
fn cmd_aut(args: AutArgs) -> Result<u8> {
    let net = read_net(&args.input)?;
    let timeout = Duration::try_from_secs_f64(args.timeout).context("invalid --timeout")?;
    let mut oracle = make_cec_oracle(builtin_aut(&args.name)?, DEFAULT_SIM_LIMIT).with_timeout(timeout, true);
    match oracle.call(&net) {
        Verdict::DefectObserved(d) if d.kind == DefectKind::Crash => {
            eprintln!("{}: {}", args.name, d.detail);
            std::process::abort();
        }
        Verdict::DefectObserved(d) => {
            eprintln!("{}: {} ({})", args.name, d.kind, d.detail);
            Ok(EXIT_DEFECT)
        }
        Verdict::Pass { .. } => Ok(EXIT_PASS),
        Verdict::OracleError(e) => Err(anyhow!(e)),
    }
}
