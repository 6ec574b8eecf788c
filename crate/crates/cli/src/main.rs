//! Command-line front end: compile circuits, run sessions, attack and
//! analyze them, and run the built-in acceptance checks.
//!
//! Exit codes: 0 success, 1 the verifier did not accept (or a selftest
//! check failed), 2 bad usage or invalid input, 3 internal failure.
//!
//! Randomness comes from ChaCha8 seeded with `--seed`, so equal arguments
//! produce byte-identical output files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use lchzk::analysis::{compare_real_vs_simulated, histogram, prepare_rho_r, transcript_feature, tv_distance, SimulatorConfig};
use lchzk::bits::BitString;
use lchzk::lch::{compile, history_state, LchInstance, VerificationCircuit};
use lchzk::mc::Proportion;
use lchzk::pauli_clifford::DenseState;
use lchzk::protocol::session::{challenge_average, exact_accept_probability, run_session, split_rngs, MaskSpec};
use lchzk::protocol::transport::MemoryTransport;
use lchzk::protocol::{validate_transcript, Adversary, Backend, ProtocolConfig, ProverMachine, Transcript, Verdict, VerifierMachine};
use lchzk::sampler::{attack_experiment, estimate_beta};
use lchzk::steane::SteaneCode;
use lchzk::{selftest, Error as CoreError};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lchzk", version, about = "Zero-knowledge proofs for local Clifford-Hamiltonian instances")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Concatenation level of the Steane code.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
    t_level: u32,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// honest, xor:<bits>, xor:w<weight> or wrong-term:<j>.
    #[arg(long, global = true, default_value = "honest")]
    adversary: String,
    /// Exact probabilities instead of sampled sessions.
    #[arg(long, global = true)]
    exact: bool,
    /// Commitment scheme: hash or transparent.
    #[arg(long, global = true, default_value = "hash")]
    backend: String,
    /// Also write the prover's key to `<out>.secrets.json`.
    #[arg(long, global = true)]
    export_secrets: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a verification circuit into an instance.
    Compile {
        circuit: PathBuf,
        /// Completeness exponent: yes-instances have energy at most 2^-p.
        #[arg(short, long)]
        p: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run one prover/verifier session and write its transcript.
    Run {
        instance: PathBuf,
        #[command(flatten)]
        witness: WitnessArgs,
        /// Let the verifier choose the challenge instead of flipping coins.
        #[arg(long)]
        direct_challenge: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Estimate the pass rate of an XOR attack on one term.
    Attack {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        term: usize,
        /// Defaults to a state passing the attacked term.
        #[command(flatten)]
        witness: WitnessArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare real and simulated transcripts, or summarize transcript files.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Run the built-in acceptance checks.
    Selftest {
        /// Run only this check.
        #[arg(long)]
        criterion: Option<u8>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Real sessions with a witness against the simulator.
    Zk {
        instance: PathBuf,
        #[command(flatten)]
        witness: WitnessArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Verdict and challenge statistics of transcript files.
    Transcripts {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Second group of files to compare against.
        #[arg(long, num_args = 1..)]
        against: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct WitnessArgs {
    /// bits:<b>, state:<file.json>, history:<b> (needs --circuit) or mixed.
    #[arg(long)]
    witness: Option<String>,
    /// Circuit for history-state witnesses.
    #[arg(long)]
    circuit: Option<PathBuf>,
}

/// Errors caused by the caller: bad arguments or unreadable input files.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Library errors that stem from the supplied configuration.
fn from_core(e: CoreError) -> anyhow::Error {
    match e {
        CoreError::Protocol(_) => anyhow::Error::new(e),
        other => usage(other.to_string()),
    }
}

fn core<T>(r: lchzk::Result<T>) -> Result<T> {
    r.map_err(from_core)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
        usage(format!("{}:{}:{}: {msg}", path.display(), e.line(), e.column()))
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn load_instance(path: &Path) -> Result<LchInstance> {
    let inst: LchInstance = read_json(path)?;
    core(inst.validate()).with_context(|| format!("{} is not a valid instance", path.display()))?;
    Ok(inst)
}

/// `None` is the maximally mixed state.
fn load_witness(args: &WitnessArgs, inst: &LchInstance, default: Option<DenseState>) -> Result<Option<DenseState>> {
    let Some(spec) = &args.witness else { return Ok(default) };
    let state = if spec == "mixed" {
        return Ok(None);
    } else if let Some(b) = spec.strip_prefix("bits:") {
        let bits: BitString = b.parse().map_err(|e| usage(format!("witness bits: {e}")))?;
        core(DenseState::from_bits(&bits))?
    } else if let Some(path) = spec.strip_prefix("state:") {
        read_json(Path::new(path))?
    } else if let Some(b) = spec.strip_prefix("history:") {
        let path = args.circuit.as_deref().ok_or_else(|| usage("history witnesses need --circuit"))?;
        let circuit: VerificationCircuit = read_json(path)?;
        core(circuit.validate())?;
        let bits: BitString = b.parse().map_err(|e| usage(format!("witness bits: {e}")))?;
        core(history_state(&circuit, &core(DenseState::from_bits(&bits))?))?
    } else {
        return Err(usage(format!("unknown witness spec {spec:?}")));
    };
    if state.k() != inst.n {
        return Err(usage(format!("witness has {} qubits, instance has {}", state.k(), inst.n)));
    }
    Ok(Some(state))
}

fn parse_common(c: &Common) -> Result<(Adversary, Backend)> {
    let adversary: Adversary = c.adversary.parse().map_err(|e: CoreError| usage(format!("--adversary: {e}")))?;
    let backend: Backend = c.backend.parse().map_err(|e: CoreError| usage(format!("--backend: {e}")))?;
    Ok((adversary, backend))
}

fn secrets_path(out: Option<&Path>) -> Result<PathBuf> {
    let out = out.ok_or_else(|| usage("--export-secrets needs --out"))?;
    let mut name = out.as_os_str().to_owned();
    name.push(".secrets.json");
    Ok(PathBuf::from(name))
}

fn cmd_compile(circuit: &Path, p: u32, out: Option<&Path>) -> Result<ExitCode> {
    let v: VerificationCircuit = read_json(circuit)?;
    core(v.validate()).with_context(|| format!("{}", circuit.display()))?;
    let inst = core(compile(&v, p))?;
    emit_json(out, &inst)?;
    let mut summary = format!("{} terms on {} qubits", inst.m(), inst.n);
    if let Some(meta) = &inst.metadata {
        let c = &meta.term_counts;
        summary += &format!(
            " (input {}, output {}, clock {}, propagation {})",
            c.input, c.output, c.clock, c.propagation
        );
        if let Some(g) = meta.ground_energy {
            summary += &format!("; ground energy {g:.6e}");
        }
        if let Some(gap) = meta.spectral_gap {
            summary += &format!("; spectral gap {gap:.6e}");
        }
    }
    summary += &format!("; alpha {:.6e}, beta {:.6e}", inst.alpha(), inst.beta());
    eprintln!("{summary}");
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ExactReport {
    accept_probability: f64,
    per_term: Vec<f64>,
    t_level: u32,
}

fn cmd_run(common: &Common, inst_path: &Path, wargs: &WitnessArgs, direct: bool, out: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(inst_path)?;
    let (adversary, backend) = parse_common(common)?;
    let witness = load_witness(wargs, &inst, None)?;
    if common.exact {
        if adversary != Adversary::Honest {
            return Err(usage("--exact applies to the honest verifier only"));
        }
        let per_term: Vec<f64> = match &witness {
            Some(w) => {
                let code = core(SteaneCode::new(common.t_level))?;
                (0..inst.m())
                    .map(|j| {
                        let ts = lchzk::sampler::TermSampler::new(&inst.terms[j], &code)?;
                        Ok(1.0 - ts.logical_distribution(w)?[0])
                    })
                    .collect::<lchzk::Result<_>>()
                    .map_err(from_core)?
            }
            // ⟨H_j, I/2^n⟩ = 2^{−k_j}
            None => inst.terms.iter().map(|t| 1.0 - 0.5f64.powi(t.arity() as i32)).collect(),
        };
        let accept_probability = match &witness {
            Some(w) => core(exact_accept_probability(&inst, w, common.t_level))?,
            None => core(challenge_average(inst.m(), |j| Ok(per_term[j])))?,
        };
        emit_json(out, &ExactReport { accept_probability, per_term, t_level: common.t_level })?;
        eprintln!("exact acceptance probability {accept_probability:.12}");
        return Ok(ExitCode::SUCCESS);
    }
    if backend == Backend::Transparent && !common.export_secrets {
        // transparent commitments carry the opening in the clear
        return Err(usage("--backend transparent publishes the key opening; pass --export-secrets to allow it"));
    }
    let cfg = ProtocolConfig { t_level: common.t_level, backend, direct_challenge: direct };
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    // same draws as `run_protocol`, keeping the prover's key reachable
    let (mut prng, vrng) = split_rngs(&mut rng);
    let logical = match witness {
        Some(w) => w,
        None => core(lchzk::protocol::session::random_basis_state(inst.n, &mut prng))?,
    };
    let mut prover = core(ProverMachine::new(&inst, logical, cfg, prng))?;
    let key = prover.key().clone();
    let mut verifier = core(VerifierMachine::new(&inst, cfg, adversary, vrng))?;
    let mut transport = MemoryTransport::new();
    run_session(&mut prover, &mut verifier, &mut transport).map_err(anyhow::Error::new)?;
    let transcript = transport.into_transcript();
    validate_transcript(&transcript).map_err(anyhow::Error::new)?;
    emit(out, &transcript.to_jsonl())?;
    if common.export_secrets {
        let path = secrets_path(out)?;
        let mut text = serde_json::to_string_pretty(&key)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let verdict = transcript.verdict();
    eprintln!("verdict: {}", verdict_name(verdict));
    Ok(if verdict == Some(Verdict::Accept) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Accept) => "accept",
        Some(Verdict::Reject) => "reject",
        Some(Verdict::Abort) => "abort",
        None => "none",
    }
}

#[derive(Serialize)]
struct BetaEstimate {
    estimate: f64,
    sigma: f64,
    ci95: f64,
}

#[derive(Serialize)]
struct AttackOutput {
    term: usize,
    t_level: u32,
    #[serde(flatten)]
    report: lchzk::sampler::AttackReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<BetaEstimate>,
}

fn cmd_attack(common: &Common, inst_path: &Path, term: usize, wargs: &WitnessArgs, out: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(inst_path)?;
    let (adversary, _) = parse_common(common)?;
    let t = inst.terms.get(term).ok_or_else(|| usage(format!("term {term} out of range for {} terms", inst.m())))?;
    let code = core(SteaneCode::new(common.t_level))?;
    let len = 2 * t.arity() * code.block_len();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let v = match adversary {
        Adversary::Xor(MaskSpec::Bits(b)) => b,
        Adversary::Xor(MaskSpec::Weight(w)) if w <= len => {
            let mut b = BitString::zeros(len);
            for p in sample(&mut rng, len, w) {
                b.set(p, true);
            }
            b
        }
        Adversary::Xor(MaskSpec::Weight(w)) => return Err(usage(format!("mask weight {w} exceeds {len} bits"))),
        _ => return Err(usage("attack needs --adversary xor:<bits> or xor:w<weight>")),
    };
    if v.len() != len {
        return Err(usage(format!("mask has {} bits, term {term} needs {len}", v.len())));
    }
    let default = core(prepare_rho_r(&inst, term))?;
    let psi = match load_witness(wargs, &inst, Some(default))? {
        Some(s) => s,
        None => return Err(usage("attack needs a pure witness")),
    };
    let report = core(attack_experiment(&psi, t, &code, &v, common.samples, common.seed))?;
    let beta = if v.weight() > 0 && v.weight() < code.min_distance() {
        let b: Proportion = core(estimate_beta(&v, t, &code, common.samples, common.seed ^ 0xbe7a))?;
        Some(BetaEstimate { estimate: b.estimate(), sigma: b.sigma(), ci95: b.ci95() })
    } else {
        None
    };
    eprintln!(
        "q_hat {:.4} ± {:.4}{}",
        report.q_hat,
        report.ci95,
        report.bound.map_or(String::new(), |b| format!(" (bound {b:.4})"))
    );
    emit_json(out, &AttackOutput { term, t_level: common.t_level, report, beta })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze_zk(common: &Common, inst_path: &Path, wargs: &WitnessArgs, out: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(inst_path)?;
    let (adversary, _) = parse_common(common)?;
    let witness = load_witness(wargs, &inst, None)?.ok_or_else(|| usage("analyze zk needs a pure --witness"))?;
    let cfg = SimulatorConfig { instance: inst, adversary, samples: common.samples, t_level: common.t_level };
    let rep = core(compare_real_vs_simulated(&witness, &cfg, common.seed))?;
    eprintln!("TV(real, simulated) = {:.4} over {} samples", rep.tv, rep.samples);
    emit_json(out, &rep)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TranscriptSummary {
    transcripts: usize,
    accept: Proportion,
    accept_rate: f64,
    accept_ci95: f64,
    features: std::collections::BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tv_against: Option<f64>,
}

fn load_transcripts(files: &[PathBuf]) -> Result<Vec<Transcript>> {
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).map_err(|e| usage(format!("{}: {e}", f.display())))?;
            let t = Transcript::from_jsonl(&text).map_err(|e| usage(format!("{}: {e}", f.display())))?;
            validate_transcript(&t).map_err(|e| usage(format!("{}: {e}", f.display())))?;
            Ok(t)
        })
        .collect()
}

fn cmd_analyze_transcripts(files: &[PathBuf], against: &[PathBuf], out: Option<&Path>) -> Result<ExitCode> {
    let ts = load_transcripts(files)?;
    let accept = Proportion::new(ts.iter().filter(|t| t.accepted()).count(), ts.len());
    let features = histogram(ts.iter().map(transcript_feature));
    let tv_against = if against.is_empty() {
        None
    } else {
        let other = histogram(load_transcripts(against)?.iter().map(transcript_feature));
        Some(tv_distance(&features, &other))
    };
    let summary = TranscriptSummary {
        transcripts: ts.len(),
        accept_rate: accept.estimate(),
        accept_ci95: accept.ci95(),
        accept,
        features,
        tv_against,
    };
    emit_json(out, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(seed: u64, criterion: Option<u8>, out: Option<&Path>) -> Result<ExitCode> {
    let ids = match criterion {
        Some(id) if selftest::criterion_ids().contains(&id) => vec![id],
        Some(id) => return Err(usage(format!("no check numbered {id}"))),
        None => selftest::criterion_ids(),
    };
    let start = std::time::Instant::now();
    let mut reports = Vec::new();
    for id in ids {
        let rep = selftest::run_criterion(id, seed).expect("listed id");
        println!("{:>2} {:<36} {}  {}", rep.id, rep.name, if rep.passed { "PASS" } else { "FAIL" }, rep.detail);
        eprintln!("   {:.2}s", rep.seconds);
        reports.push(rep);
    }
    let total = start.elapsed().as_secs_f64();
    let all = reports.iter().all(|r| r.passed) && total < selftest::SUITE_SECONDS;
    eprintln!("{} / {} passed in {total:.1}s", reports.iter().filter(|r| r.passed).count(), reports.len());
    if let Some(p) = out {
        emit_json(Some(p), &reports)?;
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let c = &cli.common;
    if c.export_secrets && !matches!(cli.command, Command::Run { .. }) {
        return Err(usage("--export-secrets applies to run only"));
    }
    match &cli.command {
        Command::Compile { circuit, p, out } => cmd_compile(circuit, *p, out.as_deref()),
        Command::Run { instance, witness, direct_challenge, out } => {
            cmd_run(c, instance, witness, *direct_challenge, out.as_deref())
        }
        Command::Attack { instance, term, witness, out } => cmd_attack(c, instance, *term, witness, out.as_deref()),
        Command::Analyze { what: AnalyzeCommand::Zk { instance, witness, out } } => {
            cmd_analyze_zk(c, instance, witness, out.as_deref())
        }
        Command::Analyze { what: AnalyzeCommand::Transcripts { files, against, out } } => {
            cmd_analyze_transcripts(files, against, out.as_deref())
        }
        Command::Selftest { criterion, out } => cmd_selftest(c.seed, *criterion, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
