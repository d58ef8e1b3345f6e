//! `zkdps` — verifiable decentralized inference from the command line.
//!
//! Subcommands: `commit` (model → weight-commitment container), `prove`
//! (model + input → proof container), `verify` (commitments + proof →
//! report), `infer` (plain fixed-point forward pass, optionally split at a
//! cut with boundary noise), `simulate` (scenario file → session log and
//! verdict), `consensus` (redundant outputs file → voting or CDV result),
//! and `table` (emit a quantized lookup table).
//!
//! Exit codes: 0 success, 1 verification/consensus failure, 2 usage error.
//! With `--seed N` every output is deterministic; without it, entropy.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use zkdps::algebra::{CurveGroup, CurveProfile};
use zkdps::commit::Generators;
use zkdps::consensus::{
    canonical_output, cdv_check, decide, output_digest, ConsensusConfig, ConsensusStatus,
    DistributionStats, NodeOutput,
};
use zkdps::dps::{
    commit_shard, prove_shard, required_capacity, verify_shard, Architecture, ShardCommitment,
    ShardProof,
};
use zkdps::gadgets::{TableFn, TableSpec};
use zkdps::model::{
    dequantize, forward, privatize_embedding, resume_forward, split_forward, tensor_from_text,
    tensor_to_text, ModelSpec,
};
use zkdps::netsim::session::{run_session, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "zkdps",
    version,
    about = "Verifiable decentralized inference: commitments, proofs, consensus, and deployment simulation"
)]
struct Cli {
    /// Curve profile: `test` (tiny, fast, insecure) or `main` (P-192).
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,
    /// Seed for all randomness; omit to draw from OS entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit line-delimited machine-readable records instead of prose.
    #[arg(long, global = true)]
    report: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Test,
    Main,
}

impl ProfileArg {
    fn profile(self) -> CurveProfile {
        match self {
            ProfileArg::Test => CurveProfile::builtin_test(),
            ProfileArg::Main => CurveProfile::builtin_main(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ProfileArg::Test => "test",
            ProfileArg::Main => "main",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProofModeArg {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Commit to a model's weights and write the commitment container.
    Commit {
        /// Model file (text format).
        #[arg(long)]
        model: PathBuf,
        /// Output path for the commitment container.
        #[arg(long)]
        out: PathBuf,
    },
    /// Prove an inference and write the proof container.
    Prove {
        #[arg(long)]
        model: PathBuf,
        /// Input tensor file (raw quantized integers, or reals to quantize).
        #[arg(long)]
        input: PathBuf,
        /// Output path for the proof container.
        #[arg(long)]
        out: PathBuf,
        /// Also write the commitment container the proof binds to.
        #[arg(long)]
        commit_out: Option<PathBuf>,
    },
    /// Verify a proof container against a commitment container.
    Verify {
        /// Model file; only its public architecture (shapes, scale,
        /// activation tables) is used.
        #[arg(long)]
        model: PathBuf,
        /// Commitment container from `commit` or `prove --commit-out`.
        #[arg(long)]
        commit: PathBuf,
        /// Proof container from `prove`.
        #[arg(long)]
        proof: PathBuf,
    },
    /// Run the plain fixed-point forward pass.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Write the output tensor here instead of stdout prose.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Split after layer K, hand off the intermediate, and resume.
        #[arg(long)]
        cut: Option<usize>,
        /// Privacy budget for boundary noise at the cut (requires --cut).
        #[arg(long)]
        epsilon: Option<f64>,
        /// L1 sensitivity paired with --epsilon.
        #[arg(long, default_value_t = 1.0)]
        sensitivity: f64,
    },
    /// Play a deployment scenario and print its event log.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Scenario file (TOML: nodes, redundancy, proof mode, seed).
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's replication factor.
        #[arg(long)]
        redundancy: Option<usize>,
        /// Override the scenario's shard count.
        #[arg(long)]
        shards: Option<usize>,
        /// Override the scenario's proof mode.
        #[arg(long, value_enum)]
        proof_mode: Option<ProofModeArg>,
    },
    /// Tally redundant outputs: exact-match voting, or a z-test with --cdv.
    Consensus {
        /// Outputs file: one line per replica, `node_id v1 v2 …`.
        #[arg(long)]
        outputs: PathBuf,
        /// Vote fraction required to verify.
        #[arg(long, default_value_t = 0.51)]
        quorum: f64,
        /// Expected replication factor (defaults to the line count).
        #[arg(long)]
        redundancy: Option<usize>,
        /// Statistical mode: compare the pooled sample against a reference
        /// distribution instead of exact-match voting.
        #[arg(long)]
        cdv: bool,
        /// Reference mean for --cdv.
        #[arg(long, allow_hyphen_values = true)]
        ref_mean: Option<f64>,
        /// Reference standard deviation for --cdv.
        #[arg(long)]
        ref_std: Option<f64>,
        /// z-threshold multiplier for --cdv.
        #[arg(long, default_value_t = 3.0)]
        multiplier: f64,
    },
    /// Emit a quantized lookup table for a built-in nonlinear function.
    Table {
        /// One of: softmax-exp, sigmoid, gelu, rmsnorm-rsqrt.
        #[arg(long = "fn")]
        function: String,
        /// Inclusive quantized domain bounds.
        #[arg(long, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
        /// Input/output quantization scales.
        #[arg(long)]
        in_scale: u64,
        #[arg(long)]
        out_scale: u64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad invocation, unreadable file, malformed input: exit 2.
    Usage(String),
    /// A statement failed to verify: exit 1.
    Verification(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelSpec, Failure> {
    let model = ModelSpec::from_text(&read_text(path)?).map_err(usage)?;
    model.validate().map_err(usage)?;
    Ok(model)
}

fn load_input(path: &Path, model: &ModelSpec) -> Result<Vec<i64>, Failure> {
    let x = tensor_from_text(&read_text(path)?, model.scale, model.q_bits).map_err(usage)?;
    if x.len() != model.input_dim() {
        return Err(Failure::Usage(format!(
            "input has {} values, model expects {}",
            x.len(),
            model.input_dim()
        )));
    }
    Ok(x)
}

fn make_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_os_rng(),
    }
}

fn group_for(profile: ProfileArg) -> Result<CurveGroup, Failure> {
    profile.profile().group().map_err(usage)
}

fn csv<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run(cli: Cli) -> Result<(), Failure> {
    let profile = cli.profile.unwrap_or(ProfileArg::Test);
    match cli.command {
        Command::Commit { model, out } => cmd_commit(&model, &out, profile, cli.seed, cli.report),
        Command::Prove {
            model,
            input,
            out,
            commit_out,
        } => cmd_prove(
            &model,
            &input,
            &out,
            commit_out.as_deref(),
            profile,
            cli.seed,
            cli.report,
        ),
        Command::Verify {
            model,
            commit,
            proof,
        } => cmd_verify(&model, &commit, &proof, profile, cli.report),
        Command::Infer {
            model,
            input,
            out,
            cut,
            epsilon,
            sensitivity,
        } => cmd_infer(
            &model,
            &input,
            out.as_deref(),
            cut,
            epsilon,
            sensitivity,
            cli.seed,
            cli.report,
        ),
        Command::Simulate {
            model,
            input,
            scenario,
            redundancy,
            shards,
            proof_mode,
        } => cmd_simulate(
            &model,
            &input,
            &scenario,
            redundancy,
            shards,
            proof_mode,
            cli.profile,
            cli.seed,
        ),
        Command::Consensus {
            outputs,
            quorum,
            redundancy,
            cdv,
            ref_mean,
            ref_std,
            multiplier,
        } => cmd_consensus(
            &outputs, quorum, redundancy, cdv, ref_mean, ref_std, multiplier, cli.report,
        ),
        Command::Table {
            function,
            lo,
            hi,
            in_scale,
            out_scale,
            out,
        } => cmd_table(&function, lo, hi, in_scale, out_scale, out.as_deref(), cli.report),
    }
}

fn cmd_commit(
    model_path: &Path,
    out: &Path,
    profile: ProfileArg,
    seed: Option<u64>,
    report: bool,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let group = group_for(profile)?;
    let arch = Architecture::of(&model);
    let gens = Generators::sample(&group, required_capacity(&arch));
    let mut rng = make_rng(seed);
    let (commitment, _secrets) =
        commit_shard(&group, &gens, &mut rng, &model, 0, model.depth()).map_err(usage)?;
    let bytes = commitment.to_bytes(&group);
    write_file(out, &bytes)?;
    if report {
        println!(
            "commit layers={} profile={} bytes={} out={}",
            model.depth(),
            profile.name(),
            bytes.len(),
            out.display()
        );
    } else {
        println!(
            "committed {} layers on profile {}; wrote {} ({} bytes)",
            model.depth(),
            profile.name(),
            out.display(),
            bytes.len()
        );
    }
    Ok(())
}

fn cmd_prove(
    model_path: &Path,
    input_path: &Path,
    out: &Path,
    commit_out: Option<&Path>,
    profile: ProfileArg,
    seed: Option<u64>,
    report: bool,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let x = load_input(input_path, &model)?;
    let group = group_for(profile)?;
    let arch = Architecture::of(&model);
    let gens = Generators::sample(&group, required_capacity(&arch));
    let mut rng = make_rng(seed);
    let (commitment, secrets) =
        commit_shard(&group, &gens, &mut rng, &model, 0, model.depth()).map_err(usage)?;
    let (_y, trace) = forward(&model, &x).map_err(usage)?;
    let proved = prove_shard(
        &group,
        &gens,
        &mut rng,
        &model,
        &secrets,
        &commitment,
        &trace,
        None,
    )
    .map_err(usage)?;
    let proof_bytes = proved.proof.to_bytes(&group);
    write_file(out, &proof_bytes)?;
    let commit_note = match commit_out {
        Some(path) => {
            write_file(path, &commitment.to_bytes(&group))?;
            format!(" commit_out={}", path.display())
        }
        None => String::new(),
    };
    if report {
        println!(
            "prove layers={} profile={} ms={} bytes={} out={}{}",
            model.depth(),
            profile.name(),
            proved.elapsed_ms,
            proof_bytes.len(),
            out.display(),
            commit_note
        );
    } else {
        println!(
            "proved {} layers on profile {} in {} ms; wrote {} ({} bytes){}",
            model.depth(),
            profile.name(),
            proved.elapsed_ms,
            out.display(),
            proof_bytes.len(),
            commit_note
        );
    }
    Ok(())
}

fn cmd_verify(
    model_path: &Path,
    commit_path: &Path,
    proof_path: &Path,
    profile: ProfileArg,
    report: bool,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let group = group_for(profile)?;
    let arch = Architecture::of(&model);
    let gens = Generators::sample(&group, required_capacity(&arch));
    let commitment = ShardCommitment::from_bytes(&group, &read_file(commit_path)?)
        .map_err(|e| Failure::Verification(format!("commitment container rejected: {e}")))?;
    let proof = ShardProof::from_bytes(&group, &read_file(proof_path)?)
        .map_err(|e| Failure::Verification(format!("proof container rejected: {e}")))?;
    let outcome = verify_shard(&group, &gens, &arch, &commitment, None, &proof)
        .map_err(|e| Failure::Verification(format!("proof rejected: {e}")))?;

    for layer in &outcome.layers {
        if report {
            println!(
                "verify layer={} accepted={} check={}",
                layer.layer,
                layer.accepted,
                layer.failed_check.as_deref().unwrap_or("-")
            );
        } else {
            match (&layer.accepted, &layer.failed_check) {
                (true, _) => println!("layer {}: ok", layer.layer),
                (false, Some(check)) => println!("layer {}: FAIL ({check})", layer.layer),
                (false, None) => println!("layer {}: FAIL", layer.layer),
            }
        }
    }
    if let Some(handoff) = outcome.handoff {
        if report {
            println!("verify handoff={handoff}");
        } else {
            println!("handoff: {}", if handoff { "ok" } else { "FAIL" });
        }
    }
    if report {
        println!(
            "verify accepted={} bytes={} ms={}",
            outcome.accepted, outcome.proof_size, outcome.verify_ms
        );
    } else {
        println!(
            "proof: {} ({} bytes, {} ms)",
            if outcome.accepted { "accepted" } else { "REJECTED" },
            outcome.proof_size,
            outcome.verify_ms
        );
    }
    if outcome.accepted {
        Ok(())
    } else if let Some(bad) = outcome.layers.iter().find(|l| !l.accepted) {
        Err(Failure::Verification(format!(
            "verification failed at layer {}: {} check",
            bad.layer,
            bad.failed_check.as_deref().unwrap_or("unknown")
        )))
    } else {
        Err(Failure::Verification(
            "verification failed at the shard boundary hand-off".into(),
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_infer(
    model_path: &Path,
    input_path: &Path,
    out: Option<&Path>,
    cut: Option<usize>,
    epsilon: Option<f64>,
    sensitivity: f64,
    seed: Option<u64>,
    report: bool,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let x = load_input(input_path, &model)?;
    if epsilon.is_some() && cut.is_none() {
        return Err(Failure::Usage("--epsilon requires --cut".into()));
    }
    let y = match cut {
        None => forward(&model, &x).map_err(usage)?.0,
        Some(k) => {
            let (z, _) = split_forward(&model, &x, k).map_err(usage)?;
            let z = match epsilon {
                Some(eps) => {
                    let mut rng = make_rng(seed);
                    privatize_embedding(&z, eps, sensitivity, model.scale, &mut rng)
                        .map_err(usage)?
                }
                None => z,
            };
            resume_forward(&model, &z, k).map_err(usage)?.0
        }
    };
    let real = dequantize(&y, model.scale);
    if let Some(path) = out {
        write_file(path, tensor_to_text(&y).as_bytes())?;
    }
    if report {
        println!("infer dim={} q={} real={}", y.len(), csv(&y), csv(&real));
    } else {
        println!("output (quantized): {}", csv(&y));
        println!("output (real):      {}", csv(&real));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model_path: &Path,
    input_path: &Path,
    scenario_path: &Path,
    redundancy: Option<usize>,
    shards: Option<usize>,
    proof_mode: Option<ProofModeArg>,
    profile: Option<ProfileArg>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let x = load_input(input_path, &model)?;
    let mut cfg = ScenarioConfig::from_toml(&read_text(scenario_path)?).map_err(usage)?;
    if let Some(r) = redundancy {
        cfg.redundancy = r;
    }
    if let Some(s) = shards {
        cfg.shards = s;
    }
    if let Some(mode) = proof_mode {
        cfg.proof_mode = mode == ProofModeArg::On;
    }
    if let Some(p) = profile {
        cfg.profile = p.name().into();
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(usage)?;
    let outcome = run_session(&model, &x, &cfg).map_err(usage)?;
    for line in &outcome.log {
        println!("{line}");
    }
    if outcome.verdict {
        Ok(())
    } else {
        Err(Failure::Verification("session failed: see event log".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_consensus(
    outputs_path: &Path,
    quorum: f64,
    redundancy: Option<usize>,
    cdv: bool,
    ref_mean: Option<f64>,
    ref_std: Option<f64>,
    multiplier: f64,
    report: bool,
) -> Result<(), Failure> {
    let text = read_text(outputs_path)?;
    let mut rows: Vec<(u32, Vec<String>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let node: u32 = fields
            .next()
            .expect("nonempty line")
            .parse()
            .map_err(|e| Failure::Usage(format!("line {}: bad node id: {e}", lineno + 1)))?;
        let values: Vec<String> = fields.map(str::to_string).collect();
        if values.is_empty() {
            return Err(Failure::Usage(format!(
                "line {}: node {} has no output values",
                lineno + 1,
                node
            )));
        }
        rows.push((node, values));
    }
    if rows.is_empty() {
        return Err(Failure::Usage("outputs file has no rows".into()));
    }

    if cdv {
        let (mean, std) = match (ref_mean, ref_std) {
            (Some(m), Some(s)) => (m, s),
            _ => {
                return Err(Failure::Usage(
                    "--cdv requires --ref-mean and --ref-std".into(),
                ))
            }
        };
        let mut observed = Vec::new();
        for (node, values) in &rows {
            for v in values {
                observed.push(v.parse::<f64>().map_err(|e| {
                    Failure::Usage(format!("node {node}: bad value `{v}`: {e}"))
                })?);
            }
        }
        let n = observed.len();
        let reference = DistributionStats {
            mean,
            std,
            n,
            moments: Vec::new(),
        };
        let accepted = cdv_check(&observed, &reference, multiplier).map_err(usage)?;
        let obs_mean = observed.iter().sum::<f64>() / n as f64;
        let z = (obs_mean - mean).abs() / (std / (n as f64).sqrt());
        if report {
            println!("cdv accepted={accepted} n={n} z={z:.4} c={multiplier}");
        } else {
            println!(
                "cdv over {n} samples: |z| = {z:.4} vs threshold {multiplier}: {}",
                if accepted { "accepted" } else { "rejected" }
            );
        }
        return if accepted {
            Ok(())
        } else {
            Err(Failure::Verification(
                "distributions differ beyond the CDV threshold".into(),
            ))
        };
    }

    let mut votes = Vec::new();
    for (node, values) in &rows {
        let parsed: Vec<i64> = values
            .iter()
            .map(|v| {
                v.parse::<i64>().map_err(|e| {
                    Failure::Usage(format!("node {node}: bad value `{v}`: {e}"))
                })
            })
            .collect::<Result<_, _>>()?;
        votes.push(NodeOutput {
            node: *node,
            bytes: canonical_output(&parsed),
        });
    }
    let config = ConsensusConfig {
        redundancy: redundancy.unwrap_or(votes.len()),
        quorum,
        ..ConsensusConfig::default()
    };
    config.validate().map_err(usage)?;
    let result = decide(&votes, &config);
    let status = match result.status {
        ConsensusStatus::Verified => "verified",
        ConsensusStatus::Ambiguous => "ambiguous",
        ConsensusStatus::Failed => "failed",
    };
    let digest = result
        .value
        .as_deref()
        .map(output_digest)
        .unwrap_or_else(|| "-".into());
    if report {
        println!(
            "consensus status={status} agreeing={} total={} digest={digest} dissenters={}",
            result.agreeing,
            result.total,
            csv(&result.dissenters)
        );
    } else {
        println!(
            "status: {status} ({}/{} agree, quorum {quorum})",
            result.agreeing, result.total
        );
        let mut tally_line = String::from("tally:");
        for (bytes, count) in &result.tally {
            let _ = write!(tally_line, " {}×{count}", output_digest(bytes));
        }
        println!("{tally_line}");
        if !result.dissenters.is_empty() {
            println!("dissenters: {}", csv(&result.dissenters));
        }
    }
    if result.status == ConsensusStatus::Verified {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "consensus not reached: status {status}"
        )))
    }
}

fn cmd_table(
    function: &str,
    lo: i64,
    hi: i64,
    in_scale: u64,
    out_scale: u64,
    out: Option<&Path>,
    report: bool,
) -> Result<(), Failure> {
    let f = [
        TableFn::SoftmaxExp,
        TableFn::Sigmoid,
        TableFn::Gelu,
        TableFn::RmsNormRsqrt,
    ]
    .into_iter()
    .find(|f| f.name() == function)
    .ok_or_else(|| {
        Failure::Usage(format!(
            "unknown function `{function}` (expected softmax-exp, sigmoid, gelu, or rmsnorm-rsqrt)"
        ))
    })?;
    let spec = TableSpec {
        f,
        lo,
        hi,
        in_scale,
        out_scale,
    };
    let rows = hi
        .checked_sub(lo)
        .and_then(|d| d.checked_add(1))
        .filter(|&d| d > 0)
        .ok_or_else(|| Failure::Usage(format!("empty or inverted domain {lo}..={hi}")))?;
    let mut text = format!(
        "# zkdps-table fn={} lo={lo} hi={hi} in_scale={in_scale} out_scale={out_scale} rows={rows}\n",
        f.name()
    );
    for x in lo..=hi {
        let y = spec.quantized_output(x).map_err(usage)?;
        let _ = writeln!(text, "{x} {y}");
    }
    match out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            if report {
                println!("table fn={} rows={rows} out={}", f.name(), path.display());
            } else {
                println!("wrote {rows} rows to {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}
