//! The full simulated deployment lifecycle, driven in virtual time.
//!
//! `run_session` takes a model, an input, and a [`ScenarioConfig`] and
//! plays out: stub-enclave init → attestation → channel mesh (orchestrator
//! to every node, plus direct node-to-node links between *dependent*
//! shards only) → encrypted provisioning of weights and input → redundant
//! shard execution with digest voting → boundary hand-off over the direct
//! links → encrypted retrieval of the final output → zeroizing teardown.
//!
//! Virtual time is an integer tick counter: control steps (votes,
//! verdicts, transfers) cost one tick, executing a shard of cost `c`
//! (its multiply count) on a node of speed `w` costs `ceil(c / w)` ticks.
//! Every step appends an event; the finished log is sorted by tick
//! (stable, so causal order is kept within a tick) and numbered. With a
//! fixed seed the whole log is byte-for-byte reproducible.
//!
//! Confidentiality is structural: plaintext weights, activations, and
//! traces live only in [`TeeState`]; everything that crosses the simulated
//! network is an AEAD frame (recorded in [`SessionOutcome::wire`] so tests
//! can scan for leaks), and the orchestrator's own records hold ciphertext
//! and output digests only. Boundary tensors move exclusively on the
//! node-to-node links. `TeeState::destroy` zeroizes buffers and poisons
//! the enclave; later reads return [`NetsimError::TeePoisoned`].
//!
//! A dishonest node corrupts its shard output (by a node-dependent offset,
//! so colluding liars still disagree with each other). Under proof mode it
//! also cannot produce an accepting proof for the lie — proving replays
//! the honest computation — which the simulation models by corrupting the
//! proof container it ships; the orchestrator verifies every shard proof
//! and drops replicas whose proofs fail before counting votes.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;
use zeroize::Zeroize;

use super::attest::{attest, measurement, verify_attestation, AttestationEvidence};
use super::channel::{establish_pair, ChannelEnd, DhParams};
use super::sched::{schedule_shards, ticks, NodeClass, NodeDescriptor, Schedule};
use super::NetsimError;
use crate::algebra::{CurveGroup, CurveProfile};
use crate::commit::Generators;
use crate::consensus::{
    canonical_output, decode_output, output_digest, decide, ConsensusConfig, ConsensusStatus,
    NodeOutput,
};
use crate::dps::{
    commit_shard, layer_multiply_count, prove_shard, required_capacity, verify_shard,
    Architecture, ProvedShard, ShardCommitment, ShardSecrets,
};
use crate::model::{forward_range, ModelSpec, ShardPlan};
use crate::wire::Writer;

/// Reserved id for the orchestrator endpoint.
pub const ORCHESTRATOR_ID: u32 = u32::MAX;
/// Version string folded into every enclave measurement.
pub const RUNTIME_VERSION: &str = "zkdps-rt/1";

fn default_shards() -> usize {
    1
}
fn default_redundancy() -> usize {
    1
}
fn default_profile() -> String {
    "test".into()
}
fn default_quorum() -> f64 {
    0.51
}
fn default_class() -> String {
    "cpu".into()
}
fn default_speed() -> u32 {
    1
}
fn default_honest() -> bool {
    true
}

/// One node entry in a scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: u32,
    #[serde(default = "default_class")]
    pub class: String,
    #[serde(default = "default_speed")]
    pub speed: u32,
    #[serde(default = "default_honest")]
    pub honest: bool,
}

/// A deployment scenario: the node fleet plus session-wide switches.
///
/// TOML shape:
///
/// ```toml
/// seed = 7
/// shards = 2
/// redundancy = 3
/// proof_mode = false
/// profile = "test"
/// quorum = 0.51
///
/// [[nodes]]
/// id = 0
/// class = "gpu"   # or "cpu"
/// speed = 2       # relative speed weight, > 0
/// honest = true
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_shards")]
    pub shards: usize,
    #[serde(default = "default_redundancy")]
    pub redundancy: usize,
    #[serde(default)]
    pub proof_mode: bool,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default = "default_quorum")]
    pub quorum: f64,
    pub nodes: Vec<NodeEntry>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, NetsimError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| NetsimError::BadScenario(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        if self.nodes.is_empty() {
            return Err(NetsimError::NoNodes);
        }
        if self.shards == 0 {
            return Err(NetsimError::BadScenario("shards must be at least 1".into()));
        }
        if self.redundancy == 0 || self.redundancy > self.nodes.len() {
            return Err(NetsimError::BadScenario(format!(
                "redundancy {} must be between 1 and the node count {}",
                self.redundancy,
                self.nodes.len()
            )));
        }
        if !(self.quorum > 0.5 && self.quorum <= 1.0) {
            return Err(NetsimError::BadScenario(format!(
                "quorum {} must lie in (0.5, 1]",
                self.quorum
            )));
        }
        self.curve_profile()?;
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if n.id == ORCHESTRATOR_ID {
                return Err(NetsimError::BadScenario(
                    "node id collides with the orchestrator".into(),
                ));
            }
            if !seen.insert(n.id) {
                return Err(NetsimError::BadScenario(format!(
                    "duplicate node id {}",
                    n.id
                )));
            }
            if NodeClass::parse(&n.class).is_none() {
                return Err(NetsimError::BadScenario(format!(
                    "unknown node class `{}` (expected gpu or cpu)",
                    n.class
                )));
            }
            if n.speed == 0 {
                return Err(NetsimError::BadScenario(format!(
                    "node {} has zero speed",
                    n.id
                )));
            }
        }
        Ok(())
    }

    pub fn curve_profile(&self) -> Result<CurveProfile, NetsimError> {
        CurveProfile::by_name(&self.profile).ok_or_else(|| {
            NetsimError::BadScenario(format!(
                "unknown profile `{}` (expected test or main)",
                self.profile
            ))
        })
    }
}

/// In-enclave state: the only place plaintext shard material lives.
/// Keys are held by the node's channel endpoints and zeroized with them.
#[derive(Default)]
pub struct TeeState {
    shard_bytes: BTreeMap<usize, Vec<u8>>,
    inputs: BTreeMap<usize, Vec<i64>>,
    outputs: BTreeMap<usize, Vec<i64>>,
    poisoned: bool,
}

impl TeeState {
    pub fn read_shard(&self, shard: usize) -> Result<&[u8], NetsimError> {
        if self.poisoned {
            return Err(NetsimError::TeePoisoned);
        }
        Ok(self
            .shard_bytes
            .get(&shard)
            .map(Vec::as_slice)
            .unwrap_or(&[]))
    }

    pub fn read_output(&self, shard: usize) -> Result<&[i64], NetsimError> {
        if self.poisoned {
            return Err(NetsimError::TeePoisoned);
        }
        Ok(self
            .outputs
            .get(&shard)
            .map(Vec::as_slice)
            .unwrap_or(&[]))
    }

    /// Zeroize every buffer and poison the enclave.
    pub fn destroy(&mut self) {
        for buf in self.shard_bytes.values_mut() {
            buf.zeroize();
        }
        for buf in self.inputs.values_mut().chain(self.outputs.values_mut()) {
            buf.zeroize();
        }
        self.shard_bytes.clear();
        self.inputs.clear();
        self.outputs.clear();
        self.poisoned = true;
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }
}

/// One frame crossing the simulated network, as a passive observer (or the
/// node runner outside the enclave) would see it.
pub struct WireRecord {
    pub from: u32,
    pub to: u32,
    pub kind: &'static str,
    pub frame: Vec<u8>,
}

/// What a finished (or aborted) session leaves behind.
pub struct SessionOutcome {
    /// The retrieved final output; `None` when the session aborted.
    pub output: Option<Vec<i64>>,
    /// Line-delimited event log, sorted by virtual time.
    pub log: Vec<String>,
    /// True when every consensus round verified and retrieval completed.
    pub verdict: bool,
    /// Every frame that crossed the network.
    pub wire: Vec<WireRecord>,
    /// Shard proofs verified by the orchestrator (proof mode only).
    pub proofs_checked: usize,
}

/// Channel admission rule: both parties of a node-to-node link must have
/// passed attestation before a channel may be established.
pub fn require_attested(attested: &BTreeSet<u32>, a: u32, b: u32) -> Result<(), NetsimError> {
    for id in [a, b] {
        if id != ORCHESTRATOR_ID && !attested.contains(&id) {
            return Err(NetsimError::AttestationMissing(id));
        }
    }
    Ok(())
}

fn fmt_id(id: u32) -> String {
    if id == ORCHESTRATOR_ID {
        "orch".into()
    } else {
        id.to_string()
    }
}

fn status_name(status: ConsensusStatus) -> &'static str {
    match status {
        ConsensusStatus::Verified => "verified",
        ConsensusStatus::Ambiguous => "ambiguous",
        ConsensusStatus::Failed => "failed",
    }
}

/// Serialize the plaintext weights of layers `start..end` — the payload a
/// provisioning transfer carries and the bytes an enclave is measured over.
fn shard_image(model: &ModelSpec, start: usize, end: usize) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(start as u32);
    w.u32(end as u32);
    w.u64(model.scale);
    w.u32(model.q_bits);
    for layer in &model.layers[start..end] {
        w.u32(layer.d_in as u32);
        w.u32(layer.d_out as u32);
        for v in layer.weights.iter().chain(layer.bias.iter()) {
            w.u64(*v as u64);
        }
    }
    w.finish()
}

struct RuntimeNode {
    desc: NodeDescriptor,
    tee: TeeState,
    channels: BTreeMap<u32, ChannelEnd>,
    free_at: u64,
}

struct Session<'a> {
    model: &'a ModelSpec,
    cfg: &'a ScenarioConfig,
    group: CurveGroup,
    arch: Architecture,
    ranges: Vec<(usize, usize)>,
    costs: Vec<u64>,
    schedule: Schedule,
    nodes: BTreeMap<u32, RuntimeNode>,
    orch_channels: BTreeMap<u32, ChannelEnd>,
    events: Vec<(u64, String)>,
    wire: Vec<WireRecord>,
    rng: ChaCha20Rng,
    gens: Option<Generators>,
    commitments: Vec<Option<(ShardCommitment, ShardSecrets)>>,
    proofs_checked: usize,
}

impl<'a> Session<'a> {
    fn log(&mut self, t: u64, body: String) {
        self.events.push((t, body));
    }

    /// Send one frame from the orchestrator to a node, recording it on the
    /// wire and opening it at the far end.
    fn orch_send(&mut self, to: u32, kind: &'static str, payload: &[u8]) -> Result<Vec<u8>, NetsimError> {
        let ch = self
            .orch_channels
            .get_mut(&to)
            .ok_or(NetsimError::AttestationMissing(to))?;
        let frame = ch.seal(payload)?;
        self.wire.push(WireRecord {
            from: ORCHESTRATOR_ID,
            to,
            kind,
            frame: frame.clone(),
        });
        let node = self.nodes.get_mut(&to).expect("known node");
        let end = node
            .channels
            .get_mut(&ORCHESTRATOR_ID)
            .expect("orchestrator channel");
        end.open(&frame)
    }

    /// Send one frame from a node to the orchestrator.
    fn node_send_orch(&mut self, from: u32, kind: &'static str, payload: &[u8]) -> Result<Vec<u8>, NetsimError> {
        let node = self.nodes.get_mut(&from).expect("known node");
        let end = node
            .channels
            .get_mut(&ORCHESTRATOR_ID)
            .expect("orchestrator channel");
        let frame = end.seal(payload)?;
        self.wire.push(WireRecord {
            from,
            to: ORCHESTRATOR_ID,
            kind,
            frame: frame.clone(),
        });
        let ch = self
            .orch_channels
            .get_mut(&from)
            .expect("orchestrator channel");
        ch.open(&frame)
    }

    /// Send one frame between two nodes over their direct channel.
    fn node_send_node(
        &mut self,
        from: u32,
        to: u32,
        kind: &'static str,
        payload: &[u8],
    ) -> Result<Vec<u8>, NetsimError> {
        let sender = self.nodes.get_mut(&from).expect("known node");
        let end = sender
            .channels
            .get_mut(&to)
            .ok_or(NetsimError::AttestationMissing(to))?;
        let frame = end.seal(payload)?;
        self.wire.push(WireRecord {
            from,
            to,
            kind,
            frame: frame.clone(),
        });
        let receiver = self.nodes.get_mut(&to).expect("known node");
        let end = receiver.channels.get_mut(&from).expect("direct channel");
        end.open(&frame)
    }

    /// Tear everything down: zeroize channels and enclaves, then check the
    /// poison actually took.
    fn teardown(&mut self, t: u64) -> Result<(), NetsimError> {
        let ids: Vec<u32> = self.nodes.keys().copied().collect();
        for id in ids {
            let node = self.nodes.get_mut(&id).expect("known node");
            for ch in node.channels.values_mut() {
                ch.destroy();
            }
            node.tee.destroy();
            self.log(t, format!("event=destroy node={id}"));
        }
        for ch in self.orch_channels.values_mut() {
            ch.destroy();
        }
        for node in self.nodes.values() {
            if !node.tee.is_poisoned() || node.tee.read_shard(0).is_ok() {
                return Err(NetsimError::BadScenario(
                    "enclave survived destruction".into(),
                ));
            }
        }
        Ok(())
    }

    fn finish(mut self, t_end: u64, output: Option<Vec<i64>>) -> Result<SessionOutcome, NetsimError> {
        self.teardown(t_end)?;
        let verdict = output.is_some();
        let digest = match &output {
            Some(y) => output_digest(&canonical_output(y)),
            None => "none".into(),
        };
        self.log(
            t_end + 1,
            format!(
                "event=session verdict={} output_digest={digest}",
                if verdict { "ok" } else { "failed" }
            ),
        );
        let mut events = std::mem::take(&mut self.events);
        events.sort_by_key(|(t, _)| *t);
        let log = events
            .into_iter()
            .enumerate()
            .map(|(seq, (t, body))| format!("t={t:06} seq={seq:04} {body}"))
            .collect();
        Ok(SessionOutcome {
            output,
            log,
            verdict,
            wire: self.wire,
            proofs_checked: self.proofs_checked,
        })
    }
}

/// Run the whole lifecycle for `model` on `input` under `cfg`.
pub fn run_session(
    model: &ModelSpec,
    input: &[i64],
    cfg: &ScenarioConfig,
) -> Result<SessionOutcome, NetsimError> {
    cfg.validate()?;
    model.validate()?;
    let profile = cfg.curve_profile()?;
    let group = profile
        .group()
        .map_err(|e| NetsimError::BadScenario(e.to_string()))?;
    let arch = Architecture::of(model);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    let plan = ShardPlan::even(model.depth(), cfg.shards)?;
    let ranges = plan.ranges.clone();
    let costs: Vec<u64> = ranges
        .iter()
        .map(|&(a, b)| arch.layers[a..b].iter().map(layer_multiply_count).sum())
        .collect();

    let descriptors: Vec<NodeDescriptor> = cfg
        .nodes
        .iter()
        .map(|n| {
            NodeDescriptor::new(
                &group,
                &mut rng,
                n.id,
                NodeClass::parse(&n.class).expect("validated"),
                n.speed,
                n.honest,
            )
        })
        .collect();
    let schedule = schedule_shards(&costs, &descriptors, cfg.redundancy)?;

    let session = Session {
        model,
        cfg,
        group,
        arch,
        ranges,
        costs,
        schedule,
        nodes: descriptors
            .into_iter()
            .map(|desc| {
                (
                    desc.id,
                    RuntimeNode {
                        desc,
                        tee: TeeState::default(),
                        channels: BTreeMap::new(),
                        free_at: 0,
                    },
                )
            })
            .collect(),
        orch_channels: BTreeMap::new(),
        events: Vec::new(),
        wire: Vec::new(),
        rng,
        gens: None,
        commitments: Vec::new(),
        proofs_checked: 0,
    };
    session.run(input)
}

impl<'a> Session<'a> {
    fn run(mut self, input: &[i64]) -> Result<SessionOutcome, NetsimError> {
        let shard_count = self.ranges.len();
        self.log(
            0,
            format!(
                "event=start seed={} shards={} redundancy={} proof_mode={} profile={}",
                self.cfg.seed, shard_count, self.cfg.redundancy, self.cfg.proof_mode, self.cfg.profile
            ),
        );

        // ---- init + plan ------------------------------------------------
        for node in self.nodes.values() {
            let body = format!(
                "event=init node={} class={} speed={}",
                node.desc.id,
                node.desc.class.name(),
                node.desc.speed
            );
            self.events.push((0, body));
        }
        for s in 0..shard_count {
            let (a, b) = self.ranges[s];
            let assignees = self.schedule.assignees[s]
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let cost = self.costs[s];
            self.log(
                0,
                format!("event=schedule shard={s} layers={a}..{b} cost={cost} nodes={assignees}"),
            );
        }

        // ---- attestation (t = 1) -----------------------------------------
        let mut attested: BTreeSet<u32> = BTreeSet::new();
        for s in 0..shard_count {
            let (a, b) = self.ranges[s];
            let image = shard_image(self.model, a, b);
            let expected = measurement(&image, RUNTIME_VERSION);
            for idx in 0..self.schedule.assignees[s].len() {
                let id = self.schedule.assignees[s][idx];
                let evidence: AttestationEvidence = {
                    let node = self.nodes.get(&id).expect("known node");
                    attest(
                        &self.group,
                        &node.desc.identity,
                        id,
                        &image,
                        RUNTIME_VERSION,
                        &mut self.rng,
                    )
                };
                let pk = *self.nodes[&id].desc.identity.public();
                let ok = verify_attestation(&self.group, &pk, &evidence)
                    && evidence.measurement == expected;
                self.log(
                    1,
                    format!(
                        "event=attest shard={s} node={id} measurement={} ok={ok}",
                        hex::encode(&evidence.measurement[..4])
                    ),
                );
                if !ok {
                    return Err(NetsimError::AttestationMissing(id));
                }
                attested.insert(id);
            }
        }

        // ---- channel mesh (t = 2) ----------------------------------------
        // Orchestrator↔node links for provisioning and votes, plus direct
        // node↔node links between the assignees of *adjacent* shards only.
        let params = DhParams::builtin();
        let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
        for id in &attested {
            pairs.insert((*id, ORCHESTRATOR_ID));
        }
        for s in 0..shard_count.saturating_sub(1) {
            for &a in &self.schedule.assignees[s] {
                for &b in &self.schedule.assignees[s + 1] {
                    if a != b {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        for &(a, b) in &pairs {
            require_attested(&attested, a, b)?;
            let sa = params.sample_secret(&mut self.rng);
            let sb = params.sample_secret(&mut self.rng);
            let (end_a, end_b) = establish_pair(&params, a, &sa, b, &sb)?;
            let fp = end_a.key_fingerprint();
            self.log(
                2,
                format!("event=channel a={} b={} key={fp}", fmt_id(a), fmt_id(b)),
            );
            for (id, end) in [(a, end_a), (b, end_b)] {
                if id == ORCHESTRATOR_ID {
                    let peer = if id == a { b } else { a };
                    self.orch_channels.insert(peer, end);
                } else {
                    self.nodes
                        .get_mut(&id)
                        .expect("known node")
                        .channels
                        .insert(end.peer(), end);
                }
            }
        }

        // ---- provisioning (t = 3, delivered t = 4) -----------------------
        if self.cfg.proof_mode {
            let capacity = required_capacity(&self.arch);
            self.gens = Some(Generators::sample(&self.group, capacity));
            for s in 0..shard_count {
                let (a, b) = self.ranges[s];
                let gens = self.gens.as_ref().expect("sampled");
                let pair = commit_shard(&self.group, gens, &mut self.rng, self.model, a, b)?;
                self.commitments.push(Some(pair));
                self.log(3, format!("event=commit shard={s} layers={a}..{b}"));
            }
        }
        for s in 0..shard_count {
            let (a, b) = self.ranges[s];
            let image = shard_image(self.model, a, b);
            for idx in 0..self.schedule.assignees[s].len() {
                let id = self.schedule.assignees[s][idx];
                let delivered = self.orch_send(id, "weights", &image)?;
                let frame_len = self.wire.last().expect("recorded").frame.len();
                self.log(
                    3,
                    format!("event=transmit from=orch to={id} kind=weights shard={s} bytes={frame_len}"),
                );
                self.nodes
                    .get_mut(&id)
                    .expect("known node")
                    .tee
                    .shard_bytes
                    .insert(s, delivered);
            }
        }
        let input_bytes = canonical_output(input);
        for idx in 0..self.schedule.assignees[0].len() {
            let id = self.schedule.assignees[0][idx];
            let delivered = self.orch_send(id, "input", &input_bytes)?;
            let frame_len = self.wire.last().expect("recorded").frame.len();
            self.log(
                3,
                format!("event=transmit from=orch to={id} kind=input bytes={frame_len}"),
            );
            let values = decode_output(&delivered)?;
            self.nodes
                .get_mut(&id)
                .expect("known node")
                .tee
                .inputs
                .insert(0, values);
        }

        // ---- execution ---------------------------------------------------
        let mut ready: u64 = 4;
        let mut upstream: Option<(ProvedShard, u32)> = None;
        let mut final_output: Option<Vec<i64>> = None;

        for s in 0..shard_count {
            let (a, b) = self.ranges[s];
            let replicas = self.schedule.assignees[s].clone();
            let mut round_done: u64 = ready;
            let mut votes: Vec<NodeOutput> = Vec::new();
            let mut results: BTreeMap<u32, Vec<i64>> = BTreeMap::new();
            let mut proved: BTreeMap<u32, ProvedShard> = BTreeMap::new();

            for &id in &replicas {
                let (speed, honest) = {
                    let node = &self.nodes[&id];
                    (node.desc.speed, node.desc.honest)
                };
                let x = self.nodes[&id]
                    .tee
                    .inputs
                    .get(&s)
                    .cloned()
                    .ok_or_else(|| {
                        NetsimError::BadScenario(format!("node {id} missing input for shard {s}"))
                    })?;
                let t_start = self.nodes[&id].free_at.max(ready);
                let t_done = t_start + ticks(self.costs[s], speed);
                self.nodes.get_mut(&id).expect("known node").free_at = t_done;
                round_done = round_done.max(t_done);

                let (mut y, trace) = forward_range(self.model, &x, a, b)?;
                if !honest {
                    // A liar shifts its output by a node-dependent offset,
                    // so two liars do not accidentally agree.
                    y[0] = y[0].wrapping_add(1 + id as i64);
                }
                self.log(
                    t_done,
                    format!("event=execute shard={s} node={id} start={t_start} ticks={}", t_done - t_start),
                );

                let mut vote_ok = true;
                if self.cfg.proof_mode {
                    let gens = self.gens.as_ref().expect("sampled");
                    let (commitment, secrets) =
                        self.commitments[s].as_ref().expect("committed");
                    let mut prover_rng = ChaCha20Rng::seed_from_u64(
                        self.cfg
                            .seed
                            .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(s as u64 + 1))
                            ^ u64::from(id),
                    );
                    let incoming = upstream.as_ref().map(|(p, _)| &p.boundary);
                    let shard_proof = prove_shard(
                        &self.group,
                        gens,
                        &mut prover_rng,
                        self.model,
                        secrets,
                        commitment,
                        &trace,
                        incoming,
                    )?;
                    let mut proof_bytes = shard_proof.proof.to_bytes(&self.group);
                    if !honest {
                        // Soundness: the node cannot produce an accepting
                        // proof for its lie; shipping a corrupted container
                        // is the observable equivalent.
                        let last = proof_bytes.len() - 1;
                        proof_bytes[last] ^= 0xff;
                    }
                    let delivered = self.node_send_orch(id, "proof", &proof_bytes)?;
                    let upstream_commitment =
                        upstream.as_ref().map(|(p, _)| {
                            p.proof.layers.last().expect("nonempty shard").c_out
                        });
                    let accepted = match crate::dps::ShardProof::from_bytes(&self.group, &delivered)
                    {
                        Ok(proof) => {
                            let gens = self.gens.as_ref().expect("sampled");
                            let commitment =
                                &self.commitments[s].as_ref().expect("committed").0;
                            match verify_shard(
                                &self.group,
                                gens,
                                &self.arch,
                                commitment,
                                upstream_commitment.as_ref(),
                                &proof,
                            ) {
                                Ok(report) => report.accepted,
                                Err(_) => false,
                            }
                        }
                        Err(_) => false,
                    };
                    self.proofs_checked += 1;
                    self.log(
                        t_done + 1,
                        format!(
                            "event=proof shard={s} node={id} accepted={accepted} bytes={}",
                            proof_bytes.len()
                        ),
                    );
                    vote_ok = accepted;
                    if accepted {
                        proved.insert(id, shard_proof);
                    }
                }

                let out_bytes = canonical_output(&y);
                let digest = output_digest(&out_bytes);
                let delivered = self.node_send_orch(id, "vote", digest.as_bytes())?;
                self.log(
                    t_done + 1,
                    format!("event=vote shard={s} node={id} digest={digest}"),
                );
                if vote_ok {
                    votes.push(NodeOutput {
                        node: id,
                        bytes: delivered,
                    });
                }
                results.insert(id, y);
                self.nodes
                    .get_mut(&id)
                    .expect("known node")
                    .tee
                    .outputs
                    .insert(s, results[&id].clone());
            }

            // ---- consensus verdict ---------------------------------------
            let verdict_t = round_done + 2;
            let consensus_cfg = ConsensusConfig {
                redundancy: self.cfg.redundancy,
                quorum: self.cfg.quorum,
                ..ConsensusConfig::default()
            };
            let result = decide(&votes, &consensus_cfg);
            let dissenters = if result.dissenters.is_empty() {
                String::new()
            } else {
                format!(
                    " dissenters={}",
                    result
                        .dissenters
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            };
            self.log(
                verdict_t,
                format!(
                    "event=consensus shard={s} status={} tally={}/{}{dissenters}",
                    status_name(result.status),
                    result.agreeing,
                    result.total
                ),
            );
            if result.status != ConsensusStatus::Verified {
                let reason = if votes.is_empty() {
                    "no-valid-replicas"
                } else {
                    "consensus"
                };
                self.log(verdict_t, format!("event=abort shard={s} reason={reason}"));
                return self.finish(verdict_t + 1, None);
            }
            let winner = result.value.expect("verified consensus has a value");
            let winner_digest = String::from_utf8_lossy(&winner).into_owned();
            let sender = replicas
                .iter()
                .copied()
                .filter(|&id| {
                    let bytes = canonical_output(&results[&id]);
                    output_digest(&bytes).as_bytes() == winner.as_slice()
                        && (!self.cfg.proof_mode || proved.contains_key(&id))
                })
                .min()
                .expect("verified consensus has an agreeing replica");
            let y_win = results[&sender].clone();

            if s + 1 < shard_count {
                // ---- boundary hand-off on direct links -------------------
                let receivers = self.schedule.assignees[s + 1].clone();
                let mut payload = canonical_output(&y_win);
                if self.cfg.proof_mode {
                    let boundary = &proved[&sender].boundary;
                    payload.extend_from_slice(
                        &self.group.scalar_field().to_bytes(boundary.blind),
                    );
                }
                for &r in &receivers {
                    if r == sender {
                        self.log(
                            verdict_t + 1,
                            format!(
                                "event=boundary shard={s} from={sender} to={r} internal=true digest={winner_digest}"
                            ),
                        );
                    } else {
                        let delivered = self.node_send_node(sender, r, "boundary", &payload)?;
                        let frame_len = self.wire.last().expect("recorded").frame.len();
                        self.log(
                            verdict_t + 1,
                            format!(
                                "event=boundary shard={s} from={sender} to={r} bytes={frame_len} digest={winner_digest}"
                            ),
                        );
                        debug_assert_eq!(delivered, payload);
                    }
                    self.nodes
                        .get_mut(&r)
                        .expect("known node")
                        .tee
                        .inputs
                        .insert(s + 1, y_win.clone());
                }
                if self.cfg.proof_mode {
                    upstream = Some((proved.remove(&sender).expect("accepted"), sender));
                }
                ready = verdict_t + 2;
            } else {
                // ---- retrieval -------------------------------------------
                let out_bytes = canonical_output(&y_win);
                let delivered = self.node_send_orch(sender, "output", &out_bytes)?;
                let frame_len = self.wire.last().expect("recorded").frame.len();
                self.log(
                    verdict_t + 1,
                    format!("event=retrieve shard={s} node={sender} bytes={frame_len}"),
                );
                final_output = Some(decode_output(&delivered)?);
                ready = verdict_t + 2;
            }
        }

        self.finish(ready, final_output)
    }
}
