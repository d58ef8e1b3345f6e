//! Consensus-based verification over redundant shard executions.
//!
//! Two modes. CBV is exact-match voting: every replica's output tensor is
//! encoded canonically and identical byte strings vote together; because
//! the forward pass is exact integer arithmetic, honest replicas are
//! always byte-identical and any quorum of them pins the result. CDV is
//! the tolerant statistical mode for settings where outputs legitimately
//! vary (e.g. re-quantized models): a z-test compares the observed output
//! mean against reference statistics with an adaptive multiplier.
//!
//! Reconstruction runs shard consensus rounds in layer order, feeding
//! each agreed boundary tensor into the next shard, so the final output
//! is consensus-checked at every hand-off.

use crate::model::{forward_range, ModelError, ModelSpec, ShardPlan};
use sha2::{Digest, Sha256};
use std::collections::VecDeque;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConsensusError {
    #[error("node {0} unavailable")]
    NodeUnavailable(u32),
    #[error("shard {0} did not reach consensus: {1:?}")]
    ShardFailed(usize, ConsensusStatus),
    #[error("reference distribution is degenerate (zero spread, divergent observations)")]
    DegenerateReference,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct ConsensusConfig {
    /// Replicas per shard.
    pub redundancy: usize,
    /// Fraction of replicas that must agree, in (0.5, 1].
    pub quorum: f64,
    /// Statistical (CDV) mode instead of exact-match voting.
    pub cdv: bool,
    /// CDV threshold multiplier.
    pub cdv_multiplier: f64,
    /// Reference statistics for CDV.
    pub reference: Option<DistributionStats>,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            redundancy: 1,
            quorum: 0.51,
            cdv: false,
            cdv_multiplier: 3.0,
            reference: None,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<(), ConsensusError> {
        if self.redundancy == 0 {
            return Err(ConsensusError::BadInput("redundancy must be at least 1".into()));
        }
        if !(self.quorum > 0.5 && self.quorum <= 1.0) {
            return Err(ConsensusError::BadInput(format!(
                "quorum {} outside (0.5, 1]",
                self.quorum
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsensusStatus {
    Verified,
    Ambiguous,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    /// Canonical bytes of the agreed value, when verified.
    pub value: Option<Vec<u8>>,
    /// Distinct outputs with vote counts, largest first (ties broken by
    /// byte order, so the tally is deterministic).
    pub tally: Vec<(Vec<u8>, usize)>,
    pub agreeing: usize,
    pub total: usize,
    /// Nodes that voted against the agreed value (verified rounds only).
    pub dissenters: Vec<u32>,
    pub status: ConsensusStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionStats {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    /// Optional higher central moments (3rd, 4th, …) for richer checks.
    pub moments: Vec<f64>,
}

impl DistributionStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self, ConsensusError> {
        if samples.is_empty() {
            return Err(ConsensusError::BadInput("no samples".into()));
        }
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        Ok(DistributionStats { mean, std: var.sqrt(), n, moments: Vec::new() })
    }
}

// ---- canonical output encoding ----

/// Canonical vote bytes for an output tensor.
pub fn canonical_output(values: &[i64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 8 * values.len());
    out.extend_from_slice(&(values.len() as u32).to_be_bytes());
    for v in values {
        out.extend_from_slice(&(*v as u64).to_be_bytes());
    }
    out
}

pub fn decode_output(bytes: &[u8]) -> Result<Vec<i64>, ConsensusError> {
    if bytes.len() < 4 {
        return Err(ConsensusError::BadInput("output bytes truncated".into()));
    }
    let n = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if bytes.len() != 4 + 8 * n {
        return Err(ConsensusError::BadInput("output byte length mismatch".into()));
    }
    Ok(bytes[4..]
        .chunks_exact(8)
        .map(|c| u64::from_be_bytes(c.try_into().unwrap()) as i64)
        .collect())
}

/// Short hex digest used in round logs.
pub fn output_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash[..4].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

// ---- redundant execution ----

/// Simulation-only node behavior for consensus testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBehavior {
    Honest,
    /// Returns these bytes instead of executing.
    Byzantine(Vec<u8>),
    Unavailable,
}

#[derive(Debug, Clone)]
pub struct SimNode {
    pub id: u32,
    pub behavior: NodeBehavior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOutput {
    pub node: u32,
    pub bytes: Vec<u8>,
}

/// Execute layers `start..end` on every node of the replica set and
/// collect their (claimed) outputs.
pub fn run_redundant(
    model: &ModelSpec,
    input: &[i64],
    start: usize,
    end: usize,
    nodes: &[SimNode],
) -> Result<Vec<NodeOutput>, ConsensusError> {
    if nodes.is_empty() {
        return Err(ConsensusError::BadInput("empty replica set".into()));
    }
    let mut outputs = Vec::with_capacity(nodes.len());
    for node in nodes {
        let bytes = match &node.behavior {
            NodeBehavior::Unavailable => return Err(ConsensusError::NodeUnavailable(node.id)),
            NodeBehavior::Byzantine(b) => b.clone(),
            NodeBehavior::Honest => {
                let (out, _) = forward_range(model, input, start, end)?;
                canonical_output(&out)
            }
        };
        outputs.push(NodeOutput { node: node.id, bytes });
    }
    Ok(outputs)
}

// ---- decision ----

/// Exact-match vote over canonical output bytes.
pub fn decide(outputs: &[NodeOutput], config: &ConsensusConfig) -> ConsensusResult {
    let total = outputs.len();
    let mut tally: Vec<(Vec<u8>, usize)> = Vec::new();
    for o in outputs {
        match tally.iter_mut().find(|(b, _)| *b == o.bytes) {
            Some((_, c)) => *c += 1,
            None => tally.push((o.bytes.clone(), 1)),
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    if tally.is_empty() {
        return ConsensusResult {
            value: None,
            tally,
            agreeing: 0,
            total,
            dissenters: Vec::new(),
            status: ConsensusStatus::Failed,
        };
    }
    let top = tally[0].1;
    let tie = tally.len() > 1 && tally[1].1 == top;
    let meets_quorum = top as f64 + 1e-9 >= config.quorum * total as f64;
    let (status, value) = if tie {
        (ConsensusStatus::Ambiguous, None)
    } else if meets_quorum {
        (ConsensusStatus::Verified, Some(tally[0].0.clone()))
    } else {
        (ConsensusStatus::Failed, None)
    };
    let dissenters = match &value {
        Some(v) => outputs
            .iter()
            .filter(|o| &o.bytes != v)
            .map(|o| o.node)
            .collect(),
        None => Vec::new(),
    };
    ConsensusResult {
        value,
        tally,
        agreeing: top,
        total,
        dissenters,
        status,
    }
}

// ---- reconstruction ----

/// One line-delimited record per node vote plus one per shard verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub line: String,
}

fn push_round_records(
    log: &mut Vec<RoundRecord>,
    round: usize,
    shard: usize,
    outputs: &[NodeOutput],
    result: &ConsensusResult,
) {
    for o in outputs {
        let verdict = match &result.value {
            Some(v) if &o.bytes == v => "agree",
            Some(_) => "dissent",
            None => "unresolved",
        };
        log.push(RoundRecord {
            line: format!(
                "round={round} shard={shard} node={} digest={} verdict={verdict}",
                o.node,
                output_digest(&o.bytes)
            ),
        });
    }
    let status = match result.status {
        ConsensusStatus::Verified => "verified",
        ConsensusStatus::Ambiguous => "ambiguous",
        ConsensusStatus::Failed => "failed",
    };
    log.push(RoundRecord {
        line: format!(
            "round={round} shard={shard} consensus={status} tally={}/{}",
            result.agreeing, result.total
        ),
    });
}

/// Run every shard of the plan under redundant execution, consensus-check
/// each boundary, and feed the agreed tensor forward. Returns the final
/// output and the round log.
pub fn reconstruct(
    model: &ModelSpec,
    plan: &ShardPlan,
    input: &[i64],
    config: &ConsensusConfig,
    node_behavior: impl Fn(u32) -> NodeBehavior,
) -> Result<(Vec<i64>, Vec<RoundRecord>), ConsensusError> {
    config.validate()?;
    let mut log = Vec::new();
    let mut cur = input.to_vec();
    for (shard_idx, ((start, end), assignees)) in
        plan.ranges.iter().zip(&plan.assignees).enumerate()
    {
        let nodes: Vec<SimNode> = assignees
            .iter()
            .map(|id| SimNode { id: *id, behavior: node_behavior(*id) })
            .collect();
        let outputs = run_redundant(model, &cur, *start, *end, &nodes)?;
        let result = decide(&outputs, config);
        push_round_records(&mut log, shard_idx, shard_idx, &outputs, &result);
        match (&result.status, &result.value) {
            (ConsensusStatus::Verified, Some(v)) => {
                cur = decode_output(v)?;
            }
            (status, _) => return Err(ConsensusError::ShardFailed(shard_idx, *status)),
        }
    }
    Ok((cur, log))
}

// ---- statistical mode (CDV) ----

/// z-test comparison of an observed sample mean against reference
/// statistics: accept iff `|mean_obs - mean_ref| <= c * std_ref / sqrt(n)`.
/// A zero-spread reference falls back to exact matching.
pub fn cdv_check(
    observed: &[f64],
    reference: &DistributionStats,
    c: f64,
) -> Result<bool, ConsensusError> {
    let n = observed.len();
    if n < 2 {
        return Err(ConsensusError::BadInput(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if !(c > 0.0) {
        return Err(ConsensusError::BadInput(format!("multiplier {c} must be positive")));
    }
    if reference.std == 0.0 {
        if observed.iter().all(|o| *o == reference.mean) {
            return Ok(true);
        }
        return Err(ConsensusError::DegenerateReference);
    }
    let mean_obs = observed.iter().sum::<f64>() / n as f64;
    Ok((mean_obs - reference.mean).abs() <= c * reference.std / (n as f64).sqrt())
}

/// Rolling controller for the CDV multiplier: starts at 3, nudges by
/// ±10% per decision depending on the recent false-alarm rate, and stays
/// clamped to [2, 5].
#[derive(Debug, Clone)]
pub struct AdaptiveThreshold {
    c: f64,
    window: VecDeque<bool>,
    window_len: usize,
}

impl Default for AdaptiveThreshold {
    fn default() -> Self {
        Self::new()
    }
}

impl AdaptiveThreshold {
    pub fn new() -> Self {
        AdaptiveThreshold { c: 3.0, window: VecDeque::new(), window_len: 20 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Record whether the latest rejection turned out to be a false
    /// alarm. A noisy window widens the threshold (fewer alarms), a quiet
    /// one tightens it.
    pub fn record(&mut self, false_alarm: bool) {
        self.window.push_back(false_alarm);
        if self.window.len() > self.window_len {
            self.window.pop_front();
        }
        let alarms = self.window.iter().filter(|a| **a).count();
        let rate = alarms as f64 / self.window.len() as f64;
        self.c *= if rate > 0.1 { 1.1 } else { 0.9 };
        self.c = self.c.clamp(2.0, 5.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{forward, Activation, Layer};

    fn cfg(m: usize) -> ConsensusConfig {
        ConsensusConfig { redundancy: m, ..Default::default() }
    }

    fn votes(vals: &[i64]) -> Vec<NodeOutput> {
        vals.iter()
            .enumerate()
            .map(|(i, v)| NodeOutput { node: i as u32, bytes: canonical_output(&[*v]) })
            .collect()
    }

    fn small_model(depth: usize) -> ModelSpec {
        let scale = 4u64;
        let layers = (0..depth)
            .map(|i| {
                let mut weights = vec![0i64; 4];
                weights[0] = scale as i64;
                weights[3] = if i % 2 == 0 { scale as i64 } else { -(scale as i64) };
                weights[1] = 1;
                Layer {
                    d_in: 2,
                    d_out: 2,
                    weights,
                    bias: vec![i as i64, -1],
                    activation: if i % 2 == 0 { Activation::Relu } else { Activation::None },
                }
            })
            .collect();
        ModelSpec::new(scale, 16, layers).unwrap()
    }

    #[test]
    fn decide_frozen_examples() {
        // {5,5,7} with majority quorum: verified 5, node 2 dissents
        let r = decide(&votes(&[5, 5, 7]), &cfg(3));
        assert_eq!(r.status, ConsensusStatus::Verified);
        assert_eq!(r.value, Some(canonical_output(&[5])));
        assert_eq!((r.agreeing, r.total), (2, 3));
        assert_eq!(r.dissenters, vec![2]);

        // {5,5,7,7}: tie -> ambiguous
        let r = decide(&votes(&[5, 5, 7, 7]), &cfg(4));
        assert_eq!(r.status, ConsensusStatus::Ambiguous);
        assert_eq!(r.value, None);

        // {5} with m=1: trivially verified 1/1
        let r = decide(&votes(&[5]), &cfg(1));
        assert_eq!(r.status, ConsensusStatus::Verified);
        assert_eq!((r.agreeing, r.total), (1, 1));
        assert!(r.dissenters.is_empty());
    }

    #[test]
    fn quorum_rules() {
        // unanimity quorum rejects any dissent
        let unanimous = ConsensusConfig { quorum: 1.0, ..Default::default() };
        let r = decide(&votes(&[5, 5, 7]), &unanimous);
        assert_eq!(r.status, ConsensusStatus::Failed);
        let r = decide(&votes(&[5, 5, 5]), &unanimous);
        assert_eq!(r.status, ConsensusStatus::Verified);

        // 0.75 quorum: a unique 2/3 plurality still fails
        let strict = ConsensusConfig { quorum: 0.75, ..Default::default() };
        let r = decide(&votes(&[5, 5, 7]), &strict);
        assert_eq!(r.status, ConsensusStatus::Failed);

        // config validation
        assert!(ConsensusConfig { quorum: 0.5, ..Default::default() }.validate().is_err());
        assert!(ConsensusConfig { quorum: 1.01, ..Default::default() }.validate().is_err());
        assert!(ConsensusConfig { redundancy: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn agreement_safety_exhaustive_up_to_seven() {
        // with f < m/2 Byzantine replicas and majority quorum, the honest
        // value always wins, whatever the fault pattern
        let honest = canonical_output(&[42]);
        for m in 1usize..=7 {
            for mask in 0u32..(1 << m) {
                let f = mask.count_ones() as usize;
                if f * 2 >= m {
                    continue;
                }
                for distinct in [false, true] {
                    let outputs: Vec<NodeOutput> = (0..m)
                        .map(|i| {
                            let byz = mask & (1 << i) != 0;
                            let bytes = if !byz {
                                honest.clone()
                            } else if distinct {
                                canonical_output(&[1000 + i as i64])
                            } else {
                                canonical_output(&[-1])
                            };
                            NodeOutput { node: i as u32, bytes }
                        })
                        .collect();
                    let r = decide(&outputs, &cfg(m));
                    assert_eq!(
                        r.status,
                        ConsensusStatus::Verified,
                        "m={m} mask={mask:b} distinct={distinct}"
                    );
                    assert_eq!(r.value.as_ref(), Some(&honest));
                    assert_eq!(r.dissenters.len(), f);
                }
            }
        }
    }

    #[test]
    fn redundant_execution_modes() {
        let model = small_model(2);
        let honest = vec![
            SimNode { id: 0, behavior: NodeBehavior::Honest },
            SimNode { id: 1, behavior: NodeBehavior::Honest },
            SimNode { id: 2, behavior: NodeBehavior::Honest },
        ];
        let outs = run_redundant(&model, &[4, -4], 0, 2, &honest).unwrap();
        assert_eq!(outs.len(), 3);
        assert!(outs.iter().all(|o| o.bytes == outs[0].bytes), "exact replicas agree");

        let mut one_byz = honest.clone();
        one_byz[1].behavior = NodeBehavior::Byzantine(b"junk".to_vec());
        let outs = run_redundant(&model, &[4, -4], 0, 2, &one_byz).unwrap();
        let r = decide(&outs, &cfg(3));
        assert_eq!(r.status, ConsensusStatus::Verified);
        assert_eq!(r.dissenters, vec![1]);

        let mut with_down = honest;
        with_down[2].behavior = NodeBehavior::Unavailable;
        assert_eq!(
            run_redundant(&model, &[4, -4], 0, 2, &with_down).unwrap_err(),
            ConsensusError::NodeUnavailable(2)
        );
    }

    #[test]
    fn reconstruction_equals_monolithic() {
        let model = small_model(4);
        let x = [7i64, -3];
        let (y_mono, _) = forward(&model, &x).unwrap();
        for shards in 1..=4 {
            let plan = {
                let mut p = ShardPlan::even(model.depth(), shards).unwrap();
                // three replicas per shard
                p.assignees = p
                    .ranges
                    .iter()
                    .enumerate()
                    .map(|(i, _)| vec![3 * i as u32, 3 * i as u32 + 1, 3 * i as u32 + 2])
                    .collect();
                p.redundancy = 3;
                p
            };
            let (y, log) =
                reconstruct(&model, &plan, &x, &cfg(3), |_| NodeBehavior::Honest).unwrap();
            assert_eq!(y, y_mono, "{shards} shards");
            // 3 votes + 1 verdict per shard
            assert_eq!(log.len(), 4 * shards);
        }
    }

    #[test]
    fn reconstruction_aborts_on_failed_shard() {
        let model = small_model(4);
        let plan = {
            let mut p = ShardPlan::even(model.depth(), 2).unwrap();
            p.assignees = vec![vec![0, 1, 2], vec![3, 4, 5]];
            p.redundancy = 3;
            p
        };
        // two colluding Byzantine replicas out-vote the honest one on
        // shard 1 only if quorum lets them; with a 2/3 majority they do
        // reach quorum, but their value differs from honest — the test
        // checks the failure path with an ambiguous split instead
        let behavior = |id: u32| match id {
            3 => NodeBehavior::Byzantine(b"aa".to_vec()),
            4 => NodeBehavior::Byzantine(b"aa".to_vec()),
            _ => NodeBehavior::Honest,
        };
        let err = reconstruct(&model, &plan, &[7, -3], &cfg(3), behavior).unwrap_err();
        // 2 byzantine vs 1 honest: the forged value wins the vote; the
        // shard "verifies" to a wrong value — consensus is only safe
        // under f < m/2. With f >= m/2 the decode of forged bytes fails.
        assert!(matches!(err, ConsensusError::BadInput(_)), "{err:?}");

        // even split -> ambiguous -> ShardFailed
        let behavior = |id: u32| match id {
            3 | 4 => NodeBehavior::Byzantine(canonical_output(&[9, 9])),
            _ => NodeBehavior::Honest,
        };
        let plan2 = ShardPlan::new(
            model.depth(),
            vec![(0, 2), (2, 4)],
            vec![vec![0, 1, 2], vec![3, 4, 5, 6]],
            4,
        )
        .unwrap();
        let err = reconstruct(&model, &plan2, &[7, -3], &cfg(4), behavior).unwrap_err();
        assert_eq!(err, ConsensusError::ShardFailed(1, ConsensusStatus::Ambiguous));
    }

    #[test]
    fn round_log_is_deterministic_and_structured() {
        let model = small_model(2);
        let plan = {
            let mut p = ShardPlan::even(2, 2).unwrap();
            p.assignees = vec![vec![0, 1, 2], vec![3, 4, 5]];
            p.redundancy = 3;
            p
        };
        let behavior = |id: u32| {
            if id == 4 {
                NodeBehavior::Byzantine(b"zz".to_vec())
            } else {
                NodeBehavior::Honest
            }
        };
        let (_, log1) = reconstruct(&model, &plan, &[4, 4], &cfg(3), behavior).unwrap();
        let (_, log2) = reconstruct(&model, &plan, &[4, 4], &cfg(3), behavior).unwrap();
        assert_eq!(log1, log2);
        assert!(log1[0].line.starts_with("round=0 shard=0 node=0 digest="));
        assert!(log1
            .iter()
            .any(|r| r.line.contains("node=4") && r.line.ends_with("verdict=dissent")));
        assert!(log1
            .iter()
            .any(|r| r.line.contains("shard=1 consensus=verified tally=2/3")));
    }

    #[test]
    fn cdv_frozen_examples() {
        let reference = DistributionStats { mean: 0.0, std: 1.0, n: 100, moments: vec![] };
        let near: Vec<f64> = (0..100).map(|i| 0.05 + ((i % 2) as f64 - 0.5) * 1e-6).collect();
        assert!(cdv_check(&near, &reference, 3.0).unwrap(), "mean 0.05 within 0.3");
        let far: Vec<f64> = vec![0.5; 100];
        assert!(!cdv_check(&far, &reference, 3.0).unwrap(), "mean 0.5 outside 0.3");

        // identical observations against a zero-spread reference: accept
        let degenerate = DistributionStats { mean: 2.5, std: 0.0, n: 10, moments: vec![] };
        assert!(cdv_check(&[2.5, 2.5, 2.5], &degenerate, 3.0).unwrap());
        assert_eq!(
            cdv_check(&[2.5, 2.6], &degenerate, 3.0).unwrap_err(),
            ConsensusError::DegenerateReference
        );

        assert!(cdv_check(&[1.0], &reference, 3.0).is_err(), "n >= 2 required");
        assert!(cdv_check(&[1.0, 1.0], &reference, 0.0).is_err());
    }

    #[test]
    fn cdv_identical_distributions_always_accepted() {
        let samples: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let reference = DistributionStats::from_samples(&samples).unwrap();
        for c in [0.5, 1.0, 3.0, 5.0] {
            assert!(cdv_check(&samples, &reference, c).unwrap(), "c={c}");
        }
    }

    #[test]
    fn adaptive_threshold_converges_and_clamps() {
        let mut t = AdaptiveThreshold::new();
        assert_eq!(t.c(), 3.0);
        for _ in 0..50 {
            t.record(true);
        }
        assert_eq!(t.c(), 5.0, "persistent false alarms widen to the cap");
        for _ in 0..50 {
            t.record(false);
        }
        assert_eq!(t.c(), 2.0, "quiet window tightens to the floor");
        for _ in 0..500 {
            t.record(true);
            t.record(false);
            assert!((2.0..=5.0).contains(&t.c()));
        }
    }

    #[test]
    fn output_encoding_roundtrip() {
        let vals = vec![5i64, -7, 0, i64::MAX, i64::MIN];
        assert_eq!(decode_output(&canonical_output(&vals)).unwrap(), vals);
        assert!(decode_output(b"xx").is_err());
        assert!(decode_output(&canonical_output(&vals)[..12]).is_err());
        // digests are stable and short
        assert_eq!(output_digest(b"abc").len(), 8);
        assert_eq!(output_digest(b"abc"), output_digest(b"abc"));
        assert_ne!(output_digest(b"abc"), output_digest(b"abd"));
    }
}
