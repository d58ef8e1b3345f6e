//! End-to-end shard proofs: a contiguous run of model layers executed
//! under commitment, with one proof object per shard.
//!
//! The prover commits every boundary tensor (activations, raw
//! accumulators, rescaled values) and strings the per-layer gadget proofs
//! onto one Fiat–Shamir transcript. Chaining inside a shard is free:
//! layer `i`'s output tensor *is* layer `i+1`'s input tensor, one
//! commitment reused byte-for-byte. Across shards the receiving prover
//! re-commits the tensor it was handed and opens the commitment
//! difference to the zero vector at a transcript-drawn point, so both
//! proofs are bound to the same hidden activation without revealing it.
//!
//! The verifier sees only commitments, proofs, and the public
//! architecture (shapes, scale, bit width, activation tables) — never a
//! plaintext weight or activation.

use crate::algebra::{CurveGroup, FieldElement, PrimeField};
use crate::commit::{Generators, PedersenCommitment};
use crate::gadgets::{
    build_function_table, prove_lookup, prove_matmul, prove_mle_opening, prove_relu,
    prove_rescale, verify_lookup, verify_matmul, verify_mle_opening, verify_relu,
    verify_rescale, CommittedTensor, GadgetError, LookupProof, MatMulDims, MatMulProof,
    MleOpening, ReluProof, RescaleProof, TableSpec,
};
use crate::model::{Activation, InferenceTrace, ModelError, ModelSpec};
use crate::transcript::Transcript;
use crate::wire::{Reader, WireError, Writer};
use rand::RngCore;
use std::time::Instant;
use thiserror::Error;

/// Container magic for serialized shard proofs.
pub const PROOF_MAGIC: &[u8; 4] = b"ZKDP";
/// Container magic for serialized shard commitments.
pub const COMMIT_MAGIC: &[u8; 4] = b"ZKDC";
const CONTAINER_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum DpsError {
    #[error("trace does not replay: {0}")]
    TraceMismatch(String),
    #[error("malformed proof: {0}")]
    MalformedProof(String),
    #[error("value {0} does not fit the scalar field's centered range")]
    FieldRange(i64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

impl From<WireError> for DpsError {
    fn from(e: WireError) -> Self {
        DpsError::MalformedProof(e.to_string())
    }
}

// ---- public statement ----

/// Shape of one layer, without its weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerShape {
    pub d_in: usize,
    pub d_out: usize,
    pub activation: Activation,
}

/// Everything the verifier may know about a model: shapes, scales, and
/// activation tables — no weight values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub scale: u64,
    pub q_bits: u32,
    pub layers: Vec<LayerShape>,
}

impl Architecture {
    pub fn of(model: &ModelSpec) -> Self {
        Architecture {
            scale: model.scale,
            q_bits: model.q_bits,
            layers: model
                .layers
                .iter()
                .map(|l| LayerShape {
                    d_in: l.d_in,
                    d_out: l.d_out,
                    activation: l.activation.clone(),
                })
                .collect(),
        }
    }

    /// Canonical bytes, absorbed into every shard transcript so proofs
    /// bind to the architecture they were made for.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u64(self.scale);
        w.u32(self.q_bits);
        w.u32(self.layers.len() as u32);
        for l in &self.layers {
            w.u32(l.d_in as u32);
            w.u32(l.d_out as u32);
            match &l.activation {
                Activation::None => w.u8(0),
                Activation::Relu => w.u8(1),
                Activation::Table(spec) => {
                    w.u8(2);
                    w.raw(&spec.to_bytes());
                }
            }
        }
        w.finish()
    }
}

/// Padded (power-of-two) input width of a layer.
pub fn padded_in(shape_in: usize) -> usize {
    shape_in.next_power_of_two().max(2)
}

/// Padded (power-of-two) output width of a layer.
pub fn padded_out(shape_out: usize) -> usize {
    shape_out.next_power_of_two().max(2)
}

/// Largest commitment dimension any tensor in these layers needs, so
/// callers can size their generator basis once.
pub fn required_capacity(arch: &Architecture) -> usize {
    let mut cap = 2usize;
    // rescale range table over -scale/2 ..= scale/2
    let rem_rows = (2 * (arch.scale / 2) + 1).next_power_of_two().max(2) as usize;
    cap = cap.max(rem_rows);
    for l in &arch.layers {
        let (k, p) = (padded_in(l.d_in), padded_out(l.d_out));
        cap = cap.max(k * p).max(k).max(p);
        if let Activation::Table(spec) = &l.activation {
            let rows = ((spec.hi - spec.lo) as u64 + 1).next_power_of_two().max(2) as usize;
            cap = cap.max(rows);
        }
    }
    cap
}

// ---- commitments ----

/// Published before any input is chosen: one weight and one bias
/// commitment per layer of the shard.
#[derive(Debug, Clone)]
pub struct ShardCommitment {
    pub profile_id: u8,
    pub start: u32,
    pub end: u32,
    pub weights: Vec<(PedersenCommitment, PedersenCommitment)>,
}

/// The prover's side of [`ShardCommitment`]: the same tensors with their
/// blinds, needed later by `prove_shard`.
pub struct ShardSecrets {
    start: usize,
    end: usize,
    weights: Vec<(CommittedTensor, CommittedTensor)>,
}

fn to_field_checked(fp: &PrimeField, vals: &[i64]) -> Result<Vec<FieldElement>, DpsError> {
    vals.iter()
        .map(|v| {
            let fe = fp.from_i64(*v).map_err(|_| DpsError::FieldRange(*v))?;
            if fp.to_centered_i64(fe) != Some(*v) {
                return Err(DpsError::FieldRange(*v));
            }
            Ok(fe)
        })
        .collect()
}

/// Pad a `d_in x d_out` column-major matrix to `k x p` with zeros.
fn pad_matrix(
    fp: &PrimeField,
    vals: &[i64],
    d_in: usize,
    d_out: usize,
    k: usize,
    p: usize,
) -> Result<Vec<FieldElement>, DpsError> {
    let field_vals = to_field_checked(fp, vals)?;
    let mut out = vec![FieldElement::ZERO; k * p];
    for j in 0..d_out {
        for b in 0..d_in {
            out[b + k * j] = field_vals[b + d_in * j];
        }
    }
    Ok(out)
}

fn pad_vector(
    fp: &PrimeField,
    vals: &[i64],
    width: usize,
    pad: FieldElement,
) -> Result<Vec<FieldElement>, DpsError> {
    let mut out = to_field_checked(fp, vals)?;
    out.resize(width, pad);
    Ok(out)
}

/// Commit layer weights `start..end` (0-based, half-open). Safe to
/// publish before the input exists; the blinds stay with the prover.
pub fn commit_shard(
    group: &CurveGroup,
    gens: &Generators,
    rng: &mut impl RngCore,
    model: &ModelSpec,
    start: usize,
    end: usize,
) -> Result<(ShardCommitment, ShardSecrets), DpsError> {
    model.validate()?;
    if start >= end || end > model.depth() {
        return Err(DpsError::Model(ModelError::BadCutPoint(end, model.depth())));
    }
    let fp = group.scalar_field();
    let mut published = Vec::with_capacity(end - start);
    let mut secret = Vec::with_capacity(end - start);
    for layer in &model.layers[start..end] {
        let (k, p) = (padded_in(layer.d_in), padded_out(layer.d_out));
        let w_vals = pad_matrix(fp, &layer.weights, layer.d_in, layer.d_out, k, p)?;
        let b_vals = pad_vector(fp, &layer.bias, p, FieldElement::ZERO)?;
        let w_t = CommittedTensor::commit(group, gens, rng, w_vals)?;
        let b_t = CommittedTensor::commit(group, gens, rng, b_vals)?;
        published.push((w_t.commitment.clone(), b_t.commitment.clone()));
        secret.push((w_t, b_t));
    }
    Ok((
        ShardCommitment {
            profile_id: group.id(),
            start: start as u32,
            end: end as u32,
            weights: published,
        },
        ShardSecrets { start, end, weights: secret },
    ))
}

// ---- proofs ----

#[derive(Debug, Clone)]
pub enum ActivationProof {
    None,
    Relu(ReluProof),
    Table(LookupProof),
}

#[derive(Debug, Clone)]
pub struct LayerProof {
    pub c_raw: PedersenCommitment,
    pub c_y: PedersenCommitment,
    pub c_out: PedersenCommitment,
    pub matmul: MatMulProof,
    pub rescale: RescaleProof,
    pub activation: ActivationProof,
}

#[derive(Debug, Clone)]
pub struct ShardProof {
    pub profile_id: u8,
    pub start: u32,
    pub end: u32,
    pub c_input: PedersenCommitment,
    /// Present iff this shard continues another: opens the difference
    /// between the upstream output commitment and `c_input` to zero.
    pub handoff: Option<MleOpening>,
    pub layers: Vec<LayerProof>,
}

/// Result of proving one shard.
#[derive(Debug)]
pub struct ProvedShard {
    pub proof: ShardProof,
    /// The committed input tensor (values + blind), kept by the prover.
    pub input: CommittedTensor,
    /// The committed output tensor, handed to the next shard's prover
    /// over a secure channel.
    pub boundary: CommittedTensor,
    pub elapsed_ms: u128,
}

fn shard_transcript(
    group: &CurveGroup,
    arch: &Architecture,
    start: u32,
    end: u32,
    commitment: &ShardCommitment,
) -> Transcript {
    let mut tr = Transcript::fiat_shamir("zkdps/v1/shard");
    let mut header = Writer::new();
    header.u8(group.id());
    header.u32(start);
    header.u32(end);
    header.raw(&arch.to_bytes());
    tr.absorb("zkdps/v1/header", &header.finish());
    let mut wbytes = Writer::new();
    for (cw, cb) in &commitment.weights {
        crate::gadgets::write_commitment(&mut wbytes, group, cw);
        crate::gadgets::write_commitment(&mut wbytes, group, cb);
    }
    tr.absorb("zkdps/v1/weights", &wbytes.finish());
    tr
}

fn commitment_bytes(group: &CurveGroup, c: &PedersenCommitment) -> Vec<u8> {
    let mut w = Writer::new();
    crate::gadgets::write_commitment(&mut w, group, c);
    w.finish()
}

fn handoff_point(tr: &mut Transcript, fp: &PrimeField, num_vars: usize) -> Vec<FieldElement> {
    (0..num_vars)
        .map(|i| tr.challenge_field(&format!("zkdps/v1/handoff/u{i}"), fp))
        .collect()
}

/// Prove one shard against a captured trace. `incoming` is the upstream
/// shard's boundary tensor (received over a secure channel) when this
/// shard is not the first.
pub fn prove_shard(
    group: &CurveGroup,
    gens: &Generators,
    rng: &mut impl RngCore,
    model: &ModelSpec,
    secrets: &ShardSecrets,
    commitment: &ShardCommitment,
    trace: &InferenceTrace,
    incoming: Option<&CommittedTensor>,
) -> Result<ProvedShard, DpsError> {
    let t0 = Instant::now();
    let fp = group.scalar_field();
    let (start, end) = (secrets.start, secrets.end);
    if trace.start != start || trace.layers.len() != end - start {
        return Err(DpsError::TraceMismatch(format!(
            "trace covers layers {}..{}, shard is {start}..{end}",
            trace.start,
            trace.start + trace.layers.len()
        )));
    }
    // The trace must replay exactly under the model's own semantics.
    let (_, replay) = crate::model::forward_range(model, &trace.layers[0].input, start, end)?;
    if &replay != trace {
        return Err(DpsError::TraceMismatch(
            "captured tensors disagree with recomputation".into(),
        ));
    }

    let arch = Architecture::of(model);
    let mut tr = shard_transcript(group, &arch, start as u32, end as u32, commitment);

    // Commit the shard input with a fresh blind.
    let k0 = padded_in(model.layers[start].d_in);
    let input_vals = pad_vector(fp, &trace.layers[0].input, k0, FieldElement::ZERO)?;
    let input_t = CommittedTensor::commit(group, gens, rng, input_vals)?;
    tr.absorb("zkdps/v1/input", &commitment_bytes(group, &input_t.commitment));

    // Hand-off: open (upstream - ours) to the zero vector.
    let handoff = match incoming {
        None => None,
        Some(up) => {
            if up.values != input_t.values {
                return Err(DpsError::TraceMismatch(
                    "incoming boundary tensor disagrees with the trace input".into(),
                ));
            }
            tr.absorb("zkdps/v1/handoff", &commitment_bytes(group, &up.commitment));
            let diff_point = group.add(&up.commitment.point, &group.neg(&input_t.commitment.point));
            let diff = CommittedTensor {
                values: vec![FieldElement::ZERO; input_t.values.len()],
                blind: fp.sub(up.blind, input_t.blind),
                commitment: PedersenCommitment { point: diff_point, dim: input_t.values.len() },
            };
            let point = handoff_point(&mut tr, fp, diff.num_vars());
            Some(prove_mle_opening(group, gens, &mut tr, rng, &diff, &point)?)
        }
    };

    let mut cur = input_t.clone();
    let mut layers = Vec::with_capacity(end - start);
    for (li, layer) in model.layers[start..end].iter().enumerate() {
        let absolute = start + li;
        let lt = &trace.layers[li];
        let (k, p) = (padded_in(layer.d_in), padded_out(layer.d_out));
        let (w_t, b_t) = &secrets.weights[li];

        // matmul: raw = x * W
        tr.absorb(&format!("zkdps/v1/layer/{absolute}/matmul"), b"");
        let raw_vals = pad_vector(fp, &lt.raw, p, FieldElement::ZERO)?;
        let raw_t = CommittedTensor::commit(group, gens, rng, raw_vals)?;
        let dims = MatMulDims { m: 1, k, p };
        let matmul = prove_matmul(group, gens, &mut tr, rng, &cur, w_t, &raw_t, &dims)?;

        // rescale: y = round((raw + scale*bias) / scale)
        tr.absorb(&format!("zkdps/v1/layer/{absolute}/rescale"), b"");
        let (y_t, rescale) =
            prove_rescale(group, gens, &mut tr, rng, &raw_t, b_t, model.scale)?;

        // activation
        let (out_t, activation) = match &layer.activation {
            Activation::None => (y_t.clone(), ActivationProof::None),
            Activation::Relu => {
                tr.absorb(&format!("zkdps/v1/layer/{absolute}/relu"), b"");
                let (witness, proof) =
                    prove_relu(group, gens, &mut tr, rng, &y_t, model.q_bits)?;
                (witness.a, ActivationProof::Relu(proof))
            }
            Activation::Table(spec) => {
                tr.absorb(&format!("zkdps/v1/layer/{absolute}/lookup"), b"");
                let table = build_function_table(fp, spec)?;
                let pad = to_field_checked(fp, &[spec.quantized_output(0)?])?[0];
                let out_vals = pad_vector(fp, &lt.output, p, pad)?;
                let out_t = CommittedTensor::commit(group, gens, rng, out_vals)?;
                let proof =
                    prove_lookup(group, gens, &mut tr, rng, &table, &[y_t.clone(), out_t.clone()])?;
                (out_t, ActivationProof::Table(proof))
            }
        };

        layers.push(LayerProof {
            c_raw: raw_t.commitment.clone(),
            c_y: y_t.commitment.clone(),
            c_out: out_t.commitment.clone(),
            matmul,
            rescale,
            activation,
        });
        cur = out_t;
    }

    Ok(ProvedShard {
        proof: ShardProof {
            profile_id: group.id(),
            start: start as u32,
            end: end as u32,
            c_input: input_t.commitment.clone(),
            handoff,
            layers,
        },
        input: input_t,
        boundary: cur,
        elapsed_ms: t0.elapsed().as_millis(),
    })
}

// ---- verification ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerReport {
    /// Absolute layer index in the model.
    pub layer: usize,
    pub accepted: bool,
    /// Which check failed, when one did: `matmul`, `rescale`, `relu`,
    /// `lookup`, `activation-chain`, or `skipped` for layers after the
    /// first failure (the transcript has diverged by then).
    pub failed_check: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub accepted: bool,
    /// Outcome of the boundary hand-off check, when one was expected.
    pub handoff: Option<bool>,
    pub layers: Vec<LayerReport>,
    pub proof_size: usize,
    pub verify_ms: u128,
}

/// Verify one shard proof against the public architecture and the
/// published weight commitments. `upstream` is the previous shard's
/// output commitment when this shard continues another.
pub fn verify_shard(
    group: &CurveGroup,
    gens: &Generators,
    arch: &Architecture,
    commitment: &ShardCommitment,
    upstream: Option<&PedersenCommitment>,
    proof: &ShardProof,
) -> Result<VerificationReport, DpsError> {
    let t0 = Instant::now();
    let fp = group.scalar_field();
    let (start, end) = (proof.start as usize, proof.end as usize);
    if proof.profile_id != group.id() {
        return Err(DpsError::MalformedProof(format!(
            "proof is for profile {}, verifier runs profile {}",
            proof.profile_id,
            group.id()
        )));
    }
    if commitment.profile_id != group.id()
        || commitment.start != proof.start
        || commitment.end != proof.end
    {
        return Err(DpsError::MalformedProof(
            "weight commitment does not match the proof's shard range".into(),
        ));
    }
    if start >= end || end > arch.layers.len() {
        return Err(DpsError::MalformedProof(format!(
            "shard range {start}..{end} outside a {}-layer model",
            arch.layers.len()
        )));
    }
    if proof.layers.len() != end - start || commitment.weights.len() != end - start {
        return Err(DpsError::MalformedProof("layer count mismatch".into()));
    }
    if upstream.is_some() != proof.handoff.is_some() {
        return Err(DpsError::MalformedProof(
            "hand-off proof presence does not match the claimed chaining".into(),
        ));
    }
    let k0 = padded_in(arch.layers[start].d_in);
    if proof.c_input.dim != k0 {
        return Err(DpsError::MalformedProof(format!(
            "input commitment dimension {} does not match padded width {k0}",
            proof.c_input.dim
        )));
    }

    let mut tr = shard_transcript(group, arch, proof.start, proof.end, commitment);
    tr.absorb("zkdps/v1/input", &commitment_bytes(group, &proof.c_input));

    let proof_size = proof.to_bytes(group).len();
    let mut handoff_ok = None;
    if let (Some(up), Some(opening)) = (upstream, &proof.handoff) {
        tr.absorb("zkdps/v1/handoff", &commitment_bytes(group, up));
        let ok = up.dim == k0 && {
            let diff = PedersenCommitment {
                point: group.add(&up.point, &group.neg(&proof.c_input.point)),
                dim: k0,
            };
            let point = handoff_point(&mut tr, fp, k0.trailing_zeros() as usize);
            opening.claim == FieldElement::ZERO
                && verify_mle_opening(group, gens, &mut tr, &diff, &point, opening)
        };
        handoff_ok = Some(ok);
        if !ok {
            // Transcript state is unreliable from here on; report and stop.
            let layers = (start..end)
                .map(|layer| LayerReport {
                    layer,
                    accepted: false,
                    failed_check: Some("skipped".into()),
                })
                .collect();
            return Ok(VerificationReport {
                accepted: false,
                handoff: handoff_ok,
                layers,
                proof_size,
                verify_ms: t0.elapsed().as_millis(),
            });
        }
    }

    let mut reports = Vec::with_capacity(end - start);
    let mut cur_in = proof.c_input.clone();
    let mut failed = false;
    for (li, shape) in arch.layers[start..end].iter().enumerate() {
        let absolute = start + li;
        if failed {
            reports.push(LayerReport {
                layer: absolute,
                accepted: false,
                failed_check: Some("skipped".into()),
            });
            continue;
        }
        let lp = &proof.layers[li];
        let (k, p) = (padded_in(shape.d_in), padded_out(shape.d_out));
        let (c_w, c_b) = &commitment.weights[li];

        let fail = |check: &str| LayerReport {
            layer: absolute,
            accepted: false,
            failed_check: Some(check.into()),
        };

        tr.absorb(&format!("zkdps/v1/layer/{absolute}/matmul"), b"");
        let dims = MatMulDims { m: 1, k, p };
        if !verify_matmul(group, gens, &mut tr, &cur_in, c_w, &lp.c_raw, &dims, &lp.matmul) {
            reports.push(fail("matmul"));
            failed = true;
            continue;
        }

        tr.absorb(&format!("zkdps/v1/layer/{absolute}/rescale"), b"");
        if !verify_rescale(group, gens, &mut tr, &lp.c_raw, c_b, &lp.c_y, arch.scale, &lp.rescale)
        {
            reports.push(fail("rescale"));
            failed = true;
            continue;
        }

        let act_ok = match (&shape.activation, &lp.activation) {
            (Activation::None, ActivationProof::None) => {
                // output must be the rescaled tensor, byte for byte
                if commitment_bytes(group, &lp.c_out) == commitment_bytes(group, &lp.c_y) {
                    true
                } else {
                    reports.push(fail("activation-chain"));
                    false
                }
            }
            (Activation::Relu, ActivationProof::Relu(rp)) => {
                tr.absorb(&format!("zkdps/v1/layer/{absolute}/relu"), b"");
                if verify_relu(group, gens, &mut tr, &lp.c_y, &lp.c_out, arch.q_bits, rp) {
                    true
                } else {
                    reports.push(fail("relu"));
                    false
                }
            }
            (Activation::Table(spec), ActivationProof::Table(lkp)) => {
                tr.absorb(&format!("zkdps/v1/layer/{absolute}/lookup"), b"");
                let Ok(table) = build_function_table(fp, spec) else {
                    reports.push(fail("lookup"));
                    failed = true;
                    continue;
                };
                if verify_lookup(
                    group,
                    gens,
                    &mut tr,
                    &table,
                    &[lp.c_y.clone(), lp.c_out.clone()],
                    lkp,
                ) {
                    true
                } else {
                    reports.push(fail("lookup"));
                    false
                }
            }
            _ => {
                return Err(DpsError::MalformedProof(format!(
                    "layer {absolute}: activation proof kind does not match the architecture"
                )))
            }
        };
        if !act_ok {
            failed = true;
            continue;
        }

        reports.push(LayerReport { layer: absolute, accepted: true, failed_check: None });
        cur_in = lp.c_out.clone();
    }

    let accepted = !failed && handoff_ok != Some(false);
    Ok(VerificationReport {
        accepted,
        handoff: handoff_ok,
        layers: reports,
        proof_size,
        verify_ms: t0.elapsed().as_millis(),
    })
}

// ---- serialization ----

impl ShardCommitment {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(COMMIT_MAGIC);
        w.u8(CONTAINER_VERSION);
        w.u8(self.profile_id);
        w.u32(self.start);
        w.u32(self.end);
        w.u32(self.weights.len() as u32);
        for (cw, cb) in &self.weights {
            crate::gadgets::write_commitment(&mut w, group, cw);
            crate::gadgets::write_commitment(&mut w, group, cb);
        }
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, DpsError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != COMMIT_MAGIC {
            return Err(DpsError::MalformedProof("bad commitment magic".into()));
        }
        if r.u8()? != CONTAINER_VERSION {
            return Err(DpsError::MalformedProof("unsupported container version".into()));
        }
        let profile_id = r.u8()?;
        let start = r.u32()?;
        let end = r.u32()?;
        let count = r.u32()?;
        if count as u64 != u64::from(end.saturating_sub(start)) || count > 1 << 12 {
            return Err(DpsError::MalformedProof("implausible layer count".into()));
        }
        let mut weights = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let cw = crate::gadgets::read_commitment(&mut r, group)?;
            let cb = crate::gadgets::read_commitment(&mut r, group)?;
            weights.push((cw, cb));
        }
        r.expect_end()?;
        Ok(Self { profile_id, start, end, weights })
    }
}

impl ShardProof {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(PROOF_MAGIC);
        w.u8(CONTAINER_VERSION);
        w.u8(self.profile_id);
        w.u32(self.start);
        w.u32(self.end);
        crate::gadgets::write_commitment(&mut w, group, &self.c_input);
        match &self.handoff {
            None => w.u8(0),
            Some(op) => {
                w.u8(1);
                let mut hw = Writer::new();
                crate::gadgets::write_mle_opening(&mut hw, group, group.scalar_field(), op);
                w.bytes(&hw.finish());
            }
        }
        w.u32(self.layers.len() as u32);
        for l in &self.layers {
            crate::gadgets::write_commitment(&mut w, group, &l.c_raw);
            crate::gadgets::write_commitment(&mut w, group, &l.c_y);
            crate::gadgets::write_commitment(&mut w, group, &l.c_out);
            w.bytes(&l.matmul.to_bytes(group));
            w.bytes(&l.rescale.to_bytes(group));
            match &l.activation {
                ActivationProof::None => w.u8(0),
                ActivationProof::Relu(p) => {
                    w.u8(1);
                    w.bytes(&p.to_bytes(group));
                }
                ActivationProof::Table(p) => {
                    w.u8(2);
                    w.bytes(&p.to_bytes(group));
                }
            }
        }
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, DpsError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != PROOF_MAGIC {
            return Err(DpsError::MalformedProof("bad proof magic".into()));
        }
        if r.u8()? != CONTAINER_VERSION {
            return Err(DpsError::MalformedProof("unsupported container version".into()));
        }
        let profile_id = r.u8()?;
        let start = r.u32()?;
        let end = r.u32()?;
        let c_input = crate::gadgets::read_commitment(&mut r, group)?;
        let handoff = match r.u8()? {
            0 => None,
            1 => {
                let hb = r.bytes()?.to_vec();
                let mut hr = Reader::new(&hb);
                let op = crate::gadgets::read_mle_opening(&mut hr, group, group.scalar_field())?;
                hr.expect_end()?;
                Some(op)
            }
            _ => return Err(DpsError::MalformedProof("bad hand-off flag".into())),
        };
        let count = r.u32()?;
        if count as u64 != u64::from(end.saturating_sub(start)) || count > 1 << 12 {
            return Err(DpsError::MalformedProof("implausible layer count".into()));
        }
        let mut layers = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let c_raw = crate::gadgets::read_commitment(&mut r, group)?;
            let c_y = crate::gadgets::read_commitment(&mut r, group)?;
            let c_out = crate::gadgets::read_commitment(&mut r, group)?;
            let matmul = MatMulProof::from_bytes(group, r.bytes()?)?;
            let rescale = RescaleProof::from_bytes(group, r.bytes()?)?;
            let activation = match r.u8()? {
                0 => ActivationProof::None,
                1 => ActivationProof::Relu(ReluProof::from_bytes(group, r.bytes()?)?),
                2 => ActivationProof::Table(LookupProof::from_bytes(group, r.bytes()?)?),
                _ => return Err(DpsError::MalformedProof("bad activation tag".into())),
            };
            layers.push(LayerProof { c_raw, c_y, c_out, matmul, rescale, activation });
        }
        r.expect_end()?;
        Ok(Self { profile_id, start, end, c_input, handoff, layers })
    }
}

/// An activation table spec referenced by a lookup layer, if any — used
/// by callers that need to rebuild tables for scheduling or display.
pub fn layer_table_spec(arch: &Architecture, layer: usize) -> Option<&TableSpec> {
    match &arch.layers.get(layer)?.activation {
        Activation::Table(spec) => Some(spec),
        _ => None,
    }
}

/// Multiply count of a layer (used by cost-based scheduling).
pub fn layer_multiply_count(shape: &LayerShape) -> u64 {
    shape.d_in as u64 * shape.d_out as u64
}
