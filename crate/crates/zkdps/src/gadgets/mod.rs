//! Layer gadgets: reductions from neural-network layer semantics to
//! sum-check instances plus commitment openings.
//!
//! Every gadget follows the same shape. The prover holds tensors committed
//! with [`CommittedTensor`] (values padded to a power of two — the pad
//! region is part of the witness). Public challenges reduce the layer
//! identity to one or two sum-check runs; the reduced claims are then
//! discharged by multilinear-evaluation openings ([`MleOpening`]) of the
//! committed tensors at the sum-check challenge point, and the verifier
//! recombines those opened values arithmetically.
//!
//! Claimed evaluation values are public: the scalar commitment side of
//! each opening uses a zero blind, so the verifier can reconstruct it from
//! the claim. Hiding of the committed tensors themselves is preserved —
//! only specific random evaluations of their extensions are revealed.

mod lookup;
mod matmul;
mod relu;
mod rescale;
mod table;

pub use lookup::{
    lookup_outputs, multiplicities, prove_lookup, prove_lookup_with_witness, verify_lookup,
    LookupProof, LookupTable, CHI_RETRY_CAP,
};
pub use matmul::{prove_matmul, verify_matmul, MatMulDims, MatMulProof};
pub use relu::{
    prove_relu, prove_relu_with_witness, relu_decompose, verify_relu, ReluProof, ReluWitness,
    MAX_Q,
};
pub use rescale::{
    prove_rescale, prove_rescale_with_witness, remainder_table, round_half_even_div,
    verify_rescale, RescaleProof,
};
pub use table::{build_function_table, TableFn, TableSpec, TABLE_ROW_CAP};

use crate::algebra::{CurveGroup, FieldElement, GroupPoint, PrimeField};
use crate::commit::{
    inner_product, prove_opening, verify_opening, CommitError, Generators, OpeningProof,
    PedersenCommitment,
};
use crate::poly::eq_evals;
use crate::sumcheck::SumCheckError;
use crate::transcript::Transcript;
use crate::wire::{Reader, WireError, Writer};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("magnitude overflow: |{0}| does not fit in {1} bits")]
    MagnitudeOverflow(i64, u32),
    #[error("witness row {0} is not present in the lookup table")]
    EntryNotInTable(usize),
    #[error("table would have {0} rows, cap is {1}")]
    DomainTooLarge(u64, u64),
    #[error("invalid table domain: {0}")]
    BadDomain(String),
    #[error("protocol failure: {0}")]
    Protocol(String),
    #[error(transparent)]
    Commit(#[from] CommitError),
    #[error(transparent)]
    SumCheck(#[from] SumCheckError),
}

impl From<WireError> for GadgetError {
    fn from(e: WireError) -> Self {
        GadgetError::Protocol(format!("malformed proof bytes: {e}"))
    }
}

impl From<crate::poly::PolyError> for GadgetError {
    fn from(e: crate::poly::PolyError) -> Self {
        GadgetError::ShapeMismatch(e.to_string())
    }
}

/// Pads to the next power of two (and to at least 2 entries, so every
/// tensor has at least one hypercube variable).
pub fn pad_to_pow2(mut values: Vec<FieldElement>, pad: FieldElement) -> Vec<FieldElement> {
    let target = values.len().max(2).next_power_of_two();
    values.resize(target, pad);
    values
}

/// A tensor the prover has committed to: the padded values, the blinding
/// factor, and the resulting commitment point.
#[derive(Debug, Clone)]
pub struct CommittedTensor {
    pub values: Vec<FieldElement>,
    pub blind: FieldElement,
    pub commitment: PedersenCommitment,
}

impl CommittedTensor {
    /// Commits with a fresh random blind. `values.len()` must already be a
    /// power of two (see [`pad_to_pow2`]).
    pub fn commit(
        group: &CurveGroup,
        gens: &Generators,
        rng: &mut impl RngCore,
        values: Vec<FieldElement>,
    ) -> Result<Self, GadgetError> {
        if !values.len().is_power_of_two() {
            return Err(GadgetError::ShapeMismatch(format!(
                "committed tensor length {} is not a power of two",
                values.len()
            )));
        }
        let blind = group.scalar_field().random(rng);
        let commitment = gens.commit_vector(group, &values, blind)?;
        Ok(Self {
            values,
            blind,
            commitment,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn mle(&self) -> crate::poly::MultilinearPoly {
        crate::poly::MultilinearPoly::new(self.values.clone()).expect("power of two")
    }
}

/// A claimed multilinear evaluation `S~(point) = claim` plus the opening
/// argument backing it against the tensor's commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MleOpening {
    pub claim: FieldElement,
    pub proof: OpeningProof,
}

/// Opens `tensor`'s extension at `point`. The weight vector is the
/// equality table of `point`, under which the committed-vector inner
/// product *is* the multilinear evaluation.
pub fn prove_mle_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    tensor: &CommittedTensor,
    point: &[FieldElement],
) -> Result<MleOpening, GadgetError> {
    let fp = group.scalar_field();
    if point.len() != tensor.num_vars() {
        return Err(GadgetError::ShapeMismatch(format!(
            "opening point has {} coordinates, tensor has {} variables",
            point.len(),
            tensor.num_vars()
        )));
    }
    let y = eq_evals(fp, point);
    let claim = inner_product(fp, &tensor.values, &y);
    let proof = prove_opening(
        group,
        gens,
        tr,
        rng,
        &tensor.values,
        tensor.blind,
        claim,
        FieldElement::ZERO,
        &y,
    )?;
    Ok(MleOpening { claim, proof })
}

/// Verifies a claimed evaluation against a commitment. The claim is
/// public, so the scalar-side commitment is reconstructed with zero blind.
pub fn verify_mle_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    commitment: &PedersenCommitment,
    point: &[FieldElement],
    opening: &MleOpening,
) -> bool {
    let fp = group.scalar_field();
    if commitment.dim != 1usize << point.len().min(63) {
        return false;
    }
    let y = eq_evals(fp, point);
    let c_t = gens.commit_scalar(group, opening.claim, FieldElement::ZERO);
    verify_opening(group, gens, tr, commitment, &c_t, &y, &opening.proof)
}

/// Opens the plain sum of a committed vector (`y` = all-ones): the claim
/// of the returned opening is the public sum.
pub fn prove_sum_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    tensor: &CommittedTensor,
) -> Result<MleOpening, GadgetError> {
    let fp = group.scalar_field();
    let ones = vec![fp.one(); tensor.values.len()];
    let claim = inner_product(fp, &tensor.values, &ones);
    let proof = prove_opening(
        group,
        gens,
        tr,
        rng,
        &tensor.values,
        tensor.blind,
        claim,
        FieldElement::ZERO,
        &ones,
    )?;
    Ok(MleOpening { claim, proof })
}

pub fn verify_sum_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    commitment: &PedersenCommitment,
    opening: &MleOpening,
) -> bool {
    let fp = group.scalar_field();
    let ones = vec![fp.one(); commitment.dim];
    let c_t = gens.commit_scalar(group, opening.claim, FieldElement::ZERO);
    verify_opening(group, gens, tr, commitment, &c_t, &ones, &opening.proof)
}

// --- shared wire helpers for gadget proof encodings ---

pub(crate) fn write_point(w: &mut Writer, group: &CurveGroup, p: &GroupPoint) {
    w.raw(&group.compress(p));
}

pub(crate) fn read_point(r: &mut Reader, group: &CurveGroup) -> Result<GroupPoint, GadgetError> {
    let b = r.take(group.compressed_len())?;
    group
        .decompress(b)
        .map_err(|e| GadgetError::Protocol(format!("bad point encoding: {e}")))
}

pub(crate) fn write_commitment(w: &mut Writer, group: &CurveGroup, c: &PedersenCommitment) {
    write_point(w, group, &c.point);
    w.u32(c.dim as u32);
}

pub(crate) fn read_commitment(
    r: &mut Reader,
    group: &CurveGroup,
) -> Result<PedersenCommitment, GadgetError> {
    let point = read_point(r, group)?;
    let dim = r.u32()? as usize;
    if dim > (1 << 24) {
        return Err(GadgetError::Protocol("implausible commitment dim".into()));
    }
    Ok(PedersenCommitment { point, dim })
}

pub(crate) fn write_scalar(w: &mut Writer, fp: &PrimeField, v: FieldElement) {
    w.raw(&fp.to_bytes(v));
}

pub(crate) fn read_scalar(r: &mut Reader, fp: &PrimeField) -> Result<FieldElement, GadgetError> {
    let b = r.take(fp.byte_len())?;
    fp.from_bytes(b)
        .map_err(|e| GadgetError::Protocol(format!("bad scalar encoding: {e}")))
}

pub(crate) fn write_mle_opening(
    w: &mut Writer,
    group: &CurveGroup,
    fp: &PrimeField,
    o: &MleOpening,
) {
    write_scalar(w, fp, o.claim);
    w.bytes(&o.proof.to_bytes(group));
}

pub(crate) fn read_mle_opening(
    r: &mut Reader,
    group: &CurveGroup,
    fp: &PrimeField,
) -> Result<MleOpening, GadgetError> {
    let claim = read_scalar(r, fp)?;
    let blob = r.bytes()?;
    let proof = OpeningProof::from_bytes(group, blob)
        .map_err(|e| GadgetError::Protocol(format!("bad opening: {e}")))?;
    Ok(MleOpening { claim, proof })
}
