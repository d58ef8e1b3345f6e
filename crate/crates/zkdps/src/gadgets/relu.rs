//! ReLU gadget via sign/magnitude bit decomposition.
//!
//! Each pre-activation `z` (centered representative, `|z| < 2^Q`) is
//! decomposed into a sign bit `z_0` (`1` iff `z >= 0` — in particular
//! `sign(0) = 1`) and magnitude bits `z_1..z_Q`, most significant first,
//! with `m = sum_k 2^{Q-k} z_k = |z|`. Three families of per-element
//! constraints pin the output `a = max(0, z)`:
//!
//! * booleanity: `z_i (z_i - 1) = 0` for every bit tensor,
//! * recomposition: `(2 z_0 - 1) m - z = 0`,
//! * output: `z_0 m - a = 0`.
//!
//! They are merged into one expression with powers of a transcript
//! challenge `r`, batched across elements by a zero-check (sum-check of
//! the expression against the equality table of a random point `u`), and
//! finished with multilinear openings of `z`, `a`, and every bit tensor at
//! the sum-check point. The verifier recombines those opened values and
//! `m~ = sum_k 2^{Q-k} z_k~` — linearity lets it derive the magnitude
//! evaluation without a separate commitment.

use super::{
    pad_to_pow2, read_commitment, read_mle_opening, write_commitment, write_mle_opening,
    CommittedTensor, GadgetError, MleOpening,
};
use crate::algebra::{CurveGroup, FieldElement, PrimeField};
use crate::commit::{Generators, PedersenCommitment};
use crate::poly::{eq_point, MultilinearPoly};
use crate::sumcheck::{self, Oracle, SumCheckProof, Term};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use rand::RngCore;

/// Highest supported bit width; keeps `2^Q` inside `i64`.
pub const MAX_Q: u32 = 62;

/// Prover-side decomposition: output tensor and the `Q+1` bit tensors.
pub struct ReluWitness {
    pub a: CommittedTensor,
    pub bits: Vec<CommittedTensor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReluProof {
    pub bit_commitments: Vec<PedersenCommitment>,
    pub sumcheck: SumCheckProof,
    pub open_z: MleOpening,
    pub open_a: MleOpening,
    pub open_bits: Vec<MleOpening>,
}

/// Plain decomposition, no commitments: returns `(a, bits)` where `bits`
/// has `Q+1` tensors (sign first) of the same length as `z`.
pub fn relu_decompose(
    fp: &PrimeField,
    z: &[FieldElement],
    q: u32,
) -> Result<(Vec<FieldElement>, Vec<Vec<FieldElement>>), GadgetError> {
    if q == 0 || q > MAX_Q {
        return Err(GadgetError::BadDomain(format!(
            "bit width {q} outside 1..={MAX_Q}"
        )));
    }
    let limit = 1i64 << q;
    let mut a = Vec::with_capacity(z.len());
    let mut bits = vec![Vec::with_capacity(z.len()); q as usize + 1];
    for v in z {
        let c = fp
            .to_centered_i64(*v)
            .ok_or(GadgetError::MagnitudeOverflow(i64::MAX, q))?;
        if c.abs() >= limit {
            return Err(GadgetError::MagnitudeOverflow(c, q));
        }
        let sign = i64::from(c >= 0);
        let mag = c.unsigned_abs();
        a.push(fp.from_u64(if c >= 0 { mag } else { 0 }));
        bits[0].push(fp.from_u64(sign as u64));
        for k in 1..=q {
            bits[k as usize].push(fp.from_u64((mag >> (q - k)) & 1));
        }
    }
    Ok((a, bits))
}

fn absorb_statement(
    group: &CurveGroup,
    tr: &mut Transcript,
    q: u32,
    c_z: &PedersenCommitment,
    c_a: &PedersenCommitment,
    c_bits: &[PedersenCommitment],
) {
    let mut w = Writer::new();
    w.u32(q);
    w.u32(c_z.dim as u32);
    tr.absorb("relu/params", &w.finish());
    tr.absorb("relu/c_z", &group.compress(&c_z.point));
    tr.absorb("relu/c_a", &group.compress(&c_a.point));
    for c in c_bits {
        tr.absorb("relu/c_bit", &group.compress(&c.point));
    }
}

/// The merged per-element identity as sum-check terms over the committed
/// tables. `m` is materialized as a derived table for proving; its
/// evaluation is recombined from bit openings when verifying.
fn identity_terms(
    fp: &PrimeField,
    q: u32,
    r: FieldElement,
    z: &MultilinearPoly,
    a: &MultilinearPoly,
    bits: &[MultilinearPoly],
) -> Vec<Term> {
    let n = z.len();
    let mut m_evals = vec![FieldElement::ZERO; n];
    for k in 1..=q as usize {
        let w = fp.from_u64(1u64 << (q as usize - k));
        for (mv, bv) in m_evals.iter_mut().zip(bits[k].evals()) {
            *mv = fp.add(*mv, fp.mul(w, *bv));
        }
    }
    let m = MultilinearPoly::new(m_evals).expect("power of two");

    let mut terms = vec![
        // (2 z0 - 1) m + r z0 m  =>  (2 + r) z0 m  - m
        Term::new(fp.add(fp.from_u64(2), r), vec![bits[0].clone(), m.clone()]),
        Term::new(fp.neg(fp.one()), vec![m]),
        Term::new(fp.neg(fp.one()), vec![z.clone()]),
        Term::new(fp.neg(r), vec![a.clone()]),
    ];
    let mut pow = fp.mul(r, r);
    for bit in bits.iter().take(q as usize + 1) {
        terms.push(Term::new(pow, vec![bit.clone(), bit.clone()]));
        terms.push(Term::new(fp.neg(pow), vec![bit.clone()]));
        pow = fp.mul(pow, r);
    }
    terms
}

/// Honest prover: decomposes `z`, commits the output and bit tensors, and
/// proves the batched identity. Returns the committed output activation
/// (for chaining into the next layer) and the proof.
pub fn prove_relu(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    z: &CommittedTensor,
    q: u32,
) -> Result<(ReluWitness, ReluProof), GadgetError> {
    let fp = group.scalar_field();
    let (a_vals, bit_vals) = relu_decompose(fp, &z.values, q)?;
    let a = CommittedTensor::commit(group, gens, rng, pad_to_pow2(a_vals, FieldElement::ZERO))?;
    let bits = bit_vals
        .into_iter()
        .map(|b| CommittedTensor::commit(group, gens, rng, b))
        .collect::<Result<Vec<_>, _>>()?;
    let witness = ReluWitness { a, bits };
    let proof = prove_relu_with_witness(group, gens, tr, rng, z, &witness, q)?;
    Ok((witness, proof))
}

/// Proves with a caller-supplied witness, valid or not. A witness
/// violating booleanity, recomposition, or the output relation produces a
/// proof whose final opening recombination fails — the harness for
/// soundness experiments.
pub fn prove_relu_with_witness(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    z: &CommittedTensor,
    witness: &ReluWitness,
    q: u32,
) -> Result<ReluProof, GadgetError> {
    let fp = group.scalar_field();
    if witness.bits.len() != q as usize + 1 {
        return Err(GadgetError::ShapeMismatch(format!(
            "expected {} bit tensors, got {}",
            q + 1,
            witness.bits.len()
        )));
    }
    let n = z.values.len();
    if witness.a.values.len() != n || witness.bits.iter().any(|b| b.values.len() != n) {
        return Err(GadgetError::ShapeMismatch(
            "output/bit tensors must match the input length".into(),
        ));
    }
    let bit_commitments: Vec<_> = witness.bits.iter().map(|b| b.commitment).collect();
    absorb_statement(
        group,
        tr,
        q,
        &z.commitment,
        &witness.a.commitment,
        &bit_commitments,
    );
    let r = tr.challenge_field("relu/r", fp);
    let v = z.num_vars();
    let u: Vec<_> = (0..v).map(|_| tr.challenge_field("relu/u", fp)).collect();

    let bit_mles: Vec<_> = witness.bits.iter().map(|b| b.mle()).collect();
    let terms = identity_terms(fp, q, r, &z.mle(), &witness.a.mle(), &bit_mles);
    let oracle = Oracle::with_eq(v, terms, u)?;
    let sc = sumcheck::prove_claimed(fp, &oracle, FieldElement::ZERO, tr);
    let pt = sc.challenges.clone();

    let open_z = super::prove_mle_opening(group, gens, tr, rng, z, &pt)?;
    let open_a = super::prove_mle_opening(group, gens, tr, rng, &witness.a, &pt)?;
    let mut open_bits = Vec::with_capacity(witness.bits.len());
    for b in &witness.bits {
        open_bits.push(super::prove_mle_opening(group, gens, tr, rng, b, &pt)?);
    }
    Ok(ReluProof {
        bit_commitments,
        sumcheck: sc,
        open_z,
        open_a,
        open_bits,
    })
}

pub fn verify_relu(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    c_z: &PedersenCommitment,
    c_a: &PedersenCommitment,
    q: u32,
    proof: &ReluProof,
) -> bool {
    let fp = group.scalar_field();
    if q == 0 || q > MAX_Q {
        return false;
    }
    let n = c_z.dim;
    if !n.is_power_of_two()
        || c_a.dim != n
        || proof.bit_commitments.len() != q as usize + 1
        || proof.open_bits.len() != q as usize + 1
        || proof.bit_commitments.iter().any(|c| c.dim != n)
    {
        return false;
    }
    absorb_statement(group, tr, q, c_z, c_a, &proof.bit_commitments);
    let r = tr.challenge_field("relu/r", fp);
    let v = n.trailing_zeros() as usize;
    let u: Vec<_> = (0..v).map(|_| tr.challenge_field("relu/u", fp)).collect();

    let Some((pt, final_claim)) =
        sumcheck::verify_rounds(fp, tr, v, 3, FieldElement::ZERO, &proof.sumcheck)
    else {
        return false;
    };

    if !super::verify_mle_opening(group, gens, tr, c_z, &pt, &proof.open_z) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, c_a, &pt, &proof.open_a) {
        return false;
    }
    for (c, o) in proof.bit_commitments.iter().zip(&proof.open_bits) {
        if !super::verify_mle_opening(group, gens, tr, c, &pt, o) {
            return false;
        }
    }

    // Recombine the identity from the opened evaluations.
    let t_bits: Vec<_> = proof.open_bits.iter().map(|o| o.claim).collect();
    let mut m_t = FieldElement::ZERO;
    for k in 1..=q as usize {
        let w = fp.from_u64(1u64 << (q as usize - k));
        m_t = fp.add(m_t, fp.mul(w, t_bits[k]));
    }
    let mut expr = fp.mul(fp.add(fp.from_u64(2), r), fp.mul(t_bits[0], m_t));
    expr = fp.sub(expr, m_t);
    expr = fp.sub(expr, proof.open_z.claim);
    expr = fp.sub(expr, fp.mul(r, proof.open_a.claim));
    let mut pow = fp.mul(r, r);
    for t in &t_bits {
        expr = fp.add(expr, fp.mul(pow, fp.sub(fp.mul(*t, *t), *t)));
        pow = fp.mul(pow, r);
    }
    final_claim == fp.mul(eq_point(fp, &u, &pt), expr)
}

impl ReluProof {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let fp = group.scalar_field();
        let mut w = Writer::new();
        w.u32(self.bit_commitments.len() as u32);
        for c in &self.bit_commitments {
            write_commitment(&mut w, group, c);
        }
        w.bytes(&self.sumcheck.to_bytes(fp));
        write_mle_opening(&mut w, group, fp, &self.open_z);
        write_mle_opening(&mut w, group, fp, &self.open_a);
        for o in &self.open_bits {
            write_mle_opening(&mut w, group, fp, o);
        }
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, GadgetError> {
        let fp = group.scalar_field();
        let mut r = Reader::new(bytes);
        let n_bits = r.u32()? as usize;
        if n_bits > MAX_Q as usize + 1 {
            return Err(GadgetError::Protocol("implausible bit-tensor count".into()));
        }
        let mut bit_commitments = Vec::with_capacity(n_bits);
        for _ in 0..n_bits {
            bit_commitments.push(read_commitment(&mut r, group)?);
        }
        let sumcheck = SumCheckProof::from_bytes(fp, r.bytes()?)?;
        let open_z = read_mle_opening(&mut r, group, fp)?;
        let open_a = read_mle_opening(&mut r, group, fp)?;
        let mut open_bits = Vec::with_capacity(n_bits);
        for _ in 0..n_bits {
            open_bits.push(read_mle_opening(&mut r, group, fp)?);
        }
        r.expect_end()?;
        Ok(Self {
            bit_commitments,
            sumcheck,
            open_z,
            open_a,
            open_bits,
        })
    }
}
