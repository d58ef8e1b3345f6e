//! Requantization gadget: divide by the scale with banker's rounding.
//!
//! A matmul over scale-`s` fixed-point operands leaves raw accumulators at
//! scale `s^2`. The layer output is `y = round((c_raw + s b) / s)` with
//! round-half-to-even, equivalently
//!
//! `c_raw + s b - s y - rem = 0` with `rem` in `[-floor(s/2), floor(s/2)]`.
//!
//! The linear relation is a degree-2 zero-check over the committed
//! tensors; the remainder bound is a membership lookup into the public
//! interval table, which pins `y` to the unique correctly rounded value
//! (ties are the one case where two remainders fit the interval, and the
//! parity of `s y` settles them only in the prover's witness — both
//! choices differ by one unit in the last place and the interval check
//! accepts exactly the two tie values `±s/2`, matching the rounding
//! contract's tolerance).

use super::{
    lookup::{prove_lookup, verify_lookup, LookupProof, LookupTable},
    read_commitment, read_mle_opening, write_commitment, write_mle_opening, CommittedTensor,
    GadgetError, MleOpening, TABLE_ROW_CAP,
};
use crate::algebra::{CurveGroup, FieldElement, PrimeField};
use crate::commit::{Generators, PedersenCommitment};
use crate::poly::eq_point;
use crate::sumcheck::{self, Oracle, SumCheckProof, Term};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use rand::RngCore;

/// Quotient and remainder of `num / den` under round-half-to-even:
/// `num = den * q + r` with `|r| <= den / 2`, ties resolved toward even
/// `q`. `den` must be positive.
pub fn round_half_even_div(num: i64, den: i64) -> (i64, i64) {
    assert!(den > 0, "denominator must be positive");
    let (q, r) = rhe_div_i128(num as i128, den as i128);
    (q as i64, r as i64)
}

fn rhe_div_i128(num: i128, den: i128) -> (i128, i128) {
    let mut q = num.div_euclid(den);
    let r0 = num.rem_euclid(den);
    if 2 * r0 > den || (2 * r0 == den && q % 2 != 0) {
        q += 1;
    }
    (q, num - den * q)
}

/// The public remainder-interval table `[-floor(s/2), floor(s/2)]`.
pub fn remainder_table(fp: &PrimeField, scale: u64) -> Result<LookupTable, GadgetError> {
    if scale == 0 {
        return Err(GadgetError::BadDomain("scale must be positive".into()));
    }
    let half = (scale / 2) as i64;
    let rows = 2 * half as u64 + 1;
    if rows > TABLE_ROW_CAP {
        return Err(GadgetError::DomainTooLarge(rows, TABLE_ROW_CAP));
    }
    let rows: Vec<Vec<_>> = (-half..=half)
        .map(|x| vec![fp.from_i64(x).expect("small magnitude")])
        .collect();
    LookupTable::new(1, 0, &rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RescaleProof {
    pub c_rem: PedersenCommitment,
    pub zero_check: SumCheckProof,
    pub open_raw: MleOpening,
    pub open_bias: MleOpening,
    pub open_y: MleOpening,
    pub open_rem: MleOpening,
    pub range: LookupProof,
}

fn absorb_statement(
    group: &CurveGroup,
    tr: &mut Transcript,
    scale: u64,
    c_raw: &PedersenCommitment,
    c_bias: &PedersenCommitment,
    c_y: &PedersenCommitment,
    c_rem: &PedersenCommitment,
) {
    let mut w = Writer::new();
    w.u64(scale);
    w.u32(c_raw.dim as u32);
    tr.absorb("rescale/params", &w.finish());
    tr.absorb("rescale/c_raw", &group.compress(&c_raw.point));
    tr.absorb("rescale/c_bias", &group.compress(&c_bias.point));
    tr.absorb("rescale/c_y", &group.compress(&c_y.point));
    tr.absorb("rescale/c_rem", &group.compress(&c_rem.point));
}

/// Honest prover: computes the rounded output and remainder, commits
/// both, and proves the relation. Returns the committed output tensor.
pub fn prove_rescale(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    c_raw: &CommittedTensor,
    bias: &CommittedTensor,
    scale: u64,
) -> Result<(CommittedTensor, RescaleProof), GadgetError> {
    let fp = group.scalar_field();
    if scale == 0 {
        return Err(GadgetError::BadDomain("scale must be positive".into()));
    }
    let mut y_vals = Vec::with_capacity(c_raw.values.len());
    let mut rem_vals = Vec::with_capacity(c_raw.values.len());
    for (raw, b) in c_raw.values.iter().zip(&bias.values) {
        let raw_c = fp
            .to_centered_i64(*raw)
            .ok_or(GadgetError::MagnitudeOverflow(i64::MAX, 63))?;
        let b_c = fp
            .to_centered_i64(*b)
            .ok_or(GadgetError::MagnitudeOverflow(i64::MAX, 63))?;
        let num = raw_c as i128 + scale as i128 * b_c as i128;
        let (q, r) = rhe_div_i128(num, scale as i128);
        let q = i64::try_from(q).map_err(|_| GadgetError::MagnitudeOverflow(i64::MAX, 63))?;
        y_vals.push(fp.from_i64(q).expect("fits"));
        rem_vals.push(fp.from_i64(r as i64).expect("remainder is small"));
    }
    prove_rescale_with_witness(group, gens, tr, rng, c_raw, bias, scale, y_vals, rem_vals)
}

/// Prover over caller-supplied output/remainder tensors, valid or not.
/// An output off by one with an uncorrected remainder fails the
/// zero-check; a compensated remainder leaves the interval table and the
/// range lookup refuses to prove it.
#[allow(clippy::too_many_arguments)]
pub fn prove_rescale_with_witness(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    c_raw: &CommittedTensor,
    bias: &CommittedTensor,
    scale: u64,
    y_vals: Vec<FieldElement>,
    rem_vals: Vec<FieldElement>,
) -> Result<(CommittedTensor, RescaleProof), GadgetError> {
    let fp = group.scalar_field();
    let n = c_raw.values.len();
    if bias.values.len() != n || y_vals.len() != n || rem_vals.len() != n {
        return Err(GadgetError::ShapeMismatch(
            "rescale tensors must share a length".into(),
        ));
    }
    let y = CommittedTensor::commit(group, gens, rng, y_vals)?;
    let rem = CommittedTensor::commit(group, gens, rng, rem_vals)?;
    absorb_statement(
        group,
        tr,
        scale,
        &c_raw.commitment,
        &bias.commitment,
        &y.commitment,
        &rem.commitment,
    );

    let s = fp.from_u64(scale);
    let v = c_raw.num_vars();
    let u: Vec<_> = (0..v).map(|_| tr.challenge_field("rescale/u", fp)).collect();
    let terms = vec![
        Term::new(fp.one(), vec![c_raw.mle()]),
        Term::new(s, vec![bias.mle()]),
        Term::new(fp.neg(s), vec![y.mle()]),
        Term::new(fp.neg(fp.one()), vec![rem.mle()]),
    ];
    let oracle = Oracle::with_eq(v, terms, u)?;
    let zero_check = sumcheck::prove_claimed(fp, &oracle, FieldElement::ZERO, tr);
    let pt = zero_check.challenges.clone();
    let open_raw = super::prove_mle_opening(group, gens, tr, rng, c_raw, &pt)?;
    let open_bias = super::prove_mle_opening(group, gens, tr, rng, bias, &pt)?;
    let open_y = super::prove_mle_opening(group, gens, tr, rng, &y, &pt)?;
    let open_rem = super::prove_mle_opening(group, gens, tr, rng, &rem, &pt)?;

    let table = remainder_table(fp, scale)?;
    let range = prove_lookup(group, gens, tr, rng, &table, std::slice::from_ref(&rem))?;

    let proof = RescaleProof {
        c_rem: rem.commitment,
        zero_check,
        open_raw,
        open_bias,
        open_y,
        open_rem,
        range,
    };
    Ok((y, proof))
}

pub fn verify_rescale(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    c_raw: &PedersenCommitment,
    c_bias: &PedersenCommitment,
    c_y: &PedersenCommitment,
    scale: u64,
    proof: &RescaleProof,
) -> bool {
    let fp = group.scalar_field();
    if scale == 0 {
        return false;
    }
    let n = c_raw.dim;
    if !n.is_power_of_two() || c_bias.dim != n || c_y.dim != n || proof.c_rem.dim != n {
        return false;
    }
    absorb_statement(group, tr, scale, c_raw, c_bias, c_y, &proof.c_rem);

    let s = fp.from_u64(scale);
    let v = n.trailing_zeros() as usize;
    let u: Vec<_> = (0..v).map(|_| tr.challenge_field("rescale/u", fp)).collect();
    let Some((pt, fc)) =
        sumcheck::verify_rounds(fp, tr, v, 2, FieldElement::ZERO, &proof.zero_check)
    else {
        return false;
    };
    if !super::verify_mle_opening(group, gens, tr, c_raw, &pt, &proof.open_raw) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, c_bias, &pt, &proof.open_bias) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, c_y, &pt, &proof.open_y) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, &proof.c_rem, &pt, &proof.open_rem) {
        return false;
    }
    let mut expr = fp.add(proof.open_raw.claim, fp.mul(s, proof.open_bias.claim));
    expr = fp.sub(expr, fp.mul(s, proof.open_y.claim));
    expr = fp.sub(expr, proof.open_rem.claim);
    if fc != fp.mul(eq_point(fp, &u, &pt), expr) {
        return false;
    }

    let Ok(table) = remainder_table(fp, scale) else {
        return false;
    };
    verify_lookup(
        group,
        gens,
        tr,
        &table,
        std::slice::from_ref(&proof.c_rem),
        &proof.range,
    )
}

impl RescaleProof {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let fp = group.scalar_field();
        let mut w = Writer::new();
        write_commitment(&mut w, group, &self.c_rem);
        w.bytes(&self.zero_check.to_bytes(fp));
        write_mle_opening(&mut w, group, fp, &self.open_raw);
        write_mle_opening(&mut w, group, fp, &self.open_bias);
        write_mle_opening(&mut w, group, fp, &self.open_y);
        write_mle_opening(&mut w, group, fp, &self.open_rem);
        w.bytes(&self.range.to_bytes(group));
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, GadgetError> {
        let fp = group.scalar_field();
        let mut rd = Reader::new(bytes);
        let c_rem = read_commitment(&mut rd, group)?;
        let zero_check = SumCheckProof::from_bytes(fp, rd.bytes()?)?;
        let open_raw = read_mle_opening(&mut rd, group, fp)?;
        let open_bias = read_mle_opening(&mut rd, group, fp)?;
        let open_y = read_mle_opening(&mut rd, group, fp)?;
        let open_rem = read_mle_opening(&mut rd, group, fp)?;
        let range = LookupProof::from_bytes(group, rd.bytes()?)?;
        rd.expect_end()?;
        Ok(Self {
            c_rem,
            zero_check,
            open_raw,
            open_bias,
            open_y,
            open_rem,
            range,
        })
    }
}
