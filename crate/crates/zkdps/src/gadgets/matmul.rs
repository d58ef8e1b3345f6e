//! Matrix-multiplication gadget.
//!
//! For `C = A·B` with `A: m×k`, `B: k×p` (all dimensions powers of two),
//! the identity proven is the evaluated form of the product:
//!
//! `f~_C(i, j) = sum over b in {0,1}^{log k} of f~_A(i, b) · f~_B(b, j)`
//!
//! at verifier-chosen points `i in F^{log m}`, `j in F^{log p}`. By
//! Schwartz–Zippel, equality at one random point implies `C = A·B` except
//! with probability `(log m + log p)/|F|` — so the whole matrix product is
//! checked by one degree-2 sum-check over `log k` variables plus three
//! multilinear openings: `A` at `(i, r)`, `B` at `(r, j)`, `C` at `(i, j)`.
//!
//! Matrices are committed flat in column-major order: entry `(row, col)`
//! at index `row + nrows·col`, so row-index bits are the *first* (lowest)
//! MLE variables. `A` binds `i` by restricting its first variables, `B`
//! binds `j` by fixing its last variables; both leave tables over `b`.
//!
//! `C` is an explicit argument rather than being computed from `A` and
//! `B`: a dishonest `C` produces a cheating-prover run whose lie survives
//! the round recursion but dies at the opening comparison — mirroring how
//! a corrupted layer output is actually caught.

use super::{
    read_mle_opening, write_mle_opening, CommittedTensor, GadgetError, MleOpening,
};
use crate::algebra::{CurveGroup, FieldElement};
use crate::commit::{Generators, PedersenCommitment};
use crate::sumcheck::{self, Oracle, SumCheckProof, Term};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use rand::RngCore;

/// `A: m×k`, `B: k×p`, `C: m×p`; `m`, `p` may be 1 (vector-matrix), `k`
/// must be at least 2 so the sum-check has a variable to run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatMulDims {
    pub m: usize,
    pub k: usize,
    pub p: usize,
}

impl MatMulDims {
    fn validate(&self) -> Result<(usize, usize, usize), GadgetError> {
        let MatMulDims { m, k, p } = *self;
        if !m.is_power_of_two() || !k.is_power_of_two() || !p.is_power_of_two() {
            return Err(GadgetError::ShapeMismatch(format!(
                "dims ({m},{k},{p}) must be powers of two"
            )));
        }
        if k < 2 {
            return Err(GadgetError::ShapeMismatch(
                "inner dimension must be at least 2".into(),
            ));
        }
        Ok((
            m.trailing_zeros() as usize,
            k.trailing_zeros() as usize,
            p.trailing_zeros() as usize,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatMulProof {
    pub sumcheck: SumCheckProof,
    pub open_a: MleOpening,
    pub open_b: MleOpening,
    pub open_c: MleOpening,
}

fn absorb_statement(
    group: &CurveGroup,
    tr: &mut Transcript,
    dims: &MatMulDims,
    c_a: &PedersenCommitment,
    c_b: &PedersenCommitment,
    c_c: &PedersenCommitment,
) {
    let mut w = Writer::new();
    w.u32(dims.m as u32);
    w.u32(dims.k as u32);
    w.u32(dims.p as u32);
    tr.absorb("matmul/dims", &w.finish());
    tr.absorb("matmul/c_a", &group.compress(&c_a.point));
    tr.absorb("matmul/c_b", &group.compress(&c_b.point));
    tr.absorb("matmul/c_c", &group.compress(&c_c.point));
}

fn draw_point(
    tr: &mut Transcript,
    fp: &crate::algebra::PrimeField,
    label: &str,
    n: usize,
) -> Vec<FieldElement> {
    (0..n).map(|_| tr.challenge_field(label, fp)).collect()
}

/// Proves `C = A·B` for committed matrices. `C` is taken at face value —
/// see the module docs on dishonest inputs.
pub fn prove_matmul(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    a: &CommittedTensor,
    b: &CommittedTensor,
    c: &CommittedTensor,
    dims: &MatMulDims,
) -> Result<MatMulProof, GadgetError> {
    let fp = group.scalar_field();
    let (vm, vk, vp) = dims.validate()?;
    for (t, len, name) in [
        (a, dims.m * dims.k, "A"),
        (b, dims.k * dims.p, "B"),
        (c, dims.m * dims.p, "C"),
    ] {
        if t.values.len() != len {
            return Err(GadgetError::ShapeMismatch(format!(
                "{name} has {} entries, dims require {len}",
                t.values.len()
            )));
        }
    }

    absorb_statement(group, tr, dims, &a.commitment, &b.commitment, &c.commitment);
    let i_pt = draw_point(tr, fp, "matmul/i", vm);
    let j_pt = draw_point(tr, fp, "matmul/j", vp);

    // A(i, ·): restrict the first (row) variables to i.
    let mut a_i = a.mle();
    for r in &i_pt {
        a_i.restrict_first_var_in_place(fp, *r);
    }
    // B(·, j): fix the last (column) variables to j, highest bit first.
    let mut b_j = b.mle();
    for r in j_pt.iter().rev() {
        b_j = b_j.fix_last_var(fp, *r);
    }
    // Claimed H = C~(i, j); a corrupted C makes this a false claim.
    let ij: Vec<_> = i_pt.iter().chain(&j_pt).copied().collect();
    let h = c
        .mle()
        .evaluate(fp, &ij)
        .map_err(|e| GadgetError::ShapeMismatch(e.to_string()))?;

    let oracle = Oracle::new(vk, vec![Term::new(fp.one(), vec![a_i, b_j])])?;
    let proof = sumcheck::prove_claimed(fp, &oracle, h, tr);
    let r_pt = proof.challenges.clone();

    let a_point: Vec<_> = i_pt.iter().chain(&r_pt).copied().collect();
    let b_point: Vec<_> = r_pt.iter().chain(&j_pt).copied().collect();
    let open_a = super::prove_mle_opening(group, gens, tr, rng, a, &a_point)?;
    let open_b = super::prove_mle_opening(group, gens, tr, rng, b, &b_point)?;
    let open_c = super::prove_mle_opening(group, gens, tr, rng, c, &ij)?;

    Ok(MatMulProof {
        sumcheck: proof,
        open_a,
        open_b,
        open_c,
    })
}

/// Verifies a matmul proof against the three commitments.
pub fn verify_matmul(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    c_a: &PedersenCommitment,
    c_b: &PedersenCommitment,
    c_c: &PedersenCommitment,
    dims: &MatMulDims,
    proof: &MatMulProof,
) -> bool {
    let fp = group.scalar_field();
    let Ok((vm, vk, vp)) = dims.validate() else {
        return false;
    };
    if c_a.dim != dims.m * dims.k || c_b.dim != dims.k * dims.p || c_c.dim != dims.m * dims.p {
        return false;
    }

    absorb_statement(group, tr, dims, c_a, c_b, c_c);
    let i_pt = draw_point(tr, fp, "matmul/i", vm);
    let j_pt = draw_point(tr, fp, "matmul/j", vp);

    // The claimed sum is C~(i,j) as asserted by the C opening; the opening
    // check below pins it to the committed C.
    let h = proof.open_c.claim;
    let Some((r_pt, final_claim)) = sumcheck::verify_rounds(fp, tr, vk, 2, h, &proof.sumcheck)
    else {
        return false;
    };

    let a_point: Vec<_> = i_pt.iter().chain(&r_pt).copied().collect();
    let b_point: Vec<_> = r_pt.iter().chain(&j_pt).copied().collect();
    let ij: Vec<_> = i_pt.iter().chain(&j_pt).copied().collect();
    if !super::verify_mle_opening(group, gens, tr, c_a, &a_point, &proof.open_a) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, c_b, &b_point, &proof.open_b) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, c_c, &ij, &proof.open_c) {
        return false;
    }
    // g(r) must equal A~(i,r) · B~(r,j).
    final_claim == fp.mul(proof.open_a.claim, proof.open_b.claim)
}

impl MatMulProof {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let fp = group.scalar_field();
        let mut w = Writer::new();
        w.bytes(&self.sumcheck.to_bytes(fp));
        write_mle_opening(&mut w, group, fp, &self.open_a);
        write_mle_opening(&mut w, group, fp, &self.open_b);
        write_mle_opening(&mut w, group, fp, &self.open_c);
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, GadgetError> {
        let fp = group.scalar_field();
        let mut r = Reader::new(bytes);
        let sc = r.bytes()?;
        let sumcheck = SumCheckProof::from_bytes(fp, sc)?;
        let open_a = read_mle_opening(&mut r, group, fp)?;
        let open_b = read_mle_opening(&mut r, group, fp)?;
        let open_c = read_mle_opening(&mut r, group, fp)?;
        r.expect_end()?;
        Ok(Self {
            sumcheck,
            open_a,
            open_b,
            open_c,
        })
    }
}
