//! Pedersen vector commitments and the blinded opening argument.
//!
//! A length-`d` witness vector `S` is committed as
//! `Commit(S, r_S) = h^{r_S} * prod_i g_i^{S_i}`; a scalar `t` uses a
//! dedicated generator: `h^{r_t} * g_t^t`. The opening argument proves, for
//! a public weight vector `y`, knowledge of `S, r_S, t, r_t` with
//! `<S, y> = t`, revealing neither `S` nor the blinds:
//!
//! 1. the prover draws a masking vector `D` and blinds `r1, r2`, and sends
//!    `c_D = Commit(D, r1)` and `c_Dy = h^{r2} * g_t^{<D,y>}`;
//! 2. the verifier answers with a challenge `e`;
//! 3. the prover responds with `S' = S*e + D`, `r_S' = r_S*e + r1`,
//!    `r_t' = r_t*e + r2`;
//! 4. the verifier recomputes `t' = <S', y>` itself and accepts iff
//!    `Commit(S', r_S') = c_S^e * c_D` and `h^{r_t'} g_t^{t'} = c_t^e * c_Dy`.
//!
//! The protocol is special-sound: two accepting responses sharing the same
//! first message but with distinct challenges yield the witness by
//! elimination — see [`extract_opening`], which the tests use both as the
//! soundness witness-extractor and as a demonstration that reusing `D`
//! across proofs leaks `S`.
//!
//! To open a multilinear evaluation `S~(u) = t` (the sum-check endgame),
//! instantiate `y` as the equality table `eq(u, .)` over the hypercube —
//! then `<S, y>` *is* the MLE value at `u`.

use crate::algebra::{CurveGroup, FieldElement, GroupPoint, PrimeField};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use rand::RngCore;
use thiserror::Error;

pub const OPENING_PROOF_MAGIC: &[u8; 4] = b"ZKOP";
pub const OPENING_PROOF_VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommitError {
    #[error("vector of length {got} exceeds generator capacity {capacity}")]
    DimensionMismatch { got: usize, capacity: usize },
    #[error("witness inconsistent: <S,y> does not equal the claimed t")]
    WitnessInconsistent,
    #[error("extraction needs two transcripts with the same first message")]
    FirstMessageMismatch,
    #[error("extraction needs two distinct challenges")]
    ChallengeReused,
    #[error("malformed opening proof: {0}")]
    Malformed(String),
    #[error("proof encodes profile id {got}, expected {want}")]
    WrongProfile { got: u8, want: u8 },
}

/// The generator set `h, g_t, g_1..g_cap`, sampled by hashing to the curve
/// so that no party knows discrete-log relations between them. Sampling is
/// prefix-stable: growing the capacity extends `g` without changing
/// existing generators.
#[derive(Debug, Clone)]
pub struct Generators {
    h: GroupPoint,
    g_t: GroupPoint,
    g: Vec<GroupPoint>,
}

impl Generators {
    pub fn sample(group: &CurveGroup, capacity: usize) -> Self {
        let pts = group.sample_generators("commit", capacity + 2);
        Self {
            h: pts[0],
            g_t: pts[1],
            g: pts[2..].to_vec(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.g.len()
    }

    /// `h^blind * prod_i g_i^{s_i}`. Vectors shorter than the capacity use
    /// the leading generators.
    pub fn commit_vector(
        &self,
        group: &CurveGroup,
        s: &[FieldElement],
        blind: FieldElement,
    ) -> Result<PedersenCommitment, CommitError> {
        if s.len() > self.g.len() {
            return Err(CommitError::DimensionMismatch {
                got: s.len(),
                capacity: self.g.len(),
            });
        }
        let mut points = Vec::with_capacity(s.len() + 1);
        let mut scalars = Vec::with_capacity(s.len() + 1);
        points.push(self.h);
        scalars.push(blind);
        points.extend_from_slice(&self.g[..s.len()]);
        scalars.extend_from_slice(s);
        Ok(PedersenCommitment {
            point: group.msm(&points, &scalars),
            dim: s.len(),
        })
    }

    /// `h^blind * g_t^t` — the 1-dimensional commitment used for claimed
    /// inner-product values.
    pub fn commit_scalar(
        &self,
        group: &CurveGroup,
        t: FieldElement,
        blind: FieldElement,
    ) -> GroupPoint {
        group.msm(&[self.h, self.g_t], &[blind, t])
    }
}

/// A commitment point together with the dimension of the committed vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PedersenCommitment {
    pub point: GroupPoint,
    pub dim: usize,
}

/// The prover's first message and blinds, kept as a unit so tests can
/// replay the same first message against different challenges.
pub struct OpeningNonce {
    pub d: Vec<FieldElement>,
    pub r1: FieldElement,
    pub r2: FieldElement,
}

impl OpeningNonce {
    pub fn sample(fp: &PrimeField, rng: &mut impl RngCore, dim: usize) -> Self {
        Self {
            d: (0..dim).map(|_| fp.random(rng)).collect(),
            r1: fp.random(rng),
            r2: fp.random(rng),
        }
    }
}

/// Everything the verifier sees: first message, challenge, response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpeningProof {
    pub c_d: GroupPoint,
    pub c_dy: GroupPoint,
    pub e: FieldElement,
    pub s_prime: Vec<FieldElement>,
    pub r_s_prime: FieldElement,
    pub r_t_prime: FieldElement,
}

pub fn inner_product(fp: &PrimeField, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    assert_eq!(a.len(), b.len(), "inner product arity mismatch");
    let mut acc = FieldElement::ZERO;
    for (x, y) in a.iter().zip(b) {
        acc = fp.add(acc, fp.mul(*x, *y));
    }
    acc
}

fn absorb_statement(
    group: &CurveGroup,
    tr: &mut Transcript,
    c_s: &PedersenCommitment,
    c_t: &GroupPoint,
    y: &[FieldElement],
) {
    let fp = group.scalar_field();
    tr.absorb("open/c_s", &group.compress(&c_s.point));
    tr.absorb("open/c_t", &group.compress(c_t));
    let mut ybytes = Vec::with_capacity(y.len() * fp.byte_len());
    for v in y {
        ybytes.extend_from_slice(&fp.to_bytes(*v));
    }
    tr.absorb("open/y", &ybytes);
}

/// Proves `<S, y> = t` against `c_s = Commit(S, r_s)` and
/// `c_t = h^{r_t} g_t^t`. The masking nonce is drawn fresh from `rng`; the
/// challenge comes from the transcript.
#[allow(clippy::too_many_arguments)]
pub fn prove_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    s: &[FieldElement],
    r_s: FieldElement,
    t: FieldElement,
    r_t: FieldElement,
    y: &[FieldElement],
) -> Result<OpeningProof, CommitError> {
    let fp = group.scalar_field();
    if inner_product(fp, s, y) != t {
        return Err(CommitError::WitnessInconsistent);
    }
    let nonce = OpeningNonce::sample(fp, rng, s.len());
    prove_opening_with_nonce(group, gens, tr, s, r_s, t, r_t, y, nonce)
}

/// Same as [`prove_opening`] but with a caller-supplied first message.
/// Exposed so the soundness tests can rewind a prover: running this twice
/// with the same nonce and different challenges hands the witness to
/// [`extract_opening`].
#[allow(clippy::too_many_arguments)]
pub fn prove_opening_with_nonce(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    s: &[FieldElement],
    r_s: FieldElement,
    t: FieldElement,
    r_t: FieldElement,
    y: &[FieldElement],
    nonce: OpeningNonce,
) -> Result<OpeningProof, CommitError> {
    let fp = group.scalar_field();
    if s.len() != y.len() {
        return Err(CommitError::DimensionMismatch {
            got: y.len(),
            capacity: s.len(),
        });
    }
    let c_s = gens.commit_vector(group, s, r_s)?;
    let c_t = gens.commit_scalar(group, t, r_t);

    let c_d = gens.commit_vector(group, &nonce.d, nonce.r1)?.point;
    let dy = inner_product(fp, &nonce.d, y);
    let c_dy = gens.commit_scalar(group, dy, nonce.r2);

    absorb_statement(group, tr, &c_s, &c_t.clone(), y);
    tr.absorb("open/c_d", &group.compress(&c_d));
    tr.absorb("open/c_dy", &group.compress(&c_dy));
    let e = tr.challenge_field("open/e", fp);

    let s_prime: Vec<_> = s
        .iter()
        .zip(&nonce.d)
        .map(|(si, di)| fp.add(fp.mul(*si, e), *di))
        .collect();
    let r_s_prime = fp.add(fp.mul(r_s, e), nonce.r1);
    let r_t_prime = fp.add(fp.mul(r_t, e), nonce.r2);

    Ok(OpeningProof {
        c_d,
        c_dy,
        e,
        s_prime,
        r_s_prime,
        r_t_prime,
    })
}

/// Verifies an opening proof. The challenge is re-derived from the
/// transcript and compared against the one recorded in the proof, so a
/// Fiat–Shamir verifier needs only the same absorb history. Returns a
/// plain accept/reject — a tampered proof is a rejection, not an error.
pub fn verify_opening(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    c_s: &PedersenCommitment,
    c_t: &GroupPoint,
    y: &[FieldElement],
    proof: &OpeningProof,
) -> bool {
    let fp = group.scalar_field();
    if proof.s_prime.len() != y.len() || c_s.dim != y.len() || y.len() > gens.capacity() {
        return false;
    }
    absorb_statement(group, tr, c_s, c_t, y);
    tr.absorb("open/c_d", &group.compress(&proof.c_d));
    tr.absorb("open/c_dy", &group.compress(&proof.c_dy));
    let e = tr.challenge_field("open/e", fp);
    if e != proof.e {
        return false;
    }

    // Commit(S', r_S') =? c_S^e * c_D
    let lhs = match gens.commit_vector(group, &proof.s_prime, proof.r_s_prime) {
        Ok(c) => c.point,
        Err(_) => return false,
    };
    let rhs = group.add(&group.scalar_mul(&c_s.point, e), &proof.c_d);
    if lhs != rhs {
        return false;
    }

    // h^{r_t'} g_t^{t'} =? c_t^e * c_Dy with t' recomputed from S'.
    let t_prime = inner_product(fp, &proof.s_prime, y);
    let lhs = gens.commit_scalar(group, t_prime, proof.r_t_prime);
    let rhs = group.add(&group.scalar_mul(c_t, e), &proof.c_dy);
    lhs == rhs
}

/// The witness recovered by the special-soundness extractor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedOpening {
    pub s: Vec<FieldElement>,
    pub r_s: FieldElement,
    pub t: FieldElement,
    pub r_t: FieldElement,
}

/// Given two accepting transcripts that share the first message
/// `(c_D, c_Dy)` but have distinct challenges, recovers the committed
/// witness: `S = (S'_1 - S'_2) / (e_1 - e_2)`, and likewise for the
/// blinds; `t` falls out as `<S, y>`.
pub fn extract_opening(
    fp: &PrimeField,
    y: &[FieldElement],
    p1: &OpeningProof,
    p2: &OpeningProof,
) -> Result<ExtractedOpening, CommitError> {
    if p1.c_d != p2.c_d || p1.c_dy != p2.c_dy {
        return Err(CommitError::FirstMessageMismatch);
    }
    if p1.e == p2.e {
        return Err(CommitError::ChallengeReused);
    }
    if p1.s_prime.len() != p2.s_prime.len() || p1.s_prime.len() != y.len() {
        return Err(CommitError::DimensionMismatch {
            got: p2.s_prime.len(),
            capacity: p1.s_prime.len(),
        });
    }
    let de = fp.inv(fp.sub(p1.e, p2.e)).expect("challenges distinct");
    let s: Vec<_> = p1
        .s_prime
        .iter()
        .zip(&p2.s_prime)
        .map(|(a, b)| fp.mul(fp.sub(*a, *b), de))
        .collect();
    let r_s = fp.mul(fp.sub(p1.r_s_prime, p2.r_s_prime), de);
    let r_t = fp.mul(fp.sub(p1.r_t_prime, p2.r_t_prime), de);
    let t = inner_product(fp, &s, y);
    Ok(ExtractedOpening { s, r_s, t, r_t })
}

impl OpeningProof {
    /// Canonical bytes: magic, version, profile id, then the transcript
    /// fields in protocol order (first message, challenge, response).
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let fp = group.scalar_field();
        let mut w = Writer::new();
        w.raw(OPENING_PROOF_MAGIC);
        w.u8(OPENING_PROOF_VERSION);
        w.u8(group.id());
        w.raw(&group.compress(&self.c_d));
        w.raw(&group.compress(&self.c_dy));
        w.raw(&fp.to_bytes(self.e));
        w.u32(self.s_prime.len() as u32);
        for v in &self.s_prime {
            w.raw(&fp.to_bytes(*v));
        }
        w.raw(&fp.to_bytes(self.r_s_prime));
        w.raw(&fp.to_bytes(self.r_t_prime));
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, CommitError> {
        let fp = group.scalar_field();
        let bad = |m: &str| CommitError::Malformed(m.to_string());
        let mut r = Reader::new(bytes);
        let magic = r.take(4).map_err(|e| CommitError::Malformed(e.to_string()))?;
        if magic != OPENING_PROOF_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u8().map_err(|e| CommitError::Malformed(e.to_string()))?;
        if version != OPENING_PROOF_VERSION {
            return Err(bad("unsupported version"));
        }
        let pid = r.u8().map_err(|e| CommitError::Malformed(e.to_string()))?;
        if pid != group.id() {
            return Err(CommitError::WrongProfile {
                got: pid,
                want: group.id(),
            });
        }
        let plen = group.compressed_len();
        let flen = fp.byte_len();
        let point = |r: &mut Reader| -> Result<GroupPoint, CommitError> {
            let b = r.take(plen).map_err(|e| CommitError::Malformed(e.to_string()))?;
            group
                .decompress(b)
                .map_err(|e| CommitError::Malformed(e.to_string()))
        };
        let c_d = point(&mut r)?;
        let c_dy = point(&mut r)?;
        let scalar = |r: &mut Reader| -> Result<FieldElement, CommitError> {
            let b = r.take(flen).map_err(|e| CommitError::Malformed(e.to_string()))?;
            fp.from_bytes(b).map_err(|e| CommitError::Malformed(e.to_string()))
        };
        let e = scalar(&mut r)?;
        let dim = r.u32().map_err(|e| CommitError::Malformed(e.to_string()))? as usize;
        if dim > (1 << 24) {
            return Err(bad("unreasonable vector length"));
        }
        let mut s_prime = Vec::with_capacity(dim);
        for _ in 0..dim {
            s_prime.push(scalar(&mut r)?);
        }
        let r_s_prime = scalar(&mut r)?;
        let r_t_prime = scalar(&mut r)?;
        r.expect_end().map_err(|e| CommitError::Malformed(e.to_string()))?;
        Ok(Self {
            c_d,
            c_dy,
            e,
            s_prime,
            r_s_prime,
            r_t_prime,
        })
    }
}
