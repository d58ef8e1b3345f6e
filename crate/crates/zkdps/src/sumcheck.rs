//! The sum-check protocol: proving `H = sum over {0,1}^v of g(b)` for a
//! low-degree `g`, one variable per round.
//!
//! `g` is a sum of terms, each a scalar coefficient times a product of at
//! most three multilinear factors, optionally multiplied as a whole by the
//! equality polynomial `eq(u, .)` for a public point `u` (the zero-check
//! shape used by the layer gadgets). Round messages travel in evaluation
//! form — the values of the round polynomial at `X = 0..=deg` — which
//! caps the degree by construction.
//!
//! Verification here covers the round recursion only: it returns the
//! challenge point `r` and the reduced claim `g(r)`, which the caller must
//! discharge against the committed factors (multilinear-opening proofs in
//! the proof container, or direct evaluation in tests). Cutting the
//! protocol at that seam keeps this module free of any commitment logic.
//!
//! For soundness experiments, [`prove_claimed`] implements a cheating
//! prover for a *false* claim: it offsets each round polynomial by
//! `delta * L(X)` where the fixed polynomial `L` has `deg` distinct roots
//! and `L(0) + L(1) = 1`, so every consistency check inside the recursion
//! passes and the lie survives to the final opening unless some challenge
//! hits a root of `L`. Its false-accept probability is therefore
//! `1 - (1 - deg/|F|)^v`, just under the `deg*v/|F|` union bound — a
//! maximally effective strategy for measuring the bound empirically.

use crate::algebra::{FieldElement, PrimeField};
use crate::poly::{eq_evals, eval_at_nodes, MultilinearPoly};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use thiserror::Error;

/// Most factors allowed in a product term.
pub const MAX_FACTORS: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SumCheckError {
    #[error("term has {0} factors, protocol supports at most {MAX_FACTORS}")]
    DegreeExceeded(usize),
    #[error("factor arity mismatch: expected {want} variables, factor has {got}")]
    ArityMismatch { want: usize, got: usize },
    #[error("oracle needs at least one variable and one term")]
    EmptyOracle,
    #[error("malformed sum-check proof: {0}")]
    Malformed(String),
}

/// `coeff * f_1 * .. * f_k`, `k <= 3`, all factors multilinear in the same
/// variable set.
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: FieldElement,
    pub factors: Vec<MultilinearPoly>,
}

impl Term {
    pub fn new(coeff: FieldElement, factors: Vec<MultilinearPoly>) -> Self {
        Self { coeff, factors }
    }
}

/// The polynomial `g` being summed: `[eq(u, .)] * sum_j term_j`.
#[derive(Debug, Clone)]
pub struct Oracle {
    num_vars: usize,
    terms: Vec<Term>,
    eq_point: Option<Vec<FieldElement>>,
}

impl Oracle {
    pub fn new(num_vars: usize, terms: Vec<Term>) -> Result<Self, SumCheckError> {
        Self::build(num_vars, terms, None)
    }

    /// Zero-check shape: everything multiplied by `eq(u, .)`.
    pub fn with_eq(
        num_vars: usize,
        terms: Vec<Term>,
        u: Vec<FieldElement>,
    ) -> Result<Self, SumCheckError> {
        if u.len() != num_vars {
            return Err(SumCheckError::ArityMismatch {
                want: num_vars,
                got: u.len(),
            });
        }
        Self::build(num_vars, terms, Some(u))
    }

    fn build(
        num_vars: usize,
        terms: Vec<Term>,
        eq_point: Option<Vec<FieldElement>>,
    ) -> Result<Self, SumCheckError> {
        if num_vars == 0 || terms.is_empty() {
            return Err(SumCheckError::EmptyOracle);
        }
        for t in &terms {
            if t.factors.is_empty() || t.factors.len() > MAX_FACTORS {
                return Err(SumCheckError::DegreeExceeded(t.factors.len()));
            }
            for f in &t.factors {
                if f.num_vars() != num_vars {
                    return Err(SumCheckError::ArityMismatch {
                        want: num_vars,
                        got: f.num_vars(),
                    });
                }
            }
        }
        Ok(Self {
            num_vars,
            terms,
            eq_point,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Per-round degree bound: the widest product, plus one for the
    /// eq-factor if present.
    pub fn degree(&self) -> usize {
        let widest = self.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0);
        widest + usize::from(self.eq_point.is_some())
    }

    /// The true hypercube sum `H` — the honest prover's claim.
    pub fn sum(&self, fp: &PrimeField) -> FieldElement {
        let eq_table = self.eq_point.as_ref().map(|u| eq_evals(fp, u));
        let mut acc = FieldElement::ZERO;
        for b in 0..(1usize << self.num_vars) {
            let mut point_val = FieldElement::ZERO;
            for t in &self.terms {
                let mut prod = t.coeff;
                for f in &t.factors {
                    prod = fp.mul(prod, f.evals()[b]);
                }
                point_val = fp.add(point_val, prod);
            }
            if let Some(eq) = &eq_table {
                point_val = fp.mul(point_val, eq[b]);
            }
            acc = fp.add(acc, point_val);
        }
        acc
    }

    /// `g` at an arbitrary field point — the value the final opening must
    /// match.
    pub fn evaluate(&self, fp: &PrimeField, point: &[FieldElement]) -> FieldElement {
        assert_eq!(point.len(), self.num_vars, "oracle arity mismatch");
        let mut acc = FieldElement::ZERO;
        for t in &self.terms {
            let mut prod = t.coeff;
            for f in &t.factors {
                prod = fp.mul(prod, f.evaluate(fp, point).expect("arity checked"));
            }
            acc = fp.add(acc, prod);
        }
        if let Some(u) = &self.eq_point {
            acc = fp.mul(acc, crate::poly::eq_point(fp, u, point));
        }
        acc
    }
}

/// Round messages in evaluation form, the challenges they drew, and the
/// reduced value `g(r)` the caller must open against the factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumCheckProof {
    pub round_polys: Vec<Vec<FieldElement>>,
    pub challenges: Vec<FieldElement>,
    pub final_value: FieldElement,
}

/// Mutable prover state: factor tables folded round by round.
struct ProverState {
    terms: Vec<Term>,
    eq_table: Option<MultilinearPoly>,
    degree: usize,
    vars_left: usize,
}

impl ProverState {
    fn new(fp: &PrimeField, oracle: &Oracle) -> Self {
        Self {
            terms: oracle.terms.clone(),
            eq_table: oracle
                .eq_point
                .as_ref()
                .map(|u| MultilinearPoly::new(eq_evals(fp, u)).expect("power of two")),
            degree: oracle.degree(),
            vars_left: oracle.num_vars,
        }
    }

    /// Values of the current round polynomial at `X = 0..=deg`:
    /// `sum over the remaining hypercube of g(X, rest)`.
    fn round_poly(&self, fp: &PrimeField) -> Vec<FieldElement> {
        let half = 1usize << (self.vars_left - 1);
        let mut evals = Vec::with_capacity(self.degree + 1);
        for x in 0..=self.degree as u64 {
            let xf = fp.from_u64(x);
            let mut total = FieldElement::ZERO;
            for j in 0..half {
                let mut point_val = FieldElement::ZERO;
                for t in &self.terms {
                    let mut prod = t.coeff;
                    for f in &t.factors {
                        let lo = f.evals()[2 * j];
                        let hi = f.evals()[2 * j + 1];
                        prod = fp.mul(prod, fp.add(lo, fp.mul(xf, fp.sub(hi, lo))));
                    }
                    point_val = fp.add(point_val, prod);
                }
                if let Some(eq) = &self.eq_table {
                    let lo = eq.evals()[2 * j];
                    let hi = eq.evals()[2 * j + 1];
                    point_val = fp.mul(point_val, fp.add(lo, fp.mul(xf, fp.sub(hi, lo))));
                }
                total = fp.add(total, point_val);
            }
            evals.push(total);
        }
        evals
    }

    fn fold(&mut self, fp: &PrimeField, r: FieldElement) {
        for t in &mut self.terms {
            for f in &mut t.factors {
                f.restrict_first_var_in_place(fp, r);
            }
        }
        if let Some(eq) = &mut self.eq_table {
            eq.restrict_first_var_in_place(fp, r);
        }
        self.vars_left -= 1;
    }

    /// With all variables bound: the scalar `g(r_1..r_v)`.
    fn final_value(&self, fp: &PrimeField) -> FieldElement {
        debug_assert_eq!(self.vars_left, 0);
        let mut acc = FieldElement::ZERO;
        for t in &self.terms {
            let mut prod = t.coeff;
            for f in &t.factors {
                prod = fp.mul(prod, f.evals()[0]);
            }
            acc = fp.add(acc, prod);
        }
        if let Some(eq) = &self.eq_table {
            acc = fp.mul(acc, eq.evals()[0]);
        }
        acc
    }
}

fn absorb_round(fp: &PrimeField, tr: &mut Transcript, evals: &[FieldElement]) {
    let mut bytes = Vec::with_capacity(evals.len() * fp.byte_len());
    for v in evals {
        bytes.extend_from_slice(&fp.to_bytes(*v));
    }
    tr.absorb("sumcheck/round", &bytes);
}

/// Honest prover: claims the true sum. Returns the proof and the bound
/// challenge point, at which the caller evaluates/open the factors.
pub fn prove(
    fp: &PrimeField,
    oracle: &Oracle,
    tr: &mut Transcript,
) -> (SumCheckProof, Vec<FieldElement>) {
    let h = oracle.sum(fp);
    let proof = run_prover(fp, oracle, h, tr);
    let point = proof.challenges.clone();
    (proof, point)
}

/// Prover for an arbitrary claim. If `claimed_h` differs from the true
/// sum, the round messages are corrected with the rooted offset polynomial
/// so the recursion always verifies; the lie is only caught at the final
/// opening — unless a challenge lands on a root, which is exactly the
/// sum-check soundness error being measured.
pub fn prove_claimed(
    fp: &PrimeField,
    oracle: &Oracle,
    claimed_h: FieldElement,
    tr: &mut Transcript,
) -> SumCheckProof {
    run_prover(fp, oracle, claimed_h, tr)
}

/// `L(X) = c * (X-2)(X-3)...(X-(deg+1))`, normalized so L(0)+L(1) = 1.
/// `deg` distinct roots, none at 0 or 1.
fn offset_poly_at(fp: &PrimeField, degree: usize, x: FieldElement) -> FieldElement {
    let at = |x: FieldElement| {
        let mut prod = fp.one();
        for root in 2..=(degree as u64 + 1) {
            prod = fp.mul(prod, fp.sub(x, fp.from_u64(root)));
        }
        prod
    };
    let norm = fp.add(at(FieldElement::ZERO), at(fp.one()));
    let c = fp.inv(norm).expect("normalizer nonzero for supported degrees");
    fp.mul(c, at(x))
}

fn run_prover(
    fp: &PrimeField,
    oracle: &Oracle,
    claimed_h: FieldElement,
    tr: &mut Transcript,
) -> SumCheckProof {
    let mut state = ProverState::new(fp, oracle);
    let degree = state.degree;
    // What the verifier believes the remaining sum is, minus the truth.
    let mut delta = fp.sub(claimed_h, oracle.sum(fp));

    tr.absorb("sumcheck/claim", &fp.to_bytes(claimed_h));
    let mut round_polys = Vec::with_capacity(oracle.num_vars);
    let mut challenges = Vec::with_capacity(oracle.num_vars);
    for _ in 0..oracle.num_vars {
        let mut evals = state.round_poly(fp);
        if !delta.is_zero() {
            // g~(X) = g(X) + delta * L(X) keeps g~(0)+g~(1) on-claim.
            for (k, v) in evals.iter_mut().enumerate() {
                let l = offset_poly_at(fp, degree, fp.from_u64(k as u64));
                *v = fp.add(*v, fp.mul(delta, l));
            }
        }
        absorb_round(fp, tr, &evals);
        let r = tr.challenge_field("sumcheck/r", fp);
        if !delta.is_zero() {
            delta = fp.mul(delta, offset_poly_at(fp, degree, r));
        }
        state.fold(fp, r);
        round_polys.push(evals);
        challenges.push(r);
    }
    let final_value = fp.add(state.final_value(fp), delta);
    SumCheckProof {
        round_polys,
        challenges,
        final_value,
    }
}

/// Verifies the round recursion for a claimed sum. On success returns the
/// challenge point and the reduced claim `g(r)`; the caller must check
/// that claim against the committed factors. `None` is a rejection.
pub fn verify_rounds(
    fp: &PrimeField,
    tr: &mut Transcript,
    num_vars: usize,
    degree: usize,
    claimed_h: FieldElement,
    proof: &SumCheckProof,
) -> Option<(Vec<FieldElement>, FieldElement)> {
    if proof.round_polys.len() != num_vars || proof.challenges.len() != num_vars {
        return None;
    }
    tr.absorb("sumcheck/claim", &fp.to_bytes(claimed_h));
    let mut claim = claimed_h;
    let mut point = Vec::with_capacity(num_vars);
    for (evals, expected_r) in proof.round_polys.iter().zip(&proof.challenges) {
        if evals.len() != degree + 1 {
            return None;
        }
        // g_i(0) + g_i(1) must reproduce the running claim.
        if fp.add(evals[0], evals[1]) != claim {
            return None;
        }
        absorb_round(fp, tr, evals);
        let r = tr.challenge_field("sumcheck/r", fp);
        if r != *expected_r {
            return None;
        }
        claim = eval_at_nodes(fp, evals, r);
        point.push(r);
    }
    if proof.final_value != claim {
        return None;
    }
    Some((point, claim))
}

impl SumCheckProof {
    /// Flat encoding for embedding in proof containers: counts, then round
    /// evaluations, challenges, and the final value, all fixed-width.
    pub fn to_bytes(&self, fp: &PrimeField) -> Vec<u8> {
        let mut w = Writer::new();
        w.u32(self.round_polys.len() as u32);
        w.u32(self.round_polys.first().map_or(0, |p| p.len()) as u32);
        for poly in &self.round_polys {
            for v in poly {
                w.raw(&fp.to_bytes(*v));
            }
        }
        for r in &self.challenges {
            w.raw(&fp.to_bytes(*r));
        }
        w.raw(&fp.to_bytes(self.final_value));
        w.finish()
    }

    pub fn from_bytes(fp: &PrimeField, bytes: &[u8]) -> Result<Self, SumCheckError> {
        let bad = |e: crate::wire::WireError| SumCheckError::Malformed(e.to_string());
        let mut r = Reader::new(bytes);
        let rounds = r.u32().map_err(bad)? as usize;
        let width = r.u32().map_err(bad)? as usize;
        if rounds > 64 || width == 0 || width > MAX_FACTORS + 2 {
            return Err(SumCheckError::Malformed(format!(
                "implausible shape: {rounds} rounds, width {width}"
            )));
        }
        let scalar = |r: &mut Reader| -> Result<FieldElement, SumCheckError> {
            let b = r.take(fp.byte_len()).map_err(bad)?;
            fp.from_bytes(b)
                .map_err(|e| SumCheckError::Malformed(e.to_string()))
        };
        let mut round_polys = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let mut poly = Vec::with_capacity(width);
            for _ in 0..width {
                poly.push(scalar(&mut r)?);
            }
            round_polys.push(poly);
        }
        let mut challenges = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            challenges.push(scalar(&mut r)?);
        }
        let final_value = scalar(&mut r)?;
        r.expect_end().map_err(bad)?;
        Ok(Self {
            round_polys,
            challenges,
            final_value,
        })
    }
}
