//! Lookup gadget based on logarithmic-derivative sums.
//!
//! A public table `T` has `d_in` input and `d_out` output columns. The
//! prover holds committed witness columns `S` (inputs followed by the
//! outputs it claims the table produced) and shows every witness row is a
//! row of `T`:
//!
//! 1. Rows are folded into single field values with powers of a challenge
//!    `r`: `fold(row) = sum_c r^c row_c`.
//! 2. With multiplicities `e_i` (how many witness rows equal table row
//!    `i`, credited to the first matching row when `T` has duplicates),
//!    the rational identity `sum_j 1/(chi + S_j) = sum_i e_i/(chi + T_i)`
//!    holds at every `chi` outside the root set iff the multiset
//!    inclusion holds.
//! 3. Helper columns `hs_j = 1/(chi + S_j)` and `ht_i = e_i/(chi + T_i)`
//!    are committed; two zero-checks enforce their defining relations and
//!    two all-ones openings compare their sums.
//!
//! `chi` comes from the transcript. If any denominator vanishes (only
//! plausible over the small test profile) the prover absorbs a retry
//! marker and redraws; the retry count travels in the proof because the
//! verifier cannot see the private side of the root set. Each retry hands
//! a dishonest prover one extra transcript sample, bounded by
//! [`CHI_RETRY_CAP`].

use super::{
    read_commitment, read_mle_opening, write_commitment, write_mle_opening, CommittedTensor,
    GadgetError, MleOpening,
};
use crate::algebra::{CurveGroup, FieldElement, PrimeField};
use crate::commit::{Generators, PedersenCommitment};
use crate::poly::{eq_point, MultilinearPoly};
use crate::sumcheck::{self, Oracle, SumCheckProof, Term};
use crate::transcript::Transcript;
use crate::wire::{Reader, Writer};
use rand::RngCore;
use std::collections::HashMap;

/// Upper bound on challenge redraws, prover- and verifier-side.
pub const CHI_RETRY_CAP: u32 = 64;

/// A public lookup table in column-major form. All columns share one
/// power-of-two length; the constructor pads short tables by repeating
/// row zero (harmless: duplicate rows collect zero multiplicity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    columns: Vec<Vec<FieldElement>>,
    d_in: usize,
    d_out: usize,
}

impl LookupTable {
    pub fn new(
        d_in: usize,
        d_out: usize,
        rows: &[Vec<FieldElement>],
    ) -> Result<Self, GadgetError> {
        let d = d_in + d_out;
        if d_in == 0 || d == 0 {
            return Err(GadgetError::BadDomain(
                "table needs at least one input column".into(),
            ));
        }
        if rows.is_empty() {
            return Err(GadgetError::BadDomain("table needs at least one row".into()));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(GadgetError::ShapeMismatch(format!(
                "table rows must have {d} entries"
            )));
        }
        let n = rows.len().next_power_of_two().max(2);
        let mut columns = vec![Vec::with_capacity(n); d];
        for row in rows.iter().chain(std::iter::repeat(&rows[0]).take(n - rows.len())) {
            for (c, v) in row.iter().enumerate() {
                columns[c].push(*v);
            }
        }
        Ok(Self { columns, d_in, d_out })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn width(&self) -> usize {
        self.d_in + self.d_out
    }

    pub fn num_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn columns(&self) -> &[Vec<FieldElement>] {
        &self.columns
    }

    /// Map from canonical input-tuple bytes to the first row index.
    fn input_index(&self, fp: &PrimeField) -> HashMap<Vec<u8>, usize> {
        let mut map = HashMap::new();
        for i in 0..self.num_rows() {
            let key = tuple_key(fp, &self.columns[..self.d_in], i);
            map.entry(key).or_insert(i);
        }
        map
    }

    /// Map from canonical full-row bytes to the first row index.
    fn row_index(&self, fp: &PrimeField) -> HashMap<Vec<u8>, usize> {
        let mut map = HashMap::new();
        for i in 0..self.num_rows() {
            let key = tuple_key(fp, &self.columns, i);
            map.entry(key).or_insert(i);
        }
        map
    }
}

fn tuple_key(fp: &PrimeField, columns: &[Vec<FieldElement>], row: usize) -> Vec<u8> {
    let mut key = Vec::with_capacity(columns.len() * fp.byte_len());
    for col in columns {
        key.extend_from_slice(&fp.to_bytes(col[row]));
    }
    key
}

/// Evaluate the table: given input columns, return the output columns.
/// Fails with the offending row index if an input tuple is absent.
pub fn lookup_outputs(
    fp: &PrimeField,
    table: &LookupTable,
    inputs: &[Vec<FieldElement>],
) -> Result<Vec<Vec<FieldElement>>, GadgetError> {
    if inputs.len() != table.d_in {
        return Err(GadgetError::ShapeMismatch(format!(
            "expected {} input columns, got {}",
            table.d_in,
            inputs.len()
        )));
    }
    let n = inputs[0].len();
    if inputs.iter().any(|c| c.len() != n) {
        return Err(GadgetError::ShapeMismatch(
            "input columns must share a length".into(),
        ));
    }
    let index = table.input_index(fp);
    let mut outputs = vec![Vec::with_capacity(n); table.d_out];
    for j in 0..n {
        let key = tuple_key(fp, inputs, j);
        let i = *index.get(&key).ok_or(GadgetError::EntryNotInTable(j))?;
        for (c, out) in outputs.iter_mut().enumerate() {
            out.push(table.columns[table.d_in + c][i]);
        }
    }
    Ok(outputs)
}

/// Multiplicity vector: `e[i]` counts witness rows equal to table row `i`,
/// credited to the first matching table row.
pub fn multiplicities(
    fp: &PrimeField,
    table: &LookupTable,
    witness: &[Vec<FieldElement>],
) -> Result<Vec<FieldElement>, GadgetError> {
    if witness.len() != table.width() {
        return Err(GadgetError::ShapeMismatch(format!(
            "expected {} witness columns, got {}",
            table.width(),
            witness.len()
        )));
    }
    let n = witness[0].len();
    if witness.iter().any(|c| c.len() != n) {
        return Err(GadgetError::ShapeMismatch(
            "witness columns must share a length".into(),
        ));
    }
    let index = table.row_index(fp);
    let mut counts = vec![0u64; table.num_rows()];
    for j in 0..n {
        let key = tuple_key(fp, witness, j);
        let i = *index.get(&key).ok_or(GadgetError::EntryNotInTable(j))?;
        counts[i] += 1;
    }
    Ok(counts.into_iter().map(|c| fp.from_u64(c)).collect())
}

fn fold_columns(
    fp: &PrimeField,
    r: FieldElement,
    columns: &[Vec<FieldElement>],
) -> Vec<FieldElement> {
    let mut folded = vec![FieldElement::ZERO; columns[0].len()];
    let mut pow = fp.one();
    for col in columns {
        for (f, v) in folded.iter_mut().zip(col) {
            *f = fp.add(*f, fp.mul(pow, *v));
        }
        pow = fp.mul(pow, r);
    }
    folded
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupProof {
    pub c_e: PedersenCommitment,
    pub c_hs: PedersenCommitment,
    pub c_ht: PedersenCommitment,
    pub chi_retries: u32,
    pub witness_check: SumCheckProof,
    pub open_hs: MleOpening,
    pub open_cols: Vec<MleOpening>,
    pub table_check: SumCheckProof,
    pub open_ht: MleOpening,
    pub open_e: MleOpening,
    pub sum_hs: MleOpening,
    pub sum_ht: MleOpening,
}

fn absorb_statement(
    group: &CurveGroup,
    tr: &mut Transcript,
    table: &LookupTable,
    c_s: &[PedersenCommitment],
) {
    let fp = group.scalar_field();
    let mut w = Writer::new();
    w.u32(table.d_in as u32);
    w.u32(table.d_out as u32);
    w.u32(c_s[0].dim as u32);
    w.u32(table.num_rows() as u32);
    tr.absorb("lookup/dims", &w.finish());
    let mut t_bytes = Vec::new();
    for col in &table.columns {
        for v in col {
            t_bytes.extend_from_slice(&fp.to_bytes(*v));
        }
    }
    tr.absorb("lookup/table", &t_bytes);
    for c in c_s {
        tr.absorb("lookup/c_s", &group.compress(&c.point));
    }
}

/// Draw `chi`, redrawing while any folded witness or table value hits a
/// pole. Returns the final challenge and the number of redraws.
fn draw_chi(
    tr: &mut Transcript,
    fp: &PrimeField,
    s_fold: &[FieldElement],
    t_fold: &[FieldElement],
) -> Result<(FieldElement, u32), GadgetError> {
    let mut retries = 0u32;
    loop {
        let cand = tr.challenge_field("lookup/chi", fp);
        let bad = s_fold
            .iter()
            .chain(t_fold)
            .any(|v| fp.add(cand, *v).is_zero());
        if !bad {
            return Ok((cand, retries));
        }
        retries += 1;
        if retries > CHI_RETRY_CAP {
            return Err(GadgetError::Protocol(
                "no usable denominator challenge within the retry budget".into(),
            ));
        }
        tr.absorb("lookup/chi/retry", &retries.to_le_bytes());
    }
}

/// Honest prover: derives multiplicities from the committed witness
/// columns and the table. Fails with `EntryNotInTable` if the witness
/// strays outside the table.
pub fn prove_lookup(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    table: &LookupTable,
    s_columns: &[CommittedTensor],
) -> Result<LookupProof, GadgetError> {
    let fp = group.scalar_field();
    let witness: Vec<_> = s_columns.iter().map(|c| c.values.clone()).collect();
    let e = multiplicities(fp, table, &witness)?;
    prove_lookup_with_witness(group, gens, tr, rng, table, s_columns, e)
}

/// Prover with caller-supplied multiplicities, valid or not. Wrong
/// multiplicities leave the two rational sums unequal for almost every
/// challenge, so the verifier's sum comparison fails.
pub fn prove_lookup_with_witness(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    rng: &mut impl RngCore,
    table: &LookupTable,
    s_columns: &[CommittedTensor],
    e_values: Vec<FieldElement>,
) -> Result<LookupProof, GadgetError> {
    let fp = group.scalar_field();
    let d = table.width();
    if s_columns.len() != d {
        return Err(GadgetError::ShapeMismatch(format!(
            "expected {} witness columns, got {}",
            d,
            s_columns.len()
        )));
    }
    let n_s = s_columns[0].values.len();
    if s_columns.iter().any(|c| c.values.len() != n_s) {
        return Err(GadgetError::ShapeMismatch(
            "witness columns must share a length".into(),
        ));
    }
    let n_t = table.num_rows();
    if e_values.len() != n_t {
        return Err(GadgetError::ShapeMismatch(format!(
            "expected {n_t} multiplicities, got {}",
            e_values.len()
        )));
    }

    let c_s: Vec<_> = s_columns.iter().map(|c| c.commitment).collect();
    absorb_statement(group, tr, table, &c_s);
    let e = CommittedTensor::commit(group, gens, rng, e_values)?;
    tr.absorb("lookup/c_e", &group.compress(&e.commitment.point));

    let r = tr.challenge_field("lookup/r", fp);
    let s_fold = fold_columns(fp, r, &s_columns.iter().map(|c| c.values.clone()).collect::<Vec<_>>());
    let t_fold = fold_columns(fp, r, &table.columns);
    let (chi, chi_retries) = draw_chi(tr, fp, &s_fold, &t_fold)?;

    let hs_vals = s_fold
        .iter()
        .map(|v| fp.inv(fp.add(chi, *v)).expect("poles excluded"))
        .collect::<Vec<_>>();
    let ht_vals = t_fold
        .iter()
        .zip(&e.values)
        .map(|(v, ei)| fp.mul(*ei, fp.inv(fp.add(chi, *v)).expect("poles excluded")))
        .collect::<Vec<_>>();
    let hs = CommittedTensor::commit(group, gens, rng, hs_vals)?;
    let ht = CommittedTensor::commit(group, gens, rng, ht_vals)?;
    tr.absorb("lookup/c_hs", &group.compress(&hs.commitment.point));
    tr.absorb("lookup/c_ht", &group.compress(&ht.commitment.point));

    // Zero-check on the witness side: hs (chi + fold(S)) - 1 == 0.
    let v_s = hs.num_vars();
    let u1: Vec<_> = (0..v_s).map(|_| tr.challenge_field("lookup/u1", fp)).collect();
    let hs_mle = hs.mle();
    let mut terms = vec![Term::new(chi, vec![hs_mle.clone()])];
    let mut pow = fp.one();
    for col in s_columns {
        terms.push(Term::new(pow, vec![hs_mle.clone(), col.mle()]));
        pow = fp.mul(pow, r);
    }
    terms.push(Term::new(
        fp.neg(fp.one()),
        vec![MultilinearPoly::constant(fp.one(), v_s)],
    ));
    let oracle = Oracle::with_eq(v_s, terms, u1)?;
    let witness_check = sumcheck::prove_claimed(fp, &oracle, FieldElement::ZERO, tr);
    let pt1 = witness_check.challenges.clone();
    let open_hs = super::prove_mle_opening(group, gens, tr, rng, &hs, &pt1)?;
    let mut open_cols = Vec::with_capacity(d);
    for col in s_columns {
        open_cols.push(super::prove_mle_opening(group, gens, tr, rng, col, &pt1)?);
    }

    // Zero-check on the table side: ht (chi + fold(T)) - e == 0.
    let v_t = ht.num_vars();
    let u2: Vec<_> = (0..v_t).map(|_| tr.challenge_field("lookup/u2", fp)).collect();
    let ht_mle = ht.mle();
    let t_fold_mle = MultilinearPoly::new(t_fold)?;
    let terms = vec![
        Term::new(chi, vec![ht_mle.clone()]),
        Term::new(fp.one(), vec![ht_mle, t_fold_mle]),
        Term::new(fp.neg(fp.one()), vec![e.mle()]),
    ];
    let oracle = Oracle::with_eq(v_t, terms, u2)?;
    let table_check = sumcheck::prove_claimed(fp, &oracle, FieldElement::ZERO, tr);
    let pt2 = table_check.challenges.clone();
    let open_ht = super::prove_mle_opening(group, gens, tr, rng, &ht, &pt2)?;
    let open_e = super::prove_mle_opening(group, gens, tr, rng, &e, &pt2)?;

    let sum_hs = super::prove_sum_opening(group, gens, tr, rng, &hs)?;
    let sum_ht = super::prove_sum_opening(group, gens, tr, rng, &ht)?;

    Ok(LookupProof {
        c_e: e.commitment,
        c_hs: hs.commitment,
        c_ht: ht.commitment,
        chi_retries,
        witness_check,
        open_hs,
        open_cols,
        table_check,
        open_ht,
        open_e,
        sum_hs,
        sum_ht,
    })
}

pub fn verify_lookup(
    group: &CurveGroup,
    gens: &Generators,
    tr: &mut Transcript,
    table: &LookupTable,
    c_s: &[PedersenCommitment],
    proof: &LookupProof,
) -> bool {
    let fp = group.scalar_field();
    let d = table.width();
    if c_s.len() != d || proof.open_cols.len() != d {
        return false;
    }
    let n_s = c_s[0].dim;
    let n_t = table.num_rows();
    if !n_s.is_power_of_two()
        || c_s.iter().any(|c| c.dim != n_s)
        || proof.c_hs.dim != n_s
        || proof.c_ht.dim != n_t
        || proof.c_e.dim != n_t
        || proof.chi_retries > CHI_RETRY_CAP
    {
        return false;
    }

    absorb_statement(group, tr, table, c_s);
    tr.absorb("lookup/c_e", &group.compress(&proof.c_e.point));
    let r = tr.challenge_field("lookup/r", fp);
    let t_fold = fold_columns(fp, r, &table.columns);

    // Replay the redraws; the witness side of each pole set is private,
    // so the count is taken from the proof (bounded by the cap above).
    for k in 1..=proof.chi_retries {
        let _ = tr.challenge_field("lookup/chi", fp);
        tr.absorb("lookup/chi/retry", &k.to_le_bytes());
    }
    let chi = tr.challenge_field("lookup/chi", fp);
    if t_fold.iter().any(|v| fp.add(chi, *v).is_zero()) {
        return false;
    }

    tr.absorb("lookup/c_hs", &group.compress(&proof.c_hs.point));
    tr.absorb("lookup/c_ht", &group.compress(&proof.c_ht.point));

    // Witness-side zero-check.
    let v_s = n_s.trailing_zeros() as usize;
    let u1: Vec<_> = (0..v_s).map(|_| tr.challenge_field("lookup/u1", fp)).collect();
    let Some((pt1, fc1)) =
        sumcheck::verify_rounds(fp, tr, v_s, 3, FieldElement::ZERO, &proof.witness_check)
    else {
        return false;
    };
    if !super::verify_mle_opening(group, gens, tr, &proof.c_hs, &pt1, &proof.open_hs) {
        return false;
    }
    for (c, o) in c_s.iter().zip(&proof.open_cols) {
        if !super::verify_mle_opening(group, gens, tr, c, &pt1, o) {
            return false;
        }
    }
    let mut folded_cols = FieldElement::ZERO;
    let mut pow = fp.one();
    for o in &proof.open_cols {
        folded_cols = fp.add(folded_cols, fp.mul(pow, o.claim));
        pow = fp.mul(pow, r);
    }
    let expr1 = fp.sub(
        fp.mul(proof.open_hs.claim, fp.add(chi, folded_cols)),
        fp.one(),
    );
    if fc1 != fp.mul(eq_point(fp, &u1, &pt1), expr1) {
        return false;
    }

    // Table-side zero-check; the folded table evaluation is recomputed
    // from public data rather than opened.
    let v_t = n_t.trailing_zeros() as usize;
    let u2: Vec<_> = (0..v_t).map(|_| tr.challenge_field("lookup/u2", fp)).collect();
    let Some((pt2, fc2)) =
        sumcheck::verify_rounds(fp, tr, v_t, 3, FieldElement::ZERO, &proof.table_check)
    else {
        return false;
    };
    if !super::verify_mle_opening(group, gens, tr, &proof.c_ht, &pt2, &proof.open_ht) {
        return false;
    }
    if !super::verify_mle_opening(group, gens, tr, &proof.c_e, &pt2, &proof.open_e) {
        return false;
    }
    let t_fold_mle = match MultilinearPoly::new(t_fold) {
        Ok(m) => m,
        Err(_) => return false,
    };
    let t_at = match t_fold_mle.evaluate(fp, &pt2) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let expr2 = fp.sub(
        fp.mul(proof.open_ht.claim, fp.add(chi, t_at)),
        proof.open_e.claim,
    );
    if fc2 != fp.mul(eq_point(fp, &u2, &pt2), expr2) {
        return false;
    }

    // The two rational sums must agree.
    if !super::verify_sum_opening(group, gens, tr, &proof.c_hs, &proof.sum_hs) {
        return false;
    }
    if !super::verify_sum_opening(group, gens, tr, &proof.c_ht, &proof.sum_ht) {
        return false;
    }
    proof.sum_hs.claim == proof.sum_ht.claim
}

impl LookupProof {
    pub fn to_bytes(&self, group: &CurveGroup) -> Vec<u8> {
        let fp = group.scalar_field();
        let mut w = Writer::new();
        write_commitment(&mut w, group, &self.c_e);
        write_commitment(&mut w, group, &self.c_hs);
        write_commitment(&mut w, group, &self.c_ht);
        w.u32(self.chi_retries);
        w.bytes(&self.witness_check.to_bytes(fp));
        write_mle_opening(&mut w, group, fp, &self.open_hs);
        w.u32(self.open_cols.len() as u32);
        for o in &self.open_cols {
            write_mle_opening(&mut w, group, fp, o);
        }
        w.bytes(&self.table_check.to_bytes(fp));
        write_mle_opening(&mut w, group, fp, &self.open_ht);
        write_mle_opening(&mut w, group, fp, &self.open_e);
        write_mle_opening(&mut w, group, fp, &self.sum_hs);
        write_mle_opening(&mut w, group, fp, &self.sum_ht);
        w.finish()
    }

    pub fn from_bytes(group: &CurveGroup, bytes: &[u8]) -> Result<Self, GadgetError> {
        let fp = group.scalar_field();
        let mut rd = Reader::new(bytes);
        let c_e = read_commitment(&mut rd, group)?;
        let c_hs = read_commitment(&mut rd, group)?;
        let c_ht = read_commitment(&mut rd, group)?;
        let chi_retries = rd.u32()?;
        let witness_check = SumCheckProof::from_bytes(fp, rd.bytes()?)?;
        let open_hs = read_mle_opening(&mut rd, group, fp)?;
        let n_cols = rd.u32()? as usize;
        if n_cols > 1 << 16 {
            return Err(GadgetError::Protocol("implausible column count".into()));
        }
        let mut open_cols = Vec::with_capacity(n_cols);
        for _ in 0..n_cols {
            open_cols.push(read_mle_opening(&mut rd, group, fp)?);
        }
        let table_check = SumCheckProof::from_bytes(fp, rd.bytes()?)?;
        let open_ht = read_mle_opening(&mut rd, group, fp)?;
        let open_e = read_mle_opening(&mut rd, group, fp)?;
        let sum_hs = read_mle_opening(&mut rd, group, fp)?;
        let sum_ht = read_mle_opening(&mut rd, group, fp)?;
        rd.expect_end()?;
        Ok(Self {
            c_e,
            c_hs,
            c_ht,
            chi_retries,
            witness_check,
            open_hs,
            open_cols,
            table_check,
            open_ht,
            open_e,
            sum_hs,
            sum_ht,
        })
    }
}
