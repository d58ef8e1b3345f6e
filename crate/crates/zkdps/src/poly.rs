//! Multilinear and univariate polynomial arithmetic over a prime field.
//!
//! Multilinear polynomials are stored as their evaluation table over the
//! boolean hypercube `{0,1}^v`. Variables are indexed LSB-first: the table
//! index for the assignment `(b1, .., bv)` is `b1 + 2*b2 + 4*b3 + ..`, i.e.
//! the first variable is the lowest bit. Consequently
//! [`MultilinearPoly::restrict_first_var`] pairs adjacent (even, odd)
//! entries, while [`MultilinearPoly::fix_last_var`] pairs the two halves of
//! the table.
//!
//! Univariate polynomials are stored in coefficient form (low degree
//! first). Sum-check round messages travel in evaluation form — values at
//! the nodes `X = 0..=deg` — and [`eval_at_nodes`] evaluates such a message
//! at an arbitrary point without materialising the coefficients.

use crate::algebra::{FieldElement, PrimeField};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("evaluation table length {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("point has {got} coordinates, polynomial has {want} variables")]
    WrongArity { got: usize, want: usize },
    #[error("interpolation nodes must be distinct")]
    DuplicateNode,
    #[error("interpolation needs equally many nodes and values, got {xs} and {ys}")]
    NodeValueMismatch { xs: usize, ys: usize },
}

/// Dense evaluation table of a multilinear polynomial over `{0,1}^v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    evals: Vec<FieldElement>,
    num_vars: usize,
}

impl MultilinearPoly {
    /// Wraps an evaluation table; the length must be a power of two.
    /// A length-1 table is the constant polynomial in zero variables.
    pub fn new(evals: Vec<FieldElement>) -> Result<Self, PolyError> {
        if evals.is_empty() || !evals.len().is_power_of_two() {
            return Err(PolyError::NonPowerOfTwo(evals.len()));
        }
        let num_vars = evals.len().trailing_zeros() as usize;
        Ok(Self { evals, num_vars })
    }

    /// Constant polynomial over `num_vars` variables.
    pub fn constant(value: FieldElement, num_vars: usize) -> Self {
        Self {
            evals: vec![value; 1 << num_vars],
            num_vars,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.evals.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the table always has at least one entry
    }

    pub fn evals(&self) -> &[FieldElement] {
        &self.evals
    }

    pub fn into_evals(self) -> Vec<FieldElement> {
        self.evals
    }

    /// Evaluates the multilinear extension at an arbitrary field point.
    ///
    /// Folds one variable per pass, so runs in `O(2^v)` field operations.
    pub fn evaluate(
        &self,
        fp: &PrimeField,
        point: &[FieldElement],
    ) -> Result<FieldElement, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::WrongArity {
                got: point.len(),
                want: self.num_vars,
            });
        }
        let mut table = self.evals.clone();
        for r in point {
            fold_first_var(fp, &mut table, *r);
        }
        Ok(table[0])
    }

    /// Returns the polynomial in `v-1` variables obtained by substituting
    /// `r` for the *first* variable: `new[j] = (1-r)*old[2j] + r*old[2j+1]`.
    pub fn restrict_first_var(&self, fp: &PrimeField, r: FieldElement) -> Self {
        let mut table = self.evals.clone();
        fold_first_var(fp, &mut table, r);
        table.truncate(self.evals.len() / 2);
        Self {
            evals: table,
            num_vars: self.num_vars - 1,
        }
    }

    /// In-place variant of [`Self::restrict_first_var`]; used by the
    /// sum-check prover to avoid reallocating per round.
    pub fn restrict_first_var_in_place(&mut self, fp: &PrimeField, r: FieldElement) {
        assert!(self.num_vars > 0, "no variables left to restrict");
        fold_first_var(fp, &mut self.evals, r);
        self.evals.truncate(self.evals.len() / 2);
        self.num_vars -= 1;
    }

    /// Returns the polynomial in `v-1` variables obtained by substituting
    /// `r` for the *last* variable: `new[j] = (1-r)*old[j] + r*old[j+h]`
    /// with `h = 2^(v-1)`.
    pub fn fix_last_var(&self, fp: &PrimeField, r: FieldElement) -> Self {
        assert!(self.num_vars > 0, "no variables left to fix");
        let half = self.evals.len() / 2;
        let mut table = Vec::with_capacity(half);
        for j in 0..half {
            let lo = self.evals[j];
            let hi = self.evals[j + half];
            // lo + r*(hi - lo)
            table.push(fp.add(lo, fp.mul(r, fp.sub(hi, lo))));
        }
        Self {
            evals: table,
            num_vars: self.num_vars - 1,
        }
    }
}

/// One folding pass over the first variable. The live prefix of `table`
/// shrinks from `len` to `len/2`; entries beyond are left stale.
fn fold_first_var(fp: &PrimeField, table: &mut [FieldElement], r: FieldElement) {
    let half = table.len() / 2;
    for j in 0..half {
        let lo = table[2 * j];
        let hi = table[2 * j + 1];
        table[j] = fp.add(lo, fp.mul(r, fp.sub(hi, lo)));
    }
}

/// The multilinear equality polynomial
/// `eq(x, y) = prod_i (x_i*y_i + (1-x_i)*(1-y_i))`,
/// which is 1 when `x = y` on the hypercube and 0 on other boolean points.
pub fn eq_point(fp: &PrimeField, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
    assert_eq!(x.len(), y.len(), "eq_point arity mismatch");
    let mut acc = fp.one();
    for (xi, yi) in x.iter().zip(y) {
        let both = fp.mul(*xi, *yi);
        let neither = fp.mul(fp.sub(fp.one(), *xi), fp.sub(fp.one(), *yi));
        acc = fp.mul(acc, fp.add(both, neither));
    }
    acc
}

/// Full table of `eq(point, b)` for all `b` in `{0,1}^v`, LSB-first
/// indexing. Doubles the table once per variable, `O(2^v)` total.
///
/// The inner product of this table with a polynomial's evaluation table is
/// the polynomial's value at `point`, which is what links a committed
/// evaluation vector to an MLE opening claim.
pub fn eq_evals(fp: &PrimeField, point: &[FieldElement]) -> Vec<FieldElement> {
    let mut table = vec![fp.one()];
    for (i, u) in point.iter().enumerate() {
        let one_minus = fp.sub(fp.one(), *u);
        let mut next = vec![FieldElement::ZERO; 1 << (i + 1)];
        for (j, t) in table.iter().enumerate() {
            next[j] = fp.mul(*t, one_minus); // new bit = 0
            next[j | (1 << i)] = fp.mul(*t, *u); // new bit = 1
        }
        table = next;
    }
    table
}

/// Univariate polynomial in coefficient form, low degree first.
/// The zero polynomial is the empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivariatePoly {
    coeffs: Vec<FieldElement>,
}

impl UnivariatePoly {
    /// Trailing zero coefficients are trimmed so `degree` is meaningful.
    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Degree of the zero polynomial is reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn evaluate(&self, fp: &PrimeField, x: FieldElement) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = fp.add(fp.mul(acc, x), *c);
        }
        acc
    }

    /// Lagrange interpolation through `(xs[k], ys[k])`; nodes must be
    /// distinct. `O(n^2)` — round polynomials are tiny (degree <= 3).
    pub fn interpolate(
        fp: &PrimeField,
        xs: &[FieldElement],
        ys: &[FieldElement],
    ) -> Result<Self, PolyError> {
        if xs.len() != ys.len() {
            return Err(PolyError::NodeValueMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        let n = xs.len();
        let mut coeffs = vec![FieldElement::ZERO; n];
        for k in 0..n {
            // basis_k(X) = prod_{j != k} (X - xs[j]) / (xs[k] - xs[j])
            let mut basis = vec![FieldElement::ZERO; n];
            basis[0] = fp.one();
            let mut deg = 0usize;
            let mut denom = fp.one();
            for j in 0..n {
                if j == k {
                    continue;
                }
                let diff = fp.sub(xs[k], xs[j]);
                if diff.is_zero() {
                    return Err(PolyError::DuplicateNode);
                }
                denom = fp.mul(denom, diff);
                // basis *= (X - xs[j])
                deg += 1;
                for d in (0..=deg).rev() {
                    let shifted = if d == 0 { FieldElement::ZERO } else { basis[d - 1] };
                    basis[d] = fp.sub(shifted, fp.mul(basis[d], xs[j]));
                }
            }
            let scale = fp.mul(ys[k], fp.inv(denom).expect("distinct nodes"));
            for d in 0..n {
                coeffs[d] = fp.add(coeffs[d], fp.mul(basis[d], scale));
            }
        }
        Ok(Self::new(coeffs))
    }
}

/// Evaluates the degree `ys.len()-1` polynomial with values `ys[k]` at the
/// nodes `X = k` (k = 0..ys.len()) at the point `x`. This is the verifier's
/// view of a sum-check round message, which is transmitted in evaluation
/// form at exactly these nodes.
pub fn eval_at_nodes(fp: &PrimeField, ys: &[FieldElement], x: FieldElement) -> FieldElement {
    assert!(!ys.is_empty(), "empty evaluation-form polynomial");
    let n = ys.len();
    let mut acc = FieldElement::ZERO;
    for k in 0..n {
        let mut num = fp.one();
        let mut den = fp.one();
        let xk = fp.from_u64(k as u64);
        for j in 0..n {
            if j == k {
                continue;
            }
            let xj = fp.from_u64(j as u64);
            num = fp.mul(num, fp.sub(x, xj));
            den = fp.mul(den, fp.sub(xk, xj));
        }
        acc = fp.add(acc, fp.mul(ys[k], fp.mul(num, fp.inv(den).expect("distinct nodes"))));
    }
    acc
}
