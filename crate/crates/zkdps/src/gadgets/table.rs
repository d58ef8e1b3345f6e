//! Builders for public nonlinearity tables.
//!
//! A table discretizes a real function over an integer input domain at a
//! fixed-point input scale, quantizing outputs at an output scale with
//! round-half-to-even. The resulting two-column [`LookupTable`] feeds the
//! lookup gadget, so a committed activation column can be proven to equal
//! the tabulated function of a committed input column.

use super::{lookup::LookupTable, GadgetError};
use crate::algebra::PrimeField;
use crate::wire::{Reader, Writer};

/// Hard cap on generated table rows.
pub const TABLE_ROW_CAP: u64 = 1 << 20;

/// Supported real functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFn {
    /// `exp(x)`, used for softmax numerators over max-shifted inputs.
    SoftmaxExp,
    /// `1 / (1 + exp(-x))`.
    Sigmoid,
    /// GELU in its tanh form:
    /// `0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))`.
    Gelu,
    /// `1 / sqrt(x)`, used for RMS normalization; positive domain only.
    RmsNormRsqrt,
}

impl TableFn {
    pub fn id(self) -> u8 {
        match self {
            TableFn::SoftmaxExp => 1,
            TableFn::Sigmoid => 2,
            TableFn::Gelu => 3,
            TableFn::RmsNormRsqrt => 4,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(TableFn::SoftmaxExp),
            2 => Some(TableFn::Sigmoid),
            3 => Some(TableFn::Gelu),
            4 => Some(TableFn::RmsNormRsqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TableFn::SoftmaxExp => "softmax-exp",
            TableFn::Sigmoid => "sigmoid",
            TableFn::Gelu => "gelu",
            TableFn::RmsNormRsqrt => "rmsnorm-rsqrt",
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            TableFn::SoftmaxExp => x.exp(),
            TableFn::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            TableFn::Gelu => {
                let c = (2.0 / std::f64::consts::PI).sqrt();
                0.5 * x * (1.0 + (c * (x + 0.044715 * x * x * x)).tanh())
            }
            TableFn::RmsNormRsqrt => 1.0 / x.sqrt(),
        }
    }
}

/// A function table description: integer inputs `lo..=hi` interpreted at
/// `in_scale`, outputs quantized at `out_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSpec {
    pub f: TableFn,
    pub lo: i64,
    pub hi: i64,
    pub in_scale: u64,
    pub out_scale: u64,
}

impl TableSpec {
    /// The quantized output for an in-domain integer input:
    /// `round_ties_even(f(x / in_scale) * out_scale)`.
    pub fn quantized_output(&self, x: i64) -> Result<i64, GadgetError> {
        let real = self.f.eval(x as f64 / self.in_scale as f64);
        if !real.is_finite() {
            return Err(GadgetError::BadDomain(format!(
                "{}({x}/{}) is not finite",
                self.f.name(),
                self.in_scale
            )));
        }
        let scaled = (real * self.out_scale as f64).round_ties_even();
        if !scaled.is_finite() || scaled.abs() >= (1i64 << 62) as f64 {
            return Err(GadgetError::MagnitudeOverflow(x, 62));
        }
        Ok(scaled as i64)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.f.id());
        w.u64(self.lo as u64);
        w.u64(self.hi as u64);
        w.u64(self.in_scale);
        w.u64(self.out_scale);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GadgetError> {
        let mut r = Reader::new(bytes);
        let f = TableFn::from_id(r.u8()?)
            .ok_or_else(|| GadgetError::Protocol("unknown table function id".into()))?;
        let lo = r.u64()? as i64;
        let hi = r.u64()? as i64;
        let in_scale = r.u64()?;
        let out_scale = r.u64()?;
        r.expect_end()?;
        Ok(Self { f, lo, hi, in_scale, out_scale })
    }
}

/// Tabulate the function: row `x` maps to
/// `round_ties_even(f(x / in_scale) * out_scale)`.
pub fn build_function_table(
    fp: &PrimeField,
    spec: &TableSpec,
) -> Result<LookupTable, GadgetError> {
    if spec.lo > spec.hi {
        return Err(GadgetError::BadDomain(format!(
            "empty domain {}..={}",
            spec.lo, spec.hi
        )));
    }
    if spec.in_scale == 0 || spec.out_scale == 0 {
        return Err(GadgetError::BadDomain("scales must be positive".into()));
    }
    if spec.f == TableFn::RmsNormRsqrt && spec.lo <= 0 {
        return Err(GadgetError::BadDomain(
            "reciprocal square root needs a positive domain".into(),
        ));
    }
    let rows_needed = (spec.hi - spec.lo) as u64 + 1;
    if rows_needed > TABLE_ROW_CAP {
        return Err(GadgetError::DomainTooLarge(rows_needed, TABLE_ROW_CAP));
    }
    let mut rows = Vec::with_capacity(rows_needed as usize);
    for x in spec.lo..=spec.hi {
        let y = spec.quantized_output(x)?;
        rows.push(vec![
            fp.from_i64(x).map_err(|_| GadgetError::MagnitudeOverflow(x, 62))?,
            fp.from_i64(y).map_err(|_| GadgetError::MagnitudeOverflow(y, 62))?,
        ]);
    }
    LookupTable::new(1, 1, &rows)
}
