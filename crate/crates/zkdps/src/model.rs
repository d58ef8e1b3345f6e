//! Fixed-point quantized feed-forward networks with exact integer
//! semantics.
//!
//! All tensors live on a uniform fixed-point grid: a real value `v` is
//! stored as `round_ties_even(v * scale)`, a signed integer bounded by the
//! model's bit width `Q`. A linear layer computes, per output `j`,
//!
//! `raw_j = sum_b x_b W[b][j]` (scale^2) →
//! `y_j = round_half_even((raw_j + scale * bias_j) / scale)` (scale) →
//! `a_j = activation(y_j)`,
//!
//! entirely in integer arithmetic, so identical inputs produce
//! bit-identical outputs on every host. The captured [`InferenceTrace`]
//! holds every intermediate tensor plus the ReLU bit decompositions and
//! lookup multiplicities — exactly the witness the proof layer consumes.
//!
//! Weight storage is column-major flat: entry `(b, j)` of a `k × p` matrix
//! sits at index `b + k*j`, matching the committed-matrix convention of
//! the proof gadgets. The text format is row-major (one line per input
//! index) for readability.

use crate::gadgets::{round_half_even_div, GadgetError, TableFn, TableSpec};
use std::fmt::Write as _;
use thiserror::Error;

/// Default magnitude bit width for quantized values.
pub const DEFAULT_QBITS: u32 = 32;
/// Default fixed-point scale.
pub const DEFAULT_SCALE: u64 = 1 << 8;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("magnitude overflow: |{0}| needs more than {1} bits")]
    MagnitudeOverflow(i64, u32),
    #[error("cut point {0} outside 1..{1}")]
    BadCutPoint(usize, usize),
    #[error("privacy budget must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad model format: {0}")]
    BadFormat(String),
    #[error("activation input {0} outside table domain {1}..={2}")]
    ActivationDomain(i64, i64, i64),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
    /// Tabulated function; the table's input scale must equal the model
    /// scale and its domain must contain 0 (padding flows through it).
    Table(TableSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub d_in: usize,
    pub d_out: usize,
    /// Quantized weights, column-major flat: `(b, j)` at `b + d_in*j`.
    pub weights: Vec<i64>,
    /// Quantized bias, one entry per output.
    pub bias: Vec<i64>,
    pub activation: Activation,
}

impl Layer {
    pub fn weight(&self, b: usize, j: usize) -> i64 {
        self.weights[b + self.d_in * j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub scale: u64,
    pub q_bits: u32,
    pub layers: Vec<Layer>,
}

impl ModelSpec {
    pub fn new(scale: u64, q_bits: u32, layers: Vec<Layer>) -> Result<Self, ModelError> {
        let m = Self { scale, q_bits, layers };
        m.validate()?;
        Ok(m)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.d_in)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.d_out)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.scale.is_power_of_two() {
            return Err(ModelError::BadFormat(format!(
                "scale {} is not a power of two",
                self.scale
            )));
        }
        if self.q_bits == 0 || self.q_bits > crate::gadgets::MAX_Q {
            return Err(ModelError::BadFormat(format!(
                "bit width {} outside 1..={}",
                self.q_bits,
                crate::gadgets::MAX_Q
            )));
        }
        // Accumulators live at scale^2 magnitude 2^q * scale and must fit
        // a signed 64-bit word.
        if u64::from(self.q_bits) + u64::from(self.scale.ilog2()) > 62 {
            return Err(ModelError::BadFormat(format!(
                "bit width {} plus log2(scale) {} exceeds 62",
                self.q_bits,
                self.scale.ilog2()
            )));
        }
        if self.layers.is_empty() {
            return Err(ModelError::BadFormat("model needs at least one layer".into()));
        }
        let limit = 1i64 << self.q_bits;
        for (i, l) in self.layers.iter().enumerate() {
            if l.d_in < 2 {
                return Err(ModelError::ShapeMismatch(format!(
                    "layer {i}: input width must be at least 2"
                )));
            }
            if l.d_out == 0 {
                return Err(ModelError::ShapeMismatch(format!(
                    "layer {i}: output width must be positive"
                )));
            }
            if l.weights.len() != l.d_in * l.d_out || l.bias.len() != l.d_out {
                return Err(ModelError::ShapeMismatch(format!(
                    "layer {i}: weight/bias sizes do not match {}x{}",
                    l.d_in, l.d_out
                )));
            }
            if i + 1 < self.layers.len() && self.layers[i + 1].d_in != l.d_out {
                return Err(ModelError::ShapeMismatch(format!(
                    "layer {} input width {} does not match layer {i} output width {}",
                    i + 1,
                    self.layers[i + 1].d_in,
                    l.d_out
                )));
            }
            for v in l.weights.iter().chain(&l.bias) {
                if v.abs() >= limit {
                    return Err(ModelError::MagnitudeOverflow(*v, self.q_bits));
                }
            }
            if let Activation::Table(spec) = &l.activation {
                if spec.in_scale != self.scale {
                    return Err(ModelError::BadFormat(format!(
                        "layer {i}: table input scale {} differs from model scale {}",
                        spec.in_scale, self.scale
                    )));
                }
                if spec.lo > 0 || spec.hi < 0 {
                    return Err(ModelError::BadFormat(format!(
                        "layer {i}: table domain {}..={} must contain 0",
                        spec.lo, spec.hi
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---- quantization ----

/// Quantize reals onto the fixed-point grid with round-half-to-even.
pub fn quantize(values: &[f64], scale: u64, q_bits: u32) -> Result<Vec<i64>, ModelError> {
    let limit = (1i64 << q_bits) as f64;
    values
        .iter()
        .map(|v| {
            let scaled = (v * scale as f64).round_ties_even();
            if !scaled.is_finite() || scaled.abs() >= limit {
                return Err(ModelError::MagnitudeOverflow(
                    if scaled.is_finite() { scaled as i64 } else { i64::MAX },
                    q_bits,
                ));
            }
            Ok(scaled as i64)
        })
        .collect()
}

/// Back to reals.
pub fn dequantize(values: &[i64], scale: u64) -> Vec<f64> {
    values.iter().map(|v| *v as f64 / scale as f64).collect()
}

// ---- forward execution ----

/// Everything one layer computed: the boundary tensors, the gadget-shaped
/// intermediates, and derived witness data for the nonlinearity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTrace {
    pub input: Vec<i64>,
    /// Raw accumulators `W·x` at scale².
    pub raw: Vec<i64>,
    /// After bias and rescale, at scale.
    pub rescaled: Vec<i64>,
    /// After the activation, at scale; equals the next layer's input.
    pub output: Vec<i64>,
    /// ReLU witness: sign bit then magnitude bits (MSB first), each a
    /// tensor over the layer width. Present iff the activation is ReLU.
    pub relu_bits: Option<Vec<Vec<i64>>>,
    /// Lookup witness: multiplicity per table row. Present iff the
    /// activation is tabulated.
    pub lookup_mults: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceTrace {
    /// First layer index this trace covers (0-based).
    pub start: usize,
    pub layers: Vec<LayerTrace>,
}

impl InferenceTrace {
    pub fn output(&self) -> &[i64] {
        &self.layers.last().expect("nonempty trace").output
    }

    /// Canonical bytes, for determinism checks and consensus voting.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = crate::wire::Writer::new();
        w.u32(self.start as u32);
        w.u32(self.layers.len() as u32);
        let tensor = |w: &mut crate::wire::Writer, t: &[i64]| {
            w.u32(t.len() as u32);
            for v in t {
                w.u64(*v as u64);
            }
        };
        for l in &self.layers {
            tensor(&mut w, &l.input);
            tensor(&mut w, &l.raw);
            tensor(&mut w, &l.rescaled);
            tensor(&mut w, &l.output);
            match &l.relu_bits {
                Some(bits) => {
                    w.u8(1);
                    w.u32(bits.len() as u32);
                    for b in bits {
                        tensor(&mut w, b);
                    }
                }
                None => w.u8(0),
            }
            match &l.lookup_mults {
                Some(m) => {
                    w.u8(1);
                    tensor(&mut w, m);
                }
                None => w.u8(0),
            }
        }
        w.finish()
    }
}

fn relu_bits_of(values: &[i64], q_bits: u32) -> Vec<Vec<i64>> {
    let mut bits = vec![Vec::with_capacity(values.len()); q_bits as usize + 1];
    for v in values {
        bits[0].push(i64::from(*v >= 0));
        let mag = v.unsigned_abs();
        for k in 1..=q_bits {
            bits[k as usize].push(((mag >> (q_bits - k)) & 1) as i64);
        }
    }
    bits
}

/// Integer table application plus multiplicity counting; the table itself
/// stays in pure integer space here (inputs `lo..=hi`, tabulated outputs).
fn apply_table(
    spec: &TableSpec,
    inputs: &[i64],
) -> Result<(Vec<i64>, Vec<i64>), ModelError> {
    let rows = (spec.hi - spec.lo) as usize + 1;
    let padded_rows = rows.next_power_of_two().max(2);
    let mut mults = vec![0i64; padded_rows];
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        if *x < spec.lo || *x > spec.hi {
            return Err(ModelError::ActivationDomain(*x, spec.lo, spec.hi));
        }
        let idx = (*x - spec.lo) as usize;
        mults[idx] += 1;
        out.push(spec.quantized_output(*x)?);
    }
    Ok((out, mults))
}

/// Run layers `start..end` (0-based, `end` exclusive) on `x`.
pub fn forward_range(
    model: &ModelSpec,
    x: &[i64],
    start: usize,
    end: usize,
) -> Result<(Vec<i64>, InferenceTrace), ModelError> {
    model.validate()?;
    if start >= end || end > model.depth() {
        return Err(ModelError::BadCutPoint(end, model.depth()));
    }
    let limit = 1i64 << model.q_bits;
    let s = model.scale as i128;
    let mut cur = x.to_vec();
    let mut layers = Vec::with_capacity(end - start);
    for layer in &model.layers[start..end] {
        if cur.len() != layer.d_in {
            return Err(ModelError::ShapeMismatch(format!(
                "input width {} does not match layer width {}",
                cur.len(),
                layer.d_in
            )));
        }
        for v in &cur {
            if v.abs() >= limit {
                return Err(ModelError::MagnitudeOverflow(*v, model.q_bits));
            }
        }
        // raw_j = sum_b x_b W[b][j], exact in i128, bounded by Q bits
        // (accumulators live at scale^2 and must stay representable).
        let mut raw = Vec::with_capacity(layer.d_out);
        let mut rescaled = Vec::with_capacity(layer.d_out);
        for j in 0..layer.d_out {
            let mut acc: i128 = 0;
            for (b, xv) in cur.iter().enumerate() {
                acc += *xv as i128 * layer.weight(b, j) as i128;
            }
            let with_bias = acc + s * layer.bias[j] as i128;
            if with_bias.unsigned_abs() >= (limit as u128) * model.scale as u128 {
                return Err(ModelError::MagnitudeOverflow(
                    with_bias.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
                    model.q_bits,
                ));
            }
            raw.push(acc as i64);
            let (y, _) = round_half_even_div(with_bias as i64, model.scale as i64);
            rescaled.push(y);
        }
        let mut relu_bits = None;
        let mut lookup_mults = None;
        let output = match &layer.activation {
            Activation::None => rescaled.clone(),
            Activation::Relu => {
                for v in &rescaled {
                    if v.abs() >= limit {
                        return Err(ModelError::MagnitudeOverflow(*v, model.q_bits));
                    }
                }
                relu_bits = Some(relu_bits_of(&rescaled, model.q_bits));
                rescaled.iter().map(|v| (*v).max(0)).collect()
            }
            Activation::Table(spec) => {
                let (out, mults) = apply_table(spec, &rescaled)?;
                lookup_mults = Some(mults);
                out
            }
        };
        let input = std::mem::replace(&mut cur, output.clone());
        layers.push(LayerTrace {
            input,
            raw,
            rescaled,
            output,
            relu_bits,
            lookup_mults,
        });
    }
    Ok((cur, InferenceTrace { start, layers }))
}

/// Full forward pass with trace capture.
pub fn forward(model: &ModelSpec, x: &[i64]) -> Result<(Vec<i64>, InferenceTrace), ModelError> {
    forward_range(model, x, 0, model.depth())
}

/// Run layers `1..=k` (1-based cut: `1 <= k < depth`), returning the
/// intermediate representation to hand to the remote half.
pub fn split_forward(
    model: &ModelSpec,
    x: &[i64],
    cut: usize,
) -> Result<(Vec<i64>, InferenceTrace), ModelError> {
    if cut == 0 || cut >= model.depth() {
        return Err(ModelError::BadCutPoint(cut, model.depth()));
    }
    forward_range(model, x, 0, cut)
}

/// Resume after a cut: layers `k+1..=depth` on the intermediate `z`.
pub fn resume_forward(
    model: &ModelSpec,
    z: &[i64],
    cut: usize,
) -> Result<(Vec<i64>, InferenceTrace), ModelError> {
    if cut == 0 || cut >= model.depth() {
        return Err(ModelError::BadCutPoint(cut, model.depth()));
    }
    forward_range(model, z, cut, model.depth())
}

// ---- differential privacy for split inference ----

/// Add two-sided-geometric ("discrete Laplace") noise to each coordinate
/// of a quantized intermediate. The mechanism targets the continuous
/// Laplace scale `sensitivity / epsilon` expressed on the quantization
/// grid: `P(noise = k) ∝ exp(-|k| / (sensitivity/epsilon * scale))`, so
/// per-coordinate standard deviation approaches
/// `sqrt(2) * sensitivity/epsilon * scale` grid units.
pub fn privatize_embedding(
    z: &[i64],
    epsilon: f64,
    sensitivity: f64,
    scale: u64,
    rng: &mut impl rand::Rng,
) -> Result<Vec<i64>, ModelError> {
    if !(epsilon > 0.0) {
        return Err(ModelError::NonPositiveEpsilon(epsilon));
    }
    let b = sensitivity / epsilon * scale as f64;
    if b == 0.0 || !b.is_finite() {
        // epsilon -> infinity or zero sensitivity: the identity.
        return Ok(z.to_vec());
    }
    let ln_alpha = -1.0 / b;
    Ok(z.iter()
        .map(|v| v + geometric(ln_alpha, rng) - geometric(ln_alpha, rng))
        .collect())
}

/// One geometric draw with `P(G = k) = (1 - alpha) alpha^k`,
/// `alpha = exp(ln_alpha)`, via inverse-CDF on a uniform in (0, 1].
fn geometric(ln_alpha: f64, rng: &mut impl rand::Rng) -> i64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / ln_alpha).floor() as i64
}

// ---- sharding ----

/// Contiguous layer ranges with node assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardPlan {
    /// Half-open 0-based layer ranges, in order.
    pub ranges: Vec<(usize, usize)>,
    /// Node ids assigned to each shard (>= 1 per shard; length equals the
    /// redundancy when replicas are requested).
    pub assignees: Vec<Vec<u32>>,
    pub redundancy: usize,
}

impl ShardPlan {
    pub fn new(
        depth: usize,
        ranges: Vec<(usize, usize)>,
        assignees: Vec<Vec<u32>>,
        redundancy: usize,
    ) -> Result<Self, ModelError> {
        if ranges.is_empty() || ranges.len() != assignees.len() {
            return Err(ModelError::ShapeMismatch(
                "each shard range needs an assignee list".into(),
            ));
        }
        let mut expect = 0usize;
        for (i, (s, e)) in ranges.iter().enumerate() {
            if *s != expect || *e <= *s {
                return Err(ModelError::ShapeMismatch(format!(
                    "shard {i} range {s}..{e} does not continue the partition at {expect}"
                )));
            }
            expect = *e;
            if assignees[i].is_empty() {
                return Err(ModelError::ShapeMismatch(format!(
                    "shard {i} has no assigned node"
                )));
            }
        }
        if expect != depth {
            return Err(ModelError::ShapeMismatch(format!(
                "shard ranges cover {expect} of {depth} layers"
            )));
        }
        if redundancy == 0 {
            return Err(ModelError::ShapeMismatch("redundancy must be at least 1".into()));
        }
        Ok(Self { ranges, assignees, redundancy })
    }

    /// Even contiguous split into `shards` pieces, single assignee each.
    pub fn even(depth: usize, shards: usize) -> Result<Self, ModelError> {
        if shards == 0 || shards > depth {
            return Err(ModelError::ShapeMismatch(format!(
                "cannot split {depth} layers into {shards} shards"
            )));
        }
        let base = depth / shards;
        let extra = depth % shards;
        let mut ranges = Vec::with_capacity(shards);
        let mut start = 0;
        for i in 0..shards {
            let len = base + usize::from(i < extra);
            ranges.push((start, start + len));
            start += len;
        }
        let assignees = (0..shards as u32).map(|i| vec![i]).collect();
        Self::new(depth, ranges, assignees, 1)
    }
}

// ---- text formats ----

fn activation_to_text(a: &Activation) -> String {
    match a {
        Activation::None => "none".into(),
        Activation::Relu => "relu".into(),
        Activation::Table(s) => format!(
            "table:{}:{}:{}:{}",
            s.f.name(),
            s.lo,
            s.hi,
            s.out_scale
        ),
    }
}

fn activation_from_text(text: &str, model_scale: u64) -> Result<Activation, ModelError> {
    match text {
        "none" => Ok(Activation::None),
        "relu" => Ok(Activation::Relu),
        t if t.starts_with("table:") => {
            let parts: Vec<_> = t.split(':').collect();
            if parts.len() != 5 {
                return Err(ModelError::BadFormat(format!(
                    "activation '{t}' wants table:<fn>:<lo>:<hi>:<out_scale>"
                )));
            }
            let f = match parts[1] {
                "softmax-exp" => TableFn::SoftmaxExp,
                "sigmoid" => TableFn::Sigmoid,
                "gelu" => TableFn::Gelu,
                "rmsnorm-rsqrt" => TableFn::RmsNormRsqrt,
                other => {
                    return Err(ModelError::BadFormat(format!(
                        "unknown table function '{other}'"
                    )))
                }
            };
            let parse = |s: &str| -> Result<i64, ModelError> {
                s.parse()
                    .map_err(|_| ModelError::BadFormat(format!("bad integer '{s}'")))
            };
            Ok(Activation::Table(TableSpec {
                f,
                lo: parse(parts[2])?,
                hi: parse(parts[3])?,
                in_scale: model_scale,
                out_scale: parse(parts[4])? as u64,
            }))
        }
        other => Err(ModelError::BadFormat(format!("unknown activation '{other}'"))),
    }
}

impl ModelSpec {
    /// Render the documented text format:
    ///
    /// ```text
    /// zkdps-model v1
    /// scale <u64>
    /// qbits <u32>
    /// layers <count>
    /// layer <d_in> <d_out> <activation>
    /// <d_in lines of d_out weights, row-major>
    /// bias <d_out integers>
    /// ```
    ///
    /// where `<activation>` is `none`, `relu`, or
    /// `table:<fn>:<lo>:<hi>:<out_scale>` (table input scale = model
    /// scale). Blank lines and `#` comments are ignored when parsing.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "zkdps-model v1");
        let _ = writeln!(out, "scale {}", self.scale);
        let _ = writeln!(out, "qbits {}", self.q_bits);
        let _ = writeln!(out, "layers {}", self.layers.len());
        for l in &self.layers {
            let _ = writeln!(
                out,
                "layer {} {} {}",
                l.d_in,
                l.d_out,
                activation_to_text(&l.activation)
            );
            for b in 0..l.d_in {
                let row: Vec<String> = (0..l.d_out).map(|j| l.weight(b, j).to_string()).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            let row: Vec<String> = l.bias.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "bias {}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<&str, ModelError> {
            lines
                .next()
                .ok_or_else(|| ModelError::BadFormat(format!("missing {what}")))
        };
        if next("header")? != "zkdps-model v1" {
            return Err(ModelError::BadFormat("expected header 'zkdps-model v1'".into()));
        }
        let field = |line: &str, key: &str| -> Result<u64, ModelError> {
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| ModelError::BadFormat(format!("expected '{key} <n>'")))?;
            rest.trim()
                .parse()
                .map_err(|_| ModelError::BadFormat(format!("bad number in '{line}'")))
        };
        let scale = field(next("scale")?, "scale")?;
        let q_bits = field(next("qbits")?, "qbits")? as u32;
        let n_layers = field(next("layers")?, "layers")? as usize;
        if n_layers == 0 || n_layers > 1 << 10 {
            return Err(ModelError::BadFormat(format!("implausible layer count {n_layers}")));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let header = next("layer header")?;
            let parts: Vec<_> = header.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "layer" {
                return Err(ModelError::BadFormat(format!(
                    "expected 'layer <d_in> <d_out> <activation>', got '{header}'"
                )));
            }
            let d_in: usize = parts[1]
                .parse()
                .map_err(|_| ModelError::BadFormat(format!("bad width '{}'", parts[1])))?;
            let d_out: usize = parts[2]
                .parse()
                .map_err(|_| ModelError::BadFormat(format!("bad width '{}'", parts[2])))?;
            if d_in == 0 || d_out == 0 || d_in * d_out > 1 << 22 {
                return Err(ModelError::BadFormat(format!(
                    "implausible layer shape {d_in}x{d_out}"
                )));
            }
            let activation = activation_from_text(parts[3], scale)?;
            let mut weights = vec![0i64; d_in * d_out];
            for b in 0..d_in {
                let row = next("weight row")?;
                let vals: Vec<&str> = row.split_whitespace().collect();
                if vals.len() != d_out {
                    return Err(ModelError::BadFormat(format!(
                        "weight row has {} entries, expected {d_out}",
                        vals.len()
                    )));
                }
                for (j, v) in vals.iter().enumerate() {
                    weights[b + d_in * j] = v
                        .parse()
                        .map_err(|_| ModelError::BadFormat(format!("bad weight '{v}'")))?;
                }
            }
            let bias_line = next("bias")?;
            let rest = bias_line
                .strip_prefix("bias")
                .ok_or_else(|| ModelError::BadFormat(format!("expected 'bias …', got '{bias_line}'")))?;
            let bias = rest
                .split_whitespace()
                .map(|v| {
                    v.parse()
                        .map_err(|_| ModelError::BadFormat(format!("bad bias '{v}'")))
                })
                .collect::<Result<Vec<i64>, _>>()?;
            if bias.len() != d_out {
                return Err(ModelError::BadFormat(format!(
                    "bias has {} entries, expected {d_out}",
                    bias.len()
                )));
            }
            layers.push(Layer { d_in, d_out, weights, bias, activation });
        }
        if lines.next().is_some() {
            return Err(ModelError::BadFormat("trailing content after last layer".into()));
        }
        ModelSpec::new(scale, q_bits, layers)
    }
}

/// Parse a tensor file: one decimal number per line (blank lines and `#`
/// comments ignored). Integer lines are taken as already-quantized grid
/// values; if any line contains a fractional part, the whole file is read
/// as reals and quantized at `scale`.
pub fn tensor_from_text(text: &str, scale: u64, q_bits: u32) -> Result<Vec<i64>, ModelError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let real_valued = lines
        .iter()
        .any(|l| l.contains('.') || l.contains('e') || l.contains('E'));
    if real_valued {
        let reals = lines
            .iter()
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| ModelError::BadFormat(format!("bad number '{l}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        quantize(&reals, scale, q_bits)
    } else {
        let limit = 1i64 << q_bits;
        lines
            .iter()
            .map(|l| {
                let v: i64 = l
                    .parse()
                    .map_err(|_| ModelError::BadFormat(format!("bad integer '{l}'")))?;
                if v.abs() >= limit {
                    return Err(ModelError::MagnitudeOverflow(v, q_bits));
                }
                Ok(v)
            })
            .collect()
    }
}

pub fn tensor_to_text(values: &[i64]) -> String {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}
