//! zkdps: a verifiable decentralized-inference toolkit.
//!
//! Small quantized neural networks are executed shard-by-shard across
//! simulated worker enclaves; each shard's execution is either proven in
//! zero knowledge (Pedersen commitments + sum-check over per-layer gadget
//! identities) or cross-checked by redundant execution and consensus.
//!
//! Layering, bottom to top:
//!
//! * [`algebra`] — prime fields with runtime moduli, short-Weierstrass
//!   curve groups, canonical encodings, loadable curve profiles.
//! * [`poly`] — multilinear extensions over the Boolean hypercube and the
//!   small univariate polynomials exchanged in sum-check rounds.
//! * [`transcript`] — interactive / Fiat–Shamir challenge generation with
//!   domain separation.
//! * [`commit`] — Pedersen vector commitments and the blinded
//!   opening/inner-product argument (with its special-soundness extractor).
//! * [`sumcheck`] — the round protocol for sums of products of committed
//!   multilinear factors.
//! * [`gadgets`] — per-layer circuits: matrix multiplication, bit-sliced
//!   ReLU, and a rational-identity lookup argument with function tables.
//! * [`model`] — fixed-point quantized MLPs: forward passes, execution
//!   traces, shard plans, split inference, embedding privatization.
//! * [`dps`] — end-to-end shard proofs: commitments, per-layer proof
//!   chaining, the `ZKDP` proof container, verification reports.
//! * [`consensus`] — redundant-execution voting (exact-match and
//!   distribution-based) and shard-output reconstruction.
//! * [`netsim`] — deterministic single-process network simulation: enclave
//!   lifecycle, attestation, Diffie–Hellman secure channels, scheduling.

pub mod algebra;
pub mod commit;
pub mod consensus;
pub mod dps;
pub mod gadgets;
pub mod model;
pub mod netsim;
pub mod poly;
pub mod sumcheck;
pub mod transcript;

pub(crate) mod wire;
