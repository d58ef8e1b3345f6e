//! Simulated secure deployment: attested enclaves, encrypted channels,
//! shard scheduling, and a deterministic virtual-time session driver.
//!
//! Nothing here opens a socket. The network is a set of in-process
//! [`channel::ChannelEnd`] pairs carrying real AEAD frames, nodes are
//! [`sched::NodeDescriptor`]s with a speed weight and an honesty flag, and
//! "time" is an integer tick counter advanced by a cost model
//! (`multiply count / speed`). That is enough to exercise every protocol
//! property end to end — key agreement, attestation, replay and tamper
//! rejection, redundant execution with voting, proof-carrying hand-offs —
//! while keeping runs bit-for-bit reproducible from a single seed.
//!
//! Module map:
//!
//! * [`channel`] — finite-field Diffie–Hellman key agreement and
//!   counter-nonce ChaCha20-Poly1305 framing.
//! * [`attest`] — shard measurements and Schnorr-signed attestation
//!   evidence over the session's curve group.
//! * [`sched`] — longest-processing-time placement of shards onto
//!   heterogeneous (gpu/cpu, weighted-speed) nodes.
//! * [`session`] — the full lifecycle: init, attest, channel mesh,
//!   encrypted provisioning, redundant execution, consensus, optional
//!   shard proofs, retrieval, and zeroizing teardown, all logged as
//!   line-delimited events.

pub mod attest;
pub mod channel;
pub mod sched;
pub mod session;

use thiserror::Error;

use crate::consensus::ConsensusError;
use crate::dps::DpsError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum NetsimError {
    /// A frame failed authentication: wrong addressing, wrong key, or a
    /// modified ciphertext.
    #[error("secure channel authentication failure")]
    AuthFailure,
    /// A frame carried a counter below the receive window.
    #[error("replay detected: counter {got} below expected {expected}")]
    ReplayDetected { got: u64, expected: u64 },
    /// The endpoint's key material was already zeroized.
    #[error("channel endpoint destroyed")]
    ChannelDestroyed,
    /// A peer tried to communicate before presenting valid evidence.
    #[error("attestation missing or invalid for node {0}")]
    AttestationMissing(u32),
    /// Scheduling was asked to place shards with no nodes registered.
    #[error("no nodes available")]
    NoNodes,
    /// Enclave state was read after destruction.
    #[error("enclave state read after destruction")]
    TeePoisoned,
    /// Group parameters were rejected (bad modulus, degenerate generator,
    /// or a public value outside the expected subgroup).
    #[error("bad group parameters: {0}")]
    BadParams(String),
    /// The scenario configuration is malformed or inconsistent.
    #[error("bad scenario: {0}")]
    BadScenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dps(#[from] DpsError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
}
