//! Enclave attestation: measurements and Schnorr-signed evidence.
//!
//! A node's enclave is "measured" as `H(shard bytes ∥ runtime version)`.
//! The node signs a claims blob — its id, the runtime version, and the
//! measurement — with its static identity key, a Schnorr signature over
//! the session's curve group. The orchestrator admits a node to the
//! channel mesh only if the signature verifies under the node's registered
//! public key *and* the reported measurement equals the expected one, so
//! both a modified shard image and a stolen-but-stale evidence blob are
//! rejected.

use rand::RngCore;
use sha2::{Digest, Sha256, Sha512};


use crate::algebra::{CurveGroup, FieldElement, GroupPoint};
use crate::wire::{Reader, Writer};

const GENERATOR_TAG: &str = "zkdps/netsim/attest/generator";

/// A node's static identity keypair: `pk = sk · G` for a fixed hashed-in
/// generator `G` of the session group.
pub struct IdentityKey {
    sk: FieldElement,
    pk: GroupPoint,
}

impl IdentityKey {
    pub fn generate(group: &CurveGroup, rng: &mut impl RngCore) -> Self {
        let fp = group.scalar_field();
        let sk = loop {
            let s = fp.random(rng);
            if !s.is_zero() {
                break s;
            }
        };
        let g = group.hash_to_point(GENERATOR_TAG);
        let pk = group.scalar_mul(&g, sk);
        IdentityKey { sk, pk }
    }

    pub fn public(&self) -> &GroupPoint {
        &self.pk
    }
}

/// `H(shard bytes ∥ runtime version)` — what a correctly provisioned
/// enclave must be running.
pub fn measurement(shard_bytes: &[u8], runtime_version: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"zkdps/netsim/measurement/v1");
    h.update((shard_bytes.len() as u64).to_be_bytes());
    h.update(shard_bytes);
    h.update(runtime_version.as_bytes());
    h.finalize().into()
}

/// Signed attestation: the measurement, the claims blob it is embedded in,
/// and the Schnorr signature `(R, s)` over the claims.
pub struct AttestationEvidence {
    pub node: u32,
    pub measurement: [u8; 32],
    pub claims: Vec<u8>,
    r: GroupPoint,
    s: FieldElement,
}

fn claims_bytes(node: u32, meas: &[u8; 32], runtime_version: &str) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(node);
    w.raw(meas);
    w.bytes(runtime_version.as_bytes());
    w.finish()
}

/// Fiat–Shamir challenge for the signature: a scalar from
/// `H(R ∥ PK ∥ claims)` with wide reduction.
fn challenge(group: &CurveGroup, r: &GroupPoint, pk: &GroupPoint, claims: &[u8]) -> FieldElement {
    let mut h = Sha512::new();
    h.update(b"zkdps/netsim/attest/challenge");
    h.update(group.compress(r));
    h.update(group.compress(pk));
    h.update((claims.len() as u64).to_be_bytes());
    h.update(claims);
    group.scalar_field().from_bytes_wide(&h.finalize())
}

/// Produce evidence for a provisioned shard under the node's identity key.
pub fn attest(
    group: &CurveGroup,
    key: &IdentityKey,
    node: u32,
    shard_bytes: &[u8],
    runtime_version: &str,
    rng: &mut impl RngCore,
) -> AttestationEvidence {
    let fp = group.scalar_field();
    let meas = measurement(shard_bytes, runtime_version);
    let claims = claims_bytes(node, &meas, runtime_version);
    let g = group.hash_to_point(GENERATOR_TAG);
    let k = loop {
        let k = fp.random(rng);
        if !k.is_zero() {
            break k;
        }
    };
    let r = group.scalar_mul(&g, k);
    let c = challenge(group, &r, &key.pk, &claims);
    let s = fp.add(k, fp.mul(c, key.sk));
    AttestationEvidence {
        node,
        measurement: meas,
        claims,
        r,
        s,
    }
}

/// Check the evidence under the node's registered public key: the claims
/// blob must be internally consistent with the advertised node id and
/// measurement, and `s·G` must equal `R + c·PK`.
pub fn verify_attestation(
    group: &CurveGroup,
    pk: &GroupPoint,
    evidence: &AttestationEvidence,
) -> bool {
    let mut r = Reader::new(&evidence.claims);
    let consistent = (|| -> Result<bool, crate::wire::WireError> {
        let node = r.u32()?;
        let meas = r.take(32)?.to_vec();
        let _version = r.bytes()?;
        r.expect_end()?;
        Ok(node == evidence.node && meas == evidence.measurement)
    })();
    if !matches!(consistent, Ok(true)) {
        return false;
    }
    let c = challenge(group, &evidence.r, pk, &evidence.claims);
    let g = group.hash_to_point(GENERATOR_TAG);
    let lhs = group.scalar_mul(&g, evidence.s);
    let rhs = group.add(&evidence.r, &group.scalar_mul(pk, c));
    lhs == rhs
}
