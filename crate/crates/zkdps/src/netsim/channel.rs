//! Key agreement and authenticated framing for node-to-node links.
//!
//! Keys come from classic finite-field Diffie–Hellman over a configurable
//! prime-order subgroup; both endpoints hash the shared group element (plus
//! the ordered pair of node ids) into a 32-byte ChaCha20-Poly1305 session
//! key. Each frame is `sender ∥ receiver ∥ counter ∥ ciphertext` with the
//! 16-byte header bound as associated data and the nonce derived from
//! `sender ∥ counter`, so frames can be neither modified, redirected, nor
//! replayed: counters must not decrease, and a replayed frame is rejected
//! before any decryption is attempted.
//!
//! The built-in group is a 255-bit safe prime `p` (so `(p − 1)/2 = q` is
//! prime) with generator `4 = 2²` — a quadratic residue, hence a generator
//! of the order-`q` subgroup. Private exponents are sampled uniformly from
//! `[1, q)` and peer public values are checked to lie in the subgroup.

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::RngCore;
use sha2::{Digest, Sha256};
use zeroize::Zeroize;

use super::NetsimError;
use crate::algebra::{limbs, FieldElement, Limbs, PrimeField};

/// Built-in 255-bit safe prime modulus (hex).
pub const DEFAULT_MODULUS: &str =
    "0x715ba6324ca39a276d92cc8e35427426dda0584d774b18fffee1d7249a50f1db";
/// Order of the built-in subgroup: `(p − 1)/2`, prime.
pub const DEFAULT_ORDER: &str =
    "0x38add3192651cd13b6c966471aa13a136ed02c26bba58c7fff70eb924d2878ed";
/// Built-in generator: `2²`, a quadratic residue mod the safe prime.
pub const DEFAULT_GENERATOR: u64 = 4;

/// Diffie–Hellman group parameters: a prime modulus, a generator, and —
/// when known — the order of the subgroup the generator spans.
pub struct DhParams {
    fp: PrimeField,
    g: FieldElement,
    order: Option<Limbs>,
}

impl DhParams {
    /// Build parameters from a modulus, a small generator, and an optional
    /// subgroup order. When the order is given, the generator is checked
    /// against it and later peer values are validated to lie in the
    /// subgroup.
    pub fn new(modulus: Limbs, generator: u64, order: Option<Limbs>) -> Result<Self, NetsimError> {
        let fp = PrimeField::new(modulus).map_err(|e| NetsimError::BadParams(e.to_string()))?;
        let g = fp.from_u64(generator);
        if g.is_zero() || g == fp.one() {
            return Err(NetsimError::BadParams(
                "generator must be neither 0 nor 1".into(),
            ));
        }
        if let Some(q) = &order {
            if limbs::is_zero(q) {
                return Err(NetsimError::BadParams("subgroup order is zero".into()));
            }
            if fp.pow(g, q) != fp.one() {
                return Err(NetsimError::BadParams(
                    "generator does not have the claimed order".into(),
                ));
            }
        }
        Ok(DhParams { fp, g, order })
    }

    /// The built-in safe-prime group.
    pub fn builtin() -> Self {
        let p = limbs::from_str(DEFAULT_MODULUS).expect("builtin modulus parses");
        let q = limbs::from_str(DEFAULT_ORDER).expect("builtin order parses");
        DhParams::new(p, DEFAULT_GENERATOR, Some(q)).expect("builtin group is consistent")
    }

    pub fn field(&self) -> &PrimeField {
        &self.fp
    }

    /// Sample a private exponent: uniform in `[1, q)` when the subgroup
    /// order is known, else uniform in `[1, p)`.
    pub fn sample_secret(&self, rng: &mut impl RngCore) -> Limbs {
        match &self.order {
            Some(q) => {
                let fq = PrimeField::new(*q).expect("subgroup order is an odd prime");
                loop {
                    let s = fq.random(rng);
                    if !s.is_zero() {
                        let bytes = fq.to_bytes(s);
                        return limbs::from_be_bytes(&bytes).expect("canonical bytes fit");
                    }
                }
            }
            None => loop {
                let s = self.fp.random(rng);
                if !s.is_zero() {
                    let bytes = self.fp.to_bytes(s);
                    return limbs::from_be_bytes(&bytes).expect("canonical bytes fit");
                }
            },
        }
    }

    /// `g^secret mod p`.
    pub fn public_value(&self, secret: &Limbs) -> FieldElement {
        self.fp.pow(self.g, secret)
    }

    /// Validate the peer's public value and raise it to the local secret.
    pub fn shared_secret(
        &self,
        secret: &Limbs,
        peer_public: FieldElement,
    ) -> Result<FieldElement, NetsimError> {
        if peer_public.is_zero() || peer_public == self.fp.one() {
            return Err(NetsimError::BadParams(
                "degenerate peer public value".into(),
            ));
        }
        if let Some(q) = &self.order {
            if self.fp.pow(peer_public, q) != self.fp.one() {
                return Err(NetsimError::BadParams(
                    "peer public value outside the prime-order subgroup".into(),
                ));
            }
        }
        Ok(self.fp.pow(peer_public, secret))
    }
}

/// Hash the shared group element into a direction-agnostic session key.
/// Both endpoints call this with the same (sorted) id pair and the same
/// shared element, so they derive the same key.
fn derive_key(fp: &PrimeField, shared: FieldElement, a: u32, b: u32) -> [u8; 32] {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = Sha256::new();
    h.update(b"zkdps/netsim/kdf/v1");
    h.update(limbs::to_be_bytes(fp.modulus(), fp.byte_len()));
    h.update(lo.to_be_bytes());
    h.update(hi.to_be_bytes());
    h.update(fp.to_bytes(shared));
    h.finalize().into()
}

/// Frame layout: `sender u32 ∥ receiver u32 ∥ counter u64 ∥ ciphertext`.
pub const FRAME_HEADER_LEN: usize = 16;
/// Poly1305 tag length; the minimum ciphertext size.
pub const FRAME_TAG_LEN: usize = 16;

fn nonce_bytes(sender: u32, counter: u64) -> [u8; 12] {
    let mut n = [0u8; 12];
    n[..4].copy_from_slice(&sender.to_be_bytes());
    n[4..].copy_from_slice(&counter.to_be_bytes());
    n
}

/// One endpoint of an established channel. Holds the session key and the
/// send/receive counters; `destroy` zeroizes the key and poisons the
/// endpoint so any later use fails.
pub struct ChannelEnd {
    local: u32,
    peer: u32,
    key: [u8; 32],
    next_send: u64,
    next_recv: u64,
    destroyed: bool,
}

impl ChannelEnd {
    pub fn local(&self) -> u32 {
        self.local
    }

    pub fn peer(&self) -> u32 {
        self.peer
    }

    pub fn sent(&self) -> u64 {
        self.next_send
    }

    pub fn received(&self) -> u64 {
        self.next_recv
    }

    /// Short key digest for logs — never the key itself.
    pub fn key_fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"zkdps/netsim/fingerprint");
        h.update(self.key);
        hex::encode(&h.finalize()[..4])
    }

    /// Encrypt `plaintext` to the peer, advancing the send counter.
    pub fn seal(&mut self, plaintext: &[u8]) -> Result<Vec<u8>, NetsimError> {
        if self.destroyed {
            return Err(NetsimError::ChannelDestroyed);
        }
        let mut frame = Vec::with_capacity(FRAME_HEADER_LEN + plaintext.len() + FRAME_TAG_LEN);
        frame.extend_from_slice(&self.local.to_be_bytes());
        frame.extend_from_slice(&self.peer.to_be_bytes());
        frame.extend_from_slice(&self.next_send.to_be_bytes());
        let cipher = ChaCha20Poly1305::new(Key::from_slice(&self.key));
        let ct = cipher
            .encrypt(
                Nonce::from_slice(&nonce_bytes(self.local, self.next_send)),
                Payload {
                    msg: plaintext,
                    aad: &frame[..FRAME_HEADER_LEN],
                },
            )
            .map_err(|_| NetsimError::AuthFailure)?;
        frame.extend_from_slice(&ct);
        self.next_send += 1;
        Ok(frame)
    }

    /// Authenticate and decrypt a frame from the peer. Counters must not
    /// decrease: a frame at or below the last accepted counter is a replay
    /// and is rejected before decryption.
    pub fn open(&mut self, frame: &[u8]) -> Result<Vec<u8>, NetsimError> {
        if self.destroyed {
            return Err(NetsimError::ChannelDestroyed);
        }
        if frame.len() < FRAME_HEADER_LEN + FRAME_TAG_LEN {
            return Err(NetsimError::AuthFailure);
        }
        let sender = u32::from_be_bytes(frame[0..4].try_into().expect("4 bytes"));
        let receiver = u32::from_be_bytes(frame[4..8].try_into().expect("4 bytes"));
        let counter = u64::from_be_bytes(frame[8..16].try_into().expect("8 bytes"));
        if sender != self.peer || receiver != self.local {
            return Err(NetsimError::AuthFailure);
        }
        if counter < self.next_recv {
            return Err(NetsimError::ReplayDetected {
                got: counter,
                expected: self.next_recv,
            });
        }
        let cipher = ChaCha20Poly1305::new(Key::from_slice(&self.key));
        let plaintext = cipher
            .decrypt(
                Nonce::from_slice(&nonce_bytes(sender, counter)),
                Payload {
                    msg: &frame[FRAME_HEADER_LEN..],
                    aad: &frame[..FRAME_HEADER_LEN],
                },
            )
            .map_err(|_| NetsimError::AuthFailure)?;
        self.next_recv = counter + 1;
        Ok(plaintext)
    }

    /// Zeroize the session key and poison the endpoint.
    pub fn destroy(&mut self) {
        self.key.zeroize();
        self.destroyed = true;
    }
}

/// Run the key agreement for a pair of nodes and return both endpoints.
/// Each side computes its own shared element and key; the two derivations
/// are checked to agree, which is the protocol invariant that both
/// endpoints of a channel hold identical session keys.
pub fn establish_pair(
    params: &DhParams,
    a: u32,
    a_secret: &Limbs,
    b: u32,
    b_secret: &Limbs,
) -> Result<(ChannelEnd, ChannelEnd), NetsimError> {
    let pub_a = params.public_value(a_secret);
    let pub_b = params.public_value(b_secret);
    let shared_a = params.shared_secret(a_secret, pub_b)?;
    let shared_b = params.shared_secret(b_secret, pub_a)?;
    let key_a = derive_key(params.field(), shared_a, a, b);
    let key_b = derive_key(params.field(), shared_b, a, b);
    if key_a != key_b {
        return Err(NetsimError::BadParams(
            "endpoints derived different session keys".into(),
        ));
    }
    let end = |local, peer, key| ChannelEnd {
        local,
        peer,
        key,
        next_send: 0,
        next_recv: 0,
        destroyed: false,
    };
    Ok((end(a, b, key_a), end(b, a, key_b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn textbook_params() -> DhParams {
        DhParams::new(limbs::from_u64(23), 5, None).unwrap()
    }

    #[test]
    fn textbook_exchange_yields_shared_secret_two() {
        let params = textbook_params();
        let fp = params.field();
        let a = limbs::from_u64(6);
        let b = limbs::from_u64(15);
        let pub_a = params.public_value(&a);
        let pub_b = params.public_value(&b);
        assert_eq!(pub_a, fp.from_u64(8), "5^6 mod 23");
        assert_eq!(pub_b, fp.from_u64(19), "5^15 mod 23");
        let s_a = params.shared_secret(&a, pub_b).unwrap();
        let s_b = params.shared_secret(&b, pub_a).unwrap();
        assert_eq!(s_a, fp.from_u64(2));
        assert_eq!(s_b, fp.from_u64(2));
    }

    #[test]
    fn builtin_group_is_consistent_and_prime() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = limbs::from_str(DEFAULT_MODULUS).unwrap();
        let q = limbs::from_str(DEFAULT_ORDER).unwrap();
        assert!(PrimeField::is_probable_prime(&p, &mut rng));
        assert!(PrimeField::is_probable_prime(&q, &mut rng));
        // p = 2q + 1
        let (dq, carry) = limbs::add(&q, &q);
        assert!(!carry);
        let (p_rebuilt, carry) = limbs::add(&dq, &limbs::from_u64(1));
        assert!(!carry);
        assert_eq!(p_rebuilt, p);
        // generator has order q
        let fp = params.field();
        assert_eq!(fp.pow(fp.from_u64(DEFAULT_GENERATOR), &q), fp.one());
    }

    #[test]
    fn endpoints_derive_identical_keys_and_roundtrip() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let (mut alice, mut bob) = establish_pair(&params, 10, &sa, 20, &sb).unwrap();
        assert_eq!(alice.key_fingerprint(), bob.key_fingerprint());

        for i in 0..5u64 {
            let msg = format!("message {i}");
            let frame = alice.seal(msg.as_bytes()).unwrap();
            let out = bob.open(&frame).unwrap();
            assert_eq!(out, msg.as_bytes());
            assert_eq!(alice.sent(), i + 1);
            assert_eq!(bob.received(), i + 1);
        }
        // And the reverse direction has its own counter stream.
        let frame = bob.seal(b"reply").unwrap();
        assert_eq!(alice.open(&frame).unwrap(), b"reply");
    }

    #[test]
    fn every_tampered_byte_is_rejected() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let (mut alice, mut bob) = establish_pair(&params, 1, &sa, 2, &sb).unwrap();
        let frame = alice.seal(b"attack at dawn").unwrap();
        for i in 0..frame.len() {
            let mut corrupt = frame.clone();
            corrupt[i] ^= 0x01;
            let err = bob.open(&corrupt).unwrap_err();
            assert!(
                matches!(err, NetsimError::AuthFailure),
                "byte {i}: expected auth failure, got {err:?}"
            );
        }
        // The pristine frame still opens — rejection consumed no state.
        assert_eq!(bob.open(&frame).unwrap(), b"attack at dawn");
    }

    #[test]
    fn replayed_frame_is_detected() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let (mut alice, mut bob) = establish_pair(&params, 1, &sa, 2, &sb).unwrap();
        let first = alice.seal(b"one").unwrap();
        let second = alice.seal(b"two").unwrap();
        assert_eq!(bob.open(&first).unwrap(), b"one");
        assert_eq!(bob.open(&second).unwrap(), b"two");
        match bob.open(&first).unwrap_err() {
            NetsimError::ReplayDetected { got, expected } => {
                assert_eq!(got, 0);
                assert_eq!(expected, 2);
            }
            other => panic!("expected replay detection, got {other:?}"),
        }
    }

    #[test]
    fn misaddressed_frame_is_rejected() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let sc = params.sample_secret(&mut rng);
        let (mut alice, _bob) = establish_pair(&params, 1, &sa, 2, &sb).unwrap();
        let (_x, mut carol) = establish_pair(&params, 1, &sa, 3, &sc).unwrap();
        let frame = alice.seal(b"for bob only").unwrap();
        // Carol is not the addressee: header check fails before decryption.
        assert!(matches!(
            carol.open(&frame).unwrap_err(),
            NetsimError::AuthFailure
        ));
    }

    #[test]
    fn eavesdropper_with_public_values_cannot_decrypt() {
        let params = DhParams::builtin();
        let fp = params.field();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let (mut alice, _bob) = establish_pair(&params, 1, &sa, 2, &sb).unwrap();
        let frame = alice.seal(b"secret payload").unwrap();

        // The eavesdropper sees g^a, g^b, and the frame. Plausible wrong
        // guesses for the shared element: g^a · g^b = g^(a+b), g^a, g^b.
        let pub_a = params.public_value(&sa);
        let pub_b = params.public_value(&sb);
        for guess in [fp.mul(pub_a, pub_b), pub_a, pub_b] {
            let key = derive_key(fp, guess, 1, 2);
            let mut fake = ChannelEnd {
                local: 2,
                peer: 1,
                key,
                next_send: 0,
                next_recv: 0,
                destroyed: false,
            };
            assert!(matches!(
                fake.open(&frame).unwrap_err(),
                NetsimError::AuthFailure
            ));
        }
    }

    #[test]
    fn destroyed_endpoint_refuses_use() {
        let params = DhParams::builtin();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let sa = params.sample_secret(&mut rng);
        let sb = params.sample_secret(&mut rng);
        let (mut alice, mut bob) = establish_pair(&params, 1, &sa, 2, &sb).unwrap();
        let frame = alice.seal(b"last words").unwrap();
        bob.destroy();
        assert!(matches!(
            bob.open(&frame).unwrap_err(),
            NetsimError::ChannelDestroyed
        ));
        alice.destroy();
        assert!(matches!(
            alice.seal(b"x").unwrap_err(),
            NetsimError::ChannelDestroyed
        ));
        assert_eq!(alice.key, [0u8; 32], "key zeroized");
    }

    #[test]
    fn degenerate_peer_values_rejected() {
        let params = DhParams::builtin();
        let fp = params.field();
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let s = params.sample_secret(&mut rng);
        assert!(params.shared_secret(&s, fp.zero()).is_err());
        assert!(params.shared_secret(&s, fp.one()).is_err());
        // An element outside the order-q subgroup (a non-residue) fails the
        // subgroup check: -1 = p - 1 has order 2.
        let minus_one = fp.neg(fp.one());
        assert!(params.shared_secret(&s, minus_one).is_err());
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(DhParams::new(limbs::from_u64(23), 0, None).is_err());
        assert!(DhParams::new(limbs::from_u64(23), 1, None).is_err());
        assert!(DhParams::new(limbs::from_u64(24), 5, None).is_err());
        // Claimed order that the generator does not satisfy.
        assert!(DhParams::new(limbs::from_u64(23), 5, Some(limbs::from_u64(7))).is_err());
    }
}
