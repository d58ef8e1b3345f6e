//! Challenge generation for the interactive protocols and their
//! Fiat–Shamir compilations.
//!
//! A [`Transcript`] maintains a 32-byte running state, chained through
//! SHA-256: every absorbed message and every issued challenge folds into
//! the state, so each challenge binds all prior traffic. Labels give
//! domain separation; they are length-framed, so distinct label/data
//! splits can never collide. The convention used throughout the crate is
//! `zkdps/v1/<area>/...`, e.g. `zkdps/v1/layer/3/matmul`.
//!
//! Two modes share the same absorb discipline:
//!
//! * **Fiat–Shamir** — challenges are derived from the state itself, so a
//!   verifier replaying the same absorbs recomputes the same challenges.
//! * **Interactive** — challenges are drawn from a caller-supplied RNG
//!   (the "live verifier"); they are still folded into the state so both
//!   parties keep a consistent view.
//!
//! Field challenges hash to 64 bytes (at least twice the width of any
//! supported modulus) and reduce, keeping the sampling bias below 2^-128.

use crate::algebra::{FieldElement, PrimeField};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

enum Mode {
    FiatShamir,
    Interactive(Box<ChaCha20Rng>),
}

pub struct Transcript {
    state: [u8; 32],
    mode: Mode,
}

impl Transcript {
    /// Deterministic transcript: challenges are functions of the absorbs.
    pub fn fiat_shamir(domain: &str) -> Self {
        Self::with_mode(domain, Mode::FiatShamir)
    }

    /// Live-verifier transcript: challenges come from `rng`.
    pub fn interactive(domain: &str, rng: ChaCha20Rng) -> Self {
        Self::with_mode(domain, Mode::Interactive(Box::new(rng)))
    }

    fn with_mode(domain: &str, mode: Mode) -> Self {
        let mut h = Sha256::new();
        h.update(b"zkdps/v1/transcript");
        h.update((domain.len() as u64).to_be_bytes());
        h.update(domain.as_bytes());
        Self {
            state: h.finalize().into(),
            mode,
        }
    }

    /// Folds a labelled message into the state.
    pub fn absorb(&mut self, label: &str, data: &[u8]) {
        let mut h = Sha256::new();
        h.update(self.state);
        h.update(b"absorb");
        h.update((label.len() as u64).to_be_bytes());
        h.update(label.as_bytes());
        h.update((data.len() as u64).to_be_bytes());
        h.update(data);
        self.state = h.finalize().into();
    }

    /// Draws a uniform field element. In Fiat–Shamir mode this expands the
    /// state to 64 bytes and reduces; in interactive mode it samples from
    /// the verifier RNG. Either way the result is folded back into the
    /// state, binding later challenges to it.
    pub fn challenge_field(&mut self, label: &str, fp: &PrimeField) -> FieldElement {
        let mut h = Sha256::new();
        h.update(self.state);
        h.update(b"challenge");
        h.update((label.len() as u64).to_be_bytes());
        h.update(label.as_bytes());
        let seed: [u8; 32] = h.finalize().into();

        let e = match &mut self.mode {
            Mode::FiatShamir => {
                let mut wide = [0u8; 64];
                for (i, chunk) in wide.chunks_mut(32).enumerate() {
                    let mut h = Sha256::new();
                    h.update(seed);
                    h.update((i as u32).to_be_bytes());
                    chunk.copy_from_slice(&h.finalize());
                }
                fp.from_bytes_wide(&wide)
            }
            Mode::Interactive(rng) => fp.random(rng.as_mut()),
        };

        let mut h = Sha256::new();
        h.update(seed);
        h.update(fp.to_bytes(e));
        self.state = h.finalize().into();
        e
    }
}
