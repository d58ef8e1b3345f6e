//! Prime-field arithmetic over runtime moduli.
//!
//! A [`PrimeField`] context owns the modulus and the precomputed Montgomery
//! constants; [`FieldElement`]s are bare canonical residues (always `< p`)
//! and every operation goes through the context, e.g. `fp.mul(a, b)`.
//! Elements deliberately do not carry a context pointer — multilinear
//! tables hold millions of them and the containers that own those tables
//! (polynomials, commitments, profiles) carry the context instead.
//!
//! Internally multiplication is CIOS Montgomery reduction over the active
//! limbs only, so the tiny TEST field runs single-limb loops while MAIN
//! runs three. Hot callers (the curve group) keep values in Montgomery
//! form across long computations via the `mont_*` crate-private API;
//! public `mul`/`inv`/`pow` convert per call and stay canonical.

use super::limbs::{self, Limbs, LIMB_COUNT};
use super::AlgebraError;
use rand::RngCore;

/// An element of a prime field, stored as a canonical residue (`< p`).
///
/// Meaningful only relative to the [`PrimeField`] it was produced by;
/// mixing fields is a caller bug (debug builds assert canonicity).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement(pub(crate) Limbs);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement([0; LIMB_COUNT]);

    pub fn as_limbs(&self) -> &Limbs {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        limbs::is_zero(&self.0)
    }
}

impl core::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Fe({})", limbs::to_hex(&self.0))
    }
}

/// A prime field `F_p` with precomputed Montgomery constants.
#[derive(Clone)]
pub struct PrimeField {
    modulus: Limbs,
    n: usize,        // active limbs of the modulus
    bits: u32,       // bit length of the modulus
    byte_len: usize, // canonical encoding width
    n0inv: u64,      // -p^{-1} mod 2^64
    r1: Limbs,       // R mod p, R = 2^(64n)
    r2: Limbs,       // R^2 mod p
    half: Limbs,     // (p-1)/2
    exp_inv: Limbs,  // p-2, the Fermat inversion exponent
    shift64: FieldElement, // 2^64 mod p, for wide byte reduction
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}

impl core::fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "PrimeField({})", limbs::to_hex(&self.modulus))
    }
}

impl PrimeField {
    /// Build a field context for an odd modulus `p > 2`.
    ///
    /// Primality is *not* checked here — profile loading runs Miller–Rabin
    /// and rejects composites before a field ever reaches protocol code.
    pub fn new(modulus: Limbs) -> Result<PrimeField, AlgebraError> {
        if modulus[0] & 1 == 0 || limbs::cmp(&modulus, &limbs::from_u64(3)) == core::cmp::Ordering::Less {
            return Err(AlgebraError::BadModulus);
        }
        let n = limbs::active_limbs(&modulus);
        let bits = limbs::bit_len(&modulus);
        let byte_len = bits.div_ceil(8) as usize;

        // -p^{-1} mod 2^64 by Newton iteration on the odd low limb.
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus[0].wrapping_mul(inv)));
        }
        let n0inv = inv.wrapping_neg();

        // R mod p by doubling 1 for 64n bits, then R^2 by doubling 64n more.
        let double_mod = |a: &Limbs| -> Limbs {
            let (sum, carry) = limbs::add(a, a);
            let (red, borrow) = limbs::sub(&sum, &modulus);
            if carry || !borrow {
                red
            } else {
                sum
            }
        };
        let mut r1 = limbs::from_u64(1);
        for _ in 0..64 * n {
            r1 = double_mod(&r1);
        }
        let mut r2 = r1;
        for _ in 0..64 * n {
            r2 = double_mod(&r2);
        }

        let (half, _) = limbs::sub(&modulus, &limbs::from_u64(1));
        let half = limbs::shr1(&half);
        let (exp_inv, _) = limbs::sub(&modulus, &limbs::from_u64(2));

        let mut shift64 = limbs::from_u64(1);
        for _ in 0..64 {
            shift64 = double_mod(&shift64);
        }

        Ok(PrimeField {
            modulus,
            n,
            bits,
            byte_len,
            n0inv,
            r1,
            r2,
            half,
            exp_inv,
            shift64: FieldElement(shift64),
        })
    }

    pub fn modulus(&self) -> &Limbs {
        &self.modulus
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Width of the canonical fixed-length big-endian encoding.
    pub fn byte_len(&self) -> usize {
        self.byte_len
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(limbs::from_u64(1))
    }

    fn reduce_once(&self, a: Limbs) -> Limbs {
        let (red, borrow) = limbs::sub(&a, &self.modulus);
        if borrow {
            a
        } else {
            red
        }
    }

    #[inline]
    fn debug_check(&self, a: &FieldElement) {
        debug_assert!(
            limbs::cmp(&a.0, &self.modulus) == core::cmp::Ordering::Less,
            "non-canonical element for this field"
        );
    }

    pub fn from_u64(&self, v: u64) -> FieldElement {
        if self.n == 1 {
            FieldElement(limbs::from_u64(v % self.modulus[0]))
        } else {
            // p occupies ≥ 2 limbs, so p > 2^64 > v.
            FieldElement(limbs::from_u64(v))
        }
    }

    /// Centered lift: maps `v ∈ [-(p-1)/2, (p-1)/2]` with negatives as `p - |v|`.
    pub fn from_i64(&self, v: i64) -> Result<FieldElement, AlgebraError> {
        let mag = limbs::from_u64(v.unsigned_abs());
        if limbs::cmp(&mag, &self.half) == core::cmp::Ordering::Greater {
            return Err(AlgebraError::CenteredOverflow);
        }
        if v < 0 {
            let (neg, _) = limbs::sub(&self.modulus, &mag);
            Ok(FieldElement(neg))
        } else {
            Ok(FieldElement(mag))
        }
    }

    /// Inverse of the centered lift. `None` if the centered value needs
    /// more than 63 bits of magnitude.
    pub fn to_centered_i64(&self, a: FieldElement) -> Option<i64> {
        self.debug_check(&a);
        let (mag, negative) = if limbs::cmp(&a.0, &self.half) == core::cmp::Ordering::Greater {
            let (m, _) = limbs::sub(&self.modulus, &a.0);
            (m, true)
        } else {
            (a.0, false)
        };
        if limbs::active_limbs(&mag) > 1 || mag[0] > i64::MAX as u64 {
            return None;
        }
        let v = mag[0] as i64;
        Some(if negative { -v } else { v })
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.debug_check(&a);
        self.debug_check(&b);
        let (sum, carry) = limbs::add(&a.0, &b.0);
        if carry {
            // Only possible for 4-limb moduli; sum = 2^256 + low.
            let (red, _) = limbs::sub(&sum, &self.modulus);
            FieldElement(red)
        } else {
            FieldElement(self.reduce_once(sum))
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.debug_check(&a);
        self.debug_check(&b);
        let (diff, borrow) = limbs::sub(&a.0, &b.0);
        if borrow {
            let (wrapped, _) = limbs::add(&diff, &self.modulus);
            FieldElement(wrapped)
        } else {
            FieldElement(diff)
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.is_zero() {
            a
        } else {
            let (n, _) = limbs::sub(&self.modulus, &a.0);
            FieldElement(n)
        }
    }

    pub fn double(&self, a: FieldElement) -> FieldElement {
        self.add(a, a)
    }

    /// CIOS Montgomery multiplication over the active limbs:
    /// returns `a·b·R^{-1} mod p`.
    pub(crate) fn mont_mul(&self, a: &Limbs, b: &Limbs) -> Limbs {
        let n = self.n;
        let p = &self.modulus;
        let mut t = [0u64; LIMB_COUNT + 2];
        for i in 0..n {
            let ai = a[i] as u128;
            let mut carry = 0u128;
            for j in 0..n {
                let v = t[j] as u128 + ai * b[j] as u128 + carry;
                t[j] = v as u64;
                carry = v >> 64;
            }
            let v = t[n] as u128 + carry;
            t[n] = v as u64;
            t[n + 1] = (v >> 64) as u64;

            let m = (t[0].wrapping_mul(self.n0inv)) as u128;
            let v = t[0] as u128 + m * p[0] as u128;
            let mut carry = v >> 64;
            for j in 1..n {
                let v = t[j] as u128 + m * p[j] as u128 + carry;
                t[j - 1] = v as u64;
                carry = v >> 64;
            }
            let v = t[n] as u128 + carry;
            t[n - 1] = v as u64;
            t[n] = t[n + 1] + (v >> 64) as u64;
            t[n + 1] = 0;
        }
        let mut out = [0u64; LIMB_COUNT];
        out[..n].copy_from_slice(&t[..n]);
        // t < 2p (p < R), so at most one subtraction. The subtraction must
        // run over the n active limbs only: when the carry bit t[n] is set,
        // the borrow out of limb n-1 cancels against it and is discarded.
        if t[n] != 0 || limbs::cmp(&out, p) != core::cmp::Ordering::Less {
            let mut borrow = 0u64;
            for j in 0..n {
                let (d1, b1) = out[j].overflowing_sub(p[j]);
                let (d2, b2) = d1.overflowing_sub(borrow);
                out[j] = d2;
                borrow = u64::from(b1 || b2);
            }
        }
        out
    }

    pub(crate) fn to_mont(&self, a: FieldElement) -> Limbs {
        self.mont_mul(&a.0, &self.r2)
    }

    pub(crate) fn from_mont(&self, a: &Limbs) -> FieldElement {
        FieldElement(self.mont_mul(a, &limbs::from_u64(1)))
    }

    pub(crate) fn mont_one(&self) -> Limbs {
        self.r1
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.debug_check(&a);
        self.debug_check(&b);
        FieldElement(self.mont_mul(&self.mont_mul(&a.0, &b.0), &self.r2))
    }

    pub fn sqr(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// `base^exp` by square-and-multiply over the exponent's bits.
    pub fn pow(&self, base: FieldElement, exp: &Limbs) -> FieldElement {
        self.debug_check(&base);
        let mut acc = self.mont_one();
        let b = self.to_mont(base);
        let nbits = limbs::bit_len(exp);
        for i in (0..nbits).rev() {
            acc = self.mont_mul(&acc, &acc);
            if limbs::bit(exp, i) {
                acc = self.mont_mul(&acc, &b);
            }
        }
        self.from_mont(&acc)
    }

    pub fn pow_u64(&self, base: FieldElement, exp: u64) -> FieldElement {
        self.pow(base, &limbs::from_u64(exp))
    }

    /// Multiplicative inverse by Fermat (`a^{p-2}`); errors on zero.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, AlgebraError> {
        if a.is_zero() {
            return Err(AlgebraError::InverseOfZero);
        }
        let exp = self.exp_inv;
        Ok(self.pow(a, &exp))
    }

    /// Uniform random element by rejection sampling on the modulus width.
    pub fn random(&self, rng: &mut impl RngCore) -> FieldElement {
        let top_mask = if self.bits % 64 == 0 {
            u64::MAX
        } else {
            (1u64 << (self.bits % 64)) - 1
        };
        loop {
            let mut cand = [0u64; LIMB_COUNT];
            for limb in cand.iter_mut().take(self.n) {
                *limb = rng.next_u64();
            }
            cand[self.n - 1] &= top_mask;
            if limbs::cmp(&cand, &self.modulus) == core::cmp::Ordering::Less {
                return FieldElement(cand);
            }
        }
    }

    /// Canonical fixed-width big-endian encoding.
    pub fn to_bytes(&self, a: FieldElement) -> Vec<u8> {
        self.debug_check(&a);
        limbs::to_be_bytes(&a.0, self.byte_len)
    }

    /// Strict decode: exactly `byte_len` bytes, value `< p`.
    pub fn from_bytes(&self, bytes: &[u8]) -> Result<FieldElement, AlgebraError> {
        if bytes.len() != self.byte_len {
            return Err(AlgebraError::BadEncoding(format!(
                "field element must be {} bytes, got {}",
                self.byte_len,
                bytes.len()
            )));
        }
        let v = limbs::from_be_bytes(bytes).ok_or(AlgebraError::NonCanonical)?;
        if limbs::cmp(&v, &self.modulus) != core::cmp::Ordering::Less {
            return Err(AlgebraError::NonCanonical);
        }
        Ok(FieldElement(v))
    }

    /// Reduce an arbitrary-length big-endian byte string mod `p` (Horner
    /// over 64-bit chunks). Callers feeding hash output must supply at
    /// least twice the modulus width for negligible bias.
    pub fn from_bytes_wide(&self, bytes: &[u8]) -> FieldElement {
        let mut padded = Vec::with_capacity(bytes.len().div_ceil(8) * 8);
        padded.resize(bytes.len().div_ceil(8) * 8 - bytes.len(), 0);
        padded.extend_from_slice(bytes);
        let mut acc = self.zero();
        for chunk in padded.chunks_exact(8) {
            let v = u64::from_be_bytes(chunk.try_into().unwrap());
            acc = self.add(self.mul(acc, self.shift64), self.from_u64(v));
        }
        acc
    }

    /// Square root by Tonelli–Shanks; `None` for non-residues.
    pub fn sqrt(&self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return Some(a);
        }
        let half = self.half;
        if self.pow(a, &half) != self.one() {
            return None;
        }
        // p - 1 = odd_q * 2^s
        let (mut odd_q, _) = limbs::sub(&self.modulus, &limbs::from_u64(1));
        let mut s = 0u32;
        while odd_q[0] & 1 == 0 {
            odd_q = limbs::shr1(&odd_q);
            s += 1;
        }
        // Find a non-residue z.
        let mut z = self.from_u64(2);
        while self.pow(z, &self.half.clone()) == self.one() {
            z = self.add(z, self.one());
        }
        let mut m = s;
        let mut c = self.pow(z, &odd_q);
        let mut t = self.pow(a, &odd_q);
        let q_plus: Limbs = {
            let (v, _) = limbs::add(&odd_q, &limbs::from_u64(1));
            limbs::shr1(&v)
        };
        let mut r = self.pow(a, &q_plus);
        while t != self.one() {
            // Least i with t^(2^i) = 1.
            let mut i = 0u32;
            let mut probe = t;
            while probe != self.one() {
                probe = self.sqr(probe);
                i += 1;
            }
            let mut b = c;
            for _ in 0..m - i - 1 {
                b = self.sqr(b);
            }
            m = i;
            c = self.sqr(b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        debug_assert_eq!(self.sqr(r), a);
        Some(r)
    }

    /// Miller–Rabin probable-prime test (fixed small bases plus random
    /// rounds from `rng`). Used by profile validation.
    pub fn is_probable_prime(candidate: &Limbs, rng: &mut impl RngCore) -> bool {
        const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        for &sp in &SMALL {
            let spl = limbs::from_u64(sp);
            match limbs::cmp(candidate, &spl) {
                core::cmp::Ordering::Equal => return true,
                core::cmp::Ordering::Less => return false,
                core::cmp::Ordering::Greater => {}
            }
        }
        if candidate[0] & 1 == 0 {
            return false;
        }
        let fp = match PrimeField::new(*candidate) {
            Ok(f) => f,
            Err(_) => return false,
        };
        // n - 1 = d * 2^s
        let (mut d, _) = limbs::sub(candidate, &limbs::from_u64(1));
        let n_minus_1 = FieldElement(d);
        let mut s = 0u32;
        while d[0] & 1 == 0 {
            d = limbs::shr1(&d);
            s += 1;
        }
        let witness = |a: FieldElement| -> bool {
            // true = composite witnessed
            if a.is_zero() {
                return false;
            }
            let mut x = fp.pow(a, &d);
            if x == fp.one() || x == n_minus_1 {
                return false;
            }
            for _ in 0..s - 1 {
                x = fp.sqr(x);
                if x == n_minus_1 {
                    return false;
                }
            }
            true
        };
        for &sp in &SMALL {
            if witness(fp.from_u64(sp)) {
                return false;
            }
        }
        for _ in 0..16 {
            if witness(fp.random(rng)) {
                return false;
            }
        }
        true
    }
}
