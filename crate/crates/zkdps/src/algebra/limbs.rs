//! Fixed-capacity little-endian limb arithmetic.
//!
//! All field and group math runs on `[u64; 4]` (256-bit capacity), looping
//! only over the limbs a given modulus actually occupies. Helpers here are
//! plain integer arithmetic; modular reduction lives in `field`.

/// Little-endian limb array; limb 0 is least significant.
pub type Limbs = [u64; 4];

pub const LIMB_COUNT: usize = 4;

pub const ZERO: Limbs = [0; 4];

pub fn from_u64(v: u64) -> Limbs {
    [v, 0, 0, 0]
}

pub fn is_zero(a: &Limbs) -> bool {
    a.iter().all(|&l| l == 0)
}

/// Number of 64-bit limbs needed to hold `a` (at least 1).
pub fn active_limbs(a: &Limbs) -> usize {
    for i in (0..LIMB_COUNT).rev() {
        if a[i] != 0 {
            return i + 1;
        }
    }
    1
}

pub fn bit_len(a: &Limbs) -> u32 {
    for i in (0..LIMB_COUNT).rev() {
        if a[i] != 0 {
            return (i as u32) * 64 + (64 - a[i].leading_zeros());
        }
    }
    0
}

pub fn bit(a: &Limbs, i: u32) -> bool {
    let limb = (i / 64) as usize;
    limb < LIMB_COUNT && (a[limb] >> (i % 64)) & 1 == 1
}

pub fn cmp(a: &Limbs, b: &Limbs) -> core::cmp::Ordering {
    for i in (0..LIMB_COUNT).rev() {
        match a[i].cmp(&b[i]) {
            core::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    core::cmp::Ordering::Equal
}

/// `a + b`, returning the sum and the carry-out.
pub fn add(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut carry = 0u64;
    for i in 0..LIMB_COUNT {
        let s = a[i] as u128 + b[i] as u128 + carry as u128;
        out[i] = s as u64;
        carry = (s >> 64) as u64;
    }
    (out, carry != 0)
}

/// `a - b`, returning the difference and whether it borrowed (a < b).
pub fn sub(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut borrow = 0u64;
    for i in 0..LIMB_COUNT {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow);
        out[i] = d;
        borrow = (b1 || b2) as u64;
    }
    (out, borrow != 0)
}

/// Halve (logical shift right by one bit).
pub fn shr1(a: &Limbs) -> Limbs {
    let mut out = ZERO;
    for i in 0..LIMB_COUNT {
        out[i] = a[i] >> 1;
        if i + 1 < LIMB_COUNT {
            out[i] |= a[i + 1] << 63;
        }
    }
    out
}

/// Big-endian byte encoding, exactly `len` bytes. Panics if `a` needs more.
pub fn to_be_bytes(a: &Limbs, len: usize) -> Vec<u8> {
    let mut full = [0u8; 32];
    for i in 0..LIMB_COUNT {
        full[32 - 8 * (i + 1)..32 - 8 * i].copy_from_slice(&a[i].to_be_bytes());
    }
    assert!(
        full[..32 - len].iter().all(|&b| b == 0),
        "value does not fit in {len} bytes"
    );
    full[32 - len..].to_vec()
}

/// Big-endian bytes to limbs; errors (returns None) if longer than 32 bytes
/// with nonzero overflow.
pub fn from_be_bytes(bytes: &[u8]) -> Option<Limbs> {
    let bytes = if bytes.len() > 32 {
        let (head, tail) = bytes.split_at(bytes.len() - 32);
        if head.iter().any(|&b| b != 0) {
            return None;
        }
        tail
    } else {
        bytes
    };
    let mut full = [0u8; 32];
    full[32 - bytes.len()..].copy_from_slice(bytes);
    let mut out = ZERO;
    for i in 0..LIMB_COUNT {
        let mut limb = [0u8; 8];
        limb.copy_from_slice(&full[32 - 8 * (i + 1)..32 - 8 * i]);
        out[i] = u64::from_be_bytes(limb);
    }
    Some(out)
}

/// Parse a decimal or 0x-prefixed hex integer into limbs.
pub fn from_str(s: &str) -> Option<Limbs> {
    let s = s.trim();
    let (digits, radix) = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(rest) => (rest, 16u64),
        None => (s, 10u64),
    };
    if digits.is_empty() {
        return None;
    }
    let mut acc = ZERO;
    for ch in digits.chars() {
        if ch == '_' {
            continue;
        }
        let d = ch.to_digit(radix as u32)? as u64;
        // acc = acc * radix + d
        let mut carry = d as u128;
        for limb in acc.iter_mut() {
            let v = *limb as u128 * radix as u128 + carry;
            *limb = v as u64;
            carry = v >> 64;
        }
        if carry != 0 {
            return None;
        }
    }
    Some(acc)
}

pub fn to_hex(a: &Limbs) -> String {
    let full = hex::encode(to_be_bytes(a, 32));
    let digits = full.trim_start_matches('0');
    if digits.is_empty() {
        "0x0".to_string()
    } else {
        format!("0x{digits}")
    }
}
