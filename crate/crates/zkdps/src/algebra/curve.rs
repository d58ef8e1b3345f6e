//! Short-Weierstrass curve groups `y² = x³ + ax + b` over a base prime field.
//!
//! The public representation is affine (plus an infinity flag); internally
//! everything runs in Jacobian coordinates with Montgomery-form limbs so a
//! scalar multiplication never touches the slow canonical `mul` path.
//! Generators with unknown discrete logs come from hash-to-point
//! (try-and-increment over hashed x candidates).

use super::field::{FieldElement, PrimeField};
use super::limbs::{self, Limbs};
use super::AlgebraError;
use sha2::{Digest, Sha256};
use std::collections::HashSet;

/// Affine curve point over the base field, with an explicit infinity flag.
/// The identity is canonically `(0, 0, infinity = true)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GroupPoint {
    pub x: FieldElement,
    pub y: FieldElement,
    pub infinity: bool,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint {
        x: FieldElement::ZERO,
        y: FieldElement::ZERO,
        infinity: true,
    };
}

/// Operational context for one curve: base/scalar fields, coefficients,
/// and the identity of the profile it came from (name, container id byte,
/// generator seed).
///
/// The scalar field's modulus is the group order, so scalars are
/// `FieldElement`s of `scalar_field` and points live over `base_field`.
#[derive(Clone, Debug)]
pub struct CurveGroup {
    base: PrimeField,
    scalar: PrimeField,
    a: FieldElement,
    b: FieldElement,
    // Montgomery-form copy of `a` for the hot path.
    a_mont: Limbs,
    order: Limbs,
    name: String,
    id: u8,
    generator_seed: String,
}

/// Jacobian point in Montgomery form; `z = 0` encodes infinity.
#[derive(Clone, Copy)]
struct Jac {
    x: Limbs,
    y: Limbs,
    z: Limbs,
}

const JAC_INF: Jac = Jac {
    x: [0; 4],
    y: [0; 4],
    z: [0; 4],
};

impl CurveGroup {
    pub fn new(
        base: PrimeField,
        scalar: PrimeField,
        a: FieldElement,
        b: FieldElement,
        name: &str,
        id: u8,
        generator_seed: &str,
    ) -> Result<CurveGroup, AlgebraError> {
        // Non-singular: 4a³ + 27b² ≠ 0.
        let disc = base.add(
            base.mul(base.from_u64(4), base.mul(a, base.sqr(a))),
            base.mul(base.from_u64(27), base.sqr(b)),
        );
        if disc.is_zero() {
            return Err(AlgebraError::BadProfile("singular curve (4a³+27b²=0)".into()));
        }
        let a_mont = base.to_mont(a);
        let order = *scalar.modulus();
        Ok(CurveGroup {
            base,
            scalar,
            a,
            b,
            a_mont,
            order,
            name: name.to_string(),
            id,
            generator_seed: generator_seed.to_string(),
        })
    }

    pub fn base_field(&self) -> &PrimeField {
        &self.base
    }

    pub fn scalar_field(&self) -> &PrimeField {
        &self.scalar
    }

    pub fn a(&self) -> FieldElement {
        self.a
    }

    pub fn b(&self) -> FieldElement {
        self.b
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Profile id byte, embedded in every serialized artifact.
    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::IDENTITY
    }

    pub fn is_on_curve(&self, p: &GroupPoint) -> bool {
        if p.infinity {
            return p.x.is_zero() && p.y.is_zero();
        }
        let f = &self.base;
        let rhs = f.add(f.add(f.mul(p.x, f.sqr(p.x)), f.mul(self.a, p.x)), self.b);
        f.sqr(p.y) == rhs
    }

    /// Construct a checked affine point.
    pub fn point(&self, x: FieldElement, y: FieldElement) -> Result<GroupPoint, AlgebraError> {
        let p = GroupPoint {
            x,
            y,
            infinity: false,
        };
        if self.is_on_curve(&p) {
            Ok(p)
        } else {
            Err(AlgebraError::PointNotOnCurve)
        }
    }

    pub fn neg(&self, p: &GroupPoint) -> GroupPoint {
        if p.infinity {
            *p
        } else {
            GroupPoint {
                x: p.x,
                y: self.base.neg(p.y),
                infinity: false,
            }
        }
    }

    // ---- Jacobian/Montgomery internals ----

    fn to_jac(&self, p: &GroupPoint) -> Jac {
        if p.infinity {
            return JAC_INF;
        }
        Jac {
            x: self.base.to_mont(p.x),
            y: self.base.to_mont(p.y),
            z: self.base.mont_one(),
        }
    }

    fn from_jac(&self, p: &Jac) -> GroupPoint {
        if limbs::is_zero(&p.z) {
            return GroupPoint::IDENTITY;
        }
        let f = &self.base;
        let zi = self.mont_inv(&p.z);
        let zi2 = f.mont_mul(&zi, &zi);
        let zi3 = f.mont_mul(&zi2, &zi);
        GroupPoint {
            x: f.from_mont(&f.mont_mul(&p.x, &zi2)),
            y: f.from_mont(&f.mont_mul(&p.y, &zi3)),
            infinity: false,
        }
    }

    /// Fermat inversion staying in the Montgomery domain.
    fn mont_inv(&self, a: &Limbs) -> Limbs {
        let f = &self.base;
        let (exp, _) = limbs::sub(f.modulus(), &limbs::from_u64(2));
        let mut acc = f.mont_one();
        for i in (0..limbs::bit_len(&exp)).rev() {
            acc = f.mont_mul(&acc, &acc);
            if limbs::bit(&exp, i) {
                acc = f.mont_mul(&acc, a);
            }
        }
        acc
    }

    fn mont_add(&self, a: &Limbs, b: &Limbs) -> Limbs {
        // Montgomery form is still a residue < p; plain modular add works.
        self.base.add(FieldElement(*a), FieldElement(*b)).0
    }

    fn mont_sub(&self, a: &Limbs, b: &Limbs) -> Limbs {
        self.base.sub(FieldElement(*a), FieldElement(*b)).0
    }

    fn mont_dbl_el(&self, a: &Limbs) -> Limbs {
        self.mont_add(a, a)
    }

    fn jac_double(&self, p: &Jac) -> Jac {
        if limbs::is_zero(&p.z) {
            return *p;
        }
        let f = &self.base;
        let xx = f.mont_mul(&p.x, &p.x);
        let yy = f.mont_mul(&p.y, &p.y);
        let yyyy = f.mont_mul(&yy, &yy);
        let zz = f.mont_mul(&p.z, &p.z);
        // S = 2((X+YY)² − XX − YYYY)
        let xyy = self.mont_add(&p.x, &yy);
        let s = f.mont_mul(&xyy, &xyy);
        let s = self.mont_sub(&self.mont_sub(&s, &xx), &yyyy);
        let s = self.mont_dbl_el(&s);
        // M = 3XX + a·ZZ²
        let zz2 = f.mont_mul(&zz, &zz);
        let m = self.mont_add(&self.mont_add(&xx, &xx), &xx);
        let m = self.mont_add(&m, &f.mont_mul(&self.a_mont, &zz2));
        // X3 = M² − 2S
        let x3 = self.mont_sub(&f.mont_mul(&m, &m), &self.mont_dbl_el(&s));
        // Y3 = M(S − X3) − 8·YYYY
        let y3 = f.mont_mul(&m, &self.mont_sub(&s, &x3));
        let y8 = self.mont_dbl_el(&self.mont_dbl_el(&self.mont_dbl_el(&yyyy)));
        let y3 = self.mont_sub(&y3, &y8);
        // Z3 = (Y+Z)² − YY − ZZ = 2YZ
        let yz = self.mont_add(&p.y, &p.z);
        let z3 = self.mont_sub(&self.mont_sub(&f.mont_mul(&yz, &yz), &yy), &zz);
        Jac { x: x3, y: y3, z: z3 }
    }

    fn jac_add(&self, p: &Jac, q: &Jac) -> Jac {
        if limbs::is_zero(&p.z) {
            return *q;
        }
        if limbs::is_zero(&q.z) {
            return *p;
        }
        let f = &self.base;
        let z1z1 = f.mont_mul(&p.z, &p.z);
        let z2z2 = f.mont_mul(&q.z, &q.z);
        let u1 = f.mont_mul(&p.x, &z2z2);
        let u2 = f.mont_mul(&q.x, &z1z1);
        let s1 = f.mont_mul(&f.mont_mul(&p.y, &q.z), &z2z2);
        let s2 = f.mont_mul(&f.mont_mul(&q.y, &p.z), &z1z1);
        if u1 == u2 {
            return if s1 == s2 {
                self.jac_double(p)
            } else {
                JAC_INF
            };
        }
        let h = self.mont_sub(&u2, &u1);
        let hh = self.mont_dbl_el(&h);
        let i = f.mont_mul(&hh, &hh);
        let j = f.mont_mul(&h, &i);
        let r = self.mont_dbl_el(&self.mont_sub(&s2, &s1));
        let v = f.mont_mul(&u1, &i);
        let x3 = self.mont_sub(
            &self.mont_sub(&f.mont_mul(&r, &r), &j),
            &self.mont_dbl_el(&v),
        );
        let y3 = self.mont_sub(
            &f.mont_mul(&r, &self.mont_sub(&v, &x3)),
            &self.mont_dbl_el(&f.mont_mul(&s1, &j)),
        );
        let z1z2 = self.mont_add(&p.z, &q.z);
        let z3 = f.mont_mul(
            &self.mont_sub(&self.mont_sub(&f.mont_mul(&z1z2, &z1z2), &z1z1), &z2z2),
            &h,
        );
        Jac { x: x3, y: y3, z: z3 }
    }

    /// Mixed addition with an affine (Montgomery-form) second operand.
    fn jac_madd(&self, p: &Jac, qx: &Limbs, qy: &Limbs) -> Jac {
        if limbs::is_zero(&p.z) {
            return Jac {
                x: *qx,
                y: *qy,
                z: self.base.mont_one(),
            };
        }
        let f = &self.base;
        let z1z1 = f.mont_mul(&p.z, &p.z);
        let u2 = f.mont_mul(qx, &z1z1);
        let s2 = f.mont_mul(&f.mont_mul(qy, &p.z), &z1z1);
        if p.x == u2 {
            return if p.y == s2 {
                self.jac_double(p)
            } else {
                JAC_INF
            };
        }
        let h = self.mont_sub(&u2, &p.x);
        let hh = self.mont_dbl_el(&h);
        let i = f.mont_mul(&hh, &hh);
        let j = f.mont_mul(&h, &i);
        let r = self.mont_dbl_el(&self.mont_sub(&s2, &p.y));
        let v = f.mont_mul(&p.x, &i);
        let x3 = self.mont_sub(
            &self.mont_sub(&f.mont_mul(&r, &r), &j),
            &self.mont_dbl_el(&v),
        );
        let y3 = self.mont_sub(
            &f.mont_mul(&r, &self.mont_sub(&v, &x3)),
            &self.mont_dbl_el(&f.mont_mul(&p.y, &j)),
        );
        // Z3 = 2·Z1·H
        let z3 = f.mont_mul(&self.mont_dbl_el(&p.z), &h);
        Jac { x: x3, y: y3, z: z3 }
    }

    // ---- public group operations ----

    pub fn add(&self, p: &GroupPoint, q: &GroupPoint) -> GroupPoint {
        self.from_jac(&self.jac_add(&self.to_jac(p), &self.to_jac(q)))
    }

    pub fn double(&self, p: &GroupPoint) -> GroupPoint {
        self.from_jac(&self.jac_double(&self.to_jac(p)))
    }

    /// `k·P` with `k` a scalar-field element (4-bit fixed window).
    pub fn scalar_mul(&self, p: &GroupPoint, k: FieldElement) -> GroupPoint {
        self.from_jac(&self.jac_scalar_mul(&self.to_jac(p), k.as_limbs()))
    }

    fn jac_scalar_mul(&self, p: &Jac, k: &Limbs) -> Jac {
        if limbs::is_zero(k) || limbs::is_zero(&p.z) {
            return JAC_INF;
        }
        // table[i] = i·P for i in 1..16
        let mut table = [JAC_INF; 16];
        table[1] = *p;
        for i in 2..16 {
            table[i] = if i % 2 == 0 {
                self.jac_double(&table[i / 2])
            } else {
                self.jac_add(&table[i - 1], p)
            };
        }
        let nbits = limbs::bit_len(k);
        let top_nibble = nbits.div_ceil(4);
        let mut acc = JAC_INF;
        for w in (0..top_nibble).rev() {
            for _ in 0..4 {
                acc = self.jac_double(&acc);
            }
            let shift = w * 4;
            let limb = (shift / 64) as usize;
            let nib = ((k[limb] >> (shift % 64)) & 0xf) as usize;
            if nib != 0 {
                acc = self.jac_add(&acc, &table[nib]);
            }
        }
        acc
    }

    /// Multi-scalar multiplication `Σ kᵢ·Pᵢ` (bucketed windows).
    pub fn msm(&self, points: &[GroupPoint], scalars: &[FieldElement]) -> GroupPoint {
        assert_eq!(points.len(), scalars.len(), "msm length mismatch");
        if points.is_empty() {
            return GroupPoint::IDENTITY;
        }
        if points.len() < 8 {
            let mut acc = JAC_INF;
            for (p, k) in points.iter().zip(scalars) {
                acc = self.jac_add(&acc, &self.jac_scalar_mul(&self.to_jac(p), k.as_limbs()));
            }
            return self.from_jac(&acc);
        }
        let f = &self.base;
        let mont: Vec<Option<(Limbs, Limbs)>> = points
            .iter()
            .map(|p| {
                if p.infinity {
                    None
                } else {
                    Some((f.to_mont(p.x), f.to_mont(p.y)))
                }
            })
            .collect();
        let c: u32 = match points.len() {
            0..=31 => 4,
            32..=255 => 6,
            _ => 8,
        };
        let nbits = limbs::bit_len(self.scalar.modulus());
        let windows = nbits.div_ceil(c);
        let mut acc = JAC_INF;
        let mut buckets = vec![JAC_INF; (1 << c) - 1];
        for w in (0..windows).rev() {
            for _ in 0..c {
                acc = self.jac_double(&acc);
            }
            for b in buckets.iter_mut() {
                *b = JAC_INF;
            }
            for (i, k) in scalars.iter().enumerate() {
                let Some((qx, qy)) = &mont[i] else { continue };
                let shift = w * c;
                let limb = (shift / 64) as usize;
                if limb >= 4 {
                    continue;
                }
                let mut frag = k.as_limbs()[limb] >> (shift % 64);
                if shift % 64 + c > 64 && limb + 1 < 4 {
                    frag |= k.as_limbs()[limb + 1] << (64 - shift % 64);
                }
                let idx = (frag & ((1u64 << c) - 1)) as usize;
                if idx != 0 {
                    buckets[idx - 1] = self.jac_madd(&buckets[idx - 1], qx, qy);
                }
            }
            // Suffix sums: Σ i·bucket[i] via running + cumulative adds.
            let mut running = JAC_INF;
            let mut sum = JAC_INF;
            for b in buckets.iter().rev() {
                running = self.jac_add(&running, b);
                sum = self.jac_add(&sum, &running);
            }
            acc = self.jac_add(&acc, &sum);
        }
        self.from_jac(&acc)
    }

    // ---- encodings ----

    /// Compressed encoding: 1 tag byte (`0x00` infinity, `0x02`/`0x03` by y
    /// parity) followed by the fixed-width big-endian x coordinate.
    pub fn compress(&self, p: &GroupPoint) -> Vec<u8> {
        let len = self.base.byte_len();
        let mut out = Vec::with_capacity(1 + len);
        if p.infinity {
            out.push(0);
            out.extend(std::iter::repeat_n(0u8, len));
        } else {
            out.push(2 | (p.y.as_limbs()[0] & 1) as u8);
            out.extend(self.base.to_bytes(p.x));
        }
        out
    }

    pub fn compressed_len(&self) -> usize {
        1 + self.base.byte_len()
    }

    pub fn decompress(&self, bytes: &[u8]) -> Result<GroupPoint, AlgebraError> {
        if bytes.len() != self.compressed_len() {
            return Err(AlgebraError::BadEncoding(format!(
                "compressed point must be {} bytes, got {}",
                self.compressed_len(),
                bytes.len()
            )));
        }
        let (tag, xb) = (bytes[0], &bytes[1..]);
        match tag {
            0 => {
                if xb.iter().any(|&b| b != 0) {
                    return Err(AlgebraError::BadEncoding(
                        "identity must have zero coordinates".into(),
                    ));
                }
                Ok(GroupPoint::IDENTITY)
            }
            2 | 3 => {
                let f = &self.base;
                let x = f.from_bytes(xb)?;
                let rhs = f.add(f.add(f.mul(x, f.sqr(x)), f.mul(self.a, x)), self.b);
                let y0 = f.sqrt(rhs).ok_or(AlgebraError::PointNotOnCurve)?;
                let want_odd = tag == 3;
                let y0_odd = y0.as_limbs()[0] & 1 == 1;
                let y = if y0_odd == want_odd { y0 } else { f.neg(y0) };
                if y.is_zero() && want_odd {
                    return Err(AlgebraError::BadEncoding("zero y cannot be odd".into()));
                }
                Ok(GroupPoint {
                    x,
                    y,
                    infinity: false,
                })
            }
            t => Err(AlgebraError::BadEncoding(format!("unknown point tag {t:#x}"))),
        }
    }

    // ---- hash-to-point and generator sampling ----

    /// Deterministic point derivation: hash the label with a retry counter
    /// into x candidates until one lands on the curve. Discrete logs of the
    /// results are unknown to everyone.
    pub fn hash_to_point(&self, label: &str) -> GroupPoint {
        let f = &self.base;
        for ctr in 0u32.. {
            let mut wide = Vec::with_capacity(64);
            for half in 0u8..2 {
                let mut h = Sha256::new();
                h.update(b"zkdps/v1/h2c");
                h.update((label.len() as u64).to_be_bytes());
                h.update(label.as_bytes());
                h.update(ctr.to_be_bytes());
                h.update([half]);
                wide.extend_from_slice(&h.finalize());
            }
            let x = f.from_bytes_wide(&wide);
            let rhs = f.add(f.add(f.mul(x, f.sqr(x)), f.mul(self.a, x)), self.b);
            if let Some(y0) = f.sqrt(rhs) {
                // Normalize to the even-parity root.
                let y = if y0.as_limbs()[0] & 1 == 0 { y0 } else { f.neg(y0) };
                return GroupPoint {
                    x,
                    y,
                    infinity: false,
                };
            }
        }
        unreachable!("hash-to-point: counter exhausted")
    }

    /// `count` pairwise-distinct non-identity generators for this profile's
    /// seed and `tag`. Deterministic, and a prefix of any longer sampling
    /// with the same tag.
    ///
    /// Panics when the request cannot be met: hash-to-point reaches only
    /// the even-parity point per x-coordinate, so a curve with `n` points
    /// yields at most about `n/2` distinct generators. Only tiny test
    /// curves can run into this.
    pub fn sample_generators(&self, tag: &str, count: usize) -> Vec<GroupPoint> {
        let mut out = Vec::with_capacity(count);
        let mut seen = HashSet::new();
        let budget = 1_000 + 200 * count as u64;
        let mut idx = 0u64;
        while out.len() < count {
            assert!(
                idx < budget,
                "curve {} cannot supply {count} distinct generators (got {} after {idx} draws)",
                self.name,
                out.len()
            );
            let label = format!("zkdps/v1/gens/{}/{tag}/{idx}", self.generator_seed);
            idx += 1;
            let p = self.hash_to_point(&label);
            if p.infinity {
                continue;
            }
            if seen.insert(self.compress(&p)) {
                out.push(p);
            }
        }
        out
    }

    /// Order sanity: `order · P` must be the identity for curve points.
    pub fn mul_by_order_is_identity(&self, p: &GroupPoint) -> bool {
        let j = self.jac_scalar_mul(&self.to_jac(p), &self.order);
        limbs::is_zero(&j.z)
    }
}
