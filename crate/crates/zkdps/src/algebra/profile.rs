//! Curve profiles: named parameter sets binding a base field, curve
//! coefficients, a prime group order, and a generator-derivation seed.
//!
//! Profiles are validated at load time (Miller–Rabin on both moduli,
//! non-singularity, order·P = ∞ spot checks, Hasse-style bit-length sanity)
//! and can be read from a small `key = value` config file:
//!
//! ```text
//! # toy profile
//! name = tiny
//! id = 127
//! modulus = 307
//! a = 1
//! b = 6
//! order = 331
//! generator_seed = tiny-seed-1
//! ```
//!
//! `modulus`/`a`/`b`/`order` accept decimal or `0x` hex; `a`/`b` may be
//! negative (reduced mod the base modulus).

use super::curve::CurveGroup;
use super::field::PrimeField;
use super::limbs::{self, Limbs};
use super::AlgebraError;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Well-known profile id bytes used in serialized artifacts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProfileId {
    Test,
    Main,
    Custom(u8),
}

impl ProfileId {
    pub fn byte(self) -> u8 {
        match self {
            ProfileId::Test => 1,
            ProfileId::Main => 2,
            ProfileId::Custom(b) => b,
        }
    }

    pub fn from_byte(b: u8) -> ProfileId {
        match b {
            1 => ProfileId::Test,
            2 => ProfileId::Main,
            other => ProfileId::Custom(other),
        }
    }
}

/// A validated curve profile. Construct via the built-ins or config
/// loading; `group()` yields the operational [`CurveGroup`].
#[derive(Clone, Debug)]
pub struct CurveProfile {
    pub name: String,
    pub id: u8,
    pub modulus: Limbs,
    pub a: Limbs,
    pub b: Limbs,
    pub order: Limbs,
    pub generator_seed: String,
}

impl CurveProfile {
    /// Tiny curve for exhaustive testing: y² = x³ + x + 6 over F_307,
    /// prime order 331 (every group element enumerable).
    pub fn builtin_test() -> CurveProfile {
        CurveProfile {
            name: "test".into(),
            id: ProfileId::Test.byte(),
            modulus: limbs::from_u64(307),
            a: limbs::from_u64(1),
            b: limbs::from_u64(6),
            order: limbs::from_u64(331),
            generator_seed: "zkdps-test-v1".into(),
        }
    }

    /// P-192: base prime 2¹⁹² − 2⁶⁴ − 1, a = −3, prime order ≈ 2¹⁹²
    /// (cofactor 1), comfortably above the 2¹²⁸ soundness floor.
    pub fn builtin_main() -> CurveProfile {
        let modulus =
            limbs::from_str("0xfffffffffffffffffffffffffffffffeffffffffffffffff").unwrap();
        let (a, _) = limbs::sub(&modulus, &limbs::from_u64(3));
        CurveProfile {
            name: "main".into(),
            id: ProfileId::Main.byte(),
            modulus,
            a,
            b: limbs::from_str("0x64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1").unwrap(),
            order: limbs::from_str("0xffffffffffffffffffffffff99def836146bc9b1b4d22831")
                .unwrap(),
            generator_seed: "zkdps-main-v1".into(),
        }
    }

    /// Resolve a CLI profile name.
    pub fn by_name(name: &str) -> Option<CurveProfile> {
        match name {
            "test" => Some(Self::builtin_test()),
            "main" => Some(Self::builtin_main()),
            _ => None,
        }
    }

    pub fn by_id(id: u8) -> Option<CurveProfile> {
        match ProfileId::from_byte(id) {
            ProfileId::Test => Some(Self::builtin_test()),
            ProfileId::Main => Some(Self::builtin_main()),
            ProfileId::Custom(_) => None,
        }
    }

    /// Parse and validate a profile from config text.
    pub fn from_config_str(text: &str) -> Result<CurveProfile, AlgebraError> {
        let mut name = None;
        let mut id = None;
        let mut modulus = None;
        let mut a_raw = None;
        let mut b_raw = None;
        let mut order = None;
        let mut seed = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AlgebraError::BadProfile(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parse_int = |v: &str| -> Result<(bool, Limbs), AlgebraError> {
                let (neg, digits) = match v.strip_prefix('-') {
                    Some(rest) => (true, rest.trim()),
                    None => (false, v),
                };
                limbs::from_str(digits)
                    .map(|l| (neg, l))
                    .ok_or_else(|| {
                        AlgebraError::BadProfile(format!("line {}: bad integer `{v}`", lineno + 1))
                    })
            };
            match key {
                "name" => name = Some(value.to_string()),
                "id" => {
                    id = Some(value.parse::<u8>().map_err(|_| {
                        AlgebraError::BadProfile(format!("line {}: id must be 0..=255", lineno + 1))
                    })?)
                }
                "modulus" => {
                    let (neg, v) = parse_int(value)?;
                    if neg {
                        return Err(AlgebraError::BadProfile("modulus must be positive".into()));
                    }
                    modulus = Some(v);
                }
                "order" => {
                    let (neg, v) = parse_int(value)?;
                    if neg {
                        return Err(AlgebraError::BadProfile("order must be positive".into()));
                    }
                    order = Some(v);
                }
                "a" => a_raw = Some(parse_int(value)?),
                "b" => b_raw = Some(parse_int(value)?),
                "generator_seed" => seed = Some(value.to_string()),
                other => {
                    return Err(AlgebraError::BadProfile(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        let missing =
            |what: &str| AlgebraError::BadProfile(format!("missing required key `{what}`"));
        let modulus = modulus.ok_or_else(|| missing("modulus"))?;
        let base = PrimeField::new(modulus).map_err(|_| {
            AlgebraError::BadProfile("modulus must be an odd prime > 2".into())
        })?;
        let reduce_signed = |(neg, v): (bool, Limbs)| -> Result<Limbs, AlgebraError> {
            if limbs::cmp(&v, &modulus) != core::cmp::Ordering::Less {
                return Err(AlgebraError::BadProfile(
                    "coefficient magnitude must be below the modulus".into(),
                ));
            }
            let e = super::field::FieldElement(v);
            Ok(if neg { base.neg(e).0 } else { e.0 })
        };
        let profile = CurveProfile {
            name: name.ok_or_else(|| missing("name"))?,
            id: id.unwrap_or(0x7f),
            modulus,
            a: reduce_signed(a_raw.ok_or_else(|| missing("a"))?)?,
            b: reduce_signed(b_raw.ok_or_else(|| missing("b"))?)?,
            order: order.ok_or_else(|| missing("order"))?,
            generator_seed: seed.ok_or_else(|| missing("generator_seed"))?,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &std::path::Path) -> Result<CurveProfile, AlgebraError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AlgebraError::BadProfile(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_config_str(&text)
    }

    /// Full validation: primality of both moduli, curve shape, order
    /// plausibility (bit-length within Hasse range), and order·P = ∞ for
    /// several derived points.
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let mut rng = ChaCha20Rng::seed_from_u64(0x70726f66); // fixed: validation is deterministic
        if !PrimeField::is_probable_prime(&self.modulus, &mut rng) {
            return Err(AlgebraError::BadProfile("base modulus is not prime".into()));
        }
        if !PrimeField::is_probable_prime(&self.order, &mut rng) {
            return Err(AlgebraError::BadProfile("group order is not prime".into()));
        }
        // Hasse: |order − (q+1)| ≤ 2√q keeps the bit lengths within 1.
        let qb = limbs::bit_len(&self.modulus);
        let ob = limbs::bit_len(&self.order);
        if qb.abs_diff(ob) > 1 {
            return Err(AlgebraError::BadProfile(format!(
                "order bit-length {ob} impossible for a {qb}-bit base field"
            )));
        }
        let group = self.group()?; // checks non-singularity
        for i in 0..3 {
            let p = group.hash_to_point(&format!("profile-validate/{i}"));
            if !group.is_on_curve(&p) || !group.mul_by_order_is_identity(&p) {
                return Err(AlgebraError::BadProfile(
                    "declared order does not annihilate sampled points".into(),
                ));
            }
        }
        Ok(())
    }

    /// Build the operational group context.
    pub fn group(&self) -> Result<CurveGroup, AlgebraError> {
        let base = PrimeField::new(self.modulus)?;
        let scalar = PrimeField::new(self.order)?;
        let a = base.from_bytes(&limbs::to_be_bytes(&self.a, base.byte_len()))?;
        let b = base.from_bytes(&limbs::to_be_bytes(&self.b, base.byte_len()))?;
        CurveGroup::new(
            base,
            scalar,
            a,
            b,
            &self.name,
            self.id,
            &self.generator_seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        CurveProfile::builtin_test().validate().unwrap();
        CurveProfile::builtin_main().validate().unwrap();
        assert_eq!(CurveProfile::by_name("test").unwrap().id, 1);
        assert_eq!(CurveProfile::by_name("main").unwrap().id, 2);
        assert!(CurveProfile::by_name("nope").is_none());
        assert_eq!(CurveProfile::by_id(2).unwrap().name, "main");
        assert!(CurveProfile::by_id(99).is_none());
    }

    #[test]
    fn config_roundtrip() {
        let text = "
            # toy profile — mirrors the built-in test curve
            name = tiny
            id = 127
            modulus = 307
            a = 1
            b = 6
            order = 331
            generator_seed = tiny-seed-1
        ";
        let p = CurveProfile::from_config_str(text).unwrap();
        assert_eq!(p.name, "tiny");
        assert_eq!(p.id, 127);
        assert_eq!(p.modulus, limbs::from_u64(307));
        let g = p.group().unwrap();
        assert_eq!(g.name(), "tiny");
        // same curve as builtin test, different generator stream
        let gens = g.sample_generators("h", 3);
        let builtin = CurveProfile::builtin_test().group().unwrap();
        assert_ne!(gens, builtin.sample_generators("h", 3));
    }

    #[test]
    fn config_accepts_negative_a_and_hex() {
        let text = "
            name = mini-p192
            modulus = 0xfffffffffffffffffffffffffffffffeffffffffffffffff
            a = -3
            b = 0x64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1
            order = 0xffffffffffffffffffffffff99def836146bc9b1b4d22831
            generator_seed = zkdps-main-v1
        ";
        let p = CurveProfile::from_config_str(text).unwrap();
        assert_eq!(p.a, CurveProfile::builtin_main().a);
        assert_eq!(p.id, 0x7f, "id defaults to the custom byte");
    }

    #[test]
    fn config_rejections() {
        let base = |field: &str, val: &str| -> String {
            let mut kv = vec![
                ("name", "x"),
                ("modulus", "307"),
                ("a", "1"),
                ("b", "6"),
                ("order", "331"),
                ("generator_seed", "s"),
            ];
            for e in kv.iter_mut() {
                if e.0 == field {
                    e.1 = val;
                }
            }
            kv.iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| format!("{k} = {v}\n"))
                .collect()
        };
        // composite modulus
        assert!(CurveProfile::from_config_str(&base("modulus", "309")).is_err());
        // composite order
        assert!(CurveProfile::from_config_str(&base("order", "333")).is_err());
        // wrong order (prime but not the group order): 313 is prime
        assert!(CurveProfile::from_config_str(&base("order", "313")).is_err());
        // singular curve over F_307: a = 0, b = 0
        assert!(CurveProfile::from_config_str(&base("a", "0").replace("b = 6", "b = 0")).is_err());
        // order bit-length far from modulus
        assert!(CurveProfile::from_config_str(&base("order", "65521")).is_err());
        // missing key
        assert!(CurveProfile::from_config_str(&base("order", "")).is_err());
        // junk
        assert!(CurveProfile::from_config_str("name tiny").is_err());
        assert!(CurveProfile::from_config_str(&base("a", "zzz")).is_err());
    }
}
