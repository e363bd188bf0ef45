//! Randomized cross-layer invariants with shrinking.
//!
//! The acceptance gate drives bulk seeded equivalence; these properties
//! give the same claims shrinkable counterexamples and add structural
//! invariants (roundtrips, division identity, tamper rejection).

use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridnum::arith::Engine;
use gridnum::chain::{chain_divide, DivisorPartition, Rational};
use gridnum::grid::{replay, Trace};
use gridnum::numeral::{compare_magnitude, parse_numeral, BaseConfig, PartedNumber, Sign};
use gridnum::oracle::{from_integer, to_integer, to_value};

fn any_base() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(10), Just(16), Just(36)]
}

fn operand(cfg: &BaseConfig, value: i64, shift: u32) -> PartedNumber {
    from_integer(&BigInt::from(value), cfg).shifted(-(shift as i32))
}

fn ratio(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

proptest! {
    /// from_integer -> rejoin -> parse is the identity on value and text.
    #[test]
    fn integer_text_roundtrip(v in any::<i64>(), base in any_base()) {
        let cfg = BaseConfig::new(base).unwrap();
        let n = from_integer(&BigInt::from(v), &cfg);
        let text = n.rejoin().unwrap();
        let back = parse_numeral(&text, &cfg).unwrap();
        prop_assert_eq!(to_integer(&back).unwrap(), BigInt::from(v));
        prop_assert_eq!(back.rejoin().unwrap(), text);
        prop_assert!(back.is_canonical());
    }

    /// Symbolic magnitude comparison agrees with exact rational values.
    #[test]
    fn magnitude_comparison_matches_values(
        a in any::<i64>(),
        b in any::<i64>(),
        sa in 0u32..4,
        sb in 0u32..4,
        base in any_base(),
    ) {
        let cfg = BaseConfig::new(base).unwrap();
        let (na, nb) = (operand(&cfg, a, sa), operand(&cfg, b, sb));
        let expected = to_value(&na).abs().cmp(&to_value(&nb).abs());
        prop_assert_eq!(compare_magnitude(&na, &nb), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Addition and subtraction are exact on signed, possibly fractional
    /// operands.
    #[test]
    fn additive_ops_are_exact(
        a in -1_000_000_000i64..=1_000_000_000,
        b in -1_000_000_000i64..=1_000_000_000,
        sa in 0u32..3,
        sb in 0u32..3,
        base in any_base(),
    ) {
        let cfg = BaseConfig::new(base).unwrap();
        let engine = Engine::new(cfg.clone());
        let (na, nb) = (operand(&cfg, a, sa), operand(&cfg, b, sb));
        let scale_a = Rational::new(BigInt::from(1), BigInt::from(base).pow(sa));
        let scale_b = Rational::new(BigInt::from(1), BigInt::from(base).pow(sb));
        let (va, vb) = (ratio(a) * scale_a, ratio(b) * scale_b);

        let sum = engine.add(&na, &nb).unwrap();
        prop_assert_eq!(to_value(&sum.value), &va + &vb);
        prop_assert!(sum.value.is_canonical());

        let diff = engine.subtract(&na, &nb).unwrap();
        prop_assert_eq!(to_value(&diff.value), &va - &vb);
        prop_assert!(diff.value.is_canonical());
    }

    /// Multiplication is exact on signed fractional operands.
    #[test]
    fn multiplication_is_exact(
        a in -1_000_000i64..=1_000_000,
        b in -1_000_000i64..=1_000_000,
        sa in 0u32..3,
        sb in 0u32..3,
        base in any_base(),
    ) {
        let cfg = BaseConfig::new(base).unwrap();
        let engine = Engine::new(cfg.clone());
        let (na, nb) = (operand(&cfg, a, sa), operand(&cfg, b, sb));
        let out = engine.multiply(&na, &nb).unwrap();
        prop_assert_eq!(to_value(&out.value), to_value(&na) * to_value(&nb));
        prop_assert!(out.value.is_canonical());
    }

    /// Division yields an integer quotient and a remainder that close the
    /// identity a = q*b + r exactly, with |r| < |b| and r signed like a.
    #[test]
    fn division_identity_holds(
        a in -1_000_000_000i64..=1_000_000_000,
        b in -1_000_000i64..=1_000_000,
        sa in 0u32..3,
        sb in 0u32..3,
        base in any_base(),
    ) {
        prop_assume!(b != 0);
        let cfg = BaseConfig::new(base).unwrap();
        let engine = Engine::new(cfg.clone());
        let (na, nb) = (operand(&cfg, a, sa), operand(&cfg, b, sb));
        let out = engine.divide(&na, &nb).unwrap();
        let (q, r) = (to_value(&out.quotient), to_value(&out.remainder));
        prop_assert!(out.quotient.is_integer());
        prop_assert_eq!(&q * to_value(&nb) + &r, to_value(&na));
        prop_assert!(r.abs() < to_value(&nb).abs());
        if !out.remainder.is_zero() {
            prop_assert_eq!(out.remainder.sign(), na.sign());
        }
        if !out.quotient.is_zero() {
            let negative = (a < 0) != (b < 0);
            prop_assert_eq!(out.quotient.sign() == Some(Sign::Negative), negative);
        }
    }

    /// Chain evaluation reproduces N/D exactly for random partitions.
    #[test]
    fn chain_identity(
        n in 1u64..=1_000_000_000_000,
        d in 2u32..=1_000_000,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=16.min(d as usize));
        let mut cuts = std::collections::BTreeSet::new();
        while cuts.len() < k - 1 {
            cuts.insert(rng.gen_range(1..d));
        }
        let mut parts = Vec::with_capacity(k);
        let mut prev = 0u32;
        for c in cuts {
            parts.push(BigInt::from(c - prev));
            prev = c;
        }
        parts.push(BigInt::from(d - prev));
        let partition = DivisorPartition::new(BigInt::from(d), parts).unwrap();
        let cr = chain_divide(&BigInt::from(n), &BigInt::from(d), &partition).unwrap();
        prop_assert_eq!(cr.result, Rational::new(BigInt::from(n), BigInt::from(d)));
    }

    /// Any single tampered snapshot makes a genuine trace fail replay.
    #[test]
    fn tampered_traces_are_rejected(step_pick in any::<usize>(), mutation in 0u8..3) {
        let cfg = BaseConfig::new(10).unwrap();
        let engine = Engine::new(cfg.clone());
        let a = parse_numeral("2507", &cfg).unwrap();
        let b = parse_numeral("852", &cfg).unwrap();
        let out = engine.multiply(&a, &b).unwrap();
        prop_assert!(replay(&out.trace, &cfg).is_ok());

        let events = out.trace.events();
        let k = step_pick % events.len();
        let mut tampered = Trace::new();
        for (i, ev) in events.iter().enumerate() {
            let mut ev = ev.clone();
            if i == k {
                match mutation {
                    0 => ev.grid.entries[0].row += 7,
                    1 => { ev.grid.entries.remove(0); }
                    _ => ev.grid.shift += 1,
                }
            }
            tampered.push(ev);
        }
        prop_assert!(replay(&tampered, &cfg).is_err());
    }
}
