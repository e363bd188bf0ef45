//! Conventional-arithmetic reference oracle.
//!
//! Everything here computes positionally over big integers and exact
//! rationals, sharing no code path with the grid engine it is used to
//! check. The internal radix is the big-integer limb size, deliberately
//! unrelated to any [`BaseConfig`], so a base-conversion bug cannot cancel
//! itself out in a comparison.
//!
//! [`gen_cases`] produces seeded, reproducible operand streams for the
//! equivalence suites.

use num_bigint::{BigInt, Sign as IntSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numeral::{BaseConfig, Part, PartedNumber, Sign, TagGen};

/// Signed arbitrary-size integer: sign plus little-endian limb magnitude.
pub type BigInteger = BigInt;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("division by zero")]
    DivisionByZero,
}

pub fn oracle_add(a: &BigInteger, b: &BigInteger) -> BigInteger {
    a + b
}

pub fn oracle_sub(a: &BigInteger, b: &BigInteger) -> BigInteger {
    a - b
}

pub fn oracle_mul(a: &BigInteger, b: &BigInteger) -> BigInteger {
    a * b
}

/// Quotient and remainder, truncating toward zero. For non-negative
/// operands this gives `0 <= r < b` and `a == q*b + r`.
pub fn oracle_divmod(
    a: &BigInteger,
    b: &BigInteger,
) -> Result<(BigInteger, BigInteger), OracleError> {
    if b.is_zero() {
        return Err(OracleError::DivisionByZero);
    }
    Ok(a.div_rem(b))
}

/// Exact value of a parted number: the signed sum of digit * base^order.
pub fn to_value(n: &PartedNumber) -> BigRational {
    let base = BigInt::from(n.config().base());
    let mut total = BigRational::zero();
    for p in n.parts() {
        let scale = if p.order >= 0 {
            BigRational::from_integer(base.pow(p.order as u32))
        } else {
            BigRational::new(BigInt::one(), base.pow(p.order.unsigned_abs()))
        };
        let term = BigRational::from_integer(BigInt::from(p.digit)) * scale;
        match p.sign {
            Sign::Positive => total += term,
            Sign::Negative => total -= term,
        }
    }
    total
}

/// Integer value of an integer-valued parted number.
pub fn to_integer(n: &PartedNumber) -> Option<BigInteger> {
    let v = to_value(n);
    v.is_integer().then(|| v.to_integer())
}

/// Rebuilds a parted number from an integer by repeated division, the
/// conventional route rather than the splitting one.
pub fn from_integer(v: &BigInteger, cfg: &BaseConfig) -> PartedNumber {
    let sign = match v.sign() {
        IntSign::NoSign => return PartedNumber::zero(cfg.clone()),
        IntSign::Plus => Sign::Positive,
        IntSign::Minus => Sign::Negative,
    };
    let base = BigInt::from(cfg.base());
    let mut rest = v.abs();
    let mut order = 0i32;
    let mut gen = TagGen::new();
    let mut parts = Vec::new();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&base);
        if !r.is_zero() {
            let digit = u32::try_from(&r).expect("remainder below base fits in u32");
            parts.push(Part::new(digit, order, sign, gen.next_tag()));
        }
        rest = q;
        order += 1;
    }
    parts.reverse();
    PartedNumber::from_parts(cfg.clone(), parts)
}

/// Operand shape for [`gen_cases`]: digit counts per operand, candidate
/// bases, whether signs mix, and how deep fractional tails may go.
#[derive(Debug, Clone)]
pub struct OperandProfile {
    pub min_digits: usize,
    pub max_digits: usize,
    pub bases: Vec<u32>,
    pub sign_mix: bool,
    pub fractional_depth: u32,
}

impl OperandProfile {
    pub fn integers(base: u32, max_digits: usize) -> Self {
        Self {
            min_digits: 1,
            max_digits,
            bases: vec![base],
            sign_mix: false,
            fractional_depth: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CasePair {
    pub cfg: BaseConfig,
    pub a: PartedNumber,
    pub b: PartedNumber,
}

/// Endless reproducible case stream. Per case: a base drawn uniformly from
/// the profile's list, operand digit counts uniform in the configured
/// range, digits uniform with a non-zero leading digit, an optional uniform
/// fractional shift of 0..=depth places, and uniform signs when mixing.
pub struct CaseStream {
    rng: ChaCha8Rng,
    profile: OperandProfile,
}

pub fn gen_cases(seed: u64, profile: OperandProfile) -> CaseStream {
    CaseStream {
        rng: ChaCha8Rng::seed_from_u64(seed),
        profile,
    }
}

impl CaseStream {
    fn operand(&mut self, cfg: &BaseConfig) -> PartedNumber {
        let p = &self.profile;
        let ndigits = self.rng.gen_range(p.min_digits..=p.max_digits);
        let base = cfg.base();
        let sign = if p.sign_mix && self.rng.gen_bool(0.5) {
            Sign::Negative
        } else {
            Sign::Positive
        };
        let shift = if p.fractional_depth > 0 {
            self.rng.gen_range(0..=p.fractional_depth) as i32
        } else {
            0
        };
        let mut gen = TagGen::new();
        let mut parts = Vec::new();
        for i in 0..ndigits {
            let d = if i == 0 {
                self.rng.gen_range(1..base)
            } else {
                self.rng.gen_range(0..base)
            };
            if d != 0 {
                let order = (ndigits - 1 - i) as i32 - shift;
                parts.push(Part::new(d, order, sign, gen.next_tag()));
            }
        }
        PartedNumber::from_parts(cfg.clone(), parts)
    }
}

impl Iterator for CaseStream {
    type Item = CasePair;

    fn next(&mut self) -> Option<CasePair> {
        let base_ix = self.rng.gen_range(0..self.profile.bases.len());
        let cfg = BaseConfig::new(self.profile.bases[base_ix]).expect("profile bases are valid");
        let a = self.operand(&cfg);
        let b = self.operand(&cfg);
        Some(CasePair { cfg, a, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeral::parse_numeral;
    use num_traits::ToPrimitive;

    fn val(text: &str, base: u32) -> BigRational {
        let cfg = BaseConfig::new(base).unwrap();
        to_value(&parse_numeral(text, &cfg).unwrap())
    }

    #[test]
    fn values_match_positional_reading() {
        assert_eq!(val("12045", 10), BigRational::from_integer(12045.into()));
        assert_eq!(val("-205", 10), BigRational::from_integer((-205).into()));
        assert_eq!(val("ff", 16), BigRational::from_integer(255.into()));
        assert_eq!(val("101", 2), BigRational::from_integer(5.into()));
        assert_eq!(val("0.75", 10), BigRational::new(3.into(), 4.into()));
        assert_eq!(val("10000.2", 10), BigRational::new(50001.into(), 5.into()));
    }

    #[test]
    fn ring_axioms_hold_on_samples() {
        let xs: Vec<BigInt> = [-7i64, -1, 0, 3, 12045, 99999]
            .iter()
            .map(|&v| BigInt::from(v))
            .collect();
        for a in &xs {
            for b in &xs {
                assert_eq!(oracle_add(a, b), oracle_add(b, a));
                assert_eq!(oracle_mul(a, b), oracle_mul(b, a));
                assert_eq!(
                    oracle_sub(&oracle_add(a, b), b),
                    a.clone(),
                    "add then sub returns the start"
                );
                for c in &xs {
                    assert_eq!(
                        oracle_mul(a, &oracle_add(b, c)),
                        oracle_add(&oracle_mul(a, b), &oracle_mul(a, c))
                    );
                }
            }
        }
    }

    #[test]
    fn divmod_identity_and_range() {
        let cases = [(12045i64, 7i64), (2075, 25), (425, 23), (19, 11), (5, 25)];
        for (a, b) in cases {
            let (q, r) = oracle_divmod(&a.into(), &b.into()).unwrap();
            assert_eq!(q.clone() * BigInt::from(b) + r.clone(), BigInt::from(a));
            assert!(r >= BigInt::zero() && r < BigInt::from(b));
        }
        assert_eq!(
            oracle_divmod(&1.into(), &0.into()),
            Err(OracleError::DivisionByZero)
        );
    }

    #[test]
    fn from_integer_round_trips_through_value() {
        let cfg = BaseConfig::new(16).unwrap();
        for v in [-4096i64, -255, 0, 1, 255, 48879, 1_000_000] {
            let n = from_integer(&BigInt::from(v), &cfg);
            assert_eq!(to_value(&n).to_integer().to_i64().unwrap(), v);
            assert!(n.is_canonical());
        }
    }

    #[test]
    fn gen_cases_is_reproducible() {
        let profile = OperandProfile {
            min_digits: 1,
            max_digits: 12,
            bases: vec![2, 3, 10, 16],
            sign_mix: true,
            fractional_depth: 2,
        };
        let a: Vec<CasePair> = gen_cases(42, profile.clone()).take(50).collect();
        let b: Vec<CasePair> = gen_cases(42, profile.clone()).take(50).collect();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.a, y.a);
            assert_eq!(x.b, y.b);
        }
        let c: Vec<CasePair> = gen_cases(43, profile).take(50).collect();
        assert!(a.iter().zip(&c).any(|(x, y)| x.a != y.a || x.b != y.b));
    }

    #[test]
    fn gen_cases_respects_profile() {
        let profile = OperandProfile::integers(10, 12);
        for case in gen_cases(7, profile).take(200) {
            assert_eq!(case.cfg.base(), 10);
            assert!(case.a.is_integer() && case.b.is_integer());
            assert!(case.a.sign() != Some(Sign::Negative));
            assert!(case.a.top_order().unwrap_or(0) < 12);
            assert!(case.a.is_canonical() && case.b.is_canonical());
        }
    }
}
