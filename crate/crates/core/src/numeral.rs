//! Parted-number representation.
//!
//! A numeral is decomposed into *parts*: one entry per non-zero digit,
//! each pairing that digit with its order of magnitude. `"12045"` becomes
//! `{1 at order 4, 2 at order 3, 4 at order 1, 5 at order 0}`; the zero
//! digit contributes nothing. Fractional digits carry negative orders, so
//! `"10000.2"` is `{1 at order 4, 2 at order -1}`.
//!
//! [`PartedNumber`] keeps parts sorted by descending order with at most one
//! part per order and a single sign across all parts; the empty part list is
//! exactly zero. [`normalize`] restores those invariants after arithmetic
//! leaves oversized digits or duplicate orders behind, [`align_orders`]
//! rewrites a pair of numbers onto a common non-negative order range, and
//! [`compare_magnitude`] orders numbers lexicographically without ever
//! evaluating them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub const MAX_BASE: u32 = 36;
const DEFAULT_GLYPHS: &str = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Numeral base plus the glyph alphabet used to read and print digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseConfig {
    base: u32,
    glyphs: Vec<char>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaseError {
    #[error("base {0} out of range, expected 2..=36")]
    OutOfRange(u32),
    #[error("alphabet has {got} glyphs, base {base} needs exactly {base}")]
    AlphabetLength { base: u32, got: usize },
    #[error("alphabet repeats glyph {0:?}")]
    DuplicateGlyph(char),
}

impl BaseConfig {
    /// Base 2..=36 with the standard `0-9A-Z` alphabet.
    pub fn new(base: u32) -> Result<Self, BaseError> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(BaseError::OutOfRange(base));
        }
        Ok(Self {
            base,
            glyphs: DEFAULT_GLYPHS.chars().take(base as usize).collect(),
        })
    }

    /// Custom alphabet; must supply exactly `base` distinct glyphs.
    pub fn with_alphabet(base: u32, alphabet: &str) -> Result<Self, BaseError> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(BaseError::OutOfRange(base));
        }
        let glyphs: Vec<char> = alphabet.chars().collect();
        if glyphs.len() != base as usize {
            return Err(BaseError::AlphabetLength {
                base,
                got: glyphs.len(),
            });
        }
        for (i, g) in glyphs.iter().enumerate() {
            if glyphs[..i].contains(g) {
                return Err(BaseError::DuplicateGlyph(*g));
            }
        }
        Ok(Self { base, glyphs })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Digit value of a glyph; letters match case-insensitively.
    pub fn digit_of(&self, c: char) -> Option<u32> {
        let folded = c.to_ascii_uppercase();
        self.glyphs
            .iter()
            .position(|g| g.to_ascii_uppercase() == folded)
            .map(|p| p as u32)
    }

    /// Glyph for an in-range digit value.
    pub fn glyph(&self, digit: u32) -> char {
        self.glyphs[digit as usize]
    }

    /// Renders a non-negative digit sequence value, most significant first.
    pub fn render_digits(&self, digits: &[u32]) -> String {
        digits.iter().map(|&d| self.glyph(d)).collect()
    }
}

impl Default for BaseConfig {
    fn default() -> Self {
        Self::new(10).expect("base 10 is always valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

/// Opaque identity a part keeps while it moves around a grid. Tags make
/// traces readable; no arithmetic ever depends on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(pub u32);

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Issues tags in creation order, starting from t0 per computation.
#[derive(Debug, Default)]
pub struct TagGen(u32);

impl TagGen {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn next_tag(&mut self) -> Tag {
        let t = Tag(self.0);
        self.0 += 1;
        t
    }
}

/// One non-zero digit at one order of magnitude.
///
/// Canonically `1 <= digit < base`; a digit at or above the base is a
/// transient state that [`normalize`] resolves by carrying upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Part {
    pub digit: u32,
    pub order: i32,
    pub sign: Sign,
    pub tag: Tag,
}

impl Part {
    pub fn new(digit: u32, order: i32, sign: Sign, tag: Tag) -> Self {
        Self {
            digit,
            order,
            sign,
            tag,
        }
    }

    pub fn is_canonical(&self, cfg: &BaseConfig) -> bool {
        self.digit >= 1 && self.digit < cfg.base()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumeralError {
    #[error("two parts share order {0}")]
    DuplicateOrder(i32),
    #[error("parts mix positive and negative signs")]
    MixedSigns,
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
}

/// A number as a collection of parts, descending by order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartedNumber {
    cfg: BaseConfig,
    parts: Vec<Part>,
}

impl PartedNumber {
    pub fn zero(cfg: BaseConfig) -> Self {
        Self {
            cfg,
            parts: Vec::new(),
        }
    }

    /// Builds from raw parts without normalizing; callers own the invariants.
    pub fn from_parts(cfg: BaseConfig, mut parts: Vec<Part>) -> Self {
        parts.sort_by_key(|p| std::cmp::Reverse(p.order));
        Self { cfg, parts }
    }

    pub fn config(&self) -> &BaseConfig {
        &self.cfg
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Common sign of all parts; zero has no sign.
    pub fn sign(&self) -> Option<Sign> {
        let first = self.parts.first()?.sign;
        Some(first)
    }

    pub fn top_order(&self) -> Option<i32> {
        self.parts.first().map(|p| p.order)
    }

    pub fn min_order(&self) -> Option<i32> {
        self.parts.last().map(|p| p.order)
    }

    /// How many fractional places the number occupies (0 for integers).
    pub fn fractional_depth(&self) -> u32 {
        match self.min_order() {
            Some(o) if o < 0 => o.unsigned_abs(),
            _ => 0,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.fractional_depth() == 0
    }

    pub fn digit_at(&self, order: i32) -> u32 {
        self.parts
            .iter()
            .find(|p| p.order == order)
            .map_or(0, |p| p.digit)
    }

    pub fn negated(&self) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| Part {
                sign: p.sign.flipped(),
                ..*p
            })
            .collect();
        Self {
            cfg: self.cfg.clone(),
            parts,
        }
    }

    pub fn magnitude(&self) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| Part {
                sign: Sign::Positive,
                ..*p
            })
            .collect();
        Self {
            cfg: self.cfg.clone(),
            parts,
        }
    }

    /// All orders shifted by `delta`, value scaled by base^delta.
    pub fn shifted(&self, delta: i32) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| Part {
                order: p.order + delta,
                ..*p
            })
            .collect();
        Self {
            cfg: self.cfg.clone(),
            parts,
        }
    }

    /// One single-part number per part, each under a fresh tag.
    pub fn split(&self) -> Vec<PartedNumber> {
        let mut gen = TagGen::new();
        self.split_parts(&mut gen)
            .into_iter()
            .map(|p| PartedNumber::from_parts(self.cfg.clone(), vec![p]))
            .collect()
    }

    /// Part list retagged from `gen`, highest order first.
    pub fn split_parts(&self, gen: &mut TagGen) -> Vec<Part> {
        self.parts
            .iter()
            .map(|p| Part {
                tag: gen.next_tag(),
                ..*p
            })
            .collect()
    }

    /// True when all structural invariants hold.
    pub fn is_canonical(&self) -> bool {
        let single_sign = self
            .parts
            .windows(2)
            .all(|w| w[0].sign == w[1].sign && w[0].order > w[1].order);
        single_sign && self.parts.iter().all(|p| p.is_canonical(&self.cfg))
    }

    /// Numeral text; requires canonical form.
    pub fn rejoin(&self) -> Result<String, NumeralError> {
        rejoin(&self.parts, &self.cfg)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty numeral")]
    Empty,
    #[error("sign with no digits")]
    BareSign,
    #[error("invalid glyph {glyph:?} at position {position}")]
    InvalidGlyph { position: usize, glyph: char },
    #[error("second radix point at position {position}")]
    SecondRadixPoint { position: usize },
    #[error("expected a digit at position {position}")]
    MissingDigits { position: usize },
}

/// Reads `'-'? digit+ ('.' digit+)?` into parts. Letters fold case; zero
/// digits vanish, so `"-0"` and `"00.00"` both parse to zero.
pub fn parse_numeral(text: &str, cfg: &BaseConfig) -> Result<PartedNumber, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut pos = 0;
    let sign = if chars[0] == '-' {
        pos += 1;
        Sign::Negative
    } else {
        Sign::Positive
    };
    if pos >= chars.len() {
        return Err(ParseError::BareSign);
    }

    let mut int_digits = Vec::new();
    let mut frac_digits = Vec::new();
    let mut in_fraction = false;
    let mut radix_seen_at = None;
    while pos < chars.len() {
        let c = chars[pos];
        if c == '.' {
            if radix_seen_at.is_some() {
                return Err(ParseError::SecondRadixPoint { position: pos });
            }
            if int_digits.is_empty() {
                return Err(ParseError::MissingDigits { position: pos });
            }
            radix_seen_at = Some(pos);
            in_fraction = true;
            pos += 1;
            continue;
        }
        match cfg.digit_of(c) {
            Some(d) => {
                if in_fraction {
                    frac_digits.push(d);
                } else {
                    int_digits.push(d);
                }
            }
            None => {
                return Err(ParseError::InvalidGlyph {
                    position: pos,
                    glyph: c,
                })
            }
        }
        pos += 1;
    }
    if int_digits.is_empty() {
        return Err(ParseError::MissingDigits { position: pos });
    }
    if in_fraction && frac_digits.is_empty() {
        return Err(ParseError::MissingDigits { position: pos });
    }

    let mut gen = TagGen::new();
    let mut parts = Vec::new();
    let top = int_digits.len() as i32 - 1;
    for (i, &d) in int_digits.iter().enumerate() {
        if d != 0 {
            parts.push(Part::new(d, top - i as i32, sign, gen.next_tag()));
        }
    }
    for (i, &d) in frac_digits.iter().enumerate() {
        if d != 0 {
            parts.push(Part::new(d, -(i as i32) - 1, sign, gen.next_tag()));
        }
    }
    Ok(PartedNumber::from_parts(cfg.clone(), parts))
}

/// Inverse of parsing: writes one digit per order, zeros in the gaps, a
/// radix point exactly when a negative order is present.
pub fn rejoin(parts: &[Part], cfg: &BaseConfig) -> Result<String, NumeralError> {
    let mut seen = BTreeMap::new();
    for p in parts {
        if seen.insert(p.order, p.digit).is_some() {
            return Err(NumeralError::DuplicateOrder(p.order));
        }
        if !p.is_canonical(cfg) {
            return Err(NumeralError::DigitOutOfRange {
                digit: p.digit,
                base: cfg.base(),
            });
        }
    }
    if parts.is_empty() {
        return Ok(cfg.glyph(0).to_string());
    }
    if parts.iter().any(|p| p.sign != parts[0].sign) {
        return Err(NumeralError::MixedSigns);
    }

    let top = *seen.keys().next_back().expect("nonempty").max(&0);
    let bottom = *seen.keys().next().expect("nonempty").min(&0);
    let mut out = String::new();
    if parts[0].sign.is_negative() {
        out.push('-');
    }
    for order in (0..=top).rev() {
        out.push(cfg.glyph(seen.get(&order).copied().unwrap_or(0)));
    }
    if bottom < 0 {
        out.push('.');
        for order in (bottom..0).rev() {
            out.push(cfg.glyph(seen.get(&order).copied().unwrap_or(0)));
        }
    }
    Ok(out)
}

/// Restores canonical form: duplicate orders merge, digits at or above the
/// base carry upward (`{16 at order 5}` becomes `{1 at order 6, 6 at order
/// 5}`), zero digits drop out. Rejects mixed signs; resolve those first.
pub fn normalize(n: &PartedNumber) -> Result<PartedNumber, NumeralError> {
    let sign = match n.sign() {
        None => return Ok(PartedNumber::zero(n.cfg.clone())),
        Some(s) => s,
    };
    if n.parts.iter().any(|p| p.sign != sign) {
        return Err(NumeralError::MixedSigns);
    }

    let base = n.cfg.base() as u64;
    let mut sums: BTreeMap<i32, u64> = BTreeMap::new();
    for p in &n.parts {
        *sums.entry(p.order).or_insert(0) += p.digit as u64;
    }
    let mut gen = TagGen::new();
    let mut parts = Vec::new();
    while let Some((&order, _)) = sums.iter().next() {
        let total = sums.remove(&order).expect("key just observed");
        let digit = total % base;
        let carry = total / base;
        if digit != 0 {
            parts.push(Part::new(digit as u32, order, sign, gen.next_tag()));
        }
        if carry != 0 {
            *sums.entry(order + 1).or_insert(0) += carry;
        }
    }
    Ok(PartedNumber::from_parts(n.cfg.clone(), parts))
}

/// Rewrites a pair onto non-negative orders: both shift up by the deeper
/// fractional depth, so `0.7` and `0.05` become `70` and `5` with shift 2.
/// The shift is what a grid later divides back out.
pub fn align_orders(a: &PartedNumber, b: &PartedNumber) -> (PartedNumber, PartedNumber, u32) {
    let shift = a.fractional_depth().max(b.fractional_depth());
    (a.shifted(shift as i32), b.shifted(shift as i32), shift)
}

/// Lexicographic magnitude order: highest order first, then digits downward.
/// Never evaluates either number.
pub fn compare_magnitude(a: &PartedNumber, b: &PartedNumber) -> Ordering {
    let mut orders: Vec<i32> = a
        .parts
        .iter()
        .chain(b.parts.iter())
        .map(|p| p.order)
        .collect();
    orders.sort_unstable_by(|x, y| y.cmp(x));
    orders.dedup();
    for order in orders {
        match a.digit_at(order).cmp(&b.digit_at(order)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base10() -> BaseConfig {
        BaseConfig::new(10).unwrap()
    }

    fn digits_of(n: &PartedNumber) -> Vec<(u32, i32)> {
        n.parts().iter().map(|p| (p.digit, p.order)).collect()
    }

    #[test]
    fn parse_spreads_digits_over_orders() {
        let n = parse_numeral("12045", &base10()).unwrap();
        assert_eq!(digits_of(&n), vec![(1, 4), (2, 3), (4, 1), (5, 0)]);
        assert_eq!(n.sign(), Some(Sign::Positive));
    }

    #[test]
    fn parse_fraction_uses_negative_orders() {
        let n = parse_numeral("10000.2", &base10()).unwrap();
        assert_eq!(digits_of(&n), vec![(1, 4), (2, -1)]);
    }

    #[test]
    fn parse_zero_forms() {
        for t in ["0", "-0", "00.00", "0.0"] {
            assert!(parse_numeral(t, &base10()).unwrap().is_zero(), "{t}");
        }
    }

    #[test]
    fn parse_negative() {
        let n = parse_numeral("-205", &base10()).unwrap();
        assert_eq!(n.sign(), Some(Sign::Negative));
        assert_eq!(digits_of(&n), vec![(2, 2), (5, 0)]);
    }

    #[test]
    fn parse_hex_case_insensitive() {
        let cfg = BaseConfig::new(16).unwrap();
        let a = parse_numeral("ff", &cfg).unwrap();
        let b = parse_numeral("FF", &cfg).unwrap();
        assert_eq!(digits_of(&a), vec![(15, 1), (15, 0)]);
        assert_eq!(a, b);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let cfg = base10();
        assert_eq!(parse_numeral("", &cfg), Err(ParseError::Empty));
        assert_eq!(parse_numeral("-", &cfg), Err(ParseError::BareSign));
        assert_eq!(
            parse_numeral("12x4", &cfg),
            Err(ParseError::InvalidGlyph {
                position: 2,
                glyph: 'x'
            })
        );
        assert_eq!(
            parse_numeral("1.2.3", &cfg),
            Err(ParseError::SecondRadixPoint { position: 3 })
        );
        assert_eq!(
            parse_numeral("5.", &cfg),
            Err(ParseError::MissingDigits { position: 2 })
        );
        assert_eq!(
            parse_numeral(".5", &cfg),
            Err(ParseError::MissingDigits { position: 0 })
        );
    }

    #[test]
    fn rejoin_fills_zero_gaps() {
        let n = parse_numeral("205", &base10()).unwrap();
        assert_eq!(n.rejoin().unwrap(), "205");
        let f = parse_numeral("0.75", &base10()).unwrap();
        assert_eq!(digits_of(&f), vec![(7, -1), (5, -2)]);
        assert_eq!(f.rejoin().unwrap(), "0.75");
    }

    #[test]
    fn rejoin_canonicalizes_padding() {
        let cfg = base10();
        for (raw, canon) in [("007", "7"), ("12.30", "12.3"), ("-00.40", "-0.4")] {
            let n = parse_numeral(raw, &cfg).unwrap();
            assert_eq!(n.rejoin().unwrap(), canon, "{raw}");
        }
    }

    #[test]
    fn rejoin_rejects_bad_part_sets() {
        let cfg = base10();
        let mut gen = TagGen::new();
        let dup = vec![
            Part::new(2, 1, Sign::Positive, gen.next_tag()),
            Part::new(3, 1, Sign::Positive, gen.next_tag()),
        ];
        assert_eq!(rejoin(&dup, &cfg), Err(NumeralError::DuplicateOrder(1)));
        let mixed = vec![
            Part::new(2, 1, Sign::Positive, gen.next_tag()),
            Part::new(3, 0, Sign::Negative, gen.next_tag()),
        ];
        assert_eq!(rejoin(&mixed, &cfg), Err(NumeralError::MixedSigns));
    }

    #[test]
    fn normalize_carries_oversized_digits() {
        let cfg = base10();
        let mut gen = TagGen::new();
        let ten_at_one = PartedNumber::from_parts(
            cfg.clone(),
            vec![Part::new(10, 1, Sign::Positive, gen.next_tag())],
        );
        assert_eq!(digits_of(&normalize(&ten_at_one).unwrap()), vec![(1, 2)]);

        let sixteen = PartedNumber::from_parts(
            cfg.clone(),
            vec![Part::new(16, 5, Sign::Positive, gen.next_tag())],
        );
        assert_eq!(
            digits_of(&normalize(&sixteen).unwrap()),
            vec![(1, 6), (6, 5)]
        );
    }

    #[test]
    fn normalize_merges_duplicate_orders_and_drops_zeros() {
        let cfg = base10();
        let mut gen = TagGen::new();
        let n = PartedNumber::from_parts(
            cfg.clone(),
            vec![
                Part::new(7, 0, Sign::Positive, gen.next_tag()),
                Part::new(4, 0, Sign::Positive, gen.next_tag()),
                Part::new(9, 1, Sign::Positive, gen.next_tag()),
            ],
        );
        // 7 + 4 = 11 at order 0, carrying into the 9 -> 101.
        assert_eq!(digits_of(&normalize(&n).unwrap()), vec![(1, 2), (1, 0)]);
    }

    #[test]
    fn normalize_rejects_mixed_signs() {
        let cfg = base10();
        let mut gen = TagGen::new();
        let n = PartedNumber::from_parts(
            cfg.clone(),
            vec![
                Part::new(1, 1, Sign::Positive, gen.next_tag()),
                Part::new(1, 0, Sign::Negative, gen.next_tag()),
            ],
        );
        assert_eq!(normalize(&n), Err(NumeralError::MixedSigns));
    }

    #[test]
    fn align_orders_scales_to_integers() {
        let cfg = base10();
        let a = parse_numeral("0.7", &cfg).unwrap();
        let b = parse_numeral("0.05", &cfg).unwrap();
        let (a2, b2, shift) = align_orders(&a, &b);
        assert_eq!(shift, 2);
        assert_eq!(a2.rejoin().unwrap(), "70");
        assert_eq!(b2.rejoin().unwrap(), "5");
    }

    #[test]
    fn align_orders_mixed_pair() {
        let cfg = base10();
        let a = parse_numeral("10000.2", &cfg).unwrap();
        let b = parse_numeral("3", &cfg).unwrap();
        let (a2, b2, shift) = align_orders(&a, &b);
        assert_eq!(shift, 1);
        assert_eq!(a2.rejoin().unwrap(), "100002");
        assert_eq!(b2.rejoin().unwrap(), "30");
    }

    #[test]
    fn compare_magnitude_is_lexicographic() {
        let cfg = base10();
        let cmp = |x: &str, y: &str| {
            compare_magnitude(
                &parse_numeral(x, &cfg).unwrap(),
                &parse_numeral(y, &cfg).unwrap(),
            )
        };
        assert_eq!(cmp("205", "205"), Ordering::Equal);
        assert_eq!(cmp("1000", "999"), Ordering::Greater);
        assert_eq!(cmp("0.7", "0.05"), Ordering::Greater);
        assert_eq!(cmp("55", "150"), Ordering::Less);
        assert_eq!(cmp("0", "0.001"), Ordering::Less);
    }

    #[test]
    fn split_gives_single_part_numbers_with_fresh_tags() {
        let n = parse_numeral("205", &base10()).unwrap();
        let pieces = n.split();
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|p| p.parts().len() == 1));
        assert_eq!(pieces[0].parts()[0].tag, Tag(0));
        assert_eq!(pieces[1].parts()[0].tag, Tag(1));
    }

    #[test]
    fn canonical_flags() {
        let cfg = base10();
        assert!(parse_numeral("12045", &cfg).unwrap().is_canonical());
        let mut gen = TagGen::new();
        let over = PartedNumber::from_parts(
            cfg.clone(),
            vec![Part::new(12, 0, Sign::Positive, gen.next_tag())],
        );
        assert!(!over.is_canonical());
    }
}
