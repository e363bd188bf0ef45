//! Chain division: dividing by a sum through a cascade of part divisions.
//!
//! A divisor D splits into parts d_1 + d_2 + ... + d_k = D. The chain
//! computes residues
//!
//! ```text
//! r_1 = N / d_1
//! r_2 = r_1 * d_2 / D
//! r_i = r_{i-1} * d_i / d_{i-1}    (i >= 3)
//! ```
//!
//! and the difference r_1 - r_2 - ... - r_k telescopes to exactly N / D:
//! every r_i with i >= 2 equals N*d_i / (d_1*D), so the tail sums to
//! r_1*(D - d_1)/D and the subtraction leaves r_1*d_1/D. All arithmetic
//! here is exact rational; rounding exists only as a presentation mode
//! (and as [`fit_residual`]'s measurement of what rounding costs).
//!
//! The r_2 step is the one place the whole divisor appears, so it is also
//! the hook for self-similar expansion: [`expand_chain`] replaces that
//! single division by another chain over the same divisor, recursively.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the chain module.
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("partition parts sum to {got}, expected {expected}")]
    PartitionSumMismatch { expected: BigInt, got: BigInt },
    #[error("partition parts must be positive")]
    ZeroPart,
    #[error("divisor must be positive")]
    ZeroDivisor,
    #[error("dividend must be positive")]
    NonPositiveDividend,
    #[error("at least two steps are needed for transitions")]
    TooFewSteps,
    #[error("partition has no parts")]
    EmptyPartition,
    #[error("sub-partition at expansion level {level} does not split the divisor")]
    InvalidSubPartition { level: u32 },
}

/// A divisor together with an ordered split into positive parts that sum
/// back to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorPartition {
    divisor: BigInt,
    parts: Vec<BigInt>,
}

impl DivisorPartition {
    pub fn new(divisor: BigInt, parts: Vec<BigInt>) -> Result<Self, ChainError> {
        if divisor <= BigInt::zero() {
            return Err(ChainError::ZeroDivisor);
        }
        if parts.is_empty() {
            return Err(ChainError::EmptyPartition);
        }
        if parts.iter().any(|p| *p <= BigInt::zero()) {
            return Err(ChainError::ZeroPart);
        }
        let sum: BigInt = parts.iter().sum();
        if sum != divisor {
            return Err(ChainError::PartitionSumMismatch {
                expected: divisor,
                got: sum,
            });
        }
        Ok(Self { divisor, parts })
    }

    pub fn divisor(&self) -> &BigInt {
        &self.divisor
    }

    pub fn parts(&self) -> &[BigInt] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// One link of the chain: the part divided by and the residue it left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    /// 1-based position in the chain.
    pub index: usize,
    pub divisor_part: BigInt,
    pub residue: Rational,
}

/// A fully evaluated chain. `result` is exactly `dividend / divisor`.
///
/// The dividend is stored as a rational because expansion re-enters the
/// evaluator with `r_1 * d_2` as the dividend of a sub-chain, and that
/// product is not an integer in general.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainResult {
    pub dividend: Rational,
    pub partition: DivisorPartition,
    pub steps: Vec<ChainStep>,
    pub result: Rational,
}

/// Differences between consecutive chain links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionReport {
    pub d_deltas: Vec<BigInt>,
    pub r_deltas: Vec<Rational>,
    pub max_abs_r_delta: Rational,
    pub monotone_decreasing_r: bool,
}

/// A chain whose second step's whole-divisor division may itself be
/// replaced by a chain, recursively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainTree {
    pub node: ChainResult,
    pub expansion: Option<Box<ChainTree>>,
}

impl ChainTree {
    /// Number of expansions below this node.
    pub fn depth(&self) -> usize {
        match &self.expansion {
            Some(child) => 1 + child.depth(),
            None => 0,
        }
    }

    /// The root value, unchanged by any amount of expansion.
    pub fn value(&self) -> &Rational {
        &self.node.result
    }
}

fn ratio(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Evaluates the recurrence for any positive rational dividend.
fn evaluate(dividend: Rational, partition: DivisorPartition) -> ChainResult {
    let parts = partition.parts().to_vec();
    let divisor = partition.divisor().clone();
    let mut residues: Vec<Rational> = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        let r = if i == 0 {
            &dividend / ratio(part)
        } else if i == 1 {
            &residues[0] * ratio(part) / ratio(&divisor)
        } else {
            &residues[i - 1] * ratio(part) / ratio(&parts[i - 1])
        };
        residues.push(r);
    }
    let mut result = residues[0].clone();
    for r in &residues[1..] {
        result -= r;
    }
    let steps = residues
        .into_iter()
        .zip(parts)
        .enumerate()
        .map(|(i, (residue, divisor_part))| ChainStep {
            index: i + 1,
            divisor_part,
            residue,
        })
        .collect();
    ChainResult {
        dividend,
        partition,
        steps,
        result,
    }
}

/// Divides `dividend` by `divisor` through the partition's chain.
pub fn chain_divide(
    dividend: &BigInt,
    divisor: &BigInt,
    partition: &DivisorPartition,
) -> Result<ChainResult, ChainError> {
    if *divisor <= BigInt::zero() {
        return Err(ChainError::ZeroDivisor);
    }
    if *dividend <= BigInt::zero() {
        return Err(ChainError::NonPositiveDividend);
    }
    if partition.divisor() != divisor {
        return Err(ChainError::PartitionSumMismatch {
            expected: divisor.clone(),
            got: partition.divisor().clone(),
        });
    }
    Ok(evaluate(ratio(dividend), partition.clone()))
}

/// Replaces the second step's division by the whole divisor with a chain
/// of its own, `depth` times over. The chooser supplies the partition for
/// each expansion level (0 = first expansion); every sub-partition must
/// split the same divisor. A single-part chain has no expansion site.
pub fn expand_chain(
    cr: &ChainResult,
    chooser: &mut dyn FnMut(u32) -> DivisorPartition,
    depth: u32,
) -> Result<ChainTree, ChainError> {
    fn go(
        node: ChainResult,
        chooser: &mut dyn FnMut(u32) -> DivisorPartition,
        depth: u32,
        level: u32,
    ) -> Result<ChainTree, ChainError> {
        if depth == 0 || node.partition.len() < 2 {
            return Ok(ChainTree {
                node,
                expansion: None,
            });
        }
        // The sub-chain's dividend is r_1 * d_2: the quantity the second
        // step divides by the whole divisor.
        let site_dividend = &node.steps[0].residue * ratio(&node.partition.parts()[1]);
        let sub = chooser(level);
        if sub.divisor() != node.partition.divisor() {
            return Err(ChainError::InvalidSubPartition { level });
        }
        let child = evaluate(site_dividend, sub);
        debug_assert_eq!(child.result, node.steps[1].residue);
        let expansion = go(child, chooser, depth - 1, level + 1)?;
        Ok(ChainTree {
            node,
            expansion: Some(Box::new(expansion)),
        })
    }
    go(cr.clone(), chooser, depth, 0)
}

/// Deltas between consecutive parts and residues.
pub fn transitions(cr: &ChainResult) -> Result<TransitionReport, ChainError> {
    if cr.steps.len() < 2 {
        return Err(ChainError::TooFewSteps);
    }
    let d_deltas: Vec<BigInt> = cr
        .steps
        .windows(2)
        .map(|w| &w[1].divisor_part - &w[0].divisor_part)
        .collect();
    let r_deltas: Vec<Rational> = cr
        .steps
        .windows(2)
        .map(|w| &w[1].residue - &w[0].residue)
        .collect();
    let max_abs_r_delta = r_deltas
        .iter()
        .map(|d| d.abs())
        .max()
        .expect("at least one delta");
    let monotone_decreasing_r = cr.steps.windows(2).all(|w| w[0].residue > w[1].residue);
    Ok(TransitionReport {
        d_deltas,
        r_deltas,
        max_abs_r_delta,
        monotone_decreasing_r,
    })
}

/// Decimal rounding modes for presentation and for rounded re-evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Truncate,
    HalfUp,
}

/// Rounds to `precision` decimal fractional digits. Truncation drops
/// toward zero; half-up rounds halves away from zero.
pub fn round_to(x: &Rational, precision: u32, mode: Rounding) -> Rational {
    let scale = BigInt::from(10).pow(precision);
    let scaled = x * ratio(&scale);
    let n = match mode {
        Rounding::Truncate => scaled.trunc(),
        Rounding::HalfUp => {
            let half = Rational::new(BigInt::one(), BigInt::from(2));
            if scaled.is_negative() {
                (scaled - half).ceil()
            } else {
                (scaled + half).floor()
            }
        }
    };
    n / ratio(&scale)
}

/// Fixed-point decimal rendering with exactly `precision` fractional
/// digits (none and no point when `precision` is 0).
pub fn decimal_string(x: &Rational, precision: u32, mode: Rounding) -> String {
    let scale = BigInt::from(10).pow(precision);
    let n = (round_to(x, precision, mode) * ratio(&scale)).to_integer();
    let sign = if n.is_negative() { "-" } else { "" };
    let digits = n.abs().to_string();
    if precision == 0 {
        return format!("{sign}{digits}");
    }
    let p = precision as usize;
    let padded = format!("{digits:0>width$}", width = p + 1);
    let cut = padded.len() - p;
    format!("{sign}{}.{}", &padded[..cut], &padded[cut..])
}

/// The chain re-evaluated with every residue rounded before use, the way
/// a by-hand decimal computation would run it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedChain {
    pub steps: Vec<ChainStep>,
    pub result: Rational,
}

pub fn rounded_chain(cr: &ChainResult, precision: u32, mode: Rounding) -> RoundedChain {
    let parts = cr.partition.parts();
    let divisor = cr.partition.divisor();
    let mut rounded: Vec<Rational> = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        let raw = if i == 0 {
            &cr.dividend / ratio(part)
        } else if i == 1 {
            &rounded[0] * ratio(part) / ratio(divisor)
        } else {
            &rounded[i - 1] * ratio(part) / ratio(&parts[i - 1])
        };
        rounded.push(round_to(&raw, precision, mode));
    }
    let mut result = rounded[0].clone();
    for r in &rounded[1..] {
        result -= r;
    }
    let steps = rounded
        .into_iter()
        .zip(parts.iter().cloned())
        .enumerate()
        .map(|(i, (residue, divisor_part))| ChainStep {
            index: i + 1,
            divisor_part,
            residue,
        })
        .collect();
    RoundedChain { steps, result }
}

/// How far the rounded-mode result drifts from the exact one.
pub fn fit_residual(cr: &ChainResult, precision: u32, mode: Rounding) -> Rational {
    let rounded = rounded_chain(cr, precision, mode);
    (rounded.result - &cr.result).abs()
}

/// One row per step: index, part, residue as an exact fraction, and its
/// decimal rendering at the requested precision.
pub fn to_csv(cr: &ChainResult, precision: u32, mode: Rounding) -> String {
    let mut out =
        String::from("step,divisor_part,residue_numerator,residue_denominator,residue_decimal\n");
    for step in &cr.steps {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            step.index,
            step.divisor_part,
            step.residue.numer(),
            step.residue.denom(),
            decimal_string(&step.residue, precision, mode),
        ));
    }
    out
}
