//! Grid arithmetic over parted numbers.
//!
//! Numbers are split into single-digit parts that live on a bitwise grid:
//! rows are orders of magnitude, columns are digit values. Arithmetic is
//! done by moving parts around that grid and merging them with rote
//! single-digit lookups, and every step is narrated in a replayable trace.
//! A separate chain-division module rewrites one division as a divisor
//! chain and tracks how the partition behaves, and a conventional
//! big-integer oracle sits alongside purely for verification.
//!
//! Modules:
//! - [`numeral`]: parted numbers, parsing, normalization, alignment.
//! - [`grid`]: grid state, transposition moves, trace events, replay.
//! - [`arith`]: the four grid operators plus the rote digit tables.
//! - [`chain`]: divisor-chain division over exact rationals.
//! - [`oracle`]: independent reference arithmetic and case generation.
//! - [`expr`]: expression front end shared by the CLI and FFI surfaces.

pub mod arith;
pub mod chain;
pub mod expr;
pub mod grid;
pub mod numeral;
pub mod oracle;
