//! Grid arithmetic: rote digit tables and the four algorithms.
//!
//! All digit-level math inside the algorithms goes through [`DigitTables`],
//! lookup tables built once per base. The algorithms themselves only move,
//! merge, and split tagged entries on a [`GridState`], narrating every step
//! into a [`Trace`]:
//!
//! - addition places both operands and merges columns upward, splitting a
//!   carry whenever a column sum reaches the base;
//! - subtraction places the subtrahend negatively, cancels digit pairs from
//!   the top down, and borrows from the next occupied row above when a
//!   column comes up short, filling skipped rows with base-1 digits;
//! - multiplication walks multiplicand parts past each multiplier part,
//!   raising them by the multiplier's order before a table product splits
//!   into a low digit and a carry;
//! - division repeatedly lowers dividend parts as far as they stay at or
//!   above the divisor, emitting one quotient digit per lowering, and
//!   settles any stuck residue with a single direct table division.
//!
//! Fractional operands ride a grid shift (see [`crate::grid`]), so every
//! row is non-negative and the machinery never special-cases the radix
//! point.

use num_bigint::BigInt;
use thiserror::Error;

use crate::grid::{CellEntry, EventKind, GridState, Role, Trace};
use crate::numeral::{
    align_orders, compare_magnitude, BaseConfig, Part, PartedNumber, Sign, Tag, TagGen,
};
use crate::oracle::{from_integer, oracle_divmod, to_integer, BigInteger};

/// Rote digit facts for one base, precomputed with plain integer math and
/// consulted (never recomputed) by the algorithms.
#[derive(Debug, Clone)]
pub struct DigitTables {
    base: u32,
    add: Vec<(u32, u32)>,
    sub: Vec<(u32, u32)>,
    mul: Vec<(u32, u32)>,
    divmod: Vec<(u32, u32)>,
}

impl DigitTables {
    pub fn new(cfg: &BaseConfig) -> Self {
        let b = cfg.base();
        let mut add = Vec::with_capacity((b * b) as usize);
        let mut sub = Vec::with_capacity((b * b) as usize);
        let mut mul = Vec::with_capacity((b * b) as usize);
        for x in 0..b {
            for y in 0..b {
                add.push(((x + y) % b, (x + y) / b));
                sub.push(if x >= y { (x - y, 0) } else { (b + x - y, 1) });
                mul.push(((x * y) % b, (x * y) / b));
            }
        }
        let mut divmod = Vec::with_capacity((b * b * (b - 1)) as usize);
        for v in 0..b * b {
            for d in 1..b {
                divmod.push((v / d, v % d));
            }
        }
        Self {
            base: b,
            add,
            sub,
            mul,
            divmod,
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    fn pair(&self, x: u32, y: u32) -> usize {
        assert!(x < self.base && y < self.base, "digit out of range");
        (x * self.base + y) as usize
    }

    /// `(units digit, carry)` of x + y.
    pub fn add(&self, x: u32, y: u32) -> (u32, u32) {
        self.add[self.pair(x, y)]
    }

    /// `(units digit, borrow flag)` of x - y; the digit is `base + x - y`
    /// when the flag is set.
    pub fn sub(&self, x: u32, y: u32) -> (u32, u32) {
        self.sub[self.pair(x, y)]
    }

    /// `(units digit, carry digit)` of x * y.
    pub fn mul(&self, x: u32, y: u32) -> (u32, u32) {
        self.mul[self.pair(x, y)]
    }

    /// `(quotient, remainder)` of v / d for a value below base^2 and a
    /// single-digit divisor.
    pub fn divmod(&self, v: u32, d: u32) -> (u32, u32) {
        assert!(v < self.base * self.base, "value out of range");
        assert!(d >= 1 && d < self.base, "divisor out of range");
        self.divmod[(v * (self.base - 1) + (d - 1)) as usize]
    }
}

/// Which table a digit-level lookup consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitOp {
    Add,
    Sub,
    Mul,
    Divmod,
}

/// One table lookup. For `Divmod`, `x` is a value below base^2 and `y` a
/// single-digit divisor; otherwise both arguments are digits.
pub fn primitive_digit_op(
    tables: &DigitTables,
    op: DigitOp,
    x: u32,
    y: u32,
) -> Result<(u32, u32), ArithError> {
    let b = tables.base();
    let ok = match op {
        DigitOp::Divmod => x < b * b && (1..b).contains(&y),
        _ => x < b && y < b,
    };
    if !ok {
        return Err(ArithError::DigitOutOfRange { x, y, base: b });
    }
    Ok(match op {
        DigitOp::Add => tables.add(x, y),
        DigitOp::Sub => tables.sub(x, y),
        DigitOp::Mul => tables.mul(x, y),
        DigitOp::Divmod => tables.divmod(x, y),
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("operands use a different base than this engine")]
    BaseMismatch,
    #[error("operand is not in canonical form")]
    NotCanonical,
    #[error("division by zero")]
    ZeroDivisor,
    #[error("digit arguments {x}, {y} out of range for base {base}")]
    DigitOutOfRange { x: u32, y: u32, base: u32 },
}

/// Result of add, subtract, or multiply: the value, its narration, and the
/// final grid.
#[derive(Debug, Clone)]
pub struct OpOutput {
    pub value: PartedNumber,
    pub trace: Trace,
    pub state: GridState,
}

/// Result of divide: integer quotient, remainder (fractional when the
/// operands were), narration, final grid.
#[derive(Debug, Clone)]
pub struct DivisionOutput {
    pub quotient: PartedNumber,
    pub remainder: PartedNumber,
    pub trace: Trace,
    pub state: GridState,
}

/// Mutable context for one computation: grid, trace, and tag supply.
struct Run {
    state: GridState,
    trace: Trace,
    tags: TagGen,
}

/// Entry to be created inside a composite event.
struct Produced {
    row: u32,
    column: u32,
    sign: Sign,
    role: Role,
}

impl Run {
    fn new(cfg: BaseConfig, shift: u32) -> Self {
        Self {
            state: GridState::new(cfg, shift),
            trace: Trace::new(),
            tags: TagGen::new(),
        }
    }

    fn place_parts(&mut self, parts: &[Part], role: Role) {
        for part in parts {
            let event = self
                .state
                .place(part, role)
                .expect("canonical part placement cannot fail");
            self.trace.push(event);
        }
    }

    fn split_with_sign(&mut self, n: &PartedNumber, sign: Sign) -> Vec<Part> {
        n.parts()
            .iter()
            .map(|p| Part::new(p.digit, p.order, sign, self.tags.next_tag()))
            .collect()
    }

    fn move_entry(&mut self, tag: Tag, kind: EventKind, steps: u32) {
        let event = self
            .state
            .move_entry(tag, kind, steps)
            .expect("algorithm moves stay on the grid");
        self.trace.push(event);
    }

    /// Annotation-only sign flip: records a routing decision.
    fn annotate(&mut self, note: String) {
        let event = self
            .state
            .event(EventKind::SignFlip, vec![], vec![], vec![], note);
        self.trace.push(event);
    }

    /// Flips the sign of every listed entry in one event.
    fn flip_signs(&mut self, tags: Vec<Tag>, note: String) {
        let mut before = Vec::new();
        for &tag in &tags {
            let entry = self.state.find(tag).expect("flip of live entries only");
            before.push(entry.address);
            let entry = self.state.entry_mut(tag).expect("just found");
            entry.sign = entry.sign.flipped();
        }
        let after = before.clone();
        let event = self
            .state
            .event(EventKind::SignFlip, tags, before, after, note);
        self.trace.push(event);
    }

    fn remove(&mut self, tags: Vec<Tag>, note: String) {
        let mut before = Vec::new();
        for &tag in &tags {
            let entry = self.state.take(tag).expect("remove of live entries only");
            before.push(entry.address);
        }
        let event = self
            .state
            .event(EventKind::Remove, tags, before, vec![], note);
        self.trace.push(event);
    }

    /// Consumes `consumed`, creates `produced` with fresh tags, and emits a
    /// single event of `kind` covering both. Returns the new tags.
    fn composite(
        &mut self,
        kind: EventKind,
        consumed: Vec<Tag>,
        produced: Vec<Produced>,
        note: String,
    ) -> Vec<Tag> {
        let mut before = Vec::new();
        for &tag in &consumed {
            before.push(
                self.state
                    .take(tag)
                    .expect("composite consumes live entries")
                    .address,
            );
        }
        let mut after = Vec::new();
        let mut new_tags = Vec::new();
        for p in produced {
            let tag = self.tags.next_tag();
            let address = crate::grid::GridAddress::new(p.row, p.column);
            self.state.insert(CellEntry {
                tag,
                address,
                sign: p.sign,
                role: p.role,
            });
            after.push(address);
            new_tags.push(tag);
        }
        let mut subject = consumed;
        subject.extend(new_tags.iter().copied());
        let event = self.state.event(kind, subject, before, after, note);
        self.trace.push(event);
        new_tags
    }

    /// Direct placement at a row (used for borrow fills), bypassing the
    /// order arithmetic of ordinary placement.
    fn place_at(&mut self, row: u32, column: u32, sign: Sign, role: Role, note: String) -> Tag {
        let tag = self.tags.next_tag();
        let address = crate::grid::GridAddress::new(row, column);
        self.state.insert(CellEntry {
            tag,
            address,
            sign,
            role,
        });
        let event = self
            .state
            .event(EventKind::Place, vec![tag], vec![], vec![address], note);
        self.trace.push(event);
        tag
    }

    fn rejoin(&mut self, note: String) {
        let mut tags: Vec<Tag> = self.state.entries().iter().map(|e| e.tag).collect();
        tags.sort();
        let event = self
            .state
            .event(EventKind::Rejoin, tags, vec![], vec![], note);
        self.trace.push(event);
    }

    /// Extracts the grid content as a number; `keep` selects which entries
    /// belong to it.
    fn extract(&self, keep: impl Fn(&CellEntry) -> bool) -> PartedNumber {
        let shift = self.state.shift() as i32;
        let parts: Vec<Part> = self
            .state
            .entries()
            .iter()
            .filter(|e| keep(e))
            .map(|e| {
                Part::new(
                    e.address.column,
                    e.address.row as i32 - shift,
                    e.sign,
                    e.tag,
                )
            })
            .collect();
        PartedNumber::from_parts(self.state.config().clone(), parts)
    }
}

/// The arithmetic engine: one base, one set of tables.
pub struct Engine {
    cfg: BaseConfig,
    tables: DigitTables,
}

impl Engine {
    pub fn new(cfg: BaseConfig) -> Self {
        let tables = DigitTables::new(&cfg);
        Self { cfg, tables }
    }

    pub fn config(&self) -> &BaseConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &DigitTables {
        &self.tables
    }

    pub fn digit_op(&self, op: DigitOp, x: u32, y: u32) -> Result<(u32, u32), ArithError> {
        primitive_digit_op(&self.tables, op, x, y)
    }

    fn check_operand(&self, n: &PartedNumber) -> Result<(), ArithError> {
        if n.config() != &self.cfg {
            return Err(ArithError::BaseMismatch);
        }
        if !n.is_canonical() {
            return Err(ArithError::NotCanonical);
        }
        Ok(())
    }

    fn glyph(&self, d: u32) -> char {
        self.cfg.glyph(d)
    }

    /// Merges every row that holds two or more matching entries, from the
    /// bottom up, so later rows absorb the carries of earlier ones. Merged
    /// pairs of equal role keep it; mixed pairs become results.
    fn merge_pass(&self, run: &mut Run, want: impl Fn(&CellEntry) -> bool) {
        let mut row = 0u32;
        while row <= run.state.max_row() {
            loop {
                let mut here: Vec<CellEntry> = run
                    .state
                    .entries_at_row(row)
                    .filter(|e| want(e))
                    .copied()
                    .collect();
                if here.len() < 2 {
                    break;
                }
                here.sort_by(|a, b| {
                    a.address
                        .column
                        .cmp(&b.address.column)
                        .then(a.tag.cmp(&b.tag))
                });
                let (e1, e2) = (here[0], here[1]);
                debug_assert_eq!(e1.sign, e2.sign, "merge pass expects uniform signs");
                let sign = e1.sign;
                let role = if e1.role == e2.role {
                    e1.role
                } else {
                    Role::Result
                };
                let (d1, d2) = (e1.address.column, e2.address.column);
                let (digit, carry) = self.tables.add(d1, d2);
                let consumed = vec![e1.tag, e2.tag];
                if carry == 0 {
                    let mut produced = Vec::new();
                    if digit > 0 {
                        produced.push(Produced {
                            row,
                            column: digit,
                            sign,
                            role,
                        });
                    }
                    let note = format!(
                        "{} + {} = {}",
                        self.glyph(d1),
                        self.glyph(d2),
                        self.glyph(digit)
                    );
                    run.composite(EventKind::MergeAdd, consumed, produced, note);
                } else {
                    let mut produced = vec![Produced {
                        row: row + 1,
                        column: carry,
                        sign,
                        role,
                    }];
                    if digit > 0 {
                        produced.push(Produced {
                            row,
                            column: digit,
                            sign,
                            role,
                        });
                    }
                    let note = format!(
                        "{} + {} = {}{}",
                        self.glyph(d1),
                        self.glyph(d2),
                        self.glyph(carry),
                        self.glyph(digit)
                    );
                    run.composite(EventKind::CarrySplit, consumed, produced, note);
                }
            }
            row += 1;
        }
    }

    /// Addition. Opposite signs reroute to subtraction of magnitudes with
    /// the larger operand's sign applied at the end.
    pub fn add(&self, a: &PartedNumber, b: &PartedNumber) -> Result<OpOutput, ArithError> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        let shift = a.fractional_depth().max(b.fractional_depth());
        let mut run = Run::new(self.cfg.clone(), shift);
        match (a.sign(), b.sign()) {
            (Some(sa), Some(sb)) if sa != sb => {
                self.add_opposite(&mut run, a, b, sa, sb);
            }
            _ => {
                let pa = run.split_with_sign(a, a.sign().unwrap_or(Sign::Positive));
                let pb = run.split_with_sign(b, b.sign().unwrap_or(Sign::Positive));
                run.place_parts(&pa, Role::Operand);
                run.place_parts(&pb, Role::Addend);
                self.merge_pass(&mut run, |_| true);
            }
        }
        Ok(self.finish_op(run))
    }

    /// Subtraction, rerouted as addition of the negated second operand.
    pub fn subtract(&self, a: &PartedNumber, b: &PartedNumber) -> Result<OpOutput, ArithError> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        let b_neg = b.negated();
        let shift = a.fractional_depth().max(b.fractional_depth());
        let mut run = Run::new(self.cfg.clone(), shift);
        run.annotate("subtract: negate the second operand and add".to_string());
        match (a.sign(), b_neg.sign()) {
            (Some(sa), Some(sb)) if sa != sb => {
                self.add_opposite(&mut run, a, &b_neg, sa, sb);
            }
            _ => {
                let pa = run.split_with_sign(a, a.sign().unwrap_or(Sign::Positive));
                let pb = run.split_with_sign(&b_neg, b_neg.sign().unwrap_or(Sign::Positive));
                run.place_parts(&pa, Role::Operand);
                run.place_parts(&pb, Role::Addend);
                self.merge_pass(&mut run, |_| true);
            }
        }
        Ok(self.finish_op(run))
    }

    /// Opposite-sign addition: subtract the smaller magnitude from the
    /// larger and apply the larger operand's sign.
    fn add_opposite(&self, run: &mut Run, a: &PartedNumber, b: &PartedNumber, sa: Sign, sb: Sign) {
        let (ma, mb) = (a.magnitude(), b.magnitude());
        let (minuend, subtrahend, final_sign) = match compare_magnitude(&ma, &mb) {
            std::cmp::Ordering::Less => {
                run.annotate(
                    "opposite signs and the second magnitude is larger: swap and negate"
                        .to_string(),
                );
                (mb, ma, sb)
            }
            _ => {
                run.annotate("opposite signs: subtract the smaller magnitude".to_string());
                (ma, mb, sa)
            }
        };
        self.subtract_magnitudes(run, &minuend, &subtrahend);
        if final_sign.is_negative() {
            let tags: Vec<Tag> = run.state.entries().iter().map(|e| e.tag).collect();
            if !tags.is_empty() {
                run.flip_signs(
                    tags,
                    "apply the larger operand's sign: negative".to_string(),
                );
            }
        }
    }

    /// Magnitude subtraction core. The subtrahend rides the grid as
    /// negative entries; each is cancelled from the top down, borrowing
    /// when its column is short. A trailing pass reconciles any mixed signs
    /// left by columns that had nothing above to borrow from, so the core
    /// also accepts a minuend smaller than the subtrahend.
    fn subtract_magnitudes(
        &self,
        run: &mut Run,
        minuend: &PartedNumber,
        subtrahend: &PartedNumber,
    ) {
        let pm = run.split_with_sign(minuend, Sign::Positive);
        let ps = run.split_with_sign(subtrahend, Sign::Negative);
        run.place_parts(&pm, Role::Operand);
        run.place_parts(&ps, Role::Subtrahend);

        loop {
            let next = run
                .state
                .entries()
                .iter()
                .filter(|e| e.role == Role::Subtrahend)
                .max_by_key(|e| (e.address.row, std::cmp::Reverse(e.tag)))
                .map(|e| e.tag);
            match next {
                Some(tag) => {
                    self.settle_negative_entry(run, tag);
                }
                None => break,
            }
        }

        // Columns without a lender stored negative digits; trade them
        // against the positive rows below until one sign remains.
        loop {
            let has_neg = run.state.entries().iter().any(|e| e.sign.is_negative());
            let has_pos = run.state.entries().iter().any(|e| !e.sign.is_negative());
            if !(has_neg && has_pos) {
                break;
            }
            let mut rows: Vec<u32> = run.state.entries().iter().map(|e| e.address.row).collect();
            rows.sort_unstable();
            rows.dedup();
            rows.reverse();
            let pair = rows.windows(2).find_map(|w| {
                let hi = run
                    .state
                    .entries_at_row(w[0])
                    .find(|e| e.sign.is_negative())?;
                let lo = run
                    .state
                    .entries_at_row(w[1])
                    .find(|e| !e.sign.is_negative())?;
                Some((hi.tag, lo.tag, w[0], w[1]))
            });
            let (hi, lo, hi_row, lo_row) =
                pair.expect("mixed signs always leave a negative directly above a positive");
            run.flip_signs(
                vec![hi, lo],
                format!("reconcile rows {hi_row} and {lo_row}: flip, subtract, flip back"),
            );
            let touched = self.settle_negative_entry(run, lo);
            let alive: Vec<Tag> = touched
                .into_iter()
                .filter(|t| run.state.find(*t).is_some())
                .collect();
            if !alive.is_empty() {
                run.flip_signs(alive, "restore the difference as negative".to_string());
            }
        }
    }

    /// Cancels one negative entry against the positives, borrowing if its
    /// column is short. Returns the tags of every positive entry the step
    /// produced or modified, for the caller's sign bookkeeping.
    fn settle_negative_entry(&self, run: &mut Run, s_tag: Tag) -> Vec<Tag> {
        let s = *run.state.find(s_tag).expect("settling a live entry");
        let row = s.address.row;
        let d_s = s.address.column;
        let partner = run
            .state
            .entries_at_row(row)
            .filter(|e| e.tag != s_tag && !e.sign.is_negative())
            .min_by_key(|e| (e.address.column, e.tag))
            .copied();
        let mut touched = Vec::new();

        if let Some(m) = partner {
            let d_m = m.address.column;
            if d_m >= d_s {
                let (digit, borrow) = self.tables.sub(d_m, d_s);
                debug_assert_eq!(borrow, 0);
                let mut produced = Vec::new();
                if digit > 0 {
                    produced.push(Produced {
                        row,
                        column: digit,
                        sign: Sign::Positive,
                        role: Role::Result,
                    });
                }
                let note = format!(
                    "{} - {} = {}",
                    self.glyph(d_m),
                    self.glyph(d_s),
                    self.glyph(digit)
                );
                let out = run.composite(EventKind::MergeAdd, vec![m.tag, s_tag], produced, note);
                touched.extend(out);
                return touched;
            }
        }

        let d_m = partner.map(|m| m.address.column).unwrap_or(0);
        let lender = run
            .state
            .entries()
            .iter()
            .filter(|e| e.address.row > row && !e.sign.is_negative())
            .min_by_key(|e| (e.address.row, e.tag))
            .copied();

        match lender {
            Some(l) => {
                let l_row = l.address.row;
                let from = l.address;
                let to = crate::grid::GridAddress::new(l_row, from.column - 1);
                run.state.entry_mut(l.tag).expect("lender is live").address = to;
                let note = format!(
                    "borrow one from {}",
                    crate::grid::row_label(&self.cfg, l_row)
                );
                let event =
                    run.state
                        .event(EventKind::Borrow, vec![l.tag], vec![from], vec![to], note);
                run.trace.push(event);
                if to.column == 0 {
                    run.remove(vec![l.tag], "lender exhausted".to_string());
                } else {
                    touched.push(l.tag);
                }
                for fill_row in (row + 1)..l_row {
                    let fill = self.cfg.base() - 1;
                    let note = format!(
                        "borrow fill: {} at {}",
                        self.glyph(fill),
                        crate::grid::row_label(&self.cfg, fill_row)
                    );
                    let t = run.place_at(fill_row, fill, Sign::Positive, Role::Result, note);
                    touched.push(t);
                }
                let (digit, borrow) = self.tables.sub(d_m, d_s);
                debug_assert_eq!(borrow, 1);
                let consumed = match partner {
                    Some(m) => vec![m.tag, s_tag],
                    None => vec![s_tag],
                };
                let note = format!(
                    "{}{} - {} = {}",
                    self.glyph(1),
                    self.glyph(d_m),
                    self.glyph(d_s),
                    self.glyph(digit)
                );
                let produced = vec![Produced {
                    row,
                    column: digit,
                    sign: Sign::Positive,
                    role: Role::Result,
                }];
                let out = run.composite(EventKind::MergeAdd, consumed, produced, note);
                touched.extend(out);
            }
            None => {
                // Nothing to borrow from: store the shortfall negatively
                // for the reconciliation pass.
                let digit = d_s - d_m;
                let consumed = match partner {
                    Some(m) => vec![m.tag, s_tag],
                    None => vec![s_tag],
                };
                let note = format!(
                    "{} - {} = -{}",
                    self.glyph(d_m),
                    self.glyph(d_s),
                    self.glyph(digit)
                );
                let produced = vec![Produced {
                    row,
                    column: digit,
                    sign: Sign::Negative,
                    role: Role::Result,
                }];
                run.composite(EventKind::MergeAdd, consumed, produced, note);
            }
        }
        touched
    }

    /// Multiplication: for each multiplier part, raise every multiplicand
    /// part by its order and take the table product; merge afterwards.
    pub fn multiply(&self, a: &PartedNumber, b: &PartedNumber) -> Result<OpOutput, ArithError> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        let shift = a.fractional_depth() + b.fractional_depth();
        let mut run = Run::new(self.cfg.clone(), shift);
        if a.is_zero() || b.is_zero() {
            return Ok(self.finish_op(run));
        }
        let negative = a.sign() != b.sign();
        let (ma, mb) = (a.magnitude(), b.magnitude());

        for mp in mb.parts() {
            let m_part = Part::new(mp.digit, mp.order, Sign::Positive, run.tags.next_tag());
            run.place_parts(std::slice::from_ref(&m_part), Role::Multiplier);
            for xp in ma.parts() {
                let x_part = Part::new(xp.digit, xp.order, Sign::Positive, run.tags.next_tag());
                run.place_parts(std::slice::from_ref(&x_part), Role::Multiplicand);
                match mp.order.cmp(&0) {
                    std::cmp::Ordering::Greater => {
                        run.move_entry(x_part.tag, EventKind::MoveUp, mp.order as u32);
                    }
                    std::cmp::Ordering::Less => {
                        run.move_entry(x_part.tag, EventKind::MoveDown, mp.order.unsigned_abs());
                    }
                    std::cmp::Ordering::Equal => {}
                }
                let entry = *run.state.find(x_part.tag).expect("multiplicand is live");
                let row = entry.address.row;
                let (low, carry) = self.tables.mul(xp.digit, mp.digit);
                let mut produced = Vec::new();
                if carry > 0 {
                    produced.push(Produced {
                        row: row + 1,
                        column: carry,
                        sign: Sign::Positive,
                        role: Role::Result,
                    });
                }
                if low > 0 {
                    produced.push(Produced {
                        row,
                        column: low,
                        sign: Sign::Positive,
                        role: Role::Result,
                    });
                }
                let rendered = if carry > 0 {
                    format!("{}{}", self.glyph(carry), self.glyph(low))
                } else {
                    format!("{}", self.glyph(low))
                };
                let note = format!(
                    "{} × {} = {}",
                    self.glyph(xp.digit),
                    self.glyph(mp.digit),
                    rendered
                );
                run.composite(EventKind::Product, vec![x_part.tag], produced, note);
            }
            run.remove(vec![m_part.tag], "multiplier part consumed".to_string());
        }

        self.merge_pass(&mut run, |_| true);
        if negative {
            let tags: Vec<Tag> = run.state.entries().iter().map(|e| e.tag).collect();
            if !tags.is_empty() {
                run.flip_signs(tags, "apply the product sign: negative".to_string());
            }
        }
        Ok(self.finish_op(run))
    }

    /// Division with remainder. Both operands are scaled to integers by the
    /// grid shift; the quotient is always an integer and the remainder
    /// carries the shift back out (so it may be fractional).
    pub fn divide(&self, a: &PartedNumber, b: &PartedNumber) -> Result<DivisionOutput, ArithError> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        if b.is_zero() {
            return Err(ArithError::ZeroDivisor);
        }
        let negative_q = !a.is_zero() && a.sign() != b.sign();
        let negative_r = a.sign() == Some(Sign::Negative);
        let (ma, mb) = (a.magnitude(), b.magnitude());
        let (_, b_scaled, shift) = align_orders(&ma, &mb);
        let divisor_value = to_integer(&b_scaled).expect("aligned divisor is an integer");
        let divisor_digit = single_digit_value(&b_scaled);

        let mut run = Run::new(self.cfg.clone(), shift);
        let pb = run.split_with_sign(&mb, Sign::Positive);
        run.place_parts(&pb, Role::Divisor);
        let pa = run.split_with_sign(&ma, Sign::Positive);
        run.place_parts(&pa, Role::Dividend);

        loop {
            let dividend_now = run.extract(|e| e.role == Role::Dividend);
            let dividend_scaled = dividend_now.shifted(shift as i32);
            if compare_magnitude(&dividend_scaled, &b_scaled) == std::cmp::Ordering::Less {
                break;
            }

            let mut pass: Vec<CellEntry> = run
                .state
                .entries()
                .iter()
                .filter(|e| e.role == Role::Dividend)
                .copied()
                .collect();
            pass.sort_by(|a, b| {
                b.address
                    .row
                    .cmp(&a.address.row)
                    .then(b.address.column.cmp(&a.address.column))
                    .then(a.tag.cmp(&b.tag))
            });

            let mut progress = false;
            for entry in pass {
                if run.state.find(entry.tag).is_none() {
                    continue;
                }
                let row = entry.address.row;
                let digit = entry.address.column;
                let Some(drop) = max_drop(&self.cfg, digit, row, &b_scaled) else {
                    continue;
                };
                if drop > 0 {
                    run.move_entry(entry.tag, EventKind::MoveDown, drop);
                }
                let value = BigInt::from(digit) * BigInt::from(self.cfg.base()).pow(row - drop);
                let (q, rem) = self.small_divmod(&value, &divisor_value, divisor_digit);
                let mut produced = vec![Produced {
                    row: drop + shift,
                    column: q,
                    sign: Sign::Positive,
                    role: Role::Result,
                }];
                let rem_parts = from_integer(&rem, &self.cfg);
                for rp in rem_parts.parts() {
                    produced.push(Produced {
                        row: rp.order as u32 + drop,
                        column: rp.digit,
                        sign: Sign::Positive,
                        role: Role::Dividend,
                    });
                }
                let note = format!(
                    "{} / {} = {} r {}",
                    render_scaled(&self.cfg, digit, row - drop),
                    b_scaled.rejoin().expect("divisor renders"),
                    self.glyph(q),
                    rem_parts.rejoin().expect("remainder renders"),
                );
                run.composite(EventKind::DividePart, vec![entry.tag], produced, note);
                progress = true;
            }

            self.merge_pass(&mut run, |e| e.role == Role::Dividend);

            if !progress {
                // Every part alone sits below the divisor while the total
                // does not: one direct table division settles it.
                let dividend_tags: Vec<Tag> = run
                    .state
                    .entries()
                    .iter()
                    .filter(|e| e.role == Role::Dividend)
                    .map(|e| e.tag)
                    .collect();
                let total: BigInt = run
                    .state
                    .entries()
                    .iter()
                    .filter(|e| e.role == Role::Dividend)
                    .map(|e| {
                        BigInt::from(e.address.column)
                            * BigInt::from(self.cfg.base()).pow(e.address.row)
                    })
                    .sum();
                let (q, rem) = self.small_divmod(&total, &divisor_value, divisor_digit);
                let mut produced = vec![Produced {
                    row: shift,
                    column: q,
                    sign: Sign::Positive,
                    role: Role::Result,
                }];
                let rem_parts = from_integer(&rem, &self.cfg);
                for rp in rem_parts.parts() {
                    produced.push(Produced {
                        row: rp.order as u32,
                        column: rp.digit,
                        sign: Sign::Positive,
                        role: Role::Dividend,
                    });
                }
                let note = format!(
                    "direct: {} / {} = {} r {}",
                    from_integer(&total, &self.cfg)
                        .rejoin()
                        .expect("total renders"),
                    b_scaled.rejoin().expect("divisor renders"),
                    self.glyph(q),
                    rem_parts.rejoin().expect("remainder renders"),
                );
                run.composite(EventKind::DirectDivision, dividend_tags, produced, note);
                break;
            }
        }

        self.merge_pass(&mut run, |e| e.role == Role::Result);

        if negative_q {
            let tags: Vec<Tag> = run
                .state
                .entries()
                .iter()
                .filter(|e| e.role == Role::Result)
                .map(|e| e.tag)
                .collect();
            if !tags.is_empty() {
                run.flip_signs(tags, "apply the quotient sign: negative".to_string());
            }
        }
        if negative_r {
            let tags: Vec<Tag> = run
                .state
                .entries()
                .iter()
                .filter(|e| e.role == Role::Dividend)
                .map(|e| e.tag)
                .collect();
            if !tags.is_empty() {
                run.flip_signs(tags, "apply the remainder sign: negative".to_string());
            }
        }

        let quotient = run.extract(|e| e.role == Role::Result);
        let remainder = run.extract(|e| e.role == Role::Dividend);
        let q_text = quotient.rejoin().expect("quotient renders");
        let r_text = remainder.rejoin().expect("remainder renders");
        run.rejoin(format!("rejoin: q={q_text}, r={r_text}"));
        Ok(DivisionOutput {
            quotient,
            remainder,
            trace: run.trace,
            state: run.state,
        })
    }

    /// Table division when the divisor is a single digit, arbitrary-width
    /// division otherwise. Quotients here are always a single digit.
    fn small_divmod(
        &self,
        value: &BigInt,
        divisor: &BigInteger,
        divisor_digit: Option<u32>,
    ) -> (u32, BigInt) {
        if let Some(d) = divisor_digit {
            let v = u32::try_from(value.clone()).expect("single-digit division stays below base^2");
            let (q, r) = self.tables.divmod(v, d);
            (q, BigInt::from(r))
        } else {
            let (q, r) = oracle_divmod(value, divisor).expect("divisor is non-zero");
            let q = u32::try_from(q).expect("per-part quotients are single digits");
            debug_assert!(q < self.cfg.base());
            (q, r)
        }
    }

    fn finish_op(&self, mut run: Run) -> OpOutput {
        self.merge_pass(&mut run, |_| true);
        let value = run.extract(|_| true);
        let text = value.rejoin().expect("grid results are canonical");
        run.rejoin(format!("rejoin: {text}"));
        OpOutput {
            value,
            trace: run.trace,
            state: run.state,
        }
    }

    /// Test-only entry to the subtraction core without the magnitude
    /// pre-swap, so the reconciliation pass is reachable directly.
    #[cfg(test)]
    pub(crate) fn subtract_magnitudes_raw(
        &self,
        minuend: &PartedNumber,
        subtrahend: &PartedNumber,
    ) -> OpOutput {
        let shift = minuend
            .fractional_depth()
            .max(subtrahend.fractional_depth());
        let mut run = Run::new(self.cfg.clone(), shift);
        self.subtract_magnitudes(&mut run, minuend, subtrahend);
        let value = run.extract(|_| true);
        let text = value.rejoin().expect("grid results are canonical");
        run.rejoin(format!("rejoin: {text}"));
        OpOutput {
            value,
            trace: run.trace,
            state: run.state,
        }
    }
}

/// The divisor's value when it is a single digit at order zero.
fn single_digit_value(scaled: &PartedNumber) -> Option<u32> {
    match scaled.parts() {
        [p] if p.order == 0 => Some(p.digit),
        _ => None,
    }
}

/// Digit followed by `zeros` zero glyphs: the scaled value of one entry.
fn render_scaled(cfg: &BaseConfig, digit: u32, zeros: u32) -> String {
    let mut s = String::new();
    s.push(cfg.glyph(digit));
    for _ in 0..zeros {
        s.push(cfg.glyph(0));
    }
    s
}

/// Largest number of rows a dividend entry can drop while remaining at or
/// above the divisor (both in the scaled domain); `None` when even its
/// current row is below the divisor.
fn max_drop(cfg: &BaseConfig, digit: u32, row: u32, divisor_scaled: &PartedNumber) -> Option<u32> {
    let at_least = |r: u32| {
        let probe = PartedNumber::from_parts(
            cfg.clone(),
            vec![Part::new(digit, r as i32, Sign::Positive, Tag(0))],
        );
        compare_magnitude(&probe, divisor_scaled) != std::cmp::Ordering::Less
    };
    if !at_least(row) {
        return None;
    }
    let mut drop = 0;
    while drop < row && at_least(row - drop - 1) {
        drop += 1;
    }
    Some(drop)
}
