//! The bitwise grid and its trace machinery.
//!
//! A grid is a table whose rows are orders of magnitude (row 0 at the
//! bottom) and whose columns are digit values `0..base`. A cell may hold
//! any number of entries; each entry is one tagged digit with a sign and a
//! role. Values move by transposition: one column right or left adds or
//! subtracts at that order, one row up or down multiplies or divides by
//! the base. A `grid_shift` lets fractional numbers ride the same
//! non-negative rows: an entry on row `r` contributes
//! `sign * column * base^(r - shift)`.
//!
//! Every mutation is narrated as a [`TraceEvent`] carrying a full snapshot,
//! and [`replay`] rebuilds the final state from the event list alone while
//! checking each step for consistency, so a trace is evidence rather than
//! commentary. Events serialize to JSON with a fixed key order:
//! `{step, kind, subject, before, after, note, grid: {shift, entries}}`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::numeral::{BaseConfig, Part, Sign, Tag};

/// Row and column of one cell. Rows grow upward, columns are digit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridAddress {
    pub row: u32,
    pub column: u32,
}

impl GridAddress {
    pub fn new(row: u32, column: u32) -> Self {
        Self { row, column }
    }
}

/// What an entry is doing in the computation, for trace readability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Operand,
    Addend,
    Subtrahend,
    Multiplier,
    Multiplicand,
    Dividend,
    Divisor,
    Result,
}

/// One tagged digit sitting in a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellEntry {
    pub tag: Tag,
    pub address: GridAddress,
    pub sign: Sign,
    pub role: Role,
}

/// Serialized form of an entry inside an event snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EntryRecord {
    pub row: u32,
    pub column: u32,
    pub sign: Sign,
    pub tag: Tag,
    pub role: Role,
}

/// Snapshot of a whole grid, entries in canonical order
/// (row descending, column ascending, tag ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub shift: u32,
    pub entries: Vec<EntryRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Place,
    MoveRight,
    MoveLeft,
    MoveUp,
    MoveDown,
    MergeAdd,
    Borrow,
    CarrySplit,
    SignFlip,
    Remove,
    Rejoin,
    Product,
    DividePart,
    DirectDivision,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Place => "place",
            EventKind::MoveRight => "move_right",
            EventKind::MoveLeft => "move_left",
            EventKind::MoveUp => "move_up",
            EventKind::MoveDown => "move_down",
            EventKind::MergeAdd => "merge_add",
            EventKind::Borrow => "borrow",
            EventKind::CarrySplit => "carry_split",
            EventKind::SignFlip => "sign_flip",
            EventKind::Remove => "remove",
            EventKind::Rejoin => "rejoin",
            EventKind::Product => "product",
            EventKind::DividePart => "divide_part",
            EventKind::DirectDivision => "direct_division",
        }
    }
}

/// One narrated step. `subject` lists the tags involved, `before`/`after`
/// the addresses they left and reached where that applies, and `grid` is
/// the full post-state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub kind: EventKind,
    pub subject: Vec<Tag>,
    pub before: Vec<GridAddress>,
    pub after: Vec<GridAddress>,
    pub note: String,
    pub grid: Snapshot,
}

/// Ordered event list for one computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mut event: TraceEvent) {
        event.step = self.events.len();
        self.events.push(event);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON object per line, schema key order preserved.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events always serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("order {order} with shift {shift} falls below the grid floor")]
    RowBelowGrid { order: i32, shift: u32 },
    #[error("digit {digit} cannot occupy a column in base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
    #[error("no entry tagged {0}")]
    UnknownTag(Tag),
    #[error("edge: {kind:?} by {steps} from row {row} column {column} leaves the grid")]
    Edge {
        kind: EventKind,
        steps: u32,
        row: u32,
        column: u32,
    },
    #[error("move of zero steps")]
    ZeroSteps,
}

/// Live grid: base, shift, and the entry multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridState {
    cfg: BaseConfig,
    shift: u32,
    entries: Vec<CellEntry>,
}

impl GridState {
    pub fn new(cfg: BaseConfig, shift: u32) -> Self {
        Self {
            cfg,
            shift,
            entries: Vec::new(),
        }
    }

    pub fn config(&self) -> &BaseConfig {
        &self.cfg
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn entries(&self) -> &[CellEntry] {
        &self.entries
    }

    pub fn find(&self, tag: Tag) -> Option<&CellEntry> {
        self.entries.iter().find(|e| e.tag == tag)
    }

    pub fn entries_at_row(&self, row: u32) -> impl Iterator<Item = &CellEntry> {
        self.entries.iter().filter(move |e| e.address.row == row)
    }

    pub fn max_row(&self) -> u32 {
        self.entries
            .iter()
            .map(|e| e.address.row)
            .max()
            .unwrap_or(0)
    }

    /// Signed total in the scaled domain: sum of sign * column * base^row.
    /// Divide by base^shift to read the represented value.
    pub fn scaled_value(&self) -> BigInt {
        let base = BigInt::from(self.cfg.base());
        let mut total = BigInt::from(0);
        for e in &self.entries {
            let term = BigInt::from(e.address.column) * base.pow(e.address.row);
            if e.sign.is_negative() {
                total -= term;
            } else {
                total += term;
            }
        }
        total
    }

    fn canonical_records(&self) -> Vec<EntryRecord> {
        let mut recs: Vec<EntryRecord> = self
            .entries
            .iter()
            .map(|e| EntryRecord {
                row: e.address.row,
                column: e.address.column,
                sign: e.sign,
                tag: e.tag,
                role: e.role,
            })
            .collect();
        recs.sort_by(|a, b| {
            b.row
                .cmp(&a.row)
                .then(a.column.cmp(&b.column))
                .then(a.tag.cmp(&b.tag))
        });
        recs
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            shift: self.shift,
            entries: self.canonical_records(),
        }
    }

    /// Builds an event around the current (post-mutation) state.
    pub fn event(
        &self,
        kind: EventKind,
        subject: Vec<Tag>,
        before: Vec<GridAddress>,
        after: Vec<GridAddress>,
        note: String,
    ) -> TraceEvent {
        TraceEvent {
            step: 0,
            kind,
            subject,
            before,
            after,
            note,
            grid: self.snapshot(),
        }
    }

    /// Row for a part order under this grid's shift.
    pub fn row_of(&self, order: i32) -> Result<u32, GridError> {
        let row = i64::from(order) + i64::from(self.shift);
        u32::try_from(row).map_err(|_| GridError::RowBelowGrid {
            order,
            shift: self.shift,
        })
    }

    pub(crate) fn insert(&mut self, entry: CellEntry) {
        self.entries.push(entry);
    }

    pub(crate) fn take(&mut self, tag: Tag) -> Result<CellEntry, GridError> {
        let ix = self
            .entries
            .iter()
            .position(|e| e.tag == tag)
            .ok_or(GridError::UnknownTag(tag))?;
        Ok(self.entries.remove(ix))
    }

    pub(crate) fn entry_mut(&mut self, tag: Tag) -> Result<&mut CellEntry, GridError> {
        self.entries
            .iter_mut()
            .find(|e| e.tag == tag)
            .ok_or(GridError::UnknownTag(tag))
    }

    /// Places one canonical part. Row comes from the part's order plus the
    /// grid shift; the column is the digit itself.
    pub fn place(&mut self, part: &Part, role: Role) -> Result<TraceEvent, GridError> {
        if part.digit == 0 || part.digit >= self.cfg.base() {
            return Err(GridError::DigitOutOfRange {
                digit: part.digit,
                base: self.cfg.base(),
            });
        }
        let row = self.row_of(part.order)?;
        let address = GridAddress::new(row, part.digit);
        self.insert(CellEntry {
            tag: part.tag,
            address,
            sign: part.sign,
            role,
        });
        let note = format!(
            "place {} {} at {} as {}",
            part.sign,
            self.cfg.glyph(part.digit),
            row_label(&self.cfg, row),
            role_name(role),
        );
        Ok(self.event(
            EventKind::Place,
            vec![part.tag],
            vec![],
            vec![address],
            note,
        ))
    }

    /// One transposition. Right and left shift the digit at the same order;
    /// up and down scale by the base. Crossing the right or left column
    /// edge or the grid floor is reported as a distinct edge signal for the
    /// caller to convert into a carry or borrow.
    pub fn move_entry(
        &mut self,
        tag: Tag,
        kind: EventKind,
        steps: u32,
    ) -> Result<TraceEvent, GridError> {
        if steps == 0 {
            return Err(GridError::ZeroSteps);
        }
        let base = self.cfg.base();
        let entry = self.find(tag).ok_or(GridError::UnknownTag(tag))?;
        let GridAddress { row, column } = entry.address;
        let edge = |kind| GridError::Edge {
            kind,
            steps,
            row,
            column,
        };
        let target = match kind {
            EventKind::MoveRight => {
                if column + steps >= base {
                    return Err(edge(kind));
                }
                GridAddress::new(row, column + steps)
            }
            EventKind::MoveLeft => {
                if steps > column {
                    return Err(edge(kind));
                }
                GridAddress::new(row, column - steps)
            }
            EventKind::MoveUp => GridAddress::new(row + steps, column),
            EventKind::MoveDown => {
                if steps > row {
                    return Err(edge(kind));
                }
                GridAddress::new(row - steps, column)
            }
            other => panic!("move_entry called with non-move kind {other:?}"),
        };
        let before = entry.address;
        self.entry_mut(tag)?.address = target;
        let note = match kind {
            EventKind::MoveRight => format!(
                "move right {steps}: add {steps} at {}",
                row_label(&self.cfg, row)
            ),
            EventKind::MoveLeft => format!(
                "move left {steps}: subtract {steps} at {}",
                row_label(&self.cfg, row)
            ),
            EventKind::MoveUp => format!("move up {steps}: value times base^{steps}"),
            EventKind::MoveDown => format!("move down {steps}: value divided by base^{steps}"),
            _ => unreachable!(),
        };
        Ok(self.event(kind, vec![tag], vec![before], vec![target], note))
    }
}

/// Human label for a row: Units, then powers of the base in decimal while
/// they stay at or below 10^8, then exponent notation.
pub fn row_label(cfg: &BaseConfig, row: u32) -> String {
    if row == 0 {
        return "Units".to_string();
    }
    let base = cfg.base() as u128;
    let mut value: u128 = 1;
    for _ in 0..row {
        value = match value.checked_mul(base) {
            Some(v) if v <= 100_000_000 => v,
            _ => return format!("{}^{}'s", cfg.base(), row),
        };
    }
    format!("{value}'s")
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Operand => "operand",
        Role::Addend => "addend",
        Role::Subtrahend => "subtrahend",
        Role::Multiplier => "multiplier",
        Role::Multiplicand => "multiplicand",
        Role::Dividend => "dividend",
        Role::Divisor => "divisor",
        Role::Result => "result",
    }
}

/// Fixed-width text rendering: highest occupied row down to the Units row,
/// each occupied cell marked with one sign glyph per entry. A non-zero
/// shift is stated on the first line.
pub fn render_text(state: &GridState) -> String {
    let cfg = state.config();
    let base = cfg.base();
    let top = state.max_row();

    let mut cells = vec![vec![String::new(); base as usize]; (top + 1) as usize];
    for rec in state.snapshot().entries {
        cells[rec.row as usize][rec.column as usize].push_str(&rec.sign.to_string());
    }
    for row in cells.iter_mut() {
        for cell in row.iter_mut() {
            if cell.is_empty() {
                cell.push('.');
            }
        }
    }

    let labels: Vec<String> = (0..=top).map(|r| row_label(cfg, r)).collect();
    let label_w = labels.iter().map(|l| l.len()).max().unwrap_or(0);
    let cell_w = cells
        .iter()
        .flatten()
        .map(|c| c.len())
        .max()
        .unwrap_or(1)
        .max(1);

    let mut out = String::new();
    if state.shift() > 0 {
        let _ = writeln!(out, "shift: {}", state.shift());
    }
    let header: Vec<String> = (0..base)
        .map(|d| format!("{:>cell_w$}", cfg.glyph(d)))
        .collect();
    let _ = writeln!(out, "{:>label_w$}  {}", "", header.join(" "));
    for row in (0..=top).rev() {
        let line: Vec<String> = cells[row as usize]
            .iter()
            .map(|c| format!("{c:>cell_w$}"))
            .collect();
        let _ = writeln!(
            out,
            "{:>label_w$}  {}",
            labels[row as usize],
            line.join(" ")
        );
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: {reason}")]
    Inconsistent { step: usize, reason: String },
}

fn fail(step: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError::Inconsistent {
        step,
        reason: reason.into(),
    }
}

/// Rebuilds the final grid by applying each event to an empty grid,
/// validating along the way:
///
/// - untouched entries never change;
/// - every snapshot matches the reconstructed state byte for byte;
/// - move events respect transposition semantics (same row for horizontal
///   moves with the stated column delta, same column for vertical ones);
/// - merges and carries conserve the signed scaled value, except that the
///   merge closing a borrow restores the value recorded when the borrow
///   opened (the lent unit is in flight between those two events).
pub fn replay(trace: &Trace, cfg: &BaseConfig) -> Result<GridState, ReplayError> {
    let shift = trace.events().first().map(|e| e.grid.shift).unwrap_or(0);
    let mut state = GridState::new(cfg.clone(), shift);
    let mut borrow_window: Option<BigInt> = None;

    for event in trace.events() {
        let step = event.step;
        let prev_entries = state.entries.clone();
        let value_before = state.scaled_value();
        apply_event(&mut state, event)?;

        // Entries outside the subject list must be untouched.
        for old in &prev_entries {
            if event.subject.contains(&old.tag) {
                continue;
            }
            match state.find(old.tag) {
                Some(now) if now == old => {}
                _ => {
                    return Err(fail(
                        step,
                        format!("entry {} changed without being a subject", old.tag),
                    ))
                }
            }
        }

        let value_after = state.scaled_value();
        match event.kind {
            EventKind::MergeAdd | EventKind::CarrySplit => {
                if let Some(opened_at) = borrow_window.take() {
                    if value_after != opened_at {
                        return Err(fail(
                            step,
                            "merge closing a borrow does not restore the pre-borrow value",
                        ));
                    }
                } else if value_after != value_before {
                    return Err(fail(step, "merge or carry changed the grid value"));
                }
            }
            EventKind::Borrow => {
                if borrow_window.is_some() {
                    return Err(fail(step, "nested borrow"));
                }
                borrow_window = Some(value_before);
            }
            _ => {}
        }

        if state.snapshot() != event.grid {
            return Err(fail(step, "snapshot disagrees with reconstructed state"));
        }
    }
    Ok(state)
}

fn apply_event(state: &mut GridState, event: &TraceEvent) -> Result<(), ReplayError> {
    let step = event.step;
    let post: std::collections::HashMap<Tag, EntryRecord> =
        event.grid.entries.iter().map(|r| (r.tag, *r)).collect();

    match event.kind {
        EventKind::Place => {
            let tag = *single(&event.subject, step, "place subject")?;
            let address = *single(&event.after, step, "place target")?;
            let rec = post
                .get(&tag)
                .ok_or_else(|| fail(step, "placed entry missing from snapshot"))?;
            if (rec.row, rec.column) != (address.row, address.column) {
                return Err(fail(step, "place address disagrees with snapshot"));
            }
            if state.find(tag).is_some() {
                return Err(fail(step, "place reuses a live tag"));
            }
            state.insert(CellEntry {
                tag,
                address,
                sign: rec.sign,
                role: rec.role,
            });
        }
        EventKind::MoveRight | EventKind::MoveLeft | EventKind::MoveUp | EventKind::MoveDown => {
            let tag = *single(&event.subject, step, "move subject")?;
            let from = *single(&event.before, step, "move source")?;
            let to = *single(&event.after, step, "move target")?;
            let entry = state
                .find(tag)
                .copied()
                .ok_or_else(|| fail(step, "move of unknown entry"))?;
            if entry.address != from {
                return Err(fail(step, "move source disagrees with state"));
            }
            let ok = match event.kind {
                EventKind::MoveRight => to.row == from.row && to.column > from.column,
                EventKind::MoveLeft => to.row == from.row && to.column < from.column,
                EventKind::MoveUp => to.column == from.column && to.row > from.row,
                EventKind::MoveDown => to.column == from.column && to.row < from.row,
                _ => unreachable!(),
            };
            if !ok {
                return Err(fail(step, "move target violates transposition semantics"));
            }
            if to.column >= state.config().base() {
                return Err(fail(step, "move target column out of range"));
            }
            state
                .entry_mut(tag)
                .map_err(|_| fail(step, "move of unknown entry"))?
                .address = to;
        }
        EventKind::SignFlip => {
            // Empty subject is a pure annotation (an operation rerouting).
            for &tag in &event.subject {
                let entry = state
                    .entry_mut(tag)
                    .map_err(|_| fail(step, "sign flip of unknown entry"))?;
                entry.sign = entry.sign.flipped();
            }
        }
        EventKind::Remove => {
            for &tag in &event.subject {
                state
                    .take(tag)
                    .map_err(|_| fail(step, "remove of unknown entry"))?;
            }
        }
        EventKind::Borrow => {
            let tag = *single(&event.subject, step, "borrow subject")?;
            let from = *single(&event.before, step, "borrow source")?;
            let to = *single(&event.after, step, "borrow target")?;
            if !(to.row == from.row && from.column == to.column + 1) {
                return Err(fail(step, "borrow must move its lender one column left"));
            }
            let entry = state
                .entry_mut(tag)
                .map_err(|_| fail(step, "borrow from unknown entry"))?;
            if entry.address != from {
                return Err(fail(step, "borrow source disagrees with state"));
            }
            entry.address = to;
        }
        EventKind::MergeAdd
        | EventKind::CarrySplit
        | EventKind::Product
        | EventKind::DividePart
        | EventKind::DirectDivision => {
            // Subjects split into consumed and produced by snapshot
            // membership; structural counts are kind-specific.
            let mut consumed = 0usize;
            let mut produced = 0usize;
            for &tag in &event.subject {
                if state.find(tag).is_some() {
                    if post.contains_key(&tag) {
                        return Err(fail(step, "subject entry survives its own merge"));
                    }
                    state.take(tag).expect("presence just checked");
                    consumed += 1;
                } else {
                    let rec = post
                        .get(&tag)
                        .ok_or_else(|| fail(step, "produced entry missing from snapshot"))?;
                    state.insert(CellEntry {
                        tag,
                        address: GridAddress::new(rec.row, rec.column),
                        sign: rec.sign,
                        role: rec.role,
                    });
                    produced += 1;
                }
            }
            let counts_ok = match event.kind {
                EventKind::MergeAdd => (1..=2).contains(&consumed) && produced <= 1,
                EventKind::CarrySplit => consumed == 2 && (1..=2).contains(&produced),
                EventKind::Product => consumed == 1 && produced <= 2,
                EventKind::DividePart => consumed == 1 && produced >= 1,
                EventKind::DirectDivision => consumed >= 1 && produced >= 1,
                _ => unreachable!(),
            };
            if !counts_ok {
                return Err(fail(
                    step,
                    format!(
                        "{} consumed {consumed} and produced {produced} entries",
                        event.kind.name()
                    ),
                ));
            }
        }
        EventKind::Rejoin => {
            // Bookkeeping only; the snapshot must equal the prior state,
            // which the caller's snapshot comparison enforces.
        }
    }
    Ok(())
}

fn single<'a, T>(items: &'a [T], step: usize, what: &str) -> Result<&'a T, ReplayError> {
    if items.len() == 1 {
        Ok(&items[0])
    } else {
        Err(fail(step, format!("{what} expects exactly one item")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeral::{parse_numeral, TagGen};

    fn base10() -> BaseConfig {
        BaseConfig::new(10).unwrap()
    }

    fn place_all(
        state: &mut GridState,
        trace: &mut Trace,
        gen: &mut TagGen,
        text: &str,
        role: Role,
    ) {
        let n = parse_numeral(text, state.config()).unwrap();
        for part in n.split_parts(gen) {
            trace.push(state.place(&part, role).unwrap());
        }
    }

    #[test]
    fn placement_row_is_order_plus_shift() {
        let mut state = GridState::new(base10(), 2);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "0.7", Role::Operand);
        place_all(&mut state, &mut trace, &mut gen, "0.05", Role::Addend);
        let rows: Vec<(u32, u32)> = state
            .entries()
            .iter()
            .map(|e| (e.address.row, e.address.column))
            .collect();
        assert_eq!(rows, vec![(1, 7), (0, 5)]);
    }

    #[test]
    fn placement_below_floor_is_an_error() {
        let mut state = GridState::new(base10(), 0);
        let mut gen = TagGen::new();
        let part = Part::new(2, -1, Sign::Positive, gen.next_tag());
        assert_eq!(
            state.place(&part, Role::Operand),
            Err(GridError::RowBelowGrid {
                order: -1,
                shift: 0
            })
        );
    }

    #[test]
    fn moves_follow_transposition_semantics() {
        let mut state = GridState::new(base10(), 0);
        let mut gen = TagGen::new();
        let part = Part::new(2, 1, Sign::Positive, gen.next_tag());
        state.place(&part, Role::Operand).unwrap();
        assert_eq!(state.scaled_value(), BigInt::from(20));

        state.move_entry(part.tag, EventKind::MoveRight, 3).unwrap();
        assert_eq!(state.scaled_value(), BigInt::from(50));
        state.move_entry(part.tag, EventKind::MoveUp, 2).unwrap();
        assert_eq!(state.scaled_value(), BigInt::from(5000));
        state.move_entry(part.tag, EventKind::MoveDown, 1).unwrap();
        assert_eq!(state.scaled_value(), BigInt::from(500));
        state.move_entry(part.tag, EventKind::MoveLeft, 4).unwrap();
        assert_eq!(state.scaled_value(), BigInt::from(100));
    }

    #[test]
    fn edges_are_distinct_signals() {
        let mut state = GridState::new(base10(), 0);
        let mut gen = TagGen::new();
        let part = Part::new(8, 0, Sign::Positive, gen.next_tag());
        state.place(&part, Role::Operand).unwrap();

        let right = state.move_entry(part.tag, EventKind::MoveRight, 5);
        assert!(matches!(right, Err(GridError::Edge { .. })), "{right:?}");
        let down = state.move_entry(part.tag, EventKind::MoveDown, 1);
        assert!(matches!(down, Err(GridError::Edge { .. })), "{down:?}");
        let left = state.move_entry(part.tag, EventKind::MoveLeft, 9);
        assert!(matches!(left, Err(GridError::Edge { .. })), "{left:?}");
        // Up has no edge.
        assert!(state.move_entry(part.tag, EventKind::MoveUp, 30).is_ok());
    }

    #[test]
    fn render_empty_grid() {
        let state = GridState::new(base10(), 0);
        let text = render_text(&state);
        assert_eq!(
            text,
            "       0 1 2 3 4 5 6 7 8 9\nUnits  . . . . . . . . . .\n"
        );
    }

    #[test]
    fn render_marks_counts_and_signs() {
        let mut state = GridState::new(base10(), 0);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "55", Role::Operand);
        place_all(&mut state, &mut trace, &mut gen, "150", Role::Addend);
        let text = render_text(&state);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].trim_start(), "0  1  2  3  4  5  6  7  8  9");
        assert!(lines[1].starts_with("100's"));
        assert!(lines[1].contains('+'), "100's row holds the 1 of 150");
        // The 10's cell for digit 5 is doubly occupied.
        assert!(lines[2].contains("++"), "{text}");
        assert!(lines[3].starts_with("Units"));
    }

    #[test]
    fn render_shows_shift() {
        let state = GridState::new(base10(), 2);
        assert!(render_text(&state).starts_with("shift: 2\n"));
    }

    #[test]
    fn row_labels_decimal_then_exponent() {
        let cfg = base10();
        assert_eq!(row_label(&cfg, 0), "Units");
        assert_eq!(row_label(&cfg, 1), "10's");
        assert_eq!(row_label(&cfg, 8), "100000000's");
        assert_eq!(row_label(&cfg, 9), "10^9's");
        let b2 = BaseConfig::new(2).unwrap();
        assert_eq!(row_label(&b2, 3), "8's");
        assert_eq!(row_label(&b2, 40), "2^40's");
    }

    #[test]
    fn trace_json_schema_key_order() {
        let mut state = GridState::new(base10(), 0);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "5", Role::Operand);
        let line = trace.to_jsonl();
        let keys = [
            "\"step\"",
            "\"kind\"",
            "\"subject\"",
            "\"before\"",
            "\"after\"",
            "\"note\"",
            "\"grid\"",
        ];
        let mut last = 0;
        for k in keys {
            let at = line.find(k).unwrap_or_else(|| panic!("missing {k}"));
            assert!(at >= last, "{k} out of order in {line}");
            last = at;
        }
        let grid_at = line.find("\"grid\"").unwrap();
        for k in [
            "\"shift\"",
            "\"row\"",
            "\"column\"",
            "\"sign\"",
            "\"tag\"",
            "\"role\"",
        ] {
            assert!(line[grid_at..].contains(k), "missing {k} in {line}");
        }
        assert!(line.contains("\"kind\":\"place\""));
        assert!(line.contains("\"sign\":\"+\""));
        assert!(line.contains("\"tag\":\"t0\""));
    }

    #[test]
    fn replay_rebuilds_and_validates() {
        let cfg = base10();
        let mut state = GridState::new(cfg.clone(), 0);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "55", Role::Operand);
        place_all(&mut state, &mut trace, &mut gen, "150", Role::Addend);
        let tag = state.entries()[2].tag;
        trace.push(state.move_entry(tag, EventKind::MoveUp, 1).unwrap());

        let rebuilt = replay(&trace, &cfg).unwrap();
        assert_eq!(render_text(&rebuilt), render_text(&state));
        assert_eq!(rebuilt.scaled_value(), state.scaled_value());
    }

    #[test]
    fn replay_rejects_tampered_snapshots() {
        let cfg = base10();
        let mut state = GridState::new(cfg.clone(), 0);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "55", Role::Operand);

        let mut tampered = trace.clone();
        let mut events: Vec<TraceEvent> = tampered.events().to_vec();
        events[1].grid.entries[0].column = 9;
        tampered = Trace::new();
        for e in events {
            tampered.push(e);
        }
        let err = replay(&tampered, &cfg);
        assert!(err.is_err(), "{err:?}");
    }

    #[test]
    fn replay_rejects_value_leaking_merge() {
        let cfg = base10();
        let mut state = GridState::new(cfg.clone(), 0);
        let mut trace = Trace::new();
        let mut gen = TagGen::new();
        place_all(&mut state, &mut trace, &mut gen, "55", Role::Operand);

        // Hand-build a merge that drops value: 5 + 5 pretends to become 8.
        let (a, b) = (state.entries()[0].tag, state.entries()[1].tag);
        let addr_a = state.find(a).unwrap().address;
        let addr_b = state.find(b).unwrap().address;
        state.take(a).unwrap();
        state.take(b).unwrap();
        let bogus = Tag(99);
        state.insert(CellEntry {
            tag: bogus,
            address: GridAddress::new(0, 8),
            sign: Sign::Positive,
            role: Role::Result,
        });
        trace.push(state.event(
            EventKind::MergeAdd,
            vec![a, b, bogus],
            vec![addr_a, addr_b],
            vec![GridAddress::new(0, 8)],
            "5 + 5 = 8".into(),
        ));
        let err = replay(&trace, &cfg);
        assert!(
            matches!(err, Err(ReplayError::Inconsistent { .. })),
            "{err:?}"
        );
    }
}
