//! Expression front end: parsing and one-shot execution.
//!
//! Grammar (whitespace insensitive, numerals per [`crate::numeral`]):
//!
//! ```text
//! expr  := numeral op numeral
//!        | 'chain(' numeral ',' numeral ';' numeral (',' numeral)* ')' ['@' depth]
//! op    := '+' | '-' | '*' | '/'
//! depth := decimal digits (0..=255), regardless of --base
//! ```
//!
//! [`run`] turns an [`Invocation`] into exit status plus output streams as
//! pure data, so callers (and tests) can assert byte-for-byte determinism.
//! Exit statuses: 0 success, 1 parse error, 2 math error; either failure
//! puts a one-line diagnostic on the error stream. The last stdout line is
//! always the bare result: a numeral, or `q=<q> r=<r>` for a division with
//! a non-zero remainder.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{ArithError, DivisionOutput, Engine, OpOutput};
use crate::chain::{
    chain_divide, decimal_string, expand_chain, rounded_chain, to_csv, DivisorPartition, Rounding,
};
use crate::grid::render_text;
use crate::numeral::{parse_numeral, BaseConfig, ParseError, PartedNumber};
use crate::oracle::{gen_cases, to_integer, OperandProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Chain request as written: operands stay numerals until validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainRequest {
    pub dividend: PartedNumber,
    pub divisor: PartedNumber,
    pub parts: Vec<PartedNumber>,
    pub depth: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Binary {
        op: BinOp,
        lhs: PartedNumber,
        rhs: PartedNumber,
    },
    Chain(ChainRequest),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{message} at byte {position}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

fn syntax(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        position,
        message: message.into(),
    }
}

struct Scanner<'a> {
    text: &'a str,
    chars: Vec<(usize, char)>,
    at: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            chars: text.char_indices().collect(),
            at: 0,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.at += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.at += 1;
        }
        c
    }

    /// Byte offset of the current character (or the text end).
    fn pos(&self) -> usize {
        self.chars
            .get(self.at)
            .map(|&(i, _)| i)
            .unwrap_or(self.text.len())
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.at += 1;
                Ok(())
            }
            Some(c) => Err(syntax(
                self.pos(),
                format!("expected '{want}', found '{c}'"),
            )),
            None => Err(syntax(self.pos(), format!("expected '{want}'"))),
        }
    }

    /// True when the next token is the chain keyword: the literal `chain`
    /// followed (after whitespace) by `(`. In large bases "chain" is also
    /// a valid numeral, so the parenthesis decides.
    fn at_chain_keyword(&self) -> bool {
        let mut probe = self.at;
        for want in "chain".chars() {
            match self.chars.get(probe) {
                Some(&(_, c)) if c == want => probe += 1,
                _ => return false,
            }
        }
        while matches!(self.chars.get(probe), Some(&(_, c)) if c.is_whitespace()) {
            probe += 1;
        }
        matches!(self.chars.get(probe), Some(&(_, '(')))
    }

    fn numeral(&mut self, cfg: &BaseConfig) -> Result<PartedNumber, SyntaxError> {
        self.skip_ws();
        let start_at = self.at;
        let start_byte = self.pos();
        if self.peek() == Some('-') {
            self.bump();
        }
        while matches!(self.peek(), Some(c) if c == '.' || cfg.digit_of(c).is_some()) {
            self.bump();
        }
        if self.at == start_at {
            return Err(syntax(start_byte, "expected a numeral"));
        }
        let end_byte = self.pos();
        let token = &self.text[start_byte..end_byte];
        parse_numeral(token, cfg).map_err(|e| {
            let offset = match &e {
                ParseError::InvalidGlyph { position, .. }
                | ParseError::SecondRadixPoint { position }
                | ParseError::MissingDigits { position } => *position,
                _ => 0,
            };
            syntax(start_byte + offset, e.to_string())
        })
    }

    fn decimal_u8(&mut self) -> Result<u8, SyntaxError> {
        self.skip_ws();
        let start = self.pos();
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().expect("peeked"));
        }
        if digits.is_empty() {
            return Err(syntax(start, "expected a decimal depth"));
        }
        digits
            .parse::<u8>()
            .map_err(|_| syntax(start, "depth must be 0..=255"))
    }

    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(syntax(
                self.pos(),
                format!("unexpected '{c}' after the expression"),
            )),
        }
    }
}

/// Parses one expression against the base's numeral grammar.
pub fn parse_expression(text: &str, cfg: &BaseConfig) -> Result<Command, SyntaxError> {
    let mut s = Scanner::new(text);
    s.skip_ws();
    if s.peek().is_none() {
        return Err(syntax(0, "expression is empty"));
    }
    if s.at_chain_keyword() {
        for _ in 0..5 {
            s.bump();
        }
        s.expect('(')?;
        let dividend = s.numeral(cfg)?;
        s.expect(',')?;
        let divisor = s.numeral(cfg)?;
        s.expect(';')?;
        let mut parts = vec![s.numeral(cfg)?];
        loop {
            s.skip_ws();
            match s.peek() {
                Some(',') => {
                    s.bump();
                    parts.push(s.numeral(cfg)?);
                }
                _ => break,
            }
        }
        s.expect(')')?;
        s.skip_ws();
        let depth = if s.peek() == Some('@') {
            s.bump();
            s.decimal_u8()?
        } else {
            0
        };
        s.expect_end()?;
        return Ok(Command::Chain(ChainRequest {
            dividend,
            divisor,
            parts,
            depth,
        }));
    }

    let lhs = s.numeral(cfg)?;
    s.skip_ws();
    let op = match s.peek() {
        Some('+') => BinOp::Add,
        Some('-') => BinOp::Sub,
        Some('*') => BinOp::Mul,
        Some('/') => BinOp::Div,
        Some(c) => {
            return Err(syntax(
                s.pos(),
                format!("expected an operator, found '{c}'"),
            ))
        }
        None => return Err(syntax(s.pos(), "expected an operator")),
    };
    s.bump();
    let rhs = s.numeral(cfg)?;
    s.expect_end()?;
    Ok(Command::Binary { op, lhs, rhs })
}

/// Trace output formats; absent means result-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Text,
    Json,
}

/// Everything one command run depends on.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub expression: Option<String>,
    pub base: u32,
    pub trace: Option<TraceFormat>,
    pub precision: u32,
    pub rounding: Rounding,
    pub seed: Option<u64>,
    pub csv: bool,
}

impl Default for Invocation {
    fn default() -> Self {
        Self {
            expression: None,
            base: 10,
            trace: None,
            precision: 2,
            rounding: Rounding::Truncate,
            seed: None,
            csv: false,
        }
    }
}

/// Outcome of a run as pure data: status, both streams, and CSV content
/// when a chain run was asked to export it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub exit: i32,
    pub stdout: String,
    pub stderr: String,
    pub csv: Option<String>,
}

impl RunOutput {
    fn ok(stdout: String, csv: Option<String>) -> Self {
        Self {
            exit: 0,
            stdout,
            stderr: String::new(),
            csv,
        }
    }

    fn parse_failure(message: impl std::fmt::Display) -> Self {
        Self {
            exit: 1,
            stdout: String::new(),
            stderr: format!("{message}\n"),
            csv: None,
        }
    }

    fn math_failure(message: impl std::fmt::Display) -> Self {
        Self {
            exit: 2,
            stdout: String::new(),
            stderr: format!("{message}\n"),
            csv: None,
        }
    }
}

#[derive(Serialize)]
struct ChainStepJson {
    step: usize,
    divisor_part: String,
    residue_numerator: String,
    residue_denominator: String,
    decimal: String,
}

#[derive(Serialize)]
struct ExpansionJson {
    expansion_depth: u8,
    root_preserved: bool,
}

/// Executes one invocation. Identical invocations produce byte-identical
/// outputs.
pub fn run(inv: &Invocation) -> RunOutput {
    let cfg = match BaseConfig::new(inv.base) {
        Ok(cfg) => cfg,
        Err(e) => return RunOutput::parse_failure(e),
    };
    let Some(expression) = &inv.expression else {
        return match inv.seed {
            Some(seed) => demo(seed, &cfg),
            None => RunOutput::parse_failure("an expression or --seed is required"),
        };
    };
    let command = match parse_expression(expression, &cfg) {
        Ok(c) => c,
        Err(e) => return RunOutput::parse_failure(e),
    };
    match command {
        Command::Binary { op, lhs, rhs } => {
            if inv.csv {
                return RunOutput::parse_failure("--csv applies only to chain expressions");
            }
            run_binary(inv, &cfg, op, &lhs, &rhs)
        }
        Command::Chain(req) => run_chain(inv, req),
    }
}

fn division_line(out: &DivisionOutput) -> String {
    let q = out.quotient.rejoin().expect("quotient renders");
    if out.remainder.is_zero() {
        q
    } else {
        let r = out.remainder.rejoin().expect("remainder renders");
        format!("q={q} r={r}")
    }
}

fn run_binary(
    inv: &Invocation,
    cfg: &BaseConfig,
    op: BinOp,
    lhs: &PartedNumber,
    rhs: &PartedNumber,
) -> RunOutput {
    let engine = Engine::new(cfg.clone());
    let outcome: Result<(OpOutput, String), ArithError> = match op {
        BinOp::Add => engine.add(lhs, rhs).map(with_value_line),
        BinOp::Sub => engine.subtract(lhs, rhs).map(with_value_line),
        BinOp::Mul => engine.multiply(lhs, rhs).map(with_value_line),
        BinOp::Div => engine.divide(lhs, rhs).map(|out| {
            let line = division_line(&out);
            (
                OpOutput {
                    value: out.quotient,
                    trace: out.trace,
                    state: out.state,
                },
                line,
            )
        }),
    };
    let (out, result_line) = match outcome {
        Ok(v) => v,
        Err(e) => return RunOutput::math_failure(e),
    };
    let mut stdout = String::new();
    match inv.trace {
        None => {}
        Some(TraceFormat::Text) => {
            for event in out.trace.events() {
                stdout.push_str(&format!("#{} {}\n", event.step, event.note));
            }
            stdout.push_str(&render_text(&out.state));
        }
        Some(TraceFormat::Json) => {
            stdout.push_str(&out.trace.to_jsonl());
        }
    }
    stdout.push_str(&result_line);
    stdout.push('\n');
    RunOutput::ok(stdout, None)
}

fn with_value_line(out: OpOutput) -> (OpOutput, String) {
    let line = out.value.rejoin().expect("result renders");
    (out, line)
}

/// Chain operands must be positive integers; fractions have no partition
/// reading.
fn chain_integer(n: &PartedNumber, what: &str) -> Result<BigInt, String> {
    match to_integer(n) {
        Some(v) => Ok(v),
        None => Err(format!("{what} must be an integer")),
    }
}

fn run_chain(inv: &Invocation, req: ChainRequest) -> RunOutput {
    let dividend = match chain_integer(&req.dividend, "chain dividend") {
        Ok(v) => v,
        Err(e) => return RunOutput::math_failure(e),
    };
    let divisor = match chain_integer(&req.divisor, "chain divisor") {
        Ok(v) => v,
        Err(e) => return RunOutput::math_failure(e),
    };
    let mut parts = Vec::with_capacity(req.parts.len());
    for (i, p) in req.parts.iter().enumerate() {
        match chain_integer(p, &format!("chain part {}", i + 1)) {
            Ok(v) => parts.push(v),
            Err(e) => return RunOutput::math_failure(e),
        }
    }
    // Constraint checks happen before any evaluation.
    let partition = match DivisorPartition::new(divisor.clone(), parts) {
        Ok(p) => p,
        Err(e) => return RunOutput::math_failure(e),
    };
    let cr = match chain_divide(&dividend, &divisor, &partition) {
        Ok(cr) => cr,
        Err(e) => return RunOutput::math_failure(e),
    };
    let expanded = if req.depth > 0 {
        match expand_chain(&cr, &mut |_| partition.clone(), u32::from(req.depth)) {
            Ok(tree) => {
                debug_assert_eq!(tree.value(), &cr.result);
                Some(tree)
            }
            Err(e) => return RunOutput::math_failure(e),
        }
    } else {
        None
    };

    let rounded = rounded_chain(&cr, inv.precision, inv.rounding);
    // The final line is always presented at two fractional digits, halves
    // rounded away from zero, whatever precision the steps used.
    let final_line = decimal_string(&rounded.result, 2, Rounding::HalfUp);

    let mut stdout = String::new();
    match inv.trace {
        None => {}
        Some(TraceFormat::Text) => {
            for (i, step) in rounded.steps.iter().enumerate() {
                let dec = decimal_string(&step.residue, inv.precision, inv.rounding);
                let line = if i == 0 {
                    format!("r1 = {} / {} = {}", dividend, step.divisor_part, dec)
                } else if i == 1 {
                    format!("r2 = r1 x {} / {} = {}", step.divisor_part, divisor, dec)
                } else {
                    format!(
                        "r{} = r{} x {} / {} = {}",
                        i + 1,
                        i,
                        step.divisor_part,
                        cr.partition.parts()[i - 1],
                        dec
                    )
                };
                stdout.push_str(&line);
                stdout.push('\n');
            }
            if let Some(tree) = &expanded {
                stdout.push_str(&format!(
                    "expansion depth {}: root value preserved\n",
                    tree.depth()
                ));
            }
        }
        Some(TraceFormat::Json) => {
            for (exact, rounded_step) in cr.steps.iter().zip(&rounded.steps) {
                let row = ChainStepJson {
                    step: exact.index,
                    divisor_part: exact.divisor_part.to_string(),
                    residue_numerator: exact.residue.numer().to_string(),
                    residue_denominator: exact.residue.denom().to_string(),
                    decimal: decimal_string(&rounded_step.residue, inv.precision, inv.rounding),
                };
                stdout.push_str(&serde_json::to_string(&row).expect("chain rows serialize"));
                stdout.push('\n');
            }
            if let Some(tree) = &expanded {
                let row = ExpansionJson {
                    expansion_depth: tree.depth() as u8,
                    root_preserved: true,
                };
                stdout.push_str(&serde_json::to_string(&row).expect("expansion row serializes"));
                stdout.push('\n');
            }
        }
    }
    stdout.push_str(&final_line);
    stdout.push('\n');

    let csv = inv.csv.then(|| to_csv(&cr, inv.precision, inv.rounding));
    RunOutput::ok(stdout, csv)
}

/// Deterministic showcase: a few generated cases per operator, each as an
/// expression line followed by its result line.
fn demo(seed: u64, cfg: &BaseConfig) -> RunOutput {
    let engine = Engine::new(cfg.clone());
    let profile = OperandProfile::integers(cfg.base(), 6);
    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];
    let mut stdout = String::new();
    for (i, case) in gen_cases(seed, profile).take(8).enumerate() {
        let op = ops[i % ops.len()];
        let (a, b) = (&case.a, &case.b);
        stdout.push_str(&format!(
            "{} {} {}\n",
            a.rejoin().expect("operand renders"),
            op.symbol(),
            b.rejoin().expect("operand renders"),
        ));
        let line = match op {
            BinOp::Add => engine.add(a, b).expect("demo add").value.rejoin(),
            BinOp::Sub => engine.subtract(a, b).expect("demo subtract").value.rejoin(),
            BinOp::Mul => engine.multiply(a, b).expect("demo multiply").value.rejoin(),
            BinOp::Div => {
                let out = engine.divide(a, b).expect("demo divide");
                Ok(division_line(&out))
            }
        };
        stdout.push_str(&line.expect("demo result renders"));
        stdout.push('\n');
    }
    RunOutput::ok(stdout, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base10() -> BaseConfig {
        BaseConfig::new(10).unwrap()
    }

    fn invoke(expression: &str) -> Invocation {
        Invocation {
            expression: Some(expression.to_string()),
            ..Invocation::default()
        }
    }

    #[test]
    fn parses_binary_expressions() {
        let cfg = base10();
        let cmd = parse_expression("2075 / 25", &cfg).unwrap();
        match cmd {
            Command::Binary { op, lhs, rhs } => {
                assert_eq!(op, BinOp::Div);
                assert_eq!(lhs.rejoin().unwrap(), "2075");
                assert_eq!(rhs.rejoin().unwrap(), "25");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_expression("55+150", &cfg).unwrap(),
            Command::Binary { op: BinOp::Add, .. }
        ));
        assert!(matches!(
            parse_expression("  5 * -3 ", &cfg).unwrap(),
            Command::Binary { op: BinOp::Mul, .. }
        ));
    }

    #[test]
    fn parses_chain_expressions() {
        let cfg = base10();
        let cmd = parse_expression("chain(425, 23; 13, 10)", &cfg).unwrap();
        match cmd {
            Command::Chain(req) => {
                assert_eq!(req.dividend.rejoin().unwrap(), "425");
                assert_eq!(req.divisor.rejoin().unwrap(), "23");
                assert_eq!(req.parts.len(), 2);
                assert_eq!(req.depth, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let with_depth = parse_expression("chain ( 425,23 ; 12, 9,2 ) @ 3", &cfg).unwrap();
        match with_depth {
            Command::Chain(req) => {
                assert_eq!(req.parts.len(), 3);
                assert_eq!(req.depth, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cfg = base10();
        assert_eq!(parse_expression("", &cfg).unwrap_err().position, 0);
        assert_eq!(parse_expression("55 +", &cfg).unwrap_err().position, 4);
        let err = parse_expression("55 ? 1", &cfg).unwrap_err();
        assert_eq!(err.position, 3);
        assert!(err.message.contains("operator"));
        let err = parse_expression("12x45 + 1", &cfg).unwrap_err();
        assert_eq!(err.position, 2, "{err}");
        let err = parse_expression("chain(425, 23; 13, 10", &cfg).unwrap_err();
        assert!(err.message.contains("')'"));
        let err = parse_expression("chain(1, 2; 1, 1)@999", &cfg).unwrap_err();
        assert!(err.message.contains("depth"));
        let err = parse_expression("5 5", &cfg).unwrap_err();
        assert!(err.message.contains("operator"));
        let err = parse_expression("5 + 5 junk", &cfg).unwrap_err();
        assert!(err.message.contains("unexpected"));
    }

    #[test]
    fn chain_keyword_needs_the_parenthesis() {
        // In base 36, "chain" spells a numeral; without '(' it parses as one.
        let cfg = BaseConfig::new(36).unwrap();
        let cmd = parse_expression("chain + 1", &cfg).unwrap();
        assert!(matches!(cmd, Command::Binary { op: BinOp::Add, .. }));
        assert!(matches!(
            parse_expression("chain(10, 2; 1, 1)", &cfg).unwrap(),
            Command::Chain(_)
        ));
    }

    #[test]
    fn run_result_only() {
        let out = run(&invoke("55 + 150"));
        assert_eq!(out.exit, 0);
        assert_eq!(out.stdout, "205\n");
        assert!(out.stderr.is_empty());
    }

    #[test]
    fn run_division_line_formats() {
        assert_eq!(run(&invoke("2075 / 25")).stdout, "83\n");
        assert_eq!(run(&invoke("425 / 23")).stdout, "q=18 r=11\n");
    }

    #[test]
    fn run_text_trace_ends_with_rendering_then_result() {
        let mut inv = invoke("2507 * 852");
        inv.trace = Some(TraceFormat::Text);
        let out = run(&inv);
        assert_eq!(out.exit, 0);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(*lines.last().unwrap(), "2135964");
        assert!(lines[0].starts_with("#0 "));
        let units_row = lines
            .iter()
            .rposition(|l| l.trim_start().starts_with("Units"))
            .unwrap();
        assert_eq!(
            units_row,
            lines.len() - 2,
            "grid rendering precedes the result"
        );
    }

    #[test]
    fn run_json_trace_is_one_object_per_line() {
        let mut inv = invoke("55 + 150");
        inv.trace = Some(TraceFormat::Json);
        let out = run(&inv);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(*lines.last().unwrap(), "205");
        for line in &lines[..lines.len() - 1] {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("kind").is_some());
            assert!(v.get("grid").is_some());
        }
    }

    #[test]
    fn run_parse_error() {
        let out = run(&invoke("55 +"));
        assert_eq!(out.exit, 1);
        assert!(out.stdout.is_empty());
        assert!(out.stderr.contains("at byte 4"), "{}", out.stderr);
    }

    #[test]
    fn run_math_errors() {
        let out = run(&invoke("1 / 0"));
        assert_eq!(out.exit, 2);
        assert!(out.stderr.contains("division by zero"), "{}", out.stderr);

        let out = run(&invoke("chain(425, 23; 13, 9)"));
        assert_eq!(out.exit, 2);
        assert!(out.stderr.contains("sum to 22"), "{}", out.stderr);

        let out = run(&invoke("chain(4.25, 23; 13, 10)"));
        assert_eq!(out.exit, 2);
        assert!(out.stderr.contains("integer"), "{}", out.stderr);
    }

    #[test]
    fn run_base_bounds() {
        let mut inv = invoke("1 + 1");
        inv.base = 37;
        assert_eq!(run(&inv).exit, 1);
        let mut inv = invoke("ff + 1");
        inv.base = 16;
        assert_eq!(run(&inv).stdout, "100\n");
    }

    #[test]
    fn run_chain_text_reproduces_the_worked_decimals() {
        let mut inv = invoke("chain(425, 23; 13, 10)");
        inv.trace = Some(TraceFormat::Text);
        let out = run(&inv);
        assert_eq!(
            out.stdout,
            "r1 = 425 / 13 = 32.69\nr2 = r1 x 10 / 23 = 14.21\n18.48\n"
        );

        let mut inv = invoke("chain(425, 23; 12, 9, 2)");
        inv.trace = Some(TraceFormat::Text);
        inv.precision = 3;
        let out = run(&inv);
        assert_eq!(
            out.stdout,
            "r1 = 425 / 12 = 35.416\nr2 = r1 x 9 / 23 = 13.858\nr3 = r2 x 2 / 9 = 3.079\n18.48\n"
        );
    }

    #[test]
    fn run_chain_result_only_is_the_final_line() {
        let out = run(&invoke("chain(425, 23; 13, 10)"));
        assert_eq!(out.stdout, "18.48\n");
    }

    #[test]
    fn run_chain_json_rows() {
        let mut inv = invoke("chain(425, 23; 13, 10)@2");
        inv.trace = Some(TraceFormat::Json);
        let out = run(&inv);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(lines.len(), 4);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["residue_numerator"], "425");
        assert_eq!(first["residue_denominator"], "13");
        assert_eq!(first["decimal"], "32.69");
        let exp: serde_json::Value = serde_json::from_str(lines[2]).unwrap();
        assert_eq!(exp["expansion_depth"], 2);
        assert_eq!(exp["root_preserved"], true);
        assert_eq!(*lines.last().unwrap(), "18.48");
    }

    #[test]
    fn run_chain_csv_export() {
        let mut inv = invoke("chain(425, 23; 13, 10)");
        inv.csv = true;
        let out = run(&inv);
        let csv = out.csv.expect("csv requested");
        assert!(csv.starts_with("step,divisor_part,"));
        assert!(csv.contains("1,13,425,13,32.69"));

        let mut inv = invoke("55 + 150");
        inv.csv = true;
        assert_eq!(run(&inv).exit, 1);
    }

    #[test]
    fn runs_are_byte_deterministic() {
        let mut inv = invoke("chain(425, 23; 12, 9, 2)@4");
        inv.trace = Some(TraceFormat::Text);
        assert_eq!(run(&inv), run(&inv));
        let mut inv = invoke("10450 - 555");
        inv.trace = Some(TraceFormat::Json);
        assert_eq!(run(&inv), run(&inv));
    }

    #[test]
    fn demo_mode_is_seed_deterministic() {
        let inv = Invocation {
            seed: Some(42),
            ..Invocation::default()
        };
        let a = run(&inv);
        let b = run(&inv);
        assert_eq!(a, b);
        assert_eq!(a.exit, 0);
        assert_eq!(a.stdout.lines().count(), 16);

        let other = run(&Invocation {
            seed: Some(43),
            ..Invocation::default()
        });
        assert_ne!(a.stdout, other.stdout);

        let neither = run(&Invocation::default());
        assert_eq!(neither.exit, 1);
    }
}
