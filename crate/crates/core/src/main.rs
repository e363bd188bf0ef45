//! Command-line front end. All behaviour lives in [`gridnum::expr::run`];
//! this binary only maps arguments in and streams/exit status out.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gridnum::chain::Rounding;
use gridnum::expr::{run, Invocation, TraceFormat};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoundingArg {
    Truncate,
    HalfUp,
}

/// Grid arithmetic on parted numerals, with step-by-step traces.
#[derive(Debug, Parser)]
#[command(name = "gridnum", version, disable_help_subcommand = true)]
struct Cli {
    /// Expression: `55 + 150`, `2075 / 25`, or `chain(425, 23; 13, 10)@2`.
    /// Omit it and pass --seed for a deterministic demonstration run.
    #[arg(value_name = "EXPR")]
    expression: Vec<String>,

    /// Numeral base for operands and results (2..=36).
    #[arg(long, default_value_t = 10, value_name = "n")]
    base: u32,

    /// Emit the full move trace before the result.
    #[arg(long, value_enum, value_name = "text|json")]
    trace: Option<TraceArg>,

    /// Fractional digits for chain-step decimals.
    #[arg(long, default_value_t = 2, value_name = "n")]
    precision: u32,

    /// Rounding mode for chain-step decimals.
    #[arg(
        long,
        value_enum,
        default_value = "truncate",
        value_name = "truncate|half-up"
    )]
    rounding: RoundingArg,

    /// Without an expression: generate a reproducible demonstration run.
    #[arg(long, value_name = "n")]
    seed: Option<u64>,

    /// Write a chain's step table to this file as CSV.
    #[arg(long, value_name = "path")]
    csv: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print in full; real argument errors become
            // the one-line diagnostic the exit contract promises.
            if e.use_stderr() {
                let text = e.to_string();
                eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
                return ExitCode::from(1);
            }
            e.print().expect("help output");
            return ExitCode::SUCCESS;
        }
    };

    let expression = if cli.expression.is_empty() {
        None
    } else {
        Some(cli.expression.join(" "))
    };
    let inv = Invocation {
        expression,
        base: cli.base,
        trace: cli.trace.map(|t| match t {
            TraceArg::Text => TraceFormat::Text,
            TraceArg::Json => TraceFormat::Json,
        }),
        precision: cli.precision,
        rounding: match cli.rounding {
            RoundingArg::Truncate => Rounding::Truncate,
            RoundingArg::HalfUp => Rounding::HalfUp,
        },
        seed: cli.seed,
        csv: cli.csv.is_some(),
    };

    let out = run(&inv);
    print!("{}", out.stdout);
    std::io::stdout().flush().expect("stdout flush");
    eprint!("{}", out.stderr);
    if let (Some(path), Some(content)) = (&cli.csv, &out.csv) {
        if let Err(e) = std::fs::write(path, content) {
            eprintln!("cannot write {path}: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(u8::try_from(out.exit).unwrap_or(2))
}
