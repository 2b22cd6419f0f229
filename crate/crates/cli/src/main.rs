use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use aiglin::aig::{write_ascii_aiger, write_binary_aiger};
use aiglin::benchgen::{generate, Fault, MultiplierConfig};
use aiglin::groebner::format_basis;
use aiglin::verify::full_basis;
use aiglin::{
    encode, parse_aiger, verify, Aig, Config, EncodeOptions, InputNaming, Limits, Linearization,
    Mode, PolySystem, SpecInput, Verdict,
};

const EXIT_NOT_VERIFIED: u8 = 20;
const EXIT_INCONCLUSIVE: u8 = 30;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "aiglin",
    version,
    about = "Verify and-inverter graphs against polynomial specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a circuit against its specification
    Verify(VerifyArgs),
    /// Write an n-bit array multiplier, optionally with a fault
    Gen(GenArgs),
    /// Print the gate polynomials and the specification
    DumpEncoding(EncodingArgs),
    /// Print the DRL Gröbner basis of the whole system
    DumpGb(GbArgs),
    /// Print the variable order, smallest first
    DumpOrder(EncodingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// linear relations from small sub-circuit bases
    Local,
    /// linear members of one basis of the whole system
    Fullgb,
    /// backward substitution in LEX order
    Lex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum NamingArg {
    /// a0, b0, a1, b1, ...
    Interleaved,
    /// a0, a1, ..., b0, b1, ...
    Blocked,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinearizationArg {
    /// replace products by existing AND gates where possible
    Reuse,
    /// a fresh variable for every product
    Extensions,
}

#[derive(Args)]
struct CircuitArgs {
    /// AIGER file (ASCII or binary)
    circuit: PathBuf,
    /// `mult` or `file:<path>` with a polynomial over the circuit's names
    #[arg(long, default_value = "mult")]
    spec: String,
    /// how primary inputs are named
    #[arg(long, value_enum, default_value = "interleaved")]
    inputs: NamingArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// verification strategy
    #[arg(long, value_enum, default_value = "local")]
    mode: ModeArg,
    /// first sub-circuit depth
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    d0: u32,
    /// below this distance to the inputs, give up on linearization and
    /// substitute; 0 always searches for a linear polynomial
    #[arg(long, default_value_t = 6)]
    booth_threshold: u32,
    /// critical pairs per Gröbner computation
    #[arg(long, default_value_t = Limits::default().max_pairs)]
    max_pairs: u64,
    /// monomials held by one Gröbner computation
    #[arg(long, default_value_t = Limits::default().max_monomials)]
    max_monomials: u64,
    /// wall-clock budget in seconds
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// report format
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// include wall-clock times in the JSON report
    #[arg(long)]
    times: bool,
}

#[derive(Args)]
struct GenArgs {
    /// bit width
    #[arg(short, long)]
    n: usize,
    /// `flip:K`, `swap:K` or `negate-output:K`
    #[arg(long)]
    fault: Option<String>,
    /// binary AIGER instead of ASCII
    #[arg(long)]
    binary: bool,
    /// output file (standard output if absent)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EncodingArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// how the specification's products become variables
    #[arg(long, value_enum, default_value = "reuse")]
    linearization: LinearizationArg,
    /// variable chain to use instead of the default, e.g. `a0<b0<l10<s0`
    #[arg(long)]
    order: Option<String>,
}

#[derive(Args)]
struct GbArgs {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// critical pairs per Gröbner computation
    #[arg(long, default_value_t = Limits::default().max_pairs)]
    max_pairs: u64,
}

fn read_aig(path: &Path) -> Result<Aig> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_aiger(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn spec_input(spec: &str) -> Result<SpecInput> {
    if spec == "mult" {
        return Ok(SpecInput::Multiplier);
    }
    match spec.strip_prefix("file:") {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading spec {path}"))?;
            Ok(SpecInput::Text(text.trim().to_string()))
        }
        None => bail!("unknown spec `{spec}` (expected `mult` or `file:<path>`)"),
    }
}

fn naming(n: NamingArg) -> InputNaming {
    match n {
        NamingArg::Interleaved => InputNaming::Interleaved,
        NamingArg::Blocked => InputNaming::Blocked,
    }
}

fn parse_fault(s: &str) -> Result<Fault> {
    let (kind, k) = s.split_once(':').context("fault must look like `kind:K`")?;
    let k: usize = k
        .parse()
        .with_context(|| format!("bad fault index `{k}`"))?;
    Ok(match kind {
        "flip" => Fault::FlipOperandPolarity(k),
        "swap" => Fault::SwapOperands(k),
        "negate-output" => Fault::DropOutputNegation(k),
        _ => bail!("unknown fault kind `{kind}`"),
    })
}

fn build_system(args: &EncodingArgs) -> Result<PolySystem> {
    let aig = read_aig(&args.circuit.circuit)?;
    let linearization = match args.linearization {
        LinearizationArg::Reuse => Linearization::ReuseGates,
        LinearizationArg::Extensions => Linearization::ExtensionsOnly,
    };
    let opts = EncodeOptions {
        naming: naming(args.circuit.inputs),
        linearization,
    };
    let sys = encode(&aig, &spec_input(&args.circuit.spec)?, opts)?;
    match &args.order {
        None => Ok(sys),
        Some(chain) => {
            let names: Vec<&str> = chain
                .split(|c: char| c == '<' || c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            Ok(sys.reordered(&names)?)
        }
    }
}

fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let aig = read_aig(&args.circuit.circuit)?;
    let spec = spec_input(&args.circuit.spec)?;
    let config = Config {
        mode: match args.mode {
            ModeArg::Local => Mode::Local,
            ModeArg::Fullgb => Mode::FullGb,
            ModeArg::Lex => Mode::Lex,
        },
        d0: args.d0,
        booth_threshold: args.booth_threshold,
        max_pairs: args.max_pairs,
        max_monomials: args.max_monomials,
        time_limit: args.time_limit_s.map(Duration::from_secs_f64),
        naming: naming(args.circuit.inputs),
    };
    let mut report = verify(&aig, &spec, &config)?;
    match args.report {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Json => {
            if !args.times {
                report.strip_times();
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(match report.verdict {
        Verdict::Verified => 0,
        Verdict::NotVerified => EXIT_NOT_VERIFIED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn run_gen(args: &GenArgs) -> Result<u8> {
    let config = match &args.fault {
        Some(f) => MultiplierConfig::with_fault(args.n, parse_fault(f)?),
        None => MultiplierConfig::new(args.n),
    };
    let aig = generate(&config)?;
    let bytes = if args.binary {
        write_binary_aiger(&aig)?
    } else {
        write_ascii_aiger(&aig)
    };
    match &args.output {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(0)
}

fn run_dump_gb(args: &GbArgs) -> Result<u8> {
    let sys = build_system(&args.encoding)?;
    let limits = Limits {
        max_pairs: args.max_pairs,
        ..Limits::default()
    };
    let gb = full_basis(&sys, &limits)?;
    print!("{}", format_basis(&gb, sys.order.table()));
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify(a) => run_verify(&a),
        Command::Gen(a) => run_gen(&a),
        Command::DumpEncoding(a) => {
            print!("{}", build_system(&a)?.dump());
            Ok(0)
        }
        Command::DumpGb(a) => run_dump_gb(&a),
        Command::DumpOrder(a) => {
            println!("{}", build_system(&a)?.order.chain());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
