use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quartic_core::harness::{
    emit_polytope, find_witness, run_selection, validate_states, Diagram, OutputFormat, PolytopeKind, SuiteConfig,
    SuiteResult, SuiteSelection,
};
use quartic_core::Error;
use serde::Serialize;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Verification harness for the quartic extension of quantum theory.
#[derive(Parser, Debug)]
#[command(name = "quartic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// System dimension N.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Theory order m (ancilla is N^m dimensional).
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true, env = "SEED", default_value_t = 42)]
    seed: u64,
    /// Overrides the suite's declared tolerance.
    #[arg(long, global = true, env = "TOL")]
    tol: Option<f64>,
    /// Monte Carlo samples for `verify`, trials for `witness`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include `elapsed_ms` in suite records.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite, or `all`.
    Verify {
        #[arg(value_parser = parse_selection)]
        suite: SuiteSelection,
    },
    /// Emit the vertices of Perm_N or of its dual (N = 2 or 3).
    Polytope {
        #[arg(value_enum, default_value_t = Which::Perm)]
        which: Which,
    },
    /// Search for a pair on which a reduction diagram fails to commute.
    Witness {
        #[arg(value_enum)]
        diagram: DiagramArg,
    },
    /// Check a file of extended states (JSON array, object or NDJSON; `-` for stdin).
    Validate { state_file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Perm,
    Dual,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DiagramArg {
    Classical,
    Quartic,
}

fn parse_selection(s: &str) -> std::result::Result<SuiteSelection, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Outcome {
    text: String,
    success: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => match write_output(&cli.opts, &outcome.text) {
            Ok(()) if outcome.success => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(EXIT_FAILED),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_USAGE)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn write_output(opts: &Opts, text: &str) -> Result<()> {
    match &opts.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Verify { suite } => verify(*suite, opts),
        Command::Polytope { which } => {
            let which = match which {
                Which::Perm => PolytopeKind::Perm,
                Which::Dual => PolytopeKind::Dual,
            };
            let text = emit_polytope(opts.n.unwrap_or(2), which, core_format(opts.format))?;
            Ok(Outcome { text, success: true })
        }
        Command::Witness { diagram } => witness(*diagram, opts),
        Command::Validate { state_file } => validate(state_file, opts),
    }
}

fn core_format(f: Format) -> OutputFormat {
    match f {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    }
}

fn verify(selection: SuiteSelection, opts: &Opts) -> Result<Outcome> {
    let cfg = SuiteConfig { seed: opts.seed, tol: opts.tol, samples: opts.samples, n: opts.n, m: opts.m };
    let results = run_selection(selection, &cfg);
    let success = results.iter().all(|r| r.passed);
    let text = match opts.format {
        Format::Json => results.iter().map(|r| suite_json(r, opts.timing)).collect::<Result<String>>()?,
        Format::Csv => suite_csv(&results, opts.timing),
    };
    Ok(Outcome { text, success })
}

#[derive(Serialize)]
struct SuiteRecord<'a> {
    suite_name: &'a str,
    passed: bool,
    checks_run: u64,
    max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
    seed: u64,
}

fn suite_json(r: &SuiteResult, timing: bool) -> Result<String> {
    let record = SuiteRecord {
        suite_name: &r.suite_name,
        passed: r.passed,
        checks_run: r.checks_run,
        max_violation: r.max_violation,
        elapsed_ms: timing.then_some(r.elapsed_ms),
        seed: r.seed,
    };
    Ok(serde_json::to_string(&record)? + "\n")
}

fn suite_csv(results: &[SuiteResult], timing: bool) -> String {
    let mut out = String::from("suite_name,passed,checks_run,max_violation,seed");
    out += if timing { ",elapsed_ms\n" } else { "\n" };
    for r in results {
        out += &format!("{},{},{},{},{}", r.suite_name, r.passed, r.checks_run, r.max_violation, r.seed);
        if timing {
            out += &format!(",{}", r.elapsed_ms);
        }
        out.push('\n');
    }
    out
}

fn witness(diagram: DiagramArg, opts: &Opts) -> Result<Outcome> {
    let diagram = match diagram {
        DiagramArg::Classical => Diagram::Classical,
        DiagramArg::Quartic => Diagram::Quartic,
    };
    let trials = opts.samples.unwrap_or(10_000);
    match find_witness(diagram, opts.seed, trials, opts.n.unwrap_or(2)) {
        Ok(w) => Ok(Outcome { text: serde_json::to_string(&w)? + "\n", success: true }),
        Err(Error::NoWitness { best, threshold }) => {
            let record = serde_json::json!({ "found": false, "best_gap": best, "threshold": threshold });
            Ok(Outcome { text: record.to_string() + "\n", success: false })
        }
        Err(e) => Err(e.into()),
    }
}

fn validate(path: &PathBuf, opts: &Opts) -> Result<Outcome> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let records = validate_states(&text)?;
    let success = records.iter().all(|r| r.valid);
    let out = match opts.format {
        Format::Json => records
            .iter()
            .map(|r| serde_json::to_string(r).map(|s| s + "\n"))
            .collect::<std::result::Result<String, _>>()?,
        Format::Csv => {
            let mut out = String::from("index,valid,trace,min_eigenvalue,majorization_slack,error\n");
            for r in &records {
                let c = r.certificate.as_ref();
                let field = |f: fn(&quartic_core::states::StateCertificate) -> f64| c.map(|c| f(c).to_string()).unwrap_or_default();
                out += &format!(
                    "{},{},{},{},{},{}\n",
                    r.index,
                    r.valid,
                    field(|c| c.trace),
                    field(|c| c.min_eigenvalue),
                    field(|c| c.majorization_slack),
                    r.error.as_deref().unwrap_or("").replace([',', '\n'], " ")
                );
            }
            out
        }
    };
    Ok(Outcome { text: out, success })
}
