use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use presolve_core::chains::ChainGraph;
use presolve_core::labelled::{t_subdivision_for, LabelledSubdivision};
use presolve_core::moves::{f_run, g_run};
use presolve_core::polygon::IsoMode;
use presolve_core::presolve::{components, validate_gj_with, MinusOneRule};
use presolve_core::sequences::{cf_eval, hj_expansion, r_dual, Rational, Sequence};
use presolve_core::Error;
use serde::Serialize;

mod verify;

#[derive(Parser)]
#[command(name = "presolve", version, about = "P-resolutions of cyclic quotient singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dual sequence, continued fractions and position association.
    Dual {
        #[arg(long)]
        label: Sequence,
    },
    /// P-resolutions of a singularity with the bijection certificate.
    Components {
        #[arg(long, conflicts_with = "frac", required_unless_present = "frac")]
        label: Option<Sequence>,
        /// n/q with n > q >= 1 coprime.
        #[arg(long)]
        frac: Option<String>,
        #[arg(long)]
        count_only: bool,
        /// Print the resolution graphs in DOT instead of JSON.
        #[arg(long)]
        dot: bool,
        /// Identify subdivisions only up to equality, not reflection.
        #[arg(long)]
        strict_iso: bool,
    },
    /// T-subdivision of a T-chain.
    Tsub {
        #[arg(long)]
        chain: ChainGraph,
    },
    /// Check a chain with marked intervals, e.g. `--j 1-2,4-4`.
    ValidateGj {
        #[arg(long)]
        chain: ChainGraph,
        #[arg(long, default_value = "")]
        j: String,
        #[arg(long, value_enum, default_value_t = Rule::Discrepancy)]
        rule: Rule,
    },
    /// Trace of F (or G with `--inverse`) on a labelled subdivision in JSON.
    FstepTrace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Exhaustive property checks over bounded sequences.
    Verify {
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 4)]
        max_entry: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Discrepancy,
    Literal,
}

enum Failure {
    Input(String),
    Invariant(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) | Error::IterationBound(_) | Error::NoValidRewiring(_) => {
                Failure::Invariant(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct DualOut {
    dual: Sequence,
    #[serde(skip_serializing_if = "Option::is_none")]
    cf: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dual_cf: Option<Rational>,
    assoc: Vec<[usize; 2]>,
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::Invariant(e.to_string()))
}

fn parse_frac(s: &str) -> Result<Sequence, Failure> {
    let (n, q) = s.split_once('/').ok_or_else(|| Failure::Input(format!("expected n/q, got {s:?}")))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| Failure::Input(format!("{t:?}: {e}")));
    Ok(hj_expansion(parse(n)?, parse(q)?)?)
}

fn parse_intervals(s: &str) -> Result<Vec<(usize, usize)>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (lo, hi) = t.split_once('-').unwrap_or((t, t));
            let p = |x: &str| x.trim().parse::<usize>().map_err(|e| Failure::Input(format!("{t:?}: {e}")));
            Ok((p(lo)?, p(hi)?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Dual { label } => {
            let (dual, assoc) = r_dual(&label);
            let (cf, dual_cf) = if label.in_w2() && !label.is_empty() {
                (Some(cf_eval(&label)?), Some(cf_eval(&dual)?))
            } else {
                (None, None)
            };
            let assoc = assoc.pairs().map(|(i, j)| [i, j]).collect();
            println!("{}", json(&DualOut { dual, cf, dual_cf, assoc })?);
        }
        Command::Components { label, frac, count_only, dot, strict_iso } => {
            let a = match (label, frac) {
                (Some(a), _) => a,
                (None, Some(f)) => parse_frac(&f)?,
                (None, None) => return Err(Failure::Input("give --label or --frac".into())),
            };
            let mode = if strict_iso { IsoMode::Strict } else { IsoMode::V0Reflection };
            let report = components(&a, mode)?;
            for w in &report.certificate.warnings {
                eprintln!("warning: {w}");
            }
            for why in &report.certificate.unpaired_reason {
                eprintln!("unpaired: {why}");
            }
            if count_only {
                println!("{}", report.components.len());
            } else if dot {
                for p in &report.components {
                    print!("// J = {:?}\n{}", p.gj.j_intervals, p.gj.chain.to_dot());
                }
            } else {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Invariant(e.to_string()))?);
            }
            if report.certificate.m_count != report.certificate.gj_count {
                return Err(Failure::Invariant(format!(
                    "|M| = {} but |P| = {}",
                    report.certificate.m_count, report.certificate.gj_count
                )));
            }
        }
        Command::Tsub { chain } => {
            println!("{}", json(&t_subdivision_for(&chain)?)?);
        }
        Command::ValidateGj { chain, j, rule } => {
            let js = parse_intervals(&j)?;
            let (rule, other) = match rule {
                Rule::Discrepancy => (MinusOneRule::Discrepancy, MinusOneRule::Literal),
                Rule::Literal => (MinusOneRule::Literal, MinusOneRule::Discrepancy),
            };
            let verdict = validate_gj_with(&chain, &js, rule);
            let alt = validate_gj_with(&chain, &js, other);
            if verdict.is_valid() != alt.is_valid() {
                eprintln!("note: the other -1 node rule gives {alt}");
            }
            println!("{verdict}");
        }
        Command::FstepTrace { input, inverse } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
            let ls: LabelledSubdivision =
                serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
            let run = if inverse { g_run(&ls) } else { f_run(&ls) };
            match run {
                Ok(run) => println!("{}", json(&run.trace)?),
                Err(Error::NoValidRewiring(nv)) => {
                    eprintln!("{}", json(&nv)?);
                    return Err(Failure::Invariant(nv.to_string()));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Verify { max_len, max_entry } => {
            let summary = verify::run(max_len, max_entry);
            println!("{}", json(&summary)?);
            if !summary.failures.is_empty() {
                return Err(Failure::Verification(format!("{} failures", summary.failures.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violation: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(3)
        }
    }
}
