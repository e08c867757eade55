use std::path::PathBuf;
use std::process::ExitCode;

use altprod::accel::{LimitOptions, Method};
use altprod::harness::{convergence_table, verify, verify_all, Registry, VerifyOptions};
use altprod::numkernel::{bits_for_digits, PrecisionPolicy};
use altprod::products::{self, builtin, BridgedProductSpec};
use altprod::{exprlang, Error};
use clap::{Parser, Subcommand};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "altprod", version, about = "Evaluate and verify alternating infinite product identities")]
struct Cli {
    /// Registry file to use instead of the built-in one (also ALTPROD_REGISTRY).
    #[arg(long, global = true, env = "ALTPROD_REGISTRY")]
    registry: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Registry ids and anchors.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a constant expression.
    Eval {
        expr: String,
        #[arg(long, default_value_t = 30)]
        digits: u32,
    },
    /// Verify one identity, or `all`.
    Verify {
        id: String,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        max_terms: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Partial products against the accelerated limit.
    Table {
        id: String,
        /// Comma-separated indices, e.g. 10,100,1000.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        n: Vec<u64>,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long)]
        json: bool,
    },
    /// Limit of a builtin product (e.g. KT3, BD_D(1/2)) or of a spec file.
    Limit {
        /// Builtin name; omit when --spec is given.
        name: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        max_terms: Option<usize>,
    },
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::UnknownName(_) | Error::Spec(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code_for(e))
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let registry = || Registry::load(cli.registry.as_deref());
    match cli.cmd {
        Cmd::List { json } => {
            let reg = registry()?;
            if json {
                let rows: Vec<_> = reg
                    .records
                    .iter()
                    .map(|r| serde_json::json!({"id": r.id, "anchor": r.anchor, "lhs": r.lhs_text, "rhs": r.rhs_text}))
                    .collect();
                print_json(&rows);
            } else {
                let width = reg.ids().iter().map(|s| s.len()).max().unwrap_or(0);
                for r in &reg.records {
                    println!("{:width$}  {}", r.id, r.anchor);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eval { expr, digits } => {
            let e = exprlang::parse(&expr).map_err(Error::Parse)?;
            let p = PrecisionPolicy::for_digits(digits).working_bits;
            let v = exprlang::eval(&e, p)?;
            println!("{}", v.to_decimal(digits.max(1)));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            id,
            digits,
            method,
            max_terms,
            json,
        } => {
            let reg = registry()?;
            let opts = VerifyOptions { method, max_terms };
            let reports = if id.eq_ignore_ascii_case("all") {
                verify_all(&reg, digits, &opts)
            } else {
                vec![verify(reg.get(&id)?, digits, &opts)]
            };
            if json {
                if reports.len() == 1 && !id.eq_ignore_ascii_case("all") {
                    print_json(&reports[0]);
                } else {
                    print_json(&reports);
                }
            } else {
                for r in &reports {
                    println!(
                        "{:<8} {:<20} {:>4}/{:<4} digits  {:>6} terms  {:<12} {:>7} ms{}",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.id,
                        r.agreement_digits,
                        r.target_digits,
                        r.terms_used,
                        r.method,
                        r.elapsed_ms,
                        r.reason.as_ref().map(|s| format!("  ({s})")).unwrap_or_default()
                    );
                }
            }
            Ok(if reports.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            })
        }
        Cmd::Table { id, n, digits, json } => {
            let reg = registry()?;
            let rows = convergence_table(reg.get(&id)?, &n, bits_for_digits(digits) + 32)?;
            if json {
                print_json(&rows);
            } else {
                for r in rows {
                    println!("{:>10}  {}  {:>4} digits", r.n, r.partial, r.digits);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Limit {
            name,
            spec,
            digits,
            method,
            max_terms,
        } => {
            let spec = match (name, spec) {
                (Some(n), None) => builtin(&n)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
                    BridgedProductSpec::from_text(&text)?
                }
                _ => return Err(Error::Spec("give a builtin name or --spec FILE".into())),
            };
            let mut opts = LimitOptions::new(method.unwrap_or_else(|| products::default_method(&spec)));
            if let Some(m) = max_terms {
                opts.max_terms_cap = m;
            }
            let p = PrecisionPolicy::for_digits(digits).working_bits;
            let est = products::limit_with(&spec, &opts, p, digits)?;
            println!("{}", est.value.to_decimal(digits.max(1)));
            eprintln!(
                "method {}, {} terms, log-space error estimate {}",
                est.method,
                est.terms_used,
                est.error_estimate.to_decimal(3)
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
