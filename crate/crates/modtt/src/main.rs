use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use modtt::{
    campaign_parallel, emit_core, failure_json, failure_parts, find_def, find_main, load_unit,
    print_outcome_value, report_json, static_of_item, Failure,
};
use modtt_core::elaborate::{ElabDef, Elaborator};
use modtt_core::runtime::{run_cmp, FuelBudget, Outcome, RunError};

const EXIT_OK: u8 = 0;
const EXIT_DIAGNOSTIC: u8 = 1;
const EXIT_THREW: u8 = 2;
const EXIT_FUEL: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "modtt",
    version,
    about = "A phase-separated module calculus",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Emit diagnostics and reports as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, elaborate, and typecheck a compilation unit.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Elaborate a unit; optionally print the core terms.
    Elaborate {
        file: PathBuf,
        /// Print each definition in the core text format.
        #[arg(long)]
        emit_core: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the `main` field of the last structure defining one.
    Eval {
        file: PathBuf,
        /// Evaluation step budget.
        #[arg(long, default_value_t = modtt_core::runtime::DEFAULT_FUEL)]
        fuel: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the static part of a named signature or structure.
    Static {
        file: PathBuf,
        item: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare two implementations of a signature over generated clients.
    ParamTest {
        file: PathBuf,
        /// Implementation names; pass exactly twice.
        #[arg(long = "impl", num_args = 1, action = clap::ArgAction::Append)]
        impls: Vec<String>,
        /// The shared signature name.
        #[arg(long)]
        sig: String,
        #[arg(long, default_value_t = 1000)]
        clients: usize,
        #[arg(long, default_value_t = 20)]
        max_len: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = modtt_core::runtime::DEFAULT_FUEL)]
        fuel: u64,
        /// Worker threads for the campaign.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the version.
    Version,
}

fn color_enabled() -> bool {
    match std::env::var("MODTT_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

fn report_failure(f: &Failure, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", failure_json(f));
    } else {
        let (kind, span, message) = failure_parts(f);
        let prefix = if color_enabled() {
            format!("\x1b[31merror[{}]\x1b[0m", kind)
        } else {
            format!("error[{}]", kind)
        };
        match span {
            Some(span) => eprintln!(
                "{}: {} (line {}, column {})",
                prefix, message, span.line, span.col
            ),
            None => eprintln!("{}: {}", prefix, message),
        }
        if let Failure::Elab(e) = f {
            if let Some(expected) = &e.expected {
                eprintln!("  expected: {}", expected);
            }
            if let Some(actual) = &e.actual {
                eprintln!("  actual:   {}", actual);
            }
        }
    }
    ExitCode::from(EXIT_DIAGNOSTIC)
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error[usage]: {}", message);
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Version => {
            println!("modtt {}", env!("CARGO_PKG_VERSION"));
            ExitCode::from(EXIT_OK)
        }
        Command::Check { file, common } => match load_unit(&file) {
            Ok(defs) => {
                if common.json {
                    println!(
                        "{}",
                        serde_json::json!({ "ok": true, "definitions": defs.len() })
                    );
                } else {
                    println!("ok: {} definitions", defs.len());
                }
                ExitCode::from(EXIT_OK)
            }
            Err(f) => report_failure(&f, common.json),
        },
        Command::Elaborate {
            file,
            emit_core: emit,
            common,
        } => match load_unit(&file) {
            Ok(defs) => {
                if emit {
                    print!("{}", emit_core(&defs));
                } else if common.json {
                    println!(
                        "{}",
                        serde_json::json!({ "ok": true, "definitions": defs.len() })
                    );
                } else {
                    println!("ok: {} definitions", defs.len());
                }
                ExitCode::from(EXIT_OK)
            }
            Err(f) => report_failure(&f, common.json),
        },
        Command::Eval { file, fuel, common } => {
            let defs = match load_unit(&file) {
                Ok(defs) => defs,
                Err(f) => return report_failure(&f, common.json),
            };
            let (main, _sig) = match find_main(&defs) {
                Some(m) => m,
                None => return usage_error("no structure with a `main` field"),
            };
            match run_cmp(&main, FuelBudget(fuel)) {
                Ok(Outcome::Returned(v)) => {
                    if common.json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "outcome": "returned",
                                "value": print_outcome_value(&v),
                            })
                        );
                    } else {
                        println!("{}", print_outcome_value(&v));
                    }
                    ExitCode::from(EXIT_OK)
                }
                Ok(Outcome::Threw) => {
                    if common.json {
                        println!("{}", serde_json::json!({ "outcome": "threw" }));
                    } else {
                        println!("threw");
                    }
                    ExitCode::from(EXIT_THREW)
                }
                Err(RunError::FuelExhausted) => {
                    eprintln!("error[fuel]: evaluation budget exhausted");
                    ExitCode::from(EXIT_FUEL)
                }
                Err(RunError::Stuck(msg)) => {
                    eprintln!("error[internal]: evaluation stuck: {}", msg);
                    ExitCode::from(EXIT_DIAGNOSTIC)
                }
            }
        }
        Command::Static { file, item, common } => {
            let defs = match load_unit(&file) {
                Ok(defs) => defs,
                Err(f) => return report_failure(&f, common.json),
            };
            match static_of_item(&defs, &item) {
                Some(text) => {
                    println!("{}", text);
                    ExitCode::from(EXIT_OK)
                }
                None => usage_error(&format!("no item named '{}'", item)),
            }
        }
        Command::ParamTest {
            file,
            impls,
            sig,
            clients,
            max_len,
            seed,
            fuel,
            jobs,
            common,
        } => {
            if impls.len() != 2 {
                return usage_error("pass exactly two --impl names");
            }
            if max_len == 0 {
                return usage_error("--max-len must be at least 1");
            }
            let defs = match load_unit(&file) {
                Ok(defs) => defs,
                Err(f) => return report_failure(&f, common.json),
            };
            let (iface, iface_layout) = match find_def(&defs, &sig) {
                Some(ElabDef::Sig { sig, layout, .. }) => (sig.clone(), layout.clone()),
                _ => return usage_error(&format!("no signature named '{}'", sig)),
            };
            let mut sealed = Vec::new();
            for name in &impls {
                let (value, vsig, vlayout) = match find_def(&defs, name) {
                    Some(ElabDef::Mod {
                        value, sig, layout, ..
                    }) => (value.clone(), sig.clone(), layout.clone()),
                    _ => return usage_error(&format!("no structure named '{}'", name)),
                };
                let mut elab = Elaborator::new();
                let span = modtt_core::check::Span { line: 0, col: 0 };
                match elab.seal(value, &vsig, &vlayout, &iface, &iface_layout, span) {
                    Ok(v) => sealed.push(v),
                    Err(e) => return report_failure(&Failure::Elab(e), common.json),
                }
            }
            let report = match campaign_parallel(
                &sealed[0],
                &sealed[1],
                &iface,
                clients,
                max_len,
                seed,
                FuelBudget(fuel),
                jobs,
            ) {
                Ok(r) => r,
                Err(e) => return report_failure(&Failure::Elab(e), common.json),
            };
            if common.json {
                println!(
                    "{}",
                    report_json(&report, &impls[0], &impls[1], &sig, clients, max_len, seed)
                );
            } else {
                println!(
                    "agree {}  disagree {}  inconclusive {}",
                    report.agree, report.disagree, report.inconclusive
                );
                if let Some(ce) = &report.first_counterexample {
                    println!(
                        "first counterexample: client {} (seed {}): {} gave {} vs {}",
                        ce.index, ce.seed, ce.script, ce.outcome_a, ce.outcome_b
                    );
                }
            }
            if report.disagree > 0 {
                ExitCode::from(EXIT_DIAGNOSTIC)
            } else {
                ExitCode::from(EXIT_OK)
            }
        }
    }
}
