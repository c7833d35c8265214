//! Command-line front end: load an f-structure and a lexicon, derive all
//! readings, print them in rank order.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gluesem::fstruct::parse_fstructure;
use gluesem::lexicon::{instantiate_entries, parse_lexicon};
use gluesem::prover::{derive_readings, render_trace, ProveError, SearchLimits};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Structured,
}

/// Derive the meanings of a sentence from its f-structure and a glue
/// lexicon.
#[derive(Parser)]
#[command(name = "gluesem", version)]
struct Args {
    /// F-structure file
    #[arg(long)]
    fstruct: PathBuf,

    /// Lexicon file
    #[arg(long)]
    lexicon: PathBuf,

    /// Extra quantified-NP duplications to allow
    #[arg(long, default_value_t = 2)]
    max_qnp: usize,

    /// Proof-search step budget
    #[arg(long, default_value_t = 100_000)]
    max_steps: u64,

    /// Print each reading's derivation trace
    #[arg(long)]
    trace: bool,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,

    /// Print only the top-ranked reading
    #[arg(long)]
    first: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let fs_text = match std::fs::read_to_string(&args.fstruct) {
        Ok(t) => t,
        Err(e) => return input_error(format_args!("{}: {e}", args.fstruct.display())),
    };
    let lex_text = match std::fs::read_to_string(&args.lexicon) {
        Ok(t) => t,
        Err(e) => return input_error(format_args!("{}: {e}", args.lexicon.display())),
    };
    let fs = match parse_fstructure(&fs_text) {
        Ok(fs) => fs,
        Err(e) => return input_error(format_args!("{}: {e}", args.fstruct.display())),
    };
    let lex = match parse_lexicon(&lex_text) {
        Ok(lex) => lex,
        Err(e) => return input_error(format_args!("{}: {e}", args.lexicon.display())),
    };
    let premises = match instantiate_entries(&fs, &lex) {
        Ok(p) => p,
        Err(e) => return input_error(format_args!("{}: {e}", args.lexicon.display())),
    };

    let limits = SearchLimits {
        max_qnp_dups: args.max_qnp,
        max_steps: args.max_steps,
        ..SearchLimits::default()
    };
    let mut readings = match derive_readings(&premises, &fs.root, &limits) {
        Ok(rs) => rs,
        Err(e @ ProveError::NoReading { .. }) | Err(e @ ProveError::StepLimit(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.first {
        readings.truncate(1);
    }

    let min_dups = readings[0].qnp_dups;
    match args.format {
        Format::Pretty => {
            for (i, r) in readings.iter().enumerate() {
                let mark = if r.qnp_dups > min_dups { " (dispreferred)" } else { "" };
                println!("#{} [qnp={}] {}{mark}", i + 1, r.qnp_dups, r.meaning);
                if args.trace {
                    print!("{}", render_trace(&r.trace));
                }
            }
        }
        Format::Structured => {
            let list: Vec<serde_json::Value> = readings
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let bang: serde_json::Map<String, serde_json::Value> = r
                        .bang_uses
                        .iter()
                        .map(|(k, n)| (k.clone(), serde_json::json!(n)))
                        .collect();
                    let mut obj = serde_json::json!({
                        "rank": i + 1,
                        "qnp": r.qnp_dups,
                        "meaning": r.meaning.to_string(),
                        "dispreferred": r.qnp_dups > min_dups,
                        "bang_uses": bang,
                    });
                    if args.trace {
                        let lines: Vec<String> =
                            r.trace.iter().map(|s| s.to_string()).collect();
                        obj["trace"] = serde_json::json!(lines);
                    }
                    obj
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({ "readings": list }))
                    .expect("serializable")
            );
        }
    }
    ExitCode::SUCCESS
}

fn input_error(msg: std::fmt::Arguments<'_>) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}
