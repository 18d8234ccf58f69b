//! `cirquent`: batch front end for the clustered-choice game logic library.
//!
//! Exit codes, uniform across subcommands:
//! * 0 — success: parsed / accepted / valid / proof OK / all instances agree / play won;
//! * 1 — negative verdict: rejected / invalid / check failure / mismatches / play lost;
//! * 2 — usage or input errors: unreadable files, parse errors, open
//!   cirquents where closed ones are required, oracle limits exceeded.
//!
//! `--format json` emits one JSON object per invocation with fixed field
//! names; text and JSON carry the same information.

use std::fmt::Display;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cirquent::calculus::{
    apply_rule, check_fragment, check_proof, format_proof, parse_proof, Justification, Proof,
    ProofLine,
};
use cirquent::corpus::{
    run_agreement_exhaustive, run_agreement_random, run_preservation, run_purity, CorpusSpec,
};
use cirquent::decide::{decide, DecideError};
use cirquent::oracle::{oracle_valid_with, OracleLimits};
use cirquent::purify::{purify, rank, Rank};
use cirquent::semantics::{check_legal, parse_run, residue, won, Interpretation};
use cirquent::{parse, print, Cirquent};

#[derive(Parser)]
#[command(name = "cirquent", version, about = "Clustered-choice game logic toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a cirquent and report its structure.
    Parse {
        /// Input file holding one cirquent (`-` for stdin).
        file: String,
    },
    /// Parse a cirquent and reprint it in canonical syntax.
    Print {
        /// Input file holding one cirquent (`-` for stdin).
        file: String,
    },
    /// Compute the rank of a cirquent.
    Rank {
        /// Input file holding one cirquent (`-` for stdin).
        file: String,
    },
    /// Purify a closed cirquent.
    Purify {
        /// Input file holding one closed cirquent (`-` for stdin).
        file: String,
        /// Write the pure-to-input replay as a derivation fragment file.
        #[arg(long)]
        derivation: Option<PathBuf>,
    },
    /// Decide validity of a closed cirquent.
    Decide {
        /// Input file holding one closed cirquent (`-` for stdin).
        file: String,
        /// On ACCEPT, write the extracted proof here.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Include the recursion trace in the output.
        #[arg(long)]
        trace: bool,
    },
    /// Check a proof file, or a derivation fragment whose first line is a
    /// Premise.
    Check {
        /// Proof file (`-` for stdin).
        file: String,
    },
    /// Run the brute-force game-search oracle on a closed cirquent.
    Oracle {
        /// Input file holding one closed cirquent (`-` for stdin).
        file: String,
        /// Most distinct clusters the search will accept.
        #[arg(long, default_value_t = OracleLimits::default().max_clusters)]
        max_clusters: usize,
        /// Largest quantifier domain the search will accept.
        #[arg(long, default_value_t = OracleLimits::default().max_domain)]
        max_domain: usize,
    },
    /// Run a differential-testing batch and report disagreements.
    Corpus(CorpusArgs),
    /// Compute the residue of a closed cirquent under a run, and the win
    /// verdict under an interpretation.
    Residue {
        /// Input file holding one closed cirquent (`-` for stdin).
        file: String,
        /// The run: whitespace-separated moves like `E:c.0 M:o.1`.
        #[arg(long, default_value = "")]
        run: String,
        /// True ground atoms, comma-separated, like `p(0), q`; every other
        /// ground atom is false.
        #[arg(long, default_value = "")]
        interpretation: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Decision procedure versus game-search oracle.
    Agreement,
    /// Rule applications preserve validity in the required directions.
    Preservation,
    /// Purification invariants: purity, rank decrease, derivation replay.
    Purity,
}

#[derive(Args)]
struct CorpusArgs {
    /// Which harness to run.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Enumerate the whole depth <= 3 exhaustive tier instead of sampling
    /// (agreement mode only).
    #[arg(long, conflicts_with_all = ["count", "seed", "max_depth"])]
    exhaustive: bool,
    /// Number of random instances.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// RNG seed; identical seeds give byte-identical reports.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum tree depth of random instances (a lone leaf has depth 1).
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    /// Predicate alphabet: comma-separated `name/arity` pairs.
    #[arg(long, default_value = "p/1,q/0")]
    predicates: String,
    /// Distinct cluster names available per kind.
    #[arg(long, default_value_t = 2)]
    clusters_per_kind: usize,
    /// Constant pool: comma-separated numerals.
    #[arg(long, default_value = "0,1")]
    constants: String,
    /// Oracle cluster limit for validity checks.
    #[arg(long, default_value_t = OracleLimits::default().max_clusters)]
    max_clusters: usize,
    /// Oracle domain limit for validity checks.
    #[arg(long, default_value_t = OracleLimits::default().max_domain)]
    max_domain: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

/// Reads an input argument: a file path, or `-` for stdin.
fn read_input(file: &str) -> Result<String> {
    if file == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        std::fs::read_to_string(file).with_context(|| format!("reading {file}"))
    }
}

/// Parses the single cirquent in an input file (comments after `#` and blank
/// lines are ignored; the remaining lines must form one term).
fn read_cirquent(file: &str) -> Result<Cirquent> {
    let raw = read_input(file)?;
    let text: String = raw
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let trimmed = text.trim();
    if trimmed.is_empty() {
        bail!("input holds no cirquent");
    }
    parse(trimmed).map_err(|e| anyhow!("bad cirquent: {e}"))
}

fn read_closed_cirquent(file: &str) -> Result<Cirquent> {
    let c = read_cirquent(file)?;
    if !c.is_closed() {
        bail!(
            "cirquent has free variables: {}",
            c.free_vars().into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(c)
}

fn emit<T: Serialize>(format: Format, json: &T, text: impl Display) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(json).expect("serializable")),
        Format::Text => println!("{text}"),
    }
}

fn verdict_code(positive: bool) -> ExitCode {
    if positive {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let format = cli.format;
    match cli.cmd {
        Cmd::Parse { file } => {
            let c = read_cirquent(&file)?;
            #[derive(Serialize)]
            struct Out {
                ok: bool,
                cirquent: String,
                closed: bool,
                clusters: usize,
            }
            let out = Out {
                ok: true,
                cirquent: print(&c),
                closed: c.is_closed(),
                clusters: c.clusters_of().len(),
            };
            emit(
                format,
                &out,
                format!(
                    "OK\ncirquent: {}\nclosed: {}\nclusters: {}",
                    out.cirquent, out.closed, out.clusters
                ),
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Print { file } => {
            let c = read_cirquent(&file)?;
            #[derive(Serialize)]
            struct Out {
                cirquent: String,
            }
            let out = Out { cirquent: print(&c) };
            emit(format, &out, &out.cirquent);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rank { file } => {
            let c = read_cirquent(&file)?;
            #[derive(Serialize)]
            struct Out {
                overflow: bool,
                rank: Option<String>,
                detail: Option<String>,
            }
            let r = rank(&c);
            let out = match &r {
                Rank::Finite(n) => Out {
                    overflow: false,
                    rank: Some(n.to_string()),
                    detail: None,
                },
                Rank::Overflow(d) => Out {
                    overflow: true,
                    rank: None,
                    detail: Some(d.clone()),
                },
            };
            emit(format, &out, r);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Purify { file, derivation } => {
            let c = read_closed_cirquent(&file)?;
            let result = purify(&c);
            if let Some(path) = derivation {
                let fragment = derivation_fragment(&result.pure, &result.derivation)?;
                std::fs::write(&path, format_proof(&fragment))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            #[derive(Serialize)]
            struct Out {
                pure: String,
                rewrites: usize,
                derivation_steps: usize,
            }
            let out = Out {
                pure: print(&result.pure),
                rewrites: result.stage_trace.len(),
                derivation_steps: result.derivation.len(),
            };
            emit(
                format,
                &out,
                format!(
                    "pure: {}\nrewrites: {}\nderivation steps: {}",
                    out.pure, out.rewrites, out.derivation_steps
                ),
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decide { file, proof, trace } => {
            let c = read_closed_cirquent(&file)?;
            let outcome = decide(&c).map_err(|e| match e {
                DecideError::NotClosed => anyhow!("cirquent has free variables"),
                DecideError::Invalid(e) => anyhow!("bad cirquent: {e}"),
            })?;
            let proof_lines = outcome.proof.as_ref().map(|p| p.lines.len());
            if let Some(path) = &proof {
                match &outcome.proof {
                    Some(p) => std::fs::write(path, format_proof(p))
                        .with_context(|| format!("writing {}", path.display()))?,
                    None => bail!("no proof to write: the cirquent was rejected"),
                }
            }
            #[derive(Serialize)]
            struct Out<'a> {
                verdict: &'static str,
                proof_lines: Option<usize>,
                trace: Option<&'a cirquent::decide::TraceNode>,
            }
            let out = Out {
                verdict: if outcome.accept { "accept" } else { "reject" },
                proof_lines,
                trace: trace.then_some(&outcome.trace),
            };
            let mut text = if outcome.accept {
                match proof_lines {
                    Some(n) => format!("ACCEPT ({n} proof lines)"),
                    None => "ACCEPT".to_string(),
                }
            } else {
                "REJECT".to_string()
            };
            if trace {
                text = format!("{}\n{text}", outcome.trace);
            }
            emit(format, &out, text);
            Ok(verdict_code(outcome.accept))
        }
        Cmd::Check { file } => {
            let text = read_input(&file)?;
            let proof = parse_proof(&text).map_err(|e| anyhow!("{e}"))?;
            let is_fragment = proof
                .lines
                .first()
                .is_some_and(|l| l.justification == Justification::Premise);
            #[derive(Serialize)]
            struct Out {
                ok: bool,
                kind: &'static str,
                theorem: Option<String>,
                premise: Option<String>,
                line: Option<usize>,
                message: Option<String>,
            }
            let (out, text, code) = if is_fragment {
                match check_fragment(&proof) {
                    Ok((premise, conclusion)) => {
                        let out = Out {
                            ok: true,
                            kind: "fragment",
                            theorem: Some(print(&conclusion)),
                            premise: Some(print(&premise)),
                            line: None,
                            message: None,
                        };
                        let text = format!(
                            "OK {} (from premise {})",
                            out.theorem.as_deref().unwrap(),
                            out.premise.as_deref().unwrap()
                        );
                        (out, text, ExitCode::SUCCESS)
                    }
                    Err(d) => (
                        Out {
                            ok: false,
                            kind: "fragment",
                            theorem: None,
                            premise: None,
                            line: Some(d.index),
                            message: Some(d.message.clone()),
                        },
                        format!("line {}: {}", d.index, d.message),
                        ExitCode::from(1),
                    ),
                }
            } else {
                match check_proof(&proof) {
                    Ok(theorem) => {
                        let out = Out {
                            ok: true,
                            kind: "proof",
                            theorem: Some(print(&theorem)),
                            premise: None,
                            line: None,
                            message: None,
                        };
                        let text = format!("OK {}", out.theorem.as_deref().unwrap());
                        (out, text, ExitCode::SUCCESS)
                    }
                    Err(d) => (
                        Out {
                            ok: false,
                            kind: "proof",
                            theorem: None,
                            premise: None,
                            line: Some(d.index),
                            message: Some(d.message.clone()),
                        },
                        format!("line {}: {}", d.index, d.message),
                        ExitCode::from(1),
                    ),
                }
            };
            emit(format, &out, text);
            Ok(code)
        }
        Cmd::Oracle {
            file,
            max_clusters,
            max_domain,
        } => {
            let c = read_closed_cirquent(&file)?;
            let limits = OracleLimits {
                max_clusters,
                max_domain,
            };
            let valid = oracle_valid_with(&c, &limits).map_err(|e| anyhow!("{e}"))?;
            #[derive(Serialize)]
            struct Out {
                valid: bool,
            }
            emit(
                format,
                &Out { valid },
                if valid { "VALID" } else { "INVALID" },
            );
            Ok(verdict_code(valid))
        }
        Cmd::Corpus(args) => run_corpus(format, args),
        Cmd::Residue {
            file,
            run,
            interpretation,
        } => {
            let c = read_closed_cirquent(&file)?;
            let clusters = c.clusters_of();
            let moves = parse_run(&run, |name| clusters.get(name).map(|(kind, _)| *kind))
                .map_err(|e| anyhow!("bad run: {e}"))?;
            let run = check_legal(moves).map_err(|e| anyhow!("illegal run: {e}"))?;
            let interp = Interpretation::parse(&interpretation.replace(',', "\n"))
                .map_err(|e| anyhow!("bad interpretation: {e}"))?;
            let res = residue(&c, &run);
            let win = won(&c, &run, &interp);
            #[derive(Serialize)]
            struct Out {
                residue: String,
                won: bool,
            }
            let out = Out {
                residue: print(&res),
                won: win,
            };
            emit(
                format,
                &out,
                format!("residue: {}\nwon: {}", out.residue, out.won),
            );
            Ok(verdict_code(win))
        }
    }
}

/// Renders the purification replay as a derivation fragment: line 1 assumes
/// the pure cirquent as a premise, and every later line applies one recorded
/// rule, ending at the purified input (up to renaming of bound variables).
fn derivation_fragment(
    pure: &Cirquent,
    steps: &[cirquent::purify::DerivationStep],
) -> Result<Proof> {
    let mut lines = vec![ProofLine {
        index: 1,
        cirquent: pure.clone(),
        justification: Justification::Premise,
    }];
    let mut cur = pure.clone();
    for (i, step) in steps.iter().enumerate() {
        cur = apply_rule(step.rule, std::slice::from_ref(&cur), &step.witness)
            .map_err(|e| anyhow!("recorded derivation does not replay: {e}"))?;
        lines.push(ProofLine {
            index: i + 2,
            cirquent: cur.clone(),
            justification: Justification::Rule {
                rule: step.rule,
                premises: vec![i + 1],
                witness: step.witness.clone(),
            },
        });
    }
    Ok(Proof { lines })
}

fn parse_predicates(text: &str) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, arity) = part
            .split_once('/')
            .ok_or_else(|| anyhow!("predicate `{part}` is not `name/arity`"))?;
        out.push((
            name.trim().to_string(),
            arity
                .trim()
                .parse()
                .map_err(|_| anyhow!("bad arity in `{part}`"))?,
        ));
    }
    if out.is_empty() {
        bail!("predicate alphabet is empty");
    }
    Ok(out)
}

fn parse_constants(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse().map_err(|_| anyhow!("bad constant `{part}`"))?);
    }
    if out.is_empty() {
        bail!("constant pool is empty");
    }
    Ok(out)
}

fn run_corpus(format: Format, args: CorpusArgs) -> Result<ExitCode> {
    let spec = CorpusSpec {
        max_depth: args.max_depth,
        predicates: parse_predicates(&args.predicates)?,
        clusters_per_kind: args.clusters_per_kind,
        constants: parse_constants(&args.constants)?,
    };
    let limits = OracleLimits {
        max_clusters: args.max_clusters,
        max_domain: args.max_domain,
    };
    match args.mode {
        Mode::Agreement => {
            let report = if args.exhaustive {
                run_agreement_exhaustive(&limits)
            } else {
                run_agreement_random(&spec, args.count, args.seed, &limits)
            };
            let mut text = format!(
                "instances: {}\naccepted: {}\nmismatches: {}",
                report.total,
                report.accepted,
                report.mismatches.len()
            );
            for m in &report.mismatches {
                text.push_str(&format!(
                    "\n  #{}: decision={} oracle={} {}",
                    m.index, m.decision, m.oracle, m.cirquent
                ));
            }
            emit(format, &report, text);
            Ok(verdict_code(report.ok()))
        }
        Mode::Preservation => {
            if args.exhaustive {
                bail!("--exhaustive applies to agreement mode only");
            }
            let report = run_preservation(&spec, args.count, args.seed);
            let mut text = format!(
                "applications: {}\nforward checks: {}\nbackward checks: {}\nviolations: {}",
                report.total,
                report.forward_applicable,
                report.backward_applicable,
                report.violations.len()
            );
            for v in &report.violations {
                text.push_str(&format!(
                    "\n  #{} {} [{}] {} from {}",
                    v.index,
                    v.rule,
                    v.direction,
                    v.conclusion,
                    v.premises.join(" ; ")
                ));
            }
            emit(format, &report, text);
            Ok(verdict_code(report.ok()))
        }
        Mode::Purity => {
            if args.exhaustive {
                bail!("--exhaustive applies to agreement mode only");
            }
            let report = run_purity(&spec, args.count, args.seed);
            let mut text = format!(
                "instances: {}\nrewrites: {}\nviolations: {}",
                report.total,
                report.rewrites,
                report.violations.len()
            );
            for v in &report.violations {
                text.push_str(&format!("\n  #{}: {} on {}", v.index, v.problem, v.cirquent));
            }
            emit(format, &report, text);
            Ok(verdict_code(report.ok()))
        }
    }
}
