//! The `ikw` command-line front end.
//!
//! Exit codes follow scripting conventions: `0` for a completed
//! computation (a `false` verdict is still a success), `1` for semantic
//! failures — law violations, inadmissible inputs, failed suites — and
//! `2` for usage and parse errors.  Commands that emit a model print its
//! JSON to stdout unless `--out` redirects it to a file.

pub mod diff;
pub mod suites;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::asim::{check_asimulation_raw, greatest_asimulation, AsimError, RawAsimulation};
use crate::kripke::{KripkeModel, ModelData, ModelError};
use crate::semantics::{check_admissible, eval, EvalError, Logic, DEFAULT_MAX_SENTENCES};
use crate::syntax::{parse_formula, Signature, SyntaxError};
use crate::transform::{
    quotient, star_expand, unravel, Congruence, TransformError, UnravelMode,
};
use diff::{diff_logics, seeded_corpus, DiffReport};
use suites::{run_suite, SuiteParams, SUITE_NAMES};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Asim(#[from] AsimError),
    #[error("{0}")]
    Transform(#[from] TransformError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Json(_) | CliError::Syntax(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn parse_logic(s: &str) -> Result<Logic, String> {
    s.parse::<Logic>().map_err(|e| e.to_string())
}

// Stdout may be a pipe that closes early (`ikw ... | head`); dropping
// the write error beats aborting mid-report.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Logic presentation: IL, ILeq, In, Ineq, CD, CDeq, Bi, or Bieq.
    #[arg(long, global = true, default_value = "IL", value_parser = parse_logic)]
    pub logic: Logic,
    /// Rank bound for slice-approximated reports.
    #[arg(long, global = true, default_value_t = 3)]
    pub rank: u32,
    /// Seed for randomized corpora and suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Parser)]
#[command(name = "ikw", version, about = "Workbench for finite first-order Kripke models")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Check a model file against the structural laws.
    Validate { model: PathBuf },
    /// Evaluate a formula at a world of a model.
    Eval {
        model: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long)]
        formula: String,
        /// Comma-separated element names assigned to x1, x2, ...
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<String>,
    },
    /// Search for an asimulation between two pointed models.
    Asim {
        model1: PathBuf,
        world1: String,
        model2: PathBuf,
        world2: String,
        /// Comma-separated tuple over the first model.
        #[arg(long, value_delimiter = ',')]
        tuple1: Vec<String>,
        /// Comma-separated tuple over the second model.
        #[arg(long, value_delimiter = ',')]
        tuple2: Vec<String>,
        /// Check this pair-list file instead of searching.
        #[arg(long)]
        relation: Option<PathBuf>,
    },
    /// Unravel a model around a world into a tree of paths.
    Unravel {
        model: PathBuf,
        #[arg(long)]
        world: String,
        /// strict or bounded
        #[arg(long, default_value = "strict")]
        mode: String,
        /// Path-length bound for bounded mode.
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quotient a model by a congruence given as generator classes.
    Quotient {
        model: PathBuf,
        /// JSON file: {"world": [["a","b"], ...], ...}
        #[arg(long)]
        congruence: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adjoin the order-tracking predicates around a world.
    Star {
        model: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the model with an injective hom system.
    Injectivize {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare sentence validity across the eight presentations.
    DiffLogics {
        /// One sentence per line; blank lines and # comments skipped.
        #[arg(long)]
        sentence_file: PathBuf,
        /// Directory of model JSON files to use as the corpus.
        #[arg(long, conflicts_with = "seeds")]
        corpus_dir: Option<PathBuf>,
        /// Number of seeded corpus models when no directory is given.
        #[arg(long, default_value_t = 40)]
        seeds: usize,
        /// Signature JSON for the seeded corpus.
        #[arg(long)]
        signature: Option<PathBuf>,
    },
    /// Run a named property suite.
    Suite {
        name: String,
        /// Override the suite's default case count.
        #[arg(long)]
        count: Option<usize>,
    },
}

/// Parses the process arguments and runs the selected command,
/// returning the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let o = &cli.opts;
    match &cli.cmd {
        Cmd::Validate { model } => cmd_validate(model, o),
        Cmd::Eval {
            model,
            world,
            formula,
            tuple,
        } => cmd_eval(model, world, formula, tuple, o),
        Cmd::Asim {
            model1,
            world1,
            model2,
            world2,
            tuple1,
            tuple2,
            relation,
        } => cmd_asim(model1, world1, model2, world2, tuple1, tuple2, relation, o),
        Cmd::Unravel {
            model,
            world,
            mode,
            depth,
            out,
        } => cmd_unravel(model, world, mode, *depth, out, o),
        Cmd::Quotient {
            model,
            congruence,
            out,
        } => cmd_quotient(model, congruence, out, o),
        Cmd::Star { model, world, out } => cmd_star(model, world, out, o),
        Cmd::Injectivize { model, out } => cmd_injectivize(model, out, o),
        Cmd::DiffLogics {
            sentence_file,
            corpus_dir,
            seeds,
            signature,
        } => cmd_diff_logics(sentence_file, corpus_dir, *seeds, signature, o),
        Cmd::Suite { name, count } => cmd_suite(name, *count, o),
    }
}

// Malformed JSON is a parse error (exit 2); a file that parses but
// breaks the structural laws is semantic (exit 1).
fn load_model(path: &Path) -> Result<KripkeModel, CliError> {
    let text = fs::read_to_string(path)?;
    let data: ModelData = serde_json::from_str(&text)?;
    Ok(KripkeModel::from_data(&data)?)
}

fn header(cmd: &str, o: &GlobalOpts) {
    say!(
        "ikw {cmd} | logic {} | rank {} | cap {} | seed {}",
        o.logic, o.rank, DEFAULT_MAX_SENTENCES, o.seed
    );
}

fn emit_model(
    m: &KripkeModel,
    out: &Option<PathBuf>,
    o: &GlobalOpts,
    cmd: &str,
    summary: &str,
) -> Result<(), CliError> {
    let text = m.to_json();
    match out {
        Some(path) => {
            fs::write(path, &text)?;
            if o.json {
                say!(
                    "{}",
                    json!({ "worlds": m.n_worlds(), "summary": summary, "out": path })
                );
            } else {
                header(cmd, o);
                say!("{summary}");
                say!("wrote {} worlds to {}", m.n_worlds(), path.display());
            }
        }
        // The model itself is the payload; keep stdout clean for pipes.
        None => say!("{text}"),
    }
    Ok(())
}

fn cmd_validate(model: &Path, o: &GlobalOpts) -> Result<i32, CliError> {
    let m = load_model(model)?;
    let diags = m.validate();
    let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    if o.json {
        say!(
            "{}",
            json!({ "worlds": m.n_worlds(), "diagnostics": msgs, "ok": msgs.is_empty() })
        );
    } else {
        header("validate", o);
        say!("worlds: {} | elements: {}", m.n_worlds(), m.all_elements().len());
        for d in &msgs {
            say!("violation: {d}");
        }
        say!("{}", if msgs.is_empty() { "ok" } else { "invalid" });
    }
    Ok(if msgs.is_empty() { 0 } else { 1 })
}

fn cmd_eval(
    model: &Path,
    world: &str,
    formula: &str,
    tuple: &[String],
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let m = load_model(model)?;
    check_admissible(o.logic, &m)?;
    let f = parse_formula(formula, m.sig())?;
    let verdict = eval(o.logic, &m, world, &f, tuple)?;
    if o.json {
        say!("{}", json!({ "verdict": verdict }));
    } else {
        header("eval", o);
        say!("{verdict}");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_asim(
    model1: &Path,
    world1: &str,
    model2: &Path,
    world2: &str,
    tuple1: &[String],
    tuple2: &[String],
    relation: &Option<PathBuf>,
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let m1 = load_model(model1)?;
    let m2 = load_model(model2)?;
    if let Some(path) = relation {
        let raw = RawAsimulation::from_json(&fs::read_to_string(path)?)?;
        let outcome =
            check_asimulation_raw(o.logic, &m1, &m2, &raw, world1, tuple1, world2, tuple2)?;
        return match outcome {
            None => {
                if o.json {
                    say!("{}", json!({ "passes": true, "pairs": raw.len() }));
                } else {
                    header("asim", o);
                    say!("relation passes ({} pairs)", raw.len());
                }
                Ok(0)
            }
            Some(v) => {
                if o.json {
                    say!("{}", json!({ "passes": false, "violation": v.to_string() }));
                } else {
                    header("asim", o);
                    say!("violation: {v}");
                }
                Ok(1)
            }
        };
    }
    let found = greatest_asimulation(o.logic, &m1, world1, tuple1, &m2, world2, tuple2)?;
    let positions = found.as_ref().map_or(0, |r| r.len());
    if o.json {
        say!(
            "{}",
            json!({ "exists": found.is_some(), "positions": positions })
        );
    } else {
        header("asim", o);
        match found {
            Some(_) => say!("yes ({positions} surviving positions)"),
            None => say!("no"),
        }
    }
    Ok(0)
}

fn cmd_unravel(
    model: &Path,
    world: &str,
    mode: &str,
    depth: u32,
    out: &Option<PathBuf>,
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let m = load_model(model)?;
    let mode = match mode {
        "strict" => UnravelMode::Strict,
        "bounded" => UnravelMode::Bounded(depth),
        other => {
            return Err(CliError::Usage(format!(
                "unknown mode `{other}` (expected strict or bounded)"
            )))
        }
    };
    let un = unravel(&m, world, mode)?;
    let summary = format!("unravelled around `{world}` into {} path worlds", un.n_worlds());
    emit_model(&un, out, o, "unravel", &summary)?;
    Ok(0)
}

fn cmd_quotient(
    model: &Path,
    congruence: &Path,
    out: &Option<PathBuf>,
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let m = load_model(model)?;
    let text = fs::read_to_string(congruence)?;
    // Shape errors in the file are parse errors; binding the classes to
    // the model is semantic.
    serde_json::from_str::<std::collections::BTreeMap<String, Vec<Vec<String>>>>(&text)?;
    let cong = Congruence::from_json(&m, &text)?;
    let q = quotient(o.logic, &m, &cong)?;
    let merged = m.all_elements().len() - q.all_elements().len();
    let summary = format!("quotient merged {merged} elements");
    emit_model(&q, out, o, "quotient", &summary)?;
    Ok(0)
}

fn cmd_star(
    model: &Path,
    world: &str,
    out: &Option<PathBuf>,
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let m = load_model(model)?;
    let star = star_expand(&m, world)?;
    let summary = format!(
        "adjoined {} positive and {} negative trackers around `{world}`",
        star.plus.len(),
        star.minus.len()
    );
    emit_model(&star.model, out, o, "star", &summary)?;
    Ok(0)
}

fn cmd_injectivize(model: &Path, out: &Option<PathBuf>, o: &GlobalOpts) -> Result<i32, CliError> {
    let m = load_model(model)?;
    let inj = m.injectivize()?;
    let split: usize = inj.fibers.values().filter(|f| f.len() > 1).count();
    let summary = format!(
        "separated {} shared targets; {} elements total",
        split,
        inj.model.all_elements().len()
    );
    emit_model(&inj.model, out, o, "injectivize", &summary)?;
    Ok(0)
}

fn default_diff_signature() -> Signature {
    Signature::new(
        vec![("P".to_string(), 1), ("Q".to_string(), 1)],
        vec!["c".to_string()],
        true,
    )
    .expect("fixed signature")
}

fn print_diff(report: &DiffReport) {
    say!(
        "corpus: {} models | admissible: {}",
        report.corpus,
        report
            .admissible
            .iter()
            .map(|(l, n)| format!("{l}={n}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    for entry in &report.sentences {
        say!("sentence: {}", entry.sentence);
        for logic in crate::semantics::Logic::ALL {
            let label = logic.to_string();
            say!("  {label:<5} {}", entry.verdicts[&label]);
        }
    }
    say!(
        "relativizations: {}",
        if report.relativizations_ok { "ok" } else { "violated" }
    );
}

fn cmd_diff_logics(
    sentence_file: &Path,
    corpus_dir: &Option<PathBuf>,
    seeds: usize,
    signature: &Option<PathBuf>,
    o: &GlobalOpts,
) -> Result<i32, CliError> {
    let sentences: Vec<String> = fs::read_to_string(sentence_file)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    if sentences.is_empty() {
        return Err(CliError::Usage("the sentence file is empty".to_string()));
    }
    let corpus = match corpus_dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(CliError::Usage(format!(
                    "no .json models under {}",
                    dir.display()
                )));
            }
            let mut corpus = Vec::new();
            for p in paths {
                let label = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string());
                corpus.push((label, load_model(&p)?));
            }
            corpus
        }
        None => {
            let sig = match signature {
                Some(p) => serde_json::from_str::<Signature>(&fs::read_to_string(p)?)?,
                None => default_diff_signature(),
            };
            seeded_corpus(&sig, seeds, o.seed)
        }
    };
    let report = diff_logics(&sentences, &corpus);
    if o.json {
        say!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        header("diff-logics", o);
        print_diff(&report);
    }
    Ok(if report.relativizations_ok { 0 } else { 1 })
}

fn cmd_suite(name: &str, count: Option<usize>, o: &GlobalOpts) -> Result<i32, CliError> {
    let params = SuiteParams {
        seed: o.seed,
        count,
        rank: o.rank,
    };
    let Some(report) = run_suite(name, &params) else {
        return Err(CliError::Usage(format!(
            "unknown suite `{name}` (expected one of: {})",
            SUITE_NAMES.join(", ")
        )));
    };
    if o.json {
        say!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        header(&format!("suite {name}"), o);
        say!(
            "cases: {} | failures: {} | time: {} ms",
            report.cases,
            report.failures.len(),
            report.millis
        );
        for f in report.failures.iter().take(10) {
            say!(
                "  seed {} | {} | {} | expected {} | got {}",
                f.seed, f.formula, f.worlds, f.expected, f.got
            );
        }
        if report.failures.len() > 10 {
            say!("  ... and {} more", report.failures.len() - 10);
        }
    }
    Ok(if report.passed() { 0 } else { 1 })
}
