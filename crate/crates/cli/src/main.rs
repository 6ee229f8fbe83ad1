//! `nestlog`: evaluate nested and modal Datalog, algebra expressions and
//! `FILTER EXISTS` semantics profiles from the command line.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nestlog::algebra::{
    check_translation_equivalence, eval_translated, eval_with_options, translate_algebra, Relation, TranslateOptions,
};
use nestlog::datalog::{answer_with, NestedSemantics};
use nestlog::exists::{compare_profiles, SemanticsProfile};
use nestlog::model::{Mode, Query};
use nestlog::nesting::SubstitutionStrategy;
use nestlog::syntax::{parse_algebra, parse_atom, parse_facts_file, parse_program, FactsFile};
use nestlog::worlds::{exhaustive_literal_check, exhaustive_operator_check};
use nestlog::Error;
use output::{Cell, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "nestlog", version, about = "Nested and modal Datalog with configurable FILTER EXISTS semantics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Print per-stratum derivations and substitution placements on standard error.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(clap::Args, Debug)]
struct ExprArgs {
    /// Algebra expression, or a file containing one.
    #[arg(long)]
    expr: String,
    /// Facts file; its `@schema` lines give attributes to bare relation names.
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Translate renaming with the literal rule that pins the new attribute to null.
    #[arg(long)]
    paper_rename: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a (nested, optionally modal) Datalog query.
    Eval {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Goal atom, e.g. `p(X, Y)`; defaults to the program's `?-` goal or first rule head.
        #[arg(long)]
        goal: Option<String>,
        /// Evaluate modally; rules without a mode are read as box rules.
        #[arg(long)]
        modal: bool,
        /// How outer substitutions reach nested queries: `top-down`, `bottom-up`,
        /// `syntactic`, `partial=N`, `improper=R`, or a placement such as `points=goal,0.1`.
        #[arg(long, default_value = "top-down", conflicts_with = "profile")]
        strategy: String,
        /// Use a semantics profile for nested queries instead of a strategy.
        #[arg(long)]
        profile: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate an algebra expression.
    Algebra {
        #[command(flatten)]
        expr: ExprArgs,
        /// Semantics profile for exists nodes.
        #[arg(long, default_value = "spec-top-down")]
        profile: String,
        /// Evaluate through the Modal Datalog translation instead of directly.
        #[arg(long)]
        translated: bool,
        /// Compare direct and translated evaluation and list differing tuples.
        #[arg(long, conflicts_with = "translated")]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the Modal Datalog translation of an algebra expression.
    Translate {
        #[command(flatten)]
        expr: ExprArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate an algebra expression under several profiles and explain disagreements.
    Compare {
        #[command(flatten)]
        expr: ExprArgs,
        /// Comma-separated profile names.
        #[arg(long, value_delimiter = ',', default_value = "fuseki,blazegraph,virtuoso,rdf4j")]
        profiles: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the modal decisions against the possible-worlds oracle.
    Oracle {
        #[arg(long, value_enum)]
        check: OracleCheck,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleCheck {
    Literal,
    Operator,
}

/// A failure, reported with exit code 1 (user error) or 2 (internal).
#[derive(Debug)]
enum Failure {
    User(String),
    Internal(String),
}

impl Failure {
    fn at(path: Option<&Path>, err: Error) -> Failure {
        match path {
            Some(p) if err.position().is_some() => Failure::User(format!("{}:{err}", p.display())),
            Some(p) => Failure::User(format!("{}: {err}", p.display())),
            None => Failure::User(err.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::at(None, err)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn load_facts(path: Option<&PathBuf>) -> Result<FactsFile, Failure> {
    match path {
        None => Ok(FactsFile::default()),
        Some(p) => parse_facts_file(&read(p)?).map_err(|e| Failure::at(Some(p), e)),
    }
}

/// The expression and the facts it runs over.
fn load_expr(args: &ExprArgs) -> Result<(nestlog::algebra::AlgebraExpr, FactsFile), Failure> {
    let facts = load_facts(args.facts.as_ref())?;
    let path = Path::new(&args.expr);
    let (text, origin) = if path.is_file() { (read(path)?, Some(path)) } else { (args.expr.clone(), None) };
    let expr = parse_algebra(&text, &facts.schemas).map_err(|e| Failure::at(origin, e))?;
    Ok((expr, facts))
}

fn options(args: &ExprArgs) -> TranslateOptions {
    TranslateOptions { paper_rename: args.paper_rename }
}

fn init_trace(on: bool) {
    if on {
        tracing_subscriber::fmt()
            .with_env_filter(tracing_subscriber::EnvFilter::new("nestlog=trace"))
            .with_writer(std::io::stderr)
            .without_time()
            .with_target(false)
            .init();
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Eval { program, facts, goal, modal, strategy, profile, common } => {
            init_trace(common.trace);
            let mut db = load_facts(facts.as_ref())?.database;
            let parsed = parse_program(&read(&program)?).map_err(|e| Failure::at(Some(&program), e))?;
            let parsed_goal = match goal {
                Some(g) => Some(parse_atom(&g)?),
                None => parsed.goal.clone(),
            };
            let mut query = nestlog::syntax::ParsedProgram { goal: parsed_goal, ..parsed }.into_query()?;
            db.extend(query.program.facts.drain(..));
            if modal && !query.program.is_modal() {
                query = Query { goal: query.goal.clone(), program: query.program.with_mode(Some(Mode::Box)) };
            }
            let nested: Box<dyn NestedSemantics> = match profile {
                Some(p) => Box::new(SemanticsProfile::parse(&p)?),
                None => Box::new(SubstitutionStrategy::parse(&strategy)?),
            };
            let answers = answer_with(&query, &db, nested.as_ref())?;
            let rel = Relation::from_answers(&query.goal, &answers);
            Ok(Table::from_relation(&rel).render(common.format))
        }
        Command::Algebra { expr, profile, translated, check, common } => {
            init_trace(common.trace);
            let opts = options(&expr);
            let (e, facts) = load_expr(&expr)?;
            let profile = SemanticsProfile::parse(&profile)?;
            if check {
                let report = check_translation_equivalence(&e, &facts.database, &profile, opts)?;
                let mut t = Table::new(report.direct.schema.iter().map(|a| a.to_string()).collect());
                t.columns.push("side".into());
                for (rows, side) in [(&report.only_direct, "direct only"), (&report.only_translated, "translated only")]
                {
                    for row in rows {
                        let mut cells: Vec<Cell> = row.iter().map(Cell::from).collect();
                        cells.push(Cell::from(side));
                        t.rows.push(cells);
                    }
                }
                t.notes.push(if report.equivalent() { "equivalent".into() } else { "NOT equivalent".into() });
                return Ok(t.render(common.format));
            }
            let rel = if translated {
                eval_translated(&e, &facts.database, &profile, opts)?
            } else {
                eval_with_options(&e, &facts.database, &profile, opts)?
            };
            Ok(Table::from_relation(&rel).render(common.format))
        }
        Command::Translate { expr, common } => {
            init_trace(common.trace);
            let (e, _) = load_expr(&expr)?;
            let q = translate_algebra(&e, options(&expr))?;
            match common.format {
                Format::Table => Ok(q.to_string()),
                Format::Json => {
                    let mut t = Table::new(vec!["goal".into(), "rule".into()]);
                    let goal = q.goal.to_string();
                    for r in &q.program.rules {
                        t.rows.push(vec![Cell::from(goal.as_str()), Cell::from(r.to_string().as_str())]);
                    }
                    if q.program.rules.is_empty() {
                        t.rows.push(vec![Cell::from(goal.as_str()), Cell::Value(None)]);
                    }
                    Ok(t.render(Format::Json))
                }
            }
        }
        Command::Compare { expr, profiles, common } => {
            init_trace(common.trace);
            let opts = options(&expr);
            let (e, facts) = load_expr(&expr)?;
            let profiles = profiles.iter().map(|p| SemanticsProfile::parse(p)).collect::<Result<Vec<_>, _>>()?;
            let cmp = compare_profiles(&e, &facts.database, &profiles, opts)?;
            let mut t =
                Table::new(cmp.schema.iter().map(|a| a.to_string()).chain(cmp.profiles.iter().cloned()).collect());
            for (tuple, row) in &cmp.matrix {
                t.rows.push(tuple.iter().map(Cell::from).chain(row.iter().map(|&b| Cell::Flag(b))).collect());
            }
            for a in &cmp.attributions {
                let tuple: Vec<String> = a.tuple.iter().map(ToString::to_string).collect();
                let knobs: Vec<String> = a.knobs.iter().map(ToString::to_string).collect();
                t.notes.push(format!(
                    "({}): {} vs {}: {}",
                    tuple.join(", "),
                    a.from,
                    a.to,
                    if knobs.is_empty() { "no single knob".into() } else { knobs.join(", ") }
                ));
            }
            Ok(t.render(common.format))
        }
        Command::Oracle { check, common } => {
            init_trace(common.trace);
            let report = match check {
                OracleCheck::Literal => exhaustive_literal_check()?,
                OracleCheck::Operator => exhaustive_operator_check()?,
            };
            let mut t = Table::new(vec!["check".into(), "decisions".into(), "mismatches".into()]);
            let name = format!("{check:?}").to_lowercase();
            t.rows.push(vec![
                Cell::from(name.as_str()),
                Cell::Count(report.checked),
                Cell::Count(report.mismatches.len()),
            ]);
            t.notes = report.mismatches.clone();
            let out = t.render(common.format);
            if report.agrees() {
                Ok(out)
            } else {
                Err(Failure::Internal(format!("{out}oracle disagreement")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(out)) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Err(Failure::User(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
