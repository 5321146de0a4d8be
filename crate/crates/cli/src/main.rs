use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use catql::algebra::{eval_set, explain, parse_algebra, AlgebraExpr, ExtSet};
use catql::calculus::{brute_eval, parse_query, CalculusError};
use catql::check::suites;
use catql::compiler::{compile, CompileError};
use catql::ingest::{load_manifest, IngestError};
use catql::model::InstanceCategory;
use catql::optimizer::{optimize, DEFAULT_MAX_PASSES};

#[derive(Parser)]
#[command(name = "catql", version, about = "Query relational, XML and graph data as one category")]
struct Cli {
    /// Schema manifest to load before running the command.
    #[arg(short, long, global = true, env = "CATQL_MANIFEST")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a manifest, validate it and print a summary.
    Load { manifest: PathBuf },
    /// Evaluate a query and print the result as a sorted TSV table.
    Run {
        #[command(flatten)]
        query: QueryArgs,
        /// Skip the optimizer.
        #[arg(long)]
        no_opt: bool,
        /// Also evaluate with the brute-force calculus semantics and fail
        /// on any difference. Exponential in the number of variables.
        #[arg(long)]
        oracle: bool,
    },
    /// Print the compiled plan, one operator per line.
    Explain {
        #[command(flatten)]
        query: QueryArgs,
        /// Show the optimized plan and the applied rewrites as well.
        #[arg(long)]
        diff: bool,
    },
    /// Run the randomized equivalence and rule-soundness checks.
    Check {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// RNG seed; the CATQL_SEED environment variable takes precedence.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the elements of one object as a TSV table.
    Dump { object: String },
}

#[derive(Args)]
struct QueryArgs {
    /// A query file, or the query text itself.
    query: String,
    /// Read the query as an algebra plan (the default for `.alg` files).
    #[arg(long, conflicts_with = "calculus")]
    algebra: bool,
    /// Read the query as a calculus expression.
    #[arg(long)]
    calculus: bool,
}

/// Raised when the compiled plan disagrees with the oracle.
#[derive(Debug)]
struct Mismatch(String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

/// Process exit status for an error, by its root cause.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            return match e {
                IngestError::Io { .. } => 2,
                e if e.is_data_violation() => 3,
                _ => 1,
            };
        }
        if cause.is::<io::Error>() {
            return 2;
        }
        if matches!(cause.downcast_ref::<CalculusError>(), Some(CalculusError::UnsafeQuery(_)))
            || matches!(cause.downcast_ref::<CompileError>(), Some(CompileError::Unsafe(_)))
        {
            return 4;
        }
        if cause.is::<Mismatch>() {
            return 5;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = String::new();
    let result = run(cli, &mut out);
    let _ = io::stdout().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli, out: &mut String) -> Result<u8> {
    match cli.command {
        Command::Load { manifest } => {
            let inst = load(&manifest)?;
            summary(&inst, out);
            Ok(0)
        }
        Command::Run { query, no_opt, oracle } => {
            let inst = load(required_manifest(&cli.manifest)?)?;
            run_query(&inst, &query, no_opt, oracle, out)?;
            Ok(0)
        }
        Command::Explain { query, diff } => {
            let inst = load(required_manifest(&cli.manifest)?)?;
            let plan = plan_of(&inst, &query)?;
            if diff {
                let opt = optimize(&plan, &inst, DEFAULT_MAX_PASSES);
                let _ = writeln!(out, "-- plan (cost {})", opt.before);
                out.push_str(&explain(&plan));
                let _ = writeln!(out, "-- optimized (cost {})", opt.after);
                out.push_str(&explain(&opt.plan));
                let _ = writeln!(out, "-- trace");
                for step in &opt.trace {
                    let _ = writeln!(out, "{step}");
                }
            } else {
                out.push_str(&explain(&plan));
            }
            Ok(0)
        }
        Command::Check { trials, seed } => {
            let seed = match std::env::var("CATQL_SEED") {
                Ok(s) => s.trim().parse().with_context(|| format!("CATQL_SEED={s:?} is not a seed"))?,
                Err(_) => seed,
            };
            if trials == 0 {
                eprintln!("warning: --trials 0 runs no trials; every property passes vacuously");
            }
            let outcomes = suites::run_all(seed, trials);
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            for o in &outcomes {
                let status = if o.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{status} {} ({} trials, {} failures)", o.property, o.trials, o.failures);
                if let Some(first) = &o.first_failure {
                    let _ = writeln!(out, "  first failure: {first}");
                }
            }
            let _ = writeln!(out, "{} of {} properties passed (seed {seed})", outcomes.len() - failed, outcomes.len());
            Ok(if failed == 0 { 0 } else { 5 })
        }
        Command::Dump { object } => {
            let inst = load(required_manifest(&cli.manifest)?)?;
            if !inst.has_object(&object) {
                bail!("unknown object {object}");
            }
            let set = eval_set(&AlgebraExpr::base(object), &inst)?.unpacked(&inst);
            write_table(&set, out);
            Ok(0)
        }
    }
}

fn required_manifest(m: &Option<PathBuf>) -> Result<&Path> {
    m.as_deref().ok_or_else(|| anyhow!("no manifest: pass --manifest or set CATQL_MANIFEST"))
}

fn load(path: &Path) -> Result<InstanceCategory> {
    Ok(load_manifest(path)?)
}

fn summary(inst: &InstanceCategory, out: &mut String) {
    let objects: Vec<_> = inst.objects().collect();
    let _ = writeln!(out, "{} objects, {} morphisms", objects.len(), inst.morphisms().count());
    for o in objects {
        let _ = writeln!(out, "{}\t{}\t{}", o.name, o.kind, o.len());
    }
}

enum Query {
    Calculus(String),
    Algebra(String),
}

fn read_query(args: &QueryArgs) -> Result<Query> {
    let path = Path::new(&args.query);
    let (text, is_alg_file) = if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        (text, path.extension().is_some_and(|e| e == "alg"))
    } else if args.query.contains(['{', '(']) {
        (args.query.clone(), false)
    } else {
        return Err(anyhow::Error::new(io::Error::new(io::ErrorKind::NotFound, format!("{}: no such query file", args.query))));
    };
    Ok(if args.algebra || (is_alg_file && !args.calculus) { Query::Algebra(text) } else { Query::Calculus(text) })
}

fn plan_of(inst: &InstanceCategory, args: &QueryArgs) -> Result<AlgebraExpr> {
    Ok(match read_query(args)? {
        Query::Algebra(text) => parse_algebra(&text)?,
        Query::Calculus(text) => compile(&parse_query(&text, inst)?, inst)?,
    })
}

fn run_query(inst: &InstanceCategory, args: &QueryArgs, no_opt: bool, oracle: bool, out: &mut String) -> Result<()> {
    let query = read_query(args)?;
    let (plan, calculus) = match &query {
        Query::Algebra(text) => (parse_algebra(text)?, None),
        Query::Calculus(text) => {
            let q = parse_query(text, inst)?;
            (compile(&q, inst)?, Some(q))
        }
    };
    let plan = if no_opt { plan } else { optimize(&plan, inst, DEFAULT_MAX_PASSES).plan };
    let result = eval_set(&plan, inst)?;
    if oracle {
        let q = calculus.ok_or_else(|| anyhow!("--oracle needs a calculus query"))?;
        let expected = brute_eval(inst, &q)?;
        if expected.rows != result.rows {
            let missing = expected.rows.difference(&result.rows).count();
            let extra = result.rows.difference(&expected.rows).count();
            return Err(Mismatch(format!("plan result differs from the oracle: {missing} rows missing, {extra} extra")).into());
        }
    }
    write_table(&result, out);
    Ok(())
}

/// Header of column names, then rows sorted by their text.
fn write_table(set: &ExtSet, out: &mut String) {
    let _ = writeln!(out, "{}", set.column_names().join("\t"));
    let mut lines: Vec<String> =
        set.rows.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t")).collect();
    lines.sort();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
}
