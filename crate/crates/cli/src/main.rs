//! `adaptree`: validate, evaluate and analyse `.atree` rule files, run
//! headless game simulations and start the game server.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptree_core::dsl::{parse_with_source_map, RuleDocument, SourceMap};
use adaptree_core::model::ContextSnapshot;
use adaptree_core::simulation::{simulate, to_csv, SimulationConfig};
use adaptree_core::tree::{
    check_distributive, evaluate, evaluate_chain, extract_rules, to_decision_table, to_region_table,
    AdaptionFunction, AdaptionTree, DistributiveError, DistributiveOutcome, Severity, TableError,
};
use adaptree_core::bundled;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

const EXIT_FAILURE: u8 = 1;
const EXIT_TOO_LARGE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "adaptree", version, about = "Adaption-tree rule engine tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a rule file; exits 1 when any error is reported.
    Validate { file: PathBuf },
    /// Evaluate a rule file on a snapshot of `name=value` lines.
    Eval {
        file: PathBuf,
        /// Snapshot file, one `name=value` per line (times as HH:MM).
        #[arg(long)]
        context: PathBuf,
        /// Evaluate this tree alone instead of the whole priority chain.
        #[arg(long)]
        tree: Option<String>,
    },
    /// Print one `IF … THEN …` rule per root-to-leaf path.
    Rules {
        file: PathBuf,
        #[arg(long)]
        tree: Option<String>,
    },
    /// Print a tree's decision table as CSV; exits 2 when it is too large.
    Table {
        file: PathBuf,
        #[arg(long)]
        tree: String,
        /// Merge adjacent rows with the same outcome.
        #[arg(long, conflicts_with = "regions")]
        compress: bool,
        /// One row per region of values the tree does not distinguish.
        #[arg(long)]
        regions: bool,
    },
    /// Check that the trees in PARTS together equal the tree in FULL;
    /// exits 1 and prints a counterexample otherwise.
    CheckDistributive {
        full: PathBuf,
        parts: PathBuf,
        /// Tree of FULL to use when it holds more than one.
        #[arg(long)]
        tree: Option<String>,
    },
    /// Play scripted players through the game and print per-unit CSV.
    Simulate {
        #[arg(long, default_value_t = 10)]
        users: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        units: usize,
        /// Rule file driving the theme; the bundled game rules by default.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Run the HTTP game server.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Rule file; the bundled game rules by default.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

/// A failed command: message for stderr and the exit code.
struct Failure(u8, String);

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_NO_INPUT, format!("{}: {e}", path.display())))
}

fn located(path: &Path, d: &impl std::fmt::Display) -> String {
    format!("{}:{d}", path.display())
}

/// Reads and parses a rule file, failing with every diagnostic on a parse
/// error or a validation error.
fn load(path: &Path) -> Result<(RuleDocument, SourceMap), Failure> {
    let src = read(path)?;
    parse_with_source_map(&src).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| located(path, d)).collect();
        Failure(EXIT_DATA, lines.join("\n"))
    })
}

fn load_valid(path: &Path) -> Result<RuleDocument, Failure> {
    let (doc, map) = load(path)?;
    let errors: Vec<String> = doc
        .validate(Some(&map))
        .iter()
        .filter(|d| d.is_error())
        .map(|d| located(path, d))
        .collect();
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(Failure(EXIT_DATA, errors.join("\n")))
    }
}

fn tree<'d>(doc: &'d RuleDocument, path: &Path, name: &str) -> Result<&'d AdaptionTree, Failure> {
    doc.tree(name)
        .ok_or_else(|| Failure(EXIT_USAGE, format!("{}: no tree named `{name}`", path.display())))
}

fn validate(file: &Path) -> Outcome {
    let (doc, map) = load(file)?;
    let diags = doc.validate(Some(&map));
    let mut out = String::new();
    for d in &diags {
        writeln!(out, "{}", located(file, d)).unwrap();
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return Err(Failure(EXIT_FAILURE, out.trim_end().to_string()));
    }
    Ok(out)
}

fn eval(file: &Path, context: &Path, tree_name: Option<&str>) -> Outcome {
    let doc = load_valid(file)?;
    let text = read(context)?;
    let snapshot = ContextSnapshot::parse_kv(&text, &doc.schema)
        .map_err(|e| Failure(EXIT_DATA, format!("{}:{}: {}", context.display(), e.line, e.message)))?;
    let result = match tree_name {
        Some(name) => evaluate(tree(&doc, file, name)?, &snapshot),
        None => evaluate_chain(&doc.trees, &snapshot),
    };
    result
        .map(|actions| actions.to_lines())
        .map_err(|e| Failure(EXIT_FAILURE, format!("evaluation failed: {e}")))
}

fn rules(file: &Path, tree_name: Option<&str>) -> Outcome {
    let doc = load_valid(file)?;
    let mut out = String::new();
    match tree_name {
        Some(name) => {
            for rule in extract_rules(tree(&doc, file, name)?) {
                writeln!(out, "{rule}").unwrap();
            }
        }
        None => {
            for t in &doc.trees {
                for rule in extract_rules(t) {
                    writeln!(out, "[{}] {rule}", t.name).unwrap();
                }
            }
        }
    }
    Ok(out)
}

fn table_failure(e: TableError) -> Failure {
    match e {
        TableError::DomainTooLarge { .. } => Failure(EXIT_TOO_LARGE, e.to_string()),
        TableError::UnknownVariable(_) => Failure(EXIT_DATA, e.to_string()),
    }
}

fn table(file: &Path, tree_name: &str, compress: bool, regions: bool) -> Outcome {
    let doc = load_valid(file)?;
    let t = tree(&doc, file, tree_name)?;
    let table = if regions {
        to_region_table(t, &doc.schema)
    } else {
        to_decision_table(t, &doc.schema)
    }
    .map_err(table_failure)?;
    Ok(if compress { table.compressed() } else { table }.to_csv())
}

fn check(full_path: &Path, parts_path: &Path, tree_name: Option<&str>) -> Outcome {
    let full_doc = load_valid(full_path)?;
    let parts_doc = load_valid(parts_path)?;
    let full_tree = match tree_name {
        Some(name) => tree(&full_doc, full_path, name)?,
        None => match full_doc.trees.as_slice() {
            [only] => only,
            _ => {
                return Err(Failure(
                    EXIT_USAGE,
                    format!("{}: holds several trees; choose one with --tree", full_path.display()),
                ))
            }
        },
    };
    let function = |t: &AdaptionTree, path: &Path| {
        AdaptionFunction::from_tree(t.clone()).map_err(|e| Failure(EXIT_DATA, format!("{}: {e}", path.display())))
    };
    let full = function(full_tree, full_path)?;
    let parts = parts_doc
        .trees
        .iter()
        .map(|t| function(t, parts_path))
        .collect::<Result<Vec<_>, _>>()?;
    for var in parts_doc.schema.variables() {
        if full_doc.schema.get(&var.name).is_some_and(|v| v.domain != var.domain) {
            return Err(Failure(
                EXIT_DATA,
                format!("`{}` is declared with different domains in the two files", var.name),
            ));
        }
    }
    match check_distributive(&full, &parts, &full_doc.schema) {
        Ok(DistributiveOutcome::Holds { regions, covered }) => Ok(format!(
            "distributive: holds ({regions} regions covering {covered} snapshots)\n"
        )),
        Ok(DistributiveOutcome::Fails(cx)) => {
            let show = |r: &Result<_, String>| match r {
                Ok(a) => format!("{a}"),
                Err(e) => format!("error: {e}"),
            };
            Err(Failure(
                EXIT_FAILURE,
                format!(
                    "distributive: fails\ncounterexample:\n{}full:  {}\nparts: {}",
                    cx.snapshot.to_kv(),
                    show(&cx.full),
                    show(&cx.parts)
                ),
            ))
        }
        Err(DistributiveError::Table(e)) => Err(table_failure(e)),
        Err(e) => Err(Failure(EXIT_DATA, e.to_string())),
    }
}

fn rules_or_bundled(rules: Option<&Path>) -> Result<RuleDocument, Failure> {
    match rules {
        Some(path) => load_valid(path),
        None => Ok(bundled::arith_game()),
    }
}

fn run_simulation(users: usize, seed: u64, units: usize, rules: Option<&Path>) -> Outcome {
    let doc = rules_or_bundled(rules)?;
    simulate(&doc, SimulationConfig { users, seed, units })
        .map(|rows| to_csv(&rows))
        .map_err(|e| Failure(EXIT_FAILURE, format!("simulation failed: {e}")))
}

fn serve(host: std::net::IpAddr, port: u16, rules: Option<&Path>) -> Outcome {
    let doc = rules_or_bundled(rules)?;
    let config = adaptree_service::Config::from_env(doc).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    runtime
        .block_on(adaptree_service::serve(config, SocketAddr::new(host, port)))
        .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    Ok(String::new())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Eval { file, context, tree } => eval(file, context, tree.as_deref()),
        Command::Rules { file, tree } => rules(file, tree.as_deref()),
        Command::Table { file, tree, compress, regions } => table(file, tree, *compress, *regions),
        Command::CheckDistributive { full, parts, tree } => check(full, parts, tree.as_deref()),
        Command::Simulate { users, seed, units, rules } => run_simulation(*users, *seed, *units, rules.as_deref()),
        Command::Serve { port, host, rules } => serve(*host, *port, rules.as_deref()),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, message)) => {
            if code == EXIT_FAILURE && matches!(cli.command, Command::Validate { .. } | Command::CheckDistributive { .. }) {
                println!("{message}");
            } else {
                eprintln!("adaptree: {message}");
            }
            ExitCode::from(code)
        }
    }
}
