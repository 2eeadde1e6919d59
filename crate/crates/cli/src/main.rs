//! Command-line driver for the ultramet library.
//!
//! Exit codes: 0 for success and true verdicts, 1 for false verdicts,
//! 2 for input or usage errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ultramet::format::{parse_space, space_to_json};
use ultramet::funcspace::{embed_space, materialize_product, DegreeFunction, DEFAULT_PRODUCT_BOUND};
use ultramet::gen::{gen_cantor, gen_random};
use ultramet::isometry::{
    check_condition_a, check_condition_b, check_property_h, extend_isometry, is_homogeneous,
    is_homogeneous_brute, is_spec_homogeneous, is_spec_homogeneous_brute, is_transitive,
    isometric, SearchLimits,
};
use ultramet::nerve::{build_nerve, degree_sequence, NerveTree};
use ultramet::twostruct::{decomposition_tree_of_space, matches_nerve, DecompositionTree};
use ultramet::{parse_rational, Rational, Space};

/// Prints a line to stdout, quitting quietly if the reader closed the pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut lock = std::io::stdout().lock();
        if writeln!(lock, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

fn say_block(text: &str) {
    use std::io::Write;
    if std::io::stdout().lock().write_all(text.as_bytes()).is_err() {
        std::process::exit(0);
    }
}

#[derive(Parser)]
#[command(name = "ultramet", version, about = "Finite ultrametric spaces over exact rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a space file.
    Validate { file: PathBuf },
    /// Print a summary of a space.
    Info { file: PathBuf },
    /// Print the tree of closed balls.
    Nerve {
        file: PathBuf,
        /// Emit a JSON document with a "nodes" array instead of text.
        #[arg(long)]
        machine: bool,
    },
    /// Decide structural properties.
    Check(CheckArgs),
    /// Extend a partial self-isometry to the whole space.
    Extend {
        file: PathBuf,
        /// Comma-separated pairs, e.g. "a:b,c:d".
        #[arg(long)]
        map: String,
    },
    /// Embed the space into the function space over its spectrum.
    Embed { file: PathBuf },
    /// Search for an isometry between two spaces.
    Isometric { file_a: PathBuf, file_b: PathBuf },
    /// Print the decomposition tree (robust modules).
    Decompose {
        file: PathBuf,
        /// Also check that the tree equals the nerve.
        #[arg(long)]
        verify_nerve: bool,
    },
    /// Generate spaces.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long)]
    homogeneous: bool,
    #[arg(long)]
    spec_homogeneous: bool,
    #[arg(long)]
    transitive: bool,
    #[arg(long)]
    condition_a: bool,
    #[arg(long)]
    condition_b: bool,
    #[arg(long)]
    property_h: bool,
    /// Decide by exhaustive enumeration (size-limited) instead of the
    /// characterization-based procedures.
    #[arg(long)]
    brute_force: bool,
    /// Size limit for exhaustive partial-isometry enumeration.
    #[arg(long, default_value_t = 6)]
    partial_limit: usize,
    /// Size limit for exhaustive automorphism enumeration.
    #[arg(long, default_value_t = 8)]
    automorphism_limit: usize,
}

#[derive(Subcommand)]
enum GenCommand {
    /// All n-bit strings, distance 1/(first differing index + 1).
    Cantor {
        #[arg(long)]
        depth: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The full product over a degree function, e.g. "1/2:2,1:3".
    Product {
        #[arg(long)]
        spectrum: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// A random dendrogram, deterministic in the seed.
    Random {
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated increasing values, e.g. "1/2,1".
        #[arg(long)]
        pool: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf) -> Result<Space<Rational>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_space(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(space: &Space<Rational>, output: Option<PathBuf>) -> Result<bool, String> {
    let json = space_to_json(space);
    match output {
        Some(path) => fs::write(&path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))?,
        None => say!("{json}"),
    }
    Ok(true)
}

fn format_spectrum(values: impl IntoIterator<Item = Rational>) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Validate { file } => {
            let space = load(&file)?;
            say!(
                "valid: {} points, diameter {}, spectrum {}",
                space.len(),
                space.diameter(),
                format_spectrum(space.spectrum())
            );
            Ok(true)
        }
        Command::Info { file } => {
            let space = load(&file)?;
            say!("points: {}", space.len());
            say!("diameter: {}", space.diameter());
            say!("spectrum: {}", format_spectrum(space.spectrum()));
            say!("distinct point spectra: {}", space.multispectrum().len());
            let degrees = degree_sequence(&space);
            let parts: Vec<String> =
                degrees.per_radius().iter().map(|(r, k)| format!("{r}: {k}")).collect();
            say!("degree sequence: {{{}}}", parts.join(", "));
            let (h1, h2) = check_property_h(&space);
            say!("property-h1: {h1}");
            say!("property-h2: {h2}");
            Ok(true)
        }
        Command::Nerve { file, machine } => {
            let space = load(&file)?;
            let tree = build_nerve(&space);
            if machine {
                say!("{}", nerve_json(&space, &tree));
            } else {
                say_block(&render_nerve(&space, &tree));
            }
            Ok(true)
        }
        Command::Check(args) => check(args),
        Command::Extend { file, map } => {
            let space = load(&file)?;
            let pairs = parse_map(&space, &map)?;
            match extend_isometry(&space, &pairs).map_err(|e| e.to_string())? {
                Some(full) => {
                    say!("extends: true");
                    for (x, y) in full.iter().enumerate() {
                        say!("{} -> {}", space.point_id(x), space.point_id(*y));
                    }
                    Ok(true)
                }
                None => {
                    say!("extends: false");
                    Ok(false)
                }
            }
        }
        Command::Embed { file } => {
            let space = load(&file)?;
            let emb = embed_space(&space);
            for (i, point) in emb.psi().iter().enumerate() {
                let parts: Vec<String> =
                    point.map().iter().map(|(r, v)| format!("{r}: {v}")).collect();
                say!("{} -> {{{}}}", space.point_id(i), parts.join(", "));
            }
            say!("spectrum: {}", format_spectrum(space.spectrum()));
            let parts: Vec<String> =
                emb.degrees().map().iter().map(|(r, k)| format!("{r}: {k}")).collect();
            say!("degrees: {{{}}}", parts.join(", "));
            Ok(true)
        }
        Command::Isometric { file_a, file_b } => {
            let a = load(&file_a)?;
            let b = load(&file_b)?;
            match isometric(&a, &b) {
                Some(map) => {
                    say!("isometric: true");
                    for (x, y) in map.iter().enumerate() {
                        say!("{} -> {}", a.point_id(x), b.point_id(*y));
                    }
                    Ok(true)
                }
                None => {
                    say!("isometric: false");
                    Ok(false)
                }
            }
        }
        Command::Decompose { file, verify_nerve } => {
            let space = load(&file)?;
            let tree = decomposition_tree_of_space(&space);
            say_block(&render_decomposition(&space, &tree));
            if verify_nerve {
                let agrees = matches_nerve(&tree, &build_nerve(&space));
                say!("decomposition tree matches nerve: {agrees}");
                return Ok(agrees);
            }
            Ok(true)
        }
        Command::Gen(command) => match command {
            GenCommand::Cantor { depth, output } => {
                let space = gen_cantor(depth).map_err(|e| e.to_string())?;
                emit(&space, output)
            }
            GenCommand::Product { spectrum, output } => {
                let df = parse_degree_function(&spectrum)?;
                let space =
                    materialize_product(&df, DEFAULT_PRODUCT_BOUND).map_err(|e| e.to_string())?;
                emit(&space, output)
            }
            GenCommand::Random { points, seed, pool, output } => {
                let pool = parse_pool(&pool)?;
                let space = gen_random(points, seed, &pool).map_err(|e| e.to_string())?;
                emit(&space, output)
            }
        },
    }
}

fn check(args: CheckArgs) -> Result<bool, String> {
    let space = load(&args.file)?;
    let limits = SearchLimits {
        partial_enumeration: args.partial_limit,
        automorphism_enumeration: args.automorphism_limit,
    };
    let all_selected = !(args.homogeneous
        || args.spec_homogeneous
        || args.transitive
        || args.condition_a
        || args.condition_b
        || args.property_h);
    let mut verdict = true;
    let mut note = |name: &str, value: bool| {
        say!("{name}: {value}");
        verdict &= value;
    };
    if args.homogeneous || all_selected {
        let value = if args.brute_force {
            is_homogeneous_brute(&space, &limits).map_err(|e| e.to_string())?
        } else {
            is_homogeneous(&space)
        };
        note("homogeneous", value);
    }
    if args.spec_homogeneous || all_selected {
        let value = if args.brute_force {
            is_spec_homogeneous_brute(&space, &limits).map_err(|e| e.to_string())?
        } else {
            is_spec_homogeneous(&space)
        };
        note("spec-homogeneous", value);
    }
    if args.transitive || all_selected {
        note("transitive", is_transitive(&space));
    }
    if args.condition_a || all_selected {
        note("condition-a", check_condition_a(&space));
    }
    if args.condition_b || all_selected {
        note("condition-b", check_condition_b(&space));
    }
    if args.property_h || all_selected {
        let (h1, h2) = check_property_h(&space);
        note("property-h1", h1);
        note("property-h2", h2);
    }
    Ok(verdict)
}

fn parse_map(space: &Space<Rational>, text: &str) -> Result<BTreeMap<usize, usize>, String> {
    let mut out = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (from, to) = part
            .split_once(':')
            .ok_or_else(|| format!("bad map entry {part:?}, expected \"from:to\""))?;
        let x = space.point_index(from.trim()).map_err(|e| e.to_string())?;
        let y = space.point_index(to.trim()).map_err(|e| e.to_string())?;
        if out.insert(x, y).is_some() {
            return Err(format!("point {from:?} mapped twice"));
        }
    }
    Ok(out)
}

fn parse_degree_function(text: &str) -> Result<DegreeFunction<Rational>, String> {
    let mut pairs = Vec::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (radius, degree) = part
            .split_once(':')
            .ok_or_else(|| format!("bad spectrum entry {part:?}, expected \"radius:degree\""))?;
        let r = parse_rational(radius.trim()).map_err(|e| e.to_string())?;
        let k: usize =
            degree.trim().parse().map_err(|_| format!("bad degree {degree:?}"))?;
        pairs.push((r, k));
    }
    DegreeFunction::new(pairs).map_err(|e| e.to_string())
}

fn parse_pool(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| parse_rational(p.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn render_nerve(space: &Space<Rational>, tree: &NerveTree<Rational>) -> String {
    let mut out = String::new();
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((node, depth)) = stack.pop() {
        let n = tree.node(node);
        let _ = writeln!(
            out,
            "{}{} {}",
            "  ".repeat(depth),
            n.diameter(),
            space.format_set(n.members())
        );
        for &child in n.children().iter().rev() {
            stack.push((child, depth + 1));
        }
    }
    out
}

fn render_decomposition(space: &Space<Rational>, tree: &DecompositionTree<Rational>) -> String {
    let mut out = String::new();
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((node, depth)) = stack.pop() {
        let n = tree.node(node);
        let label = n.label().map_or_else(|| "0".to_string(), |l| l.to_string());
        let _ = writeln!(out, "{}{} {}", "  ".repeat(depth), label, space.format_set(n.members()));
        for &child in n.children().iter().rev() {
            stack.push((child, depth + 1));
        }
    }
    out
}

fn nerve_json(space: &Space<Rational>, tree: &NerveTree<Rational>) -> String {
    let mut distances = Vec::new();
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            distances.push(serde_json::json!([
                space.point_id(i),
                space.point_id(j),
                space.dist(i, j).to_string()
            ]));
        }
    }
    let nodes: Vec<serde_json::Value> = tree
        .nodes()
        .iter()
        .map(|n| {
            let members: Vec<&str> = n.members().iter().map(|&i| space.point_id(i)).collect();
            serde_json::json!({
                "members": members,
                "diameter": n.diameter().to_string(),
                "parent": n.parent(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "points": space.points(),
        "distances": distances,
        "nodes": nodes,
    });
    serde_json::to_string_pretty(&doc).expect("json values always serialize")
}
