use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tourflag::canon::{enumerate, MAX_ENUM};
use tourflag::catalog::{lookup, resolve, reverse_lookup};
use tourflag::certificate::{load_certificate, verify_with, VerifyOptions};
use tourflag::density::density;
use tourflag::exact::to_f64;
use tourflag::structures::{
    c3_decompose, default_sizes, empirical_limit, known_limit, Decomposition, DecompositionTree, Family, LimitOptions,
    LimitRow,
};
use tourflag::Error;

#[derive(Parser)]
#[command(name = "tourflag", version, about = "Exact flag-algebra computations for tournaments")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Directory searched for certificate files.
    #[arg(long, global = true, default_value = "certs")]
    cert_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the isomorphism classes of tournaments on n vertices.
    Enumerate {
        n: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Induced density p(pattern; host) as an exact rational.
    Density { pattern: String, host: String },
    /// Check a semidefinite certificate.
    Verify {
        certificate: PathBuf,
        /// Compare against the expected slack table.
        #[arg(long)]
        tables: bool,
        /// Check the declared rank-1 decompositions.
        #[arg(long)]
        rank1: bool,
        /// Check the declared eigenpairs.
        #[arg(long)]
        eigen: bool,
        /// Compare characteristic polynomials.
        #[arg(long)]
        charpoly: bool,
    },
    /// C3-decomposition tree, or a forbidden 5-vertex witness.
    Decompose { tournament: String },
    /// Densities along one of the extremal families.
    Limits {
        family: FamilyArg,
        target: String,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of subsets counted exactly per host.
        #[arg(long, default_value_t = LimitOptions::default().budget)]
        budget: u64,
        /// Random family: tournaments sampled per size.
        #[arg(long, default_value_t = 500)]
        tournaments: usize,
        /// Random family: subsets sampled per tournament.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Carousel,
    Triangular,
    Random,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Carousel => Family::Carousel,
            FamilyArg::Triangular => Family::Triangular,
            FamilyArg::Random => Family::Random,
        }
    }
}

enum Failure {
    Verification,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capability(_) => 3,
        _ => 2,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Enumerate { n, count_only } => cmd_enumerate(cli, *n, *count_only),
        Command::Density { pattern, host } => cmd_density(cli, pattern, host),
        Command::Verify { certificate, tables, rank1, eigen, charpoly } => {
            let opts = VerifyOptions { tables: *tables, rank1: *rank1, eigen: *eigen, charpoly: *charpoly };
            cmd_verify(cli, certificate, opts)
        }
        Command::Decompose { tournament } => cmd_decompose(cli, tournament),
        Command::Limits { family, target, max_size, seed, budget, tournaments, samples } => {
            let opts = LimitOptions { seed: *seed, budget: *budget, tournaments: *tournaments, samples_per_tournament: *samples };
            cmd_limits(cli, (*family).into(), target, *max_size, opts)
        }
    }
}

fn cmd_enumerate(cli: &Cli, n: usize, count_only: bool) -> Result<(), Failure> {
    if n > MAX_ENUM {
        return Err(Error::Capability(format!("enumeration is limited to n ≤ {MAX_ENUM}")).into());
    }
    let classes = enumerate(n)?;
    if count_only {
        if cli.json {
            print_json(&json!({ "n": n, "count": classes.len() }));
        } else {
            println!("{}", classes.len());
        }
        return Ok(());
    }
    if cli.json {
        let list: Vec<Value> =
            classes.iter().map(|t| json!({ "encoding": t.encode(), "name": reverse_lookup(t) })).collect();
        print_json(&json!({ "n": n, "count": classes.len(), "tournaments": list }));
    } else {
        for t in classes {
            match reverse_lookup(t) {
                Some(name) => println!("{}  {name}", t.encode()),
                None => println!("{}", t.encode()),
            }
        }
    }
    Ok(())
}

fn cmd_density(cli: &Cli, pattern: &str, host: &str) -> Result<(), Failure> {
    let p = resolve(pattern)?;
    let u = resolve(host)?;
    let d = density(&p, &u)?;
    if cli.json {
        print_json(&json!({ "pattern": pattern, "host": host, "density": d.to_string(), "approx": to_f64(&d) }));
    } else if d.is_integer() {
        println!("{d}");
    } else {
        println!("{d}  (≈ {:.6})", to_f64(&d));
    }
    Ok(())
}

// A bare name like "t5_7" is looked up in the certificate directory and its
// fixtures/ subdirectory.
fn locate(dir: &Path, arg: &Path) -> PathBuf {
    if arg.exists() {
        return arg.to_path_buf();
    }
    let file = arg.file_name().map(PathBuf::from).unwrap_or_default();
    let mut candidates = vec![dir.join(arg), dir.join(&file), dir.join("fixtures").join(&file)];
    if arg.extension().is_none() {
        candidates.extend(candidates.clone().into_iter().map(|c| c.with_extension("json")));
    }
    candidates.into_iter().find(|c| c.exists()).unwrap_or_else(|| arg.to_path_buf())
}

fn cmd_verify(cli: &Cli, path: &Path, opts: VerifyOptions) -> Result<(), Failure> {
    let cert = load_certificate(locate(&cli.cert_dir, path))?;
    let report = verify_with(&cert, opts)?;
    if cli.json {
        let mut v = serde_json::to_value(&report).expect("serializable");
        v["passed"] = report.passed().into();
        print_json(&v);
    } else {
        println!("certificate for {} (ℓ = {})", report.target, cert.ell);
        for c in &report.checks {
            println!("{}  {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        if opts.tables {
            println!("slack table:");
            for e in &report.slack.entries {
                println!("  {:<6} {}", e.name, e.value);
            }
        }
        println!("bound {} (claimed {})", report.computed_bound, report.claimed_bound);
        println!("{}", if report.passed() { "verified" } else { "FAILED" });
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn print_tree(node: &DecompositionTree, label: &str, depth: usize) {
    println!("{:indent$}{label}{:?}", "", node.vertices, indent = 2 * depth);
    for (name, part) in ["A", "B", "C"].iter().zip(node.parts()) {
        if let Some(p) = part {
            if !node.is_leaf() {
                print_tree(p, &format!("{name} "), depth + 1);
            }
        }
    }
}

fn cmd_decompose(cli: &Cli, input: &str) -> Result<(), Failure> {
    let t = resolve(input)?;
    match c3_decompose(&t) {
        Decomposition::Tree(tree) => {
            if cli.json {
                print_json(&json!({ "decomposable": true, "tree": tree }));
            } else {
                println!("C3-decomposable; top parts {:?}", tree.top_sizes());
                print_tree(&tree, "", 0);
            }
        }
        Decomposition::Forbidden(w) => {
            if cli.json {
                print_json(&json!({ "decomposable": false, "witness": w }));
            } else {
                println!("not C3-decomposable: {} on {:?}", w.pattern, w.subset);
            }
        }
    }
    Ok(())
}

fn print_rows(cli: &Cli, family: Family, target: &str, rows: &[LimitRow], seed: u64) {
    let limit = known_limit(family, target);
    if cli.json {
        print_json(&json!({
            "target": target,
            "limit": limit.as_ref().map(|l| l.to_string()),
            "seed": (family == Family::Random).then_some(seed),
            "rows": rows,
        }));
        return;
    }
    match &limit {
        Some(l) => println!("{target}: limit {l} (≈ {:.6})", to_f64(l)),
        None => println!("{target}: no known limit for this family"),
    }
    for r in rows {
        let gap = r.gap.map(|g| format!("{g:.6}")).unwrap_or_else(|| "-".into());
        match (&r.exact, r.samples) {
            (Some(exact), _) => println!("{:>5}  {:.6}  gap {gap}  = {exact}", r.size, r.density),
            (None, Some(n)) => println!(
                "{:>5}  {:.6}  gap {gap}  ± {:.6} ({n} samples, seed {seed})",
                r.size,
                r.density,
                r.stderr.unwrap_or(0.0)
            ),
            _ => println!("{:>5}  {:.6}  gap {gap}", r.size, r.density),
        }
    }
}

fn cmd_limits(cli: &Cli, family: Family, target: &str, max: Option<usize>, opts: LimitOptions) -> Result<(), Failure> {
    let t = lookup(target).or_else(|_| resolve(target))?;
    let max = max.unwrap_or(match family {
        Family::Carousel => 41,
        Family::Triangular => 81,
        Family::Random => 200,
    });
    let sizes = default_sizes(family, max);
    match empirical_limit(family, &t, target, &sizes, opts) {
        Ok(rows) => {
            print_rows(cli, family, target, &rows, opts.seed);
            Ok(())
        }
        Err(e) => {
            print_rows(cli, family, target, &e.partial, opts.seed);
            Err(e.error.into())
        }
    }
}
