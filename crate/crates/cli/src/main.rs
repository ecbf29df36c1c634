//! `rgc`: enumerate ribbon graphs, check the differential identities, and
//! compute cohomology tables from the command line.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use rgc_core::cache::{encode_matrix, encode_records, Cache, CACHE_DIR_ENV, DEFAULT_CACHE_DIR};
use rgc_core::complex::{build, cohomology, euler, ComplexSpec, Context, Sector};
use rgc_core::enumerate::{enumerate_bruteforce, EnumSpec, Enumerator, BRUTE_FORCE_MAX_HALF_EDGES};
use rgc_core::gc::{gc_build, gc_cohomology, GcSpec};
use rgc_core::identities::{check_parities, Fault, IdentityBounds};
use rgc_core::report::{determinism, evaluate, payload_json, run_suite_with_jobs, SuiteConfig};
use rgc_core::ribbon::named;
use rgc_core::{ComplexError, Parity};

#[derive(Parser, Debug)]
#[command(name = "rgc", version, about = "Ribbon graph complexes")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Recompute everything, reading and writing no cache files.
    #[arg(long, global = true)]
    no_cache: bool,
    /// JSON object of long flag names to values. Flags on the command line win;
    /// keys the chosen subcommand does not take are skipped.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List the nonzero oriented classes of one `(g, n, E)` cell.
    Enumerate(EnumerateArgs),
    /// Run the identity, enumeration-oracle and rank-oracle checks.
    Check(CheckArgs),
    /// Cohomology table of a KP or MW complex, or the ordinary graph complex.
    Cohomology(CohomologyArgs),
    /// Write bases, matrices or named graphs to files.
    Export(ExportArgs),
    /// Run the full verification suite and print one line per criterion.
    Suite(SuiteArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Parity {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Jsonl,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(short = 'g', long)]
    genus: usize,
    #[arg(short = 'n', long)]
    boundaries: usize,
    #[arg(short = 'E', long)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    min_valence: usize,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    parity: ParityArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Use the brute-force scan instead of the fast enumerator.
    #[arg(long)]
    brute_force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ParitySel {
    Even,
    Odd,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FaultArg {
    NegateFirstSplit,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    g_max: usize,
    #[arg(long)]
    e_max: usize,
    #[arg(long, value_enum, default_value_t = ParitySel::Both)]
    parity: ParitySel,
    #[arg(long, default_value_t = 2)]
    min_valence: usize,
    /// Inject a sign error (for testing the checker).
    #[arg(long, value_enum, hide = true)]
    fault: Option<FaultArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum KindArg {
    Kp,
    Mw,
    Gc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SectorArg {
    Full,
    Ge3,
    Le2,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Sector {
        match s {
            SectorArg::Full => Sector::Full,
            SectorArg::Ge3 => Sector::Ge3,
            SectorArg::Le2 => Sector::Le2,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Emit {
    Table,
    Json,
    Dot,
}

/// `a..b` (inclusive) or a single edge count.
fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok((parse(a)?, parse(b)?))
        }
        None => {
            let k = parse(s)?;
            Ok((k, k))
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(short = 'g', long, default_value_t = 0)]
    genus: usize,
    /// Boundary count (KP only).
    #[arg(short = 'n', long)]
    boundaries: Option<usize>,
    /// Loop order (GC only).
    #[arg(long)]
    loop_order: Option<usize>,
    #[arg(short = 'd', long = "d", default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, value_enum, default_value_t = SectorArg::Full)]
    sector: SectorArg,
    /// Edge range, `a..b` inclusive.
    #[arg(short = 'E', long = "edges", value_parser = parse_range)]
    edges: (usize, usize),
}

impl SpecArgs {
    fn ribbon(&self) -> Result<ComplexSpec> {
        let (lo, hi) = self.edges;
        let spec = match self.kind {
            KindArg::Kp => {
                let Some(n) = self.boundaries else {
                    return Err(ComplexError::InvalidSpec("KP complexes need -n".into()).into());
                };
                ComplexSpec::kp(self.genus, n, self.d, self.sector.into(), lo, hi)
            }
            KindArg::Mw => {
                let mut s = ComplexSpec::mw(self.genus, self.d, self.sector.into(), lo, hi);
                s.boundaries = self.boundaries;
                s
            }
            KindArg::Gc => bail!("not a ribbon graph complex"),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn gc(&self) -> Result<GcSpec> {
        let Some(l) = self.loop_order else {
            return Err(ComplexError::InvalidSpec("--kind gc needs --loop-order".into()).into());
        };
        let mut s = GcSpec::new(l, self.d, self.edges.0, self.edges.1);
        s.min_valence = Sector::from(self.sector).min_valence();
        if self.sector == SectorArg::Le2 {
            return Err(ComplexError::InvalidSpec("no bivalent-only sector for ordinary graphs".into()).into());
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug)]
struct CohomologyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = Emit::Table)]
    emit: Emit,
    /// Degree whose generators `--emit dot` writes.
    #[arg(long, allow_hyphen_values = true)]
    degree: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExportWhat {
    /// The basis of one cell as JSON lines with header and footer comments.
    Basis {
        #[arg(short = 'g', long)]
        genus: usize,
        #[arg(short = 'n', long)]
        boundaries: usize,
        #[arg(short = 'E', long)]
        edges: usize,
        #[arg(long, default_value_t = 2)]
        min_valence: usize,
        #[arg(long, value_enum, default_value_t = ParityArg::Even)]
        parity: ParityArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// The total differential leaving edge count `--from` in triplet format.
    Matrix {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// A named graph: loop, segment, banana, double-loop, theta0, theta1,
    /// dumbbell, or polygon-K.
    Graph {
        name: String,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(subcommand)]
    what: ExportWhat,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Profile {
    Quick,
    Acceptance,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value_t = Profile::Quick)]
    profile: Profile,
    /// Where to write the JSON payload.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also rerun with this many threads and compare payloads.
    #[arg(long)]
    compare_jobs: Option<usize>,
}

/// Appends `--key value` for every config entry whose flag is absent.
fn apply_config(args: Vec<String>) -> Result<Vec<String>> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args.get(pos + 1).cloned().context("--config needs a path")?,
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text).with_context(|| format!("parsing config {path}"))? else {
        bail!("config {path} must be a JSON object");
    };
    let mut cmd = Cli::command();
    cmd.build();
    let known = long_flags(&cmd, true);
    // the innermost subcommand named on the command line
    let mut sub = &cmd;
    for a in args.iter().skip(1) {
        if let Some(s) = sub.find_subcommand(a) {
            sub = s;
        }
    }
    let accepted = long_flags(sub, false);
    let mut out = args.clone();
    for (key, value) in map {
        if !known.contains(&key) {
            bail!("config {path}: unknown flag {key}");
        }
        let flag = format!("--{key}");
        if !accepted.contains(&key) || args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.push(format!("{flag}={s}")),
            Value::Number(n) => out.push(format!("{flag}={n}")),
            other => bail!("config value for {key} must be a scalar, got {other}"),
        }
    }
    Ok(out)
}

fn long_flags(cmd: &clap::Command, recurse: bool) -> Vec<String> {
    let mut out: Vec<String> = cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
    if recurse {
        for s in cmd.get_subcommands() {
            out.extend(long_flags(s, true));
        }
    }
    out
}

fn cache_of(cli: &Cli) -> Cache {
    if cli.no_cache {
        Cache::disabled()
    } else {
        Cache::at(cli.cache_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)))
    }
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<ExitCode> {
    let spec = EnumSpec::new(a.genus, a.boundaries, a.edges, a.min_valence, a.parity.into());
    let en = if a.brute_force {
        if 2 * a.edges > BRUTE_FORCE_MAX_HALF_EDGES {
            return Err(ComplexError::Refused(format!("brute force needs 2E <= {BRUTE_FORCE_MAX_HALF_EDGES}")).into());
        }
        enumerate_bruteforce(spec).map_err(ComplexError::Refused)?
    } else {
        if 2 * a.edges > rgc_core::ribbon::MAX_HALF_EDGES {
            return Err(ComplexError::Refused("too many edges for the half-edge encoding".into()).into());
        }
        Enumerator::new().enumerate(spec)
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&en)? + "\n",
        Format::Jsonl => encode_records("ribbon", "basis", &spec, &en.classes, &(en.zero_classes, &en.note))?,
        Format::Text => {
            let mut s = format!(
                "g={} n={} E={} min-valence={} parity={}: {} classes ({} nonzero, {} zero)\n",
                a.genus,
                a.boundaries,
                a.edges,
                a.min_valence,
                spec.parity.tag(),
                en.total_classes(),
                en.classes.len(),
                en.zero_classes
            );
            if let Some(n) = &en.note {
                s.push_str(&format!("note: {n}\n"));
            }
            for c in &en.classes {
                let g = &c.canonical_graph;
                s.push_str(&format!("{} sigma0={:?} sigma1={:?}\n", &c.hash[..16], g.sigma0(), g.sigma1()));
            }
            s
        }
    };
    write_or_print(&a.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: &CheckArgs, cli: &Cli) -> Result<ExitCode> {
    let parities = match a.parity {
        ParitySel::Even => vec![Parity::Even],
        ParitySel::Odd => vec![Parity::Odd],
        ParitySel::Both => vec![Parity::Even, Parity::Odd],
    };
    let ctx = Context::new(cache_of(cli));
    let bounds = IdentityBounds {
        genus_min: 0,
        genus_max: a.g_max,
        edges_max: a.e_max,
        min_valence: a.min_valence,
    };
    let fault = a.fault.map(|_| Fault::NegateFirstSplit);
    let mut ok = true;
    for r in check_parities(&ctx.enumerator, ctx.convention, fault, bounds, &parities) {
        println!(
            "identities {}: {} generators, {} violations",
            r.parity.tag(),
            r.generators,
            r.violations.len()
        );
        if let Some(v) = r.violations.first() {
            println!(
                "  first violation: {} on generator {} {:?}",
                v.check,
                v.generator,
                v.graph.to_json()
            );
        }
        ok &= r.passed();
    }
    let oracle_edges = a.e_max.min(BRUTE_FORCE_MAX_HALF_EDGES / 2);
    if oracle_edges > 0 {
        let o = rgc_core::report::enumeration_oracle(&ctx, oracle_edges)?;
        println!(
            "enumeration oracle (E <= {oracle_edges}): {} specs, {} mismatches",
            o.classes.len(),
            o.mismatches.len()
        );
        ok &= o.mismatches.is_empty() && o.gc_mismatches.is_empty();
    }
    for g in 0..=a.g_max {
        if a.e_max < 1 {
            break;
        }
        for &p in &parities {
            let d = if p == Parity::Even { 0 } else { 1 };
            let spec = ComplexSpec::mw(g, d, Sector::Full, 1, a.e_max);
            let t = cohomology(&build(&spec, &ctx)?)?;
            let good = t.matrices.iter().filter(|m| m.rank.certified()).count();
            println!("rank oracle MW g={g} {}: {good}/{} matrices certified", p.tag(), t.matrices.len());
            ok &= t.all_ranks_certified();
        }
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_cohomology(a: &CohomologyArgs, cli: &Cli) -> Result<ExitCode> {
    let cache = cache_of(cli);
    if a.spec.kind == KindArg::Gc {
        let spec = a.spec.gc()?;
        let slice = gc_build(&spec, &cache)?;
        let text = match a.emit {
            Emit::Dot => {
                let k = a.degree.context("--emit dot needs --degree")?;
                slice
                    .bases
                    .iter()
                    .filter(|(&e, _)| spec.degree(e) == k)
                    .flat_map(|(_, b)| b.iter().map(|g| g.to_dot()))
                    .collect()
            }
            Emit::Json => serde_json::to_string_pretty(&gc_cohomology(&slice)?)? + "\n",
            Emit::Table => {
                let t = gc_cohomology(&slice)?;
                let mut s = format!(
                    "GC2 L={} d={} min-valence={} E={}..{}\n",
                    spec.loop_order, spec.d, spec.min_valence, spec.e_min, spec.e_max
                );
                s.push_str(&format!(
                    "{:>6} {:>4} {:>8} {:>8} {:>8} {:>6}  status\n",
                    "degree", "E", "dim", "rank_in", "rank_out", "h"
                ));
                for r in &t.rows {
                    s.push_str(&format!(
                        "{:>6} {:>4} {:>8} {:>8} {:>8} {:>6}  {}\n",
                        r.degree,
                        r.edges,
                        r.dim,
                        r.rank_in,
                        r.rank_out,
                        r.h,
                        serde_json::to_value(r.status)?.as_str().unwrap_or_default()
                    ));
                }
                s
            }
        };
        write_or_print(&a.out, &text)?;
        return Ok(ExitCode::SUCCESS);
    }
    let spec = a.spec.ribbon()?;
    let ctx = Context::new(cache);
    let slice = build(&spec, &ctx)?;
    let text = match a.emit {
        Emit::Dot => {
            let k = a.degree.context("--emit dot needs --degree")?;
            let mut s = String::new();
            for (&e, cells) in &slice.cells {
                if spec.degree(e) != k {
                    continue;
                }
                for c in cells.iter().flat_map(|c| c.classes.iter()) {
                    s.push_str(&format!("// {}\n", c.hash));
                    s.push_str(&c.canonical_graph.to_dot());
                }
            }
            s
        }
        Emit::Json => {
            let t = cohomology(&slice)?;
            let eu = euler(&slice, &t);
            serde_json::to_string_pretty(&serde_json::json!({ "table": t, "euler": eu }))? + "\n"
        }
        Emit::Table => {
            let t = cohomology(&slice)?;
            let eu = euler(&slice, &t);
            format!(
                "{}euler characteristic: {} (from h: {})\n",
                t.to_text(),
                eu.total,
                eu.from_cohomology
            )
        }
    };
    write_or_print(&a.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn named_graph(name: &str) -> Result<rgc_core::RibbonGraph> {
    Ok(match name {
        "loop" => named::loop_graph(),
        "segment" => named::segment(),
        "banana" => named::banana(),
        "double-loop" => named::double_loop(),
        "theta0" => named::theta_planar(),
        "theta1" => named::theta_genus1(),
        "dumbbell" => named::dumbbell(),
        other => match other.strip_prefix("polygon-").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k >= 1 => named::polygon(k),
            _ => return Err(ComplexError::InvalidSpec(format!("unknown graph {other:?}")).into()),
        },
    })
}

fn cmd_export(a: &ExportArgs, cli: &Cli) -> Result<ExitCode> {
    match &a.what {
        ExportWhat::Basis {
            genus,
            boundaries,
            edges,
            min_valence,
            parity,
            out,
        } => {
            let spec = EnumSpec::new(*genus, *boundaries, *edges, *min_valence, (*parity).into());
            let en = Enumerator::new().enumerate(spec);
            fs::write(
                out,
                encode_records("ribbon", "basis", &spec, &en.classes, &(en.zero_classes, &en.note))?,
            )?;
        }
        ExportWhat::Matrix { spec, from, out } => {
            let s = spec.ribbon()?;
            if *from < s.e_min || *from >= s.e_max {
                return Err(ComplexError::InvalidSpec(format!("--from must lie in {}..{}", s.e_min, s.e_max - 1)).into());
            }
            let slice = build(&s, &Context::new(cache_of(cli)))?;
            let m = slice.differential(*from)?;
            fs::write(
                out,
                encode_matrix("ribbon", "differential", &(s, from), &m, &slice.dropped_terms())?,
            )?;
        }
        ExportWhat::Graph { name, format, out } => {
            let g = named_graph(name)?;
            let text = match format {
                GraphFormat::Dot => g.to_dot(),
                GraphFormat::Json => serde_json::to_string(&g)? + "\n",
            };
            write_or_print(out, &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_suite(a: &SuiteArgs, cli: &Cli) -> Result<ExitCode> {
    let config = match a.profile {
        Profile::Quick => SuiteConfig::quick(),
        Profile::Acceptance => SuiteConfig::acceptance(),
    };
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let first = run_suite_with_jobs(&config, cache_of(cli), jobs)?;
    let mut results = evaluate(&first);
    if let Some(j2) = a.compare_jobs {
        let second = run_suite_with_jobs(&config, cache_of(cli), j2)?;
        results.push(determinism(&first, &second, (jobs, j2)));
    }
    for r in &results {
        println!("{}", r.line());
    }
    if let Some(p) = &a.out {
        fs::write(p, payload_json(&first))?;
    }
    Ok(if results.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global()?;
    }
    match &cli.cmd {
        Cmd::Enumerate(a) => cmd_enumerate(a),
        Cmd::Check(a) => cmd_check(a, cli),
        Cmd::Cohomology(a) => cmd_cohomology(a, cli),
        Cmd::Export(a) => cmd_export(a, cli),
        Cmd::Suite(a) => cmd_suite(a, cli),
    }
}

fn exit_code(e: &anyhow::Error) -> ExitCode {
    match e.downcast_ref::<ComplexError>() {
        Some(ComplexError::InvalidSpec(_) | ComplexError::Refused(_)) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let args = match apply_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
