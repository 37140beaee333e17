//! The `fcolor` command line.
//!
//! Every command first builds a JSON results document; the human-readable
//! output is rendered from that document.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::chargraph::BlockSource;
use crate::codec::{
    build_codebook, kraft_sum, pack_bits, replica_set_distribution, verify_zero_error, Decoder,
    Encoder,
};
use crate::coloring::{
    bfold_chromatic_number, coloring_distribution, coloring_entropy, covering_program,
    min_entropy_coloring_with, vertex_pmf, FoldColoring, Objective,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::graphs::{enumerate_independent_sets, export_dot, Graph};
use crate::instance::load_instance;
use crate::lp::{solve_ilp, solve_lp};
use crate::probability::{Pmf, SourceModel};
use crate::rates::{integrality_gap, monotonicity_table, rate_at, Palette};
use crate::results::{rational_string, Document};

/// Exit status when a run finishes but detects a property violation.
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fcolor", version, about = "Characteristic-graph coloring and coding with side information")]
pub struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Print the results document instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Add version, thread and timestamp metadata.
    #[arg(long, global = true)]
    pub meta: bool,
    /// Include the covering program and its solution.
    #[arg(long, global = true)]
    pub dump_lp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic graph of the n-block source.
    Build(BuildArgs),
    /// Chromatic or minimum-entropy a:b coloring.
    Color(ColorArgs),
    /// Traditional and fractional rates and the integrality gap.
    Rates(RatesArgs),
    /// Build the code, run the encoder and decoder, verify zero error.
    Codec(CodecArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub n: u64,
    /// Write the graph as DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["min_entropy", "chromatic"])))]
pub struct ColorArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub n: u64,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub b: u64,
    #[arg(long)]
    pub min_entropy: bool,
    #[arg(long)]
    pub chromatic: bool,
    /// Palette size for --min-entropy (default: unrestricted for b = 1, χ_b otherwise).
    #[arg(long, value_parser = positive)]
    pub a: Option<u64>,
    /// Minimize the sum of per-replica color entropies instead of the set entropy.
    #[arg(long, requires = "min_entropy")]
    pub replica_ordered: bool,
    /// Write the colored graph as DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub n: u64,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub b_max: u64,
    /// Also tabulate the gap for every block length 1..=n.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub n: u64,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub b: u64,
    /// Side information, n symbols separated by commas.
    #[arg(long, allow_hyphen_values = true, requires = "replicas")]
    pub side: Option<String>,
    /// b replica sequences separated by `;`, symbols by `,`.
    #[arg(long, allow_hyphen_values = true, requires = "side")]
    pub replicas: Option<String>,
    /// Exhaustively check zero-error decoding.
    #[arg(long)]
    pub verify: bool,
    /// Write the transmitted bits, packed, to this file.
    #[arg(long, requires = "replicas")]
    pub binary: Option<PathBuf>,
    /// Use the χ_b coloring from the integer program instead of the min-entropy one.
    #[arg(long)]
    pub chromatic: bool,
}

fn positive(text: &str) -> std::result::Result<u64, String> {
    match text.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Parse `args`, run, and print to `out`/`err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    exec::set_parallel(!cli.sequential && cfg!(feature = "parallel"));
    let outcome = Budget::from_env()
        .and_then(|budget| exec::with_threads(cli.threads, || execute(&cli, &budget)));
    match outcome {
        Ok((mut doc, violation)) => {
            if cli.meta {
                doc.set("meta", meta(&cli));
            }
            let text = if cli.json {
                doc.to_json() + "\n"
            } else {
                render(&doc.value())
            };
            let _ = out.write_all(text.as_bytes());
            if violation {
                EXIT_VIOLATION
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Entry point of the `fcolor` binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn meta(cli: &Cli) -> Value {
    let unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "threads": cli.threads,
        "parallel": exec::parallel_enabled(),
        "unix_time": unix,
    })
}

fn execute(cli: &Cli, budget: &Budget) -> Result<(Document, bool)> {
    match &cli.command {
        Command::Build(a) => cmd_build(a, cli.dump_lp, budget).map(|d| (d, false)),
        Command::Color(a) => cmd_color(a, cli.dump_lp, budget).map(|d| (d, false)),
        Command::Rates(a) => cmd_rates(a, budget),
        Command::Codec(a) => cmd_codec(a, budget),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn lp_dump(g: &Graph, b: usize, budget: &Budget) -> Result<Value> {
    let (program, _) = covering_program(g, b, budget)?;
    let relaxed = solve_lp(&program);
    let integral = solve_ilp(&program, budget)?;
    Ok(json!({"program": program, "lp": relaxed, "ilp": integral}))
}

fn block_pmf(block: &BlockSource) -> Result<Pmf> {
    vertex_pmf(block.graph(), block.vertex_probs())
}

pub fn cmd_build(args: &BuildArgs, dump_lp: bool, budget: &Budget) -> Result<Document> {
    let model = load_instance(&args.instance)?;
    let block = BlockSource::new(&model, args.n as usize, budget)?;
    let g = block.graph();
    let maximal = enumerate_independent_sets(g, true, budget)?;
    let all = enumerate_independent_sets(g, false, budget).ok().map(|f| f.len());
    let mut doc = Document::new("build");
    doc.set("n", args.n)
        .set("vertices", g.vertex_count())
        .set("edges", g.edge_count())
        .set("maximal_independent_sets", maximal.len())
        .set("independent_sets", all)
        .set("graph", g.to_doc());
    if let Some(path) = &args.dot {
        write_file(path, export_dot(g, None)?.as_bytes())?;
        doc.set("dot", path.display().to_string());
    }
    if dump_lp {
        doc.set("lp", lp_dump(g, 1, budget)?);
    }
    Ok(doc)
}

fn coloring_fields(doc: &mut Document, g: &Graph, c: &FoldColoring, pmf: &Pmf, scale: usize) -> Result<()> {
    let dist = coloring_distribution(g, c, pmf)?;
    let h = coloring_entropy(g, c, pmf)?;
    doc.set("entropy_bits", h)
        .set("rate_bits_per_symbol", h / scale as f64)
        .set("distinct_sets", c.distinct_sets())
        .set("distribution", dist)
        .set("coloring", c.to_value(g));
    Ok(())
}

pub fn cmd_color(args: &ColorArgs, dump_lp: bool, budget: &Budget) -> Result<Document> {
    let model = load_instance(&args.instance)?;
    let (n, b) = (args.n as usize, args.b as usize);
    let block = BlockSource::new(&model, n, budget)?;
    let g = block.graph();
    let pmf = block_pmf(&block)?;
    let (chi_b, witness) = bfold_chromatic_number(g, b, budget)?;
    let mut doc = Document::new("color");
    doc.set("n", n).set("b", b).set("chi_b", chi_b);
    let coloring = if args.chromatic {
        doc.set("mode", "chromatic").set("a", chi_b).set("optimal", true);
        coloring_fields(&mut doc, g, &witness, &pmf, n * b)?;
        witness
    } else {
        let a = match args.a {
            Some(a) => a as usize,
            None if b == 1 => g.vertex_count(),
            None => chi_b,
        };
        let objective = if args.replica_ordered {
            Objective::ReplicaOrdered
        } else {
            Objective::ColorSet
        };
        let found = min_entropy_coloring_with(g, &pmf, b, a, objective, budget)?;
        doc.set("mode", "min-entropy")
            .set("objective", objective)
            .set("a", a)
            .set("optimal", found.optimal)
            .set("objective_bits", found.entropy)
            .set("lower_bound_bits", found.lower_bound);
        coloring_fields(&mut doc, g, &found.coloring, &pmf, n * b)?;
        found.coloring
    };
    if let Some(path) = &args.dot {
        write_file(path, export_dot(g, Some(&coloring))?.as_bytes())?;
        doc.set("dot", path.display().to_string());
    }
    if dump_lp {
        doc.set("lp", lp_dump(g, b, budget)?);
    }
    Ok(doc)
}

fn rate_row(r: &crate::rates::RateReport) -> Value {
    json!({
        "b": r.b,
        "a": r.a,
        "chi_b": r.chi_b,
        "entropy_bits": r.entropy_bits,
        "rate_bits_per_symbol": r.rate_bits_per_symbol,
        "conditional_rate": r.conditional_rate,
        "distinct_sets": r.distinct_sets,
        "optimal": r.optimal,
    })
}

fn gap_value(g: &crate::rates::GapReport) -> Value {
    let rows: Vec<Value> = g
        .fractional
        .rows
        .iter()
        .map(|row| match &row.report {
            Some(r) => rate_row(r),
            None => json!({"b": row.b, "error": row.error}),
        })
        .collect();
    json!({
        "n": g.n,
        "b_max": g.b_max,
        "rows": rows,
        "traditional_rate": g.traditional_rate,
        "fractional_rate": g.fractional_rate,
        "b_star_n": g.b_star_n,
        "ig": g.ig,
        "ig_interval": g.ig_interval,
        "chi_f": rational_string(&g.chi_f),
        "conjecture_lower_bound": g.conjecture_lower_bound,
    })
}

pub fn cmd_rates(args: &RatesArgs, budget: &Budget) -> Result<(Document, bool)> {
    let model = load_instance(&args.instance)?;
    let (n, b_max) = (args.n as usize, args.b_max as usize);
    let mut doc = Document::new("rates");
    let mut violation = false;
    match integrality_gap(&model, n, b_max, budget) {
        Ok(g) => {
            doc.set("gap", gap_value(&g));
        }
        Err(Error::UndefinedGap(msg)) => {
            doc.set("gap", json!({"n": n, "b_max": b_max, "undefined": msg}));
        }
        Err(e) => return Err(e),
    }
    if args.table {
        let t = monotonicity_table(&model, n, b_max, budget)?;
        let rows: Vec<Value> = t
            .rows
            .iter()
            .map(|r| match &r.report {
                Some(g) => json!({"n": r.n, "ig": g.ig, "ig_interval": g.ig_interval,
                    "traditional_rate": g.traditional_rate, "fractional_rate": g.fractional_rate}),
                None => json!({"n": r.n, "error": r.error}),
            })
            .collect();
        violation = !t.violations.is_empty();
        doc.set("monotonicity", json!({"rows": rows, "violations": t.violations}));
    }
    Ok((doc, violation))
}

fn split_symbols(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).collect()
}

pub fn cmd_codec(args: &CodecArgs, budget: &Budget) -> Result<(Document, bool)> {
    let model: SourceModel = load_instance(&args.instance)?;
    let (n, b) = (args.n as usize, args.b as usize);
    let block = BlockSource::new(&model, n, budget)?;
    let g = block.graph();
    let coloring = if args.chromatic {
        bfold_chromatic_number(g, b, budget)?.1
    } else {
        rate_at(&block, b, Palette::Default, budget)?.coloring
    };
    let law = replica_set_distribution(&block, &coloring, b, budget)?;
    let codebook = build_codebook(&law)?;
    let mut doc = Document::new("codec");
    doc.set("n", n)
        .set("b", b)
        .set("coloring_source", if args.chromatic { "chromatic" } else { "min-entropy" })
        .set("a", coloring.a)
        .set("coloring", coloring.to_value(g))
        .set("codebook", &codebook)
        .set("kraft_sum", rational_string(&kraft_sum(&codebook)))
        .set(
            "model_bits_per_outcome",
            rational_string(&(&codebook.average_length / num_bigint::BigInt::from(n * b))),
        );
    let mut violation = false;
    if let (Some(side), Some(replicas)) = (&args.side, &args.replicas) {
        let reps: Vec<Vec<String>> = replicas.split(';').map(split_symbols).collect();
        let side = split_symbols(side);
        let encoded = Encoder::new(&block, &coloring, &codebook).encode(&reps)?;
        let decoded = Decoder::new(&block, &coloring, &codebook).decode(&encoded.codeword, &side)?;
        if let Some(path) = &args.binary {
            write_file(path, &pack_bits(&encoded.codeword)?)?;
            doc.set("binary", path.display().to_string());
        }
        doc.set(
            "transcript",
            json!({
                "replicas": reps,
                "side": side,
                "encoded": encoded,
                "decoded": decoded,
                "outcomes": decoded.outcomes(),
            }),
        );
    }
    if args.verify {
        let report = verify_zero_error(&block, &coloring, &codebook, b, budget)?;
        violation = !report.passed();
        doc.set("verify", report);
    }
    Ok((doc, violation))
}

fn f4(v: &Value) -> String {
    v.as_f64().map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn s(v: &Value) -> String {
    match v {
        Value::String(t) => t.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

/// Human-readable text for a results document.
pub fn render(doc: &Value) -> String {
    match doc["command"].as_str() {
        Some("build") => render_build(doc),
        Some("color") => render_color(doc),
        Some("rates") => render_rates(doc),
        Some("codec") => render_codec(doc),
        _ => serde_json::to_string_pretty(doc).unwrap_or_default() + "\n",
    }
}

fn render_build(d: &Value) -> String {
    let mut o = format!(
        "n = {}: {} vertices, {} edges\nmaximal independent sets: {}\nindependent sets: {}\n",
        d["n"],
        d["vertices"],
        d["edges"],
        d["maximal_independent_sets"],
        s(&d["independent_sets"])
    );
    if let Some(p) = d["dot"].as_str() {
        o += &format!("dot written to {p}\n");
    }
    if let Some(lp) = d.get("lp") {
        o += &format!("covering LP optimum {}, integer optimum {}\n", s(&lp["lp"]["optimum"]), s(&lp["ilp"]["optimum"]));
    }
    o
}

fn render_distribution(d: &Value) -> String {
    let mut o = String::from("  color set      probability\n");
    let outcomes = d["outcomes"].as_array().cloned().unwrap_or_default();
    let probs = d["probs"].as_array().cloned().unwrap_or_default();
    for (k, p) in outcomes.iter().zip(&probs) {
        o += &format!("  {:<14} {}\n", s(k), s(p));
    }
    o
}

fn render_color(d: &Value) -> String {
    let mut o = format!(
        "{} coloring: a = {}, b = {}, n = {} (chi_b = {})\n",
        s(&d["mode"]),
        d["a"],
        d["b"],
        d["n"],
        d["chi_b"]
    );
    o += &format!(
        "entropy {} bits, rate {} bits/symbol, {} distinct color sets{}\n",
        f4(&d["entropy_bits"]),
        f4(&d["rate_bits_per_symbol"]),
        d["distinct_sets"],
        if d["optimal"] == json!(false) { " (search budget reached)" } else { "" }
    );
    o += &render_distribution(&d["distribution"]);
    o += "assignment:\n";
    if let Some(map) = d["coloring"]["assignment"].as_object() {
        for (v, colors) in map {
            o += &format!("  {v:<14} {colors}\n");
        }
    }
    if let Some(lp) = d.get("lp") {
        o += &format!("covering LP optimum {}, integer optimum {}\n", s(&lp["lp"]["optimum"]), s(&lp["ilp"]["optimum"]));
    }
    o
}

fn render_rates(d: &Value) -> String {
    let g = &d["gap"];
    let mut o = format!("n = {}, b = 1..{}\n", g["n"], g["b_max"]);
    if let Some(msg) = g["undefined"].as_str() {
        o += &format!("gap undefined: {msg}\n");
    } else {
        o += "   b    a  chi_b   entropy      rate  cond.rate  optimal\n";
        for r in g["rows"].as_array().into_iter().flatten() {
            if r.get("error").is_some() {
                o += &format!("{:>4}  {}\n", s(&r["b"]), s(&r["error"]));
                continue;
            }
            o += &format!(
                "{:>4} {:>4} {:>6} {:>9} {:>9} {:>10}  {}\n",
                s(&r["b"]),
                s(&r["a"]),
                s(&r["chi_b"]),
                f4(&r["entropy_bits"]),
                f4(&r["rate_bits_per_symbol"]),
                f4(&r["conditional_rate"]),
                r["optimal"]
            );
        }
        o += &format!("traditional rate   {}\n", f4(&g["traditional_rate"]));
        o += &format!("fractional rate    {} (b* = {})\n", f4(&g["fractional_rate"]), g["b_star_n"]);
        let ig = match g["ig"].as_f64() {
            Some(x) => format!("{x:.4}"),
            None => format!("[{}, {}]", f4(&g["ig_interval"][0]), f4(&g["ig_interval"][1])),
        };
        o += &format!("integrality gap    {ig}\n");
        o += &format!("chi_f(G)           {}\n", s(&g["chi_f"]));
        o += &format!("conjecture bound   {}\n", f4(&g["conjecture_lower_bound"]));
    }
    if let Some(t) = d.get("monotonicity") {
        o += "   n        IG\n";
        for r in t["rows"].as_array().into_iter().flatten() {
            let ig = match r["ig"].as_f64() {
                Some(x) => format!("{x:.4}"),
                None if r.get("error").is_some() => s(&r["error"]),
                None => format!("[{}, {}]", f4(&r["ig_interval"][0]), f4(&r["ig_interval"][1])),
            };
            o += &format!("{:>4} {:>9}\n", s(&r["n"]), ig);
        }
        let v = t["violations"].as_array().map_or(0, Vec::len);
        o += &format!("monotonicity violations: {v}\n");
    }
    o
}

fn render_codec(d: &Value) -> String {
    let mut o = format!(
        "{} coloring, a = {}, b = {}, n = {}\n",
        s(&d["coloring_source"]),
        d["a"],
        d["b"],
        d["n"]
    );
    o += &format!(
        "code: average length {} bits, Kraft sum {}, {} bits per outcome\n",
        s(&d["codebook"]["average_length"]),
        s(&d["kraft_sum"]),
        s(&d["model_bits_per_outcome"])
    );
    o += "  color set      codeword         probability\n";
    for e in d["codebook"]["entries"].as_array().into_iter().flatten() {
        o += &format!("  {:<14} {:<16} {}\n", s(&e["label"]), s(&e["codeword"]), s(&e["probability"]));
    }
    if let Some(t) = d.get("transcript") {
        let reps: Vec<String> = t["replicas"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|r| format!("({})", r.as_array().into_iter().flatten().map(s).collect::<Vec<_>>().join(",")))
            .collect();
        o += &format!("encode {} -> color set {} -> bits {}\n", reps.join(" "), s(&t["encoded"]["label"]), s(&t["encoded"]["codeword"]));
        let side: Vec<String> = t["side"].as_array().into_iter().flatten().map(s).collect();
        o += &format!("decode with side ({})\n", side.join(","));
        for blk in t["decoded"]["blocks"].as_array().into_iter().flatten() {
            for c in blk["colors"].as_array().into_iter().flatten() {
                let outs: Vec<String> = c["outcomes"].as_array().into_iter().flatten().map(s).collect();
                o += &format!("  color {} -> ({})\n", c["color"], outs.join(","));
            }
        }
        let outs: Vec<String> = t["outcomes"].as_array().into_iter().flatten().map(s).collect();
        o += &format!("outcomes: {}\n", outs.join(", "));
    }
    if let Some(v) = d.get("verify") {
        o += &format!(
            "verify: {} cases, {} mismatches, {} bits, {} bits/outcome empirical, {} model\n",
            v["cases"],
            v["mismatches"],
            v["total_bits"],
            f4(&v["empirical_bits_per_outcome"]),
            s(&v["model_bits_per_outcome"])
        );
        if let Some(c) = v["counterexample"].as_str() {
            o += &format!("first failure: {c}\n");
        }
    }
    o
}
